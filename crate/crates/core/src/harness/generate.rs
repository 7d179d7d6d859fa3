//! Deterministic instance generators.

use rand::seq::index::sample;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{bohr_set, is_prime, Arc, BohrDescription, Character, GridGroup, GroupSet};
use crate::rng::{seeded_rng, Rng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GeneratorSpec {
    /// Parallel Bohr sets `Bohr(ξ, I)`, `Bohr(ξ, J)` with arc measures drawn from
    /// `[measure_min, measure_max]`, then `round(ρN)` membership flips in each.
    BohrNoise {
        freq: Vec<i64>,
        #[serde(default = "default_measure_min")]
        measure_min: f64,
        #[serde(default = "default_measure_max")]
        measure_max: f64,
        #[serde(default)]
        rho: f64,
    },
    /// Independent membership with probability `density`, redrawn until both sets are nonempty.
    Random {
        #[serde(default = "default_density")]
        density: f64,
    },
    /// Two intervals of a cyclic group with `|A| + |B| - 1 <= N`.
    Interval,
    /// `A = B` = a proper subgroup of index equal to the smallest prime factor.
    AdversarialSubgroup,
}

fn default_measure_min() -> f64 {
    0.15
}

fn default_measure_max() -> f64 {
    0.3
}

fn default_density() -> f64 {
    0.5
}

impl GeneratorSpec {
    pub fn validate(&self, group: &GridGroup) -> Result<()> {
        match self {
            GeneratorSpec::BohrNoise { freq, measure_min, measure_max, rho } => {
                let chi = Character::new(group, freq)?;
                if chi.is_zero() {
                    return Err(Error::ZeroCharacter);
                }
                if !(0.0 < *measure_min && measure_min <= measure_max && *measure_max <= 1.0) {
                    return Err(Error::Malformed(format!("arc measures [{measure_min}, {measure_max}] not inside (0, 1]")));
                }
                if !(0.0..=0.5).contains(rho) {
                    return Err(Error::Malformed(format!("noise fraction {rho} not in [0, 0.5]")));
                }
            }
            GeneratorSpec::Random { density } => {
                if !(*density > 0.0 && *density <= 1.0) {
                    return Err(Error::Malformed(format!("density {density} not in (0, 1]")));
                }
            }
            GeneratorSpec::Interval => {
                if !group.is_cyclic() {
                    return Err(Error::Malformed("interval generator needs a cyclic group".into()));
                }
            }
            GeneratorSpec::AdversarialSubgroup => {
                if !group.has_proper_subgroups() {
                    return Err(Error::Malformed(format!("{group} has no proper nontrivial subgroup")));
                }
            }
        }
        Ok(())
    }
}

fn smallest_prime_factor(n: usize) -> usize {
    (2..=n).find(|p| n.is_multiple_of(*p)).expect("n >= 2")
}

fn flip(set: &mut GroupSet, count: usize, rng: &mut Rng) {
    for x in sample(rng, set.group().size(), count) {
        set.toggle(x);
    }
}

fn random_arc(rng: &mut Rng, l: usize, lo: f64, hi: f64) -> Result<Arc> {
    let min = ((lo * l as f64).ceil() as usize).clamp(1, l);
    let max = ((hi * l as f64).floor() as usize).clamp(min, l);
    let length = rng.gen_range(min..=max);
    Arc::new(l, rng.gen_range(0..l), length)
}

/// The pair for `spec` on `group`, fully determined by `seed`.
pub fn generate(group: &GridGroup, spec: &GeneratorSpec, seed: u64) -> Result<(GroupSet, GroupSet)> {
    spec.validate(group)?;
    let mut rng = seeded_rng(seed);
    let n = group.size();
    match spec {
        GeneratorSpec::BohrNoise { freq, measure_min, measure_max, rho } => {
            let chi = Character::new(group, freq)?;
            let l = chi.order();
            let i = random_arc(&mut rng, l, *measure_min, *measure_max)?;
            let j = random_arc(&mut rng, l, *measure_min, *measure_max)?;
            let mut a = bohr_set(&BohrDescription::new(chi.clone(), i)?)?;
            let mut b = bohr_set(&BohrDescription::new(chi, j)?)?;
            let flips = (rho * n as f64).round() as usize;
            flip(&mut a, flips, &mut rng);
            flip(&mut b, flips, &mut rng);
            Ok((a, b))
        }
        GeneratorSpec::Random { density } => {
            let draw = |rng: &mut Rng| loop {
                let s = GroupSet::from_fn(group, |_| rng.gen_bool(*density));
                if !s.is_empty() {
                    return s;
                }
            };
            let a = draw(&mut rng);
            let b = draw(&mut rng);
            Ok((a, b))
        }
        GeneratorSpec::Interval => {
            let la = rng.gen_range(1..=n);
            let lb = rng.gen_range(1..=n + 1 - la);
            let a = GroupSet::interval(group, rng.gen_range(0..n), la)?;
            let b = GroupSet::interval(group, rng.gen_range(0..n), lb)?;
            Ok((a, b))
        }
        GeneratorSpec::AdversarialSubgroup => {
            let dims = group.dims();
            let p = smallest_prime_factor(dims[0]);
            let h = if is_prime(dims[0]) {
                GroupSet::from_fn(group, |x| group.coords(x)[0] == 0)
            } else {
                GroupSet::from_fn(group, |x| group.coords(x)[0].is_multiple_of(p))
            };
            Ok((h.clone(), h))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inequalities::check_kneser;

    #[test]
    fn bohr_noise_without_noise_is_exact() {
        let g = GridGroup::cyclic(600).unwrap();
        let spec = GeneratorSpec::BohrNoise { freq: vec![5], measure_min: 0.15, measure_max: 0.3, rho: 0.0 };
        let (a, b) = generate(&g, &spec, 3).unwrap();
        let chi = Character::new(&g, &[5]).unwrap();
        for s in [&a, &b] {
            let (_, residual) = crate::inverse::best_arc(s, &chi).unwrap();
            assert_eq!(residual, crate::rational::ratio(0, 1));
            let mu = crate::rational::to_f64(&s.measure());
            assert!((0.15..=0.3).contains(&mu));
        }
        assert_eq!(generate(&g, &spec, 3).unwrap(), (a, b));
    }

    #[test]
    fn noise_flips_exact_count() {
        let g = GridGroup::cyclic(1000).unwrap();
        let clean = GeneratorSpec::BohrNoise { freq: vec![1], measure_min: 0.2, measure_max: 0.2, rho: 0.0 };
        let noisy = GeneratorSpec::BohrNoise { freq: vec![1], measure_min: 0.2, measure_max: 0.2, rho: 0.03 };
        let (a0, _) = generate(&g, &clean, 11).unwrap();
        let (a1, _) = generate(&g, &noisy, 11).unwrap();
        assert_eq!(a0.symmetric_difference(&a1).unwrap().len(), 30);
    }

    #[test]
    fn intervals_fit() {
        let g = GridGroup::cyclic(97).unwrap();
        for seed in 0..50 {
            let (a, b) = generate(&g, &GeneratorSpec::Interval, seed).unwrap();
            assert!(a.len() + b.len() - 1 <= 97);
            assert_eq!(check_kneser(&a, &b).unwrap().defect, crate::rational::ratio(0, 1));
        }
        assert!(generate(&GridGroup::new(&[4, 4]).unwrap(), &GeneratorSpec::Interval, 0).is_err());
    }

    #[test]
    fn adversarial_subgroup_on_z6() {
        let g = GridGroup::cyclic(6).unwrap();
        let (a, b) = generate(&g, &GeneratorSpec::AdversarialSubgroup, 0).unwrap();
        assert_eq!(a.to_vec(), vec![0, 2, 4]);
        assert_eq!(a, b);
        let r = check_kneser(&a, &b).unwrap();
        assert!(!r.holds && r.connectedness_caveat);
        assert!(generate(&GridGroup::cyclic(7).unwrap(), &GeneratorSpec::AdversarialSubgroup, 0).is_err());
        let (h, _) = generate(&GridGroup::new(&[5, 4]).unwrap(), &GeneratorSpec::AdversarialSubgroup, 0).unwrap();
        assert_eq!(h.len(), 4);
    }

    #[test]
    fn bad_specs() {
        let g = GridGroup::cyclic(10).unwrap();
        let spec = GeneratorSpec::BohrNoise { freq: vec![1], measure_min: 0.2, measure_max: 0.3, rho: 0.7 };
        assert!(matches!(generate(&g, &spec, 0), Err(Error::Malformed(_))));
        assert!(generate(&g, &GeneratorSpec::Random { density: 0.0 }, 0).is_err());
    }
}
