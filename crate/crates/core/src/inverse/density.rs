//! Pushforward densities on the image circle of a character, level estimates, and arc fits.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{Arc, Character, GroupSet};
use crate::rational::{self, ratio, Rational};

/// `f(α) = numer[α] / denom` on `Z/L`, where `denom = (N/L)·max(w, 1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityFunction {
    pub circle_size: usize,
    pub numer: Vec<u64>,
    pub denom: u64,
    pub window: usize,
}

impl DensityFunction {
    pub fn value(&self, alpha: usize) -> Rational {
        ratio(self.numer[alpha] as i128, self.denom as i128)
    }

    pub fn value_f64(&self, alpha: usize) -> f64 {
        self.numer[alpha] as f64 / self.denom as f64
    }

    /// `(1/L) Σ_α f(α)`.
    pub fn mass(&self) -> Rational {
        let total: u64 = self.numer.iter().sum();
        ratio(total as i128, self.denom as i128 * self.circle_size as i128)
    }

    /// Columns `alpha, value`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["alpha", "value"])?;
        for alpha in 0..self.circle_size {
            w.write_record([alpha.to_string(), format!("{:.12}", self.value_f64(alpha))])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Default smoothing window `ceil(L/256)`.
pub fn default_window(circle_size: usize) -> usize {
    circle_size.div_ceil(256)
}

/// Fiber averages of `1_A` along `χ`, box-averaged over `w` consecutive classes centered at each
/// point when `w > 1`.
pub fn pushforward(a: &GroupSet, chi: &Character, window: usize) -> Result<DensityFunction> {
    if chi.is_zero() {
        return Err(Error::ZeroCharacter);
    }
    let l = chi.order();
    if window > l {
        return Err(Error::OutOfRange(format!("window {window} exceeds circle size {l}")));
    }
    let mut counts = vec![0u64; l];
    for x in a.iter() {
        counts[chi.eval(x)] += 1;
    }
    let w = window.max(1);
    let numer = if w == 1 {
        counts
    } else {
        let back = w / 2;
        let mut sum: u64 = (0..w).map(|j| counts[(j + l - back) % l]).sum();
        let mut out = Vec::with_capacity(l);
        for alpha in 0..l {
            out.push(sum);
            sum += counts[(alpha + w - back) % l];
            sum -= counts[(alpha + l - back) % l];
        }
        out
    };
    Ok(DensityFunction { circle_size: l, numer, denom: (chi.fiber_size() * w) as u64, window })
}

/// Largest value `t` of `f` such that the values `>= t` carry at least `(1 - θ)` of the mass.
pub fn estimate_sup(f: &DensityFunction, theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::OutOfRange(format!("θ = {theta} not in (0, 1)")));
    }
    let total: u64 = f.numer.iter().sum();
    if total == 0 {
        return Err(Error::ZeroMass);
    }
    let mut values = f.numer.clone();
    values.sort_unstable_by(|a, b| b.cmp(a));
    let need = (1.0 - theta) * total as f64;
    let mut acc = 0u64;
    let mut i = 0;
    while i < values.len() {
        let v = values[i];
        while i < values.len() && values[i] == v {
            acc += v;
            i += 1;
        }
        if acc as f64 >= need {
            return Ok(v as f64 / f.denom as f64);
        }
    }
    unreachable!("the full mass always meets the threshold")
}

#[derive(Clone, Debug, Serialize)]
pub struct Multiplicity {
    pub m: usize,
    pub rounded_inverse: usize,
    /// Arc-fit residual at level `1/m` for `m = 1..=m_max`; `None` where the arc would not fit.
    pub residuals: Vec<Option<f64>>,
}

/// The `m` whose level-`1/m` arc fit has the smallest residual; ties go to `|1/m - τ|`,
/// then to the smaller `m`.
pub fn estimate_multiplicity(f: &DensityFunction, tau: f64, m_max: usize) -> Result<Multiplicity> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::OutOfRange(format!("τ = {tau} not in (0, 1]")));
    }
    if m_max == 0 {
        return Err(Error::OutOfRange("m_max must be at least 1".into()));
    }
    let mass = f.mass();
    let residuals: Vec<Option<f64>> =
        (1..=m_max).map(|m| fit_arc(f, &mass, 1.0 / m as f64).ok().map(|fit| fit.residual)).collect();
    let mut best: Option<(f64, f64, usize)> = None;
    for (i, r) in residuals.iter().enumerate() {
        let Some(r) = *r else { continue };
        let m = i + 1;
        let gap = (1.0 / m as f64 - tau).abs();
        let better = match best {
            None => true,
            Some((br, bg, _)) => r < br - 1e-12 || (r <= br + 1e-12 && gap < bg),
        };
        if better {
            best = Some((r, gap, m));
        }
    }
    let m = best.map(|b| b.2).unwrap_or(1);
    Ok(Multiplicity { m, rounded_inverse: (1.0 / tau).round() as usize, residuals })
}

#[derive(Clone, Debug, Serialize)]
pub struct ArcFit {
    pub arc: Arc,
    /// `(1/L) Σ_α |f(α) - level·1_arc(α)|`.
    pub residual: f64,
    /// `(1/L) Σ_{α ∈ arc} f(α)`.
    #[serde(with = "rational::serde_str")]
    pub captured: Rational,
}

/// The arc of length `round(target_mass·L/level)` capturing the most mass of `f`
/// (smallest start on ties).
pub fn fit_arc(f: &DensityFunction, target_mass: &Rational, level: f64) -> Result<ArcFit> {
    let l = f.circle_size;
    if *target_mass <= Rational::from_integer(0) || *target_mass > Rational::from_integer(1) {
        return Err(Error::OutOfRange(format!("target mass {target_mass} not in (0, 1]")));
    }
    if !(level > 0.0 && level <= 1.0) {
        return Err(Error::OutOfRange(format!("level {level} not in (0, 1]")));
    }
    let len = (rational::to_f64(target_mass) * l as f64 / level).round();
    if len < 1.0 || len > l as f64 {
        return Err(Error::OutOfRange(format!("arc length {len} incompatible with circle size {l}")));
    }
    let len = len as usize;
    let mut sum: u64 = f.numer[..len].iter().sum();
    let (mut best_sum, mut best_start) = (sum, 0);
    for start in 1..l {
        sum += f.numer[(start + len - 1) % l];
        sum -= f.numer[start - 1];
        if sum > best_sum {
            best_sum = sum;
            best_start = start;
        }
    }
    let arc = Arc::new(l, best_start, len)?;
    let mut residual = 0.0;
    for alpha in 0..l {
        let v = f.value_f64(alpha);
        residual += if arc.contains(alpha) { (v - level).abs() } else { v };
    }
    Ok(ArcFit {
        arc,
        residual: residual / l as f64,
        captured: ratio(best_sum as i128, f.denom as i128 * l as i128),
    })
}

/// The arc `I` minimizing `μ(A Δ Bohr(χ, I))`, with that minimum.
pub fn best_arc(a: &GroupSet, chi: &Character) -> Result<(Arc, Rational)> {
    if chi.is_zero() {
        return Err(Error::ZeroCharacter);
    }
    if a.is_empty() {
        return Err(Error::EmptySet("arc-fitting input"));
    }
    let l = chi.order();
    let fiber = chi.fiber_size() as i64;
    let mut gain = vec![-fiber; l];
    for x in a.iter() {
        gain[chi.eval(x)] += 2;
    }
    // |A Δ Bohr(χ, I)| = |A| - Σ_{α ∈ I} gain(α): maximize a circular subarray sum.
    let (mut best, mut best_start, mut best_len) = (i64::MIN, 0, 1);
    let (mut cur, mut cur_start) = (0i64, 0);
    for (i, &g) in gain.iter().enumerate() {
        if cur <= 0 {
            cur = g;
            cur_start = i;
        } else {
            cur += g;
        }
        if cur > best {
            best = cur;
            best_start = cur_start;
            best_len = i - cur_start + 1;
        }
    }
    let total: i64 = gain.iter().sum();
    let (mut low, mut low_end, mut low_len) = (i64::MAX, 0, 0);
    let (mut cur, mut cur_start) = (0i64, 0);
    for (i, &g) in gain.iter().enumerate() {
        if cur >= 0 {
            cur = g;
            cur_start = i;
        } else {
            cur += g;
        }
        if cur < low {
            low = cur;
            low_end = i;
            low_len = i - cur_start + 1;
        }
    }
    if low_len < l && total - low > best {
        best = total - low;
        best_start = (low_end + 1) % l;
        best_len = l - low_len;
    }
    let arc = Arc::new(l, best_start, best_len)?;
    let n = a.group().size() as i128;
    Ok((arc, ratio(a.len() as i128 - best as i128, n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{bohr_set, BohrDescription, GridGroup};

    fn z(n: usize) -> GridGroup {
        GridGroup::cyclic(n).unwrap()
    }

    fn density(values: &[u64], denom: u64) -> DensityFunction {
        DensityFunction { circle_size: values.len(), numer: values.to_vec(), denom, window: 0 }
    }

    #[test]
    fn pushforward_of_bohr_set_is_indicator() {
        let g = z(60);
        let chi = Character::new(&g, &[4]).unwrap();
        let arc = Arc::new(15, 13, 5).unwrap();
        let a = bohr_set(&BohrDescription::new(chi.clone(), arc).unwrap()).unwrap();
        let f = pushforward(&a, &chi, 0).unwrap();
        for alpha in 0..15 {
            assert_eq!(f.value(alpha), ratio(arc.contains(alpha) as i128, 1));
        }
        assert_eq!(f.mass(), a.measure());
    }

    #[test]
    fn pushforward_mass_with_window() {
        let g = z(101);
        let a = GroupSet::from_fn(&g, |x| (x * x) % 7 < 3);
        let chi = Character::new(&g, &[5]).unwrap();
        for w in [0, 1, 2, 5, 17, 101] {
            let f = pushforward(&a, &chi, w).unwrap();
            assert_eq!(f.mass(), a.measure());
            assert!(f.numer.iter().all(|&v| v <= f.denom));
        }
        assert!(pushforward(&a, &chi, 102).is_err());
        assert!(pushforward(&a, &Character::zero(&g), 0).is_err());
        let full = pushforward(&GroupSet::full(&g), &chi, 3).unwrap();
        assert!(full.numer.iter().all(|&v| v == full.denom));
    }

    #[test]
    fn smoothed_interval_under_a_multiple() {
        // [0, 300) in Z/6001 pushed forward by ξ=3 is every third class of [0, 900)
        let g = z(6001);
        let c = GroupSet::interval(&g, 0, 300).unwrap();
        let chi = Character::new(&g, &[3]).unwrap();
        let f = pushforward(&c, &chi, default_window(6001)).unwrap();
        assert_eq!(f.window, 24);
        assert_eq!(f.value(450), ratio(1, 3));
        let tau = estimate_sup(&f, 0.05).unwrap();
        assert!((tau - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(estimate_multiplicity(&f, tau, 16).unwrap().m, 3);
    }

    #[test]
    fn sup_examples() {
        let f = density(&[0, 0, 3, 3, 3, 0], 4);
        assert_eq!(estimate_sup(&f, 0.05).unwrap(), 0.75);
        assert_eq!(estimate_sup(&f, 0.5).unwrap(), 0.75);
        assert_eq!(estimate_sup(&density(&[5; 7], 5), 0.05).unwrap(), 1.0);
        // 2% of the mass sits at lower levels
        let mut v = vec![0u64; 100];
        v[..49].iter_mut().for_each(|x| *x = 2);
        v[60] = 1;
        v[70] = 1;
        assert_eq!(estimate_sup(&density(&v, 6), 0.05).unwrap(), 2.0 / 6.0);
        assert_eq!(estimate_sup(&density(&[0, 0], 1), 0.05).unwrap_err(), Error::ZeroMass);
    }

    #[test]
    fn multiplicity_examples() {
        let f = density(&[0, 1, 1, 1, 0, 0, 0, 0, 0, 0], 1);
        assert_eq!(estimate_multiplicity(&f, 1.0, 16).unwrap().m, 1);

        // τ = 0.26 on a clean level: 13/50 on an arc of 40 classes out of 400
        let mut v = vec![0u64; 400];
        v[100..140].iter_mut().for_each(|x| *x = 13);
        let f = density(&v, 50);
        let est = estimate_multiplicity(&f, 0.26, 16).unwrap();
        assert_eq!(est.m, 4);
        assert_eq!(est.rounded_inverse, 4);
    }

    #[test]
    fn fit_examples() {
        let f = density(&[0, 0, 1, 1, 1, 1, 0, 0, 0, 0], 1);
        let fit = fit_arc(&f, &ratio(2, 5), 1.0).unwrap();
        assert_eq!(fit.arc, Arc::new(10, 2, 4).unwrap());
        assert_eq!(fit.residual, 0.0);
        assert_eq!(fit.captured, ratio(2, 5));
        assert!(fit_arc(&f, &ratio(2, 5), 0.3).is_err());

        // wrap-around arc
        let f = density(&[1, 1, 0, 0, 0, 0, 0, 0, 1, 1], 1);
        assert_eq!(fit_arc(&f, &ratio(2, 5), 1.0).unwrap().arc, Arc::new(10, 8, 4).unwrap());
    }

    #[test]
    fn fit_with_flips() {
        let l = 1000;
        let mut v = vec![0u64; l];
        v[200..500].iter_mut().for_each(|x| *x = 1);
        for k in [3, 250, 333, 700, 901] {
            v[k] ^= 1;
        }
        let f = density(&v, 1);
        let fit = fit_arc(&f, &f.mass(), 1.0).unwrap();
        assert!(fit.residual <= 2.0 * 5.0 / l as f64 + 1e-12);
    }

    /// Oracle: try every arc.
    fn best_arc_oracle(a: &GroupSet, chi: &Character) -> Rational {
        let l = chi.order();
        let mut best = ratio(2, 1);
        for start in 0..l {
            for len in 1..=l {
                let b = bohr_set(&BohrDescription::new(chi.clone(), Arc::new(l, start, len).unwrap()).unwrap()).unwrap();
                best = best.min(a.symm_diff_measure(&b).unwrap());
            }
        }
        best
    }

    #[test]
    fn best_arc_matches_oracle() {
        let g = z(48);
        for (seed, xi) in [(1u64, 1i64), (2, 2), (3, 3), (4, 5), (5, 8)] {
            let a = GroupSet::from_fn(&g, |x| ((x as u64 * 2654435761) ^ (seed * 97)) % 5 < 2 || (x + seed as usize) % 48 < 9);
            let chi = Character::new(&g, &[xi]).unwrap();
            let (arc, res) = best_arc(&a, &chi).unwrap();
            let b = bohr_set(&BohrDescription::new(chi.clone(), arc).unwrap()).unwrap();
            assert_eq!(a.symm_diff_measure(&b).unwrap(), res);
            assert_eq!(res, best_arc_oracle(&a, &chi), "seed {seed} ξ {xi}");
        }
    }

    #[test]
    fn best_arc_recovers_wrapping_bohr_set() {
        let g = z(90);
        let chi = Character::new(&g, &[7]).unwrap();
        let arc = Arc::new(90, 80, 25).unwrap();
        let a = bohr_set(&BohrDescription::new(chi.clone(), arc).unwrap()).unwrap();
        assert_eq!(best_arc(&a, &chi).unwrap(), (arc, ratio(0, 1)));
    }
}
