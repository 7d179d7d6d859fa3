//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_traits::Zero;
use rand::Rng;

use sumset_core::conv;
use sumset_core::harness::{admissible_eps, evaluate, generate, GeneratorSpec, Task, Verdict};
use sumset_core::inequalities::{check_kneser, check_partial_bound, ruzsa_from_profile, SubmodularityCheck};
use sumset_core::inverse::{
    default_window, estimate_multiplicity, estimate_sup, fit_arc, pushforward, quotient_character, recover_bohr_pair,
    spectrum, RecoveryConfig,
};
use sumset_core::rational::{ratio, to_f64};
use sumset_core::rng::seeded_rng;
use sumset_core::{bohr_set, Arc, BohrDescription, Character, GridGroup, GroupSet};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn z(n: usize) -> GridGroup {
    GridGroup::cyclic(n).unwrap()
}

/// Nonempty set with a density drawn uniformly from [0.05, 0.95].
fn random_set(g: &GridGroup, rng: &mut impl Rng) -> GroupSet {
    let p: f64 = rng.gen_range(0.05..0.95);
    let mut s = GroupSet::from_fn(g, |_| rng.gen_bool(p));
    if s.is_empty() {
        s.insert(rng.gen_range(0..g.size()));
    }
    s
}

fn within(elapsed: Duration, limit: Duration) -> Check {
    if elapsed <= limit {
        Ok(format!("{:.2}s", elapsed.as_secs_f64()))
    } else {
        Err(format!("took {:.2}s, limit {}s", elapsed.as_secs_f64(), limit.as_secs()))
    }
}

fn ruzsa_all_thresholds(a: &GroupSet, b: &GroupSet) -> Result<usize, String> {
    let n = a.group().size() as i128;
    let profile = conv::convolve(a, b).map_err(|e| e.to_string())?;
    let mut bad = 0;
    for k in 0..=a.len().min(b.len()) {
        let r = ruzsa_from_profile(&profile, a.len(), b.len(), &ratio(k as i128, n)).map_err(|e| e.to_string())?;
        if !r.holds {
            bad += 1;
        }
    }
    Ok(bad)
}

fn c1_ruzsa() -> Check {
    let start = Instant::now();
    let g = z(7);
    let mut pairs = 0;
    let mut bad = 0;
    for ma in 1u32..128 {
        for mb in 1u32..128 {
            let a = GroupSet::from_fn(&g, |x| ma >> x & 1 == 1);
            let b = GroupSet::from_fn(&g, |x| mb >> x & 1 == 1);
            bad += ruzsa_all_thresholds(&a, &b)?;
            pairs += 1;
        }
    }
    for p in [97usize, 499] {
        let g = z(p);
        let mut rng = seeded_rng(p as u64);
        for _ in 0..500 {
            let a = random_set(&g, &mut rng);
            let b = random_set(&g, &mut rng);
            bad += ruzsa_all_thresholds(&a, &b)?;
            pairs += 1;
        }
    }
    if bad > 0 {
        return Err(format!("{bad} violations over {pairs} pairs"));
    }
    within(start.elapsed(), Duration::from_secs(60)).map(|t| format!("{pairs} pairs, 0 violations, {t}"))
}

fn c2_intervals() -> Check {
    let g = z(97);
    let mut nonzero = 0;
    for seed in 0..100 {
        let (a, b) = generate(&g, &GeneratorSpec::Interval, seed).map_err(|e| e.to_string())?;
        if !check_kneser(&a, &b).map_err(|e| e.to_string())?.defect.is_zero() {
            nonzero += 1;
        }
    }
    if nonzero > 0 {
        Err(format!("{nonzero} of 100 interval pairs with nonzero defect"))
    } else {
        Ok("100 pairs, defect 0".into())
    }
}

fn c3_partial() -> Check {
    let start = Instant::now();
    let g = z(2048);
    let mut rng = seeded_rng(2048);
    let mut bad = 0;
    for i in 0..200 {
        let a = random_set(&g, &mut rng);
        let b = random_set(&g, &mut rng);
        let eps = admissible_eps(&a, &b, i);
        if !check_partial_bound(&a, &b, &eps).map_err(|e| e.to_string())?.holds {
            bad += 1;
        }
    }
    if bad > 0 {
        return Err(format!("{bad} violations"));
    }
    within(start.elapsed(), Duration::from_secs(30)).map(|t| format!("200 pairs, 0 violations, {t}"))
}

fn c4_submodularity() -> Check {
    let start = Instant::now();
    let g = z(6);
    let sets: Vec<GroupSet> = (0u32..64).map(|m| GroupSet::from_fn(&g, |x| m >> x & 1 == 1)).collect();
    let thresholds: Vec<_> = (1..=6).map(|k| ratio(k, 6)).collect();
    let mut bad = 0;
    let mut checks = 0;
    for a1 in &sets {
        for a2 in &sets {
            for b in &sets {
                let check = SubmodularityCheck::new(a1, a2, b).map_err(|e| e.to_string())?;
                for t in &thresholds {
                    if !check.at(t).map_err(|e| e.to_string())?.pointwise_holds {
                        bad += 1;
                    }
                    checks += 1;
                }
            }
        }
    }
    if bad > 0 {
        return Err(format!("{bad} pointwise failures"));
    }
    within(start.elapsed(), Duration::from_secs(120)).map(|t| format!("{checks} checks, 0 failures, {t}"))
}

fn c5_arc_coefficient() -> Check {
    let g = z(10_000);
    let a = GroupSet::interval(&g, 0, 5_000).unwrap();
    let chi = Character::new(&g, &[1]).unwrap();
    let m = spectrum(&a).magnitude_of(&chi);
    if (m - std::f64::consts::FRAC_1_PI).abs() <= 1e-3 {
        Ok(format!("|coefficient| = {m:.6}"))
    } else {
        Err(format!("|coefficient| = {m:.6}"))
    }
}

fn c6_plancherel_pushforward() -> Check {
    let groups = [z(60), z(997), z(4096)];
    let mut rng = seeded_rng(6);
    let mut worst = 0.0f64;
    let mut mass_bad = 0;
    for i in 0..1000 {
        let g = &groups[i % 3];
        let a = random_set(g, &mut rng);
        worst = worst.max((spectrum(&a).plancherel_sum() - to_f64(&a.measure())).abs());
        let chi = Character::new(g, &[rng.gen_range(1..g.size() as i64)]).unwrap();
        let f = pushforward(&a, &chi, default_window(chi.order())).map_err(|e| e.to_string())?;
        if f.mass() != a.measure() {
            mass_bad += 1;
        }
    }
    if worst > 1e-9 || mass_bad > 0 {
        Err(format!("Plancherel error {worst:.2e}, {mass_bad} mass mismatches"))
    } else {
        Ok(format!("1000 sets, Plancherel error {worst:.2e}, masses exact"))
    }
}

fn c7_recovery() -> Check {
    let start = Instant::now();
    let g = z(6000);
    let n = 6000i128;
    let delta = ratio(1, 30);
    let config = RecoveryConfig::default();
    let mut problems = Vec::new();
    let mut worst = [0.0f64; 3];
    for (ri, (rho, limit)) in [(0.0, ratio(2, n)), (0.01, ratio(1, 20)), (0.03, ratio(3, 25))].into_iter().enumerate() {
        for xi in [1i64, 5, 7] {
            let truth = Character::new(&g, &[xi]).unwrap();
            for s in 0..20u64 {
                let spec = GeneratorSpec::BohrNoise { freq: vec![xi], measure_min: 0.15, measure_max: 0.3, rho };
                let seed = 1000 * xi as u64 + s;
                let (a, b) = generate(&g, &spec, seed).map_err(|e| e.to_string())?;
                let r = match recover_bohr_pair(&a, &b, &delta, &config) {
                    Ok(r) => r,
                    Err(e) => {
                        problems.push(format!("rho={rho} xi={xi} seed={seed}: {e}"));
                        continue;
                    }
                };
                let res = r.residual_a.max(r.residual_b);
                worst[ri] = worst[ri].max(to_f64(&res));
                if res > limit {
                    problems.push(format!("rho={rho} xi={xi} seed={seed}: residual {res}"));
                }
                if rho <= 0.01 && !r.character.same_class(&truth) {
                    problems.push(format!("rho={rho} xi={xi} seed={seed}: recovered {:?}", r.character.freq()));
                }
            }
        }
    }
    if !problems.is_empty() {
        return Err(format!("{} problems, first: {}", problems.len(), problems[0]));
    }
    within(start.elapsed(), Duration::from_secs(300))
        .map(|t| format!("180 runs, max residual {:.4}/{:.4}/{:.4}, {t}", worst[0], worst[1], worst[2]))
}

fn c8_multiplicity() -> Check {
    let n = 6001usize;
    let g = z(n);
    let c = GroupSet::interval(&g, 0, 300).unwrap();
    let chi = Character::new(&g, &[3]).unwrap();
    let f = pushforward(&c, &chi, default_window(n)).map_err(|e| e.to_string())?;
    let tau = estimate_sup(&f, RecoveryConfig::default().theta).map_err(|e| e.to_string())?;
    let m = estimate_multiplicity(&f, tau, 16).map_err(|e| e.to_string())?.m;
    let quotient = quotient_character(&chi, m as u64).map_err(|e| e.to_string())?;
    let fit = fit_arc(&f, &f.mass(), 1.0 / m as f64).map_err(|e| e.to_string())?;
    // pull the fitted arc back along multiplication by m
    let inv = (1..n).find(|k| k * m % n == 1).unwrap_or(0);
    let arc = Arc::new(n, fit.arc.start * inv % n, (fit.arc.length as f64 / m as f64).round() as usize)
        .map_err(|e| e.to_string())?;
    let recovered = bohr_set(&BohrDescription::new(quotient.clone(), arc).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let diff = to_f64(&recovered.symm_diff_measure(&c).unwrap());
    let summary = format!("tau={tau:.4} m={m} quotient={:?} symm diff={diff:.4}", quotient.freq());
    if (tau - 1.0 / 3.0).abs() <= 0.05 && m == 3 && quotient.freq() == [1] && diff <= 0.01 {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn c9_adversarial() -> Check {
    let g = z(6);
    let (a, b) = generate(&g, &GeneratorSpec::AdversarialSubgroup, 0).map_err(|e| e.to_string())?;
    let rec = evaluate(&Task::Kneser, &a, &b, None, 0).map_err(|e| e.to_string())?;
    if rec.verdict == Verdict::Violation {
        Ok(format!("violation flagged, defect {}", rec.defect.unwrap_or_default()))
    } else {
        Err(format!("verdict {:?}", rec.verdict))
    }
}

fn c10_difference_mass() -> Check {
    let groups = [z(64), z(997)];
    let mut rng = seeded_rng(10);
    for i in 0..500 {
        let a = random_set(&groups[i % 2], &mut rng);
        let profile = conv::difference_profile(&a).map_err(|e| e.to_string())?;
        let x = rng.gen_range(0..a.group().size());
        if profile.mass() != (a.len() * a.len()) as u64
            || profile.get(x) as usize != a.intersection_len(&a.translate(x)).unwrap()
        {
            return Err(format!("mismatch on set {i}"));
        }
    }
    Ok("500 sets".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("Pollard/Ruzsa functional bound", c1_ruzsa),
        ("interval pairs meet Cauchy-Davenport with equality", c2_intervals),
        ("partial sumset bound", c3_partial),
        ("pointwise submodularity on Z/6", c4_submodularity),
        ("Fourier coefficient of a half arc", c5_arc_coefficient),
        ("Plancherel and pushforward mass", c6_plancherel_pushforward),
        ("Bohr pair recovery under noise", c7_recovery),
        ("level, multiplicity and quotient of a pushed-forward interval", c8_multiplicity),
        ("adversarial subgroup violates Kneser", c9_adversarial),
        ("difference-profile mass", c10_difference_mass),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
