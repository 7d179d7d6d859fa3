//! Monte Carlo calibration of recovery residuals on `Z/6000`.
//!
//! Usage: `cargo run --release -p sumset-core --example calibrate_recovery [seeds] [delta] [almost_fraction]`

use sumset_core::harness::{generate, GeneratorSpec};
use sumset_core::inverse::{recover_bohr_pair, RecoveryConfig};
use sumset_core::rational::{self, ratio, to_f64};
use sumset_core::{Character, GridGroup};

fn main() {
    let mut args = std::env::args().skip(1);
    let seeds: u64 = args.next().map(|s| s.parse().expect("seed count")).unwrap_or(200);
    let delta = args.next().map(|s| rational::parse(&s).expect("delta")).unwrap_or(ratio(1, 30));
    let g = GridGroup::cyclic(6000).unwrap();
    let mut cfg = RecoveryConfig { tolerance: ratio(1, 20), eps: ratio(3, 25), ..RecoveryConfig::default() };
    if let Some(f) = args.next() {
        cfg.almost_fraction = rational::parse(&f).expect("almost fraction");
    }
    println!("delta={}  almost_fraction={}  seeds={seeds}", rational::format(&delta), rational::format(&cfg.almost_fraction));
    println!("{:>5} {:>3} {:>9} {:>9} {:>9} {:>6} {:>6} {:>6}", "rho", "xi", "median", "p99", "max", "wrong", "m>1", "errors");
    for rho in [0.0, 0.005, 0.01, 0.02, 0.03, 0.05] {
        for xi in [1i64, 5, 7] {
            let truth = Character::new(&g, &[xi]).unwrap();
            let mut residuals = Vec::new();
            let (mut wrong, mut errors, mut multiple) = (0, 0, 0);
            for seed in 0..seeds {
                let spec = GeneratorSpec::BohrNoise { freq: vec![xi], measure_min: 0.15, measure_max: 0.3, rho };
                let (a, b) = generate(&g, &spec, seed).unwrap();
                match recover_bohr_pair(&a, &b, &delta, &cfg) {
                    Ok(r) => {
                        wrong += usize::from(!r.character.same_class(&truth));
                        multiple += usize::from(r.m > 1);
                        residuals.push(to_f64(&r.residual_a).max(to_f64(&r.residual_b)));
                    }
                    Err(e) => {
                        errors += 1;
                        eprintln!("rho {rho} xi {xi} seed {seed}: {e}");
                    }
                }
            }
            residuals.sort_by(f64::total_cmp);
            let q = |p: f64| residuals.get(((residuals.len().max(1) - 1) as f64 * p).round() as usize).copied().unwrap_or(f64::NAN);
            println!(
                "{rho:>5} {xi:>3} {:>9.5} {:>9.5} {:>9.5} {wrong:>6} {multiple:>6} {errors:>6}",
                q(0.5),
                q(0.99),
                q(1.0)
            );
        }
    }
}
