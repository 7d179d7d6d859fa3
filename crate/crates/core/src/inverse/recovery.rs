//! Transfer of Bohr structure between partners and the end-to-end recovery pipeline.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::density::{best_arc, default_window, estimate_multiplicity, estimate_sup, fit_arc, pushforward};
use super::quotient::quotient_candidates;
use super::spectrum::{detect_character, fourier_coefficient};
use crate::critical::{almost_sumset, approximate_by_translates, criticality, shrink_to_small, CriticalityReport, ShrinkOptions};
use crate::error::{Error, Result};
use crate::group::{bohr_set, Arc, BohrDescription, Character, GroupSet};
use crate::rational::{self, ratio, Rational};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecoveryConfig {
    /// Largest criticality defect accepted at every checked stage.
    #[serde(with = "rational::serde_str")]
    pub tolerance: Rational,
    /// Success threshold on both residuals; also the smallest admissible margin.
    #[serde(with = "rational::serde_str")]
    pub eps: Rational,
    pub theta: f64,
    /// Smoothing window; `None` means `ceil(L/256)`.
    pub window: Option<usize>,
    pub m_max: usize,
    pub k_steps: usize,
    pub growth_slack: f64,
    /// Almost sumsets of `C` use thresholds up to this fraction of `μ(C)`.
    #[serde(with = "rational::serde_str")]
    pub almost_fraction: Rational,
    /// Shrinking stops once `μ(C) <= shrink_fraction · min(μ(A), μ(B))`.
    #[serde(with = "rational::serde_str")]
    pub shrink_fraction: Rational,
    pub tau_tolerance: f64,
    pub cap_factor: i128,
    pub translates_m: usize,
    pub seed: u64,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        RecoveryConfig {
            tolerance: ratio(1, 20),
            eps: ratio(1, 20),
            theta: 0.05,
            window: None,
            m_max: 16,
            k_steps: 8,
            growth_slack: 0.25,
            almost_fraction: ratio(1, 3),
            shrink_fraction: ratio(1, 4),
            tau_tolerance: 0.1,
            cap_factor: 10,
            translates_m: 4,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthStep {
    pub k: usize,
    #[serde(with = "rational::serde_str")]
    pub measure: Rational,
    /// `μ(C_k) / (k·μ(C))`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CandidateScore {
    pub freq: Vec<usize>,
    pub order: usize,
    #[serde(with = "rational::serde_str")]
    pub residual: Rational,
}

#[derive(Clone, Debug, Serialize)]
pub struct Diagnostics {
    pub initial: CriticalityReport,
    pub shrink_steps: usize,
    pub shrink_success: bool,
    pub c_size: usize,
    pub c2_size: usize,
    #[serde(with = "rational::serde_str")]
    pub c2_delta: Rational,
    pub growth: Vec<GrowthStep>,
    pub growth_ok: bool,
    pub detection_magnitude: f64,
    pub weak_detection: bool,
    pub center_shift: usize,
    pub window: usize,
    pub rounded_inverse: usize,
    pub multiplicity_residuals: Vec<Option<f64>>,
    pub tau_consistent: bool,
    pub candidates: Vec<CandidateScore>,
    #[serde(with = "rational::serde_str")]
    pub translates_sym_diff: Rational,
}

#[derive(Clone, Debug, Serialize)]
pub struct RecoveryResult {
    /// Final character, after division by `m`.
    pub character: Character,
    pub arc_i: Arc,
    pub arc_j: Arc,
    pub tau: f64,
    pub m: usize,
    /// Canonical frequency found by detection, before division.
    pub detected_freq: Vec<usize>,
    #[serde(with = "rational::serde_str")]
    pub residual_a: Rational,
    #[serde(with = "rational::serde_str")]
    pub residual_b: Rational,
    pub success: bool,
    pub diagnostics: Diagnostics,
}

#[derive(Clone, Debug)]
pub struct TransferOptions {
    pub delta: Rational,
    pub tolerance: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Transfer {
    pub arc: Arc,
    /// `μ(A Δ Bohr(χ, arc))`.
    #[serde(with = "rational::serde_str")]
    pub residual: Rational,
}

/// Arc for `A` given that its partner is `Bohr(χ, arc_b)`.
pub fn transfer_structure(a: &GroupSet, chi: &Character, arc_b: &Arc, opts: &TransferOptions) -> Result<Transfer> {
    let partner = bohr_set(&BohrDescription::new(chi.clone(), *arc_b)?)?;
    let report = criticality(a, &partner, &opts.delta)?;
    if !report.is_critical(&opts.tolerance) {
        return Err(Error::NotCritical {
            defect: rational::format(&report.defect),
            tolerance: rational::format(&opts.tolerance),
        });
    }
    let (arc, residual) = best_arc(a, chi)?;
    Ok(Transfer { arc, residual })
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Stage { .. } => e,
        other => Error::Stage { stage: name, detail: other.to_string() },
    })
}

/// Recovers parallel Bohr sets `Bohr(χ, I) ≈ A`, `Bohr(χ, J) ≈ B` for a critical pair.
pub fn recover_bohr_pair(a: &GroupSet, b: &GroupSet, delta: &Rational, config: &RecoveryConfig) -> Result<RecoveryResult> {
    let group = a.group().clone();
    let n = group.size() as i128;
    let initial = criticality(a, b, delta)?;
    if !initial.is_critical(&config.tolerance) {
        return Err(Error::NotCritical {
            defect: rational::format(&initial.defect),
            tolerance: rational::format(&config.tolerance),
        });
    }
    if initial.margin < config.eps {
        return Err(Error::Stage {
            stage: "criticality",
            detail: format!("margin {} below eps {}", rational::format(&initial.margin), rational::format(&config.eps)),
        });
    }

    let target = config.shrink_fraction * a.measure().min(b.measure());
    let opts = ShrinkOptions { delta: *delta, cap_factor: config.cap_factor, max_steps: 64 };
    let shrunk = stage("shrink", shrink_to_small(a, b, &target, &config.tolerance, &opts))?;
    let c = shrunk.set;
    if c.len() < 2 {
        return Err(Error::Stage { stage: "shrink", detail: format!("auxiliary set has {} elements", c.len()) });
    }

    let tol_c = (config.almost_fraction * c.measure()).min(config.tolerance).max(ratio(1, n));
    let c2 = stage("almost-sumset", almost_sumset(&c, &c, &tol_c))?;

    let mu_c = c.measure();
    let mut growth = vec![GrowthStep { k: 2, measure: c2.set.measure(), ratio: growth_ratio(&c2.set.measure(), &mu_c, 2) }];
    let mut growth_ok = growth[0].ratio <= 1.0 + config.growth_slack;
    let mut ck = c2.set.clone();
    for k in 3..=config.k_steps {
        if mu_c * Rational::from_integer(k as i128) > ratio(1, 2) {
            break;
        }
        match almost_sumset(&ck, &c, &tol_c) {
            Ok(next) => {
                ck = next.set;
                let r = growth_ratio(&ck.measure(), &mu_c, k);
                growth_ok &= r <= 1.0 + config.growth_slack;
                growth.push(GrowthStep { k, measure: ck.measure(), ratio: r });
            }
            Err(_) => {
                growth_ok = false;
                break;
            }
        }
    }

    let detection = stage("detect", detect_character(&c2.set))?;
    let chi = detection.character(&group);

    // translate C₂ so the mean phase of χ over it sits at 0
    let l = chi.order();
    let coeff = fourier_coefficient(&c2.set, &chi);
    let mean_phase = -coeff.arg() / std::f64::consts::TAU;
    let target_value = (-(mean_phase * l as f64).round() as i64).rem_euclid(l as i64) as usize;
    let center_shift = chi.preimage(target_value);
    let centered = c2.set.translate(center_shift);

    let window = config.window.unwrap_or_else(|| default_window(l));
    let f = stage("pushforward", pushforward(&centered, &chi, window))?;
    let tau = stage("sup", estimate_sup(&f, config.theta))?;
    let mult = stage("multiplicity", estimate_multiplicity(&f, tau, config.m_max))?;
    let candidates = stage("quotient", quotient_candidates(&chi, mult.m as u64))?;

    let mut scores = Vec::with_capacity(candidates.len());
    let mut chosen: Option<(Character, Arc, Rational)> = None;
    for cand in candidates {
        let w = config.window.unwrap_or_else(|| default_window(cand.order()));
        let fc = stage("fit", pushforward(&centered, &cand, w))?;
        let fit = stage("fit", fit_arc(&fc, &centered.measure(), 1.0))?;
        let bohr = bohr_set(&BohrDescription::new(cand.clone(), fit.arc)?)?;
        let residual = centered.symm_diff_measure(&bohr)?;
        scores.push(CandidateScore { freq: cand.freq().to_vec(), order: cand.order(), residual });
        if chosen.as_ref().is_none_or(|(_, _, r)| residual < *r) {
            // the arc of the uncentered C₂
            let arc = fit.arc.shift(-(cand.eval(center_shift) as i64));
            chosen = Some((cand, arc, residual));
        }
    }
    let (character, arc_c, _) = chosen.ok_or(Error::Stage { stage: "quotient", detail: "no candidate character".into() })?;

    let topts = TransferOptions { delta: *delta, tolerance: config.tolerance };
    let ta = stage("transfer-a", transfer_structure(a, &character, &arc_c, &topts))?;
    let tb = stage("transfer-b", transfer_structure(b, &character, &ta.arc, &topts))?;

    let translates_sym_diff = if config.translates_m >= 2 {
        stage("translates", approximate_by_translates(&c, &c, &c2.delta, config.translates_m, config.seed))?.sym_diff
    } else {
        Rational::zero()
    };

    let success = ta.residual <= config.eps && tb.residual <= config.eps;
    Ok(RecoveryResult {
        character,
        arc_i: ta.arc,
        arc_j: tb.arc,
        tau,
        m: mult.m,
        detected_freq: detection.entry.freq.clone(),
        residual_a: ta.residual,
        residual_b: tb.residual,
        success,
        diagnostics: Diagnostics {
            initial,
            shrink_steps: shrunk.log.len() - 1,
            shrink_success: shrunk.success,
            c_size: c.len(),
            c2_size: c2.set.len(),
            c2_delta: c2.delta,
            growth,
            growth_ok,
            detection_magnitude: detection.entry.magnitude,
            weak_detection: detection.weak,
            center_shift,
            window,
            rounded_inverse: mult.rounded_inverse,
            multiplicity_residuals: mult.residuals,
            tau_consistent: (tau - 1.0 / mult.m as f64).abs() <= config.tau_tolerance,
            candidates: scores,
            translates_sym_diff,
        },
    })
}

fn growth_ratio(measure: &Rational, mu_c: &Rational, k: usize) -> f64 {
    if mu_c.is_zero() {
        return f64::INFINITY;
    }
    rational::to_f64(&(measure / (mu_c * Rational::from_integer(k as i128))))
}
