//! Exact verifiers for the Kneser/Cauchy–Davenport, Pollard/Ruzsa and partial-sumset bounds,
//! the pointwise submodularity inequality, and the equality-case classifier.
//!
//! Discrete conventions: the continuum bound `μ(A) + μ(B)` becomes `(|A| + |B| - 1) / N`
//! (Cauchy–Davenport), and the partial-sumset bound carries an extra `2/N` grid slack.
//! All comparisons are exact rationals; only `√ε` is rounded, and it is rounded up so the
//! right-hand side is never overstated.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::conv::{self, ConvolutionProfile};
use crate::error::{Error, Result};
use crate::group::GroupSet;
use crate::inverse::{recover_bohr_pair, RecoveryConfig, RecoveryResult};
use crate::rational::{self, ratio, Rational};

/// Both sides of a checked bound. `holds ⇔ defect >= 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    #[serde(with = "rational::serde_str")]
    pub lhs: Rational,
    #[serde(with = "rational::serde_str")]
    pub rhs: Rational,
    pub holds: bool,
    #[serde(with = "rational::serde_str")]
    pub defect: Rational,
    /// Set when the ambient group has proper subgroups, where the bound may genuinely fail.
    pub connectedness_caveat: bool,
}

impl BoundReport {
    fn new(lhs: Rational, rhs: Rational, caveat: bool) -> Self {
        let defect = lhs - rhs;
        BoundReport { lhs, rhs, holds: !defect.is_negative(), defect, connectedness_caveat: caveat }
    }
}

fn nonempty(a: &GroupSet, b: &GroupSet) -> Result<()> {
    a.group().ensure_same(b.group())?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet("bound operand"));
    }
    Ok(())
}

/// `|A + B| >= min(|A| + |B| - 1, N)`.
pub fn check_kneser(a: &GroupSet, b: &GroupSet) -> Result<BoundReport> {
    nonempty(a, b)?;
    let n = a.group().size() as i128;
    let sum = conv::sumset(a, b)?;
    let bound = (a.len() as i128 + b.len() as i128 - 1).min(n);
    Ok(BoundReport::new(ratio(sum.len() as i128, n), ratio(bound, n), a.group().has_proper_subgroups()))
}

/// `∫ min(1_A * 1_B, t) >= t · min(μ(A) + μ(B) - t, 1)` for `0 <= t <= min(μ(A), μ(B))`,
/// with `t` a multiple of `1/N`.
pub fn ruzsa_functional(a: &GroupSet, b: &GroupSet, t: &Rational) -> Result<BoundReport> {
    a.group().ensure_same(b.group())?;
    let profile = conv::convolve(a, b)?;
    ruzsa_from_profile(&profile, a.len(), b.len(), t)
}

/// As [`ruzsa_functional`], reusing an already computed convolution of `A` and `B`.
pub fn ruzsa_from_profile(profile: &ConvolutionProfile, a_len: usize, b_len: usize, t: &Rational) -> Result<BoundReport> {
    let g = profile.group();
    let n = g.size();
    let k = rational::over_denominator(t, n)
        .ok_or_else(|| Error::OutOfRange(format!("threshold {t} is not a multiple of 1/{n}")))?;
    if k < 0 || k > a_len.min(b_len) as i128 {
        return Err(Error::OutOfRange(format!("threshold {t} outside [0, min(μ(A), μ(B))]")));
    }
    let n2 = (n as i128) * (n as i128);
    let lhs = conv::truncated_mass(profile, k as u64) as i128;
    let rhs = k * (a_len as i128 + b_len as i128 - k).min(n as i128);
    Ok(BoundReport::new(ratio(lhs, n2), ratio(rhs, n2), g.has_proper_subgroups()))
}

/// `μ(A +_ε B) >= min(μ(A) + μ(B), 1) - 2√ε - 2/N` for `0 < ε < min(μ(A), μ(B))²`.
pub fn check_partial_bound(a: &GroupSet, b: &GroupSet, eps: &Rational) -> Result<BoundReport> {
    nonempty(a, b)?;
    let small = a.measure().min(b.measure());
    if !eps.is_positive() || *eps >= small * small {
        return Err(Error::OutOfRange(format!("ε = {eps} not in (0, min(μ(A), μ(B))²)")));
    }
    let n = a.group().size() as i128;
    let partial = conv::partial_sumset(a, b, eps)?;
    let base = (a.measure() + b.measure()).min(Rational::one());
    let two = Rational::from_integer(2);
    let rhs = base - two * rational::sqrt_upper(eps) - ratio(2, n);
    Ok(BoundReport::new(partial.measure(), rhs, a.group().has_proper_subgroups()))
}

/// Outcome of the pointwise check
/// `min(c₁, t) + min(c₂, t) >= min(c∩, t) + min(c∪, t)` at every `x`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubmodularityReport {
    /// Integrated sides, each normalized like `∫ min(1_A * 1_B, t) dμ`.
    pub integrated: BoundReport,
    #[serde(with = "rational::serde_str")]
    pub min_pointwise_defect: Rational,
    pub pointwise_holds: bool,
}

/// Convolution profiles of `A1`, `A2`, `A1 ∩ A2`, `A1 ∪ A2` against `B`, computed once.
pub struct SubmodularityCheck {
    profiles: [ConvolutionProfile; 4],
}

impl SubmodularityCheck {
    pub fn new(a1: &GroupSet, a2: &GroupSet, b: &GroupSet) -> Result<Self> {
        a1.group().ensure_same(a2.group())?;
        a1.group().ensure_same(b.group())?;
        let cap = a1.intersection(a2)?;
        let cup = a1.union(a2)?;
        Ok(SubmodularityCheck {
            profiles: [conv::convolve(a1, b)?, conv::convolve(a2, b)?, conv::convolve(&cap, b)?, conv::convolve(&cup, b)?],
        })
    }

    /// Evaluates the inequality at threshold `t ∈ [0, 1]`.
    pub fn at(&self, t: &Rational) -> Result<SubmodularityReport> {
        if t.is_negative() || *t > Rational::one() {
            return Err(Error::OutOfRange(format!("threshold {t} not in [0, 1]")));
        }
        let g = self.profiles[0].group();
        let n = g.size() as i128;
        // work with counts·q against p·N where t = p/q
        let (p, q) = (*t.numer(), *t.denom());
        let cap = p * n;
        let clip = |c: u64| (c as i128 * q).min(cap);
        let [c1, c2, ci, cu] = &self.profiles;
        let mut lhs = 0i128;
        let mut rhs = 0i128;
        let mut worst: Option<i128> = None;
        for x in 0..g.size() {
            let l = clip(c1.get(x)) + clip(c2.get(x));
            let r = clip(ci.get(x)) + clip(cu.get(x));
            lhs += l;
            rhs += r;
            worst = Some(worst.map_or(l - r, |w: i128| w.min(l - r)));
        }
        let scale = q * n * n;
        let min_pointwise = ratio(worst.unwrap_or(0), q * n);
        Ok(SubmodularityReport {
            integrated: BoundReport::new(ratio(lhs, scale), ratio(rhs, scale), g.has_proper_subgroups()),
            pointwise_holds: !min_pointwise.is_negative(),
            min_pointwise_defect: min_pointwise,
        })
    }
}

pub fn submodularity_defect(a1: &GroupSet, a2: &GroupSet, b: &GroupSet, t: &Rational) -> Result<SubmodularityReport> {
    SubmodularityCheck::new(a1, a2, b)?.at(t)
}

/// Structural cases for pairs meeting the discrete Kneser bound with equality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EqualityClass {
    /// One set has at most one element (grid stand-in for measure zero).
    MeasureZeroCase,
    /// Both sets are recovered as Bohr sets of a common character.
    ParallelBohrCase,
    /// `μ(A) + μ(B) >= 1`.
    FullMeasureCase,
    NonExtremal,
}

#[derive(Clone, Debug, Serialize)]
pub struct Classification {
    pub class: EqualityClass,
    pub kneser: BoundReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recovery: Option<RecoveryResult>,
}

/// Recovery settings for exactly extremal pairs: a single pair of doubling steps and
/// thresholds at the grid resolution.
pub fn classification_config(n: usize) -> RecoveryConfig {
    RecoveryConfig {
        tolerance: ratio(2, n as i128),
        eps: ratio(1, n as i128),
        k_steps: 2,
        ..RecoveryConfig::default()
    }
}

pub fn classify_equality(a: &GroupSet, b: &GroupSet) -> Result<Classification> {
    let kneser = check_kneser(a, b)?;
    let n = a.group().size();
    let mut out = Classification { class: EqualityClass::NonExtremal, kneser, recovery: None };
    if !out.kneser.defect.is_zero() {
        return Ok(out);
    }
    if a.len().min(b.len()) <= 1 {
        out.class = EqualityClass::MeasureZeroCase;
        return Ok(out);
    }
    if a.len() + b.len() >= n {
        out.class = EqualityClass::FullMeasureCase;
        return Ok(out);
    }
    if let Ok(rec) = recover_bohr_pair(a, b, &ratio(1, n as i128), &classification_config(n)) {
        let l = rec.character.order() as i128;
        let limit = ratio(2, l);
        if rec.residual_a <= limit && rec.residual_b <= limit {
            out.class = EqualityClass::ParallelBohrCase;
        }
        out.recovery = Some(rec);
    }
    Ok(out)
}
