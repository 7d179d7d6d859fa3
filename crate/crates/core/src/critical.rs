//! Criticality of a pair and the constructive steps used on critical pairs: best-shift
//! intersections, shrinking to a small critical companion, almost sumsets, and
//! approximation of an almost sumset by finitely many translates.

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use serde::Serialize;

use crate::conv::{self, check_threshold};
use crate::error::{Error, Result};
use crate::group::GroupSet;
use crate::rational::{self, ratio, Rational};
use crate::rng::seeded_rng;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CriticalityReport {
    #[serde(with = "rational::serde_str")]
    pub mu_a: Rational,
    #[serde(with = "rational::serde_str")]
    pub mu_b: Rational,
    /// `min(μ(A), μ(B), 1 - μ(A) - μ(B))`.
    #[serde(with = "rational::serde_str")]
    pub margin: Rational,
    #[serde(with = "rational::serde_str")]
    pub delta: Rational,
    /// `μ(A +_δ B)`.
    #[serde(with = "rational::serde_str")]
    pub mu_partial: Rational,
    /// `μ(A +_δ B) - μ(A) - μ(B)`.
    #[serde(with = "rational::serde_str")]
    pub defect: Rational,
    /// Margin at most one grid cell: the pair is too thin or too fat to be meaningful.
    pub degenerate: bool,
}

impl CriticalityReport {
    pub fn is_critical(&self, tolerance: &Rational) -> bool {
        self.defect <= *tolerance
    }
}

pub fn criticality(a: &GroupSet, b: &GroupSet, delta: &Rational) -> Result<CriticalityReport> {
    a.group().ensure_same(b.group())?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet("criticality operand"));
    }
    check_threshold(delta)?;
    let n = a.group().size() as i128;
    let (mu_a, mu_b) = (a.measure(), b.measure());
    let margin = mu_a.min(mu_b).min(Rational::one() - mu_a - mu_b);
    let mu_partial = conv::partial_sumset(a, b, delta)?.measure();
    Ok(CriticalityReport {
        mu_a,
        mu_b,
        margin,
        delta: *delta,
        mu_partial,
        defect: mu_partial - mu_a - mu_b,
        degenerate: margin <= ratio(1, n),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ShiftChoice {
    pub shift: usize,
    /// `|A ∩ (shift + A)|`, as close to the target as the grid allows.
    pub achieved: usize,
}

/// Shift `x` minimizing `| |A ∩ (x + A)| - target |`, smallest index on ties.
/// Requires `|A|²/N <= target <= |A|`.
pub fn find_shift_with_intersection(a: &GroupSet, target: usize) -> Result<ShiftChoice> {
    if a.is_empty() {
        return Err(Error::EmptySet("shifted set"));
    }
    let n = a.group().size();
    let len = a.len();
    if (target as u128) * (n as u128) < (len as u128) * (len as u128) || target > len {
        return Err(Error::OutOfRange(format!("target {target} outside [|A|²/N, |A|] = [{}/{n}, {len}]", len * len)));
    }
    let profile = conv::difference_profile(a)?;
    let (shift, achieved) = profile
        .counts()
        .iter()
        .enumerate()
        .min_by_key(|&(x, &c)| ((c as i64 - target as i64).unsigned_abs(), x))
        .map(|(x, &c)| (x, c as usize))
        .expect("group is nonempty");
    Ok(ShiftChoice { shift, achieved })
}

#[derive(Clone, Debug)]
pub struct ShrinkOptions {
    /// Partial-sumset threshold used to measure criticality of `(A, C)`.
    pub delta: Rational,
    /// Abort once the running defect exceeds `cap_factor · max(initial defect, tolerance)`.
    pub cap_factor: i128,
    pub max_steps: usize,
}

impl ShrinkOptions {
    pub fn with_delta(delta: Rational) -> Self {
        ShrinkOptions { delta, cap_factor: 10, max_steps: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShrinkStep {
    pub step: usize,
    pub size: usize,
    pub shift: usize,
    #[serde(with = "rational::serde_str")]
    pub defect: Rational,
}

#[derive(Clone, Debug, Serialize)]
pub struct ShrinkOutcome {
    #[serde(skip)]
    pub set: GroupSet,
    pub report: CriticalityReport,
    pub success: bool,
    #[serde(with = "rational::serde_str")]
    pub cap: Rational,
    pub log: Vec<ShrinkStep>,
}

impl ShrinkOutcome {
    /// The iteration log as `step,size,defect` CSV rows.
    pub fn write_log_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["step", "size", "defect"])?;
        for s in &self.log {
            w.write_record([s.step.to_string(), s.size.to_string(), rational::format(&s.defect)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Repeatedly replaces `C` (starting from `B`) by `C ∩ (x + C)` with
/// `|C ∩ (x + C)| ≈ max(|C|²/N, |C| - cN/2, delta_target·N)`, where `c` is the margin of
/// `(A, B)`, until `μ(C) <= delta_target`. The pair `(A, C)` is re-measured after every step.
pub fn shrink_to_small(
    a: &GroupSet,
    b: &GroupSet,
    delta_target: &Rational,
    tolerance: &Rational,
    opts: &ShrinkOptions,
) -> Result<ShrinkOutcome> {
    let initial = criticality(a, b, &opts.delta)?;
    if !initial.is_critical(tolerance) {
        return Err(Error::NotCritical { defect: rational::format(&initial.defect), tolerance: rational::format(tolerance) });
    }
    let cap = Rational::from_integer(opts.cap_factor) * initial.defect.max(*tolerance).max(Rational::zero());
    let n = a.group().size();
    let mut log = vec![ShrinkStep { step: 0, size: b.len(), shift: 0, defect: initial.defect }];
    if b.measure() <= *delta_target {
        return Ok(ShrinkOutcome { set: b.clone(), report: initial, success: true, cap, log });
    }

    let half_margin = (initial.margin * Rational::from_integer(n as i128) / Rational::from_integer(2)).floor().to_integer().max(0) as usize;
    let floor_target = (delta_target * Rational::from_integer(n as i128)).floor().to_integer().max(1) as usize;

    let mut c = b.clone();
    let mut report = initial;
    let mut best: Option<(GroupSet, CriticalityReport)> = None;
    for step in 1..=opts.max_steps {
        let size = c.len();
        let square = (size * size).div_ceil(n);
        let target = square.max(size.saturating_sub(half_margin)).max(floor_target).min(size - 1).max(square);
        let choice = find_shift_with_intersection(&c, target)?;
        let next = c.intersection(&c.translate(choice.shift))?;
        if next.is_empty() || next.len() >= size {
            break;
        }
        let next_report = criticality(a, &next, &opts.delta)?;
        log.push(ShrinkStep { step, size: next.len(), shift: choice.shift, defect: next_report.defect });
        if next_report.defect > cap {
            break;
        }
        c = next;
        report = next_report;
        if c.measure() <= *delta_target {
            return Ok(ShrinkOutcome { set: c, report, success: true, cap, log });
        }
        best = Some((c.clone(), report.clone()));
    }
    let (set, report) = best.unwrap_or((c, report));
    Ok(ShrinkOutcome { set, report, success: false, cap, log })
}

#[derive(Clone, Debug)]
pub struct AlmostSumset {
    pub set: GroupSet,
    pub delta: Rational,
}

/// `A +_δ B` for the largest `δ = k/N` (`k = 1, 2, 4, ...`, `δ <= tolerance`) whose measure
/// stays within `μ(A) + μ(B) + tolerance`. `k = 1` is always tried.
pub fn almost_sumset(a: &GroupSet, b: &GroupSet, tolerance: &Rational) -> Result<AlmostSumset> {
    a.group().ensure_same(b.group())?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet("almost-sumset operand"));
    }
    let n = a.group().size();
    let profile = conv::convolve(a, b)?;
    let bound = a.measure() + b.measure() + tolerance;
    let k_max = a.len().min(b.len()) as u64;
    let mut chosen: Option<AlmostSumset> = None;
    let mut k = 1u64;
    while k <= k_max && (k == 1 || ratio(k as i128, n as i128) <= *tolerance) {
        let set = profile.level_set(k);
        if set.measure() <= bound {
            chosen = Some(AlmostSumset { set, delta: ratio(k as i128, n as i128) });
        }
        k *= 2;
    }
    chosen.ok_or_else(|| Error::NotCritical {
        defect: rational::format(&(profile.level_set(1).measure() - a.measure() - b.measure())),
        tolerance: rational::format(tolerance),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TranslateApproximation {
    /// Distinct sampled elements of `B`, increasing.
    pub translates: Vec<usize>,
    /// `μ((A + X) Δ (A +_δ B))`.
    #[serde(with = "rational::serde_str")]
    pub sym_diff: Rational,
}

/// Samples `m²` elements of `B` uniformly (with replacement) and compares `A + X` to `A +_δ B`.
pub fn approximate_by_translates(a: &GroupSet, b: &GroupSet, delta: &Rational, m: usize, seed: u64) -> Result<TranslateApproximation> {
    a.group().ensure_same(b.group())?;
    if b.is_empty() {
        return Err(Error::EmptySet("translate source"));
    }
    if m < 2 {
        return Err(Error::OutOfRange(format!("m = {m} must be at least 2")));
    }
    let target = conv::partial_sumset(a, b, delta)?;
    let members = b.to_vec();
    let mut rng = seeded_rng(seed);
    let mut translates: Vec<usize> = (0..m * m).map(|_| *members.choose(&mut rng).expect("nonempty")).collect();
    translates.sort_unstable();
    translates.dedup();
    let mut covered = GroupSet::empty(a.group());
    for &x in &translates {
        covered = covered.union(&a.translate(x))?;
    }
    Ok(TranslateApproximation { sym_diff: covered.symm_diff_measure(&target)?, translates })
}
