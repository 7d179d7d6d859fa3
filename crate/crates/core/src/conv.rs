//! Exact convolution of set indicators and the sumset constructions built on it.

use std::io::Write;

use num_traits::{One, Signed};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{GridGroup, GroupSet};
use crate::ntt;
use crate::rational::{ratio, Rational};

/// Group sizes up to this use the direct `O(N·|A|)` kernel; larger ones the transform.
pub const DIRECT_LIMIT: usize = 2048;

/// `counts(x) = #{(a, b) ∈ A × B : a + b = x}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvolutionProfile {
    group: GridGroup,
    counts: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProfileSummary {
    pub mass: u64,
    pub max: u64,
    pub support_size: usize,
}

impl ConvolutionProfile {
    pub fn group(&self) -> &GridGroup {
        &self.group
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn get(&self, x: usize) -> u64 {
        self.counts[x]
    }

    /// `Σ_x counts(x)`, always `|A|·|B|`.
    pub fn mass(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn max(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    pub fn support_size(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// The normalized convolution `1_A * 1_B(x) = counts(x) / N`.
    pub fn value(&self, x: usize) -> Rational {
        ratio(self.counts[x] as i128, self.group.size() as i128)
    }

    pub fn summary(&self) -> ProfileSummary {
        ProfileSummary { mass: self.mass(), max: self.max(), support_size: self.support_size() }
    }

    /// `{x : counts(x) >= k}` for an integer count threshold.
    pub fn level_set(&self, k: u64) -> GroupSet {
        GroupSet::from_fn(&self.group, |x| self.counts[x] >= k)
    }

    /// `{x : counts(x) / N >= t}`.
    pub fn threshold_set(&self, t: &Rational) -> GroupSet {
        self.level_set(count_threshold(t, self.group.size()))
    }

    /// Writes `x,count` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "count"])?;
        for (x, c) in self.counts.iter().enumerate() {
            w.write_record([x.to_string(), c.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Smallest integer `k` with `k / N >= t`, i.e. `ceil(t·N)` (at least 0).
pub fn count_threshold(t: &Rational, n: usize) -> u64 {
    let scaled = t * Rational::from_integer(n as i128);
    if scaled.is_negative() {
        0
    } else {
        scaled.ceil().to_integer() as u64
    }
}

/// Direct kernel: shifts the larger indicator by every member of the smaller set.
pub fn convolve_direct(a: &GroupSet, b: &GroupSet) -> Result<ConvolutionProfile> {
    a.group().ensure_same(b.group())?;
    let g = a.group();
    let n = g.size();
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let large_members = large.to_vec();
    let mut counts = vec![0u64; n];
    if g.is_cyclic() {
        for s in small.iter() {
            for &y in &large_members {
                let mut x = s + y;
                if x >= n {
                    x -= n;
                }
                counts[x] += 1;
            }
        }
    } else {
        for s in small.iter() {
            for &y in &large_members {
                counts[g.add(s, y)] += 1;
            }
        }
    }
    Ok(ConvolutionProfile { group: g.clone(), counts })
}

/// Transform kernel: exact multi-prime NTT, separable over the axes.
pub fn convolve_transform(a: &GroupSet, b: &GroupSet) -> Result<ConvolutionProfile> {
    a.group().ensure_same(b.group())?;
    let g = a.group();
    let counts = if a.is_empty() || b.is_empty() {
        vec![0; g.size()]
    } else {
        ntt::cyclic_convolve(&a.indicator(), &b.indicator(), g.dims())
    };
    Ok(ConvolutionProfile { group: g.clone(), counts })
}

/// Exact convolution; the kernel is picked by group size and sparsity, results are identical.
pub fn convolve(a: &GroupSet, b: &GroupSet) -> Result<ConvolutionProfile> {
    a.group().ensure_same(b.group())?;
    let n = a.group().size();
    let work = a.len().min(b.len()).saturating_mul(a.len().max(b.len()));
    if n <= DIRECT_LIMIT || work <= 8 * n {
        convolve_direct(a, b)
    } else {
        convolve_transform(a, b)
    }
}

fn require_nonempty(a: &GroupSet, what: &'static str) -> Result<()> {
    if a.is_empty() {
        Err(Error::EmptySet(what))
    } else {
        Ok(())
    }
}

/// `A + B`.
pub fn sumset(a: &GroupSet, b: &GroupSet) -> Result<GroupSet> {
    require_nonempty(a, "left operand")?;
    require_nonempty(b, "right operand")?;
    Ok(convolve(a, b)?.level_set(1))
}

/// `A +_t B = {x : 1_A * 1_B(x) >= t}` for `t ∈ (0, 1]`.
pub fn partial_sumset(a: &GroupSet, b: &GroupSet, t: &Rational) -> Result<GroupSet> {
    check_threshold(t)?;
    Ok(convolve(a, b)?.threshold_set(t))
}

pub(crate) fn check_threshold(t: &Rational) -> Result<()> {
    if !t.is_positive() || *t > Rational::one() {
        return Err(Error::OutOfRange(format!("threshold {t} not in (0, 1]")));
    }
    Ok(())
}

/// `C + ... + C` (`k` copies).
pub fn iterated_sumset(c: &GroupSet, k: usize) -> Result<GroupSet> {
    require_nonempty(c, "iterated set")?;
    if k == 0 {
        return Err(Error::OutOfRange("iteration count must be at least 1".into()));
    }
    let mut acc = c.clone();
    for _ in 1..k {
        if acc.is_full() {
            break;
        }
        acc = sumset(&acc, c)?;
    }
    Ok(acc)
}

/// `1_A * 1_{-A}`; its value at `x` is `|A ∩ (x + A)|`.
pub fn difference_profile(a: &GroupSet) -> Result<ConvolutionProfile> {
    require_nonempty(a, "set")?;
    convolve(a, &a.reflect())
}

/// Integrated truncation `Σ_x min(counts(x), k)`.
pub fn truncated_mass(profile: &ConvolutionProfile, k: u64) -> u64 {
    profile.counts.iter().map(|&c| c.min(k)).sum()
}
