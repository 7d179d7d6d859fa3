use std::fmt;

use super::GridGroup;
use crate::error::{Error, Result};
use crate::rational::{ratio, Rational};

const WORD: usize = 64;

/// Dense membership indicator over a [`GridGroup`], with cached cardinality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GroupSet {
    group: GridGroup,
    words: Vec<u64>,
    len: usize,
}

impl GroupSet {
    pub fn empty(group: &GridGroup) -> Self {
        GroupSet { group: group.clone(), words: vec![0; group.size().div_ceil(WORD)], len: 0 }
    }

    pub fn full(group: &GridGroup) -> Self {
        Self::from_fn(group, |_| true)
    }

    pub fn from_fn(group: &GridGroup, mut pred: impl FnMut(usize) -> bool) -> Self {
        let mut set = Self::empty(group);
        for x in 0..group.size() {
            if pred(x) {
                set.words[x / WORD] |= 1 << (x % WORD);
                set.len += 1;
            }
        }
        set
    }

    /// Builds a set from element indices; duplicates are ignored.
    pub fn from_indices(group: &GridGroup, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut set = Self::empty(group);
        for x in indices {
            if x >= group.size() {
                return Err(Error::IndexOutOfRange { index: x, size: group.size() });
            }
            set.insert(x);
        }
        Ok(set)
    }

    /// The interval `{start, start+1, ..., start+len-1}` of a cyclic group.
    pub fn interval(group: &GridGroup, start: usize, len: usize) -> Result<Self> {
        if !group.is_cyclic() {
            return Err(Error::InvalidGroup("intervals are defined on cyclic groups only".into()));
        }
        let n = group.size();
        if len > n {
            return Err(Error::OutOfRange(format!("interval length {len} exceeds group size {n}")));
        }
        Self::from_indices(group, (0..len).map(|i| (start + i) % n))
    }

    /// Bit-packed indicator from a boolean slice.
    pub fn from_indicator(group: &GridGroup, indicator: &[bool]) -> Result<Self> {
        if indicator.len() != group.size() {
            return Err(Error::Malformed(format!(
                "indicator has {} entries, group has {}",
                indicator.len(),
                group.size()
            )));
        }
        Ok(Self::from_fn(group, |x| indicator[x]))
    }

    pub fn group(&self) -> &GridGroup {
        &self.group
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_full(&self) -> bool {
        self.len == self.group.size()
    }

    /// `|A| / N`.
    pub fn measure(&self) -> Rational {
        ratio(self.len as i128, self.group.size() as i128)
    }

    pub fn contains(&self, x: usize) -> bool {
        x < self.group.size() && self.words[x / WORD] >> (x % WORD) & 1 == 1
    }

    pub fn insert(&mut self, x: usize) -> bool {
        let bit = 1u64 << (x % WORD);
        let w = &mut self.words[x / WORD];
        if *w & bit == 0 {
            *w |= bit;
            self.len += 1;
            true
        } else {
            false
        }
    }

    pub fn remove(&mut self, x: usize) -> bool {
        let bit = 1u64 << (x % WORD);
        let w = &mut self.words[x / WORD];
        if *w & bit != 0 {
            *w &= !bit;
            self.len -= 1;
            true
        } else {
            false
        }
    }

    pub fn toggle(&mut self, x: usize) {
        if !self.remove(x) {
            self.insert(x);
        }
    }

    /// Members in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD + b)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// 0/1 indicator as integers, length `N`.
    pub fn indicator(&self) -> Vec<u64> {
        (0..self.group.size()).map(|x| self.contains(x) as u64).collect()
    }

    fn zip_words(&self, other: &GroupSet, f: impl Fn(u64, u64) -> u64) -> Result<GroupSet> {
        self.group.ensure_same(&other.group)?;
        let mut words: Vec<u64> = self.words.iter().zip(&other.words).map(|(&a, &b)| f(a, b)).collect();
        mask_tail(&mut words, self.group.size());
        let len = words.iter().map(|w| w.count_ones() as usize).sum();
        Ok(GroupSet { group: self.group.clone(), words, len })
    }

    pub fn union(&self, other: &GroupSet) -> Result<GroupSet> {
        self.zip_words(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &GroupSet) -> Result<GroupSet> {
        self.zip_words(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &GroupSet) -> Result<GroupSet> {
        self.zip_words(other, |a, b| a & !b)
    }

    pub fn symmetric_difference(&self, other: &GroupSet) -> Result<GroupSet> {
        self.zip_words(other, |a, b| a ^ b)
    }

    pub fn complement(&self) -> GroupSet {
        let mut words: Vec<u64> = self.words.iter().map(|w| !w).collect();
        mask_tail(&mut words, self.group.size());
        GroupSet { group: self.group.clone(), words, len: self.group.size() - self.len }
    }

    pub fn is_subset(&self, other: &GroupSet) -> Result<bool> {
        self.group.ensure_same(&other.group)?;
        Ok(self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0))
    }

    /// `|A ∩ B|` without materializing the intersection.
    pub fn intersection_len(&self, other: &GroupSet) -> Result<usize> {
        self.group.ensure_same(&other.group)?;
        Ok(self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones() as usize).sum())
    }

    /// `|A Δ B| / N`.
    pub fn symm_diff_measure(&self, other: &GroupSet) -> Result<Rational> {
        self.group.ensure_same(&other.group)?;
        let n: usize = self.words.iter().zip(&other.words).map(|(a, b)| (a ^ b).count_ones() as usize).sum();
        Ok(ratio(n as i128, self.group.size() as i128))
    }

    /// `A + x`.
    pub fn translate(&self, x: usize) -> GroupSet {
        let g = &self.group;
        let mut out = Self::empty(g);
        for a in self.iter() {
            out.insert(g.add(a, x));
        }
        out
    }

    /// `-A`.
    pub fn reflect(&self) -> GroupSet {
        let g = &self.group;
        let mut out = Self::empty(g);
        for a in self.iter() {
            out.insert(g.neg(a));
        }
        out
    }
}

fn mask_tail(words: &mut [u64], size: usize) {
    let rem = size % WORD;
    if rem != 0 {
        if let Some(last) = words.last_mut() {
            *last &= (1u64 << rem) - 1;
        }
    }
}

impl fmt::Debug for GroupSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const SHOW: usize = 32;
        let head: Vec<usize> = self.iter().take(SHOW).collect();
        write!(f, "GroupSet({:?}, |A|={}, {:?}", self.group, self.len, head)?;
        if self.len > SHOW {
            f.write_str("...")?;
        }
        f.write_str(")")
    }
}
