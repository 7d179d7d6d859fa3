//! The ambient group `Z/N1 x ... x Z/Nd`, dense sets over it, characters, arcs and Bohr sets.

mod character;
mod json;
mod set;

pub use character::{bohr_set, character_order, Arc, BohrDescription, Character};
pub use json::{BohrJson, SetJson};
pub use set::GroupSet;

use std::fmt;
use std::sync::Arc as Shared;

use crate::error::{Error, Result};

#[derive(Debug, PartialEq, Eq, Hash)]
struct Dims {
    moduli: Vec<usize>,
    strides: Vec<usize>,
    size: usize,
}

/// A finite grid `Z/N1 x ... x Z/Nd`. Elements are row-major linear indices.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GridGroup(Shared<Dims>);

impl GridGroup {
    pub fn new(dims: &[usize]) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidGroup("at least one modulus is required".into()));
        }
        if let Some(&bad) = dims.iter().find(|&&n| n < 2) {
            return Err(Error::InvalidGroup(format!("modulus {bad} is smaller than 2")));
        }
        let size = dims
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .ok_or_else(|| Error::InvalidGroup("group size overflows".into()))?;
        let mut strides = vec![1usize; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        Ok(GridGroup(Shared::new(Dims { moduli: dims.to_vec(), strides, size })))
    }

    /// `Z/n`.
    pub fn cyclic(n: usize) -> Result<Self> {
        Self::new(&[n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.0.moduli
    }

    pub fn rank(&self) -> usize {
        self.0.moduli.len()
    }

    /// Number of elements `N`.
    pub fn size(&self) -> usize {
        self.0.size
    }

    pub fn is_cyclic(&self) -> bool {
        self.rank() == 1
    }

    /// True when a proper nontrivial subgroup exists, i.e. `N` is not prime.
    /// On such groups the Kneser-type bounds can genuinely fail.
    pub fn has_proper_subgroups(&self) -> bool {
        !is_prime(self.size())
    }

    pub fn coords(&self, index: usize) -> Vec<usize> {
        let d = &self.0;
        d.strides.iter().zip(&d.moduli).map(|(s, n)| (index / s) % n).collect()
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        let d = &self.0;
        coords.iter().zip(&d.moduli).zip(&d.strides).map(|((c, n), s)| (c % n) * s).sum()
    }

    pub fn add(&self, x: usize, y: usize) -> usize {
        let d = &self.0;
        if d.moduli.len() == 1 {
            let s = x + y;
            return if s >= d.size { s - d.size } else { s };
        }
        let mut out = 0;
        for (n, s) in d.moduli.iter().zip(&d.strides) {
            let c = ((x / s) % n + (y / s) % n) % n;
            out += c * s;
        }
        out
    }

    pub fn neg(&self, x: usize) -> usize {
        let d = &self.0;
        if d.moduli.len() == 1 {
            return if x == 0 { 0 } else { d.size - x };
        }
        let mut out = 0;
        for (n, s) in d.moduli.iter().zip(&d.strides) {
            let c = (x / s) % n;
            out += ((n - c) % n) * s;
        }
        out
    }

    pub fn sub(&self, x: usize, y: usize) -> usize {
        self.add(x, self.neg(y))
    }

    /// `k * x`.
    pub fn scale(&self, k: usize, x: usize) -> usize {
        let d = &self.0;
        let mut out = 0;
        for (n, s) in d.moduli.iter().zip(&d.strides) {
            let c = ((x / s) % n) as u128 * (k as u128 % *n as u128) % *n as u128;
            out += c as usize * s;
        }
        out
    }

    /// Exponent of the group: `lcm(N1, ..., Nd)`.
    pub fn exponent(&self) -> usize {
        self.dims().iter().fold(1, |acc, &n| num_integer::lcm(acc, n))
    }

    pub(crate) fn ensure_same(&self, other: &GridGroup) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GroupMismatch { left: self.dims().to_vec(), right: other.dims().to_vec() })
        }
    }
}

impl fmt::Debug for GridGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GridGroup{:?}", self.dims())
    }
}

impl fmt::Display for GridGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.dims().iter().map(|n| format!("Z/{n}")).collect();
        f.write_str(&parts.join(" x "))
    }
}

pub fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn make_group_examples() {
        let g = GridGroup::new(&[10]).unwrap();
        assert_eq!(g.size(), 10);
        let g = GridGroup::new(&[4, 6]).unwrap();
        assert_eq!(g.size(), 24);
        assert!(GridGroup::new(&[1]).is_err());
        assert!(GridGroup::new(&[]).is_err());
        assert!(GridGroup::new(&[5, 0]).is_err());
    }

    #[test]
    fn arithmetic_is_componentwise() {
        let g = GridGroup::new(&[4, 6]).unwrap();
        let x = g.index(&[3, 5]);
        let y = g.index(&[2, 4]);
        assert_eq!(g.coords(g.add(x, y)), vec![1, 3]);
        assert_eq!(g.coords(g.neg(x)), vec![1, 1]);
        assert_eq!(g.add(x, g.neg(x)), 0);
        assert_eq!(g.coords(g.scale(3, x)), vec![1, 3]);
        for i in 0..g.size() {
            assert_eq!(g.index(&g.coords(i)), i);
        }
    }

    #[test]
    fn subgroup_detection() {
        assert!(!GridGroup::cyclic(97).unwrap().has_proper_subgroups());
        assert!(GridGroup::cyclic(6).unwrap().has_proper_subgroups());
        assert!(GridGroup::new(&[3, 5]).unwrap().has_proper_subgroups());
        assert_eq!(GridGroup::new(&[4, 6]).unwrap().exponent(), 12);
    }
}
