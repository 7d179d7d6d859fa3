use std::fmt;

use num_integer::{gcd, lcm};
use serde::{Deserialize, Serialize};

use super::{GridGroup, GroupSet};
use crate::error::{Error, Result};
use crate::rational::{ratio, Rational};

/// Smallest `L >= 1` with `L * freq_i ≡ 0 (mod N_i)` for every coordinate.
pub fn character_order(group: &GridGroup, freq: &[i64]) -> Result<usize> {
    Ok(Character::new(group, freq)?.order())
}

/// The character `x ↦ Σ ξ_i x_i / N_i mod 1`, evaluated exactly on the `L`-point circle `Z/L`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Character {
    group: GridGroup,
    freq: Vec<usize>,
    order: usize,
    // φ(x)·L = Σ weight_i · x_i  (mod L)
    weights: Vec<usize>,
}

impl Character {
    pub fn new(group: &GridGroup, freq: &[i64]) -> Result<Self> {
        if freq.len() != group.rank() {
            return Err(Error::FrequencyRank { expected: group.rank(), got: freq.len() });
        }
        let reduced: Vec<usize> = freq
            .iter()
            .zip(group.dims())
            .map(|(&f, &n)| f.rem_euclid(n as i64) as usize)
            .collect();
        Ok(Self::from_reduced(group, reduced))
    }

    fn from_reduced(group: &GridGroup, freq: Vec<usize>) -> Self {
        let orders: Vec<usize> = freq.iter().zip(group.dims()).map(|(&f, &n)| n / gcd(f, n)).collect();
        let order = orders.iter().fold(1, |acc, &o| lcm(acc, o));
        let weights = freq
            .iter()
            .zip(group.dims())
            .zip(&orders)
            .map(|((&f, &n), &o)| {
                // f/n = (f/g)/o with g = gcd(f, n); scale onto Z/order.
                let g = n / o;
                ((f / g) * (order / o)) % order
            })
            .collect();
        Character { group: group.clone(), freq, order, weights }
    }

    pub fn zero(group: &GridGroup) -> Self {
        Self::from_reduced(group, vec![0; group.rank()])
    }

    pub fn group(&self) -> &GridGroup {
        &self.group
    }

    /// Reduced frequency vector.
    pub fn freq(&self) -> &[usize] {
        &self.freq
    }

    pub fn freq_i64(&self) -> Vec<i64> {
        self.freq.iter().map(|&f| f as i64).collect()
    }

    /// Size `L` of the image circle.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.order == 1
    }

    /// Number of group elements over each point of the image circle, `N / L`.
    pub fn fiber_size(&self) -> usize {
        self.group.size() / self.order
    }

    /// `φ(x)·L` as a residue in `[0, L)`.
    pub fn eval(&self, x: usize) -> usize {
        let l = self.order as u128;
        if self.group.is_cyclic() {
            return ((self.weights[0] as u128 * x as u128) % l) as usize;
        }
        self.group
            .coords(x)
            .iter()
            .zip(&self.weights)
            .fold(0u128, |acc, (&c, &w)| (acc + c as u128 * w as u128) % l) as usize
    }

    /// `φ(x)` as a point of `R/Z` in `[0, 1)`.
    pub fn phase(&self, x: usize) -> f64 {
        self.eval(x) as f64 / self.order as f64
    }

    pub fn neg(&self) -> Character {
        let freq = self.freq.iter().zip(self.group.dims()).map(|(&f, &n)| (n - f) % n).collect();
        Self::from_reduced(&self.group, freq)
    }

    /// `m·χ`.
    pub fn scale(&self, m: u64) -> Character {
        let freq = self
            .freq
            .iter()
            .zip(self.group.dims())
            .map(|(&f, &n)| ((f as u128 * m as u128) % n as u128) as usize)
            .collect();
        Self::from_reduced(&self.group, freq)
    }

    /// Representative of the class `{ξ, -ξ}`: the lexicographically smaller vector.
    pub fn canonical(&self) -> Character {
        let neg = self.neg();
        if neg.freq < self.freq {
            neg
        } else {
            self.clone()
        }
    }

    /// True when `other ∈ {χ, -χ}`.
    pub fn same_class(&self, other: &Character) -> bool {
        self.group == other.group && (self.freq == other.freq || self.neg().freq == other.freq)
    }

    /// Some `x` with `φ(x)·L = value`; exists because the character is onto `Z/L`.
    pub fn preimage(&self, value: usize) -> usize {
        let target = value % self.order;
        (0..self.group.size())
            .find(|&x| self.eval(x) == target)
            .expect("a character is onto its image circle")
    }
}

impl Serialize for Character {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Character", 2)?;
        st.serialize_field("freq", &self.freq)?;
        st.serialize_field("order", &self.order)?;
        st.end()
    }
}

impl fmt::Debug for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Character(ξ={:?}, L={})", self.freq, self.order)
    }
}

/// The residues `{start, ..., start+length-1} mod L` on the circle `Z/L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Arc {
    pub circle_size: usize,
    pub start: usize,
    pub length: usize,
}

impl Arc {
    pub fn new(circle_size: usize, start: usize, length: usize) -> Result<Self> {
        if circle_size == 0 {
            return Err(Error::InvalidArc("circle size must be positive".into()));
        }
        if start >= circle_size {
            return Err(Error::InvalidArc(format!("start {start} not below circle size {circle_size}")));
        }
        if length == 0 || length > circle_size {
            return Err(Error::InvalidArc(format!("length {length} not in [1, {circle_size}]")));
        }
        Ok(Arc { circle_size, start, length })
    }

    /// Arc starting at `start` reduced mod `circle_size`.
    pub fn wrapping(circle_size: usize, start: i64, length: usize) -> Result<Self> {
        Self::new(circle_size, start.rem_euclid(circle_size as i64) as usize, length)
    }

    pub fn contains(&self, alpha: usize) -> bool {
        let l = self.circle_size;
        (alpha % l + l - self.start) % l < self.length
    }

    pub fn residues(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.length).map(move |i| (self.start + i) % self.circle_size)
    }

    pub fn measure(&self) -> Rational {
        ratio(self.length as i128, self.circle_size as i128)
    }

    pub fn is_full(&self) -> bool {
        self.length == self.circle_size
    }

    pub fn shift(&self, by: i64) -> Arc {
        let l = self.circle_size as i64;
        Arc { start: (self.start as i64 + by).rem_euclid(l) as usize, ..*self }
    }

    /// The sumset `I + J` on `Z/L`: an arc of length `|I| + |J| - 1`, capped at `L`.
    pub fn sum(&self, other: &Arc) -> Result<Arc> {
        if self.circle_size != other.circle_size {
            return Err(Error::InvalidArc("arcs live on different circles".into()));
        }
        let length = (self.length + other.length - 1).min(self.circle_size);
        let start = if length == self.circle_size { 0 } else { (self.start + other.start) % self.circle_size };
        Ok(Arc { circle_size: self.circle_size, start, length })
    }

    /// Number of residues in exactly one of the two arcs.
    pub fn symmetric_difference_len(&self, other: &Arc) -> usize {
        (0..self.circle_size).filter(|&a| self.contains(a) != other.contains(a)).count()
    }
}

/// A character together with an arc on its image circle: the Bohr set `φ^{-1}(I)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BohrDescription {
    pub character: Character,
    pub arc: Arc,
}

impl BohrDescription {
    pub fn new(character: Character, arc: Arc) -> Result<Self> {
        if character.is_zero() && !arc.is_full() {
            return Err(Error::ZeroCharacter);
        }
        if arc.circle_size != character.order() {
            return Err(Error::InvalidArc(format!(
                "arc lives on Z/{} but the character has order {}",
                arc.circle_size,
                character.order()
            )));
        }
        Ok(BohrDescription { character, arc })
    }

    /// Measure of the materialized set, exactly `|I| / L`.
    pub fn measure(&self) -> Rational {
        self.arc.measure()
    }
}

/// `{x : φ(x)·L ∈ I}`.
pub fn bohr_set(desc: &BohrDescription) -> Result<GroupSet> {
    let chi = &desc.character;
    if chi.is_zero() && !desc.arc.is_full() {
        return Err(Error::ZeroCharacter);
    }
    if desc.arc.circle_size != chi.order() {
        return Err(Error::InvalidArc("arc circle size differs from the character order".into()));
    }
    Ok(GroupSet::from_fn(chi.group(), |x| desc.arc.contains(chi.eval(x))))
}
