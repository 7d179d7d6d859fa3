//! Sumset inequalities on finite grid groups `Z/N1 × ... × Z/Nd`, exact convolution, and
//! recovery of parallel Bohr structure from near-critical pairs.

pub mod conv;
pub mod critical;
pub mod error;
pub mod group;
pub mod harness;
pub mod inequalities;
pub mod inverse;
pub mod ntt;
pub mod rational;
pub mod rng;

pub use error::{Error, Result};
pub use group::{bohr_set, Arc, BohrDescription, Character, GridGroup, GroupSet};
pub use rational::Rational;
