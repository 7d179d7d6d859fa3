//! Division of characters: solutions `χ'` of `m·χ' = χ`.

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::group::Character;

/// Every `χ'` with `m·χ' = χ`, sorted by order and then by frequency vector.
pub fn quotient_candidates(chi: &Character, m: u64) -> Result<Vec<Character>> {
    if m == 0 {
        return Err(Error::OutOfRange("multiplicity must be positive".into()));
    }
    let group = chi.group();
    let mut per_axis: Vec<Vec<i64>> = Vec::with_capacity(group.rank());
    for (&xi, &n) in chi.freq().iter().zip(group.dims()) {
        let (n, xi) = (n as i64, xi as i64);
        let mm = (m % n as u64) as i64;
        let g = mm.gcd(&n);
        if xi % g != 0 {
            return Err(Error::NoQuotient { m, modulus: n as usize });
        }
        let step = n / g;
        let base = if step == 1 {
            0
        } else {
            let inv = (mm / g).extended_gcd(&step).x.rem_euclid(step);
            ((xi / g) % step * inv).rem_euclid(step)
        };
        per_axis.push((0..g).map(|k| base + k * step).collect());
    }
    let mut out = vec![Vec::new()];
    for options in &per_axis {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<i64>| {
                options.iter().map(move |&y| {
                    let mut v = prefix.clone();
                    v.push(y);
                    v
                })
            })
            .collect();
    }
    let mut chars: Vec<Character> = out.iter().map(|f| Character::new(group, f)).collect::<Result<_>>()?;
    chars.sort_by(|a, b| (a.order(), a.freq()).cmp(&(b.order(), b.freq())));
    Ok(chars)
}

/// The solution of `m·χ' = χ` of smallest order (lexicographically smallest frequency on ties).
pub fn quotient_character(chi: &Character, m: u64) -> Result<Character> {
    if m == 1 {
        return Ok(chi.clone());
    }
    Ok(quotient_candidates(chi, m)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GridGroup;

    #[test]
    fn examples() {
        let g = GridGroup::cyclic(6001).unwrap();
        let chi = Character::new(&g, &[3]).unwrap();
        assert_eq!(quotient_character(&chi, 1).unwrap(), chi);
        assert_eq!(quotient_character(&chi, 3).unwrap().freq(), &[1]);

        let g = GridGroup::cyclic(12).unwrap();
        let chi = Character::new(&g, &[2]).unwrap();
        let all: Vec<Vec<usize>> = quotient_candidates(&chi, 2).unwrap().iter().map(|c| c.freq().to_vec()).collect();
        assert_eq!(all, vec![vec![1], vec![7]]);
        assert_eq!(quotient_character(&chi, 2).unwrap().freq(), &[1]);

        let odd = Character::new(&g, &[3]).unwrap();
        assert_eq!(quotient_character(&odd, 2).unwrap_err(), Error::NoQuotient { m: 2, modulus: 12 });
    }

    /// Oracle: enumerate every character of the group.
    #[test]
    fn candidates_match_enumeration() {
        let g = GridGroup::new(&[4, 6]).unwrap();
        for a in 0..4 {
            for b in 0..6 {
                let chi = Character::new(&g, &[a, b]).unwrap();
                for m in 1..=7u64 {
                    let mut expected: Vec<Character> = (0..24)
                        .map(|i| {
                            let c = g.coords(i);
                            Character::new(&g, &[c[0] as i64, c[1] as i64]).unwrap()
                        })
                        .filter(|c| c.scale(m) == chi)
                        .collect();
                    expected.sort_by(|x, y| (x.order(), x.freq()).cmp(&(y.order(), y.freq())));
                    match quotient_candidates(&chi, m) {
                        Ok(found) => assert_eq!(found, expected),
                        Err(_) => assert!(expected.is_empty()),
                    }
                }
            }
        }
    }
}
