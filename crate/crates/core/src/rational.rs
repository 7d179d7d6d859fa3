//! Exact rational arithmetic used for every measure and verdict.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = Ratio<i128>;

/// `num / den` as a reduced rational.
pub fn ratio(num: i128, den: i128) -> Rational {
    Rational::new(num, den)
}

pub fn from_int(n: i128) -> Rational {
    Rational::from_integer(n)
}

pub fn to_f64(r: &Rational) -> f64 {
    // Ratio::to_f64 handles large components without overflow.
    r.to_f64().unwrap_or(f64::NAN)
}

/// Smallest rational with denominator `2^32` that is >= sqrt(r). `r` must be nonnegative.
pub fn sqrt_upper(r: &Rational) -> Rational {
    assert!(!r.is_negative(), "sqrt of negative rational");
    if r.is_zero() {
        return Rational::zero();
    }
    const SCALE: i128 = 1 << 32;
    let approx = to_f64(r).sqrt();
    let mut num = (approx * SCALE as f64).ceil() as i128;
    let mut s = ratio(num, SCALE);
    while &(s * s) < r {
        num += 1;
        s = ratio(num, SCALE);
    }
    s
}

/// Parses `"p/q"`, `"p"`, or a plain decimal such as `"0.05"`.
pub fn parse(text: &str) -> Option<Rational> {
    let text = text.trim();
    match text.split_once('/') {
        Some((p, q)) => {
            let p: i128 = p.trim().parse().ok()?;
            let q: i128 = q.trim().parse().ok()?;
            if q == 0 {
                return None;
            }
            Some(ratio(p, q))
        }
        None => match text.split_once('.') {
            Some((int, frac)) => {
                if frac.is_empty() || frac.len() > 18 || !frac.bytes().all(|c| c.is_ascii_digit()) {
                    return None;
                }
                let negative = int.starts_with('-');
                let whole: i128 = match int {
                    "" | "-" | "+" => 0,
                    _ => int.parse().ok()?,
                };
                let scale = 10i128.pow(frac.len() as u32);
                let part = ratio(frac.parse().ok()?, scale);
                Some(if negative { from_int(whole) - part } else { from_int(whole) + part })
            }
            None => text.parse::<i128>().ok().map(from_int),
        },
    }
}

pub fn format(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Numerator of `r` over the fixed denominator `den`, if `r` is expressible that way.
pub fn over_denominator(r: &Rational, den: usize) -> Option<i128> {
    let den = den as i128;
    let (q, rem) = (r.numer() * den).div_rem(r.denom());
    rem.is_zero().then_some(q)
}

/// Serde adapter writing rationals as `"p/q"` strings.
pub mod serde_str {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        super::parse(&text).ok_or_else(|| serde::de::Error::custom(format!("bad rational `{text}`")))
    }
}
