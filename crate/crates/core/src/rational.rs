//! JSON rendering of exact rationals: `{"num": "...", "den": "..."}`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalJson {
    pub num: String,
    pub den: String,
}

impl From<&BigRational> for RationalJson {
    fn from(r: &BigRational) -> Self {
        RationalJson {
            num: r.numer().to_string(),
            den: r.denom().to_string(),
        }
    }
}

impl TryFrom<&RationalJson> for BigRational {
    type Error = Error;

    fn try_from(r: &RationalJson) -> Result<Self> {
        let parse = |s: &str| {
            s.parse::<BigInt>()
                .map_err(|_| Error::Parse(format!("not an integer: {s:?}")))
        };
        let den = parse(&r.den)?;
        if den == BigInt::from(0) {
            return Err(Error::Parse("zero denominator".into()));
        }
        Ok(BigRational::new(parse(&r.num)?, den))
    }
}

/// Parses `p/q`, `p`, or a finite decimal such as `0.001`.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let text = text.trim();
    let bad = || Error::Parse(format!("not a rational: {text:?}"));
    if let Some((p, q)) = text.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q == BigInt::from(0) {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((int, frac)) = text.split_once('.') {
        let digits = format!("{int}{frac}");
        let p: BigInt = digits.parse().map_err(|_| bad())?;
        let q = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(BigRational::new(p, q));
    }
    let p: BigInt = text.parse().map_err(|_| bad())?;
    Ok(BigRational::new(p, BigInt::one()))
}

pub fn approx(r: &BigRational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        // huge numerators and denominators: shift both down first
        _ => {
            let bits = r.denom().bits().max(r.numer().bits()).saturating_sub(1000);
            let n = (r.numer() >> bits).to_f64().unwrap_or(f64::NAN);
            let d = (r.denom() >> bits).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}
