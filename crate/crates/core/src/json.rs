//! Lossless JSON exchange for polynomials and polynomial tuples.
//!
//! `{"nvars": n, "terms": [{"exp": [..], "num": "..", "den": ".."}]}` with
//! integers as decimal strings. Terms are written in graded-lex order.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::PolyError;
use crate::{Rat, RatPoly};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub exp: Vec<u32>,
    pub num: String,
    #[serde(default = "one_string")]
    pub den: String,
}

fn one_string() -> String {
    "1".to_string()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyJson {
    pub nvars: usize,
    pub terms: Vec<TermJson>,
}

/// A tuple of polynomials sharing `nvars` (maps and vector fields).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentsJson {
    pub nvars: usize,
    pub components: Vec<PolyJson>,
}

pub fn rat_to_strings(r: &Rat) -> (String, String) {
    (r.numer().to_string(), r.denom().to_string())
}

pub fn rat_from_strings(num: &str, den: &str) -> Result<Rat, PolyError> {
    let n: BigInt = num
        .trim()
        .parse()
        .map_err(|_| PolyError::Format(format!("bad integer '{num}'")))?;
    let d: BigInt = den
        .trim()
        .parse()
        .map_err(|_| PolyError::Format(format!("bad integer '{den}'")))?;
    if d.is_zero() {
        return Err(PolyError::Format("zero denominator".into()));
    }
    Ok(Rat::new(n, d))
}

/// Renders a rational as `"p"` or `"p/q"`.
pub fn rat_to_string(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"p"`, `"p/q"` or a finite decimal such as `"-0.125"`.
pub fn rat_from_str(s: &str) -> Result<Rat, PolyError> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        return rat_from_strings(n, d);
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (ip, fp) = body.split_once('.').unwrap_or((body, ""));
    if ip.is_empty() && fp.is_empty()
        || !ip.chars().all(|c| c.is_ascii_digit())
        || !fp.chars().all(|c| c.is_ascii_digit())
    {
        return Err(PolyError::Format(format!("bad rational '{s}'")));
    }
    let digits: BigInt = format!("{ip}{fp}").parse().unwrap_or_else(|_| BigInt::zero());
    let v = Rat::new(digits, num_traits::pow(BigInt::from(10), fp.len()));
    Ok(if neg { -v } else { v })
}

impl From<&RatPoly> for PolyJson {
    fn from(p: &RatPoly) -> Self {
        PolyJson {
            nvars: p.nvars(),
            terms: p
                .terms()
                .map(|(e, c)| {
                    let (num, den) = rat_to_strings(c);
                    TermJson {
                        exp: e.to_vec(),
                        num,
                        den,
                    }
                })
                .collect(),
        }
    }
}

impl TryFrom<&PolyJson> for RatPoly {
    type Error = PolyError;
    fn try_from(j: &PolyJson) -> Result<Self, PolyError> {
        let mut terms = Vec::with_capacity(j.terms.len());
        for t in &j.terms {
            terms.push((t.exp.clone(), rat_from_strings(&t.num, &t.den)?));
        }
        RatPoly::from_terms(j.nvars, terms)
    }
}

pub fn components_to_json(ps: &[RatPoly], nvars: usize) -> ComponentsJson {
    ComponentsJson {
        nvars,
        components: ps.iter().map(PolyJson::from).collect(),
    }
}

pub fn components_from_json(j: &ComponentsJson) -> Result<Vec<RatPoly>, PolyError> {
    j.components
        .iter()
        .map(|c| {
            let p = RatPoly::try_from(c)?;
            if p.nvars() != j.nvars {
                return Err(PolyError::DimensionMismatch {
                    expected: j.nvars,
                    found: p.nvars(),
                });
            }
            Ok(p)
        })
        .collect()
}

pub fn poly_to_value(p: &RatPoly) -> serde_json::Value {
    serde_json::to_value(PolyJson::from(p)).expect("polynomial serializes")
}

/// Sign of a rational as -1, 0 or 1.
pub fn rat_sign(r: &Rat) -> i8 {
    if r.is_zero() {
        0
    } else if r.is_negative() {
        -1
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_poly;

    #[test]
    fn round_trip_preserves_big_coefficients() {
        let p = parse_poly("123456789012345678901234567890*x*y^3 - 7/9", &["x", "y"]).unwrap();
        let j = PolyJson::from(&p);
        let s = serde_json::to_string(&j).unwrap();
        let back: PolyJson = serde_json::from_str(&s).unwrap();
        assert_eq!(RatPoly::try_from(&back).unwrap(), p);
        assert!(s.contains("\"num\":\"-7\""));
    }

    #[test]
    fn rejects_zero_denominator() {
        let j = PolyJson {
            nvars: 1,
            terms: vec![TermJson {
                exp: vec![1],
                num: "1".into(),
                den: "0".into(),
            }],
        };
        assert!(RatPoly::try_from(&j).is_err());
    }

    #[test]
    fn rational_strings() {
        assert_eq!(rat_from_str("-0.125").unwrap(), crate::ratio(-1, 8));
        assert_eq!(rat_from_str("6/4").unwrap(), crate::ratio(3, 2));
        assert_eq!(rat_to_string(&crate::ratio(3, 2)), "3/2");
        assert!(rat_from_str("1e3").is_err());
    }
}
