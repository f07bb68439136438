//! Two-term domination: when `t^k <= p(t)` for all `t > 0` with
//! nonnegative coefficients, one coefficient or a balanced pair is
//! responsible.

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use torsion_core::poly::rat_to_f64;
use torsion_core::Rat;

use crate::error::NumericError;
use crate::upoly::{RealRoot, UPoly};

#[derive(Clone, Debug, PartialEq)]
pub enum TwoTerms {
    /// `a_k >= 1`.
    SingleTerm,
    /// `a_{n1}^{(n2-k)/(n2-n1)} a_{n2}^{(k-n1)/(n2-n1)} = strength`. When
    /// the inequality holds without an exact witness the best pair is
    /// returned with `strength < 1`.
    Pair { n1: usize, n2: usize, strength: f64 },
    /// `t^k > p(t)` at `witness`.
    Fail { witness: Rat },
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct PairStrength {
    pub n1: usize,
    pub n2: usize,
    pub strength: f64,
    pub exact_witness: bool,
}

/// Every admissible pair `n1 < k < n2` with positive coefficients.
pub fn pair_strengths(a: &[Rat], k: usize) -> Vec<PairStrength> {
    let mut out = Vec::new();
    for n1 in 0..k.min(a.len()) {
        if !a[n1].is_positive() {
            continue;
        }
        for n2 in k + 1..a.len() {
            if !a[n2].is_positive() {
                continue;
            }
            let e1 = (n2 - k) as i32;
            let e2 = (k - n1) as i32;
            let prod = num_traits::pow::Pow::pow(&a[n1], e1) * num_traits::pow::Pow::pow(&a[n2], e2);
            let strength =
                ((e1 as f64 * rat_to_f64(&a[n1]).ln() + e2 as f64 * rat_to_f64(&a[n2]).ln()) / (n2 - n1) as f64).exp();
            out.push(PairStrength {
                n1,
                n2,
                strength,
                exact_witness: prod >= Rat::one(),
            });
        }
    }
    out
}

/// Decides `t^k <= p(t)` on `(0, ∞)` exactly. `Err` carries a rational
/// point where it fails.
pub fn dominates(a: &[Rat], k: usize) -> Result<(), Rat> {
    let q = UPoly::new(a.to_vec()).sub(&UPoly::monomial(k, Rat::one()));
    if q.is_zero() {
        return Ok(());
    }
    let sq = q.squarefree();
    let mut pos: Vec<(Rat, Rat)> = Vec::new();
    for r in q.real_roots() {
        match r {
            RealRoot::Exact(x) => {
                if x.is_positive() {
                    pos.push((x.clone(), x));
                }
            }
            RealRoot::Interval { lo, hi } => {
                if hi <= Rat::zero() {
                    continue;
                }
                let (mut lo, hi) = (lo, hi);
                if lo.is_negative() {
                    // Unique root in (lo, hi); decide its side of 0.
                    let s0 = sq.eval(&Rat::zero());
                    if s0.is_zero() {
                        continue;
                    }
                    if (s0.is_positive()) != (sq.eval(&lo).is_positive()) {
                        continue;
                    }
                    lo = Rat::zero();
                }
                // Push the left end off 0 so that it is a usable sample.
                let mut r = RealRoot::Interval { lo, hi };
                while let RealRoot::Interval { lo, hi } = &r {
                    if lo.is_positive() {
                        break;
                    }
                    let m = (lo + hi) / Rat::from_integer(2.into());
                    let sm = sq.eval(&m);
                    if sm.is_zero() {
                        r = RealRoot::Exact(m);
                    } else if sm.is_positive() == sq.eval(hi).is_positive() {
                        r = RealRoot::Interval { lo: lo.clone(), hi: m };
                    } else {
                        r = RealRoot::Interval { lo: m, hi: hi.clone() };
                    }
                }
                pos.push(r.bounds());
            }
        }
    }
    let two = Rat::from_integer(2.into());
    let mut samples: Vec<Rat> = Vec::new();
    match pos.first() {
        None => samples.push(Rat::one()),
        Some((lo, _)) => samples.push(lo / &two),
    }
    for w in pos.windows(2) {
        if w[0].1 < w[1].0 {
            samples.push((&w[0].1 + &w[1].0) / &two);
        } else {
            samples.push(w[0].1.clone());
        }
    }
    if let Some((_, hi)) = pos.last() {
        samples.push(hi * &two + Rat::one());
    }
    for t in samples {
        if q.eval(&t).is_negative() {
            return Err(t);
        }
    }
    Ok(())
}

pub fn extract_two_terms(a: &[Rat], k: usize) -> Result<TwoTerms, NumericError> {
    if a.iter().any(Signed::is_negative) {
        return Err(NumericError::BadInput("coefficients must be nonnegative".into()));
    }
    if a.get(k).is_some_and(|v| v >= &Rat::one()) {
        return Ok(TwoTerms::SingleTerm);
    }
    let pairs = pair_strengths(a, k);
    let best = |only_exact: bool| {
        pairs
            .iter()
            .filter(|p| !only_exact || p.exact_witness)
            .fold(None::<&PairStrength>, |acc, p| match acc {
                Some(b) if b.strength >= p.strength => Some(b),
                _ => Some(p),
            })
            .map(|p| TwoTerms::Pair {
                n1: p.n1,
                n2: p.n2,
                strength: p.strength,
            })
    };
    if let Some(found) = best(true) {
        return Ok(found);
    }
    match dominates(a, k) {
        Err(witness) => Ok(TwoTerms::Fail { witness }),
        Ok(()) => Ok(best(false).expect("domination forces terms on both sides of k")),
    }
}
