//! Detectors for polynomial curves: near-tangency along a fast-growing
//! sequence of times, and counts of scales where two polynomials sit at
//! opposite dyadic sizes.

use serde::Serialize;
use torsion_core::Rat;

use crate::error::NumericError;
use crate::upoly::UPoly;

#[derive(Clone, Debug, Serialize, PartialEq)]
#[serde(tag = "verdict")]
pub enum Tangency {
    /// `|γ∧γ'| < ε|γ||γ'|` at `times[index]`.
    Found { index: usize, ratio: f64 },
    /// No time qualifies; `ratios` holds every wedge ratio.
    ViolationWitness { ratios: Vec<f64> },
}

fn eval_curve(g: &[UPoly], t: f64) -> Vec<f64> {
    g.iter().map(|p| p.eval_f64(t)).collect()
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// `|γ∧γ'| / (|γ||γ'|)` at `t`, zero when either vector vanishes.
pub fn wedge_ratio(g: &[UPoly], dg: &[UPoly], t: f64) -> f64 {
    let a = eval_curve(g, t);
    let b = eval_curve(dg, t);
    let (na, nb) = (norm2(&a), norm2(&b));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
    // Lagrange identity, clamped against cancellation.
    ((na * nb - dot * dot).max(0.0) / (na * nb)).sqrt()
}

pub fn tangency_scan(g: &[UPoly], times: &[f64], delta: f64, eps: f64) -> Result<Tangency, NumericError> {
    if g.is_empty() || times.is_empty() {
        return Err(NumericError::BadInput("empty curve or time list".into()));
    }
    for (i, w) in times.windows(2).enumerate() {
        let (a, b) = (norm2(&eval_curve(g, w[0])).sqrt(), norm2(&eval_curve(g, w[1])).sqrt());
        if !(a < delta * b) {
            return Err(NumericError::HypothesisNotMet(format!(
                "|γ(t_{i})| = {a:e} is not below δ|γ(t_{})| = {:e}",
                i + 1,
                delta * b
            )));
        }
    }
    let dg: Vec<UPoly> = g.iter().map(UPoly::derivative).collect();
    let ratios: Vec<f64> = times.iter().map(|&t| wedge_ratio(g, &dg, t)).collect();
    Ok(match ratios.iter().position(|&r| r < eps) {
        Some(index) => Tangency::Found { index, ratio: ratios[index] },
        None => Tangency::ViolationWitness { ratios },
    })
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ScaleCount {
    pub count: usize,
    /// The feasible `k` with a sample time for each.
    pub feasible: Vec<(i64, f64)>,
}

fn dyadic(e: i64) -> Rat {
    let two = Rat::from_integer(2.into());
    if e >= 0 {
        num_traits::pow::Pow::pow(&two, e as u32)
    } else {
        num_traits::pow::Pow::pow(&two.recip(), (-e) as u32)
    }
}

fn roots_of_shifts(p: &UPoly, levels: &[Rat], out: &mut Vec<f64>) {
    for c in levels {
        for s in [p.sub(&UPoly::constant(c.clone())), p.add(&UPoly::constant(c.clone()))] {
            if s.degree().unwrap_or(0) > 0 {
                out.extend(s.real_roots_f64());
            }
        }
    }
}

fn within(v: f64, lo: f64, hi: f64) -> bool {
    let slack = 1e-12;
    v >= lo * (1.0 - slack) && v <= hi * (1.0 + slack)
}

/// Scans `k` in `range` for a time `t` with `|p1(t)| ~ 2^{a1 k}` and
/// `|p2(t)| ~ 2^{-a2 k}`, each within a factor of 2.
pub fn scale_count(p1: &UPoly, p2: &UPoly, a1: u32, a2: u32, range: (i64, i64)) -> ScaleCount {
    let mut feasible = Vec::new();
    for k in range.0..=range.1 {
        let e1 = a1 as i64 * k;
        let e2 = -(a2 as i64) * k;
        let (l1, h1) = (dyadic(e1 - 1), dyadic(e1 + 1));
        let (l2, h2) = (dyadic(e2 - 1), dyadic(e2 + 1));
        let mut cuts = Vec::new();
        roots_of_shifts(p1, &[l1.clone(), h1.clone()], &mut cuts);
        roots_of_shifts(p2, &[l2.clone(), h2.clone()], &mut cuts);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut probes = cuts.clone();
        for w in cuts.windows(2) {
            probes.push(0.5 * (w[0] + w[1]));
        }
        match (cuts.first(), cuts.last()) {
            (Some(&a), Some(&b)) => {
                probes.push(a - 1.0 - a.abs());
                probes.push(b + 1.0 + b.abs());
            }
            _ => probes.push(0.0),
        }
        let f = |r: &Rat| torsion_core::poly::rat_to_f64(r);
        let hit = probes.into_iter().find(|&t| {
            within(p1.eval_f64(t).abs(), f(&l1), f(&h1)) && within(p2.eval_f64(t).abs(), f(&l2), f(&h2))
        });
        if let Some(t) = hit {
            feasible.push((k, t));
        }
    }
    ScaleCount {
        count: feasible.len(),
        feasible,
    }
}
