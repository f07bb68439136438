//! Measures of sublevel sets `{|P| < ε ‖P‖}` on the cube `[-1,1]^n`.

use serde::Serialize;
use torsion_core::{Rat, RatPoly};

use crate::error::NumericError;
use crate::fpoly::FPoly;
use crate::polyalg::intervals::sup_norm;
use crate::qmc;
use crate::upoly::{rat_of_f64, UPoly};

#[derive(Clone, Debug, Serialize)]
pub struct SublevelPoint {
    pub eps: f64,
    pub measure: f64,
    /// Zero for the exact one-variable computation.
    pub stderr: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SublevelReport {
    pub sup_norm: f64,
    pub points: Vec<SublevelPoint>,
    /// Least-squares slope of `log measure` against `log ε`.
    pub exponent: f64,
}

/// `|{t ∈ [-1,1] : |p(t)| < threshold}|` from the roots of `p ± threshold`.
pub fn sublevel_1d(p: &UPoly, threshold: f64) -> f64 {
    let thr = rat_of_f64(threshold);
    let mut cuts = vec![-1.0, 1.0];
    for q in [p.sub(&UPoly::constant(thr.clone())), p.add(&UPoly::constant(thr))] {
        if q.degree().unwrap_or(0) > 0 {
            cuts.extend(q.real_roots_f64().into_iter().filter(|x| x.abs() < 1.0));
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2)
        .filter(|w| p.eval_f64(0.5 * (w[0] + w[1])).abs() < threshold)
        .map(|w| w[1] - w[0])
        .sum()
}

/// Fits the slope of `log y` against `log x`.
pub fn loglog_slope(pts: &[(f64, f64)]) -> f64 {
    let v: Vec<(f64, f64)> = pts
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = v.len() as f64;
    if v.len() < 2 {
        return f64::NAN;
    }
    let mx = v.iter().map(|p| p.0).sum::<f64>() / n;
    let my = v.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = v.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = v.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Dyadic sweep `ε = 2^-1, …, 2^-levels`.
pub fn dyadic_eps(levels: u32) -> Vec<f64> {
    (1..=levels).map(|k| 2f64.powi(-(k as i32))).collect()
}

/// Sublevel measures over an ε sweep. One-variable polynomials are handled
/// exactly through their roots; otherwise the cube is sampled.
pub fn sublevel_measure(
    p: &RatPoly,
    eps: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<SublevelReport, NumericError> {
    if p.is_zero() {
        return Err(NumericError::BadInput("zero polynomial".into()));
    }
    let n = p.nvars();
    if n == 1 {
        let u = UPoly::from_ratpoly(p)?;
        let m = sup_norm(&u, &Rat::from_integer((-1).into()), &Rat::from_integer(1.into()));
        let points: Vec<SublevelPoint> = eps
            .iter()
            .map(|&e| SublevelPoint {
                eps: e,
                measure: sublevel_1d(&u, e * m),
                stderr: 0.0,
            })
            .collect();
        return Ok(report(m, points));
    }
    let f = FPoly::from_rat(p);
    let sample: Vec<Vec<f64>> = qmc::points(n, n_samples.min(1 << 16), seed ^ 0x5eed);
    let mut m = 0.0f64;
    for u in &sample {
        let x: Vec<f64> = u.iter().map(|v| 2.0 * v - 1.0).collect();
        m = m.max(f.eval(&x).abs());
    }
    for corner in 0..(1u32 << n) {
        let x: Vec<f64> = (0..n).map(|i| if corner >> i & 1 == 1 { 1.0 } else { -1.0 }).collect();
        m = m.max(f.eval(&x).abs());
    }
    let vol = 2f64.powi(n as i32);
    let thresholds: Vec<f64> = eps.iter().map(|e| e * m).collect();
    let est = qmc::integrate_many(n, n_samples, seed, |u| {
        let x: Vec<f64> = u.iter().map(|v| 2.0 * v - 1.0).collect();
        let v = f.eval(&x).abs();
        thresholds.iter().map(|&t| if v < t { 1.0 } else { 0.0 }).collect()
    });
    let points = eps
        .iter()
        .zip(est)
        .map(|(&e, s)| SublevelPoint {
            eps: e,
            measure: s.mean * vol,
            stderr: s.stderr * vol,
        })
        .collect();
    Ok(report(m, points))
}

fn report(m: f64, points: Vec<SublevelPoint>) -> SublevelReport {
    let exponent = loglog_slope(&points.iter().map(|p| (p.eps, p.measure)).collect::<Vec<_>>());
    SublevelReport {
        sup_norm: m,
        points,
        exponent,
    }
}
