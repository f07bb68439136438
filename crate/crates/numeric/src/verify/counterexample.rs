//! The planar pair `π₁ = x₁`, `π₂ = x₂^k`, where the bilinear bound with
//! `p = (1, k)` fails. With `f₁ = χ_[0,1]` and `f₂` supported in
//! `(δ, 1/2]` the form reduces to `(1/k) ∫ f₂(y) y^{1/k-1} dy`.

use serde::Serialize;

use crate::error::NumericError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunction {
    /// `f₂(y) = (y^{1/k} |log y|)^{-1}` on `(δ, 1/2]`.
    LogSingular,
    /// `f₂ = χ_(δ, 1/2]`.
    Indicator,
}

#[derive(Clone, Debug, Serialize)]
pub struct CounterexampleRow {
    pub delta: f64,
    /// Closed form of `∫∫ f₁(x₁) f₂(x₂^k) dx`.
    pub bilinear: f64,
    /// The same integral by Gauss-Legendre quadrature in `x₂`.
    pub quadrature: f64,
    /// `‖f₂‖_k`; `‖f₁‖_1 = 1`.
    pub norm: f64,
    pub ratio: f64,
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

fn f2(kind: TestFunction, k: u32, y: f64) -> f64 {
    match kind {
        TestFunction::LogSingular => 1.0 / (y.powf(1.0 / k as f64) * y.ln().abs()),
        TestFunction::Indicator => 1.0,
    }
}

/// `∫_{δ^{1/k}}^{2^{-1/k}} f₂(x^k) dx` over geometric panels.
fn quadrature(kind: TestFunction, k: u32, delta: f64) -> f64 {
    let kf = k as f64;
    let (a, b) = (delta.powf(1.0 / kf), 0.5f64.powf(1.0 / kf));
    let gl = gauss_legendre(16);
    let panels = ((b / a).ln() / 1.1f64.ln()).ceil().max(1.0) as usize;
    let q = (b / a).powf(1.0 / panels as f64);
    let mut sum = 0.0;
    let mut lo = a;
    for i in 0..panels {
        let hi = if i + 1 == panels { b } else { lo * q };
        let (m, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        sum += gl.iter().map(|(x, w)| w * f2(kind, k, (m + h * x).powi(k as i32))).sum::<f64>() * h;
        lo = hi;
    }
    sum
}

fn closed_form(kind: TestFunction, k: u32, delta: f64) -> (f64, f64) {
    let kf = k as f64;
    match kind {
        TestFunction::LogSingular => {
            let (l, l2) = ((1.0 / delta).ln(), 2f64.ln());
            let b = (l.ln() - l2.ln()) / kf;
            let norm_k = if k == 1 {
                l.ln() - l2.ln()
            } else {
                (l2.powf(1.0 - kf) - l.powf(1.0 - kf)) / (kf - 1.0)
            };
            (b, norm_k.powf(1.0 / kf))
        }
        TestFunction::Indicator => (0.5f64.powf(1.0 / kf) - delta.powf(1.0 / kf), (0.5 - delta).powf(1.0 / kf)),
    }
}

/// The truncated ratio `B / (‖f₁‖_1 ‖f₂‖_k)` for each `δ`.
pub fn counterexample_2d(k: u32, deltas: &[f64], kind: TestFunction) -> Result<Vec<CounterexampleRow>, NumericError> {
    if k == 0 {
        return Err(NumericError::BadInput("k must be positive".into()));
    }
    if deltas.iter().any(|d| !(*d > 0.0 && *d < 0.5)) {
        return Err(NumericError::BadInput("truncations must lie in (0, 1/2)".into()));
    }
    Ok(deltas
        .iter()
        .map(|&delta| {
            let (bilinear, norm) = closed_form(kind, k, delta);
            CounterexampleRow {
                delta,
                bilinear,
                quadrature: quadrature(kind, k, delta),
                norm,
                ratio: bilinear / norm,
            }
        })
        .collect())
}

/// `2^{-4}, …, 2^{-(3+count)}`.
pub fn dyadic_truncations(count: u32) -> Vec<f64> {
    (4..4 + count).map(|j| 2f64.powi(-(j as i32))).collect()
}
