//! Fiber-integral form of a box volume along the integral curves of a
//! divergence-free field whose last component is a nonzero constant `c`.
//!
//! With the section `σ(y) = (y, 0)` the map `(y, s) ↦ e^{sX}(σ(y))` is
//! injective with Jacobian `c`, so `|Ω'| = |c| ∫ |{s : e^{sX}(σ(y)) ∈ Ω'}| dy`.

use serde::Serialize;
use torsion_core::geometry::{lie_series_flow, PolyVectorField};
use torsion_core::poly::rat_to_f64;
use torsion_core::torsion::DEFAULT_MAX_TERMS;
use torsion_core::{Rat, RatPoly};

use super::{box_volume, RatBox};
use crate::error::NumericError;
use crate::fpoly::{FPoly, Interval};
use crate::qmc::{self, Estimate};
use crate::upoly::real_roots_in_f64;

#[derive(Clone, Debug, Serialize)]
pub struct CoareaReport {
    pub direct: f64,
    pub fiber: Estimate,
    pub rel_err: f64,
    /// The constant last component of the field.
    pub speed: f64,
    /// The enclosing box of section parameters `y`.
    pub section_box: Vec<(f64, f64)>,
}

fn fiber_length(polys: &[Vec<(u32, FPoly)>], y: &[f64], bounds: &[(f64, f64)], s_range: (f64, f64)) -> f64 {
    let mut cuts = vec![s_range.0, s_range.1];
    let mut univ: Vec<Vec<f64>> = Vec::with_capacity(polys.len());
    for comp in polys {
        let deg = comp.iter().map(|(k, _)| *k).max().unwrap_or(0) as usize;
        let mut c = vec![0.0; deg + 1];
        for (k, p) in comp {
            c[*k as usize] += p.eval(y);
        }
        univ.push(c);
    }
    for (c, (lo, hi)) in univ.iter().zip(bounds) {
        if c.len() < 2 {
            continue;
        }
        for level in [lo, hi] {
            let mut q = c.clone();
            q[0] -= level;
            cuts.extend(real_roots_in_f64(&q, s_range.0, s_range.1));
        }
    }
    cuts.sort_by(f64::total_cmp);
    let eval = |c: &[f64], s: f64| c.iter().rev().fold(0.0, |acc, v| acc * s + v);
    cuts.windows(2)
        .filter(|w| {
            let m = 0.5 * (w[0] + w[1]);
            univ.iter()
                .zip(bounds)
                .all(|(c, (lo, hi))| {
                    let v = eval(c, m);
                    *lo < v && v < *hi
                })
        })
        .map(|w| w[1] - w[0])
        .sum()
}

/// Compares `|Ω'|` for the box `omega` with its fiber integral along `x`.
pub fn coarea_check(x: &PolyVectorField, omega: &RatBox, n_samples: usize, seed: u64) -> Result<CoareaReport, NumericError> {
    let n = x.dim();
    if omega.len() != n || n < 2 {
        return Err(NumericError::BadInput("box and field dimensions differ".into()));
    }
    if !x.divergence().is_zero() {
        return Err(NumericError::HypothesisNotMet("field is not divergence free".into()));
    }
    let c = x.components()[n - 1]
        .constant_value()
        .filter(|v| v != &Rat::from_integer(0.into()))
        .ok_or_else(|| NumericError::HypothesisNotMet("last component is not a nonzero constant".into()))?;
    let flow = lie_series_flow(x, DEFAULT_MAX_TERMS)?;
    // Section parameters of the box: y = e^{-x_n/c X}(x) restricted to the
    // first n-1 coordinates, enclosed by interval evaluation.
    let xs: Vec<RatPoly> = (0..n).map(|i| RatPoly::var(n, i)).collect();
    let back = flow.apply(&xs, &RatPoly::var(n, n - 1).scale(&(-(Rat::from_integer(1.into()) / &c))))?;
    let ibox: Vec<Interval> = omega
        .iter()
        .map(|(a, b)| Interval::new(rat_to_f64(a), rat_to_f64(b)))
        .collect();
    let section_box: Vec<(f64, f64)> = back[..n - 1]
        .iter()
        .map(|p| {
            let i = FPoly::from_rat(p).eval_interval(&ibox);
            (i.lo, i.hi)
        })
        .collect();
    // e^{sX}(y, 0) as polynomials in (y, s), grouped by powers of s.
    let mut args: Vec<RatPoly> = (0..n - 1).map(|i| RatPoly::var(n, i)).collect();
    args.push(RatPoly::zero(n));
    let orbit = flow.apply(&args, &RatPoly::var(n, n - 1))?;
    let polys: Vec<Vec<(u32, FPoly)>> = orbit[..n - 1]
        .iter()
        .map(|p| {
            p.coefficients_in_tail(n - 1)
                .into_iter()
                .map(|(e, q)| (e[0], FPoly::from_rat(&q)))
                .collect()
        })
        .collect();
    let cf = rat_to_f64(&c);
    let bounds: Vec<(f64, f64)> = omega.iter().map(|(a, b)| (rat_to_f64(a), rat_to_f64(b))).collect();
    let (tl, th) = bounds[n - 1];
    let s_range = if cf > 0.0 { (tl / cf, th / cf) } else { (th / cf, tl / cf) };
    let ylo: Vec<f64> = section_box.iter().map(|p| p.0).collect();
    let yw: Vec<f64> = section_box.iter().map(|p| p.1 - p.0).collect();
    let yvol: f64 = yw.iter().product();
    let fiber = qmc::integrate(n - 1, n_samples, seed, |u| {
        let y: Vec<f64> = ylo.iter().zip(&yw).zip(u).map(|((l, w), u)| l + w * u).collect();
        fiber_length(&polys, &y, &bounds[..n - 1], s_range)
    })
    .scaled(yvol * cf.abs());
    let direct = rat_to_f64(&box_volume(omega));
    Ok(CoareaReport {
        rel_err: (fiber.mean - direct).abs() / direct,
        direct,
        fiber,
        speed: cf,
        section_box,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use torsion_core::geometry::hodge_star_field;
    use torsion_core::parse::parse_poly;
    use torsion_core::{rat, ratio};

    use crate::verify::curve_maps;

    #[test]
    fn moment_curve_fibers_match_volume() {
        let g = vec![parse_poly("t", &["t"]).unwrap(), parse_poly("t^2", &["t"]).unwrap()];
        let (pi1, pi2) = curve_maps(&g).unwrap();
        let omega = vec![(rat(0), rat(1)), (ratio(1, 4), rat(2)), (ratio(-1, 2), ratio(3, 4))];
        for pi in [&pi1, &pi2] {
            let x = hodge_star_field(pi);
            let r = coarea_check(&x, &omega, 1 << 14, 9).unwrap();
            assert!(r.rel_err < 0.01, "{r:?}");
        }
    }

    #[test]
    fn rejects_nonconstant_speed() {
        let v = ["x", "y"];
        let x = PolyVectorField::new(vec![parse_poly("1", &v).unwrap(), parse_poly("x", &v).unwrap()]).unwrap();
        let omega = vec![(rat(0), rat(1)), (rat(0), rat(1))];
        assert!(matches!(coarea_check(&x, &omega, 64, 1), Err(NumericError::HypothesisNotMet(_))));
    }
}
