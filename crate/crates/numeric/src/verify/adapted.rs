//! Restricted weak-type probes on sets adapted to Carnot-Caratheodory
//! balls, and the perturbed parabola family `γ_a(t) = (t, t² + a t³)`.

use serde::Serialize;
use torsion_core::geometry::Word;
use torsion_core::torsion::TorsionContext;
use torsion_core::{Rat, RatPoly};

use super::{rwt_ratio, BoxUnion, RatBox, RegionSpec, RwtReport, Setting};
use crate::ccballs::{Ball, BallSpec};
use crate::error::NumericError;
use crate::qmc;
use crate::upoly::rat_of_f64;

/// `(t, t² + a t³)` as polynomials in `t`.
pub fn gamma_family(a: &Rat) -> Vec<RatPoly> {
    let t = RatPoly::var(1, 0);
    vec![t.clone(), &t.pow(2) + &t.pow(3).scale(a)]
}

#[derive(Clone, Debug, Serialize)]
pub struct AdaptedRow {
    pub scale: f64,
    pub report: RwtReport,
}

fn bounding_box(points: impl Iterator<Item = Vec<f64>>) -> Option<RatBox> {
    let mut lo: Vec<f64> = Vec::new();
    let mut hi: Vec<f64> = Vec::new();
    for p in points {
        if lo.is_empty() {
            lo = p.clone();
            hi = p;
            continue;
        }
        for (i, v) in p.into_iter().enumerate() {
            lo[i] = lo[i].min(v);
            hi[i] = hi[i].max(v);
        }
    }
    if lo.is_empty() || lo.iter().zip(&hi).any(|(a, b)| a >= b) {
        return None;
    }
    Some(lo.iter().zip(&hi).map(|(a, b)| (rat_of_f64(*a), rat_of_f64(*b))).collect())
}

/// For each radius `r`, `Ω` is the bounding box of `B^I(x; (r, r))` cut by
/// `π_j⁻¹(E_j)`, with `E_j` the bounding box of `π_j` of the ball.
pub fn ball_adapted_rwt(
    ctx: &TorsionContext,
    s: &Setting,
    center: &[Rat],
    words: &[Word],
    scales: &[Rat],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<AdaptedRow>, NumericError> {
    let mut rows = Vec::with_capacity(scales.len());
    for r in scales {
        let ball = Ball::new(ctx, BallSpec::new(center.to_vec(), words.to_vec(), (r.clone(), r.clone()))?)?;
        let n = ball.dim();
        let images: Vec<Vec<f64>> = qmc::points(n, 1 << 14, seed ^ 0xba11)
            .iter()
            .map(|u| {
                let mut t = vec![0.0; n];
                ball.box_point(u, &mut t);
                ball.image(&t)
            })
            .collect();
        let proj = |m: &crate::fpoly::FMap| -> Vec<Vec<f64>> {
            images
                .iter()
                .map(|x| {
                    let mut y = vec![0.0; m.dim_out()];
                    m.eval(x, &mut y);
                    y
                })
                .collect()
        };
        let degenerate = || NumericError::HypothesisNotMet("ball image is degenerate".into());
        let domain = bounding_box(images.iter().cloned()).ok_or_else(degenerate)?;
        let e1 = BoxUnion::single(bounding_box(proj(&s.pi1).into_iter()).ok_or_else(degenerate)?)?;
        let e2 = BoxUnion::single(bounding_box(proj(&s.pi2).into_iter()).ok_or_else(degenerate)?)?;
        let region = RegionSpec {
            domain,
            band: None,
            e1,
            e2,
        };
        rows.push(AdaptedRow {
            scale: torsion_core::poly::rat_to_f64(r),
            report: rwt_ratio(s, &region, n_samples, seed)?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use torsion_core::geometry::build_word_table;
    use torsion_core::torsion::fields_of;
    use torsion_core::{rat, ratio};

    use crate::verify::curve_maps;

    #[test]
    fn adapted_ratio_is_scale_invariant() {
        let (pi1, pi2) = curve_maps(&gamma_family(&rat(0))).unwrap();
        let (x1, x2) = fields_of(&pi1, &pi2);
        let ctx = TorsionContext::new(build_word_table(&x1, &x2, 4).unwrap());
        let s = Setting::new(&pi1, &pi2, ctx.profile(&[0, 1, 0], false).unwrap()).unwrap();
        let words = vec![Word::letter(1), Word::letter(2), "(1,2)".parse().unwrap()];
        let scales = [rat(1), ratio(1, 2), ratio(1, 4), ratio(1, 8)];
        let rows = ball_adapted_rwt(&ctx, &s, &[rat(0), rat(0), rat(0)], &words, &scales, 1 << 14, 4).unwrap();
        let r: Vec<f64> = rows.iter().map(|r| r.report.ratio).collect();
        let (mn, mx) = r.iter().fold((f64::MAX, 0.0f64), |a, v| (a.0.min(*v), a.1.max(*v)));
        assert!(mn > 0.0 && mx / mn < 1.1, "{r:?}");
    }

    #[test]
    fn family_members() {
        let g = gamma_family(&ratio(1, 4));
        assert_eq!(g[1].eval(&[rat(2)]).unwrap(), rat(6));
    }
}
