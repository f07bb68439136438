//! Decompositions of the line into intervals on which each polynomial (or
//! a vector polynomial) is dominated by a single Taylor term about a center
//! outside the interval.
//!
//! A candidate piece is certified exactly: for fixed coefficients the ratio
//! `|c_k| s^k / |c_kp| s^kp` is monotone in `s = |t - b|`, so checking both
//! ends of the distance range suffices. Pieces that fail are split.

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use torsion_core::json::rat_to_string;
use torsion_core::poly::rat_to_f64;
use torsion_core::Rat;

use crate::error::NumericError;
use crate::upoly::{simplest_near, UPoly};

const MAX_PIECES: usize = 200_000;

/// An open interval with possibly infinite ends (`None`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub lo: Option<Rat>,
    pub hi: Option<Rat>,
    pub center: Rat,
    /// Dominant exponent for each polynomial (one entry for a curve).
    pub exponents: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct MonomialCover {
    pub epsilon: Rat,
    pub pieces: Vec<Piece>,
    /// Slivers around irrational roots that no rational center certifies.
    pub gaps: Vec<(Rat, Rat)>,
    pub breakpoints: Vec<Rat>,
}

impl MonomialCover {
    pub fn gap_length(&self) -> f64 {
        self.gaps.iter().map(|(a, b)| rat_to_f64(&(b - a))).sum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let end = |e: &Option<Rat>, inf: &str| e.as_ref().map_or(inf.to_string(), rat_to_string);
        serde_json::json!({
            "epsilon": rat_to_string(&self.epsilon),
            "pieces": self.pieces.iter().map(|p| serde_json::json!({
                "lo": end(&p.lo, "-inf"),
                "hi": end(&p.hi, "inf"),
                "center": rat_to_string(&p.center),
                "exponents": p.exponents,
            })).collect::<Vec<_>>(),
            "gaps": self.gaps.iter().map(|(a, b)| [rat_to_string(a), rat_to_string(b)]).collect::<Vec<_>>(),
            "breakpoints": self.breakpoints.iter().map(rat_to_string).collect::<Vec<_>>(),
        })
    }
}

/// Squared norms of the vector Taylor coefficients about `b`.
fn taylor_norms(item: &[UPoly], b: &Rat) -> Vec<Rat> {
    let shifted: Vec<UPoly> = item.iter().map(|p| p.taylor_shift(b)).collect();
    let d = shifted.iter().filter_map(UPoly::degree).max().unwrap_or(0);
    (0..=d)
        .map(|k| shifted.iter().map(|p| p.coeff(k) * p.coeff(k)).sum())
        .collect()
}

#[derive(Clone, Copy)]
enum Dist<'a> {
    Zero,
    Finite(&'a Rat),
    Infinite,
}

/// `|c_k|^2 s^{2k} <= eps^2 |c_kp|^2 s^{2kp}` at one end of the range.
fn dominated_at(norms: &[Rat], k: usize, kp: usize, eps2: &Rat, s: Dist<'_>) -> bool {
    match s {
        Dist::Zero => k > kp,
        Dist::Infinite => k < kp,
        Dist::Finite(s) => {
            let s2 = s * s;
            let lhs = &norms[k] * num_traits::pow::Pow::pow(&s2, k as i32);
            let rhs = eps2 * &norms[kp] * num_traits::pow::Pow::pow(&s2, kp as i32);
            lhs <= rhs
        }
    }
}

fn dominant_exponent(norms: &[Rat], eps2: &Rat, near: Dist<'_>, far: Dist<'_>) -> Option<usize> {
    if norms.iter().all(Zero::is_zero) {
        return Some(0);
    }
    (0..norms.len()).filter(|&kp| !norms[kp].is_zero()).find(|&kp| {
        (0..norms.len())
            .filter(|&k| k != kp && !norms[k].is_zero())
            .all(|k| dominated_at(norms, k, kp, eps2, near) && dominated_at(norms, k, kp, eps2, far))
    })
}

/// Exponents certifying the piece `(lo, hi)` about `b`, if any.
fn certify(items: &[Vec<UPoly>], lo: &Option<Rat>, hi: &Option<Rat>, b: &Rat, eps2: &Rat) -> Option<Vec<usize>> {
    let (near, far): (Rat, Option<Rat>) = match (lo, hi) {
        (Some(l), _) if b <= l => (l - b, hi.as_ref().map(|h| h - b)),
        (_, Some(h)) if b >= h => (b - h, lo.as_ref().map(|l| b - l)),
        _ => return None,
    };
    let near_d = if near.is_zero() { Dist::Zero } else { Dist::Finite(&near) };
    let far_d = far.as_ref().map_or(Dist::Infinite, Dist::Finite);
    items
        .iter()
        .map(|it| dominant_exponent(&taylor_norms(it, b), eps2, near_d, far_d))
        .collect()
}

/// Real parts of the roots of every nonconstant component and derivative.
fn breakpoints(items: &[Vec<UPoly>]) -> Result<Vec<Rat>, NumericError> {
    let mut pts: Vec<Rat> = Vec::new();
    for it in items {
        for p in it {
            let mut d = p.clone();
            while d.degree().unwrap_or(0) > 0 {
                for r in d.real_roots() {
                    pts.push(match r.exact() {
                        Some(x) => x.clone(),
                        None => {
                            let sq = d.squarefree();
                            let (lo, hi) = r.refined(&sq, 70).bounds();
                            (lo + hi) / Rat::from_integer(2.into())
                        }
                    });
                }
                for z in d.complex_roots()? {
                    if z.im.abs() > z.radius {
                        pts.push(simplest_near(z.re, 1e-13).unwrap_or_else(|| crate::upoly::rat_of_f64(z.re)));
                    }
                }
                d = d.derivative();
            }
        }
    }
    pts.sort();
    pts.dedup();
    if pts.is_empty() {
        pts.push(Rat::zero());
    }
    Ok(pts)
}

struct Search<'a> {
    items: &'a [Vec<UPoly>],
    eps2: Rat,
    min_rel_width: Rat,
    pieces: Vec<Piece>,
    gaps: Vec<(Rat, Rat)>,
}

impl Search<'_> {
    fn run(&mut self, lo: Option<Rat>, hi: Option<Rat>, cell: (&Option<Rat>, &Option<Rat>)) -> Result<(), NumericError> {
        if self.pieces.len() > MAX_PIECES {
            return Err(NumericError::BadInput("piece budget exceeded".into()));
        }
        let mut centers: Vec<&Rat> = Vec::with_capacity(4);
        for c in [&lo, &hi, cell.0, cell.1].into_iter().flatten() {
            if !centers.contains(&c) {
                centers.push(c);
            }
        }
        for b in centers {
            if let Some(exponents) = certify(self.items, &lo, &hi, b, &self.eps2) {
                let center = b.clone();
                self.pieces.push(Piece { lo, hi, center, exponents });
                return Ok(());
            }
        }
        match (&lo, &hi) {
            (Some(l), Some(h)) => {
                let scale = l.abs().max(h.abs()).max(Rat::one());
                if h - l < &self.min_rel_width * scale {
                    self.gaps.push((l.clone(), h.clone()));
                    return Ok(());
                }
                let m = (l + h) / Rat::from_integer(2.into());
                self.run(lo.clone(), Some(m.clone()), cell)?;
                self.run(Some(m), hi.clone(), cell)
            }
            (Some(l), None) => {
                let m = l + l.abs().max(Rat::one());
                self.run(lo.clone(), Some(m.clone()), cell)?;
                self.run(Some(m), None, cell)
            }
            (None, Some(h)) => {
                let m = h - h.abs().max(Rat::one());
                self.run(None, Some(m.clone()), cell)?;
                self.run(Some(m), hi.clone(), cell)
            }
            (None, None) => unreachable!("breakpoints are never empty"),
        }
    }
}

fn cover(items: Vec<Vec<UPoly>>, eps: &Rat) -> Result<MonomialCover, NumericError> {
    if !eps.is_positive() || eps >= &Rat::one() {
        return Err(NumericError::BadInput("epsilon must lie in (0, 1)".into()));
    }
    if items.iter().any(|it| it.iter().all(UPoly::is_zero)) {
        return Err(NumericError::BadInput("zero polynomial".into()));
    }
    let bps = breakpoints(&items)?;
    let mut s = Search {
        items: &items,
        eps2: eps * eps,
        min_rel_width: Rat::new(1.into(), num_bigint::BigInt::from(10u64).pow(11)),
        pieces: Vec::new(),
        gaps: Vec::new(),
    };
    let mut ends: Vec<Option<Rat>> = vec![None];
    ends.extend(bps.iter().cloned().map(Some));
    ends.push(None);
    for w in ends.windows(2) {
        s.run(w[0].clone(), w[1].clone(), (&w[0], &w[1]))?;
    }
    Ok(MonomialCover {
        epsilon: eps.clone(),
        pieces: s.pieces,
        gaps: s.gaps,
        breakpoints: bps,
    })
}

/// One dominant Taylor term per polynomial on each piece.
pub fn monomialize(polys: &[UPoly], eps: &Rat) -> Result<MonomialCover, NumericError> {
    cover(polys.iter().map(|p| vec![p.clone()]).collect(), eps)
}

/// One dominant vector Taylor term for the curve on each piece.
pub fn curve_monomialize(curve: &[UPoly], eps: &Rat) -> Result<MonomialCover, NumericError> {
    cover(vec![curve.to_vec()], eps)
}

/// Sample points of a piece: evenly spaced when bounded, spreading
/// quadratically along an infinite end.
pub fn sample_points(p: &Piece, count: usize) -> Vec<Rat> {
    let n = Rat::from_integer((count as i64).into());
    (0..count)
        .map(|j| {
            let f = (Rat::from_integer((2 * j as i64 + 1).into())) / (&n * Rat::from_integer(2.into()));
            match (&p.lo, &p.hi) {
                (Some(l), Some(h)) => l + (h - l) * f,
                (Some(l), None) => {
                    let j1 = Rat::from_integer((j as i64 + 1).into());
                    l + l.abs().max(Rat::one()) * &j1 * &j1 / Rat::from_integer(16.into())
                }
                (None, Some(h)) => {
                    let j1 = Rat::from_integer((j as i64 + 1).into());
                    h - h.abs().max(Rat::one()) * &j1 * &j1 / Rat::from_integer(16.into())
                }
                (None, None) => Rat::from_integer((j as i64).into()),
            }
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CoverCheck {
    pub pieces: usize,
    pub samples: usize,
    pub failures: usize,
    /// Largest `|c_k||t-b|^k / (|c_kp||t-b|^kp)` seen over `k != kp`.
    pub worst_ratio: f64,
}

fn ln_abs(r: &Rat) -> Option<f64> {
    let v = rat_to_f64(r).abs();
    (v.is_finite() && v > 0.0).then(|| v.ln())
}

/// Whether `a s2^k > e2 b s2^kp`. Settled in the log domain when the two
/// sides are clearly apart, exactly otherwise.
#[allow(clippy::too_many_arguments)]
fn exceeds(a: &Rat, k: usize, b: &Rat, kp: usize, s2: &Rat, e2: &Rat, logs: (Option<f64>, Option<f64>, Option<f64>, f64)) -> bool {
    if a.is_zero() {
        return false;
    }
    if let (Some(la), Some(lb), Some(ls), le) = logs {
        let lhs = la + k as f64 * ls;
        let rhs = le + lb + kp as f64 * ls;
        if (lhs - rhs).abs() > 1e-9 * (1.0 + lhs.abs() + rhs.abs()) {
            return lhs > rhs;
        }
    }
    a * num_traits::pow::Pow::pow(s2, k as i32) > e2 * b * num_traits::pow::Pow::pow(s2, kp as i32)
}

/// Direct check of the domination inequality at sample points. Failures
/// are decided exactly; `worst_ratio` is a floating-point diagnostic.
fn check(cover: &MonomialCover, items: &[Vec<UPoly>], per_piece: usize) -> CoverCheck {
    let eps2 = &cover.epsilon * &cover.epsilon;
    let le = ln_abs(&eps2).unwrap_or(f64::NEG_INFINITY);
    let mut out = CoverCheck {
        pieces: cover.pieces.len(),
        samples: 0,
        failures: 0,
        worst_ratio: 0.0,
    };
    for p in &cover.pieces {
        let norms: Vec<Vec<Rat>> = items.iter().map(|it| taylor_norms(it, &p.center)).collect();
        let lnorms: Vec<Vec<Option<f64>>> = norms.iter().map(|nm| nm.iter().map(ln_abs).collect()).collect();
        for t in sample_points(p, per_piece) {
            out.samples += 1;
            let d = &t - &p.center;
            let s2 = &d * &d;
            let ls = ln_abs(&s2);
            let mut ok = true;
            for ((nm, ln), &kp) in norms.iter().zip(&lnorms).zip(&p.exponents) {
                for k in (0..nm.len()).filter(|&k| k != kp) {
                    if exceeds(&nm[k], k, &nm[kp], kp, &s2, &eps2, (ln[k], ln[kp], ls, le)) {
                        ok = false;
                    }
                    if let (Some(la), Some(lb), Some(ls)) = (ln[k], ln[kp], ls) {
                        let r = 0.5 * (la - lb + (k as f64 - kp as f64) * ls);
                        out.worst_ratio = out.worst_ratio.max(r.exp());
                    }
                }
            }
            if !ok {
                out.failures += 1;
            }
        }
    }
    out
}

pub fn check_monomialize(cover: &MonomialCover, polys: &[UPoly], per_piece: usize) -> CoverCheck {
    let items: Vec<Vec<UPoly>> = polys.iter().map(|p| vec![p.clone()]).collect();
    check(cover, &items, per_piece)
}

pub fn check_curve(cover: &MonomialCover, curve: &[UPoly], per_piece: usize) -> CoverCheck {
    check(cover, &[curve.to_vec()], per_piece)
}

#[cfg(test)]
mod tests {
    use super::*;
    use torsion_core::{rat, ratio};

    fn assert_clean(c: &MonomialCover, chk: &CoverCheck) {
        assert_eq!(chk.failures, 0, "{chk:?}");
        for p in &c.pieces {
            let inside = p.lo.as_ref().is_none_or(|l| &p.center > l) && p.hi.as_ref().is_none_or(|h| &p.center < h);
            assert!(!inside, "center inside its piece");
        }
        // Consecutive pieces and gaps tile the line.
        let mut ends: Vec<(Option<Rat>, Option<Rat>)> = c.pieces.iter().map(|p| (p.lo.clone(), p.hi.clone())).collect();
        ends.extend(c.gaps.iter().map(|(a, b)| (Some(a.clone()), Some(b.clone()))));
        ends.sort_by(|a, b| match (&a.0, &b.0) {
            (None, None) => std::cmp::Ordering::Equal,
            (None, _) => std::cmp::Ordering::Less,
            (_, None) => std::cmp::Ordering::Greater,
            (Some(x), Some(y)) => x.cmp(y),
        });
        assert!(ends.first().unwrap().0.is_none());
        assert!(ends.last().unwrap().1.is_none());
        for w in ends.windows(2) {
            assert_eq!(w[0].1, w[1].0);
        }
    }

    #[test]
    fn identity_has_two_pieces() {
        let p = UPoly::from_i64(&[0, 1]);
        let c = monomialize(std::slice::from_ref(&p), &ratio(1, 10)).unwrap();
        assert_eq!(c.pieces.len(), 2);
        for piece in &c.pieces {
            assert_eq!(piece.center, rat(0));
            assert_eq!(piece.exponents, vec![1]);
        }
        assert_clean(&c, &check_monomialize(&c, &[p], 64));
    }

    #[test]
    fn two_roots() {
        let p = UPoly::from_i64(&[-1, 0, 1]);
        let c = monomialize(std::slice::from_ref(&p), &ratio(1, 10)).unwrap();
        assert!(c.gaps.is_empty());
        assert_clean(&c, &check_monomialize(&c, std::slice::from_ref(&p), 64));
        // Linear behaviour next to the roots, quadratic far out.
        let near: Vec<_> = c.pieces.iter().filter(|q| q.lo == Some(rat(1))).collect();
        assert_eq!(near[0].exponents, vec![1]);
        let far = c.pieces.iter().find(|q| q.hi.is_none()).unwrap();
        assert_eq!(far.exponents, vec![2]);
    }

    #[test]
    fn two_linear_factors_split_between_roots() {
        let ps = vec![UPoly::from_i64(&[0, 1]), UPoly::from_i64(&[-1, 1])];
        let c = monomialize(&ps, &ratio(1, 10)).unwrap();
        assert_clean(&c, &check_monomialize(&c, &ps, 64));
        assert!(c.pieces.iter().any(|p| p.lo.as_ref().is_some_and(|l| l > &rat(0)) && p.hi.as_ref().is_some_and(|h| h < &rat(1))));
    }

    #[test]
    fn irrational_roots_leave_tiny_gaps() {
        let p = UPoly::from_i64(&[-2, 0, 1]);
        let c = monomialize(std::slice::from_ref(&p), &ratio(1, 10)).unwrap();
        assert_clean(&c, &check_monomialize(&c, std::slice::from_ref(&p), 64));
        assert!(c.gap_length() < 1e-8);
    }

    #[test]
    fn parabola_curve() {
        let g = vec![UPoly::from_i64(&[0, 1]), UPoly::from_i64(&[0, 0, 1])];
        let c = curve_monomialize(&g, &ratio(1, 10)).unwrap();
        assert_clean(&c, &check_curve(&c, &g, 64));
        let near0 = c.pieces.iter().find(|p| p.lo == Some(rat(0))).unwrap();
        assert_eq!(near0.exponents, vec![1]);
        let far = c.pieces.iter().find(|p| p.hi.is_none()).unwrap();
        assert_eq!(far.exponents, vec![2]);
    }

    #[test]
    fn monomial_curve_has_two_pieces() {
        let g = vec![UPoly::from_i64(&[0, 0, 0, 2]), UPoly::from_i64(&[0, 0, 0, -1])];
        let c = curve_monomialize(&g, &ratio(1, 10)).unwrap();
        assert_eq!(c.pieces.len(), 2);
    }

    #[test]
    fn shifted_cubic_curve() {
        let g = vec![UPoly::from_i64(&[1, 1]), UPoly::from_i64(&[0, 0, 0, 1])];
        let c = curve_monomialize(&g, &ratio(1, 10)).unwrap();
        assert_clean(&c, &check_curve(&c, &g, 64));
    }

    proptest::proptest! {
        #[test]
        fn log_fast_path_matches_exact(
            a in 1i64..10_000, b in 1i64..10_000, d in 1i64..10_000,
            k in 0usize..7, kp in 0usize..7, den in 1i64..2_000,
        ) {
            let (a, b) = (ratio(a, den), ratio(b, 7));
            let s2 = ratio(d, den) * ratio(d, den);
            let e2 = ratio(1, 100);
            let exact = &a * num_traits::pow::Pow::pow(&s2, k as i32) > &e2 * &b * num_traits::pow::Pow::pow(&s2, kp as i32);
            let logs = (ln_abs(&a), ln_abs(&b), ln_abs(&s2), ln_abs(&e2).unwrap());
            proptest::prop_assert_eq!(exceeds(&a, k, &b, kp, &s2, &e2, logs), exact);
        }
    }
}
