//! Seeded generators for test corpora: curve pairs `π₁ = x`, `π₂ = x − γ(t)`
//! pushed through random affine changes of coordinates, random rational
//! points (some placed on the degeneracy locus), and coefficient vectors.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use torsion_core::geometry::PolyMap;
use torsion_core::linalg::rref;
use torsion_core::polytope::LambdaEntry;
use torsion_core::torsion::CoordinateChange;
use torsion_core::{Rat, RatPoly};

use crate::error::NumericError;
use crate::upoly::UPoly;
use crate::verify::curve_maps;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A small rational `p/q` with `|p| <= 9`, `1 <= q <= 4`.
pub fn small_rat(r: &mut impl Rng) -> Rat {
    Rat::new(r.gen_range(-9i64..=9).into(), r.gen_range(1i64..=4).into())
}

pub fn random_point(r: &mut impl Rng, n: usize) -> Vec<Rat> {
    (0..n).map(|_| small_rat(r)).collect()
}

/// Inverse of a square rational matrix, if invertible.
pub fn invert(a: &[Vec<Rat>]) -> Option<Vec<Vec<Rat>>> {
    let n = a.len();
    let mut m: Vec<Vec<Rat>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }));
            r
        })
        .collect();
    let piv = rref(&mut m);
    if piv.len() < n || piv[n - 1] != n - 1 {
        return None;
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

fn random_matrix(r: &mut impl Rng, n: usize) -> (Vec<Vec<Rat>>, Vec<Vec<Rat>>) {
    loop {
        let a: Vec<Vec<Rat>> = (0..n)
            .map(|_| (0..n).map(|_| Rat::from_integer(r.gen_range(-3i64..=3).into())).collect())
            .collect();
        if let Some(inv) = invert(&a) {
            return (a, inv);
        }
    }
}

fn affine(a: &[Vec<Rat>], b: &[Rat]) -> Vec<RatPoly> {
    let n = a.len();
    a.iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut p = RatPoly::constant(n, bi.clone());
            for (j, c) in row.iter().enumerate() {
                if !c.is_zero() {
                    p += &RatPoly::var(n, j).scale(c);
                }
            }
            p
        })
        .collect()
}

/// A random affine `(F, G₁, G₂)` on `ℝ^n`, `ℝ^{n-1}`, with `F⁻¹` recorded.
pub fn random_affine_change(r: &mut impl Rng, n: usize) -> CoordinateChange {
    let (a, ainv) = random_matrix(r, n);
    let b = random_point(r, n);
    // F⁻¹(y) = A⁻¹(y − b)
    let shift: Vec<Rat> = ainv
        .iter()
        .map(|row| -row.iter().zip(&b).map(|(x, y)| x * y).sum::<Rat>())
        .collect();
    let (g1, _) = random_matrix(r, n - 1);
    let (g2, _) = random_matrix(r, n - 1);
    CoordinateChange {
        f: affine(&a, &b),
        f_inv: Some(affine(&ainv, &shift)),
        g1: affine(&g1, &random_point(r, n - 1)),
        g2: affine(&g2, &random_point(r, n - 1)),
    }
}

/// A random polynomial in `t` of degree at most `deg` with a nonzero top
/// coefficient.
fn random_curve_component(r: &mut impl Rng, deg: u32) -> RatPoly {
    let t = RatPoly::var(1, 0);
    let mut p = RatPoly::zero(1);
    for k in 1..=deg {
        let mut c = r.gen_range(-3i64..=3);
        if k == deg && c == 0 {
            c = 1;
        }
        p += &t.pow(k).scale(&Rat::from_integer(c.into()));
    }
    p
}

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: String,
    pub pi1: PolyMap,
    pub pi2: PolyMap,
}

/// `G_j ∘ π_j ∘ F` for a random affine change.
pub fn transformed(r: &mut impl Rng, pi1: &PolyMap, pi2: &PolyMap) -> Result<(PolyMap, PolyMap), NumericError> {
    let ch = random_affine_change(r, pi1.source_dim());
    Ok((ch.transform_map(pi1, 1)?, ch.transform_map(pi2, 2)?))
}

/// `count` nilpotent pairs: random curves in `ℝ²` (sometimes `ℝ³`) under
/// random affine changes of coordinates.
pub fn random_pairs(count: usize, seed: u64) -> Result<Vec<CorpusEntry>, NumericError> {
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let d = if i % 5 == 4 { 3 } else { 2 };
        let max_deg = if d == 3 { 3 } else { 4 };
        let gamma: Vec<RatPoly> = (0..d)
            .map(|k| {
                let deg = (k as u32 + 1).max(r.gen_range(1..=max_deg));
                random_curve_component(&mut r, deg)
            })
            .collect();
        let (p1, p2) = curve_maps(&gamma)?;
        let (pi1, pi2) = transformed(&mut r, &p1, &p2)?;
        let name = format!(
            "curve{i}({})",
            gamma.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(", ")
        );
        out.push(CorpusEntry { name, pi1, pi2 });
    }
    Ok(out)
}

/// Random rational points, every other one moved onto the zero set of the
/// first nonvanishing `λ_I` by solving for the last coordinate when a
/// rational root exists.
pub fn points_with_degeneracies(r: &mut impl Rng, lambdas: &[LambdaEntry], n: usize, count: usize) -> Vec<Vec<Rat>> {
    let mut out = Vec::with_capacity(count);
    let mut k = 0;
    while out.len() < count {
        let mut x = random_point(r, n);
        k += 1;
        if k % 2 == 0 {
            if let Some(root) = lambdas.iter().find_map(|e| rational_root_in_last(&e.poly, &x)) {
                x[n - 1] = root;
            }
        }
        out.push(x);
    }
    out
}

fn rational_root_in_last(p: &RatPoly, x: &[Rat]) -> Option<Rat> {
    let n = x.len();
    let mut args: Vec<RatPoly> = x[..n - 1].iter().map(|v| RatPoly::constant(1, v.clone())).collect();
    args.push(RatPoly::var(1, 0));
    let u = UPoly::from_ratpoly(&p.compose(&args).ok()?).ok()?;
    if u.degree().unwrap_or(0) == 0 {
        return None;
    }
    u.real_roots().iter().find_map(|r| r.exact().cloned())
}

/// Nonnegative coefficient vectors of length up to 7, with zeros sprinkled
/// in, as rationals with denominators up to 8.
pub fn random_coefficients(r: &mut impl Rng) -> Vec<Rat> {
    let len = r.gen_range(2..=7);
    (0..len)
        .map(|_| {
            if r.gen_bool(0.3) {
                Rat::zero()
            } else {
                Rat::new(r.gen_range(0i64..=12).into(), r.gen_range(1i64..=8).into())
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use torsion_core::geometry::{build_word_table, nilpotency_step, Nilpotency};
    use torsion_core::torsion::fields_of;

    #[test]
    fn inverse_is_inverse() {
        let mut r = rng(1);
        for _ in 0..10 {
            let (a, inv) = random_matrix(&mut r, 3);
            for i in 0..3 {
                for j in 0..3 {
                    let v: Rat = (0..3).map(|k| &a[i][k] * &inv[k][j]).sum();
                    assert_eq!(v, if i == j { Rat::one() } else { Rat::zero() });
                }
            }
        }
    }

    #[test]
    fn affine_changes_are_valid() {
        let mut r = rng(2);
        for _ in 0..5 {
            random_affine_change(&mut r, 3).determinants().unwrap();
        }
    }

    #[test]
    fn corpus_is_nilpotent_and_reproducible() {
        let a = random_pairs(6, 7).unwrap();
        let b = random_pairs(6, 7).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.pi2, y.pi2);
            let (f1, f2) = fields_of(&x.pi1, &x.pi2);
            let t = build_word_table(&f1, &f2, 8).unwrap();
            assert!(matches!(nilpotency_step(&t).unwrap(), Nilpotency::Step(_)), "{}", x.name);
        }
    }
}
