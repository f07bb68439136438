//! The determinants `λ_I`, Newton polytopes of their bidegrees and the
//! weights `w_b`.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::PolytopeError;
use crate::geometry::{PolyVectorField, Word, WordTable};
use crate::matrix::PolyMatrix;
use crate::torsion::{exponents, TorsionProfile};
use crate::{Rat, RatPoly};

/// Default limit on the number of word tuples examined.
pub const DEFAULT_TUPLE_CAP: usize = 200_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaEntry {
    pub words: Vec<Word>,
    pub deg: (u32, u32),
    pub poly: RatPoly,
}

/// Word classes used to form tuples: nonzero words, with words of equal
/// bidegree whose fields agree up to sign collapsed onto the first one.
pub fn word_classes(table: &WordTable) -> Vec<(Word, PolyVectorField)> {
    let mut classes: Vec<(Word, PolyVectorField)> = Vec::new();
    for (w, f) in table.entries() {
        let dup = classes
            .iter()
            .any(|(v, g)| v.bidegree() == w.bidegree() && (g == f || g == &f.neg()));
        if !dup {
            classes.push((w.clone(), f.clone()));
        }
    }
    classes
}

fn combinations(m: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if n > m {
        return out;
    }
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        out.push(idx.clone());
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] < m - n + i {
                idx[i] += 1;
                for j in i + 1..n {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn binomial(m: usize, n: usize) -> usize {
    if n > m {
        return 0;
    }
    let mut r: u128 = 1;
    for i in 0..n {
        r = r * (m - i) as u128 / (i + 1) as u128;
    }
    r.min(usize::MAX as u128) as usize
}

/// Every nonvanishing `λ_I` over sorted tuples of distinct word classes.
pub fn lambda_table(table: &WordTable, tuple_cap: usize) -> Result<Vec<LambdaEntry>, PolytopeError> {
    let n = table.dim();
    let classes = word_classes(table);
    if binomial(classes.len(), n) > tuple_cap {
        return Err(PolytopeError::BudgetExceeded(tuple_cap));
    }
    let combos = combinations(classes.len(), n);
    let results: Vec<Option<LambdaEntry>> = combos
        .par_iter()
        .map(|c| {
            let cols: Vec<Vec<RatPoly>> = c
                .iter()
                .map(|&i| classes[i].1.components().to_vec())
                .collect();
            let det = PolyMatrix::from_columns(&cols)?.det()?;
            if det.is_zero() {
                return Ok(None);
            }
            let words: Vec<Word> = c.iter().map(|&i| classes[i].0.clone()).collect();
            let deg = words.iter().fold((0, 0), |acc, w| {
                let d = w.bidegree();
                (acc.0 + d.0, acc.1 + d.1)
            });
            Ok(Some(LambdaEntry { words, deg, poly: det }))
        })
        .collect::<Result<_, PolytopeError>>()?;
    Ok(results.into_iter().flatten().collect())
}

pub type Point2 = (Rat, Rat);

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Flavor {
    Union,
    AtPoint,
    Intersection,
}

/// `conv(generators) + [0,∞)²`, stored through its extreme points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polytope2D {
    pub flavor: Flavor,
    generators: Vec<Point2>,
    vertices: Vec<Point2>,
}

fn cross(o: &Point2, a: &Point2, b: &Point2) -> Rat {
    (&a.0 - &o.0) * (&b.1 - &o.1) - (&a.1 - &o.1) * (&b.0 - &o.0)
}

/// Extreme points of `conv(points) + [0,∞)²`, sorted by first coordinate
/// with strictly decreasing second coordinate.
pub fn staircase(points: &[Point2]) -> Vec<Point2> {
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort();
    pts.dedup();
    // Pareto-minimal points: x ascending, y strictly descending.
    let mut pareto: Vec<Point2> = Vec::new();
    for p in pts {
        match pareto.last() {
            Some(last) if p.1 >= last.1 => {}
            _ => pareto.push(p),
        }
    }
    let mut hull: Vec<Point2> = Vec::new();
    for p in pareto {
        while hull.len() >= 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], &p) <= Rat::zero() {
            hull.pop();
        }
        hull.push(p);
    }
    hull
}

impl Polytope2D {
    pub fn empty(flavor: Flavor) -> Self {
        Polytope2D {
            flavor,
            generators: Vec::new(),
            vertices: Vec::new(),
        }
    }

    pub fn from_points(points: Vec<Point2>, flavor: Flavor) -> Self {
        let mut generators = points;
        generators.sort();
        generators.dedup();
        let vertices = staircase(&generators);
        Polytope2D {
            flavor,
            generators,
            vertices,
        }
    }

    pub fn from_lattice(points: impl IntoIterator<Item = (u32, u32)>, flavor: Flavor) -> Self {
        let pts = points
            .into_iter()
            .map(|(a, b)| (Rat::from_integer(a.into()), Rat::from_integer(b.into())))
            .collect();
        Self::from_points(pts, flavor)
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn generators(&self) -> &[Point2] {
        &self.generators
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    /// Membership of an arbitrary rational point.
    pub fn contains(&self, p: &Point2) -> bool {
        let v = &self.vertices;
        let Some(first) = v.first() else {
            return false;
        };
        if p.0 < first.0 {
            return false;
        }
        let last = v.last().unwrap();
        if p.0 >= last.0 {
            return p.1 >= last.1;
        }
        let i = v.partition_point(|q| q.0 <= p.0) - 1;
        let (a, b) = (&v[i], &v[i + 1]);
        // y on the segment at x = p.0.
        let y = &a.1 + (&b.1 - &a.1) * (&p.0 - &a.0) / (&b.0 - &a.0);
        p.1 >= y
    }

    /// Whether every extreme point of `other` lies in `self`, i.e.
    /// `other ⊆ self`.
    pub fn contains_polytope(&self, other: &Polytope2D) -> bool {
        other.vertices.iter().all(|v| self.contains(v))
    }

    pub fn same_set(&self, other: &Polytope2D) -> bool {
        self.vertices == other.vertices
    }

    pub fn intersect(&self, other: &Polytope2D) -> Polytope2D {
        if self.is_empty() || other.is_empty() {
            return Polytope2D::empty(Flavor::Intersection);
        }
        let mut cands: Vec<Point2> = Vec::new();
        cands.extend(self.vertices.iter().filter(|v| other.contains(v)).cloned());
        cands.extend(other.vertices.iter().filter(|v| self.contains(v)).cloned());
        for a in self.boundary_pieces() {
            for b in other.boundary_pieces() {
                if let Some(p) = a.intersect(&b) {
                    cands.push(p);
                }
            }
        }
        Polytope2D::from_points(cands, Flavor::Intersection)
    }

    fn boundary_pieces(&self) -> Vec<Piece> {
        let v = &self.vertices;
        let mut out = Vec::new();
        out.push(Piece {
            origin: v[0].clone(),
            dir: (Rat::zero(), Rat::one()),
            bounded: false,
        });
        for w in v.windows(2) {
            out.push(Piece {
                origin: w[0].clone(),
                dir: (&w[1].0 - &w[0].0, &w[1].1 - &w[0].1),
                bounded: true,
            });
        }
        out.push(Piece {
            origin: v[v.len() - 1].clone(),
            dir: (Rat::one(), Rat::zero()),
            bounded: false,
        });
        out
    }

    /// Lattice points on the lower-left boundary between the first and last
    /// extreme points; the extreme points are among them when integral.
    pub fn minimal_lattice_points(&self) -> Vec<(i64, i64)> {
        let v = &self.vertices;
        let mut out = BTreeSet::new();
        for p in v {
            if p.0.is_integer() && p.1.is_integer() {
                out.insert((to_i64(&p.0), to_i64(&p.1)));
            }
        }
        for w in v.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let lo = to_i64(&a.0.ceil());
            let hi = to_i64(&b.0.floor());
            for x in lo..=hi {
                let xr = Rat::from_integer(x.into());
                let y = &a.1 + (&b.1 - &a.1) * (&xr - &a.0) / (&b.0 - &a.0);
                if y.is_integer() {
                    out.insert((x, to_i64(&y)));
                }
            }
        }
        out.into_iter().collect()
    }
}

fn to_i64(r: &Rat) -> i64 {
    use num_traits::ToPrimitive;
    r.to_integer().to_i64().expect("small lattice coordinate")
}

struct Piece {
    origin: Point2,
    dir: Point2,
    bounded: bool,
}

impl Piece {
    fn intersect(&self, other: &Piece) -> Option<Point2> {
        let d = &self.dir.0 * &other.dir.1 - &self.dir.1 * &other.dir.0;
        if d.is_zero() {
            return None;
        }
        let wx = &other.origin.0 - &self.origin.0;
        let wy = &other.origin.1 - &self.origin.1;
        let s = (&wx * &other.dir.1 - &wy * &other.dir.0) / &d;
        let u = (&wx * &self.dir.1 - &wy * &self.dir.0) / &d;
        let ok = |t: &Rat, bounded: bool| !t.is_negative() && (!bounded || t <= &Rat::one());
        if ok(&s, self.bounded) && ok(&u, other.bounded) {
            Some((
                &self.origin.0 + &s * &self.dir.0,
                &self.origin.1 + &s * &self.dir.1,
            ))
        } else {
            None
        }
    }
}

pub struct ExtremeAndMinimal {
    pub extreme: Vec<Point2>,
    pub minimal: Vec<(i64, i64)>,
}

pub fn extreme_and_minimal(p: &Polytope2D) -> Result<ExtremeAndMinimal, PolytopeError> {
    if p.is_empty() {
        return Err(PolytopeError::Empty);
    }
    Ok(ExtremeAndMinimal {
        extreme: p.vertices.clone(),
        minimal: p.minimal_lattice_points(),
    })
}

/// Selects generators for the three flavors.
pub enum PolytopeQuery<'a> {
    Union,
    AtPoint(&'a [Rat]),
    Intersection(&'a [Vec<Rat>]),
}

pub fn newton_polytope(entries: &[LambdaEntry], query: PolytopeQuery<'_>) -> Result<Polytope2D, PolytopeError> {
    match query {
        PolytopeQuery::Union => Ok(Polytope2D::from_lattice(
            entries.iter().filter(|e| !e.poly.is_zero()).map(|e| e.deg),
            Flavor::Union,
        )),
        PolytopeQuery::AtPoint(x0) => {
            let mut gens = Vec::new();
            for e in entries {
                if !e.poly.eval(x0)?.is_zero() {
                    gens.push(e.deg);
                }
            }
            Ok(Polytope2D::from_lattice(gens, Flavor::AtPoint))
        }
        PolytopeQuery::Intersection(samples) => {
            let mut acc: Option<Polytope2D> = None;
            for x in samples {
                let p = newton_polytope(entries, PolytopeQuery::AtPoint(x))?;
                acc = Some(match acc {
                    None => Polytope2D { flavor: Flavor::Intersection, ..p },
                    Some(a) => a.intersect(&p),
                });
            }
            Ok(acc.unwrap_or_else(|| Polytope2D::empty(Flavor::Intersection)))
        }
    }
}

#[derive(Clone, Debug)]
pub struct WeightSpec {
    pub b: (u32, u32),
    pub exponent: Rat,
    pub p: (Rat, Rat),
    pub summands: Vec<LambdaEntry>,
}

impl WeightSpec {
    /// `w_b(x) = Σ |λ_I(x)|^{1/(b₁+b₂-1)}`.
    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        let e = crate::poly::rat_to_f64(&self.exponent);
        self.summands
            .iter()
            .map(|s| s.poly.eval_f64(x).abs().powf(e))
            .sum()
    }

    /// Exact `Σ |λ_I(x)|` over summands (before taking roots), at a point.
    pub fn sum_abs_at(&self, x: &[Rat]) -> Result<Rat, PolytopeError> {
        let mut acc = Rat::zero();
        for s in &self.summands {
            acc += s.poly.eval(x)?.abs();
        }
        Ok(acc)
    }
}

pub fn weight_spec(entries: &[LambdaEntry], b: (u32, u32)) -> WeightSpec {
    WeightSpec {
        b,
        exponent: Rat::new(1.into(), (b.0 + b.1 - 1).into()),
        p: exponents(b),
        summands: entries.iter().filter(|e| e.deg == b).cloned().collect(),
    }
}

/// Hull of `b(β)` over `J^β(x₀) ≠ 0` together with `b̃(β)` over
/// `J̃^β(x₀) ≠ 0`.
pub fn polytope_via_j(profiles: &[TorsionProfile], x0: &[Rat]) -> Result<Polytope2D, PolytopeError> {
    let mut gens = Vec::new();
    for p in profiles {
        if !p.j_beta.eval(x0)?.is_zero() {
            gens.push(p.b);
        }
    }
    Ok(Polytope2D::from_lattice(gens, Flavor::AtPoint))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    fn pts(v: &[(i64, i64)]) -> Vec<Point2> {
        v.iter().map(|&(a, b)| (rat(a), rat(b))).collect()
    }

    #[test]
    fn single_generator() {
        let p = Polytope2D::from_lattice([(2, 2)], Flavor::Union);
        let em = extreme_and_minimal(&p).unwrap();
        assert_eq!(em.extreme, pts(&[(2, 2)]));
        assert_eq!(em.minimal, vec![(2, 2)]);
    }

    #[test]
    fn two_point_staircase_has_no_interior_lattice_points() {
        let p = Polytope2D::from_lattice([(3, 4), (4, 3)], Flavor::Union);
        let em = extreme_and_minimal(&p).unwrap();
        assert_eq!(em.extreme, pts(&[(3, 4), (4, 3)]));
        assert_eq!(em.minimal, vec![(3, 4), (4, 3)]);
    }

    #[test]
    fn three_point_hull() {
        let p = Polytope2D::from_lattice([(2, 5), (5, 2), (3, 3)], Flavor::Union);
        assert_eq!(p.vertices(), pts(&[(2, 5), (3, 3), (5, 2)]).as_slice());
        // Collinear middle points are not extreme but are minimal.
        let q = Polytope2D::from_lattice([(0, 4), (2, 2), (4, 0), (3, 3)], Flavor::Union);
        assert_eq!(q.vertices(), pts(&[(0, 4), (4, 0)]).as_slice());
        assert_eq!(
            extreme_and_minimal(&q).unwrap().minimal,
            vec![(0, 4), (1, 3), (2, 2), (3, 1), (4, 0)]
        );
    }

    #[test]
    fn empty_polytope() {
        let p = Polytope2D::from_lattice([], Flavor::AtPoint);
        assert!(matches!(extreme_and_minimal(&p), Err(PolytopeError::Empty)));
    }

    #[test]
    fn intersection_of_crossing_staircases() {
        let a = Polytope2D::from_lattice([(0, 4), (4, 0)], Flavor::AtPoint);
        let b = Polytope2D::from_lattice([(1, 1)], Flavor::AtPoint);
        let c = a.intersect(&b);
        assert_eq!(c.vertices(), pts(&[(1, 3), (3, 1)]).as_slice());
        assert!(a.contains_polytope(&c) && b.contains_polytope(&c));
        let d = Polytope2D::from_lattice([(0, 3)], Flavor::AtPoint)
            .intersect(&Polytope2D::from_lattice([(3, 0)], Flavor::AtPoint));
        assert_eq!(d.vertices(), pts(&[(3, 3)]).as_slice());
    }

    #[test]
    fn combination_count() {
        assert_eq!(combinations(5, 3).len(), binomial(5, 3));
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert!(combinations(2, 3).is_empty());
    }
}
