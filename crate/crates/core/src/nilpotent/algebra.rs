use std::collections::BTreeSet;

use num_traits::Zero;

use crate::error::NilpotentError;
use crate::geometry::{lie_bracket, PolyVectorField, Word, WordTable};
use crate::linalg::SpanSolver;
use crate::{Rat, RatPoly};

/// Coordinates of an algebra element. Coefficients are polynomials so that
/// the same code handles numbers (constants) and symbolic coordinates.
pub type Element = Vec<RatPoly>;

/// A nilpotent Lie algebra given by structure constants `[e_i, e_j] = Σ c_ij^k e_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbstractNilpotent {
    labels: Vec<String>,
    /// Sparse `(i, j, k, c)` with `i < j`; antisymmetry is implicit.
    constants: Vec<(usize, usize, usize, Rat)>,
    step: usize,
    /// Concrete fields realizing the basis, when built from a word table.
    fields: Option<Vec<PolyVectorField>>,
}

impl AbstractNilpotent {
    /// Builds an algebra from dense structure constants `c[i][j][k]`.
    /// Checks antisymmetry, the Jacobi identity and nilpotency.
    pub fn from_constants(labels: Vec<String>, c: &[Vec<Vec<Rat>>]) -> Result<Self, NilpotentError> {
        let n = labels.len();
        let mut constants = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if c[i][j][k] != -c[j][i][k].clone() {
                        return Err(NilpotentError::Inconsistent("structure constants are not antisymmetric".into()));
                    }
                    if i < j && !c[i][j][k].is_zero() {
                        constants.push((i, j, k, c[i][j][k].clone()));
                    }
                }
            }
        }
        let mut alg = AbstractNilpotent {
            labels,
            constants,
            step: 0,
            fields: None,
        };
        if !alg.jacobi_holds() {
            return Err(NilpotentError::Inconsistent("Jacobi identity fails".into()));
        }
        alg.step = alg
            .lower_central_step()
            .ok_or_else(|| NilpotentError::Inconsistent("algebra is not nilpotent".into()))?;
        Ok(alg)
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn fields(&self) -> Option<&[PolyVectorField]> {
        self.fields.as_deref()
    }

    /// `c_ij^k` as a dense tensor.
    pub fn dense_constants(&self) -> Vec<Vec<Vec<Rat>>> {
        let n = self.dim();
        let mut c = vec![vec![vec![Rat::zero(); n]; n]; n];
        for (i, j, k, v) in &self.constants {
            c[*i][*j][*k] = v.clone();
            c[*j][*i][*k] = -v.clone();
        }
        c
    }

    /// The same algebra with the bracket negated.
    pub fn opposite(&self) -> Self {
        AbstractNilpotent {
            labels: self.labels.clone(),
            constants: self
                .constants
                .iter()
                .map(|(i, j, k, c)| (*i, *j, *k, -c.clone()))
                .collect(),
            step: self.step,
            fields: self.fields.clone(),
        }
    }

    pub fn bracket(&self, a: &Element, b: &Element) -> Element {
        let nvars = a.first().map_or(0, RatPoly::nvars);
        let mut out = vec![RatPoly::zero(nvars); self.dim()];
        for (i, j, k, c) in &self.constants {
            let (ai, aj, bi, bj) = (&a[*i], &a[*j], &b[*i], &b[*j]);
            if (ai.is_zero() || bj.is_zero()) && (aj.is_zero() || bi.is_zero()) {
                continue;
            }
            let m = &(ai * bj) - &(aj * bi);
            out[*k] += &m.scale(c);
        }
        out
    }

    pub fn bracket_rat(&self, a: &[Rat], b: &[Rat]) -> Vec<Rat> {
        to_rat(&self.bracket(&from_rat(a), &from_rat(b)))
    }

    fn jacobi_holds(&self) -> bool {
        let n = self.dim();
        let e = |i: usize| -> Element {
            (0..n)
                .map(|k| RatPoly::constant(0, if k == i { Rat::from_integer(1.into()) } else { Rat::zero() }))
                .collect()
        };
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let (x, y, z) = (e(i), e(j), e(k));
                    let t1 = self.bracket(&x, &self.bracket(&y, &z));
                    let t2 = self.bracket(&y, &self.bracket(&z, &x));
                    let t3 = self.bracket(&z, &self.bracket(&x, &y));
                    if t1.iter().zip(&t2).zip(&t3).any(|((a, b), c)| !(&(a + b) + c).is_zero()) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Length of the lower central series, or `None` if it stalls above 0.
    fn lower_central_step(&self) -> Option<usize> {
        let n = self.dim();
        let mut current: Vec<Vec<Rat>> = (0..n)
            .map(|i| (0..n).map(|k| Rat::from_integer(((k == i) as i64).into())).collect())
            .collect();
        let mut step = 0;
        while !current.is_empty() {
            step += 1;
            let mut next = SpanSolver::new(n);
            let mut basis = Vec::new();
            for a in 0..n {
                let ea: Vec<Rat> = (0..n).map(|k| Rat::from_integer(((k == a) as i64).into())).collect();
                for v in &current {
                    let b = self.bracket_rat(&ea, v);
                    if next.insert(&b) {
                        basis.push(b);
                    }
                }
            }
            if basis.len() == current.len() {
                return None;
            }
            current = basis;
        }
        Some(step)
    }

    /// Whether the span of `vs` is closed under the bracket.
    pub fn is_subalgebra(&self, vs: &[Vec<Rat>]) -> bool {
        let mut s = SpanSolver::new(self.dim());
        for v in vs {
            s.insert(v);
        }
        vs.iter().all(|a| vs.iter().all(|b| s.express(&self.bracket_rat(a, b)).is_some()))
    }

    /// The algebra rewritten in a new basis given by coordinate vectors.
    pub fn change_basis(&self, vectors: &[Vec<Rat>], labels: Vec<String>) -> Result<Self, NilpotentError> {
        let n = self.dim();
        let mut s = SpanSolver::new(n);
        for v in vectors {
            if !s.insert(v) {
                return Err(NilpotentError::Inconsistent("new basis is dependent".into()));
            }
        }
        if s.len() != n {
            return Err(NilpotentError::Inconsistent("new basis does not span".into()));
        }
        let mut c = vec![vec![vec![Rat::zero(); n]; n]; n];
        for i in 0..n {
            for j in 0..n {
                let b = self.bracket_rat(&vectors[i], &vectors[j]);
                c[i][j] = s.express(&b).expect("basis spans");
            }
        }
        let mut out = Self::from_constants(labels, &c)?;
        if let Some(fs) = &self.fields {
            out.fields = Some(vectors.iter().map(|v| combine_fields(fs, v)).collect());
        }
        Ok(out)
    }

    /// The concrete field `Σ a_i X_i`.
    pub fn realize(&self, a: &[Rat]) -> Option<PolyVectorField> {
        self.fields.as_ref().map(|fs| combine_fields(fs, a))
    }
}

pub(crate) fn combine_fields(fs: &[PolyVectorField], a: &[Rat]) -> PolyVectorField {
    let dim = fs.first().map_or(0, PolyVectorField::dim);
    let mut acc = PolyVectorField::zero(dim);
    for (f, c) in fs.iter().zip(a) {
        if !c.is_zero() {
            acc = acc.add(&f.scale(c));
        }
    }
    acc
}

pub(crate) fn from_rat(a: &[Rat]) -> Element {
    a.iter().map(|c| RatPoly::constant(0, c.clone())).collect()
}

pub(crate) fn to_rat(a: &Element) -> Vec<Rat> {
    a.iter()
        .map(|p| p.constant_value().expect("constant coefficient"))
        .collect()
}

fn flatten(f: &PolyVectorField, keys: &[(usize, Vec<u32>)]) -> Vec<Rat> {
    keys.iter().map(|k| f.coefficient_at(k)).collect()
}

/// Chooses a maximal `Q`-independent set of word fields (in table order)
/// and expresses all brackets in it.
pub fn abstract_algebra(table: &WordTable, step: usize) -> Result<AbstractNilpotent, NilpotentError> {
    let candidates: Vec<(Word, PolyVectorField)> = table
        .entries()
        .filter(|(w, _)| w.len() <= step.max(1))
        .map(|(w, f)| (w.clone(), f.clone()))
        .collect();
    // Independence over the union of monomials of the fields themselves.
    let mut keys: BTreeSet<(usize, Vec<u32>)> = BTreeSet::new();
    for (_, f) in &candidates {
        keys.extend(f.coefficient_keys());
    }
    let keys: Vec<_> = keys.into_iter().collect();
    let mut solver = SpanSolver::new(keys.len());
    let mut basis: Vec<(Word, PolyVectorField)> = Vec::new();
    for (w, f) in candidates {
        if solver.insert(&flatten(&f, &keys)) {
            basis.push((w, f));
        }
    }
    let n = basis.len();
    let mut c = vec![vec![vec![Rat::zero(); n]; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let b = lie_bracket(&basis[i].1, &basis[j].1)?;
            // Monomials outside the key set mean the bracket leaves the span.
            let outside = b.coefficient_keys().into_iter().any(|k| keys.binary_search(&k).is_err());
            let coords = if outside {
                None
            } else {
                solver.express(&flatten(&b, &keys))
            };
            let Some(coords) = coords else {
                return Err(NilpotentError::DependentBracket(
                    basis[i].0.to_string(),
                    basis[j].0.to_string(),
                ));
            };
            for k in 0..n {
                c[j][i][k] = -coords[k].clone();
                c[i][j][k] = coords[k].clone();
            }
        }
    }
    let labels = basis.iter().map(|(w, _)| w.to_string()).collect();
    let mut alg = AbstractNilpotent::from_constants(labels, &c)?;
    alg.fields = Some(basis.into_iter().map(|(_, f)| f).collect());
    Ok(alg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_word_table, hodge_star_field, PolyMap};
    use crate::parse::parse_poly;

    fn moment(d: usize) -> WordTable {
        let mut names: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
        names.push("t".into());
        let v: Vec<&str> = names.iter().map(String::as_str).collect();
        let q = |s: &str| parse_poly(s, &v).unwrap();
        let pi1 = PolyMap::new((1..=d).map(|i| q(&format!("x{i}"))).collect()).unwrap();
        let pi2 = PolyMap::new((1..=d).map(|i| q(&format!("x{i} - t^{i}"))).collect()).unwrap();
        build_word_table(&hodge_star_field(&pi1), &hodge_star_field(&pi2), d + 2).unwrap()
    }

    #[test]
    fn moment_curve_algebras() {
        let a2 = abstract_algebra(&moment(2), 2).unwrap();
        assert_eq!((a2.dim(), a2.step()), (3, 2));
        assert_eq!(a2.labels(), ["(1)", "(2)", "(1,2)"]);
        let a3 = abstract_algebra(&moment(3), 3).unwrap();
        assert_eq!((a3.dim(), a3.step()), (4, 3));
    }

    #[test]
    fn abelian_pair() {
        let v = ["a", "b"];
        let x = PolyVectorField::new(vec![parse_poly("1", &v).unwrap(), parse_poly("0", &v).unwrap()]).unwrap();
        let y = PolyVectorField::new(vec![parse_poly("0", &v).unwrap(), parse_poly("1", &v).unwrap()]).unwrap();
        let alg = abstract_algebra(&build_word_table(&x, &y, 3).unwrap(), 1).unwrap();
        assert_eq!((alg.dim(), alg.step()), (2, 1));
        assert!(alg.dense_constants().iter().flatten().flatten().all(Zero::is_zero));
    }

    #[test]
    fn bracket_leaving_span_is_reported() {
        let v = ["x", "y"];
        let q = |s: &str| parse_poly(s, &v).unwrap();
        let a = PolyVectorField::new(vec![q("1"), q("0")]).unwrap();
        let b = PolyVectorField::new(vec![q("0"), q("x^3")]).unwrap();
        let table = build_word_table(&a, &b, 5).unwrap();
        assert!(matches!(
            abstract_algebra(&table, 1),
            Err(NilpotentError::DependentBracket(..))
        ));
    }

    #[test]
    fn closed_but_not_nilpotent_is_rejected() {
        // span{1, x, x^2} d/dx is closed (sl2) but not nilpotent.
        let v = ["x"];
        let a = PolyVectorField::new(vec![parse_poly("1", &v).unwrap()]).unwrap();
        let b = PolyVectorField::new(vec![parse_poly("x^2", &v).unwrap()]).unwrap();
        let table = build_word_table(&a, &b, 3).unwrap();
        assert!(matches!(
            abstract_algebra(&table, 2),
            Err(NilpotentError::Inconsistent(_))
        ));
    }
}
