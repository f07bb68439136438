use num_traits::Zero;

use super::algebra::AbstractNilpotent;
use super::malcev::{group_law_of, weak_malcev, MalcevBasis};
use crate::error::NilpotentError;
use crate::geometry::{lie_series_flow, FlowMap};
use crate::linalg::kernel;
use crate::matrix::PolyMatrix;
use crate::{Rat, RatPoly};

/// `{a : Σ a_k X_k(x₀) = 0}` for an algebra realized by fields.
pub fn isotropy(alg: &AbstractNilpotent, x0: &[Rat]) -> Result<Vec<Vec<Rat>>, NilpotentError> {
    let fields = alg
        .fields()
        .ok_or_else(|| NilpotentError::Inconsistent("algebra has no concrete fields".into()))?;
    let dim = fields.first().map_or(0, |f| f.dim());
    let values: Vec<Vec<Rat>> = fields
        .iter()
        .map(|f| f.eval(x0))
        .collect::<Result<_, _>>()?;
    let rows: Vec<Vec<Rat>> = (0..dim)
        .map(|i| values.iter().map(|v| v[i].clone()).collect())
        .collect();
    Ok(kernel(&rows, alg.dim()))
}

/// `Φ(y) = e^{y₁X̂₁} ∘ ⋯ ∘ e^{y_nX̂_n}(x₀)` with exact diagnostics.
#[derive(Clone, Debug)]
pub struct CoveringMap {
    pub basis: MalcevBasis,
    pub map: Vec<RatPoly>,
    pub isotropy_dim: usize,
    /// `det DΦ(0)`.
    pub det_at_origin: Rat,
    /// `det(X̂₁(x₀),…,X̂_n(x₀))`.
    pub frame_det: Rat,
    /// `e^{tX̂_k}∘Φ(y) = Φ(q_{1..n}((y,0), t e_k))` for every `k ≤ n`.
    pub flow_equivariant: bool,
    /// `Φ(r_{1..n}((y,0), s e_j)) = Φ(y)` for every isotropy direction `j`.
    pub deck_invariant: bool,
}

fn flows_of(basis: &MalcevBasis, max_terms: usize) -> Result<Vec<FlowMap>, NilpotentError> {
    let fields = basis
        .algebra
        .fields()
        .ok_or_else(|| NilpotentError::Inconsistent("algebra has no concrete fields".into()))?;
    fields
        .iter()
        .map(|f| lie_series_flow(f, max_terms).map_err(NilpotentError::from))
        .collect()
}

/// Composes the first `n` flows at times given by `ys` (polynomials in a
/// common space) starting from `x₀`.
fn compose_flows(flows: &[FlowMap], x0: &[Rat], ys: &[RatPoly]) -> Result<Vec<RatPoly>, NilpotentError> {
    let nv = ys.first().map_or(0, RatPoly::nvars);
    let mut state: Vec<RatPoly> = x0.iter().map(|v| RatPoly::constant(nv, v.clone())).collect();
    for k in (0..ys.len()).rev() {
        state = flows[k].apply(&state, &ys[k])?;
    }
    Ok(state)
}

pub fn covering_map(alg: &AbstractNilpotent, x0: &[Rat], max_terms: usize) -> Result<CoveringMap, NilpotentError> {
    let z = isotropy(alg, x0)?;
    let basis = weak_malcev(alg, &z)?;
    let n = x0.len();
    let big_n = alg.dim();
    if basis.split != n {
        return Err(NilpotentError::SingularAtOrigin(format!(
            "{} directions outside the isotropy, dimension {n}",
            basis.split
        )));
    }
    let flows = flows_of(&basis, max_terms)?;
    let ys: Vec<RatPoly> = (0..n).map(|i| RatPoly::var(n, i)).collect();
    let map = compose_flows(&flows, x0, &ys)?;

    let vars: Vec<usize> = (0..n).collect();
    let zero = vec![Rat::zero(); n];
    let det_at_origin = PolyMatrix::jacobian(&map, &vars)?.det()?.eval(&zero)?;
    let cols: Vec<Vec<RatPoly>> = flows[..n]
        .iter()
        .map(|f| {
            f.field()
                .eval(x0)
                .map(|v| v.into_iter().map(|c| RatPoly::constant(0, c)).collect())
        })
        .collect::<Result<_, _>>()?;
    let frame_det = PolyMatrix::from_columns(&cols)?
        .det()?
        .constant_value()
        .unwrap_or_else(Rat::zero);
    if det_at_origin.is_zero() {
        return Err(NilpotentError::SingularAtOrigin("det DΦ(0) = 0".into()));
    }

    // Flow composition reverses the order of the BCH product, so the
    // coordinates transform by the group law of the opposite algebra.
    let law = group_law_of(&basis.algebra.opposite())?;
    let nv = n + 1;
    let y_ext: Vec<RatPoly> = (0..big_n)
        .map(|i| if i < n { RatPoly::var(nv, i) } else { RatPoly::zero(nv) })
        .collect();
    let phi_ext: Vec<RatPoly> = map.iter().map(|c| c.embed(nv, &vars)).collect();
    let t = RatPoly::var(nv, n);

    let mut flow_equivariant = true;
    for k in 0..n {
        let lhs = flows[k].apply(&phi_ext, &t)?;
        let mut args = y_ext.clone();
        args.extend((0..big_n).map(|i| if i == k { t.clone() } else { RatPoly::zero(nv) }));
        let coords: Vec<RatPoly> = law.q[..n]
            .iter()
            .map(|c| c.compose(&args))
            .collect::<Result<_, _>>()?;
        let rhs: Vec<RatPoly> = map
            .iter()
            .map(|c| c.compose(&coords))
            .collect::<Result<_, _>>()?;
        flow_equivariant &= lhs == rhs;
    }

    let mut deck_invariant = true;
    for j in n..big_n {
        let mut args = y_ext.clone();
        args.extend((0..big_n).map(|i| if i == j { t.clone() } else { RatPoly::zero(nv) }));
        let coords: Vec<RatPoly> = law.r[..n]
            .iter()
            .map(|c| c.compose(&args))
            .collect::<Result<_, _>>()?;
        let moved: Vec<RatPoly> = map
            .iter()
            .map(|c| c.compose(&coords))
            .collect::<Result<_, _>>()?;
        deck_invariant &= moved == phi_ext;
    }

    Ok(CoveringMap {
        isotropy_dim: big_n - n,
        basis,
        map,
        det_at_origin,
        frame_det,
        flow_equivariant,
        deck_invariant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_word_table, hodge_star_field, PolyMap, PolyVectorField};
    use crate::nilpotent::abstract_algebra;
    use crate::parse::parse_poly;
    use crate::rat;

    fn algebra_of(pi1: Vec<&str>, pi2: Vec<&str>, vars: &[&str], step: usize) -> AbstractNilpotent {
        let q = |s: &str| parse_poly(s, vars).unwrap();
        let f1 = hodge_star_field(&PolyMap::new(pi1.into_iter().map(q).collect()).unwrap());
        let f2 = hodge_star_field(&PolyMap::new(pi2.into_iter().map(q).collect()).unwrap());
        abstract_algebra(&build_word_table(&f1, &f2, step + 1).unwrap(), step).unwrap()
    }

    #[test]
    fn moment_curve_covering() {
        let alg = algebra_of(vec!["x1", "x2"], vec!["x1 - t", "x2 - t^2"], &["x1", "x2", "t"], 2);
        let c = covering_map(&alg, &[rat(0), rat(0), rat(0)], 16).unwrap();
        assert_eq!(c.isotropy_dim, 0);
        assert!(!c.det_at_origin.is_zero());
        assert_eq!(c.det_at_origin, c.frame_det);
        assert!(c.flow_equivariant);
        assert!(c.deck_invariant);
    }

    #[test]
    fn planar_example_has_isotropy() {
        let alg = algebra_of(vec!["x1"], vec!["x2^3"], &["x1", "x2"], 3);
        assert_eq!(alg.dim(), 4);
        let c = covering_map(&alg, &[rat(0), rat(0)], 16).unwrap();
        assert_eq!(c.isotropy_dim, 2);
        assert_eq!(c.det_at_origin, c.frame_det);
        assert!(c.flow_equivariant);
        assert!(c.deck_invariant);
    }

    #[test]
    fn translations_give_affine_map() {
        let v = ["a", "b"];
        let q = |s: &str| parse_poly(s, &v).unwrap();
        let x = PolyVectorField::new(vec![q("1"), q("0")]).unwrap();
        let y = PolyVectorField::new(vec![q("0"), q("1")]).unwrap();
        let alg = abstract_algebra(&build_word_table(&x, &y, 2).unwrap(), 1).unwrap();
        let c = covering_map(&alg, &[rat(3), rat(-2)], 4).unwrap();
        assert_eq!(c.map, vec![q("a + 3"), q("b - 2")]);
    }

    #[test]
    fn deficient_span_is_singular() {
        let v = ["a", "b"];
        let q = |s: &str| parse_poly(s, &v).unwrap();
        let x = PolyVectorField::new(vec![q("b"), q("0")]).unwrap();
        let y = PolyVectorField::new(vec![q("0"), q("0")]).unwrap();
        let alg = abstract_algebra(&build_word_table(&x, &y, 2).unwrap(), 1).unwrap();
        assert!(matches!(
            covering_map(&alg, &[rat(0), rat(0)], 4),
            Err(NilpotentError::SingularAtOrigin(_))
        ));
    }
}
