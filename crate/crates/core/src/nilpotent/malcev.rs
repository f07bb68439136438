use num_traits::{One, Zero};

use super::algebra::{AbstractNilpotent, Element};
use super::bch::{bch_with, bch_words, DynkinTerm};
use crate::error::NilpotentError;
use crate::linalg::{kernel, SpanSolver};
use crate::matrix::PolyMatrix;
use crate::{Rat, RatPoly};

/// An ordered basis `(X̂₁,…,X̂_N)` whose tails `span(X̂_{k+1},…,X̂_N)` are
/// subalgebras, with `span(X̂_{n+1},…,X̂_N)` the prescribed subalgebra.
#[derive(Clone, Debug)]
pub struct MalcevBasis {
    /// Basis vectors in the coordinates of the original algebra.
    pub vectors: Vec<Vec<Rat>>,
    /// Number of leading vectors outside the prescribed subalgebra.
    pub split: usize,
    /// The algebra rewritten in this basis.
    pub algebra: AbstractNilpotent,
}

fn unit(n: usize, i: usize) -> Vec<Rat> {
    (0..n).map(|k| if k == i { Rat::one() } else { Rat::zero() }).collect()
}

fn in_span(h: &[Vec<Rat>], v: &[Rat], dim: usize) -> bool {
    let mut s = SpanSolver::new(dim);
    for x in h {
        s.insert(x);
    }
    s.express(v).is_some()
}

/// An element of `N_W(h) \ h`, preferring members of `w_basis` from the
/// end of the list.
fn normalizer_step(alg: &AbstractNilpotent, h: &[Vec<Rat>], w_basis: &[Vec<Rat>]) -> Option<Vec<Rat>> {
    let n = alg.dim();
    let normalizes = |v: &[Rat]| h.iter().all(|x| in_span(h, &alg.bracket_rat(v, x), n));
    for w in w_basis.iter().rev() {
        if !in_span(h, w, n) && normalizes(w) {
            return Some(w.clone());
        }
    }
    // General solve: φ·[Σ a_m w_m, h_j] = 0 for all φ vanishing on h.
    let ann = kernel(h, n);
    let mut rows = Vec::new();
    for phi in &ann {
        for x in h {
            rows.push(
                w_basis
                    .iter()
                    .map(|w| {
                        alg.bracket_rat(w, x)
                            .iter()
                            .zip(phi)
                            .map(|(a, b)| a * b)
                            .sum::<Rat>()
                    })
                    .collect::<Vec<Rat>>(),
            );
        }
    }
    let sols = if rows.is_empty() {
        (0..w_basis.len()).map(|i| unit(w_basis.len(), i)).collect()
    } else {
        kernel(&rows, w_basis.len())
    };
    sols.into_iter().rev().find_map(|a| {
        let mut v = vec![Rat::zero(); n];
        for (c, w) in a.iter().zip(w_basis) {
            for (x, y) in v.iter_mut().zip(w) {
                *x += c * y;
            }
        }
        (!in_span(h, &v, n)).then_some(v)
    })
}

fn label_of(alg: &AbstractNilpotent, v: &[Rat]) -> String {
    let nz: Vec<usize> = (0..v.len()).filter(|&i| !v[i].is_zero()).collect();
    if nz.len() == 1 && v[nz[0]].is_one() {
        return alg.labels()[nz[0]].clone();
    }
    nz.iter()
        .map(|&i| format!("{}*{}", crate::json::rat_to_string(&v[i]), alg.labels()[i]))
        .collect::<Vec<_>>()
        .join("+")
}

pub fn weak_malcev(alg: &AbstractNilpotent, z_span: &[Vec<Rat>]) -> Result<MalcevBasis, NilpotentError> {
    let n = alg.dim();
    let mut z_solver = SpanSolver::new(n);
    let mut z_basis = Vec::new();
    for v in z_span {
        if v.len() != n {
            return Err(NilpotentError::DimMismatch {
                expected: n,
                found: v.len(),
            });
        }
        if z_solver.insert(v) {
            z_basis.push(v.clone());
        }
    }
    if !alg.is_subalgebra(&z_basis) {
        return Err(NilpotentError::NotASubalgebra);
    }
    let g_basis: Vec<Vec<Rat>> = (0..n).map(|i| unit(n, i)).collect();
    let mut added: Vec<Vec<Rat>> = Vec::new();
    for (target, w_basis) in [(z_basis.len(), &z_basis), (n, &g_basis)] {
        while added.len() < target {
            let v = normalizer_step(alg, &added, w_basis)
                .ok_or_else(|| NilpotentError::Inconsistent("normalizer did not grow".into()))?;
            added.push(v);
        }
    }
    added.reverse();
    let labels = added.iter().map(|v| label_of(alg, v)).collect();
    let algebra = alg.change_basis(&added, labels)?;
    Ok(MalcevBasis {
        split: n - z_basis.len(),
        vectors: added,
        algebra,
    })
}

impl MalcevBasis {
    /// Exact check that every tail span is a subalgebra.
    pub fn tails_closed(&self) -> bool {
        let n = self.algebra.dim();
        (0..n).all(|k| {
            let tail: Vec<Vec<Rat>> = (k..n).map(|i| unit(n, i)).collect();
            self.algebra.is_subalgebra(&tail)
        })
    }
}

/// Left and right multiplication in Malcev coordinates:
/// `e^{x²·X} ψ(x¹) = ψ(q(x¹,x²))` and `ψ(x¹) e^{x²·X} = ψ(r(x¹,x²))` with
/// `ψ(x) = e^{x₁X₁} ⋯ e^{x_NX_N}`. Variables are `(x¹, x²)`.
#[derive(Clone, Debug)]
pub struct GroupLaw {
    pub dim: usize,
    pub q: Vec<RatPoly>,
    pub r: Vec<RatPoly>,
}

pub(crate) struct Coordinates<'a> {
    alg: &'a AbstractNilpotent,
    terms: Vec<DynkinTerm>,
}

impl<'a> Coordinates<'a> {
    pub(crate) fn new(alg: &'a AbstractNilpotent) -> Self {
        Coordinates {
            alg,
            terms: bch_words(alg.step().max(1)),
        }
    }

    pub(crate) fn bch(&self, a: &Element, b: &Element) -> Element {
        bch_with(self.alg, a, b, &self.terms)
    }

    fn scaled_unit(&self, k: usize, c: &RatPoly) -> Element {
        let mut e = vec![RatPoly::zero(c.nvars()); self.alg.dim()];
        e[k] = c.clone();
        e
    }

    /// `log ψ(x)` as an element with polynomial coefficients.
    pub(crate) fn psi_log(&self, x: &[RatPoly]) -> Element {
        let n = self.alg.dim();
        let nv = x.first().map_or(0, RatPoly::nvars);
        let mut z = vec![RatPoly::zero(nv); n];
        for k in (0..n).rev() {
            z = self.bch(&self.scaled_unit(k, &x[k]), &z);
        }
        z
    }

    /// Inverse of `psi_log`: peels `X₁`, then `X₂`, ... off the left.
    pub(crate) fn psi_log_inverse(&self, w: &Element) -> Result<Vec<RatPoly>, NilpotentError> {
        let mut w = w.clone();
        let mut y = Vec::with_capacity(w.len());
        for k in 0..self.alg.dim() {
            let yk = w[k].clone();
            w = self.bch(&self.scaled_unit(k, &-&yk), &w);
            if !w[k].is_zero() {
                return Err(NilpotentError::Inconsistent("tail span is not an ideal of its predecessor".into()));
            }
            y.push(yk);
        }
        Ok(y)
    }
}

pub fn group_law(basis: &MalcevBasis) -> Result<GroupLaw, NilpotentError> {
    group_law_of(&basis.algebra)
}

/// Group law of an algebra whose standard basis is already a weak Malcev
/// basis.
pub fn group_law_of(alg: &AbstractNilpotent) -> Result<GroupLaw, NilpotentError> {
    let n = alg.dim();
    let nv = 2 * n;
    let x1: Vec<RatPoly> = (0..n).map(|i| RatPoly::var(nv, i)).collect();
    let x2: Element = (0..n).map(|i| RatPoly::var(nv, n + i)).collect();
    let c = Coordinates::new(alg);
    let p1 = c.psi_log(&x1);
    let q = c.psi_log_inverse(&c.bch(&x2, &p1))?;
    let r = c.psi_log_inverse(&c.bch(&p1, &x2))?;
    Ok(GroupLaw { dim: n, q, r })
}

impl GroupLaw {
    fn state_det(&self, maps: &[RatPoly]) -> RatPoly {
        let vars: Vec<usize> = (0..self.dim).collect();
        PolyMatrix::jacobian(maps, &vars)
            .and_then(|m| m.det())
            .expect("square Jacobian")
    }

    /// `det D_{x¹} q ≡ 1` and `det D_{x¹} r ≡ 1`.
    pub fn volume_preserving(&self) -> bool {
        let one = RatPoly::one(2 * self.dim);
        self.state_det(&self.q) == one && self.state_det(&self.r) == one
    }

    /// `q_i` depends on `x¹` only through `x¹₁,…,x¹_i`.
    pub fn triangular(&self) -> bool {
        self.q
            .iter()
            .enumerate()
            .all(|(i, qi)| (i + 1..self.dim).all(|j| !qi.depends_on(j)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_poly;
    use crate::rat;

    fn heisenberg() -> AbstractNilpotent {
        let n = 3;
        let mut c = vec![vec![vec![Rat::zero(); n]; n]; n];
        c[0][1][2] = rat(1);
        c[1][0][2] = rat(-1);
        AbstractNilpotent::from_constants(vec!["X".into(), "Y".into(), "Z".into()], &c).unwrap()
    }

    #[test]
    fn heisenberg_bases() {
        let h = heisenberg();
        let center = vec![vec![rat(0), rat(0), rat(1)]];
        let b = weak_malcev(&h, &center).unwrap();
        assert_eq!(b.split, 2);
        assert_eq!(b.algebra.labels(), ["X", "Y", "Z"]);
        assert!(b.tails_closed());
        let all: Vec<Vec<Rat>> = (0..3).map(|i| unit(3, i)).collect();
        assert_eq!(weak_malcev(&h, &all).unwrap().split, 0);
        let zero = weak_malcev(&h, &[]).unwrap();
        assert_eq!(zero.split, 3);
        assert!(zero.tails_closed());
    }

    #[test]
    fn non_subalgebra_rejected() {
        let h = heisenberg();
        let span = vec![vec![rat(1), rat(0), rat(0)], vec![rat(0), rat(1), rat(0)]];
        assert!(matches!(weak_malcev(&h, &span), Err(NilpotentError::NotASubalgebra)));
    }

    #[test]
    fn heisenberg_group_law() {
        let h = heisenberg();
        let law = group_law_of(&h).unwrap();
        let v = ["a1", "a2", "a3", "b1", "b2", "b3"];
        let p = |s: &str| parse_poly(s, &v).unwrap();
        // e^{b·X} e^{a1 X} e^{a2 Y} e^{a3 Z}: moving b2 Y past a1 X costs -a1 b2 Z.
        assert_eq!(law.q[0], p("a1 + b1"));
        assert_eq!(law.q[1], p("a2 + b2"));
        assert_eq!(law.q[2], p("a3 + b3 - 1/2*b1*b2 - a1*b2"));
        assert!(law.volume_preserving());
        assert!(law.triangular());
    }

    #[test]
    fn abelian_group_law_is_addition() {
        let c = vec![vec![vec![Rat::zero(); 2]; 2]; 2];
        let alg = AbstractNilpotent::from_constants(vec!["A".into(), "B".into()], &c).unwrap();
        let law = group_law_of(&alg).unwrap();
        let v = ["a1", "a2", "b1", "b2"];
        assert_eq!(law.q[0], parse_poly("a1 + b1", &v).unwrap());
        assert_eq!(law.r[1], parse_poly("a2 + b2", &v).unwrap());
    }
}
