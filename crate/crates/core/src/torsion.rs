//! Iterated flows `Φ^I_x(t)`, the Jacobian functionals `J^β` and the
//! torsion weights `ρ_β = |J^β|^{1/(b₁+b₂-1)}`.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{GeometryError, TorsionError};
use crate::geometry::{lie_series_flow, FlowMap, PolyMap, PolyVectorField, Word, WordTable};
use crate::matrix::PolyMatrix;
use crate::{Rat, RatPoly};

/// Default cap on the number of Lie-series terms for a single flow.
pub const DEFAULT_MAX_TERMS: usize = 32;

/// `Φ^I_x(t) = e^{t_n X_{w_n}} ∘ ⋯ ∘ e^{t_1 X_{w_1}}(x)` in the `2n`
/// variables `(x_1..x_n, t_1..t_n)`.
#[derive(Clone, Debug)]
pub struct IterFlowMap {
    words: Vec<Word>,
    map: Vec<RatPoly>,
    jac_det: RatPoly,
}

impl IterFlowMap {
    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn dim(&self) -> usize {
        self.words.len()
    }

    pub fn map(&self) -> &[RatPoly] {
        &self.map
    }

    /// `det D_t Φ^I_x(t)` as a polynomial in `(x, t)`.
    pub fn jac_det(&self) -> &RatPoly {
        &self.jac_det
    }

    /// The map with the base point fixed.
    pub fn at_base(&self, x0: &[Rat]) -> Result<Vec<RatPoly>, TorsionError> {
        let n = self.dim();
        let args = base_substitution(n, x0)?;
        self.map
            .iter()
            .map(|c| c.compose(&args).map_err(TorsionError::from))
            .collect()
    }

    /// `det D_tΦ` with the base point fixed, a polynomial in `t`.
    pub fn jac_det_at_base(&self, x0: &[Rat]) -> Result<RatPoly, TorsionError> {
        let args = base_substitution(self.dim(), x0)?;
        Ok(self.jac_det.compose(&args)?)
    }

    /// `J^β(x) = ∂_t^β det D_tΦ(x, 0)`, a polynomial in `x`.
    pub fn jacobian_derivative(&self, beta: &[u32]) -> Result<RatPoly, TorsionError> {
        let n = self.dim();
        if beta.len() != n {
            return Err(TorsionError::BetaLength {
                expected: n,
                found: beta.len(),
            });
        }
        let groups = self.jac_det.coefficients_in_tail(n);
        Ok(match groups.get(beta) {
            Some(c) => c.scale(&beta_factorial(beta)),
            None => RatPoly::zero(n),
        })
    }

    /// Every nonzero `J^β` with `β_j <= budget` for all `j`.
    pub fn all_jacobian_derivatives(&self, budget: u32) -> BTreeMap<Vec<u32>, RatPoly> {
        let n = self.dim();
        self.jac_det
            .coefficients_in_tail(n)
            .into_iter()
            .filter(|(b, _)| b.iter().all(|&e| e <= budget))
            .map(|(b, c)| {
                let f = beta_factorial(&b);
                (b, c.scale(&f))
            })
            .collect()
    }
}

fn base_substitution(n: usize, x0: &[Rat]) -> Result<Vec<RatPoly>, TorsionError> {
    if x0.len() != n {
        return Err(TorsionError::Poly(crate::PolyError::DimensionMismatch {
            expected: n,
            found: x0.len(),
        }));
    }
    let mut args: Vec<RatPoly> = x0.iter().map(|v| RatPoly::constant(n, v.clone())).collect();
    args.extend((0..n).map(|i| RatPoly::var(n, i)));
    Ok(args)
}

pub fn beta_factorial(beta: &[u32]) -> Rat {
    let mut f = BigInt::one();
    for &b in beta {
        for k in 2..=b {
            f *= k;
        }
    }
    Rat::from_integer(f)
}

/// Builds `Φ^I` from explicit flows, one per slot.
pub fn iter_flow_from_flows(words: Vec<Word>, flows: &[&FlowMap]) -> Result<IterFlowMap, TorsionError> {
    let n = flows.first().map_or(0, |f| f.dim());
    if flows.len() != n || words.len() != n {
        return Err(TorsionError::TupleLength {
            expected: n,
            found: flows.len().min(words.len()),
        });
    }
    let nv = 2 * n;
    let mut state: Vec<RatPoly> = (0..n).map(|i| RatPoly::var(nv, i)).collect();
    for (k, f) in flows.iter().enumerate() {
        if f.field().is_zero() {
            continue;
        }
        state = f.apply(&state, &RatPoly::var(nv, n + k))?;
    }
    let tvars: Vec<usize> = (n..nv).collect();
    let jac_det = PolyMatrix::jacobian(&state, &tvars)?.det()?;
    Ok(IterFlowMap {
        words,
        map: state,
        jac_det,
    })
}

/// `Φ^I` for a tuple of words, each flow computed from the table.
pub fn iter_flow(table: &WordTable, words: &[Word]) -> Result<IterFlowMap, TorsionError> {
    TorsionContext::new(table.clone()).iter_flow(words).map(|m| (*m).clone())
}

/// The alternating tuple `(s, s', s, ...)` of single letters.
pub fn alternating_tuple(n: usize, start: u8) -> Vec<Word> {
    (0..n)
        .map(|i| Word::letter(if i % 2 == 0 { start } else { 3 - start }))
        .collect()
}

/// Flows and iterated flows for one word table, memoized. Shareable across
/// threads.
#[derive(Debug)]
pub struct TorsionContext {
    table: WordTable,
    max_terms: usize,
    flows: Mutex<BTreeMap<Word, Arc<FlowMap>>>,
    iters: Mutex<BTreeMap<Vec<Word>, Arc<IterFlowMap>>>,
}

impl TorsionContext {
    pub fn new(table: WordTable) -> Self {
        Self::with_max_terms(table, DEFAULT_MAX_TERMS)
    }

    pub fn with_max_terms(table: WordTable, max_terms: usize) -> Self {
        TorsionContext {
            table,
            max_terms,
            flows: Mutex::new(BTreeMap::new()),
            iters: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn table(&self) -> &WordTable {
        &self.table
    }

    pub fn dim(&self) -> usize {
        self.table.dim()
    }

    pub fn flow(&self, w: &Word) -> Result<Arc<FlowMap>, GeometryError> {
        if let Some(f) = self.flows.lock().unwrap().get(w) {
            return Ok(f.clone());
        }
        let f = Arc::new(lie_series_flow(&self.table.field(w), self.max_terms)?);
        self.flows.lock().unwrap().insert(w.clone(), f.clone());
        Ok(f)
    }

    pub fn iter_flow(&self, words: &[Word]) -> Result<Arc<IterFlowMap>, TorsionError> {
        let n = self.dim();
        if words.len() != n {
            return Err(TorsionError::TupleLength {
                expected: n,
                found: words.len(),
            });
        }
        if let Some(m) = self.iters.lock().unwrap().get(words) {
            return Ok(m.clone());
        }
        let flows = words
            .iter()
            .map(|w| self.flow(w))
            .collect::<Result<Vec<_>, _>>()?;
        let refs: Vec<&FlowMap> = flows.iter().map(|f| f.as_ref()).collect();
        let m = Arc::new(iter_flow_from_flows(words.to_vec(), &refs)?);
        self.iters.lock().unwrap().insert(words.to_vec(), m.clone());
        Ok(m)
    }

    /// `Ψ = Φ^{(1,2,1,...)}`.
    pub fn psi(&self) -> Result<Arc<IterFlowMap>, TorsionError> {
        self.iter_flow(&alternating_tuple(self.dim(), 1))
    }

    /// `Ψ̃ = Φ^{(2,1,2,...)}`.
    pub fn psi_tilde(&self) -> Result<Arc<IterFlowMap>, TorsionError> {
        self.iter_flow(&alternating_tuple(self.dim(), 2))
    }

    /// The degree bound `N`: the largest of the nilpotency depth of the
    /// table and the degrees of the letter flows.
    pub fn degree_bound(&self) -> Result<u32, TorsionError> {
        let mut n = self.table.words().map(Word::len).max().unwrap_or(1) as u32;
        for i in [1u8, 2] {
            let f = self.flow(&Word::letter(i))?;
            let deg = f.map().iter().map(RatPoly::total_degree).max().unwrap_or(0);
            n = n.max(deg);
        }
        Ok(n.max(1))
    }

    /// Default per-variable budget `2N - 1` on the entries of `β`.
    pub fn default_budget(&self) -> Result<u32, TorsionError> {
        Ok(2 * self.degree_bound()? - 1)
    }

    pub fn profile(&self, beta: &[u32], tilde: bool) -> Result<TorsionProfile, TorsionError> {
        let psi = if tilde { self.psi_tilde()? } else { self.psi()? };
        let j = psi.jacobian_derivative(beta)?;
        Ok(TorsionProfile::new(beta.to_vec(), tilde, j))
    }

    /// Nonzero profiles of `Ψ` (and `Ψ̃`) within the budget.
    pub fn all_profiles(&self, budget: u32) -> Result<Vec<TorsionProfile>, TorsionError> {
        let mut out = Vec::new();
        for tilde in [false, true] {
            let psi = if tilde { self.psi_tilde()? } else { self.psi()? };
            for (beta, j) in psi.all_jacobian_derivatives(budget) {
                out.push(TorsionProfile::new(beta, tilde, j));
            }
        }
        Ok(out)
    }
}

/// `b(β) = (Σ_{j odd}(1+β_j), Σ_{j even}(1+β_j))`, slots counted from 1.
pub fn b_of_beta(beta: &[u32]) -> (u32, u32) {
    let mut b = (0, 0);
    for (j, &v) in beta.iter().enumerate() {
        if j % 2 == 0 {
            b.0 += 1 + v;
        } else {
            b.1 += 1 + v;
        }
    }
    b
}

/// `b̃(β)`: the same sums with the roles of odd and even slots exchanged.
pub fn b_tilde_of_beta(beta: &[u32]) -> (u32, u32) {
    let (a, b) = b_of_beta(beta);
    (b, a)
}

/// `p(b) = ((b₁+b₂-1)/b₁, (b₁+b₂-1)/b₂)`.
pub fn exponents(b: (u32, u32)) -> (Rat, Rat) {
    let s = Rat::from_integer(BigInt::from(b.0 + b.1 - 1));
    (
        &s / Rat::from_integer(b.0.into()),
        &s / Rat::from_integer(b.1.into()),
    )
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorsionProfile {
    pub beta: Vec<u32>,
    /// Whether `J` comes from `Ψ̃` (and `b` is then `b̃(β)`).
    pub tilde: bool,
    pub b: (u32, u32),
    pub p: (Rat, Rat),
    pub j_beta: RatPoly,
    pub rho_exponent: Rat,
}

impl TorsionProfile {
    pub fn new(beta: Vec<u32>, tilde: bool, j_beta: RatPoly) -> Self {
        let b = if tilde {
            b_tilde_of_beta(&beta)
        } else {
            b_of_beta(&beta)
        };
        TorsionProfile {
            p: exponents(b),
            rho_exponent: Rat::new(1.into(), BigInt::from(b.0 + b.1 - 1)),
            beta,
            tilde,
            b,
            j_beta,
        }
    }

    /// `ρ_β(x) = |J^β(x)|^{rho_exponent}` in floating point.
    pub fn rho_f64(&self, x: &[f64]) -> f64 {
        let e = crate::poly::rat_to_f64(&self.rho_exponent);
        self.j_beta.eval_f64(x).abs().powf(e)
    }
}

/// A change of coordinates `π̂_j = G_j ∘ π_j ∘ F` with constant Jacobian
/// determinants. `F` acts on `R^n`, the `G_j` on `R^{n-1}`.
#[derive(Clone, Debug)]
pub struct CoordinateChange {
    pub f: Vec<RatPoly>,
    pub f_inv: Option<Vec<RatPoly>>,
    pub g1: Vec<RatPoly>,
    pub g2: Vec<RatPoly>,
}

fn constant_det(map: &[RatPoly], name: &'static str) -> Result<Rat, TorsionError> {
    let n = map.len();
    let vars: Vec<usize> = (0..n).collect();
    let d = PolyMatrix::jacobian(map, &vars)?.det()?;
    match d.constant_value() {
        Some(c) if !c.is_zero() => Ok(c),
        _ => Err(TorsionError::NonConstantJacobian(name)),
    }
}

impl CoordinateChange {
    pub fn identity(n: usize) -> Self {
        CoordinateChange {
            f: (0..n).map(|i| RatPoly::var(n, i)).collect(),
            f_inv: Some((0..n).map(|i| RatPoly::var(n, i)).collect()),
            g1: (0..n - 1).map(|i| RatPoly::var(n - 1, i)).collect(),
            g2: (0..n - 1).map(|i| RatPoly::var(n - 1, i)).collect(),
        }
    }

    /// `(det DF, det DG₁, det DG₂)`, all required to be nonzero constants.
    pub fn determinants(&self) -> Result<(Rat, Rat, Rat), TorsionError> {
        let df = constant_det(&self.f, "F")?;
        let dg1 = constant_det(&self.g1, "G1")?;
        let dg2 = constant_det(&self.g2, "G2")?;
        if let Some(inv) = &self.f_inv {
            let n = self.f.len();
            for (i, c) in self.f.iter().enumerate() {
                if c.compose(inv)? != RatPoly::var(n, i) {
                    return Err(TorsionError::BadInverse("F"));
                }
            }
        }
        Ok((df, dg1, dg2))
    }

    /// `π̂ = G_j ∘ π ∘ F` for the map of slot `j` (1 or 2).
    pub fn transform_map(&self, pi: &PolyMap, j: u8) -> Result<PolyMap, TorsionError> {
        let g = if j == 1 { &self.g1 } else { &self.g2 };
        let inner: Vec<RatPoly> = pi
            .components()
            .iter()
            .map(|c| c.compose(&self.f))
            .collect::<Result<_, _>>()?;
        let outer: Vec<RatPoly> = g
            .iter()
            .map(|c| c.compose(&inner))
            .collect::<Result<_, _>>()?;
        Ok(PolyMap::new(outer)?)
    }

    /// The change equivalent to applying `self` first and then `next`.
    pub fn then(&self, next: &CoordinateChange) -> Result<CoordinateChange, TorsionError> {
        let compose_all = |outer: &[RatPoly], inner: &[RatPoly]| -> Result<Vec<RatPoly>, TorsionError> {
            outer
                .iter()
                .map(|c| c.compose(inner).map_err(TorsionError::from))
                .collect()
        };
        Ok(CoordinateChange {
            f: compose_all(&self.f, &next.f)?,
            f_inv: match (&self.f_inv, &next.f_inv) {
                (Some(a), Some(b)) => Some(compose_all(b, a)?),
                _ => None,
            },
            g1: compose_all(&next.g1, &self.g1)?,
            g2: compose_all(&next.g2, &self.g2)?,
        })
    }
}

/// The profile of the transformed maps:
/// `Ĵ_β = (det DF)^{b₁+b₂-1} (det DG₁)^{b₁} (det DG₂)^{b₂} · J_β ∘ F`.
pub fn weight_transform(
    profile: &TorsionProfile,
    change: &CoordinateChange,
) -> Result<TorsionProfile, TorsionError> {
    let (df, dg1, dg2) = change.determinants()?;
    let (b1, b2) = profile.b;
    let factor = num_traits::pow(df, (b1 + b2 - 1) as usize)
        * num_traits::pow(dg1, b1 as usize)
        * num_traits::pow(dg2, b2 as usize);
    let j = profile.j_beta.compose(&change.f)?.scale(&factor);
    let mut out = profile.clone();
    out.j_beta = j;
    Ok(out)
}

/// Fiber fields of a pair of maps.
pub fn fields_of(pi1: &PolyMap, pi2: &PolyMap) -> (PolyVectorField, PolyVectorField) {
    (
        crate::geometry::hodge_star_field(pi1),
        crate::geometry::hodge_star_field(pi2),
    )
}
