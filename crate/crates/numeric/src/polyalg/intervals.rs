//! Finite unions of rational intervals and the quarter-splitting stopping
//! time that locates a large, well-separated pair of subintervals.

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use torsion_core::json::rat_to_string;
use torsion_core::poly::rat_to_f64;
use torsion_core::Rat;

use crate::error::NumericError;
use crate::upoly::{RealRoot, UPoly};

/// Disjoint open intervals, sorted, each of positive length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalSet {
    intervals: Vec<(Rat, Rat)>,
}

impl IntervalSet {
    /// Sorts and merges overlapping pieces; rejects empty or reversed ones.
    pub fn new(mut raw: Vec<(Rat, Rat)>) -> Result<Self, NumericError> {
        if raw.iter().any(|(a, b)| a >= b) {
            return Err(NumericError::BadInput("interval with lo >= hi".into()));
        }
        raw.sort();
        let mut out: Vec<(Rat, Rat)> = Vec::new();
        for (a, b) in raw {
            match out.last_mut() {
                Some(last) if a < last.1 => {
                    if b > last.1 {
                        last.1 = b;
                    }
                }
                _ => out.push((a, b)),
            }
        }
        Ok(IntervalSet { intervals: out })
    }

    pub fn intervals(&self) -> &[(Rat, Rat)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn measure(&self) -> Rat {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    /// Smallest interval containing the set.
    pub fn hull(&self) -> Option<(Rat, Rat)> {
        Some((self.intervals.first()?.0.clone(), self.intervals.last()?.1.clone()))
    }

    /// `|S ∩ (lo, hi)|`.
    pub fn measure_in(&self, lo: &Rat, hi: &Rat) -> Rat {
        let mut m = Rat::zero();
        for (a, b) in &self.intervals {
            let l = if a > lo { a } else { lo };
            let h = if b < hi { b } else { hi };
            if l < h {
                m += h - l;
            }
        }
        m
    }

    pub fn restrict(&self, lo: &Rat, hi: &Rat) -> IntervalSet {
        let intervals = self
            .intervals
            .iter()
            .filter_map(|(a, b)| {
                let l = if a > lo { a.clone() } else { lo.clone() };
                let h = if b < hi { b.clone() } else { hi.clone() };
                (l < h).then_some((l, h))
            })
            .collect();
        IntervalSet { intervals }
    }
}

#[derive(Clone, Debug)]
pub struct RefineParams {
    /// The exponent `c` of the stopping rule; must be positive.
    pub c: Rat,
    /// The small constant `c'`.
    pub c_prime: Rat,
    pub max_steps: usize,
}

impl Default for RefineParams {
    fn default() -> Self {
        RefineParams {
            c: Rat::new(1.into(), 2.into()),
            c_prime: Rat::new(1.into(), 32.into()),
            max_steps: 10_000,
        }
    }
}

/// One application of the stopping time.
#[derive(Clone, Debug, PartialEq)]
pub struct Refinement {
    pub start: (Rat, Rat),
    pub j: (Rat, Rat),
    pub k: (Rat, Rat),
    /// Quarters discarded before stopping.
    pub steps: usize,
    pub s_measure: Rat,
    pub s_in_j: Rat,
    pub s_in_k: Rat,
}

impl Refinement {
    /// `|S ∩ J| / |S|`.
    pub fn j_fraction(&self) -> f64 {
        rat_to_f64(&(&self.s_in_j / &self.s_measure))
    }

    /// `|S ∩ K| / ((|S|/|K|)^c |S|)`.
    pub fn k_constant(&self, c: f64) -> f64 {
        let s = rat_to_f64(&self.s_measure);
        let k = rat_to_f64(&(&self.k.1 - &self.k.0));
        rat_to_f64(&self.s_in_k) / ((s / k).powf(c) * s)
    }

    /// `dist(K, J) / |J|`, which is 1 or 2 by construction.
    pub fn separation(&self) -> Rat {
        let gap = if self.k.0 >= self.j.1 {
            &self.k.0 - &self.j.1
        } else {
            &self.j.0 - &self.k.1
        };
        gap / (&self.j.1 - &self.j.0)
    }
}

fn log43_ceil(q: &Rat) -> i64 {
    let r = Rat::new(4.into(), 3.into());
    let mut m = 0i64;
    let mut p = Rat::one();
    if q > &Rat::one() {
        while &p < q {
            p *= &r;
            m += 1;
        }
    } else {
        loop {
            let next = &p / &r;
            if &next >= q {
                p = next;
                m -= 1;
            } else {
                break;
            }
        }
    }
    m
}

/// `|S ∩ q| > c' 2^{-c m} |S ∩ I|`, decided exactly.
fn passes(sq: &Rat, si: &Rat, m: i64, params: &RefineParams) -> bool {
    if si.is_zero() {
        return false;
    }
    let ratio = sq / (&params.c_prime * si);
    let a = params.c.numer();
    let d = params.c.denom();
    let d: i32 = d.try_into().unwrap_or(i32::MAX);
    let am: i64 = i64::try_from(a).unwrap_or(i64::MAX).saturating_mul(m);
    let lhs = num_traits::pow::Pow::pow(&ratio, d);
    let rhs = num_traits::pow::Pow::pow(&Rat::from_integer(2.into()), -(am as i32));
    lhs > rhs
}

fn quarters(lo: &Rat, hi: &Rat) -> [(Rat, Rat); 4] {
    let w = (hi - lo) / Rat::from_integer(4.into());
    std::array::from_fn(|i| {
        let a = lo + &w * Rat::from_integer((i as i64).into());
        let b = &a + &w;
        (a, b)
    })
}

/// Runs the stopping time on `s` starting from the interval `start`.
pub fn refine_once(s: &IntervalSet, start: (Rat, Rat), params: &RefineParams) -> Result<Refinement, NumericError> {
    if !params.c.is_positive() || !params.c_prime.is_positive() {
        return Err(NumericError::BadInput("c and c' must be positive".into()));
    }
    let s_measure = s.measure_in(&start.0, &start.1);
    if !s_measure.is_positive() {
        return Err(NumericError::BadInput("set has zero measure in the starting interval".into()));
    }
    let (mut lo, mut hi) = start.clone();
    for step in 0..params.max_steps {
        let m = log43_ceil(&((&hi - &lo) / &s_measure));
        let q = quarters(&lo, &hi);
        let sq: Vec<Rat> = q.iter().map(|(a, b)| s.measure_in(a, b)).collect();
        let si = s.measure_in(&lo, &hi);
        let ok1 = passes(&sq[0], &si, m, params);
        let ok4 = passes(&sq[3], &si, m, params);
        if ok1 && ok4 {
            let mut jdx = 0;
            for i in 1..4 {
                if sq[i] > sq[jdx] {
                    jdx = i;
                }
            }
            let kdx = if jdx <= 1 { 3 } else { 0 };
            return Ok(Refinement {
                start,
                j: q[jdx].clone(),
                k: q[kdx].clone(),
                steps: step,
                s_measure,
                s_in_j: sq[jdx].clone(),
                s_in_k: sq[kdx].clone(),
            });
        }
        if !ok1 {
            lo = q[1].0.clone();
        } else {
            hi = q[2].1.clone();
        }
    }
    Err(NumericError::HypothesisNotMet(format!(
        "stopping time did not terminate within {} steps",
        params.max_steps
    )))
}

/// `n` nested applications: the first starts from the hull of `S`, each
/// later one from the previous `J` with `S` replaced by `S ∩ J`.
pub fn refine_interval(s: &IntervalSet, n: usize, params: &RefineParams) -> Result<Vec<Refinement>, NumericError> {
    let mut start = s.hull().ok_or_else(|| NumericError::BadInput("empty set".into()))?;
    let mut cur = s.clone();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n.max(1) {
        let r = refine_once(&cur, start, params)?;
        cur = cur.restrict(&r.j.0, &r.j.1);
        start = r.j.clone();
        out.push(r);
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct RefinementBound {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// The summands of the right side, `j = 0..=deg P`.
    pub terms: Vec<f64>,
}

/// `∫_a^b |P|`, split at the real roots of `P`.
pub fn integral_abs(p: &UPoly, a: &Rat, b: &Rat) -> f64 {
    if p.is_zero() {
        return 0.0;
    }
    let q = p.antiderivative();
    let sq = p.squarefree();
    let mut cuts: Vec<Rat> = vec![a.clone()];
    for r in p.real_roots() {
        let r = r.refined(&sq, 80);
        let (lo, hi) = r.bounds();
        let x = (lo + hi) / Rat::from_integer(2.into());
        if &x > a && &x < b {
            cuts.push(x);
        }
    }
    cuts.push(b.clone());
    cuts.windows(2)
        .map(|w| rat_to_f64(&(q.eval(&w[1]) - q.eval(&w[0])).abs()))
        .sum()
}

/// `sup_{[a,b]} |P|`.
pub fn sup_norm(p: &UPoly, a: &Rat, b: &Rat) -> f64 {
    let mut best = rat_to_f64(&p.eval(a).abs()).max(rat_to_f64(&p.eval(b).abs()));
    let dp = p.derivative();
    if dp.degree().unwrap_or(0) > 0 {
        let sq = dp.squarefree();
        for r in dp.real_roots() {
            let (lo, hi) = r.refined(&sq, 60).bounds();
            if &hi > a && &lo < b {
                let x = match &r {
                    RealRoot::Exact(x) => x.clone(),
                    _ => (lo + hi) / Rat::from_integer(2.into()),
                };
                best = best.max(rat_to_f64(&p.eval(&x).abs()));
            }
        }
    }
    best
}

/// Compares `∫_S |P|` with `Σ_j ‖P^{(j)}‖_{L∞(J)} (|J|/|S|)^{(1-ε)j} |S|^{j+1}`.
pub fn check_refinement_bound(s: &IntervalSet, p: &UPoly, j: &(Rat, Rat), eps: f64) -> RefinementBound {
    let lhs: f64 = s.intervals().iter().map(|(a, b)| integral_abs(p, a, b)).sum();
    let sm = rat_to_f64(&s.measure());
    let jl = rat_to_f64(&(&j.1 - &j.0));
    let deg = p.degree().unwrap_or(0);
    let mut terms = Vec::with_capacity(deg + 1);
    let mut d = p.clone();
    for k in 0..=deg {
        let norm = sup_norm(&d, &j.0, &j.1);
        terms.push(norm * (jl / sm).powf((1.0 - eps) * k as f64) * sm.powi(k as i32 + 1));
        d = d.derivative();
    }
    let rhs: f64 = terms.iter().sum();
    RefinementBound {
        lhs,
        rhs,
        ratio: if rhs > 0.0 { lhs / rhs } else { f64::INFINITY },
        terms,
    }
}

/// JSON-friendly view of a refinement.
pub fn refinement_json(r: &Refinement) -> serde_json::Value {
    let iv = |p: &(Rat, Rat)| serde_json::json!([rat_to_string(&p.0), rat_to_string(&p.1)]);
    serde_json::json!({
        "start": iv(&r.start),
        "J": iv(&r.j),
        "K": iv(&r.k),
        "steps": r.steps,
        "S_measure": rat_to_string(&r.s_measure),
        "S_in_J": rat_to_string(&r.s_in_j),
        "S_in_K": rat_to_string(&r.s_in_k),
        "separation": rat_to_string(&r.separation()),
    })
}
