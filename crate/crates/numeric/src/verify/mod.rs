//! Quasi-Monte-Carlo estimates of the quantities in the bilinear
//! inequalities: sets cut out by preimage constraints, step-function
//! bilinear forms weighted by `ρ_β`, and their split into torsion bands.

pub mod adapted;
pub mod coarea;
pub mod counterexample;

use serde::Serialize;
use torsion_core::geometry::PolyMap;
use torsion_core::poly::rat_to_f64;
use torsion_core::torsion::TorsionProfile;
use torsion_core::{Rat, RatPoly};

use crate::error::NumericError;
use crate::fpoly::{FMap, FPoly};
use crate::qmc::{self, Estimate};

pub use adapted::{ball_adapted_rwt, gamma_family};
pub use coarea::{coarea_check, CoareaReport};
pub use counterexample::{counterexample_2d, dyadic_truncations, CounterexampleRow, TestFunction};

/// A product of open intervals.
pub type RatBox = Vec<(Rat, Rat)>;

fn box_volume(b: &RatBox) -> Rat {
    b.iter().map(|(a, c)| c - a).product()
}

fn boxes_overlap(a: &RatBox, b: &RatBox) -> bool {
    a.iter().zip(b).all(|((a0, a1), (b0, b1))| a0 < b1 && b0 < a1)
}

/// A finite union of pairwise disjoint boxes.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxUnion {
    dim: usize,
    boxes: Vec<RatBox>,
    fboxes: Vec<Vec<(f64, f64)>>,
}

impl BoxUnion {
    pub fn new(dim: usize, boxes: Vec<RatBox>) -> Result<Self, NumericError> {
        for b in &boxes {
            if b.len() != dim {
                return Err(NumericError::BadInput(format!("box of dimension {} in a union of dimension {dim}", b.len())));
            }
            if b.iter().any(|(a, c)| a >= c) {
                return Err(NumericError::BadInput("degenerate box".into()));
            }
        }
        for (i, a) in boxes.iter().enumerate() {
            if boxes[i + 1..].iter().any(|b| boxes_overlap(a, b)) {
                return Err(NumericError::BadInput("boxes overlap".into()));
            }
        }
        let fboxes = boxes
            .iter()
            .map(|b| b.iter().map(|(a, c)| (rat_to_f64(a), rat_to_f64(c))).collect())
            .collect();
        Ok(BoxUnion { dim, boxes, fboxes })
    }

    pub fn single(b: RatBox) -> Result<Self, NumericError> {
        BoxUnion::new(b.len(), vec![b])
    }

    pub fn empty(dim: usize) -> Self {
        BoxUnion {
            dim,
            boxes: Vec::new(),
            fboxes: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn boxes(&self) -> &[RatBox] {
        &self.boxes
    }

    pub fn measure(&self) -> Rat {
        self.boxes.iter().map(box_volume).sum()
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        self.fboxes
            .iter()
            .any(|b| b.iter().zip(y).all(|((a, c), v)| a < v && v < c))
    }

    fn overlaps(&self, other: &BoxUnion) -> bool {
        self.boxes.iter().any(|a| other.boxes.iter().any(|b| boxes_overlap(a, b)))
    }
}

/// `f = Σ_k 2^k χ_{E^k}` with disjoint `E^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction {
    levels: Vec<(i32, BoxUnion)>,
}

impl StepFunction {
    pub fn new(levels: Vec<(i32, BoxUnion)>) -> Result<Self, NumericError> {
        let dim = levels.first().map_or(0, |l| l.1.dim());
        for (i, (_, e)) in levels.iter().enumerate() {
            if e.dim() != dim {
                return Err(NumericError::BadInput("levels of different dimension".into()));
            }
            if levels[i + 1..].iter().any(|(_, f)| e.overlaps(f)) {
                return Err(NumericError::BadInput("level sets overlap".into()));
            }
        }
        Ok(StepFunction { levels })
    }

    pub fn indicator(set: BoxUnion) -> Self {
        StepFunction { levels: vec![(0, set)] }
    }

    pub fn zero(dim: usize) -> Self {
        StepFunction {
            levels: vec![(0, BoxUnion::empty(dim))],
        }
    }

    pub fn levels(&self) -> &[(i32, BoxUnion)] {
        &self.levels
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        self.levels
            .iter()
            .find(|(_, e)| e.contains(y))
            .map_or(0.0, |(k, _)| 2f64.powi(*k))
    }

    /// `(Σ_k 2^{kp} |E^k|)^{1/p}` from the exact level measures.
    pub fn norm(&self, p: &Rat) -> f64 {
        let pf = rat_to_f64(p);
        let s: f64 = self
            .levels
            .iter()
            .map(|(k, e)| 2f64.powf(*k as f64 * pf) * rat_to_f64(&e.measure()))
            .sum();
        s.powf(1.0 / pf)
    }
}

/// The maps and weight shared by every estimator.
#[derive(Clone, Debug)]
pub struct Setting {
    pub pi1: FMap,
    pub pi2: FMap,
    pub profile: TorsionProfile,
    weight: FPoly,
    weight_exp: f64,
}

impl Setting {
    pub fn new(pi1: &PolyMap, pi2: &PolyMap, profile: TorsionProfile) -> Result<Self, NumericError> {
        if pi1.source_dim() != pi2.source_dim() || profile.j_beta.nvars() != pi1.source_dim() {
            return Err(NumericError::BadInput("maps and weight act on different spaces".into()));
        }
        Ok(Setting {
            pi1: FMap::new(pi1.components()),
            pi2: FMap::new(pi2.components()),
            weight: FPoly::from_rat(&profile.j_beta),
            weight_exp: rat_to_f64(&profile.rho_exponent),
            profile,
        })
    }

    pub fn dim(&self) -> usize {
        self.pi1.dim_in()
    }

    /// `ρ_β(x)`.
    pub fn rho(&self, x: &[f64]) -> f64 {
        self.weight.eval(x).abs().powf(self.weight_exp)
    }

    fn project(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut y1 = vec![0.0; self.pi1.dim_out()];
        let mut y2 = vec![0.0; self.pi2.dim_out()];
        self.pi1.eval(x, &mut y1);
        self.pi2.eval(x, &mut y2);
        (y1, y2)
    }
}

/// `π₁ = x`, `π₂ = x - γ(t)` on `(x, t) ∈ ℝ^{d+1}` for a curve `γ` given
/// by polynomials in one variable.
pub fn curve_maps(gamma: &[RatPoly]) -> Result<(PolyMap, PolyMap), NumericError> {
    let d = gamma.len();
    let n = d + 1;
    let x = |i| RatPoly::var(n, i);
    let pi1 = PolyMap::new((0..d).map(x).collect())?;
    let pi2 = PolyMap::new(
        gamma
            .iter()
            .enumerate()
            .map(|(i, g)| &x(i) - &g.embed(n, &[d]))
            .collect(),
    )?;
    Ok((pi1, pi2))
}

/// Which dyadic band `[2^m, 2^{m+1})` holds `v`, if positive.
pub fn band_of(v: f64) -> Option<i32> {
    (v > 0.0 && v.is_finite()).then(|| v.log2().floor() as i32)
}

#[derive(Clone, Debug)]
pub struct RegionSpec {
    pub domain: RatBox,
    pub band: Option<i32>,
    pub e1: BoxUnion,
    pub e2: BoxUnion,
}

fn domain_f64(d: &RatBox) -> Result<(Vec<f64>, Vec<f64>, f64), NumericError> {
    if d.is_empty() || d.iter().any(|(a, b)| a >= b) {
        return Err(NumericError::ZeroVolume);
    }
    let lo: Vec<f64> = d.iter().map(|p| rat_to_f64(&p.0)).collect();
    let w: Vec<f64> = d.iter().map(|p| rat_to_f64(&(&p.1 - &p.0))).collect();
    Ok((lo, w, rat_to_f64(&box_volume(d))))
}

fn to_domain(lo: &[f64], w: &[f64], u: &[f64]) -> Vec<f64> {
    lo.iter().zip(w).zip(u).map(|((l, w), u)| l + w * u).collect()
}

/// `|Ω|` for `Ω = domain ∩ {ρ_β ∈ band} ∩ π₁⁻¹(E₁) ∩ π₂⁻¹(E₂)`.
pub fn measure(s: &Setting, region: &RegionSpec, n_samples: usize, seed: u64) -> Result<Estimate, NumericError> {
    let (lo, w, vol) = domain_f64(&region.domain)?;
    if lo.len() != s.dim() {
        return Err(NumericError::BadInput("domain dimension does not match the maps".into()));
    }
    let est = qmc::integrate(s.dim(), n_samples, seed, |u| {
        let x = to_domain(&lo, &w, u);
        if let Some(m) = region.band {
            if band_of(s.rho(&x)) != Some(m) {
                return 0.0;
            }
        }
        let (y1, y2) = s.project(&x);
        if region.e1.contains(&y1) && region.e2.contains(&y2) {
            1.0
        } else {
            0.0
        }
    });
    Ok(est.scaled(vol))
}

#[derive(Clone, Debug, Serialize)]
pub struct RwtReport {
    pub omega: Estimate,
    pub e1: f64,
    pub e2: f64,
    /// `|Ω| / (|E₁|^{1/p₁} |E₂|^{1/p₂})`.
    pub ratio: f64,
    /// `α₁^{b₁} α₂^{b₂} / |Ω|` with `α_j = |Ω| / |E_j|`, when `|Ω| > 0`.
    pub alpha_form: Option<f64>,
}

pub fn rwt_ratio(s: &Setting, region: &RegionSpec, n_samples: usize, seed: u64) -> Result<RwtReport, NumericError> {
    let omega = measure(s, region, n_samples, seed)?;
    let e1 = rat_to_f64(&region.e1.measure());
    let e2 = rat_to_f64(&region.e2.measure());
    let (p1, p2) = (rat_to_f64(&s.profile.p.0), rat_to_f64(&s.profile.p.1));
    let ratio = if omega.mean == 0.0 {
        0.0
    } else {
        omega.mean / (e1.powf(1.0 / p1) * e2.powf(1.0 / p2))
    };
    let (b1, b2) = s.profile.b;
    let alpha_form = (omega.mean > 0.0).then(|| {
        let (a1, a2) = (omega.mean / e1, omega.mean / e2);
        a1.powi(b1 as i32) * a2.powi(b2 as i32) / omega.mean
    });
    Ok(RwtReport {
        omega,
        e1,
        e2,
        ratio,
        alpha_form,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BilinearReport {
    pub estimate: Estimate,
    pub norm1: f64,
    pub norm2: f64,
    /// `B / (‖f₁‖_{p₁} ‖f₂‖_{p₂})`.
    pub ratio: f64,
}

fn ratio_or_zero(b: f64, n: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        b / n
    }
}

/// `∫_domain f₁(π₁x) f₂(π₂x) ρ_β(x) dx`.
pub fn bilinear_form(
    s: &Setting,
    f1: &StepFunction,
    f2: &StepFunction,
    domain: &RatBox,
    n_samples: usize,
    seed: u64,
) -> Result<BilinearReport, NumericError> {
    let (lo, w, vol) = domain_f64(domain)?;
    let est = qmc::integrate(s.dim(), n_samples, seed, |u| {
        let x = to_domain(&lo, &w, u);
        let (y1, y2) = s.project(&x);
        let v = f1.eval(&y1);
        if v == 0.0 {
            return 0.0;
        }
        let v2 = f2.eval(&y2);
        if v2 == 0.0 {
            return 0.0;
        }
        v * v2 * s.rho(&x)
    })
    .scaled(vol);
    let norm1 = f1.norm(&s.profile.p.0);
    let norm2 = f2.norm(&s.profile.p.1);
    Ok(BilinearReport {
        ratio: ratio_or_zero(est.mean, norm1 * norm2),
        estimate: est,
        norm1,
        norm2,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BandEntry {
    pub m: i32,
    pub estimate: Estimate,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScaleProfile {
    pub bands: Vec<BandEntry>,
    /// Mass with `ρ_β` outside the scanned bands.
    pub outside: Estimate,
    pub total: f64,
    /// `(1/p₁ + 1/p₂)^{-1}`.
    pub theta: f64,
    pub theta_sum: f64,
    pub nonempty_bands: usize,
    /// `Σ_m B_m / (‖f₁‖ ‖f₂‖)`.
    pub total_ratio: f64,
}

/// `B_m` over `ρ_β ∈ [2^m, 2^{m+1})` for each `m` in `bands`, from one
/// shared sample.
pub fn scale_profile(
    s: &Setting,
    f1: &StepFunction,
    f2: &StepFunction,
    domain: &RatBox,
    bands: (i32, i32),
    n_samples: usize,
    seed: u64,
) -> Result<ScaleProfile, NumericError> {
    if bands.0 > bands.1 {
        return Err(NumericError::BadInput("empty band range".into()));
    }
    let (lo, w, vol) = domain_f64(domain)?;
    let nb = (bands.1 - bands.0 + 1) as usize;
    let est = qmc::integrate_many(s.dim(), n_samples, seed, |u| {
        let mut out = vec![0.0; nb + 1];
        let x = to_domain(&lo, &w, u);
        let (y1, y2) = s.project(&x);
        let v = f1.eval(&y1) * f2.eval(&y2);
        if v == 0.0 {
            return out;
        }
        let r = s.rho(&x);
        match band_of(r) {
            Some(m) if m >= bands.0 && m <= bands.1 => out[(m - bands.0) as usize] = v * r,
            _ => out[nb] = v * r,
        }
        out
    });
    let mut est: Vec<Estimate> = est.into_iter().map(|e| e.scaled(vol)).collect();
    let outside = est.pop().expect("one extra slot");
    let (p1, p2) = (rat_to_f64(&s.profile.p.0), rat_to_f64(&s.profile.p.1));
    let theta = 1.0 / (1.0 / p1 + 1.0 / p2);
    let bands: Vec<BandEntry> = est
        .into_iter()
        .enumerate()
        .map(|(i, e)| BandEntry {
            m: bands.0 + i as i32,
            estimate: e,
        })
        .collect();
    let total: f64 = bands.iter().map(|b| b.estimate.mean).sum();
    let norm = f1.norm(&s.profile.p.0) * f2.norm(&s.profile.p.1);
    Ok(ScaleProfile {
        theta_sum: bands.iter().map(|b| b.estimate.mean.powf(theta)).sum(),
        nonempty_bands: bands.iter().filter(|b| b.estimate.mean > 0.0).count(),
        total_ratio: ratio_or_zero(total, norm),
        total,
        theta,
        outside,
        bands,
    })
}

/// The unit cube `[lo, hi]^dim` as a box.
pub fn cube(dim: usize, lo: Rat, hi: Rat) -> RatBox {
    vec![(lo, hi); dim]
}
