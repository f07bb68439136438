//! Carnot-Caratheodory balls `B^I(x; α) = Φ^I_x(Q^I_α)`: sampling, volume
//! estimates, preimage membership, and the doubling and covering checks.

use serde::Serialize;
use torsion_core::geometry::Word;
use torsion_core::json::rat_to_string;
use torsion_core::poly::rat_to_f64;
use torsion_core::polytope::LambdaEntry;
use torsion_core::torsion::TorsionContext;
use torsion_core::{Rat, RatPoly};

use crate::error::NumericError;
use crate::fpoly::{solve, FMap, FPoly};
use crate::qmc::{self, Estimate};

/// Number of image points kept in a `BallSample`.
pub const STORED_POINTS: usize = 4096;
const NEWTON_STARTS: usize = 8;
const NEWTON_TOL: f64 = 1e-9;
const NEWTON_ITERS: usize = 60;

#[derive(Clone, Debug, PartialEq)]
pub struct BallSpec {
    pub center: Vec<Rat>,
    pub words: Vec<Word>,
    pub alpha: (Rat, Rat),
}

impl BallSpec {
    pub fn new(center: Vec<Rat>, words: Vec<Word>, alpha: (Rat, Rat)) -> Result<Self, NumericError> {
        if alpha.0 <= Rat::from_integer(0.into()) || alpha.1 <= Rat::from_integer(0.into()) {
            return Err(NumericError::BadInput("alpha must be positive".into()));
        }
        if center.len() != words.len() {
            return Err(NumericError::BadInput(format!(
                "center has {} coordinates but the tuple has {} words",
                center.len(),
                words.len()
            )));
        }
        Ok(BallSpec { center, words, alpha })
    }

    /// `deg I`, the summed bidegree of the tuple.
    pub fn degree(&self) -> (u32, u32) {
        self.words.iter().fold((0, 0), |a, w| {
            let d = w.bidegree();
            (a.0 + d.0, a.1 + d.1)
        })
    }

    /// `α^{deg w_i}` for each slot.
    pub fn radii(&self) -> Vec<f64> {
        let (a1, a2) = (rat_to_f64(&self.alpha.0), rat_to_f64(&self.alpha.1));
        self.words
            .iter()
            .map(|w| {
                let (d1, d2) = w.bidegree();
                a1.powi(d1 as i32) * a2.powi(d2 as i32)
            })
            .collect()
    }

    /// `|Q^I_α| = 2^n α^{deg I}`.
    pub fn box_volume(&self) -> f64 {
        self.radii().iter().map(|r| 2.0 * r).product()
    }

    pub fn with_alpha(&self, alpha: (Rat, Rat)) -> BallSpec {
        BallSpec {
            alpha,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "center": self.center.iter().map(rat_to_string).collect::<Vec<_>>(),
            "words": self.words.iter().map(Word::to_string).collect::<Vec<_>>(),
            "alpha": [rat_to_string(&self.alpha.0), rat_to_string(&self.alpha.1)],
        })
    }
}

/// `Φ^I_x` with the base point fixed, ready for floating-point work.
#[derive(Clone, Debug)]
pub struct Ball {
    pub spec: BallSpec,
    map: FMap,
    jac: FPoly,
    radii: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Member,
    NonMember,
    Inconclusive,
}

impl Ball {
    pub fn new(ctx: &TorsionContext, spec: BallSpec) -> Result<Self, NumericError> {
        let phi = ctx.iter_flow(&spec.words)?;
        let comps: Vec<RatPoly> = phi.at_base(&spec.center)?;
        let jac = phi.jac_det_at_base(&spec.center)?;
        Ok(Ball {
            map: FMap::new(&comps),
            jac: FPoly::from_rat(&jac),
            radii: spec.radii(),
            spec,
        })
    }

    pub fn dim(&self) -> usize {
        self.radii.len()
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Maps `u ∈ [0,1)^n` to the box point `t = r(2u - 1)`.
    pub fn box_point(&self, u: &[f64], t: &mut [f64]) {
        for ((ti, ui), r) in t.iter_mut().zip(u).zip(&self.radii) {
            *ti = r * (2.0 * ui - 1.0);
        }
    }

    pub fn image(&self, t: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.map.eval(t, &mut y);
        y
    }

    pub fn jacobian_det(&self, t: &[f64]) -> f64 {
        self.jac.eval(t)
    }

    fn in_box(&self, t: &[f64]) -> bool {
        t.iter().zip(&self.radii).all(|(ti, r)| ti.abs() < r * (1.0 + 1e-9))
    }

    /// Newton iteration on `Φ(t) = y` from `start`, damped so the residual
    /// never grows. Returns the converged preimage.
    fn newton(&self, y: &[f64], start: &[f64]) -> Option<Vec<f64>> {
        let mut t = start.to_vec();
        let residual = |t: &[f64]| -> (Vec<f64>, f64) {
            let v = self.image(t);
            let r: Vec<f64> = v.iter().zip(y).map(|(a, b)| a - b).collect();
            let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            (r, norm)
        };
        let (mut r, mut norm) = residual(&t);
        let scale = 1.0 + y.iter().map(|v| v.abs()).fold(0.0, f64::max);
        for _ in 0..NEWTON_ITERS {
            let mut a = self.map.jacobian(&t);
            let mut step = r.clone();
            solve(&mut a, &mut step)?;
            let mut lambda = 1.0;
            loop {
                let cand: Vec<f64> = t.iter().zip(&step).map(|(ti, s)| ti - lambda * s).collect();
                let (rc, nc) = residual(&cand);
                if nc < norm || lambda < 1e-4 {
                    let small = step
                        .iter()
                        .zip(&self.radii)
                        .all(|(s, rad)| (lambda * s).abs() <= NEWTON_TOL * rad.max(1e-300));
                    t = cand;
                    r = rc;
                    norm = nc;
                    if small || norm <= 1e-13 * scale {
                        return (norm <= 1e-8 * scale).then_some(t);
                    }
                    break;
                }
                lambda *= 0.5;
            }
        }
        (norm <= 1e-10 * scale).then_some(t)
    }

    /// Whether `y ∈ B^I(x; α)`, deciding by preimage Newton from fixed
    /// starts: the origin and seven scrambled points of the half box.
    pub fn membership(&self, y: &[f64]) -> Membership {
        let n = self.dim();
        let mut starts = vec![vec![0.0; n]];
        let h = qmc::Halton::new(n, 0x6a11, 0);
        let mut u = vec![0.0; n];
        for k in 0..NEWTON_STARTS as u64 - 1 {
            h.point(k, &mut u);
            let mut t = vec![0.0; n];
            self.box_point(&u, &mut t);
            starts.push(t.iter().map(|v| 0.5 * v).collect());
        }
        let mut converged = false;
        for s in &starts {
            if let Some(t) = self.newton(y, s) {
                if self.in_box(&t) {
                    return Membership::Member;
                }
                converged = true;
            }
        }
        if converged {
            Membership::NonMember
        } else {
            Membership::Inconclusive
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeMethod {
    ChangeOfVariables,
    GridOccupancy,
}

#[derive(Clone, Debug, Serialize)]
pub struct BallSample {
    #[serde(skip)]
    pub spec: BallSpec,
    /// The first `STORED_POINTS` image points.
    pub points: Vec<Vec<f64>>,
    pub volume: Estimate,
    pub method: VolumeMethod,
    /// Observed min and max of `|det D_tΦ|`.
    pub jac_range: (f64, f64),
    pub box_volume: f64,
}

impl BallSample {
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("plain data");
        v["spec"] = self.spec.to_json();
        v
    }
}

pub fn ball_sample(ball: &Ball, n_samples: usize, seed: u64) -> Result<BallSample, NumericError> {
    if n_samples == 0 {
        return Err(NumericError::BadInput("n_samples must be at least 1".into()));
    }
    let n = ball.dim();
    let pts = qmc::points(n, n_samples, seed);
    let mut t = vec![0.0; n];
    let mut images = Vec::with_capacity(n_samples);
    let (mut jmin, mut jmax) = (f64::INFINITY, 0.0f64);
    let (mut pos, mut neg) = (false, false);
    for u in &pts {
        ball.box_point(u, &mut t);
        let j = ball.jacobian_det(&t);
        pos |= j > 0.0;
        neg |= j < 0.0;
        jmin = jmin.min(j.abs());
        jmax = jmax.max(j.abs());
        images.push(ball.image(&t));
    }
    let bv = ball.spec.box_volume();
    let (volume, method) = if !(pos && neg) {
        let est = qmc::integrate(n, n_samples, seed, |u| {
            let mut t = vec![0.0; u.len()];
            ball.box_point(u, &mut t);
            ball.jacobian_det(&t).abs()
        });
        (est.scaled(bv), VolumeMethod::ChangeOfVariables)
    } else {
        (occupancy_volume(&images), VolumeMethod::GridOccupancy)
    };
    images.truncate(STORED_POINTS);
    Ok(BallSample {
        spec: ball.spec.clone(),
        points: images,
        volume,
        method,
        jac_range: (jmin, jmax),
        box_volume: bv,
    })
}

/// Volume of the union of occupied cells of a grid over the bounding box,
/// with about eight points per cell.
fn occupancy_volume(points: &[Vec<f64>]) -> Estimate {
    let n = points.first().map_or(0, Vec::len);
    if n == 0 {
        return Estimate {
            mean: 0.0,
            stderr: 0.0,
            samples: 0,
        };
    }
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for p in points {
        for i in 0..n {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    let cells = ((points.len() as f64 / 8.0).powf(1.0 / n as f64).floor() as usize).max(1);
    let width: Vec<f64> = (0..n).map(|i| (hi[i] - lo[i]) / cells as f64).collect();
    let mut occupied = std::collections::BTreeSet::new();
    for p in points {
        let key: Vec<usize> = (0..n)
            .map(|i| {
                if width[i] <= 0.0 {
                    0
                } else {
                    (((p[i] - lo[i]) / width[i]) as usize).min(cells - 1)
                }
            })
            .collect();
        occupied.insert(key);
    }
    let cell_vol: f64 = width.iter().product();
    Estimate {
        mean: occupied.len() as f64 * cell_vol,
        stderr: f64::NAN,
        samples: points.len(),
    }
}

/// `volume / (|Q^I_α| |λ_I(x)|)`.
pub fn sandwich_ratio(sample: &BallSample, lambda_at_center: f64) -> f64 {
    sample.volume.mean / (sample.box_volume * lambda_at_center.abs())
}

/// Largest `|λ_I(x)|` over the table, with the tuple attaining it.
pub fn best_tuple(lambdas: &[LambdaEntry], x: &[f64]) -> Option<(Vec<Word>, f64)> {
    lambdas
        .iter()
        .map(|e| (e.words.clone(), e.poly.eval_f64(x).abs()))
        .fold(None, |acc: Option<(Vec<Word>, f64)>, cur| match acc {
            Some(a) if a.1 >= cur.1 => Some(a),
            _ => Some(cur),
        })
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct MembershipTally {
    pub member: usize,
    pub non_member: usize,
    pub inconclusive: usize,
}

impl MembershipTally {
    pub fn total(&self) -> usize {
        self.member + self.non_member + self.inconclusive
    }

    pub fn member_fraction(&self) -> f64 {
        let decided = self.member + self.non_member;
        if decided == 0 {
            0.0
        } else {
            self.member as f64 / decided as f64
        }
    }

    pub fn inconclusive_fraction(&self) -> f64 {
        self.inconclusive as f64 / self.total().max(1) as f64
    }
}

/// Membership of each point in `ball`.
pub fn tally(ball: &Ball, points: &[Vec<f64>]) -> MembershipTally {
    use rayon::prelude::*;
    let v: Vec<Membership> = points.par_iter().map(|p| ball.membership(p)).collect();
    MembershipTally {
        member: v.iter().filter(|m| **m == Membership::Member).count(),
        non_member: v.iter().filter(|m| **m == Membership::NonMember).count(),
        inconclusive: v.iter().filter(|m| **m == Membership::Inconclusive).count(),
    }
}

#[derive(Clone, Debug)]
pub struct DoublingParams {
    pub rho: Rat,
    pub delta: Rat,
    pub c: Rat,
    pub n_samples: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct DoublingReport {
    pub c: f64,
    pub delta: f64,
    pub rho: f64,
    /// `|λ_{I_j}(x_j)| / max_I |λ_I(x_j)|` for both centers.
    pub lambda_fractions: (f64, f64),
    pub hypothesis_met: bool,
    pub intersect: bool,
    pub containment: MembershipTally,
    pub pass_fraction: f64,
    pub verdict: Verdict,
}

fn lambda_fraction(lambdas: &[LambdaEntry], words: &[Word], x: &[f64]) -> f64 {
    let max = best_tuple(lambdas, x).map_or(0.0, |b| b.1);
    let own = lambdas
        .iter()
        .find(|e| e.words == words)
        .map_or(0.0, |e| e.poly.eval_f64(x).abs());
    if max == 0.0 {
        0.0
    } else {
        own / max
    }
}

/// If `B^{I₁}(x₁; cδρ)` meets `B^{I₂}(x₂; cδρ)`, checks that the first ball
/// lies inside `B^{I₂}(x₂; ρ)`. Radii are isotropic: `α = (r, r)`.
pub fn doubling_check(
    ctx: &TorsionContext,
    lambdas: &[LambdaEntry],
    first: (&[Rat], &[Word]),
    second: (&[Rat], &[Word]),
    params: &DoublingParams,
) -> Result<DoublingReport, NumericError> {
    let small = &params.c * &params.delta * &params.rho;
    let ball = |x: &[Rat], w: &[Word], r: &Rat| {
        BallSpec::new(x.to_vec(), w.to_vec(), (r.clone(), r.clone())).and_then(|s| Ball::new(ctx, s))
    };
    let b1 = ball(first.0, first.1, &small)?;
    let b2_small = ball(second.0, second.1, &small)?;
    let b2 = ball(second.0, second.1, &params.rho)?;
    let xf = |x: &[Rat]| x.iter().map(rat_to_f64).collect::<Vec<_>>();
    let fr = (
        lambda_fraction(lambdas, first.1, &xf(first.0)),
        lambda_fraction(lambdas, second.1, &xf(second.0)),
    );
    let delta = rat_to_f64(&params.delta);
    let hypothesis_met = fr.0 >= delta * (1.0 - 1e-12) && fr.1 >= delta * (1.0 - 1e-12);

    let s1 = ball_sample(&b1, params.n_samples, params.seed)?;
    let probe = 256.min(s1.points.len());
    let meets = tally(&b2_small, &s1.points[..probe]).member > 0 || {
        let s2 = ball_sample(&b2_small, probe, params.seed ^ 1)?;
        tally(&b1, &s2.points).member > 0
    };
    let mut report = DoublingReport {
        c: rat_to_f64(&params.c),
        delta,
        rho: rat_to_f64(&params.rho),
        lambda_fractions: fr,
        hypothesis_met,
        intersect: meets,
        containment: MembershipTally {
            member: 0,
            non_member: 0,
            inconclusive: 0,
        },
        pass_fraction: 0.0,
        verdict: Verdict::NotApplicable,
    };
    if !meets {
        return Ok(report);
    }
    // Every sample, not only the stored ones.
    let n = b1.dim();
    let pts: Vec<Vec<f64>> = qmc::points(n, params.n_samples, params.seed)
        .iter()
        .map(|u| {
            let mut t = vec![0.0; n];
            b1.box_point(u, &mut t);
            b1.image(&t)
        })
        .collect();
    report.containment = tally(&b2, &pts);
    report.pass_fraction = report.containment.member_fraction();
    report.verdict = if report.containment.inconclusive_fraction() > 0.01 {
        Verdict::Inconclusive
    } else if report.pass_fraction >= 0.99 {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(report)
}

#[derive(Clone, Debug)]
pub struct CoverParams {
    pub rho: Rat,
    pub delta: f64,
    /// Grid points per axis.
    pub grid: usize,
    /// Coverage is tested at `inflate · ρ`.
    pub inflate: Rat,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverReport {
    pub centers: Vec<Vec<f64>>,
    pub count: usize,
    pub grid_points: usize,
    pub covered_fraction: f64,
    pub inconclusive: usize,
}

fn grid_points(lo: &[Rat], hi: &[Rat], g: usize) -> Vec<Vec<Rat>> {
    let n = lo.len();
    let mut out = vec![Vec::new()];
    for i in 0..n {
        let w = (&hi[i] - &lo[i]) / Rat::from_integer((g as i64).into());
        let mut next = Vec::with_capacity(out.len() * g);
        for p in &out {
            for k in 0..g {
                let mut q = p.clone();
                let half = Rat::new((2 * k as i64 + 1).into(), 2.into());
                q.push(&lo[i] + &w * half);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

/// Greedy maximal selection over cell-centred grid points of the box
/// `[lo, hi]`. A point joins 𝒜 when it lies outside `B(s; 2ρ)` for every
/// chosen `s`, a proxy for `B(a; ρ) ∩ B(s; ρ) = ∅`. Each point uses its
/// best tuple and is skipped if that `|λ|` falls below `δ` times the
/// largest value on the grid.
pub fn vitali_cover(
    ctx: &TorsionContext,
    lambdas: &[LambdaEntry],
    lo: &[Rat],
    hi: &[Rat],
    params: &CoverParams,
) -> Result<CoverReport, NumericError> {
    let empty = CoverReport {
        centers: Vec::new(),
        count: 0,
        grid_points: 0,
        covered_fraction: 1.0,
        inconclusive: 0,
    };
    if params.grid == 0 || lo.iter().zip(hi).any(|(a, b)| a >= b) {
        return Ok(empty);
    }
    let grid = grid_points(lo, hi, params.grid);
    let mut scored = Vec::with_capacity(grid.len());
    for p in grid {
        let pf: Vec<f64> = p.iter().map(rat_to_f64).collect();
        if let Some((w, v)) = best_tuple(lambdas, &pf) {
            scored.push((p, pf, w, v));
        }
    }
    let top = scored.iter().map(|s| s.3).fold(0.0, f64::max);
    scored.retain(|s| s.3 > 0.0 && s.3 >= params.delta * top);
    if scored.is_empty() {
        return Ok(empty);
    }
    let two_rho = &params.rho * Rat::from_integer(2.into());
    let big = &params.rho * &params.inflate;
    let mut chosen: Vec<(Ball, Ball, Vec<f64>)> = Vec::new();
    for (p, pf, w, _) in &scored {
        let outside = chosen
            .iter()
            .all(|(sel, _, _)| sel.membership(pf) == Membership::NonMember);
        if outside {
            let sel = Ball::new(ctx, BallSpec::new(p.clone(), w.clone(), (two_rho.clone(), two_rho.clone()))?)?;
            let cov = Ball::new(ctx, BallSpec::new(p.clone(), w.clone(), (big.clone(), big.clone()))?)?;
            chosen.push((sel, cov, pf.clone()));
        }
    }
    let mut covered = 0;
    let mut inconclusive = 0;
    for (_, pf, _, _) in &scored {
        let mut any_inc = false;
        let mut hit = false;
        for (_, cov, _) in &chosen {
            match cov.membership(pf) {
                Membership::Member => {
                    hit = true;
                    break;
                }
                Membership::Inconclusive => any_inc = true,
                Membership::NonMember => {}
            }
        }
        if hit {
            covered += 1;
        } else if any_inc {
            inconclusive += 1;
        }
    }
    Ok(CoverReport {
        count: chosen.len(),
        centers: chosen.into_iter().map(|c| c.2).collect(),
        grid_points: scored.len(),
        covered_fraction: covered as f64 / scored.len() as f64,
        inconclusive,
    })
}
