use serde_json::{json, Value};
use torsion_core::geometry::{nilpotency_step, Nilpotency};
use torsion_core::json::rat_to_string;
use torsion_core::nilpotent::{abstract_algebra, covering_map, group_law, isotropy, weak_malcev};
use torsion_core::parse::parse_poly;
use torsion_core::polytope::{extreme_and_minimal, newton_polytope, weight_spec, LambdaEntry, Polytope2D, PolytopeQuery};
use torsion_core::torsion::{TorsionProfile, DEFAULT_MAX_TERMS};
use torsion_core::{Rat, RatPoly};
use torsion_numeric::ccballs::{
    ball_sample, doubling_check, vitali_cover, Ball, BallSpec, CoverParams, DoublingParams, Verdict,
};
use torsion_numeric::polyalg::{
    check_curve, check_monomialize, curve_monomialize, extract_two_terms, intervals::refinement_json, monomialize,
    refine_interval, scale_count, sublevel_measure, IntervalSet, RefineParams, TwoTerms,
};
use torsion_numeric::qmc::Estimate;
use torsion_numeric::upoly::UPoly;
use torsion_numeric::verify::{
    bilinear_form, coarea_check, counterexample_2d, dyadic_truncations, rwt_ratio, scale_profile, RegionSpec,
    Setting, TestFunction,
};

use crate::scene::{parse_rat_list, Num, Scene};
use crate::CliError;

/// A JSON report and whether the numbers behind it were conclusive.
pub struct Report {
    pub value: Value,
    pub inconclusive: Option<String>,
}

impl Report {
    fn ok(value: Value) -> Self {
        Report {
            value,
            inconclusive: None,
        }
    }
}

/// Run settings shared by the sampling commands.
#[derive(Clone, Copy, Debug)]
pub struct RunOpts {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
}

impl RunOpts {
    pub const DEFAULT_SEED: u64 = 1;
    pub const DEFAULT_SAMPLES: usize = 1 << 16;

    fn resolve(&self, scene: Option<&Scene>) -> (u64, usize) {
        let f = scene.map(|s| &s.file);
        (
            self.seed.or(f.and_then(|f| f.seed)).unwrap_or(Self::DEFAULT_SEED),
            self.samples.or(f.and_then(|f| f.samples)).unwrap_or(Self::DEFAULT_SAMPLES),
        )
    }
}

fn rats(v: &[Rat]) -> Vec<String> {
    v.iter().map(rat_to_string).collect()
}

fn pair(p: &(Rat, Rat)) -> Value {
    json!([rat_to_string(&p.0), rat_to_string(&p.1)])
}

fn profile_json(s: &Scene, p: &TorsionProfile) -> Value {
    json!({
        "beta": p.beta,
        "tilde": p.tilde,
        "b": [p.b.0, p.b.1],
        "p": pair(&p.p),
        "J_beta": s.show(&p.j_beta),
        "rho_exponent": rat_to_string(&p.rho_exponent),
    })
}

fn nilpotency_json(n: &Nilpotency) -> Value {
    match n {
        Nilpotency::Step(s) => json!({ "step": s }),
        other => json!({ "step": null, "status": format!("{other:?}") }),
    }
}

pub fn fields(s: &Scene) -> Result<Report, CliError> {
    let table = s.table()?;
    let show = |f: &torsion_core::geometry::PolyVectorField| f.components().iter().map(|c| s.show(c)).collect::<Vec<_>>();
    let words: Vec<Value> = table
        .entries()
        .map(|(w, f)| {
            let (a, b) = w.bidegree();
            json!({ "word": w.to_string(), "bidegree": [a, b], "field": show(f) })
        })
        .collect();
    Ok(Report::ok(json!({
        "dim": s.dim(),
        "vars": s.vars,
        "cap": table.cap(),
        "x1": show(table.letter_field(1)),
        "x2": show(table.letter_field(2)),
        "nilpotency": nilpotency_json(&nilpotency_step(&table)?),
        "words": words,
    })))
}

pub fn torsion(s: &Scene, beta: Option<Vec<u32>>, tilde: bool, budget: Option<u32>) -> Result<Report, CliError> {
    let (ctx, _) = s.context()?;
    let beta = beta.or_else(|| s.file.beta.clone());
    let tilde = tilde || s.file.tilde;
    if let Some(b) = beta {
        let p = ctx.profile(&b, tilde)?;
        return Ok(Report::ok(profile_json(s, &p)));
    }
    let budget = match budget {
        Some(b) => b,
        None => ctx.default_budget()?,
    };
    let profiles: Vec<Value> = ctx
        .all_profiles(budget)?
        .iter()
        .filter(|p| !p.j_beta.is_zero())
        .map(|p| profile_json(s, p))
        .collect();
    Ok(Report::ok(json!({ "budget": budget, "profiles": profiles })))
}

fn lattice(p: &(Rat, Rat)) -> Option<(u32, u32)> {
    let int = |r: &Rat| r.is_integer().then(|| r.to_integer().to_string().parse().ok()).flatten();
    Some((int(&p.0)?, int(&p.1)?))
}

fn polytope_json(s: &Scene, poly: &Polytope2D, lam: &[LambdaEntry]) -> Result<Value, CliError> {
    if poly.is_empty() {
        return Ok(json!({ "generators": [], "extreme": [], "minimal": [], "weights": [] }));
    }
    let em = extreme_and_minimal(poly)?;
    let weights: Vec<Value> = em
        .extreme
        .iter()
        .filter_map(lattice)
        .map(|b| {
            let w = weight_spec(lam, b);
            json!({
                "b": [b.0, b.1],
                "p": pair(&w.p),
                "exponent": rat_to_string(&w.exponent),
                "summands": w.summands.iter().map(|e| json!({
                    "words": e.words.iter().map(ToString::to_string).collect::<Vec<_>>(),
                    "lambda": s.show(&e.poly),
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    Ok(json!({
        "generators": poly.generators().iter().map(pair).collect::<Vec<_>>(),
        "extreme": em.extreme.iter().map(pair).collect::<Vec<_>>(),
        "minimal": em.minimal,
        "weights": weights,
    }))
}

pub fn polytope(s: &Scene, at: Option<Vec<Rat>>) -> Result<Report, CliError> {
    let (_, lam) = s.context()?;
    let poly = match &at {
        Some(x) => {
            if x.len() != s.dim() {
                return Err(CliError::Validation(format!("--at needs {} coordinates", s.dim())));
            }
            newton_polytope(&lam, PolytopeQuery::AtPoint(x))?
        }
        None => newton_polytope(&lam, PolytopeQuery::Union)?,
    };
    let mut v = polytope_json(s, &poly, &lam)?;
    if let Some(x) = at {
        v["at"] = json!(rats(&x));
    }
    Ok(Report::ok(v))
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum BallCheck {
    Doubling,
    Cover,
}

fn rat_field(v: &Option<Num>, what: &str, default: Option<Rat>) -> Result<Rat, CliError> {
    match (v, default) {
        (Some(n), _) => n.to_rat(what),
        (None, Some(d)) => Ok(d),
        (None, None) => Err(CliError::Validation(format!("scene needs {what}"))),
    }
}

pub fn ccball(s: &Scene, check: Option<BallCheck>, opts: RunOpts) -> Result<Report, CliError> {
    let (seed, samples) = opts.resolve(Some(s));
    let (ctx, lam) = s.context()?;
    let f = &s.file;
    let one = Rat::from_integer(1.into());
    match check {
        None => {
            let center = s.point(f.center.as_deref().unwrap_or_default(), "center")?;
            let alpha = match &f.alpha {
                Some([a, b]) => (a.to_rat("alpha")?, b.to_rat("alpha")?),
                None => (one.clone(), one),
            };
            let spec = BallSpec::new(center, s.words(&f.words, "words")?, alpha)?;
            let sample = ball_sample(&Ball::new(&ctx, spec)?, samples, seed)?;
            let mut v = sample.to_json();
            v["seed"] = json!(seed);
            v["samples"] = json!(samples);
            Ok(Report::ok(v))
        }
        Some(BallCheck::Doubling) => {
            let x1 = s.point(f.center.as_deref().unwrap_or_default(), "center")?;
            let w1 = s.words(&f.words, "words")?;
            let x2 = match &f.center2 {
                Some(c) => s.point(c, "center2")?,
                None => x1.clone(),
            };
            let w2 = if f.words2.is_some() { s.words(&f.words2, "words2")? } else { w1.clone() };
            let p = DoublingParams {
                rho: rat_field(&f.rho, "rho", None)?,
                delta: rat_field(&f.delta, "delta", Some(one))?,
                c: rat_field(&f.c, "c", Some(Rat::new(1.into(), 8.into())))?,
                n_samples: samples,
                seed,
            };
            let r = doubling_check(&ctx, &lam, (&x1, &w1), (&x2, &w2), &p)?;
            let inconclusive = (r.verdict == Verdict::Inconclusive).then(|| "membership tests were inconclusive".to_string());
            let mut v = serde_json::to_value(&r).expect("plain data");
            v["seed"] = json!(seed);
            v["samples"] = json!(samples);
            Ok(Report { value: v, inconclusive })
        }
        Some(BallCheck::Cover) => {
            let lo = s.point(f.lo.as_deref().unwrap_or_default(), "lo")?;
            let hi = s.point(f.hi.as_deref().unwrap_or_default(), "hi")?;
            let p = CoverParams {
                rho: rat_field(&f.rho, "rho", None)?,
                delta: torsion_core::poly::rat_to_f64(&rat_field(&f.delta, "delta", Some(Rat::new(1.into(), 2.into())))?),
                grid: f.grid.unwrap_or(8),
                inflate: rat_field(&f.inflate, "inflate", Some(Rat::from_integer(4.into())))?,
            };
            let r = vitali_cover(&ctx, &lam, &lo, &hi, &p)?;
            let inconclusive = (r.inconclusive > 0).then(|| format!("{} grid points were inconclusive", r.inconclusive));
            Ok(Report {
                value: serde_json::to_value(&r).expect("plain data"),
                inconclusive,
            })
        }
    }
}

pub fn malcev(s: &Scene, x0: Option<Vec<Rat>>) -> Result<Report, CliError> {
    let table = s.table()?;
    let step = match nilpotency_step(&table)? {
        Nilpotency::Step(k) => k,
        other => {
            return Err(CliError::Inconclusive(format!(
                "fields are not nilpotent within cap {} ({other:?})",
                table.cap()
            )))
        }
    };
    let x0 = match (x0, &s.file.x0) {
        (Some(x), _) => x,
        (None, Some(v)) => s.point(v, "x0")?,
        (None, None) => vec![Rat::from_integer(0.into()); s.dim()],
    };
    if x0.len() != s.dim() {
        return Err(CliError::Validation(format!("x0 needs {} coordinates", s.dim())));
    }
    let alg = abstract_algebra(&table, step)?;
    let basis = weak_malcev(&alg, &isotropy(&alg, &x0)?)?;
    let law = group_law(&basis)?;
    let cov = covering_map(&alg, &x0, DEFAULT_MAX_TERMS)?;
    let big_n = law.dim;
    let law_names: Vec<String> = (1..=big_n).map(|i| format!("a{i}")).chain((1..=big_n).map(|i| format!("b{i}"))).collect();
    let show_law = |ps: &[RatPoly]| ps.iter().map(|p| p.display_with(&law_names).to_string()).collect::<Vec<_>>();
    let cov_names: Vec<String> = (1..=cov.map.first().map_or(0, RatPoly::nvars)).map(|i| format!("y{i}")).collect();
    let ok = cov.flow_equivariant && cov.deck_invariant && law.volume_preserving() && law.triangular();
    let value = json!({
        "dim": alg.dim(),
        "step": step,
        "x0": rats(&x0),
        "split": basis.split,
        "basis": basis.vectors.iter().map(|v| rats(v)).collect::<Vec<_>>(),
        "group_law": {
            "vars": law_names,
            "q": show_law(&law.q),
            "r": show_law(&law.r),
            "volume_preserving": law.volume_preserving(),
            "triangular": law.triangular(),
        },
        "covering_map": {
            "vars": cov_names,
            "map": cov.map.iter().map(|p| p.display_with(&cov_names).to_string()).collect::<Vec<_>>(),
            "isotropy_dim": cov.isotropy_dim,
            "det_at_origin": rat_to_string(&cov.det_at_origin),
            "frame_det": rat_to_string(&cov.frame_det),
            "flow_equivariant": cov.flow_equivariant,
            "deck_invariant": cov.deck_invariant,
        },
    });
    Ok(Report {
        value,
        inconclusive: (!ok).then(|| "an exact consistency check failed".to_string()),
    })
}

/// A polynomial in `t`, inline or as a JSON file holding a string.
pub fn read_upoly(src: &str) -> Result<UPoly, CliError> {
    let path = std::path::Path::new(src);
    let text = if src.ends_with(".json") && path.exists() {
        let v: Value = crate::scene::read_json(path)?;
        match v {
            Value::String(s) => s,
            Value::Object(o) => match o.get("poly") {
                Some(Value::String(s)) => s.clone(),
                _ => return Err(CliError::Validation(format!("{src}: expected {{\"poly\": \"...\"}}"))),
            },
            _ => return Err(CliError::Validation(format!("{src}: expected a polynomial string"))),
        }
    } else {
        src.to_string()
    };
    let p = parse_poly(&text, &["t"]).map_err(|e| CliError::Validation(format!("poly '{text}': {e}")))?;
    Ok(UPoly::from_ratpoly(&p)?)
}

pub fn monomialize_cmd(polys: &[String], eps: &str, curve: bool, per_piece: usize) -> Result<Report, CliError> {
    let ps = polys.iter().map(|p| read_upoly(p)).collect::<Result<Vec<_>, _>>()?;
    if ps.is_empty() {
        return Err(CliError::Validation("at least one --poly is required".into()));
    }
    let eps = parse_rat_list(eps, "eps")?.remove(0);
    let (cover, chk) = if curve {
        let c = curve_monomialize(&ps, &eps)?;
        let k = check_curve(&c, &ps, per_piece);
        (c, k)
    } else {
        let c = monomialize(&ps, &eps)?;
        let k = check_monomialize(&c, &ps, per_piece);
        (c, k)
    };
    let mut v = cover.to_json();
    v["check"] = serde_json::to_value(&chk).expect("plain data");
    Ok(Report {
        value: v,
        inconclusive: (chk.failures > 0).then(|| format!("{} sample points violate domination", chk.failures)),
    })
}

pub fn refine_cmd(set: &str, n: usize, params: RefineParams) -> Result<Report, CliError> {
    let raw: Vec<[Num; 2]> =
        serde_json::from_str(set).map_err(|e| CliError::Validation(format!("--set:{}:{}: {e}", e.line(), e.column())))?;
    let iv = raw
        .iter()
        .map(|[a, b]| Ok((a.to_rat("set")?, b.to_rat("set")?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let s = IntervalSet::new(iv)?;
    let fam = refine_interval(&s, n, &params)?;
    let last = fam.last().expect("at least one step");
    let bound = s.measure() / Rat::from_integer(4.into()).pow((n + 1) as i32);
    Ok(Report::ok(json!({
        "measure": rat_to_string(&s.measure()),
        "steps": fam.iter().map(refinement_json).collect::<Vec<_>>(),
        "final_mass": rat_to_string(&last.s_in_j),
        "mass_bound": rat_to_string(&bound),
        "bound_holds": last.s_in_j >= bound,
    })))
}

pub fn sublevel_cmd(poly: &str, vars: &str, levels: u32, opts: RunOpts) -> Result<Report, CliError> {
    let (seed, samples) = opts.resolve(None);
    let names: Vec<&str> = vars.split(',').map(str::trim).collect();
    let p = parse_poly(poly, &names).map_err(|e| CliError::Validation(format!("poly: {e}")))?;
    let eps = torsion_numeric::polyalg::dyadic_eps(levels);
    let r = sublevel_measure(&p, &eps, samples, seed)?;
    let mut v = serde_json::to_value(&r).expect("plain data");
    v["seed"] = json!(seed);
    v["samples"] = json!(samples);
    Ok(Report::ok(v))
}

pub fn extract_cmd(coeffs: &str, k: usize) -> Result<Report, CliError> {
    let a = parse_rat_list(coeffs, "coeffs")?;
    let v = match extract_two_terms(&a, k)? {
        TwoTerms::SingleTerm => json!({ "holds": true, "kind": "single_term", "index": k }),
        TwoTerms::Pair { n1, n2, strength } => {
            json!({ "holds": true, "kind": "pair", "n1": n1, "n2": n2, "strength": strength })
        }
        TwoTerms::Fail { witness } => json!({ "holds": false, "witness": rat_to_string(&witness) }),
    };
    Ok(Report::ok(v))
}

pub fn scales_cmd(p1: &str, p2: &str, a: (u32, u32), range: (i64, i64)) -> Result<Report, CliError> {
    let r = scale_count(&read_upoly(p1)?, &read_upoly(p2)?, a.0, a.1, range);
    Ok(Report::ok(serde_json::to_value(&r).expect("plain data")))
}

fn setting(s: &Scene) -> Result<Setting, CliError> {
    let (ctx, _) = s.context()?;
    let profile = match &s.file.beta {
        Some(b) => ctx.profile(b, s.file.tilde)?,
        None => ctx
            .all_profiles(ctx.default_budget()?)?
            .into_iter()
            .find(|p| !p.j_beta.is_zero())
            .ok_or_else(|| CliError::Validation("no nonvanishing torsion within the degree budget".into()))?,
    };
    Ok(Setting::new(&s.pi1, &s.pi2, profile)?)
}

/// Relative standard error above which an estimate is called inconclusive.
const MAX_REL_STDERR: f64 = 0.25;

fn estimate_verdict(e: &Estimate) -> Option<String> {
    if !e.mean.is_finite() {
        return Some("estimate is not finite".into());
    }
    (e.mean > 0.0 && e.stderr > MAX_REL_STDERR * e.mean)
        .then(|| format!("relative standard error {:.3} exceeds {MAX_REL_STDERR}", e.stderr / e.mean))
}

fn with_run(mut v: Value, seed: u64, samples: usize, inconclusive: &Option<String>) -> Value {
    v["seed"] = json!(seed);
    v["samples"] = json!(samples);
    v["verdict"] = json!(if inconclusive.is_some() { "inconclusive" } else { "ok" });
    v
}

fn profile_summary(s: &Setting) -> Value {
    json!({ "beta": s.profile.beta, "tilde": s.profile.tilde, "b": [s.profile.b.0, s.profile.b.1], "p": pair(&s.profile.p) })
}

pub fn verify_rwt(s: &Scene, opts: RunOpts) -> Result<Report, CliError> {
    let (seed, samples) = opts.resolve(Some(s));
    let st = setting(s)?;
    let region = RegionSpec {
        domain: s.domain()?,
        band: s.file.band,
        e1: s.target_set(1)?,
        e2: s.target_set(2)?,
    };
    let r = rwt_ratio(&st, &region, samples, seed)?;
    let inc = estimate_verdict(&r.omega);
    let v = json!({
        "profile": profile_summary(&st),
        "estimate": r.omega.mean,
        "stderr": r.omega.stderr,
        "e1": r.e1,
        "e2": r.e2,
        "ratio": r.ratio,
        "alpha_form": r.alpha_form,
    });
    Ok(Report {
        value: with_run(v, seed, samples, &inc),
        inconclusive: inc,
    })
}

pub fn verify_strong(s: &Scene, opts: RunOpts) -> Result<Report, CliError> {
    let (seed, samples) = opts.resolve(Some(s));
    let st = setting(s)?;
    let r = bilinear_form(&st, &s.step_function(1)?, &s.step_function(2)?, &s.domain()?, samples, seed)?;
    let inc = estimate_verdict(&r.estimate);
    let v = json!({
        "profile": profile_summary(&st),
        "estimate": r.estimate.mean,
        "stderr": r.estimate.stderr,
        "norm1": r.norm1,
        "norm2": r.norm2,
        "ratio": r.ratio,
    });
    Ok(Report {
        value: with_run(v, seed, samples, &inc),
        inconclusive: inc,
    })
}

pub fn verify_scales(s: &Scene, opts: RunOpts) -> Result<Report, CliError> {
    let (seed, samples) = opts.resolve(Some(s));
    let st = setting(s)?;
    let [m0, m1] = s.file.bands.unwrap_or([-12, 4]);
    let r = scale_profile(&st, &s.step_function(1)?, &s.step_function(2)?, &s.domain()?, (m0, m1), samples, seed)?;
    let inc = (!r.total.is_finite()).then(|| "total is not finite".to_string());
    let mut v = serde_json::to_value(&r).expect("plain data");
    v["profile"] = profile_summary(&st);
    v["estimate"] = json!(r.total);
    v["ratio"] = json!(r.total_ratio);
    Ok(Report {
        value: with_run(v, seed, samples, &inc),
        inconclusive: inc,
    })
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum Kind {
    Log,
    Indicator,
}

pub fn verify_counterexample(k: u32, count: u32, kind: Kind) -> Result<Report, CliError> {
    let kind = match kind {
        Kind::Log => TestFunction::LogSingular,
        Kind::Indicator => TestFunction::Indicator,
    };
    let rows = counterexample_2d(k, &dyadic_truncations(count), kind)?;
    let increasing = rows.windows(2).all(|w| w[1].ratio > w[0].ratio);
    let growth = match (rows.first(), rows.last()) {
        (Some(a), Some(b)) if a.ratio > 0.0 => b.ratio / a.ratio,
        _ => f64::NAN,
    };
    Ok(Report::ok(json!({
        "k": k,
        "rows": rows,
        "strictly_increasing": increasing,
        "growth": growth,
    })))
}

pub fn verify_coarea(s: &Scene, opts: RunOpts) -> Result<Report, CliError> {
    let (seed, samples) = opts.resolve(Some(s));
    let domain = s.domain()?;
    let (x1, x2) = torsion_core::torsion::fields_of(&s.pi1, &s.pi2);
    let mut out = Vec::new();
    let mut inc = None;
    for (j, x) in [(1, x1), (2, x2)] {
        let r = coarea_check(&x, &domain, samples, seed)?;
        if inc.is_none() {
            inc = estimate_verdict(&r.fiber);
        }
        out.push(json!({ "field": j, "report": r }));
    }
    let v = json!({ "fields": out });
    Ok(Report {
        value: with_run(v, seed, samples, &inc),
        inconclusive: inc,
    })
}
