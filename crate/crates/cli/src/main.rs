//! `torsion-lab`: JSON front end for the torsion toolkit.
//!
//! Exit codes: 0 on success, 2 on invalid input, 3 when a numeric check
//! was inconclusive (the report is still written). `TORSIONLAB_THREADS`
//! sets the worker count; reports do not depend on it.

mod commands;
mod scene;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;
use torsion_core::{GeometryError, NilpotentError, PolyError, PolytopeError, TorsionError};
use torsion_numeric::polyalg::RefineParams;
use torsion_numeric::NumericError;

use commands::{BallCheck, Kind, Report, RunOpts};
use scene::{load_maps, load_scene, parse_rat_list, Scene};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) | CliError::Io(_) => 2,
            CliError::Inconclusive(_) => 3,
        }
    }
}

impl From<NumericError> for CliError {
    fn from(e: NumericError) -> Self {
        match e {
            NumericError::RootIsolationFailure(_) => CliError::Inconclusive(e.to_string()),
            NumericError::Geometry(g) => g.into(),
            NumericError::Nilpotent(n) => n.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::NonTerminatingSeries { .. } | GeometryError::CapTooSmall { .. } => CliError::Inconclusive(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<NilpotentError> for CliError {
    fn from(e: NilpotentError) -> Self {
        match e {
            NilpotentError::Inconsistent(_) => CliError::Inconclusive(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<PolyError> for CliError {
    fn from(e: PolyError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<TorsionError> for CliError {
    fn from(e: TorsionError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<PolytopeError> for CliError {
    fn from(e: PolytopeError) -> Self {
        CliError::Validation(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "torsion-lab", version, about = "Torsion weights, polytopes, CC balls and inequality checks for polynomial maps")]
struct Cli {
    /// Seed for quasi-Monte Carlo scrambling.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Sample budget for sampling commands.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args, Debug)]
struct SceneArgs {
    /// Scene file with pi1, pi2 and parameters.
    #[arg(long, conflicts_with_all = ["pi1", "pi2"])]
    scene: Option<PathBuf>,
    /// First map as a JSON file (used with --pi2).
    #[arg(long, requires = "pi2")]
    pi1: Option<PathBuf>,
    #[arg(long, requires = "pi1")]
    pi2: Option<PathBuf>,
    /// Maximum bracket word length.
    #[arg(long)]
    cap: Option<usize>,
}

impl SceneArgs {
    fn load(&self) -> Result<Scene, CliError> {
        let mut s = match (&self.scene, &self.pi1, &self.pi2) {
            (Some(p), _, _) => load_scene(p)?,
            (None, Some(a), Some(b)) => load_maps(a, b)?,
            _ => return Err(CliError::Validation("give --scene or both --pi1 and --pi2".into())),
        };
        if self.cap.is_some() {
            s.file.cap = self.cap;
        }
        Ok(s)
    }
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Fiber fields and the table of bracket words.
    Fields(SceneArgs),
    /// Torsion profiles J_beta with b, p and the weight exponent.
    Torsion {
        #[command(flatten)]
        scene: SceneArgs,
        /// Multiindex such as 0,1,0. Without it every nonzero profile is listed.
        #[arg(long, value_delimiter = ',')]
        beta: Option<Vec<u32>>,
        /// Use the alternate flow composition starting with X2.
        #[arg(long)]
        tilde: bool,
        /// Degree budget for the full listing.
        #[arg(long)]
        budget: Option<u32>,
    },
    /// Newton polytope of the lambda table, with weights at extreme points.
    Polytope {
        #[command(flatten)]
        scene: SceneArgs,
        /// Localize at a point, e.g. 0,1/2,-1.
        #[arg(long)]
        at: Option<String>,
    },
    /// Sample a Carnot-Caratheodory ball, or run a doubling/cover check.
    Ccball {
        /// Scene with center, words, alpha (and rho, delta, c, ... for checks).
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_enum)]
        check: Option<BallCheck>,
    },
    /// Abstract nilpotent algebra, Malcev group law and covering map.
    Malcev {
        #[command(flatten)]
        scene: SceneArgs,
        /// Base point, e.g. 0,0,0.
        #[arg(long)]
        x0: Option<String>,
    },
    /// One-variable polynomial algorithms.
    #[command(subcommand)]
    Polyalg(PolyalgCmd),
    /// Numerical inequality checks.
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Subcommand, Debug)]
enum PolyalgCmd {
    /// Cover the line by pieces with one dominant Taylor term.
    Monomialize {
        /// Polynomial in t, or a .json file holding one. Repeatable.
        #[arg(long, required = true)]
        poly: Vec<String>,
        #[arg(long, default_value = "1/10")]
        eps: String,
        /// Treat the polynomials as components of one curve.
        #[arg(long)]
        curve: bool,
        /// Sample points checked per piece.
        #[arg(long, default_value_t = 64)]
        check_samples: usize,
    },
    /// Nested interval refinement of a finite union of intervals.
    Refine {
        /// JSON list of intervals, e.g. '[[0,"1/1000"],["999/1000",1]]'.
        #[arg(long)]
        set: String,
        #[arg(long = "N", default_value_t = 1)]
        n: usize,
        #[arg(long, default_value = "1/2")]
        c: String,
        #[arg(long, default_value = "1/32")]
        c_prime: String,
    },
    /// Sublevel measures |{|P| < eps ||P||}| on [-1,1]^d over a dyadic eps sweep.
    Sublevel {
        #[arg(long)]
        poly: String,
        #[arg(long, default_value = "t")]
        vars: String,
        #[arg(long, default_value_t = 12)]
        levels: u32,
    },
    /// Decide t^k <= sum a_n t^n on t > 0 and name the responsible terms.
    Extract {
        /// Coefficients a_0,a_1,... (nonnegative).
        #[arg(long)]
        coeffs: String,
        #[arg(long)]
        k: usize,
    },
    /// Count integers k with |p1| ~ 2^{a1 k} and |p2| ~ 2^{-a2 k} simultaneously.
    Scales {
        #[arg(long)]
        p1: String,
        #[arg(long)]
        p2: String,
        #[arg(long, default_value_t = 1)]
        a1: u32,
        #[arg(long, default_value_t = 1)]
        a2: u32,
        #[arg(long, default_value = "-20,20", allow_hyphen_values = true)]
        range: String,
    },
}

#[derive(Subcommand, Debug)]
enum VerifyCmd {
    /// Restricted weak-type ratio on boxes.
    Rwt(SceneArgs),
    /// Weighted bilinear form against step functions.
    Strong(SceneArgs),
    /// Contributions of dyadic torsion bands.
    Scales(SceneArgs),
    /// Truncated ratios for the two-dimensional example pi2 = x2^k.
    Counterexample2d {
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, default_value_t = 16)]
        count: u32,
        #[arg(long, value_enum, default_value = "log")]
        kind: Kind,
    },
    /// Volume against fiber integrals of the fiber fields.
    Coarea(SceneArgs),
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("TORSIONLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Validation(format!("TORSIONLAB_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Validation(e.to_string()))
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    configure_threads()?;
    let opts = RunOpts {
        seed: cli.seed,
        samples: cli.samples,
    };
    match &cli.cmd {
        Cmd::Fields(s) => commands::fields(&s.load()?),
        Cmd::Torsion { scene, beta, tilde, budget } => commands::torsion(&scene.load()?, beta.clone(), *tilde, *budget),
        Cmd::Polytope { scene, at } => {
            let at = at.as_deref().map(|a| parse_rat_list(a, "--at")).transpose()?;
            commands::polytope(&scene.load()?, at)
        }
        Cmd::Ccball { spec, check } => commands::ccball(&load_scene(spec)?, *check, opts),
        Cmd::Malcev { scene, x0 } => {
            let x0 = x0.as_deref().map(|a| parse_rat_list(a, "--x0")).transpose()?;
            commands::malcev(&scene.load()?, x0)
        }
        Cmd::Polyalg(p) => match p {
            PolyalgCmd::Monomialize { poly, eps, curve, check_samples } => {
                commands::monomialize_cmd(poly, eps, *curve, *check_samples)
            }
            PolyalgCmd::Refine { set, n, c, c_prime } => {
                let params = RefineParams {
                    c: parse_rat_list(c, "--c")?.remove(0),
                    c_prime: parse_rat_list(c_prime, "--c-prime")?.remove(0),
                    ..RefineParams::default()
                };
                commands::refine_cmd(set, *n, params)
            }
            PolyalgCmd::Sublevel { poly, vars, levels } => commands::sublevel_cmd(poly, vars, *levels, opts),
            PolyalgCmd::Extract { coeffs, k } => commands::extract_cmd(coeffs, *k),
            PolyalgCmd::Scales { p1, p2, a1, a2, range } => {
                let r: Vec<i64> = range
                    .split(',')
                    .map(|x| x.trim().parse().map_err(|_| CliError::Validation(format!("--range: bad integer '{x}'"))))
                    .collect::<Result<_, _>>()?;
                let [lo, hi] = r[..] else {
                    return Err(CliError::Validation("--range needs two integers".into()));
                };
                commands::scales_cmd(p1, p2, (*a1, *a2), (lo, hi))
            }
        },
        Cmd::Verify(v) => match v {
            VerifyCmd::Rwt(s) => commands::verify_rwt(&s.load()?, opts),
            VerifyCmd::Strong(s) => commands::verify_strong(&s.load()?, opts),
            VerifyCmd::Scales(s) => commands::verify_scales(&s.load()?, opts),
            VerifyCmd::Counterexample2d { k, count, kind } => commands::verify_counterexample(*k, *count, *kind),
            VerifyCmd::Coarea(s) => commands::verify_coarea(&s.load()?, opts),
        },
    }
}

fn emit(cli: &Cli, report: &Report) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(&report.value).expect("report serializes");
    text.push('\n');
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|r| {
        emit(&cli, &r)?;
        match r.inconclusive {
            Some(m) => Err(CliError::Inconclusive(m)),
            None => Ok(()),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("torsion-lab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
