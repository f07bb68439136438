//! Scene files: a pair of maps plus optional parameters for the
//! subcommands. Exact numbers are written as strings (`"3/4"`, `"-2"`,
//! `"0.125"`); plain JSON integers and decimals are accepted too.
//!
//! Maps are either arrays of expressions or the `{nvars, components}` form.
//! Expressions use `vars` when given, otherwise `x1, …, x{n-1}, t`.

use std::path::Path;

use serde::Deserialize;
use torsion_core::geometry::{build_word_table, PolyMap, Word, WordTable};
use torsion_core::json::{components_from_json, rat_from_str, ComponentsJson};
use torsion_core::parse::parse_poly;
use torsion_core::polytope::{lambda_table, LambdaEntry, DEFAULT_TUPLE_CAP};
use torsion_core::torsion::{fields_of, TorsionContext};
use torsion_core::{Rat, RatPoly};
use torsion_numeric::verify::{BoxUnion, RatBox, StepFunction};

use crate::CliError;

pub const DEFAULT_CAP: usize = 6;

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Text(String),
    Json(serde_json::Number),
}

impl Num {
    pub fn to_rat(&self, what: &str) -> Result<Rat, CliError> {
        let s = match self {
            Num::Text(s) => s.clone(),
            Num::Json(n) => n.to_string(),
        };
        rat_from_str(&s).map_err(|e| CliError::Validation(format!("{what}: {e}")))
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum MapSpec {
    Exprs(Vec<String>),
    Json(ComponentsJson),
}

impl MapSpec {
    fn len(&self) -> usize {
        match self {
            MapSpec::Exprs(v) => v.len(),
            MapSpec::Json(j) => j.components.len(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelSpec {
    pub level: i32,
    pub boxes: Vec<Vec<[Num; 2]>>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub vars: Option<Vec<String>>,
    pub pi1: Option<MapSpec>,
    pub pi2: Option<MapSpec>,
    pub cap: Option<usize>,
    pub beta: Option<Vec<u32>>,
    #[serde(default)]
    pub tilde: bool,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    // verify
    pub domain: Option<Vec<[Num; 2]>>,
    pub e1: Option<Vec<Vec<[Num; 2]>>>,
    pub e2: Option<Vec<Vec<[Num; 2]>>>,
    pub band: Option<i32>,
    pub f1: Option<Vec<LevelSpec>>,
    pub f2: Option<Vec<LevelSpec>>,
    pub bands: Option<[i32; 2]>,
    // ccball
    pub center: Option<Vec<Num>>,
    pub words: Option<Vec<String>>,
    pub alpha: Option<[Num; 2]>,
    pub center2: Option<Vec<Num>>,
    pub words2: Option<Vec<String>>,
    pub rho: Option<Num>,
    pub delta: Option<Num>,
    pub c: Option<Num>,
    pub lo: Option<Vec<Num>>,
    pub hi: Option<Vec<Num>>,
    pub grid: Option<usize>,
    pub inflate: Option<Num>,
    // malcev
    pub x0: Option<Vec<Num>>,
}

/// Reads and deserializes a JSON file, reporting `path:line:column` on
/// schema violations.
pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::Validation(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column()))
    })
}

/// A validated scene.
pub struct Scene {
    pub file: SceneFile,
    pub vars: Vec<String>,
    pub pi1: PolyMap,
    pub pi2: PolyMap,
}

fn default_vars(n: usize) -> Vec<String> {
    let mut v: Vec<String> = (1..n).map(|i| format!("x{i}")).collect();
    v.push("t".into());
    v
}

fn build_map(spec: &MapSpec, vars: &[String], what: &str) -> Result<PolyMap, CliError> {
    let comps: Vec<RatPoly> = match spec {
        MapSpec::Exprs(v) => {
            let names: Vec<&str> = vars.iter().map(String::as_str).collect();
            v.iter()
                .enumerate()
                .map(|(i, s)| parse_poly(s, &names).map_err(|e| CliError::Validation(format!("{what}[{i}]: {e}"))))
                .collect::<Result<_, _>>()?
        }
        MapSpec::Json(j) => components_from_json(j).map_err(|e| CliError::Validation(format!("{what}: {e}")))?,
    };
    PolyMap::new(comps).map_err(|e| CliError::Validation(format!("{what}: {e}")))
}

impl Scene {
    pub fn load(file: SceneFile) -> Result<Self, CliError> {
        let (Some(s1), Some(s2)) = (&file.pi1, &file.pi2) else {
            return Err(CliError::Validation("scene needs both pi1 and pi2".into()));
        };
        let n = s1.len() + 1;
        let vars = match (&file.vars, s1) {
            (Some(v), _) => v.clone(),
            (None, MapSpec::Json(j)) => (1..=j.nvars).map(|i| format!("x{i}")).collect(),
            (None, _) => default_vars(n),
        };
        if vars.len() != n {
            return Err(CliError::Validation(format!(
                "vars: {} names for maps with {} components (need {n})",
                vars.len(),
                s1.len()
            )));
        }
        let pi1 = build_map(s1, &vars, "pi1")?;
        let pi2 = build_map(s2, &vars, "pi2")?;
        if pi1.source_dim() != pi2.source_dim() {
            return Err(CliError::Validation("pi1 and pi2 live on different spaces".into()));
        }
        Ok(Scene { file, vars, pi1, pi2 })
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    pub fn cap(&self) -> usize {
        self.file.cap.unwrap_or(DEFAULT_CAP)
    }

    pub fn table(&self) -> Result<WordTable, CliError> {
        let (x1, x2) = fields_of(&self.pi1, &self.pi2);
        Ok(build_word_table(&x1, &x2, self.cap())?)
    }

    pub fn context(&self) -> Result<(TorsionContext, Vec<LambdaEntry>), CliError> {
        let table = self.table()?;
        let lam = lambda_table(&table, DEFAULT_TUPLE_CAP)?;
        Ok((TorsionContext::new(table), lam))
    }

    pub fn show(&self, p: &RatPoly) -> String {
        p.display_with(&self.vars).to_string()
    }

    pub fn point(&self, v: &[Num], what: &str) -> Result<Vec<Rat>, CliError> {
        if v.len() != self.dim() {
            return Err(CliError::Validation(format!("{what}: expected {} coordinates, got {}", self.dim(), v.len())));
        }
        v.iter().map(|x| x.to_rat(what)).collect()
    }

    pub fn rat_box(&self, b: &[[Num; 2]], dim: usize, what: &str) -> Result<RatBox, CliError> {
        if b.len() != dim {
            return Err(CliError::Validation(format!("{what}: expected {dim} sides, got {}", b.len())));
        }
        b.iter().map(|[lo, hi]| Ok((lo.to_rat(what)?, hi.to_rat(what)?))).collect()
    }

    fn cube(dim: usize) -> RatBox {
        vec![(Rat::from_integer((-1).into()), Rat::from_integer(1.into())); dim]
    }

    /// The integration domain, `[-1,1]^n` by default.
    pub fn domain(&self) -> Result<RatBox, CliError> {
        match &self.file.domain {
            Some(b) => self.rat_box(b, self.dim(), "domain"),
            None => Ok(Self::cube(self.dim())),
        }
    }

    /// `E_j`, `[-1,1]^{n-1}` by default.
    pub fn target_set(&self, j: u8) -> Result<BoxUnion, CliError> {
        let spec = if j == 1 { &self.file.e1 } else { &self.file.e2 };
        let m = self.dim() - 1;
        let boxes = match spec {
            Some(bs) => bs.iter().map(|b| self.rat_box(b, m, &format!("e{j}"))).collect::<Result<Vec<_>, _>>()?,
            None => vec![Self::cube(m)],
        };
        Ok(BoxUnion::new(m, boxes)?)
    }

    /// `f_j`, the indicator of `E_j` by default.
    pub fn step_function(&self, j: u8) -> Result<StepFunction, CliError> {
        let spec = if j == 1 { &self.file.f1 } else { &self.file.f2 };
        let m = self.dim() - 1;
        match spec {
            None => Ok(StepFunction::indicator(self.target_set(j)?)),
            Some(levels) => {
                let mut out = Vec::with_capacity(levels.len());
                for l in levels {
                    let boxes = l
                        .boxes
                        .iter()
                        .map(|b| self.rat_box(b, m, &format!("f{j}")))
                        .collect::<Result<Vec<_>, _>>()?;
                    out.push((l.level, BoxUnion::new(m, boxes)?));
                }
                Ok(StepFunction::new(out)?)
            }
        }
    }

    pub fn words(&self, w: &Option<Vec<String>>, what: &str) -> Result<Vec<Word>, CliError> {
        let w = w.as_ref().ok_or_else(|| CliError::Validation(format!("scene needs {what}")))?;
        w.iter()
            .map(|s| s.parse::<Word>().map_err(|e| CliError::Validation(format!("{what}: {e}"))))
            .collect()
    }
}

pub fn load_scene(path: &Path) -> Result<Scene, CliError> {
    Scene::load(read_json(path)?)
}

/// A scene assembled from separate map files.
pub fn load_maps(pi1: &Path, pi2: &Path) -> Result<Scene, CliError> {
    let file = SceneFile {
        pi1: Some(read_json(pi1)?),
        pi2: Some(read_json(pi2)?),
        ..SceneFile::default()
    };
    Scene::load(file)
}

/// `"1,-2,3/4"` as rationals.
pub fn parse_rat_list(s: &str, what: &str) -> Result<Vec<Rat>, CliError> {
    s.split(',')
        .map(|p| rat_from_str(p).map_err(|e| CliError::Validation(format!("{what}: {e}"))))
        .collect()
}
