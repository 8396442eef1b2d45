//! Problem files: a JSON object with a required `matrices` key.

use std::path::Path;

use barnorm::polygeom::SymPolygon;
use barnorm::relaxation::{AveragingRule, RunConfig};
use barnorm::{Mat2, MatrixSet, Vec2};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_ORDER: usize = 8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    MaxRelax,
    Chr,
    SeededBar,
    SeededDk,
    Brute,
    Lmain,
    #[default]
    Auto,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::MaxRelax => "max-relax",
            Algorithm::Chr => "chr",
            Algorithm::SeededBar => "seeded-bar",
            Algorithm::SeededDk => "seeded-dk",
            Algorithm::Brute => "brute",
            Algorithm::Lmain => "lmain",
            Algorithm::Auto => "auto",
        }
    }
}

/// A matrix written either flat (`[a, b, c, d]`, row-major) or nested
/// (`[[a, b], [c, d]]`).
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum MatrixSpec {
    Flat(Vec<f64>),
    Nested(Vec<Vec<f64>>),
}

impl MatrixSpec {
    fn to_mat2(&self, index: usize) -> Result<Mat2, CliError> {
        let dim_err = |shape: String| CliError::Schema {
            path: format!("matrices[{index}]"),
            msg: format!("expected a 2x2 matrix, got {shape}"),
        };
        let entries = match self {
            MatrixSpec::Flat(v) if v.len() == 4 => [v[0], v[1], v[2], v[3]],
            MatrixSpec::Flat(v) => return Err(dim_err(format!("{} flat entries", v.len()))),
            MatrixSpec::Nested(rows) => {
                if rows.len() != 2 || rows.iter().any(|r| r.len() != 2) {
                    let cols = rows.iter().map(|r| r.len()).max().unwrap_or(0);
                    return Err(dim_err(format!("{}x{}", rows.len(), cols)));
                }
                [rows[0][0], rows[0][1], rows[1][0], rows[1][1]]
            }
        };
        let [a, b, c, d] = entries;
        Mat2::try_new(a, b, c, d).map_err(|e| CliError::Schema { path: format!("matrices[{index}]"), msg: e.to_string() })
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    matrices: Vec<MatrixSpec>,
    #[serde(default)]
    algorithm: Option<Algorithm>,
    #[serde(default)]
    gamma: Option<AveragingRule>,
    #[serde(default)]
    tol: Option<f64>,
    #[serde(default)]
    max_iter: Option<usize>,
    #[serde(default)]
    e: Option<Vec2>,
    #[serde(default)]
    n: Option<usize>,
    #[serde(default)]
    rho: Option<f64>,
    #[serde(default)]
    seed_ball: Option<Vec<Vec2>>,
    #[serde(default)]
    prune_eps: Option<f64>,
}

/// A validated problem with defaults filled in.
#[derive(Clone, Debug, Serialize)]
pub struct Problem {
    pub matrices: Vec<Mat2>,
    pub algorithm: Algorithm,
    pub gamma: AveragingRule,
    pub tol: f64,
    pub max_iter: usize,
    pub e: Vec2,
    pub n: usize,
    pub rho: Option<f64>,
    pub prune_eps: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed_ball: Option<Vec<Vec2>>,
}

impl Problem {
    pub fn set(&self) -> Result<MatrixSet, CliError> {
        Ok(MatrixSet::new(self.matrices.clone())?)
    }

    pub fn config(&self) -> RunConfig {
        RunConfig { tol: self.tol, max_iter: self.max_iter, e: self.e, prune_eps: self.prune_eps, rule: self.gamma }
    }

    pub fn seed(&self) -> Result<Option<SymPolygon>, CliError> {
        self.seed_ball
            .as_deref()
            .map(|v| {
                SymPolygon::from_vertices(v).map_err(|e| CliError::Schema { path: "seed_ball".into(), msg: e.to_string() })
            })
            .transpose()
    }

    /// Checks the fields that command-line overrides can also touch.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |path: &str, msg: String| Err(CliError::Schema { path: path.into(), msg });
        if self.matrices.is_empty() {
            return bad("matrices", "must contain at least one matrix".into());
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad("tol", format!("must be positive, got {}", self.tol));
        }
        if self.max_iter == 0 {
            return bad("max_iter", "must be at least 1".into());
        }
        if !self.e.is_finite() || self.e == Vec2::ZERO {
            return bad("e", "must be a nonzero vector".into());
        }
        if self.n == 0 {
            return bad("n", "must be at least 1".into());
        }
        if let Some(r) = self.rho {
            if !(r > 0.0 && r.is_finite()) {
                return bad("rho", format!("must be positive, got {r}"));
            }
        }
        if !(self.prune_eps >= 0.0 && self.prune_eps.is_finite()) {
            return bad("prune_eps", format!("must be nonnegative, got {}", self.prune_eps));
        }
        self.seed()?;
        Ok(())
    }
}

pub fn parse_problem(text: &str) -> Result<Problem, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ProblemFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        CliError::Parse { path, line: inner.line(), column: inner.column(), msg: inner.to_string() }
    })?;
    let matrices = file
        .matrices
        .iter()
        .enumerate()
        .map(|(i, m)| m.to_mat2(i))
        .collect::<Result<Vec<_>, _>>()?;
    let defaults = RunConfig::default();
    let p = Problem {
        matrices,
        algorithm: file.algorithm.unwrap_or_default(),
        gamma: file.gamma.unwrap_or(defaults.rule),
        tol: file.tol.unwrap_or(defaults.tol),
        max_iter: file.max_iter.unwrap_or(defaults.max_iter),
        e: file.e.unwrap_or(defaults.e),
        n: file.n.unwrap_or(DEFAULT_ORDER),
        rho: file.rho,
        prune_eps: file.prune_eps.unwrap_or(defaults.prune_eps),
        seed_ball: file.seed_ball,
    };
    p.validate()?;
    Ok(p)
}

pub fn load_problem(path: &Path) -> Result<Problem, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| CliError::Input { path: path.to_path_buf(), source })?;
    parse_problem(&text)
}
