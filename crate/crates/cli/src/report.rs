use barnorm::matcore::{ExactRadius, Irreducibility};
use barnorm::polygeom::SymPolygon;
use barnorm::relaxation::{Bracket, BoundTrace, Termination};
use barnorm::Vec2;
use serde::{Deserialize, Serialize};

use crate::problem::Problem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Converged,
    Exact,
    MaxIter,
    Diverged,
    ReducibleInput,
}

impl From<Termination> for Outcome {
    fn from(t: Termination) -> Self {
        match t {
            Termination::Converged => Outcome::Converged,
            Termination::MaxIter => Outcome::MaxIter,
            Termination::Diverged => Outcome::Diverged,
        }
    }
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Converged | Outcome::Exact => 0,
            Outcome::MaxIter | Outcome::Diverged => 2,
            Outcome::ReducibleInput => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BodyKind {
    /// Unit ball of a Barabanov norm of the input set.
    BarabanovBall,
    /// Invariant body `ρM = conv(⋃ AᵢM)` of the input set.
    DkBody,
    /// Unit ball of an extremal (not necessarily Barabanov) norm.
    ExtremalBall,
    /// Polar of a DK-body: a Barabanov ball of the transposed set.
    TransposeBarabanovBall,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BodyReport {
    pub kind: BodyKind,
    pub vertices: Vec<Vec2>,
}

impl BodyReport {
    pub fn new(kind: BodyKind, body: &SymPolygon) -> Self {
        Self { kind, vertices: body.vertices().to_vec() }
    }

    pub fn polygon(&self) -> barnorm::Result<SymPolygon> {
        SymPolygon::from_vertices(&self.vertices)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub barabanov: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dk: Option<f64>,
    /// Largest `maxᵢ ‖Aᵢv‖ / (κ‖v‖)` of an extremal-norm construction.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extremal_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub config: serde_json::Value,
}

impl Provenance {
    pub fn new(problem: &Problem) -> Self {
        Self {
            tool: "barnorm".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config: serde_json::to_value(problem).expect("problem serializes"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub algorithm: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracket: Option<Bracket>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactRadius>,
    pub residuals: Residuals,
    pub iterations: usize,
    pub termination: Outcome,
    pub irreducibility: Irreducibility,
    pub irreducibility_warning: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub body: Option<BodyReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_bodies: Vec<BodyReport>,
    pub provenance: Provenance,
    /// Bound history of the run that produced `body`; written as CSV, not JSON.
    #[serde(skip)]
    pub trace: Option<BoundTrace>,
}

impl Report {
    pub fn exit_code(&self) -> u8 {
        self.termination.exit_code()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn summary(&self) -> String {
        let mut lines = vec![format!("algorithm: {}", self.algorithm), format!("termination: {:?}", self.termination)];
        if let Some(x) = &self.exact {
            lines.push(format!("exact rho: {} (member {})", x.rho, x.witness));
        }
        if let Some(b) = &self.bracket {
            lines.push(format!("bracket: [{:.12}, {:.12}] width {:.3e}", b.lo, b.hi, b.width()));
        }
        if let Irreducibility::Reducible { witness } = self.irreducibility {
            lines.push(format!("reducible: common invariant line along ({:.6}, {:.6})", witness.x, witness.y));
        }
        if self.irreducibility_warning {
            lines.push("warning: irreducibility test inconclusive".into());
        }
        lines.push(format!("iterations: {}", self.iterations));
        lines.join("\n")
    }
}
