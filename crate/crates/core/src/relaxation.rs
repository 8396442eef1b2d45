//! Max-relaxation for Barabanov norms, the one-step extremal operator, the
//! seeded monotone Barabanov iteration and the extremal-norm constructor
//! built from a known growth bound.
//!
//! Norms are represented by their unit balls. For a ball `S` the pulled-back
//! set `Q = {x : maxᵢ ‖Aᵢx‖_S ≤ 1}` is the strip intersection with rows
//! `Aᵢᵀaⱼ` over the edge normals `aⱼ` of `S`, so singular members need no
//! special treatment.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{check_irreducible, for_each_product, Irreducibility, Mat2, MatrixSet, Vec2};
use crate::polygeom::{SymPolygon, DEFAULT_PRUNE_EPS};

/// Inclusion checks in the seeded iterations accept ratios up to `1 + this`.
pub const INCLUSION_SLACK: f64 = 1e-9;

/// Seeded iterations stop with [`Termination::Diverged`] when the diameter
/// leaves `[COLLAPSE_FLOOR, 1/COLLAPSE_FLOOR]` relative to the seed.
const COLLAPSE_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AveragingRule {
    #[serde(alias = "arith")]
    Arithmetic,
    #[default]
    #[serde(alias = "geom")]
    Geometric,
    #[serde(alias = "harm")]
    Harmonic,
}

impl AveragingRule {
    pub fn apply(self, t: f64, s: f64) -> Result<f64> {
        averaging(self, t, s)
    }
}

impl std::str::FromStr for AveragingRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "arithmetic" | "arith" => Ok(Self::Arithmetic),
            "geometric" | "geom" => Ok(Self::Geometric),
            "harmonic" | "harm" => Ok(Self::Harmonic),
            other => Err(Error::InvalidInput(format!("unknown averaging rule {other:?}"))),
        }
    }
}

pub fn averaging(rule: AveragingRule, t: f64, s: f64) -> Result<f64> {
    if !(t > 0.0 && s > 0.0 && t.is_finite() && s.is_finite()) {
        return Err(Error::InvalidInput(format!("averaging needs positive finite arguments, got ({t}, {s})")));
    }
    if t == s {
        return Ok(t);
    }
    let g = match rule {
        AveragingRule::Arithmetic => 0.5 * t + 0.5 * s,
        AveragingRule::Geometric => (t.sqrt()) * (s.sqrt()),
        AveragingRule::Harmonic => 2.0 / (1.0 / t + 1.0 / s),
    };
    // rounding may land on an endpoint when t and s are adjacent floats
    Ok(g.clamp(t.min(s), t.max(s)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub e: Vec2,
    pub prune_eps: f64,
    pub rule: AveragingRule,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 5000, e: Vec2::new(1.0, 0.0), prune_eps: DEFAULT_PRUNE_EPS, rule: AveragingRule::Geometric }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidInput(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidInput("max_iter must be at least 1".into()));
        }
        if !self.e.is_finite() || self.e == Vec2::ZERO {
            return Err(Error::InvalidInput("calibration vector e must be nonzero".into()));
        }
        if !(self.prune_eps >= 0.0 && self.prune_eps.is_finite()) {
            return Err(Error::InvalidInput(format!("prune_eps must be nonnegative, got {}", self.prune_eps)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub n: usize,
    pub rho_lo: f64,
    pub rho_hi: f64,
    pub gamma: f64,
    pub vertices: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundTrace {
    rows: Vec<TraceRow>,
}

impl BoundTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, row: TraceRow) {
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Row indices where the lower bound drops, the upper bound rises, or the
    /// bracket inverts by more than `slack`.
    pub fn monotonicity_violations(&self, slack: f64) -> Vec<usize> {
        let mut bad = Vec::new();
        for (i, r) in self.rows.iter().enumerate() {
            let inverted = r.rho_lo > r.rho_hi + slack;
            let moved = i > 0 && {
                let p = &self.rows[i - 1];
                r.rho_lo < p.rho_lo - slack || r.rho_hi > p.rho_hi + slack
            };
            if inverted || moved {
                bad.push(i);
            }
        }
        bad
    }

    pub fn is_monotone(&self, slack: f64) -> bool {
        self.monotonicity_violations(slack).is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64, slack: f64) -> bool {
        self.lo - slack <= x && x <= self.hi + slack
    }

    fn is_narrow(&self, tol: f64) -> bool {
        self.width() <= tol * self.hi.max(1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIter,
    /// The body blew up or collapsed numerically.
    Diverged,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub body: SymPolygon,
    pub bracket: Bracket,
    pub trace: BoundTrace,
    pub residual: f64,
    pub termination: Termination,
    pub iterations: usize,
    pub irreducibility: Irreducibility,
}

impl RunResult {
    /// True when the irreducibility test could not decide, so convergence
    /// claims are not backed by theory.
    pub fn irreducibility_warning(&self) -> bool {
        matches!(self.irreducibility, Irreducibility::Inconclusive)
    }
}

/// Bounds of one max-relaxation step together with the pulled-back ball `Q`.
#[derive(Clone, Debug)]
pub struct MrBounds {
    pub lo: f64,
    pub hi: f64,
    pub q: SymPolygon,
}

/// Direction in which the pulled-back strips fail to bound anything.
fn unbounded_direction(rows: &[Vec2]) -> Vec2 {
    rows.iter()
        .copied()
        .max_by(|a, b| a.norm_sq().total_cmp(&b.norm_sq()))
        .filter(|r| r.norm_sq() > 0.0)
        .map(|r| {
            let p = r.perp();
            p * (1.0 / p.norm())
        })
        .unwrap_or(Vec2::new(1.0, 0.0))
}

/// `{x : maxᵢ ‖Aᵢx‖_S ≤ 1}`.
pub fn pull_back(s: &SymPolygon, set: &MatrixSet) -> Result<SymPolygon> {
    let rows: Vec<Vec2> = set
        .transposes()
        .iter()
        .flat_map(|t| s.constraints().into_iter().map(move |h| t.apply(h.normal)))
        .collect();
    SymPolygon::from_strips(&rows).map_err(|e| match e {
        Error::DegenerateBody => Error::Reducible { witness: unbounded_direction(&rows) },
        other => other,
    })
}

pub fn mr_bounds(s: &SymPolygon, set: &MatrixSet) -> Result<MrBounds> {
    let q = pull_back(s, set)?;
    let hi = s.outer_ratio(&q);
    let lo = 1.0 / q.outer_ratio(s);
    Ok(MrBounds { lo: lo.min(hi), hi, q })
}

fn mr_update(s: &SymPolygon, b: &MrBounds, cfg: &RunConfig) -> Result<(SymPolygon, f64)> {
    let gamma = averaging(cfg.rule, b.lo, b.hi)?;
    let inv = 1.0 / gamma;
    let next = s.clip_rows(b.q.normals()[..b.q.len() / 2].iter().map(|&a| a * inv))?;
    Ok((next.calibrate_to_boundary(cfg.e)?.prune(cfg.prune_eps), gamma))
}

/// One max-relaxation step: `S′ = S ∩ γQ`, calibrated so that `‖e‖ = 1`,
/// then pruned. The row describes the bounds of the input ball.
pub fn mr_step(s: &SymPolygon, set: &MatrixSet, cfg: &RunConfig) -> Result<(SymPolygon, TraceRow)> {
    let b = mr_bounds(s, set)?;
    let (next, gamma) = mr_update(s, &b, cfg)?;
    Ok((next, TraceRow { n: 0, rho_lo: b.lo, rho_hi: b.hi, gamma, vertices: s.len() }))
}

/// `maxᵢ ‖Aᵢx‖_S / ‖x‖_S`.
pub fn growth_ratio(s: &SymPolygon, set: &MatrixSet, x: Vec2) -> f64 {
    let num = set.members().iter().map(|a| s.minkowski_norm(a.apply(x))).fold(0.0, f64::max);
    num / s.minkowski_norm(x)
}

/// Relative deviation from the Barabanov identity
/// `maxᵢ ‖Aᵢx‖ = ρ̂‖x‖`, taken over the vertices of `S` and of its
/// pull-back `Q` (the extreme points of the ratio's level sets).
pub fn barabanov_residual(s: &SymPolygon, set: &MatrixSet, rho_hat: f64) -> Result<f64> {
    let q = pull_back(s, set)?;
    let worst = s
        .half_vertices()
        .iter()
        .chain(q.half_vertices())
        .map(|&v| (growth_ratio(s, set, v) - rho_hat).abs())
        .fold(0.0, f64::max);
    Ok(worst / rho_hat)
}

fn require_irreducible(set: &MatrixSet) -> Result<Irreducibility> {
    match check_irreducible(set) {
        Irreducibility::Reducible { witness } => Err(Error::Reducible { witness }),
        verdict => Ok(verdict),
    }
}

pub fn run_max_relaxation(set: &MatrixSet, cfg: &RunConfig, s0: Option<&SymPolygon>) -> Result<RunResult> {
    cfg.validate()?;
    let irreducibility = require_irreducible(set)?;
    let mut s = s0.cloned().unwrap_or_else(SymPolygon::unit_square).calibrate_to_boundary(cfg.e)?;
    let mut trace = BoundTrace::new();
    let mut n = 0;
    loop {
        let b = mr_bounds(&s, set)?;
        let bracket = Bracket { lo: b.lo, hi: b.hi };
        let (termination, gamma) = if bracket.is_narrow(cfg.tol) {
            (Some(Termination::Converged), averaging(cfg.rule, b.lo, b.hi)?)
        } else if n >= cfg.max_iter {
            (Some(Termination::MaxIter), averaging(cfg.rule, b.lo, b.hi)?)
        } else {
            (None, 0.0)
        };
        if let Some(termination) = termination {
            trace.push(TraceRow { n, rho_lo: b.lo, rho_hi: b.hi, gamma, vertices: s.len() });
            let residual = barabanov_residual(&s, set, bracket.midpoint())?;
            return Ok(RunResult { body: s, bracket, trace, residual, termination, iterations: n, irreducibility });
        }
        let (next, gamma) = mr_update(&s, &b, cfg)?;
        trace.push(TraceRow { n, rho_lo: b.lo, rho_hi: b.hi, gamma, vertices: s.len() });
        s = next;
        n += 1;
    }
}

/// Ball of `‖x‖₀ = ρ⁻¹ maxᵢ ‖Aᵢx‖`, i.e. `ρ·Q`.
pub fn ext_one_step(s: &SymPolygon, set: &MatrixSet, rho: f64) -> Result<SymPolygon> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidInput(format!("rho must be positive, got {rho}")));
    }
    Ok(pull_back(s, set)?.scaled(rho))
}

/// Largest `‖Aᵢv‖_S / ρ` over members and vertices, i.e. the smallest `t`
/// with `AᵢS ⊆ tρS` for all `i`.
pub(crate) fn invariance_ratio(s: &SymPolygon, set: &MatrixSet, rho: f64) -> f64 {
    set.members()
        .iter()
        .flat_map(|a| s.half_vertices().iter().map(move |&v| s.minkowski_norm(a.apply(v))))
        .fold(0.0, f64::max)
        / rho
}

fn check_seed(rho: f64, cfg: &RunConfig) -> Result<()> {
    cfg.validate()?;
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidInput(format!("rho must be positive, got {rho}")));
    }
    Ok(())
}

/// Iterates `Sₙ₊₁ = ρ·Qₙ` from an extremal ball. The balls grow
/// monotonically; a step that shrinks one by more than the inclusion slack
/// is reported as [`Error::NotExtremal`].
pub fn seeded_bar_iteration(s0: &SymPolygon, set: &MatrixSet, rho: f64, cfg: &RunConfig) -> Result<RunResult> {
    check_seed(rho, cfg)?;
    // the seed supplies boundedness, so reducible sets are accepted here
    let irreducibility = check_irreducible(set);
    let ratio = invariance_ratio(s0, set, rho);
    if ratio > 1.0 + INCLUSION_SLACK {
        return Err(Error::NotExtremal { step: 0, ratio });
    }
    let d0 = s0.diameter();
    let mut s = s0.clone();
    let mut trace = BoundTrace::new();
    let mut n = 0;
    let termination = loop {
        let b = mr_bounds(&s, set)?;
        trace.push(TraceRow { n, rho_lo: b.lo, rho_hi: b.hi, gamma: rho, vertices: s.len() });
        if n >= cfg.max_iter {
            break Termination::MaxIter;
        }
        let next = b.q.scaled(rho).prune(cfg.prune_eps);
        n += 1;
        let ratio = s.outer_ratio(&next);
        if ratio > 1.0 + INCLUSION_SLACK {
            return Err(Error::NotExtremal { step: n, ratio });
        }
        let d = next.diameter();
        if !(d.is_finite() && d <= d0 / COLLAPSE_FLOOR) {
            s = next;
            break Termination::Diverged;
        }
        let gap = next.hausdorff(&s);
        s = next;
        if gap <= cfg.tol * d {
            break Termination::Converged;
        }
    };
    let b = mr_bounds(&s, set)?;
    if termination == Termination::Converged {
        trace.push(TraceRow { n, rho_lo: b.lo, rho_hi: b.hi, gamma: rho, vertices: s.len() });
    }
    let residual = barabanov_residual(&s, set, rho)?;
    Ok(RunResult {
        body: s,
        bracket: Bracket { lo: b.lo, hi: b.hi },
        trace,
        residual,
        termination,
        iterations: n,
        irreducibility,
    })
}

/// A vertex where the extremal inequality failed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LmainViolation {
    pub vertex: Vec2,
    /// `maxᵢ ‖Aᵢv‖ₙ / (κ‖v‖ₙ)`.
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct LmainNorm {
    pub body: SymPolygon,
    /// Largest `maxᵢ ‖Aᵢv‖ₙ / (κ‖v‖ₙ)` over the vertices.
    pub max_ratio: f64,
    pub violations: Vec<LmainViolation>,
}

impl LmainNorm {
    pub fn is_extremal(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Ball of `‖x‖ₙ = max_{0≤k<n} κ⁻ᵏ max_{|σ|=k} ‖A_σ x‖` over the base norm.
///
/// When every product of length `n` has base norm at most `κⁿ` the result
/// satisfies `maxᵢ ‖Aᵢx‖ₙ ≤ κ‖x‖ₙ`; this is verified on every vertex and
/// failures are listed rather than raised.
pub fn build_lmain_norm(set: &MatrixSet, kappa: f64, n: usize, base: &SymPolygon) -> Result<LmainNorm> {
    if n == 0 {
        return Err(Error::InvalidInput("order n must be at least 1".into()));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidInput(format!("kappa must be positive, got {kappa}")));
    }
    let base_rows: Vec<Vec2> = base.constraints().into_iter().map(|h| h.normal).collect();
    let mut rows = Vec::new();
    for k in 1..n {
        let inv = kappa.powi(-(k as i32));
        for_each_product(set, k, |_, p: &Mat2| {
            let t = p.transpose();
            rows.extend(base_rows.iter().map(|&a| t.apply(a) * inv));
            Ok(())
        })?;
    }
    let body = if rows.is_empty() { base.clone() } else { base.clip_rows(rows)? };
    let mut violations = Vec::new();
    let mut max_ratio: f64 = 0.0;
    for &v in body.half_vertices() {
        let ratio = growth_ratio(&body, set, v) / kappa;
        max_ratio = max_ratio.max(ratio);
        if ratio > 1.0 + INCLUSION_SLACK {
            violations.push(LmainViolation { vertex: v, ratio });
        }
    }
    Ok(LmainNorm { body, max_ratio, violations })
}
