//! Convex-hull relaxation for Dranishnikov–Konyagin bodies, the seeded
//! monotone body iteration, and the polar bridge to Barabanov balls.
//!
//! A DK-body satisfies `ρM = conv(⋃ᵢ AᵢM)`. Images under singular members are
//! segments, which enter the hull through their endpoints.

use crate::error::{Error, Result};
use crate::matcore::{check_irreducible, Irreducibility, MatrixSet, Vec2};
use crate::polygeom::SymPolygon;
use crate::relaxation::{
    averaging, invariance_ratio, Bracket, BoundTrace, RunConfig, RunResult, Termination, TraceRow, INCLUSION_SLACK,
};

pub type DkResult = RunResult;

const COLLAPSE_FLOOR: f64 = 1e-12;

/// Bounds of one hull-relaxation step together with `P = conv(⋃ AᵢM)`.
#[derive(Clone, Debug)]
pub struct ChrBounds {
    pub lo: f64,
    pub hi: f64,
    pub p: SymPolygon,
}

fn image_points(m: &SymPolygon, set: &MatrixSet) -> Vec<Vec2> {
    set.members()
        .iter()
        .flat_map(|a| m.half_vertices().iter().map(move |&v| a.apply(v)))
        .collect()
}

/// `conv(⋃ᵢ AᵢM)`.
pub fn hull_of_images(m: &SymPolygon, set: &MatrixSet) -> Result<SymPolygon> {
    let pts = image_points(m, set);
    SymPolygon::absco_hull(&pts).map_err(|e| match e {
        Error::DegenerateBody => {
            let far = pts.iter().copied().max_by(|a, b| a.norm_sq().total_cmp(&b.norm_sq()));
            let witness = far
                .filter(|w| w.norm_sq() > 0.0)
                .map(|w| w * (1.0 / w.norm()))
                .unwrap_or(Vec2::new(1.0, 0.0));
            Error::Reducible { witness }
        }
        other => other,
    })
}

pub fn chr_bounds(m: &SymPolygon, set: &MatrixSet) -> Result<ChrBounds> {
    let p = hull_of_images(m, set)?;
    let hi = p.outer_ratio(m);
    let lo = 1.0 / m.outer_ratio(&p);
    Ok(ChrBounds { lo: lo.min(hi), hi, p })
}

fn chr_update(m: &SymPolygon, b: &ChrBounds, cfg: &RunConfig) -> Result<(SymPolygon, f64)> {
    let gamma = averaging(cfg.rule, b.lo, b.hi)?;
    let inv = 1.0 / gamma;
    let pts: Vec<Vec2> = m
        .half_vertices()
        .iter()
        .copied()
        .chain(b.p.half_vertices().iter().map(|&v| v * inv))
        .collect();
    let next = SymPolygon::absco_hull(&pts)?;
    Ok((next.calibrate_to_boundary(cfg.e)?.prune(cfg.prune_eps), gamma))
}

/// One hull-relaxation step: `M′ = conv(M ∪ γ⁻¹⋃ᵢAᵢM)`, calibrated and
/// pruned. The row describes the bounds of the input body.
pub fn chr_step(m: &SymPolygon, set: &MatrixSet, cfg: &RunConfig) -> Result<(SymPolygon, TraceRow)> {
    let b = chr_bounds(m, set)?;
    let (next, gamma) = chr_update(m, &b, cfg)?;
    Ok((next, TraceRow { n: 0, rho_lo: b.lo, rho_hi: b.hi, gamma, vertices: m.len() }))
}

/// `hausdorff(ρM, conv(⋃ᵢAᵢM)) / diameter(M)`.
pub fn residual_dk(m: &SymPolygon, set: &MatrixSet, rho: f64) -> Result<f64> {
    let p = hull_of_images(m, set)?;
    Ok(m.scaled(rho).hausdorff(&p) / m.diameter())
}

pub fn run_chr(set: &MatrixSet, cfg: &RunConfig, m0: Option<&SymPolygon>) -> Result<DkResult> {
    cfg.validate()?;
    let irreducibility = match check_irreducible(set) {
        Irreducibility::Reducible { witness } => return Err(Error::Reducible { witness }),
        verdict => verdict,
    };
    let mut m = m0.cloned().unwrap_or_else(SymPolygon::unit_square).calibrate_to_boundary(cfg.e)?;
    let mut trace = BoundTrace::new();
    let mut n = 0;
    loop {
        let b = chr_bounds(&m, set)?;
        let bracket = Bracket { lo: b.lo, hi: b.hi };
        let gamma = averaging(cfg.rule, b.lo, b.hi)?;
        let stop = if bracket.width() <= cfg.tol * bracket.hi.max(1.0) {
            Some(Termination::Converged)
        } else if n >= cfg.max_iter {
            Some(Termination::MaxIter)
        } else {
            None
        };
        if let Some(termination) = stop {
            trace.push(TraceRow { n, rho_lo: b.lo, rho_hi: b.hi, gamma, vertices: m.len() });
            let residual = m.scaled(bracket.midpoint()).hausdorff(&b.p) / m.diameter();
            return Ok(RunResult { body: m, bracket, trace, residual, termination, iterations: n, irreducibility });
        }
        let (next, gamma) = chr_update(&m, &b, cfg)?;
        trace.push(TraceRow { n, rho_lo: b.lo, rho_hi: b.hi, gamma, vertices: m.len() });
        m = next;
        n += 1;
    }
}

/// Iterates `Mₙ₊₁ = ρ⁻¹conv(⋃ᵢAᵢMₙ)` from an extremal ball. The bodies
/// shrink monotonically; a step that enlarges one by more than the inclusion
/// slack is reported as [`Error::NotExtremal`].
pub fn seeded_dk_iteration(m0: &SymPolygon, set: &MatrixSet, rho: f64, cfg: &RunConfig) -> Result<DkResult> {
    cfg.validate()?;
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidInput(format!("rho must be positive, got {rho}")));
    }
    let irreducibility = check_irreducible(set);
    let ratio = invariance_ratio(m0, set, rho);
    if ratio > 1.0 + INCLUSION_SLACK {
        return Err(Error::NotExtremal { step: 0, ratio });
    }
    let d0 = m0.diameter();
    let mut m = m0.clone();
    let mut trace = BoundTrace::new();
    let mut n = 0;
    let termination = loop {
        let b = chr_bounds(&m, set)?;
        trace.push(TraceRow { n, rho_lo: b.lo, rho_hi: b.hi, gamma: rho, vertices: m.len() });
        if n >= cfg.max_iter {
            break Termination::MaxIter;
        }
        let next = b.p.scaled(1.0 / rho).prune(cfg.prune_eps);
        n += 1;
        let ratio = next.outer_ratio(&m);
        if ratio > 1.0 + INCLUSION_SLACK {
            return Err(Error::NotExtremal { step: n, ratio });
        }
        let d = next.diameter();
        if !(d >= COLLAPSE_FLOOR * d0) {
            m = next;
            break Termination::Diverged;
        }
        let gap = next.hausdorff(&m);
        m = next;
        if gap <= cfg.tol * d {
            break Termination::Converged;
        }
    };
    let b = chr_bounds(&m, set)?;
    if termination == Termination::Converged {
        trace.push(TraceRow { n, rho_lo: b.lo, rho_hi: b.hi, gamma: rho, vertices: m.len() });
    }
    let residual = m.scaled(rho).hausdorff(&b.p) / m.diameter();
    Ok(RunResult {
        body: m,
        bracket: Bracket { lo: b.lo, hi: b.hi },
        trace,
        residual,
        termination,
        iterations: n,
        irreducibility,
    })
}

/// Polar of a Barabanov ball. A Barabanov ball of `𝒜ᵀ` maps to a DK-body
/// of `𝒜`.
pub fn bar_to_dk(s: &SymPolygon) -> SymPolygon {
    s.polar()
}

/// Polar of a DK-body. A DK-body of `𝒜` maps to a Barabanov ball of `𝒜ᵀ`.
pub fn dk_to_bar(m: &SymPolygon) -> SymPolygon {
    m.polar()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{bounds_rho_n, Mat2, NormTag};
    use crate::relaxation::run_max_relaxation;

    fn example1() -> MatrixSet {
        MatrixSet::new(vec![
            Mat2::new(0.9, 1.1, 0.0, 1.0).scale(0.576),
            Mat2::new(1.0, 0.0, 1.0, 0.9).scale(0.8),
        ])
        .unwrap()
    }

    fn example2() -> MatrixSet {
        MatrixSet::new(vec![Mat2::diag(1.1, 0.7), Mat2::new(1.0, 0.2, 0.2, 1.0)]).unwrap()
    }

    fn single(a: Mat2) -> MatrixSet {
        MatrixSet::new(vec![a]).unwrap()
    }

    #[test]
    fn chr_bounds_examples() {
        let m = SymPolygon::regular(8, 1.0, 0.2).unwrap();
        let b = chr_bounds(&m, &single(Mat2::IDENTITY)).unwrap();
        assert!((b.lo - 1.0).abs() < 1e-12 && (b.hi - 1.0).abs() < 1e-12);
        assert!(b.p.hausdorff(&m) < 1e-12);
        let b = chr_bounds(&m, &single(Mat2::IDENTITY.scale(2.0))).unwrap();
        assert!((b.lo - 2.0).abs() < 1e-12 && (b.hi - 2.0).abs() < 1e-12);
        let b = chr_bounds(&SymPolygon::unit_square(), &example1()).unwrap();
        assert!(b.lo <= 1.098668 && 1.098668 <= b.hi);
    }

    #[test]
    fn collinear_images_are_reducible() {
        let set = single(Mat2::new(1.0, 2.0, 0.5, 1.0));
        let set = MatrixSet::new(vec![set.members()[0], Mat2::new(1.0, 1.0, 0.5, 0.5)]).unwrap();
        // first member has det 0 as well: every image lies on the line through (2, 1)
        match chr_bounds(&SymPolygon::unit_square(), &set) {
            Err(Error::Reducible { witness }) => assert!(witness.cross(Vec2::new(2.0, 1.0)).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn chr_step_examples() {
        let cfg = RunConfig::default();
        let sq = SymPolygon::unit_square();
        let (next, row) = chr_step(&sq, &single(Mat2::IDENTITY.scale(2.0)), &cfg).unwrap();
        assert_eq!(row.gamma, 2.0);
        assert!(next.hausdorff(&sq) < 1e-12);

        let set = example1();
        let (m1, r0) = chr_step(&sq, &set, &cfg).unwrap();
        let (_, r1) = chr_step(&m1, &set, &cfg).unwrap();
        assert!(r1.rho_hi - r1.rho_lo < r0.rho_hi - r0.rho_lo);
        assert!((m1.minkowski_norm(cfg.e) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn residual_examples() {
        let sq = SymPolygon::unit_square();
        assert!(residual_dk(&sq, &single(Mat2::IDENTITY.scale(2.0)), 2.0).unwrap() < 1e-15);
        let r = residual_dk(&sq, &single(Mat2::IDENTITY), 2.0).unwrap();
        assert!((r - 0.5).abs() < 1e-15);
    }

    #[test]
    fn example1_converges() {
        let cfg = RunConfig::default();
        let r = run_chr(&example1(), &cfg, None).unwrap();
        assert_eq!(r.termination, Termination::Converged);
        assert!(r.bracket.width() <= 1e-4);
        assert!(r.bracket.contains(1.098668, 5e-7), "{:?}", r.bracket);
        assert!(r.trace.is_monotone(1e-12), "{:?}", r.trace.monotonicity_violations(1e-12));
        assert!(r.residual <= 10.0 * cfg.tol, "residual {}", r.residual);
    }

    #[test]
    fn calibration_is_pinned_after_every_step() {
        let cfg = RunConfig { e: Vec2::new(0.3, -0.8), ..Default::default() };
        let set = example1();
        let mut m = SymPolygon::regular(6, 2.0, 0.1).unwrap();
        for _ in 0..30 {
            m = chr_step(&m, &set, &cfg).unwrap().0;
            assert!((m.minkowski_norm(cfg.e) - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn singular_member_is_handled() {
        let a1 = example1().members()[0];
        let set = MatrixSet::new(vec![a1, Mat2::new(0.9, 0.0, 0.9, 0.0)]).unwrap();
        assert!(set.has_singular_member());
        let r = run_chr(&set, &RunConfig::default(), None).unwrap();
        assert_eq!(r.termination, Termination::Converged);
        let brute = bounds_rho_n(&set, 10, &NormTag::Euclidean).unwrap();
        assert!(brute.lower <= r.bracket.hi + 1e-6 && r.bracket.lo <= brute.upper + 1e-6);
    }

    #[test]
    fn seeded_dk_examples() {
        let cfg = RunConfig::default();
        let sq = SymPolygon::unit_square();
        let r = seeded_dk_iteration(&sq, &single(Mat2::IDENTITY.scale(2.0)), 2.0, &cfg).unwrap();
        assert_eq!(r.termination, Termination::Converged);
        assert_eq!(r.iterations, 1);
        assert!(r.body.hausdorff(&sq) < 1e-12);

        let circle = SymPolygon::regular(64, 1.0, 0.0).unwrap();
        assert!(matches!(
            seeded_dk_iteration(&circle, &example2(), 1.1, &cfg),
            Err(Error::NotExtremal { step: 0, .. })
        ));
    }

    #[test]
    fn polar_bridge() {
        let sq = SymPolygon::unit_square();
        let d = SymPolygon::unit_diamond();
        assert!(bar_to_dk(&sq).hausdorff(&d) < 1e-15);
        assert!(dk_to_bar(&d).hausdorff(&sq) < 1e-15);
        let m = SymPolygon::regular(10, 1.7, 0.4).unwrap();
        assert!(bar_to_dk(&dk_to_bar(&m)).hausdorff(&m) <= 1e-9 * m.diameter());
    }

    #[test]
    fn barabanov_ball_of_transpose_is_a_dk_body() {
        let cfg = RunConfig::default();
        let set = example1();
        let mr = run_max_relaxation(&set.transposed(), &cfg, None).unwrap();
        let m = bar_to_dk(&mr.body);
        let res = residual_dk(&m, &set, mr.bracket.midpoint()).unwrap();
        assert!(res <= 10.0 * (cfg.tol + cfg.tol), "residual {res}");
        let chr = run_chr(&set, &cfg, None).unwrap();
        let gap = (mr.bracket.midpoint() - chr.bracket.midpoint()).abs();
        assert!(gap <= mr.bracket.width() + chr.bracket.width() + 1e-15);
    }
}
