use barnorm::dkbody::{dk_to_bar, run_chr, seeded_dk_iteration};
use barnorm::matcore::{bounds_rho_n, check_irreducible, symmetric_shortcut, Irreducibility, NormTag};
use barnorm::polygeom::SymPolygon;
use barnorm::relaxation::{build_lmain_norm, run_max_relaxation, seeded_bar_iteration, Bracket, RunResult, Termination};
use barnorm::{Error, MatrixSet};

use crate::problem::{Algorithm, Problem};
use crate::report::{BodyKind, BodyReport, Outcome, Provenance, Report, Residuals};
use crate::CliError;

/// Vertex count of the default seed for the seeded iterations.
const SEED_VERTICES: usize = 64;

fn base_report(p: &Problem, irreducibility: Irreducibility) -> Report {
    Report {
        algorithm: p.algorithm.name().into(),
        bracket: None,
        exact: None,
        residuals: Residuals::default(),
        iterations: 0,
        termination: Outcome::Converged,
        irreducibility,
        irreducibility_warning: irreducibility == Irreducibility::Inconclusive,
        body: None,
        extra_bodies: Vec::new(),
        provenance: Provenance::new(p),
        trace: None,
    }
}

fn reducible_report(p: &Problem, witness: barnorm::Vec2) -> Report {
    let mut r = base_report(p, Irreducibility::Reducible { witness });
    r.termination = Outcome::ReducibleInput;
    r
}

/// Runs the problem's algorithm. Reducible input is a report, not an error.
pub fn dispatch(p: &Problem) -> Result<Report, CliError> {
    p.validate()?;
    let set = p.set()?;
    match run(p, &set) {
        Err(CliError::Core(Error::Reducible { witness })) => Ok(reducible_report(p, witness)),
        other => other,
    }
}

fn run(p: &Problem, set: &MatrixSet) -> Result<Report, CliError> {
    let irreducibility = check_irreducible(set);
    let mut report = base_report(p, irreducibility);
    let cfg = p.config();
    let seed = p.seed()?;
    match p.algorithm {
        Algorithm::MaxRelax => {
            let r = run_max_relaxation(set, &cfg, seed.as_ref())?;
            fill_from_run(&mut report, &r, BodyKind::BarabanovBall);
            report.residuals.barabanov = Some(r.residual);
        }
        Algorithm::Chr => {
            let r = run_chr(set, &cfg, seed.as_ref())?;
            fill_from_run(&mut report, &r, BodyKind::DkBody);
            report.residuals.dk = Some(r.residual);
            report.extra_bodies.push(BodyReport::new(BodyKind::TransposeBarabanovBall, &dk_to_bar(&r.body)));
        }
        Algorithm::SeededBar | Algorithm::SeededDk => {
            let rho = match (p.rho, symmetric_shortcut(set)) {
                (Some(rho), _) => rho,
                (None, Some(x)) => x.rho,
                (None, None) => {
                    return Err(CliError::Usage(
                        "seeded algorithms need rho: pass --rho or use a symmetric or transpose-closed set".into(),
                    ))
                }
            };
            let s0 = match seed {
                Some(s) => s,
                None => SymPolygon::regular(SEED_VERTICES, 1.0, 0.0)?,
            };
            if p.algorithm == Algorithm::SeededBar {
                let r = seeded_bar_iteration(&s0, set, rho, &cfg)?;
                fill_from_run(&mut report, &r, BodyKind::BarabanovBall);
                report.residuals.barabanov = Some(r.residual);
            } else {
                let r = seeded_dk_iteration(&s0, set, rho, &cfg)?;
                fill_from_run(&mut report, &r, BodyKind::DkBody);
                report.residuals.dk = Some(r.residual);
            }
        }
        Algorithm::Brute => {
            let b = bounds_rho_n(set, p.n, &NormTag::Euclidean)?;
            report.bracket = Some(Bracket { lo: b.lower, hi: b.upper });
        }
        Algorithm::Lmain => {
            let b = bounds_rho_n(set, p.n, &NormTag::MaxAbs)?;
            let base = SymPolygon::unit_square();
            let built = build_lmain_norm(set, b.upper, p.n, &base)?;
            if !built.is_extremal() {
                return Err(CliError::Inconsistent(format!(
                    "extremal-norm construction failed at {} vertices (worst ratio {})",
                    built.violations.len(),
                    built.max_ratio
                )));
            }
            report.bracket = Some(Bracket { lo: b.lower, hi: b.upper });
            report.residuals.extremal_ratio = Some(built.max_ratio);
            report.body = Some(BodyReport::new(BodyKind::ExtremalBall, &built.body));
        }
        Algorithm::Auto => auto(&mut report, set, p)?,
    }
    Ok(report)
}

fn fill_from_run(report: &mut Report, r: &RunResult, kind: BodyKind) {
    report.bracket = Some(r.bracket);
    report.iterations = r.iterations;
    report.termination = r.termination.into();
    report.irreducibility = r.irreducibility;
    report.irreducibility_warning = r.irreducibility_warning();
    report.body = Some(BodyReport::new(kind, &r.body));
    report.trace = Some(r.trace.clone());
}

fn worst(a: Termination, b: Termination) -> Termination {
    let rank = |t| match t {
        Termination::Converged => 0,
        Termination::MaxIter => 1,
        Termination::Diverged => 2,
    };
    if rank(b) > rank(a) {
        b
    } else {
        a
    }
}

/// Shortcut first, then the hull relaxation, cross-checked by max-relaxation
/// when no member is singular. Brackets are intersected.
fn auto(report: &mut Report, set: &MatrixSet, p: &Problem) -> Result<(), CliError> {
    if let Irreducibility::Reducible { witness } = report.irreducibility {
        return Err(Error::Reducible { witness }.into());
    }
    let cfg = p.config();
    let exact = symmetric_shortcut(set);
    let chr = run_chr(set, &cfg, None)?;
    let mr = if set.has_singular_member() { None } else { Some(run_max_relaxation(set, &cfg, None)?) };

    let mut lo = chr.bracket.lo;
    let mut hi = chr.bracket.hi;
    let mut termination = chr.termination;
    if let Some(mr) = &mr {
        lo = lo.max(mr.bracket.lo);
        hi = hi.min(mr.bracket.hi);
        termination = worst(termination, mr.termination);
    }
    let slack = 1e-9 * hi.max(1.0);
    if lo > hi + slack {
        let mut msg = format!(
            "brackets do not overlap: hull relaxation [{}, {}]",
            chr.bracket.lo, chr.bracket.hi
        );
        if let Some(mr) = &mr {
            msg.push_str(&format!(", max-relaxation [{}, {}]", mr.bracket.lo, mr.bracket.hi));
        }
        msg.push_str(&format!("\nhull relaxation trace:\n{}", crate::csv::render_csv(&chr.trace)));
        if let Some(mr) = &mr {
            msg.push_str(&format!("max-relaxation trace:\n{}", crate::csv::render_csv(&mr.trace)));
        }
        return Err(CliError::Inconsistent(msg));
    }
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }
    if let Some(x) = &exact {
        if !(lo - slack <= x.rho && x.rho <= hi + slack) {
            return Err(CliError::Inconsistent(format!(
                "exact value {} from the symmetric shortcut lies outside the bracket [{lo}, {hi}]",
                x.rho
            )));
        }
    }

    report.bracket = Some(Bracket { lo, hi });
    report.exact = exact;
    report.termination = if exact.is_some() { Outcome::Exact } else { termination.into() };
    report.iterations = chr.iterations + mr.as_ref().map_or(0, |m| m.iterations);
    report.irreducibility_warning = chr.irreducibility_warning();
    report.residuals.dk = Some(chr.residual);
    report.body = Some(BodyReport::new(BodyKind::DkBody, &chr.body));
    report.trace = Some(chr.trace.clone());
    if let Some(mr) = &mr {
        report.residuals.barabanov = Some(mr.residual);
        report.extra_bodies.push(BodyReport::new(BodyKind::BarabanovBall, &mr.body));
    }
    report.extra_bodies.push(BodyReport::new(BodyKind::TransposeBarabanovBall, &dk_to_bar(&chr.body)));
    Ok(())
}
