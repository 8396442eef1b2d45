//! End-to-end acceptance checks. Prints one line per criterion and exits
//! with a failure status if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use barnorm::dkbody::{hull_of_images, residual_dk, run_chr, seeded_dk_iteration, bar_to_dk};
use barnorm::matcore::{
    bounds_rho_n, check_irreducible, seminorm_r, symmetric_shortcut, Irreducibility, NormTag,
};
use barnorm::polygeom::LinearImage;
use barnorm::relaxation::{
    ext_one_step, run_max_relaxation, seeded_bar_iteration, build_lmain_norm, BoundTrace, RunConfig, RunResult,
    Termination,
};
use barnorm::{Mat2, MatrixSet, SymPolygon, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RHO_EX1: f64 = 1.098668;
const RHO_EX2: f64 = 1.2;

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

fn random_irreducible_pairs(count: usize, seed: u64) -> Vec<MatrixSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let mut m = || Mat2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let set = MatrixSet::new(vec![m(), m()]).unwrap();
        if check_irreducible(&set) == Irreducibility::Irreducible {
            out.push(set);
        }
    }
    out
}

fn circle64() -> SymPolygon {
    SymPolygon::regular(64, 1.0, 0.0).unwrap()
}

struct Outcome {
    ok: bool,
    detail: String,
}

impl Outcome {
    fn new(ok: bool, detail: impl Into<String>) -> Self {
        Self { ok, detail: detail.into() }
    }
}

/// Collects traces from criteria 1–3 for the monotonicity check.
#[derive(Default)]
struct Traces(Vec<(String, BoundTrace)>);

impl Traces {
    fn add(&mut self, label: impl Into<String>, r: &RunResult) {
        self.0.push((label.into(), r.trace.clone()));
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn bracket_text(r: &RunResult) -> String {
    format!("[{:.10}, {:.10}] after {} steps", r.bracket.lo, r.bracket.hi, r.iterations)
}

fn criterion_1(traces: &mut Traces) -> Outcome {
    let set = example1();
    let cfg = RunConfig::default();
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, run) in [
        ("MR", run_max_relaxation as fn(&MatrixSet, &RunConfig, Option<&SymPolygon>) -> barnorm::Result<RunResult>),
        ("CHR", run_chr),
    ] {
        let (r, took) = timed(|| run(&set, &cfg, None));
        match r {
            Ok(r) => {
                let pass = r.termination == Termination::Converged
                    && r.bracket.width() <= 1e-4
                    && r.bracket.contains(RHO_EX1, 5e-7)
                    && took < Duration::from_secs(5);
                ok &= pass;
                notes.push(format!("{name} {} in {took:.2?}", bracket_text(&r)));
                traces.add(format!("example 1 {name}"), &r);
            }
            Err(e) => {
                ok = false;
                notes.push(format!("{name} error: {e}"));
            }
        }
    }
    Outcome::new(ok, notes.join("; "))
}

/// Largest turning angle between consecutive edge normals, in degrees.
fn sharpest_corner_deg(p: &SymPolygon) -> f64 {
    let a = p.normals();
    let n = a.len();
    (0..n)
        .map(|j| {
            let (u, w) = (a[(j + n - 1) % n], a[j]);
            u.cross(w).atan2(u.dot(w)).to_degrees()
        })
        .fold(0.0, f64::max)
}

fn criterion_2(traces: &mut Traces) -> Outcome {
    let set = example2();
    let t = Instant::now();
    let Some(exact) = symmetric_shortcut(&set) else {
        return Outcome::new(false, "shortcut did not apply");
    };
    let shortcut_ok = exact.rho == RHO_EX2 && exact.witness == 1;
    let r = match run_max_relaxation(&set, &RunConfig::default(), None) {
        Ok(r) => r,
        Err(e) => return Outcome::new(false, format!("MR error: {e}")),
    };
    traces.add("example 2 MR", &r);
    let corner = sharpest_corner_deg(&r.body);
    let took = t.elapsed();
    let ok = shortcut_ok
        && r.bracket.contains(RHO_EX2, 0.0)
        && r.bracket.width() <= 1e-4
        && corner > 5.0
        && took < Duration::from_secs(5);
    Outcome::new(
        ok,
        format!(
            "shortcut {} (member {}); MR {}; sharpest corner {corner:.2} deg over {} vertices; {took:.2?}",
            exact.rho,
            exact.witness,
            bracket_text(&r),
            r.body.len()
        ),
    )
}

fn criterion_3(traces: &mut Traces) -> Outcome {
    let t = Instant::now();
    let mut sets = vec![("example 1".to_string(), example1()), ("example 2".to_string(), example2())];
    sets.extend(random_irreducible_pairs(20, 0x5eed).into_iter().enumerate().map(|(i, s)| (format!("random {i}"), s)));
    let cfg = RunConfig::default();
    let mut failures = Vec::new();
    let mut checks = 0;
    let mut unconverged = Vec::new();
    for (label, set) in &sets {
        let mut runs = Vec::new();
        match run_max_relaxation(set, &cfg, None) {
            Ok(r) => runs.push(("MR", r)),
            Err(e) => failures.push(format!("{label} MR: {e}")),
        }
        match run_chr(set, &cfg, None) {
            Ok(r) => runs.push(("CHR", r)),
            Err(e) => failures.push(format!("{label} CHR: {e}")),
        }
        for n in 1..=8 {
            let b = bounds_rho_n(set, n, &NormTag::Euclidean).unwrap();
            for (name, r) in &runs {
                checks += 1;
                if !(b.lower <= r.bracket.hi + 1e-9 && r.bracket.lo <= b.upper + 1e-9) {
                    failures.push(format!("{label} {name} n={n}: brute [{}, {}] vs [{}, {}]", b.lower, b.upper, r.bracket.lo, r.bracket.hi));
                }
            }
        }
        for (name, r) in &runs {
            if r.termination != Termination::Converged {
                unconverged.push(format!("{label} {name} ({} steps)", r.iterations));
            }
            traces.add(format!("{label} {name}"), r);
        }
    }
    let took = t.elapsed();
    let ok = failures.is_empty() && took < Duration::from_secs(60);
    let mut detail = format!("{checks} comparisons over {} sets in {took:.2?}", sets.len());
    if !unconverged.is_empty() {
        detail.push_str(&format!("; stopped at max_iter: {}", unconverged.join(", ")));
    }
    if !failures.is_empty() {
        detail.push_str(&format!("; {}", failures.join("; ")));
    }
    Outcome::new(ok, detail)
}

fn criterion_4(traces: &Traces) -> Outcome {
    let mut rows = 0;
    let mut bad = Vec::new();
    for (label, trace) in &traces.0 {
        rows += trace.len();
        let v = trace.monotonicity_violations(1e-12);
        if !v.is_empty() {
            bad.push(format!("{label} rows {v:?}"));
        }
    }
    let ok = bad.is_empty() && !traces.0.is_empty();
    let mut detail = format!("{} traces, {rows} rows", traces.0.len());
    if !bad.is_empty() {
        detail.push_str(&format!("; {}", bad.join("; ")));
    }
    Outcome::new(ok, detail)
}

fn criterion_5() -> Outcome {
    let set = example1();
    let cfg = RunConfig::default();
    let (mr, chr) = match (run_max_relaxation(&set.transposed(), &cfg, None), run_chr(&set, &cfg, None)) {
        (Ok(a), Ok(b)) => (a, b),
        (a, b) => return Outcome::new(false, format!("run failed: {:?} {:?}", a.err(), b.err())),
    };
    let m = bar_to_dk(&mr.body);
    let res = residual_dk(&m, &set, mr.bracket.midpoint()).unwrap();
    let gap = (mr.bracket.midpoint() - chr.bracket.midpoint()).abs();
    let allowed = mr.bracket.width() + chr.bracket.width();
    Outcome::new(
        res <= 1e-4 && gap <= allowed,
        format!("residual {res:.3e}; midpoint gap {gap:.3e} vs summed widths {allowed:.3e}"),
    )
}

fn criterion_6() -> Outcome {
    let cfg = RunConfig::default();
    let limit = 10.0 * cfg.tol;
    let mut ok = true;
    let mut notes = Vec::new();
    for (label, set) in [("example 1", example1()), ("example 2", example2())] {
        let mr = run_max_relaxation(&set, &cfg, None);
        let chr = run_chr(&set, &cfg, None);
        match (mr, chr) {
            (Ok(a), Ok(b)) => {
                let pass = a.termination == Termination::Converged
                    && b.termination == Termination::Converged
                    && a.residual <= limit
                    && b.residual <= limit;
                ok &= pass;
                notes.push(format!("{label}: MR {:.2e}, CHR {:.2e}", a.residual, b.residual));
            }
            (a, b) => {
                ok = false;
                notes.push(format!("{label}: {:?} {:?}", a.err(), b.err()));
            }
        }
    }
    Outcome::new(ok, format!("{} (limit {limit:.0e})", notes.join("; ")))
}

/// Replays the seeded iterations step by step and checks every inclusion.
fn criterion_7() -> Outcome {
    let set = example2();
    let rho = RHO_EX2;
    let cfg = RunConfig::default();
    let slack = 1.0 + 1e-9;
    let mut notes = Vec::new();
    let mut ok = true;

    let mut s = circle64();
    let mut worst_bar: f64 = 0.0;
    for _ in 0..500 {
        let next = ext_one_step(&s, &set, rho).unwrap().prune(cfg.prune_eps);
        worst_bar = worst_bar.max(s.outer_ratio(&next));
        let done = next.hausdorff(&s) <= cfg.tol * next.diameter();
        s = next;
        if done {
            break;
        }
    }
    ok &= worst_bar <= slack;

    let mut m = circle64();
    let mut worst_dk: f64 = 0.0;
    let mut worst_inv: f64 = 0.0;
    for _ in 0..500 {
        for a in set.members() {
            let img = match m.linear_image(a) {
                LinearImage::Body(p) => p,
                LinearImage::Segment { .. } => unreachable!("members are invertible"),
            };
            worst_inv = worst_inv.max(img.outer_ratio(&m.scaled(rho)));
        }
        let next = hull_of_images(&m, &set).unwrap().scaled(1.0 / rho).prune(cfg.prune_eps);
        worst_dk = worst_dk.max(next.outer_ratio(&m));
        let done = next.hausdorff(&m) <= cfg.tol * next.diameter();
        m = next;
        if done {
            break;
        }
    }
    ok &= worst_dk <= slack && worst_inv <= slack;
    notes.push(format!("replay: ball ratio {worst_bar:.12}, body ratio {worst_dk:.12}, invariance {worst_inv:.12}"));

    let bounded = RunConfig { max_iter: 500, ..cfg };
    match seeded_bar_iteration(&circle64(), &set, rho, &bounded) {
        Ok(r) => {
            ok &= r.termination == Termination::Converged && r.residual <= 1e-5;
            notes.push(format!("ball: {} steps, residual {:.2e}", r.iterations, r.residual));
        }
        Err(e) => {
            ok = false;
            notes.push(format!("ball: {e}"));
        }
    }
    match seeded_dk_iteration(&circle64(), &set, rho, &bounded) {
        Ok(r) => {
            ok &= r.termination == Termination::Converged && r.residual <= 1e-5;
            notes.push(format!("body: {} steps, residual {:.2e}", r.iterations, r.residual));
        }
        Err(e) => {
            ok = false;
            notes.push(format!("body: {e}"));
        }
    }
    Outcome::new(ok, notes.join("; "))
}

fn criterion_8() -> Outcome {
    let set = example1();
    let n = 6;
    let base = SymPolygon::unit_square();
    let kappa = bounds_rho_n(&set, n, &NormTag::MaxAbs).unwrap().upper;
    let built = match build_lmain_norm(&set, kappa, n, &base) {
        Ok(b) => b,
        Err(e) => return Outcome::new(false, format!("construction failed: {e}")),
    };
    // the norm evaluated from its definition, independent of the polygon
    let norm_n = |x: Vec2| {
        let mut best = base.minkowski_norm(x);
        for k in 1..n {
            best = best.max(seminorm_r(&set, k, x, &base).unwrap() / kappa.powi(k as i32));
        }
        best
    };
    let mut worst: f64 = 0.0;
    for &v in built.body.vertices() {
        let lhs = set.members().iter().map(|a| norm_n(a.apply(v))).fold(0.0, f64::max);
        worst = worst.max(lhs / (kappa * norm_n(v)));
    }
    let ok = worst <= 1.0 + 1e-9 && built.is_extremal();
    Outcome::new(
        ok,
        format!("kappa {kappa:.10}, {} vertices, worst ratio {worst:.12}", built.body.len()),
    )
}

fn criterion_9() -> Outcome {
    let a1 = example1().members()[0];
    let set = MatrixSet::new(vec![a1, Mat2::new(0.9, 0.0, 0.9, 0.0)]).unwrap();
    let r = match run_chr(&set, &RunConfig::default(), None) {
        Ok(r) => r,
        Err(e) => return Outcome::new(false, format!("CHR error: {e}")),
    };
    let b = bounds_rho_n(&set, 10, &NormTag::Euclidean).unwrap();
    let ok = r.termination == Termination::Converged
        && b.lower <= r.bracket.hi + 1e-6
        && r.bracket.lo <= b.upper + 1e-6;
    Outcome::new(ok, format!("CHR {}; brute n=10 [{:.10}, {:.10}]", bracket_text(&r), b.lower, b.upper))
}

fn random_polygon(rng: &mut ChaCha8Rng) -> SymPolygon {
    loop {
        let k = rng.gen_range(2..12);
        let pts: Vec<Vec2> = (0..k).map(|_| Vec2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect();
        if let Ok(p) = SymPolygon::absco_hull(&pts) {
            if p.area() > 1e-3 {
                return p;
            }
        }
    }
}

fn random_invertible(rng: &mut ChaCha8Rng) -> Mat2 {
    loop {
        let m = Mat2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        if m.det().abs() > 0.05 * m.max_abs().powi(2) {
            return m;
        }
    }
}

fn inverse_transpose(a: &Mat2) -> Mat2 {
    let [p, q, r, s] = a.entries();
    let det = a.det();
    Mat2::new(s / det, -r / det, -q / det, p / det)
}

fn criterion_10() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let tol = 1e-9;
    let mut failures: Vec<String> = Vec::new();
    for i in 0..200 {
        let p = random_polygon(&mut rng);
        let d = p.diameter();
        if p.polar().polar().hausdorff(&p) > tol * d {
            failures.push(format!("#{i} polar involution"));
        }
        for lam in [0.5, 2.0, 3.0] {
            let rhs = p.polar().scaled(1.0 / lam);
            if p.scaled(lam).polar().hausdorff(&rhs) > tol * rhs.diameter() {
                failures.push(format!("#{i} polar scaling by {lam}"));
            }
        }
        let a = random_invertible(&mut rng);
        match (p.linear_image(&a), p.polar().linear_image(&inverse_transpose(&a))) {
            (LinearImage::Body(img), LinearImage::Body(rhs)) => {
                let lhs = img.polar();
                if lhs.hausdorff(&rhs) > tol * lhs.diameter().max(rhs.diameter()) {
                    failures.push(format!("#{i} polar of linear image"));
                }
            }
            _ => failures.push(format!("#{i} invertible image degenerated")),
        }
        if p.vertices().iter().any(|&v| (p.minkowski_norm(v) - 1.0).abs() > 1e-10) {
            failures.push(format!("#{i} gauge on vertices"));
        }
        let q = random_polygon(&mut rng);
        let s = rng.gen_range(1.0..3.0);
        let expected = (s - 1.0) * d / 2.0;
        let pq = p.hausdorff(&q);
        if p.hausdorff(&p) != 0.0
            || (pq - q.hausdorff(&p)).abs() > tol * pq.max(1.0)
            || (p.hausdorff(&p.scaled(s)) - expected).abs() > tol * expected.max(1.0)
        {
            failures.push(format!("#{i} hausdorff identities"));
        }
    }
    let took = t.elapsed();
    let ok = failures.is_empty() && took < Duration::from_secs(10);
    let mut detail = format!("200 polygons in {took:.2?}");
    if !failures.is_empty() {
        detail.push_str(&format!("; {}", failures.join(", ")));
    }
    Outcome::new(ok, detail)
}

fn main() -> ExitCode {
    let mut traces = Traces::default();
    let results = [
        ("1 example 1 reproduction", criterion_1(&mut traces)),
        ("2 example 2 reproduction", criterion_2(&mut traces)),
        ("3 sandwich against brute force", criterion_3(&mut traces)),
        ("4 bracket monotonicity", criterion_4(&traces)),
        ("5 polar bridge", criterion_5()),
        ("6 fixed-point residuals", criterion_6()),
        ("7 seeded monotonicity", criterion_7()),
        ("8 extremal norm from growth bound", criterion_8()),
        ("9 singular member", criterion_9()),
        ("10 geometry properties", criterion_10()),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!("[{}] {name}: {}", if o.ok { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.ok);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
