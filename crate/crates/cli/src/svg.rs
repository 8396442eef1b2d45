//! Deterministic SVG rendering of polygons and segments.

use std::fmt::Write as _;
use std::path::Path;

use barnorm::polygeom::{LinearImage, SymPolygon};
use barnorm::{MatrixSet, Vec2};

use crate::report::{BodyKind, Report};
use crate::CliError;

const CANVAS_PX: u32 = 600;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dash {
    Solid,
    Dotted,
    Dashed,
    DashDot,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Style {
    pub color: String,
    pub dash: Dash,
}

impl Style {
    pub fn new(color: &str, dash: Dash) -> Self {
        Self { color: color.into(), dash }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Shape {
    pub label: String,
    pub points: Vec<Vec2>,
    pub closed: bool,
    pub style: Style,
}

impl Shape {
    pub fn polygon(label: impl Into<String>, p: &SymPolygon, style: Style) -> Self {
        Self { label: label.into(), points: p.vertices().to_vec(), closed: true, style }
    }

    fn image(label: String, img: &LinearImage, style: Style) -> Self {
        match img {
            LinearImage::Body(p) => Self::polygon(label, p, style),
            LinearImage::Segment { end } => Self { label, points: vec![-*end, *end], closed: false, style },
        }
    }
}

fn num(v: f64) -> String {
    let s = format!("{v:.6}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        "0.000000".into()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Standalone SVG with an equal-aspect view box padded by 10% on each side.
/// The y axis points up.
pub fn render_svg(shapes: &[Shape]) -> Result<String, CliError> {
    let pts: Vec<Vec2> = shapes.iter().flat_map(|s| s.points.iter().map(|p| Vec2::new(p.x, -p.y))).collect();
    if pts.is_empty() {
        return Err(CliError::Usage("nothing to draw".into()));
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in &pts {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    let mut side = (x1 - x0).max(y1 - y0);
    if !(side > 0.0) {
        side = 1.0;
    }
    let view = side * 1.2;
    let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
    let sw = view / 300.0;

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{CANVAS_PX}\" height=\"{CANVAS_PX}\" viewBox=\"{} {} {} {}\">",
        num(cx - 0.5 * view),
        num(cy - 0.5 * view),
        num(view),
        num(view)
    );
    let _ = writeln!(out, "<g fill=\"none\" stroke-width=\"{}\" stroke-linejoin=\"round\">", num(sw));
    for s in shapes {
        let mut d = String::new();
        for (i, p) in s.points.iter().enumerate() {
            let _ = write!(d, "{}{} {} ", if i == 0 { "M" } else { "L" }, num(p.x), num(-p.y));
        }
        d.push_str(if s.closed { "Z" } else { "" });
        let d = d.trim_end();
        let dash = match s.style.dash {
            Dash::Solid => String::new(),
            Dash::Dotted => format!(" stroke-linecap=\"round\" stroke-dasharray=\"0 {}\"", num(3.0 * sw)),
            Dash::Dashed => format!(" stroke-dasharray=\"{} {}\"", num(8.0 * sw), num(4.0 * sw)),
            Dash::DashDot => format!(
                " stroke-dasharray=\"{} {} {} {}\"",
                num(8.0 * sw),
                num(3.0 * sw),
                num(sw),
                num(3.0 * sw)
            ),
        };
        let _ = writeln!(
            out,
            "<path d=\"{d}\" stroke=\"{}\"{dash}><title>{}</title></path>",
            escape(&s.style.color),
            escape(&s.label)
        );
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}

pub fn emit_svg(shapes: &[Shape], path: &Path) -> Result<(), CliError> {
    let svg = render_svg(shapes)?;
    crate::write_file(path, &svg)
}

/// Styles for per-matrix overlays: red dotted, blue dash-dot, then dashed.
fn member_style(i: usize) -> Style {
    const MORE: [&str; 4] = ["orange", "purple", "teal", "brown"];
    match i {
        0 => Style::new("red", Dash::Dotted),
        1 => Style::new("blue", Dash::DashDot),
        k => Style::new(MORE[(k - 2) % MORE.len()], Dash::Dashed),
    }
}

/// The figure for a report: the main body in black, one overlay per member
/// and any extra bodies.
///
/// For a DK-body `M` the overlays are `ρ̂⁻¹AᵢM`; for a Barabanov ball `S`
/// they are the sets `{x : ‖Aᵢx‖ ≤ ρ̂}`, skipped when unbounded.
pub fn figure(report: &Report, set: &MatrixSet) -> Result<Vec<Shape>, CliError> {
    let Some(body) = &report.body else {
        return Err(CliError::Usage("the report has no body to draw".into()));
    };
    let main = body.polygon()?;
    let rho = report.exact.map(|x| x.rho).or(report.bracket.map(|b| b.midpoint())).unwrap_or(1.0);
    let mut shapes = vec![Shape::polygon(format!("{:?}", body.kind), &main, Style::new("black", Dash::Solid))];
    for (i, a) in set.members().iter().enumerate() {
        match body.kind {
            BodyKind::DkBody => {
                let img = main.linear_image(&a.scale(1.0 / rho));
                shapes.push(Shape::image(format!("A{} M / rho", i + 1), &img, member_style(i)));
            }
            BodyKind::BarabanovBall => {
                let rows: Vec<Vec2> =
                    main.constraints().iter().map(|h| a.transpose().apply(h.normal) * (1.0 / rho)).collect();
                if let Ok(p) = SymPolygon::from_strips(&rows) {
                    shapes.push(Shape::polygon(format!("|A{} x| <= rho", i + 1), &p, member_style(i)));
                }
            }
            BodyKind::ExtremalBall | BodyKind::TransposeBarabanovBall => {}
        }
    }
    for extra in &report.extra_bodies {
        let style = match extra.kind {
            BodyKind::BarabanovBall => Style::new("green", Dash::Solid),
            _ => Style::new("gray", Dash::Dashed),
        };
        shapes.push(Shape::polygon(format!("{:?}", extra.kind), &extra.polygon()?, style));
    }
    Ok(shapes)
}
