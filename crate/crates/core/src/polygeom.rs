//! Centrally symmetric convex polygons.
//!
//! A [`SymPolygon`] keeps two synchronized descriptions of the same set:
//!
//! * `2k` vertices in counterclockwise order with `v[i + k] = −v[i]` exactly,
//!   starting at the vertex of smallest polar angle in `[0, π)`;
//! * `2k` normalized edge normals `a[j]` with `⟨a[j], x⟩ ≤ 1` on the body,
//!   where `a[j]` belongs to the edge from `v[j]` to `v[j + 1]`.
//!
//! The normals are exactly the vertices of the polar body, so the gauge is a
//! maximum of `|⟨a[j], x⟩|`, the polar is a swap of the two lists, and an
//! intersection of symmetric strips is the polar of an absolutely convex hull.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{Mat2, Vec2};

/// Relative deviation below which a hull vertex is treated as collinear with
/// its neighbours and dropped during construction.
const COLLINEAR_TOL: f64 = 1e-14;

/// Default pruning threshold, relative to the diameter.
pub const DEFAULT_PRUNE_EPS: f64 = 1e-12;

/// `{x : |⟨normal, x⟩| ≤ offset}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfplanePair {
    pub normal: Vec2,
    pub offset: f64,
}

impl HalfplanePair {
    pub fn new(normal: Vec2, offset: f64) -> Result<Self> {
        if !(normal.is_finite() && normal.norm_sq() > 0.0) {
            return Err(Error::InvalidInput("halfplane normal must be nonzero".into()));
        }
        if !(offset.is_finite() && offset > 0.0) {
            return Err(Error::InvalidInput(format!("halfplane offset must be positive, got {offset}")));
        }
        Ok(Self { normal, offset })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymPolygon {
    verts: Vec<Vec2>,
    duals: Vec<Vec2>,
    angles: Vec<f64>,
}

/// Image of a polygon under a linear map.
#[derive(Clone, Debug, PartialEq)]
pub enum LinearImage {
    Body(SymPolygon),
    /// Rank-deficient map: the image is the segment `[−end, end]`
    /// (a single point when `end` is zero).
    Segment { end: Vec2 },
}

impl LinearImage {
    /// Points whose absolutely convex hull is the image.
    pub fn hull_points(&self) -> Vec<Vec2> {
        match self {
            LinearImage::Body(p) => p.vertices().to_vec(),
            LinearImage::Segment { end } => vec![*end, -*end],
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, LinearImage::Segment { .. })
    }
}

/// Representative of `±v` in the half-open upper half plane.
fn upper_rep(v: Vec2) -> Vec2 {
    if v.y < 0.0 || (v.y == 0.0 && v.x < 0.0) {
        -v
    } else {
        v
    }
}

/// Outward distance of `v` from the chord `p → q`.
fn chord_deviation(p: Vec2, v: Vec2, q: Vec2) -> f64 {
    let chord = q - p;
    let len = chord.norm();
    if len == 0.0 {
        return v.dist(p);
    }
    (v - p).cross(chord) / len
}

/// Andrew's monotone chain; counterclockwise, collinear points dropped.
fn convex_hull(mut pts: Vec<Vec2>) -> Vec<Vec2> {
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let turn = |o: Vec2, a: Vec2, b: Vec2| (a - o).cross(b - o);
    let mut hull: Vec<Vec2> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

impl SymPolygon {
    /// Builds a polygon from the half chain of vertices with polar angle in
    /// `[0, π)`, sorted counterclockwise. Non-convex and numerically collinear
    /// vertices are removed together with their antipodes.
    fn from_half_chain(half: Vec<Vec2>) -> Result<Self> {
        let scale = half.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::DegenerateBody);
        }
        let mut full: Vec<Vec2> = half.iter().copied().chain(half.iter().map(|&v| -v)).collect();
        let tol = COLLINEAR_TOL * scale;
        let mut start = 0;
        loop {
            let n = full.len();
            if n < 4 {
                return Err(Error::DegenerateBody);
            }
            let k = n / 2;
            let bad = (start..k).find(|&i| {
                let dev = chord_deviation(full[(i + n - 1) % n], full[i], full[(i + 1) % n]);
                dev.is_nan() || dev <= tol
            });
            match bad {
                Some(i) => {
                    full.remove(i + k);
                    full.remove(i);
                    start = i.saturating_sub(1);
                }
                None if start > 0 => start = 0,
                None => break,
            }
        }
        Ok(Self::assemble(full))
    }

    /// Computes normals and angles for a validated canonical vertex ring.
    fn assemble(verts: Vec<Vec2>) -> Self {
        let n = verts.len();
        let duals = (0..n)
            .map(|j| {
                let v = verts[j];
                let d = verts[(j + 1) % n] - v;
                let c = v.cross(d);
                Vec2::new(d.y / c, -d.x / c)
            })
            .collect();
        let angles = verts.iter().map(|v| v.angle()).collect();
        Self { verts, duals, angles }
    }

    /// Re-anchors a counterclockwise ring at its smallest polar angle.
    fn from_ccw_ring(ring: &[Vec2]) -> Result<Self> {
        let n = ring.len();
        if n < 4 || n % 2 != 0 {
            return Err(Error::DegenerateBody);
        }
        let start = (0..n)
            .min_by(|&i, &j| ring[i].angle().total_cmp(&ring[j].angle()))
            .expect("nonempty ring");
        let half = (0..n / 2).map(|t| ring[(start + t) % n]).collect();
        Self::from_half_chain(half)
    }

    /// Strict constructor for an explicit vertex list, e.g. one read back from
    /// a report. The list must be counterclockwise, strictly convex and
    /// centrally symmetric to `1e-12`.
    pub fn from_vertices(verts: &[Vec2]) -> Result<Self> {
        let n = verts.len();
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidInput(format!("need an even number (≥ 4) of vertices, got {n}")));
        }
        if verts.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite vertex".into()));
        }
        let k = n / 2;
        for i in 0..k {
            if (verts[i] + verts[i + k]).norm() > 1e-12 {
                return Err(Error::InvalidInput(format!("vertices {i} and {} are not antipodal", i + k)));
            }
        }
        for i in 0..n {
            let (p, v, q) = (verts[(i + n - 1) % n], verts[i], verts[(i + 1) % n]);
            if (v - p).cross(q - v) <= 0.0 {
                return Err(Error::InvalidInput(format!("vertex {i} is not a strictly convex corner")));
            }
        }
        let p = Self::from_ccw_ring(verts)?;
        if p.verts.len() != n {
            return Err(Error::InvalidInput("vertex list has numerically collinear corners".into()));
        }
        Ok(p)
    }

    /// Absolutely convex hull `conv(X ∪ −X)`.
    pub fn absco_hull(points: &[Vec2]) -> Result<Self> {
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidInput("non-finite point".into()));
        }
        let mut sym = Vec::with_capacity(2 * points.len());
        for &p in points {
            if p != Vec2::ZERO {
                sym.push(p);
                sym.push(-p);
            }
        }
        let hull = convex_hull(sym);
        if hull.len() < 4 {
            return Err(Error::DegenerateBody);
        }
        let mut half: Vec<(f64, Vec2)> = hull.into_iter().map(upper_rep).map(|v| (v.angle(), v)).collect();
        half.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.norm_sq().total_cmp(&b.1.norm_sq())));
        Self::from_half_chain(half.into_iter().map(|(_, v)| v).collect())
    }

    /// `{x : |⟨a, x⟩| ≤ 1 for every a}`; the rows must span the plane.
    pub fn from_strips(rows: &[Vec2]) -> Result<Self> {
        Ok(Self::absco_hull(rows)?.polar())
    }

    pub fn unit_square() -> Self {
        Self::from_half_chain(vec![Vec2::new(1.0, 1.0), Vec2::new(-1.0, 1.0)]).expect("square")
    }

    pub fn unit_diamond() -> Self {
        Self::from_half_chain(vec![Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)]).expect("diamond")
    }

    /// Regular `n`-gon inscribed in the circle of radius `r`, first vertex at
    /// angle `phase`. `n` must be even and at least 4.
    pub fn regular(n: usize, r: f64, phase: f64) -> Result<Self> {
        if n < 4 || n % 2 != 0 || !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidInput(format!("regular polygon needs even n ≥ 4 and r > 0, got n={n}, r={r}")));
        }
        let pts: Vec<Vec2> = (0..n)
            .map(|i| {
                let t = phase + 2.0 * PI * i as f64 / n as f64;
                Vec2::new(r * t.cos(), r * t.sin())
            })
            .collect();
        Self::absco_hull(&pts)
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.verts
    }

    /// Vertices with polar angle in `[0, π)`; the rest are their negatives.
    pub fn half_vertices(&self) -> &[Vec2] {
        &self.verts[..self.verts.len() / 2]
    }

    /// Normalized edge normals; these are the vertices of the polar body.
    pub fn normals(&self) -> &[Vec2] {
        &self.duals
    }

    pub fn len(&self) -> usize {
        self.verts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }

    /// One constraint per antipodal edge pair, offsets normalized to one.
    pub fn constraints(&self) -> Vec<HalfplanePair> {
        self.duals[..self.duals.len() / 2]
            .iter()
            .map(|&normal| HalfplanePair { normal, offset: 1.0 })
            .collect()
    }

    /// `min{t ≥ 0 : x ∈ tP}`.
    pub fn minkowski_norm(&self, x: Vec2) -> f64 {
        if x == Vec2::ZERO {
            return 0.0;
        }
        let n = self.verts.len();
        let theta = x.angle();
        let pos = self.angles.partition_point(|&a| a <= theta);
        // edge j runs from v[j] to v[j+1] and its cone contains x
        let j = (pos + n - 1) % n;
        [(j + n - 1) % n, j, (j + 1) % n]
            .iter()
            .map(|&i| self.duals[i].dot(x).abs())
            .fold(0.0, f64::max)
    }

    /// Gauge by scanning every constraint.
    pub fn minkowski_norm_scan(&self, x: Vec2) -> f64 {
        self.duals.iter().map(|a| a.dot(x).abs()).fold(0.0, f64::max)
    }

    /// Operator norm of `a` induced by this polygon's gauge.
    pub fn operator_norm(&self, a: &Mat2) -> f64 {
        self.half_vertices()
            .iter()
            .map(|&v| self.minkowski_norm(a.apply(v)))
            .fold(0.0, f64::max)
    }

    /// `2 · max |v|`.
    pub fn diameter(&self) -> f64 {
        2.0 * self.half_vertices().iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn area(&self) -> f64 {
        let n = self.verts.len();
        0.5 * (0..n).map(|i| self.verts[i].cross(self.verts[(i + 1) % n])).sum::<f64>()
    }

    /// `cP` for `c ≠ 0` (the body is symmetric, so the sign is irrelevant).
    pub fn scaled(&self, c: f64) -> Self {
        let c = c.abs();
        assert!(c > 0.0 && c.is_finite(), "scale factor must be nonzero and finite");
        Self {
            verts: self.verts.iter().map(|&v| v * c).collect(),
            duals: self.duals.iter().map(|&a| a * (1.0 / c)).collect(),
            angles: self.angles.clone(),
        }
    }

    /// `P ∩ ⋂ H`.
    pub fn clip(&self, pairs: &[HalfplanePair]) -> Result<Self> {
        let rows: Vec<Vec2> = self
            .duals
            .iter()
            .copied()
            .chain(pairs.iter().map(|h| h.normal * (1.0 / h.offset)))
            .collect();
        Self::from_strips(&rows).map_err(|e| match e {
            Error::DegenerateBody => Error::Internal("clipping produced an empty interior".into()),
            other => other,
        })
    }

    /// `P ∩ {x : |⟨a, x⟩| ≤ 1 for every a in rows}`.
    pub fn clip_rows(&self, rows: impl IntoIterator<Item = Vec2>) -> Result<Self> {
        let all: Vec<Vec2> = self.duals.iter().copied().chain(rows).collect();
        Self::from_strips(&all)
    }

    pub fn linear_image(&self, a: &Mat2) -> LinearImage {
        let imgs: Vec<Vec2> = self.half_vertices().iter().map(|&v| a.apply(v)).collect();
        if !a.is_singular() {
            if let Ok(p) = Self::absco_hull(&imgs) {
                return LinearImage::Body(p);
            }
        }
        // rank ≤ 1: the image is the segment spanned by the longest image vector
        let dir = imgs.iter().copied().max_by(|p, q| p.norm_sq().total_cmp(&q.norm_sq())).unwrap_or(Vec2::ZERO);
        let len = dir.norm();
        if len == 0.0 {
            return LinearImage::Segment { end: Vec2::ZERO };
        }
        let u = dir * (1.0 / len);
        let reach = imgs.iter().map(|w| w.dot(u).abs()).fold(0.0, f64::max);
        LinearImage::Segment { end: u * reach }
    }

    /// `P° = {y : |⟨v, y⟩| ≤ 1 for all v ∈ P}`.
    pub fn polar(&self) -> Self {
        Self::from_ccw_ring(&self.duals).expect("polar of a valid polygon is a valid polygon")
    }

    /// `min{ρ : self ⊆ ρ·outer}`.
    pub fn outer_ratio(&self, outer: &SymPolygon) -> f64 {
        self.half_vertices()
            .iter()
            .map(|&v| outer.minkowski_norm(v))
            .fold(0.0, f64::max)
    }

    /// Rescales so that `e` lies on the boundary.
    pub fn calibrate_to_boundary(&self, e: Vec2) -> Result<Self> {
        if !e.is_finite() || e == Vec2::ZERO {
            return Err(Error::InvalidInput("calibration vector must be nonzero and finite".into()));
        }
        Ok(self.scaled(self.minkowski_norm(e)))
    }

    /// Euclidean distance from `x` to the body (zero inside).
    pub fn distance_to(&self, x: Vec2) -> f64 {
        if self.minkowski_norm(x) <= 1.0 {
            return 0.0;
        }
        let n = self.verts.len();
        (0..n)
            .map(|i| point_segment_distance(x, self.verts[i], self.verts[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Symmetric Hausdorff distance; exact for convex polygons because the
    /// distance to a convex set is a convex function, maximized at vertices.
    pub fn hausdorff(&self, other: &SymPolygon) -> f64 {
        let directed = |a: &SymPolygon, b: &SymPolygon| {
            a.half_vertices().iter().map(|&v| b.distance_to(v)).fold(0.0, f64::max)
        };
        directed(self, other).max(directed(other, self))
    }

    /// Drops vertices lying within `eps · diameter` of the chord through the
    /// kept neighbours. The result is contained in `self` and within
    /// Hausdorff distance `eps · diameter` of it.
    pub fn prune(&self, eps: f64) -> Self {
        let k = self.verts.len() / 2;
        if k <= 2 || !(eps >= 0.0) {
            return self.clone();
        }
        let n = 2 * k;
        let tol = eps * self.diameter();
        let v = &self.verts;
        // anchor the chain at the sharpest corner so that it is never a
        // removal candidate
        let s = (0..k)
            .max_by(|&a, &b| {
                let da = chord_deviation(v[(a + n - 1) % n], v[a], v[a + 1]);
                let db = chord_deviation(v[(b + n - 1) % n], v[b], v[b + 1]);
                da.total_cmp(&db)
            })
            .expect("k > 2");
        let chain: Vec<Vec2> = (0..=k).map(|t| v[(s + t) % n]).collect();
        let mut kept = vec![0usize];
        let mut anchor = 0;
        for j in 1..k {
            let next = chain[j + 1];
            let skippable = (anchor + 1..=j).all(|t| chord_deviation(chain[anchor], chain[t], next) <= tol);
            if !skippable {
                kept.push(j);
                anchor = j;
            }
        }
        if kept.len() < 2 {
            let far = (1..k)
                .max_by(|&a, &b| {
                    let da = chord_deviation(chain[0], chain[a], chain[k]);
                    let db = chord_deviation(chain[0], chain[b], chain[k]);
                    da.total_cmp(&db)
                })
                .expect("k > 2");
            kept.push(far);
        }
        if kept.len() == k {
            return self.clone();
        }
        let half: Vec<Vec2> = kept.iter().map(|&i| chain[i]).collect();
        let ring: Vec<Vec2> = half.iter().copied().chain(half.iter().map(|&w| -w)).collect();
        Self::from_ccw_ring(&ring).unwrap_or_else(|_| self.clone())
    }

    /// Largest `|⟨a[j], v⟩ − 1|` over vertices lying on edge `j`; a
    /// consistency check between the two representations.
    pub fn boundary_residual(&self) -> f64 {
        let n = self.verts.len();
        (0..n)
            .flat_map(|j| {
                let a = self.duals[j];
                [(a.dot(self.verts[j]) - 1.0).abs(), (a.dot(self.verts[(j + 1) % n]) - 1.0).abs()]
            })
            .fold(0.0, f64::max)
    }
}

fn point_segment_distance(x: Vec2, p: Vec2, q: Vec2) -> f64 {
    let d = q - p;
    let len2 = d.norm_sq();
    if len2 == 0.0 {
        return x.dist(p);
    }
    let t = ((x - p).dot(d) / len2).clamp(0.0, 1.0);
    x.dist(p + d * t)
}

/// Free-function form of [`SymPolygon::absco_hull`].
pub fn absco_hull(points: &[Vec2]) -> Result<SymPolygon> {
    SymPolygon::absco_hull(points)
}

pub fn minkowski_norm(p: &SymPolygon, x: Vec2) -> f64 {
    p.minkowski_norm(x)
}

pub fn clip(p: &SymPolygon, pairs: &[HalfplanePair]) -> Result<SymPolygon> {
    p.clip(pairs)
}

pub fn linear_image(p: &SymPolygon, a: &Mat2) -> LinearImage {
    p.linear_image(a)
}

pub fn polar(p: &SymPolygon) -> SymPolygon {
    p.polar()
}

pub fn outer_ratio(q: &SymPolygon, p: &SymPolygon) -> f64 {
    q.outer_ratio(p)
}

pub fn calibrate_to_boundary(p: &SymPolygon, e: Vec2) -> Result<SymPolygon> {
    p.calibrate_to_boundary(e)
}

pub fn hausdorff(p: &SymPolygon, q: &SymPolygon) -> f64 {
    p.hausdorff(q)
}

pub fn prune(p: &SymPolygon, eps: f64) -> SymPolygon {
    p.prune(eps)
}
