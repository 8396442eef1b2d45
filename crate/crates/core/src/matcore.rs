//! Real 2×2 matrices, finite matrix families and brute-force growth bounds.
//!
//! Products are always composed right to left: the word `(σ₁, …, σₙ)` stands
//! for `A_{σₙ} ⋯ A_{σ₂} A_{σ₁}`, so `σ₁` acts first on a vector. Indices are
//! zero based.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polygeom::SymPolygon;

/// Default cap on the number of words `mⁿ` a brute-force routine may visit.
pub const DEFAULT_PRODUCT_BUDGET: u64 = 10_000_000;

/// Angular tolerance (sine of the angle) for declaring a line invariant.
const INVARIANT_LINE_TOL: f64 = 1e-10;
/// Deviations between `INVARIANT_LINE_TOL` and this value are reported as
/// inconclusive rather than irreducible.
const AMBIGUOUS_LINE_TOL: f64 = 1e-7;
/// Relative threshold on the discriminant below which eigenvalues are treated
/// as repeated.
const REPEATED_EIGEN_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the planar cross product.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    /// Counterclockwise angle in `[0, 2π)`.
    pub fn angle(self) -> f64 {
        let a = self.y.atan2(self.x);
        if a < 0.0 {
            a + std::f64::consts::TAU
        } else {
            a
        }
    }

    /// Rotation by +90°.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Vec2::new(a[0], a[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

/// Real 2×2 matrix stored row-major as `[a, b, c, d]` = `[[a, b], [c, d]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat2(pub [f64; 4]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([1.0, 0.0, 0.0, 1.0]);

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2([a, b, c, d])
    }

    /// Checked constructor: every entry must be finite.
    pub fn try_new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let m = Mat2::new(a, b, c, d);
        m.check_finite()?;
        Ok(m)
    }

    pub fn diag(a: f64, d: f64) -> Self {
        Mat2::new(a, 0.0, 0.0, d)
    }

    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Mat2::new(c, -s, s, c)
    }

    pub fn entries(&self) -> [f64; 4] {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("non-finite matrix entry in {self}")))
        }
    }

    pub fn transpose(&self) -> Mat2 {
        let [a, b, c, d] = self.0;
        Mat2::new(a, c, b, d)
    }

    pub fn trace(&self) -> f64 {
        self.0[0] + self.0[3]
    }

    pub fn det(&self) -> f64 {
        let [a, b, c, d] = self.0;
        a * d - b * c
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        let [a, b, c, d] = self.0;
        Mat2::new(a * s, b * s, c * s, d * s)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_symmetric(&self) -> bool {
        self.0[1] == self.0[2]
    }

    pub fn is_singular(&self) -> bool {
        self.det() == 0.0
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        let [a, b, c, d] = self.0;
        Vec2::new(a * v.x + b * v.y, c * v.x + d * v.y)
    }

    /// `((a−d)/2)² + bc`: the discriminant of the characteristic polynomial
    /// divided by four, in the cancellation-free form.
    fn half_discriminant(&self) -> f64 {
        let [a, b, c, d] = self.0;
        let h = 0.5 * (a - d);
        h * h + b * c
    }

    /// Largest eigenvalue modulus from the closed-form quadratic.
    ///
    /// Triangular matrices return `max(|a|, |d|)` exactly.
    pub fn rho(&self) -> f64 {
        let [a, b, c, d] = self.0;
        if b == 0.0 || c == 0.0 {
            return a.abs().max(d.abs());
        }
        let disc = self.half_discriminant();
        if disc >= 0.0 {
            0.5 * (a + d).abs() + disc.sqrt()
        } else {
            // complex pair: |λ|² = det
            self.det().max(0.0).sqrt()
        }
    }

    /// Largest singular value, `√ρ(AᵀA)`.
    pub fn norm_2(&self) -> f64 {
        let [a, b, c, d] = self.0;
        let p = a * a + c * c;
        let q = b * b + d * d;
        let r = a * b + c * d;
        let top = if r == 0.0 {
            p.max(q)
        } else {
            let h = 0.5 * (p - q);
            0.5 * (p + q) + (h * h + r * r).sqrt()
        };
        top.sqrt()
    }

    /// Operator norm induced by the max-abs vector norm (largest row sum).
    pub fn norm_inf(&self) -> f64 {
        let [a, b, c, d] = self.0;
        (a.abs() + b.abs()).max(c.abs() + d.abs())
    }

    /// Real eigen-directions, or `None` when the eigenvalues are complex.
    ///
    /// Returns a flag alongside the lines that is set when the eigenvalues are
    /// numerically repeated, in which case the eigen-direction is unstable.
    fn real_eigenlines(&self) -> Option<(Vec<Vec2>, bool)> {
        let [a, b, c, d] = self.0;
        let s = self.max_abs();
        if s == 0.0 {
            return Some((Vec::new(), false));
        }
        let disc = self.half_discriminant();
        let rel = disc / (s * s);
        if rel < -REPEATED_EIGEN_TOL {
            return None;
        }
        let mid = 0.5 * (a + d);
        let root = disc.max(0.0).sqrt();
        let repeated = rel.abs() <= REPEATED_EIGEN_TOL;
        let lambdas: Vec<f64> = if repeated { vec![mid] } else { vec![mid + root, mid - root] };
        let lines = lambdas
            .into_iter()
            .filter_map(|lambda| {
                let r1 = Vec2::new(b, lambda - a);
                let r2 = Vec2::new(lambda - d, c);
                let v = if r1.norm_sq() >= r2.norm_sq() { r1 } else { r2 };
                let n = v.norm();
                (n > 0.0).then(|| v * (1.0 / n))
            })
            .collect();
        Some((lines, repeated))
    }

    fn is_near_scalar(&self) -> bool {
        let [a, b, c, d] = self.0;
        let tol = 1e-12 * self.max_abs();
        b.abs() <= tol && c.abs() <= tol && (a - d).abs() <= tol
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let [a, b, c, d] = self.0;
        let [e, f, g, h] = o.0;
        Mat2::new(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
    }
}

impl Mul<Vec2> for Mat2 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        self.apply(v)
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.0;
        write!(f, "[[{a}, {b}], [{c}, {d}]]")
    }
}

/// Spectral radius with input validation.
pub fn spectral_radius(a: &Mat2) -> Result<f64> {
    a.check_finite()?;
    Ok(a.rho())
}

/// Largest singular value with input validation.
pub fn operator_norm_2(a: &Mat2) -> Result<f64> {
    a.check_finite()?;
    Ok(a.norm_2())
}

/// Ordered finite family `{A₁, …, Aₘ}` with cached transposes.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixSet {
    members: Vec<Mat2>,
    transposes: Vec<Mat2>,
    scale_hint: Option<f64>,
    product_budget: u64,
}

impl MatrixSet {
    pub fn new(members: Vec<Mat2>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidInput("matrix set must be nonempty".into()));
        }
        for m in &members {
            m.check_finite()?;
        }
        let transposes = members.iter().map(Mat2::transpose).collect();
        Ok(Self { members, transposes, scale_hint: None, product_budget: DEFAULT_PRODUCT_BUDGET })
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.product_budget = budget;
        self
    }

    pub fn with_scale_hint(mut self, hint: f64) -> Result<Self> {
        if !(hint.is_finite() && hint > 0.0) {
            return Err(Error::InvalidInput(format!("scale hint must be positive, got {hint}")));
        }
        self.scale_hint = Some(hint);
        Ok(self)
    }

    pub fn members(&self) -> &[Mat2] {
        &self.members
    }

    pub fn transposes(&self) -> &[Mat2] {
        &self.transposes
    }

    pub fn scale_hint(&self) -> Option<f64> {
        self.scale_hint
    }

    pub fn product_budget(&self) -> u64 {
        self.product_budget
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// The family `{A₁ᵀ, …, Aₘᵀ}`.
    pub fn transposed(&self) -> MatrixSet {
        MatrixSet {
            members: self.transposes.clone(),
            transposes: self.members.clone(),
            scale_hint: self.scale_hint,
            product_budget: self.product_budget,
        }
    }

    /// The family `{cA₁, …, cAₘ}`.
    pub fn scaled(&self, c: f64) -> Result<MatrixSet> {
        let s = MatrixSet::new(self.members.iter().map(|m| m.scale(c)).collect())?;
        Ok(s.with_budget(self.product_budget))
    }

    pub fn has_singular_member(&self) -> bool {
        self.members.iter().any(Mat2::is_singular)
    }

    fn check_budget(&self, n: usize) -> Result<()> {
        let words = (self.len() as f64).powi(n as i32);
        if words > self.product_budget as f64 {
            return Err(Error::ResourceLimit { words, budget: self.product_budget });
        }
        Ok(())
    }
}

/// A word `σ` together with the product `A_{σₙ} ⋯ A_{σ₁}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductWord {
    pub indices: Vec<usize>,
    pub product: Mat2,
}

/// Odometer over all `mⁿ` words; the last index varies fastest.
///
/// Prefix products are cached so advancing costs one multiplication per
/// changed position.
pub struct Products<'a> {
    members: &'a [Mat2],
    indices: Vec<usize>,
    prefix: Vec<Mat2>,
    exhausted: bool,
}

impl<'a> Products<'a> {
    fn new(set: &'a MatrixSet, n: usize) -> Self {
        let mut it = Products {
            members: set.members(),
            indices: vec![0; n],
            prefix: vec![Mat2::IDENTITY; n],
            exhausted: false,
        };
        it.refill(0);
        it
    }

    fn refill(&mut self, from: usize) {
        for k in from..self.indices.len() {
            let prev = if k == 0 { Mat2::IDENTITY } else { self.prefix[k - 1] };
            self.prefix[k] = self.members[self.indices[k]] * prev;
        }
    }

    fn current(&self) -> (&[usize], &Mat2) {
        (&self.indices, self.prefix.last().expect("n >= 1"))
    }

    fn advance(&mut self) {
        let m = self.members.len();
        let mut j = self.indices.len();
        while j > 0 {
            j -= 1;
            if self.indices[j] + 1 < m {
                self.indices[j] += 1;
                for t in &mut self.indices[j + 1..] {
                    *t = 0;
                }
                self.refill(j);
                return;
            }
        }
        self.exhausted = true;
    }
}

impl Iterator for Products<'_> {
    type Item = ProductWord;

    fn next(&mut self) -> Option<ProductWord> {
        if self.exhausted {
            return None;
        }
        let (idx, p) = self.current();
        let word = ProductWord { indices: idx.to_vec(), product: *p };
        self.advance();
        Some(word)
    }
}

/// Stream of all words of length `n` with their products.
pub fn enumerate_products(set: &MatrixSet, n: usize) -> Result<Products<'_>> {
    if n == 0 {
        return Err(Error::InvalidInput("word length must be at least 1".into()));
    }
    set.check_budget(n)?;
    Ok(Products::new(set, n))
}

/// Visits every product of length `n` without allocating per word.
pub(crate) fn for_each_product<F>(set: &MatrixSet, n: usize, mut f: F) -> Result<()>
where
    F: FnMut(&[usize], &Mat2) -> Result<()>,
{
    let mut it = enumerate_products(set, n)?;
    while !it.exhausted {
        let (idx, p) = it.current();
        f(idx, p)?;
        it.advance();
    }
    Ok(())
}

/// Vector norm used to induce the operator norm in [`bounds_rho_n`].
#[derive(Clone, Debug, PartialEq)]
pub enum NormTag {
    Euclidean,
    MaxAbs,
    Polygonal(SymPolygon),
}

impl NormTag {
    pub fn kind(&self) -> NormKind {
        match self {
            NormTag::Euclidean => NormKind::Euclidean,
            NormTag::MaxAbs => NormKind::MaxAbs,
            NormTag::Polygonal(_) => NormKind::Polygonal,
        }
    }

    pub fn operator_norm(&self, a: &Mat2) -> f64 {
        match self {
            NormTag::Euclidean => a.norm_2(),
            NormTag::MaxAbs => a.norm_inf(),
            NormTag::Polygonal(p) => p.operator_norm(a),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    Euclidean,
    MaxAbs,
    Polygonal,
}

/// `ρ̄ₙ ≤ ρ(𝒜) ≤ ρₙ` for one order `n` and one norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundPair {
    pub lower: f64,
    pub upper: f64,
    pub order: usize,
    pub norm: NormKind,
}

/// Brute-force bracket: `max ρ(A_σ)^{1/n}` and `max ‖A_σ‖^{1/n}` over all words.
pub fn bounds_rho_n(set: &MatrixSet, n: usize, norm: &NormTag) -> Result<BoundPair> {
    let mut lo = 0.0_f64;
    let mut hi = 0.0_f64;
    for_each_product(set, n, |_, p| {
        p.check_finite()?;
        lo = lo.max(p.rho());
        hi = hi.max(norm.operator_norm(p));
        Ok(())
    })?;
    let inv = 1.0 / n as f64;
    let (lower, upper) = (lo.powf(inv), hi.powf(inv));
    Ok(BoundPair { lower: lower.min(upper), upper, order: n, norm: norm.kind() })
}

/// Outcome of the two-dimensional common-eigenvector test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Irreducibility {
    Irreducible,
    Reducible { witness: Vec2 },
    Inconclusive,
}

/// Sine of the angle between the line through `u` and its image under `b`;
/// zero when `b` maps the line to the origin.
fn line_deviation(u: Vec2, b: &Mat2) -> f64 {
    let w = b.apply(u);
    let nw = w.norm();
    if nw <= 1e-14 * b.max_abs().max(f64::MIN_POSITIVE) * u.norm() {
        return 0.0;
    }
    u.cross(w).abs() / (u.norm() * nw)
}

/// In the plane a family is reducible exactly when all members share a real
/// eigenvector line.
pub fn check_irreducible(set: &MatrixSet) -> Irreducibility {
    let mut pivot = None;
    for m in set.members() {
        match m.real_eigenlines() {
            None => return Irreducibility::Irreducible,
            Some(lines) => {
                if pivot.is_none() && !m.is_near_scalar() {
                    pivot = Some(lines);
                }
            }
        }
    }
    let Some((lines, repeated)) = pivot else {
        // every member is a multiple of the identity: every line is invariant
        return Irreducibility::Reducible { witness: Vec2::new(1.0, 0.0) };
    };
    let mut best: Option<(f64, Vec2)> = None;
    for u in lines {
        let dev = set.members().iter().map(|b| line_deviation(u, b)).fold(0.0, f64::max);
        if best.is_none_or(|(d, _)| dev < d) {
            best = Some((dev, u));
        }
    }
    match best {
        Some((dev, u)) if dev <= INVARIANT_LINE_TOL => Irreducibility::Reducible { witness: u },
        Some((dev, _)) if dev <= AMBIGUOUS_LINE_TOL || repeated => Irreducibility::Inconclusive,
        Some(_) => Irreducibility::Irreducible,
        None => Irreducibility::Inconclusive,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShortcutKind {
    /// Every member equals its transpose.
    AllSymmetric,
    /// The family is closed under transposition.
    TransposeClosed,
}

/// Exact joint spectral radius from the symmetric-case shortcut.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactRadius {
    pub rho: f64,
    /// Zero-based index of the member attaining `rho`.
    pub witness: usize,
    pub kind: ShortcutKind,
}

/// For symmetric members the Euclidean norm is extremal and `ρ(𝒜) = maxᵢ ρ(Aᵢ)`;
/// for transpose-closed families `ρ(𝒜) = maxᵢ √ρ(AᵢᵀAᵢ)`.
pub fn symmetric_shortcut(set: &MatrixSet) -> Option<ExactRadius> {
    let argmax = |vals: Vec<f64>| {
        vals.into_iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, v)| if v > bv { (i, v) } else { (bi, bv) })
    };
    if set.members().iter().all(Mat2::is_symmetric) {
        let (witness, rho) = argmax(set.members().iter().map(Mat2::rho).collect());
        return Some(ExactRadius { rho, witness, kind: ShortcutKind::AllSymmetric });
    }
    let closed = set.transposes().iter().all(|t| set.members().contains(t));
    if closed {
        let (witness, rho) = argmax(set.members().iter().map(Mat2::norm_2).collect());
        return Some(ExactRadius { rho, witness, kind: ShortcutKind::TransposeClosed });
    }
    None
}

/// `r_k(𝒜, x) = max_σ ‖A_σ x‖` over words of length `k`, in the gauge of `ball`.
pub fn seminorm_r(set: &MatrixSet, k: usize, x: Vec2, ball: &SymPolygon) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidInput("seminorm order must be at least 1".into()));
    }
    set.check_budget(k)?;
    fn descend(members: &[Mat2], depth: usize, v: Vec2, ball: &SymPolygon, best: &mut f64) {
        if depth == 0 {
            *best = best.max(ball.minkowski_norm(v));
            return;
        }
        for a in members {
            descend(members, depth - 1, a.apply(v), ball, best);
        }
    }
    let mut best = 0.0;
    descend(set.members(), k, x, ball, &mut best);
    Ok(best)
}
