//! Tan pieces, figure composition and exact 45° view rotation.
//!
//! Coordinates are in tan units: the small triangle has legs of length 1, so
//! the full set of seven pieces covers an area of 8.

use alloc::{format, string::String, vec::Vec};
use core::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Coordinate tolerance used throughout the geometry code.
pub const EPS: f64 = 1e-9;

/// Largest interior overlap tolerated between two placed pieces.
pub const OVERLAP_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TanKind {
    LargeTriangleA,
    LargeTriangleB,
    MediumTriangle,
    SmallTriangleA,
    SmallTriangleB,
    Square,
    Parallelogram,
}

impl TanKind {
    pub const ALL: [TanKind; 7] = [
        TanKind::LargeTriangleA,
        TanKind::LargeTriangleB,
        TanKind::MediumTriangle,
        TanKind::SmallTriangleA,
        TanKind::SmallTriangleB,
        TanKind::Square,
        TanKind::Parallelogram,
    ];

    /// Counterclockwise vertices of the unplaced piece.
    pub fn canonical_vertices(self) -> Vec<Point> {
        let p = Point::new;
        match self {
            TanKind::LargeTriangleA | TanKind::LargeTriangleB => {
                alloc::vec![p(0.0, 0.0), p(2.0, 0.0), p(0.0, 2.0)]
            }
            TanKind::MediumTriangle => alloc::vec![p(0.0, 0.0), p(2.0, 0.0), p(1.0, 1.0)],
            TanKind::SmallTriangleA | TanKind::SmallTriangleB => {
                alloc::vec![p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0)]
            }
            TanKind::Square => alloc::vec![p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)],
            TanKind::Parallelogram => {
                alloc::vec![p(0.0, 0.0), p(1.0, 0.0), p(2.0, 1.0), p(1.0, 1.0)]
            }
        }
    }

    /// Only the parallelogram changes under reflection.
    pub fn is_chiral(self) -> bool {
        self == TanKind::Parallelogram
    }
}

/// The seven classic tans with their canonical outlines.
pub fn tans_catalog() -> Vec<(TanKind, Vec<Point>)> {
    TanKind::ALL
        .iter()
        .map(|&k| (k, k.canonical_vertices()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedTan {
    pub kind: TanKind,
    pub translation: Point,
    /// Multiples of 45°, counterclockwise.
    pub rotation_steps: u8,
    #[serde(default)]
    pub mirrored: bool,
}

impl PlacedTan {
    pub fn new(kind: TanKind, tx: f64, ty: f64, rotation_steps: u8) -> Self {
        PlacedTan {
            kind,
            translation: Point::new(tx, ty),
            rotation_steps,
            mirrored: false,
        }
    }

    pub fn mirrored(mut self) -> Self {
        self.mirrored = true;
        self
    }

    /// World-space outline: mirror, then rotate about the origin, then translate.
    pub fn vertices(&self) -> Vec<Point> {
        let mut verts = self.kind.canonical_vertices();
        if self.mirrored {
            // reflection flips orientation; reverse to stay counterclockwise
            verts = verts.into_iter().rev().map(|v| Point::new(-v.x, v.y)).collect();
        }
        let (c, s) = step_cos_sin(self.rotation_steps);
        verts
            .into_iter()
            .map(|v| {
                Point::new(
                    c * v.x - s * v.y + self.translation.x,
                    s * v.x + c * v.y + self.translation.y,
                )
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureSpec {
    pub id: u32,
    pub name: String,
    pub pieces: Vec<PlacedTan>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    DuplicateKind { kind: TanKind },
    Overlap { first: usize, second: usize, area: f64 },
    RotationOutOfRange { piece: usize, steps: u8 },
    Empty,
}

impl core::fmt::Display for Violation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Violation::DuplicateKind { kind } => write!(f, "duplicate kind {kind:?}"),
            Violation::Overlap { first, second, area } => {
                write!(f, "overlap between pieces {first} and {second} (area {area:.6})")
            }
            Violation::RotationOutOfRange { piece, steps } => {
                write!(f, "piece {piece} has rotation_steps {steps} outside 0..8")
            }
            Violation::Empty => write!(f, "figure has no pieces"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl core::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

pub fn validate_figure(spec: &FigureSpec) -> ValidationReport {
    let mut violations = Vec::new();
    if spec.pieces.is_empty() {
        violations.push(Violation::Empty);
    }
    let mut seen: Vec<TanKind> = Vec::new();
    for (i, piece) in spec.pieces.iter().enumerate() {
        if seen.contains(&piece.kind) {
            violations.push(Violation::DuplicateKind { kind: piece.kind });
        } else {
            seen.push(piece.kind);
        }
        if piece.rotation_steps >= 8 {
            violations.push(Violation::RotationOutOfRange { piece: i, steps: piece.rotation_steps });
        }
    }
    let outlines: Vec<Vec<Point>> = spec.pieces.iter().map(PlacedTan::vertices).collect();
    for i in 0..outlines.len() {
        for j in i + 1..outlines.len() {
            let area = convex_intersection_area(&outlines[i], &outlines[j]);
            if area > OVERLAP_TOLERANCE {
                violations.push(Violation::Overlap { first: i, second: j, area });
            }
        }
    }
    ValidationReport { violations }
}

/// A set of simple counterclockwise polygons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonSet {
    pub polygons: Vec<Vec<Point>>,
}

impl PolygonSet {
    pub fn new(polygons: Vec<Vec<Point>>) -> Self {
        PolygonSet { polygons }
    }

    pub fn area(&self) -> f64 {
        self.polygons.iter().map(|p| signed_area(p)).sum()
    }

    /// Area-weighted centroid. `None` when the set has no area.
    pub fn centroid(&self) -> Option<Point> {
        let mut total = 0.0;
        let (mut cx, mut cy) = (0.0, 0.0);
        for poly in &self.polygons {
            let n = poly.len();
            for i in 0..n {
                let a = poly[i];
                let b = poly[(i + 1) % n];
                let cross = a.x * b.y - b.x * a.y;
                total += cross;
                cx += (a.x + b.x) * cross;
                cy += (a.y + b.y) * cross;
            }
        }
        if total.abs() < EPS {
            return None;
        }
        Some(Point::new(cx / (3.0 * total), cy / (3.0 * total)))
    }

    pub fn vertices(&self) -> impl Iterator<Item = &Point> {
        self.polygons.iter().flatten()
    }

    /// Rotate every vertex by an arbitrary angle (radians) about `pivot`.
    pub fn rotated_about(&self, angle: f64, pivot: Point) -> PolygonSet {
        let (s, c) = (libm::sin(angle), libm::cos(angle));
        self.map(|v| rotate_point(v, pivot, c, s))
    }

    pub fn map(&self, f: impl Fn(Point) -> Point) -> PolygonSet {
        PolygonSet {
            polygons: self
                .polygons
                .iter()
                .map(|poly| poly.iter().map(|&v| f(v)).collect())
                .collect(),
        }
    }
}

pub fn to_polygons(spec: &FigureSpec) -> Result<PolygonSet> {
    let report = validate_figure(spec);
    if !report.is_ok() {
        return Err(Error::InvalidFigure(format!("figure {} ({}): {report}", spec.id, spec.name)));
    }
    Ok(PolygonSet::new(spec.pieces.iter().map(PlacedTan::vertices).collect()))
}

/// Rotate a polygon set by `k`·45° about its area centroid. `k` is taken modulo 8.
pub fn rotate_view(polys: &PolygonSet, k: u8) -> PolygonSet {
    let k = k % 8;
    if k == 0 {
        return polys.clone();
    }
    let Some(pivot) = polys.centroid() else {
        return polys.clone();
    };
    let (c, s) = step_cos_sin(k);
    polys.map(|v| rotate_point(v, pivot, c, s))
}

fn rotate_point(v: Point, pivot: Point, c: f64, s: f64) -> Point {
    let (dx, dy) = (v.x - pivot.x, v.y - pivot.y);
    Point::new(pivot.x + c * dx - s * dy, pivot.y + s * dx + c * dy)
}

/// Exact cosine and sine of `k`·45°.
fn step_cos_sin(k: u8) -> (f64, f64) {
    const H: f64 = FRAC_1_SQRT_2;
    const TABLE: [(f64, f64); 8] = [
        (1.0, 0.0),
        (H, H),
        (0.0, 1.0),
        (-H, H),
        (-1.0, 0.0),
        (-H, -H),
        (0.0, -1.0),
        (H, -H),
    ];
    TABLE[(k % 8) as usize]
}

/// Shoelace area; positive for counterclockwise polygons.
pub fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    let mut sum = 0.0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        sum += a.x * b.y - b.x * a.y;
    }
    0.5 * sum
}

/// Intersection area of two convex counterclockwise polygons
/// (Sutherland-Hodgman clipping of `subject` against `clip`).
pub fn convex_intersection_area(subject: &[Point], clip: &[Point]) -> f64 {
    let mut output: Vec<Point> = subject.to_vec();
    let n = clip.len();
    for i in 0..n {
        if output.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % n];
        let side = |p: Point| (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
        let input = core::mem::take(&mut output);
        let m = input.len();
        for j in 0..m {
            let cur = input[j];
            let prev = input[(j + m - 1) % m];
            let (sc, sp) = (side(cur), side(prev));
            if sc >= 0.0 {
                if sp < 0.0 {
                    output.push(intersect(prev, cur, sp, sc));
                }
                output.push(cur);
            } else if sp >= 0.0 {
                output.push(intersect(prev, cur, sp, sc));
            }
        }
    }
    if output.len() < 3 {
        0.0
    } else {
        signed_area(&output).max(0.0)
    }
}

fn intersect(p: Point, q: Point, sp: f64, sq: f64) -> Point {
    let t = sp / (sp - sq);
    Point::new(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y))
}
