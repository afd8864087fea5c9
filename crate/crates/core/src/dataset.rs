//! Procedural silhouette corpus used to pretrain the perceiver.
//!
//! Each class is an archetype outline (arrow, house, bird, ...). Samples are
//! drawn by jittering the vertices, stretching the outline slightly and
//! rotating it by a uniformly random angle before rasterizing. Classes past
//! the sixteen hand-drawn archetypes are seeded random star polygons.

use alloc::{format, string::String, vec, vec::Vec};
use core::f64::consts::TAU;

use rand::Rng as _;

use crate::geometry::{Point, PolygonSet};
use crate::nn::LabeledRaster;
use crate::raster::{rasterize_with, FitTransform};
use crate::seed;
use crate::Result;

/// Names of the hand-drawn archetypes, which double as the default vocabulary.
pub const ARCHETYPE_NAMES: [&str; 16] = [
    "arrow", "house", "bird", "fish", "boat", "tree", "cat", "star", "cross", "heart", "bottle", "key",
    "crown", "moon", "rocket", "person",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SilhouetteConfig {
    pub classes: usize,
    pub per_class: usize,
    pub width: usize,
    pub height: usize,
    /// Vertex noise as a fraction of the outline radius.
    pub jitter: f64,
    pub seed: u64,
}

impl Default for SilhouetteConfig {
    fn default() -> Self {
        SilhouetteConfig { classes: 16, per_class: 200, width: 64, height: 64, jitter: 0.04, seed: 0 }
    }
}

/// Label name for class `i`.
pub fn class_name(i: usize) -> String {
    ARCHETYPE_NAMES.get(i).map_or_else(|| format!("shape{i}"), |s| String::from(*s))
}

fn poly(pts: &[(f64, f64)]) -> Vec<Point> {
    let mut v: Vec<Point> = pts.iter().map(|&(x, y)| Point::new(x, y)).collect();
    if crate::geometry::signed_area(&v) < 0.0 {
        v.reverse();
    }
    v
}

fn regular_star(points: usize, outer: f64, inner: f64, cx: f64, cy: f64) -> Vec<(f64, f64)> {
    (0..2 * points)
        .map(|i| {
            let r = if i % 2 == 0 { outer } else { inner };
            let a = TAU * i as f64 / (2 * points) as f64 + TAU / 4.0;
            (cx + r * libm::cos(a), cy + r * libm::sin(a))
        })
        .collect()
}

/// Outline of archetype `class`. Classes beyond the named set get a seeded
/// random star polygon.
pub fn archetype(class: usize) -> PolygonSet {
    let shape: Vec<Vec<Point>> = match class {
        0 => vec![poly(&[(0.0, 1.0), (3.0, 1.0), (3.0, 0.0), (5.0, 2.0), (3.0, 4.0), (3.0, 3.0), (0.0, 3.0)])],
        1 => vec![poly(&[(0.0, 0.0), (4.0, 0.0), (4.0, 3.0), (2.0, 5.0), (0.0, 3.0)])],
        2 => vec![poly(&[
            (0.0, 3.0), (2.0, 2.5), (3.0, 0.5), (3.6, 2.4), (6.0, 3.5), (3.4, 3.2), (2.2, 3.6),
        ])],
        3 => vec![poly(&[
            (0.0, 2.0), (1.5, 3.3), (3.5, 3.3), (5.0, 2.2), (6.0, 3.4), (6.0, 0.6), (5.0, 1.8), (3.5, 0.7),
            (1.5, 0.7),
        ])],
        4 => vec![
            poly(&[(0.0, 1.2), (6.0, 1.2), (5.0, 0.0), (1.0, 0.0)]),
            poly(&[(3.2, 1.5), (3.2, 5.5), (5.2, 1.5)]),
        ],
        5 => vec![
            poly(&[(2.5, 0.0), (3.5, 0.0), (3.5, 1.4), (2.5, 1.4)]),
            poly(&[(0.5, 1.5), (5.5, 1.5), (3.0, 6.0)]),
        ],
        6 => vec![poly(&[
            (0.0, 0.0), (4.0, 0.0), (4.0, 2.5), (5.0, 3.2), (4.4, 4.6), (4.0, 3.8), (3.4, 3.8), (3.0, 4.6),
            (2.6, 3.0), (0.6, 2.4), (-0.6, 3.6), (-0.4, 1.8),
        ])],
        7 => vec![poly(&regular_star(5, 3.0, 1.2, 0.0, 0.0))],
        8 => vec![poly(&[
            (1.0, 0.0), (2.0, 0.0), (2.0, 1.0), (3.0, 1.0), (3.0, 2.0), (2.0, 2.0), (2.0, 3.0), (1.0, 3.0),
            (1.0, 2.0), (0.0, 2.0), (0.0, 1.0), (1.0, 1.0),
        ])],
        9 => vec![poly(&[
            (2.0, 0.0), (4.0, 2.4), (3.9, 3.4), (3.0, 3.8), (2.0, 3.0), (1.0, 3.8), (0.1, 3.4), (0.0, 2.4),
        ])],
        10 => vec![poly(&[
            (0.6, 0.0), (2.4, 0.0), (2.4, 3.0), (1.7, 3.8), (1.7, 5.0), (1.3, 5.0), (1.3, 3.8), (0.6, 3.0),
        ])],
        11 => vec![
            poly(&regular_star(8, 1.3, 1.2, 1.3, 1.3)),
            poly(&[(2.5, 1.0), (6.5, 1.0), (6.5, 0.2), (5.8, 0.2), (5.8, 0.6), (5.0, 0.6), (5.0, 0.2), (2.5, 0.2)]),
        ],
        12 => vec![poly(&[
            (0.0, 0.0), (5.0, 0.0), (5.0, 3.5), (3.8, 1.8), (2.5, 4.0), (1.2, 1.8), (0.0, 3.5),
        ])],
        13 => {
            let outer: Vec<(f64, f64)> = (0..=12)
                .map(|i| {
                    let a = -TAU / 4.0 + TAU / 2.0 * i as f64 / 12.0;
                    (2.0 * libm::cos(a), 2.0 * libm::sin(a))
                })
                .collect();
            let inner: Vec<(f64, f64)> = (0..=12)
                .rev()
                .map(|i| {
                    let a = -TAU / 4.0 + TAU / 2.0 * i as f64 / 12.0;
                    (0.9 * libm::cos(a), 2.0 * libm::sin(a))
                })
                .collect();
            let mut pts = outer;
            pts.extend(inner.into_iter().skip(1).take(11));
            vec![poly(&pts)]
        }
        14 => vec![poly(&[
            (1.0, 0.0), (1.5, 1.0), (2.5, 1.0), (3.0, 0.0), (3.0, 1.5), (2.6, 2.0), (2.6, 4.5), (2.0, 6.0),
            (1.4, 4.5), (1.4, 2.0), (1.0, 1.5),
        ])],
        15 => vec![
            poly(&[
                (0.8, 0.0), (1.4, 0.0), (1.8, 2.0), (2.2, 0.0), (2.8, 0.0), (2.4, 2.6), (3.6, 3.4), (3.4, 3.8),
                (2.2, 3.6), (1.4, 3.6), (0.2, 3.8), (0.0, 3.4), (1.2, 2.6),
            ]),
            poly(&regular_star(6, 0.6, 0.6, 1.8, 4.4)),
        ],
        _ => {
            let mut rng = seed::rng(seed::derive(0x5eed, "archetype", class as u64));
            let n = rng.gen_range(5..10);
            let pts: Vec<(f64, f64)> = (0..n)
                .map(|i| {
                    let r = rng.gen_range(0.8..3.0);
                    let a = TAU * (i as f64 + rng.gen_range(-0.3..0.3)) / n as f64;
                    (r * libm::cos(a), r * libm::sin(a))
                })
                .collect();
            vec![poly(&pts)]
        }
    };
    PolygonSet::new(shape)
}

/// Draw one augmented silhouette of `class`.
pub fn sample_silhouette(class: usize, cfg: &SilhouetteConfig, rng: &mut seed::Rng) -> Result<crate::raster::RasterView> {
    let base = archetype(class);
    let c = base.centroid().ok_or(crate::Error::DegenerateGeometry)?;
    let radius = base.vertices().map(|v| libm::hypot(v.x - c.x, v.y - c.y)).fold(0.0, f64::max);
    let sx = rng.gen_range(0.85..1.15);
    let sy = rng.gen_range(0.85..1.15);
    let noise = cfg.jitter * radius;
    let mut jittered = base.map(|v| Point::new(c.x + sx * (v.x - c.x), c.y + sy * (v.y - c.y)));
    for p in jittered.polygons.iter_mut().flatten() {
        p.x += noise * seed::normal(rng);
        p.y += noise * seed::normal(rng);
    }
    let pivot = jittered.centroid().ok_or(crate::Error::DegenerateGeometry)?;
    let turned = jittered.rotated_about(rng.gen_range(0.0..TAU), pivot);
    let fit = FitTransform::rotation_invariant(&turned, cfg.width, cfg.height)?;
    let mut view = rasterize_with(&turned, cfg.width, cfg.height, &fit);
    view.figure_id = class as u32;
    Ok(view)
}

/// The full labelled corpus, class-major, fully determined by `cfg.seed`.
pub fn silhouette_dataset(cfg: &SilhouetteConfig) -> Result<Vec<LabeledRaster>> {
    let mut out = Vec::with_capacity(cfg.classes * cfg.per_class);
    for class in 0..cfg.classes {
        let mut rng = seed::rng(seed::derive(cfg.seed, "silhouette", class as u64));
        for _ in 0..cfg.per_class {
            out.push(LabeledRaster { raster: sample_silhouette(class, cfg, &mut rng)?, label: class });
        }
    }
    Ok(out)
}
