//! Binary rasterization of polygon sets.

use alloc::{vec, vec::Vec};

use serde::{Deserialize, Serialize};

use crate::geometry::{rotate_view, to_polygons, FigureSpec, Point, PolygonSet};
use crate::{Error, Result};

/// Empty pixels kept around the fitted silhouette on every side.
pub const MARGIN: f64 = 2.0;
pub const DEFAULT_SIZE: usize = 64;
pub const MIN_SIZE: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RasterView {
    pub width: usize,
    pub height: usize,
    /// Row-major, row 0 at the top; 1 = figure, 0 = background.
    pub pixels: Vec<u8>,
    pub figure_id: u32,
    pub angle_steps: u8,
}

impl RasterView {
    pub fn blank(width: usize, height: usize) -> Self {
        RasterView { width, height, pixels: vec![0; width * height], figure_id: 0, angle_steps: 0 }
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    pub fn filled(&self) -> usize {
        self.pixels.iter().filter(|&&p| p != 0).count()
    }

    pub fn fill_fraction(&self) -> f64 {
        self.filled() as f64 / (self.width * self.height) as f64
    }

    /// Smallest distance in pixels between the filled region and any border.
    /// `None` for an empty raster.
    pub fn margin(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for r in 0..self.height {
            for c in 0..self.width {
                if self.get(r, c) != 0 {
                    let d = r.min(c).min(self.height - 1 - r).min(self.width - 1 - c);
                    best = Some(best.map_or(d, |b| b.min(d)));
                }
            }
        }
        best
    }

    /// The raster turned by 180° in pixel space.
    pub fn rotated_half_turn(&self) -> RasterView {
        let mut out = self.clone();
        out.pixels.reverse();
        out
    }

    /// SHA-256 over dimensions and pixels; ids are not part of the hash.
    pub fn content_hash(&self) -> alloc::string::String {
        let mut bytes = Vec::with_capacity(16 + self.pixels.len());
        bytes.extend_from_slice(&(self.width as u64).to_le_bytes());
        bytes.extend_from_slice(&(self.height as u64).to_le_bytes());
        bytes.extend_from_slice(&self.pixels);
        crate::seed::sha256_hex(&bytes)
    }
}

/// Maps world coordinates to pixel coordinates (x right, y up in world;
/// rows grow downward).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitTransform {
    pub scale: f64,
    /// Pixel position of the world point `anchor`.
    pub center_px: Point,
    pub anchor: Point,
}

impl FitTransform {
    /// Fit the bounding box into the canvas, centered, with the margin kept.
    pub fn bounding_box(polys: &PolygonSet, width: usize, height: usize) -> Result<Self> {
        check_canvas(polys, width, height)?;
        let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for v in polys.vertices() {
            x0 = x0.min(v.x);
            y0 = y0.min(v.y);
            x1 = x1.max(v.x);
            y1 = y1.max(v.y);
        }
        let (bw, bh) = (x1 - x0, y1 - y0);
        let avail_w = width as f64 - 2.0 * MARGIN;
        let avail_h = height as f64 - 2.0 * MARGIN;
        let scale = match (bw > 0.0, bh > 0.0) {
            (true, true) => (avail_w / bw).min(avail_h / bh),
            _ => return Err(Error::DegenerateGeometry),
        };
        Ok(FitTransform {
            scale,
            center_px: Point::new(width as f64 / 2.0, height as f64 / 2.0),
            anchor: Point::new((x0 + x1) / 2.0, (y0 + y1) / 2.0),
        })
    }

    /// Fit the circle around the area centroid that encloses every vertex.
    /// The transform is unchanged when the set is rotated about its centroid,
    /// so all views of one figure share a scale.
    pub fn rotation_invariant(polys: &PolygonSet, width: usize, height: usize) -> Result<Self> {
        check_canvas(polys, width, height)?;
        let c = polys.centroid().ok_or(Error::DegenerateGeometry)?;
        let radius = polys
            .vertices()
            .map(|v| libm::hypot(v.x - c.x, v.y - c.y))
            .fold(0.0, f64::max);
        if radius <= 0.0 {
            return Err(Error::DegenerateGeometry);
        }
        let avail = (width.min(height) as f64 - 2.0 * MARGIN) / 2.0;
        Ok(FitTransform {
            scale: avail / radius,
            center_px: Point::new(width as f64 / 2.0, height as f64 / 2.0),
            anchor: c,
        })
    }

    pub fn apply(&self, p: Point) -> Point {
        Point::new(
            self.center_px.x + self.scale * (p.x - self.anchor.x),
            self.center_px.y - self.scale * (p.y - self.anchor.y),
        )
    }
}

fn check_canvas(polys: &PolygonSet, width: usize, height: usize) -> Result<()> {
    if width < MIN_SIZE || height < MIN_SIZE {
        return Err(Error::InvalidArgument(alloc::format!(
            "raster size {width}x{height} below minimum {MIN_SIZE}"
        )));
    }
    if polys.polygons.is_empty() || polys.area().abs() <= crate::geometry::EPS {
        return Err(Error::DegenerateGeometry);
    }
    Ok(())
}

/// Scale and center the set to fit with a 2-pixel margin and fill pixels
/// whose centers fall inside any polygon.
pub fn rasterize(polys: &PolygonSet, width: usize, height: usize) -> Result<RasterView> {
    let fit = FitTransform::bounding_box(polys, width, height)?;
    Ok(rasterize_with(polys, width, height, &fit))
}

/// Scanline fill at pixel centers, even-odd per polygon, union across polygons.
pub fn rasterize_with(polys: &PolygonSet, width: usize, height: usize, fit: &FitTransform) -> RasterView {
    let mut out = RasterView::blank(width, height);
    let px: Vec<Vec<Point>> = polys
        .polygons
        .iter()
        .map(|poly| poly.iter().map(|&v| fit.apply(v)).collect())
        .collect();
    let mut crossings: Vec<f64> = Vec::new();
    for row in 0..height {
        let yc = row as f64 + 0.5;
        let line = &mut out.pixels[row * width..(row + 1) * width];
        for poly in &px {
            crossings.clear();
            let n = poly.len();
            for i in 0..n {
                let (a, b) = (poly[i], poly[(i + 1) % n]);
                // half-open rule: each edge owns its lower endpoint only
                if (a.y <= yc) != (b.y <= yc) {
                    crossings.push(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
                }
            }
            crossings.sort_by(f64::total_cmp);
            for span in crossings.chunks_exact(2) {
                // columns whose center c+0.5 lies in [span0, span1)
                let start = libm::ceil(span[0] - 0.5).max(0.0) as usize;
                let end = (libm::ceil(span[1] - 0.5).max(0.0) as usize).min(width);
                for p in line.iter_mut().take(end).skip(start) {
                    *p = 1;
                }
            }
        }
    }
    out
}

/// Render `figure` rotated by `angle_steps`·45° with the rotation-invariant fit.
pub fn render_view(figure: &FigureSpec, angle_steps: u8, width: usize, height: usize) -> Result<RasterView> {
    let polys = to_polygons(figure)?;
    let fit = FitTransform::rotation_invariant(&polys, width, height)?;
    let rotated = rotate_view(&polys, angle_steps % 8);
    let mut view = rasterize_with(&rotated, width, height, &fit);
    view.figure_id = figure.id;
    view.angle_steps = angle_steps % 8;
    Ok(view)
}

/// Every figure rendered at all eight angles, indexed `[figure][angle]`.
#[derive(Debug, Clone)]
pub struct ViewBank {
    pub figures: Vec<FigureSpec>,
    views: Vec<[RasterView; 8]>,
}

impl ViewBank {
    pub fn new(figures: &[FigureSpec], width: usize, height: usize) -> Result<Self> {
        let mut views = Vec::with_capacity(figures.len());
        for (i, f) in figures.iter().enumerate() {
            if f.id as usize != i {
                return Err(Error::InvalidFigure(alloc::format!(
                    "figure at position {i} has id {}",
                    f.id
                )));
            }
            let mut row: Vec<RasterView> = Vec::with_capacity(8);
            for k in 0..8u8 {
                row.push(render_view(f, k, width, height)?);
            }
            views.push(row.try_into().expect("eight views"));
        }
        Ok(ViewBank { figures: figures.to_vec(), views })
    }

    pub fn view(&self, figure_id: usize, angle: u8) -> &RasterView {
        &self.views[figure_id][(angle % 8) as usize]
    }

    pub fn len(&self) -> usize {
        self.views.len()
    }

    pub fn is_empty(&self) -> bool {
        self.views.is_empty()
    }

    pub fn width(&self) -> usize {
        self.views.first().map_or(0, |v| v[0].width)
    }

    pub fn height(&self) -> usize {
        self.views.first().map_or(0, |v| v[0].height)
    }
}
