//! The six canonical tangram figures used by every experiment.

use alloc::{string::ToString, vec, vec::Vec};

use crate::geometry::{FigureSpec, PlacedTan, TanKind};

/// Number of figures on a board.
pub const BOARD_SIZE: usize = 6;

/// Schema version of the figure library file.
pub const FIGURE_SCHEMA_VERSION: u32 = 1;

pub fn default_figures() -> Vec<FigureSpec> {
    use TanKind::*;
    let t = PlacedTan::new;
    let fig = |id: u32, name: &str, pieces: Vec<PlacedTan>| FigureSpec {
        id,
        name: name.to_string(),
        pieces,
    };
    vec![
        // classic square, standing on a corner
        fig(
            0,
            "square",
            vec![
                t(LargeTriangleA, 0.0, 0.0, 2),
                t(LargeTriangleB, 0.0, 0.0, 0),
                t(MediumTriangle, 1.0, -1.0, 4),
                t(Square, 0.0, -1.0, 0),
                t(SmallTriangleA, 1.0, 0.0, 6),
                t(SmallTriangleB, 0.0, 0.0, 4),
                t(Parallelogram, 0.0, -1.0, 0).mirrored(),
            ],
        ),
        fig(
            1,
            "house",
            vec![
                t(LargeTriangleA, 2.0, 2.0, 2),
                t(LargeTriangleB, 2.0, 2.0, 0),
                t(Square, 1.0, 0.0, 0),
                t(Parallelogram, 1.0, 1.0, 0),
                t(SmallTriangleA, 3.0, 1.0, 2),
                t(SmallTriangleB, 1.0, 2.0, 6),
                t(MediumTriangle, 2.0, 0.0, 0),
            ],
        ),
        fig(
            2,
            "boat",
            vec![
                t(LargeTriangleA, 2.0, 1.0, 0).mirrored(),
                t(LargeTriangleB, 2.0, 1.0, 0),
                t(SmallTriangleA, 1.0, 1.0, 4),
                t(Square, 1.0, 0.0, 0),
                t(SmallTriangleB, 2.0, 1.0, 6),
                t(Parallelogram, 2.0, 0.0, 0),
                t(MediumTriangle, 2.0, 3.0, 2),
            ],
        ),
        fig(
            3,
            "cat",
            vec![
                t(LargeTriangleA, 1.0, 0.0, 0),
                t(LargeTriangleB, 3.0, 2.0, 4),
                t(Square, 1.0, 2.0, 0),
                t(SmallTriangleA, 1.0, 3.0, 0),
                t(SmallTriangleB, 2.0, 3.0, 0),
                t(Parallelogram, 3.0, 0.0, 0),
                t(MediumTriangle, -1.0, 0.0, 0),
            ],
        ),
        fig(
            4,
            "swan",
            vec![
                t(LargeTriangleA, 2.0, 2.0, 4),
                t(LargeTriangleB, 2.0, 2.0, 4).mirrored(),
                t(Parallelogram, 1.0, 2.0, 2),
                t(SmallTriangleA, 0.0, 4.0, 2),
                t(SmallTriangleB, -1.0, 4.0, 6),
                t(MediumTriangle, 3.0, 2.0, 0),
                t(Square, 2.0, 2.0, 0),
            ],
        ),
        fig(
            5,
            "arrow",
            vec![
                t(LargeTriangleA, 2.0, 2.0, 6),
                t(LargeTriangleB, 2.0, 2.0, 0),
                t(Square, 1.0, 1.5, 0),
                t(Parallelogram, -1.0, 1.5, 0),
                t(SmallTriangleA, 1.0, 1.5, 2),
                t(SmallTriangleB, -1.0, 2.5, 6),
                t(MediumTriangle, -1.0, 1.0, 2),
            ],
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{to_polygons, validate_figure, Point};

    #[test]
    fn six_valid_full_figures() {
        let figs = default_figures();
        assert_eq!(figs.len(), BOARD_SIZE);
        for (i, f) in figs.iter().enumerate() {
            assert_eq!(f.id as usize, i);
            assert!(validate_figure(f).is_ok(), "{}: {}", f.name, validate_figure(f));
            assert_eq!(f.pieces.len(), 7);
            let area = to_polygons(f).unwrap().area();
            assert!((area - 8.0).abs() < 1e-9);
        }
    }

    fn inside(poly: &[Point], p: Point) -> bool {
        let mut hit = false;
        let n = poly.len();
        for i in 0..n {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            if (a.y > p.y) != (b.y > p.y) && p.x < a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y) {
                hit = !hit;
            }
        }
        hit
    }

    /// Grid-sampling oracle for pairwise overlap, independent of polygon clipping.
    #[test]
    fn sampled_overlap_is_negligible() {
        for f in default_figures() {
            let polys = to_polygons(&f).unwrap();
            let step = 1.0 / 97.0;
            let mut doubly = 0usize;
            let mut covered = 0usize;
            for i in 0..(12 * 97) {
                for j in 0..(12 * 97) {
                    let p = Point::new(-4.0 + (i as f64 + 0.5) * step, -4.0 + (j as f64 + 0.5) * step);
                    let hits = polys.polygons.iter().filter(|poly| inside(poly, p)).count();
                    covered += (hits > 0) as usize;
                    doubly += (hits > 1) as usize;
                }
            }
            assert_eq!(doubly, 0, "{} has overlapping pieces", f.name);
            let sampled_area = covered as f64 * step * step;
            assert!((sampled_area - 8.0).abs() < 0.1, "{}: {sampled_area}", f.name);
        }
    }
}
