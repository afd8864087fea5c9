use proptest::prelude::*;
use tangram_core::figures::default_figures;
use tangram_core::geometry::{rotate_view, to_polygons, FigureSpec, Point, PolygonSet};
use tangram_core::raster::render_view;

fn shifted(f: &FigureSpec, dx: f64, dy: f64) -> FigureSpec {
    let mut g = f.clone();
    for p in &mut g.pieces {
        p.translation.x += dx;
        p.translation.y += dy;
    }
    g
}

fn max_vertex_gap(a: &PolygonSet, b: &PolygonSet) -> f64 {
    a.vertices().zip(b.vertices()).map(|(p, q)| (p.x - q.x).abs().max((p.y - q.y).abs())).fold(0.0, f64::max)
}

proptest! {
    #[test]
    fn rotation_composes(fig in 0usize..6, k1 in 0u8..8, k2 in 0u8..8, dx in -50.0f64..50.0, dy in -50.0f64..50.0) {
        let f = shifted(&default_figures()[fig], dx, dy);
        let polys = to_polygons(&f).unwrap();
        let twice = rotate_view(&rotate_view(&polys, k1), k2);
        let once = rotate_view(&polys, (k1 + k2) % 8);
        prop_assert!(max_vertex_gap(&twice, &once) <= 1e-9);
    }

    #[test]
    fn rotation_keeps_area(fig in 0usize..6, k in 0u8..8) {
        let polys = to_polygons(&default_figures()[fig]).unwrap();
        let a0 = polys.area();
        let a1 = rotate_view(&polys, k).area();
        prop_assert!((a1 - a0).abs() <= 1e-9 * a0);
    }

    #[test]
    fn arbitrary_triangles_keep_area(
        pts in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3),
        k in 0u8..8,
    ) {
        let tri: Vec<Point> = pts.iter().map(|&(x, y)| Point::new(x, y)).collect();
        let set = PolygonSet::new(vec![tri]);
        prop_assume!(set.area().abs() > 1e-3);
        let a1 = rotate_view(&set, k).area();
        prop_assert!((a1 - set.area()).abs() <= 1e-9 * set.area().abs().max(1.0));
    }

    #[test]
    fn eight_steps_are_identity(fig in 0usize..6, k in 0u8..8) {
        let polys = to_polygons(&default_figures()[fig]).unwrap();
        let mut turned = rotate_view(&polys, k);
        for _ in 0..8 {
            turned = rotate_view(&turned, 1);
        }
        prop_assert!(max_vertex_gap(&turned, &rotate_view(&polys, k)) <= 1e-9);
    }

    #[test]
    fn translation_does_not_change_views(fig in 0usize..6, k in 0u8..8, dx in -20i32..20, dy in -20i32..20) {
        let f = &default_figures()[fig];
        let a = render_view(f, k, 64, 64).unwrap();
        let b = render_view(&shifted(f, dx as f64 * 0.5, dy as f64 * 0.5), k, 64, 64).unwrap();
        let differ = a.pixels.iter().zip(&b.pixels).filter(|(x, y)| x != y).count();
        // only pixel centers sitting exactly on an edge can flip
        prop_assert!(differ <= 64, "{differ} pixels differ");
    }
}

#[path = "criteria/geometry.rs"]
mod criteria;

#[test]
fn canonical_figures_pass_every_geometry_check() {
    criteria::check().unwrap();
}
