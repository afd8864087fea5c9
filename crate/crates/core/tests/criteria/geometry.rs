//! Exhaustive geometry checks over the canonical figures and all eight angles.
//! Shared with the acceptance suite.

use tangram_core::figures::default_figures;
use tangram_core::geometry::{rotate_view, to_polygons, PolygonSet};
use tangram_core::raster::render_view;

const EXACT: f64 = 1e-9;
const FILL_SPREAD: f64 = 0.02;

fn max_vertex_gap(a: &PolygonSet, b: &PolygonSet) -> f64 {
    a.vertices().zip(b.vertices()).map(|(p, q)| (p.x - q.x).abs().max((p.y - q.y).abs())).fold(0.0, f64::max)
}

/// Shoelace area, absolute per polygon.
fn shoelace(set: &PolygonSet) -> f64 {
    set.polygons
        .iter()
        .map(|p| {
            let twice: f64 = (0..p.len()).map(|i| {
                let (a, b) = (p[i], p[(i + 1) % p.len()]);
                a.x * b.y - b.x * a.y
            }).sum();
            twice.abs() / 2.0
        })
        .sum()
}

pub fn check() -> Result<String, String> {
    let figures = default_figures();
    let (mut closure, mut area, mut identity, mut spread) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for f in &figures {
        let polys = to_polygons(f).map_err(|e| format!("{}: {e}", f.name))?;
        let a0 = shoelace(&polys);
        for k1 in 0..8u8 {
            let turned = rotate_view(&polys, k1);
            for k2 in 0..8u8 {
                closure = closure.max(max_vertex_gap(&rotate_view(&turned, k2), &rotate_view(&polys, (k1 + k2) % 8)));
            }
            area = area.max((shoelace(&turned) - a0).abs() / a0);
            let mut cycled = turned.clone();
            for _ in 0..8 {
                cycled = rotate_view(&cycled, 1);
            }
            identity = identity.max(max_vertex_gap(&cycled, &turned));
        }
        let mut fills = Vec::new();
        for k in 0..8u8 {
            let v = render_view(f, k, 64, 64).map_err(|e| format!("{}: {e}", f.name))?;
            if v != render_view(f, k, 64, 64).map_err(|e| e.to_string())? {
                return Err(format!("{} angle {k}: rendering is not bit-exact", f.name));
            }
            fills.push(v.pixels.iter().filter(|&&p| p != 0).count() as f64 / v.pixels.len() as f64);
        }
        let lo = fills.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = fills.iter().copied().fold(0.0, f64::max);
        spread = spread.max(hi - lo);
    }
    let failures: Vec<String> = [
        ("rotation closure", closure, EXACT),
        ("relative area change", area, EXACT),
        ("8-step identity", identity, EXACT),
        ("fill fraction spread", spread, FILL_SPREAD),
    ]
    .iter()
    .filter(|(_, got, limit)| !(got <= limit))
    .map(|(what, got, limit)| format!("{what} {got:e} exceeds {limit:e}"))
    .collect();
    if !failures.is_empty() {
        return Err(failures.join("; "));
    }
    Ok(format!(
        "{} figures x 8 angles: closure {closure:.1e}, area {area:.1e}, identity {identity:.1e}, fill spread {spread:.4}, rasters bit-exact",
        figures.len()
    ))
}
