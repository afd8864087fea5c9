//! Binary PGM (P5) dumps of rasters: 0 background, 255 figure.

use tangram_core::raster::RasterView;

pub fn encode(view: &RasterView) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", view.width, view.height).into_bytes();
    out.extend(view.pixels.iter().map(|&p| if p != 0 { 255 } else { 0 }));
    out
}
