//! PNG encoding of rasters and decoding of returned images.

use tangram_core::pipeline::GrayImage;
use tangram_core::raster::RasterView;

/// 8-bit grayscale PNG, figure pixels white.
pub fn encode_raster(view: &RasterView) -> Vec<u8> {
    let pixels: Vec<u8> = view.pixels.iter().map(|&p| if p != 0 { 255 } else { 0 }).collect();
    encode_gray(&GrayImage { width: view.width, height: view.height, pixels })
}

pub fn encode_gray(img: &GrayImage) -> Vec<u8> {
    let mut out = Vec::new();
    let mut enc = png::Encoder::new(&mut out, img.width as u32, img.height as u32);
    enc.set_color(png::ColorType::Grayscale);
    enc.set_depth(png::BitDepth::Eight);
    let mut w = enc.write_header().expect("writing to memory");
    w.write_image_data(&img.pixels).expect("pixel count matches header");
    w.finish().expect("writing to memory");
    out
}

/// Decode any 8- or 16-bit PNG to luminance.
pub fn decode(bytes: &[u8]) -> Result<GrayImage, String> {
    let mut dec = png::Decoder::new(bytes);
    dec.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
    let mut reader = dec.read_info().map_err(|e| e.to_string())?;
    let mut buf = vec![0; reader.output_buffer_size()];
    let frame = reader.next_frame(&mut buf).map_err(|e| e.to_string())?;
    let data = &buf[..frame.buffer_size()];
    let luma = |r: u8, g: u8, b: u8| ((299 * r as u32 + 587 * g as u32 + 114 * b as u32 + 500) / 1000) as u8;
    let pixels: Vec<u8> = match frame.color_type {
        png::ColorType::Grayscale => data.to_vec(),
        png::ColorType::GrayscaleAlpha => data.chunks_exact(2).map(|c| c[0]).collect(),
        png::ColorType::Rgb => data.chunks_exact(3).map(|c| luma(c[0], c[1], c[2])).collect(),
        png::ColorType::Rgba => data.chunks_exact(4).map(|c| luma(c[0], c[1], c[2])).collect(),
        png::ColorType::Indexed => return Err("indexed PNG was not expanded".into()),
    };
    Ok(GrayImage { width: frame.width as usize, height: frame.height as usize, pixels })
}

/// Nearest-neighbour resample to `width`×`height`, then threshold at mid grey.
pub fn to_raster(img: &GrayImage, width: usize, height: usize) -> RasterView {
    let mut view = RasterView::blank(width, height);
    for r in 0..height {
        let sr = r * img.height / height;
        for c in 0..width {
            let sc = c * img.width / width;
            view.pixels[r * width + c] = u8::from(img.pixels[sr * img.width + sc] >= 128);
        }
    }
    view
}
