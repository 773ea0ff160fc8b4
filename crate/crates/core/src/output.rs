//! Image and load-map writers: 8-bit PNG, binary PPM (P6), 16-bit PGM (P5)
//! and a normalized grayscale PNG of the load map.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::render::{Image, LoadMap};
use crate::Real;

/// Clamps to `[0, 1]` and rounds half up to 8 bits.
pub fn quantize<T: Real>(v: T) -> u8 {
    let v = v.as_f64();
    let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
    (v * 255.0 + 0.5).floor() as u8
}

pub fn to_rgb8<T: Real>(image: &Image<T>) -> Vec<u8> {
    image
        .pixels
        .iter()
        .flat_map(|p| p.iter().map(|&c| quantize(c)))
        .collect()
}

fn encode_png(width: u32, height: u32, color: png::ColorType, depth: png::BitDepth, data: &[u8], out: impl Write) -> Result<()> {
    let mut enc = png::Encoder::new(out, width, height);
    enc.set_color(color);
    enc.set_depth(depth);
    let mut writer = enc
        .write_header()
        .map_err(|e| Error::Format(format!("png header: {e}")))?;
    writer
        .write_image_data(data)
        .map_err(|e| Error::Format(format!("png data: {e}")))?;
    writer
        .finish()
        .map_err(|e| Error::Format(format!("png finish: {e}")))
}

pub fn encode_png_rgb<T: Real>(image: &Image<T>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    encode_png(
        image.width,
        image.height,
        png::ColorType::Rgb,
        png::BitDepth::Eight,
        &to_rgb8(image),
        &mut buf,
    )?;
    Ok(buf)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn write_all(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = create(path)?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))?;
    f.flush().map_err(|e| Error::io(path, e))
}

pub fn write_png<T: Real>(image: &Image<T>, path: impl AsRef<Path>) -> Result<()> {
    write_all(path.as_ref(), &encode_png_rgb(image)?)
}

pub fn write_ppm<T: Real>(image: &Image<T>, path: impl AsRef<Path>) -> Result<()> {
    let mut bytes = format!("P6\n{} {}\n255\n", image.width, image.height).into_bytes();
    bytes.extend(to_rgb8(image));
    write_all(path.as_ref(), &bytes)
}

/// Writes `path` as PNG or PPM according to its extension.
pub fn write_image<T: Real>(image: &Image<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("ppm") => write_ppm(image, path),
        _ => write_png(image, path),
    }
}

/// Raw counts as a 16-bit big-endian PGM, saturating at 65535.
pub fn write_load_pgm(load: &LoadMap, path: impl AsRef<Path>) -> Result<()> {
    let mut bytes = format!("P5\n{} {}\n65535\n", load.width, load.height).into_bytes();
    for &c in &load.counts {
        bytes.extend((c.min(u16::MAX as u32) as u16).to_be_bytes());
    }
    write_all(path.as_ref(), &bytes)
}

/// Load scaled so the heaviest pixel is white; all black when every load is 0.
pub fn load_to_gray8(load: &LoadMap) -> Vec<u8> {
    let max = load.max();
    load.counts
        .iter()
        .map(|&c| {
            if max == 0 {
                0
            } else {
                ((c as f64 / max as f64) * 255.0 + 0.5).floor() as u8
            }
        })
        .collect()
}

pub fn write_load_png(load: &LoadMap, path: impl AsRef<Path>) -> Result<()> {
    let mut buf = Vec::new();
    encode_png(
        load.width,
        load.height,
        png::ColorType::Grayscale,
        png::BitDepth::Eight,
        &load_to_gray8(load),
        &mut buf,
    )?;
    write_all(path.as_ref(), &buf)
}
