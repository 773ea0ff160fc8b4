//! The blending stage: front-to-back compositing per pixel over its tile's
//! sorted Gaussians, with early termination and per-pixel load counting.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::projection::{splat_alpha, ProjectedGaussian, Projection, ALPHA_LOW};
use crate::tiling::{TileGrid, TilePairList};
use crate::Real;

/// Upper clamp on the splatting opacity.
pub const ALPHA_MAX: f64 = 0.99;
/// Blending stops once transmittance drops below this.
pub const TRANSMITTANCE_MIN: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlendParams<T = f32> {
    pub alpha_low: T,
    pub alpha_max: T,
    pub transmittance_min: T,
}

impl<T: Real> Default for BlendParams<T> {
    fn default() -> Self {
        Self {
            alpha_low: T::lit(ALPHA_LOW),
            alpha_max: T::lit(ALPHA_MAX),
            transmittance_min: T::lit(TRANSMITTANCE_MIN),
        }
    }
}

/// Row-major RGB image.
#[derive(Clone, Debug, PartialEq)]
pub struct Image<T: Real = f32> {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<[T; 3]>,
}

impl<T: Real> Image<T> {
    pub fn filled(width: u32, height: u32, rgb: [T; 3]) -> Self {
        Self {
            width,
            height,
            pixels: vec![rgb; width as usize * height as usize],
        }
    }

    pub fn get(&self, x: u32, y: u32) -> [T; 3] {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    /// Bit-exact equality of every channel.
    pub fn bitwise_eq(&self, other: &Self) -> bool {
        self.width == other.width
            && self.height == other.height
            && self
                .pixels
                .iter()
                .zip(&other.pixels)
                .all(|(a, b)| (0..3).all(|c| a[c].as_f64().to_bits() == b[c].as_f64().to_bits()))
    }
}

/// Per-pixel count of composited Gaussians.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoadMap {
    pub width: u32,
    pub height: u32,
    pub counts: Vec<u32>,
}

impl LoadMap {
    pub fn zeros(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            counts: vec![0; width as usize * height as usize],
        }
    }

    pub fn get(&self, x: u32, y: u32) -> u32 {
        self.counts[y as usize * self.width as usize + x as usize]
    }

    pub fn max(&self) -> u32 {
        self.counts.iter().copied().max().unwrap_or(0)
    }
}

/// Whether a Gaussian counts towards a pixel's load: it passed the opacity
/// test and was blended before termination.
#[inline]
fn contributes<T: Real>(alpha: T, params: &BlendParams<T>) -> bool {
    alpha >= params.alpha_low
}

/// Blends `splats` front to back at pixel `(px, py)`; returns the final
/// color and the number of composited Gaussians.
#[inline]
pub(crate) fn blend_pixel<'a, T: Real>(
    splats: impl Iterator<Item = &'a ProjectedGaussian<T>>,
    px: i64,
    py: i64,
    params: &BlendParams<T>,
    background: [T; 3],
) -> ([T; 3], u32) {
    let mut color = [T::zero(); 3];
    let mut transmittance = T::one();
    let mut load = 0u32;
    for pg in splats {
        if !pg.support.contains(px, py) {
            continue;
        }
        let alpha = splat_alpha(pg, px, py, params.alpha_max);
        if !contributes(alpha, params) {
            continue;
        }
        let weight = alpha * transmittance;
        for (c, v) in color.iter_mut().zip(pg.color) {
            *c = *c + v * weight;
        }
        transmittance = transmittance * (T::one() - alpha);
        load += 1;
        if transmittance < params.transmittance_min {
            break;
        }
    }
    for (c, bg) in color.iter_mut().zip(background) {
        *c = *c + transmittance * bg;
    }
    (color, load)
}

/// Renders every tile in parallel from the sorted pair list.
pub fn render<T: Real>(
    projected: &[Projection<T>],
    pairs: &TilePairList,
    grid: &TileGrid,
    background: [T; 3],
    params: &BlendParams<T>,
) -> Result<(Image<T>, LoadMap)> {
    if pairs.tile_ranges.len() != grid.tile_count() {
        return Err(Error::Internal(format!(
            "{} tile ranges for {} tiles",
            pairs.tile_ranges.len(),
            grid.tile_count()
        )));
    }
    let tiles: Vec<(Vec<[T; 3]>, Vec<u32>)> = (0..grid.tile_count() as u32)
        .into_par_iter()
        .map(|tile| {
            let splats = pairs
                .tile(tile)
                .iter()
                .map(|&gi| match projected.get(gi as usize) {
                    Some(Projection::Visible(pg)) => Ok(pg),
                    _ => Err(Error::Internal(format!(
                        "tile {tile} references unprojected gaussian {gi}"
                    ))),
                })
                .collect::<Result<Vec<_>>>()?;
            let (x0, x1, y0, y1) = grid.tile_pixels(tile);
            let n = ((x1 - x0) * (y1 - y0)) as usize;
            let mut colors = Vec::with_capacity(n);
            let mut loads = Vec::with_capacity(n);
            for y in y0..y1 {
                for x in x0..x1 {
                    let (c, l) = blend_pixel(
                        splats.iter().copied(),
                        x as i64,
                        y as i64,
                        params,
                        background,
                    );
                    colors.push(c);
                    loads.push(l);
                }
            }
            Ok((colors, loads))
        })
        .collect::<Result<_>>()?;

    let mut image = Image::filled(grid.width, grid.height, [T::zero(); 3]);
    let mut load = LoadMap::zeros(grid.width, grid.height);
    for (tile, (colors, loads)) in tiles.into_iter().enumerate() {
        let (x0, x1, y0, y1) = grid.tile_pixels(tile as u32);
        let w = (x1 - x0) as usize;
        for (row, y) in (y0..y1).enumerate() {
            let dst = y as usize * grid.width as usize + x0 as usize;
            image.pixels[dst..dst + w].copy_from_slice(&colors[row * w..(row + 1) * w]);
            load.counts[dst..dst + w].copy_from_slice(&loads[row * w..(row + 1) * w]);
        }
    }
    Ok((image, load))
}
