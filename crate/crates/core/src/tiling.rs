//! Binning stages: touched-tile counting, inclusive sum, key duplication,
//! pair sorting and per-tile range identification.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::projection::{ProjectedGaussian, Projection};
use crate::Real;

pub const TILE_SIZE: u32 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TileGrid {
    pub width: u32,
    pub height: u32,
    pub tile_size: u32,
    pub tiles_x: u32,
    pub tiles_y: u32,
}

impl TileGrid {
    pub fn new(width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::arg("image size must be positive"));
        }
        let tiles_x = width.div_ceil(TILE_SIZE);
        let tiles_y = height.div_ceil(TILE_SIZE);
        if (tiles_x as u64) * (tiles_y as u64) >= 1u64 << 32 {
            return Err(Error::Capacity("tile count does not fit the 32-bit key field".into()));
        }
        Ok(Self {
            width,
            height,
            tile_size: TILE_SIZE,
            tiles_x,
            tiles_y,
        })
    }

    pub fn tile_count(&self) -> usize {
        self.tiles_x as usize * self.tiles_y as usize
    }

    /// Row-major tile index.
    pub fn tile_index(&self, tx: u32, ty: u32) -> u32 {
        ty * self.tiles_x + tx
    }

    /// Pixel bounds `[x0, x1) x [y0, y1)` of a tile, clipped to the image.
    pub fn tile_pixels(&self, tile: u32) -> (u32, u32, u32, u32) {
        let (tx, ty) = (tile % self.tiles_x, tile / self.tiles_x);
        let x0 = tx * self.tile_size;
        let y0 = ty * self.tile_size;
        (
            x0,
            (x0 + self.tile_size).min(self.width),
            y0,
            (y0 + self.tile_size).min(self.height),
        )
    }
}

/// Half-open tile rectangle `[x0, x1) x [y0, y1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct TileRect {
    pub x0: u32,
    pub x1: u32,
    pub y0: u32,
    pub y1: u32,
}

impl TileRect {
    pub fn count(&self) -> u32 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }
}

/// Tiles holding at least one on-screen pixel of the Gaussian's active
/// culling footprint.
pub fn tiles_touched<T: Real>(pg: &ProjectedGaussian<T>, grid: &TileGrid) -> TileRect {
    let fp = pg.footprint;
    let x0 = fp.x0.max(0);
    let y0 = fp.y0.max(0);
    let x1 = fp.x1.min(grid.width as i64 - 1);
    let y1 = fp.y1.min(grid.height as i64 - 1);
    if x0 > x1 || y0 > y1 {
        return TileRect::default();
    }
    let ts = grid.tile_size as i64;
    TileRect {
        x0: (x0 / ts) as u32,
        x1: (x1 / ts + 1) as u32,
        y0: (y0 / ts) as u32,
        y1: (y1 / ts + 1) as u32,
    }
}

/// Running totals `offsets[i] = counts[0] + ... + counts[i]`.
pub fn inclusive_sum(counts: &[u32]) -> Result<Vec<u32>> {
    let mut total: u32 = 0;
    counts
        .iter()
        .map(|&c| {
            total = total
                .checked_add(c)
                .ok_or_else(|| Error::Capacity("gaussian-tile pair count exceeds u32".into()))?;
            Ok(total)
        })
        .collect()
}

/// Sort key: tile index in the high 32 bits, depth bits in the low 32.
#[inline]
pub fn pair_key(tile: u32, depth_bits: u32) -> u64 {
    ((tile as u64) << 32) | depth_bits as u64
}

#[inline]
pub fn key_tile(key: u64) -> u32 {
    (key >> 32) as u32
}

/// Emits one `(key, gaussian index)` entry per touched tile, each Gaussian
/// writing into its reserved `[offsets[i-1], offsets[i])` slot range in
/// row-major tile order.
pub fn duplicate_with_keys<T: Real>(
    projected: &[Projection<T>],
    offsets: &[u32],
    grid: &TileGrid,
) -> Result<(Vec<u64>, Vec<u32>)> {
    if projected.len() != offsets.len() {
        return Err(Error::Internal(format!(
            "{} projections but {} offsets",
            projected.len(),
            offsets.len()
        )));
    }
    if projected.len() > u32::MAX as usize {
        return Err(Error::Capacity("gaussian index exceeds u32".into()));
    }
    let total = offsets.last().copied().unwrap_or(0) as usize;
    let mut keys = vec![0u64; total];
    let mut indices = vec![0u32; total];

    let mut key_slots = Vec::with_capacity(projected.len());
    let mut index_slots = Vec::with_capacity(projected.len());
    let (mut key_rest, mut index_rest) = (keys.as_mut_slice(), indices.as_mut_slice());
    let mut prev = 0u32;
    for &end in offsets {
        let len = end
            .checked_sub(prev)
            .ok_or_else(|| Error::Internal("offsets are not non-decreasing".into()))?
            as usize;
        let (k, kr) = std::mem::take(&mut key_rest).split_at_mut(len);
        let (i, ir) = std::mem::take(&mut index_rest).split_at_mut(len);
        key_slots.push(k);
        index_slots.push(i);
        key_rest = kr;
        index_rest = ir;
        prev = end;
    }

    projected
        .par_iter()
        .zip(key_slots.into_par_iter().zip(index_slots.into_par_iter()))
        .enumerate()
        .try_for_each(|(gi, (proj, (kslot, islot)))| {
            let written = match proj {
                Projection::Visible(pg) => {
                    let rect = tiles_touched(pg, grid);
                    if rect.count() as usize != kslot.len() {
                        return Err(Error::Internal(format!(
                            "gaussian {gi}: {} reserved slots for {} tiles",
                            kslot.len(),
                            rect.count()
                        )));
                    }
                    let depth = pg.depth.depth_bits();
                    let mut n = 0;
                    for ty in rect.y0..rect.y1 {
                        for tx in rect.x0..rect.x1 {
                            kslot[n] = pair_key(grid.tile_index(tx, ty), depth);
                            islot[n] = gi as u32;
                            n += 1;
                        }
                    }
                    n
                }
                Projection::Culled(_) => 0,
            };
            if written != kslot.len() {
                return Err(Error::Internal(format!("gaussian {gi}: slot count mismatch")));
            }
            Ok(())
        })?;
    Ok((keys, indices))
}

/// Stable ascending sort of the pairs by key.
pub fn sort_pairs(keys: Vec<u64>, indices: Vec<u32>) -> Result<(Vec<u64>, Vec<u32>)> {
    if keys.len() != indices.len() {
        return Err(Error::Internal("key and index lists differ in length".into()));
    }
    let mut pairs: Vec<(u64, u32)> = keys.into_iter().zip(indices).collect();
    pairs.par_sort_by_key(|p| p.0);
    Ok(pairs.into_iter().unzip())
}

/// Half-open `[start, end)` span of each tile in the sorted key list. Empty
/// tiles get `(k, k)` at their insertion point.
pub fn identify_tile_ranges(keys: &[u64], grid: &TileGrid) -> Result<Vec<(u32, u32)>> {
    if keys.len() > u32::MAX as usize {
        return Err(Error::Capacity("pair list exceeds u32 indices".into()));
    }
    if let Some(i) = keys.par_windows(2).position_first(|w| w[0] > w[1]) {
        return Err(Error::Internal(format!("keys unsorted at position {i}")));
    }
    if let Some(&last) = keys.last() {
        if key_tile(last) as usize >= grid.tile_count() {
            return Err(Error::Internal(format!(
                "key references tile {} of {}",
                key_tile(last),
                grid.tile_count()
            )));
        }
    }
    Ok((0..grid.tile_count() as u32)
        .into_par_iter()
        .map(|t| {
            let start = keys.partition_point(|&k| key_tile(k) < t);
            let end = keys.partition_point(|&k| key_tile(k) <= t);
            (start as u32, end as u32)
        })
        .collect())
}

/// Sorted Gaussian-tile pairs with per-tile ranges.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TilePairList {
    pub keys: Vec<u64>,
    pub gaussian_indices: Vec<u32>,
    pub tile_ranges: Vec<(u32, u32)>,
}

impl TilePairList {
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// Gaussian indices of one tile in blending order.
    pub fn tile(&self, tile: u32) -> &[u32] {
        let (s, e) = self.tile_ranges[tile as usize];
        &self.gaussian_indices[s as usize..e as usize]
    }
}
