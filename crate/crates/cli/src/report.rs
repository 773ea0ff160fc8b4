//! CSV row types. Column names are the serialized field names.

use std::path::Path;
use std::time::Duration;

use serde::Serialize;
use splatcull::{RenderStats, StageTimings};

/// One row of the `bench` and `render` stats CSV. Durations in milliseconds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatsRow {
    pub scene: String,
    pub mode: String,
    pub alpha_low: f32,
    pub gaussians: usize,
    pub culled: usize,
    pub pairs: usize,
    pub t_preprocess: f64,
    pub t_inclusivesum: f64,
    pub t_duplicate: f64,
    pub t_sort: f64,
    pub t_ranges: f64,
    pub t_render: f64,
    pub e_g: f64,
    pub e_n: f64,
    pub e_p: f64,
    pub fps: f64,
}

pub const STATS_COLUMNS: [&str; 16] = [
    "scene",
    "mode",
    "alpha_low",
    "gaussians",
    "culled",
    "pairs",
    "t_preprocess",
    "t_inclusivesum",
    "t_duplicate",
    "t_sort",
    "t_ranges",
    "t_render",
    "e_g",
    "e_n",
    "e_p",
    "fps",
];

pub fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

impl StatsRow {
    /// Row for a single render. `timings` may be a per-stage summary such as a
    /// median; `total` is the frame time used for FPS.
    pub fn new(scene: &str, mode: &str, alpha_low: f32, stats: &RenderStats, timings: &StageTimings, total: Duration) -> Self {
        let t = timings.as_array().map(ms);
        Self {
            scene: scene.to_string(),
            mode: mode.to_string(),
            alpha_low,
            gaussians: stats.gaussians,
            culled: stats.culled_gaussians,
            pairs: stats.pair_count,
            t_preprocess: t[0],
            t_inclusivesum: t[1],
            t_duplicate: t[2],
            t_sort: t[3],
            t_ranges: t[4],
            t_render: t[5],
            e_g: ms(timings.e_g()),
            e_n: ms(timings.e_n()),
            e_p: ms(timings.e_p()),
            fps: if total.is_zero() { f64::INFINITY } else { 1.0 / total.as_secs_f64() },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareRow {
    pub scene: String,
    pub mode: String,
    pub alpha_low: f32,
    pub pairs: usize,
    pub e_g: f64,
    pub e_n: f64,
    pub e_p: f64,
    /// SHA-256 of the raw little-endian channel values.
    pub image_sha256: String,
    /// Against the first mode's image; identical images report the sentinel.
    pub psnr_vs_first: f64,
    pub load_std: f64,
    pub pair_reduction_pct: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LoadRow {
    pub scene: String,
    pub mode: String,
    pub mean: f64,
    pub std: f64,
    pub min: u32,
    pub max: u32,
}

pub fn write_csv<R: Serialize>(path: &Path, rows: &[R]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
