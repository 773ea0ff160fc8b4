//! The full six-stage rasterization pipeline with per-stage timing.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use rayon::ThreadPool;

use crate::error::{Error, Result};
use crate::projection::{
    project_gaussian, CullReason, CullingMode, Projection, ProjectionConfig, ALPHA_LOW,
    DEFAULT_DILATION,
};
use crate::render::{render, BlendParams, Image, LoadMap, ALPHA_MAX, TRANSMITTANCE_MIN};
use crate::scene::{Camera, Scene};
use crate::tiling::{
    duplicate_with_keys, identify_tile_ranges, inclusive_sum, sort_pairs, tiles_touched, TileGrid,
    TilePairList,
};
use crate::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenderConfig<T = f32> {
    pub mode: CullingMode,
    pub alpha_low: T,
    pub dilation: T,
    pub alpha_max: T,
    pub transmittance_min: T,
    /// Worker count; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl<T: Real> Default for RenderConfig<T> {
    fn default() -> Self {
        Self {
            mode: CullingMode::Aabb,
            alpha_low: T::lit(ALPHA_LOW),
            dilation: T::lit(DEFAULT_DILATION),
            alpha_max: T::lit(ALPHA_MAX),
            transmittance_min: T::lit(TRANSMITTANCE_MIN),
            threads: None,
        }
    }
}

impl<T: Real> RenderConfig<T> {
    pub fn with_mode(mut self, mode: CullingMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_alpha_low(mut self, alpha_low: T) -> Self {
        self.alpha_low = alpha_low;
        self
    }

    pub fn with_threads(mut self, threads: Option<usize>) -> Self {
        self.threads = threads;
        self
    }

    pub fn projection(&self) -> ProjectionConfig<T> {
        ProjectionConfig {
            mode: self.mode,
            alpha_low: self.alpha_low,
            dilation: self.dilation,
        }
    }

    pub fn blend(&self) -> BlendParams<T> {
        BlendParams {
            alpha_low: self.alpha_low,
            alpha_max: self.alpha_max,
            transmittance_min: self.transmittance_min,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_low > T::zero() && self.alpha_low < T::one()) {
            return Err(Error::arg(format!("alpha_low {} outside (0, 1)", self.alpha_low)));
        }
        if !self.dilation.is_finite() || self.dilation < T::zero() {
            return Err(Error::arg("dilation must be finite and non-negative"));
        }
        if !(self.alpha_max > T::zero() && self.alpha_max <= T::one()) {
            return Err(Error::arg("alpha_max must lie in (0, 1]"));
        }
        if !(self.transmittance_min >= T::zero() && self.transmittance_min < T::one()) {
            return Err(Error::arg("termination threshold must lie in [0, 1)"));
        }
        if self.threads == Some(0) {
            return Err(Error::arg("thread count must be at least 1"));
        }
        Ok(())
    }
}

/// Wall time of each pipeline stage.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StageTimings {
    pub preprocess: Duration,
    pub inclusive_sum: Duration,
    pub duplicate: Duration,
    pub sort: Duration,
    pub ranges: Duration,
    pub render: Duration,
}

impl StageTimings {
    pub const NAMES: [&'static str; 6] = [
        "preprocess",
        "inclusivesum",
        "duplicate",
        "sort",
        "ranges",
        "render",
    ];

    pub fn as_array(&self) -> [Duration; 6] {
        [
            self.preprocess,
            self.inclusive_sum,
            self.duplicate,
            self.sort,
            self.ranges,
            self.render,
        ]
    }

    pub fn from_array(d: [Duration; 6]) -> Self {
        Self {
            preprocess: d[0],
            inclusive_sum: d[1],
            duplicate: d[2],
            sort: d[3],
            ranges: d[4],
            render: d[5],
        }
    }

    /// Gaussian-parallel cost: preprocess, inclusive sum, duplication.
    pub fn e_g(&self) -> Duration {
        self.preprocess + self.inclusive_sum + self.duplicate
    }

    /// Pair-parallel cost: sorting and range identification.
    pub fn e_n(&self) -> Duration {
        self.sort + self.ranges
    }

    /// Pixel-parallel cost: blending.
    pub fn e_p(&self) -> Duration {
        self.render
    }

    pub fn total(&self) -> Duration {
        self.as_array().iter().sum()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RenderStats {
    pub timings: StageTimings,
    pub gaussians: usize,
    /// Gaussians removed entirely, for any reason.
    pub culled_gaussians: usize,
    pub culled_low_opacity: usize,
    pub pair_count: usize,
}

#[derive(Clone, Debug)]
pub struct RenderOutput<T: Real = f32> {
    pub image: Image<T>,
    pub load_map: LoadMap,
    pub stats: RenderStats,
    pub projected: Vec<Projection<T>>,
    pub pairs: TilePairList,
}

/// Runs the pipeline, optionally on a dedicated worker pool.
pub struct Rasterizer<T: Real = f32> {
    config: RenderConfig<T>,
    pool: Option<ThreadPool>,
}

impl<T: Real> Rasterizer<T> {
    pub fn new(config: RenderConfig<T>) -> Result<Self> {
        config.validate()?;
        let pool = config
            .threads
            .map(|n| {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| Error::Internal(format!("thread pool: {e}")))
            })
            .transpose()?;
        Ok(Self { config, pool })
    }

    pub fn config(&self) -> &RenderConfig<T> {
        &self.config
    }

    pub fn render(&self, scene: &Scene<T>, cam: &Camera<T>) -> Result<RenderOutput<T>> {
        match &self.pool {
            Some(pool) => pool.install(|| run_pipeline(scene, cam, &self.config)),
            None => run_pipeline(scene, cam, &self.config),
        }
    }
}

/// Convenience wrapper around [`Rasterizer`].
pub fn render_scene<T: Real>(scene: &Scene<T>, cam: &Camera<T>, config: &RenderConfig<T>) -> Result<RenderOutput<T>> {
    Rasterizer::new(*config)?.render(scene, cam)
}

fn run_pipeline<T: Real>(scene: &Scene<T>, cam: &Camera<T>, cfg: &RenderConfig<T>) -> Result<RenderOutput<T>> {
    cam.validate()?;
    let grid = TileGrid::new(cam.width, cam.height)?;
    let proj_cfg = cfg.projection();

    let t0 = Instant::now();
    let projected = scene
        .gaussians
        .par_iter()
        .map(|g| project_gaussian(g, cam, scene.sh_degree, &proj_cfg))
        .collect::<Result<Vec<_>>>()?;
    let counts: Vec<u32> = projected
        .par_iter()
        .map(|p| p.visible().map_or(0, |pg| tiles_touched(pg, &grid).count()))
        .collect();
    let t1 = Instant::now();
    let offsets = inclusive_sum(&counts)?;
    let t2 = Instant::now();
    let (keys, indices) = duplicate_with_keys(&projected, &offsets, &grid)?;
    let t3 = Instant::now();
    let (keys, indices) = sort_pairs(keys, indices)?;
    let t4 = Instant::now();
    let tile_ranges = identify_tile_ranges(&keys, &grid)?;
    let t5 = Instant::now();
    let pairs = TilePairList {
        keys,
        gaussian_indices: indices,
        tile_ranges,
    };
    let (image, load_map) = render(&projected, &pairs, &grid, cam.background, &cfg.blend())?;
    let t6 = Instant::now();

    let culled_gaussians = projected
        .iter()
        .filter(|p| matches!(p, Projection::Culled(_)))
        .count();
    let culled_low_opacity = projected
        .iter()
        .filter(|p| matches!(p, Projection::Culled(CullReason::LowOpacity)))
        .count();
    let stats = RenderStats {
        timings: StageTimings {
            preprocess: t1 - t0,
            inclusive_sum: t2 - t1,
            duplicate: t3 - t2,
            sort: t4 - t3,
            ranges: t5 - t4,
            render: t6 - t5,
        },
        gaussians: scene.len(),
        culled_gaussians,
        culled_low_opacity,
        pair_count: pairs.len(),
    };
    Ok(RenderOutput {
        image,
        load_map,
        stats,
        projected,
        pairs,
    })
}
