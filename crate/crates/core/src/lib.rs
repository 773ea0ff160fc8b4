//! Deterministic tile-based Gaussian splatting rasterizer with conservative
//! early culling of Gaussian-tile pairs.
//!
//! The pipeline runs six stages: preprocess (projection and culling extents),
//! inclusive sum, key duplication, pair sorting, tile range identification
//! and blending. Three culling modes bound each projected Gaussian:
//!
//! - [`CullingMode::Baseline`]: a square of half-size `ceil(3 sqrt(lambda_max))`;
//! - [`CullingMode::Circle`]: the bounding circle of the ellipse on which the
//!   splatting opacity equals `alpha_low`, capped by the baseline square;
//! - [`CullingMode::Aabb`]: that ellipse's axis-aligned box, capped per axis.
//!
//! All modes produce bit-identical images and load maps; only the number of
//! Gaussian-tile pairs differs.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the default
//! type parameter is `f32` and `*64` aliases name the `f64` variants.

pub mod error;
pub mod fixtures;
pub mod linalg;
pub mod metrics;
pub mod optim;
pub mod oracle;
pub mod output;
pub mod pipeline;
pub mod projection;
pub mod render;
mod scalar;
pub mod scene;
pub mod sh;
pub mod tiling;

pub use error::{Error, Result};
pub use metrics::{l1_loss, load_loss, psnr, ssim, total_loss, LoadStats, LossWeights};
pub use pipeline::{render_scene, Rasterizer, RenderConfig, RenderOutput, RenderStats, StageTimings};
pub use projection::{CullExtent, CullingMode, ProjectedGaussian, Projection};
pub use render::{BlendParams, Image, LoadMap};
pub use scalar::Real;
pub use scene::{generate_synthetic, validate_scene, Camera, CameraSpec, Gaussian3D, Scene, SyntheticSpec};
pub use tiling::{TileGrid, TilePairList};

pub type Scene64 = Scene<f64>;
pub type Camera64 = Camera<f64>;
pub type Gaussian3D64 = Gaussian3D<f64>;
pub type Image64 = Image<f64>;
pub type ProjectedGaussian64 = ProjectedGaussian<f64>;
pub type RenderConfig64 = RenderConfig<f64>;
pub type Rasterizer64 = Rasterizer<f64>;
