use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use splatcull::projection::ALPHA_LOW;
use splatcull::CullingMode;

#[derive(Debug, Parser)]
#[command(name = "splatcull", version, about = "Tile-based Gaussian splat renderer with early culling")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render one image, with optional stats row and load map.
    Render(RenderArgs),
    /// Render under several culling modes and check they agree.
    Compare(CompareArgs),
    /// Write the per-pixel load as a grayscale image plus summary stats.
    Loadmap(LoadmapArgs),
    /// Time the pipeline stages over repeated renders.
    Bench(BenchArgs),
    /// Generate a seeded synthetic scene.
    GenScene(GenSceneArgs),
}

#[derive(Debug, Args)]
pub struct SceneArgs {
    /// Scene file (.ply or .json).
    #[arg(long)]
    pub scene: PathBuf,
    /// Camera JSON (look-at form). Defaults to a view of the origin from -z.
    #[arg(long)]
    pub camera: Option<PathBuf>,
    /// Resolution of the default camera.
    #[arg(long, default_value_t = 256)]
    pub width: u32,
    #[arg(long, default_value_t = 256)]
    pub height: u32,
    #[arg(long, default_value_t = ALPHA_LOW as f32)]
    pub alpha_low: f32,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    #[arg(long, default_value_t = CullingMode::Aabb)]
    pub mode: CullingMode,
    /// Image path (.png or .ppm).
    #[arg(long)]
    pub output: PathBuf,
    /// Stats CSV, same columns as `bench`.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Load map image (.png or .pgm).
    #[arg(long)]
    pub loadmap: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    #[arg(long, value_delimiter = ',', default_value = "baseline,circle,aabb")]
    pub modes: Vec<CullingMode>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LoadmapArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    #[arg(long, default_value_t = CullingMode::Aabb)]
    pub mode: CullingMode,
    /// Grayscale image (.png, or .pgm for raw 16-bit counts).
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    /// One or more modes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "aabb")]
    pub mode: Vec<CullingMode>,
    /// Timed repetitions after one warm-up render.
    #[arg(long, default_value_t = 10)]
    pub repetitions: usize,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Random orientation, anisotropy 1-6, opacity 0.01-1.
    Mixed,
    /// Screen-aligned low-opacity needles.
    Elongated,
    /// Randomly placed spheres.
    Isotropic,
    /// Spheres on the default camera's optical axis.
    OnAxis,
    /// Needle-like anisotropy up to 60.
    Extreme,
    /// Dense central cluster plus sparse scatter, sized for a 48x48 view.
    Clustered,
}

#[derive(Debug, Args)]
pub struct GenSceneArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub count: usize,
    #[arg(long, value_enum, default_value_t = Preset::Mixed, conflicts_with = "spec")]
    pub preset: Preset,
    /// Distribution parameters as JSON, instead of a preset.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Output scene (.ply or .json).
    #[arg(long)]
    pub output: PathBuf,
}
