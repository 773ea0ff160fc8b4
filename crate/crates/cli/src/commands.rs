use std::io::Write;
use std::path::Path;
use std::time::Duration;

use sha2::{Digest, Sha256};
use splatcull::fixtures;
use splatcull::metrics::PSNR_IDENTICAL_SENTINEL;
use splatcull::output::{write_image, write_load_pgm, write_load_png};
use splatcull::{
    generate_synthetic, psnr, Camera, CameraSpec, CullingMode, Image, LoadMap, LoadStats, Rasterizer, RenderConfig,
    RenderOutput, Scene, StageTimings, SyntheticSpec,
};

use crate::args::{BenchArgs, Cli, Command, CompareArgs, GenSceneArgs, LoadmapArgs, Preset, RenderArgs, SceneArgs};
use crate::report::{ms, write_csv, CompareRow, LoadRow, StatsRow};
use crate::CliError;

pub fn run(cli: Cli, out: &mut impl Write) -> Result<(), CliError> {
    match cli.command {
        Command::Render(a) => render(&a, out),
        Command::Compare(a) => compare(&a, out),
        Command::Loadmap(a) => loadmap(&a, out),
        Command::Bench(a) => bench(&a, out),
        Command::GenScene(a) => gen_scene(&a, out),
    }
}

struct Inputs {
    name: String,
    scene: Scene,
    camera: Camera,
}

fn load_inputs(a: &SceneArgs) -> Result<Inputs, CliError> {
    let scene = Scene::load(&a.scene)?;
    let camera = match &a.camera {
        Some(p) => CameraSpec::load(p)?.to_camera()?,
        None => {
            if a.width == 0 || a.height == 0 {
                return Err(CliError::Usage("width and height must be positive".into()));
            }
            Camera::default_for_synthetic(a.width, a.height)
        }
    };
    let name = a
        .scene
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(Inputs { name, scene, camera })
}

fn rasterizer(a: &SceneArgs, mode: CullingMode) -> Result<Rasterizer, CliError> {
    if a.threads == Some(0) {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let cfg = RenderConfig::default()
        .with_mode(mode)
        .with_alpha_low(a.alpha_low)
        .with_threads(a.threads);
    Ok(Rasterizer::new(cfg)?)
}

fn write_loadmap(load: &LoadMap, path: &Path) -> Result<(), CliError> {
    let pgm = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
    if pgm {
        write_load_pgm(load, path)?;
    } else {
        write_load_png(load, path)?;
    }
    Ok(())
}

fn render(a: &RenderArgs, out: &mut impl Write) -> Result<(), CliError> {
    let inp = load_inputs(&a.scene)?;
    let r = rasterizer(&a.scene, a.mode)?.render(&inp.scene, &inp.camera)?;
    write_image(&r.image, &a.output)?;
    if let Some(p) = &a.loadmap {
        write_loadmap(&r.load_map, p)?;
    }
    let t = r.stats.timings;
    let row = StatsRow::new(&inp.name, a.mode.as_str(), a.scene.alpha_low, &r.stats, &t, t.total());
    if let Some(p) = &a.csv {
        write_csv(p, std::slice::from_ref(&row))?;
    }
    writeln!(
        out,
        "{}: mode={} gaussians={} culled={} pairs={} total={:.3}ms -> {}",
        row.scene,
        row.mode,
        row.gaussians,
        row.culled,
        row.pairs,
        ms(t.total()),
        a.output.display()
    )?;
    Ok(())
}

/// SHA-256 over the little-endian bytes of every channel value.
pub fn image_sha256(image: &Image) -> String {
    let mut h = Sha256::new();
    for p in &image.pixels {
        for c in p {
            h.update(c.to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}

fn compare(a: &CompareArgs, out: &mut impl Write) -> Result<(), CliError> {
    if a.modes.len() < 2 {
        return Err(CliError::Usage("compare needs at least two modes".into()));
    }
    for (i, m) in a.modes.iter().enumerate() {
        if a.modes[..i].contains(m) {
            return Err(CliError::Usage(format!("mode {m} listed twice")));
        }
    }
    let inp = load_inputs(&a.scene)?;
    let renders = a
        .modes
        .iter()
        .map(|&m| Ok(rasterizer(&a.scene, m)?.render(&inp.scene, &inp.camera)?))
        .collect::<Result<Vec<RenderOutput>, CliError>>()?;

    let first = &renders[0];
    let mut rows = Vec::with_capacity(renders.len());
    for (&mode, r) in a.modes.iter().zip(&renders) {
        let p = psnr(&r.image, &first.image)?;
        let t = r.stats.timings;
        rows.push(CompareRow {
            scene: inp.name.clone(),
            mode: mode.to_string(),
            alpha_low: a.scene.alpha_low,
            pairs: r.stats.pair_count,
            e_g: ms(t.e_g()),
            e_n: ms(t.e_n()),
            e_p: ms(t.e_p()),
            image_sha256: image_sha256(&r.image),
            psnr_vs_first: if p.is_finite() { p } else { PSNR_IDENTICAL_SENTINEL },
            load_std: splatcull::load_loss(&r.load_map)?,
            pair_reduction_pct: reduction_pct(first.stats.pair_count, r.stats.pair_count),
        });
    }
    if let Some(p) = &a.csv {
        write_csv(p, &rows)?;
    }
    for row in &rows {
        writeln!(
            out,
            "{:<8} pairs={:<10} reduction={:>6.2}% e_g={:.3}ms e_n={:.3}ms e_p={:.3}ms load_std={:.4} psnr={} sha256={}",
            row.mode,
            row.pairs,
            row.pair_reduction_pct,
            row.e_g,
            row.e_n,
            row.e_p,
            row.load_std,
            row.psnr_vs_first,
            &row.image_sha256[..16]
        )?;
    }
    check_compare(&a.modes, &renders)
}

fn reduction_pct(reference: usize, pairs: usize) -> f64 {
    if reference == 0 {
        0.0
    } else {
        100.0 * (reference as f64 - pairs as f64) / reference as f64
    }
}

fn rank(m: CullingMode) -> usize {
    CullingMode::ALL.iter().position(|&x| x == m).unwrap_or(0)
}

/// Tighter modes never produce more pairs and never change the output.
fn check_compare(modes: &[CullingMode], renders: &[RenderOutput]) -> Result<(), CliError> {
    for (i, (&ma, ra)) in modes.iter().zip(renders).enumerate() {
        for (&mb, rb) in modes.iter().zip(renders).skip(i + 1) {
            let (loose, tight) = if rank(ma) < rank(mb) { ((ma, ra), (mb, rb)) } else { ((mb, rb), (ma, ra)) };
            if tight.1.stats.pair_count > loose.1.stats.pair_count {
                return Err(CliError::Invariant(format!(
                    "{} produced {} pairs, more than {} with {}",
                    tight.0, tight.1.stats.pair_count, loose.0, loose.1.stats.pair_count
                )));
            }
            if !ra.image.bitwise_eq(&rb.image) || ra.load_map != rb.load_map {
                return Err(CliError::Invariant(format!("{ma} and {mb} rendered different outputs")));
            }
        }
    }
    Ok(())
}

fn loadmap(a: &LoadmapArgs, out: &mut impl Write) -> Result<(), CliError> {
    let inp = load_inputs(&a.scene)?;
    let r = rasterizer(&a.scene, a.mode)?.render(&inp.scene, &inp.camera)?;
    write_loadmap(&r.load_map, &a.output)?;
    let s = LoadStats::from_map(&r.load_map)?;
    let row = LoadRow {
        scene: inp.name,
        mode: a.mode.to_string(),
        mean: s.mean,
        std: s.std,
        min: s.min,
        max: s.max,
    };
    if let Some(p) = &a.csv {
        write_csv(p, std::slice::from_ref(&row))?;
    }
    writeln!(
        out,
        "{}: load mean={:.4} std={:.4} min={} max={} -> {}",
        row.scene,
        row.mean,
        row.std,
        row.min,
        row.max,
        a.output.display()
    )?;
    Ok(())
}

fn median_of(mut v: Vec<Duration>) -> Duration {
    v.sort();
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2
    }
}

/// Per-stage and per-frame medians and minima over repeated timings.
pub struct TimingSummary {
    pub median: StageTimings,
    pub min: StageTimings,
    pub median_total: Duration,
    pub min_total: Duration,
}

impl TimingSummary {
    pub fn from_runs(runs: &[StageTimings]) -> Self {
        let stage = |i: usize| runs.iter().map(|t| t.as_array()[i]).collect::<Vec<_>>();
        let median = StageTimings::from_array(std::array::from_fn(|i| median_of(stage(i))));
        let min = StageTimings::from_array(std::array::from_fn(|i| stage(i).into_iter().min().unwrap_or_default()));
        let totals: Vec<Duration> = runs.iter().map(StageTimings::total).collect();
        Self {
            median,
            min,
            median_total: median_of(totals.clone()),
            min_total: totals.into_iter().min().unwrap_or_default(),
        }
    }
}

fn bench(a: &BenchArgs, out: &mut impl Write) -> Result<(), CliError> {
    if a.repetitions == 0 {
        return Err(CliError::Usage("--repetitions must be at least 1".into()));
    }
    if a.mode.is_empty() {
        return Err(CliError::Usage("no mode given".into()));
    }
    let inp = load_inputs(&a.scene)?;
    let mut rows = Vec::new();
    for &mode in &a.mode {
        let rast = rasterizer(&a.scene, mode)?;
        let warm = rast.render(&inp.scene, &inp.camera)?;
        let mut runs = Vec::with_capacity(a.repetitions);
        for _ in 0..a.repetitions {
            runs.push(rast.render(&inp.scene, &inp.camera)?.stats.timings);
        }
        let s = TimingSummary::from_runs(&runs);
        let row = StatsRow::new(&inp.name, mode.as_str(), a.scene.alpha_low, &warm.stats, &s.median, s.median_total);
        let m = s.min.as_array().map(ms);
        writeln!(
            out,
            "{} {:<8} pairs={} median: e_g={:.3} e_n={:.3} e_p={:.3} total={:.3}ms fps={:.1} | min: {} total={:.3}ms",
            row.scene,
            row.mode,
            row.pairs,
            row.e_g,
            row.e_n,
            row.e_p,
            ms(s.median_total),
            row.fps,
            StageTimings::NAMES
                .iter()
                .zip(m)
                .map(|(n, v)| format!("{n}={v:.3}"))
                .collect::<Vec<_>>()
                .join(" "),
            ms(s.min_total)
        )?;
        rows.push(row);
    }
    if let Some(p) = &a.csv {
        write_csv(p, &rows)?;
    }
    Ok(())
}

fn gen_scene(a: &GenSceneArgs, out: &mut impl Write) -> Result<(), CliError> {
    if a.count == 0 {
        return Err(CliError::Usage("--count must be at least 1".into()));
    }
    let scene: Scene = match &a.spec {
        Some(p) => generate_synthetic(a.seed, a.count, &SyntheticSpec::load(p)?)?,
        None => match a.preset {
            Preset::Mixed => generate_synthetic(a.seed, a.count, &fixtures::mixed_spec())?,
            Preset::Elongated => generate_synthetic(a.seed, a.count, &fixtures::elongated_spec())?,
            Preset::Isotropic => generate_synthetic(a.seed, a.count, &fixtures::isotropic_spec())?,
            Preset::Extreme => generate_synthetic(a.seed, a.count, &fixtures::extreme_spec())?,
            Preset::OnAxis => fixtures::on_axis_spheres(a.seed, a.count)?,
            Preset::Clustered => {
                let cluster = a.count.div_ceil(3) * 2;
                let cluster = cluster.min(a.count);
                fixtures::clustered_scene(a.seed, cluster, a.count - cluster)?
            }
        },
    };
    scene.save(&a.output)?;
    writeln!(out, "wrote {} gaussians to {}", scene.len(), a.output.display())?;
    Ok(())
}
