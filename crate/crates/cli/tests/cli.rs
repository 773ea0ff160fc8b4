use std::path::{Path, PathBuf};
use std::process::Command;

use splatcull::{Camera, Gaussian3D, Scene};
use splatcull_cli::{run_args, CliError};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_splatcull"))
}

fn run(args: &[&str]) -> Result<String, CliError> {
    let mut out = Vec::new();
    run_args(std::iter::once("splatcull").chain(args.iter().copied()), &mut out)?;
    Ok(String::from_utf8(out).unwrap())
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

fn gen(dir: &Path, name: &str, preset: &str, count: usize, seed: u64) -> String {
    let p = path(dir, name);
    run(&["gen-scene", "--seed", &seed.to_string(), "--count", &count.to_string(), "--preset", preset, "--output", &p])
        .unwrap();
    p
}

fn read_csv(p: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(p).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn col(header: &[String], row: &[String], name: &str) -> f64 {
    let i = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    row[i].parse().unwrap()
}

fn decode_gray(p: &str) -> Vec<u8> {
    let decoder = png::Decoder::new(std::io::BufReader::new(std::fs::File::open(p).unwrap()));
    let mut reader = decoder.read_info().unwrap();
    let mut buf = vec![0; reader.output_buffer_size().unwrap()];
    let info = reader.next_frame(&mut buf).unwrap();
    assert_eq!(info.color_type, png::ColorType::Grayscale);
    buf.truncate(info.buffer_size());
    buf
}

#[test]
fn render_writes_image_and_stats_row() {
    let dir = tempfile::tempdir().unwrap();
    let scene = gen(dir.path(), "ten.json", "mixed", 10, 1);
    let (img, csv) = (path(dir.path(), "out.png"), path(dir.path(), "stats.csv"));
    run(&["render", "--scene", &scene, "--mode", "aabb", "--output", &img, "--csv", &csv]).unwrap();
    assert!(std::fs::metadata(&img).unwrap().len() > 0);
    let (header, rows) = read_csv(&csv);
    assert_eq!(header, splatcull_cli::report::STATS_COLUMNS);
    assert_eq!(rows.len(), 1);
    assert_eq!(col(&header, &rows[0], "gaussians"), 10.0);
}

#[test]
fn baseline_and_aabb_png_bytes_match() {
    let dir = tempfile::tempdir().unwrap();
    let scene = gen(dir.path(), "s.ply", "mixed", 2000, 4);
    let outs: Vec<Vec<u8>> = ["baseline", "aabb"]
        .iter()
        .map(|m| {
            let img = path(dir.path(), &format!("{m}.png"));
            run(&["render", "--scene", &scene, "--mode", m, "--output", &img]).unwrap();
            std::fs::read(img).unwrap()
        })
        .collect();
    assert_eq!(outs[0], outs[1]);
}

#[test]
fn higher_alpha_low_culls_more_gaussians() {
    let dir = tempfile::tempdir().unwrap();
    let scene = gen(dir.path(), "low.ply", "elongated", 500, 2);
    let culled = |alpha: &str| {
        let csv = path(dir.path(), &format!("{alpha}.csv"));
        let img = path(dir.path(), "x.png");
        run(&["render", "--scene", &scene, "--alpha-low", alpha, "--output", &img, "--csv", &csv]).unwrap();
        let (h, rows) = read_csv(&csv);
        col(&h, &rows[0], "culled")
    };
    assert!(culled("0.5") > culled("0.003921569"));
}

#[test]
fn compare_reports_strict_reduction_on_needles() {
    let dir = tempfile::tempdir().unwrap();
    let scene = gen(dir.path(), "needles.ply", "elongated", 3000, 11);
    let csv = path(dir.path(), "cmp.csv");
    run(&["compare", "--scene", &scene, "--csv", &csv]).unwrap();
    let (h, rows) = read_csv(&csv);
    let pairs: Vec<f64> = rows.iter().map(|r| col(&h, r, "pairs")).collect();
    assert!(pairs[2] < pairs[1] && pairs[1] < pairs[0], "{pairs:?}");
    let hash = h.iter().position(|c| c == "image_sha256").unwrap();
    assert!(rows.iter().all(|r| r[hash] == rows[0][hash]));
    assert!(rows.iter().all(|r| col(&h, r, "psnr_vs_first") == 999.0));
}

#[test]
fn compare_on_axis_spheres_gives_equal_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let scene = gen(dir.path(), "axis.json", "on-axis", 200, 3);
    let csv = path(dir.path(), "cmp.csv");
    run(&["compare", "--scene", &scene, "--modes", "circle,aabb", "--csv", &csv]).unwrap();
    let (h, rows) = read_csv(&csv);
    assert_eq!(col(&h, &rows[0], "pairs"), col(&h, &rows[1], "pairs"));
}

#[test]
fn compare_is_thread_count_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let scene = gen(dir.path(), "s.ply", "mixed", 1500, 8);
    let rows = |threads: &str| {
        let csv = path(dir.path(), &format!("t{threads}.csv"));
        run(&["compare", "--scene", &scene, "--threads", threads, "--csv", &csv]).unwrap();
        let (h, rows) = read_csv(&csv);
        let keep: Vec<usize> = h
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.starts_with("e_"))
            .map(|(i, _)| i)
            .collect();
        rows.into_iter()
            .map(|r| keep.iter().map(|&i| r[i].clone()).collect::<Vec<_>>())
            .collect::<Vec<_>>()
    };
    assert_eq!(rows("1"), rows("4"));
}

#[test]
fn loadmap_of_uniform_cover_has_zero_std() {
    let dir = tempfile::tempdir().unwrap();
    let g = Gaussian3D::with_color([0.0; 3], [50.0; 3], [1.0, 0.0, 0.0, 0.0], 0.5, [1.0; 3]);
    let scene = path(dir.path(), "flat.json");
    Scene::new(vec![g], 0).unwrap().save(&scene).unwrap();
    let csv = path(dir.path(), "load.csv");
    let img = path(dir.path(), "load.png");
    run(&["loadmap", "--scene", &scene, "--width", "40", "--height", "24", "--output", &img, "--csv", &csv]).unwrap();
    let (h, rows) = read_csv(&csv);
    assert_eq!(col(&h, &rows[0], "std"), 0.0);
    assert_eq!(col(&h, &rows[0], "min"), 1.0);
}

#[test]
fn loadmap_of_clustered_scene_peaks_where_the_oracle_does() {
    let dir = tempfile::tempdir().unwrap();
    let scene_path = gen(dir.path(), "cluster.ply", "clustered", 60, 1);
    let img = path(dir.path(), "load.png");
    run(&["loadmap", "--scene", &scene_path, "--width", "48", "--height", "48", "--output", &img]).unwrap();
    let gray = decode_gray(&img);

    let scene: Scene = Scene::load(&scene_path).unwrap();
    let cam: Camera = Camera::default_for_synthetic(48, 48);
    let cfg = splatcull::RenderConfig::default();
    let (_, load) = splatcull::oracle::render_reference(&scene, &cam, cfg.dilation, &cfg.blend()).unwrap();
    let peak = load.max();
    let expected: Vec<usize> = (0..load.counts.len()).filter(|&i| load.counts[i] == peak).collect();
    let brightest: Vec<usize> = (0..gray.len()).filter(|&i| gray[i] == 255).collect();
    assert_eq!(brightest, expected);
    // The peak sits inside the central cluster.
    let (x, y) = (expected[0] % 48, expected[0] / 48);
    assert!((x as i64 - 24).abs() <= 6 && (y as i64 - 24).abs() <= 6, "peak at ({x}, {y})");
}

#[test]
fn loadmap_of_empty_scene_is_black() {
    let dir = tempfile::tempdir().unwrap();
    let scene = path(dir.path(), "empty.json");
    Scene::<f32>::empty().save(&scene).unwrap();
    let img = path(dir.path(), "load.png");
    run(&["loadmap", "--scene", &scene, "--width", "20", "--height", "10", "--output", &img]).unwrap();
    let gray = decode_gray(&img);
    assert_eq!(gray.len(), 200);
    assert!(gray.iter().all(|&v| v == 0));
}

#[test]
fn bench_csv_schema_and_accounting() {
    let dir = tempfile::tempdir().unwrap();
    let scene = gen(dir.path(), "s.ply", "mixed", 1000, 5);
    let csv = path(dir.path(), "bench.csv");
    run(&["bench", "--scene", &scene, "--mode", "baseline,circle,aabb", "--repetitions", "3", "--csv", &csv]).unwrap();
    let (h, rows) = read_csv(&csv);
    assert_eq!(h, splatcull_cli::report::STATS_COLUMNS);
    assert_eq!(rows.len(), 3);
    for r in &rows {
        let stages: f64 = ["t_preprocess", "t_inclusivesum", "t_duplicate", "t_sort", "t_ranges", "t_render"]
            .iter()
            .map(|c| col(&h, r, c))
            .sum();
        let cats = col(&h, r, "e_g") + col(&h, r, "e_n") + col(&h, r, "e_p");
        assert!((stages - cats).abs() <= 1e-9 * stages.max(1.0));
        let total = 1e3 / col(&h, r, "fps");
        assert!((total - cats).abs() <= 0.05 * total, "total {total} vs categories {cats}");
    }
}

#[test]
fn bench_needs_a_repetition() {
    let dir = tempfile::tempdir().unwrap();
    let scene = gen(dir.path(), "s.ply", "mixed", 10, 5);
    let err = run(&["bench", "--scene", &scene, "--repetitions", "0"]).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn gen_scene_is_deterministic_and_reloads() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen(dir.path(), "a.ply", "mixed", 300, 42);
    let b = gen(dir.path(), "b.ply", "mixed", 300, 42);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let reloaded: Scene = Scene::load(&a).unwrap();
    let direct: Scene = splatcull::fixtures::mixed_scene(42, 300).unwrap();
    assert_eq!(reloaded.len(), 300);
    for (x, y) in reloaded.gaussians.iter().zip(&direct.gaussians) {
        for k in 0..3 {
            assert!((x.center[k] - y.center[k]).abs() <= 1e-6);
            assert!((x.scale[k] - y.scale[k]).abs() <= 1e-6);
        }
        assert!((x.opacity - y.opacity).abs() <= 1e-6);
    }
}

#[test]
fn gen_scene_from_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = path(dir.path(), "spec.json");
    std::fs::write(&spec, r#"{"extent": 0.5, "anisotropy_range": [1, 1]}"#).unwrap();
    let out = path(dir.path(), "s.json");
    run(&["gen-scene", "--count", "5", "--spec", &spec, "--output", &out]).unwrap();
    let scene: Scene = Scene::load(&out).unwrap();
    assert!(scene.gaussians.iter().all(|g| g.center.iter().all(|c| c.abs() <= 0.5)));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let scene = gen(dir.path(), "s.ply", "mixed", 10, 0);
    let out = path(dir.path(), "x.png");
    let code = |args: &[&str]| bin().args(args).output().unwrap().status.code();
    assert_eq!(code(&["render", "--scene", &scene, "--output", &out]), Some(0));
    assert_eq!(code(&["render", "--scene", &scene, "--mode", "ellipse", "--output", &out]), Some(2));
    assert_eq!(code(&["render", "--scene", "missing.ply", "--output", &out]), Some(2));
    assert_eq!(code(&["compare", "--scene", &scene, "--modes", "aabb"]), Some(2));
    assert_eq!(code(&["gen-scene", "--count", "0", "--output", &out]), Some(2));
    let garbage: PathBuf = dir.path().join("bad.ply");
    std::fs::write(&garbage, b"ply\nformat ascii 1.0\nend_header\n").unwrap();
    assert_eq!(code(&["render", "--scene", garbage.to_str().unwrap(), "--output", &out]), Some(2));
}

#[test]
fn internal_errors_map_to_exit_three() {
    assert_eq!(CliError::Invariant("x".into()).exit_code(), 3);
    assert_eq!(CliError::Core(splatcull::Error::Internal("x".into())).exit_code(), 3);
    assert_eq!(CliError::Core(splatcull::Error::Format("x".into())).exit_code(), 2);
}
