use splatcull::fixtures::clustered_scene;
use splatcull::optim::{toy_balance_step, ToyOptions, MAX_TOY_GAUSSIANS};
use splatcull::{render_scene, Camera, Error, Gaussian3D, LossWeights, RenderConfig, Scene};

const STEPS: usize = 20;

fn run(scene: &Scene, cam: &Camera, w: &LossWeights, step: f64) -> (Vec<f64>, Scene) {
    let cfg = RenderConfig::default();
    let reference = render_scene(scene, cam, &cfg).unwrap().image;
    let mut s = scene.clone();
    let mut trace = Vec::new();
    for _ in 0..STEPS {
        let st = toy_balance_step(&s, cam, &reference, w, step, &cfg, &ToyOptions::default()).unwrap();
        if trace.is_empty() {
            trace.push(st.before.load_std);
        }
        trace.push(st.after.load_std);
        s = st.scene;
    }
    (trace, s)
}

#[test]
fn default_weights_reduce_load_std_on_clustered_scene() {
    let cam: Camera = Camera::default_for_synthetic(48, 48);
    let scene = clustered_scene(1, 40, 20).unwrap();
    let (trace, _) = run(&scene, &cam, &LossWeights::default(), 1.0);
    let best = trace.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(best < trace[0], "{trace:?}");
}

#[test]
fn control_without_load_term_ignores_loads() {
    let cam: Camera = Camera::default_for_synthetic(48, 48);
    let scene = clustered_scene(1, 40, 20).unwrap();
    let w = LossWeights::new(0.8, 0.2, 0.0).unwrap();
    let cfg = RenderConfig::default();
    let reference = render_scene(&scene, &cam, &cfg).unwrap().image;
    let st = toy_balance_step(&scene, &cam, &reference, &w, 1.0, &cfg, &ToyOptions::default()).unwrap();
    // The reference is the scene's own render, so the image terms are already
    // at their minimum and nothing pulls on the loads.
    assert_eq!(st.before.total, 0.0);
    assert!(st.before.load_std > 1.0);
    for b in [st.before, st.after] {
        assert_eq!(b.total, 0.8 * b.l1 + 0.2 * (1.0 - b.ssim));
    }
}

#[test]
fn uniform_scene_has_zero_gradient() {
    let cam: Camera = Camera::default_for_synthetic(48, 48);
    // Black, screen-filling layers on black: every pixel sees all three at
    // any nearby opacity, and the image never changes.
    let layers = (0..3)
        .map(|i| Gaussian3D::with_color([0.0, 0.0, i as f32], [50.0; 3], [1.0, 0.0, 0.0, 0.0], 0.5, [0.0; 3]))
        .collect();
    let scene = Scene::new(layers, 0).unwrap();
    let cfg = RenderConfig::default();
    let out = render_scene(&scene, &cam, &cfg).unwrap();
    assert!(out.load_map.counts.iter().all(|&l| l == 3));
    let step = 0.5;
    let st = toy_balance_step(&scene, &cam, &out.image, &LossWeights::default(), step, &cfg, &ToyOptions::default())
        .unwrap();
    for (a, b) in st.scene.gaussians.iter().zip(&scene.gaussians) {
        assert!(((a.opacity - b.opacity) as f64).abs() <= step * 1e-6);
    }
    assert_eq!(st.before.total, 0.0);
}

#[test]
fn rejects_non_positive_step() {
    let cam: Camera = Camera::default_for_synthetic(16, 16);
    let scene = clustered_scene(0, 3, 0).unwrap();
    let reference = render_scene(&scene, &cam, &RenderConfig::default()).unwrap().image;
    for step in [0.0, -1.0, f64::NAN] {
        let err = toy_balance_step(&scene, &cam, &reference, &LossWeights::default(), step, &RenderConfig::default(), &ToyOptions::default());
        assert!(matches!(err, Err(Error::Argument(_))), "{step}");
    }
}

#[test]
fn rejects_oversized_scene() {
    let cam: Camera = Camera::default_for_synthetic(16, 16);
    let scene = clustered_scene(0, MAX_TOY_GAUSSIANS + 1, 0).unwrap();
    let reference = splatcull::Image::filled(16, 16, [0.0; 3]);
    let err = toy_balance_step(&scene, &cam, &reference, &LossWeights::default(), 1.0, &RenderConfig::default(), &ToyOptions::default());
    assert!(matches!(err, Err(Error::Argument(_))));
}
