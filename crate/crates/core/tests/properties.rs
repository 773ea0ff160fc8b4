use proptest::prelude::*;
use splatcull::fixtures::{extreme_spec, mixed_scene};
use splatcull::projection::{project_gaussian, splat_alpha, ProjectionConfig, ALPHA_LOW};
use splatcull::render::ALPHA_MAX;
use splatcull::{generate_synthetic, render_scene, Camera, CullingMode, Projection, RenderConfig, Scene, TileGrid};

/// Returns (ring pixels checked, pixels at or above `alpha_low` that the
/// renderer would blend, pixels at or above `alpha_low` by the bare formula).
fn containment_violations(scene: &Scene, cam: &Camera, mode: CullingMode, alpha_low: f32) -> (usize, usize, usize) {
    let cfg = ProjectionConfig {
        mode,
        alpha_low,
        ..Default::default()
    };
    let (mut checked, mut bad, mut clamped) = (0, 0, 0);
    for g in &scene.gaussians {
        if let Projection::Visible(pg) = project_gaussian(g, cam, 0, &cfg).unwrap() {
            for (x, y) in pg.footprint.outer_ring() {
                checked += 1;
                if splat_alpha(&pg, x, y, ALPHA_MAX as f32) >= alpha_low {
                    clamped += 1;
                    if pg.support.contains(x, y) {
                        bad += 1;
                    }
                }
            }
        }
    }
    (checked, bad, clamped)
}

#[test]
fn blended_opacity_outside_the_culled_rectangle_stays_below_alpha_low() {
    let cam: Camera = Camera::default_for_synthetic(256, 256);
    let scene: Scene = generate_synthetic(2024, 10_000, &extreme_spec()).unwrap();
    for alpha_low in [ALPHA_LOW as f32, 0.05, 0.3] {
        for mode in [CullingMode::Circle, CullingMode::Aabb] {
            let (checked, bad, _) = containment_violations(&scene, &cam, mode, alpha_low);
            assert!(checked > 100_000);
            assert_eq!(bad, 0, "{mode} alpha_low {alpha_low}");
        }
    }
}

#[test]
fn only_the_three_sigma_clamp_lets_opacity_escape() {
    // Opaque Gaussians whose alpha_low ellipse is wider than three standard
    // deviations: the clamped rectangle is the support square itself.
    let cam = Camera::default_for_synthetic(128, 128);
    let spec = splatcull::SyntheticSpec {
        opacity_range: [0.9, 1.0],
        ..extreme_spec()
    };
    let scene: Scene = generate_synthetic(5, 2000, &spec).unwrap();
    let (_, bad, clamped) = containment_violations(&scene, &cam, CullingMode::Circle, ALPHA_LOW as f32);
    assert_eq!(bad, 0);
    assert!(clamped > 0);
    let low: Scene = generate_synthetic(5, 2000, &splatcull::fixtures::elongated_spec()).unwrap();
    let (_, _, clamped) = containment_violations(&low, &cam, CullingMode::Aabb, ALPHA_LOW as f32);
    assert_eq!(clamped, 0, "unclamped extents contain the bare formula too");
}

#[test]
fn image_channels_stay_in_unit_range() {
    let cam: Camera = Camera::default_for_synthetic(64, 64).with_background([1.0, 0.5, 0.0]);
    for seed in 0..3 {
        let scene = mixed_scene(seed, 1500).unwrap();
        let out = render_scene(&scene, &cam, &RenderConfig::default()).unwrap();
        for p in &out.image.pixels {
            assert!(p.iter().all(|c| c.is_finite() && (0.0..=1.0).contains(c)), "{p:?}");
        }
    }
}

#[test]
fn pixel_load_is_bounded_by_tile_pairs() {
    let cam: Camera = Camera::default_for_synthetic(80, 48);
    let grid = TileGrid::new(80, 48).unwrap();
    let scene = mixed_scene(17, 2000).unwrap();
    let out = render_scene(&scene, &cam, &RenderConfig::default()).unwrap();
    for y in 0..48 {
        for x in 0..80 {
            let pairs = out.pairs.tile(grid.tile_index(x / grid.tile_size, y / grid.tile_size)).len();
            assert!(out.load_map.get(x, y) as usize <= pairs);
        }
    }
}

#[test]
fn raising_alpha_low_culls_more() {
    let cam: Camera = Camera::default_for_synthetic(64, 64);
    let scene = mixed_scene(1, 1000).unwrap();
    let culled = |a: f32| {
        render_scene(&scene, &cam, &RenderConfig::default().with_alpha_low(a))
            .unwrap()
            .stats
            .culled_low_opacity
    };
    assert!(culled(0.5) > culled(ALPHA_LOW as f32));
}

#[test]
fn stage_timings_sum_to_total() {
    let cam: Camera = Camera::default_for_synthetic(64, 64);
    let out = render_scene(&mixed_scene(0, 500).unwrap(), &cam, &RenderConfig::default()).unwrap();
    let t = out.stats.timings;
    assert_eq!(t.e_g() + t.e_n() + t.e_p(), t.as_array().iter().sum());
    assert_eq!(out.stats.pair_count, out.pairs.keys.len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn losslessness_holds_for_arbitrary_seeds(seed in any::<u64>(), count in 1usize..400, alpha_low in 0.001f32..0.5) {
        let cam: Camera = Camera::default_for_synthetic(48, 48);
        let scene: Scene = generate_synthetic(seed, count, &extreme_spec()).unwrap();
        let cfg = RenderConfig::default().with_alpha_low(alpha_low);
        let base = render_scene(&scene, &cam, &cfg.with_mode(CullingMode::Baseline)).unwrap();
        for mode in [CullingMode::Circle, CullingMode::Aabb] {
            let out = render_scene(&scene, &cam, &cfg.with_mode(mode)).unwrap();
            prop_assert!(out.image.bitwise_eq(&base.image));
            prop_assert_eq!(&out.load_map, &base.load_map);
            prop_assert!(out.stats.pair_count <= base.stats.pair_count);
        }
    }
}
