//! Seeded scenes with known structure, shared by tests, benchmarks and the CLI.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::scene::{generate_synthetic, Gaussian3D, Scene, SyntheticSpec};
use crate::Real;

/// Mixed scene: random orientation, anisotropy 1-6, opacity 0.01-1.
pub fn mixed_spec() -> SyntheticSpec {
    SyntheticSpec {
        extent: 1.5,
        scale_range: [0.01, 0.04],
        anisotropy_range: [1.0, 6.0],
        opacity_range: [0.01, 1.0],
        random_rotation: true,
    }
}

/// Screen-aligned needles: long axis along world x or y with ratio 4-8 and
/// low opacity, the case where the axis-aligned box beats the circle.
pub fn elongated_spec() -> SyntheticSpec {
    SyntheticSpec {
        extent: 1.5,
        scale_range: [0.01, 0.03],
        anisotropy_range: [4.0, 8.0],
        opacity_range: [0.02, 0.1],
        random_rotation: false,
    }
}

/// Wide spread of sizes, needle-like anisotropy up to 60 and opacities
/// down to the default cull threshold.
pub fn extreme_spec() -> SyntheticSpec {
    SyntheticSpec {
        extent: 1.5,
        scale_range: [0.002, 0.2],
        anisotropy_range: [1.0, 60.0],
        opacity_range: [1.0 / 255.0, 1.0],
        random_rotation: true,
    }
}

/// Spheres only. Off the optical axis perspective skews their projections,
/// so the axis-aligned box can still be marginally tighter than the circle.
pub fn isotropic_spec() -> SyntheticSpec {
    SyntheticSpec {
        anisotropy_range: [1.0, 1.0],
        ..mixed_spec()
    }
}

pub fn mixed_scene<T: Real>(seed: u64, count: usize) -> Result<Scene<T>> {
    generate_synthetic(seed, count, &mixed_spec())
}

/// Spheres strung along the optical axis of
/// [`Camera::default_for_synthetic`](crate::Camera::default_for_synthetic).
/// Their projected covariances are exactly circular, so the axis-aligned box
/// and the circle's square coincide for every Gaussian.
pub fn on_axis_spheres<T: Real>(seed: u64, count: usize) -> Result<Scene<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gaussians = (0..count)
        .map(|_| {
            let z = rng.gen_range(-2.0..2.0);
            let scale = rng.gen_range(0.01..0.3);
            sphere([0.0, 0.0, z], scale, rng.gen_range(0.01..1.0), [rng.gen(), rng.gen(), rng.gen()])
        })
        .collect();
    Scene::new(gaussians, 0)
}

/// A dense, heavily overlapping cluster of Gaussians in the middle of the
/// view, plus a sparse scatter of background Gaussians. Sized for a 48x48
/// [`Camera::default_for_synthetic`](crate::Camera::default_for_synthetic).
pub fn clustered_scene<T: Real>(seed: u64, cluster: usize, scatter: usize) -> Result<Scene<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gaussians = Vec::with_capacity(cluster + scatter);
    for _ in 0..cluster {
        let center = [rng.gen_range(-0.05..0.05), rng.gen_range(-0.05..0.05), rng.gen_range(-0.2..0.2)];
        gaussians.push(sphere(center, 0.25, rng.gen_range(0.2..0.4), [rng.gen(), rng.gen(), rng.gen()]));
    }
    for _ in 0..scatter {
        let center = [rng.gen_range(-1.6..1.6), rng.gen_range(-1.6..1.6), rng.gen_range(-0.5..0.5)];
        gaussians.push(sphere(center, 0.3, rng.gen_range(0.3..0.6), [rng.gen(), rng.gen(), rng.gen()]));
    }
    Scene::new(gaussians, 0)
}

fn sphere<T: Real>(center: [f64; 3], scale: f64, opacity: f64, rgb: [f64; 3]) -> Gaussian3D<T> {
    Gaussian3D::with_color(
        center.map(T::lit),
        [T::lit(scale); 3],
        [T::one(), T::zero(), T::zero(), T::zero()],
        T::lit(opacity),
        rgb.map(T::lit),
    )
}
