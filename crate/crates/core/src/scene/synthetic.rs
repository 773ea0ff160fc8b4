use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Gaussian3D, Scene};
use crate::error::{Error, Result};
use crate::Real;

/// Distribution parameters for [`generate_synthetic`]. Ranges are inclusive
/// `[lo, hi]`; a degenerate range `[v, v]` fixes the value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    /// Half-size of the cube centred on the origin that holds the centers.
    pub extent: f64,
    /// Smallest per-axis standard deviation.
    pub scale_range: [f64; 2],
    /// Ratio of the long axis to the two short axes.
    pub anisotropy_range: [f64; 2],
    pub opacity_range: [f64; 2],
    /// Uniformly random orientation. When false, Gaussians are axis aligned
    /// and the long axis is world x or y.
    pub random_rotation: bool,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            extent: 1.5,
            scale_range: [0.01, 0.05],
            anisotropy_range: [1.0, 6.0],
            opacity_range: [0.01, 1.0],
            random_rotation: true,
        }
    }
}

impl SyntheticSpec {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let spec: Self = serde_json::from_str(&text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, serde_json::to_string_pretty(self)?).map_err(|e| Error::io(path, e))
    }

    fn validate(&self) -> Result<()> {
        let range_ok = |r: [f64; 2], lo: f64, hi: f64| {
            r[0].is_finite() && r[1].is_finite() && lo <= r[0] && r[0] <= r[1] && r[1] <= hi
        };
        if !(self.extent.is_finite() && self.extent >= 0.0) {
            return Err(Error::arg("extent must be finite and non-negative"));
        }
        if !range_ok(self.scale_range, f64::MIN_POSITIVE, f64::MAX) {
            return Err(Error::arg("scale_range must be positive and ordered"));
        }
        if !range_ok(self.anisotropy_range, 1.0, f64::MAX) {
            return Err(Error::arg("anisotropy_range must be >= 1 and ordered"));
        }
        if !range_ok(self.opacity_range, f64::MIN_POSITIVE, 1.0) {
            return Err(Error::arg("opacity_range must lie in (0, 1] and be ordered"));
        }
        Ok(())
    }
}

fn sample(rng: &mut ChaCha8Rng, r: [f64; 2]) -> f64 {
    if r[0] == r[1] {
        r[0]
    } else {
        rng.gen_range(r[0]..=r[1])
    }
}

/// Uniform random unit quaternion (Shoemake).
fn random_quaternion(rng: &mut ChaCha8Rng) -> [f64; 4] {
    let (u1, u2, u3): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
    let tau = std::f64::consts::TAU;
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    [
        b * (tau * u3).cos(),
        a * (tau * u2).sin(),
        a * (tau * u2).cos(),
        b * (tau * u3).sin(),
    ]
}

/// Deterministic random scene with SH degree 0. A pure function of its
/// arguments.
pub fn generate_synthetic<T: Real>(seed: u64, count: usize, spec: &SyntheticSpec) -> Result<Scene<T>> {
    if count == 0 {
        return Err(Error::arg("synthetic scene needs at least one gaussian"));
    }
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gaussians = Vec::with_capacity(count);
    for _ in 0..count {
        let center = [0; 3].map(|_| {
            if spec.extent == 0.0 {
                0.0
            } else {
                rng.gen_range(-spec.extent..=spec.extent)
            }
        });
        let short = sample(&mut rng, spec.scale_range);
        let ratio = sample(&mut rng, spec.anisotropy_range);
        let (long_axis, rotation) = if spec.random_rotation {
            (rng.gen_range(0..3), random_quaternion(&mut rng))
        } else {
            (rng.gen_range(0..2), [1.0, 0.0, 0.0, 0.0])
        };
        let mut scale = [short; 3];
        scale[long_axis] = short * ratio;
        let opacity = sample(&mut rng, spec.opacity_range);
        let rgb: [f64; 3] = [rng.gen(), rng.gen(), rng.gen()];
        gaussians.push(Gaussian3D::with_color(
            center.map(T::lit),
            scale.map(T::lit),
            rotation.map(T::lit),
            T::lit(opacity),
            rgb.map(T::lit),
        ));
    }
    Scene::new(gaussians, 0)
}
