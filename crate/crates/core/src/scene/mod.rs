//! Scene and camera domain types, file formats and the synthetic generator.

mod camera;
pub mod json;
pub mod ply;
mod synthetic;

use std::fmt;
use std::path::Path;

pub use camera::{Camera, CameraSpec};
pub use synthetic::{generate_synthetic, SyntheticSpec};

use crate::error::{Error, Result};
use crate::Real;

/// Highest supported spherical-harmonics degree.
pub const MAX_SH_DEGREE: u8 = 3;

/// Number of SH coefficients per color channel for a degree.
pub const fn sh_coeff_count(degree: u8) -> usize {
    (degree as usize + 1) * (degree as usize + 1)
}

/// World-space anisotropic Gaussian.
#[derive(Clone, Debug, PartialEq)]
pub struct Gaussian3D<T: Real = f32> {
    pub center: [T; 3],
    /// Per-axis standard deviations.
    pub scale: [T; 3],
    /// Unit quaternion (w, x, y, z).
    pub rotation: [T; 4],
    /// Opacity in (0, 1].
    pub opacity: T,
    /// SH coefficients, DC first, one RGB triple per basis function.
    pub sh: Vec<[T; 3]>,
}

impl<T: Real> Gaussian3D<T> {
    /// Gaussian with a constant (degree 0) color.
    pub fn with_color(
        center: [T; 3],
        scale: [T; 3],
        rotation: [T; 4],
        opacity: T,
        rgb: [T; 3],
    ) -> Self {
        let dc = rgb.map(crate::sh::rgb_to_dc);
        Self {
            center,
            scale,
            rotation,
            opacity,
            sh: vec![dc],
        }
    }

    pub fn cast<U: Real>(&self) -> Gaussian3D<U> {
        let c = |v: T| U::lit(v.as_f64());
        Gaussian3D {
            center: self.center.map(c),
            scale: self.scale.map(c),
            rotation: self.rotation.map(c),
            opacity: c(self.opacity),
            sh: self.sh.iter().map(|s| s.map(c)).collect(),
        }
    }
}

/// Ordered Gaussian collection. Position in `gaussians` is the Gaussian's
/// identity for every downstream tie-break.
#[derive(Clone, Debug, PartialEq)]
pub struct Scene<T: Real = f32> {
    pub gaussians: Vec<Gaussian3D<T>>,
    pub sh_degree: u8,
}

impl<T: Real> Scene<T> {
    /// Builds a scene, normalizing every quaternion with a finite non-zero norm.
    pub fn new(mut gaussians: Vec<Gaussian3D<T>>, sh_degree: u8) -> Result<Self> {
        if sh_degree > MAX_SH_DEGREE {
            return Err(Error::arg(format!(
                "sh degree {sh_degree} exceeds {MAX_SH_DEGREE}"
            )));
        }
        let expected = sh_coeff_count(sh_degree);
        for (index, g) in gaussians.iter_mut().enumerate() {
            if g.sh.len() != expected {
                return Err(Error::Validation {
                    index,
                    field: "sh",
                    message: format!("has {} coefficients, expected {expected}", g.sh.len()),
                });
            }
            normalize_quaternion(&mut g.rotation);
        }
        Ok(Self {
            gaussians,
            sh_degree,
        })
    }

    pub fn empty() -> Self {
        Self {
            gaussians: Vec::new(),
            sh_degree: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.gaussians.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaussians.is_empty()
    }

    pub fn cast<U: Real>(&self) -> Scene<U> {
        Scene {
            gaussians: self.gaussians.iter().map(Gaussian3D::cast).collect(),
            sh_degree: self.sh_degree,
        }
    }

    /// Loads a scene, choosing the format from the file extension
    /// (`.ply` or `.json`).
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        match extension(path).as_deref() {
            Some("ply") => ply::load_ply(path),
            Some("json") => json::load_json(path),
            _ => Err(Error::Format(format!(
                "{}: unknown scene extension (expected .ply or .json)",
                path.display()
            ))),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        match extension(path).as_deref() {
            Some("ply") => ply::write_ply(self, path),
            Some("json") => json::write_json(self, path),
            _ => Err(Error::Format(format!(
                "{}: unknown scene extension (expected .ply or .json)",
                path.display()
            ))),
        }
    }
}

fn extension(path: &Path) -> Option<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
}

pub(crate) fn normalize_quaternion<T: Real>(q: &mut [T; 4]) {
    let n = q.iter().fold(T::zero(), |acc, &v| acc + v * v).sqrt();
    if n.is_finite() && n > T::zero() {
        for v in q.iter_mut() {
            *v = *v / n;
        }
    }
}

/// One violated Gaussian invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub index: usize,
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "gaussian {}: {} {}", self.index, self.field, self.message)
    }
}

/// Reports every violated per-Gaussian invariant. Quaternions that are merely
/// unnormalized are accepted: they are normalized on scene construction.
pub fn validate_scene<T: Real>(scene: &Scene<T>) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let expected_sh = sh_coeff_count(scene.sh_degree);
    for (index, g) in scene.gaussians.iter().enumerate() {
        let mut push = |field, message: String| {
            out.push(Diagnostic {
                index,
                field,
                message,
            })
        };
        if g.center.iter().any(|v| !v.is_finite()) {
            push("center", "is not finite".into());
        }
        if g.scale.iter().any(|&v| !v.is_finite() || v <= T::zero()) {
            push("scale", format!("{:?} must be finite and positive", g.scale));
        }
        let qn = g
            .rotation
            .iter()
            .fold(T::zero(), |acc, &v| acc + v * v)
            .sqrt();
        if !qn.is_finite() || qn <= T::zero() {
            push("rotation", format!("{:?} cannot be normalized", g.rotation));
        }
        if !(g.opacity > T::zero() && g.opacity <= T::one()) {
            push("opacity", format!("{} outside (0, 1]", g.opacity));
        }
        if g.sh.len() != expected_sh {
            push(
                "sh",
                format!("has {} coefficients, expected {expected_sh}", g.sh.len()),
            );
        } else if g.sh.iter().flatten().any(|v| !v.is_finite()) {
            push("sh", "contains non-finite values".into());
        }
    }
    out
}
