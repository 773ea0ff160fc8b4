use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat4, Vec3};
use crate::Real;

/// Pinhole camera. View space follows the x-right, y-down, z-forward
/// convention; pixel centers sit on integer coordinates and the principal
/// point is the image center.
#[derive(Clone, Debug, PartialEq)]
pub struct Camera<T: Real = f32> {
    /// World-to-camera rigid transform.
    pub view_matrix: Mat4<T>,
    pub fx: T,
    pub fy: T,
    pub width: u32,
    pub height: u32,
    pub near_plane: T,
    pub background: [T; 3],
}

impl<T: Real> Camera<T> {
    /// Camera at `position` looking at `target`.
    pub fn look_at(
        position: Vec3<T>,
        target: Vec3<T>,
        up: Vec3<T>,
        fov_y_degrees: T,
        width: u32,
        height: u32,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::arg("camera resolution must be positive"));
        }
        let fov = fov_y_degrees.to_radians();
        if !(fov > T::zero() && fov < T::lit(std::f64::consts::PI)) {
            return Err(Error::arg(format!(
                "vertical fov {fov_y_degrees} outside (0, 180) degrees"
            )));
        }
        let forward = linalg::sub(target, position);
        if linalg::norm(forward) <= T::epsilon() {
            return Err(Error::arg("camera target coincides with position"));
        }
        let forward = linalg::normalize(forward);
        let right = linalg::cross(forward, up);
        if linalg::norm(right) <= T::lit(1e-6) {
            return Err(Error::arg("camera up vector is parallel to view direction"));
        }
        let right = linalg::normalize(right);
        let down = linalg::cross(forward, right);
        let rot = [right, down, forward];
        let t = linalg::mat_vec(&rot, position).map(|v| -v);
        let zero = T::zero();
        let view_matrix = [
            [rot[0][0], rot[0][1], rot[0][2], t[0]],
            [rot[1][0], rot[1][1], rot[1][2], t[1]],
            [rot[2][0], rot[2][1], rot[2][2], t[2]],
            [zero, zero, zero, T::one()],
        ];
        let focal = T::lit(height as f64) / (T::lit(2.0) * (fov / T::lit(2.0)).tan());
        Ok(Self {
            view_matrix,
            fx: focal,
            fy: focal,
            width,
            height,
            near_plane: T::lit(0.2),
            background: [zero; 3],
        })
    }

    /// Default viewpoint for synthetic scenes centred on the origin.
    pub fn default_for_synthetic(width: u32, height: u32) -> Self {
        Self::look_at(
            [T::zero(), T::zero(), T::lit(-4.0)],
            [T::zero(); 3],
            [T::zero(), T::one(), T::zero()],
            T::lit(60.0),
            width,
            height,
        )
        .expect("static camera parameters are valid")
    }

    pub fn with_background(mut self, background: [T; 3]) -> Self {
        self.background = background;
        self
    }

    pub fn with_near_plane(mut self, near_plane: T) -> Self {
        self.near_plane = near_plane;
        self
    }

    /// Principal point in pixels.
    pub fn principal_point(&self) -> (T, T) {
        let half = T::lit(0.5);
        (
            T::lit(self.width as f64 - 1.0) * half,
            T::lit(self.height as f64 - 1.0) * half,
        )
    }

    pub fn tan_half_fov(&self) -> (T, T) {
        let two = T::lit(2.0);
        (
            T::lit(self.width as f64) / (two * self.fx),
            T::lit(self.height as f64) / (two * self.fy),
        )
    }

    /// Camera center in world space.
    pub fn position(&self) -> Vec3<T> {
        let r = linalg::rotation_block(&self.view_matrix);
        let t = [
            self.view_matrix[0][3],
            self.view_matrix[1][3],
            self.view_matrix[2][3],
        ];
        let p = linalg::mat_vec(&linalg::transpose(&r), t);
        p.map(|v| -v)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::arg("camera resolution must be positive"));
        }
        if !(self.fx > T::zero() && self.fy > T::zero()) {
            return Err(Error::arg("focal lengths must be positive"));
        }
        if self.near_plane.is_nan() || self.near_plane <= T::zero() {
            return Err(Error::arg("near plane must be positive"));
        }
        if self.background.iter().any(|&c| !(c >= T::zero() && c <= T::one())) {
            return Err(Error::arg("background channels must lie in [0, 1]"));
        }
        let r = linalg::rotation_block(&self.view_matrix);
        let rrt = linalg::mat_mul(&r, &linalg::transpose(&r));
        for (i, row) in rrt.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                let target = if i == j { T::one() } else { T::zero() };
                if (v - target).abs() > T::lit(1e-5) {
                    return Err(Error::arg("view rotation block is not orthonormal"));
                }
            }
        }
        Ok(())
    }

    pub fn cast<U: Real>(&self) -> Camera<U> {
        let c = |v: T| U::lit(v.as_f64());
        Camera {
            view_matrix: self.view_matrix.map(|row| row.map(c)),
            fx: c(self.fx),
            fy: c(self.fy),
            width: self.width,
            height: self.height,
            near_plane: c(self.near_plane),
            background: self.background.map(c),
        }
    }
}

/// Look-at camera description stored as a JSON sidecar.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraSpec {
    pub position: [f64; 3],
    pub target: [f64; 3],
    #[serde(default = "default_up")]
    pub up: [f64; 3],
    pub fov_y_degrees: f64,
    pub width: u32,
    pub height: u32,
    #[serde(default = "default_near")]
    pub near_plane: f64,
    #[serde(default)]
    pub background: [f64; 3],
}

fn default_up() -> [f64; 3] {
    [0.0, 1.0, 0.0]
}

fn default_near() -> f64 {
    0.2
}

impl CameraSpec {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn to_camera<T: Real>(&self) -> Result<Camera<T>> {
        let v = |a: [f64; 3]| a.map(T::lit);
        let cam = Camera::look_at(
            v(self.position),
            v(self.target),
            v(self.up),
            T::lit(self.fov_y_degrees),
            self.width,
            self.height,
        )?
        .with_near_plane(T::lit(self.near_plane))
        .with_background(v(self.background));
        cam.validate()?;
        Ok(cam)
    }
}
