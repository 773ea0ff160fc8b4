//! Real spherical-harmonics color evaluation up to degree 3.

use crate::error::{Error, Result};
use crate::scene::{sh_coeff_count, MAX_SH_DEGREE};
use crate::Real;

pub const SH_C0: f64 = 0.282_094_791_773_878_14;
pub const SH_C1: f64 = 0.488_602_511_902_919_9;
pub const SH_C2: [f64; 5] = [
    1.092_548_430_592_079_2,
    -1.092_548_430_592_079_2,
    0.315_391_565_252_520_05,
    -1.092_548_430_592_079_2,
    0.546_274_215_296_039_6,
];
pub const SH_C3: [f64; 7] = [
    -0.590_043_589_926_643_5,
    2.890_611_442_640_554,
    -0.457_045_799_464_465_8,
    0.373_176_332_590_115_4,
    -0.457_045_799_464_465_8,
    1.445_305_721_320_277,
    -0.590_043_589_926_643_5,
];

/// DC coefficient that evaluates to `rgb` for a degree-0 Gaussian.
pub fn rgb_to_dc<T: Real>(rgb: T) -> T {
    (rgb - T::lit(0.5)) / T::lit(SH_C0)
}

/// Real SH basis values for `dir` up to `degree`, in coefficient order.
pub fn sh_basis<T: Real>(dir: [T; 3], degree: u8) -> Vec<T> {
    let [x, y, z] = dir;
    let c = T::lit;
    let mut basis = Vec::with_capacity(sh_coeff_count(degree));
    basis.push(c(SH_C0));
    if degree >= 1 {
        basis.push(-c(SH_C1) * y);
        basis.push(c(SH_C1) * z);
        basis.push(-c(SH_C1) * x);
    }
    if degree >= 2 {
        let (xx, yy, zz) = (x * x, y * y, z * z);
        let (xy, yz, xz) = (x * y, y * z, x * z);
        basis.push(c(SH_C2[0]) * xy);
        basis.push(c(SH_C2[1]) * yz);
        basis.push(c(SH_C2[2]) * (c(2.0) * zz - xx - yy));
        basis.push(c(SH_C2[3]) * xz);
        basis.push(c(SH_C2[4]) * (xx - yy));
        if degree >= 3 {
            basis.push(c(SH_C3[0]) * y * (c(3.0) * xx - yy));
            basis.push(c(SH_C3[1]) * xy * z);
            basis.push(c(SH_C3[2]) * y * (c(4.0) * zz - xx - yy));
            basis.push(c(SH_C3[3]) * z * (c(2.0) * zz - c(3.0) * xx - c(3.0) * yy));
            basis.push(c(SH_C3[4]) * x * (c(4.0) * zz - xx - yy));
            basis.push(c(SH_C3[5]) * z * (xx - yy));
            basis.push(c(SH_C3[6]) * x * (xx - c(3.0) * yy));
        }
    }
    basis
}

/// View-dependent color: `sum(basis * coeff) + 0.5`, clamped to `[0, 1]`.
pub fn evaluate_sh<T: Real>(coeffs: &[[T; 3]], view_dir: [T; 3], degree: u8) -> Result<[T; 3]> {
    if degree > MAX_SH_DEGREE {
        return Err(Error::arg(format!("sh degree {degree} exceeds {MAX_SH_DEGREE}")));
    }
    if coeffs.len() != sh_coeff_count(degree) {
        return Err(Error::arg(format!(
            "degree {degree} needs {} sh coefficients, got {}",
            sh_coeff_count(degree),
            coeffs.len()
        )));
    }
    let mut rgb = [T::lit(0.5); 3];
    if degree == 0 {
        for ch in 0..3 {
            rgb[ch] = rgb[ch] + T::lit(SH_C0) * coeffs[0][ch];
        }
    } else {
        for (b, coeff) in sh_basis(view_dir, degree).into_iter().zip(coeffs) {
            for ch in 0..3 {
                rgb[ch] = rgb[ch] + b * coeff[ch];
            }
        }
    }
    Ok(rgb.map(|v| v.max(T::zero()).min(T::one())))
}
