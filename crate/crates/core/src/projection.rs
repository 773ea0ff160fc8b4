//! The per-Gaussian preprocessing stage: covariance projection, eigen
//! extents, culling extents for each mode, depth and color.
//!
//! Every integer extent is the ceiling of `min(bound, 3 * sqrt(lambda_max))`
//! where `bound` is the exact half-extent of the ellipse on which the
//! splatting opacity equals `alpha_low`. When projecting, the bound is
//! widened by a [`RoundingMargin`] that covers the rounding error of the
//! per-pixel opacity evaluation, so culling never removes a pixel the
//! renderer would have composited.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat3};
use crate::scene::{Camera, Gaussian3D};
use crate::sh::evaluate_sh;
use crate::Real;

/// Default minimum splatting opacity.
pub const ALPHA_LOW: f64 = 1.0 / 255.0;
/// Low-pass dilation added to the projected covariance diagonal.
pub const DEFAULT_DILATION: f64 = 0.3;
/// Limit on `|x/z|` and `|y/z|` used for the Jacobian, as a multiple of the
/// half-fov tangent.
pub const JACOBIAN_CLAMP: f64 = 1.3;
/// Standard deviations covered by the baseline radius.
pub const BASELINE_SIGMAS: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CullingMode {
    /// Square of half-size `ceil(3 sqrt(lambda_max))`.
    Baseline,
    /// Square around the bounding circle of the `alpha_low` ellipse.
    Circle,
    /// Axis-aligned bounding box of the `alpha_low` ellipse.
    Aabb,
}

impl CullingMode {
    pub const ALL: [CullingMode; 3] = [Self::Baseline, Self::Circle, Self::Aabb];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Baseline => "baseline",
            Self::Circle => "circle",
            Self::Aabb => "aabb",
        }
    }
}

impl fmt::Display for CullingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CullingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "baseline" => Ok(Self::Baseline),
            "circle" => Ok(Self::Circle),
            "aabb" => Ok(Self::Aabb),
            other => Err(Error::arg(format!(
                "unknown culling mode '{other}' (expected baseline, circle or aabb)"
            ))),
        }
    }
}

/// Symmetric 2x2 covariance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cov2<T> {
    pub xx: T,
    pub xy: T,
    pub yy: T,
}

impl<T: Real> Cov2<T> {
    pub fn new(xx: T, xy: T, yy: T) -> Self {
        Self { xx, xy, yy }
    }

    pub fn det(&self) -> T {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn is_positive_definite(&self) -> bool {
        self.xx > T::zero() && self.det() > T::zero()
    }

    /// Inverse as conic coefficients.
    pub fn inverse(&self) -> Conic<T> {
        let det = self.det();
        Conic {
            a: self.yy / det,
            b: -self.xy / det,
            c: self.xx / det,
        }
    }
}

/// Inverse covariance `[[a, b], [b, c]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Conic<T> {
    pub a: T,
    pub b: T,
    pub c: T,
}

impl<T: Real> Conic<T> {
    /// Exponent `-1/2 xᵀ·conic·x` of the splatting opacity.
    #[inline]
    pub fn power(&self, dx: T, dy: T) -> T {
        T::lit(-0.5) * (self.a * dx * dx + self.c * dy * dy) - self.b * dx * dy
    }
}

/// Coefficients of `A x² + B y² + C xy + D <= 0`, the region where the
/// splatting opacity is at least `alpha_low`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EllipseCoefficients<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: Real> EllipseCoefficients<T> {
    pub fn eval(&self, x: T, y: T) -> T {
        self.a * x * x + self.b * y * y + self.c * x * y + self.d
    }
}

/// Culling extent in whole pixels for the active mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CullExtent {
    Baseline { r_o: u32 },
    Circle { r: u32 },
    Aabb { r_x: u32, r_y: u32 },
}

impl CullExtent {
    /// Half-extents along x and y.
    pub fn half_extents(&self) -> (u32, u32) {
        match *self {
            Self::Baseline { r_o } => (r_o, r_o),
            Self::Circle { r } => (r, r),
            Self::Aabb { r_x, r_y } => (r_x, r_y),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CullReason {
    /// View-space depth at or in front of the near plane.
    NearPlane,
    /// `sigma <= alpha_low`: no pixel can reach the minimum opacity.
    LowOpacity,
    /// Projected covariance not positive definite or non-finite.
    Degenerate,
}

/// Inclusive integer pixel rectangle; may lie partly or fully off-screen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PixelRect {
    pub x0: i64,
    pub x1: i64,
    pub y0: i64,
    pub y1: i64,
}

impl PixelRect {
    /// Integer pixels `p` with `|p - center| <= half` on each axis.
    pub fn around<T: Real>(center: [T; 2], half_x: u32, half_y: u32) -> Self {
        let span = |c: T, h: u32| {
            let h = T::lit(h as f64);
            (to_i64((c - h).ceil()), to_i64((c + h).floor()))
        };
        let (x0, x1) = span(center[0], half_x);
        let (y0, y1) = span(center[1], half_y);
        Self { x0, x1, y0, y1 }
    }

    #[inline]
    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    pub fn is_empty(&self) -> bool {
        self.x0 > self.x1 || self.y0 > self.y1
    }

    /// Pixels one step outside the rectangle, corners included.
    pub fn outer_ring(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        let (x0, x1, y0, y1) = (self.x0 - 1, self.x1 + 1, self.y0 - 1, self.y1 + 1);
        let rows = (x0..=x1).flat_map(move |x| [(x, y0), (x, y1)]);
        let cols = (y0 + 1..y1).flat_map(move |y| [(x0, y), (x1, y)]);
        rows.chain(cols)
    }
}

fn to_i64<T: Real>(v: T) -> i64 {
    let v = v.as_f64();
    if v.is_nan() {
        0
    } else {
        v.clamp(-(1i64 << 52) as f64, (1i64 << 52) as f64) as i64
    }
}

/// Screen-space splat produced by the preprocessing stage.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectedGaussian<T: Real = f32> {
    pub mean2d: [T; 2],
    /// Dilated projected covariance.
    pub cov2d: Cov2<T>,
    pub conic: Conic<T>,
    /// View-space z.
    pub depth: T,
    pub color: [T; 3],
    pub opacity: T,
    pub lambda_max: T,
    pub lambda_min: T,
    pub radius_baseline: u32,
    pub extent: CullExtent,
    /// Pixels inside the baseline square; the renderer never blends a
    /// Gaussian outside it, whatever the culling mode.
    pub support: PixelRect,
    /// Pixels inside the active culling extent; drives tile assignment.
    pub footprint: PixelRect,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Projection<T: Real = f32> {
    Visible(ProjectedGaussian<T>),
    Culled(CullReason),
}

impl<T: Real> Projection<T> {
    pub fn visible(&self) -> Option<&ProjectedGaussian<T>> {
        match self {
            Self::Visible(pg) => Some(pg),
            Self::Culled(_) => None,
        }
    }
}

/// Settings of the preprocessing stage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectionConfig<T = f32> {
    pub mode: CullingMode,
    pub alpha_low: T,
    pub dilation: T,
}

impl<T: Real> Default for ProjectionConfig<T> {
    fn default() -> Self {
        Self {
            mode: CullingMode::Aabb,
            alpha_low: T::lit(ALPHA_LOW),
            dilation: T::lit(DEFAULT_DILATION),
        }
    }
}

/// `R·S·Sᵀ·Rᵀ` for `S = diag(scale)` and `R` the rotation of a unit quaternion.
pub fn build_covariance3d<T: Real>(scale: [T; 3], rotation: [T; 4]) -> Result<Mat3<T>> {
    if scale.iter().chain(rotation.iter()).any(|v| !v.is_finite()) {
        return Err(Error::arg("non-finite scale or rotation"));
    }
    let r = linalg::quat_to_mat(rotation);
    let mut m = r;
    for row in m.iter_mut() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = *v * scale[j];
        }
    }
    Ok(linalg::mat_mul(&m, &linalg::transpose(&m)))
}

/// Eigenvalues `(lambda_max, lambda_min)` of a positive definite 2x2 covariance.
///
/// `lambda_max` is never below either diagonal entry, so the bounding circle
/// always contains the axis-aligned box computed from the same covariance.
pub fn eigen_extents<T: Real>(cov: Cov2<T>) -> Result<(T, T)> {
    let finite = cov.xx.is_finite() && cov.xy.is_finite() && cov.yy.is_finite();
    if !finite || !cov.is_positive_definite() {
        return Err(Error::arg(format!("covariance {cov:?} is not positive definite")));
    }
    let det = cov.det();
    let mid = T::lit(0.5) * (cov.xx + cov.yy);
    let disc = (mid * mid - det).max(T::zero()).sqrt();
    let lambda_max = (mid + disc).max(cov.xx).max(cov.yy);
    let lambda_min = det / lambda_max;
    Ok((lambda_max, lambda_min))
}

/// `3 sqrt(lambda_max)`, the real-valued baseline half-extent.
fn baseline_bound<T: Real>(lambda_max: T) -> T {
    T::lit(BASELINE_SIGMAS) * lambda_max.sqrt()
}

fn ceil_u32<T: Real>(v: T) -> u32 {
    let v = v.ceil().as_f64();
    if v <= 0.0 {
        0
    } else {
        v.min(u32::MAX as f64) as u32
    }
}

/// `ceil(3 sqrt(lambda_max))`.
pub fn radius_baseline<T: Real>(lambda_max: T) -> u32 {
    ceil_u32(baseline_bound(lambda_max))
}

/// `2 ln(sigma / alpha_low)`, or `None` when the Gaussian can never reach
/// `alpha_low`.
fn opacity_log_bound<T: Real>(sigma: T, alpha_low: T) -> Option<T> {
    if sigma <= alpha_low {
        None
    } else {
        Some(T::lit(2.0) * (sigma / alpha_low).ln())
    }
}

/// Widening applied to real-valued extents before rounding up.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoundingMargin<T> {
    pub relative: T,
    pub absolute: T,
}

impl<T: Real> RoundingMargin<T> {
    pub fn none() -> Self {
        Self {
            relative: T::zero(),
            absolute: T::zero(),
        }
    }

    /// Margin covering the error of evaluating `xᵀ·conic·x` in `T`. The
    /// relative error of that quadratic form grows with
    /// `kappa = xx·yy / det`, the cancellation factor at the ellipse's
    /// axis-extreme points.
    pub fn for_cov(cov: Cov2<T>) -> Self {
        let kappa = (cov.xx * cov.yy / cov.det()).max(T::one());
        let eps = T::epsilon();
        Self {
            relative: T::lit(16.0) * eps * kappa + T::lit(8.0) * eps,
            absolute: T::lit(1e-3),
        }
    }

    fn widen(&self, v: T) -> T {
        v * (T::one() + self.relative) + self.absolute
    }
}

/// Adaptive bounding-circle radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptiveRadius<T> {
    /// `sqrt(2 lambda_max ln(sigma / alpha_low))`, unclamped.
    pub r_ad: T,
    /// `ceil(min(r_ad, 3 sqrt(lambda_max)))`.
    pub r: u32,
}

/// Bounding-circle radius of the `alpha_low` ellipse, or `None` (cull the
/// whole Gaussian) when `sigma <= alpha_low`.
pub fn radius_adaptive<T: Real>(lambda_max: T, sigma: T, alpha_low: T) -> Option<AdaptiveRadius<T>> {
    radius_adaptive_with_margin(lambda_max, sigma, alpha_low, RoundingMargin::none())
}

pub fn radius_adaptive_with_margin<T: Real>(
    lambda_max: T,
    sigma: T,
    alpha_low: T,
    margin: RoundingMargin<T>,
) -> Option<AdaptiveRadius<T>> {
    let log_bound = opacity_log_bound(sigma, alpha_low)?;
    let r_ad = (lambda_max * log_bound).sqrt();
    let r = ceil_u32(margin.widen(r_ad).min(baseline_bound(lambda_max)));
    Some(AdaptiveRadius { r_ad, r })
}

/// Ellipse `A x² + B y² + C xy + D <= 0` bounding the pixels where the
/// splatting opacity reaches `alpha_low`.
pub fn ellipse_coefficients<T: Real>(cov: Cov2<T>, sigma: T, alpha_low: T) -> Result<EllipseCoefficients<T>> {
    if !cov.is_positive_definite() {
        return Err(Error::arg("covariance is not positive definite"));
    }
    let log_bound = opacity_log_bound(sigma, alpha_low)
        .ok_or_else(|| Error::arg(format!("sigma {sigma} <= alpha_low {alpha_low}")))?;
    Ok(EllipseCoefficients {
        a: cov.yy,
        b: cov.xx,
        c: T::lit(-2.0) * cov.xy,
        d: -cov.det() * log_bound,
    })
}

/// Axis-aligned half-extents of the `alpha_low` ellipse.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AabbExtents<T> {
    /// `sqrt(2 cov.xx ln(sigma / alpha_low))`, unclamped.
    pub x_max: T,
    /// `sqrt(2 cov.yy ln(sigma / alpha_low))`, unclamped.
    pub y_max: T,
    pub r_x: u32,
    pub r_y: u32,
}

/// Axis-aligned bounding box of the `alpha_low` ellipse, each axis clamped
/// to the baseline extent; `None` when `sigma <= alpha_low`.
pub fn aabb_extents<T: Real>(cov: Cov2<T>, sigma: T, alpha_low: T, lambda_max: T) -> Option<AabbExtents<T>> {
    aabb_extents_with_margin(cov, sigma, alpha_low, lambda_max, RoundingMargin::none())
}

pub fn aabb_extents_with_margin<T: Real>(
    cov: Cov2<T>,
    sigma: T,
    alpha_low: T,
    lambda_max: T,
    margin: RoundingMargin<T>,
) -> Option<AabbExtents<T>> {
    let log_bound = opacity_log_bound(sigma, alpha_low)?;
    let x_max = (cov.xx * log_bound).sqrt();
    let y_max = (cov.yy * log_bound).sqrt();
    let cap = baseline_bound(lambda_max);
    Some(AabbExtents {
        x_max,
        y_max,
        r_x: ceil_u32(margin.widen(x_max).min(cap)),
        r_y: ceil_u32(margin.widen(y_max).min(cap)),
    })
}

/// Runs the preprocessing stage for one Gaussian.
pub fn project_gaussian<T: Real>(
    g: &Gaussian3D<T>,
    cam: &Camera<T>,
    sh_degree: u8,
    cfg: &ProjectionConfig<T>,
) -> Result<Projection<T>> {
    let t = linalg::transform_point(&cam.view_matrix, g.center);
    if t[2].is_nan() || t[2] <= cam.near_plane {
        return Ok(Projection::Culled(CullReason::NearPlane));
    }

    let cov2d = match project_covariance(g, cam, t, cfg.dilation) {
        Some(c) => c,
        None => return Ok(Projection::Culled(CullReason::Degenerate)),
    };
    let (lambda_max, lambda_min) = match eigen_extents(cov2d) {
        Ok(e) => e,
        Err(_) => return Ok(Projection::Culled(CullReason::Degenerate)),
    };
    let conic = cov2d.inverse();

    let sigma = g.opacity;
    let margin = RoundingMargin::for_cov(cov2d);
    let r_o = radius_baseline(lambda_max);
    let extent = match cfg.mode {
        CullingMode::Baseline => CullExtent::Baseline { r_o },
        CullingMode::Circle => {
            match radius_adaptive_with_margin(lambda_max, sigma, cfg.alpha_low, margin) {
                Some(ad) => CullExtent::Circle { r: ad.r },
                None => return Ok(Projection::Culled(CullReason::LowOpacity)),
            }
        }
        CullingMode::Aabb => {
            match aabb_extents_with_margin(cov2d, sigma, cfg.alpha_low, lambda_max, margin) {
                Some(bb) => CullExtent::Aabb {
                    r_x: bb.r_x,
                    r_y: bb.r_y,
                },
                None => return Ok(Projection::Culled(CullReason::LowOpacity)),
            }
        }
    };

    let (cx, cy) = cam.principal_point();
    let mean2d = [cam.fx * t[0] / t[2] + cx, cam.fy * t[1] / t[2] + cy];
    if !(mean2d[0].is_finite() && mean2d[1].is_finite()) {
        return Ok(Projection::Culled(CullReason::Degenerate));
    }

    let view_dir = linalg::normalize(linalg::sub(g.center, cam.position()));
    let color = evaluate_sh(&g.sh, view_dir, sh_degree)?;

    let (ex, ey) = extent.half_extents();
    Ok(Projection::Visible(ProjectedGaussian {
        mean2d,
        cov2d,
        conic,
        depth: t[2],
        color,
        opacity: sigma,
        lambda_max,
        lambda_min,
        radius_baseline: r_o,
        extent,
        support: PixelRect::around(mean2d, r_o, r_o),
        footprint: PixelRect::around(mean2d, ex, ey),
    }))
}

/// `J·W·Σ·Wᵀ·Jᵀ` plus the diagonal dilation, with the Jacobian evaluated at
/// the view position clamped to the widened frustum.
fn project_covariance<T: Real>(g: &Gaussian3D<T>, cam: &Camera<T>, t: [T; 3], dilation: T) -> Option<Cov2<T>> {
    let cov3d = build_covariance3d(g.scale, g.rotation).ok()?;
    let (tan_x, tan_y) = cam.tan_half_fov();
    let lim_x = T::lit(JACOBIAN_CLAMP) * tan_x;
    let lim_y = T::lit(JACOBIAN_CLAMP) * tan_y;
    let tz = t[2];
    let tx = (t[0] / tz).max(-lim_x).min(lim_x) * tz;
    let ty = (t[1] / tz).max(-lim_y).min(lim_y) * tz;

    let zero = T::zero();
    let j = [
        [cam.fx / tz, zero, -cam.fx * tx / (tz * tz)],
        [zero, cam.fy / tz, -cam.fy * ty / (tz * tz)],
        [zero, zero, zero],
    ];
    let w = linalg::rotation_block(&cam.view_matrix);
    let m = linalg::mat_mul(&j, &w);
    let cov = linalg::mat_mul(&linalg::mat_mul(&m, &cov3d), &linalg::transpose(&m));
    let c = Cov2::new(cov[0][0] + dilation, cov[0][1], cov[1][1] + dilation);
    (c.xx.is_finite() && c.xy.is_finite() && c.yy.is_finite() && c.is_positive_definite()).then_some(c)
}

/// Splatting opacity of a Gaussian at an integer pixel, before the
/// `alpha_low` test: `min(alpha_max, sigma·exp(power))`, or zero where the
/// exponent is positive.
#[inline]
pub fn splat_alpha<T: Real>(pg: &ProjectedGaussian<T>, px: i64, py: i64, alpha_max: T) -> T {
    let dx = T::lit(px as f64) - pg.mean2d[0];
    let dy = T::lit(py as f64) - pg.mean2d[1];
    let power = pg.conic.power(dx, dy);
    if power > T::zero() {
        return T::zero();
    }
    alpha_max.min(pg.opacity * power.exp())
}
