//! Image-quality metrics, the load-balancing loss and the weighted total loss.

use crate::error::{Error, Result};
use crate::render::{Image, LoadMap};
use crate::Real;

/// PSNR written to CSV output for identical images, in place of infinity.
pub const PSNR_IDENTICAL_SENTINEL: f64 = 999.0;

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_C1: f64 = 0.01 * 0.01;
const SSIM_C2: f64 = 0.03 * 0.03;

/// Sum with a fixed pairwise split, independent of thread scheduling.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1..=8 => values.iter().sum(),
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

fn check_dims<T: Real>(a: &Image<T>, b: &Image<T>) -> Result<()> {
    if a.width != b.width || a.height != b.height {
        return Err(Error::arg(format!(
            "image sizes differ: {}x{} vs {}x{}",
            a.width, a.height, b.width, b.height
        )));
    }
    if a.pixels.is_empty() {
        return Err(Error::arg("images are empty"));
    }
    Ok(())
}

fn channel_diffs<T: Real>(a: &Image<T>, b: &Image<T>, f: impl Fn(f64) -> f64) -> Vec<f64> {
    a.pixels
        .iter()
        .zip(&b.pixels)
        .flat_map(|(p, q)| (0..3).map(move |c| p[c].as_f64() - q[c].as_f64()))
        .map(f)
        .collect()
}

/// Mean absolute channel difference.
pub fn l1_loss<T: Real>(a: &Image<T>, b: &Image<T>) -> Result<f64> {
    check_dims(a, b)?;
    let d = channel_diffs(a, b, f64::abs);
    Ok(pairwise_sum(&d) / d.len() as f64)
}

pub fn mse<T: Real>(a: &Image<T>, b: &Image<T>) -> Result<f64> {
    check_dims(a, b)?;
    let d = channel_diffs(a, b, |x| x * x);
    Ok(pairwise_sum(&d) / d.len() as f64)
}

/// `10 log10(1 / MSE)` in dB; `+inf` for identical images.
pub fn psnr<T: Real>(a: &Image<T>, b: &Image<T>) -> Result<f64> {
    let m = mse(a, b)?;
    Ok(if m == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (1.0 / m).log10()
    })
}

fn gaussian_window() -> [f64; SSIM_WINDOW] {
    let mut w = [0.0; SSIM_WINDOW];
    let half = (SSIM_WINDOW / 2) as f64;
    for (i, v) in w.iter_mut().enumerate() {
        let x = i as f64 - half;
        *v = (-(x * x) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let s: f64 = w.iter().sum();
    w.map(|v| v / s)
}

/// Separable window filter with zero padding, output the same size.
fn filter(src: &[f64], width: usize, height: usize, w: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let half = (SSIM_WINDOW / 2) as isize;
    let mut tmp = vec![0.0; src.len()];
    for y in 0..height {
        for x in 0..width {
            let mut acc = 0.0;
            for (k, &wk) in w.iter().enumerate() {
                let sx = x as isize + k as isize - half;
                if sx >= 0 && (sx as usize) < width {
                    acc += wk * src[y * width + sx as usize];
                }
            }
            tmp[y * width + x] = acc;
        }
    }
    let mut out = vec![0.0; src.len()];
    for y in 0..height {
        for x in 0..width {
            let mut acc = 0.0;
            for (k, &wk) in w.iter().enumerate() {
                let sy = y as isize + k as isize - half;
                if sy >= 0 && (sy as usize) < height {
                    acc += wk * tmp[sy as usize * width + x];
                }
            }
            out[y * width + x] = acc;
        }
    }
    out
}

/// Mean SSIM over an 11x11 Gaussian window (sigma 1.5, zero padded),
/// averaged over the three channels.
pub fn ssim<T: Real>(a: &Image<T>, b: &Image<T>) -> Result<f64> {
    check_dims(a, b)?;
    let (w, h) = (a.width as usize, a.height as usize);
    let win = gaussian_window();
    let mut per_channel = [0.0; 3];
    for (c, out) in per_channel.iter_mut().enumerate() {
        let x: Vec<f64> = a.pixels.iter().map(|p| p[c].as_f64()).collect();
        let y: Vec<f64> = b.pixels.iter().map(|p| p[c].as_f64()).collect();
        let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
        let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
        let xy: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p * q).collect();
        let mx = filter(&x, w, h, &win);
        let my = filter(&y, w, h, &win);
        let sxx = filter(&xx, w, h, &win);
        let syy = filter(&yy, w, h, &win);
        let sxy = filter(&xy, w, h, &win);
        let map: Vec<f64> = (0..w * h)
            .map(|i| {
                let (ux, uy) = (mx[i], my[i]);
                let vx = sxx[i] - ux * ux;
                let vy = syy[i] - uy * uy;
                let cxy = sxy[i] - ux * uy;
                let num = (2.0 * ux * uy + SSIM_C1) * (2.0 * cxy + SSIM_C2);
                let den = (ux * ux + uy * uy + SSIM_C1) * (vx + vy + SSIM_C2);
                num / den
            })
            .collect();
        *out = pairwise_sum(&map) / map.len() as f64;
    }
    Ok(per_channel.iter().sum::<f64>() / 3.0)
}

/// Population standard deviation of the per-pixel loads.
pub fn load_loss(load: &LoadMap) -> Result<f64> {
    if load.counts.is_empty() {
        return Err(Error::arg("load map is empty"));
    }
    // Welford update; the tests compare against a plain two-pass formula.
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, &c) in load.counts.iter().enumerate() {
        let x = c as f64;
        let delta = x - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (x - mean);
    }
    Ok((m2 / load.counts.len() as f64).max(0.0).sqrt())
}

/// Summary of a load map.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadStats {
    pub mean: f64,
    pub std: f64,
    pub min: u32,
    pub max: u32,
    /// `histogram[k]` is the number of pixels with load `k`.
    pub histogram: Vec<u64>,
}

impl LoadStats {
    pub fn from_map(load: &LoadMap) -> Result<Self> {
        let std = load_loss(load)?;
        let max = load.max();
        let min = load.counts.iter().copied().min().unwrap_or(0);
        let mut histogram = vec![0u64; max as usize + 1];
        for &c in &load.counts {
            histogram[c as usize] += 1;
        }
        let values: Vec<f64> = load.counts.iter().map(|&c| c as f64).collect();
        Ok(Self {
            mean: pairwise_sum(&values) / values.len() as f64,
            std,
            min,
            max,
            histogram,
        })
    }
}

/// Weights of the total loss; they must sum to one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossWeights {
    pub lambda_l1: f64,
    pub lambda_ssim: f64,
    pub lambda_load: f64,
}

impl LossWeights {
    pub fn new(lambda_l1: f64, lambda_ssim: f64, lambda_load: f64) -> Result<Self> {
        let w = Self {
            lambda_l1,
            lambda_ssim,
            lambda_load,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.lambda_l1, self.lambda_ssim, self.lambda_load];
        if all.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::arg("loss weights must be finite and non-negative"));
        }
        let sum: f64 = all.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::arg(format!("loss weights sum to {sum}, expected 1")));
        }
        Ok(())
    }
}

impl Default for LossWeights {
    /// `lambda_load = 0.45`; the remaining 0.55 split 4:1 between L1 and SSIM.
    fn default() -> Self {
        Self {
            lambda_l1: 0.44,
            lambda_ssim: 0.11,
            lambda_load: 0.45,
        }
    }
}

/// Weighted combination of the individual loss terms.
pub fn combine_losses(l1: f64, ssim: f64, load_std: f64, w: &LossWeights) -> Result<f64> {
    w.validate()?;
    Ok(w.lambda_l1 * l1 + w.lambda_ssim * (1.0 - ssim) + w.lambda_load * load_std)
}

/// `lambda_l1·L1 + lambda_ssim·(1 - SSIM) + lambda_load·std(load)`.
pub fn total_loss<T: Real>(rendered: &Image<T>, reference: &Image<T>, load: &LoadMap, w: &LossWeights) -> Result<f64> {
    w.validate()?;
    let l1 = l1_loss(rendered, reference)?;
    let s = if w.lambda_ssim == 0.0 {
        1.0
    } else {
        ssim(rendered, reference)?
    };
    combine_losses(l1, s, load_loss(load)?, w)
}
