//! Finite-difference opacity descent on the total loss. Loads are integer
//! counts, so there is no analytic gradient; a central difference over a
//! finite opacity interval picks up the footprint and termination changes
//! that move the load distribution.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::{l1_loss, load_loss, ssim, LossWeights};
use crate::pipeline::{RenderConfig, Rasterizer};
use crate::render::Image;
use crate::scene::{Camera, Scene};
use crate::Real;

/// Largest scene the toy optimizer accepts.
pub const MAX_TOY_GAUSSIANS: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToyOptions {
    /// Half-width of the central difference, in opacity units.
    pub fd_delta: f64,
    /// Opacity floor after an update.
    pub min_opacity: f64,
}

impl Default for ToyOptions {
    fn default() -> Self {
        Self {
            fd_delta: 0.05,
            min_opacity: 1e-3,
        }
    }
}

/// Loss terms of one evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossBreakdown {
    pub l1: f64,
    pub ssim: f64,
    pub load_std: f64,
    pub total: f64,
}

#[derive(Clone, Debug)]
pub struct BalanceStep<T: Real> {
    pub scene: Scene<T>,
    pub before: LossBreakdown,
    pub after: LossBreakdown,
    pub gradient: Vec<f64>,
}

pub fn evaluate_loss<T: Real>(
    rasterizer: &Rasterizer<T>,
    scene: &Scene<T>,
    cam: &Camera<T>,
    reference: &Image<T>,
    w: &LossWeights,
) -> Result<LossBreakdown> {
    let out = rasterizer.render(scene, cam)?;
    let l1 = l1_loss(&out.image, reference)?;
    let s = if w.lambda_ssim == 0.0 {
        1.0
    } else {
        ssim(&out.image, reference)?
    };
    let load_std = load_loss(&out.load_map)?;
    Ok(LossBreakdown {
        l1,
        ssim: s,
        load_std,
        total: w.lambda_l1 * l1 + w.lambda_ssim * (1.0 - s) + w.lambda_load * load_std,
    })
}

/// One gradient step on every Gaussian's opacity.
pub fn toy_balance_step<T: Real>(
    scene: &Scene<T>,
    cam: &Camera<T>,
    reference: &Image<T>,
    w: &LossWeights,
    step: f64,
    config: &RenderConfig<T>,
    opts: &ToyOptions,
) -> Result<BalanceStep<T>> {
    if !step.is_finite() || step <= 0.0 {
        return Err(Error::arg(format!("step {step} must be positive")));
    }
    if scene.len() > MAX_TOY_GAUSSIANS {
        return Err(Error::arg(format!(
            "toy optimizer handles at most {MAX_TOY_GAUSSIANS} gaussians, got {}",
            scene.len()
        )));
    }
    if scene.sh_degree != 0 {
        return Err(Error::arg("toy optimizer expects sh degree 0"));
    }
    if opts.fd_delta.is_nan() || opts.fd_delta <= 0.0 {
        return Err(Error::arg("finite-difference delta must be positive"));
    }
    w.validate()?;
    let rasterizer = Rasterizer::new(*config)?;
    let before = evaluate_loss(&rasterizer, scene, cam, reference, w)?;

    let gradient = (0..scene.len())
        .into_par_iter()
        .map(|i| {
            let sigma = scene.gaussians[i].opacity.as_f64();
            let hi = (sigma + opts.fd_delta).min(1.0);
            let lo = (sigma - opts.fd_delta).max(opts.min_opacity);
            if hi <= lo {
                return Ok(0.0);
            }
            let probe = |v: f64| -> Result<f64> {
                let mut s = scene.clone();
                s.gaussians[i].opacity = T::lit(v);
                Ok(evaluate_loss(&rasterizer, &s, cam, reference, w)?.total)
            };
            Ok((probe(hi)? - probe(lo)?) / (hi - lo))
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut next = scene.clone();
    for (g, d) in next.gaussians.iter_mut().zip(&gradient) {
        if *d != 0.0 {
            let v = (g.opacity.as_f64() - step * d).clamp(opts.min_opacity, 1.0);
            g.opacity = T::lit(v);
        }
    }
    let after = evaluate_loss(&rasterizer, &next, cam, reference, w)?;
    Ok(BalanceStep {
        scene: next,
        before,
        after,
        gradient,
    })
}
