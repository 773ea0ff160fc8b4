//! Reference renderers used to check the tiled pipeline.
//!
//! [`render_reference`] shares the projection and blending code with the
//! pipeline but bypasses tiling and culling: every visible Gaussian is
//! visited at every pixel in global `(depth, index)` order.
//! [`naive::render_naive`] shares nothing and works in `f64`.

use crate::error::Result;
use crate::projection::{project_gaussian, CullingMode, ProjectionConfig};
use crate::render::{blend_pixel, BlendParams, Image, LoadMap};
use crate::scene::{Camera, Scene};
use crate::Real;

/// Brute-force render with a single global sort.
pub fn render_reference<T: Real>(
    scene: &Scene<T>,
    cam: &Camera<T>,
    dilation: T,
    params: &BlendParams<T>,
) -> Result<(Image<T>, LoadMap)> {
    cam.validate()?;
    let cfg = ProjectionConfig {
        mode: CullingMode::Baseline,
        alpha_low: params.alpha_low,
        dilation,
    };
    let mut visible = Vec::new();
    for (i, g) in scene.gaussians.iter().enumerate() {
        if let crate::projection::Projection::Visible(pg) = project_gaussian(g, cam, scene.sh_degree, &cfg)? {
            visible.push((pg.depth.depth_bits(), i, pg));
        }
    }
    visible.sort_by_key(|(d, i, _)| (*d, *i));
    let splats: Vec<_> = visible.into_iter().map(|(_, _, pg)| pg).collect();

    let mut image = Image::filled(cam.width, cam.height, [T::zero(); 3]);
    let mut load = LoadMap::zeros(cam.width, cam.height);
    for y in 0..cam.height {
        for x in 0..cam.width {
            let (c, l) = blend_pixel(splats.iter(), x as i64, y as i64, params, cam.background);
            let i = y as usize * cam.width as usize + x as usize;
            image.pixels[i] = c;
            load.counts[i] = l;
        }
    }
    Ok((image, load))
}

pub mod naive {
    //! Straight-line `f64` implementation of projection, splatting opacity
    //! and front-to-back blending for degree-0 scenes. Deliberately written
    //! without any of the crate's math helpers.

    use crate::scene::{Camera, Scene};
    use crate::Real;

    pub struct NaiveParams {
        pub alpha_low: f64,
        pub alpha_max: f64,
        pub transmittance_min: f64,
        pub dilation: f64,
    }

    impl Default for NaiveParams {
        fn default() -> Self {
            Self {
                alpha_low: 1.0 / 255.0,
                alpha_max: 0.99,
                transmittance_min: 1e-4,
                dilation: 0.3,
            }
        }
    }

    struct Splat {
        mx: f64,
        my: f64,
        inv: [f64; 3],
        depth: f64,
        opacity: f64,
        color: [f64; 3],
        reach: f64,
    }

    /// Returns row-major RGB and per-pixel composite counts.
    pub fn render_naive<T: Real>(scene: &Scene<T>, cam: &Camera<T>, p: &NaiveParams) -> (Vec<[f64; 3]>, Vec<u32>) {
        assert_eq!(scene.sh_degree, 0, "naive renderer handles constant colors only");
        let v = |a: T| a.to_f64().unwrap();
        let vm: Vec<Vec<f64>> = cam.view_matrix.iter().map(|r| r.iter().map(|&x| v(x)).collect()).collect();
        let (fx, fy) = (v(cam.fx), v(cam.fy));
        let (w, h) = (cam.width as f64, cam.height as f64);
        let tan_x = w / (2.0 * fx);
        let tan_y = h / (2.0 * fy);

        let mut splats: Vec<(usize, Splat)> = Vec::new();
        for (idx, g) in scene.gaussians.iter().enumerate() {
            let c = [v(g.center[0]), v(g.center[1]), v(g.center[2])];
            let tx = vm[0][0] * c[0] + vm[0][1] * c[1] + vm[0][2] * c[2] + vm[0][3];
            let ty = vm[1][0] * c[0] + vm[1][1] * c[1] + vm[1][2] * c[2] + vm[1][3];
            let tz = vm[2][0] * c[0] + vm[2][1] * c[1] + vm[2][2] * c[2] + vm[2][3];
            if tz <= v(cam.near_plane) {
                continue;
            }
            let (qw, qx, qy, qz) = (v(g.rotation[0]), v(g.rotation[1]), v(g.rotation[2]), v(g.rotation[3]));
            let r = [
                [1.0 - 2.0 * (qy * qy + qz * qz), 2.0 * (qx * qy - qw * qz), 2.0 * (qx * qz + qw * qy)],
                [2.0 * (qx * qy + qw * qz), 1.0 - 2.0 * (qx * qx + qz * qz), 2.0 * (qy * qz - qw * qx)],
                [2.0 * (qx * qz - qw * qy), 2.0 * (qy * qz + qw * qx), 1.0 - 2.0 * (qx * qx + qy * qy)],
            ];
            let s = [v(g.scale[0]), v(g.scale[1]), v(g.scale[2])];
            // world covariance = sum_k s_k^2 r_k r_k^T over rotation columns
            let mut sigma = [[0.0; 3]; 3];
            for a in 0..3 {
                for b in 0..3 {
                    for k in 0..3 {
                        sigma[a][b] += r[a][k] * s[k] * s[k] * r[b][k];
                    }
                }
            }
            let lim_x = 1.3 * tan_x;
            let lim_y = 1.3 * tan_y;
            let jx = (tx / tz).clamp(-lim_x, lim_x) * tz;
            let jy = (ty / tz).clamp(-lim_y, lim_y) * tz;
            let jac = [
                [fx / tz, 0.0, -fx * jx / (tz * tz)],
                [0.0, fy / tz, -fy * jy / (tz * tz)],
            ];
            // T = J * W (2x3)
            let mut tm = [[0.0; 3]; 2];
            for i in 0..2 {
                for j in 0..3 {
                    for k in 0..3 {
                        tm[i][j] += jac[i][k] * vm[k][j];
                    }
                }
            }
            let mut cov = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    for a in 0..3 {
                        for b in 0..3 {
                            cov[i][j] += tm[i][a] * sigma[a][b] * tm[j][b];
                        }
                    }
                }
            }
            let (cxx, cxy, cyy) = (cov[0][0] + p.dilation, cov[0][1], cov[1][1] + p.dilation);
            let det = cxx * cyy - cxy * cxy;
            if det <= 0.0 {
                continue;
            }
            let half_trace = 0.5 * (cxx + cyy);
            let lmax = (half_trace + (half_trace * half_trace - det).max(0.0).sqrt()).max(cxx).max(cyy);
            let dc = g.sh[0];
            let color = [0, 1, 2].map(|ch| (0.282_094_791_773_878_14 * v(dc[ch]) + 0.5).clamp(0.0, 1.0));
            splats.push((
                idx,
                Splat {
                    mx: fx * tx / tz + (w - 1.0) / 2.0,
                    my: fy * ty / tz + (h - 1.0) / 2.0,
                    inv: [cyy / det, -cxy / det, cxx / det],
                    depth: tz,
                    opacity: v(g.opacity),
                    color,
                    reach: (3.0 * lmax.sqrt()).ceil(),
                },
            ));
        }
        splats.sort_by(|a, b| a.1.depth.total_cmp(&b.1.depth).then(a.0.cmp(&b.0)));

        let bg = cam.background.map(v);
        let mut rgb = Vec::with_capacity((cam.width * cam.height) as usize);
        let mut loads = Vec::with_capacity(rgb.capacity());
        for py in 0..cam.height {
            for px in 0..cam.width {
                let (x, y) = (px as f64, py as f64);
                let mut acc = [0.0; 3];
                let mut trans = 1.0;
                let mut n = 0;
                for (_, s) in &splats {
                    let (dx, dy) = (x - s.mx, y - s.my);
                    if dx.abs() > s.reach || dy.abs() > s.reach {
                        continue;
                    }
                    let e = -0.5 * (s.inv[0] * dx * dx + 2.0 * s.inv[1] * dx * dy + s.inv[2] * dy * dy);
                    let alpha = (s.opacity * e.exp()).min(p.alpha_max);
                    if e > 0.0 || alpha < p.alpha_low {
                        continue;
                    }
                    for ch in 0..3 {
                        acc[ch] += s.color[ch] * alpha * trans;
                    }
                    trans *= 1.0 - alpha;
                    n += 1;
                    if trans < p.transmittance_min {
                        break;
                    }
                }
                rgb.push([0, 1, 2].map(|ch| acc[ch] + trans * bg[ch]));
                loads.push(n);
            }
        }
        (rgb, loads)
    }
}
