// Copyright 2026 The stokescell authors
//
// Licensed under the Apache license, version 2.0 (the "license");
// you may not use this file except in compliance with the license.
// You may obtain a copy of the license at
//
//     http://www.apache.org/licenses/license-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the license is distributed on an "as is" basis,
// without warranties or conditions of any kind, either express or implied.
// See the license for the specific language governing permissions and
// limitations under the license.


//! Spectral quadrature on closed curves: log splitting for S, a discrete
//! Hilbert transform for the Cauchy part of K and K*.

use super::{add_block, LayerOperators, OpSet};
use crate::geometry::{BoundaryMesh, MeshLayout, Point};
use crate::kernels::Mat;
use nalgebra::DMatrix;
use std::f64::consts::PI;

/// Per-node curve data.
pub(crate) struct CurveData {
    pub n: usize,
    pub t: Vec<f64>,
    pub x: Vec<Point>,
    pub d1: Vec<Point>,
    pub d2: Vec<Point>,
    pub speed: Vec<f64>,
    pub normal: Vec<Point>,
    pub tangent: Vec<Point>,
    pub kappa: Vec<f64>,
}

impl CurveData {
    pub fn new(mesh: &BoundaryMesh) -> Self {
        let MeshLayout::Curve { t, d1, d2 } = &mesh.layout else {
            panic!("planar quadrature needs a curve mesh");
        };
        let n = mesh.len();
        let speed: Vec<f64> = d1.iter().map(|v| v.norm()).collect();
        let tangent = d1.iter().zip(&speed).map(|(v, s)| v / *s).collect();
        let kappa = (0..n)
            .map(|i| (d1[i].x * d2[i].y - d1[i].y * d2[i].x) / speed[i].powi(3))
            .collect();
        Self {
            n,
            t: t.clone(),
            x: mesh.nodes.clone(),
            d1: d1.clone(),
            d2: d2.clone(),
            speed,
            normal: mesh.normals.clone(),
            tangent,
            kappa,
        }
    }
}

/// Weights R_m with ∫ log(4 sin²((t_i - τ)/2)) f(τ) dτ ≈ Σ_l R_{(i-l) mod n} f(t_l).
pub fn log_weights(n: usize) -> Vec<f64> {
    let h = n / 2;
    (0..n)
        .map(|m| {
            let s: f64 = (1..h)
                .map(|q| (2.0 * PI * (q * m) as f64 / n as f64).cos() / q as f64)
                .sum();
            let nyq = if m % 2 == 0 { 1.0 } else { -1.0 };
            -4.0 * PI / n as f64 * s - 4.0 * PI / (n * n) as f64 * nyq
        })
        .collect()
}

/// Discrete conjugate function: (Hf)_i = Σ_l H_{(i-l) mod n} f_l, with H[cos mτ] = sin mt.
pub fn hilbert_weights(n: usize) -> Vec<f64> {
    let h = n / 2;
    (0..n)
        .map(|m| {
            2.0 / n as f64
                * (1..h)
                    .map(|q| (2.0 * PI * (q * m) as f64 / n as f64).sin())
                    .sum::<f64>()
        })
        .collect()
}

#[inline]
fn outer2(a: &Point, b: &Point) -> Mat {
    Mat::new(a.x * b.x, a.x * b.y, 0.0, a.y * b.x, a.y * b.y, 0.0, 0.0, 0.0, 0.0)
}

const I2: Mat = Mat::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0);

pub fn assemble(mesh: &BoundaryMesh, set: OpSet) -> LayerOperators {
    let c = CurveData::new(mesh);
    let n = c.n;
    let h = 2.0 * PI / n as f64;
    let rw = log_weights(n);
    let hw = hilbert_weights(n);
    let q4 = 1.0 / (4.0 * PI);
    let q2 = 1.0 / (2.0 * PI);
    let mut s = set.s.then(|| DMatrix::zeros(2 * n, 2 * n));
    let mut k = set.k.then(|| DMatrix::zeros(2 * n, 2 * n));
    let mut ks = set.kstar.then(|| DMatrix::zeros(2 * n, 2 * n));
    let mut sl = set.s_lap.then(|| DMatrix::zeros(n, n));
    let mut kl = set.k_lap.then(|| DMatrix::zeros(n, n));

    for i in 0..n {
        for l in 0..n {
            let m = (i + n - l) % n;
            let ys = c.speed[l];
            let diag = i == l;
            let z = c.x[i] - c.x[l];
            let r2 = z.norm_squared();
            let half_cot = if diag {
                0.0
            } else {
                0.5 / (0.5 * (c.t[i] - c.t[l])).tan()
            };
            // log|z| - log|2 sin((t-τ)/2)| and z z^T / |z|^2
            let (lsm, zz) = if diag {
                (c.speed[i].ln(), outer2(&c.tangent[i], &c.tangent[i]))
            } else {
                let two_sin = (2.0 * (0.5 * (c.t[i] - c.t[l])).sin()).abs();
                (0.5 * r2.ln() - two_sin.ln(), outer2(&z, &z) / r2)
            };
            if let Some(s) = s.as_mut() {
                let b = (I2 * (0.5 * rw[m] + h * lsm) - zz * h) * (q4 * ys);
                add_block(s, 2, i, l, &b);
            }
            if let Some(sl) = sl.as_mut() {
                sl[(i, l)] = -q2 * ys * (0.5 * rw[m] + h * lsm);
            }
            // ⟨N_y, x - y⟩ / |x - y|^2 and ⟨N_x, x - y⟩ / |x - y|^2
            let (ny_r, nx_r) = if diag {
                (-0.5 * c.kappa[i], 0.5 * c.kappa[i])
            } else {
                (c.normal[l].dot(&z) / r2, c.normal[i].dot(&z) / r2)
            };
            if let Some(k) = k.as_mut() {
                let sm = if diag {
                    c.d1[i].dot(&c.d2[i]) / (2.0 * c.speed[i].powi(2))
                } else {
                    -z.dot(&c.d1[l]) / r2 + half_cot
                };
                let t12 = -q4 * (h * sm - PI * hw[m]);
                let weak = (zz * (-q2 * ny_r) - I2 * (q4 * ny_r)) * (h * ys);
                let b = weak + Mat::new(0.0, t12, 0.0, -t12, 0.0, 0.0, 0.0, 0.0, 0.0);
                add_block(k, 2, i, l, &b);
            }
            if let Some(ks) = ks.as_mut() {
                let sm = if diag {
                    -c.d1[i].dot(&c.d2[i]) / (2.0 * c.speed[i].powi(2))
                } else {
                    -z.dot(&c.d1[i]) / r2 + half_cot
                };
                let t12 = -q4 * ys / c.speed[i] * (h * sm - PI * hw[m]);
                let weak = (zz * (q2 * nx_r) + I2 * (q4 * nx_r)) * (h * ys);
                let b = weak + Mat::new(0.0, t12, 0.0, -t12, 0.0, 0.0, 0.0, 0.0, 0.0);
                add_block(ks, 2, i, l, &b);
            }
            if let Some(kl) = kl.as_mut() {
                kl[(i, l)] = q2 * ny_r * h * ys;
            }
        }
    }
    LayerOperators {
        s,
        k,
        kstar: ks,
        s_lap: sl,
        k_lap: kl,
    }
}
