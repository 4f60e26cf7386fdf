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


//! Reference evaluators independent of the Ewald code path.
//!
//! [`fourier_2d`] sums the planar Fourier series of (G, P, G_Δ) with the inner
//! index in closed form, so the remaining series converges geometrically.
//! [`LaplaceGaussEwald`] evaluates G_Δ with the plain Gaussian split.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::kernels::Mat;
use crate::special::{e1, erfc};
use std::f64::consts::PI;

/// Values from the planar Fourier oracle.
#[derive(Clone, Copy, Debug)]
pub struct FourierValues {
    pub g: Mat,
    pub p: Point,
    pub lap: f64,
}

// cosh(bu)/sinh(bπ), sinh(bu)/sinh(bπ), coth(bπ) for b > 0, |u| < π
fn ratios(b: f64, u: f64) -> (f64, f64, f64) {
    let den = 1.0 - (-2.0 * PI * b).exp();
    let ep = (b * (u.abs() - PI)).exp();
    let em = (-b * (u.abs() + PI)).exp();
    let rc = (ep + em) / den;
    let rs = u.signum() * (ep - em) / den;
    let coth = (1.0 + (-2.0 * PI * b).exp()) / den;
    (rc, rs, coth)
}

/// Unit-torus values at `z` (d = 2) from the Fourier series.
/// Fails when both coordinates of `z` are within 1e-3 of a lattice line.
pub fn fourier_2d(z: &Point) -> Result<FourierValues> {
    let fx = z[0] - z[0].floor();
    let fy = z[1] - z[1].floor();
    let dx = fx.min(1.0 - fx);
    let dy = fy.min(1.0 - fy);
    if dx.max(dy) < 1e-3 {
        return Err(Error::Parameter(format!("point {z:?} too close to the lattice lines")));
    }
    if dx < dy {
        // sum the other index in closed form
        let v = fourier_2d_inner(fy, fx, dy);
        let mut g = v.g;
        g.swap((0, 0), (1, 1));
        let p = Point::new(v.p[1], v.p[0], 0.0);
        return Ok(FourierValues { g, p, lap: v.lap });
    }
    Ok(fourier_2d_inner(fx, fy, dx))
}

fn fourier_2d_inner(fx: f64, fy: f64, dist: f64) -> FourierValues {
    let theta = 2.0 * PI * fx;
    let u = PI - theta;
    // b = 0 row
    let mut s1 = 2.0 * (PI * PI / 6.0 - PI * theta / 2.0 + theta * theta / 4.0);
    let mut t11 = s1;
    let mut t12 = 0.0;
    let mut t22 = 0.0;
    let mut p1 = PI - theta;
    let mut p2 = 0.0;
    let bmax = (40.0 / (2.0 * PI * dist)).ceil() as i64 + 2;
    for bi in 1..=bmax {
        let b = bi as f64;
        let (rc, rs, coth) = ratios(b, u);
        let f1 = PI * rc / b;
        let h1 = PI * rs;
        let f2 = -(PI / (2.0 * b)) * (u * rs / b - rc / (b * b) - PI * rc * coth / b);
        let h2 = -(PI / (2.0 * b)) * (u * rc - PI * rs * coth);
        // b and -b together
        let (sp, cp) = (2.0 * PI * b * fy).sin_cos();
        s1 += 2.0 * f1 * cp;
        t11 += 2.0 * (f1 - b * b * f2) * cp;
        t22 += 2.0 * b * b * f2 * cp;
        t12 += -2.0 * b * h2 * sp;
        p1 += 2.0 * h1 * cp;
        p2 += 2.0 * b * f1 * sp;
    }
    let c = 1.0 / (4.0 * PI * PI);
    let mut g = Mat::zeros();
    g[(0, 0)] = -c * (s1 - t11);
    g[(1, 1)] = -c * (s1 - t22);
    g[(0, 1)] = c * t12;
    g[(1, 0)] = c * t12;
    FourierValues {
        g,
        p: Point::new(-p1 / (2.0 * PI), -p2 / (2.0 * PI), 0.0),
        lap: -c * s1,
    }
}

/// Symmetric square partial sum of the planar Fourier series, `|m_i| ≤ m`.
pub fn fourier_2d_partial(z: &Point, m: i64) -> FourierValues {
    let mut g = Mat::zeros();
    let mut p = Point::zeros();
    let mut lap = 0.0;
    for a in -m..=m {
        for b in -m..=m {
            if a == 0 && b == 0 {
                continue;
            }
            let xi = [2.0 * PI * a as f64, 2.0 * PI * b as f64];
            let k2 = xi[0] * xi[0] + xi[1] * xi[1];
            let (s, c) = (xi[0] * z[0] + xi[1] * z[1]).sin_cos();
            lap -= c / k2;
            for i in 0..2 {
                p[i] -= xi[i] * s / k2;
                for j in 0..2 {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    g[(i, j)] -= (delta - xi[i] * xi[j] / k2) * c / k2;
                }
            }
        }
    }
    FourierValues { g, p, lap }
}

/// Periodic Laplace Green function with the plain Gaussian split
/// `1 = e^{-s} + (1 - e^{-s})`.
#[derive(Clone, Debug)]
pub struct LaplaceGaussEwald {
    dim: usize,
    alpha: f64,
    nreal: i32,
    nrec: i32,
}

impl LaplaceGaussEwald {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            alpha: 2.5,
            nreal: 3,
            nrec: 7,
        }
    }

    pub fn eval(&self, z: &Point) -> f64 {
        let d = self.dim;
        let a = self.alpha;
        let zr = if d == 3 { 1 } else { 0 };
        let mut w = *z;
        for i in 0..d {
            w[i] -= w[i].round();
        }
        if d == 2 {
            w[2] = 0.0;
        }
        let mut real = 0.0;
        for i in -self.nreal..=self.nreal {
            for j in -self.nreal..=self.nreal {
                for k in -self.nreal * zr..=self.nreal * zr {
                    let r = (w + Point::new(i as f64, j as f64, k as f64)).norm();
                    real += if d == 3 {
                        -erfc(a * r) / (4.0 * PI * r)
                    } else {
                        -e1(a * a * r * r) / (4.0 * PI)
                    };
                }
            }
        }
        let mut rec = 0.0;
        for i in -self.nrec..=self.nrec {
            for j in -self.nrec..=self.nrec {
                for k in -self.nrec * zr..=self.nrec * zr {
                    if i == 0 && j == 0 && k == 0 {
                        continue;
                    }
                    let xi = Point::new(i as f64, j as f64, k as f64) * (2.0 * PI);
                    let k2 = xi.norm_squared();
                    rec -= (-k2 / (4.0 * a * a)).exp() * xi.dot(&w).cos() / k2;
                }
            }
        }
        real + rec + 1.0 / (4.0 * a * a)
    }
}
