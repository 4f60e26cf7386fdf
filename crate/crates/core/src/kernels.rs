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


//! Free-space Stokes kernels with unit viscosity.
//!
//! Γ_k^j is stored as a symmetric matrix `g[(j, k)]`; in 2D the third row and
//! column are zero.

use crate::error::{Error, Result};
use crate::geometry::Point;
use nalgebra::Matrix3;
use std::f64::consts::PI;

pub type Mat = Matrix3<f64>;

/// Surface area dϖ_d of the unit sphere.
#[inline]
pub fn sphere_area(d: usize) -> f64 {
    match d {
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => panic!("unsupported dimension {d}"),
    }
}

/// Volume ϖ_d of the unit ball.
#[inline]
pub fn ball_volume(d: usize) -> f64 {
    sphere_area(d) / d as f64
}

#[inline]
fn outer(d: usize, a: &Point, b: &Point) -> Mat {
    let mut m = a * b.transpose();
    if d == 2 {
        m.fixed_view_mut::<1, 3>(2, 0).fill(0.0);
        m.fixed_view_mut::<3, 1>(0, 2).fill(0.0);
    }
    m
}

#[inline]
fn ident(d: usize) -> Mat {
    let mut m = Mat::identity();
    if d == 2 {
        m[(2, 2)] = 0.0;
    }
    m
}

fn nonzero(x: &Point) -> Result<()> {
    if x.norm_squared() == 0.0 {
        Err(Error::Singular)
    } else {
        Ok(())
    }
}

/// Kelvin matrix Γ(x).
pub fn stokeslet(d: usize, x: &Point) -> Result<Mat> {
    nonzero(x)?;
    Ok(stokeslet_raw(d, x))
}

/// Γ(x) without the x = 0 check.
#[inline]
pub fn stokeslet_raw(d: usize, x: &Point) -> Mat {
    let r2 = x.norm_squared();
    if d == 2 {
        let c = 1.0 / (4.0 * PI);
        ident(2) * (0.5 * c * r2.ln()) - outer(2, x, x) * (c / r2)
    } else {
        let r = r2.sqrt();
        let c = -1.0 / (8.0 * PI * r);
        (Mat::identity() + x * x.transpose() / r2) * c
    }
}

/// Pressure vector θ(x) = -x / (dϖ_d |x|^d).
pub fn pressurelet(d: usize, x: &Point) -> Result<Point> {
    nonzero(x)?;
    Ok(pressurelet_raw(d, x))
}

#[inline]
pub fn pressurelet_raw(d: usize, x: &Point) -> Point {
    let r2 = x.norm_squared();
    let rd = if d == 2 { r2 } else { r2 * r2.sqrt() };
    -x / (sphere_area(d) * rd)
}

/// Laplace fundamental solution Γ_Δ with -ΔΓ_Δ = δ.
#[inline]
pub fn laplace_green(d: usize, x: &Point) -> f64 {
    let r = x.norm();
    if d == 2 {
        -r.ln() / (2.0 * PI)
    } else {
        1.0 / (4.0 * PI * r)
    }
}

/// Derivatives ∂_l Γ(x), returned as `[∂_1 Γ, ∂_2 Γ, ∂_3 Γ]`.
pub fn grad_stokeslet(d: usize, x: &Point) -> [Mat; 3] {
    let r2 = x.norm_squared();
    // Γ = A(r) I + D(r) x x^T
    let (a1_over_r, d0, d1_over_r) = if d == 2 {
        let c = 1.0 / (4.0 * PI);
        (c / r2, -c / r2, 2.0 * c / (r2 * r2))
    } else {
        let r = r2.sqrt();
        let c = 1.0 / (8.0 * PI);
        (c / (r2 * r), -c / (r2 * r), 3.0 * c / (r2 * r2 * r))
    };
    let mut out = [Mat::zeros(); 3];
    for (l, gl) in out.iter_mut().enumerate().take(d) {
        for i in 0..d {
            for j in 0..d {
                let mut v = d1_over_r * x[l] * x[i] * x[j];
                if i == j {
                    v += a1_over_r * x[l];
                }
                if i == l {
                    v += d0 * x[j];
                }
                if j == l {
                    v += d0 * x[i];
                }
                gl[(i, j)] = v;
            }
        }
    }
    out
}

/// Derivatives ∂_l θ_k(x) as `m[(k, l)]`.
pub fn grad_pressurelet(d: usize, x: &Point) -> Mat {
    let r2 = x.norm_squared();
    let c = 1.0 / sphere_area(d);
    let rd = if d == 2 { r2 } else { r2 * r2.sqrt() };
    (outer(d, x, x) * (d as f64 / r2) - ident(d)) * (c / rd)
}

/// Double-layer kernel K_jk split into its Cauchy-type and weakly singular parts.
#[derive(Clone, Copy, Debug)]
pub struct KernelParts {
    /// Antisymmetric term, singular of order 1-d.
    pub cauchy: Mat,
    /// Terms carrying ⟨N, x - y⟩.
    pub weak: Mat,
}

impl KernelParts {
    pub fn total(&self) -> Mat {
        self.cauchy + self.weak
    }
}

/// Double-layer kernel with normal N_y in action form: the returned matrix
/// `m` has `m[(k, j)] = K_jk(x, y)`, so (K φ)^k = Σ_j K_jk φ^j.
pub fn dlp_kernel(d: usize, x: &Point, y: &Point, ny: &Point) -> KernelParts {
    let z = x - y;
    let r2 = z.norm_squared();
    let rd = if d == 2 { r2 } else { r2 * r2.sqrt() };
    let s = sphere_area(d);
    let w = ball_volume(d);
    let nz = ny.dot(&z);
    let cauchy = (outer(d, ny, &z) - outer(d, &z, ny)) / (2.0 * s * rd);
    let weak = -outer(d, &z, &z) * (nz / (2.0 * w * rd * r2)) - ident(d) * (nz / (2.0 * s * rd));
    KernelParts { cauchy, weak }
}

/// Adjoint kernel in action form, the transpose of [`dlp_kernel`] with x and y
/// swapped; equals -θ_k(x-y) N_x^i + N_x^j ∂_j Γ_k^i(x-y) at entry (i, k).
pub fn adjoint_kernel(d: usize, x: &Point, y: &Point, nx: &Point) -> KernelParts {
    let p = dlp_kernel(d, y, x, nx);
    KernelParts {
        cauchy: p.cauchy.transpose(),
        weak: p.weak.transpose(),
    }
}

/// Closed form of the action-form difference K* - K; weakly singular on smooth boundaries.
pub fn kdiff_kernel(d: usize, x: &Point, y: &Point, nx: &Point, ny: &Point) -> Mat {
    let z = x - y;
    let r2 = z.norm_squared();
    let rd = if d == 2 { r2 } else { r2 * r2.sqrt() };
    let s = sphere_area(d);
    let w = ball_volume(d);
    let nsum = (nx + ny).dot(&z);
    let dn = nx - ny;
    outer(d, &z, &z) * (nsum / (2.0 * w * rd * r2))
        + ident(d) * (nsum / (2.0 * s * rd))
        + (outer(d, &dn, &z) - outer(d, &z, &dn)) / (2.0 * s * rd)
}

/// Double-layer kernel built from the physical traction -pN + 2D(u)N.
///
/// Reference only; the solvers use [`dlp_kernel`].
pub fn traction_dlp_kernel(d: usize, x: &Point, y: &Point, ny: &Point) -> Mat {
    // y-derivatives of Γ(y - x) are ∂Γ evaluated at y - x
    let z = y - x;
    let gr = grad_stokeslet(d, &z);
    let th = pressurelet_raw(d, &z);
    let mut k = Mat::zeros();
    for j in 0..d {
        for kk in 0..d {
            let mut v = -th[kk] * ny[j];
            for l in 0..d {
                v += ny[l] * (gr[l][(j, kk)] + gr[j][(l, kk)]);
            }
            k[(j, kk)] = v;
        }
    }
    k
}
