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


//! Quadrature on sphere-parameterised surfaces.
//!
//! Each target gets a polar grid centred on itself; the density is carried to
//! the grid by hyperinterpolation on the Gauss-Legendre x trapezoid mesh. The
//! factor sin θ' cancels the 1/r singularity and the symmetric φ' rule removes
//! the odd leading part of the Cauchy term. Targets on one latitude share the
//! interpolation matrix up to a cyclic shift of source columns.

use super::{LayerOperators, OpSet};
use crate::geometry::{BoundaryMesh, MeshLayout, Point};
use crate::kernels::{self, Mat};
use crate::quad::{sh_reproducing_kernel, GaussRule};
use nalgebra::{DMatrix, Matrix3};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Target-centred polar grid: Gauss-Legendre in θ', trapezoid in φ'.
#[derive(Clone, Copy, Debug)]
pub struct PolarRule {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl PolarRule {
    pub fn for_mesh(mesh: &BoundaryMesh) -> Self {
        match mesh.layout {
            MeshLayout::Sphere { n_theta, n_phi, .. } => Self {
                n_theta: n_theta + 8,
                n_phi: n_phi.max(2 * n_theta),
            },
            _ => panic!("polar rule needs a sphere mesh"),
        }
    }
}

fn rot_z(phi: f64) -> Matrix3<f64> {
    let (s, c) = phi.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

fn rot_y(theta: f64) -> Matrix3<f64> {
    let (s, c) = theta.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

struct Layout<'a> {
    nt: usize,
    np: usize,
    dirs: &'a [Point],
    omega: &'a [f64],
}

fn layout(mesh: &BoundaryMesh) -> Layout<'_> {
    match &mesh.layout {
        MeshLayout::Sphere {
            n_theta,
            n_phi,
            dirs,
            omega,
            ..
        } => Layout {
            nt: *n_theta,
            np: *n_phi,
            dirs,
            omega,
        },
        _ => panic!("sphere layout expected"),
    }
}

/// Polar nodes (unit vectors around the north pole) and weights including sin θ'.
fn polar_nodes(rule: &PolarRule) -> (Vec<Point>, Vec<f64>) {
    let gl = GaussRule::new(rule.n_theta);
    let hp = 2.0 * PI / rule.n_phi as f64;
    let mut pts = Vec::with_capacity(rule.n_theta * rule.n_phi);
    let mut w = Vec::with_capacity(rule.n_theta * rule.n_phi);
    for (th, wt) in gl.on(0.0, PI) {
        let (st, ct) = th.sin_cos();
        for b in 0..rule.n_phi {
            let ph = hp * b as f64;
            pts.push(Point::new(st * ph.cos(), st * ph.sin(), ct));
            w.push(wt * st * hp);
        }
    }
    (pts, w)
}

/// Interpolation matrix L[(q, j)] = ω_j Σ_l (2l+1)/(4π) P_l(q · p_j).
fn interp_matrix(qs: &[Point], lay: &Layout, lmax: usize) -> DMatrix<f64> {
    let n = lay.dirs.len();
    let rows: Vec<Vec<f64>> = qs
        .par_iter()
        .map(|q| {
            (0..n)
                .map(|j| lay.omega[j] * sh_reproducing_kernel(lmax, q.dot(&lay.dirs[j])))
                .collect()
        })
        .collect();
    DMatrix::from_fn(qs.len(), n, |a, j| rows[a][j])
}

/// Number of kernel rows per target for the requested operators.
fn row_layout(set: &OpSet) -> (Vec<(usize, usize)>, usize) {
    // (offset, width) for S, K, K*, S_lap, K_lap
    let widths = [
        if set.s { 9 } else { 0 },
        if set.k { 9 } else { 0 },
        if set.kstar { 9 } else { 0 },
        usize::from(set.s_lap),
        usize::from(set.k_lap),
    ];
    let mut off = 0;
    let mut out = Vec::new();
    for w in widths {
        out.push((off, w));
        off += w;
    }
    (out, off)
}

/// Assembles operators on a 3D mesh.
pub fn assemble(mesh: &BoundaryMesh, set: OpSet, rule: &PolarRule) -> LayerOperators {
    let lay = layout(mesh);
    let (nt, np) = (lay.nt, lay.np);
    let n = mesh.len();
    let lmax = nt - 1;
    let shape = &mesh.shape;
    let (base, pw) = polar_nodes(rule);
    let nq = base.len();
    let (slots, nrows) = row_layout(&set);
    let q4 = 1.0 / (4.0 * PI);

    let mut s = set.s.then(|| DMatrix::zeros(3 * n, 3 * n));
    let mut k = set.k.then(|| DMatrix::zeros(3 * n, 3 * n));
    let mut ks = set.kstar.then(|| DMatrix::zeros(3 * n, 3 * n));
    let mut sl = set.s_lap.then(|| DMatrix::zeros(n, n));
    let mut kl = set.k_lap.then(|| DMatrix::zeros(n, n));

    for it in 0..nt {
        let z = lay.dirs[it * np].z.clamp(-1.0, 1.0);
        let r0 = rot_y(z.acos());
        let qs: Vec<Point> = base.iter().map(|p| r0 * p).collect();
        let lrow = interp_matrix(&qs, &lay, lmax);
        // kernel rows for every target on this latitude
        let blocks: Vec<Vec<f64>> = (0..np)
            .into_par_iter()
            .map(|ip| {
                let i = it * np + ip;
                let x = mesh.nodes[i];
                let nx = mesh.normals[i];
                let rz = rot_z(2.0 * PI * ip as f64 / np as f64);
                let mut b = vec![0.0; nrows * nq];
                for a in 0..nq {
                    let q = rz * qs[a];
                    let sp = shape.surface(&q);
                    let w = pw[a] * sp.jacobian;
                    let y = sp.x;
                    let col = &mut b[a * nrows..(a + 1) * nrows];
                    let mut put = |slot: usize, m: &Mat| {
                        let (off, width) = slots[slot];
                        if width == 9 {
                            for r in 0..3 {
                                for c in 0..3 {
                                    col[off + 3 * r + c] = m[(r, c)] * w;
                                }
                            }
                        }
                    };
                    if set.s {
                        put(0, &kernels::stokeslet_raw(3, &(x - y)));
                    }
                    if set.k {
                        put(1, &kernels::dlp_kernel(3, &x, &y, &sp.normal).total());
                    }
                    if set.kstar {
                        put(2, &kernels::adjoint_kernel(3, &x, &y, &nx).total());
                    }
                    let zv = x - y;
                    let r = zv.norm();
                    if set.s_lap {
                        col[slots[3].0] = q4 / r * w;
                    }
                    if set.k_lap {
                        col[slots[4].0] = q4 * sp.normal.dot(&zv) / (r * r * r) * w;
                    }
                }
                b
            })
            .collect();
        let mut bmat = DMatrix::zeros(np * nrows, nq);
        for (ip, b) in blocks.iter().enumerate() {
            for a in 0..nq {
                for r in 0..nrows {
                    bmat[(ip * nrows + r, a)] = b[a * nrows + r];
                }
            }
        }
        let prod = bmat * &lrow;
        for ip in 0..np {
            let i = it * np + ip;
            for jt in 0..nt {
                for jp in 0..np {
                    let src = jt * np + jp;
                    let j = jt * np + (jp + ip) % np;
                    let v = |r: usize| prod[(ip * nrows + r, src)];
                    for (slot, m) in [(0, s.as_mut()), (1, k.as_mut()), (2, ks.as_mut())] {
                        if let Some(m) = m {
                            let off = slots[slot].0;
                            for r in 0..3 {
                                for c in 0..3 {
                                    m[(3 * i + r, 3 * j + c)] = v(off + 3 * r + c);
                                }
                            }
                        }
                    }
                    if let Some(m) = sl.as_mut() {
                        m[(i, j)] = v(slots[3].0);
                    }
                    if let Some(m) = kl.as_mut() {
                        m[(i, j)] = v(slots[4].0);
                    }
                }
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
