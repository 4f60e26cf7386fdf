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


//! Off-surface evaluation of S, D, Q, P and ∇S, by plain quadrature or by
//! refined quadrature around the nearest boundary point.

use crate::geometry::{BoundaryMesh, MeshLayout, Point};
use crate::kernels::{self, Mat};
use crate::quad::{GaussRule, SphHarm, TrigInterp};
use nalgebra::{DVector, Matrix3};
use std::f64::consts::PI;

/// Layer potential fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    /// Single-layer velocity.
    S,
    /// Double-layer velocity.
    D,
    /// Single-layer pressure.
    Q,
    /// Double-layer pressure.
    P,
    /// Gradient of the single-layer velocity, `g[(i, j)] = ∂_j S^i`.
    GradS,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FieldValue {
    Vector(Point),
    Scalar(f64),
    Tensor(Mat),
}

impl FieldValue {
    pub fn vector(&self) -> Point {
        match self {
            FieldValue::Vector(v) => *v,
            _ => panic!("not a vector field"),
        }
    }

    pub fn scalar(&self) -> f64 {
        match self {
            FieldValue::Scalar(v) => *v,
            _ => panic!("not a scalar field"),
        }
    }

    pub fn tensor(&self) -> Mat {
        match self {
            FieldValue::Tensor(v) => *v,
            _ => panic!("not a tensor field"),
        }
    }
}

/// Quadrature nodes on ∂T with density values.
#[derive(Clone, Debug, Default)]
pub struct SourceSamples {
    pub y: Vec<Point>,
    pub n: Vec<Point>,
    pub w: Vec<f64>,
    pub phi: Vec<Point>,
}

impl SourceSamples {
    /// Mesh nodes with nodal density values.
    pub fn from_mesh(mesh: &BoundaryMesh, values: &DVector<f64>) -> Self {
        let d = mesh.dim;
        let phi = (0..mesh.len())
            .map(|i| {
                let mut p = Point::zeros();
                for j in 0..d {
                    p[j] = values[i * d + j];
                }
                p
            })
            .collect();
        Self {
            y: mesh.nodes.clone(),
            n: mesh.normals.clone(),
            w: mesh.weights.clone(),
            phi,
        }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// Evaluates a field at `x` from source samples.
pub fn field_from_samples(dim: usize, kind: FieldKind, x: &Point, s: &SourceSamples) -> FieldValue {
    match kind {
        FieldKind::S => {
            let mut v = Point::zeros();
            for i in 0..s.len() {
                v += kernels::stokeslet_raw(dim, &(x - s.y[i])) * s.phi[i] * s.w[i];
            }
            FieldValue::Vector(v)
        }
        FieldKind::D => {
            let mut v = Point::zeros();
            for i in 0..s.len() {
                v += kernels::dlp_kernel(dim, x, &s.y[i], &s.n[i]).total() * s.phi[i] * s.w[i];
            }
            FieldValue::Vector(v)
        }
        FieldKind::Q => {
            let mut v = 0.0;
            for i in 0..s.len() {
                v += kernels::pressurelet_raw(dim, &(x - s.y[i])).dot(&s.phi[i]) * s.w[i];
            }
            FieldValue::Scalar(v)
        }
        FieldKind::P => {
            // -N^l (∂_l θ_k)(x - y) φ^k
            let mut v = 0.0;
            for i in 0..s.len() {
                let gp = kernels::grad_pressurelet(dim, &(x - s.y[i]));
                v -= (gp * s.n[i]).dot(&s.phi[i]) * s.w[i];
            }
            FieldValue::Scalar(v)
        }
        FieldKind::GradS => {
            let mut g = Matrix3::zeros();
            for i in 0..s.len() {
                let gr = kernels::grad_stokeslet(dim, &(x - s.y[i]));
                for (j, grj) in gr.iter().enumerate().take(dim) {
                    let col = grj * s.phi[i] * s.w[i];
                    for a in 0..dim {
                        g[(a, j)] += col[a];
                    }
                }
            }
            FieldValue::Tensor(g)
        }
    }
}

/// Plain mesh quadrature; accurate away from ∂T only.
pub fn eval_offsurface(
    kind: FieldKind,
    mesh: &BoundaryMesh,
    values: &DVector<f64>,
    points: &[Point],
) -> Vec<FieldValue> {
    let s = SourceSamples::from_mesh(mesh, values);
    points
        .iter()
        .map(|x| field_from_samples(mesh.dim, kind, x, &s))
        .collect()
}

/// Indices of points within 1e-12 of a mesh node.
pub fn near_singular_points(mesh: &BoundaryMesh, points: &[Point]) -> Vec<usize> {
    points
        .iter()
        .enumerate()
        .filter(|(_, x)| mesh.nodes.iter().any(|y| (*x - y).norm() < 1e-12))
        .map(|(i, _)| i)
        .collect()
}

/// Continuous interpolant of a nodal density: trigonometric in 2D,
/// spherical harmonics in 3D.
#[derive(Clone, Debug)]
pub enum DensityInterp {
    Curve(Vec<TrigInterp>),
    Sphere {
        sh: SphHarm,
        /// `coeffs[c][idx]` for component c.
        coeffs: Vec<Vec<f64>>,
    },
}

impl DensityInterp {
    /// `ncomp` components per node, node-major.
    pub fn new(mesh: &BoundaryMesh, values: &DVector<f64>, ncomp: usize) -> Self {
        let n = mesh.len();
        match &mesh.layout {
            MeshLayout::Curve { .. } => DensityInterp::Curve(
                (0..ncomp)
                    .map(|c| {
                        let v: Vec<f64> = (0..n).map(|i| values[i * ncomp + c]).collect();
                        TrigInterp::new(&v)
                    })
                    .collect(),
            ),
            MeshLayout::Sphere {
                n_theta, dirs, omega, ..
            } => {
                let sh = SphHarm::new(n_theta - 1);
                let mut coeffs = vec![vec![0.0; sh.size()]; ncomp];
                let mut y = vec![0.0; sh.size()];
                for i in 0..n {
                    sh.eval([dirs[i].x, dirs[i].y, dirs[i].z], &mut y);
                    for (c, cc) in coeffs.iter_mut().enumerate() {
                        let f = values[i * ncomp + c] * omega[i];
                        for (a, b) in cc.iter_mut().zip(&y) {
                            *a += f * b;
                        }
                    }
                }
                DensityInterp::Sphere { sh, coeffs }
            }
        }
    }

    pub fn ncomp(&self) -> usize {
        match self {
            DensityInterp::Curve(v) => v.len(),
            DensityInterp::Sphere { coeffs, .. } => coeffs.len(),
        }
    }

    /// Value at curve parameter t.
    pub fn at_param(&self, t: f64) -> Point {
        let DensityInterp::Curve(v) = self else {
            panic!("curve interpolant expected")
        };
        let mut p = Point::zeros();
        for (c, f) in v.iter().enumerate() {
            p[c] = f.eval(t);
        }
        p
    }

    /// Value at unit direction q, using `buf` of size `sh.size()` as scratch.
    pub fn at_direction(&self, q: &Point, buf: &mut Vec<f64>) -> Point {
        let DensityInterp::Sphere { sh, coeffs } = self else {
            panic!("sphere interpolant expected")
        };
        buf.resize(sh.size(), 0.0);
        sh.eval([q.x, q.y, q.z], buf);
        let mut p = Point::zeros();
        for (c, cc) in coeffs.iter().enumerate() {
            p[c] = cc.iter().zip(buf.iter()).map(|(a, b)| a * b).sum();
        }
        p
    }
}

/// Geometric panels from `h0` doubling up to `hmax`, then uniform panels to `len`.
pub(crate) fn graded_capped(rule: &GaussRule, len: f64, h0: f64, hmax: f64) -> Vec<(f64, f64)> {
    let hmax = hmax.min(len);
    let mut edges = vec![0.0];
    let mut h = h0.clamp(1e-14, hmax);
    let mut e = 0.0;
    while e < len {
        let next = (e + h).min(len);
        // avoid a sliver at the end
        let next = if len - next < 0.25 * h { len } else { next };
        edges.push(next);
        e = next;
        h = (2.0 * h).min(hmax);
    }
    let mut out = Vec::with_capacity((edges.len() - 1) * rule.len());
    for w in edges.windows(2) {
        out.extend(rule.on(w[0], w[1]));
    }
    out
}

/// Orthonormal frame with third column `p`.
pub(crate) fn frame(p: &Point) -> Matrix3<f64> {
    let a = if p.x.abs() < 0.9 {
        Point::new(1.0, 0.0, 0.0)
    } else {
        Point::new(0.0, 1.0, 0.0)
    };
    let e1 = (a - p * p.dot(&a)).normalize();
    let e2 = p.cross(&e1);
    Matrix3::from_columns(&[e1, e2, *p])
}

/// Refined quadrature nodes around the boundary point nearest to `x`.
pub fn near_samples(mesh: &BoundaryMesh, interp: &DensityInterp, x: &Point) -> SourceSamples {
    let shape = &mesh.shape;
    let mut out = SourceSamples::default();
    match &mesh.layout {
        MeshLayout::Curve { .. } => {
            let n = mesh.len();
            let ts = shape.nearest_parameter(x);
            let c = shape.curve(ts);
            let dist = (x - c.x).norm();
            let rule = GaussRule::new(16);
            let h0 = (0.5 * dist / c.speed()).max(1e-12);
            let hmax = (8.0 * 2.0 * PI / n as f64).min(0.5);
            for side in [1.0, -1.0] {
                for (s, w) in graded_capped(&rule, PI, h0, hmax) {
                    let t = ts + side * s;
                    let cp = shape.curve(t);
                    out.y.push(cp.x);
                    out.n.push(cp.normal());
                    out.w.push(w * cp.speed());
                    out.phi.push(interp.at_param(t));
                }
            }
        }
        MeshLayout::Sphere { n_theta, .. } => {
            let p = shape.nearest_direction(x);
            let s0 = shape.surface(&p);
            let dist = (x - s0.x).norm();
            let scale = s0.jacobian.sqrt();
            let rule = GaussRule::new(12);
            let h0 = (0.5 * dist / scale).max(1e-12);
            let hmax = (4.0 * PI / *n_theta as f64).min(0.5);
            let nphi = 2 * n_theta + 8;
            let r = frame(&p);
            let hphi = 2.0 * PI / nphi as f64;
            let mut buf = Vec::new();
            for (th, wt) in graded_capped(&rule, PI, h0, hmax) {
                let (st, ct) = th.sin_cos();
                for j in 0..nphi {
                    let ph = hphi * (j as f64 + 0.5);
                    let q = r * Point::new(st * ph.cos(), st * ph.sin(), ct);
                    let sp = shape.surface(&q);
                    out.y.push(sp.x);
                    out.n.push(sp.normal);
                    out.w.push(wt * st * hphi * sp.jacobian);
                    out.phi.push(interp.at_direction(&q, &mut buf));
                }
            }
        }
    }
    out
}

/// Accurate evaluation near or on ∂T (on ∂T only for weakly singular fields).
pub fn eval_near(kind: FieldKind, mesh: &BoundaryMesh, interp: &DensityInterp, x: &Point) -> FieldValue {
    let s = near_samples(mesh, interp, x);
    field_from_samples(mesh.dim, kind, x, &s)
}
