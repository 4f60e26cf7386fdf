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


//! Periodic Stokes fundamental solutions on the torus `η⁻¹𝕋^d` and the
//! periodic layer operators built from them.
//!
//! Kernels split as free-space part plus smooth remainder. The free parts reuse
//! the singular quadratures of [`crate::nystrom`]; the remainders use the plain
//! mesh rule.

mod ewald;
mod multi;
mod oracle;

pub use ewald::{GreenValues, PeriodicGreen, DEFAULT_TOL};
pub use multi::{LayerSources, RemainderFields, RemainderSum, MULTI_ALPHA};
pub use oracle::{fourier_2d, fourier_2d_partial, FourierValues, LaplaceGaussEwald};

use crate::error::{Error, Result};
use crate::geometry::{BoundaryMesh, Point};
use crate::kernels::Mat;
use crate::nystrom::{self, DensityInterp, FieldKind, FieldValue, OpSet, OperatorMatrix, OperatorTag, SourceSamples};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

/// Green functions of the torus of side `1/η`.
#[derive(Clone, Debug)]
pub struct TorusGreen {
    pub green: PeriodicGreen,
    pub eta: f64,
}

impl TorusGreen {
    pub fn new(dim: usize, eta: f64) -> Result<Self> {
        Self::with_green(PeriodicGreen::new(dim)?, eta)
    }

    pub fn with_green(green: PeriodicGreen, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::Parameter(format!("eta = {eta} outside (0, 1]")));
        }
        Ok(Self { green, eta })
    }

    pub fn dim(&self) -> usize {
        self.green.dim()
    }

    /// Side length of the torus.
    pub fn period(&self) -> f64 {
        1.0 / self.eta
    }

    /// Representative of `x` in the cell centred at the origin.
    pub fn wrap(&self, x: &Point) -> Point {
        let l = self.period();
        let mut w = *x;
        for a in 0..self.dim() {
            w[a] -= l * (w[a] / l).round();
        }
        w
    }

    /// `(G^η, P^η, ∇G^η, ∇P^η, G^η_Δ)` at `x`.
    pub fn eval(&self, x: &Point) -> Result<GreenValues> {
        self.green.eval_scaled(self.eta, x)
    }

    /// The same quantities minus the free-space fundamental solutions at `x`.
    pub fn remainder(&self, x: &Point) -> GreenValues {
        self.green.remainder_scaled(self.eta, x)
    }
}

/// Double-layer kernel in action form, `m[(k, j)] = -P_k N^j + N^l ∂_l G_jk`,
/// built from Green values at `y - x`.
pub fn dlp_from_values(dim: usize, v: &GreenValues, ny: &Point) -> Mat {
    let mut m = Mat::zeros();
    for k in 0..dim {
        for j in 0..dim {
            let mut s = -v.p[k] * ny[j];
            for l in 0..dim {
                s += ny[l] * v.grad_g[l][(j, k)];
            }
            m[(k, j)] = s;
        }
    }
    m
}

fn assemble_blocks(mesh: &BoundaryMesh, block: impl Fn(usize, usize) -> Mat + Sync) -> DMatrix<f64> {
    let d = mesh.dim;
    let n = mesh.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0.0; d * d * n];
            for j in 0..n {
                let b = block(i, j) * mesh.weights[j];
                for a in 0..d {
                    for c in 0..d {
                        row[a * d * n + j * d + c] = b[(a, c)];
                    }
                }
            }
            row
        })
        .collect();
    let mut m = DMatrix::zeros(d * n, d * n);
    for (i, row) in rows.iter().enumerate() {
        for a in 0..d {
            for col in 0..d * n {
                m[(i * d + a, col)] = row[a * d * n + col];
            }
        }
    }
    m
}

/// Scaled remainders `G^η - Γ` and friends at `x_i - x_j` for all node pairs.
///
/// Only `i ≤ j` is computed; the other half follows from parity.
pub struct PairRemainders {
    n: usize,
    vals: Vec<GreenValues>,
}

fn flip(mut v: GreenValues) -> GreenValues {
    v.p = -v.p;
    for gl in v.grad_g.iter_mut() {
        *gl = -*gl;
    }
    v
}

impl PairRemainders {
    pub fn new(mesh: &BoundaryMesh, torus: &TorusGreen) -> Self {
        let n = mesh.len();
        let rows: Vec<Vec<GreenValues>> = (0..n)
            .into_par_iter()
            .map(|i| (i..n).map(|j| torus.remainder(&(mesh.nodes[i] - mesh.nodes[j]))).collect())
            .collect();
        Self {
            n,
            vals: rows.into_iter().flatten().collect(),
        }
    }

    fn index(&self, i: usize, j: usize) -> usize {
        i * self.n - i * (i + 1) / 2 + j
    }

    /// Values at `x_i - x_j`.
    pub fn get(&self, i: usize, j: usize) -> GreenValues {
        if i <= j {
            self.vals[self.index(i, j)]
        } else {
            flip(self.vals[self.index(j, i)])
        }
    }
}

/// The bounded operator `R^η` with `K^η = K + η^{d-1} R^η`.
pub fn assemble_remainder_np(mesh: &BoundaryMesh, torus: &TorusGreen) -> OperatorMatrix {
    remainder_np_from_pairs(mesh, torus, &PairRemainders::new(mesh, torus))
}

/// `R^η` from cached pair values.
pub fn remainder_np_from_pairs(mesh: &BoundaryMesh, torus: &TorusGreen, pairs: &PairRemainders) -> OperatorMatrix {
    let d = mesh.dim;
    let inv = torus.eta.powi(1 - d as i32);
    let mat = assemble_blocks(mesh, |i, j| dlp_from_values(d, &pairs.get(j, i), &mesh.normals[j]) * inv);
    OperatorMatrix::new(OperatorTag::REta, d, mat)
}

/// `K^η` and `R^η` on the mesh.
pub struct PeriodicOperators {
    pub k_eta: OperatorMatrix,
    pub r_eta: OperatorMatrix,
    pub k: OperatorMatrix,
}

pub fn assemble_periodic_np(mesh: &BoundaryMesh, torus: &TorusGreen) -> PeriodicOperators {
    periodic_np_from_pairs(mesh, torus, &PairRemainders::new(mesh, torus))
}

pub fn periodic_np_from_pairs(mesh: &BoundaryMesh, torus: &TorusGreen, pairs: &PairRemainders) -> PeriodicOperators {
    let ops = nystrom::assemble(
        mesh,
        OpSet {
            k: true,
            ..OpSet::default()
        },
    );
    let k = ops.k.expect("K assembled");
    let r = remainder_np_from_pairs(mesh, torus, pairs);
    let scale = torus.eta.powi(mesh.dim as i32 - 1);
    let k_eta = &k + &r.mat * scale;
    PeriodicOperators {
        k_eta: OperatorMatrix::new(OperatorTag::KEta, mesh.dim, k_eta),
        r_eta: r,
        k: OperatorMatrix::new(OperatorTag::K, mesh.dim, k),
    }
}

/// Periodic single layer `S^η` on the mesh.
pub fn assemble_periodic_slp(mesh: &BoundaryMesh, torus: &TorusGreen) -> OperatorMatrix {
    let s = nystrom::assemble_slp(mesh);
    let pairs = PairRemainders::new(mesh, torus);
    let rem = assemble_blocks(mesh, |i, j| pairs.get(i, j).g);
    OperatorMatrix::new(OperatorTag::Other, mesh.dim, s.mat + rem)
}

fn remainder_field(kind: FieldKind, torus: &TorusGreen, x: &Point, s: &SourceSamples) -> FieldValue {
    let d = torus.dim();
    match kind {
        FieldKind::S => {
            let mut v = Point::zeros();
            for i in 0..s.len() {
                v += torus.remainder(&(x - s.y[i])).g * s.phi[i] * s.w[i];
            }
            FieldValue::Vector(v)
        }
        FieldKind::D => {
            let mut v = Point::zeros();
            for i in 0..s.len() {
                let rv = torus.remainder(&(s.y[i] - x));
                v += dlp_from_values(d, &rv, &s.n[i]) * s.phi[i] * s.w[i];
            }
            FieldValue::Vector(v)
        }
        FieldKind::Q => {
            let mut v = 0.0;
            for i in 0..s.len() {
                v += torus.remainder(&(x - s.y[i])).p.dot(&s.phi[i]) * s.w[i];
            }
            FieldValue::Scalar(v)
        }
        FieldKind::P => {
            let mut v = 0.0;
            for i in 0..s.len() {
                let rv = torus.remainder(&(x - s.y[i]));
                v -= (rv.grad_p * s.n[i]).dot(&s.phi[i]) * s.w[i];
            }
            FieldValue::Scalar(v)
        }
        FieldKind::GradS => {
            let mut g = Mat::zeros();
            for i in 0..s.len() {
                let rv = torus.remainder(&(x - s.y[i]));
                for j in 0..d {
                    let col = rv.grad_g[j] * s.phi[i] * s.w[i];
                    for a in 0..d {
                        g[(a, j)] += col[a];
                    }
                }
            }
            FieldValue::Tensor(g)
        }
    }
}

fn add_fields(a: FieldValue, b: FieldValue) -> FieldValue {
    match (a, b) {
        (FieldValue::Vector(x), FieldValue::Vector(y)) => FieldValue::Vector(x + y),
        (FieldValue::Scalar(x), FieldValue::Scalar(y)) => FieldValue::Scalar(x + y),
        (FieldValue::Tensor(x), FieldValue::Tensor(y)) => FieldValue::Tensor(x + y),
        _ => unreachable!("mismatched field kinds"),
    }
}

/// Evaluator of periodic layer potentials for one density.
pub struct PeriodicPotential<'a> {
    mesh: &'a BoundaryMesh,
    torus: &'a TorusGreen,
    samples: SourceSamples,
    interp: DensityInterp,
    near_dist: f64,
}

impl<'a> PeriodicPotential<'a> {
    pub fn new(mesh: &'a BoundaryMesh, torus: &'a TorusGreen, values: &DVector<f64>) -> Self {
        let h = match mesh.dim {
            2 => mesh.measure() / mesh.len() as f64,
            _ => (mesh.measure() / mesh.len() as f64).sqrt(),
        };
        Self {
            mesh,
            torus,
            samples: SourceSamples::from_mesh(mesh, values),
            interp: DensityInterp::new(mesh, values, mesh.dim),
            near_dist: 8.0 * h,
        }
    }

    /// Distance from `x` to the nearest mesh node.
    fn node_distance(&self, x: &Point) -> f64 {
        self.mesh
            .nodes
            .iter()
            .map(|y| (x - y).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Field value at `x` (off ∂T modulo the lattice).
    pub fn eval(&self, kind: FieldKind, x: &Point) -> FieldValue {
        let x = self.torus.wrap(x);
        let d = self.mesh.dim;
        let free = if self.node_distance(&x) < self.near_dist {
            nystrom::eval_near(kind, self.mesh, &self.interp, &x)
        } else {
            nystrom::field_from_samples(d, kind, &x, &self.samples)
        };
        add_fields(free, remainder_field(kind, self.torus, &x, &self.samples))
    }

    /// Remainder contribution only, by plain quadrature.
    pub fn eval_remainder(&self, kind: FieldKind, x: &Point) -> FieldValue {
        remainder_field(kind, self.torus, &self.torus.wrap(x), &self.samples)
    }
}

/// Periodic potentials of `values` at `points`.
pub fn eval_periodic_potentials(
    kind: FieldKind,
    mesh: &BoundaryMesh,
    torus: &TorusGreen,
    values: &DVector<f64>,
    points: &[Point],
) -> Vec<FieldValue> {
    let pot = PeriodicPotential::new(mesh, torus, values);
    points.par_iter().map(|x| pot.eval(kind, x)).collect()
}

/// One row of the Green function self-test.
#[derive(Clone, Copy, Debug)]
pub struct SelftestRow {
    pub x: Point,
    /// Largest change of (G, P) between splitting parameters α and 2α.
    pub alpha_variation: f64,
    /// Largest deviation from the Fourier oracle (d = 2 only).
    pub fourier_deviation: Option<f64>,
}

fn max_abs_diff(a: &GreenValues, b: &GreenValues) -> f64 {
    let mut m = (a.g - b.g).amax().max((a.p - b.p).amax());
    for l in 0..3 {
        m = m.max((a.grad_g[l] - b.grad_g[l]).amax());
    }
    m.max((a.grad_p - b.grad_p).amax())
}

/// Splitting invariance and, for d = 2, agreement with the Fourier oracle.
pub fn green_selftest(dim: usize, points: &[Point]) -> Result<Vec<SelftestRow>> {
    let g1 = PeriodicGreen::new(dim)?;
    let g2 = PeriodicGreen::with_params(dim, 2.0 * g1.alpha(), DEFAULT_TOL)?;
    points
        .iter()
        .map(|x| {
            let a = g1.eval(x)?;
            let b = g2.eval(x)?;
            let fourier_deviation = if dim == 2 {
                let f = fourier_2d(x)?;
                Some((a.g - f.g).amax().max((a.p - f.p).amax()))
            } else {
                None
            };
            Ok(SelftestRow {
                x: *x,
                alpha_variation: max_abs_diff(&a, &b),
                fourier_deviation,
            })
        })
        .collect()
}
