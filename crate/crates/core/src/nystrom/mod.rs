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


//! Dense Nyström discretisations of the layer potentials on ∂T.

mod jumps;
mod near;
pub mod planar;
pub mod sphere;
mod solve;

pub use jumps::{extrapolate, verify_jumps, JumpReport, RICHARDSON_STEPS, RICHARDSON_STEPS_EXTENDED};
pub use near::{
    eval_near, eval_offsurface, field_from_samples, near_samples, near_singular_points, DensityInterp,
    FieldKind, FieldValue, SourceSamples,
};
pub use solve::{condition_estimate, solve_dense, solve_system, Solution, COND_LIMIT};

use crate::geometry::{BoundaryMesh, Point};
use nalgebra::{DMatrix, DVector};
use std::fmt;

/// Operator label carried by assembled matrices and solver errors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorTag {
    S,
    K,
    KStar,
    KEta,
    REta,
    SLaplace,
    KLaplace,
    Bordered,
    Other,
}

impl fmt::Display for OperatorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            OperatorTag::S => "S",
            OperatorTag::K => "K",
            OperatorTag::KStar => "K*",
            OperatorTag::KEta => "K^eta",
            OperatorTag::REta => "R^eta",
            OperatorTag::SLaplace => "S_Laplace",
            OperatorTag::KLaplace => "K_Laplace",
            OperatorTag::Bordered => "bordered",
            OperatorTag::Other => "matrix",
        };
        f.write_str(s)
    }
}

/// Vector density on ∂T, node-major: entry `i * dim + j` is φ^j(x_i).
#[derive(Clone, Debug, PartialEq)]
pub struct Density {
    pub dim: usize,
    pub values: DVector<f64>,
}

impl Density {
    pub fn zeros(mesh: &BoundaryMesh) -> Self {
        Self {
            dim: mesh.dim,
            values: DVector::zeros(mesh.n_dof()),
        }
    }

    pub fn from_vector(dim: usize, values: DVector<f64>) -> Self {
        Self { dim, values }
    }

    pub fn from_fn(mesh: &BoundaryMesh, f: impl Fn(usize, &Point) -> Point) -> Self {
        let d = mesh.dim;
        let mut v = DVector::zeros(mesh.n_dof());
        for (i, x) in mesh.nodes.iter().enumerate() {
            let p = f(i, x);
            for j in 0..d {
                v[i * d + j] = p[j];
            }
        }
        Self { dim: d, values: v }
    }

    /// The constant density with value `e`.
    pub fn constant(mesh: &BoundaryMesh, e: &Point) -> Self {
        Self::from_fn(mesh, |_, _| *e)
    }

    /// Unit vector e_k as a constant density.
    pub fn unit(mesh: &BoundaryMesh, k: usize) -> Self {
        let mut e = Point::zeros();
        e[k] = 1.0;
        Self::constant(mesh, &e)
    }

    pub fn n_nodes(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn at(&self, i: usize) -> Point {
        let mut p = Point::zeros();
        for j in 0..self.dim {
            p[j] = self.values[i * self.dim + j];
        }
        p
    }

    /// ∫_{∂T} φ.
    pub fn integral(&self, mesh: &BoundaryMesh) -> Point {
        (0..mesh.len()).fold(Point::zeros(), |acc, i| acc + self.at(i) * mesh.weights[i])
    }

    /// Average over ∂T.
    pub fn mean(&self, mesh: &BoundaryMesh) -> Point {
        self.integral(mesh) / mesh.measure()
    }

    /// Weighted inner product Σ w_i φ_i · ψ_i.
    pub fn inner(&self, other: &Density, mesh: &BoundaryMesh) -> f64 {
        weighted_inner(mesh, &self.values, &other.values)
    }

    pub fn l2_norm(&self, mesh: &BoundaryMesh) -> f64 {
        self.inner(self, mesh).sqrt()
    }
}

/// Σ_i w_i a_i · b_i for node-major vectors.
pub fn weighted_inner(mesh: &BoundaryMesh, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let d = mesh.dim;
    let mut s = 0.0;
    for i in 0..mesh.len() {
        let mut t = 0.0;
        for j in 0..d {
            t += a[i * d + j] * b[i * d + j];
        }
        s += mesh.weights[i] * t;
    }
    s
}

/// Weighted L² norm of a node-major vector.
pub fn weighted_norm(mesh: &BoundaryMesh, a: &DVector<f64>) -> f64 {
    weighted_inner(mesh, a, a).sqrt()
}

/// Dense operator on densities.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub tag: OperatorTag,
    pub dim: usize,
    pub mat: DMatrix<f64>,
}

impl OperatorMatrix {
    pub fn new(tag: OperatorTag, dim: usize, mat: DMatrix<f64>) -> Self {
        Self { tag, dim, mat }
    }

    pub fn apply(&self, phi: &Density) -> Density {
        Density::from_vector(self.dim, &self.mat * &phi.values)
    }

    /// c I + self.
    pub fn shifted(&self, c: f64) -> OperatorMatrix {
        let mut m = self.mat.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += c;
        }
        Self::new(self.tag, self.dim, m)
    }
}

/// Which operators to assemble.
#[derive(Clone, Copy, Debug, Default)]
pub struct OpSet {
    pub s: bool,
    pub k: bool,
    pub kstar: bool,
    pub s_lap: bool,
    pub k_lap: bool,
}

impl OpSet {
    pub const ALL: OpSet = OpSet {
        s: true,
        k: true,
        kstar: true,
        s_lap: true,
        k_lap: true,
    };
}

/// Assembled operators; Laplace ones act on scalar densities.
#[derive(Clone, Debug, Default)]
pub struct LayerOperators {
    pub s: Option<DMatrix<f64>>,
    pub k: Option<DMatrix<f64>>,
    pub kstar: Option<DMatrix<f64>>,
    pub s_lap: Option<DMatrix<f64>>,
    pub k_lap: Option<DMatrix<f64>>,
}

/// Assembles the requested on-surface operators.
pub fn assemble(mesh: &BoundaryMesh, set: OpSet) -> LayerOperators {
    if mesh.dim == 2 {
        planar::assemble(mesh, set)
    } else {
        sphere::assemble(mesh, set, &sphere::PolarRule::for_mesh(mesh))
    }
}

/// Single-layer operator S_T restricted to ∂T.
pub fn assemble_slp(mesh: &BoundaryMesh) -> OperatorMatrix {
    let ops = assemble(
        mesh,
        OpSet {
            s: true,
            ..Default::default()
        },
    );
    OperatorMatrix::new(OperatorTag::S, mesh.dim, ops.s.unwrap())
}

/// Neumann-Poincaré operator K_T and its adjoint K*_T, assembled independently.
pub fn assemble_np(mesh: &BoundaryMesh) -> (OperatorMatrix, OperatorMatrix) {
    let ops = assemble(
        mesh,
        OpSet {
            k: true,
            kstar: true,
            ..Default::default()
        },
    );
    (
        OperatorMatrix::new(OperatorTag::K, mesh.dim, ops.k.unwrap()),
        OperatorMatrix::new(OperatorTag::KStar, mesh.dim, ops.kstar.unwrap()),
    )
}

#[inline]
pub(crate) fn add_block(m: &mut DMatrix<f64>, d: usize, i: usize, l: usize, b: &crate::kernels::Mat) {
    for a in 0..d {
        for c in 0..d {
            m[(i * d + a, l * d + c)] += b[(a, c)];
        }
    }
}
