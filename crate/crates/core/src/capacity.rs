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


//! Kernel basis of -1/2 + K*, the capacity matrix A_T and the permeability M.

use crate::error::{Error, Result};
use crate::geometry::{build_mesh, BoundaryMesh, MeshSize, Point, ShapeSpec};
use crate::kernels;
use crate::nystrom::{self, Density, OpSet};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;
use std::f64::consts::PI;

/// Relative threshold on |det A_T| below which a 2D capacity matrix is reported degenerate.
pub const DEGENERATE_DET: f64 = 1e-10;

/// Basis φ_j of ker(-1/2 + K*) with S[φ_j] = -a_j on ∂T and ∫φ_j = e_j.
#[derive(Clone, Debug)]
pub struct CapacityResult {
    pub dim: usize,
    pub spec: ShapeSpec,
    pub basis: Vec<Density>,
    /// Columns of A_T.
    pub a: Vec<Point>,
    pub a_t: DMatrix<f64>,
    pub m: DMatrix<f64>,
    /// Size of the bordering multipliers for each j; zero in exact arithmetic.
    pub multiplier: Vec<f64>,
    /// Relative residual of the bordered solve.
    pub residual: f64,
}

/// JSON form `{"A_T", "M", "det_A_T", "dim"}`.
#[derive(Clone, Debug, Serialize)]
pub struct CapacitySummary {
    #[serde(rename = "A_T")]
    pub a_t: Vec<Vec<f64>>,
    #[serde(rename = "M")]
    pub m: Vec<Vec<f64>>,
    #[serde(rename = "det_A_T")]
    pub det_a_t: f64,
    pub dim: usize,
}

pub(crate) fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

impl CapacityResult {
    pub fn det_a_t(&self) -> f64 {
        self.a_t.determinant()
    }

    /// det A_T small relative to the entries; possible in 2D at isolated scales.
    pub fn is_degenerate(&self) -> bool {
        let scale = self.a_t.amax().powi(self.dim as i32);
        self.det_a_t().abs() <= DEGENERATE_DET * scale.max(f64::MIN_POSITIVE)
    }

    pub fn summary(&self) -> CapacitySummary {
        CapacitySummary {
            a_t: rows(&self.a_t),
            m: rows(&self.m),
            det_a_t: self.det_a_t(),
            dim: self.dim,
        }
    }

    /// Eigenvalues of the symmetric part of A_T, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let sym = (&self.a_t + self.a_t.transpose()) * 0.5;
        let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn asymmetry(&self) -> f64 {
        (&self.a_t - self.a_t.transpose()).amax()
    }
}

/// Permeability: A_T⁻¹ for d = 3, 4π I for d = 2.
pub fn permeability(dim: usize, a_t: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if dim == 2 {
        return Ok(DMatrix::identity(2, 2) * (4.0 * PI));
    }
    a_t.clone()
        .try_inverse()
        .ok_or_else(|| Error::Consistency("A_T is not invertible".into()))
}

/// Solves for all d pairs (φ_j, a_j).
pub fn solve_kernel_basis(mesh: &BoundaryMesh) -> Result<CapacityResult> {
    let ops = nystrom::assemble(
        mesh,
        OpSet {
            s: true,
            kstar: mesh.dim == 3,
            ..Default::default()
        },
    );
    solve_kernel_basis_with(mesh, ops.s.as_ref().unwrap(), ops.kstar.as_ref())
}

/// Kernel basis from precomputed operators; K* is required for d = 3.
///
/// In 2D the bordered first-kind system S[φ] + a = 0, ∫φ = e_j is solved
/// directly. S restricted to ∂T annihilates the normal field, so that system
/// carries an extra unknown μ N and the constraint Q[φ](0) = 0, which holds on
/// ker(-1/2 + K*) and fails for N.
///
/// The 3D discretisation interpolates densities with spherical harmonics of
/// lower dimension than the node count, which leaves S rank deficient on the
/// nodal space; there φ_j solves (-1/2 + K*) φ + c = 0, ∫φ = e_j, and
/// a_j = -⟨S[φ_j]⟩ is the boundary mean.
pub fn solve_kernel_basis_with(
    mesh: &BoundaryMesh,
    s: &DMatrix<f64>,
    kstar: Option<&DMatrix<f64>>,
) -> Result<CapacityResult> {
    let d = mesh.dim;
    let n = mesh.len();
    let nd = d * n;
    let second_kind = d == 3;
    let extra = usize::from(!second_kind);
    let size = nd + d + extra;
    let mut a = DMatrix::zeros(size, size);
    if second_kind {
        let ks = kstar.ok_or_else(|| Error::Consistency("K* is required for d = 3".into()))?;
        a.view_mut((0, 0), (nd, nd)).copy_from(ks);
        for i in 0..nd {
            a[(i, i)] -= 0.5;
        }
    } else {
        a.view_mut((0, 0), (nd, nd)).copy_from(s);
    }
    for i in 0..n {
        let th = kernels::pressurelet_raw(d, &(-mesh.nodes[i]));
        for r in 0..d {
            a[(i * d + r, nd + r)] = 1.0;
            a[(nd + r, i * d + r)] = mesh.weights[i];
            if !second_kind {
                a[(i * d + r, nd + d)] = mesh.normals[i][r];
                a[(nd + d, i * d + r)] = mesh.weights[i] * th[r];
            }
        }
    }
    let mut b = DMatrix::zeros(size, d);
    for j in 0..d {
        b[(nd + j, j)] = 1.0;
    }
    let sol = nystrom::solve_system("bordered capacity system", &a, &b)?;
    let mut basis = Vec::with_capacity(d);
    let mut avec = Vec::with_capacity(d);
    let mut mult = Vec::with_capacity(d);
    let mut a_t = DMatrix::zeros(d, d);
    for j in 0..d {
        let col = sol.x.column(j);
        let phi = Density::from_vector(d, DVector::from_iterator(nd, col.rows(0, nd).iter().copied()));
        let aj = if second_kind {
            let sv = Density::from_vector(d, s * &phi.values);
            mult.push(col.rows(nd, d).iter().fold(0.0f64, |m, v| m.max(v.abs())));
            -sv.mean(mesh)
        } else {
            mult.push(col[nd + d]);
            let mut aj = Point::zeros();
            for r in 0..d {
                aj[r] = col[nd + r];
            }
            aj
        };
        for r in 0..d {
            a_t[(r, j)] = aj[r];
        }
        basis.push(phi);
        avec.push(aj);
    }
    let m = permeability(d, &a_t)?;
    Ok(CapacityResult {
        dim: d,
        spec: mesh.spec.clone(),
        basis,
        a: avec,
        a_t,
        m,
        multiplier: mult,
        residual: sol.residual,
    })
}

/// Π₀ coefficients (⟨φ_k, ψ⟩)_k and the remainder Π₁ψ = ψ - Σ_k (Π₀ψ)^k e_k.
pub fn project(mesh: &BoundaryMesh, cap: &CapacityResult, psi: &Density) -> (Point, Density) {
    let d = mesh.dim;
    let mut c = Point::zeros();
    for k in 0..d {
        c[k] = cap.basis[k].inner(psi, mesh);
    }
    let mut rest = psi.clone();
    for i in 0..mesh.len() {
        for k in 0..d {
            rest.values[i * d + k] -= c[k];
        }
    }
    (c, rest)
}

/// Solves (-1/2 + K) x + Σ_k c_k e_k = f with ⟨φ_k, x⟩ = 0.
///
/// Returns (x, c); c vanishes exactly when f lies in ran(-1/2 + K).
pub fn solve_in_range(
    mesh: &BoundaryMesh,
    k: &DMatrix<f64>,
    cap: &CapacityResult,
    f: &DVector<f64>,
) -> Result<(DVector<f64>, Point)> {
    let d = mesh.dim;
    let n = mesh.len();
    let nd = d * n;
    let mut a = DMatrix::zeros(nd + d, nd + d);
    a.view_mut((0, 0), (nd, nd)).copy_from(k);
    for i in 0..nd {
        a[(i, i)] -= 0.5;
    }
    for i in 0..n {
        for r in 0..d {
            a[(i * d + r, nd + r)] = 1.0;
            for q in 0..d {
                a[(nd + q, i * d + r)] = mesh.weights[i] * cap.basis[q].values[i * d + r];
            }
        }
    }
    let mut b = DMatrix::zeros(nd + d, 1);
    b.view_mut((0, 0), (nd, 1)).copy_from(f);
    let sol = nystrom::solve_system("range system for -1/2 + K", &a, &b)?;
    let x = DVector::from_iterator(nd, sol.x.column(0).rows(0, nd).iter().copied());
    let mut c = Point::zeros();
    for r in 0..d {
        c[r] = sol.x[(nd + r, 0)];
    }
    Ok((x, c))
}

/// Number of singular values of -1/2 + K below `rel` times the median one.
pub fn kernel_dimension(k: &DMatrix<f64>, rel: f64) -> usize {
    let mut a = k.clone();
    for i in 0..a.nrows() {
        a[(i, i)] -= 0.5;
    }
    let mut sv: Vec<f64> = a.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| a.total_cmp(b));
    let med = sv[sv.len() / 2];
    sv.iter().filter(|&&s| s < rel * med).count()
}

/// A_{rT} - A_T for several r, against both candidate laws.
#[derive(Clone, Debug, Serialize)]
pub struct RescalingReport {
    pub radii: Vec<f64>,
    /// Base A_T (r = 1).
    pub base: Vec<Vec<f64>>,
    pub shifts: Vec<Vec<Vec<f64>>>,
    /// max |A_{rT} - A_T - (log r)/(4π) I|.
    pub plus_law_deviation: Vec<f64>,
    /// max |A_{rT} - A_T + (log r)/(4π) I|.
    pub minus_law_deviation: Vec<f64>,
}

impl RescalingReport {
    pub fn max_plus(&self) -> f64 {
        self.plus_law_deviation.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_minus(&self) -> f64 {
        self.minus_law_deviation.iter().copied().fold(0.0, f64::max)
    }
}

/// Recomputes A_{rT} for each r (2D).
pub fn rescaling_law_check(spec: &ShapeSpec, radii: &[f64], n: usize) -> Result<RescalingReport> {
    if spec.dim != 2 {
        return Err(Error::Dimension("the rescaling law is a 2D statement".into()));
    }
    let base = solve_kernel_basis(&build_mesh(spec, MeshSize::Curve(n))?)?.a_t;
    let mut rep = RescalingReport {
        radii: radii.to_vec(),
        base: rows(&base),
        shifts: Vec::new(),
        plus_law_deviation: Vec::new(),
        minus_law_deviation: Vec::new(),
    };
    for &r in radii {
        let scaled = spec.clone().scaled(r);
        let a = solve_kernel_basis(&build_mesh(&scaled, MeshSize::Curve(n))?)?.a_t;
        let shift = &a - &base;
        let law = DMatrix::<f64>::identity(2, 2) * (r.ln() / (4.0 * PI));
        rep.plus_law_deviation.push((&shift - &law).amax());
        rep.minus_law_deviation.push((&shift + &law).amax());
        rep.shifts.push(rows(&shift));
    }
    Ok(rep)
}

/// Exterior energy matrix from the boundary form against M.
#[derive(Clone, Debug, Serialize)]
pub struct EnergyReport {
    /// m_is m_kl (-∫ S[φ_s] · ∂ν S[φ_l]|+).
    pub energy: Vec<Vec<f64>>,
    #[serde(rename = "M")]
    pub m: Vec<Vec<f64>>,
    pub relative_deviation: f64,
    pub asymmetry: f64,
    pub min_eigenvalue: f64,
}

/// Evaluates the exterior energy of w_k = m_ki (S[φ_i] + a_i) through its
/// boundary form and compares with M (d = 3).
pub fn energy_identity_check(
    mesh: &BoundaryMesh,
    cap: &CapacityResult,
    s: &DMatrix<f64>,
    kstar: &DMatrix<f64>,
) -> Result<EnergyReport> {
    if mesh.dim != 3 {
        return Err(Error::Dimension("the energy identity needs d = 3".into()));
    }
    let d = 3;
    let mut b = DMatrix::zeros(d, d);
    for sidx in 0..d {
        let sv = s * &cap.basis[sidx].values;
        for l in 0..d {
            // exterior conormal trace (1/2 + K*) φ_l
            let tr = kstar * &cap.basis[l].values + &cap.basis[l].values * 0.5;
            b[(sidx, l)] = -nystrom::weighted_inner(mesh, &sv, &tr);
        }
    }
    let energy = &cap.m * b * cap.m.transpose();
    let rel = (&energy - &cap.m).amax() / cap.m.amax();
    let sym = (&energy + energy.transpose()) * 0.5;
    let min_ev = SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    Ok(EnergyReport {
        energy: rows(&energy),
        m: rows(&cap.m),
        relative_deviation: rel,
        asymmetry: (&energy - energy.transpose()).amax(),
        min_eigenvalue: min_ev,
    })
}

/// Assembles S and K* once and returns them with the capacity result.
pub fn capacity_with_operators(mesh: &BoundaryMesh) -> Result<(CapacityResult, DMatrix<f64>, DMatrix<f64>)> {
    let ops = nystrom::assemble(
        mesh,
        OpSet {
            s: true,
            kstar: true,
            ..Default::default()
        },
    );
    let s = ops.s.unwrap();
    let ks = ops.kstar.unwrap();
    let cap = solve_kernel_basis_with(mesh, &s, Some(&ks))?;
    Ok((cap, s, ks))
}
