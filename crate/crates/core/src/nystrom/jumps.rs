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


//! Trace checks: extrapolated one-sided limits of D and of the conormal
//! derivative of (S, Q) against the on-surface operators.

use super::near::{field_from_samples, near_samples, DensityInterp, FieldKind};
use super::{assemble, OpSet};
use crate::geometry::{BoundaryMesh, Point};
use nalgebra::DVector;

/// Default wall distances for the extrapolation.
pub const RICHARDSON_STEPS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

/// Six smaller distances. The three-level sequence leaves errors near 1e-4
/// on the exterior side of strongly curved boundaries.
pub const RICHARDSON_STEPS_EXTENDED: [f64; 6] = [2e-3, 1e-3, 5e-4, 2.5e-4, 1.25e-4, 6.25e-5];

/// Maximum nodal deviations between extrapolated traces and operator values.
#[derive(Clone, Debug, Default, serde::Serialize)]
pub struct JumpReport {
    /// D|+ against (-1/2 + K) φ.
    pub d_plus: f64,
    /// D|- against (1/2 + K) φ.
    pub d_minus: f64,
    /// ∂ν(S,Q)|+ against (1/2 + K*) φ.
    pub conormal_plus: f64,
    /// ∂ν(S,Q)|- against (-1/2 + K*) φ.
    pub conormal_minus: f64,
    /// |S|+ - S|-|.
    pub s_continuity: f64,
}

impl JumpReport {
    pub fn max_deviation(&self) -> f64 {
        self.d_plus
            .max(self.d_minus)
            .max(self.conormal_plus)
            .max(self.conormal_minus)
    }
}

/// Polynomial extrapolation to t = 0 from values at geometrically spaced t.
pub fn extrapolate(ts: &[f64], vals: &[Point]) -> Point {
    // Neville's scheme at t = 0
    let mut p: Vec<Point> = vals.to_vec();
    let n = ts.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (p[i + 1] * ts[i] - p[i] * ts[i + m]) / (ts[i] - ts[i + m]);
        }
    }
    p[0]
}

/// Compares extrapolated traces with the assembled K and K*.
pub fn verify_jumps(mesh: &BoundaryMesh, phi: &DVector<f64>, steps: &[f64]) -> JumpReport {
    let d = mesh.dim;
    let ops = assemble(
        mesh,
        OpSet {
            k: true,
            kstar: true,
            ..Default::default()
        },
    );
    let kphi = ops.k.unwrap() * phi;
    let ksphi = ops.kstar.unwrap() * phi;
    let interp = DensityInterp::new(mesh, phi, d);
    let mut rep = JumpReport::default();
    for i in 0..mesh.len() {
        let x = mesh.nodes[i];
        let nx = mesh.normals[i];
        let mut phi_i = Point::zeros();
        let mut k_i = Point::zeros();
        let mut ks_i = Point::zeros();
        for j in 0..d {
            phi_i[j] = phi[i * d + j];
            k_i[j] = kphi[i * d + j];
            ks_i[j] = ksphi[i * d + j];
        }
        let mut traces = [[Point::zeros(); 3]; 2];
        for (side, sign) in [1.0, -1.0].into_iter().enumerate() {
            let mut dv = Vec::new();
            let mut cn = Vec::new();
            let mut sv = Vec::new();
            for &t in steps {
                let p = x + nx * (sign * t);
                let s = near_samples(mesh, &interp, &p);
                dv.push(field_from_samples(d, FieldKind::D, &p, &s).vector());
                let g = field_from_samples(d, FieldKind::GradS, &p, &s).tensor();
                let q = field_from_samples(d, FieldKind::Q, &p, &s).scalar();
                cn.push(g * nx - nx * q);
                sv.push(field_from_samples(d, FieldKind::S, &p, &s).vector());
            }
            traces[side] = [
                extrapolate(steps, &dv),
                extrapolate(steps, &cn),
                extrapolate(steps, &sv),
            ];
        }
        let [dp, cp, sp] = traces[0];
        let [dm, cm, sm] = traces[1];
        rep.d_plus = rep.d_plus.max((dp - (k_i - phi_i * 0.5)).amax());
        rep.d_minus = rep.d_minus.max((dm - (k_i + phi_i * 0.5)).amax());
        rep.conormal_plus = rep.conormal_plus.max((cp - (ks_i + phi_i * 0.5)).amax());
        rep.conormal_minus = rep.conormal_minus.max((cm - (ks_i - phi_i * 0.5)).amax());
        rep.s_continuity = rep.s_continuity.max((sp - sm).amax());
    }
    rep
}
