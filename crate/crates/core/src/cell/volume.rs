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


//! Volume quadrature on the perforated torus cell `[-L/2, L/2]^d \ T` and on `T`.
//!
//! Near the hole the region between ∂T and the sphere of radius `ρ` is swept
//! by the rays `s x(u)`, `x(u) ∈ ∂T`, with volume element
//! `s^{d-1} (x · N) dσ ds`. Outside `B_ρ` each cube face is reached by a
//! gnomonic pyramid with a logarithmic radial variable.

use crate::error::{Error, Result};
use crate::geometry::{build_mesh, BoundaryMesh, MeshSize, Point};
use crate::quad::GaussRule;

/// Resolution of the volume rules.
#[derive(Clone, Debug, PartialEq)]
pub struct VolumeOptions {
    /// Radius of the sphere separating the two zones.
    pub inner_radius: f64,
    /// Angular rule of the inner zone, as a boundary mesh size.
    pub inner_mesh: MeshSize,
    /// Radial Gauss nodes in the inner zone.
    pub inner_radial: usize,
    /// Gauss nodes per face direction.
    pub face_nodes: usize,
    /// Radial Gauss nodes per panel of the logarithmic radius.
    pub radial_nodes: usize,
    /// Panel length in `log r`.
    pub radial_panel: f64,
}

impl VolumeOptions {
    pub fn default_for(dim: usize) -> Self {
        if dim == 2 {
            Self {
                inner_radius: 0.5,
                inner_mesh: MeshSize::Curve(64),
                inner_radial: 12,
                face_nodes: 16,
                radial_nodes: 10,
                radial_panel: 1.0,
            }
        } else {
            Self {
                inner_radius: 0.5,
                inner_mesh: MeshSize::Sphere(8, 16),
                inner_radial: 8,
                face_nodes: 8,
                radial_nodes: 8,
                radial_panel: 1.5,
            }
        }
    }
}

/// Which part of the cell a node belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Zone {
    /// Between ∂T and the sphere of radius ρ.
    Inner,
    /// Between the sphere and the cell faces.
    Outer,
}

/// Nodes and weights of a volume rule.
#[derive(Clone, Debug, Default)]
pub struct VolumeRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub zones: Vec<Zone>,
}

impl VolumeRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `Σ w f(x)` for a scalar function.
    pub fn integrate(&self, f: impl Fn(&Point) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(x, w)| w * f(x)).sum()
    }

    fn push(&mut self, x: Point, w: f64, z: Zone) {
        self.points.push(x);
        self.weights.push(w);
        self.zones.push(z);
    }
}

fn coarse_mesh(mesh: &BoundaryMesh, opts: &VolumeOptions) -> Result<BoundaryMesh> {
    let m = build_mesh(&mesh.spec, opts.inner_mesh)?;
    for i in 0..m.len() {
        if m.nodes[i].dot(&m.normals[i]) <= 0.0 {
            return Err(Error::InvalidShape(
                "volume quadrature needs a hole star-shaped about the origin".into(),
            ));
        }
        if m.nodes[i].norm() >= opts.inner_radius {
            return Err(Error::Parameter(format!(
                "inner radius {} does not enclose the hole",
                opts.inner_radius
            )));
        }
    }
    Ok(m)
}

/// Rule for `[-L/2, L/2]^d \ T` with `L = 1/η`.
pub fn fluid_rule(mesh: &BoundaryMesh, eta: f64, opts: &VolumeOptions) -> Result<VolumeRule> {
    let d = mesh.dim;
    let half = 0.5 / eta;
    let rho = opts.inner_radius;
    if rho >= half {
        return Err(Error::Parameter(format!("eta = {eta} too large for inner radius {rho}")));
    }
    let coarse = coarse_mesh(mesh, opts)?;
    let mut rule = VolumeRule::default();
    let radial = GaussRule::new(opts.inner_radial);
    for i in 0..coarse.len() {
        let x = coarse.nodes[i];
        let jac = coarse.weights[i] * x.dot(&coarse.normals[i]);
        let smax = rho / x.norm();
        for (s, ws) in radial.on(1.0, smax) {
            rule.push(x * s, ws * jac * s.powi(d as i32 - 1), Zone::Inner);
        }
    }
    let face = GaussRule::new(opts.face_nodes);
    let rad = GaussRule::new(opts.radial_nodes);
    let uv: Vec<(f64, f64, f64, f64)> = if d == 3 {
        let mut v = Vec::new();
        for (u, wu) in face.on(-1.0, 1.0) {
            for (w, ww) in face.on(-1.0, 1.0) {
                v.push((u, w, wu * ww, (1.0 + u * u + w * w).powf(-1.5)));
            }
        }
        v
    } else {
        face.on(-1.0, 1.0).map(|(u, wu)| (u, 0.0, wu, 1.0 / (1.0 + u * u))).collect()
    };
    for axis in 0..d {
        for sign in [1.0, -1.0] {
            for &(u, w, wuv, domega) in &uv {
                let mut q = Point::zeros();
                q[axis] = sign;
                q[(axis + 1) % d] = u;
                if d == 3 {
                    q[(axis + 2) % 3] = w;
                }
                let len = q.norm();
                let dir = q / len;
                // t = ρ e^τ, τ ∈ [0, log(half len / ρ)]
                let tau_max = (half * len / rho).ln();
                let panels = (tau_max / opts.radial_panel).ceil().max(1.0) as usize;
                let h = tau_max / panels as f64;
                for p in 0..panels {
                    for (tau, wt) in rad.on(p as f64 * h, (p + 1) as f64 * h) {
                        let t = rho * tau.exp();
                        rule.push(dir * t, wuv * domega * wt * t.powi(d as i32), Zone::Outer);
                    }
                }
            }
        }
    }
    Ok(rule)
}

/// Rule for the hole `T`, from rays `s x(u)`, `s ∈ (0, 1)`.
/// Suitable for integrands that are smooth in `T`.
pub fn hole_rule(mesh: &BoundaryMesh, opts: &VolumeOptions) -> Result<VolumeRule> {
    let d = mesh.dim;
    let coarse = coarse_mesh(mesh, opts)?;
    let radial = GaussRule::new(opts.inner_radial);
    let mut rule = VolumeRule::default();
    for i in 0..coarse.len() {
        let x = coarse.nodes[i];
        let jac = coarse.weights[i] * x.dot(&coarse.normals[i]);
        for (s, ws) in radial.on(0.0, 1.0) {
            rule.push(x * s, ws * jac * s.powi(d as i32 - 1), Zone::Inner);
        }
    }
    Ok(rule)
}
