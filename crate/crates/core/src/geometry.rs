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


//! Hole shapes, boundary meshes and the containment check B(1/16) ⊂ T ⊂ B(3/8).

use crate::error::{Error, Result};
use crate::quad::GaussRule;
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub type Point = Vector3<f64>;

/// Inner containment radius.
pub const R_INNER: f64 = 1.0 / 16.0;
/// Outer containment radius.
pub const R_OUTER: f64 = 3.0 / 8.0;
const CONTAINMENT_TOL: f64 = 1e-9;
const CONTAINMENT_SAMPLES: usize = 2048;

/// Maximum radius of the unscaled kite curve (cos t + 0.65 cos 2t - 0.65, 1.5 sin t).
pub const KITE_MAX_RADIUS: f64 = 2.065_670_987_793_116;

/// Shape family and its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ShapeKind {
    Disk { radius: f64 },
    Ellipse { semi_axes: [f64; 2] },
    /// Kite curve normalised to unit maximum radius; `scale` sets the maximum radius.
    Kite,
    Star { radius: f64, amplitude: f64, frequency: u32 },
    Sphere { radius: f64 },
    Ellipsoid { semi_axes: [f64; 3] },
}

/// A hole shape as read from JSON, e.g. `{"dim":2,"kind":"kite","scale":0.3}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    pub dim: usize,
    #[serde(flatten)]
    pub kind: ShapeKind,
    #[serde(default = "unit_scale")]
    pub scale: f64,
    /// Translation applied after scaling.
    #[serde(default, skip_serializing_if = "is_origin")]
    pub center: [f64; 3],
}

fn unit_scale() -> f64 {
    1.0
}

fn is_origin(c: &[f64; 3]) -> bool {
    c.iter().all(|&v| v == 0.0)
}

impl ShapeSpec {
    pub fn new(dim: usize, kind: ShapeKind) -> Self {
        Self {
            dim,
            kind,
            scale: 1.0,
            center: [0.0; 3],
        }
    }

    pub fn disk(radius: f64) -> Self {
        Self::new(2, ShapeKind::Disk { radius })
    }

    pub fn ellipse(a: f64, b: f64) -> Self {
        Self::new(2, ShapeKind::Ellipse { semi_axes: [a, b] })
    }

    pub fn kite(max_radius: f64) -> Self {
        Self::new(2, ShapeKind::Kite).scaled(max_radius)
    }

    pub fn star(radius: f64, amplitude: f64, frequency: u32) -> Self {
        Self::new(
            2,
            ShapeKind::Star {
                radius,
                amplitude,
                frequency,
            },
        )
    }

    pub fn sphere(radius: f64) -> Self {
        Self::new(3, ShapeKind::Sphere { radius })
    }

    pub fn ellipsoid(a: f64, b: f64, c: f64) -> Self {
        Self::new(3, ShapeKind::Ellipsoid { semi_axes: [a, b, c] })
    }

    /// Multiply the current scale by `r`.
    pub fn scaled(mut self, r: f64) -> Self {
        self.scale *= r;
        self
    }

    pub fn centered_at(mut self, c: [f64; 3]) -> Self {
        self.center = c;
        self
    }

    /// Check parameters, without the containment test.
    pub fn validate_params(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidShape(m.to_string()));
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return bad("scale must be positive");
        }
        let expected = match self.kind {
            ShapeKind::Disk { .. }
            | ShapeKind::Ellipse { .. }
            | ShapeKind::Kite
            | ShapeKind::Star { .. } => 2,
            ShapeKind::Sphere { .. } | ShapeKind::Ellipsoid { .. } => 3,
        };
        if self.dim != expected {
            return Err(Error::Dimension(format!(
                "shape {:?} needs dim {expected}, got {}",
                self.kind, self.dim
            )));
        }
        if self.dim == 2 && self.center[2] != 0.0 {
            return bad("2D shapes need a zero third center component");
        }
        match self.kind {
            ShapeKind::Disk { radius } | ShapeKind::Sphere { radius } if radius <= 0.0 => {
                bad("radius must be positive")
            }
            ShapeKind::Ellipse { semi_axes } if semi_axes.iter().any(|&a| a <= 0.0) => {
                bad("semi-axes must be positive")
            }
            ShapeKind::Ellipsoid { semi_axes } if semi_axes.iter().any(|&a| a <= 0.0) => {
                bad("semi-axes must be positive")
            }
            ShapeKind::Star {
                radius,
                amplitude,
                frequency,
            } => {
                if radius <= 0.0 {
                    bad("radius must be positive")
                } else if !(0.0..1.0).contains(&amplitude.abs()) {
                    bad("star amplitude must satisfy |amplitude| < 1")
                } else if frequency == 0 {
                    bad("star frequency must be positive")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Parameter validation followed by the containment check.
    pub fn validate(&self) -> Result<()> {
        self.validate_params()?;
        let report = containment_check(self)?;
        if report.ok {
            Ok(())
        } else {
            Err(Error::Containment {
                min_radius: report.min_radius,
                max_radius: report.max_radius,
            })
        }
    }

    pub fn shape(&self) -> Shape {
        Shape { spec: self.clone() }
    }
}

/// Result of the containment check.
#[derive(Clone, Debug, Serialize)]
pub struct ContainmentReport {
    pub ok: bool,
    /// Minimum of |x| over boundary samples.
    pub min_radius: f64,
    /// Maximum of |x| over boundary samples.
    pub max_radius: f64,
    /// Whether x · N > 0 at all samples.
    pub star_shaped: bool,
}

/// Samples the boundary and checks B(1/16) ⊂ T ⊂ B(3/8).
pub fn containment_check(spec: &ShapeSpec) -> Result<ContainmentReport> {
    spec.validate_params()?;
    let shape = spec.shape();
    let mut min_r = f64::INFINITY;
    let mut max_r = 0.0f64;
    let mut star = true;
    for i in 0..CONTAINMENT_SAMPLES {
        let (x, n) = if spec.dim == 2 {
            let t = 2.0 * PI * i as f64 / CONTAINMENT_SAMPLES as f64;
            let c = shape.curve(t);
            (c.x, c.normal())
        } else {
            let p = fibonacci_point(i, CONTAINMENT_SAMPLES);
            let s = shape.surface(&p);
            (s.x, s.normal)
        };
        let r = x.norm();
        min_r = min_r.min(r);
        max_r = max_r.max(r);
        star &= x.dot(&n) > 0.0;
    }
    let ok = star && min_r >= R_INNER - CONTAINMENT_TOL && max_r <= R_OUTER + CONTAINMENT_TOL;
    Ok(ContainmentReport {
        ok,
        min_radius: min_r,
        max_radius: max_r,
        star_shaped: star,
    })
}

fn fibonacci_point(i: usize, n: usize) -> Point {
    let golden = PI * (3.0 - 5f64.sqrt());
    let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
    let s = (1.0 - z * z).sqrt();
    let phi = golden * i as f64;
    Point::new(s * phi.cos(), s * phi.sin(), z)
}

/// Point of a closed curve with its first two parameter derivatives.
#[derive(Clone, Copy, Debug)]
pub struct CurvePoint {
    pub x: Point,
    pub d1: Point,
    pub d2: Point,
}

impl CurvePoint {
    pub fn speed(&self) -> f64 {
        self.d1.norm()
    }

    /// Outward unit normal of a counter-clockwise curve.
    pub fn normal(&self) -> Point {
        Point::new(self.d1.y, -self.d1.x, 0.0) / self.speed()
    }

    /// Signed curvature, positive on convex parts.
    pub fn curvature(&self) -> f64 {
        (self.d1.x * self.d2.y - self.d1.y * self.d2.x) / self.speed().powi(3)
    }
}

/// Point of a closed surface parameterised by the unit sphere.
#[derive(Clone, Copy, Debug)]
pub struct SurfacePoint {
    pub x: Point,
    pub normal: Point,
    /// Surface element per unit solid angle.
    pub jacobian: f64,
}

/// Evaluator for the boundary parameterisation of a [`ShapeSpec`].
#[derive(Clone, Debug)]
pub struct Shape {
    pub spec: ShapeSpec,
}

impl Shape {
    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    fn center(&self) -> Point {
        Point::from(self.spec.center)
    }

    /// Boundary curve at parameter t (2D only).
    pub fn curve(&self, t: f64) -> CurvePoint {
        let s = self.spec.scale;
        let (c, sn) = (t.cos(), t.sin());
        let (x, d1, d2) = match self.spec.kind {
            ShapeKind::Disk { radius } => (
                [radius * c, radius * sn],
                [-radius * sn, radius * c],
                [-radius * c, -radius * sn],
            ),
            ShapeKind::Ellipse { semi_axes: [a, b] } => {
                ([a * c, b * sn], [-a * sn, b * c], [-a * c, -b * sn])
            }
            ShapeKind::Kite => {
                let k = 1.0 / KITE_MAX_RADIUS;
                let (c2, s2) = ((2.0 * t).cos(), (2.0 * t).sin());
                (
                    [k * (c + 0.65 * c2 - 0.65), k * 1.5 * sn],
                    [k * (-sn - 1.3 * s2), k * 1.5 * c],
                    [k * (-c - 2.6 * c2), -k * 1.5 * sn],
                )
            }
            ShapeKind::Star {
                radius,
                amplitude,
                frequency,
            } => {
                let f = frequency as f64;
                let r = radius * (1.0 + amplitude * (f * t).cos());
                let r1 = -radius * amplitude * f * (f * t).sin();
                let r2 = -radius * amplitude * f * f * (f * t).cos();
                (
                    [r * c, r * sn],
                    [r1 * c - r * sn, r1 * sn + r * c],
                    [r2 * c - 2.0 * r1 * sn - r * c, r2 * sn + 2.0 * r1 * c - r * sn],
                )
            }
            _ => panic!("curve() called on a 3D shape"),
        };
        CurvePoint {
            x: Point::new(s * x[0], s * x[1], 0.0) + self.center(),
            d1: Point::new(s * d1[0], s * d1[1], 0.0),
            d2: Point::new(s * d2[0], s * d2[1], 0.0),
        }
    }

    /// Semi-axes of the (scaled) ellipsoid family.
    pub fn semi_axes3(&self) -> [f64; 3] {
        let s = self.spec.scale;
        match self.spec.kind {
            ShapeKind::Sphere { radius } => [s * radius; 3],
            ShapeKind::Ellipsoid { semi_axes: [a, b, c] } => [s * a, s * b, s * c],
            _ => panic!("semi_axes3() called on a 2D shape"),
        }
    }

    /// Surface point for the unit direction p (3D only).
    pub fn surface(&self, p: &Point) -> SurfacePoint {
        let a = self.semi_axes3();
        let x = Point::new(a[0] * p.x, a[1] * p.y, a[2] * p.z) + self.center();
        let g = Point::new(p.x / a[0], p.y / a[1], p.z / a[2]);
        let gn = g.norm();
        SurfacePoint {
            x,
            normal: g / gn,
            jacobian: a[0] * a[1] * a[2] * gn,
        }
    }

    /// Whether `x` lies in the open hole.
    pub fn contains(&self, x: &Point) -> bool {
        let y = x - self.center();
        if self.dim() == 3 {
            let a = self.semi_axes3();
            return (y.x / a[0]).powi(2) + (y.y / a[1]).powi(2) + (y.z / a[2]).powi(2) < 1.0;
        }
        let c = self.curve(self.nearest_parameter(x));
        (x - c.x).dot(&c.normal()) < 0.0
    }

    /// Unit-sphere parameter of the boundary point nearest to `x` (3D only).
    pub fn nearest_direction(&self, x: &Point) -> Point {
        let a = self.semi_axes3();
        let y = x - self.center();
        let mut p = Point::new(y.x / a[0], y.y / a[1], y.z / a[2]).normalize();
        if a[0] == a[1] && a[1] == a[2] {
            return y.normalize();
        }
        // projected gradient steps on |A p - y|^2 over the sphere
        for _ in 0..50 {
            let r = Point::new(a[0] * p.x - y.x, a[1] * p.y - y.y, a[2] * p.z - y.z);
            let g = Point::new(a[0] * r.x, a[1] * r.y, a[2] * r.z);
            let tang = g - p * p.dot(&g);
            let amax = a.iter().cloned().fold(0.0, f64::max);
            let step = tang / (amax * amax);
            p = (p - step).normalize();
            if step.norm() < 1e-15 {
                break;
            }
        }
        p
    }

    /// Parameter of the boundary point nearest to `x` (2D only).
    pub fn nearest_parameter(&self, x: &Point) -> f64 {
        let m = 256;
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..m {
            let t = 2.0 * PI * i as f64 / m as f64;
            let d = (self.curve(t).x - x).norm_squared();
            if d < best.0 {
                best = (d, t);
            }
        }
        let mut t = best.1;
        for _ in 0..30 {
            let c = self.curve(t);
            let r = c.x - x;
            let f1 = r.dot(&c.d1);
            let f2 = c.d1.norm_squared() + r.dot(&c.d2);
            if f2 <= 0.0 {
                break;
            }
            let dt = f1 / f2;
            t -= dt;
            if dt.abs() < 1e-15 {
                break;
            }
        }
        t.rem_euclid(2.0 * PI)
    }
}

/// Parameter layout of a boundary mesh.
#[derive(Clone, Debug)]
pub enum MeshLayout {
    /// Equispaced nodes t_i = 2πi/n on a closed curve.
    Curve { t: Vec<f64>, d1: Vec<Point>, d2: Vec<Point> },
    /// Gauss-Legendre in cos θ times equispaced φ; node index i_θ n_φ + j.
    Sphere {
        n_theta: usize,
        n_phi: usize,
        /// Unit directions of the nodes.
        dirs: Vec<Point>,
        /// Solid-angle weights.
        omega: Vec<f64>,
        /// Surface element per solid angle.
        jacobian: Vec<f64>,
    },
}

/// Quadrature discretisation of ∂T.
#[derive(Clone, Debug)]
pub struct BoundaryMesh {
    pub spec: ShapeSpec,
    pub shape: Shape,
    pub dim: usize,
    pub nodes: Vec<Point>,
    pub normals: Vec<Point>,
    pub weights: Vec<f64>,
    pub layout: MeshLayout,
}

/// Node count: a single integer in 2D, θ × φ counts in 3D.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshSize {
    Curve(usize),
    Sphere(usize, usize),
}

impl std::str::FromStr for MeshSize {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::MeshSize(format!("cannot parse '{s}', expected INT or AxB"));
        match s.split_once(['x', 'X']) {
            Some((a, b)) => Ok(MeshSize::Sphere(
                a.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
            )),
            None => Ok(MeshSize::Curve(s.trim().parse().map_err(|_| bad())?)),
        }
    }
}

impl MeshSize {
    /// Default resolution per dimension.
    pub fn default_for(dim: usize) -> Self {
        if dim == 2 {
            MeshSize::Curve(256)
        } else {
            MeshSize::Sphere(16, 32)
        }
    }
}

/// Builds the boundary mesh; validates the shape first.
pub fn build_mesh(spec: &ShapeSpec, n: MeshSize) -> Result<BoundaryMesh> {
    spec.validate()?;
    build_mesh_unchecked(spec, n)
}

/// Builds the mesh with parameter checks only, skipping containment.
pub fn build_mesh_unchecked(spec: &ShapeSpec, n: MeshSize) -> Result<BoundaryMesh> {
    spec.validate_params()?;
    let shape = spec.shape();
    match (spec.dim, n) {
        (2, MeshSize::Curve(n)) => {
            if n < 16 || n % 2 != 0 {
                return Err(Error::MeshSize(format!(
                    "2D meshes need an even node count >= 16, got {n}"
                )));
            }
            let h = 2.0 * PI / n as f64;
            let mut nodes = Vec::with_capacity(n);
            let mut normals = Vec::with_capacity(n);
            let mut weights = Vec::with_capacity(n);
            let mut t = Vec::with_capacity(n);
            let mut d1 = Vec::with_capacity(n);
            let mut d2 = Vec::with_capacity(n);
            for i in 0..n {
                let ti = h * i as f64;
                let c = shape.curve(ti);
                nodes.push(c.x);
                normals.push(c.normal());
                weights.push(h * c.speed());
                t.push(ti);
                d1.push(c.d1);
                d2.push(c.d2);
            }
            Ok(BoundaryMesh {
                spec: spec.clone(),
                shape,
                dim: 2,
                nodes,
                normals,
                weights,
                layout: MeshLayout::Curve { t, d1, d2 },
            })
        }
        (3, MeshSize::Sphere(nt, np)) => {
            if nt < 6 || np < 6 || np % 2 != 0 {
                return Err(Error::MeshSize(format!(
                    "3D meshes need at least 6x6 nodes with an even φ count, got {nt}x{np}"
                )));
            }
            let (dirs, omega) = sphere_grid(nt, np);
            let mut nodes = Vec::with_capacity(dirs.len());
            let mut normals = Vec::with_capacity(dirs.len());
            let mut weights = Vec::with_capacity(dirs.len());
            let mut jacobian = Vec::with_capacity(dirs.len());
            for (p, &w) in dirs.iter().zip(&omega) {
                let s = shape.surface(p);
                nodes.push(s.x);
                normals.push(s.normal);
                weights.push(w * s.jacobian);
                jacobian.push(s.jacobian);
            }
            Ok(BoundaryMesh {
                spec: spec.clone(),
                shape,
                dim: 3,
                nodes,
                normals,
                weights,
                layout: MeshLayout::Sphere {
                    n_theta: nt,
                    n_phi: np,
                    dirs,
                    omega,
                    jacobian,
                },
            })
        }
        (d, n) => Err(Error::MeshSize(format!(
            "mesh size {n:?} does not match dimension {d}"
        ))),
    }
}

/// Gauss-Legendre in z = cos θ (descending z) times equispaced φ.
pub fn sphere_grid(nt: usize, np: usize) -> (Vec<Point>, Vec<f64>) {
    let rule = GaussRule::new(nt);
    let mut dirs = Vec::with_capacity(nt * np);
    let mut omega = Vec::with_capacity(nt * np);
    let hphi = 2.0 * PI / np as f64;
    for i in 0..nt {
        let z = rule.nodes[nt - 1 - i];
        let w = rule.weights[nt - 1 - i];
        let s = (1.0 - z * z).sqrt();
        for j in 0..np {
            let phi = hphi * j as f64;
            dirs.push(Point::new(s * phi.cos(), s * phi.sin(), z));
            omega.push(w * hphi);
        }
    }
    (dirs, omega)
}

impl BoundaryMesh {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of scalar unknowns of a vector density.
    pub fn n_dof(&self) -> usize {
        self.dim * self.len()
    }

    /// |∂T| from the quadrature.
    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// |T| = (1/d) ∫ x · N.
    pub fn volume(&self) -> f64 {
        let s: f64 = (0..self.len())
            .map(|i| self.weights[i] * self.nodes[i].dot(&self.normals[i]))
            .sum();
        s / self.dim as f64
    }

    /// Σ w_i N_i.
    pub fn normal_sum(&self) -> Point {
        (0..self.len()).fold(Point::zeros(), |acc, i| acc + self.normals[i] * self.weights[i])
    }

    /// Curve parameters (2D meshes).
    pub fn curve_params(&self) -> Option<&[f64]> {
        match &self.layout {
            MeshLayout::Curve { t, .. } => Some(t),
            _ => None,
        }
    }
}
