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


//! Two-scale cell correctors on the perforated torus `η⁻¹𝕋^d \ T̄`.
//!
//! The corrector is represented as
//!
//! ```text
//! χ^η_k = G^η_k + A_T e_k + D^η[g̃] + r^η_k,    ω^η_k = P^η_k + P^η[g̃],
//! ```
//!
//! with `g = g̃ + ⟨g⟩` solving `(-1/2 + K^η) g = h^η_k`, where the boundary
//! data `-G^η_k` splits into `Π₀` and `Π₁` parts.

mod volume;

pub use volume::{fluid_rule, hole_rule, VolumeOptions, VolumeRule, Zone};

use crate::capacity::{project, CapacityResult};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryMesh, Point};
use crate::kernels;
use crate::nystrom::{
    self, extrapolate, field_from_samples, near_samples, Density, DensityInterp, FieldKind, OpSet, SourceSamples,
    RICHARDSON_STEPS_EXTENDED,
};
use crate::periodic::{periodic_np_from_pairs, LayerSources, PairRemainders, RemainderSum, TorusGreen};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::Arc;

/// Largest relative L² gap allowed between the projected and direct solves.
pub const SOLVE_AGREEMENT: f64 = 1e-6;

/// Multiple of `ε·cond(-1/2 + K^η)` tolerated before the direct solve is
/// considered inconsistent.
pub const CONDITION_SLACK: f64 = 100.0;

/// Operators shared by the `d` correctors of one `(T, η)`.
pub struct CellContext {
    pub mesh: BoundaryMesh,
    pub cap: CapacityResult,
    pub torus: TorusGreen,
    pub pairs: PairRemainders,
    /// `K`, `R^η` and `K^η`.
    pub k: DMatrix<f64>,
    pub r_eta: DMatrix<f64>,
    pub k_eta: DMatrix<f64>,
    /// `|T|` from the mesh.
    pub volume: f64,
}

impl CellContext {
    pub fn new(mesh: &BoundaryMesh, cap: &CapacityResult, eta: f64) -> Result<Self> {
        if cap.dim != mesh.dim || cap.basis[0].values.len() != mesh.n_dof() {
            return Err(Error::Dimension("capacity basis does not match the mesh".into()));
        }
        let torus = TorusGreen::new(mesh.dim, eta)?;
        let pairs = PairRemainders::new(mesh, &torus);
        let ops = periodic_np_from_pairs(mesh, &torus, &pairs);
        Ok(Self {
            mesh: mesh.clone(),
            cap: cap.clone(),
            torus,
            pairs,
            k: ops.k.mat,
            r_eta: ops.r_eta.mat,
            k_eta: ops.k_eta.mat,
            volume: mesh.volume(),
        })
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim
    }

    pub fn eta(&self) -> f64 {
        self.torus.eta
    }

    /// `(Π₀ coefficients) = ΦᵀW` as a `d × nd` matrix.
    fn pi0_rows(&self) -> DMatrix<f64> {
        let d = self.dim();
        let n = self.mesh.len();
        DMatrix::from_fn(d, d * n, |q, c| self.mesh.weights[c / d] * self.cap.basis[q].values[c])
    }
}

/// Solution of the cell problem for one direction `e_k`.
#[derive(Clone)]
pub struct CellCorrector {
    pub ctx: Arc<CellContext>,
    pub k: usize,
    pub g: Density,
    pub g_tilde: Density,
    pub g_mean: Point,
    /// `Π₀[-G^η_k] - A_T e_k`.
    pub r_tilde: Point,
    /// Constant of the representation; `r̃ - η^d |T| ⟨g⟩`.
    pub r: Point,
    pub a_t_ek: Point,
    /// `-η^d |T| ⟨g⟩`, the constant value of `D^η[⟨g⟩]` in the fluid.
    pub absorbed: Point,
    /// Bordering multipliers of the projected system; zero in exact arithmetic.
    pub multiplier: f64,
    /// Relative L² gap to the direct solve of `(-1/2 + K^η) g = h`.
    pub direct_deviation: f64,
    /// Condition estimate of `-1/2 + K^η`.
    pub direct_cond: f64,
}

/// Correctors for all directions `k = 1..d`.
pub fn solve_cells(ctx: Arc<CellContext>) -> Result<Vec<CellCorrector>> {
    let d = ctx.dim();
    let mesh = &ctx.mesh;
    let n = mesh.len();
    let nd = d * n;
    let eta = ctx.eta();
    let pi0 = ctx.pi0_rows();
    // boundary data -G^η_k at the nodes
    let greens: Vec<_> = mesh
        .nodes
        .par_iter()
        .map(|x| ctx.torus.eval(x))
        .collect::<Result<Vec<_>>>()?;
    let mut cs = Vec::with_capacity(d);
    let mut hs = DMatrix::zeros(nd, d);
    for k in 0..d {
        let b = Density::from_fn(mesh, |i, _| -greens[i].g.column(k).into_owned());
        let (c, h) = project(mesh, &ctx.cap, &b);
        cs.push(c);
        hs.column_mut(k).copy_from(&h.values);
    }
    // projected system on L²₀ with constants as bordering columns
    let scale = eta.powi(d as i32 - 1);
    let b_rows = &pi0 * &ctx.r_eta;
    let mut a = DMatrix::zeros(nd + d, nd + d);
    {
        let mut top = a.view_mut((0, 0), (nd, nd));
        top.copy_from(&ctx.k);
        top += &ctx.r_eta * scale;
    }
    for i in 0..n {
        for r in 0..d {
            a[(i * d + r, i * d + r)] -= 0.5;
            for col in 0..nd {
                a[(i * d + r, col)] -= scale * b_rows[(r, col)];
            }
            a[(i * d + r, nd + r)] = 1.0;
            a[(nd + r, i * d + r)] = mesh.weights[i];
        }
    }
    let mut rhs = DMatrix::zeros(nd + d, d);
    rhs.view_mut((0, 0), (nd, d)).copy_from(&hs);
    let proj = nystrom::solve_system("projected cell system", &a, &rhs)?;
    let mut direct_op = ctx.k_eta.clone();
    for i in 0..nd {
        direct_op[(i, i)] -= 0.5;
    }
    let direct = nystrom::solve_system("periodic double-layer system", &direct_op, &hs)?;
    let mut out = Vec::with_capacity(d);
    for k in 0..d {
        let gt = DVector::from_iterator(nd, proj.x.column(k).rows(0, nd).iter().copied());
        let multiplier = proj.x.column(k).rows(nd, d).amax();
        let coeff = &b_rows * &gt;
        let mut g_mean = Point::zeros();
        for q in 0..d {
            g_mean[q] = coeff[q] / (eta * ctx.volume);
        }
        let g_tilde = Density::from_vector(d, gt);
        let g = Density::from_fn(mesh, |i, _| g_tilde.at(i) + g_mean);
        let gd = Density::from_vector(d, direct.x.column(k).into_owned());
        let diff = Density::from_vector(d, &gd.values - &g.values);
        let direct_deviation = diff.l2_norm(mesh) / gd.l2_norm(mesh).max(f64::MIN_POSITIVE);
        // the direct operator has the eigenvalue -η^d|T| on constants, so its
        // solve carries errors near ε·cond; only larger gaps are failures
        let floor = CONDITION_SLACK * f64::EPSILON * direct.cond;
        if direct_deviation > SOLVE_AGREEMENT.max(floor) {
            return Err(Error::Consistency(format!(
                "projected and direct cell solves differ by {direct_deviation:.3e} (k = {k})"
            )));
        }
        let mut a_t_ek = Point::zeros();
        for q in 0..d {
            a_t_ek[q] = ctx.cap.a_t[(q, k)];
        }
        let r_tilde = cs[k] - a_t_ek;
        let absorbed = -g_mean * (eta.powi(d as i32) * ctx.volume);
        out.push(CellCorrector {
            ctx: ctx.clone(),
            k,
            g,
            g_tilde,
            g_mean,
            r_tilde,
            r: r_tilde + absorbed,
            a_t_ek,
            absorbed,
            multiplier,
            direct_deviation,
            direct_cond: direct.cond,
        });
    }
    Ok(out)
}

/// Corrector for one direction.
pub fn solve_cell(mesh: &BoundaryMesh, eta: f64, k: usize, cap: &CapacityResult) -> Result<CellCorrector> {
    if k >= mesh.dim {
        return Err(Error::Parameter(format!("direction {k} out of range for d = {}", mesh.dim)));
    }
    let ctx = Arc::new(CellContext::new(mesh, cap, eta)?);
    Ok(solve_cells(ctx)?.swap_remove(k))
}

/// `(χ, ω)` at one point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CellValue {
    pub chi: Point,
    pub omega: f64,
    /// `D^η[g̃]` and `P^η[g̃]`.
    pub d_part: Point,
    pub p_part: f64,
    /// `G^η_k` and `P^η_k`.
    pub green: Point,
    pub green_p: f64,
}

/// Point evaluator of a corrector.
pub struct CellField<'a> {
    corr: &'a CellCorrector,
    samples: SourceSamples,
    interp: DensityInterp,
    rem: RemainderSum,
    near_dist: f64,
    constant: Point,
}

impl<'a> CellField<'a> {
    pub fn new(corr: &'a CellCorrector) -> Result<Self> {
        let mesh = &corr.ctx.mesh;
        let d = mesh.dim;
        let vals = &corr.g_tilde.values;
        let samples = SourceSamples::from_mesh(mesh, vals);
        let src = LayerSources {
            y: mesh.nodes.clone(),
            n: mesh.normals.clone(),
            w: mesh.weights.clone(),
            phi: (0..mesh.len()).map(|i| corr.g_tilde.at(i)).collect(),
            sigma: vec![Point::zeros(); mesh.len()],
        };
        let h = match d {
            2 => mesh.measure() / mesh.len() as f64,
            _ => (mesh.measure() / mesh.len() as f64).sqrt(),
        };
        Ok(Self {
            corr,
            samples,
            interp: DensityInterp::new(mesh, vals, d),
            rem: RemainderSum::new(d, corr.ctx.eta(), &src)?,
            near_dist: 8.0 * h,
            constant: corr.a_t_ek + corr.r,
        })
    }

    pub fn dim(&self) -> usize {
        self.corr.ctx.dim()
    }

    pub fn corrector(&self) -> &CellCorrector {
        self.corr
    }

    fn node_distance(&self, x: &Point) -> f64 {
        self.corr
            .ctx
            .mesh
            .nodes
            .iter()
            .map(|y| (x - y).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Values at `x`; zero inside the hole.
    pub fn eval(&self, x: &Point) -> Result<CellValue> {
        let ctx = &self.corr.ctx;
        let d = ctx.dim();
        let k = self.corr.k;
        let x = ctx.torus.wrap(x);
        if ctx.mesh.shape.contains(&x) {
            return Ok(CellValue::default());
        }
        let gv = ctx.torus.eval(&x)?;
        let (dv, pv) = if self.node_distance(&x) < self.near_dist {
            let s = near_samples(&ctx.mesh, &self.interp, &x);
            (
                field_from_samples(d, FieldKind::D, &x, &s).vector(),
                field_from_samples(d, FieldKind::P, &x, &s).scalar(),
            )
        } else {
            (
                field_from_samples(d, FieldKind::D, &x, &self.samples).vector(),
                field_from_samples(d, FieldKind::P, &x, &self.samples).scalar(),
            )
        };
        let rf = self.rem.eval(&x);
        let d_part = dv + rf.d;
        let p_part = pv + rf.p;
        let green = gv.g.column(k).into_owned();
        Ok(CellValue {
            chi: green + self.constant + d_part,
            omega: gv.p[k] + p_part,
            d_part,
            p_part,
            green,
            green_p: gv.p[k],
        })
    }

    /// `∇χ` by central differences with step `h`; `m[(i, l)] = ∂_l χ^i`.
    pub fn grad_chi(&self, x: &Point, h: f64) -> Result<kernels::Mat> {
        let d = self.corr.ctx.dim();
        let mut m = kernels::Mat::zeros();
        for l in 0..d {
            let mut e = Point::zeros();
            e[l] = h;
            let a = self.eval(&(x + e))?.chi;
            let b = self.eval(&(x - e))?.chi;
            let c = (a - b) / (2.0 * h);
            for i in 0..d {
                m[(i, l)] = c[i];
            }
        }
        Ok(m)
    }

    /// Largest `|χ|` over boundary nodes, from traces extrapolated along the
    /// normal; `stride` subsamples the nodes.
    pub fn boundary_residual(&self, stride: usize) -> Result<f64> {
        let mesh = &self.corr.ctx.mesh;
        let steps = &RICHARDSON_STEPS_EXTENDED;
        let idx: Vec<usize> = (0..mesh.len()).step_by(stride.max(1)).collect();
        let vals = idx
            .par_iter()
            .map(|&i| {
                let v = steps
                    .iter()
                    .map(|&t| Ok(self.eval(&(mesh.nodes[i] + mesh.normals[i] * t))?.chi))
                    .collect::<Result<Vec<_>>>()?;
                Ok(extrapolate(steps, &v).amax())
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(vals.into_iter().fold(0.0, f64::max))
    }
}

/// Corrector values at the nodes of a fluid volume rule.
pub struct FluidSamples {
    pub rule: VolumeRule,
    pub values: Vec<CellValue>,
}

impl FluidSamples {
    pub fn new(field: &CellField, rule: VolumeRule) -> Result<Self> {
        let values = rule
            .points
            .par_iter()
            .map(|x| field.eval(x))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { rule, values })
    }

    /// `Σ w f(value)`.
    pub fn integrate<T>(&self, f: impl Fn(&CellValue) -> T) -> T
    where
        T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
    {
        self.values
            .iter()
            .zip(&self.rule.weights)
            .fold(T::default(), |acc, (v, &w)| acc + f(v) * w)
    }
}

/// Torus averages of a corrector and their cross-checks.
#[derive(Clone, Debug)]
pub struct CellAverages {
    /// `⟨χ^η_k⟩` over `η⁻¹𝕋^d`.
    pub chi: Point,
    pub omega: f64,
    /// `⟨χ^η_k⟩ - A_T e_k`.
    pub chi_minus_ate: Point,
    /// `∫ D^η[g̃]` over the fluid by volume quadrature.
    pub d_integral: Point,
    /// The same integral reduced to a double boundary integral.
    pub d_integral_boundary: Point,
    /// `∫ G^η_k` over the fluid, from the mean-zero property.
    pub green_integral: Point,
    /// The same integral by volume quadrature.
    pub green_integral_volume: Point,
    /// `∫ P^η[g̃]` over the fluid by volume quadrature.
    pub p_integral: f64,
    /// `∫ P^η_k` over the fluid, from the mean-zero property.
    pub green_p_integral: f64,
    /// Fluid volume from the rule and `L^d - |T|`.
    pub fluid_volume_rule: f64,
    pub fluid_volume: f64,
}

/// `∫_T G^η_k` and `∫_T P^η_k`, splitting off the homogeneous free parts.
pub fn hole_integrals(corr: &CellCorrector, opts: &VolumeOptions) -> Result<(Point, f64)> {
    let ctx = &corr.ctx;
    let mesh = &ctx.mesh;
    let d = ctx.dim();
    let k = corr.k;
    // ∫_T f = ∫_∂T (x·N) F(x), F(x) = ∫_0^1 f(tx) t^{d-1} dt
    let mut gi = Point::zeros();
    let mut pi = 0.0;
    for i in 0..mesh.len() {
        let x = mesh.nodes[i];
        let w = mesh.weights[i] * x.dot(&mesh.normals[i]);
        let mut f = kernels::stokeslet_raw(d, &x) * 0.5;
        if d == 2 {
            for a in 0..2 {
                f[(a, a)] -= 1.0 / (16.0 * PI);
            }
        }
        gi += f.column(k) * w;
        pi += kernels::pressurelet_raw(d, &x)[k] * w;
    }
    let rule = hole_rule(mesh, opts)?;
    for (x, w) in rule.points.iter().zip(&rule.weights) {
        let r = ctx.torus.remainder(x);
        gi += r.g.column(k) * *w;
        pi += r.p[k] * w;
    }
    Ok((gi, pi))
}

/// `∫ D^η[g̃]` over the fluid as `∫∫ [G^η_Δ(x-y) N^k_x N_y·g̃ + N_x·N_y G^η(x-y) g̃]`.
pub fn d_integral_boundary(corr: &CellCorrector) -> Point {
    let ctx = &corr.ctx;
    let mesh = &ctx.mesh;
    let d = ctx.dim();
    let n = mesh.len();
    let ops = nystrom::assemble(
        mesh,
        OpSet {
            s: true,
            s_lap: true,
            ..Default::default()
        },
    );
    let s = ops.s.unwrap();
    let s_lap = ops.s_lap.unwrap();
    let g = &corr.g_tilde;
    // Laplace part: G^η_Δ = -Γ_Δ + remainder
    let ng = DVector::from_fn(n, |j, _| mesh.normals[j].dot(&g.at(j)));
    let mut lap = -(&s_lap * &ng);
    // Stokes part, one normal component a at a time
    let mut out = Point::zeros();
    for i in 0..n {
        for j in 0..n {
            lap[i] += ctx.pairs.get(i, j).lap * ng[j] * mesh.weights[j];
        }
    }
    for i in 0..n {
        out += mesh.normals[i] * (lap[i] * mesh.weights[i]);
    }
    for a in 0..d {
        let psi = Density::from_fn(mesh, |j, _| g.at(j) * mesh.normals[j][a]);
        let mut v = Density::from_vector(d, &s * &psi.values);
        for i in 0..n {
            let mut acc = Point::zeros();
            for j in 0..n {
                acc += ctx.pairs.get(i, j).g * psi.at(j) * mesh.weights[j];
            }
            for c in 0..d {
                v.values[i * d + c] += acc[c];
            }
        }
        for i in 0..n {
            out += v.at(i) * (mesh.normals[i][a] * mesh.weights[i]);
        }
    }
    out
}

/// Averages of `χ` and `ω` over the torus.
pub fn corrector_average(corr: &CellCorrector, samples: &FluidSamples, opts: &VolumeOptions) -> Result<CellAverages> {
    let ctx = &corr.ctx;
    let d = ctx.dim() as i32;
    let eta = ctx.eta();
    let fluid_volume = eta.powi(-d) - ctx.volume;
    let (gt, pt) = hole_integrals(corr, opts)?;
    let green_integral = -gt;
    let green_p_integral = -pt;
    let d_integral = samples.integrate(|v| v.d_part);
    let p_integral = samples.integrate(|v| v.p_part);
    let constant = corr.a_t_ek + corr.r;
    let chi_int = green_integral + constant * fluid_volume + d_integral;
    let omega_int = green_p_integral + p_integral;
    let chi = chi_int * eta.powi(d);
    Ok(CellAverages {
        chi,
        omega: omega_int * eta.powi(d),
        chi_minus_ate: chi - corr.a_t_ek,
        d_integral,
        d_integral_boundary: d_integral_boundary(corr),
        green_integral,
        green_integral_volume: samples.integrate(|v| v.green),
        p_integral,
        green_p_integral,
        fluid_volume_rule: samples.rule.total(),
        fluid_volume,
    })
}

/// `‖∇χ^η_k‖²` over the torus from `∫|∇χ|² = η^d ∫ χ^k`.
pub fn corrector_energy(corr: &CellCorrector, avg: &CellAverages) -> f64 {
    avg.chi[corr.k]
}

/// `‖∇χ^η_k‖²` by volume quadrature of finite-difference gradients.
pub fn corrector_energy_direct(field: &CellField, rule: &VolumeRule, h: f64) -> Result<f64> {
    let parts = rule
        .points
        .par_iter()
        .zip(&rule.weights)
        .map(|(x, w)| Ok(field.grad_chi(x, h)?.norm_squared() * w))
        .collect::<Result<Vec<f64>>>()?;
    Ok(parts.iter().sum())
}

/// `‖ω - ⟨ω⟩‖` over the torus, with `ω = 0` in `T`.
pub fn pressure_fluctuation(corr: &CellCorrector, samples: &FluidSamples, mean: f64) -> f64 {
    let inside = corr.ctx.volume * mean * mean;
    (samples.integrate(|v| (v.omega - mean).powi(2)) + inside).sqrt()
}

/// One line of the cell results table.
#[derive(Clone, Debug, Serialize)]
pub struct CellRow {
    pub d: usize,
    pub eta: f64,
    pub k: usize,
    #[serde(rename = "avg_chi_minus_ATek")]
    pub avg_chi_minus_ate: f64,
    pub avg_omega: f64,
    pub grad_norm: f64,
    pub g_mean: f64,
    pub g_fluct_norm: f64,
    pub boundary_residual: f64,
}

/// Column order of [`CellRow`].
pub const CELL_CSV_HEADER: &str = "d,eta,k,avg_chi_minus_ATek,avg_omega,grad_norm,g_mean,g_fluct_norm,boundary_residual";

impl CellRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.3e}",
            self.d,
            self.eta,
            self.k + 1,
            self.avg_chi_minus_ate,
            self.avg_omega,
            self.grad_norm,
            self.g_mean,
            self.g_fluct_norm,
            self.boundary_residual
        )
    }
}

/// Everything computed for one corrector.
pub struct CellReport {
    pub averages: CellAverages,
    pub energy: f64,
    pub pressure_fluctuation: f64,
    pub boundary_residual: f64,
    pub samples: FluidSamples,
}

impl CellReport {
    pub fn row(&self, corr: &CellCorrector) -> CellRow {
        CellRow {
            d: corr.ctx.dim(),
            eta: corr.ctx.eta(),
            k: corr.k,
            avg_chi_minus_ate: self.averages.chi_minus_ate.norm(),
            avg_omega: self.averages.omega,
            grad_norm: self.energy.max(0.0).sqrt(),
            g_mean: corr.g_mean.norm(),
            g_fluct_norm: corr.g_tilde.l2_norm(&corr.ctx.mesh),
            boundary_residual: self.boundary_residual,
        }
    }
}

/// Samples, averages, energy and boundary residual of a corrector.
/// `stride` subsamples boundary nodes for the residual.
pub fn analyse(corr: &CellCorrector, opts: &VolumeOptions, stride: usize) -> Result<CellReport> {
    let field = CellField::new(corr)?;
    let rule = fluid_rule(&corr.ctx.mesh, corr.ctx.eta(), opts)?;
    let samples = FluidSamples::new(&field, rule)?;
    let averages = corrector_average(corr, &samples, opts)?;
    let energy = corrector_energy(corr, &averages);
    let pf = pressure_fluctuation(corr, &samples, averages.omega);
    let boundary_residual = field.boundary_residual(stride)?;
    Ok(CellReport {
        averages,
        energy,
        pressure_fluctuation: pf,
        boundary_residual,
        samples,
    })
}
