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


//! Two-scale fields, regime classification and effective coefficients.
//!
//! With `f = 1` for `d = 3` and `f = |log η|⁻¹` for `d = 2`,
//!
//! ```text
//! v(x) = f χ(x / εη),    q(x) = f (εη)⁻¹ ω(x / εη),
//! ```
//!
//! and `-Δv + ∇q = σ_ε⁻² e_k`. Per-cell norms are reported for a single
//! `ε`-cube; Ω-level norms follow by counting `ε^{-d}` cells.

use crate::capacity::{rows, CapacityResult};
use crate::cell::{CellCorrector, CellField, CellReport};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::kernels::Mat;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};
use std::f64::consts::PI;

/// `σ_ε` band labelled critical.
pub const CRITICAL_BAND: (f64, f64) = (1.0 / 3.0, 3.0);

/// Finite-difference step for `∇χ` in cell coordinates.
pub const GRAD_STEP: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    #[serde(rename = "critical")]
    Critical,
    #[serde(rename = "dilute-super-critical")]
    SuperCritical,
    #[serde(rename = "sub-critical")]
    SubCritical,
    /// `η = 1`: holes comparable to the cell.
    #[serde(rename = "classical")]
    Classical,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::Critical => "critical",
            Regime::SuperCritical => "dilute-super-critical",
            Regime::SubCritical => "sub-critical",
            Regime::Classical => "classical",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RegimeParams {
    pub dim: usize,
    pub eps: f64,
    pub eta: f64,
    pub sigma_eps: f64,
    pub kappa_eta: f64,
    pub regime: Regime,
}

fn check_params(dim: usize, eps: f64, eta: f64) -> Result<()> {
    if dim != 2 && dim != 3 {
        return Err(Error::Dimension(format!("dimension {dim} is not supported")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Parameter(format!("eps = {eps} must lie in (0, 1)")));
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::Parameter(format!("eta = {eta} must lie in (0, 1]")));
    }
    if dim == 2 && eta >= 1.0 {
        return Err(Error::Parameter("eta must be below 1 in two dimensions".into()));
    }
    Ok(())
}

/// `σ_ε = ε |log η|^{1/2}` (d = 2), `ε η^{-(d-2)/2}` (d = 3).
pub fn sigma_eps(dim: usize, eps: f64, eta: f64) -> Result<f64> {
    check_params(dim, eps, eta)?;
    Ok(match dim {
        2 => eps * eta.ln().abs().sqrt(),
        _ => eps * eta.powf(-0.5 * (dim as f64 - 2.0)),
    })
}

pub fn classify(dim: usize, eps: f64, eta: f64) -> Result<RegimeParams> {
    let sigma = sigma_eps(dim, eps, eta)?;
    let regime = if eta == 1.0 {
        Regime::Classical
    } else if sigma < CRITICAL_BAND.0 {
        Regime::SuperCritical
    } else if sigma > CRITICAL_BAND.1 {
        Regime::SubCritical
    } else {
        Regime::Critical
    };
    Ok(RegimeParams {
        dim,
        eps,
        eta,
        sigma_eps: sigma,
        kappa_eta: eps / sigma,
        regime,
    })
}

/// Effective model descriptor.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EffectiveModel {
    pub model: String,
    /// Darcy: `M`; Brinkman: the zeroth-order coefficient `M / σ₀²`.
    #[serde(rename = "M")]
    pub m: Option<Vec<Vec<f64>>>,
    pub sigma_eps: f64,
    pub kappa_eta: f64,
    pub regime: Regime,
}

/// Darcy for super-critical, Brinkman for critical, Stokes for sub-critical.
/// The classical regime has no coefficient computable from `A_T`.
pub fn effective_coefficients(cap: &CapacityResult, params: &RegimeParams) -> Result<EffectiveModel> {
    if cap.dim != params.dim {
        return Err(Error::Dimension(format!(
            "capacity is for d = {}, regime for d = {}",
            cap.dim, params.dim
        )));
    }
    let (model, m) = match params.regime {
        Regime::SuperCritical => ("darcy", Some(rows(&cap.m))),
        Regime::Critical => {
            let s2 = params.sigma_eps * params.sigma_eps;
            ("brinkman", Some(rows(&cap.m.map(|v| v / s2))))
        }
        Regime::SubCritical => ("stokes", None),
        Regime::Classical => ("classical", None),
    };
    Ok(EffectiveModel {
        model: model.into(),
        m,
        sigma_eps: params.sigma_eps,
        kappa_eta: params.kappa_eta,
        regime: params.regime,
    })
}

/// `f`: 1 for d = 3, `|log η|⁻¹` for d = 2.
pub fn log_factor(dim: usize, eta: f64) -> f64 {
    if dim == 2 {
        1.0 / eta.ln().abs()
    } else {
        1.0
    }
}

/// `M⁻¹ e_k`: `A_T e_k` for d = 3, `e_k / 4π` for d = 2.
pub fn limit_velocity(corr: &CellCorrector) -> Point {
    if corr.ctx.dim() == 2 {
        let mut e = Point::zeros();
        e[corr.k] = 1.0 / (4.0 * PI);
        e
    } else {
        corr.a_t_ek
    }
}

/// `(v, q)` built from a corrector.
pub struct TwoScaleField<'a> {
    pub field: CellField<'a>,
    pub eps: f64,
    pub eta: f64,
    factor: f64,
}

impl<'a> TwoScaleField<'a> {
    pub fn new(corr: &'a CellCorrector, eps: f64) -> Result<Self> {
        let eta = corr.ctx.eta();
        check_params(corr.ctx.dim(), eps, eta)?;
        Ok(Self {
            field: CellField::new(corr)?,
            eps,
            eta,
            factor: log_factor(corr.ctx.dim(), eta),
        })
    }

    fn scale(&self) -> f64 {
        self.eps * self.eta
    }

    pub fn v(&self, x: &Point) -> Result<Point> {
        Ok(self.field.eval(&(x / self.scale()))?.chi * self.factor)
    }

    pub fn q(&self, x: &Point) -> Result<f64> {
        Ok(self.field.eval(&(x / self.scale()))?.omega * self.factor / self.scale())
    }

    /// `∇v` from `∇χ`; `m[(i, l)] = ∂_l v^i`.
    pub fn grad_v(&self, x: &Point) -> Result<Mat> {
        Ok(self.field.grad_chi(&(x / self.scale()), GRAD_STEP)? * (self.factor / self.scale()))
    }
}

/// Per-cell mean `(|εQ|⁻¹ ∫ |v - M⁻¹e_k|^p)^{1/p}`, with `v = 0` in the hole;
/// `p = 6` for d = 3 and `p = 2` for d = 2.
pub fn lp_deviation(corr: &CellCorrector, report: &CellReport) -> f64 {
    let d = corr.ctx.dim();
    let p = if d == 2 { 2.0 } else { 2.0 * d as f64 / (d as f64 - 2.0) };
    let f = log_factor(d, corr.ctx.eta());
    let target = limit_velocity(corr);
    let fluid = report.samples.integrate(|v| (v.chi * f - target).norm().powf(p));
    let hole = corr.ctx.volume * target.norm().powf(p);
    (corr.ctx.eta().powi(d as i32) * (fluid + hole)).powf(1.0 / p)
}

/// `‖∇v‖_{L²(εQ)}` from the corrector energy: `f (εη)^{(d-2)/2} ‖∇χ‖`.
pub fn gradient_per_cell(dim: usize, eps: f64, eta: f64, energy: f64) -> f64 {
    log_factor(dim, eta) * (eps * eta).powf(0.5 * (dim as f64 - 2.0)) * energy.max(0.0).sqrt()
}

/// `‖∇v‖_{L²(εQ)}` by quadrature of `|∇v|²` at the rescaled rule points.
pub fn gradient_per_cell_direct(two: &TwoScaleField, report: &CellReport) -> Result<f64> {
    let rule = &report.samples.rule;
    let s = two.scale();
    let d = two.field.dim();
    let parts = rule
        .points
        .par_iter()
        .zip(&rule.weights)
        .map(|(y, w)| Ok(two.grad_v(&(y * s))?.norm_squared() * w * s.powi(d as i32)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(parts.iter().sum::<f64>().sqrt())
}

/// `(‖q - ⟨q⟩‖_{L²(εQ)}, ⟨q⟩)` for one cell.
pub fn pressure_per_cell(dim: usize, eps: f64, eta: f64, report: &CellReport) -> (f64, f64) {
    let s = eps * eta;
    let f = log_factor(dim, eta);
    (
        f * s.powf(0.5 * (dim as f64 - 2.0)) * report.pressure_fluctuation,
        f * report.averages.omega / s,
    )
}

/// `W[(i, l)] = ∫_Ω ∂_l v^i φ` on `Ω = (0, 1)^d` tiled by `1/ε` cells per axis,
/// for a test function `φ` vanishing to first order on `∂Ω`; computed as
/// `-∫ v^i ∂_l φ` with the fluid samples of `report` repeated in every cell.
pub fn weak_pairing(
    corr: &CellCorrector,
    report: &CellReport,
    eps: f64,
    grad_phi: impl Fn(&Point) -> Point + Sync,
) -> Result<Mat> {
    let d = corr.ctx.dim();
    let eta = corr.ctx.eta();
    check_params(d, eps, eta)?;
    let cells = (1.0 / eps).round();
    if (cells * eps - 1.0).abs() > 1e-12 {
        return Err(Error::Parameter(format!("1/eps = {} is not an integer", 1.0 / eps)));
    }
    let n = cells as usize;
    let s = eps * eta;
    let f = log_factor(d, eta);
    let rule = &report.samples.rule;
    let vol = s.powi(d as i32);
    let parts: Vec<Mat> = (0..n.pow(d as u32))
        .into_par_iter()
        .map(|idx| {
            let mut c = Point::zeros();
            let mut r = idx;
            for a in 0..d {
                c[a] = eps * ((r % n) as f64 + 0.5);
                r /= n;
            }
            let mut m = Mat::zeros();
            for ((y, w), v) in rule.points.iter().zip(&rule.weights).zip(&report.samples.values) {
                m -= v.chi * grad_phi(&(c + y * s)).transpose() * (f * w * vol);
            }
            m
        })
        .collect();
    Ok(parts.into_iter().fold(Mat::zeros(), |a, b| a + b))
}

/// Maxima of `|∇v| + |q|` over the faces `x_a = ±ε/2` of one cell.
#[derive(Clone, Debug, Serialize)]
pub struct StressTrace {
    /// `(axis, sign, max)` per face.
    pub faces: Vec<(usize, i8, f64)>,
    pub max: f64,
}

/// Samples an `m^{d-1}` midpoint grid on every face.
pub fn stress_trace(two: &TwoScaleField, m: usize) -> Result<StressTrace> {
    let d = two.field.dim();
    let half = 0.5 * two.eps;
    let grid: Vec<f64> = (0..m).map(|i| -half + two.eps * (i as f64 + 0.5) / m as f64).collect();
    let mut faces = Vec::new();
    for axis in 0..d {
        for sign in [-1i8, 1] {
            let mut pts = Vec::new();
            let others: Vec<usize> = (0..d).filter(|&a| a != axis).collect();
            let count = m.pow(d as u32 - 1);
            for idx in 0..count {
                let mut x = Point::zeros();
                x[axis] = sign as f64 * half;
                let mut r = idx;
                for &o in &others {
                    x[o] = grid[r % m];
                    r /= m;
                }
                pts.push(x);
            }
            let vals = pts
                .par_iter()
                .map(|x| Ok(two.grad_v(x)?.norm() + two.q(x)?.abs()))
                .collect::<Result<Vec<f64>>>()?;
            faces.push((axis, sign, vals.into_iter().fold(0.0, f64::max)));
        }
    }
    let max = faces.iter().map(|f| f.2).fold(0.0, f64::max);
    Ok(StressTrace { faces, max })
}

/// Least-squares fit of `log y = s log x + c`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    /// Half-width of the 95% confidence interval on the slope; infinite for
    /// two points.
    pub half_width: f64,
}

impl SlopeFit {
    pub fn within(&self, target: f64, window: f64) -> bool {
        (self.slope - target).abs() <= window
    }
}

pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Parameter("a slope fit needs at least two paired values".into()));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::Parameter("log-log fit needs positive finite values".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Parameter("slope fit over a single abscissa".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let dof = lx.len() - 2;
    let (stderr, half_width) = if dof == 0 {
        (0.0, f64::INFINITY)
    } else {
        let rss: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
        let se = (rss / dof as f64 / sxx).sqrt();
        let t = StudentsT::new(0.0, 1.0, dof as f64)
            .map_err(|e| Error::Parameter(e.to_string()))?
            .inverse_cdf(0.975);
        (se, t * se)
    };
    Ok(SlopeFit {
        slope,
        intercept,
        stderr,
        half_width,
    })
}

/// `values[i] / model(x[i])` and its relative spread `max/min - 1`.
#[derive(Clone, Debug, Serialize)]
pub struct RatioTest {
    pub ratios: Vec<f64>,
    pub spread: f64,
}

impl RatioTest {
    pub fn new(xs: &[f64], values: &[f64], model: impl Fn(f64) -> f64) -> Self {
        let ratios: Vec<f64> = xs.iter().zip(values).map(|(&x, &v)| v / model(x)).collect();
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self { ratios, spread: hi / lo - 1.0 }
    }

    pub fn within(&self, tol: f64) -> bool {
        self.spread.is_finite() && self.spread <= tol
    }
}

/// One line of the rate tables.
#[derive(Clone, Debug, Serialize)]
pub struct RateRow {
    pub d: usize,
    pub eta: f64,
    pub eps: f64,
    pub k: usize,
    pub sigma_eps: f64,
    pub kappa_eta: f64,
    pub lp_deviation: f64,
    pub grad_chi: f64,
    pub grad_cell: f64,
    pub q_fluct: f64,
    pub q_mean: f64,
    pub stress_max: f64,
    pub avg_chi_minus_ate: f64,
    pub r_norm: f64,
}

pub const RATE_CSV_HEADER: &str =
    "d,eta,eps,k,sigma_eps,kappa_eta,lp_deviation,grad_chi,grad_cell,q_fluct,q_mean,stress_max,avg_chi_minus_ATek,r_norm";

impl RateRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e}",
            self.d,
            self.eta,
            self.eps,
            self.k + 1,
            self.sigma_eps,
            self.kappa_eta,
            self.lp_deviation,
            self.grad_chi,
            self.grad_cell,
            self.q_fluct,
            self.q_mean,
            self.stress_max,
            self.avg_chi_minus_ate,
            self.r_norm
        )
    }
}

/// All per-cell rate quantities of one corrector; `face_grid` points per
/// face edge for the stress trace.
pub fn rate_row(corr: &CellCorrector, report: &CellReport, eps: f64, face_grid: usize) -> Result<RateRow> {
    let d = corr.ctx.dim();
    let eta = corr.ctx.eta();
    let params = classify(d, eps, eta)?;
    let two = TwoScaleField::new(corr, eps)?;
    let (q_fluct, q_mean) = pressure_per_cell(d, eps, eta, report);
    Ok(RateRow {
        d,
        eta,
        eps,
        k: corr.k,
        sigma_eps: params.sigma_eps,
        kappa_eta: params.kappa_eta,
        lp_deviation: lp_deviation(corr, report),
        grad_chi: report.energy.max(0.0).sqrt(),
        grad_cell: gradient_per_cell(d, eps, eta, report.energy),
        q_fluct,
        q_mean,
        stress_max: stress_trace(&two, face_grid)?.max,
        avg_chi_minus_ate: report.averages.chi_minus_ate.norm(),
        r_norm: corr.r.norm(),
    })
}
