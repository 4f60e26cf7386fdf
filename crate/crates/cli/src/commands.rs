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


use crate::{Common, RegimeArgs, SelftestArgs, ShapeArgs, SweepArgs};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;
use stokescell::capacity::{solve_kernel_basis, CapacityResult};
use stokescell::cell::{analyse, solve_cells, CellContext, CellCorrector, CellReport, VolumeOptions, CELL_CSV_HEADER};
use stokescell::nystrom::{verify_jumps, Density, RICHARDSON_STEPS_EXTENDED};
use stokescell::periodic::green_selftest as selftest;
use stokescell::rescale::{self, classify, effective_coefficients, fit_loglog, RateRow, RatioTest, RATE_CSV_HEADER};
use stokescell::{build_mesh, BoundaryMesh, MeshSize, Point, ShapeSpec};

pub enum Failure {
    Input(String),
    Invariant(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Invariant(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Invariant(m) => m,
        }
    }
}

impl From<stokescell::Error> for Failure {
    fn from(e: stokescell::Error) -> Self {
        use stokescell::Error::*;
        match e {
            InvalidShape(_) | Containment { .. } | MeshSize(_) | Dimension(_) | Parameter(_) => Failure::Input(e.to_string()),
            Singular | SingularMatrix { .. } | Consistency(_) => Failure::Invariant(e.to_string()),
        }
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn read_shape(path: &Path) -> Res<ShapeSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn mesh_size(n: &Option<String>, dim: usize) -> Res<MeshSize> {
    match n {
        Some(s) => Ok(s.parse()?),
        None => Ok(MeshSize::default_for(dim)),
    }
}

fn load(a: &ShapeArgs) -> Res<(ShapeSpec, BoundaryMesh)> {
    let spec = read_shape(&a.shape)?;
    let mesh = build_mesh(&spec, mesh_size(&a.n, spec.dim)?)?;
    Ok((spec, mesh))
}

fn tolerance(c: &Common, default: f64) -> Res<f64> {
    match c.tol {
        Some(t) if !(t > 0.0 && t.is_finite()) => Err(Failure::Input(format!("--tol must be positive, got {t}"))),
        Some(t) => Ok(t),
        None => Ok(default),
    }
}

/// Writes `name` under `--out`, or prints it when no directory is given.
fn emit(c: &Common, name: &str, content: &str) -> Res<()> {
    match &c.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("cannot create {}: {e}", dir.display())))?;
            let path = dir.join(name);
            std::fs::write(&path, content).map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))?;
            println!("wrote {}", path.display());
        }
        None => print!("{content}"),
    }
    Ok(())
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn coarser(n: MeshSize) -> MeshSize {
    let even = |v: usize| (v / 2).max(6) & !1;
    match n {
        MeshSize::Curve(m) => MeshSize::Curve(even(m).max(16)),
        MeshSize::Sphere(a, b) => MeshSize::Sphere(even(a), even(b)),
    }
}

pub fn capacity(a: &ShapeArgs) -> Res<()> {
    let tol = tolerance(&a.common, 1e-8)?;
    let (spec, mesh) = load(a)?;
    let size = mesh_size(&a.n, spec.dim)?;
    let cap = solve_kernel_basis(&mesh)?;
    let coarse = solve_kernel_basis(&build_mesh(&spec, coarser(size))?)?;
    let mut table = String::from("n,A_T_change,asymmetry,det_A_T,min_eigenvalue\n");
    for (n, c) in [(coarser(size), &coarse), (size, &cap)] {
        let change = (&c.a_t - &cap.a_t).amax();
        let n = match n {
            MeshSize::Curve(m) => m.to_string(),
            MeshSize::Sphere(p, q) => format!("{p}x{q}"),
        };
        let _ = writeln!(table, "{n},{change:.3e},{:.3e},{:.10e},{:.10e}", c.asymmetry(), c.det_a_t(), c.eigenvalues()[0]);
    }
    emit(&a.common, "capacity.json", &json(&cap.summary()))?;
    emit(&a.common, "capacity_convergence.csv", &table)?;
    check_capacity(&cap, tol)
}

fn check_capacity(cap: &CapacityResult, tol: f64) -> Res<()> {
    if cap.asymmetry() > tol {
        return Err(Failure::Invariant(format!("A_T asymmetry {:.3e} exceeds {tol:e}", cap.asymmetry())));
    }
    if cap.dim == 3 && cap.eigenvalues()[0] <= 0.0 {
        return Err(Failure::Invariant("A_T is not positive definite".into()));
    }
    Ok(())
}

fn etas(a: &SweepArgs, dim: usize) -> Res<Vec<f64>> {
    let v = a.etas.clone().unwrap_or_else(|| {
        if dim == 3 {
            vec![0.2, 0.1, 0.05]
        } else {
            vec![1e-2, 1e-3, 1e-4]
        }
    });
    if v.is_empty() || v.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
        return Err(Failure::Input(format!("eta values must lie in (0, 1), got {v:?}")));
    }
    Ok(v)
}

fn sweep_mesh(a: &SweepArgs) -> Res<(ShapeSpec, BoundaryMesh)> {
    let (spec, mesh) = load(&a.shape)?;
    if let Some(d) = a.dim {
        if d != spec.dim {
            return Err(Failure::Input(format!("--dim {d} does not match the {}D shape", spec.dim)));
        }
    }
    Ok((spec, mesh))
}

fn directions(a: &SweepArgs, dim: usize) -> Res<Vec<usize>> {
    match a.k {
        Some(k) if k == 0 || k > dim => Err(Failure::Input(format!("--k must lie in 1..={dim}"))),
        Some(k) => Ok(vec![k - 1]),
        None => Ok((0..dim).collect()),
    }
}

/// Correctors and reports for every η and the selected directions.
fn solve_sweep(mesh: &BoundaryMesh, etas: &[f64], ks: &[usize]) -> Res<Vec<(CellCorrector, CellReport)>> {
    let cap = solve_kernel_basis(mesh)?;
    let opts = VolumeOptions::default_for(mesh.dim);
    let stride = if mesh.dim == 3 { 8 } else { 2 };
    let mut out = Vec::new();
    for &eta in etas {
        let ctx = Arc::new(CellContext::new(mesh, &cap, eta)?);
        for c in solve_cells(ctx)? {
            if ks.contains(&c.k) {
                let rep = analyse(&c, &opts, stride)?;
                out.push((c, rep));
            }
        }
    }
    Ok(out)
}

pub fn cell(a: &SweepArgs) -> Res<()> {
    let tol = tolerance(&a.shape.common, 1e-6)?;
    let (_, mesh) = sweep_mesh(a)?;
    let etas = etas(a, mesh.dim)?;
    let ks = directions(a, mesh.dim)?;
    let results = solve_sweep(&mesh, &etas, &ks)?;
    let mut csv = format!("{CELL_CSV_HEADER}\n");
    let mut worst: f64 = 0.0;
    for (c, rep) in &results {
        csv += &rep.row(c).csv();
        csv.push('\n');
        worst = worst.max(rep.boundary_residual);
    }
    emit(&a.shape.common, "cell.csv", &csv)?;
    if worst > tol {
        return Err(Failure::Invariant(format!("boundary residual {worst:.3e} exceeds {tol:e}")));
    }
    Ok(())
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    value: f64,
    target: String,
    /// `None` when the quantity cannot be measured, e.g. zero by symmetry.
    pass: Option<bool>,
}

#[derive(Serialize)]
struct RateSummary {
    dim: usize,
    eps: f64,
    etas: Vec<f64>,
    checks: Vec<Check>,
}

fn slope_check(name: &'static str, etas: &[f64], ys: &[f64], target: f64, window: f64) -> Check {
    match fit_loglog(etas, ys) {
        Ok(f) => Check { name, value: f.slope, target: format!("slope {target} ± {window}"), pass: Some(f.within(target, window)) },
        Err(_) => Check { name, value: f64::NAN, target: format!("slope {target} ± {window}"), pass: None },
    }
}

fn rate_checks(dim: usize, etas: &[f64], rows: &[RateRow]) -> Vec<Check> {
    let col = |f: fn(&RateRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let mut checks = Vec::new();
    if dim == 3 {
        checks.push(slope_check("lp_deviation", etas, &col(|r| r.lp_deviation), 0.5, 0.2));
        checks.push(slope_check("q_fluct", etas, &col(|r| r.q_fluct), 0.5, 0.2));
        checks.push(slope_check("stress_max", etas, &col(|r| r.stress_max), 1.0, 0.3));
        checks.push(slope_check("avg_chi_minus_ATek", etas, &col(|r| r.avg_chi_minus_ate), 1.0, 0.3));
        let qm: Vec<f64> = col(|r| r.q_mean.abs());
        let scale = col(|r| r.q_fluct).iter().cloned().fold(0.0, f64::max);
        if qm.iter().all(|&q| q <= 1e-12 * scale) {
            checks.push(Check { name: "q_mean", value: 0.0, target: "slope 2 ± 0.5 (zero by symmetry)".into(), pass: None });
        } else {
            checks.push(slope_check("q_mean", etas, &qm, 2.0, 0.5));
        }
        let g = col(|r| r.grad_chi);
        let var = g.iter().cloned().fold(0.0, f64::max) / g.iter().cloned().fold(f64::INFINITY, f64::min) - 1.0;
        checks.push(Check { name: "grad_chi_variation", value: var, target: "< 0.15".into(), pass: Some(var < 0.15) });
    } else {
        let half = |eta: f64| eta.ln().abs().sqrt();
        let r = RatioTest::new(etas, &col(|r| r.grad_chi), half);
        checks.push(Check { name: "grad_chi_ratio_spread", value: r.spread, target: "≤ 0.2 vs |log η|^1/2".into(), pass: Some(r.within(0.2)) });
        let r = RatioTest::new(etas, &col(|r| r.q_fluct), |e| 1.0 / half(e));
        checks.push(Check { name: "q_fluct_ratio_spread", value: r.spread, target: "≤ 0.2 vs |log η|^-1/2".into(), pass: Some(r.within(0.2)) });
        let r = RatioTest::new(etas, &col(|r| r.lp_deviation), |e| 1.0 / half(e));
        let growth = r.ratios.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
        checks.push(Check { name: "lp_deviation_ratio_growth", value: growth, target: "≤ 1.2 vs |log η|^-1/2".into(), pass: Some(growth <= 1.2) });
    }
    checks
}

pub fn rates(a: &SweepArgs) -> Res<()> {
    let (_, mesh) = sweep_mesh(a)?;
    let dim = mesh.dim;
    let etas = etas(a, dim)?;
    if etas.len() < 2 {
        return Err(Failure::Input("rates need at least two eta values".into()));
    }
    let k = a.k.unwrap_or(1);
    if k == 0 || k > dim {
        return Err(Failure::Input(format!("--k must lie in 1..={dim}")));
    }
    let results = solve_sweep(&mesh, &etas, &[k - 1])?;
    let mut csv = format!("{RATE_CSV_HEADER}\n");
    let mut summaries = Vec::new();
    let mut failed = false;
    let mut text = String::new();
    for &eps in &a.eps {
        let rows = results
            .iter()
            .map(|(c, r)| rescale::rate_row(c, r, eps, if dim == 3 { 6 } else { 16 }))
            .collect::<stokescell::Result<Vec<_>>>()?;
        for r in &rows {
            csv += &r.csv();
            csv.push('\n');
        }
        let checks = rate_checks(dim, &etas, &rows);
        for c in &checks {
            let status = match c.pass {
                Some(true) => "PASS",
                Some(false) => "FAIL",
                None => "SKIP",
            };
            let _ = writeln!(text, "eps={eps} {:<28} {:>12.4} {:<32} {status}", c.name, c.value, c.target);
            failed |= c.pass == Some(false);
        }
        summaries.push(RateSummary { dim, eps, etas: etas.clone(), checks });
    }
    emit(&a.shape.common, "rates.csv", &csv)?;
    emit(&a.shape.common, "rates_summary.json", &json(&summaries))?;
    print!("{text}");
    if failed {
        return Err(Failure::Invariant("rate checks outside their windows".into()));
    }
    Ok(())
}

fn selftest_points(dim: usize) -> Vec<Point> {
    let z = |v: f64| if dim == 3 { v } else { 0.0 };
    vec![
        Point::new(0.3, 0.1, z(-0.2)),
        Point::new(-0.45, 0.27, z(0.11)),
        Point::new(0.05, -0.02, z(0.03)),
        Point::new(0.5, 0.5, z(0.5)),
        Point::new(0.013, 0.41, z(-0.37)),
    ]
}

/// Splitting-parameter invariance must stay below this bound.
const ALPHA_TOL: f64 = 1e-10;

pub fn green_selftest(a: &SelftestArgs) -> Res<()> {
    let tol = tolerance(&a.common, 1e-8)?;
    let rows = selftest(a.dim, &selftest_points(a.dim))?;
    let mut csv = String::from("x,y,z,alpha_variation,fourier_deviation\n");
    let (mut alpha, mut fourier): (f64, f64) = (0.0, 0.0);
    for r in &rows {
        let f = r.fourier_deviation.map(|v| format!("{v:.3e}")).unwrap_or_default();
        let _ = writeln!(csv, "{},{},{},{:.3e},{f}", r.x[0], r.x[1], r.x[2], r.alpha_variation);
        alpha = alpha.max(r.alpha_variation);
        fourier = fourier.max(r.fourier_deviation.unwrap_or(0.0));
    }
    emit(&a.common, "green_selftest.csv", &csv)?;
    println!("max splitting variation {alpha:.3e}, max Fourier deviation {fourier:.3e}");
    if alpha > ALPHA_TOL || fourier > tol {
        return Err(Failure::Invariant(format!("self-test above tolerance ({alpha:.3e}, {fourier:.3e})")));
    }
    Ok(())
}

pub fn regime(a: &RegimeArgs) -> Res<()> {
    let p = classify(a.dim, a.eps, a.eta)?;
    println!("sigma_eps={} kappa_eta={} regime={}", p.sigma_eps, p.kappa_eta, p.regime);
    if let Some(path) = &a.shape {
        let spec = read_shape(path)?;
        let mesh = build_mesh(&spec, mesh_size(&a.n, spec.dim)?)?;
        let cap = solve_kernel_basis(&mesh)?;
        emit(&a.common, "effective_model.json", &json(&effective_coefficients(&cap, &p)?))?;
    } else if a.common.out.is_some() {
        emit(&a.common, "regime.json", &json(&p))?;
    }
    Ok(())
}

pub fn jumps(a: &ShapeArgs) -> Res<()> {
    let tol = tolerance(&a.common, 1e-6)?;
    let (_, mesh) = load(a)?;
    // smooth density from node coordinates
    let phi = Density::from_fn(&mesh, |_, x| {
        let f = |i: f64| (1.0 + i) * ((3.0 * x[0] + i).cos() + 0.5 * (4.0 * x[1]).sin() + 0.3 * x[2]);
        Point::new(f(0.0), f(1.0), if mesh.dim == 3 { f(2.0) } else { 0.0 })
    })
    .values;
    let rep = verify_jumps(&mesh, &phi, &RICHARDSON_STEPS_EXTENDED);
    emit(&a.common, "jumps.json", &json(&rep))?;
    if rep.max_deviation() > tol {
        return Err(Failure::Invariant(format!("jump deviation {:.3e} exceeds {tol:e}", rep.max_deviation())));
    }
    Ok(())
}
