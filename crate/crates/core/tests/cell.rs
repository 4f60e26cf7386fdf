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


use std::sync::{Arc, OnceLock};
use stokescell::capacity::{solve_kernel_basis, CapacityResult};
use stokescell::cell::*;
use stokescell::rescale::fit_loglog;
use stokescell::*;

const ETAS_3D: [f64; 3] = [0.2, 0.1, 0.05];

struct Sweep {
    cap: CapacityResult,
    corrs: Vec<Vec<CellCorrector>>,
    reports: Vec<CellReport>,
}

fn sweep(spec: ShapeSpec, etas: &[f64], size: MeshSize) -> Sweep {
    let mesh = build_mesh(&spec, size).unwrap();
    let cap = solve_kernel_basis(&mesh).unwrap();
    let mut corrs = Vec::new();
    let mut reports = Vec::new();
    for &eta in etas {
        let ctx = Arc::new(CellContext::new(&mesh, &cap, eta).unwrap());
        let c = solve_cells(ctx).unwrap();
        reports.push(analyse(&c[0], &VolumeOptions::default_for(mesh.dim), 8).unwrap());
        corrs.push(c);
    }
    Sweep { cap, corrs, reports }
}

fn sphere() -> &'static Sweep {
    static S: OnceLock<Sweep> = OnceLock::new();
    S.get_or_init(|| sweep(ShapeSpec::sphere(0.25), &ETAS_3D, MeshSize::Sphere(8, 16)))
}

fn offset_sphere() -> &'static Sweep {
    static S: OnceLock<Sweep> = OnceLock::new();
    S.get_or_init(|| sweep(ShapeSpec::sphere(0.25).centered_at([0.05, 0.0, 0.0]), &ETAS_3D, MeshSize::Sphere(8, 16)))
}

fn ellipse() -> &'static Sweep {
    static S: OnceLock<Sweep> = OnceLock::new();
    S.get_or_init(|| sweep(ShapeSpec::ellipse(0.3, 0.2), &[0.1, 1e-2, 1e-3], MeshSize::Curve(128)))
}

#[test]
fn dirichlet_condition_and_solver_agreement() {
    for s in [sphere(), ellipse()] {
        for (cs, rep) in s.corrs.iter().zip(&s.reports) {
            assert!(rep.boundary_residual <= 1e-6, "{}", rep.boundary_residual);
            for c in cs {
                assert!(c.multiplier.abs() <= 1e-8);
                if c.direct_cond <= 1e6 {
                    assert!(c.direct_deviation <= 1e-6, "{} {}", c.direct_deviation, c.direct_cond);
                }
            }
        }
    }
}

#[test]
fn representation_constant_rate() {
    let r: Vec<f64> = sphere().corrs.iter().map(|c| c[0].r.norm()).collect();
    let fit = fit_loglog(&ETAS_3D, &r).unwrap();
    assert!(fit.slope >= 0.7, "{r:?} {fit:?}");
}

#[test]
fn density_bounds_across_eta() {
    for s in [sphere(), ellipse()] {
        for cs in &s.corrs {
            let c = &cs[0];
            let eta = c.ctx.eta();
            assert!(c.g_tilde.l2_norm(&c.ctx.mesh) <= 10.0);
            assert!(eta * c.g_mean.norm() <= 10.0);
            // ⟨g̃⟩ = 0
            assert!(c.g_tilde.mean(&c.ctx.mesh).norm() <= 1e-12);
        }
    }
}

fn fd_residual(field: &CellField, x: &Point, h: f64) -> (Point, f64) {
    let d = field.dim();
    let chi = |p: &Point| field.eval(p).unwrap();
    let c0 = chi(x).chi;
    let mut lap = Point::zeros();
    let mut gw = Point::zeros();
    let mut div = 0.0;
    for l in 0..d {
        let mut e = Point::zeros();
        e[l] = h;
        let (p1, m1) = (chi(&(x + e)), chi(&(x - e)));
        let (p2, m2) = (chi(&(x + e * 2.0)), chi(&(x - e * 2.0)));
        let l1 = (p1.chi - c0 * 2.0 + m1.chi) / (h * h);
        let l2 = (p2.chi - c0 * 2.0 + m2.chi) / (4.0 * h * h);
        lap += (l1 * 4.0 - l2) / 3.0;
        // fourth-order central differences
        gw[l] = (8.0 * (p1.omega - m1.omega) - (p2.omega - m2.omega)) / (12.0 * h);
        div += (8.0 * (p1.chi[l] - m1.chi[l]) - (p2.chi[l] - m2.chi[l])) / (12.0 * h);
    }
    (-lap + gw, div)
}

#[test]
fn corrector_solves_forced_stokes() {
    for (s, probes) in [
        (sphere(), vec![Point::new(0.6, 0.3, -0.4), Point::new(-1.1, 2.0, 0.7)]),
        (ellipse(), vec![Point::new(0.5, -0.4, 0.0), Point::new(2.0, 3.0, 0.0)]),
    ] {
        let c = &s.corrs[1][0];
        let d = c.ctx.dim();
        let force = c.ctx.eta().powi(d as i32);
        let field = CellField::new(c).unwrap();
        for x in &probes {
            let (r, div) = fd_residual(&field, x, 1e-2);
            let mut ek = Point::zeros();
            ek[0] = force;
            assert!((r - ek).norm() <= 1e-4 * force, "d={d} x={x:?}: {r:?} vs {force}");
            assert!(div.abs() <= 1e-5, "d={d}: div {div}");
        }
    }
}

#[test]
fn average_rate_3d() {
    let s = sphere();
    let dev: Vec<f64> = s.reports.iter().map(|r| r.averages.chi_minus_ate.norm()).collect();
    let fit = fit_loglog(&ETAS_3D, &dev).unwrap();
    assert!(fit.within(1.0, 0.3), "{dev:?} {fit:?}");
}

#[test]
fn pressure_average_rate_3d() {
    // centred sphere: ⟨ω⟩ vanishes by symmetry
    for r in &sphere().reports {
        assert!(r.averages.omega.abs() <= 1e-12);
    }
    let om: Vec<f64> = offset_sphere().reports.iter().map(|r| r.averages.omega.abs()).collect();
    let fit = fit_loglog(&ETAS_3D, &om).unwrap();
    assert!(fit.within(3.0, 0.5), "{om:?} {fit:?}");
}

#[test]
fn offset_leaves_velocity_average_unchanged() {
    for (a, b) in sphere().reports.iter().zip(&offset_sphere().reports) {
        let (x, y) = (a.averages.chi_minus_ate.norm(), b.averages.chi_minus_ate.norm());
        assert!((x - y).abs() <= 1e-6 * x, "{x} {y}");
    }
}

#[test]
fn average_log_growth_2d() {
    // ⟨χ⟩ - A_T e_k grows by log(10)/(4π) per decade of η in 2D
    let s = ellipse();
    let v: Vec<f64> = s.reports.iter().map(|r| r.averages.chi_minus_ate[0]).collect();
    let step = 10f64.ln() / (4.0 * std::f64::consts::PI);
    for w in v.windows(2) {
        assert!(((w[1] - w[0]) - step).abs() <= 2e-3 * step, "{v:?}");
    }
}

#[test]
fn average_cross_checks() {
    for s in [sphere(), ellipse()] {
        // volume quadrature limits agreement on the coarse 3D mesh
        let tol = if s.corrs[0][0].ctx.dim() == 3 { 1e-3 } else { 1e-6 };
        for r in &s.reports {
            let a = &r.averages;
            let scale = a.d_integral.norm().max(1e-3);
            assert!((a.d_integral - a.d_integral_boundary).norm() <= tol * scale, "{:?} {:?}", a.d_integral, a.d_integral_boundary);
            let gs = a.green_integral.norm().max(1e-3);
            assert!((a.green_integral - a.green_integral_volume).norm() <= tol * gs, "d={} {:?} {:?}", s.corrs[0][0].ctx.dim(), a.green_integral, a.green_integral_volume);
            assert!((a.fluid_volume_rule - a.fluid_volume).abs() <= 1e-5 * a.fluid_volume);
        }
    }
}

#[test]
fn direction_permutation_symmetry() {
    // sphere: χ_2(x, y, z) is χ_1(y, x, z) with swapped components
    let cs = &sphere().corrs[1];
    let f1 = CellField::new(&cs[0]).unwrap();
    let f2 = CellField::new(&cs[1]).unwrap();
    for x in [Point::new(0.6, 0.3, -0.4), Point::new(-1.1, 2.0, 0.7), Point::new(0.3, 0.1, 0.2)] {
        let a = f1.eval(&x).unwrap();
        let b = f2.eval(&Point::new(x[1], x[0], x[2])).unwrap();
        let swapped = Point::new(b.chi[1], b.chi[0], b.chi[2]);
        assert!((a.chi - swapped).amax() <= 1e-8, "{:?} {:?}", a.chi, swapped);
        assert!((a.omega - b.omega).abs() <= 1e-8);
    }
}

#[test]
fn energy_identity_matches_quadrature() {
    for s in [sphere(), ellipse()] {
        let c = &s.corrs[1][0];
        let rep = &s.reports[1];
        let field = CellField::new(c).unwrap();
        let direct = corrector_energy_direct(&field, &rep.samples.rule, 1e-4).unwrap();
        assert!(rep.energy > 0.0);
        assert!((direct - rep.energy).abs() <= 0.05 * rep.energy, "{direct} vs {}", rep.energy);
    }
}

#[test]
fn energy_is_bounded_3d() {
    let e: Vec<f64> = sphere().reports.iter().map(|r| r.energy.sqrt()).collect();
    let (lo, hi) = e.iter().fold((f64::MAX, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    assert!(hi / lo <= 1.15, "{e:?}");
}

#[test]
fn rows_and_csv() {
    let s = sphere();
    let row = s.reports[0].row(&s.corrs[0][0]);
    assert_eq!(CELL_CSV_HEADER.split(',').count(), row.csv().split(',').count());
    let json = serde_json::to_value(&row).unwrap();
    assert!(json.get("avg_chi_minus_ATek").is_some());
    assert_eq!(row.k, 0);
    assert!(row.csv().starts_with("3,0.2,1,"));
    assert!(row.grad_norm > 0.0);
    let _ = &s.cap;
}

#[test]
fn rejects_bad_eta() {
    let mesh = build_mesh(&ShapeSpec::sphere(0.25), MeshSize::Sphere(6, 12)).unwrap();
    let cap = solve_kernel_basis(&mesh).unwrap();
    for eta in [0.0, -0.1, 1.5, f64::NAN] {
        assert!(CellContext::new(&mesh, &cap, eta).is_err(), "{eta}");
    }
}
