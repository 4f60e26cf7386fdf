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


use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::OnceLock;
use stokescell::kernels::{self, Mat};
use stokescell::nystrom::{self, Density, FieldKind};
use stokescell::periodic::*;
use stokescell::quad::GaussRule;
use stokescell::*;

fn green(dim: usize) -> &'static PeriodicGreen {
    static G2: OnceLock<PeriodicGreen> = OnceLock::new();
    static G3: OnceLock<PeriodicGreen> = OnceLock::new();
    let cell = if dim == 2 { &G2 } else { &G3 };
    cell.get_or_init(|| PeriodicGreen::new(dim).unwrap())
}

fn probe_points(dim: usize) -> Vec<Point> {
    let z = |v: f64| if dim == 3 { v } else { 0.0 };
    vec![
        Point::new(0.3, 0.1, z(-0.2)),
        Point::new(-0.45, 0.27, z(0.11)),
        Point::new(0.05, -0.02, z(0.03)),
        Point::new(0.5, 0.5, z(0.5)),
        Point::new(0.013, 0.41, z(-0.37)),
    ]
}

#[test]
fn splitting_parameter_invariance() {
    for dim in [2, 3] {
        for row in green_selftest(dim, &probe_points(dim)).unwrap() {
            assert!(row.alpha_variation <= 1e-10, "d={dim} {row:?}");
        }
    }
}

#[test]
fn planar_fourier_oracle() {
    for row in green_selftest(2, &probe_points(2)).unwrap() {
        assert!(row.fourier_deviation.unwrap() <= 1e-8, "{row:?}");
    }
    // partial sums approach the Ewald value
    let x = Point::new(0.3, 0.1, 0.0);
    let g = green(2).eval(&x).unwrap();
    let e: Vec<f64> = [20, 80, 320]
        .iter()
        .map(|&m| (fourier_2d_partial(&x, m).g - g.g).amax())
        .collect();
    assert!(e[2] < e[1] && e[1] < e[0], "{e:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn parity(a in -0.5..0.5f64, b in -0.5..0.5f64, c in -0.5..0.5f64, three in any::<bool>()) {
        let dim = if three { 3 } else { 2 };
        let x = Point::new(a, b, if three { c } else { 0.0 });
        prop_assume!(x.norm() > 1e-3);
        let p = green(dim).eval(&x).unwrap();
        let m = green(dim).eval(&(-x)).unwrap();
        prop_assert!((p.g - m.g).amax() <= 1e-12);
        prop_assert!((p.p + m.p).amax() <= 1e-12);
        prop_assert!((p.g - p.g.transpose()).amax() <= 1e-12);
    }
}

// ∫ over the unit cell of Γ, from ∫_Q f = ∫_∂Q (x·N) F with F(x) = ∫_0^1 f(tx) t^{d-1} dt
fn free_cell_integral(dim: usize, gauss: &GaussRule) -> Mat {
    let mut acc = Mat::zeros();
    for axis in 0..dim {
        for sign in [-0.5, 0.5] {
            let others: Vec<usize> = (0..dim).filter(|&a| a != axis).collect();
            let pts: Vec<(Point, f64)> = if dim == 2 {
                gauss
                    .on(-0.5, 0.5)
                    .map(|(u, w)| {
                        let mut x = Point::zeros();
                        x[axis] = sign;
                        x[others[0]] = u;
                        (x, w)
                    })
                    .collect()
            } else {
                let mut v = Vec::new();
                for (u, wu) in gauss.on(-0.5, 0.5) {
                    for (s, ws) in gauss.on(-0.5, 0.5) {
                        let mut x = Point::zeros();
                        x[axis] = sign;
                        x[others[0]] = u;
                        x[others[1]] = s;
                        v.push((x, wu * ws));
                    }
                }
                v
            };
            for (x, w) in pts {
                let f = if dim == 3 {
                    kernels::stokeslet_raw(3, &x) * 0.5
                } else {
                    let r = x.norm();
                    let xh = x / r;
                    let mut m = Mat::zeros();
                    for i in 0..2 {
                        m[(i, i)] = (r.ln() / 2.0 - 0.25) / (4.0 * PI);
                        for j in 0..2 {
                            m[(i, j)] -= xh[i] * xh[j] / (8.0 * PI);
                        }
                    }
                    m
                };
                acc += f * (0.5 * w);
            }
        }
    }
    acc
}

#[test]
fn green_has_zero_mean() {
    for (dim, nq) in [(2, 40), (3, 14)] {
        let g = green(dim);
        let gauss = GaussRule::new(nq);
        let mut rem = Mat::zeros();
        let nodes: Vec<(f64, f64)> = gauss.on(-0.5, 0.5).collect();
        let zr: &[(f64, f64)] = if dim == 3 { &nodes } else { &[(0.0, 1.0)] };
        for &(a, wa) in &nodes {
            for &(b, wb) in &nodes {
                for &(c, wc) in zr {
                    rem += g.remainder(&Point::new(a, b, c)).g * (wa * wb * wc);
                }
            }
        }
        let total = rem + free_cell_integral(dim, &GaussRule::new(40));
        assert!(total.amax() <= 1e-8, "d={dim}: {total}");
    }
}

fn fd_check(dim: usize, eval: impl Fn(&Point) -> GreenValues, x: &Point, forcing: f64) {
    let h = 1e-3;
    let v0 = eval(x);
    for k in 0..dim {
        let mut lap = Point::zeros();
        let mut gp = Point::zeros();
        let mut div = 0.0;
        for l in 0..dim {
            let mut e = Point::zeros();
            e[l] = h;
            let (vp, vm) = (eval(&(x + e)), eval(&(x - e)));
            let (wp, wm) = (eval(&(x + e * 2.0)), eval(&(x - e * 2.0)));
            let l1 = (vp.g.column(k) - v0.g.column(k) * 2.0 + vm.g.column(k)) / (h * h);
            let l2 = (wp.g.column(k) - v0.g.column(k) * 2.0 + wm.g.column(k)) / (4.0 * h * h);
            // Richardson step removes the O(h²) term
            lap += (l1 * 4.0 - l2) / 3.0;
            // gradient consistency, finer step
            let mut e = Point::zeros();
            e[l] = 1e-4;
            let (vp, vm) = (eval(&(x + e)), eval(&(x - e)));
            let dg = (vp.g - vm.g) / 2e-4;
            gp[l] = (vp.p[k] - vm.p[k]) / 2e-4;
            div += (vp.g[(l, k)] - vm.g[(l, k)]) / 2e-4;
            assert!((dg - v0.grad_g[l]).amax() <= 1e-6, "grad G d={dim} x={x:?} l={l}: {dg} vs {}", v0.grad_g[l]);
            let dp = (vp.p - vm.p) / 2e-4;
            assert!((dp - v0.grad_p.column(l)).amax() <= 1e-6, "grad P d={dim} x={x:?}");
        }
        let mut ek = Point::zeros();
        ek[k] = forcing;
        assert!((lap - gp + ek).amax() <= 1e-6, "PDE d={dim} k={k} x={x:?}: {}", lap - gp);
        assert!(div.abs() <= 1e-6, "div d={dim}: {div}");
    }
}

#[test]
fn green_solves_forced_stokes() {
    // ΔG_k - ∇P_k = -η^d e_k away from the lattice
    for dim in [2, 3] {
        for x in probe_points(dim) {
            if x.norm() > 0.1 {
                fd_check(dim, |p| green(dim).eval(p).unwrap(), &x, 1.0);
            }
        }
        let eta = 0.2;
        let torus = TorusGreen::new(dim, eta).unwrap();
        fd_check(dim, |p| torus.eval(p).unwrap(), &Point::new(1.1, -0.7, if dim == 3 { 0.4 } else { 0.0 }), eta.powi(dim as i32));
    }
}

#[test]
fn pressure_is_minus_laplace_gradient() {
    for dim in [2, 3] {
        let oracle = LaplaceGaussEwald::new(dim);
        let h = 1e-4;
        for x in probe_points(dim) {
            if x.norm() < 0.1 {
                continue;
            }
            let v = green(dim).eval(&x).unwrap();
            assert!((v.lap - oracle.eval(&x)).abs() <= 1e-9, "d={dim}");
            for k in 0..dim {
                let mut e = Point::zeros();
                e[k] = h;
                let d = (oracle.eval(&(x + e)) - oracle.eval(&(x - e))) / (2.0 * h);
                assert!((v.p[k] + d).abs() <= 1e-6, "d={dim} k={k}");
            }
            assert!((v.grad_lap() + v.p).amax() == 0.0);
        }
    }
}

#[test]
fn remainder_is_smooth_and_consistent() {
    for dim in [2, 3] {
        let g = green(dim);
        let r0 = g.remainder(&Point::zeros());
        assert!(r0.g.amax().is_finite());
        let dir = Point::new(0.6, -0.48, if dim == 3 { 0.64 } else { 0.0 }).normalize();
        for s in [1e-1, 1e-2, 1e-3, 1e-4, 1e-6] {
            let r = g.remainder(&(dir * s));
            assert!((r.g - r0.g).amax() <= 1.0 * s, "d={dim} s={s}");
        }
        let x = Point::new(0.3, 0.1, if dim == 3 { -0.2 } else { 0.0 });
        let full = g.eval(&x).unwrap();
        let r = g.remainder(&x);
        assert!((r.g + kernels::stokeslet_raw(dim, &x) - full.g).amax() <= 1e-10);
        assert!((r.p + kernels::pressurelet_raw(dim, &x) - full.p).amax() <= 1e-10);
    }
}

#[test]
fn torus_scaling_paths_agree() {
    for dim in [2, 3] {
        for eta in [0.05, 0.1, 0.5] {
            let torus = TorusGreen::new(dim, eta).unwrap();
            let x = Point::new(0.3, 0.1, if dim == 3 { -0.2 } else { 0.0 });
            let full = torus.eval(&x).unwrap();
            let rem = torus.remainder(&x);
            assert!((rem.g + kernels::stokeslet_raw(dim, &x) - full.g).amax() <= 1e-10, "d={dim} eta={eta}");
            assert!((rem.p + kernels::pressurelet_raw(dim, &x) - full.p).amax() <= 1e-10);
            // periodicity of the η-torus
            let mut shift = x;
            shift[1] += 1.0 / eta;
            assert!((torus.eval(&shift).unwrap().g - full.g).amax() <= 1e-10);
        }
    }
}

fn constant_residual(mesh: &BoundaryMesh, eta: f64) -> f64 {
    let torus = TorusGreen::new(mesh.dim, eta).unwrap();
    let ops = assemble_periodic_np(mesh, &torus);
    let vol = mesh.volume();
    (0..mesh.dim)
        .map(|k| {
            let e = Density::unit(mesh, k).values;
            let r = &ops.k_eta.mat * &e - &e * 0.5 + &e * (eta.powi(mesh.dim as i32) * vol);
            nystrom::weighted_norm(mesh, &r)
        })
        .fold(0.0, f64::max)
}

#[test]
fn constants_are_eigenvectors_of_periodic_np() {
    for spec in [ShapeSpec::ellipse(0.3, 0.2), ShapeSpec::kite(0.37)] {
        let mesh = build_mesh(&spec, MeshSize::Curve(128)).unwrap();
        assert!(constant_residual(&mesh, 0.1) <= 1e-7);
    }
    let mesh = build_mesh(&ShapeSpec::sphere(0.25), MeshSize::Sphere(8, 16)).unwrap();
    assert!(constant_residual(&mesh, 0.1) <= 1e-7);
}

#[test]
fn periodic_np_perturbation_decays() {
    for mesh in [
        build_mesh(&ShapeSpec::kite(0.37), MeshSize::Curve(64)).unwrap(),
        build_mesh(&ShapeSpec::sphere(0.25), MeshSize::Sphere(6, 12)).unwrap(),
    ] {
        let d = mesh.dim;
        let etas = [0.2, 0.1, 0.05];
        let norms: Vec<f64> = etas
            .iter()
            .map(|&eta| {
                let ops = assemble_periodic_np(&mesh, &TorusGreen::new(d, eta).unwrap());
                (&ops.k_eta.mat - &ops.k.mat).norm()
            })
            .collect();
        let fit = rescale::fit_loglog(&etas, &norms).unwrap();
        assert!(fit.slope >= d as f64 - 1.0, "d={d} {norms:?} slope {}", fit.slope);
    }
}

#[test]
fn periodic_np_is_invertible() {
    let mesh = build_mesh(&ShapeSpec::kite(0.37), MeshSize::Curve(64)).unwrap();
    let ops = assemble_periodic_np(&mesh, &TorusGreen::new(2, 0.1).unwrap());
    let a = ops.k_eta.shifted(-0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let b = DMatrix::from_fn(mesh.n_dof(), 1, |_, _| rng.gen_range(-1.0..1.0));
    let sol = nystrom::solve_system("K^eta", &a.mat, &b).unwrap();
    assert!(sol.cond.is_finite() && sol.residual <= 1e-12);
}

#[test]
fn pair_cache_matches_direct_remainders() {
    let mesh = build_mesh(&ShapeSpec::ellipse(0.3, 0.2), MeshSize::Curve(32)).unwrap();
    let torus = TorusGreen::new(2, 0.1).unwrap();
    let pairs = PairRemainders::new(&mesh, &torus);
    for (i, j) in [(0, 5), (5, 0), (7, 7), (31, 2)] {
        let a = pairs.get(i, j);
        let b = torus.remainder(&(mesh.nodes[i] - mesh.nodes[j]));
        assert!((a.g - b.g).amax() <= 1e-15 && (a.p - b.p).amax() <= 1e-15);
    }
}

fn smooth(mesh: &BoundaryMesh, mean_zero: bool) -> DVector<f64> {
    let v = Density::from_fn(mesh, |_, x| Point::new(x[1] * 2.0 + 0.3, (3.0 * x[0]).sin() - 0.1, 0.0));
    if !mean_zero {
        return v.values;
    }
    let m = v.mean(mesh);
    Density::from_fn(mesh, |i, _| v.at(i) - m).values
}

fn fd_layer(mesh: &BoundaryMesh, torus: &TorusGreen, phi: &DVector<f64>, x: &Point) -> Point {
    let pot = PeriodicPotential::new(mesh, torus, phi);
    let h = 1e-3;
    let u0 = pot.eval(FieldKind::S, x).vector();
    let mut r = Point::zeros();
    for l in 0..mesh.dim {
        let mut e = Point::zeros();
        e[l] = h;
        r += (pot.eval(FieldKind::S, &(x + e)).vector() - u0 * 2.0 + pot.eval(FieldKind::S, &(x - e)).vector()) / (h * h);
        r[l] -= (pot.eval(FieldKind::Q, &(x + e)).scalar() - pot.eval(FieldKind::Q, &(x - e)).scalar()) / (2.0 * h);
    }
    r
}

#[test]
fn periodic_single_layer_pde() {
    let mesh = build_mesh(&ShapeSpec::ellipse(0.3, 0.2), MeshSize::Curve(64)).unwrap();
    let eta = 0.2;
    let torus = TorusGreen::new(2, eta).unwrap();
    let x = Point::new(1.3, -0.9, 0.0);
    // mean-zero density: homogeneous system
    let r = fd_layer(&mesh, &torus, &smooth(&mesh, true), &x);
    assert!(r.amax() <= 1e-5, "{r:?}");
    // constant density: residual -η^d |∂T| c
    let c = Point::new(0.4, -1.1, 0.0);
    let phi = Density::constant(&mesh, &c).values;
    let r = fd_layer(&mesh, &torus, &phi, &x);
    let expect = -c * (eta * eta * mesh.measure());
    assert!((r - expect).amax() <= 1e-5, "{r:?} vs {expect:?}");
}

#[test]
fn periodic_potentials_are_periodic() {
    let mesh = build_mesh(&ShapeSpec::kite(0.37), MeshSize::Curve(64)).unwrap();
    let eta = 0.25;
    let torus = TorusGreen::new(2, eta).unwrap();
    let phi = smooth(&mesh, false);
    let x = Point::new(0.9, 1.2, 0.0);
    let xs = [x, x + Point::new(1.0 / eta, 0.0, 0.0), x - Point::new(0.0, 2.0 / eta, 0.0)];
    for kind in [FieldKind::S, FieldKind::D] {
        let v = eval_periodic_potentials(kind, &mesh, &torus, &phi, &xs);
        for w in &v[1..] {
            assert!((w.vector() - v[0].vector()).amax() <= 1e-10);
        }
    }
}

#[test]
fn multi_source_sum_matches_pairwise() {
    for mesh in [
        build_mesh(&ShapeSpec::kite(0.37), MeshSize::Curve(64)).unwrap(),
        build_mesh(&ShapeSpec::sphere(0.25), MeshSize::Sphere(6, 12)).unwrap(),
    ] {
        let d = mesh.dim;
        let eta = 0.1;
        let torus = TorusGreen::new(d, eta).unwrap();
        let phi = smooth(&mesh, false);
        let sig = Density::from_fn(&mesh, |_, x| Point::new(1.0, x[0], x[1]));
        let src = LayerSources {
            y: mesh.nodes.clone(),
            n: mesh.normals.clone(),
            w: mesh.weights.clone(),
            phi: (0..mesh.len()).map(|i| Density::from_vector(d, phi.clone()).at(i)).collect(),
            sigma: (0..mesh.len()).map(|i| sig.at(i)).collect(),
        };
        let sum = RemainderSum::new(d, eta, &src).unwrap();
        let pd = PeriodicPotential::new(&mesh, &torus, &phi);
        let ps = PeriodicPotential::new(&mesh, &torus, &sig.values);
        for x in [Point::new(0.9, -2.0, 0.0), Point::new(-4.0, 3.1, if d == 3 { 1.7 } else { 0.0 })] {
            let f = sum.eval(&torus.wrap(&x));
            assert!((f.d - pd.eval_remainder(FieldKind::D, &x).vector()).amax() <= 1e-13, "d={d}");
            assert!((f.p - pd.eval_remainder(FieldKind::P, &x).scalar()).abs() <= 1e-13);
            assert!((f.s - ps.eval_remainder(FieldKind::S, &x).vector()).amax() <= 1e-13);
            assert!((f.q - ps.eval_remainder(FieldKind::Q, &x).scalar()).abs() <= 1e-13);
        }
    }
}
