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


use stokescell::quad::*;
use std::f64::consts::PI;
use approx::assert_relative_eq;

#[test]
fn gauss_rule_integrates_polynomials() {
    let r = GaussRule::new(8);
    let s: f64 = r.on(0.0, 2.0).map(|(x, w)| w * x.powi(15)).sum();
    assert_relative_eq!(s, 2f64.powi(16) / 16.0, max_relative = 1e-13);
    assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn graded_rule_resolves_log() {
    let r = GaussRule::new(10);
    let q = graded_rule(&r, 1.0, 1e-12);
    let s: f64 = q.iter().map(|&(x, w)| w * x.ln()).sum();
    assert_relative_eq!(s, -1.0, max_relative = 1e-10);
    let q2 = graded_rule_two_sided(&r, -1.0, 1.0, 1e-12);
    let s2: f64 = q2.iter().map(|&(x, w)| w * (1.0 - x * x).ln()).sum();
    assert_relative_eq!(s2, 4.0 * 2f64.ln() - 4.0, max_relative = 1e-10);
}

#[test]
fn trig_interp_reproduces_band_limited() {
    let n = 16;
    let f = |t: f64| 0.3 + (2.0 * t).cos() - 0.5 * (7.0 * t).sin() + 0.25 * (8.0 * t).cos();
    let v: Vec<f64> = (0..n).map(|j| f(2.0 * PI * j as f64 / n as f64)).collect();
    let ti = TrigInterp::new(&v);
    for j in 0..n {
        let t = 2.0 * PI * j as f64 / n as f64;
        assert_relative_eq!(ti.eval(t), f(t), epsilon = 1e-13);
    }
    let g = |t: f64| 0.3 + (2.0 * t).cos() - 0.5 * (7.0 * t).sin();
    let v: Vec<f64> = (0..n).map(|j| g(2.0 * PI * j as f64 / n as f64)).collect();
    let ti = TrigInterp::new(&v);
    assert_relative_eq!(ti.eval(0.123), g(0.123), epsilon = 1e-13);
}

#[test]
fn spherical_harmonics_addition_theorem() {
    let sh = SphHarm::new(9);
    let p = [0.36, -0.48, 0.8];
    let q = {
        let v = [0.1f64, 0.7, -0.3];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        [v[0] / n, v[1] / n, v[2] / n]
    };
    let mut yp = vec![0.0; sh.size()];
    let mut yq = vec![0.0; sh.size()];
    sh.eval(p, &mut yp);
    sh.eval(q, &mut yq);
    let dot = p[0] * q[0] + p[1] * q[1] + p[2] * q[2];
    let lhs: f64 = yp.iter().zip(&yq).map(|(a, b)| a * b).sum();
    assert_relative_eq!(lhs, sh_reproducing_kernel(9, dot), epsilon = 1e-12);
}
