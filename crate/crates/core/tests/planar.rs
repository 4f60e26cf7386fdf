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


use stokescell::nystrom::planar::*;
use std::f64::consts::PI;

#[test]
fn log_weights_on_cosines() {
    // ∫ log(4 sin²(s/2)) cos(m s) ds = -2π/m
    let n = 32;
    let rw = log_weights(n);
    for mm in 1..n / 2 {
        let v: f64 = (0..n)
            .map(|l| rw[(n - l) % n] * (2.0 * PI * (mm * l) as f64 / n as f64).cos())
            .sum();
        assert!((v + 2.0 * PI / mm as f64).abs() < 1e-12, "m={mm} {v}");
    }
    let v: f64 = rw.iter().sum();
    assert!(v.abs() < 1e-12);
}

#[test]
fn hilbert_of_cosine_is_sine() {
    let n = 24;
    let hw = hilbert_weights(n);
    let t = |l: usize| 2.0 * PI * l as f64 / n as f64;
    for mm in 1..n / 2 {
        for i in 0..n {
            let v: f64 = (0..n).map(|l| hw[(i + n - l) % n] * (mm as f64 * t(l)).cos()).sum();
            assert!((v - (mm as f64 * t(i)).sin()).abs() < 1e-12);
        }
    }
}
