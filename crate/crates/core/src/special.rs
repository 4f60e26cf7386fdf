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


//! Exponential integrals and thin wrappers around the error function.

pub use libm::{erf, erfc};

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Entire exponential integral Ein(u) = ∫₀ᵘ (1 - e^{-s}) / s ds.
pub fn ein(u: f64) -> f64 {
    if u.abs() <= 2.0 {
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..60 {
            term *= -u / k as f64;
            let add = -term / k as f64;
            sum += add;
            if add.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        e1(u) + u.ln() + EULER_GAMMA
    }
}

/// Exponential integral E₁(u) for u > 0.
pub fn e1(u: f64) -> f64 {
    assert!(u > 0.0, "E1 requires a positive argument");
    if u <= 2.0 {
        return ein(u) - u.ln() - EULER_GAMMA;
    }
    // modified Lentz on the continued fraction e^{-u} / (u + 1 - 1/(u + 3 - 4/(u + 5 - ...)))
    let tiny = 1e-300;
    let mut b = u + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..200 {
        let a = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-u).exp()
}

/// (1 - e^{-u}) / u, stable near zero.
pub fn one_minus_exp_over(u: f64) -> f64 {
    if u.abs() < 1e-8 {
        1.0 - 0.5 * u
    } else {
        -(-u).exp_m1() / u
    }
}
