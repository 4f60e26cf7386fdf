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

//! Quadrature rules, trigonometric interpolation and real spherical harmonics.

use rustfft::{num_complex::Complex, FftPlanner};
use std::f64::consts::PI;

/// Gauss-Legendre rule on `[-1, 1]`, nodes ascending.
#[derive(Clone, Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss rule needs at least one node");
        if n == 1 {
            return Self {
                nodes: vec![0.0],
                weights: vec![2.0],
            };
        }
        let rule = gauss_quad::legendre::GaussLegendre::new(n).expect("degree >= 2");
        let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = 0.5 * (b - a);
        let c = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (c + h * x, h * w))
    }
}

/// Composite Gauss rule on `[0, len]` with panels refined geometrically towards 0.
///
/// Panel edges are `len * 2^-j`, down to the first edge below `h0`.
pub fn graded_rule(rule: &GaussRule, len: f64, h0: f64) -> Vec<(f64, f64)> {
    let mut edges = vec![len];
    let mut e = len;
    while e > h0 && edges.len() < 60 {
        e *= 0.5;
        edges.push(e);
    }
    edges.push(0.0);
    edges.reverse();
    let mut out = Vec::with_capacity((edges.len() - 1) * rule.len());
    for w in edges.windows(2) {
        out.extend(rule.on(w[0], w[1]));
    }
    out
}

/// Composite Gauss rule on `[a, b]` with geometric panels towards both ends.
pub fn graded_rule_two_sided(rule: &GaussRule, a: f64, b: f64, h0: f64) -> Vec<(f64, f64)> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    debug_assert!(mid > a);
    let one = graded_rule(rule, half, h0);
    let mut out = Vec::with_capacity(2 * one.len());
    out.extend(one.iter().map(|&(s, w)| (a + s, w)));
    out.extend(one.iter().rev().map(|&(s, w)| (b - s, w)));
    out
}

/// Trigonometric interpolant of a 2π-periodic real function sampled at
/// `t_j = 2πj/n`.
#[derive(Clone, Debug)]
pub struct TrigInterp {
    n: usize,
    /// cos coefficients a_0..a_{n/2}
    a: Vec<f64>,
    /// sin coefficients b_0..b_{n/2}
    b: Vec<f64>,
}

impl TrigInterp {
    pub fn new(values: &[f64]) -> Self {
        let n = values.len();
        let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
        let mut planner = FftPlanner::new();
        planner.plan_fft_forward(n).process(&mut buf);
        let half = n / 2;
        let mut a = vec![0.0; half + 1];
        let mut b = vec![0.0; half + 1];
        let inv = 1.0 / n as f64;
        a[0] = buf[0].re * inv;
        for k in 1..=half {
            let f = buf[k];
            if 2 * k == n {
                a[k] = f.re * inv;
            } else {
                a[k] = 2.0 * f.re * inv;
                b[k] = -2.0 * f.im * inv;
            }
        }
        Self { n, a, b }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (s1, c1) = t.sin_cos();
        let (mut c, mut s) = (1.0, 0.0);
        let mut acc = self.a[0];
        for k in 1..self.a.len() {
            let cn = c * c1 - s * s1;
            s = s * c1 + c * s1;
            c = cn;
            acc += self.a[k] * c + self.b[k] * s;
        }
        acc
    }
}

/// Legendre polynomials P_0..P_lmax at `x`.
pub fn legendre_all(lmax: usize, x: f64, out: &mut [f64]) {
    out[0] = 1.0;
    if lmax == 0 {
        return;
    }
    out[1] = x;
    for l in 2..=lmax {
        let lf = l as f64;
        out[l] = ((2.0 * lf - 1.0) * x * out[l - 1] - (lf - 1.0) * out[l - 2]) / lf;
    }
}

/// Reproducing kernel of spherical harmonics of degree at most `lmax`:
/// Σ_l (2l+1)/(4π) P_l(x).
pub fn sh_reproducing_kernel(lmax: usize, x: f64) -> f64 {
    let x = x.clamp(-1.0, 1.0);
    let mut p0 = 1.0;
    let mut acc = 1.0 / (4.0 * PI);
    if lmax == 0 {
        return acc;
    }
    let mut p1 = x;
    acc += 3.0 * x / (4.0 * PI);
    for l in 2..=lmax {
        let lf = l as f64;
        let p2 = ((2.0 * lf - 1.0) * x * p1 - (lf - 1.0) * p0) / lf;
        acc += (2.0 * lf + 1.0) * p2 / (4.0 * PI);
        p0 = p1;
        p1 = p2;
    }
    acc
}

/// Real orthonormal spherical harmonics up to degree `lmax`.
///
/// Index of (l, m) with -l ≤ m ≤ l is `l² + l + m`; m > 0 carries cos(mφ),
/// m < 0 carries sin(|m|φ).
#[derive(Clone, Debug)]
pub struct SphHarm {
    pub lmax: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl SphHarm {
    pub fn new(lmax: usize) -> Self {
        let size = (lmax + 1) * (lmax + 1);
        let mut a = vec![0.0; size];
        let mut b = vec![0.0; size];
        for m in 0..=lmax {
            for l in (m + 2)..=lmax {
                let (lf, mf) = (l as f64, m as f64);
                let i = l * (l + 1) / 2 + m;
                a[i] = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                b[i] = (((lf - 1.0) * (lf - 1.0) - mf * mf)
                    / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
                    .sqrt();
            }
        }
        Self { lmax, a, b }
    }

    pub fn size(&self) -> usize {
        (self.lmax + 1) * (self.lmax + 1)
    }

    #[inline]
    pub fn index(l: usize, m: isize) -> usize {
        ((l * l + l) as isize + m) as usize
    }

    /// Evaluate all harmonics at the unit vector `p`, writing into `out`.
    pub fn eval(&self, p: [f64; 3], out: &mut [f64]) {
        let lmax = self.lmax;
        let z = p[2].clamp(-1.0, 1.0);
        let s = (p[0] * p[0] + p[1] * p[1]).sqrt();
        let (cphi, sphi) = if s > 0.0 {
            (p[0] / s, p[1] / s)
        } else {
            (1.0, 0.0)
        };
        let mut pmm = (1.0 / (4.0 * PI)).sqrt();
        let (mut cm, mut sm) = (1.0, 0.0);
        for m in 0..=lmax {
            if m > 0 {
                let mf = m as f64;
                pmm *= ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s;
                let cn = cm * cphi - sm * sphi;
                sm = sm * cphi + cm * sphi;
                cm = cn;
            }
            let (fc, fs) = if m == 0 {
                (1.0, 0.0)
            } else {
                (std::f64::consts::SQRT_2 * cm, std::f64::consts::SQRT_2 * sm)
            };
            let mut put = |l: usize, v: f64| {
                if m == 0 {
                    out[Self::index(l, 0)] = v;
                } else {
                    out[Self::index(l, m as isize)] = v * fc;
                    out[Self::index(l, -(m as isize))] = v * fs;
                }
            };
            put(m, pmm);
            if m == lmax {
                break;
            }
            let mut p0 = pmm;
            let mut p1 = (2.0 * m as f64 + 3.0).sqrt() * z * pmm;
            put(m + 1, p1);
            for l in (m + 2)..=lmax {
                let i = l * (l + 1) / 2 + m;
                let p2 = self.a[i] * (z * p1 - self.b[i] * p0);
                put(l, p2);
                p0 = p1;
                p1 = p2;
            }
        }
    }
}
