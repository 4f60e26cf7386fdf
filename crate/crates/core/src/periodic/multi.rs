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


//! Remainder parts of periodic layer potentials at many targets.
//!
//! Sums over all sources are split as in the pointwise evaluator; the
//! reciprocal part is summed once per wave into structure factors, so a
//! target costs one pass over the waves plus the short-range images of each
//! source.

use super::ewald::{radial_full, radial_remainder, PeriodicGreen, Radial};
use crate::error::Result;
use crate::geometry::Point;
use std::f64::consts::PI;

/// Splitting parameter of the multi-source evaluator on the unit torus.
pub const MULTI_ALPHA: f64 = 6.0;
const MULTI_TOL: f64 = 1e-13;

/// Remainder values of `D^η[φ]`, `P^η[φ]`, `S^η[σ]` and `Q^η[σ]` at one target.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RemainderFields {
    pub d: Point,
    pub p: f64,
    pub s: Point,
    pub q: f64,
}

/// Densities sampled on a quadrature rule; `w` are the weights.
#[derive(Clone, Debug)]
pub struct LayerSources {
    pub y: Vec<Point>,
    pub n: Vec<Point>,
    pub w: Vec<f64>,
    /// Double-layer density.
    pub phi: Vec<Point>,
    /// Single-layer density.
    pub sigma: Vec<Point>,
}

#[derive(Clone, Copy, Default)]
struct C64 {
    re: f64,
    im: f64,
}

impl C64 {
    fn mul(self, o: C64) -> C64 {
        C64 {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
}

/// Per-axis powers `e^{i 2π m u}` for `|m| ≤ mmax`.
fn axis_table(u: f64, mmax: usize) -> Vec<C64> {
    let (s1, c1) = (2.0 * PI * u).sin_cos();
    let mut t = vec![C64 { re: 1.0, im: 0.0 }; mmax + 1];
    for k in 1..=mmax {
        t[k] = if k % 8 == 0 {
            let (s, c) = (2.0 * PI * k as f64 * u).sin_cos();
            C64 { re: c, im: s }
        } else {
            t[k - 1].mul(C64 { re: c1, im: s1 })
        };
    }
    t
}

fn phase(tabs: &[Vec<C64>; 3], m: &[i32; 3], dim: usize) -> C64 {
    let mut z = C64 { re: 1.0, im: 0.0 };
    for a in 0..dim {
        let mut f = tabs[a][m[a].unsigned_abs() as usize];
        if m[a] < 0 {
            f.im = -f.im;
        }
        z = z.mul(f);
    }
    z
}

/// Remainder sums for fixed sources on the torus `η⁻¹𝕋^d`.
pub struct RemainderSum {
    green: PeriodicGreen,
    dim: usize,
    eta: f64,
    /// Sources in unit-torus coordinates `η y`.
    src: Vec<Point>,
    normal: Vec<Point>,
    wphi: Vec<Point>,
    wsig: Vec<Point>,
    sigma_total: Point,
    images: Vec<Point>,
    // structure factors per wave
    sa: Vec<C64>,
    sb: Vec<[C64; 3]>,
    sc: Vec<[C64; 3]>,
}

impl RemainderSum {
    pub fn new(dim: usize, eta: f64, sources: &LayerSources) -> Result<Self> {
        Self::with_alpha(dim, eta, sources, MULTI_ALPHA)
    }

    pub fn with_alpha(dim: usize, eta: f64, sources: &LayerSources, alpha: f64) -> Result<Self> {
        let green = PeriodicGreen::with_params(dim, alpha, MULTI_TOL)?;
        let m = sources.y.len();
        let src: Vec<Point> = sources.y.iter().map(|y| y * eta).collect();
        let wphi: Vec<Point> = (0..m).map(|j| sources.phi[j] * sources.w[j]).collect();
        let wsig: Vec<Point> = (0..m).map(|j| sources.sigma[j] * sources.w[j]).collect();
        let sigma_total = wsig.iter().fold(Point::zeros(), |a, b| a + b);
        // targets are wrapped into the centred cell
        let smax = src.iter().map(|s| s.norm()).fold(0.0, f64::max);
        let reach = green.r_cut + 0.5 * (dim as f64).sqrt() + smax;
        let nmax = reach.ceil() as i32;
        let zr = if dim == 3 { nmax } else { 0 };
        let mut images = Vec::new();
        for a in -nmax..=nmax {
            for b in -nmax..=nmax {
                for c in -zr..=zr {
                    let n = Point::new(a as f64, b as f64, c as f64);
                    if n.norm() > 0.0 && n.norm() <= reach {
                        images.push(n);
                    }
                }
            }
        }
        let nw = green.waves.len();
        let mut sa = vec![C64::default(); nw];
        let mut sb = vec![[C64::default(); 3]; nw];
        let mut sc = vec![[C64::default(); 3]; nw];
        for j in 0..m {
            let tabs = [
                axis_table(-src[j][0], green.mmax),
                axis_table(-src[j][1], green.mmax),
                axis_table(if dim == 3 { -src[j][2] } else { 0.0 }, green.mmax),
            ];
            let nphi = sources.n[j].dot(&wphi[j]);
            for (q, wv) in green.waves.iter().enumerate() {
                let e = phase(&tabs, &wv.m, dim);
                let nxi: f64 = (0..dim).map(|a| sources.n[j][a] * wv.xi[a]).sum();
                sa[q].re += e.re * nphi;
                sa[q].im += e.im * nphi;
                for a in 0..dim {
                    let f = nxi * wphi[j][a];
                    sb[q][a].re += e.re * f;
                    sb[q][a].im += e.im * f;
                    sc[q][a].re += e.re * wsig[j][a];
                    sc[q][a].im += e.im * wsig[j][a];
                }
            }
        }
        Ok(Self {
            green,
            dim,
            eta,
            src,
            normal: sources.n.clone(),
            wphi,
            wsig,
            sigma_total,
            images,
            sa,
            sb,
            sc,
        })
    }

    /// Remainder fields at `x`, a point of the centred cell of `η⁻¹𝕋^d`.
    pub fn eval(&self, x: &Point) -> RemainderFields {
        let d = self.dim;
        let t = x * self.eta;
        let mut out = RemainderFields::default();
        let rc2 = self.green.r_cut * self.green.r_cut;
        let alpha = self.green.alpha();
        for j in 0..self.src.len() {
            let z = t - self.src[j];
            let f = radial_remainder(d, alpha, z.norm());
            self.add_real(j, &z, &f, &mut out);
            for n in &self.images {
                let xn = z + n;
                let r2 = xn.norm_squared();
                if r2 <= rc2 {
                    self.add_real(j, &xn, &radial_full(d, alpha, r2.sqrt()), &mut out);
                }
            }
        }
        self.add_reciprocal(&t, &mut out);
        let s0 = self.eta.powi(d as i32 - 2);
        let s1 = self.eta.powi(d as i32 - 1);
        out.d *= s1;
        out.p *= s1 * self.eta;
        out.s *= s0;
        out.q *= s1;
        if d == 2 {
            out.s += self.sigma_total * (self.eta.ln() / (4.0 * PI));
        }
        out
    }

    #[inline]
    fn add_real(&self, j: usize, x: &Point, f: &Radial, out: &mut RemainderFields) {
        let nv = &self.normal[j];
        let phi = &self.wphi[j];
        let sig = &self.wsig[j];
        let nphi = nv.dot(phi);
        let nx = nv.dot(x);
        let xphi = x.dot(phi);
        let xsig = x.dot(sig);
        out.d += x * (f.pp * nphi - f.b1 * nx * xphi - f.b * nphi) - phi * (f.a1 * nx) - nv * (f.b * xphi);
        out.p -= f.pp * nphi + f.pp1 * xphi * nx;
        out.s += sig * f.a + x * (f.b * xsig);
        out.q += f.pp * xsig;
    }

    fn add_reciprocal(&self, t: &Point, out: &mut RemainderFields) {
        let d = self.dim;
        let m = self.green.mmax;
        let tabs = [
            axis_table(t[0], m),
            axis_table(t[1], m),
            axis_table(if d == 3 { t[2] } else { 0.0 }, m),
        ];
        for (q, wv) in self.green.waves.iter().enumerate() {
            let e = phase(&tabs, &wv.m, d);
            let c = wv.coef;
            let k2: f64 = wv.xi.iter().map(|v| v * v).sum();
            let a = e.mul(self.sa[q]);
            let mut b = [C64::default(); 3];
            let mut cc = [C64::default(); 3];
            let mut xib = C64::default();
            let mut xic = C64::default();
            for l in 0..d {
                b[l] = e.mul(self.sb[q][l]);
                cc[l] = e.mul(self.sc[q][l]);
                xib.re += wv.xi[l] * b[l].re;
                xib.im += wv.xi[l] * b[l].im;
                xic.re += wv.xi[l] * cc[l].re;
                xic.im += wv.xi[l] * cc[l].im;
            }
            for l in 0..d {
                let h = wv.xi[l] / k2;
                out.d[l] += c * (wv.xi[l] * a.im + b[l].im - h * xib.im);
                out.s[l] += c * (cc[l].re - h * xic.re);
            }
            out.p -= c * xib.re;
            out.q += c * xic.im;
        }
    }
}
