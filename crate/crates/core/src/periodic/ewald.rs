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


//! Ewald evaluation of the periodic Stokes pair (G, P) and the periodic
//! Laplace Green function on the unit torus.
//!
//! The splitting multiplies the Fourier symbols by `(1 + s) e^{-s}`,
//! `s = |ξ|² / 4α²`, in reciprocal space. The real-space part then has zero mean
//! and the full sums are mean-zero without a correction constant.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::kernels::Mat;
use crate::special::{e1, ein, erf, erfc, EULER_GAMMA};
use std::f64::consts::PI;

/// Default target accuracy of the lattice sums.
pub const DEFAULT_TOL: f64 = 1e-14;

/// Below this value of `α r` the remainders use their Taylor series.
const SERIES_SWITCH: f64 = 0.25;

/// Values of a Stokes pair and the Laplace Green function at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreenValues {
    /// `g[(i, j)] = G_ij`.
    pub g: Mat,
    /// `p[k] = P_k`.
    pub p: Point,
    /// `grad_g[l][(i, j)] = ∂_l G_ij`.
    pub grad_g: [Mat; 3],
    /// `grad_p[(k, l)] = ∂_l P_k`.
    pub grad_p: Mat,
    /// Laplace Green function.
    pub lap: f64,
}

impl Default for GreenValues {
    fn default() -> Self {
        Self {
            g: Mat::zeros(),
            p: Point::zeros(),
            grad_g: [Mat::zeros(); 3],
            grad_p: Mat::zeros(),
            lap: 0.0,
        }
    }
}

impl GreenValues {
    /// Gradient of the Laplace Green function, `-P`.
    pub fn grad_lap(&self) -> Point {
        -self.p
    }

    fn add_radial(&mut self, dim: usize, x: &Point, f: &Radial) {
        for i in 0..dim {
            self.g[(i, i)] += f.a;
            self.grad_p[(i, i)] += f.pp;
            for j in 0..dim {
                self.g[(i, j)] += f.b * x[i] * x[j];
                self.grad_p[(i, j)] += f.pp1 * x[i] * x[j];
            }
            self.p[i] += f.pp * x[i];
        }
        for l in 0..dim {
            let gl = &mut self.grad_g[l];
            for i in 0..dim {
                gl[(i, i)] += f.a1 * x[l];
                for j in 0..dim {
                    gl[(i, j)] += f.b1 * x[l] * x[i] * x[j];
                }
                gl[(i, l)] += f.b * x[i];
                gl[(l, i)] += f.b * x[i];
            }
        }
        self.lap += f.psi;
    }
}

/// Radial profiles of one real-space term `a I + b x xᵀ`, its gradient
/// coefficients `a1 = a'/r`, `b1 = b'/r`, the pressure `pp x` with
/// `pp1 = pp'/r`, and the Laplace profile `psi`.
#[derive(Clone, Copy, Debug, Default)]
pub(super) struct Radial {
    pub a: f64,
    pub a1: f64,
    pub b: f64,
    pub b1: f64,
    pub pp: f64,
    pub pp1: f64,
    pub psi: f64,
}

impl Radial {
    fn minus(self, o: Radial) -> Radial {
        Radial {
            a: self.a - o.a,
            a1: self.a1 - o.a1,
            b: self.b - o.b,
            b1: self.b1 - o.b1,
            pp: self.pp - o.pp,
            pp1: self.pp1 - o.pp1,
            psi: self.psi - o.psi,
        }
    }
}

// Taylor coefficients in U = α²r² of the remainders (real-space term minus the
// free-space profile), in the order a, a1, b, b1, pp, pp1, psi. Row i carries the
// factor α^{POW[i]}.
const POW3: [i32; 7] = [1, 3, 3, 5, 3, 5, 1];
#[allow(clippy::approx_constant)]
const SERIES3: [[f64; 8]; 7] = [
    [0.08979356106258328, -0.059862374041722184, 0.026938068318774985, -0.008551767720246026, 0.002078554654226465, -0.00040815255028446947, 6.71533042134704e-05, -9.501964133606696e-06],
    [-0.11972474808344437, 0.10775227327509994, -0.05131060632147616, 0.01662843723381172, -0.004081525502844695, 0.0008058396505616448, -0.00013302749787049375, 1.8864193500542704e-05],
    [0.029931187020861092, -0.017958712212516655, 0.00641382579018452, -0.0016628437233811718, 0.0003401271252370579, -5.755997504011749e-05, 8.314218616905859e-06, -1.0480107500301503e-06],
    [-0.03591742442503331, 0.02565530316073808, -0.009977062340287031, 0.002721017001896463, -0.0005755997504011749, 9.977062340287032e-05, -1.4672150500422105e-05, 1.8753876579486901e-06],
    [0.14965593510430547, -0.12571098548761658, 0.05772443211166068, -0.01829128095719289, 0.004421652628081752, -0.0008633996256017623, 0.00014134171648739962, -1.9912204250572857e-05],
    [-0.25142197097523317, 0.23089772844664272, -0.10974768574315734, 0.03537322102465402, -0.008633996256017623, 0.0016961005978487953, -0.00027877085950802, 3.938314081692249e-05],
    [0.1346903415938749, -0.07482796755215274, 0.031427746371904146, -0.00962073868527678, 0.0022864101196491114, -0.00044216526280817524, 7.194996880014686e-05, -1.0095836891957114e-05],
];
const POW2: [i32; 7] = [0, 2, 2, 4, 2, 4, 0];
#[allow(clippy::approx_constant)]
const SERIES2: [[f64; 8]; 7] = [
    [0.10254415312073617, -0.1193662073189215, 0.04973591971621729, -0.01547339724504538, 0.003730193978716297, -0.0007294601558378536, 0.00011973462153904163, -1.6916979495312003e-05],
    [-0.238732414637843, 0.19894367886486916, -0.09284038347027228, 0.029841551829730376, -0.0072946015583785365, 0.0014368154584684996, -0.00023683771293436806, 3.355200933236881e-05],
    [0.07957747154594767, -0.039788735772973836, 0.013262911924324612, -0.003315727981081153, 0.0006631455962162305, -0.00011052426603603843, 1.5789180862291205e-05, -1.9736476077864007e-06],
    [-0.07957747154594767, 0.05305164769729845, -0.019894367886486918, 0.005305164769729844, -0.0011052426603603842, 0.00018947017034749445, -2.7631066509009607e-05, 3.508706858286934e-06],
    [0.3183098861837907, -0.238732414637843, 0.1061032953945969, -0.03315727981081153, 0.007957747154594767, -0.001547339724504538, 0.0002526268937966593, -3.552565694015521e-05],
    [-0.477464829275686, 0.4244131815783876, -0.19894367886486916, 0.06366197723675814, -0.01547339724504538, 0.0030315227255599112, -0.0004973591971621729, 7.017413716573868e-05],
    [0.12551083469552465, -0.15915494309189535, 0.05968310365946075, -0.017683882565766147, 0.004144659976351441, -0.0007957747154594767, 0.00012894497704204482, -1.8044778128332803e-05],
];

fn horner(c: &[f64; 8], u: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * u + ci)
}

pub(super) fn radial_full(dim: usize, alpha: f64, r: f64) -> Radial {
    let uu = alpha * alpha * r * r;
    let g = (-uu).exp();
    if dim == 3 {
        let e = erfc(alpha * r);
        let q = alpha / PI.powf(1.5);
        let (r2, r3) = (r * r, r * r * r);
        let r5 = r3 * r2;
        let a2 = alpha * alpha;
        Radial {
            a: q * g / 4.0 - e / (8.0 * PI * r),
            a1: -a2 * q * g / 2.0 + q * g / (4.0 * r2) + e / (8.0 * PI * r3),
            b: -q * g / (4.0 * r2) - e / (8.0 * PI * r3),
            b1: a2 * q * g / (2.0 * r2) + 3.0 * q * g / (4.0 * r2 * r2) + 3.0 * e / (8.0 * PI * r5),
            pp: a2 * q * g / 2.0 - q * g / (2.0 * r2) - e / (4.0 * PI * r3),
            pp1: q * g * (-a2 * a2 + a2 / r2 + 1.5 / (r2 * r2)) + 3.0 * e / (4.0 * PI * r5),
            psi: q * g / 4.0 - e / (4.0 * PI * r),
        }
    } else {
        let ex = e1(uu);
        let r2 = r * r;
        let r4 = r2 * r2;
        Radial {
            a: -ex / (8.0 * PI) + g / (4.0 * PI),
            a1: (1.0 - 2.0 * uu) * g / (4.0 * PI * r2),
            b: -g / (4.0 * PI * r2),
            b1: (uu + 1.0) * g / (2.0 * PI * r4),
            pp: (uu - 1.0) * g / (2.0 * PI * r2),
            pp1: (1.0 + uu - uu * uu) * g / (PI * r4),
            psi: (g - ex) / (4.0 * PI),
        }
    }
}

pub(super) fn radial_free(dim: usize, r: f64) -> Radial {
    let r2 = r * r;
    if dim == 3 {
        let r3 = r2 * r;
        let r5 = r3 * r2;
        Radial {
            a: -1.0 / (8.0 * PI * r),
            a1: 1.0 / (8.0 * PI * r3),
            b: -1.0 / (8.0 * PI * r3),
            b1: 3.0 / (8.0 * PI * r5),
            pp: -1.0 / (4.0 * PI * r3),
            pp1: 3.0 / (4.0 * PI * r5),
            psi: -1.0 / (4.0 * PI * r),
        }
    } else {
        let r4 = r2 * r2;
        Radial {
            a: r.ln() / (4.0 * PI),
            a1: 1.0 / (4.0 * PI * r2),
            b: -1.0 / (4.0 * PI * r2),
            b1: 1.0 / (2.0 * PI * r4),
            pp: -1.0 / (2.0 * PI * r2),
            pp1: 1.0 / (PI * r4),
            psi: r.ln() / (2.0 * PI),
        }
    }
}

/// Real-space term minus its free-space singular part; smooth at r = 0.
pub(super) fn radial_remainder(dim: usize, alpha: f64, r: f64) -> Radial {
    let u = alpha * r;
    if u >= SERIES_SWITCH {
        if dim == 3 {
            // a and psi have cancellation-free closed forms
            let mut f = radial_full(3, alpha, r).minus(radial_free(3, r));
            let q = alpha / PI.powf(1.5);
            let g = (-u * u).exp();
            f.a = q * g / 4.0 + erf(u) / (8.0 * PI * r);
            f.psi = q * g / 4.0 + erf(u) / (4.0 * PI * r);
            return f;
        }
        let mut f = radial_full(2, alpha, r).minus(radial_free(2, r));
        let uu = u * u;
        let g = (-uu).exp();
        // -E1(U) - ln U = Ein(U) - γ
        f.a = (EULER_GAMMA - ein(uu)) / (8.0 * PI) + alpha.ln() / (4.0 * PI) + g / (4.0 * PI);
        f.psi = (EULER_GAMMA - ein(uu)) / (4.0 * PI) + alpha.ln() / (2.0 * PI) + g / (4.0 * PI);
        return f;
    }
    let uu = u * u;
    let (pows, table) = if dim == 3 { (&POW3, &SERIES3) } else { (&POW2, &SERIES2) };
    let v: Vec<f64> = (0..7)
        .map(|i| alpha.powi(pows[i]) * horner(&table[i], uu))
        .collect();
    let mut f = Radial {
        a: v[0],
        a1: v[1],
        b: v[2],
        b1: v[3],
        pp: v[4],
        pp1: v[5],
        psi: v[6],
    };
    if dim == 2 {
        f.a += alpha.ln() / (4.0 * PI);
        f.psi += alpha.ln() / (2.0 * PI);
    }
    f
}

/// Real-space accumulator over the upper triangle `i ≤ j`.
#[derive(Default)]
struct Acc {
    a: f64,
    pp: f64,
    lap: f64,
    sym: [f64; 6],
    gp: [f64; 6],
    p: [f64; 3],
    // Σ a1 x_l, Σ b x_i, Σ b1 x_l x_i x_j
    a1x: [f64; 3],
    bx: [f64; 3],
    b1x: [[f64; 6]; 3],
}

impl Acc {
    #[inline]
    fn add(&mut self, d: usize, x: &Point, f: &Radial) {
        self.a += f.a;
        self.pp += f.pp;
        self.lap += f.psi;
        for (q, &(i, j)) in SYM.iter().enumerate() {
            if j >= d {
                continue;
            }
            let xx = x[i] * x[j];
            self.sym[q] += f.b * xx;
            self.gp[q] += f.pp1 * xx;
            for l in 0..d {
                self.b1x[l][q] += f.b1 * x[l] * xx;
            }
        }
        for l in 0..d {
            self.p[l] += f.pp * x[l];
            self.a1x[l] += f.a1 * x[l];
            self.bx[l] += f.b * x[l];
        }
    }

    fn store(&self, d: usize, out: &mut GreenValues) {
        for (q, &(i, j)) in SYM.iter().enumerate() {
            if j >= d {
                continue;
            }
            let diag = if i == j { 1.0 } else { 0.0 };
            let gv = self.a * diag + self.sym[q];
            let pv = self.pp * diag + self.gp[q];
            out.g[(i, j)] += gv;
            out.grad_p[(i, j)] += pv;
            if i != j {
                out.g[(j, i)] += gv;
                out.grad_p[(j, i)] += pv;
            }
            for l in 0..d {
                let mut v = self.a1x[l] * diag + self.b1x[l][q];
                if i == l {
                    v += self.bx[j];
                }
                if j == l {
                    v += self.bx[i];
                }
                out.grad_g[l][(i, j)] += v;
                if i != j {
                    out.grad_g[l][(j, i)] += v;
                }
            }
        }
        for l in 0..d {
            out.p[l] += self.p[l];
        }
        out.lap += self.lap;
    }
}

#[derive(Clone, Debug)]
pub(super) struct Wave {
    pub m: [i32; 3],
    pub xi: [f64; 3],
    /// ξ̂ξ̂ᵀ, upper triangle row-major.
    pub hat: [f64; 6],
    /// ξξᵀ, same layout.
    pub outer: [f64; 6],
    /// `-2 (1 + s) e^{-s} / |ξ|²`; the factor 2 accounts for -ξ.
    pub coef: f64,
}

pub(super) const SYM: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

/// Periodic Stokes and Laplace Green functions on the unit torus.
#[derive(Clone, Debug)]
pub struct PeriodicGreen {
    dim: usize,
    alpha: f64,
    tol: f64,
    pub(super) r_cut: f64,
    images: Vec<Point>,
    pub(super) waves: Vec<Wave>,
    pub(super) mmax: usize,
}

impl PeriodicGreen {
    /// Splitting parameter √π for the unit cell.
    pub fn new(dim: usize) -> Result<Self> {
        Self::with_params(dim, PI.sqrt(), DEFAULT_TOL)
    }

    pub fn with_params(dim: usize, alpha: f64, tol: f64) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::Dimension(format!("periodic Green function for d = {dim}")));
        }
        if !(alpha > 0.0 && tol > 0.0 && tol < 1e-2) {
            return Err(Error::Parameter(format!("alpha {alpha}, tol {tol}")));
        }
        // real space: the profiles decay like (αr)^4 e^{-α²r²}
        let scale = (1.0 + alpha).powi(5);
        let mut u: f64 = 1.0;
        while (1.0 + u.powi(4)) * (-u * u).exp() > tol / scale {
            u += 0.05;
        }
        let r_cut = u / alpha;
        let reach = r_cut + 0.5 * (dim as f64).sqrt();
        let nmax = reach.ceil() as i32;
        let zr = if dim == 3 { nmax } else { 0 };
        let mut images = Vec::new();
        for a in -nmax..=nmax {
            for b in -nmax..=nmax {
                for c in -zr..=zr {
                    let n = Point::new(a as f64, b as f64, c as f64);
                    if n.norm() <= reach {
                        images.push(n);
                    }
                }
            }
        }
        images.sort_by(|x, y| x.norm().partial_cmp(&y.norm()).unwrap());
        // reciprocal space: terms behave like s (1 + s) e^{-s}
        let mut s: f64 = 1.0;
        while s * (1.0 + s) * (-s).exp() > 1e-2 * tol {
            s += 0.25;
        }
        let k_cut = 2.0 * alpha * s.sqrt();
        let mmax = (k_cut / (2.0 * PI)).floor() as i32;
        let mut waves = Vec::new();
        let mz = if dim == 3 { mmax } else { 0 };
        for a in -mmax..=mmax {
            for b in -mmax..=mmax {
                for c in -mz..=mz {
                    // half space: first nonzero index positive
                    let first = if a != 0 { a } else if b != 0 { b } else { c };
                    if first <= 0 {
                        continue;
                    }
                    let xi = [2.0 * PI * a as f64, 2.0 * PI * b as f64, 2.0 * PI * c as f64];
                    let k2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
                    if k2.sqrt() > k_cut {
                        continue;
                    }
                    let s = k2 / (4.0 * alpha * alpha);
                    let mut hat = [0.0; 6];
                    let mut outer = [0.0; 6];
                    for (q, &(i, j)) in SYM.iter().enumerate() {
                        outer[q] = xi[i] * xi[j];
                        hat[q] = outer[q] / k2;
                    }
                    waves.push(Wave {
                        m: [a, b, c],
                        xi,
                        hat,
                        outer,
                        coef: -2.0 * (1.0 + s) * (-s).exp() / k2,
                    });
                }
            }
        }
        Ok(Self {
            dim,
            alpha,
            tol,
            r_cut,
            images,
            waves,
            mmax: mmax.max(0) as usize,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Number of real-space images and reciprocal wave pairs.
    pub fn shell_counts(&self) -> (usize, usize) {
        (self.images.len(), self.waves.len())
    }

    fn wrap(&self, z: &Point) -> (Point, Point) {
        let mut w = *z;
        let mut n0 = Point::zeros();
        for a in 0..self.dim {
            n0[a] = z[a].round();
            w[a] -= n0[a];
        }
        if self.dim == 2 {
            w[2] = 0.0;
        }
        (w, n0)
    }

    /// G, P, their gradients and G_Δ at `z`.
    pub fn eval(&self, z: &Point) -> Result<GreenValues> {
        let (w, _) = self.wrap(z);
        if w.norm() < 1e-14 {
            return Err(Error::Singular);
        }
        let mut out = GreenValues::default();
        self.real_space(&w, false, &mut out);
        self.reciprocal(&w, &mut out);
        Ok(out)
    }

    /// `G - Γ`, `P - θ`, their gradients and `G_Δ - Φ`, with the free-space
    /// parts taken at `z` itself (not at its periodic image).
    pub fn remainder(&self, z: &Point) -> GreenValues {
        let (w, n0) = self.wrap(z);
        let mut out = GreenValues::default();
        if n0.norm() == 0.0 {
            self.real_space(&w, true, &mut out);
            self.reciprocal(&w, &mut out);
            return out;
        }
        self.real_space(&w, false, &mut out);
        self.reciprocal(&w, &mut out);
        let mut zz = *z;
        if self.dim == 2 {
            zz[2] = 0.0;
        }
        let free = radial_free(self.dim, zz.norm());
        let neg = Radial::default().minus(free);
        out.add_radial(self.dim, &zz, &neg);
        out
    }

    fn real_space(&self, w: &Point, subtract_origin: bool, out: &mut GreenValues) {
        let d = self.dim;
        let rc2 = self.r_cut * self.r_cut;
        let mut acc = Acc::default();
        for n in &self.images {
            let x = w + n;
            let r2 = x.norm_squared();
            let origin = n.norm_squared() == 0.0;
            if origin && subtract_origin {
                acc.add(d, &x, &radial_remainder(d, self.alpha, r2.sqrt()));
            } else if r2 <= rc2 {
                acc.add(d, &x, &radial_full(d, self.alpha, r2.sqrt()));
            }
        }
        acc.store(d, out);
    }

    fn reciprocal(&self, w: &Point, out: &mut GreenValues) {
        let d = self.dim;
        let m = self.mmax;
        // per-axis e^{i 2π k w_a}
        let mut tab = vec![[(1.0f64, 0.0f64); 3]; m + 1];
        for a in 0..d {
            let (s1, c1) = (2.0 * PI * w[a]).sin_cos();
            for k in 1..=m {
                let (c, s) = tab[k - 1][a];
                tab[k][a] = if k % 8 == 0 {
                    let (sk, ck) = (2.0 * PI * k as f64 * w[a]).sin_cos();
                    (ck, sk)
                } else {
                    (c * c1 - s * s1, s * c1 + c * s1)
                };
            }
        }
        let ax = |k: i32, a: usize| -> (f64, f64) {
            let (c, s) = tab[k.unsigned_abs() as usize][a];
            if k < 0 {
                (c, -s)
            } else {
                (c, s)
            }
        };
        let mut lap = 0.0;
        let mut hat_cos = [0.0; 6];
        let mut p = [0.0; 3];
        let mut hat_sin = [[0.0; 6]; 3];
        let mut out_cos = [0.0; 6];
        for wv in &self.waves {
            let (c0, s0) = ax(wv.m[0], 0);
            let (c1, s1) = ax(wv.m[1], 1);
            let (mut c, mut s) = (c0 * c1 - s0 * s1, s0 * c1 + c0 * s1);
            if d == 3 {
                let (c2, s2) = ax(wv.m[2], 2);
                let (cc, ss) = (c * c2 - s * s2, s * c2 + c * s2);
                c = cc;
                s = ss;
            }
            let cc = wv.coef * c;
            let cs = wv.coef * s;
            lap += cc;
            for q in 0..6 {
                hat_cos[q] += cc * wv.hat[q];
                out_cos[q] += cc * wv.outer[q];
            }
            for l in 0..d {
                let t = cs * wv.xi[l];
                p[l] += t;
                for q in 0..6 {
                    hat_sin[l][q] += t * wv.hat[q];
                }
            }
        }
        out.lap += lap;
        for (q, &(i, j)) in SYM.iter().enumerate() {
            if i >= d || j >= d {
                continue;
            }
            out.g[(i, j)] -= hat_cos[q];
            out.grad_p[(i, j)] += out_cos[q];
            if i != j {
                out.g[(j, i)] -= hat_cos[q];
                out.grad_p[(j, i)] += out_cos[q];
            }
            for l in 0..d {
                out.grad_g[l][(i, j)] += hat_sin[l][q];
                if i != j {
                    out.grad_g[l][(j, i)] += hat_sin[l][q];
                }
            }
        }
        for i in 0..d {
            out.g[(i, i)] += lap;
            out.p[i] += p[i];
            for l in 0..d {
                out.grad_g[l][(i, i)] -= p[l];
            }
        }
    }

    /// Green functions of the torus `η⁻¹𝕋^d`:
    /// `G^η(x) = η^{d-2} G(ηx)`, `P^η(x) = η^{d-1} P(ηx)`, `G^η_Δ(x) = η^{d-2} G_Δ(ηx)`.
    pub fn eval_scaled(&self, eta: f64, x: &Point) -> Result<GreenValues> {
        let v = self.eval(&(x * eta))?;
        Ok(self.scale(eta, v, false))
    }

    /// `G^η - Γ`, `P^η - θ`, their gradients and `G^η_Δ - Φ` at `x`.
    /// In 2D this includes the constants `log η / 4π` (velocity) and
    /// `log η / 2π` (Laplace).
    pub fn remainder_scaled(&self, eta: f64, x: &Point) -> GreenValues {
        let v = self.remainder(&(x * eta));
        self.scale(eta, v, true)
    }

    fn scale(&self, eta: f64, mut v: GreenValues, remainder: bool) -> GreenValues {
        let d = self.dim as i32;
        let s0 = eta.powi(d - 2);
        let s1 = eta.powi(d - 1);
        let s2 = eta.powi(d);
        v.g *= s0;
        v.lap *= s0;
        v.p *= s1;
        for gl in v.grad_g.iter_mut() {
            *gl *= s1;
        }
        v.grad_p *= s2;
        if remainder && self.dim == 2 {
            let l = eta.ln();
            for i in 0..2 {
                v.g[(i, i)] += l / (4.0 * PI);
            }
            v.lap += l / (2.0 * PI);
        }
        v
    }
}
