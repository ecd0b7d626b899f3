//! Quadrature tables behind the characteristic function
//! `psi(t) = exp( int (e^{itx} - 1 - itx/(1+x^2)) l(x) dx )`.
//!
//! The Levy density is `l(x) = F(x)/(pi x)` on `(0, 1]` and
//! `G(-x)/(pi |x|)` on `[-1, 0)`. The range `|x| >= delta` is integrated by a
//! fixed node table; `|x| < delta` by the power series of the integrand
//! against the moments `m_j = int_0^delta x^j l(x) dx`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::sinc::{f_measure, g_measure, hump_height, hump_roots, main_lobe_root, sinc};
use crate::numeric::{gauss_legendre, NeumaierSum};

/// Highest power kept in the small-`x` series.
const MAX_POWER: usize = 17;
/// Humps summed explicitly in the moment integrals before the tail formula.
const HUMP_LIMIT: usize = 20_000;
/// Largest `x`-width of a far-field sub-panel.
const MAX_PANEL_WIDTH: f64 = 0.039;

#[derive(Clone, Debug)]
pub(crate) struct FarTable {
    /// `(x, w * l(x))` on `(0, 1]` and on `[-1, 0)` (stored as `|x|`).
    plus: Vec<(f64, f64)>,
    minus: Vec<(f64, f64)>,
}

#[derive(Clone, Debug)]
pub(crate) struct NearMoments {
    /// `m_j^+` and `m_j^-` for `j = 0..=MAX_POWER` (entries below 2 unused).
    plus: Vec<f64>,
    minus: Vec<f64>,
}

/// Breakpoints of `F` (even humps) or `G` (odd humps) on `[delta, 1]`,
/// descending: each panel `(lo, hi)` has its square-root singularity at `hi`.
fn panels(delta: f64, positive: bool) -> Vec<(f64, f64)> {
    let mut cuts = vec![];
    let mut n = if positive { 2 } else { 1 };
    let top = if positive { 1.0 } else { hump_height(1) };
    cuts.push(top);
    loop {
        let h = hump_height(n);
        if h <= delta {
            break;
        }
        cuts.push(h);
        n += 2;
    }
    cuts.push(delta);
    cuts.windows(2).map(|w| (w[1], w[0])).collect()
}

pub(crate) fn build_far_table(delta: f64) -> FarTable {
    let (gx, gw) = gauss_legendre(12);
    let side = |positive: bool| -> Vec<(f64, f64)> {
        let ps = panels(delta, positive);
        let nodes: Vec<(f64, f64)> = ps
            .iter()
            .flat_map(|&(lo, hi)| {
                let m = ((2.0 * (hi - lo) / MAX_PANEL_WIDTH).ceil() as usize).max(1);
                let mut out = Vec::with_capacity(12 * m);
                for i in 0..m {
                    let (ua, ub) = (i as f64 / m as f64, (i + 1) as f64 / m as f64);
                    let (c, h) = (0.5 * (ua + ub), 0.5 * (ub - ua));
                    for (xi, wi) in gx.iter().zip(&gw) {
                        let u = c + h * xi;
                        let x = hi - (hi - lo) * u * u;
                        let jac = 2.0 * (hi - lo) * u;
                        out.push((x, wi * h * jac));
                    }
                }
                out
            })
            .collect();
        nodes
            .into_par_iter()
            .map(|(x, w)| {
                let meas = if positive { f_measure(x) } else { g_measure(x) };
                (x, w * meas / (PI * x))
            })
            .collect()
    };
    FarTable {
        plus: side(true),
        minus: side(false),
    }
}

/// `int_0^pi sin^j s ds`.
fn sin_power_integral(j: usize) -> f64 {
    let mut c = [PI, 2.0];
    for k in 2..=j {
        let next = (k - 1) as f64 / k as f64 * c[k % 2];
        c[k % 2] = next;
    }
    c[j % 2]
}

/// Adds `int_a^b |sinc|^j` for `j = 2..=MAX_POWER` into `acc`, with the hump
/// given in local coordinates `s` (`x = base + s`).
fn add_powers(acc: &mut [NeumaierSum], base: f64, a: f64, b: f64, gx: &[f64], gw: &[f64]) {
    if b <= a {
        return;
    }
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mut local = [0.0f64; MAX_POWER + 1];
    for (xi, wi) in gx.iter().zip(gw) {
        let s = c + h * xi;
        let v = if base == 0.0 { sinc(s) } else { s.sin() / (base + s) };
        let v = v.abs();
        let mut p = v * v;
        for slot in local.iter_mut().take(MAX_POWER + 1).skip(2) {
            *slot += wi * h * p;
            p *= v;
        }
    }
    for j in 2..=MAX_POWER {
        acc[j].add(local[j]);
    }
}

pub(crate) fn build_near_moments(delta: f64) -> NearMoments {
    let (gx, gw) = gauss_legendre(40);
    let side = |positive: bool| -> Vec<f64> {
        let mut acc = vec![NeumaierSum::new(); MAX_POWER + 1];
        if positive {
            add_powers(&mut acc, 0.0, main_lobe_root(delta), PI, &gx, &gw);
        }
        let mut n = if positive { 2 } else { 1 };
        let mut last = n;
        while n <= HUMP_LIMIT {
            let base = n as f64 * PI;
            match hump_roots(n, delta) {
                Some((s1, s2)) => {
                    add_powers(&mut acc, base, 0.0, s1, &gx, &gw);
                    add_powers(&mut acc, base, s2, PI, &gx, &gw);
                }
                None => add_powers(&mut acc, base, 0.0, PI, &gx, &gw),
            }
            last = n;
            n += 2;
        }
        let n0 = (last + 2) as f64;
        let meas = if positive { f_measure(delta) } else { g_measure(delta) };
        let mut out = vec![0.0; MAX_POWER + 1];
        for j in 2..=MAX_POWER {
            let jf = j as f64;
            let tail = sin_power_integral(j) / (2.0 * PI.powi(j as i32) * (jf - 1.0) * (n0 - 0.5).powf(jf - 1.0));
            acc[j].add(tail);
            acc[j].add(delta.powi(j as i32) * meas);
            out[j] = acc[j].value() / (jf * PI);
        }
        out
    };
    NearMoments {
        plus: side(true),
        minus: side(false),
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// The exponent `E(t)` with `psi = exp(E)`, for `t >= 0`.
pub(crate) fn exponent(far: &FarTable, near: &NearMoments, t: f64) -> Complex64 {
    let mut re = NeumaierSum::new();
    let mut im = NeumaierSum::new();
    for &(x, wl) in &far.plus {
        let (s, c) = (t * x).sin_cos();
        re.add(wl * (c - 1.0));
        im.add(wl * (s - t * x / (1.0 + x * x)));
    }
    for &(x, wl) in &far.minus {
        let (s, c) = (t * x).sin_cos();
        re.add(wl * (c - 1.0));
        im.add(-wl * (s - t * x / (1.0 + x * x)));
    }
    for k in (2..=MAX_POWER).step_by(2) {
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        re.add(sign * t.powi(k as i32) / factorial(k) * (near.plus[k] + near.minus[k]));
    }
    let mut k = 1;
    while 2 * k + 1 <= MAX_POWER {
        let j = 2 * k + 1;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let coeff = sign * (t.powi(j as i32) / factorial(j) - t);
        im.add(coeff * (near.plus[j] - near.minus[j]));
        k += 1;
    }
    Complex64::new(re.value(), im.value())
}
