//! Level sets of `sin x / x` on `x > 0`.
//!
//! Hump `n >= 1` is `(n pi, (n+1) pi)`, where `sinc` has sign `(-1)^n`. Inside
//! a hump we work in the local coordinate `s = x - n pi`, so `|sinc| = t`
//! reads `sin s = t (n pi + s)` and widths never suffer from cancellation in
//! large `x`. Hump `0` is the main lobe `(0, pi)`.

use std::f64::consts::PI;

use crate::numeric::NeumaierSum;

/// `sin x / x`, accurate near 0.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Offset `s_n` of the extremum of hump `n >= 1`: the solution of
/// `tan x = x` in `(n pi, n pi + pi/2)`.
pub fn hump_offset(n: usize) -> f64 {
    let base = n as f64 * PI;
    let mut s = 0.5 * PI;
    for _ in 0..200 {
        let next = (base + s).atan();
        if (next - s).abs() <= 1e-17 {
            return next;
        }
        s = next;
    }
    s
}

/// `max |sinc|` on hump `n >= 1`, equal to `1 / sqrt(1 + x_n^2)`.
pub fn hump_height(n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let x = n as f64 * PI + hump_offset(n);
    1.0 / (1.0 + x * x).sqrt()
}

/// Safeguarded Newton iteration on a bracket with `f(lo)` and `f(hi)` of
/// opposite sign.
pub(crate) fn rtsafe<F: Fn(f64) -> (f64, f64)>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let lo_positive = f(lo).0 > 0.0;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..300 {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return x;
        }
        if (fx > 0.0) == lo_positive {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        let next = if dfx != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 1e-16 * (1.0 + x.abs()) || hi - lo <= 1e-16 * (1.0 + x.abs()) {
            return next;
        }
        x = next;
    }
    x
}

/// The root `a(t)` of `sinc = t` in the main lobe, `0 < t < 1`.
pub fn main_lobe_root(t: f64) -> f64 {
    debug_assert!(t > 0.0 && t < 1.0);
    rtsafe(
        |x| {
            let v = sinc(x) - t;
            let d = if x.abs() < 1e-4 {
                -x / 3.0
            } else {
                (x * x.cos() - x.sin()) / (x * x)
            };
            (v, d)
        },
        0.0,
        PI,
    )
}

/// Local roots `0 < s1 < s_n < s2 < pi` of `sin s = t (n pi + s)`, if hump `n`
/// reaches above `t`.
pub fn hump_roots(n: usize, t: f64) -> Option<(f64, f64)> {
    debug_assert!(n >= 1);
    let base = n as f64 * PI;
    let sn = hump_offset(n);
    if sn.sin() - t * (base + sn) <= 0.0 {
        return None;
    }
    let g = |s: f64| (s.sin() - t * (base + s), s.cos() - t);
    let s1 = rtsafe(g, 0.0, sn);
    let s2 = rtsafe(g, sn, PI);
    Some((s1, s2))
}

/// Intervals, in absolute `x`, where `sinc >= t` (`positive`) or
/// `sinc <= -t`, together with the hump index they belong to.
pub fn level_set(t: f64, positive: bool) -> Vec<(usize, f64, f64)> {
    let mut out = Vec::new();
    if t >= 1.0 {
        return out;
    }
    if positive {
        out.push((0, 0.0, main_lobe_root(t)));
    }
    let mut n = if positive { 2 } else { 1 };
    while hump_height(n) > t {
        if let Some((s1, s2)) = hump_roots(n, t) {
            let base = n as f64 * PI;
            out.push((n, base + s1, base + s2));
        }
        n += 2;
    }
    out
}

fn measure(t: f64, positive: bool) -> f64 {
    if t >= 1.0 {
        return 0.0;
    }
    let mut acc = NeumaierSum::new();
    if positive {
        acc.add(main_lobe_root(t));
    }
    let mut n = if positive { 2 } else { 1 };
    while hump_height(n) > t {
        if let Some((s1, s2)) = hump_roots(n, t) {
            acc.add(s2 - s1);
        }
        n += 2;
    }
    acc.value()
}

/// `lambda{x > 0 : sinc x >= t}` for `t > 0`.
pub fn f_measure(t: f64) -> f64 {
    measure(t, true)
}

/// `lambda{x > 0 : sinc x <= -t}` for `t > 0`.
pub fn g_measure(t: f64) -> f64 {
    measure(t, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_hump_is_global_minimum() {
        let x1 = PI + hump_offset(1);
        assert!((x1 - 4.493409457909064).abs() < 1e-13);
        assert!((hump_height(1) - 0.217233628211222).abs() < 1e-13);
        assert!((sinc(x1) + hump_height(1)).abs() < 1e-15);
    }

    #[test]
    fn heights_decrease() {
        let h: Vec<f64> = (0..200).map(hump_height).collect();
        assert!(h.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn roots_solve_the_equation() {
        for &t in &[0.01, 0.05, 0.1, 0.2] {
            for (n, a, b) in level_set(t, false).into_iter().chain(level_set(t, true)) {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                for x in [a, b] {
                    if x > 0.0 {
                        assert!((sign * sinc(x) - t).abs() < 1e-14, "n={n} x={x}");
                    }
                }
                let mid = 0.5 * (a + b);
                assert!(sign * sinc(mid) > t);
            }
        }
    }

    #[test]
    fn closed_form_values() {
        assert!((f_measure(2.0 / PI) - PI / 2.0).abs() < 1e-13);
        assert_eq!(f_measure(1.0), 0.0);
        assert_eq!(g_measure(0.3), 0.0);
        assert!(g_measure(0.1) > 0.0);
    }

    #[test]
    fn measures_match_a_fine_scan() {
        // midpoint count on a fine grid, independent of the root finder
        for &t in &[0.05, 0.12, 0.3] {
            let h = 1e-5;
            let xmax = 1.0 / t;
            let steps = (xmax / h) as usize + 1;
            let (mut fp, mut gm) = (0usize, 0usize);
            for i in 0..steps {
                let s = sinc((i as f64 + 0.5) * h);
                if s >= t {
                    fp += 1;
                }
                if s <= -t {
                    gm += 1;
                }
            }
            assert!((fp as f64 * h - f_measure(t)).abs() < 1e-4);
            assert!((gm as f64 * h - g_measure(t)).abs() < 1e-4);
        }
    }
}
