//! The infinitely divisible limit law built from the level sets of
//! `sin x / x`: the functions `F`, `G`, the Levy function `L`, the
//! characteristic function `psi` and its distribution function.

mod cf;
mod sinc;

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::{gauss_legendre, integrate, NeumaierSum};

pub use sinc::{hump_height, hump_offset, level_set, sinc};

/// Below this `|x|` the Levy integral is handled by moments.
const NEAR_CUTOFF: f64 = 1e-3;
/// `psi` is reported as 0 beyond this `|t|`; there `|psi| < 1e-8`.
pub const PSI_T_MAX: f64 = 64.0;
/// Width of the panels used to tabulate `psi` for the inversion.
const CDF_PANEL: f64 = 0.02;
const CDF_NODES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            abs_tol: 1e-12,
            max_panels: 1 << 16,
        }
    }
}

#[derive(Debug)]
struct CdfTable {
    t_max: f64,
    /// `(t, w, psi(t))` on `(0, t_max]`.
    nodes: Vec<(f64, f64, Complex64)>,
}

/// Lazily tabulated limit law; every table is built once and then shared.
#[derive(Debug)]
pub struct LevyLaw {
    config: QuadratureConfig,
    far: OnceLock<cf::FarTable>,
    near: OnceLock<cf::NearMoments>,
    cdf: OnceLock<CdfTable>,
}

impl Default for LevyLaw {
    fn default() -> Self {
        LevyLaw::new(QuadratureConfig::default())
    }
}

fn positive(t: f64, what: &str) -> Result<()> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::invalid(format!("{what} requires t > 0, got {t}")));
    }
    Ok(())
}

impl LevyLaw {
    pub fn new(config: QuadratureConfig) -> Self {
        LevyLaw {
            config,
            far: OnceLock::new(),
            near: OnceLock::new(),
            cdf: OnceLock::new(),
        }
    }

    /// Process-wide instance with the default configuration.
    pub fn global() -> &'static LevyLaw {
        static LAW: OnceLock<LevyLaw> = OnceLock::new();
        LAW.get_or_init(LevyLaw::default)
    }

    pub fn config(&self) -> QuadratureConfig {
        self.config
    }

    /// `F(t) = lambda{x > 0 : sin x / x >= t}`.
    pub fn f_func(&self, t: f64) -> Result<f64> {
        positive(t, "F")?;
        Ok(sinc::f_measure(t))
    }

    /// `G(t) = lambda{x > 0 : sin x / x <= -t}`.
    pub fn g_func(&self, t: f64) -> Result<f64> {
        positive(t, "G")?;
        Ok(sinc::g_measure(t))
    }

    /// `L(x) = -(1/pi) int_x^1 F(t)/t dt` for `0 < x <= 1`,
    /// `(1/pi) int_{|x|}^1 G(t)/t dt` for `-1 <= x < 0`, 0 for `|x| > 1`.
    ///
    /// Evaluated through `int_x^1 F(t)/t dt = int_{sinc >= x} ln(sinc(y)/x) dy`,
    /// one smooth integral per hump.
    pub fn levy_l(&self, x: f64) -> Result<f64> {
        if x == 0.0 || x.is_nan() {
            return Err(Error::invalid("L is undefined at x = 0"));
        }
        let a = x.abs();
        if a >= 1.0 {
            return Ok(0.0);
        }
        let pieces = level_set(a, x > 0.0);
        if pieces.len() > self.config.max_panels {
            return Err(Error::invalid(format!(
                "L({x}) needs {} panels, above the configured {}",
                pieces.len(),
                self.config.max_panels
            )));
        }
        let tol = self.config.abs_tol / pieces.len().max(1) as f64;
        let mut acc = NeumaierSum::new();
        for (n, lo, hi) in pieces {
            let v = if n == 0 {
                integrate(&|y| (sinc(y) / a).ln(), lo, hi, tol)
            } else {
                let base = n as f64 * PI;
                integrate(&|s| (s.sin().abs() / ((base + s) * a)).ln(), lo - base, hi - base, tol)
            };
            acc.add(v);
        }
        let sign = if x > 0.0 { -1.0 } else { 1.0 };
        Ok(sign * acc.value() / PI)
    }

    /// Density `l = L'`: `F(x)/(pi x)` on `(0, 1]`, `G(-x)/(pi |x|)` on `[-1, 0)`.
    pub fn levy_density(&self, x: f64) -> Result<f64> {
        if x == 0.0 || x.is_nan() {
            return Err(Error::invalid("the Levy density is undefined at x = 0"));
        }
        let a = x.abs();
        if a > 1.0 {
            return Ok(0.0);
        }
        let m = if x > 0.0 { sinc::f_measure(a) } else { sinc::g_measure(a) };
        Ok(m / (PI * a))
    }

    fn exponent(&self, t: f64) -> Complex64 {
        let far = self.far.get_or_init(|| cf::build_far_table(NEAR_CUTOFF));
        let near = self.near.get_or_init(|| cf::build_near_moments(NEAR_CUTOFF));
        cf::exponent(far, near, t)
    }

    /// `psi(t) = exp( int (e^{itx} - 1 - itx/(1+x^2)) dL(x) )`.
    pub fn char_function(&self, t: f64) -> Complex64 {
        if t == 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        if t.is_nan() || t.abs() > PSI_T_MAX {
            return Complex64::new(0.0, 0.0);
        }
        let e = self.exponent(t.abs());
        let v = e.exp();
        if t < 0.0 {
            v.conj()
        } else {
            v
        }
    }

    /// Log of `psi` without the exponential, for `|t| <= PSI_T_MAX`.
    pub fn char_exponent(&self, t: f64) -> Result<Complex64> {
        if t.is_nan() || t.abs() > PSI_T_MAX {
            return Err(Error::invalid(format!("|t| must be at most {PSI_T_MAX}")));
        }
        if t == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let e = self.exponent(t.abs());
        Ok(if t < 0.0 { e.conj() } else { e })
    }

    fn cdf_table(&self) -> &CdfTable {
        self.cdf.get_or_init(|| {
            let mut t_max = 8.0;
            while t_max < PSI_T_MAX && self.char_function(t_max).norm() / t_max >= 1e-5 {
                t_max *= 2.0;
            }
            let (gx, gw) = gauss_legendre(CDF_NODES);
            let panels = (t_max / CDF_PANEL).round() as usize;
            let h = 0.5 * t_max / panels as f64;
            let ts: Vec<(f64, f64)> = (0..panels)
                .flat_map(|p| {
                    let c = (2 * p + 1) as f64 * h;
                    gx.iter().zip(&gw).map(move |(x, w)| (c + h * x, w * h)).collect::<Vec<_>>()
                })
                .collect();
            let nodes = ts
                .into_par_iter()
                .map(|(t, w)| (t, w, self.char_function(t)))
                .collect();
            CdfTable { t_max, nodes }
        })
    }

    /// Truncation point used by the inversion.
    pub fn inversion_cutoff(&self) -> f64 {
        self.cdf_table().t_max
    }

    /// `P(Y <= y) = 1/2 - (1/pi) int_0^T Im(e^{-ity} psi(t)) / t dt`, clamped
    /// to `[0, 1]`.
    pub fn limit_cdf(&self, y: f64) -> f64 {
        let table = self.cdf_table();
        let mut acc = NeumaierSum::new();
        for &(t, w, psi) in &table.nodes {
            let rot = Complex64::new((t * y).cos(), -(t * y).sin());
            acc.add(w * (rot * psi).im / t);
        }
        (0.5 - acc.value() / PI).clamp(0.0, 1.0)
    }

    /// [`limit_cdf`](Self::limit_cdf) on many points, made nondecreasing in
    /// `y` by a running maximum.
    pub fn limit_cdf_grid(&self, ys: &[f64]) -> Vec<f64> {
        let raw: Vec<f64> = ys.par_iter().map(|&y| self.limit_cdf(y)).collect();
        let mut order: Vec<usize> = (0..ys.len()).collect();
        order.sort_by(|&a, &b| ys[a].total_cmp(&ys[b]));
        let mut out = vec![0.0; ys.len()];
        let mut best = 0.0f64;
        for i in order {
            best = best.max(raw[i]);
            out[i] = best;
        }
        out
    }
}

pub fn f_func(t: f64) -> Result<f64> {
    LevyLaw::global().f_func(t)
}

pub fn g_func(t: f64) -> Result<f64> {
    LevyLaw::global().g_func(t)
}

pub fn levy_l(x: f64) -> Result<f64> {
    LevyLaw::global().levy_l(x)
}

pub fn levy_density(x: f64) -> Result<f64> {
    LevyLaw::global().levy_density(x)
}

pub fn char_function(t: f64) -> Complex64 {
    LevyLaw::global().char_function(t)
}

pub fn limit_cdf(y: f64) -> f64 {
    LevyLaw::global().limit_cdf(y)
}

pub fn limit_cdf_grid(ys: &[f64]) -> Vec<f64> {
    LevyLaw::global().limit_cdf_grid(ys)
}

/// Global minimum of `sin x / x` on `x > 0`, negated: `G` vanishes from here on.
pub fn g_max() -> f64 {
    hump_height(1)
}
