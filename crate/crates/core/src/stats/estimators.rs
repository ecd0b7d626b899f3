use num_complex::Complex64;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::diophantine::moment_exact;
use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;
use crate::periodic::TrigPolynomial;
use crate::sequences::IntegerSequence;

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// `sup_i max(|i/M - F(v_(i))|, |(i-1)/M - F(v_(i))|)` over the sorted sample.
pub fn ks_distance<F: Fn(f64) -> f64>(values: &[f64], cdf: F) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::invalid("KS distance of an empty sample"));
    }
    let v = sorted(values);
    let m = v.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in v.iter().enumerate() {
        let c = cdf(x);
        d = d.max(((i + 1) as f64 / m - c).abs()).max((i as f64 / m - c).abs());
    }
    Ok(d)
}

/// Distribution function of `N(mean, variance)`.
pub fn normal_cdf(mean: f64, variance: f64) -> Result<impl Fn(f64) -> f64> {
    let n = Normal::new(mean, variance.sqrt()).map_err(|e| Error::invalid(format!("normal law: {e}")))?;
    Ok(move |x| n.cdf(x))
}

/// Population mean and variance.
pub fn mean_and_variance(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::invalid("empty sample"));
    }
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m;
    Ok((mean, var))
}

/// KS distance to the normal law with the sample's own mean and variance.
pub fn ks_fitted_normal(values: &[f64]) -> Result<f64> {
    let (mean, var) = mean_and_variance(values)?;
    if var <= 0.0 {
        return Err(Error::invalid("degenerate sample: zero variance"));
    }
    ks_distance(values, normal_cdf(mean, var)?)
}

/// `(1/M) sum v_i^p`.
pub fn empirical_moment(values: &[f64], p: u32) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::invalid("empty sample"));
    }
    let mut acc = NeumaierSum::new();
    for v in values {
        acc.add(v.powi(p as i32));
    }
    Ok(acc.value() / values.len() as f64)
}

/// `(1/M) sum exp(i t v_i)`.
pub fn empirical_cf(values: &[f64], t: f64) -> Result<Complex64> {
    if values.is_empty() {
        return Err(Error::invalid("empty sample"));
    }
    let (mut re, mut im) = (NeumaierSum::new(), NeumaierSum::new());
    for v in values {
        let (s, c) = (t * v).sin_cos();
        re.add(c);
        im.add(s);
    }
    let m = values.len() as f64;
    Ok(Complex64::new(re.value() / m, im.value() / m))
}

/// `mu_4 / mu_2^2 - 3` with central population moments.
pub fn excess_kurtosis(values: &[f64]) -> Result<f64> {
    let (mean, var) = mean_and_variance(values)?;
    if var <= 0.0 {
        return Err(Error::invalid("degenerate sample: zero variance"));
    }
    let m4 = values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / values.len() as f64;
    Ok(m4 / (var * var) - 3.0)
}

/// `int_0^1 S_N^2 dx / (N ||f||^2)`.
pub fn variance_ratio(f: &TrigPolynomial, seq: &IntegerSequence, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("variance ratio needs N >= 1"));
    }
    Ok(moment_exact(f, seq, n, 2)? / (n as f64 * f.l2_norm_sq()))
}
