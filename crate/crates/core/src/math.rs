//! Gaussian primitives in log space.
//!
//! Every density in the crate is carried as a natural-log value. A chain of
//! `T` steps over `d` dimensions multiplies `T * d` Gaussian factors, which
//! underflows `f64` long before `T` reaches realistic sizes.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Smallest variance any Gaussian in the crate may carry.
pub const VARIANCE_FLOOR: f64 = 1e-12;

/// `0.5 * ln(2π)`.
pub const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// A continuous-valued token: a finite `d`-dimensional real vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Token(Vec<f64>);

impl Token {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::usage("token must have at least one component"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("token"));
        }
        Ok(Token(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for Token {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Token::new(values)
    }
}

impl From<Token> for Vec<f64> {
    fn from(t: Token) -> Self {
        t.0
    }
}

impl AsRef<[f64]> for Token {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Diagonal Gaussian: per-dimension mean and variance.
///
/// Variances below [`VARIANCE_FLOOR`] are clamped up at construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    mean: Vec<f64>,
    variance: Vec<f64>,
}

impl GaussianParams {
    pub fn new(mean: Vec<f64>, variance: Vec<f64>) -> Result<Self> {
        check_dim(mean.len(), variance.len())?;
        if mean.is_empty() {
            return Err(Error::usage("gaussian must have at least one dimension"));
        }
        if mean.iter().chain(variance.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("gaussian parameters"));
        }
        let variance = variance.into_iter().map(|v| v.max(VARIANCE_FLOOR)).collect();
        Ok(GaussianParams { mean, variance })
    }

    pub fn standard(d: usize) -> Self {
        GaussianParams {
            mean: vec![0.0; d],
            variance: vec![1.0; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn variance(&self) -> &[f64] {
        &self.variance
    }

    /// `0.5 * Σ ln var_i`, i.e. `ln sqrt(|Σ|)` for the diagonal covariance.
    pub fn half_log_det(&self) -> f64 {
        0.5 * self.variance.iter().map(|v| v.ln()).sum::<f64>()
    }
}

/// Log-density of `x` under a diagonal Gaussian, in nats.
pub fn gaussian_logpdf(x: &[f64], params: &GaussianParams) -> Result<f64> {
    check_dim(params.dim(), x.len())?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("density argument"));
    }
    Ok(logpdf_unchecked(x, params))
}

pub(crate) fn logpdf_unchecked(x: &[f64], params: &GaussianParams) -> f64 {
    x.iter()
        .zip(&params.mean)
        .zip(&params.variance)
        .map(|((&xi, &m), &v)| {
            let z = xi - m;
            -HALF_LN_2PI - 0.5 * v.ln() - z * z / (2.0 * v)
        })
        .sum()
}

/// `x_i = sqrt(var_i) * eps_i + mean_i`.
pub fn reparameterize(params: &GaussianParams, eps: &[f64]) -> Result<Token> {
    check_dim(params.dim(), eps.len())?;
    Token::new(reparameterize_raw(params, eps))
}

pub(crate) fn reparameterize_raw(params: &GaussianParams, eps: &[f64]) -> Vec<f64> {
    params
        .mean
        .iter()
        .zip(&params.variance)
        .zip(eps)
        .map(|((&m, &v), &e)| v.sqrt() * e + m)
        .collect()
}

/// Log of `sqrt(|Σ_q|) / sqrt(|Σ_p|)` for diagonal covariances:
/// `0.5 * Σ_i (ln var_q_i - ln var_p_i)`.
pub fn log_sigma_ratio_term(var_q: &[f64], var_p: &[f64]) -> Result<f64> {
    check_dim(var_q.len(), var_p.len())?;
    if var_q.iter().chain(var_p).any(|&v| !v.is_finite() || v < VARIANCE_FLOOR) {
        return Err(Error::usage(format!(
            "variance below floor {VARIANCE_FLOOR:e} or non-finite"
        )));
    }
    Ok(0.5 * var_q.iter().zip(var_p).map(|(q, p)| q.ln() - p.ln()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn g(mean: &[f64], var: &[f64]) -> GaussianParams {
        GaussianParams::new(mean.to_vec(), var.to_vec()).unwrap()
    }

    #[test]
    fn logpdf_standard_normal_at_mode() {
        let v = gaussian_logpdf(&[0.0], &g(&[0.0], &[1.0])).unwrap();
        assert_abs_diff_eq!(v, -0.918_938_5, epsilon = 1e-7);
    }

    #[test]
    fn logpdf_two_dims_sums_components() {
        let v = gaussian_logpdf(&[1.0, 1.0], &g(&[0.0, 0.0], &[1.0, 1.0])).unwrap();
        assert_abs_diff_eq!(v, -2.837_877_1, epsilon = 1e-7);
    }

    #[test]
    fn logpdf_three_sigma_out() {
        let v = gaussian_logpdf(&[-1.0], &g(&[2.0], &[1.0])).unwrap();
        assert_abs_diff_eq!(v, -5.418_938_5, epsilon = 1e-7);
    }

    #[test]
    fn logpdf_rejects_bad_input() {
        let p = g(&[0.0, 0.0], &[1.0, 1.0]);
        assert!(matches!(
            gaussian_logpdf(&[0.0], &p),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            gaussian_logpdf(&[f64::NAN, 0.0], &p),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn variance_clamped_to_floor() {
        let p = g(&[0.0], &[0.0]);
        assert_eq!(p.variance()[0], VARIANCE_FLOOR);
        assert!(gaussian_logpdf(&[0.0], &p).unwrap().is_finite());
    }

    #[test]
    fn reparameterize_examples() {
        let p = g(&[2.0, -1.0], &[4.0, 9.0]);
        assert_eq!(reparameterize(&p, &[0.0, 0.0]).unwrap().as_slice(), &[2.0, -1.0]);
        assert_eq!(reparameterize(&p, &[1.0, -1.0]).unwrap().as_slice(), &[4.0, -4.0]);
        let s = g(&[0.0], &[1.0]);
        assert_eq!(reparameterize(&s, &[1.5]).unwrap().as_slice(), &[1.5]);
        assert!(reparameterize(&s, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn sigma_ratio_examples() {
        assert_eq!(log_sigma_ratio_term(&[0.3, 2.0], &[0.3, 2.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(
            log_sigma_ratio_term(&[0.25], &[1.0]).unwrap(),
            -std::f64::consts::LN_2,
            epsilon = 1e-7
        );
        assert_abs_diff_eq!(
            log_sigma_ratio_term(&[0.25, 0.25], &[1.0, 1.0]).unwrap(),
            -1.386_294_4,
            epsilon = 1e-7
        );
        assert!(log_sigma_ratio_term(&[1e-13], &[1.0]).is_err());
    }

    #[test]
    fn density_integrates_to_one() {
        // midpoint rule over ±8σ
        for &(m, v) in &[(0.0, 1.0), (1.5, 0.04), (-3.0, 7.0)] {
            let p = g(&[m], &[v]);
            let sd = f64::sqrt(v);
            let bins = 200_000;
            let (lo, hi) = (m - 8.0 * sd, m + 8.0 * sd);
            let w = (hi - lo) / bins as f64;
            let total: f64 = (0..bins)
                .map(|i| gaussian_logpdf(&[lo + (i as f64 + 0.5) * w], &p).unwrap().exp() * w)
                .sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn token_rejects_non_finite() {
        assert!(Token::new(vec![1.0, f64::INFINITY]).is_err());
        assert!(Token::new(vec![]).is_err());
        let t: Token = serde_json::from_str("[1.0, 2.0]").unwrap();
        assert_eq!(t.dim(), 2);
    }
}
