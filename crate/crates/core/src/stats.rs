//! Statistical primitives: Wilcoxon signed-rank test, least-squares fits and
//! a Wald test that all selected coefficients are equal.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky_solve, Qr};

/// Samples at or below this size without tied magnitudes get an exact
/// Wilcoxon p-value.
pub const WILCOXON_EXACT_MAX_N: usize = 25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    /// W+ for Wilcoxon, chi-squared for Wald.
    pub statistic: f64,
    pub z_value: Option<f64>,
    pub p_value: f64,
    pub effect_size: f64,
    /// Pairs used (Wilcoxon, after dropping zeros) or observations (Wald).
    pub n: usize,
    pub df: Option<u32>,
    pub method: String,
}

impl TestResult {
    /// Result for a difference set in which every difference is zero: no
    /// evidence either way.
    pub fn null_difference(n_zero: usize) -> Self {
        TestResult {
            statistic: 0.0,
            z_value: Some(0.0),
            p_value: 1.0,
            effect_size: 0.0,
            n: 0,
            df: None,
            method: format!("wilcoxon-degenerate ({n_zero} zero differences)"),
        }
    }
}

/// Upper tail of the standard normal.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / core::f64::consts::SQRT_2)
}

/// Upper tail of the chi-squared distribution with `df` degrees of freedom.
pub fn chi2_sf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_q(0.5 * df, 0.5 * x)
}

/// Regularized upper incomplete gamma function Q(a, x).
fn gamma_q(a: f64, x: f64) -> f64 {
    const EPS: f64 = 1e-16;
    const MAX_ITER: usize = 10_000;
    let log_prefix = a * libm::log(x) - x - libm::lgamma(a);
    if x < a + 1.0 {
        // Series for P(a, x).
        let (mut term, mut sum, mut ap) = (1.0 / a, 1.0 / a, a);
        for _ in 0..MAX_ITER {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if libm::fabs(term) < libm::fabs(sum) * EPS {
                break;
            }
        }
        (1.0 - sum * libm::exp(log_prefix)).clamp(0.0, 1.0)
    } else {
        // Continued fraction (modified Lentz).
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if libm::fabs(d) < tiny {
                d = tiny;
            }
            c = b + an / c;
            if libm::fabs(c) < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if libm::fabs(delta - 1.0) < EPS {
                break;
            }
        }
        (libm::exp(log_prefix) * h).clamp(0.0, 1.0)
    }
}

/// Wilcoxon signed-rank test on paired differences.
///
/// Zero differences are dropped and tied magnitudes share their average
/// rank. Samples of at most [`WILCOXON_EXACT_MAX_N`] pairs without ties get
/// an exact two-sided p-value from the null distribution of W+; otherwise a
/// normal approximation with tie and continuity corrections is used.
///
/// `z_value` is the signed standardized statistic without continuity
/// correction, and `effect_size = z / sqrt(n)` (positive when positive
/// differences dominate).
pub fn wilcoxon_signed_rank(differences: &[f64]) -> Result<TestResult> {
    if differences.is_empty() {
        return Err(Error::invalid("wilcoxon needs at least one difference"));
    }
    if differences.iter().any(|d| !d.is_finite()) {
        return Err(Error::invalid("wilcoxon differences must be finite"));
    }
    let nonzero: Vec<f64> = differences.iter().copied().filter(|&d| d != 0.0).collect();
    let n = nonzero.len();
    if n == 0 {
        return Err(Error::DegenerateSample);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        libm::fabs(nonzero[a])
            .partial_cmp(&libm::fabs(nonzero[b]))
            .unwrap_or(Ordering::Equal)
    });
    let mut ranks = vec![0.0; n];
    let mut tie_term = 0.0;
    let mut has_ties = false;
    let mut start = 0;
    while start < n {
        let mag = libm::fabs(nonzero[order[start]]);
        let mut end = start + 1;
        while end < n && libm::fabs(nonzero[order[end]]) == mag {
            end += 1;
        }
        let t = (end - start) as f64;
        if end - start > 1 {
            has_ties = true;
            tie_term += t * t * t - t;
        }
        // Ranks start..end (1-based start+1..=end) share their mean.
        let avg = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = avg;
        }
        start = end;
    }
    let w_plus: f64 = nonzero
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();

    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let variance = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
    let sigma = libm::sqrt(variance);
    let z = (w_plus - mean) / sigma;

    let (p_value, method) = if n <= WILCOXON_EXACT_MAX_N && !has_ties {
        (exact_two_sided_p(n, w_plus as u64), "wilcoxon-exact")
    } else {
        let excess = libm::fabs(w_plus - mean) - 0.5;
        let z_cc = if excess > 0.0 { excess / sigma } else { 0.0 };
        ((2.0 * normal_sf(z_cc)).min(1.0), "wilcoxon-normal")
    };

    Ok(TestResult {
        statistic: w_plus,
        z_value: Some(z),
        p_value,
        effect_size: z / libm::sqrt(nf),
        n,
        df: None,
        method: String::from(method),
    })
}

/// Two-sided exact p-value for W+ = `w` with `n` untied ranks, computed
/// from the counts of the null distribution.
fn exact_two_sided_p(n: usize, w: u64) -> f64 {
    let max = n * (n + 1) / 2;
    let mut counts = vec![0u64; max + 1];
    counts[0] = 1;
    for rank in 1..=n {
        for total in (rank..=max).rev() {
            counts[total] += counts[total - rank];
        }
    }
    let w = w as usize;
    let lower: u64 = counts[..=w].iter().sum();
    let upper: u64 = counts[w..].iter().sum();
    let tail = lower.min(upper);
    let total = (1u64 << n) as f64;
    ((2 * tail) as f64 / total).min(1.0)
}

/// Ordinary least-squares fit with an intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlmFit {
    /// Intercept first, then one slope per predictor.
    pub coefficients: Vec<f64>,
    /// Row-major `k x k` covariance of the coefficients.
    pub covariance: Vec<f64>,
    pub residual_variance: f64,
    pub rss: f64,
    pub n: usize,
    /// `"(intercept)"` followed by the predictor labels.
    pub predictor_labels: Vec<String>,
}

impl GlmFit {
    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    pub fn cov(&self, i: usize, j: usize) -> f64 {
        self.covariance[i * self.dim() + j]
    }

    pub fn std_error(&self, i: usize) -> f64 {
        libm::sqrt(self.cov(i, i))
    }
}

pub const INTERCEPT_LABEL: &str = "(intercept)";

/// Fits `response ~ 1 + predictors` by Householder QR.
///
/// `predictors` holds one column per predictor; an intercept column is
/// prepended. The covariance is `sigma^2 (X^T X)^{-1}` with
/// `sigma^2 = RSS / (n - k)`.
pub fn ols_fit<S: AsRef<str>>(response: &[f64], predictors: &[Vec<f64>], labels: &[S]) -> Result<GlmFit> {
    let n = response.len();
    let k = predictors.len() + 1;
    if labels.len() != predictors.len() {
        return Err(Error::invalid("one label per predictor column is required"));
    }
    if let Some(bad) = predictors.iter().position(|c| c.len() != n) {
        return Err(Error::invalid(format!(
            "predictor '{}' has {} rows, response has {n}",
            labels[bad].as_ref(),
            predictors[bad].len()
        )));
    }
    if n <= k {
        return Err(Error::TooFewObservations { needed: k, got: n });
    }
    if response.iter().chain(predictors.iter().flatten()).any(|v| !v.is_finite()) {
        return Err(Error::invalid("regression inputs must be finite"));
    }

    let mut predictor_labels = Vec::with_capacity(k);
    predictor_labels.push(String::from(INTERCEPT_LABEL));
    predictor_labels.extend(labels.iter().map(|l| String::from(l.as_ref())));

    let mut design = vec![0.0; n * k];
    for i in 0..n {
        design[i * k] = 1.0;
        for (j, col) in predictors.iter().enumerate() {
            design[i * k + j + 1] = col[i];
        }
    }
    let qr = Qr::new(&design, n, k);
    if let Some(col) = qr.deficient_column(1e-10) {
        return Err(Error::RankDeficient {
            column: predictor_labels[col].clone(),
        });
    }

    // A constant response is reproduced exactly by the intercept alone.
    let coefficients = if response.iter().all(|&y| y == response[0]) {
        let mut beta = vec![0.0; k];
        beta[0] = response[0];
        beta
    } else {
        let mut qty = response.to_vec();
        qr.apply_qt(&mut qty);
        qr.solve_r(&qty)
    };

    let rss: f64 = (0..n)
        .map(|i| {
            let fitted: f64 = (0..k).map(|j| design[i * k + j] * coefficients[j]).sum();
            let r = response[i] - fitted;
            r * r
        })
        .sum();
    let residual_variance = rss / (n - k) as f64;
    let covariance = qr
        .xtx_inverse()
        .into_iter()
        .map(|v| v * residual_variance)
        .collect();

    Ok(GlmFit {
        coefficients,
        covariance,
        residual_variance,
        rss,
        n,
        predictor_labels,
    })
}

/// Wald chi-squared test of `beta[i0] = beta[i1] = ...` using chained
/// contrasts `beta[i_k] - beta[i_{k+1}]`. The effect size is Cohen's
/// `w = sqrt(chi2 / n)`.
pub fn wald_equal_coefficients(fit: &GlmFit, indices: &[usize]) -> Result<TestResult> {
    let k = fit.dim();
    if indices.len() < 2 {
        return Err(Error::invalid("wald test needs at least two coefficients"));
    }
    for (pos, &idx) in indices.iter().enumerate() {
        if idx == 0 || idx >= k {
            return Err(Error::invalid(format!(
                "coefficient index {idx} must be a slope in 1..{k}"
            )));
        }
        if indices[..pos].contains(&idx) {
            return Err(Error::invalid(format!("coefficient index {idx} repeated")));
        }
    }
    let m = indices.len() - 1;
    let diffs: Vec<f64> = indices
        .windows(2)
        .map(|w| fit.coefficients[w[0]] - fit.coefficients[w[1]])
        .collect();

    let statistic = if diffs.iter().all(|&d| d == 0.0) {
        0.0
    } else {
        // (C Cov C^T)_{ab} for contrast rows e_{a0} - e_{a1}.
        let mut v = vec![0.0; m * m];
        for a in 0..m {
            for b in 0..m {
                let (a0, a1) = (indices[a], indices[a + 1]);
                let (b0, b1) = (indices[b], indices[b + 1]);
                v[a * m + b] = fit.cov(a0, b0) - fit.cov(a0, b1) - fit.cov(a1, b0) + fit.cov(a1, b1);
            }
        }
        let x = cholesky_solve(&v, &diffs, m).ok_or(Error::DegenerateContrast)?;
        diffs.iter().zip(&x).map(|(d, x)| d * x).sum()
    };

    Ok(TestResult {
        statistic,
        z_value: None,
        p_value: chi2_sf(statistic, m as f64),
        effect_size: libm::sqrt(statistic / fit.n as f64),
        n: fit.n,
        df: Some(m as u32),
        method: String::from("wald-chi2"),
    })
}
