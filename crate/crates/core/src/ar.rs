//! Autoregressive model of order u with intercept,
//!
//! ```text
//! Y_t = mu + phi_1 Y_{t-1} + ... + phi_u Y_{t-u} + e_t
//! ```
//!
//! covering simulation, PACF-based order identification and conditional
//! least-squares fitting. Coefficients are validated for stationarity at
//! construction through the reflection-coefficient (step-down) recursion: the
//! model is stationary exactly when every reflection coefficient lies inside
//! the unit interval.

use crate::error::{Error, Result};
use crate::series::{sample_pacf, significance_limit, Series};
use serde::{Deserialize, Serialize};

/// Default widest lag scanned during order identification.
pub const DEFAULT_MAX_IDENTIFICATION_LAG: usize = 20;

/// Default ceiling on the identified order.
pub const DEFAULT_AR_ORDER_CAP: usize = 5;

/// A fully specified autoregression. `order == coefficients.len()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArSpec {
    pub order: usize,
    pub coefficients: Vec<f64>,
    pub intercept: f64,
}

impl ArSpec {
    pub fn new(coefficients: Vec<f64>, intercept: f64) -> Result<Self> {
        if coefficients.iter().any(|c| !c.is_finite()) || !intercept.is_finite() {
            return Err(Error::invalid("AR parameters must be finite"));
        }
        if !is_stationary(&coefficients) {
            return Err(Error::invalid(format!(
                "AR coefficients {coefficients:?} do not define a stationary model"
            )));
        }
        Ok(ArSpec { order: coefficients.len(), coefficients, intercept })
    }

    /// Stationary mean mu / (1 - sum phi_i).
    pub fn stationary_mean(&self) -> f64 {
        self.intercept / (1.0 - self.coefficients.iter().sum::<f64>())
    }
}

/// Step-down recursion: peel off one reflection coefficient per order.
fn is_stationary(phi: &[f64]) -> bool {
    let mut a = phi.to_vec();
    for k in (1..=phi.len()).rev() {
        let r = a[k - 1];
        if r.abs() >= 1.0 {
            return false;
        }
        if k == 1 {
            break;
        }
        let denom = 1.0 - r * r;
        let reduced: Vec<f64> = (0..k - 1).map(|j| (a[j] + r * a[k - 2 - j]) / denom).collect();
        a.truncate(k - 1);
        a.copy_from_slice(&reduced);
    }
    true
}

/// An AR fit: estimated model, standard errors and one residual per usable
/// time point (the first `fitted_order` observations have no residual).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArFit {
    pub spec: ArSpec,
    /// Standard error of each phi coefficient, from the OLS covariance.
    pub coefficient_standard_errors: Vec<f64>,
    pub intercept_se: f64,
    pub residuals: Vec<f64>,
    pub fitted_order: usize,
}

/// Drive the AR recursion with the given innovations.
///
/// Pre-sample values are set to the stationary mean, so the output starts at
/// the process level rather than at zero; callers wanting a fully mixed
/// sample should simulate extra points up front and discard them.
pub fn simulate_ar(spec: &ArSpec, innovations: &[f64]) -> Result<Vec<f64>> {
    if innovations.is_empty() {
        return Err(Error::invalid("innovations must be non-empty"));
    }
    if innovations.iter().any(|e| !e.is_finite()) {
        return Err(Error::invalid("innovations must be finite"));
    }
    let m = spec.stationary_mean();
    let mut y = Vec::with_capacity(innovations.len());
    for (t, e) in innovations.iter().enumerate() {
        let mut v = spec.intercept + e;
        for (i, phi) in spec.coefficients.iter().enumerate() {
            let lagged = if t > i { y[t - 1 - i] } else { m };
            v += phi * lagged;
        }
        y.push(v);
    }
    Ok(y)
}

/// Identify the AR order from the partial autocorrelogram.
///
/// An AR(p) series has partial autocorrelations that stand clear of the
/// two-standard-error band through lag p and fall inside it afterwards, so
/// the identified order is the length of the initial run of lags with
/// `|pacf| > 2/sqrt(T)`. Scanning past the first in-band lag would mostly
/// collect the ~5% of spurious exceedances white noise produces at any lag.
/// The result is truncated to `cap`; 0 means no autoregressive structure.
pub fn identify_ar_order(series: &Series, max_order: usize, cap: usize) -> Result<usize> {
    if max_order < 2 || max_order >= series.len() {
        return Err(Error::invalid(format!(
            "max_order must be in 2..{} for a series of length {}, got {max_order}",
            series.len(),
            series.len()
        )));
    }
    let pacf = sample_pacf(series, max_order)?;
    let limit = significance_limit(series.len());
    let mut order = 0;
    for point in &pacf {
        if point.value.abs() > limit {
            order = point.lag;
        } else {
            break;
        }
    }
    Ok(order.min(cap))
}

/// Fit an AR(u) by conditional least squares: regress Y_t on an intercept and
/// u lags over t = u..T. Order 0 degenerates to the mean-only model whose
/// residuals are the demeaned series.
pub fn fit_ar(series: &Series, order: usize) -> Result<ArFit> {
    let y = series.values();
    let t = y.len();
    if order == 0 {
        let m = series.mean();
        let residuals: Vec<f64> = y.iter().map(|v| v - m).collect();
        let se = (series.variance() / t as f64).sqrt();
        return Ok(ArFit {
            spec: ArSpec { order: 0, coefficients: vec![], intercept: m },
            coefficient_standard_errors: vec![],
            intercept_se: se,
            residuals,
            fitted_order: 0,
        });
    }
    if 4 * order >= t {
        return Err(Error::invalid(format!(
            "order {order} too large for series length {t} (need order < T/4)"
        )));
    }

    let dim = order + 1;
    let rows = t - order;
    // Accumulate the normal equations G = X'X and b = X'y directly; the
    // design row for time t is [1, y_{t-1}, ..., y_{t-order}].
    let mut g = vec![vec![0.0f64; dim]; dim];
    let mut b = vec![0.0f64; dim];
    for row in 0..rows {
        let tt = order + row;
        let mut x = Vec::with_capacity(dim);
        x.push(1.0);
        for j in 1..dim {
            x.push(y[tt - j]);
        }
        for i in 0..dim {
            b[i] += x[i] * y[tt];
            for j in i..dim {
                g[i][j] += x[i] * x[j];
            }
        }
    }
    for i in 0..dim {
        for j in 0..i {
            g[i][j] = g[j][i];
        }
    }

    let chol = cholesky(&g)
        .ok_or_else(|| Error::fit(format!("singular design matrix for AR({order}) fit")))?;
    let beta = chol_solve(&chol, &b);
    let inv_diag = chol_inverse_diagonal(&chol);

    let intercept = beta[0];
    let coefficients = beta[1..].to_vec();
    let spec = ArSpec::new(coefficients, intercept).map_err(|_| {
        Error::fit(format!("AR({order}) estimates fall outside the stationary region"))
    })?;

    let mut residuals = Vec::with_capacity(rows);
    let mut rss = 0.0;
    for row in 0..rows {
        let tt = order + row;
        let mut fitted = intercept;
        for (j, phi) in spec.coefficients.iter().enumerate() {
            fitted += phi * y[tt - 1 - j];
        }
        let r = y[tt] - fitted;
        rss += r * r;
        residuals.push(r);
    }

    let df = rows as f64 - dim as f64;
    if df <= 0.0 {
        return Err(Error::fit(format!("no residual degrees of freedom for AR({order})")));
    }
    let sigma2 = rss / df;
    let ses: Vec<f64> = inv_diag.iter().map(|d| (sigma2 * d).sqrt()).collect();

    Ok(ArFit {
        spec,
        coefficient_standard_errors: ses[1..].to_vec(),
        intercept_se: ses[0],
        residuals,
        fitted_order: order,
    })
}

/// Cholesky factor L (lower triangular) of a symmetric positive definite
/// matrix, or None if the matrix is not positive definite.
fn cholesky(g: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = g.len();
    let mut l = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = g[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

fn chol_solve(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = l.len();
    let mut z = vec![0.0f64; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * z[k];
        }
        z[i] = s / l[i][i];
    }
    let mut x = vec![0.0f64; n];
    for i in (0..n).rev() {
        let mut s = z[i];
        for k in i + 1..n {
            s -= l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    x
}

/// Diagonal of (L L')^{-1}, obtained column by column from unit vectors.
fn chol_inverse_diagonal(l: &[Vec<f64>]) -> Vec<f64> {
    let n = l.len();
    let mut diag = vec![0.0f64; n];
    for col in 0..n {
        let mut e = vec![0.0f64; n];
        e[col] = 1.0;
        let x = chol_solve(l, &e);
        diag[col] = x[col];
    }
    diag
}
