//! GARCH(p, q) conditional-variance model,
//!
//! ```text
//! Y_t = sigma_{t|t-1} eps_t,          eps_t ~ N(0, 1)
//! sigma^2_{t|t-1} = omega + sum_{i=1..q} alpha_i Y^2_{t-i}
//!                         + sum_{j=1..p} beta_j sigma^2_{t-j|t-j-1}
//! ```
//!
//! with q ARCH coefficients and p variance-feedback coefficients. Estimation
//! maximizes the Gaussian log-likelihood over a transformed parameter space
//! (log omega; a multinomial-logit map keeps every alpha and beta positive
//! with their sum below one), using Nelder-Mead from five jittered
//! moment-based starting points. Standard errors come from the numerically
//! inverted Hessian at the optimum; entries that are not defensible there
//! (non-finite curvature, negative inverse diagonal) are reported as missing
//! rather than patched over.
//!
//! When filtering observed data the variance recursion is seeded with the
//! sample variance of the data (denominator T), applied to both the
//! pre-sample variances and the pre-sample squared observations. Simulation
//! seeds the recursion with the unconditional variance instead and discards a
//! 200-point burn-in.

use crate::error::{Error, Result};
use crate::optim::nelder_mead;
use crate::seed::derive_seed;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Candidate orders scanned by [`identify_garch_order`], as (p, q) pairs.
pub const DEFAULT_GARCH_CANDIDATES: [(usize, usize); 4] = [(1, 1), (2, 1), (1, 2), (2, 2)];

/// Seed for the start-point jitter used when no caller seed is supplied.
/// Fitting is a pure function of (data, orders, seed), so a fixed default
/// keeps every fit reproducible.
pub const DEFAULT_FIT_SEED: u64 = 0x5eed_ab1e_0421_77c3;

const BURN_IN: usize = 200;
const SUM_CEILING: f64 = 1.0 - 1e-6;
const STARTS: usize = 5;

/// A valid GARCH parameterization: omega > 0, all coefficients non-negative,
/// coefficient sum strictly below one, at least one ARCH term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarchSpec {
    pub omega: f64,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl GarchSpec {
    pub fn new(omega: f64, alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::invalid(format!("omega must be positive and finite, got {omega}")));
        }
        if alpha.is_empty() {
            return Err(Error::invalid("at least one ARCH coefficient is required"));
        }
        if alpha.iter().chain(beta.iter()).any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::invalid("alpha and beta coefficients must be finite and >= 0"));
        }
        let sum: f64 = alpha.iter().sum::<f64>() + beta.iter().sum::<f64>();
        if sum >= 1.0 {
            return Err(Error::invalid(format!(
                "alpha + beta sums to {sum}, stationarity needs a sum below 1"
            )));
        }
        Ok(GarchSpec { omega, alpha, beta })
    }

    /// Number of variance-feedback (beta) terms.
    pub fn p(&self) -> usize {
        self.beta.len()
    }

    /// Number of ARCH (alpha) terms.
    pub fn q(&self) -> usize {
        self.alpha.len()
    }

    /// Long-run variance omega / (1 - sum alpha - sum beta).
    pub fn unconditional_variance(&self) -> f64 {
        let sum: f64 = self.alpha.iter().sum::<f64>() + self.beta.iter().sum::<f64>();
        self.omega / (1.0 - sum)
    }
}

/// Akaike information criterion, 2k - 2 ln L.
pub fn aic(log_likelihood: f64, k: usize) -> f64 {
    2.0 * k as f64 - 2.0 * log_likelihood
}

/// Run the one-step-ahead variance recursion over `data`, with all
/// pre-sample squared observations and variances pinned to `init`.
pub fn variance_filter(spec: &GarchSpec, data: &[f64], init: f64) -> Vec<f64> {
    raw_variance_filter(spec.omega, &spec.alpha, &spec.beta, data, init)
        .expect("a valid GarchSpec keeps the variance recursion positive")
}

/// Same recursion on raw parameters, which may be invalid (the Hessian probes
/// points slightly outside the constraint set). Returns None as soon as a
/// variance stops being positive and finite.
fn raw_variance_filter(
    omega: f64,
    alpha: &[f64],
    beta: &[f64],
    data: &[f64],
    init: f64,
) -> Option<Vec<f64>> {
    let n = data.len();
    let mut sigma2 = Vec::with_capacity(n);
    for t in 0..n {
        let mut v = omega;
        for (i, a) in alpha.iter().enumerate() {
            let y2 = if t > i { data[t - 1 - i] * data[t - 1 - i] } else { init };
            v += a * y2;
        }
        for (j, b) in beta.iter().enumerate() {
            let s2 = if t > j { sigma2[t - 1 - j] } else { init };
            v += b * s2;
        }
        if !(v > 0.0) || !v.is_finite() {
            return None;
        }
        sigma2.push(v);
    }
    Some(sigma2)
}

/// Gaussian log-likelihood of `data` under the given one-step variances:
/// -(T/2) ln(2 pi) - 1/2 sum_t [ ln sigma^2_t + y_t^2 / sigma^2_t ].
pub fn gaussian_log_likelihood(variances: &[f64], data: &[f64]) -> f64 {
    debug_assert_eq!(variances.len(), data.len());
    let t = data.len() as f64;
    let mut acc = 0.0;
    for (y, s2) in data.iter().zip(variances) {
        acc += s2.ln() + y * y / s2;
    }
    -0.5 * t * (2.0 * std::f64::consts::PI).ln() - 0.5 * acc
}

/// Sample variance with denominator T, the filter's initialization value.
fn filter_init(data: &[f64]) -> f64 {
    let n = data.len() as f64;
    let m = data.iter().sum::<f64>() / n;
    data.iter().map(|y| (y - m) * (y - m)).sum::<f64>() / n
}

/// Log-likelihood of `data` under `spec`, with the variance recursion seeded
/// by the sample variance of the data.
pub fn garch_log_likelihood(spec: &GarchSpec, data: &[f64]) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::invalid("cannot evaluate a likelihood on empty data"));
    }
    if data.iter().any(|y| !y.is_finite()) {
        return Err(Error::invalid("data must be finite"));
    }
    let sigma2 = variance_filter(spec, data, filter_init(data));
    Ok(gaussian_log_likelihood(&sigma2, data))
}

fn raw_neg_log_likelihood(omega: f64, alpha: &[f64], beta: &[f64], data: &[f64], init: f64) -> f64 {
    match raw_variance_filter(omega, alpha, beta, data, init) {
        Some(sigma2) => {
            let ll = gaussian_log_likelihood(&sigma2, data);
            if ll.is_finite() {
                -ll
            } else {
                f64::INFINITY
            }
        }
        None => f64::INFINITY,
    }
}

/// Simulate `n` observations plus the matching true conditional standard
/// deviations. A 200-point burn-in is generated and dropped so the returned
/// window no longer remembers the unconditional-variance initialization.
pub fn simulate_garch(spec: &GarchSpec, n: usize, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::invalid("cannot simulate zero observations"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = BURN_IN + n;
    let init = spec.unconditional_variance();
    let mut y = Vec::with_capacity(total);
    let mut sigma2 = Vec::with_capacity(total);
    for t in 0..total {
        let mut v = spec.omega;
        for (i, a) in spec.alpha.iter().enumerate() {
            let y2 = if t > i { y[t - 1 - i] * y[t - 1 - i] } else { init };
            v += a * y2;
        }
        for (j, b) in spec.beta.iter().enumerate() {
            let s2 = if t > j { sigma2[t - 1 - j] } else { init };
            v += b * s2;
        }
        let eps: f64 = rng.sample(StandardNormal);
        sigma2.push(v);
        y.push(v.sqrt() * eps);
    }
    let sd = sigma2[BURN_IN..].iter().map(|v| v.sqrt()).collect();
    Ok((y[BURN_IN..].to_vec(), sd))
}

/// Missing standard errors are represented as None, mirroring the NA entries
/// statistical software prints when the Hessian is uninformative.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GarchStandardErrors {
    pub omega: Option<f64>,
    pub alpha: Vec<Option<f64>>,
    pub beta: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GarchFit {
    pub spec: GarchSpec,
    pub log_likelihood: f64,
    pub aic: f64,
    pub coefficient_standard_errors: GarchStandardErrors,
    /// One-step-ahead variances sigma^2_{t|t-1} for the fitted data.
    pub conditional_variances: Vec<f64>,
    /// eps_t = y_t / sigma_{t|t-1}.
    pub standardized_residuals: Vec<f64>,
    pub converged: bool,
}

// ---- parameter transformation -------------------------------------------
//
// theta = [ln omega, z_1..z_{q+p}] with
//   coef_i = (1 - 1e-6) * exp(z_i) / (1 + sum_k exp(z_k))
// so every coefficient is positive and the coefficient sum stays below one
// regardless of where the optimizer wanders.

fn transform_to_coefs(theta: &[f64], q: usize, p: usize) -> (f64, Vec<f64>, Vec<f64>) {
    let omega = theta[0].clamp(-700.0, 700.0).exp();
    let zs = &theta[1..];
    let exps: Vec<f64> = zs.iter().map(|z| z.clamp(-40.0, 40.0).exp()).collect();
    let total: f64 = exps.iter().sum();
    let scale = SUM_CEILING / (1.0 + total);
    let coefs: Vec<f64> = exps.iter().map(|e| e * scale).collect();
    let (alpha, beta) = coefs.split_at(q);
    debug_assert_eq!(beta.len(), p);
    (omega, alpha.to_vec(), beta.to_vec())
}

fn transform_from_coefs(omega: f64, alpha: &[f64], beta: &[f64]) -> Vec<f64> {
    let sum: f64 = alpha.iter().sum::<f64>() + beta.iter().sum::<f64>();
    let margin = SUM_CEILING - sum;
    let mut theta = Vec::with_capacity(1 + alpha.len() + beta.len());
    theta.push(omega.ln());
    for c in alpha.iter().chain(beta.iter()) {
        theta.push((c / margin).ln());
    }
    theta
}

fn moment_based_start(data_variance: f64, p: usize, q: usize) -> (f64, Vec<f64>, Vec<f64>) {
    let alpha_total = 0.1;
    let beta_total = if p > 0 { 0.8 } else { 0.0 };
    let omega = data_variance * (1.0 - alpha_total - beta_total);
    let alpha = vec![alpha_total / q as f64; q];
    let beta = if p > 0 { vec![beta_total / p as f64; p] } else { vec![] };
    (omega, alpha, beta)
}

/// Fit a GARCH(p, q) to `data` by maximum likelihood. Deterministic: the
/// multi-start jitter is drawn from [`DEFAULT_FIT_SEED`].
pub fn fit_garch(data: &[f64], p: usize, q: usize) -> Result<GarchFit> {
    fit_garch_seeded(data, p, q, DEFAULT_FIT_SEED)
}

/// [`fit_garch`] with an explicit jitter seed for callers that manage their
/// own seed streams.
pub fn fit_garch_seeded(data: &[f64], p: usize, q: usize, seed: u64) -> Result<GarchFit> {
    if data.len() < 50 {
        return Err(Error::invalid(format!(
            "GARCH fitting needs at least 50 observations, got {}",
            data.len()
        )));
    }
    if !(1..=2).contains(&q) || p > 2 {
        return Err(Error::invalid(format!(
            "supported orders are q in 1..=2 and p in 0..=2, got (p, q) = ({p}, {q})"
        )));
    }
    if data.iter().any(|y| !y.is_finite()) {
        return Err(Error::invalid("data must be finite"));
    }
    let init = filter_init(data);
    if init <= 0.0 {
        return Err(Error::degenerate("data has zero variance"));
    }

    let dim = 1 + q + p;
    let objective = |theta: &[f64]| {
        let (omega, alpha, beta) = transform_to_coefs(theta, q, p);
        raw_neg_log_likelihood(omega, &alpha, &beta, data, init)
    };

    let (omega0, alpha0, beta0) = moment_based_start(init, p, q);
    let base = transform_from_coefs(omega0, &alpha0, &beta0);

    let mut best: Option<crate::optim::NelderMeadResult> = None;
    for start in 0..STARTS {
        let mut x0 = base.clone();
        if start > 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, start as u64));
            for x in x0.iter_mut() {
                let jitter: f64 = rng.sample(StandardNormal);
                *x += 0.5 * jitter;
            }
        }
        let result = nelder_mead(objective, &x0, 0.25, 1e-8, 400 * dim);
        let better = match &best {
            None => true,
            Some(b) => result.value < b.value,
        };
        if better {
            best = Some(result);
        }
    }
    let best = best.expect("at least one start ran");
    if !best.value.is_finite() {
        return Err(Error::fit(format!(
            "likelihood was non-finite at every point tried for GARCH({p}, {q})"
        )));
    }
    if !best.converged {
        let (omega, alpha, beta) = transform_to_coefs(&best.x, q, p);
        return Err(Error::fit(format!(
            "optimizer failed to converge for GARCH({p}, {q}); best point \
             omega={omega:.6e} alpha={alpha:?} beta={beta:?} neg-loglik={:.6}",
            best.value
        )));
    }

    let (omega, alpha, beta) = transform_to_coefs(&best.x, q, p);
    let spec = GarchSpec::new(omega, alpha, beta)?;
    let sigma2 = variance_filter(&spec, data, init);
    let standardized = data.iter().zip(&sigma2).map(|(y, s2)| y / s2.sqrt()).collect();
    let log_likelihood = -best.value;
    let k = 1 + p + q;

    let ses = hessian_standard_errors(&spec, data, init);

    Ok(GarchFit {
        aic: aic(log_likelihood, k),
        spec,
        log_likelihood,
        coefficient_standard_errors: ses,
        conditional_variances: sigma2,
        standardized_residuals: standardized,
        converged: true,
    })
}

/// Standard errors from the observed information: invert the central-difference
/// Hessian of the negative log-likelihood at the optimum (relative step 1e-4).
/// A non-finite Hessian entry drops all standard errors; a negative diagonal
/// in the inverse drops only the affected coefficient. Both happen routinely
/// when a coefficient is pinned near zero, and are reported as missing.
fn hessian_standard_errors(spec: &GarchSpec, data: &[f64], init: f64) -> GarchStandardErrors {
    let q = spec.q();
    let p = spec.p();
    let none = GarchStandardErrors {
        omega: None,
        alpha: vec![None; q],
        beta: vec![None; p],
    };

    let mut params = Vec::with_capacity(1 + q + p);
    params.push(spec.omega);
    params.extend_from_slice(&spec.alpha);
    params.extend_from_slice(&spec.beta);
    let dim = params.len();
    let steps: Vec<f64> = params.iter().map(|v| 1e-4 * v.abs().max(1e-3)).collect();

    let f = |x: &[f64]| raw_neg_log_likelihood(x[0], &x[1..1 + q], &x[1 + q..], data, init);
    let f0 = f(&params);

    let mut hessian = vec![vec![0.0f64; dim]; dim];
    for i in 0..dim {
        for j in i..dim {
            let h = if i == j {
                let mut up = params.clone();
                up[i] += steps[i];
                let mut down = params.clone();
                down[i] -= steps[i];
                (f(&up) - 2.0 * f0 + f(&down)) / (steps[i] * steps[i])
            } else {
                let mut pp = params.clone();
                pp[i] += steps[i];
                pp[j] += steps[j];
                let mut pm = params.clone();
                pm[i] += steps[i];
                pm[j] -= steps[j];
                let mut mp = params.clone();
                mp[i] -= steps[i];
                mp[j] += steps[j];
                let mut mm = params.clone();
                mm[i] -= steps[i];
                mm[j] -= steps[j];
                (f(&pp) - f(&pm) - f(&mp) + f(&mm)) / (4.0 * steps[i] * steps[j])
            };
            if !h.is_finite() {
                return none;
            }
            hessian[i][j] = h;
            hessian[j][i] = h;
        }
    }

    let inverse = match invert(&hessian) {
        Some(m) => m,
        None => return none,
    };
    let se = |idx: usize| -> Option<f64> {
        let v = inverse[idx][idx];
        if v > 0.0 && v.is_finite() {
            Some(v.sqrt())
        } else {
            None
        }
    };
    GarchStandardErrors {
        omega: se(0),
        alpha: (0..q).map(|i| se(1 + i)).collect(),
        beta: (0..p).map(|j| se(1 + q + j)).collect(),
    }
}

/// Gauss-Jordan inversion with partial pivoting.
fn invert(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.iter().cloned().collect();
    let mut inv = vec![vec![0.0f64; n]; n];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if a[row][col].abs() > a[pivot][col].abs() {
                pivot = row;
            }
        }
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let d = a[col][col];
        for k in 0..n {
            a[col][k] /= d;
            inv[col][k] /= d;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = a[row][col];
            if factor == 0.0 {
                continue;
            }
            for k in 0..n {
                a[row][k] -= factor * a[col][k];
                inv[row][k] -= factor * inv[col][k];
            }
        }
    }
    if inv.iter().flatten().any(|v| !v.is_finite()) {
        return None;
    }
    Some(inv)
}

/// One candidate from an order scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GarchCandidate {
    pub p: usize,
    pub q: usize,
    pub aic: Option<f64>,
    pub log_likelihood: Option<f64>,
    pub error: Option<String>,
}

/// Result of scanning the candidate orders on one series.
#[derive(Debug, Clone)]
pub struct GarchOrderSelection {
    pub selected: (usize, usize),
    pub best_fit: GarchFit,
    pub candidates: Vec<GarchCandidate>,
    /// Correlograms of the squared series, the classic visual evidence for
    /// conditional heteroscedasticity.
    pub squared_acf: Vec<crate::series::CorrelogramPoint>,
    pub squared_pacf: Vec<crate::series::CorrelogramPoint>,
}

/// Pick the GARCH order by minimum AIC over `candidates`.
///
/// Candidates that fail to fit are recorded and skipped; the scan only errors
/// when every candidate fails. On data without conditional heteroscedasticity
/// the AIC ranking is essentially noise, so callers should gate this behind a
/// McLeod-Li check rather than trust the winner blindly.
pub fn identify_garch_order(data: &[f64], candidates: &[(usize, usize)]) -> Result<GarchOrderSelection> {
    identify_garch_order_seeded(data, candidates, DEFAULT_FIT_SEED)
}

pub fn identify_garch_order_seeded(
    data: &[f64],
    candidates: &[(usize, usize)],
    seed: u64,
) -> Result<GarchOrderSelection> {
    if data.len() < 100 {
        return Err(Error::invalid(format!(
            "order identification needs at least 100 observations, got {}",
            data.len()
        )));
    }
    if candidates.is_empty() {
        return Err(Error::invalid("candidate set is empty"));
    }

    let squared = crate::series::Series::new(data.iter().map(|y| y * y).collect())?;
    let squared_acf = crate::series::sample_acf(&squared, 20)?;
    let squared_pacf = crate::series::sample_pacf(&squared, 20)?;

    let fits: Vec<(usize, usize, Result<GarchFit>)> = candidates
        .par_iter()
        .map(|&(p, q)| (p, q, fit_garch_seeded(data, p, q, seed)))
        .collect();

    let mut rows = Vec::with_capacity(fits.len());
    let mut best: Option<(f64, usize)> = None;
    for (idx, (p, q, fit)) in fits.iter().enumerate() {
        match fit {
            Ok(f) => {
                rows.push(GarchCandidate {
                    p: *p,
                    q: *q,
                    aic: Some(f.aic),
                    log_likelihood: Some(f.log_likelihood),
                    error: None,
                });
                let better = match best {
                    None => true,
                    Some((a, _)) => f.aic < a,
                };
                if better {
                    best = Some((f.aic, idx));
                }
            }
            Err(e) => rows.push(GarchCandidate {
                p: *p,
                q: *q,
                aic: None,
                log_likelihood: None,
                error: Some(e.to_string()),
            }),
        }
    }

    let (_, best_idx) = best.ok_or_else(|| {
        Error::fit("every candidate order failed to fit; no GARCH order can be selected")
    })?;
    let (p, q, fit) = fits.into_iter().nth(best_idx).expect("index from enumeration");
    Ok(GarchOrderSelection {
        selected: (p, q),
        best_fit: fit.expect("best candidate fitted"),
        candidates: rows,
        squared_acf,
        squared_pacf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec_011() -> GarchSpec {
        GarchSpec::new(0.1, vec![0.2], vec![0.5]).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(GarchSpec::new(0.0, vec![0.2], vec![0.5]).is_err());
        assert!(GarchSpec::new(-1.0, vec![0.2], vec![0.5]).is_err());
        assert!(GarchSpec::new(0.1, vec![], vec![0.5]).is_err());
        assert!(GarchSpec::new(0.1, vec![-0.1], vec![0.5]).is_err());
        assert!(GarchSpec::new(0.1, vec![0.5], vec![0.5]).is_err());
        assert!(GarchSpec::new(0.1, vec![0.2], vec![]).is_ok());
        assert!(GarchSpec::new(0.1, vec![0.0], vec![0.0]).is_ok());
    }

    #[test]
    fn unconditional_variance_of_the_study_model() {
        assert_relative_eq!(spec_011().unconditional_variance(), 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn one_step_variance_update() {
        // omega + alpha * y^2 + beta * sigma^2 with unit history = 0.8.
        let sigma2 = variance_filter(&spec_011(), &[1.0], 1.0);
        assert_relative_eq!(sigma2[0], 0.8, epsilon = 1e-15);
    }

    #[test]
    fn degenerate_spec_is_white_noise() {
        let spec = GarchSpec::new(1.0, vec![0.0], vec![0.0]).unwrap();
        let (y, sd) = simulate_garch(&spec, 10_000, 4).unwrap();
        assert!(sd.iter().all(|s| (s - 1.0).abs() < 1e-12));
        let var = crate::series::Series::new(y).unwrap().variance();
        assert!((var - 1.0).abs() < 0.05, "sample variance {var}");
    }

    #[test]
    fn simulated_variance_matches_the_unconditional_value() {
        let (y, _) = simulate_garch(&spec_011(), 100_000, 9).unwrap();
        let var = crate::series::Series::new(y).unwrap().variance();
        assert!((var - 1.0 / 3.0).abs() < 0.02, "sample variance {var}");
    }

    #[test]
    fn simulation_is_reproducible_and_seed_sensitive() {
        let (a1, s1) = simulate_garch(&spec_011(), 500, 7).unwrap();
        let (a2, s2) = simulate_garch(&spec_011(), 500, 7).unwrap();
        let (b, _) = simulate_garch(&spec_011(), 500, 8).unwrap();
        assert_eq!(a1, a2);
        assert_eq!(s1, s2);
        assert_ne!(a1, b);
    }

    #[test]
    fn log_likelihood_of_unit_variance_white_noise() {
        // With sigma^2 = 1 and y = 0 each observation contributes
        // -0.5 ln(2 pi).
        let l1 = gaussian_log_likelihood(&[1.0], &[0.0]);
        assert_relative_eq!(l1, -0.9189385332046727, epsilon = 1e-15);
        let l2 = gaussian_log_likelihood(&[1.0, 1.0], &[0.0, 0.0]);
        assert_relative_eq!(l2, 2.0 * -0.9189385332046727, epsilon = 1e-14);
    }

    #[test]
    fn public_likelihood_agrees_on_a_forced_unit_variance_model() {
        let spec = GarchSpec::new(1.0, vec![0.0], vec![0.0]).unwrap();
        let ll = garch_log_likelihood(&spec, &[0.0, 0.0]).unwrap();
        assert_relative_eq!(ll, 2.0 * -0.9189385332046727, epsilon = 1e-14);
    }

    #[test]
    fn truth_beats_perturbed_parameters_on_long_samples() {
        let truth = spec_011();
        let up = GarchSpec::new(0.2, vec![0.3], vec![0.6]).unwrap();
        let down = GarchSpec::new(0.05, vec![0.1], vec![0.4]).unwrap();
        let trials = 50;
        let mut wins = 0;
        for seed in 0..trials {
            let (y, _) = simulate_garch(&truth, 2000, 600 + seed).unwrap();
            let l_truth = garch_log_likelihood(&truth, &y).unwrap();
            let l_up = garch_log_likelihood(&up, &y).unwrap();
            let l_down = garch_log_likelihood(&down, &y).unwrap();
            if l_truth > l_up && l_truth > l_down {
                wins += 1;
            }
        }
        assert!(wins * 100 >= trials * 95, "truth won only {wins}/{trials}");
    }

    #[test]
    fn fit_recovers_parameters_on_a_long_series() {
        let (y, _) = simulate_garch(&spec_011(), 20_000, 31).unwrap();
        let fit = fit_garch(&y, 1, 1).unwrap();
        assert!(fit.converged);
        assert!((fit.spec.omega - 0.1).abs() < 0.05, "omega {}", fit.spec.omega);
        assert!((fit.spec.alpha[0] - 0.2).abs() < 0.05, "alpha {}", fit.spec.alpha[0]);
        assert!((fit.spec.beta[0] - 0.5).abs() < 0.05, "beta {}", fit.spec.beta[0]);
        assert_eq!(fit.conditional_variances.len(), y.len());
        assert_eq!(fit.standardized_residuals.len(), y.len());
    }

    #[test]
    fn fit_is_deterministic() {
        let (y, _) = simulate_garch(&spec_011(), 600, 12).unwrap();
        let a = fit_garch(&y, 1, 1).unwrap();
        let b = fit_garch(&y, 1, 1).unwrap();
        assert_eq!(a.spec, b.spec);
        assert_eq!(a.log_likelihood, b.log_likelihood);
    }

    #[test]
    fn fit_on_iid_noise_finds_no_arch() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        use rand_distr::StandardNormal;
        let trials = 40;
        let mut quiet = 0;
        for seed in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64(2000 + seed);
            let y: Vec<f64> = (0..500).map(|_| rng.sample(StandardNormal)).collect();
            let fit = fit_garch(&y, 1, 1).unwrap();
            let coef_sum = fit.spec.alpha[0] + fit.spec.beta[0];
            let alpha_insignificant = match fit.coefficient_standard_errors.alpha[0] {
                Some(se) => fit.spec.alpha[0] / se < 2.0,
                None => true,
            };
            if coef_sum < 0.05 || fit.spec.alpha[0] < 0.02 || alpha_insignificant {
                quiet += 1;
            }
        }
        assert!(quiet * 100 >= trials * 80, "no-ARCH verdict in only {quiet}/{trials}");
    }

    #[test]
    fn fit_is_scale_consistent() {
        // Scaling the data by c multiplies omega by c^2 and leaves the
        // dynamic coefficients alone.
        let (y, _) = simulate_garch(&spec_011(), 2000, 55).unwrap();
        let fit1 = fit_garch(&y, 1, 1).unwrap();
        let scaled: Vec<f64> = y.iter().map(|v| 3.0 * v).collect();
        let fit2 = fit_garch(&scaled, 1, 1).unwrap();
        assert_relative_eq!(fit2.spec.omega, 9.0 * fit1.spec.omega, max_relative = 1e-3);
        assert_relative_eq!(fit2.spec.alpha[0], fit1.spec.alpha[0], epsilon = 1e-3);
        assert_relative_eq!(fit2.spec.beta[0], fit1.spec.beta[0], epsilon = 1e-3);
    }

    #[test]
    fn refitting_standardized_residuals_finds_no_arch() {
        let (y, _) = simulate_garch(&spec_011(), 3000, 77).unwrap();
        let fit = fit_garch(&y, 1, 1).unwrap();
        let refit = fit_garch(&fit.standardized_residuals, 1, 1).unwrap();
        let significant = match refit.coefficient_standard_errors.alpha[0] {
            Some(se) => refit.spec.alpha[0] / se >= 2.0,
            None => false,
        };
        assert!(
            !significant || refit.spec.alpha[0] < 0.05,
            "alpha {} still significant after standardization",
            refit.spec.alpha[0]
        );
    }

    #[test]
    fn fit_input_validation() {
        let short = vec![0.5; 30];
        assert!(matches!(fit_garch(&short, 1, 1), Err(Error::InvalidArgument(_))));
        let ok_len = vec![0.5; 100];
        assert!(matches!(fit_garch(&ok_len, 1, 0), Err(Error::InvalidArgument(_))));
        assert!(matches!(fit_garch(&ok_len, 3, 1), Err(Error::InvalidArgument(_))));
        assert!(matches!(fit_garch(&ok_len, 1, 1), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn aic_formula() {
        assert_relative_eq!(aic(100.0, 3), -194.0, epsilon = 1e-15);
    }

    #[test]
    fn identify_agrees_with_an_exhaustive_scan() {
        let (y, _) = simulate_garch(&spec_011(), 2000, 101).unwrap();
        let sel = identify_garch_order(&y, &DEFAULT_GARCH_CANDIDATES).unwrap();
        // Re-fit every candidate independently and take the AIC argmin.
        let mut best: Option<((usize, usize), f64)> = None;
        for &(p, q) in DEFAULT_GARCH_CANDIDATES.iter() {
            if let Ok(fit) = fit_garch(&y, p, q) {
                let better = match best {
                    None => true,
                    Some((_, a)) => fit.aic < a,
                };
                if better {
                    best = Some(((p, q), fit.aic));
                }
            }
        }
        let (expect, _) = best.unwrap();
        assert_eq!(sel.selected, expect);
        assert_eq!(sel.candidates.len(), 4);
        assert_eq!(sel.squared_acf.len(), 20);
    }

    #[test]
    fn identify_survives_white_noise() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        use rand_distr::StandardNormal;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let y: Vec<f64> = (0..400).map(|_| rng.sample(StandardNormal)).collect();
        let sel = identify_garch_order(&y, &DEFAULT_GARCH_CANDIDATES).unwrap();
        assert!(DEFAULT_GARCH_CANDIDATES.contains(&sel.selected));
    }

    #[test]
    fn identify_needs_enough_data() {
        let y = vec![0.1; 80];
        assert!(matches!(
            identify_garch_order(&y, &DEFAULT_GARCH_CANDIDATES),
            Err(Error::InvalidArgument(_))
        ));
    }
}
