//! Derivative-free minimization with the Nelder-Mead simplex.
//!
//! Kept deliberately small: the GARCH likelihood surfaces this crate
//! optimizes are low dimensional (3 to 5 parameters after transformation),
//! smooth away from the constraint boundary, and cheap enough that restarts
//! are preferred over a fancier method. Objective values that come back
//! non-finite are treated as +inf so the simplex simply walks away from bad
//! regions.

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimize `f` starting from `x0`, with an initial simplex displaced by
/// `step` along each coordinate. Converges when the objective spread across
/// the simplex drops below `tol` (which bounds per-iteration improvement by
/// the same amount), or gives up after `max_iter` iterations.
pub fn nelder_mead<F>(
    mut f: F,
    x0: &[f64],
    step: f64,
    tol: f64,
    max_iter: usize,
) -> NelderMeadResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    assert!(n > 0, "cannot optimize a zero-dimensional function");
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += step;
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| eval(p, &mut evals)).collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;

        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        if values[worst] - values[best] <= tol {
            converged = true;
            break;
        }

        // Centroid of all points except the worst.
        let mut centroid = vec![0.0f64; n];
        for &idx in order.iter().take(n) {
            for (c, x) in centroid.iter_mut().zip(&simplex[idx]) {
                *c += x;
            }
        }
        for c in centroid.iter_mut() {
            *c /= n as f64;
        }

        let reflected: Vec<f64> = centroid
            .iter()
            .zip(&simplex[worst])
            .map(|(c, w)| c + REFLECT * (c - w))
            .collect();
        let f_reflected = eval(&reflected, &mut evals);

        if f_reflected < values[best] {
            let expanded: Vec<f64> = centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(c, w)| c + EXPAND * (c - w))
                .collect();
            let f_expanded = eval(&expanded, &mut evals);
            if f_expanded < f_reflected {
                simplex[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_reflected;
            }
            continue;
        }

        if f_reflected < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = f_reflected;
            continue;
        }

        let contracted: Vec<f64> = if f_reflected < values[worst] {
            // Outside contraction, between centroid and the reflected point.
            centroid.iter().zip(&reflected).map(|(c, r)| c + CONTRACT * (r - c)).collect()
        } else {
            centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(c, w)| c + CONTRACT * (w - c))
                .collect()
        };
        let f_contracted = eval(&contracted, &mut evals);
        if f_contracted < values[worst].min(f_reflected) {
            simplex[worst] = contracted;
            values[worst] = f_contracted;
            continue;
        }

        // Shrink everything toward the best vertex.
        let best_point = simplex[best].clone();
        for idx in 0..=n {
            if idx == best {
                continue;
            }
            for (x, b) in simplex[idx].iter_mut().zip(&best_point) {
                *x = b + SHRINK * (*x - b);
            }
            values[idx] = eval(&simplex[idx], &mut evals);
        }
    }

    let mut best_idx = 0;
    for i in 1..=n {
        if values[i] < values[best_idx] {
            best_idx = i;
        }
    }
    NelderMeadResult {
        x: simplex[best_idx].clone(),
        value: values[best_idx],
        iterations,
        evaluations: evals,
        converged,
    }
}
