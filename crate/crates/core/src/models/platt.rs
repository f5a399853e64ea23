//! Platt (sigmoid) calibration: `p = 1 / (1 + exp(A s + B))`.
//!
//! The fit minimizes binary log-loss against Platt's smoothed targets
//! `(N+ + 1) / (N+ + 2)` and `1 / (N- + 2)` with damped Newton steps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_ITER: usize = 100;
const GRAD_TOL: f64 = 1e-8;
const MIN_STEP: f64 = 1e-10;
const HESSIAN_RIDGE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct SigmoidParams<F> {
    pub a: F,
    pub b: F,
}

impl<F: Scalar> SigmoidParams<F> {
    /// Calibrated probability for a raw score.
    pub fn apply(&self, score: F) -> F {
        let f = self.a * score + self.b;
        // stable 1 / (1 + e^f)
        if f >= F::zero() {
            let e = (-f).exp();
            e / (F::one() + e)
        } else {
            F::one() / (F::one() + f.exp())
        }
    }
}

/// `ln(1 + e^f)` without overflow.
fn softplus<F: Scalar>(f: F) -> F {
    if f > F::zero() {
        f + (-f).exp().ln_1p()
    } else {
        f.exp().ln_1p()
    }
}

/// Smoothed target for each label.
pub fn platt_targets<F: Scalar>(labels: &[bool]) -> Vec<F> {
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    let hi = F::from_usize(n_pos + 1).unwrap() / F::from_usize(n_pos + 2).unwrap();
    let lo = F::one() / F::from_usize(n_neg + 2).unwrap();
    labels.iter().map(|&l| if l { hi } else { lo }).collect()
}

/// Mean log-loss of `params` against the smoothed targets.
pub fn platt_loss<F: Scalar>(scores: &[F], labels: &[bool], params: SigmoidParams<F>) -> F {
    let targets = platt_targets::<F>(labels);
    mean_loss(scores, &targets, params.a, params.b)
}

fn mean_loss<F: Scalar>(scores: &[F], targets: &[F], a: F, b: F) -> F {
    // -[t ln p + (1 - t) ln(1 - p)] = softplus(f) - (1 - t) f
    let total: F = scores
        .iter()
        .zip(targets)
        .map(|(&s, &t)| {
            let f = a * s + b;
            softplus(f) - (F::one() - t) * f
        })
        .sum();
    total / F::from_usize(scores.len()).unwrap()
}

/// Mean gradient and Hessian with respect to `(A, B)`.
fn derivatives<F: Scalar>(scores: &[F], targets: &[F], a: F, b: F) -> ([F; 2], [F; 3]) {
    let mut g = [F::zero(); 2];
    let mut h = [F::zero(); 3];
    for (&s, &t) in scores.iter().zip(targets) {
        let p = SigmoidParams { a, b }.apply(s);
        let d1 = t - p;
        let d2 = p * (F::one() - p);
        g[0] += d1 * s;
        g[1] += d1;
        h[0] += d2 * s * s;
        h[1] += d2 * s;
        h[2] += d2;
    }
    let n = F::from_usize(scores.len()).unwrap();
    (g.map(|v| v / n), h.map(|v| v / n))
}

fn check_inputs<F: Scalar>(scores: &[F], labels: &[bool]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::invalid("scores and labels differ in length"));
    }
    if !labels.iter().any(|&l| l) || labels.iter().all(|&l| l) {
        return Err(Error::invalid("sigmoid calibration needs both labels present"));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::invalid("non-finite calibration score"));
    }
    Ok(())
}

fn initial_b<F: Scalar>(labels: &[bool]) -> F {
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    (F::from_usize(n_neg + 1).unwrap() / F::from_usize(n_pos + 1).unwrap()).ln()
}

/// Fits `(A, B)` by damped Newton iterations until the gradient norm is at most `1e-8`.
pub fn fit_sigmoid_calibration<F: Scalar>(scores: &[F], labels: &[bool]) -> Result<SigmoidParams<F>> {
    check_inputs(scores, labels)?;
    let t = platt_targets::<F>(labels);
    let (mut a, mut b) = (F::zero(), initial_b::<F>(labels));
    let mut f = mean_loss(scores, &t, a, b);
    let ridge = F::lit(HESSIAN_RIDGE);
    for _ in 0..MAX_ITER {
        let (g, h) = derivatives(scores, &t, a, b);
        if (g[0] * g[0] + g[1] * g[1]).sqrt() <= F::lit(GRAD_TOL) {
            return Ok(SigmoidParams { a, b });
        }
        let (h11, h12, h22) = (h[0] + ridge, h[1], h[2] + ridge);
        let det = h11 * h22 - h12 * h12;
        let da = -(h22 * g[0] - h12 * g[1]) / det;
        let db = -(-h12 * g[0] + h11 * g[1]) / det;
        let slope = g[0] * da + g[1] * db;
        let gnorm = (g[0] * g[0] + g[1] * g[1]).sqrt();
        let mut step = F::one();
        loop {
            let (na, nb) = (a + step * da, b + step * db);
            let nf = mean_loss(scores, &t, na, nb);
            let armijo = nf <= f + F::lit(1e-4) * step * slope;
            // Near the optimum the loss change drops below rounding; a full
            // Newton step that shrinks the gradient is then still progress.
            let full_step_ok = step == F::one() && nf <= f + F::epsilon() * f.abs() * F::lit(4.0) && {
                let (ng, _) = derivatives(scores, &t, na, nb);
                (ng[0] * ng[0] + ng[1] * ng[1]).sqrt() < gnorm
            };
            if armijo || full_step_ok {
                a = na;
                b = nb;
                f = nf;
                break;
            }
            step = step * F::lit(0.5);
            if step < F::lit(MIN_STEP) {
                return Err(Error::Calibration(format!(
                    "line search failed at gradient norm {gnorm}"
                )));
            }
        }
    }
    let (g, _) = derivatives(scores, &t, a, b);
    if (g[0] * g[0] + g[1] * g[1]).sqrt() <= F::lit(GRAD_TOL) {
        return Ok(SigmoidParams { a, b });
    }
    Err(Error::Calibration(format!(
        "Newton iterations did not converge within {MAX_ITER} steps"
    )))
}

/// Fits only the intercept with `A = 0` (a constant calibrated probability).
pub fn fit_sigmoid_intercept<F: Scalar>(scores: &[F], labels: &[bool]) -> Result<SigmoidParams<F>> {
    check_inputs(scores, labels)?;
    let t = platt_targets::<F>(labels);
    // with A = 0 the loss is minimized where p equals the mean smoothed target
    let tbar: F = t.iter().copied().sum::<F>() / F::from_usize(t.len()).unwrap();
    let b = ((F::one() - tbar) / tbar).ln();
    Ok(SigmoidParams { a: F::zero(), b })
}
