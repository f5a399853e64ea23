//! Direct reference implementations on plain `f64` slices.
//!
//! Everything here favours the most literal formulation over speed: dense
//! Gaussian elimination instead of factorizations, brute-force grids instead
//! of Newton steps. None of it shares code with the main crate.

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
///
/// `a` is row-major `n x n`. Panics if `A` is singular to working precision.
pub fn solve_dense(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))
            .unwrap();
        assert!(m[pivot * n + col].abs() > 1e-300, "singular matrix");
        if pivot != col {
            for k in 0..n {
                m.swap(col * n + k, pivot * n + k);
            }
            x.swap(col, pivot);
        }
        for row in col + 1..n {
            let f = m[row * n + col] / m[col * n + col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                m[row * n + k] -= f * m[col * n + k];
            }
            x[row] -= f * x[col];
        }
    }
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| m[row * n + k] * x[k]).sum();
        x[row] = (x[row] - s) / m[row * n + row];
    }
    x
}

/// `ln |det A|` by elimination with partial pivoting.
pub fn log_abs_det(a: &[f64], n: usize) -> f64 {
    let mut m = a.to_vec();
    let mut total = 0.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))
            .unwrap();
        if pivot != col {
            for k in 0..n {
                m.swap(col * n + k, pivot * n + k);
            }
        }
        let p = m[col * n + col];
        total += p.abs().ln();
        for row in col + 1..n {
            let f = m[row * n + col] / p;
            for k in col..n {
                m[row * n + k] -= f * m[col * n + k];
            }
        }
    }
    total
}

/// Scaled isotropic RBF hyperparameters.
#[derive(Debug, Clone, Copy)]
pub struct RbfParams {
    pub signal_variance: f64,
    pub lengthscale: f64,
    pub noise_variance: f64,
    pub mean: f64,
}

pub fn rbf(a: &[f64], b: &[f64], p: &RbfParams) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    p.signal_variance * (-d2 / (2.0 * p.lengthscale * p.lengthscale)).exp()
}

fn noisy_kernel(x: &[f64], d: usize, p: &RbfParams) -> Vec<f64> {
    let n = x.len() / d;
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            k[i * n + j] = rbf(&x[i * d..(i + 1) * d], &x[j * d..(j + 1) * d], p);
        }
        k[i * n + i] += p.noise_variance;
    }
    k
}

/// Exact GP posterior `(mean, variance incl. noise)` at `query`, recomputed
/// from scratch with two dense solves.
pub fn gp_posterior(x: &[f64], y: &[f64], d: usize, p: &RbfParams, query: &[f64]) -> (f64, f64) {
    let n = y.len();
    let k = noisy_kernel(x, d, p);
    let resid: Vec<f64> = y.iter().map(|v| v - p.mean).collect();
    let ks: Vec<f64> = (0..n).map(|i| rbf(&x[i * d..(i + 1) * d], query, p)).collect();
    let alpha = solve_dense(&k, &resid);
    let v = solve_dense(&k, &ks);
    let mean = p.mean + ks.iter().zip(&alpha).map(|(a, b)| a * b).sum::<f64>();
    let var = p.signal_variance + p.noise_variance - ks.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
    (mean, var)
}

/// `ln p(y | X)` for the GP prior with Gaussian noise.
pub fn gp_log_marginal_likelihood(x: &[f64], y: &[f64], d: usize, p: &RbfParams) -> f64 {
    let n = y.len();
    let k = noisy_kernel(x, d, p);
    let resid: Vec<f64> = y.iter().map(|v| v - p.mean).collect();
    let alpha = solve_dense(&k, &resid);
    let fit: f64 = resid.iter().zip(&alpha).map(|(a, b)| a * b).sum();
    -0.5 * fit - 0.5 * log_abs_det(&k, n) - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln()
}

/// Mean Platt log-loss of `p = 1 / (1 + exp(a s + b))` against smoothed targets.
pub fn platt_loss(scores: &[f64], labels: &[bool], a: f64, b: f64) -> f64 {
    let n_pos = labels.iter().filter(|&&l| l).count() as f64;
    let n_neg = labels.len() as f64 - n_pos;
    let hi = (n_pos + 1.0) / (n_pos + 2.0);
    let lo = 1.0 / (n_neg + 2.0);
    let mut total = 0.0;
    for (&s, &l) in scores.iter().zip(labels) {
        let t = if l { hi } else { lo };
        let f = a * s + b;
        // ln p = -ln(1 + e^f), ln(1 - p) = f - ln(1 + e^f)
        let lse = if f > 0.0 { f + (-f).exp().ln_1p() } else { f.exp().ln_1p() };
        total += t * lse + (1.0 - t) * (lse - f);
    }
    total / scores.len() as f64
}

/// Minimum of [`platt_loss`] over the grid `lo, lo + step, ..., hi` in both parameters.
pub fn platt_grid_search(scores: &[f64], labels: &[bool], lo: f64, hi: f64, step: f64) -> (f64, f64, f64) {
    let steps = ((hi - lo) / step).round() as i64;
    let mut best = (f64::NAN, f64::NAN, f64::INFINITY);
    for ia in 0..=steps {
        let a = lo + ia as f64 * step;
        for ib in 0..=steps {
            let b = lo + ib as f64 * step;
            let l = platt_loss(scores, labels, a, b);
            if l < best.2 {
                best = (a, b, l);
            }
        }
    }
    best
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample standard deviation (divisor `n - 1`).
pub fn sample_sd(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let a = [0.0, 2.0, 1.0, 1.0];
        let x = solve_dense(&a, &[4.0, 3.0]);
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
        assert!((log_abs_det(&a, 2) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn platt_loss_at_zero() {
        let l = platt_loss(&[1.0, -1.0], &[true, false], 0.0, 0.0);
        assert!((l - 2f64.ln()).abs() < 1e-15);
    }
}
