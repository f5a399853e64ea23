//! Exact Gaussian-process regression with a constant mean and a scaled
//! isotropic RBF kernel, `k(x, x') = s^2 exp(-|x - x'|^2 / (2 l^2))`.
//!
//! Hyperparameters are fitted by Adam ascent on the exact log marginal
//! likelihood, with the positive parameters optimized on the log scale.
//! Targets are always standardized internally; inputs optionally.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Standardizer};
use crate::distributions::{Gaussian, PredictiveDistribution, TaskKind};
use crate::error::{Error, Result};
use crate::linalg::Cholesky;
use crate::models::ProbabilisticModel;
use crate::scalar::Scalar;

/// Name recorded in model files; there is a single lengthscale shared by all inputs.
pub const KERNEL_NAME: &str = "scaled_rbf_isotropic";

/// Kernel and likelihood hyperparameters, on the standardized-target scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct GpHyperparameters<F> {
    pub signal_variance: F,
    pub lengthscale: F,
    pub noise_variance: F,
    pub mean: F,
}

impl<F: Scalar> GpHyperparameters<F> {
    /// `(ln s^2, ln l, ln sigma_n^2, m)`, the coordinates the optimizer moves in.
    pub fn to_unconstrained(&self) -> [F; 4] {
        [
            self.signal_variance.ln(),
            self.lengthscale.ln(),
            self.noise_variance.ln(),
            self.mean,
        ]
    }

    pub fn from_unconstrained(p: [F; 4]) -> Self {
        GpHyperparameters {
            signal_variance: p[0].exp(),
            lengthscale: p[1].exp(),
            noise_variance: p[2].exp(),
            mean: p[3],
        }
    }

    fn validate(&self) -> Result<()> {
        let pos = [self.signal_variance, self.lengthscale, self.noise_variance];
        if pos.iter().any(|&v| !(v > F::zero() && v.is_finite())) || !self.mean.is_finite() {
            return Err(Error::invalid(format!(
                "GP hyperparameters must be positive and finite: {self:?}"
            )));
        }
        Ok(())
    }

    fn cast<G: Scalar>(&self) -> GpHyperparameters<G> {
        GpHyperparameters {
            signal_variance: G::lit(self.signal_variance.as_f64()),
            lengthscale: G::lit(self.lengthscale.as_f64()),
            noise_variance: G::lit(self.noise_variance.as_f64()),
            mean: G::lit(self.mean.as_f64()),
        }
    }
}

impl Default for GpHyperparameters<f64> {
    /// Signal variance 1, lengthscale 1, noise variance 0.1, zero mean
    /// (the training-target mean after standardization).
    fn default() -> Self {
        GpHyperparameters {
            signal_variance: 1.0,
            lengthscale: 1.0,
            noise_variance: 0.1,
            mean: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub init: GpHyperparameters<f64>,
    pub standardize_inputs: bool,
    /// Lower bound enforced on the noise variance after every optimizer step.
    pub min_noise_variance: f64,
}

impl Default for GpConfig {
    fn default() -> Self {
        GpConfig {
            learning_rate: 0.1,
            epochs: 1000,
            init: GpHyperparameters::default(),
            standardize_inputs: true,
            min_noise_variance: 1e-6,
        }
    }
}

/// Optimization trace of [`GpModel::fit`]; log marginal likelihoods are totals in nats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpFitReport {
    pub epochs: usize,
    pub initial_log_marginal_likelihood: f64,
    pub final_log_marginal_likelihood: f64,
    /// Log marginal likelihood before each optimizer step.
    pub trace: Vec<f64>,
    pub hyperparameters: GpHyperparameters<f64>,
}

fn squared_distances<F: Scalar>(x: &[F], n: usize, d: usize) -> Vec<F> {
    let mut out = vec![F::zero(); n * n];
    for i in 0..n {
        for j in 0..i {
            let r2: F = x[i * d..(i + 1) * d]
                .iter()
                .zip(&x[j * d..(j + 1) * d])
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum();
            out[i * n + j] = r2;
            out[j * n + i] = r2;
        }
    }
    out
}

fn kernel_matrix<F: Scalar>(sq: &[F], n: usize, hyper: &GpHyperparameters<F>) -> (Vec<F>, Vec<F>) {
    let inv2l2 = F::one() / (F::lit(2.0) * hyper.lengthscale * hyper.lengthscale);
    let kf: Vec<F> = sq
        .iter()
        .map(|&r2| hyper.signal_variance * (-r2 * inv2l2).exp())
        .collect();
    let mut k = kf.clone();
    for i in 0..n {
        k[i * n + i] += hyper.noise_variance;
    }
    (kf, k)
}

/// Log marginal likelihood and its gradient from a precomputed distance matrix.
fn lml_and_grad<F: Scalar>(
    sq: &[F],
    y: &[F],
    hyper: &GpHyperparameters<F>,
) -> Result<(F, [F; 4])> {
    let n = y.len();
    let (kf, k) = kernel_matrix(sq, n, hyper);
    let chol = Cholesky::factor_with_jitter(&k, n)?;
    let resid: Vec<F> = y.iter().map(|&v| v - hyper.mean).collect();
    let alpha = chol.solve(&resid);
    let half = F::lit(0.5);
    let fit_term: F = resid.iter().zip(&alpha).map(|(&r, &a)| r * a).sum();
    let lml = -half * fit_term
        - half * chol.log_det()
        - half * F::from_usize(n).unwrap() * F::TAU().ln();

    let kinv = chol.inverse();
    let inv_l2 = F::one() / (hyper.lengthscale * hyper.lengthscale);
    // d lml / d theta = 1/2 sum_ij (a_i a_j - Kinv_ij) dK_ij
    let (g_signal, g_length) = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut gs = F::zero();
            let mut gl = F::zero();
            for j in 0..n {
                let w = alpha[i] * alpha[j] - kinv[i * n + j];
                let kij = kf[i * n + j];
                gs += w * kij;
                gl += w * kij * sq[i * n + j] * inv_l2;
            }
            (gs, gl)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((F::zero(), F::zero()), |(a, b), (c, d)| (a + c, b + d));
    let trace_inv: F = (0..n).map(|i| kinv[i * n + i]).sum();
    let alpha_sq: F = alpha.iter().map(|&a| a * a).sum();
    let g_noise = half * hyper.noise_variance * (alpha_sq - trace_inv);
    let g_mean: F = alpha.iter().copied().sum();
    Ok((lml, [half * g_signal, half * g_length, g_noise, g_mean]))
}

/// Exact log marginal likelihood of `y` given row-major inputs `x` (`d` columns),
/// and its gradient with respect to `(ln s^2, ln l, ln sigma_n^2, m)`.
pub fn log_marginal_likelihood<F: Scalar>(
    x: &[F],
    d: usize,
    y: &[F],
    hyper: &GpHyperparameters<F>,
) -> Result<(F, [F; 4])> {
    hyper.validate()?;
    let n = y.len();
    if x.len() != n * d {
        return Err(Error::invalid("input buffer does not match target length"));
    }
    lml_and_grad(&squared_distances(x, n, d), y, hyper)
}

/// A fitted exact GP; immutable and safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct GpModel<F> {
    hyper: GpHyperparameters<F>,
    scaler: Standardizer<F>,
    n_features: usize,
    train_x: Vec<F>,
    train_y: Vec<F>,
    chol: Cholesky<F>,
    alpha: Vec<F>,
}

/// Serialized form: the model is rebuilt from its training data on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct GpState<F> {
    pub kernel: String,
    pub hyperparameters: GpHyperparameters<F>,
    pub scaler: Standardizer<F>,
    pub n_features: usize,
    /// Standardized training inputs, row-major.
    pub train_x: Vec<F>,
    /// Standardized training targets.
    pub train_y: Vec<F>,
}

impl<F: Scalar> GpModel<F> {
    /// Fits hyperparameters by `config.epochs` Adam steps on the log marginal likelihood.
    pub fn fit(train: &Dataset<F>, config: &GpConfig) -> Result<(GpModel<F>, GpFitReport)> {
        let (scaler, x, y) = Self::prepare(train, config.standardize_inputs)?;
        let init: GpHyperparameters<F> = config.init.cast();
        init.validate()?;
        if !(config.learning_rate > 0.0) {
            return Err(Error::invalid("learning rate must be positive"));
        }
        let n = y.len();
        let d = train.n_features();
        let sq = squared_distances(&x, n, d);
        let nf = F::from_usize(n).unwrap();

        let lr = F::lit(config.learning_rate);
        let (beta1, beta2, eps) = (F::lit(0.9), F::lit(0.999), F::lit(1e-8));
        let log_noise_floor = F::lit(config.min_noise_variance.max(f64::MIN_POSITIVE)).ln();
        let mut theta = init.to_unconstrained();
        theta[2] = theta[2].max(log_noise_floor);
        let mut m = [F::zero(); 4];
        let mut v = [F::zero(); 4];
        let mut trace = Vec::with_capacity(config.epochs);
        let (mut b1t, mut b2t) = (F::one(), F::one());

        for _ in 0..config.epochs {
            let hyper = GpHyperparameters::from_unconstrained(theta);
            let (lml, grad) = lml_and_grad(&sq, &y, &hyper)?;
            trace.push(lml.as_f64());
            b1t *= beta1;
            b2t *= beta2;
            for p in 0..4 {
                // objective is the per-example log marginal likelihood
                let g = grad[p] / nf;
                m[p] = beta1 * m[p] + (F::one() - beta1) * g;
                v[p] = beta2 * v[p] + (F::one() - beta2) * g * g;
                let m_hat = m[p] / (F::one() - b1t);
                let v_hat = v[p] / (F::one() - b2t);
                theta[p] += lr * m_hat / (v_hat.sqrt() + eps);
            }
            theta[2] = theta[2].max(log_noise_floor);
            if theta.iter().any(|t| !t.is_finite()) {
                return Err(Error::Fit("GP hyperparameters diverged".into()));
            }
        }

        let hyper = GpHyperparameters::from_unconstrained(theta);
        let model = Self::build(hyper, scaler, d, x, y)?;
        let final_lml = model.log_marginal_likelihood()?.as_f64();
        let initial = match trace.first() {
            Some(&v) => v,
            None => final_lml,
        };
        let report = GpFitReport {
            epochs: config.epochs,
            initial_log_marginal_likelihood: initial,
            final_log_marginal_likelihood: final_lml,
            trace,
            hyperparameters: hyper.cast(),
        };
        Ok((model, report))
    }

    /// Conditions a GP with fixed hyperparameters on the training data.
    pub fn with_hyperparameters(
        train: &Dataset<F>,
        hyper: GpHyperparameters<F>,
        standardize_inputs: bool,
    ) -> Result<GpModel<F>> {
        hyper.validate()?;
        let (scaler, x, y) = Self::prepare(train, standardize_inputs)?;
        Self::build(hyper, scaler, train.n_features(), x, y)
    }

    fn prepare(train: &Dataset<F>, standardize_inputs: bool) -> Result<(Standardizer<F>, Vec<F>, Vec<F>)> {
        let targets = train.real_targets().ok_or_else(|| Error::TaskMismatch {
            expected: "regression".into(),
            found: train.task().to_string(),
        })?;
        if train.n_rows() < 2 {
            return Err(Error::invalid("GP fit needs at least 2 training rows"));
        }
        let mut scaler = Standardizer::fit(train);
        if !standardize_inputs {
            let target = scaler.target;
            scaler = Standardizer::identity(train.n_features());
            scaler.target = target;
        }
        let x: Vec<F> = train.rows().flat_map(|r| scaler.transform_row(r)).collect();
        let y: Vec<F> = targets.iter().map(|&t| scaler.transform_target(t)).collect();
        Ok((scaler, x, y))
    }

    fn build(
        hyper: GpHyperparameters<F>,
        scaler: Standardizer<F>,
        n_features: usize,
        train_x: Vec<F>,
        train_y: Vec<F>,
    ) -> Result<GpModel<F>> {
        let n = train_y.len();
        let sq = squared_distances(&train_x, n, n_features);
        let (_, k) = kernel_matrix(&sq, n, &hyper);
        let chol = Cholesky::factor_with_jitter(&k, n)?;
        let resid: Vec<F> = train_y.iter().map(|&v| v - hyper.mean).collect();
        let alpha = chol.solve(&resid);
        Ok(GpModel {
            hyper,
            scaler,
            n_features,
            train_x,
            train_y,
            chol,
            alpha,
        })
    }

    pub fn hyperparameters(&self) -> &GpHyperparameters<F> {
        &self.hyper
    }

    pub fn scaler(&self) -> &Standardizer<F> {
        &self.scaler
    }

    /// Noise variance in target units, including any factorization jitter.
    pub fn noise_variance(&self) -> F {
        (self.hyper.noise_variance + self.chol.jitter()) * self.scaler.target_variance_scale()
    }

    /// Log marginal likelihood of the (standardized) training targets at the fitted hyperparameters.
    pub fn log_marginal_likelihood(&self) -> Result<F> {
        let sq = squared_distances(&self.train_x, self.train_y.len(), self.n_features);
        lml_and_grad(&sq, &self.train_y, &self.hyper).map(|(l, _)| l)
    }

    /// Posterior predictive `(mean, variance)` on the standardized scale for a standardized input.
    fn predict_standardized(&self, z: &[F]) -> (F, F) {
        let d = self.n_features;
        let inv2l2 = F::one() / (F::lit(2.0) * self.hyper.lengthscale * self.hyper.lengthscale);
        let mut kstar: Vec<F> = self
            .train_x
            .chunks_exact(d)
            .map(|row| {
                let r2: F = row.iter().zip(z).map(|(&a, &b)| (a - b) * (a - b)).sum();
                self.hyper.signal_variance * (-r2 * inv2l2).exp()
            })
            .collect();
        let mean = self.hyper.mean
            + kstar
                .iter()
                .zip(&self.alpha)
                .map(|(&k, &a)| k * a)
                .sum::<F>();
        self.chol.solve_lower_in_place(&mut kstar);
        let explained: F = kstar.iter().map(|&v| v * v).sum();
        let latent = (self.hyper.signal_variance - explained).max(F::zero());
        (mean, latent + self.hyper.noise_variance + self.chol.jitter())
    }

    /// Gaussian posterior predictive in target units, observation noise included.
    pub fn predict(&self, x: &[F]) -> Gaussian<F> {
        let z = self.scaler.transform_row(x);
        let (mean, var) = self.predict_standardized(&z);
        Gaussian::new(
            self.scaler.invert_target(mean),
            var * self.scaler.target_variance_scale(),
        )
        .expect("GP predictive variance is bounded below by the noise variance")
    }

    pub fn to_state(&self) -> GpState<F> {
        GpState {
            kernel: KERNEL_NAME.to_string(),
            hyperparameters: self.hyper,
            scaler: self.scaler.clone(),
            n_features: self.n_features,
            train_x: self.train_x.clone(),
            train_y: self.train_y.clone(),
        }
    }

    pub fn from_state(state: GpState<F>) -> Result<GpModel<F>> {
        if state.kernel != KERNEL_NAME {
            return Err(Error::invalid(format!("unsupported kernel '{}'", state.kernel)));
        }
        state.hyperparameters.validate()?;
        if state.n_features == 0 || state.train_x.len() != state.train_y.len() * state.n_features {
            return Err(Error::invalid("GP state has inconsistent training buffers"));
        }
        Self::build(
            state.hyperparameters,
            state.scaler,
            state.n_features,
            state.train_x,
            state.train_y,
        )
    }
}

impl<F: Scalar> ProbabilisticModel<F> for GpModel<F> {
    fn task(&self) -> TaskKind {
        TaskKind::Regression
    }

    fn n_features(&self) -> usize {
        self.n_features
    }

    fn predict_dist(&self, x: &[F]) -> PredictiveDistribution<F> {
        PredictiveDistribution::Gaussian(self.predict(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Targets;
    use crate::rng::Stream;

    fn dataset(rows: Vec<Vec<f64>>, y: Vec<f64>) -> Dataset<f64> {
        let d = rows[0].len();
        let names = (0..d).map(|j| format!("x{j}")).collect();
        Dataset::from_rows(&rows, names, "y", Targets::Real(y)).unwrap()
    }

    fn random_problem(n: usize, d: usize, seed: u64) -> Dataset<f64> {
        let mut s = Stream::new(seed);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| s.normal()).collect()).collect();
        let y = rows.iter().map(|r| r[0].sin() + 0.3 * s.normal()).collect();
        dataset(rows, y)
    }

    #[test]
    fn ascent_on_three_points() {
        let train = dataset(vec![vec![0.0], vec![1.0], vec![2.0]], vec![0.0, 1.0, 2.0]);
        let cfg = GpConfig {
            epochs: 200,
            ..GpConfig::default()
        };
        let (model, report) = GpModel::fit(&train, &cfg).unwrap();
        assert!(report.final_log_marginal_likelihood >= report.initial_log_marginal_likelihood);
        assert!((model.log_marginal_likelihood().unwrap() - report.final_log_marginal_likelihood).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let ds = random_problem(10, 2, 3);
        let x = ds.features().to_vec();
        let y = ds.real_targets().unwrap().to_vec();
        let hyper = GpHyperparameters {
            signal_variance: 1.3,
            lengthscale: 0.8,
            noise_variance: 0.2,
            mean: 0.1,
        };
        let (_, grad) = log_marginal_likelihood(&x, 2, &y, &hyper).unwrap();
        let theta = hyper.to_unconstrained();
        let h = 1e-5;
        for p in 0..4 {
            let mut up = theta;
            let mut dn = theta;
            up[p] += h;
            dn[p] -= h;
            let fu = log_marginal_likelihood(&x, 2, &y, &GpHyperparameters::from_unconstrained(up)).unwrap().0;
            let fd = log_marginal_likelihood(&x, 2, &y, &GpHyperparameters::from_unconstrained(dn)).unwrap().0;
            let fdiff = (fu - fd) / (2.0 * h);
            let rel = (grad[p] - fdiff).abs() / fdiff.abs().max(1e-8);
            assert!(rel <= 1e-4, "param {p}: analytic {} vs fd {fdiff}", grad[p]);
        }
    }

    #[test]
    fn fit_is_deterministic() {
        let ds = random_problem(30, 2, 9);
        let cfg = GpConfig {
            epochs: 50,
            ..GpConfig::default()
        };
        let (a, ra) = GpModel::fit(&ds, &cfg).unwrap();
        let (b, rb) = GpModel::fit(&ds, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra, rb);
    }

    #[test]
    fn interpolates_with_tiny_noise() {
        // evenly spaced inputs keep the kernel matrix well conditioned
        let mut s = Stream::new(4);
        let rows: Vec<Vec<f64>> = (0..15).map(|i| vec![i as f64 * 0.3]).collect();
        let y = rows.iter().map(|r| r[0].sin() + 0.3 * s.normal()).collect();
        let ds = dataset(rows, y);
        let hyper = GpHyperparameters {
            signal_variance: 1.0,
            lengthscale: 0.2,
            noise_variance: 1e-6,
            mean: 0.0,
        };
        let model = GpModel::with_hyperparameters(&ds, hyper, true).unwrap();
        let scaler = model.scaler();
        for i in 0..ds.n_rows() {
            let g = model.predict(ds.row(i));
            let Targets::Real(y) = ds.targets() else { unreachable!() };
            let err = (scaler.transform_target(g.mean()) - scaler.transform_target(y[i])).abs();
            assert!(err <= 1e-2, "row {i}: {err}");
        }
    }

    #[test]
    fn far_field_variance_is_prior() {
        let ds = random_problem(20, 2, 5);
        let hyper = GpHyperparameters {
            signal_variance: 0.7,
            lengthscale: 0.5,
            noise_variance: 0.05,
            mean: 0.0,
        };
        let model = GpModel::with_hyperparameters(&ds, hyper, true).unwrap();
        let g = model.predict(&[1e3, -1e3]);
        let expected = (0.7 + 0.05) * model.scaler().target_variance_scale();
        assert!((g.variance() - expected).abs() < 1e-6);
        // and the mean reverts to the constant mean
        assert!((g.mean() - model.scaler().invert_target(0.0)).abs() < 1e-9);
    }

    #[test]
    fn variance_bounded_below_by_noise() {
        let ds = random_problem(25, 2, 6);
        let (model, _) = GpModel::fit(&ds, &GpConfig { epochs: 30, ..GpConfig::default() }).unwrap();
        let mut s = Stream::new(1);
        for _ in 0..200 {
            let x = [s.normal() * 3.0, s.normal() * 3.0];
            let g = model.predict(&x);
            assert!(g.variance() >= model.noise_variance() - 1e-9);
        }
        let again = model.predict(&[0.1, 0.2]);
        assert_eq!(again, model.predict(&[0.1, 0.2]));
    }

    #[test]
    fn state_round_trip() {
        let ds = random_problem(12, 3, 7);
        let (model, _) = GpModel::fit(&ds, &GpConfig { epochs: 20, ..GpConfig::default() }).unwrap();
        let json = serde_json::to_string(&model.to_state()).unwrap();
        let back = GpModel::from_state(serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back, model);
    }

    #[test]
    fn rejects_classification_and_tiny_sets() {
        let ds = Dataset::from_rows(
            &[vec![0.0_f64], vec![1.0]],
            vec!["x".into()],
            "y",
            Targets::Class {
                labels: vec![0, 1],
                class_names: vec!["a".into(), "b".into()],
            },
        )
        .unwrap();
        assert!(matches!(GpModel::fit(&ds, &GpConfig::default()), Err(Error::TaskMismatch { .. })));
        let one = dataset(vec![vec![0.0]], vec![1.0]);
        assert!(GpModel::fit(&one, &GpConfig::default()).is_err());
    }

    #[test]
    fn runs_in_f32() {
        let ds = random_problem(20, 2, 8);
        let rows: Vec<Vec<f32>> = ds.rows().map(|r| r.iter().map(|&v| v as f32).collect()).collect();
        let y: Vec<f32> = ds.real_targets().unwrap().iter().map(|&v| v as f32).collect();
        let ds32 = Dataset::from_rows(&rows, ds.feature_names().to_vec(), "y", Targets::Real(y)).unwrap();
        let (model, report) = GpModel::<f32>::fit(&ds32, &GpConfig { epochs: 50, ..GpConfig::default() }).unwrap();
        assert!(report.final_log_marginal_likelihood > report.initial_log_marginal_likelihood);
        assert!(model.predict(&[0.0, 0.0]).variance() > 0.0);
    }
}
