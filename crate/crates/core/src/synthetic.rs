//! Seeded generators for the synthetic benchmark families.
//!
//! Every generator is a pure function of its config. Features are named
//! `x1..xd` and the target `y`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Targets};
use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::scalar::Scalar;

fn feature_names(d: usize) -> Vec<String> {
    (1..=d).map(|j| format!("x{j}")).collect()
}

/// Which column, if any, overwrites the last feature after labels are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeaseVariant {
    Original,
    /// Last feature := feature 1.
    CopyInformative,
    /// Last feature := feature 5.
    CopyUninformative,
}

impl fmt::Display for MeaseVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeaseVariant::Original => "original",
            MeaseVariant::CopyInformative => "copy_informative",
            MeaseVariant::CopyUninformative => "copy_uninformative",
        })
    }
}

impl FromStr for MeaseVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "original" => Ok(MeaseVariant::Original),
            "copy_informative" => Ok(MeaseVariant::CopyInformative),
            "copy_uninformative" => Ok(MeaseVariant::CopyUninformative),
            _ => Err(Error::invalid(format!(
                "unknown variant '{s}' (valid: original, copy_informative, copy_uninformative)"
            ))),
        }
    }
}

/// Binary labels with `P(Y = 1 | x) = eps + (1 - 2 eps) 1(x_1 + ... + x_J > J / 2)`,
/// `x` uniform on the unit hypercube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeaseConfig {
    pub n: usize,
    pub d: usize,
    pub j: usize,
    pub eps: f64,
    pub variant: MeaseVariant,
    pub seed: u64,
}

impl Default for MeaseConfig {
    fn default() -> Self {
        MeaseConfig {
            n: 5000,
            d: 10,
            j: 4,
            eps: 0.1,
            variant: MeaseVariant::Original,
            seed: 0,
        }
    }
}

impl MeaseConfig {
    /// Probability of class 1 at `x`.
    pub fn p_positive(&self, x: &[f64]) -> f64 {
        let s: f64 = x[..self.j].iter().sum();
        let hit = if s > self.j as f64 / 2.0 { 1.0 } else { 0.0 };
        self.eps + (1.0 - 2.0 * self.eps) * hit
    }
}

pub fn gen_mease<F: Scalar>(cfg: &MeaseConfig) -> Result<Dataset<F>> {
    if cfg.n == 0 || cfg.d == 0 {
        return Err(Error::invalid("mease data needs n >= 1 and d >= 1"));
    }
    if cfg.j == 0 || cfg.j > cfg.d {
        return Err(Error::invalid(format!("need 1 <= J <= d, got J={} d={}", cfg.j, cfg.d)));
    }
    if !(0.0..0.5).contains(&cfg.eps) {
        return Err(Error::invalid(format!("eps must lie in [0, 0.5), got {}", cfg.eps)));
    }
    let source = match cfg.variant {
        MeaseVariant::Original => None,
        MeaseVariant::CopyInformative => Some(0),
        MeaseVariant::CopyUninformative => Some(4),
    };
    if let Some(src) = source {
        if src >= cfg.d - 1 {
            return Err(Error::invalid(format!(
                "variant {} needs more than {} features",
                cfg.variant,
                src + 1
            )));
        }
    }
    let root = Stream::new(cfg.seed).fork("mease");
    let mut xs = root.fork("features");
    let mut ls = root.fork("labels");
    let mut features = Vec::with_capacity(cfg.n * cfg.d);
    let mut labels = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let mut row: Vec<f64> = (0..cfg.d).map(|_| xs.uniform()).collect();
        labels.push(usize::from(ls.bernoulli(cfg.p_positive(&row))));
        if let Some(src) = source {
            row[cfg.d - 1] = row[src];
        }
        features.extend(row.into_iter().map(F::lit));
    }
    Dataset::new(
        features,
        feature_names(cfg.d),
        "y",
        Targets::Class {
            labels,
            class_names: vec!["0".into(), "1".into()],
        },
    )
}

/// `Y = X1 + X2 + 0.9 X3^2 + X4 + X5 + noise_sd * e` with `(X1, X2)` and
/// `(X3, X4)` standard bivariate normal with correlation 0.8, `X5` and `e`
/// standard normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrRegressionConfig {
    pub n: usize,
    pub noise_sd: f64,
    pub seed: u64,
}

pub const CORR_BLOCK: f64 = 0.8;

impl Default for CorrRegressionConfig {
    fn default() -> Self {
        CorrRegressionConfig {
            n: 1000,
            noise_sd: 2f64.sqrt(),
            seed: 0,
        }
    }
}

pub fn corr_regression_mean(x: &[f64]) -> f64 {
    x[0] + x[1] + 0.9 * x[2] * x[2] + x[3] + x[4]
}

/// Features and noise come from separate streams, so configs differing only
/// in `noise_sd` share their feature matrix and standardized noise draws.
pub fn gen_corr_regression<F: Scalar>(cfg: &CorrRegressionConfig) -> Result<Dataset<F>> {
    if cfg.n == 0 {
        return Err(Error::invalid("regression data needs n >= 1"));
    }
    if !(cfg.noise_sd >= 0.0) || !cfg.noise_sd.is_finite() {
        return Err(Error::invalid(format!("noise sd must be >= 0, got {}", cfg.noise_sd)));
    }
    let root = Stream::new(cfg.seed).fork("corr-regression");
    let mut xs = root.fork("features");
    let mut es = root.fork("noise");
    // Cholesky factor of [[1, r], [r, 1]]: rows (1, 0) and (r, sqrt(1 - r^2))
    let c = (1.0 - CORR_BLOCK * CORR_BLOCK).sqrt();
    let mut features = Vec::with_capacity(cfg.n * 5);
    let mut y = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let z: [f64; 5] = std::array::from_fn(|_| xs.normal());
        let x = [
            z[0],
            CORR_BLOCK * z[0] + c * z[1],
            z[2],
            CORR_BLOCK * z[2] + c * z[3],
            z[4],
        ];
        let e = es.normal();
        y.push(F::lit(corr_regression_mean(&x) + cfg.noise_sd * e));
        features.extend(x.iter().map(|&v| F::lit(v)));
    }
    Dataset::new(features, feature_names(5), "y", Targets::Real(y))
}

/// Points uniform on the square frame `inner <= max(|x1|, |x2|) <= outer`,
/// with `Y = (x1 + x2)^2 + noise_sd * e`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BorderConfig {
    pub n: usize,
    pub inner: f64,
    pub outer: f64,
    pub noise_sd: f64,
    pub seed: u64,
}

impl Default for BorderConfig {
    fn default() -> Self {
        BorderConfig {
            n: 1000,
            inner: 1.5,
            outer: 2.5,
            noise_sd: 0.1,
            seed: 0,
        }
    }
}

/// The frame is cut into top and bottom strips spanning the full width and
/// left and right strips between them; a strip is chosen with probability
/// proportional to its area, then a point uniformly inside it.
pub fn gen_border<F: Scalar>(cfg: &BorderConfig) -> Result<Dataset<F>> {
    if cfg.n == 0 {
        return Err(Error::invalid("border data needs n >= 1"));
    }
    if !(cfg.inner >= 0.0 && cfg.inner < cfg.outer && cfg.outer.is_finite()) {
        return Err(Error::invalid(format!(
            "need 0 <= inner < outer, got inner={} outer={}",
            cfg.inner, cfg.outer
        )));
    }
    if !(cfg.noise_sd >= 0.0) || !cfg.noise_sd.is_finite() {
        return Err(Error::invalid(format!("noise sd must be >= 0, got {}", cfg.noise_sd)));
    }
    let (a, b) = (cfg.inner, cfg.outer);
    let horizontal = 2.0 * b * (b - a);
    let vertical = 2.0 * a * (b - a);
    let total = 2.0 * (horizontal + vertical);
    let root = Stream::new(cfg.seed).fork("border");
    let mut xs = root.fork("features");
    let mut es = root.fork("noise");
    let mut features = Vec::with_capacity(cfg.n * 2);
    let mut y = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let pick = xs.uniform() * total;
        let (x1, x2) = if pick < horizontal {
            (xs.uniform_range(-b, b), xs.uniform_range(a, b))
        } else if pick < 2.0 * horizontal {
            (xs.uniform_range(-b, b), -xs.uniform_range(a, b))
        } else if pick < 2.0 * horizontal + vertical {
            (-xs.uniform_range(a, b), xs.uniform_range(-a, a))
        } else {
            (xs.uniform_range(a, b), xs.uniform_range(-a, a))
        };
        let e = es.normal();
        y.push(F::lit((x1 + x2) * (x1 + x2) + cfg.noise_sd * e));
        features.push(F::lit(x1));
        features.push(F::lit(x2));
    }
    Dataset::new(features, feature_names(2), "y", Targets::Real(y))
}
