//! Versioned JSON model files.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::forest::CalibratedForest;
use super::gp::{GpModel, GpState};
use super::ProbabilisticModel;
use crate::data::DatasetMeta;
use crate::distributions::{PredictiveDistribution, TaskKind};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Any built-in fitted model.
#[derive(Debug, Clone)]
pub enum AnyModel<F> {
    Gp(GpModel<F>),
    CalibratedForest(CalibratedForest<F>),
}

impl<F: Scalar> AnyModel<F> {
    pub fn kind(&self) -> &'static str {
        match self {
            AnyModel::Gp(_) => "gp",
            AnyModel::CalibratedForest(_) => "rf",
        }
    }
}

impl<F: Scalar> ProbabilisticModel<F> for AnyModel<F> {
    fn task(&self) -> TaskKind {
        match self {
            AnyModel::Gp(m) => m.task(),
            AnyModel::CalibratedForest(m) => m.task(),
        }
    }

    fn n_features(&self) -> usize {
        match self {
            AnyModel::Gp(m) => m.n_features(),
            AnyModel::CalibratedForest(m) => ProbabilisticModel::<F>::n_features(m),
        }
    }

    fn predict_dist(&self, x: &[F]) -> PredictiveDistribution<F> {
        match self {
            AnyModel::Gp(m) => m.predict_dist(x),
            AnyModel::CalibratedForest(m) => m.predict_dist(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", bound = "F: Scalar")]
enum StoredModel<F> {
    Gp(GpState<F>),
    CalibratedForest(CalibratedForest<F>),
}

/// On-disk model with the schema of the data it was trained on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct ModelFile<F> {
    pub format_version: u32,
    /// Training dataset schema; prediction inputs must match it.
    pub dataset: DatasetMeta,
    /// Seed that produced the model, if any.
    pub seed: Option<u64>,
    model: StoredModel<F>,
}

impl<F: Scalar> ModelFile<F> {
    pub fn new(model: &AnyModel<F>, dataset: DatasetMeta, seed: Option<u64>) -> Self {
        let model = match model {
            AnyModel::Gp(m) => StoredModel::Gp(m.to_state()),
            AnyModel::CalibratedForest(m) => StoredModel::CalibratedForest(m.clone()),
        };
        ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            dataset,
            seed,
            model,
        }
    }

    /// Rebuilds the fitted model (the GP refactorizes its kernel matrix).
    pub fn to_model(&self) -> Result<AnyModel<F>> {
        Ok(match &self.model {
            StoredModel::Gp(s) => AnyModel::Gp(GpModel::from_state(s.clone())?),
            StoredModel::CalibratedForest(f) => AnyModel::CalibratedForest(f.clone()),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        check_version(&value)?;
        Ok(serde_json::from_value(value)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, self)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_reader(BufReader::new(File::open(path)?))?;
        check_version(&value)?;
        Ok(serde_json::from_value(value)?)
    }
}

fn check_version(value: &serde_json::Value) -> Result<()> {
    let found = value.get("format_version").and_then(|v| v.as_u64());
    match found {
        Some(v) if v == u64::from(MODEL_FORMAT_VERSION) => Ok(()),
        Some(v) => Err(Error::ModelVersion {
            found: v as u32,
            expected: MODEL_FORMAT_VERSION,
        }),
        None => Err(Error::invalid("model file has no format_version")),
    }
}
