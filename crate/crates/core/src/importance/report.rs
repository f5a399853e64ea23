//! Repeat-level importance results and their JSON / tidy CSV forms.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::Measure;
use crate::distributions::TaskKind;
use crate::error::Result;
use crate::scalar::{mean, sample_sd, Scalar};

/// One measure for one feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct ImportanceEntry<F> {
    pub feature: String,
    pub feature_index: usize,
    pub measure: Measure,
    /// Mean over repeats.
    pub mean: F,
    /// Sample standard deviation over repeats (0 for a single repeat).
    pub sd: F,
    /// `sd / sqrt(n_repeats)`.
    pub std_error: F,
    pub n_repeats: usize,
    /// Mean of the statistic on the unpermuted test set.
    pub baseline: F,
    /// Per-repeat values, in repeat order.
    pub values: Vec<F>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl<F: Scalar> ImportanceEntry<F> {
    pub fn from_values(feature: String, feature_index: usize, measure: Measure, baseline: F, values: Vec<F>) -> Self {
        let r = values.len();
        let sd = if r > 1 { sample_sd(&values) } else { F::zero() };
        ImportanceEntry {
            feature,
            feature_index,
            measure,
            mean: mean(&values),
            sd,
            std_error: sd / F::from_usize(r.max(1)).unwrap().sqrt(),
            n_repeats: r,
            baseline,
            values,
            warning: None,
        }
    }
}

/// All entries of one importance run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct ImportanceReport<F> {
    pub seed: u64,
    pub n_repeats: usize,
    pub n_rows: usize,
    pub task: TaskKind,
    /// Unit of likelihood and entropy values; classic values are in loss units.
    pub units: String,
    pub entries: Vec<ImportanceEntry<F>>,
}

impl<F: Scalar> ImportanceReport<F> {
    pub fn get(&self, feature_index: usize, measure: Measure) -> Option<&ImportanceEntry<F>> {
        self.entries
            .iter()
            .find(|e| e.feature_index == feature_index && e.measure == measure)
    }

    pub fn by_measure(&self, measure: Measure) -> impl Iterator<Item = &ImportanceEntry<F>> {
        self.entries.iter().filter(move |e| e.measure == measure)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Tidy CSV with one row per (feature, measure, repeat), after a `#` comment
    /// line recording units and seed.
    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(
            writer,
            "# units: nats (classic: loss units); seed: {}; n_repeats: {}",
            self.seed, self.n_repeats
        )?;
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["feature", "measure", "repeat", "value"])?;
        for e in &self.entries {
            for (r, v) in e.values.iter().enumerate() {
                w.write_record([e.feature.as_str(), e.measure.name(), &r.to_string(), &v.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_statistics() {
        let e = ImportanceEntry::from_values("a".into(), 0, Measure::Entropy, 1.0_f64, vec![1.0, 2.0, 3.0]);
        assert_eq!(e.mean, 2.0);
        assert_eq!(e.sd, 1.0);
        assert!((e.std_error - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        let single = ImportanceEntry::from_values("a".into(), 0, Measure::Entropy, 0.0_f64, vec![0.5]);
        assert_eq!(single.sd, 0.0);
    }

    #[test]
    fn csv_has_one_row_per_repeat() {
        let report = ImportanceReport {
            seed: 7,
            n_repeats: 2,
            n_rows: 10,
            task: TaskKind::Regression,
            units: "nats".into(),
            entries: vec![
                ImportanceEntry::from_values("a".into(), 0, Measure::Likelihood, 0.0_f64, vec![0.25, 0.5]),
                ImportanceEntry::from_values("a".into(), 0, Measure::Entropy, 0.0_f64, vec![0.0, -0.125]),
            ],
        };
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# units: nats") && lines[0].contains("seed: 7"));
        assert_eq!(lines[1], "feature,measure,repeat,value");
        assert_eq!(lines.len(), 2 + 4);
        assert_eq!(lines[5], "a,entropy,1,-0.125");
    }
}
