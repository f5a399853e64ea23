//! Loading user CSVs with the right target interpretation.

use std::path::Path;

use uncertainty_importance::data::{load_csv, CsvOptions, DatasetMeta, TargetSpec};
use uncertainty_importance::{Dataset, Error, TaskKind};

use crate::error::{CliError, CliResult};

fn reader(path: &Path) -> CliResult<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(CliError::io(path))?;
    Ok(csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(file))
}

/// The requested target column, or the last header column.
pub fn resolve_target(path: &Path, target: Option<&str>) -> CliResult<String> {
    if let Some(t) = target {
        return Ok(t.to_string());
    }
    let header = reader(path)?.headers()?.clone();
    header
        .iter()
        .last()
        .filter(|h| !h.is_empty())
        .map(str::to_string)
        .ok_or_else(|| {
            Error::Ingest {
                path: path.to_path_buf(),
                row: 1,
                column: String::new(),
                message: "empty file or missing header".into(),
            }
            .into()
        })
}

/// Raw target cells, in file order.
fn target_cells(path: &Path, target: &str) -> CliResult<Vec<String>> {
    let mut rdr = reader(path)?;
    let pos = rdr.headers()?.iter().position(|h| h == target);
    let Some(pos) = pos else {
        // Let the core loader produce its usual error.
        return Ok(Vec::new());
    };
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if let Some(c) = rec.get(pos) {
            out.push(c.to_string());
        }
    }
    Ok(out)
}

/// Whether every target cell is a finite number that is not an integer,
/// i.e. the column can only be a regression target.
fn is_continuous(cells: &[String]) -> bool {
    let nums: Option<Vec<f64>> = cells.iter().map(|c| c.parse::<f64>().ok().filter(|v| v.is_finite())).collect();
    matches!(nums, Some(v) if v.iter().any(|x| x.fract() != 0.0))
}

/// Distinct labels, numerically sorted when they are all numbers and
/// lexicographically otherwise, so label indices do not depend on row order.
fn sorted_classes(cells: &[String]) -> Vec<String> {
    let mut names: Vec<String> = cells.to_vec();
    names.sort();
    names.dedup();
    let nums: Option<Vec<f64>> = names.iter().map(|c| c.parse::<f64>().ok()).collect();
    if let Some(v) = nums {
        let mut pairs: Vec<(f64, String)> = v.into_iter().zip(names).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        names = pairs.into_iter().map(|p| p.1).collect();
    }
    names
}

pub fn load_regression(path: &Path, target: &str) -> CliResult<Dataset<f64>> {
    Ok(load_csv(path, &CsvOptions::regression(target))?)
}

/// Loads a classification dataset; a continuous target is a task mismatch.
pub fn load_classification(path: &Path, target: &str) -> CliResult<Dataset<f64>> {
    let cells = target_cells(path, target)?;
    if is_continuous(&cells) {
        return Err(Error::TaskMismatch {
            expected: "classification".into(),
            found: "regression (continuous target)".into(),
        }
        .into());
    }
    let opts = CsvOptions {
        target_column: target.to_string(),
        target: TargetSpec::Classification {
            class_names: Some(sorted_classes(&cells)),
        },
    };
    Ok(load_csv(path, &opts)?)
}

/// Regression when every target cell is numeric, classification otherwise.
pub fn load_auto(path: &Path, target: &str) -> CliResult<Dataset<f64>> {
    let cells = target_cells(path, target)?;
    if cells.iter().all(|c| c.parse::<f64>().is_ok()) {
        load_regression(path, target)
    } else {
        load_classification(path, target)
    }
}

/// Loads a test set with the schema recorded in a model file.
pub fn load_for_model(path: &Path, meta: &DatasetMeta) -> CliResult<Dataset<f64>> {
    let opts = match meta.task {
        TaskKind::Regression => CsvOptions::regression(&meta.target_name),
        TaskKind::Classification { .. } => CsvOptions {
            target_column: meta.target_name.clone(),
            target: TargetSpec::Classification {
                class_names: meta.class_names.clone(),
            },
        },
    };
    let ds: Dataset<f64> = load_csv(path, &opts)?;
    if ds.feature_names() != meta.feature_names.as_slice() {
        return Err(Error::InvalidInput(format!(
            "{} has features [{}] but the model was trained on [{}]",
            path.display(),
            ds.feature_names().join(", "),
            meta.feature_names.join(", ")
        ))
        .into());
    }
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classes_sort_numerically() {
        let cells: Vec<String> = ["10", "2", "1", "2"].iter().map(|s| s.to_string()).collect();
        assert_eq!(sorted_classes(&cells), vec!["1", "2", "10"]);
        let cells: Vec<String> = ["b", "a"].iter().map(|s| s.to_string()).collect();
        assert_eq!(sorted_classes(&cells), vec!["a", "b"]);
    }

    #[test]
    fn continuity() {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        assert!(is_continuous(&s(&["0.5", "1"])));
        assert!(!is_continuous(&s(&["0", "1"])));
        assert!(!is_continuous(&s(&["yes", "0.5"])));
    }
}
