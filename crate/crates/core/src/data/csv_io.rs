use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::data::{Dataset, Targets};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// How to interpret the target column of a CSV file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TargetSpec {
    Regression,
    /// Labels are mapped to indices in first-appearance order unless a fixed
    /// class list is given (e.g. the one stored in a fitted model).
    Classification { class_names: Option<Vec<String>> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvOptions {
    pub target_column: String,
    pub target: TargetSpec,
}

impl CsvOptions {
    pub fn regression(target_column: impl Into<String>) -> Self {
        CsvOptions {
            target_column: target_column.into(),
            target: TargetSpec::Regression,
        }
    }

    pub fn classification(target_column: impl Into<String>) -> Self {
        CsvOptions {
            target_column: target_column.into(),
            target: TargetSpec::Classification { class_names: None },
        }
    }
}

/// Loads a comma-separated file with a header row.
pub fn load_csv<F: Scalar>(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Dataset<F>> {
    let path = path.as_ref();
    let file = File::open(path)?;
    read_csv(file, path, opts)
}

/// Parses CSV from any reader; `path` is only used in error messages.
pub fn read_csv<F: Scalar, R: Read>(reader: R, path: &Path, opts: &CsvOptions) -> Result<Dataset<F>> {
    let ingest = |row: usize, column: &str, message: String| Error::Ingest {
        path: path.to_path_buf(),
        row,
        column: column.to_string(),
        message,
    };

    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(ingest(1, "", "empty file or missing header".into()));
    }
    let target_pos = header
        .iter()
        .position(|h| *h == opts.target_column)
        .ok_or_else(|| {
            ingest(
                1,
                &opts.target_column,
                format!("target column not found; header is [{}]", header.join(", ")),
            )
        })?;
    let feature_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(c, _)| c != target_pos)
        .map(|(_, h)| h.clone())
        .collect();

    let mut features = Vec::new();
    let mut real_targets = Vec::new();
    let mut labels = Vec::new();
    let (mut class_names, fixed_classes) = match &opts.target {
        TargetSpec::Classification {
            class_names: Some(c),
        } => (c.clone(), true),
        _ => (Vec::new(), false),
    };
    let mut class_index: HashMap<String, usize> = class_names
        .iter()
        .enumerate()
        .map(|(i, c)| (c.clone(), i))
        .collect();

    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() != header.len() {
            return Err(ingest(
                line,
                "",
                format!("expected {} fields, found {}", header.len(), record.len()),
            ));
        }
        for (c, cell) in record.iter().enumerate() {
            let column = &header[c];
            if cell.is_empty() {
                return Err(ingest(line, column, "missing value".into()));
            }
            if c == target_pos {
                match opts.target {
                    TargetSpec::Regression => {
                        real_targets.push(parse_number::<F>(cell).map_err(|m| ingest(line, column, m))?)
                    }
                    TargetSpec::Classification { .. } => {
                        let idx = match class_index.get(cell) {
                            Some(&i) => i,
                            None if fixed_classes => {
                                return Err(ingest(
                                    line,
                                    column,
                                    format!(
                                        "unknown class label '{cell}'; known: [{}]",
                                        class_names.join(", ")
                                    ),
                                ))
                            }
                            None => {
                                class_names.push(cell.to_string());
                                class_index.insert(cell.to_string(), class_names.len() - 1);
                                class_names.len() - 1
                            }
                        };
                        labels.push(idx);
                    }
                }
            } else {
                features.push(parse_number::<F>(cell).map_err(|m| ingest(line, column, m))?);
            }
        }
    }
    let n_rows = real_targets.len().max(labels.len());
    if n_rows == 0 {
        return Err(ingest(2, "", "file has a header but no data rows".into()));
    }
    let targets = match opts.target {
        TargetSpec::Regression => Targets::Real(real_targets),
        TargetSpec::Classification { .. } => Targets::Class {
            labels,
            class_names,
        },
    };
    Dataset::new(features, feature_names, opts.target_column.clone(), targets)
}

fn parse_number<F: Scalar>(cell: &str) -> std::result::Result<F, String> {
    match cell.parse::<F>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(format!("non-finite value '{cell}'")),
        Err(_) => Err(format!("non-numeric value '{cell}'")),
    }
}

/// Writes the dataset as CSV: features in order, then the target column.
///
/// Numbers use the shortest representation that parses back to the same value,
/// so `write_csv` followed by [`read_csv`] reproduces the dataset exactly.
pub fn write_csv<F: Scalar, W: Write>(ds: &Dataset<F>, mut out: W) -> Result<()> {
    let mut line = String::new();
    line.push_str(&ds.feature_names().join(","));
    line.push(',');
    line.push_str(ds.target_name());
    writeln!(out, "{line}")?;
    for i in 0..ds.n_rows() {
        line.clear();
        for v in ds.row(i) {
            line.push_str(&v.to_string());
            line.push(',');
        }
        match ds.targets() {
            Targets::Real(t) => line.push_str(&t[i].to_string()),
            Targets::Class {
                labels,
                class_names,
            } => line.push_str(&class_names[labels[i]]),
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(text: &str, opts: &CsvOptions) -> Result<Dataset<f64>> {
        read_csv(text.as_bytes(), Path::new("mem.csv"), opts)
    }

    #[test]
    fn regression_file() {
        let ds = parse("a,b,y\n1,2,3\n4,5,6\n7,8.5,9\n", &CsvOptions::regression("y")).unwrap();
        assert_eq!(ds.n_rows(), 3);
        assert_eq!(ds.n_features(), 2);
        assert_eq!(ds.feature_names(), &["a".to_string(), "b".to_string()]);
        assert_eq!(ds.row(2), &[7.0, 8.5]);
        assert_eq!(ds.real_targets().unwrap(), &[3.0, 6.0, 9.0]);
    }

    #[test]
    fn target_column_may_be_anywhere() {
        let ds = parse("y,a,b\n1,2,3\n", &CsvOptions::regression("y")).unwrap();
        assert_eq!(ds.row(0), &[2.0, 3.0]);
    }

    #[test]
    fn classification_labels_first_appearance() {
        let ds = parse(
            "x,label\n0.1,neg\n0.2,pos\n0.3,neg\n",
            &CsvOptions::classification("label"),
        )
        .unwrap();
        assert_eq!(ds.class_names().unwrap(), &["neg".to_string(), "pos".to_string()]);
        assert_eq!(ds.class_labels().unwrap(), &[0, 1, 0]);
    }

    #[test]
    fn fixed_class_list() {
        let opts = CsvOptions {
            target_column: "label".into(),
            target: TargetSpec::Classification {
                class_names: Some(vec!["pos".into(), "neg".into()]),
            },
        };
        let ds = parse("x,label\n0.1,neg\n", &opts).unwrap();
        assert_eq!(ds.class_labels().unwrap(), &[1]);
        let err = parse("x,label\n0.1,maybe\n", &opts).unwrap_err();
        assert!(err.to_string().contains("maybe"));
    }

    #[test]
    fn missing_value_names_cell() {
        let err = parse("a,b,y\n1,2,3\n4,,6\n", &CsvOptions::regression("y")).unwrap_err();
        match err {
            Error::Ingest { row, column, .. } => {
                assert_eq!(row, 3);
                assert_eq!(column, "b");
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn non_numeric_and_missing_column() {
        let err = parse("a,y\nfoo,1\n", &CsvOptions::regression("y")).unwrap_err();
        assert!(err.to_string().contains("non-numeric"), "{err}");
        let err = parse("a,y\n1,2\n", &CsvOptions::regression("z")).unwrap_err();
        assert!(err.to_string().contains("target column not found"));
        assert!(parse("", &CsvOptions::regression("y")).is_err());
        assert!(parse("a,y\n", &CsvOptions::regression("y")).is_err());
    }

    proptest! {
        #[test]
        fn write_read_round_trip(
            rows in prop::collection::vec(prop::collection::vec(-1e6_f64..1e6, 3), 1..20),
        ) {
            let y: Vec<f64> = rows.iter().map(|r| r[0] * 0.1).collect();
            let names = vec!["p".to_string(), "q".to_string(), "r".to_string()];
            let ds = Dataset::from_rows(&rows, names, "y", Targets::Real(y)).unwrap();
            let mut buf = Vec::new();
            write_csv(&ds, &mut buf).unwrap();
            let back: Dataset<f64> = read_csv(&buf[..], Path::new("x"), &CsvOptions::regression("y")).unwrap();
            prop_assert_eq!(back, ds);
        }
    }
}
