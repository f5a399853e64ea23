use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use uncertainty_importance::models::ModelFile;
use uncertainty_importance::{CurveSet, ImportanceReport};

use super::echo_config;
use crate::args::Global;
use crate::error::{CliError, CliResult};
use crate::output::{Output, LOCK_FILE, TIMINGS_FILE};

const REPORT_FILE: &str = "report.md";

fn listing(dir: &Path) -> CliResult<Vec<String>> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .map_err(CliError::io(dir))?
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_file())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n != LOCK_FILE && n != TIMINGS_FILE && !n.starts_with("report."))
        .collect();
    names.sort();
    Ok(names)
}

fn summarize(dir: &Path, names: &[String]) -> CliResult<String> {
    let mut md = String::new();
    let _ = writeln!(md, "# Run summary\n");
    let _ = writeln!(md, "## Files\n");
    for n in names {
        let _ = writeln!(md, "- {n}");
    }
    for n in names.iter().filter(|n| n.ends_with(".json") && !n.ends_with(".config.json")) {
        let text = fs::read_to_string(dir.join(n)).map_err(CliError::io(dir.join(n)))?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        if value.get("format_version").is_some() {
            let file = ModelFile::<f64>::from_json(&text)?;
            let model = file.to_model()?;
            let _ = writeln!(md, "\n## Model {n}\n");
            let _ = writeln!(md, "- kind: {}", model.kind());
            let _ = writeln!(md, "- task: {}", file.dataset.task);
            let _ = writeln!(md, "- training rows: {}", file.dataset.n_rows);
            let _ = writeln!(md, "- features: {}", file.dataset.feature_names.join(", "));
            let _ = writeln!(md, "- target: {}", file.dataset.target_name);
        } else if value.get("entries").is_some() {
            let report: ImportanceReport<f64> = serde_json::from_value(value)?;
            let _ = writeln!(
                md,
                "\n## Importance {n}\n\n{} test rows, {} repeats, seed {}, units {}.\n",
                report.n_rows, report.n_repeats, report.seed, report.units
            );
            let _ = writeln!(md, "| measure | feature | mean | std. error |");
            let _ = writeln!(md, "|---|---|---|---|");
            let mut measures = Vec::new();
            for e in &report.entries {
                if !measures.contains(&e.measure) {
                    measures.push(e.measure);
                }
            }
            for m in measures {
                let mut rows: Vec<_> = report.by_measure(m).collect();
                rows.sort_by(|a, b| b.mean.total_cmp(&a.mean).then(a.feature_index.cmp(&b.feature_index)));
                for e in rows {
                    let _ = writeln!(md, "| {} | {} | {:.4} | {:.4} |", m, e.feature, e.mean, e.std_error);
                }
            }
        } else if value.get("pdp").is_some() {
            let set: CurveSet<f64> = serde_json::from_value(value)?;
            let (lo, hi) = set
                .pdp
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
            let _ = writeln!(md, "\n## Curves {n}\n");
            let _ = writeln!(md, "- feature: {}; metric: {} ({})", set.feature, set.metric, set.units);
            let _ = writeln!(
                md,
                "- grid: {} points, ICE curves kept: {} of {}",
                set.grid.len(),
                set.ice.len(),
                set.n_rows
            );
            let _ = writeln!(md, "- PDP range: {lo:.4} to {hi:.4}");
        }
    }
    Ok(md)
}

pub fn run(global: &Global) -> CliResult<()> {
    if !global.out.is_dir() {
        return Err(CliError::Usage(format!(
            "{} is not a directory; point --out at a run directory",
            global.out.display()
        )));
    }
    let mut out = Output::open(&global.out, "report", global.force)?;
    out.claim(&[REPORT_FILE.to_string()])?;
    echo_config(&out, "report", global, &[], &serde_json::Value::Null)?;
    let names = listing(&global.out)?;
    let md = summarize(&global.out, &names)?;
    out.write(REPORT_FILE, md.as_bytes())?;
    print!("{md}");
    out.log(format!("summarized {} files", names.len()));
    out.finish()
}
