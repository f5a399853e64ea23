use std::io::BufWriter;

use uncertainty_importance::importance::{ClassicLoss, GroupingSpec, DEFAULT_QUANTILE_BINS};
use uncertainty_importance::models::ModelFile;
use uncertainty_importance::{pfi_all_features, Measure, PermutationPlan, PfiOptions};

use super::{echo_config, stage_seed};
use crate::args::{Global, PfiArgs};
use crate::error::{CliError, CliResult};
use crate::inputs::load_for_model;
use crate::output::Output;
use crate::svg::{bar_chart, BarSeries};

pub fn parse_grouping(s: &str) -> CliResult<GroupingSpec> {
    let s = s.trim().to_ascii_lowercase();
    let bad = || CliError::Usage(format!("invalid --grouping '{s}' (valid: exact, quantile, quantile:BINS)"));
    match s.split_once(':') {
        None if s == "exact" => Ok(GroupingSpec::ExactMatch),
        None if s == "quantile" => Ok(GroupingSpec::QuantileBins {
            bins: DEFAULT_QUANTILE_BINS,
        }),
        Some(("quantile", b)) => b
            .parse::<usize>()
            .ok()
            .filter(|&b| b > 0)
            .map(|bins| GroupingSpec::QuantileBins { bins })
            .ok_or_else(bad),
        _ => Err(bad()),
    }
}

pub fn parse_classic_loss(s: &str) -> CliResult<ClassicLoss> {
    match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
        "squared-error" => Ok(ClassicLoss::SquaredErrorOnMean),
        "misclassification" => Ok(ClassicLoss::MisclassificationOnArgmax),
        _ => Err(CliError::Usage(format!(
            "invalid --classic-loss '{s}' (valid: squared-error, misclassification)"
        ))),
    }
}

pub fn run(global: &Global, args: &PfiArgs) -> CliResult<()> {
    let opts = PfiOptions {
        classic_loss: args.classic_loss.as_deref().map(parse_classic_loss).transpose()?,
        grouping: parse_grouping(&args.grouping)?,
    };
    let file = ModelFile::<f64>::load(&args.model)?;
    let model = file.to_model()?;
    let test = load_for_model(&args.data, &file.dataset)?;
    let seed = stage_seed(global, "permutation");
    let plan = PermutationPlan::new(seed, args.repeats);

    let mut out = Output::open(&global.out, "pfi", global.force)?;
    let mut files = vec!["importance.json".to_string(), "importance.csv".to_string()];
    if !args.no_plot {
        files.push("importance.svg".into());
    }
    out.claim(&files)?;
    echo_config(&out, "pfi", global, &[("permutation", seed)], args)?;

    let report = pfi_all_features(&model, &test, &plan, &args.measures, &opts)?;
    let mut json = report.to_json()?;
    json.push('\n');
    out.write("importance.json", json.as_bytes())?;
    report.write_csv(BufWriter::new(out.create("importance.csv")?))?;

    out.log(format!("model: {} ({})", model.kind(), args.model.display()));
    out.log(format!("test rows: {}; repeats: {}; permutation seed: {}", test.n_rows(), args.repeats, seed));
    out.log("feature\tmeasure\tmean\tstd_error\tunits");
    for e in &report.entries {
        out.log(format!(
            "{}\t{}\t{:.6}\t{:.6}\t{}",
            e.feature,
            e.measure,
            e.mean,
            e.std_error,
            e.measure.units()
        ));
        if let Some(w) = &e.warning {
            out.log(format!("warning ({} / {}): {w}", e.feature, e.measure));
        }
    }

    if !args.no_plot {
        let mut measures: Vec<Measure> = Vec::new();
        for e in &report.entries {
            if !measures.contains(&e.measure) {
                measures.push(e.measure);
            }
        }
        let series: Vec<BarSeries> = measures
            .iter()
            .map(|&m| {
                let entries: Vec<_> = report.by_measure(m).collect();
                BarSeries {
                    name: m.name().to_string(),
                    values: entries.iter().map(|e| e.mean).collect(),
                    errors: entries.iter().map(|e| e.std_error).collect(),
                }
            })
            .collect();
        let units = if measures.iter().any(|&m| m == Measure::Classic) {
            "importance (nats; classic in loss units)"
        } else {
            "importance (nats)"
        };
        let svg = bar_chart(
            &format!("Permutation importance, mean +- 1 SE over {} repeats", args.repeats),
            units,
            test.feature_names(),
            &series,
        );
        out.write("importance.svg", svg.as_bytes())?;
    }
    out.finish()
}
