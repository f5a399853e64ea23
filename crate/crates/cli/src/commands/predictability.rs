use std::io::{BufWriter, Write};

use uncertainty_importance::models::{feature_predictability, RegressionForestConfig};
use uncertainty_importance::SplitSpec;

use super::{echo_config, stage_seed};
use crate::args::{Global, PredictabilityArgs};
use crate::error::{CliError, CliResult};
use crate::inputs::{load_auto, resolve_target};
use crate::output::Output;

pub fn run(global: &Global, args: &PredictabilityArgs) -> CliResult<()> {
    let target = resolve_target(&args.data, args.target.as_deref())?;
    let ds = load_auto(&args.data, &target)?;
    let forest_seed = stage_seed(global, "predictability");
    let split_seed = stage_seed(global, "split");
    let cfg = RegressionForestConfig {
        n_trees: args.trees,
        seed: forest_seed,
        ..RegressionForestConfig::default()
    };

    let stem = if args.include_target {
        "predictability_with_target"
    } else {
        "predictability"
    };
    let name = format!("{stem}.csv");
    let mut out = Output::open(&global.out, stem, global.force)?;
    out.claim(&[name.clone()])?;
    echo_config(
        &out,
        "feature-predictability",
        global,
        &[("predictability", forest_seed), ("split", split_seed)],
        args,
    )?;

    let rows = feature_predictability(&ds, args.include_target, SplitSpec::new(args.train_fraction, split_seed), &cfg)?;
    let path = out.path(&name);
    let mut w = BufWriter::new(out.create(&name)?);
    writeln!(
        w,
        "# units: R^2 (dimensionless, held-out); include_target: {}; seed: {forest_seed}",
        args.include_target
    )
    .map_err(CliError::io(&path))?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["feature", "r_squared"])?;
    for r in &rows {
        csv.write_record([r.feature.clone(), r.r_squared.to_string()])?;
    }
    csv.flush().map_err(CliError::io(&path))?;

    out.log(format!(
        "data: {} rows, {} features, target '{}' ({})",
        ds.n_rows(),
        ds.n_features(),
        target,
        ds.task()
    ));
    out.log(format!("include target: {}; trees: {}", args.include_target, args.trees));
    for r in &rows {
        out.log(format!("{}\t{:.6}", r.feature, r.r_squared));
    }
    out.finish()
}
