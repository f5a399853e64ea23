use std::io::{BufWriter, Write};

use serde_json::json;
use uncertainty_importance::data::{split, write_csv};
use uncertainty_importance::synthetic::{
    gen_border, gen_corr_regression, gen_mease, BorderConfig, CorrRegressionConfig, MeaseConfig,
};
use uncertainty_importance::{Dataset, SplitSpec};

use super::{echo_config, stage_seed};
use crate::args::{GenerateArgs, Generator, Global};
use crate::error::{CliError, CliResult};
use crate::output::Output;

fn write_dataset(out: &Output, name: &str, ds: &Dataset<f64>, comment: &str) -> CliResult<()> {
    let mut w = BufWriter::new(out.create(name)?);
    writeln!(w, "# {comment}").map_err(CliError::io(out.path(name)))?;
    write_csv(ds, &mut w)?;
    w.flush().map_err(CliError::io(out.path(name)))?;
    Ok(())
}

pub fn run(global: &Global, args: &GenerateArgs) -> CliResult<()> {
    let seed = stage_seed(global, "generate");
    let (name, ds, config) = match &args.generator {
        &Generator::Mease { n, d, j, eps, variant } => {
            let cfg = MeaseConfig { n, d, j, eps, variant, seed };
            ("mease", gen_mease::<f64>(&cfg)?, serde_json::to_value(&cfg)?)
        }
        &Generator::CorrRegression { n, noise_sd, noise_variance } => {
            let noise_sd = match (noise_sd, noise_variance) {
                (Some(sd), _) => sd,
                (None, Some(v)) if v >= 0.0 => v.sqrt(),
                (None, Some(v)) => return Err(CliError::Usage(format!("--noise-variance must be >= 0, got {v}"))),
                (None, None) => CorrRegressionConfig::default().noise_sd,
            };
            let cfg = CorrRegressionConfig { n, noise_sd, seed };
            ("corr_regression", gen_corr_regression::<f64>(&cfg)?, serde_json::to_value(&cfg)?)
        }
        &Generator::Border { n, inner, outer, noise_sd } => {
            let cfg = BorderConfig { n, inner, outer, noise_sd, seed };
            ("border", gen_border::<f64>(&cfg)?, serde_json::to_value(&cfg)?)
        }
    };

    let mut out = Output::open(&global.out, "generate", global.force)?;
    let mut files = vec!["data.csv".to_string()];
    let split_seed = stage_seed(global, "split");
    let parts = match args.train_fraction {
        Some(f) => {
            files.push("train.csv".into());
            files.push("test.csv".into());
            Some(split(&ds, SplitSpec::new(f, split_seed))?)
        }
        None => None,
    };
    out.claim(&files)?;

    let mut seeds = vec![("generate", seed)];
    if parts.is_some() {
        seeds.push(("split", split_seed));
    }
    let settings = json!({
        "generator": name,
        "config": config,
        "train_fraction": args.train_fraction,
    });
    echo_config(&out, "generate", global, &seeds, &settings)?;

    write_dataset(&out, "data.csv", &ds, &format!("generator: {name}; seed: {seed}"))?;
    out.log(format!("generator: {name}"));
    out.log(format!("seed: {seed}"));
    out.log(format!("data.csv: {} rows, {} features, target '{}'", ds.n_rows(), ds.n_features(), ds.target_name()));
    if let Some((train, test)) = parts {
        for (file, part) in [("train.csv", &train), ("test.csv", &test)] {
            let comment = format!("generator: {name}; seed: {seed}; split seed: {split_seed}");
            write_dataset(&out, file, part, &comment)?;
            out.log(format!("{file}: {} rows", part.n_rows()));
        }
    }
    out.finish()
}
