use uncertainty_importance::models::forest::MaxFeatures;
use uncertainty_importance::models::{AnyModel, CalibratedForest, ForestConfig, GpConfig, GpModel, ModelFile};

use super::{echo_config, stage_seed};
use crate::args::{Global, ModelArgs, TrainArgs};
use crate::error::{CliError, CliResult};
use crate::inputs::{load_classification, load_regression, resolve_target};
use crate::output::Output;

fn parse_max_features(s: &str) -> CliResult<MaxFeatures> {
    match s.trim().to_ascii_lowercase().as_str() {
        "sqrt" => Ok(MaxFeatures::Sqrt),
        "all" => Ok(MaxFeatures::All),
        other => other
            .parse::<usize>()
            .ok()
            .filter(|&c| c > 0)
            .map(MaxFeatures::Count)
            .ok_or_else(|| CliError::Usage(format!("invalid --max-features '{s}' (valid: sqrt, all, or a positive count)"))),
    }
}

pub fn run(global: &Global, args: &TrainArgs) -> CliResult<()> {
    match &args.model {
        ModelArgs::Gp {
            data,
            epochs,
            lr,
            no_standardize_inputs,
        } => {
            let target = resolve_target(&data.data, data.target.as_deref())?;
            let ds = load_regression(&data.data, &target)?;
            let mut out = Output::open(&global.out, "train", global.force)?;
            out.claim(&[data.model_file.clone()])?;
            echo_config(&out, "train", global, &[], &args.model)?;
            let cfg = GpConfig {
                learning_rate: *lr,
                epochs: *epochs,
                standardize_inputs: !no_standardize_inputs,
                ..GpConfig::default()
            };
            let (model, report) = GpModel::fit(&ds, &cfg)?;
            let file = ModelFile::new(&AnyModel::Gp(model), ds.meta(), None);
            file.save(&out.path(&data.model_file))?;

            out.log("model: gp (exact, isotropic RBF)");
            out.log(format!("data: {} rows, {} features, target '{}'", ds.n_rows(), ds.n_features(), target));
            out.log(format!("epochs: {}; learning rate: {}", report.epochs, lr));
            let step = (report.trace.len() / 10).max(1);
            for (e, lml) in report.trace.iter().enumerate().step_by(step) {
                out.log(format!("epoch {e}: log marginal likelihood {lml:.6} nats"));
            }
            out.log(format!(
                "initial log marginal likelihood: {:.6} nats",
                report.initial_log_marginal_likelihood
            ));
            out.log(format!(
                "final log marginal likelihood: {:.6} nats",
                report.final_log_marginal_likelihood
            ));
            let h = &report.hyperparameters;
            out.log(format!(
                "hyperparameters (standardized units): signal variance {:.6}, lengthscale {:.6}, noise variance {:.6}, mean {:.6}",
                h.signal_variance, h.lengthscale, h.noise_variance, h.mean
            ));
            out.finish()
        }
        ModelArgs::Rf {
            data,
            trees,
            max_depth,
            max_features,
            calibration_fraction,
            no_calibration,
        } => {
            let target = resolve_target(&data.data, data.target.as_deref())?;
            let max_features = parse_max_features(max_features)?;
            let ds = load_classification(&data.data, &target)?;
            let seed = stage_seed(global, "train");
            let mut out = Output::open(&global.out, "train", global.force)?;
            out.claim(&[data.model_file.clone()])?;
            echo_config(&out, "train", global, &[("train", seed)], &args.model)?;
            let cfg = ForestConfig {
                n_trees: *trees,
                max_depth: (*max_depth > 0).then_some(*max_depth),
                calibration_fraction: *calibration_fraction,
                max_features,
                seed,
                calibrate: !no_calibration,
            };
            let model: CalibratedForest<f64> = CalibratedForest::fit(&ds, &cfg)?;

            out.log("model: rf (sigmoid-calibrated random forest)");
            out.log(format!("data: {} rows, {} features, target '{}'", ds.n_rows(), ds.n_features(), target));
            out.log(format!("classes: {}", ds.class_names().unwrap_or_default().join(", ")));
            out.log(format!(
                "trees: {}; deepest tree: {}; split attempt: {}",
                model.n_trees(),
                model.max_tree_depth(),
                model.split_attempt()
            ));
            match model.calibration() {
                Some(params) => {
                    for (k, p) in params.iter().enumerate() {
                        out.log(format!("calibration class {k}: A {:.6}, B {:.6}", p.a, p.b));
                    }
                }
                None => out.log("calibration: off"),
            }
            let file = ModelFile::new(&AnyModel::CalibratedForest(model), ds.meta(), Some(seed));
            file.save(&out.path(&data.model_file))?;
            out.finish()
        }
    }
}
