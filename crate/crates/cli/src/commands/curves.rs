use std::io::BufWriter;

use uncertainty_importance::models::ModelFile;
use uncertainty_importance::{compute_curves, CurveOptions, Dataset, Error, GridSpec};

use super::{echo_config, slug, stage_seed};
use crate::args::{CurvesArgs, Global};
use crate::error::{CliError, CliResult};
use crate::inputs::load_for_model;
use crate::output::Output;
use crate::svg::{line_chart, ramp, Line};

/// A feature given by name, or by 0-based index when no name matches.
pub fn resolve_feature(ds: &Dataset<f64>, feature: &str) -> CliResult<usize> {
    if let Some(j) = ds.feature_names().iter().position(|n| n == feature) {
        return Ok(j);
    }
    match feature.parse::<usize>() {
        Ok(j) if j < ds.n_features() => Ok(j),
        _ => Err(Error::UnknownFeature {
            name: feature.to_string(),
            available: ds.feature_names().to_vec(),
        }
        .into()),
    }
}

fn grid_spec(args: &CurvesArgs) -> CliResult<GridSpec> {
    match args.grid.trim().to_ascii_lowercase().as_str() {
        "linear" => Ok(GridSpec::Linear {
            min: args.grid_min,
            max: args.grid_max,
            points: args.grid_points,
        }),
        "quantile" if args.grid_min.is_none() && args.grid_max.is_none() => Ok(GridSpec::Quantile {
            points: args.grid_points,
        }),
        "quantile" => Err(CliError::Usage("--grid-min/--grid-max only apply to --grid linear".into())),
        other => Err(CliError::Usage(format!("invalid --grid '{other}' (valid: linear, quantile)"))),
    }
}

pub fn run(global: &Global, args: &CurvesArgs) -> CliResult<()> {
    let grid = grid_spec(args)?;
    let file = ModelFile::<f64>::load(&args.model)?;
    let model = file.to_model()?;
    let test = load_for_model(&args.data, &file.dataset)?;
    let j = resolve_feature(&test, &args.feature)?;
    let seed = stage_seed(global, "ice");
    let opts = CurveOptions {
        class: args.class,
        max_curves: args.max_curves,
        seed,
    };

    let stem = format!("curves_{}_{}", slug(&test.feature_names()[j]), args.metric);
    let mut out = Output::open(&global.out, stem.clone(), global.force)?;
    let mut files = vec![format!("{stem}.csv"), format!("{stem}_pdp.csv"), format!("{stem}.json")];
    if !args.no_plot {
        files.push(format!("{stem}.svg"));
    }
    out.claim(&files)?;
    echo_config(&out, "curves", global, &[("ice", seed)], args)?;

    let set = compute_curves(&model, &test, j, &grid, args.metric, &opts)?;
    set.write_csv(BufWriter::new(out.create(&files[0])?))?;
    set.write_pdp_csv(BufWriter::new(out.create(&files[1])?))?;
    let mut json = serde_json::to_string_pretty(&set)?;
    json.push('\n');
    out.write(&files[2], json.as_bytes())?;

    out.log(format!("model: {} ({})", model.kind(), args.model.display()));
    out.log(format!(
        "feature: {} (index {j}); metric: {}; units: {}",
        set.feature, set.metric, set.units
    ));
    out.log(format!(
        "grid: {} points in [{}, {}]; ice curves kept: {} of {}; ice seed: {seed}",
        set.grid.len(),
        set.grid[0],
        set.grid[set.grid.len() - 1],
        set.ice.len(),
        set.n_rows
    ));
    for (x, v) in set.grid.iter().zip(&set.pdp) {
        out.log(format!("pdp\t{x:.6}\t{v:.6}"));
    }

    if !args.no_plot {
        // ICE curves are coloured by the first other feature, low (blue) to high (red).
        let colour_by = (0..test.n_features()).find(|&c| c != j);
        let shade: Vec<f64> = set.origins.iter().map(|o| o.complement.first().copied().unwrap_or(0.0)).collect();
        let (lo, hi) = shade
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let colour = |v: f64| if hi > lo { ramp((v - lo) / (hi - lo)) } else { ramp(0.5) };
        let mut lines: Vec<Line> = set
            .ice
            .iter()
            .zip(&shade)
            .map(|(row, &s)| Line {
                xs: set.grid.clone(),
                ys: row.clone(),
                colour: colour(s),
                width: 1.0,
                opacity: 0.35,
            })
            .collect();
        lines.push(Line {
            xs: set.grid.clone(),
            ys: set.pdp.clone(),
            colour: "#ff7f0e".into(),
            width: 3.0,
            opacity: 1.0,
        });
        let points: Vec<(f64, f64, String)> = set
            .origins
            .iter()
            .zip(&shade)
            .map(|(o, &s)| (o.feature_value, o.metric_value, colour(s)))
            .collect();
        let mut legend = vec![("PDP".to_string(), "#ff7f0e".to_string())];
        if let Some(c) = colour_by {
            let name = &test.feature_names()[c];
            legend.push((format!("ICE, low {name}"), ramp(0.0)));
            legend.push((format!("ICE, high {name}"), ramp(1.0)));
        }
        let svg = line_chart(
            &format!("{} PDP and ICE for {}", set.metric, set.feature),
            &set.feature,
            &format!("{} ({})", set.metric, set.units),
            &lines,
            &points,
            &legend,
        );
        out.write(&files[3], svg.as_bytes())?;
    }
    out.finish()
}
