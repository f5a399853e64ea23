pub mod curves;
pub mod generate;
pub mod pfi;
pub mod predictability;
pub mod report;
pub mod train;

use std::collections::BTreeMap;

use serde::Serialize;
use uncertainty_importance::rng::Stream;

use crate::args::Global;
use crate::error::CliResult;
use crate::output::{Output, RunConfig};

/// Seed for one pipeline stage, derived from the master seed.
pub fn stage_seed(global: &Global, stage: &str) -> u64 {
    Stream::new(global.seed).derive_seed(stage)
}

/// Writes `<command>.config.json` with the given derived seeds and settings.
pub fn echo_config<S: Serialize>(
    out: &Output,
    command: &str,
    global: &Global,
    seeds: &[(&str, u64)],
    settings: &S,
) -> CliResult<()> {
    let derived_seeds: BTreeMap<&str, u64> = seeds.iter().copied().collect();
    out.write_config(&RunConfig {
        command,
        version: env!("CARGO_PKG_VERSION"),
        master_seed: global.seed,
        derived_seeds,
        settings,
    })
}

/// File-name-safe version of a column name.
pub fn slug(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}
