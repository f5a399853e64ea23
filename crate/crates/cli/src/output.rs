//! Output directory handling: overwrite checks, the advisory lock, config
//! echoes and logs.
//!
//! `<label>.log` holds only deterministic content. Wall-clock timings go to
//! `timings.log`, which is the one file allowed to differ between reruns.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::error::{CliError, CliResult};

pub const LOCK_FILE: &str = ".uqimp.lock";
pub const TIMINGS_FILE: &str = "timings.log";

/// Echo of everything that determines a run's outputs.
#[derive(Debug, Serialize)]
pub struct RunConfig<'a, S: Serialize> {
    pub command: &'a str,
    pub version: &'a str,
    pub master_seed: u64,
    /// Seeds derived from the master seed that this command consumed.
    pub derived_seeds: BTreeMap<&'a str, u64>,
    pub settings: &'a S,
}

/// Removes the lock file when dropped.
struct Lock(PathBuf);

impl Drop for Lock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

pub struct Output {
    dir: PathBuf,
    /// Stem of the config echo and log names; the command name unless one
    /// command can write several outputs into the same directory.
    label: String,
    force: bool,
    started: Instant,
    log: Vec<String>,
    _lock: Lock,
}

impl Output {
    /// Creates `dir` if needed and takes the lock.
    pub fn open(dir: &Path, label: impl Into<String>, force: bool) -> CliResult<Output> {
        fs::create_dir_all(dir).map_err(CliError::io(dir))?;
        let lock_path = dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&lock_path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => return Err(CliError::Locked(lock_path)),
            Err(e) => return Err(CliError::io(lock_path)(e)),
        }
        Ok(Output {
            dir: dir.to_path_buf(),
            label: label.into(),
            force,
            started: Instant::now(),
            log: Vec::new(),
            _lock: Lock(lock_path),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Fails before anything is written if any planned file exists and
    /// `--force` was not given. The config echo and log are always included.
    pub fn claim(&self, names: &[String]) -> CliResult<()> {
        if self.force {
            return Ok(());
        }
        let own = [self.config_name(), self.log_name()];
        for name in names.iter().chain(&own) {
            let p = self.path(name);
            if p.exists() {
                return Err(CliError::Exists(p));
            }
        }
        Ok(())
    }

    fn config_name(&self) -> String {
        format!("{}.config.json", self.label)
    }

    fn log_name(&self) -> String {
        format!("{}.log", self.label)
    }

    pub fn write(&self, name: &str, bytes: &[u8]) -> CliResult<PathBuf> {
        let p = self.path(name);
        fs::write(&p, bytes).map_err(CliError::io(&p))?;
        Ok(p)
    }

    /// Opens `name` for writing; the caller streams into it.
    pub fn create(&self, name: &str) -> CliResult<File> {
        let p = self.path(name);
        File::create(&p).map_err(CliError::io(&p))
    }

    pub fn write_config<S: Serialize>(&self, config: &RunConfig<'_, S>) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(config)?;
        text.push('\n');
        self.write(&self.config_name(), text.as_bytes())?;
        Ok(())
    }

    /// Adds a line to the deterministic command log.
    pub fn log(&mut self, line: impl Into<String>) {
        self.log.push(line.into());
    }

    /// Writes the command log and appends the elapsed time to `timings.log`.
    pub fn finish(self) -> CliResult<()> {
        let mut text = self.log.join("\n");
        text.push('\n');
        self.write(&self.log_name(), text.as_bytes())?;
        let timings = self.path(TIMINGS_FILE);
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&timings)
            .map_err(CliError::io(&timings))?;
        writeln!(f, "{}\t{:.3}s", self.label, self.started.elapsed().as_secs_f64()).map_err(CliError::io(&timings))?;
        Ok(())
    }
}
