//! Stage implementations behind the CLI subcommands.

mod explain;
mod extract;
mod pareto;
mod report;
mod train_eval;

pub use explain::cmd_explain;
pub use extract::cmd_extract;
pub use pareto::cmd_pareto;
pub use report::cmd_report;
pub use train_eval::cmd_train_eval;

use crate::config::RunConfig;
use crate::manifest::DirLock;
use anyhow::Result;
use std::path::PathBuf;

/// Everything a stage needs: the effective config, the run directory, and
/// the strictness flag. The lock is held for the stage's lifetime.
pub struct StageContext {
    pub config: RunConfig,
    pub out_dir: PathBuf,
    pub strict: bool,
    _lock: DirLock,
}

impl StageContext {
    pub fn new(config: RunConfig, out_dir: PathBuf, strict: bool) -> Result<StageContext> {
        let lock = DirLock::acquire(&out_dir)?;
        Ok(StageContext {
            config,
            out_dir,
            strict,
            _lock: lock,
        })
    }
}

pub(crate) fn write_csv_file(
    out_dir: &std::path::Path,
    rel: &str,
    build: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<()>,
) -> Result<()> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    build(&mut writer)?;
    let bytes = writer.into_inner()?;
    let path = out_dir.join(rel);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(&path, bytes)?;
    Ok(())
}

pub(crate) fn fmt_num(v: f64) -> String {
    format!("{v}")
}
