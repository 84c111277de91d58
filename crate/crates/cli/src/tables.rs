//! Table files on disk: loading, and the cache of conditional tables.

use std::path::{Path, PathBuf};

use aitlab::enumeration::{self, enumerate_with_workers, TableError};
use aitlab::{enumerate, BitString, EnumParams, ProgramTable};

use crate::Failure;

/// Environment variable naming the default cache directory.
pub const CACHE_DIR_ENV: &str = "AITLAB_CACHE_DIR";

pub fn run_enumeration(
    params: &EnumParams,
    workers: Option<usize>,
) -> Result<ProgramTable, Failure> {
    let table = match workers {
        Some(w) => enumerate_with_workers(params, w),
        None => enumerate(params),
    };
    table.map_err(|e| Failure::usage(e.to_string()))
}

pub fn load(path: &Path) -> Result<ProgramTable, Failure> {
    enumeration::load(path).map_err(|e| table_failure(path, e))
}

pub fn table_failure(path: &Path, e: TableError) -> Failure {
    Failure::format(format!("{}: {e}", path.display()))
}

pub fn save(table: &ProgramTable, path: &Path) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .map_err(|e| Failure::format(format!("{}: {e}", dir.display())))?;
    }
    enumeration::save(table, path).map_err(|e| Failure::format(format!("{}: {e}", path.display())))
}

/// File name of the cached table for `params`, keyed by resources and
/// condition.
pub fn cache_file_name(params: &EnumParams) -> String {
    format!(
        "L{}-T{}-cond{}.tbl",
        params.max_len,
        params.step_budget,
        params.condition.to_dash_string()
    )
}

/// `--cache-dir`, else the environment variable, else the current directory.
pub fn default_dir(flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Returns the table for `params`, reading it from `dir` when cached and
/// otherwise enumerating and caching it if `generate` is set.
pub fn conditional(
    dir: &Path,
    params: &EnumParams,
    generate: bool,
    workers: Option<usize>,
) -> Result<ProgramTable, Failure> {
    let path = dir.join(cache_file_name(params));
    if path.exists() {
        let table = load(&path)?;
        if table.params() != params {
            return Err(Failure::format(format!(
                "{}: cached table does not match L={} T={} cond={}",
                path.display(),
                params.max_len,
                params.step_budget,
                params.condition.to_dash_string()
            )));
        }
        return Ok(table);
    }
    if !generate {
        return Err(Failure::resources(format!(
            "no table for condition {} at L={} T={} in {} (use --cond-tables auto)",
            params.condition.to_dash_string(),
            params.max_len,
            params.step_budget,
            dir.display()
        )));
    }
    let table = run_enumeration(params, workers)?;
    save(&table, &path)?;
    Ok(table)
}

/// Bit strings on the command line; `-` stands for the empty string.
pub fn parse_bits(s: &str) -> Result<BitString, String> {
    BitString::parse_dash(s).map_err(|e| e.to_string())
}
