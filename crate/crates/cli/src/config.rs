//! `key = value` config files merged underneath command-line flags.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use crate::error::CliError;

pub const OUT_DIR_ENV: &str = "GTGBM_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "gtgbm-out";

/// Global flags that take a value, so a scan for the subcommand can skip them.
const GLOBAL_VALUED: [&str; 3] = ["--config", "--out-dir", "--workers"];

#[derive(Debug, Default, Clone, PartialEq)]
pub struct ConfigFile {
    pub path: Option<PathBuf>,
    pub entries: Vec<(String, String)>,
}

impl ConfigFile {
    pub fn parse(text: &str, path: Option<PathBuf>) -> Result<Self, CliError> {
        let mut entries = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("config line {}: expected `key = value`, got {raw:?}", n + 1))
            })?;
            let key = k.trim().trim_start_matches("--").replace('_', "-");
            if key.is_empty() {
                return Err(CliError::Usage(format!("config line {}: empty key", n + 1)));
            }
            if key == "config" {
                return Err(CliError::Usage(format!("config line {}: config files cannot nest", n + 1)));
            }
            entries.push((key, v.trim().to_string()));
        }
        Ok(Self { path, entries })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config file {}: {e}", path.display())))?;
        Self::parse(&text, Some(path.to_path_buf()))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Entries as flag tokens, minus keys in `given`; `true`/`false` toggle switches.
    fn tokens(&self, given: &[String]) -> Vec<OsString> {
        let mut out = Vec::new();
        for (k, v) in &self.entries {
            if k == "out-dir" || given.contains(k) {
                continue;
            }
            match v.as_str() {
                "true" => out.push(format!("--{k}").into()),
                "false" => {}
                _ => {
                    out.push(format!("--{k}").into());
                    out.push(v.into());
                }
            }
        }
        out
    }
}

/// Value of `--config` on the command line, if any.
fn config_path(argv: &[OsString]) -> Option<PathBuf> {
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

/// Index just past the leaf subcommand name (`train`, `experiment timing`, ...).
fn leaf_position(argv: &[OsString]) -> Option<usize> {
    let mut i = 1;
    let mut seen_experiment = false;
    while i < argv.len() {
        let s = argv[i].to_string_lossy();
        if s.starts_with('-') {
            i += if GLOBAL_VALUED.contains(&s.as_ref()) { 2 } else { 1 };
            continue;
        }
        if s == "experiment" && !seen_experiment {
            seen_experiment = true;
            i += 1;
            continue;
        }
        return Some(i + 1);
    }
    None
}

/// Reads the config file named by `--config` and splices its entries in
/// right after the subcommand, so flags given later on the line win.
pub fn merge_config(argv: Vec<OsString>) -> Result<(Vec<OsString>, ConfigFile), CliError> {
    let Some(path) = config_path(&argv) else {
        return Ok((argv, ConfigFile::default()));
    };
    let cfg = ConfigFile::load(&path)?;
    let Some(pos) = leaf_position(&argv) else {
        return Ok((argv, cfg));
    };
    let given: Vec<String> = argv
        .iter()
        .filter_map(|a| a.to_str()?.strip_prefix("--").map(|k| k.split('=').next().unwrap_or(k).to_string()))
        .collect();
    let mut merged = argv[..pos].to_vec();
    merged.extend(cfg.tokens(&given));
    merged.extend_from_slice(&argv[pos..]);
    Ok((merged, cfg))
}

/// Where the output directory came from, recorded in the config echo.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutDirSource {
    Flag,
    Env,
    Config,
    Default,
}

/// Flag, then environment, then config file, then the default.
pub fn resolve_out_dir(flag: Option<&Path>, env: Option<OsString>, cfg: &ConfigFile) -> (PathBuf, OutDirSource) {
    if let Some(p) = flag {
        return (p.to_path_buf(), OutDirSource::Flag);
    }
    if let Some(e) = env.filter(|e| !e.is_empty()) {
        return (PathBuf::from(e), OutDirSource::Env);
    }
    if let Some(c) = cfg.get("out-dir") {
        return (PathBuf::from(c), OutDirSource::Config);
    }
    (PathBuf::from(DEFAULT_OUT_DIR), OutDirSource::Default)
}
