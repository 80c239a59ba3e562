use std::fs;
use std::path::{Path, PathBuf};

use crate::{Common, Failure};

pub const OUT_DIR_ENV: &str = "OPLAB_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "oplab-out";

/// `--out`, else `$OPLAB_OUT_DIR`, else `./oplab-out`; created on demand.
pub fn out_dir(common: &Common) -> Result<PathBuf, Failure> {
    let dir = common
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

pub fn write(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, text)?;
    Ok(())
}

/// File-name-safe form of a measure string or table name.
pub fn slug(text: &str) -> String {
    let mut s = String::new();
    for c in text.chars() {
        if c.is_ascii_alphanumeric() || c == '.' {
            s.push(c.to_ascii_lowercase());
        } else if !s.ends_with('_') {
            s.push('_');
        }
    }
    let s = s.trim_matches('_');
    let s: String = s.chars().take(48).collect();
    if s.is_empty() {
        "table".into()
    } else {
        s
    }
}
