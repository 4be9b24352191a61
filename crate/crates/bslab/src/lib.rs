//! Campaign runner, report formats and file IO on top of `bslab-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

use std::path::{Path, PathBuf};

pub mod campaign;
pub mod config;
pub mod csv_import;
pub mod json;
pub mod report;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config parse error: {0}")]
    Parse(String),

    #[error("invalid config key `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error("{}: {msg}", path.display())]
    Input { path: PathBuf, msg: String },

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Core(#[from] bslab_core::Error),
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io { path: path.to_path_buf(), source }
    }
}
