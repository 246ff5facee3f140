//! Benchmark harness around `hytucker`: function-tensor generators, the
//! `TNSR` binary tensor format, model directories, CSV reporting and the
//! two experiment sweeps (size scaling and rank sweep).

pub mod generators;
pub mod harness;
pub mod io;
pub mod record;

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },

    #[error(transparent)]
    Core(#[from] hytucker::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, BenchError>;
