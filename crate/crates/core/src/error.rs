use thiserror::Error;

use crate::datasets::DatasetError;
use crate::embstore::StoreError;
use crate::experiments::ExperimentError;
use crate::probes::ProbeError;
use crate::report::ReportError;

/// Any failure surfaced by the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Probe(#[from] ProbeError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error(transparent)]
    Report(#[from] ReportError),
}

impl Error {
    /// Bad input (as opposed to an i/o failure): malformed files, invalid
    /// configuration, inconsistent dimensions.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Dataset(e) => !matches!(e, DatasetError::Io(_)),
            Error::Store(e) => !matches!(e, StoreError::Io(_)),
            Error::Probe(_) => true,
            Error::Experiment(e) => e.is_validation(),
            Error::Report(e) => e.is_validation(),
        }
    }
}
