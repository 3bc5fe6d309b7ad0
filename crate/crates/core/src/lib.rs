//! Layer-wise diagnostic probing of contextual embeddings for verb
//! alternation classes.
//!
//! The crate is organised around five pieces:
//!
//! * [`datasets`]: the verb/frame membership table (LaVA) and the
//!   grammaticality-labelled sentence corpus (FAVA), plus a deterministic
//!   fixture corpus with the same class structure.
//! * [`embstore`]: the `ALTPROB1` per-layer hidden-state store, verb and
//!   sentence pooling, and a synthetic store generator.
//! * [`probes`]: linear and MLP probes trained full-batch, a truncated SVD
//!   front end, and the confusion-matrix metrics (MCC, accuracy).
//! * [`experiments`]: stratified cross-validation, word-level and
//!   sentence-level probing, control tasks, selectivity sweeps.
//! * [`report`]: best-layer tables, mean-over-task curves, CSV/JSON export.
//!
//! A typical word-level run:
//!
//! ```no_run
//! use altprobe::datasets::{load_fava, load_lava, FrameId};
//! use altprobe::embstore::WordFeatures;
//! use altprobe::experiments::{run_word_experiment, CvOptions};
//! use altprobe::probes::ProbeConfig;
//!
//! # fn main() -> Result<(), altprobe::Error> {
//! let lava = load_lava("lava.tsv")?;
//! let fava = load_fava("fava.tsv")?;
//! let features = WordFeatures::from_store("bert.altprobe", &lava, &fava, &[9])?;
//! let frame: FrameId = "there.there".parse()?;
//! let result = run_word_experiment(
//!     &lava, &features, frame, 9, &ProbeConfig::linear(), &CvOptions::default())?;
//! println!("MCC {:.3}", result.mcc);
//! # Ok(()) }
//! ```

pub mod datasets;
pub mod embstore;
pub mod error;
pub mod experiments;
pub mod probes;
pub mod report;
pub mod rng;

pub use error::Error;
