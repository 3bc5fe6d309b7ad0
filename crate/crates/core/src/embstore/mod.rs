//! Per-layer hidden-state store and the two pooling schemes.
//!
//! A store holds, for every sentence, an `L x T x d` tensor of hidden states
//! (layer 0 is the static token-embedding layer), the token span of the verb
//! and a mask of content tokens. See [`format`] for the byte layout.

mod aggregate;
pub mod format;
mod synth;

use thiserror::Error;

pub use aggregate::{
    aggregate_sentence_embedding, aggregate_verb_embedding, SentenceEmbedding, SentenceFeatures,
    VerbEmbedding, WordFeatures,
};
pub use format::{read_store, write_store, StoreReader, StoreWriter};
pub use synth::{synth_records, synth_store, SynthConfig, SynthScheme};

/// Prefix of the isolated-verb pseudo-sentence records.
pub const PSEUDO_PREFIX: &str = "lava:";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic {0:?}")]
    BadMagic([u8; 8]),
    #[error("unsupported store version {0}")]
    UnsupportedVersion(u32),
    #[error("record {index} is truncated")]
    TruncatedRecord { index: u64 },
    #[error("trailing bytes after {records} records")]
    TrailingData { records: u64 },
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("non-finite value in {sentence_id} at layer {layer}, token {token}")]
    NonFinite { sentence_id: String, layer: usize, token: usize },
    #[error("invalid verb span in {0}")]
    BadSpan(String),
    #[error("content mask of {0} selects no token")]
    EmptyMask(String),
    #[error("layer {layer} out of range for a {num_layers}-layer store")]
    LayerOutOfRange { layer: usize, num_layers: usize },
    #[error("no grammatical sentence and no isolated record for verb {0:?}")]
    NoSupport(String),
    #[error("store has no record for sentence {0}")]
    MissingRecord(String),
    #[error("synthetic store: {0}")]
    Synth(String),
    #[error("sidecar: {0}")]
    Sidecar(#[from] serde_json::Error),
}

impl StoreError {
    /// Record-validation failures (as opposed to i/o or framing errors).
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            StoreError::DimMismatch(_)
                | StoreError::NonFinite { .. }
                | StoreError::BadSpan(_)
                | StoreError::EmptyMask(_)
        )
    }
}

/// Store-wide metadata.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct StoreHeader {
    pub model_id: String,
    pub num_layers: usize,
    pub hidden_dim: usize,
}

impl StoreHeader {
    pub fn new(model_id: impl Into<String>, num_layers: usize, hidden_dim: usize) -> StoreHeader {
        StoreHeader { model_id: model_id.into(), num_layers, hidden_dim }
    }

    pub fn validate(&self) -> Result<(), StoreError> {
        if self.num_layers == 0 || self.hidden_dim == 0 {
            return Err(StoreError::DimMismatch(format!(
                "header needs L >= 1 and d >= 1, got L={} d={}",
                self.num_layers, self.hidden_dim
            )));
        }
        if self.model_id.len() > u16::MAX as usize {
            return Err(StoreError::DimMismatch("model id longer than 65535 bytes".into()));
        }
        Ok(())
    }
}

/// Hidden states of one sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceEmbeddings {
    pub sentence_id: String,
    pub num_layers: usize,
    pub hidden_dim: usize,
    pub token_count: usize,
    /// Half-open token range `[start, end)` of the verb's subword pieces.
    pub verb_span: (usize, usize),
    pub content_mask: Vec<bool>,
    /// Layer-major, then token, then dimension.
    pub data: Vec<f32>,
}

impl SentenceEmbeddings {
    pub fn row(&self, layer: usize, token: usize) -> &[f32] {
        let d = self.hidden_dim;
        let start = (layer * self.token_count + token) * d;
        &self.data[start..start + d]
    }

    pub fn is_pseudo(&self) -> bool {
        self.sentence_id.starts_with(PSEUDO_PREFIX)
    }

    /// Check the record against a header and its own invariants.
    pub fn validate(&self, header: &StoreHeader) -> Result<(), StoreError> {
        let id = &self.sentence_id;
        if self.num_layers != header.num_layers || self.hidden_dim != header.hidden_dim {
            return Err(StoreError::DimMismatch(format!(
                "{id}: record is L={} d={}, header is L={} d={}",
                self.num_layers, self.hidden_dim, header.num_layers, header.hidden_dim
            )));
        }
        if self.content_mask.len() != self.token_count {
            return Err(StoreError::DimMismatch(format!(
                "{id}: mask has {} entries for {} tokens",
                self.content_mask.len(),
                self.token_count
            )));
        }
        let expected = self.num_layers * self.token_count * self.hidden_dim;
        if self.data.len() != expected {
            return Err(StoreError::DimMismatch(format!(
                "{id}: {} values, expected {expected}",
                self.data.len()
            )));
        }
        if id.len() > u16::MAX as usize {
            return Err(StoreError::DimMismatch(format!("sentence id of {} bytes", id.len())));
        }
        let (start, end) = self.verb_span;
        if start >= end || end > self.token_count {
            return Err(StoreError::BadSpan(id.clone()));
        }
        if !self.content_mask.iter().any(|m| *m) {
            return Err(StoreError::EmptyMask(id.clone()));
        }
        for layer in 0..self.num_layers {
            for token in (0..self.token_count).filter(|t| self.content_mask[*t]) {
                if self.row(layer, token).iter().any(|x| !x.is_finite()) {
                    return Err(StoreError::NonFinite { sentence_id: id.clone(), layer, token });
                }
            }
        }
        Ok(())
    }
}
