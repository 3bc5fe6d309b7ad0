use std::collections::HashMap;
use std::path::Path;

use nalgebra::DMatrix;

use super::{read_store, SentenceEmbeddings, StoreError, PSEUDO_PREFIX};
use crate::datasets::{FavaDataset, LavaDataset};

/// Pooled verb representation for one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct VerbEmbedding {
    pub verb: String,
    pub layer: usize,
    pub vector: Vec<f64>,
    /// Number of grammatical sentences averaged. Zero when the vector is
    /// the isolated-verb fallback.
    pub support: usize,
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentenceEmbedding {
    pub sentence_id: String,
    pub layer: usize,
    pub vector: Vec<f64>,
}

fn check_layer(record: &SentenceEmbeddings, layer: usize) -> Result<(), StoreError> {
    if layer >= record.num_layers {
        return Err(StoreError::LayerOutOfRange { layer, num_layers: record.num_layers });
    }
    Ok(())
}

/// Mean of the verb-span rows of one record at `layer`.
fn span_mean(record: &SentenceEmbeddings, layer: usize) -> Vec<f64> {
    let (start, end) = record.verb_span;
    let mut acc = vec![0.0f64; record.hidden_dim];
    for t in start..end {
        for (a, x) in acc.iter_mut().zip(record.row(layer, t)) {
            *a += f64::from(*x);
        }
    }
    let width = (end - start) as f64;
    acc.iter_mut().for_each(|a| *a /= width);
    acc
}

/// Verb representation at `layer`: the mean over the verb's subword rows
/// within each sentence, then the unweighted mean over sentences.
///
/// `records` must already be restricted to grammatical sentences containing
/// the verb.
pub fn aggregate_verb_embedding<'a>(
    verb: &str,
    layer: usize,
    records: impl IntoIterator<Item = &'a SentenceEmbeddings>,
) -> Result<VerbEmbedding, StoreError> {
    let mut acc: Option<Vec<f64>> = None;
    let mut support = 0;
    for record in records {
        check_layer(record, layer)?;
        let m = span_mean(record, layer);
        match &mut acc {
            None => acc = Some(m),
            Some(a) => a.iter_mut().zip(&m).for_each(|(a, x)| *a += x),
        }
        support += 1;
    }
    let mut vector = acc.ok_or_else(|| StoreError::NoSupport(verb.to_string()))?;
    vector.iter_mut().for_each(|a| *a /= support as f64);
    Ok(VerbEmbedding { verb: verb.to_string(), layer, vector, support, fallback: false })
}

/// Sentence representation at `layer`: mean over content-token rows.
pub fn aggregate_sentence_embedding(
    record: &SentenceEmbeddings,
    layer: usize,
) -> Result<SentenceEmbedding, StoreError> {
    check_layer(record, layer)?;
    let mut acc = vec![0.0f64; record.hidden_dim];
    let mut n = 0usize;
    for t in (0..record.token_count).filter(|t| record.content_mask[*t]) {
        for (a, x) in acc.iter_mut().zip(record.row(layer, t)) {
            *a += f64::from(*x);
        }
        n += 1;
    }
    if n == 0 {
        return Err(StoreError::EmptyMask(record.sentence_id.clone()));
    }
    acc.iter_mut().for_each(|a| *a /= n as f64);
    Ok(SentenceEmbedding { sentence_id: record.sentence_id.clone(), layer, vector: acc })
}

fn check_layers(layers: &[usize], num_layers: usize) -> Result<(), StoreError> {
    match layers.iter().find(|l| **l >= num_layers) {
        Some(&layer) => Err(StoreError::LayerOutOfRange { layer, num_layers }),
        None => Ok(()),
    }
}

/// Verb representations for every LaVA verb at a set of layers, built in
/// one streaming pass over a store.
///
/// Verbs without a grammatical sentence fall back to the layer-0 rows of
/// their isolated pseudo-sentence record (`lava:<verb>`) at every layer.
#[derive(Debug, Clone)]
pub struct WordFeatures {
    model_id: String,
    dim: usize,
    layers: Vec<usize>,
    verbs: Vec<String>,
    /// `[layer slot][verb]`
    table: Vec<Vec<Option<VerbEmbedding>>>,
}

impl WordFeatures {
    pub fn from_store(
        path: impl AsRef<Path>,
        lava: &LavaDataset,
        fava: &FavaDataset,
        layers: &[usize],
    ) -> Result<WordFeatures, StoreError> {
        let (header, reader) = read_store(path)?;
        check_layers(layers, header.num_layers)?;
        WordFeatures::from_records(&header.model_id, header.hidden_dim, reader, lava, fava, layers)
    }

    pub fn from_records(
        model_id: &str,
        dim: usize,
        records: impl IntoIterator<Item = Result<SentenceEmbeddings, StoreError>>,
        lava: &LavaDataset,
        fava: &FavaDataset,
        layers: &[usize],
    ) -> Result<WordFeatures, StoreError> {
        let verb_pos: HashMap<&str, usize> =
            lava.verbs().iter().enumerate().map(|(i, v)| (v.verb.as_str(), i)).collect();
        let n = lava.len();
        let mut sums = vec![vec![vec![0.0f64; dim]; n]; layers.len()];
        let mut support = vec![0usize; n];
        let mut isolated: Vec<Option<Vec<f64>>> = vec![None; n];

        for record in records {
            let record = record?;
            if record.hidden_dim != dim {
                return Err(StoreError::DimMismatch(format!(
                    "{}: d={} but features expect {dim}",
                    record.sentence_id, record.hidden_dim
                )));
            }
            check_layers(layers, record.num_layers)?;
            if let Some(verb) = record.sentence_id.strip_prefix(PSEUDO_PREFIX) {
                if let Some(&v) = verb_pos.get(verb) {
                    isolated[v] = Some(span_mean(&record, 0));
                }
                continue;
            }
            let Some(row) = fava.index_of(&record.sentence_id) else {
                continue;
            };
            let sentence = &fava.sentences()[row];
            if !sentence.grammatical {
                continue;
            }
            let Some(&v) = verb_pos.get(sentence.verb.as_str()) else {
                continue;
            };
            for (slot, &layer) in layers.iter().enumerate() {
                let m = span_mean(&record, layer);
                sums[slot][v].iter_mut().zip(&m).for_each(|(a, x)| *a += x);
            }
            support[v] += 1;
        }

        let verbs: Vec<String> = lava.verbs().iter().map(|v| v.verb.clone()).collect();
        let table = layers
            .iter()
            .zip(sums)
            .map(|(&layer, per_verb)| {
                per_verb
                    .into_iter()
                    .enumerate()
                    .map(|(v, mut sum)| {
                        if support[v] > 0 {
                            sum.iter_mut().for_each(|a| *a /= support[v] as f64);
                            Some(VerbEmbedding {
                                verb: verbs[v].clone(),
                                layer,
                                vector: sum,
                                support: support[v],
                                fallback: false,
                            })
                        } else {
                            isolated[v].clone().map(|vector| VerbEmbedding {
                                verb: verbs[v].clone(),
                                layer,
                                vector,
                                support: 0,
                                fallback: true,
                            })
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(WordFeatures { model_id: model_id.to_string(), dim, layers: layers.to_vec(), verbs, table })
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn layers(&self) -> &[usize] {
        &self.layers
    }

    fn slot(&self, layer: usize) -> Result<usize, StoreError> {
        self.layers
            .iter()
            .position(|l| *l == layer)
            .ok_or(StoreError::LayerOutOfRange { layer, num_layers: self.layers.len() })
    }

    pub fn get(&self, verb: &str, layer: usize) -> Result<&VerbEmbedding, StoreError> {
        let slot = self.slot(layer)?;
        let v = self
            .verbs
            .iter()
            .position(|x| x == verb)
            .ok_or_else(|| StoreError::NoSupport(verb.to_string()))?;
        self.table[slot][v].as_ref().ok_or_else(|| StoreError::NoSupport(verb.to_string()))
    }

    /// Design matrix (one row per verb, in the given order) at `layer`, and
    /// the number of rows that used the isolated fallback.
    pub fn matrix(&self, verbs: &[String], layer: usize) -> Result<(DMatrix<f64>, usize), StoreError> {
        let slot = self.slot(layer)?;
        let index: HashMap<&str, usize> =
            self.verbs.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        let mut x = DMatrix::zeros(verbs.len(), self.dim);
        let mut fallbacks = 0;
        for (r, verb) in verbs.iter().enumerate() {
            let emb = index
                .get(verb.as_str())
                .and_then(|i| self.table[slot][*i].as_ref())
                .ok_or_else(|| StoreError::NoSupport(verb.clone()))?;
            fallbacks += usize::from(emb.fallback);
            for (c, v) in emb.vector.iter().enumerate() {
                x[(r, c)] = *v;
            }
        }
        Ok((x, fallbacks))
    }
}

/// Sentence representations for every FAVA sentence at a set of layers.
#[derive(Debug, Clone)]
pub struct SentenceFeatures {
    model_id: String,
    dim: usize,
    layers: Vec<usize>,
    /// `[layer slot]`, row-major `n_sentences x dim`
    rows: Vec<Vec<f32>>,
    present: Vec<bool>,
}

impl SentenceFeatures {
    pub fn from_store(
        path: impl AsRef<Path>,
        fava: &FavaDataset,
        layers: &[usize],
    ) -> Result<SentenceFeatures, StoreError> {
        let (header, reader) = read_store(path)?;
        check_layers(layers, header.num_layers)?;
        SentenceFeatures::from_records(&header.model_id, header.hidden_dim, reader, fava, layers)
    }

    pub fn from_records(
        model_id: &str,
        dim: usize,
        records: impl IntoIterator<Item = Result<SentenceEmbeddings, StoreError>>,
        fava: &FavaDataset,
        layers: &[usize],
    ) -> Result<SentenceFeatures, StoreError> {
        let n = fava.len();
        let mut rows = vec![vec![0.0f32; n * dim]; layers.len()];
        let mut present = vec![false; n];
        for record in records {
            let record = record?;
            let Some(i) = fava.index_of(&record.sentence_id) else {
                continue;
            };
            if record.hidden_dim != dim {
                return Err(StoreError::DimMismatch(format!(
                    "{}: d={} but features expect {dim}",
                    record.sentence_id, record.hidden_dim
                )));
            }
            for (slot, &layer) in layers.iter().enumerate() {
                let e = aggregate_sentence_embedding(&record, layer)?;
                // stored narrow; pooled in f64 first
                for (dst, v) in rows[slot][i * dim..(i + 1) * dim].iter_mut().zip(&e.vector) {
                    *dst = *v as f32;
                }
            }
            present[i] = true;
        }
        Ok(SentenceFeatures { model_id: model_id.to_string(), dim, layers: layers.to_vec(), rows, present })
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn layers(&self) -> &[usize] {
        &self.layers
    }

    pub fn matrix(&self, fava: &FavaDataset, indices: &[usize], layer: usize) -> Result<DMatrix<f64>, StoreError> {
        let slot = self
            .layers
            .iter()
            .position(|l| *l == layer)
            .ok_or(StoreError::LayerOutOfRange { layer, num_layers: self.layers.len() })?;
        let d = self.dim;
        let mut x = DMatrix::zeros(indices.len(), d);
        for (r, &i) in indices.iter().enumerate() {
            if !self.present[i] {
                return Err(StoreError::MissingRecord(fava.sentences()[i].id.clone()));
            }
            for c in 0..d {
                x[(r, c)] = f64::from(self.rows[slot][i * d + c]);
            }
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(rows: &[&[f32]], span: (usize, usize), mask: &[bool]) -> SentenceEmbeddings {
        SentenceEmbeddings {
            sentence_id: "s".into(),
            num_layers: 1,
            hidden_dim: rows[0].len(),
            token_count: rows.len(),
            verb_span: span,
            content_mask: mask.to_vec(),
            data: rows.iter().flat_map(|r| r.iter().copied()).collect(),
        }
    }

    #[test]
    fn single_width_one_span_is_identity() {
        let r = record(&[&[9.0, 9.0], &[1.5, -2.0], &[7.0, 7.0]], (1, 2), &[false, true, false]);
        let e = aggregate_verb_embedding("v", 0, [&r]).unwrap();
        assert_eq!(e.vector, vec![1.5, -2.0]);
        assert_eq!(e.support, 1);
    }

    #[test]
    fn two_sentences_average() {
        let a = record(&[&[2.0, 4.0]], (0, 1), &[true]);
        let b = record(&[&[4.0, 0.0]], (0, 1), &[true]);
        let e = aggregate_verb_embedding("v", 0, [&a, &b]).unwrap();
        assert_eq!(e.vector, vec![3.0, 2.0]);
        assert_eq!(e.support, 2);
    }

    #[test]
    fn mean_of_means_not_global_token_mean() {
        // widths 1, 2, 2 with small integer rows; oracle written out by hand:
        // s1 span mean = (1,0); s2 = ((2+4)/2, (2+0)/2) = (3,1); s3 = ((0+0)/2, (6+2)/2) = (0,4)
        // mean of means = (4/3, 5/3); pooling all five rows would give (7/5, 10/5)
        let s1 = record(&[&[1.0, 0.0], &[5.0, 5.0]], (0, 1), &[true, true]);
        let s2 = record(&[&[9.0, 9.0], &[2.0, 2.0], &[4.0, 0.0]], (1, 3), &[false, true, true]);
        let s3 = record(&[&[0.0, 6.0], &[0.0, 2.0]], (0, 2), &[true, true]);
        let e = aggregate_verb_embedding("v", 0, [&s1, &s2, &s3]).unwrap();
        assert!((e.vector[0] - 4.0 / 3.0).abs() < 1e-12);
        assert!((e.vector[1] - 5.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn no_sentence_is_no_support() {
        let none: Vec<&SentenceEmbeddings> = vec![];
        assert!(matches!(aggregate_verb_embedding("v", 0, none), Err(StoreError::NoSupport(_))));
    }

    #[test]
    fn sentence_mean_skips_masked_tokens() {
        let r = record(&[&[100.0, 100.0], &[1.0, 0.0], &[0.0, 1.0]], (1, 2), &[false, true, true]);
        assert_eq!(aggregate_sentence_embedding(&r, 0).unwrap().vector, vec![0.5, 0.5]);
        let same = record(&[&[0.25, -1.0], &[0.25, -1.0]], (0, 1), &[true, true]);
        assert_eq!(aggregate_sentence_embedding(&same, 0).unwrap().vector, vec![0.25, -1.0]);
        let mut empty = r.clone();
        empty.content_mask = vec![false; 3];
        assert!(matches!(aggregate_sentence_embedding(&empty, 0), Err(StoreError::EmptyMask(_))));
        assert!(matches!(
            aggregate_sentence_embedding(&r, 1),
            Err(StoreError::LayerOutOfRange { layer: 1, num_layers: 1 })
        ));
    }
}
