//! Deterministic synthetic stores for exercising the pipeline without a
//! language model.
//!
//! Token layout per sentence: `[CLS] pieces... [SEP]`, one piece per word
//! except the verb, which takes two pieces when longer than six characters.
//!
//! Under [`SynthScheme::LinearSignal`] coordinates `0..10` of a verb's rows
//! carry `±SIGNAL` for each annotated frame (0 when unannotated) and every
//! content token of a contextual layer carries `±GRAMMAR` on coordinate 10
//! according to the sentence label; remaining coordinates are
//! label-independent. `sigma` adds Gaussian noise to contextual layers.
//! Under [`SynthScheme::PureNoise`] nothing depends on any label.

use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;

use super::{SentenceEmbeddings, StoreError, StoreHeader, StoreWriter, PSEUDO_PREFIX};
use crate::datasets::{FavaDataset, FrameId, LavaDataset, VerbRecord};
use crate::rng;

const SIGNAL: f64 = 2.0;
const GRAMMAR: f64 = 1.0;
const GRAMMAR_COORD: usize = 10;
const FIRST_FREE: usize = 11;
const IDIOSYNCRATIC_SCALE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SynthScheme {
    LinearSignal { sigma: f64 },
    PureNoise,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub scheme: SynthScheme,
    pub num_layers: usize,
    pub hidden_dim: usize,
}

impl SynthConfig {
    pub fn new(seed: u64, scheme: SynthScheme) -> SynthConfig {
        SynthConfig { seed, scheme, num_layers: 4, hidden_dim: 24 }
    }

    pub fn model_id(&self) -> String {
        match self.scheme {
            SynthScheme::LinearSignal { sigma } => format!("synth-linear-sigma{sigma}-seed{}", self.seed),
            SynthScheme::PureNoise => format!("synth-noise-seed{}", self.seed),
        }
    }

    pub fn header(&self) -> StoreHeader {
        StoreHeader::new(self.model_id(), self.num_layers, self.hidden_dim)
    }

    fn validate(&self) -> Result<(), StoreError> {
        if self.num_layers == 0 {
            return Err(StoreError::Synth("need at least one layer".into()));
        }
        if self.hidden_dim < FIRST_FREE + 1 {
            return Err(StoreError::Synth(format!("hidden_dim must be at least {}", FIRST_FREE + 1)));
        }
        if let SynthScheme::LinearSignal { sigma } = self.scheme {
            if !(sigma >= 0.0 && sigma.is_finite()) {
                return Err(StoreError::Synth(format!("sigma must be finite and >= 0, got {sigma}")));
            }
        }
        Ok(())
    }
}

fn gaussian(rng: &mut impl Rng, dim: usize, scale: f64) -> Vec<f64> {
    (0..dim).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
}

fn verb_pieces(verb: &str) -> Vec<String> {
    if verb.chars().count() > 6 {
        let split: usize = verb.char_indices().nth(4).map(|(i, _)| i).unwrap();
        vec![verb[..split].to_string(), format!("##{}", &verb[split..])]
    } else {
        vec![verb.to_string()]
    }
}

struct Generator<'a> {
    config: &'a SynthConfig,
}

impl Generator<'_> {
    fn dim(&self) -> usize {
        self.config.hidden_dim
    }

    /// Static row of a non-verb piece.
    fn static_row(&self, piece: &str) -> Vec<f64> {
        let mut rng = rng::keyed(self.config.seed, &format!("piece/{piece}"));
        let mut row = gaussian(&mut rng, self.dim(), 1.0);
        if matches!(self.config.scheme, SynthScheme::LinearSignal { .. }) {
            row[..FIRST_FREE].iter_mut().for_each(|x| *x = 0.0);
        }
        row
    }

    fn latent(&self, verb: &VerbRecord) -> Vec<f64> {
        let mut rng = rng::keyed(self.config.seed, &format!("verb/{}", verb.verb));
        let mut row = gaussian(&mut rng, self.dim(), IDIOSYNCRATIC_SCALE);
        row[..FIRST_FREE].iter_mut().for_each(|x| *x = 0.0);
        for f in FrameId::ALL {
            if let Some(y) = verb.label(f) {
                row[f.index()] = if y { SIGNAL } else { -SIGNAL };
            }
        }
        row
    }

    /// Row of verb piece `piece` at `layer`, before sentence-level signal.
    fn verb_row(&self, verb: &VerbRecord, piece: usize, layer: usize) -> Vec<f64> {
        match self.config.scheme {
            SynthScheme::LinearSignal { .. } => {
                let scale = 1.0 + 0.25 * layer as f64;
                self.latent(verb).into_iter().map(|x| x * scale).collect()
            }
            SynthScheme::PureNoise => {
                let key = format!("noise-verb/{}/{piece}/{layer}", verb.verb);
                gaussian(&mut rng::keyed(self.config.seed, &key), self.dim(), 1.0)
            }
        }
    }

    /// Build one record. `label` is the sentence grammaticality (None for an
    /// isolated verb).
    fn record(
        &self,
        id: String,
        words: &[String],
        verb_at: usize,
        verb: &VerbRecord,
        label: Option<bool>,
    ) -> SentenceEmbeddings {
        let (l, d) = (self.config.num_layers, self.config.hidden_dim);
        let mut pieces: Vec<String> = vec!["[CLS]".into()];
        let mut span = (0, 0);
        for (i, w) in words.iter().enumerate() {
            if i == verb_at {
                let vp = verb_pieces(w);
                span = (pieces.len(), pieces.len() + vp.len());
                pieces.extend(vp);
            } else {
                pieces.push(w.to_lowercase());
            }
        }
        pieces.push("[SEP]".into());
        let t = pieces.len();
        let mut mask = vec![true; t];
        mask[0] = false;
        mask[t - 1] = false;

        let mut noise = rng::keyed(self.config.seed, &format!("noise/{id}"));
        let mut data = Vec::with_capacity(l * t * d);
        for layer in 0..l {
            for (tok, piece) in pieces.iter().enumerate() {
                let in_span = tok >= span.0 && tok < span.1;
                let mut row = if in_span {
                    self.verb_row(verb, tok - span.0, layer)
                } else {
                    self.static_row(piece)
                };
                if layer > 0 {
                    match self.config.scheme {
                        SynthScheme::LinearSignal { sigma } => {
                            if let (Some(y), true) = (label, mask[tok]) {
                                row[GRAMMAR_COORD] += if y { GRAMMAR } else { -GRAMMAR };
                            }
                            if sigma > 0.0 {
                                for x in row.iter_mut() {
                                    *x += sigma * noise.sample::<f64, _>(StandardNormal);
                                }
                            }
                        }
                        SynthScheme::PureNoise => {
                            if !in_span {
                                row = gaussian(&mut noise, d, 1.0);
                            }
                        }
                    }
                }
                data.extend(row.into_iter().map(|x| x as f32));
            }
        }
        SentenceEmbeddings {
            sentence_id: id,
            num_layers: l,
            hidden_dim: d,
            token_count: t,
            verb_span: span,
            content_mask: mask,
            data,
        }
    }
}

/// Records for every FAVA sentence (in corpus order) followed by one
/// isolated pseudo-sentence per LaVA verb.
pub fn synth_records<'a>(
    config: &'a SynthConfig,
    lava: &'a LavaDataset,
    fava: &'a FavaDataset,
) -> Result<impl Iterator<Item = SentenceEmbeddings> + 'a, StoreError> {
    config.validate()?;
    for s in fava.sentences() {
        if lava.verb(&s.verb).is_none() {
            return Err(StoreError::Synth(format!("{}: verb {:?} not in LaVA", s.id, s.verb)));
        }
    }
    let generator = Generator { config };
    let sentences = fava.sentences().iter().map(move |s| {
        let verb = lava.verb(&s.verb).unwrap();
        generator.record(s.id.clone(), &s.text, s.verb_word_index, verb, Some(s.grammatical))
    });
    let generator = Generator { config };
    let isolated = lava.verbs().iter().map(move |v| {
        generator.record(format!("{PSEUDO_PREFIX}{}", v.verb), std::slice::from_ref(&v.verb), 0, v, None)
    });
    Ok(sentences.chain(isolated))
}

/// Write a synthetic store (and sidecar) to `path`.
pub fn synth_store(
    config: &SynthConfig,
    lava: &LavaDataset,
    fava: &FavaDataset,
    path: impl AsRef<Path>,
) -> Result<StoreHeader, StoreError> {
    let header = config.header();
    let mut writer = StoreWriter::create(path, header.clone())?;
    for record in synth_records(config, lava, fava)? {
        writer.push(&record)?;
    }
    writer.finish()?;
    Ok(header)
}
