use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DatasetError, FrameId};

/// A verb and its annotated frame memberships. Frames the verb was not
/// annotated for are absent from `labels`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerbRecord {
    pub verb: String,
    pub labels: BTreeMap<FrameId, bool>,
}

impl VerbRecord {
    pub fn label(&self, frame: FrameId) -> Option<bool> {
        self.labels.get(&frame).copied()
    }
}

/// Positive/negative tallies for one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FrameCounts {
    pub positive: usize,
    pub negative: usize,
    /// Only one class is present among annotated verbs.
    pub degenerate: bool,
}

impl FrameCounts {
    pub fn total(&self) -> usize {
        self.positive + self.negative
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LavaDataset {
    verbs: Vec<VerbRecord>,
    counts: [FrameCounts; 10],
}

impl LavaDataset {
    /// Build from records, recomputing counts. Fails on duplicate or empty
    /// verb strings.
    pub fn from_records(verbs: Vec<VerbRecord>) -> Result<LavaDataset, DatasetError> {
        let mut seen = HashSet::new();
        for (i, v) in verbs.iter().enumerate() {
            validate_verb(&v.verb, i + 2)?;
            if !seen.insert(v.verb.as_str()) {
                return Err(DatasetError::DuplicateVerb { line: i + 2, verb: v.verb.clone() });
            }
        }
        let mut counts = [FrameCounts::default(); 10];
        for v in &verbs {
            for (frame, &label) in &v.labels {
                let c = &mut counts[frame.index()];
                if label {
                    c.positive += 1;
                } else {
                    c.negative += 1;
                }
            }
        }
        for c in &mut counts {
            c.degenerate = c.positive == 0 || c.negative == 0;
        }
        Ok(LavaDataset { verbs, counts })
    }

    pub fn verbs(&self) -> &[VerbRecord] {
        &self.verbs
    }

    pub fn len(&self) -> usize {
        self.verbs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verbs.is_empty()
    }

    pub fn counts(&self, frame: FrameId) -> FrameCounts {
        self.counts[frame.index()]
    }

    pub fn is_degenerate(&self, frame: FrameId) -> bool {
        self.counts[frame.index()].degenerate
    }

    pub fn verb(&self, name: &str) -> Option<&VerbRecord> {
        self.verbs.iter().find(|v| v.verb == name)
    }

    /// Position of `name` in canonical (file) order.
    pub fn position(&self, name: &str) -> Option<usize> {
        self.verbs.iter().position(|v| v.verb == name)
    }

    /// Serialize to the canonical tab-separated form.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("verb");
        for f in FrameId::ALL {
            out.push('\t');
            out.push_str(&f.token());
        }
        out.push('\n');
        for v in &self.verbs {
            out.push_str(&v.verb);
            for f in FrameId::ALL {
                let cell = match v.label(f) {
                    Some(true) => "1",
                    Some(false) => "0",
                    None => "-",
                };
                let _ = write!(out, "\t{cell}");
            }
            out.push('\n');
        }
        out
    }
}

fn validate_verb(verb: &str, line: usize) -> Result<(), DatasetError> {
    if verb.is_empty() || verb.chars().any(char::is_whitespace) || verb != verb.to_lowercase() {
        return Err(DatasetError::MalformedRow {
            line,
            reason: format!("verb {verb:?} must be a nonempty lowercase word"),
        });
    }
    Ok(())
}

pub fn load_lava(path: impl AsRef<Path>) -> Result<LavaDataset, DatasetError> {
    parse_lava(&std::fs::read_to_string(path)?)
}

/// Parse LaVA text. The header must name all ten frames; columns may come in
/// any order.
pub fn parse_lava(text: &str) -> Result<LavaDataset, DatasetError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(DatasetError::MalformedRow {
        line: 1,
        reason: "missing header row".into(),
    })?;
    let columns: Vec<&str> = header.split('\t').collect();
    if columns.len() != 11 || columns[0] != "verb" {
        return Err(DatasetError::MalformedRow {
            line: 1,
            reason: format!("expected `verb` plus 10 frame columns, found {} columns", columns.len()),
        });
    }
    let mut frames = Vec::with_capacity(10);
    for tok in &columns[1..] {
        let f: FrameId = tok.parse()?;
        if frames.contains(&f) {
            return Err(DatasetError::MalformedRow { line: 1, reason: format!("repeated column {tok}") });
        }
        frames.push(f);
    }

    let mut verbs = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in lines {
        let lineno = i + 1;
        let cells: Vec<&str> = line.split('\t').collect();
        if cells.len() != 11 {
            return Err(DatasetError::MalformedRow {
                line: lineno,
                reason: format!("expected 11 cells, found {}", cells.len()),
            });
        }
        let verb = cells[0].trim().to_string();
        validate_verb(&verb, lineno)?;
        if !seen.insert(verb.clone()) {
            return Err(DatasetError::DuplicateVerb { line: lineno, verb });
        }
        let mut labels = BTreeMap::new();
        for (frame, cell) in frames.iter().zip(&cells[1..]) {
            match cell.trim() {
                "1" => {
                    labels.insert(*frame, true);
                }
                "0" => {
                    labels.insert(*frame, false);
                }
                "" | "-" => {}
                other => {
                    return Err(DatasetError::MalformedRow {
                        line: lineno,
                        reason: format!("non-binary label {other:?} for {frame}"),
                    })
                }
            }
        }
        verbs.push(VerbRecord { verb, labels });
    }
    LavaDataset::from_records(verbs)
}

/// Verbs annotated for `frame` (canonical order) and their labels.
pub fn frame_labels(lava: &LavaDataset, frame: FrameId) -> (Vec<String>, Vec<bool>) {
    lava.verbs
        .iter()
        .filter_map(|v| v.label(frame).map(|y| (v.verb.clone(), y)))
        .unzip()
}
