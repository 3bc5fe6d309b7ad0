use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Alternation, DatasetError};

const HEADER: &str = "alternation\tsplit\tlabel\tverb\tverb_word_index\tsentence";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Dev, Split::Test];

    pub fn token(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Split {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Split::ALL
            .into_iter()
            .find(|x| x.token() == s)
            .ok_or_else(|| DatasetError::UnknownSplit { line: 0, token: s.to_string() })
    }
}

/// One corpus sentence. `id` is `fava-NNNNN`, the 0-based data row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceRecord {
    pub id: String,
    pub text: Vec<String>,
    pub alternation: Alternation,
    pub split: Split,
    pub grammatical: bool,
    pub verb: String,
    pub verb_word_index: usize,
}

impl SentenceRecord {
    pub fn id_for_row(row: usize) -> String {
        format!("fava-{row:05}")
    }

    /// Loose check that the word at `verb_word_index` is an inflection of
    /// `verb`: exact match or a shared prefix of at least three characters.
    pub fn verb_form_matches(&self) -> bool {
        let Some(word) = self.text.get(self.verb_word_index) else {
            return false;
        };
        let word = word.to_lowercase();
        if word == self.verb {
            return true;
        }
        let shared = word.chars().zip(self.verb.chars()).take_while(|(a, b)| a == b).count();
        shared >= 3
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FavaDataset {
    sentences: Vec<SentenceRecord>,
    partitions: BTreeMap<(Alternation, Split), Vec<usize>>,
}

impl FavaDataset {
    pub fn from_records(sentences: Vec<SentenceRecord>) -> FavaDataset {
        let mut partitions: BTreeMap<(Alternation, Split), Vec<usize>> = BTreeMap::new();
        for (i, s) in sentences.iter().enumerate() {
            partitions.entry((s.alternation, s.split)).or_default().push(i);
        }
        FavaDataset { sentences, partitions }
    }

    pub fn sentences(&self) -> &[SentenceRecord] {
        &self.sentences
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// Indices of one (alternation, split) partition.
    pub fn partition(&self, alternation: Alternation, split: Split) -> &[usize] {
        self.partitions.get(&(alternation, split)).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Indices for a split, restricted to one alternation or pooled over all.
    pub fn split_indices(&self, alternation: Option<Alternation>, split: Split) -> Vec<usize> {
        match alternation {
            Some(a) => self.partition(a, split).to_vec(),
            None => {
                let mut all: Vec<usize> = Alternation::ALL
                    .iter()
                    .flat_map(|a| self.partition(*a, split).iter().copied())
                    .collect();
                all.sort_unstable();
                all
            }
        }
    }

    pub fn partition_sizes(&self) -> BTreeMap<(Alternation, Split), usize> {
        self.partitions.iter().map(|(k, v)| (*k, v.len())).collect()
    }

    /// Indices of grammatical sentences, grouped by verb.
    pub fn grammatical_by_verb(&self) -> BTreeMap<&str, Vec<usize>> {
        let mut out: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, s) in self.sentences.iter().enumerate() {
            if s.grammatical {
                out.entry(s.verb.as_str()).or_default().push(i);
            }
        }
        out
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        let row: usize = id.strip_prefix("fava-")?.parse().ok()?;
        (self.sentences.get(row)?.id == id).then_some(row)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from(HEADER);
        out.push('\n');
        for s in &self.sentences {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                s.alternation,
                s.split,
                u8::from(s.grammatical),
                s.verb,
                s.verb_word_index,
                s.text.join(" ")
            ));
        }
        out
    }
}

pub fn load_fava(path: impl AsRef<Path>) -> Result<FavaDataset, DatasetError> {
    parse_fava(&std::fs::read_to_string(path)?)
}

pub fn parse_fava(text: &str) -> Result<FavaDataset, DatasetError> {
    let mut sentences = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() || (i == 0 && line.starts_with("alternation\t")) {
            continue;
        }
        let malformed = |reason: String| DatasetError::MalformedRow { line: lineno, reason };
        let cells: Vec<&str> = line.splitn(6, '\t').collect();
        if cells.len() != 6 {
            return Err(malformed(format!("expected 6 columns, found {}", cells.len())));
        }
        let alternation = cells[0].parse::<Alternation>().map_err(|_| {
            DatasetError::UnknownAlternation { line: lineno, token: cells[0].to_string() }
        })?;
        let split = cells[1]
            .parse::<Split>()
            .map_err(|_| DatasetError::UnknownSplit { line: lineno, token: cells[1].to_string() })?;
        let grammatical = match cells[2] {
            "1" => true,
            "0" => false,
            other => return Err(malformed(format!("non-binary label {other:?}"))),
        };
        let verb = cells[3].to_string();
        if verb.is_empty() {
            return Err(malformed("empty verb".into()));
        }
        let verb_word_index: usize = cells[4]
            .parse()
            .map_err(|_| malformed(format!("bad verb_word_index {:?}", cells[4])))?;
        let words: Vec<String> = cells[5].split_whitespace().map(str::to_string).collect();
        if verb_word_index >= words.len() {
            return Err(malformed(format!(
                "verb_word_index {verb_word_index} out of range for {} words",
                words.len()
            )));
        }
        let record = SentenceRecord {
            id: SentenceRecord::id_for_row(sentences.len()),
            text: words,
            alternation,
            split,
            grammatical,
            verb,
            verb_word_index,
        };
        if !record.verb_form_matches() {
            log::warn!(
                "line {lineno}: word {:?} does not look like an inflection of {:?}",
                record.text[verb_word_index],
                record.verb
            );
        }
        sentences.push(record);
    }
    Ok(FavaDataset::from_records(sentences))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_row_lands_in_its_partition() {
        let d = parse_fava("spray_load\ttrain\t1\tload\t1\tjohn loaded the hay onto the truck\n").unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.partition(Alternation::SprayLoad, Split::Train), &[0]);
        assert!(d.partition(Alternation::SprayLoad, Split::Test).is_empty());
        let s = &d.sentences()[0];
        assert_eq!(s.id, "fava-00000");
        assert!(s.grammatical);
        assert!(s.verb_form_matches());
        assert_eq!(d.index_of("fava-00000"), Some(0));
        assert_eq!(d.index_of("fava-00001"), None);
    }

    #[test]
    fn unknown_tokens_are_rejected() {
        let err = parse_fava("spray_load\tvalidation\t1\tload\t1\tjohn loaded hay\n").unwrap_err();
        assert!(matches!(err, DatasetError::UnknownSplit { line: 1, .. }));
        let err = parse_fava("conative\ttrain\t1\tload\t1\tjohn loaded hay\n").unwrap_err();
        assert!(matches!(err, DatasetError::UnknownAlternation { .. }));
        let err = parse_fava("dative\ttrain\t1\tgive\t7\tshe gave it\n").unwrap_err();
        assert!(matches!(err, DatasetError::MalformedRow { .. }));
        let err = parse_fava("dative\ttrain\tyes\tgive\t1\tshe gave it\n").unwrap_err();
        assert!(matches!(err, DatasetError::MalformedRow { .. }));
    }

    #[test]
    fn partitions_sum_to_total_and_serialization_round_trips() {
        let text = "alternation\tsplit\tlabel\tverb\tverb_word_index\tsentence\n\
                    dative\ttrain\t1\tgive\t1\tshe gave him a book\n\
                    dative\ttest\t0\tdonate\t1\tshe donated him a book\n\
                    there\tdev\t1\tappear\t1\tthere appeared a ghost\n";
        let d = parse_fava(text).unwrap();
        assert_eq!(d.partition_sizes().values().sum::<usize>(), d.len());
        assert_eq!(d.to_tsv(), text);
        assert_eq!(parse_fava(&d.to_tsv()).unwrap(), d);
        assert_eq!(d.split_indices(None, Split::Train), vec![0]);
        assert_eq!(d.grammatical_by_verb().len(), 2);
    }

    #[test]
    fn loose_inflection_check() {
        let mut s = SentenceRecord {
            id: "fava-00000".into(),
            text: vec!["they".into(), "sprayed".into()],
            alternation: Alternation::SprayLoad,
            split: Split::Train,
            grammatical: true,
            verb: "spray".into(),
            verb_word_index: 1,
        };
        assert!(s.verb_form_matches());
        s.verb = "load".into();
        assert!(!s.verb_form_matches());
    }
}
