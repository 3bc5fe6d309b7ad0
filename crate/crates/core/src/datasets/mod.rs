//! Verb/frame membership table and the grammaticality-labelled sentence
//! corpus.
//!
//! Both files are UTF-8 tab-separated tables:
//!
//! * LaVA: header `verb<TAB>caus_inch.inchoative<TAB>...<TAB>understood.non_refl`,
//!   one verb per row, cells `1`, `0`, or `-` when the verb was not annotated
//!   for that frame.
//! * FAVA: `alternation<TAB>split<TAB>label<TAB>verb<TAB>verb_word_index<TAB>sentence`,
//!   with an optional header row.

mod fava;
pub mod fixture;
mod lava;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fava::{load_fava, parse_fava, FavaDataset, SentenceRecord, Split};
pub use lava::{frame_labels, load_lava, parse_lava, FrameCounts, LavaDataset, VerbRecord};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed row at line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("duplicate verb {verb:?} at line {line}")]
    DuplicateVerb { line: usize, verb: String },
    #[error("unknown frame id {0:?}")]
    UnknownFrame(String),
    #[error("unknown split {token:?} at line {line}")]
    UnknownSplit { line: usize, token: String },
    #[error("unknown alternation {token:?} at line {line}")]
    UnknownAlternation { line: usize, token: String },
}

/// The five alternation classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Alternation {
    CausativeInchoative,
    Dative,
    SprayLoad,
    ThereInsertion,
    UnderstoodObject,
}

impl Alternation {
    pub const ALL: [Alternation; 5] = [
        Alternation::CausativeInchoative,
        Alternation::Dative,
        Alternation::SprayLoad,
        Alternation::ThereInsertion,
        Alternation::UnderstoodObject,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Alternation::CausativeInchoative => "caus_inch",
            Alternation::Dative => "dative",
            Alternation::SprayLoad => "spray_load",
            Alternation::ThereInsertion => "there",
            Alternation::UnderstoodObject => "understood",
        }
    }

    /// The two frames of this alternation, in table column order.
    pub fn frames(self) -> [FrameId; 2] {
        let i = Alternation::ALL.iter().position(|a| *a == self).unwrap();
        [FrameId::ALL[2 * i], FrameId::ALL[2 * i + 1]]
    }
}

impl fmt::Display for Alternation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Alternation {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Alternation::ALL
            .into_iter()
            .find(|a| a.token() == s)
            .ok_or_else(|| DatasetError::UnknownAlternation { line: 0, token: s.to_string() })
    }
}

/// A syntactic frame. Each frame belongs to exactly one alternation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Frame {
    Inchoative,
    Causative,
    Preposition,
    DoubleObject,
    With,
    Locative,
    NoThere,
    There,
    Reflexive,
    NonReflexive,
}

impl Frame {
    pub const fn alternation(self) -> Alternation {
        match self {
            Frame::Inchoative | Frame::Causative => Alternation::CausativeInchoative,
            Frame::Preposition | Frame::DoubleObject => Alternation::Dative,
            Frame::With | Frame::Locative => Alternation::SprayLoad,
            Frame::NoThere | Frame::There => Alternation::ThereInsertion,
            Frame::Reflexive | Frame::NonReflexive => Alternation::UnderstoodObject,
        }
    }

    fn token(self) -> &'static str {
        match self {
            Frame::Inchoative => "inchoative",
            Frame::Causative => "causative",
            Frame::Preposition => "prep",
            Frame::DoubleObject => "double_obj",
            Frame::With => "with",
            Frame::Locative => "locative",
            Frame::NoThere => "no_there",
            Frame::There => "there",
            Frame::Reflexive => "refl",
            Frame::NonReflexive => "non_refl",
        }
    }
}

/// An (alternation, frame) pair. Only the ten legal pairs can be built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct FrameId {
    alternation: Alternation,
    frame: Frame,
}

impl FrameId {
    /// All frames in canonical column order.
    pub const ALL: [FrameId; 10] = [
        FrameId::of(Frame::Inchoative),
        FrameId::of(Frame::Causative),
        FrameId::of(Frame::Preposition),
        FrameId::of(Frame::DoubleObject),
        FrameId::of(Frame::With),
        FrameId::of(Frame::Locative),
        FrameId::of(Frame::NoThere),
        FrameId::of(Frame::There),
        FrameId::of(Frame::Reflexive),
        FrameId::of(Frame::NonReflexive),
    ];

    const fn of(frame: Frame) -> FrameId {
        FrameId { alternation: frame.alternation(), frame }
    }

    pub fn new(alternation: Alternation, frame: Frame) -> Result<FrameId, DatasetError> {
        if frame.alternation() == alternation {
            Ok(FrameId { alternation, frame })
        } else {
            Err(DatasetError::UnknownFrame(format!("{}.{}", alternation.token(), frame.token())))
        }
    }

    pub fn alternation(self) -> Alternation {
        self.alternation
    }

    pub fn frame(self) -> Frame {
        self.frame
    }

    /// Column position in the LaVA table (0..10).
    pub fn index(self) -> usize {
        FrameId::ALL.iter().position(|f| *f == self).unwrap()
    }

    /// `alternation.frame` token, e.g. `spray_load.with`.
    pub fn token(self) -> String {
        format!("{}.{}", self.alternation.token(), self.frame.token())
    }
}

impl fmt::Display for FrameId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.alternation.token(), self.frame.token())
    }
}

impl FromStr for FrameId {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FrameId::ALL
            .into_iter()
            .find(|f| f.token() == s)
            .ok_or_else(|| DatasetError::UnknownFrame(s.to_string()))
    }
}

impl TryFrom<String> for FrameId {
    type Error = DatasetError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<FrameId> for String {
    fn from(f: FrameId) -> String {
        f.token()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_legal_frames_round_trip_through_tokens() {
        assert_eq!(FrameId::ALL.len(), 10);
        for (i, f) in FrameId::ALL.iter().enumerate() {
            assert_eq!(f.index(), i);
            assert_eq!(f.token().parse::<FrameId>().unwrap(), *f);
            assert_eq!(f.frame().alternation(), f.alternation());
        }
        assert_eq!(FrameId::ALL[4].token(), "spray_load.with");
        assert_eq!(FrameId::ALL[7].token(), "there.there");
    }

    #[test]
    fn illegal_pairs_are_rejected() {
        assert!(FrameId::new(Alternation::Dative, Frame::With).is_err());
        assert!(FrameId::new(Alternation::SprayLoad, Frame::With).is_ok());
        assert!(matches!("spray_load.onto".parse::<FrameId>(), Err(DatasetError::UnknownFrame(_))));
    }

    #[test]
    fn alternation_frames_are_its_columns() {
        let [a, b] = Alternation::ThereInsertion.frames();
        assert_eq!(a.token(), "there.no_there");
        assert_eq!(b.token(), "there.there");
        for alt in Alternation::ALL {
            assert_eq!(alt.token().parse::<Alternation>().unwrap(), alt);
        }
    }
}
