//! Deterministic fixture corpus with the published LaVA class structure.
//!
//! The real verb table and sentence corpus are distributed separately. This
//! module builds stand-ins with identical per-frame positive/negative counts
//! (516 verbs, ten frames) and the same sentence total (9413), using
//! pseudo-word verbs and templated sentences. Grammaticality of a fixture
//! sentence is the verb's membership in the frame its template realises.
//!
//! The bundled `data/lava_fixture.tsv` and `data/fava_fixture.tsv` are the
//! output of [`table_one_corpus`] with [`FIXTURE_SEED`].

use std::collections::BTreeMap;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use super::{Alternation, FavaDataset, FrameId, LavaDataset, SentenceRecord, Split, VerbRecord};
use crate::rng;

pub const FIXTURE_SEED: u64 = 20_221_014;
pub const FIXTURE_VERBS: usize = 516;
pub const FIXTURE_SENTENCES: usize = 9413;

/// (positive, negative) per frame, in canonical column order.
pub const TABLE_ONE: [(usize, usize); 10] = [
    (73, 144),
    (124, 0),
    (65, 377),
    (74, 442),
    (101, 242),
    (86, 257),
    (149, 0),
    (50, 192),
    (84, 419),
    (11, 503),
];

const ONSETS: [&str; 16] = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "st"];
const VOWELS: [&str; 5] = ["a", "e", "i", "o", "u"];
const CODAS: [&str; 6] = ["k", "n", "r", "sh", "t", "m"];

const NOUNS: [&str; 24] = [
    "girl", "boy", "farmer", "teacher", "cat", "dog", "cup", "wall", "truck", "hay", "paint", "garden",
    "book", "letter", "river", "window", "child", "doctor", "table", "box", "ghost", "village", "rope", "stone",
];

/// Build the fixture pair. Same seed, same bytes.
pub fn table_one_corpus(seed: u64) -> (LavaDataset, FavaDataset) {
    let verbs = pseudo_verbs(seed, FIXTURE_VERBS);
    let mut labels: Vec<BTreeMap<FrameId, bool>> = vec![BTreeMap::new(); verbs.len()];
    for (frame, (pos, neg)) in FrameId::ALL.iter().zip(TABLE_ONE) {
        let mut rng = rng::keyed(seed, &format!("lava/{frame}"));
        let mut order: Vec<usize> = (0..verbs.len()).collect();
        order.shuffle(&mut rng);
        for (rank, &v) in order.iter().take(pos + neg).enumerate() {
            labels[v].insert(*frame, rank < pos);
        }
    }
    let records = verbs
        .iter()
        .zip(labels)
        .map(|(verb, labels)| VerbRecord { verb: verb.clone(), labels })
        .collect();
    let lava = LavaDataset::from_records(records).expect("pseudo verbs are unique");

    // every annotated (verb, frame) pair gets two sentences, a random
    // subset gets a third, for FIXTURE_SENTENCES in total
    let pairs: Vec<(usize, FrameId, bool)> = FrameId::ALL
        .iter()
        .flat_map(|f| {
            lava.verbs()
                .iter()
                .enumerate()
                .filter_map(move |(i, v)| v.label(*f).map(|y| (i, *f, y)))
        })
        .collect();
    let mut rng = rng::keyed(seed, "fava/extra");
    let mut extra: Vec<usize> = (0..pairs.len()).collect();
    extra.shuffle(&mut rng);
    let n_extra = FIXTURE_SENTENCES - 2 * pairs.len();
    let mut copies = vec![2usize; pairs.len()];
    for &i in extra.iter().take(n_extra) {
        copies[i] += 1;
    }

    let mut by_alt: BTreeMap<Alternation, Vec<(Vec<String>, usize, bool, String)>> = BTreeMap::new();
    for (p, &(verb_idx, frame, y)) in pairs.iter().enumerate() {
        let mut rng = rng::keyed(seed, &format!("fava/sentence/{p}"));
        for _ in 0..copies[p] {
            let verb = &lava.verbs()[verb_idx].verb;
            let (words, at) = realise(frame, verb, &mut rng);
            by_alt.entry(frame.alternation()).or_default().push((words, at, y, verb.clone()));
        }
    }

    let mut sentences = Vec::with_capacity(FIXTURE_SENTENCES);
    for (alt, mut items) in by_alt {
        let mut rng = rng::keyed(seed, &format!("fava/split/{alt}"));
        items.shuffle(&mut rng);
        let n = items.len();
        let n_train = n * 7 / 10;
        let n_dev = n / 10;
        for (j, (text, at, y, verb)) in items.into_iter().enumerate() {
            let split = if j < n_train {
                Split::Train
            } else if j < n_train + n_dev {
                Split::Dev
            } else {
                Split::Test
            };
            sentences.push(SentenceRecord {
                id: SentenceRecord::id_for_row(sentences.len()),
                text,
                alternation: alt,
                split,
                grammatical: y,
                verb,
                verb_word_index: at,
            });
        }
    }
    (lava, FavaDataset::from_records(sentences))
}

fn pseudo_verbs(seed: u64, n: usize) -> Vec<String> {
    let mut rng = rng::keyed(seed, "lava/verbs");
    let mut out = Vec::with_capacity(n);
    let mut seen = std::collections::HashSet::new();
    while out.len() < n {
        let syllables = rng.random_range(2..=3);
        let mut w = String::new();
        for _ in 0..syllables {
            w.push_str(ONSETS.choose(&mut rng).unwrap());
            w.push_str(VOWELS.choose(&mut rng).unwrap());
        }
        w.push_str(CODAS.choose(&mut rng).unwrap());
        if seen.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

fn past(verb: &str) -> String {
    if verb.ends_with('e') {
        format!("{verb}d")
    } else {
        format!("{verb}ed")
    }
}

/// Template sentence for `frame`; returns words and the verb position.
fn realise(frame: FrameId, verb: &str, rng: &mut impl Rng) -> (Vec<String>, usize) {
    let mut nouns = NOUNS.choose_multiple(rng, 3);
    let (a, b, c) = (nouns.next().unwrap(), nouns.next().unwrap(), nouns.next().unwrap());
    let v = past(verb);
    let template: Vec<&str> = match frame.index() {
        0 => vec!["the", b, &v],
        1 => vec!["the", a, &v, "the", b],
        2 => vec!["the", a, &v, "the", b, "to", "the", c],
        3 => vec!["the", a, &v, "the", c, "the", b],
        4 => vec!["the", a, &v, "the", b, "with", "the", c],
        5 => vec!["the", a, &v, "the", c, "onto", "the", b],
        6 => vec!["a", a, &v, "in", "the", b],
        7 => vec!["there", &v, "a", a, "in", "the", b],
        8 => vec!["the", a, &v, "quietly"],
        _ => vec!["the", a, &v, "all", "day"],
    };
    let at = template.iter().position(|w| *w == v).unwrap();
    (template.into_iter().map(str::to_string).collect(), at)
}
