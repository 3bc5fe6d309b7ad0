//! Regenerate the bundled fixture corpus in `data/`.
//!
//! The fixture has the verb and sentence counts of the real LaVA/FAVA
//! release and the per-frame positive/negative counts of its summary table,
//! with made-up verbs and templated sentences.
//!
//! ```text
//! cargo run --example make_fixture [-- OUT_DIR]
//! ```

use std::path::{Path, PathBuf};

use altprobe::datasets::fixture::{table_one_corpus, FIXTURE_SEED};
use altprobe::datasets::{load_fava, load_lava, FrameId};

pub fn run_example(out_dir: &Path) -> Result<(), altprobe::Error> {
    let (lava, fava) = table_one_corpus(FIXTURE_SEED);
    std::fs::create_dir_all(out_dir).map_err(altprobe::datasets::DatasetError::Io)?;
    let lava_path = out_dir.join("lava_fixture.tsv");
    let fava_path = out_dir.join("fava_fixture.tsv");
    std::fs::write(&lava_path, lava.to_tsv()).map_err(altprobe::datasets::DatasetError::Io)?;
    std::fs::write(&fava_path, fava.to_tsv()).map_err(altprobe::datasets::DatasetError::Io)?;

    // the files load back to the same data
    assert_eq!(load_lava(&lava_path)?, lava);
    assert_eq!(load_fava(&fava_path)?, fava);

    println!("{} verbs, {} sentences", lava.len(), fava.len());
    for frame in FrameId::ALL {
        let c = lava.counts(frame);
        let star = if lava.is_degenerate(frame) { "*" } else { "" };
        println!("{:<22} {:>4} {:>4}{star}", frame.to_string(), c.positive, c.negative);
    }
    Ok(())
}

fn main() -> Result<(), altprobe::Error> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("data"));
    run_example(&out)
}
