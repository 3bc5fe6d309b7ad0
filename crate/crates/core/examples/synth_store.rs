//! Write synthetic `ALTPROB1` stores for the bundled fixture and read them
//! back.
//!
//! A store holds, per sentence, every layer's hidden states with the verb
//! span and content mask. The synthetic generator needs no language model:
//! `LinearSignal` plants frame membership and grammaticality on fixed
//! coordinates, `PureNoise` carries no label information at all.

use std::path::Path;

use altprobe::datasets::{load_fava, load_lava};
use altprobe::embstore::format::{header_len, record_len, sidecar_path};
use altprobe::embstore::{read_store, synth_store, SynthConfig, SynthScheme};

const LAVA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/lava_fixture.tsv");
const FAVA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/fava_fixture.tsv");

pub fn run_example(out_dir: &Path) -> Result<(), altprobe::Error> {
    let lava = load_lava(LAVA)?;
    let fava = load_fava(FAVA)?;
    for scheme in [SynthScheme::LinearSignal { sigma: 0.0 }, SynthScheme::PureNoise] {
        let config = SynthConfig::new(7, scheme);
        let path = out_dir.join(format!("{}.altprobe", config.model_id()));
        let header = synth_store(&config, &lava, &fava, &path)?;

        let (read_header, records) = read_store(&path)?;
        assert_eq!(read_header, header);
        let mut expected_len = header_len(&header.model_id);
        let mut pseudo = 0;
        let mut count = 0;
        for record in records {
            let r = record?;
            expected_len += record_len(&r.sentence_id, r.num_layers, r.token_count, r.hidden_dim);
            pseudo += usize::from(r.is_pseudo());
            count += 1;
        }
        let size = std::fs::metadata(&path).map_err(altprobe::embstore::StoreError::Io)?.len();
        assert_eq!(size, expected_len);
        assert_eq!(count, fava.len() + lava.len());
        assert_eq!(pseudo, lava.len());
        assert!(sidecar_path(&path).exists());
        println!(
            "{}: {} layers x d={}, {count} records ({pseudo} isolated verbs), {size} bytes",
            header.model_id, header.num_layers, header.hidden_dim
        );
    }
    Ok(())
}

fn main() -> Result<(), altprobe::Error> {
    let dir = std::env::temp_dir().join("altprobe-examples");
    std::fs::create_dir_all(&dir).map_err(altprobe::embstore::StoreError::Io)?;
    run_example(&dir)
}
