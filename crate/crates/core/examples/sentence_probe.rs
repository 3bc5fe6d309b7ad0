//! Sentence-level probing: is grammaticality linearly readable from the
//! mean of a sentence's content-token states?
//!
//! Each probe trains on the Train split and is scored on the Test split;
//! the Dev split is not used. The synthetic store puts grammaticality only
//! in contextual layers, so layer 0 stays near chance.

use std::path::Path;

use altprobe::datasets::{load_fava, Alternation};
use altprobe::embstore::{synth_records, SentenceFeatures, SynthConfig, SynthScheme};
use altprobe::experiments::{run_sentence_experiment, Task};
use altprobe::probes::ProbeConfig;

const LAVA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/lava_fixture.tsv");
const FAVA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/fava_fixture.tsv");

pub fn run_example(_out_dir: &Path) -> Result<(), altprobe::Error> {
    let lava = altprobe::datasets::load_lava(LAVA)?;
    let fava = load_fava(FAVA)?;
    let config = SynthConfig::new(11, SynthScheme::LinearSignal { sigma: 0.5 });
    let layers: Vec<usize> = (0..config.num_layers).collect();
    // features can be built straight from generated records, no file needed
    let records = synth_records(&config, &lava, &fava)?.map(Ok);
    let features = SentenceFeatures::from_records(&config.model_id(), config.hidden_dim, records, &fava, &layers)?;

    let tasks = Alternation::ALL.into_iter().map(Task::Alternation).chain([Task::Combined]);
    for task in tasks {
        let line: Vec<String> = layers
            .iter()
            .map(|&l| run_sentence_experiment(&fava, &features, task, l, &ProbeConfig::linear()).map(|r| format!("{:.3}", r.mcc)))
            .collect::<Result<_, _>>()?;
        println!("{:<12} {}", task.to_string(), line.join("  "));
    }
    Ok(())
}

fn main() -> Result<(), altprobe::Error> {
    run_example(&std::env::temp_dir())
}
