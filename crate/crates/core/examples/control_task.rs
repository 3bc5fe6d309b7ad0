//! Control tasks and selectivity.
//!
//! A control task relabels each verb at random with the real frame's
//! positive rate. The same probe, folds and training subsample are run on
//! both labelings; selectivity is real accuracy minus control accuracy. A
//! probe that reads structure from the embedding keeps selectivity high.

use std::path::Path;

use altprobe::datasets::{load_fava, load_lava, FrameId};
use altprobe::embstore::{synth_records, SynthConfig, SynthScheme, WordFeatures};
use altprobe::experiments::{make_control_task, run_control_experiment, ComplexityConfig, ControlOptions};
use altprobe::probes::{ProbeConfig, ProbeKind};

const LAVA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/lava_fixture.tsv");
const FAVA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/fava_fixture.tsv");

pub fn run_example(_out_dir: &Path) -> Result<(), altprobe::Error> {
    let lava = load_lava(LAVA)?;
    let fava = load_fava(FAVA)?;
    let frame: FrameId = "spray_load.with".parse()?;
    let y = altprobe::datasets::frame_labels(&lava, frame).1;
    let control = make_control_task(&y, 5);
    println!("real positive rate {:.3}, control draws {} of {}", control.positive_rate,
        control.labels.iter().filter(|c| **c).count(), y.len());

    let config = SynthConfig::new(2, SynthScheme::LinearSignal { sigma: 0.5 });
    let layer = config.num_layers - 1;
    let records = synth_records(&config, &lava, &fava)?.map(Ok);
    let features = WordFeatures::from_records(&config.model_id(), config.hidden_dim, records, &lava, &fava, &[layer])?;

    let opts = ControlOptions { folds: 4, seed: 0, control_seed: 5 };
    println!("{:<7} {:>8} {:>8} {:>11}", "probe", "real", "control", "selectivity");
    for kind in ProbeKind::ALL {
        let mut probe = ProbeConfig::of_kind(kind);
        probe.hidden_size = 32;
        probe.max_iters = 300;
        let o = run_control_experiment(&lava, &features, frame, layer, &probe, &ComplexityConfig::default(), &opts)?;
        println!("{:<7} {:>8.3} {:>8.3} {:>11.3}", kind.to_string(), o.real_accuracy, o.control_accuracy, o.selectivity);
    }
    Ok(())
}

fn main() -> Result<(), altprobe::Error> {
    run_example(&std::env::temp_dir())
}
