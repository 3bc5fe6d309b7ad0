//! Reporting: best-layer tables, per-task and mean-over-task curves, and
//! CSV/JSON exports that load back unchanged.

use std::path::Path;

use altprobe::datasets::{load_fava, load_lava, FrameId};
use altprobe::embstore::{synth_records, SynthConfig, SynthScheme, WordFeatures};
use altprobe::experiments::{run_word_experiment, CvOptions};
use altprobe::probes::ProbeConfig;
use altprobe::report::{
    best_layer_table, curve_points, export_results, import_results, mean_curve, Format, ResultRow,
};

const LAVA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/lava_fixture.tsv");
const FAVA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/fava_fixture.tsv");

pub fn run_example(out_dir: &Path) -> Result<(), altprobe::Error> {
    let lava = load_lava(LAVA)?;
    let fava = load_fava(FAVA)?;
    let config = SynthConfig::new(9, SynthScheme::LinearSignal { sigma: 2.0 });
    let layers: Vec<usize> = (0..config.num_layers).collect();
    let records = synth_records(&config, &lava, &fava)?.map(Ok);
    let features = WordFeatures::from_records(&config.model_id(), config.hidden_dim, records, &lava, &fava, &layers)?;

    let mut rows = Vec::new();
    for frame in FrameId::ALL {
        for &layer in &layers {
            let r = run_word_experiment(&lava, &features, frame, layer, &ProbeConfig::linear(), &CvOptions::default())?;
            rows.push(ResultRow::new(features.model_id(), ProbeConfig::linear().kind, &r));
        }
    }

    for format in [Format::Csv, Format::Json] {
        let path = out_dir.join(format!("word_results.{format}"));
        export_results(&rows, &path, format)?;
        assert_eq!(import_results(&path, format)?, rows);
    }

    print!("{}", best_layer_table(&rows)?.render());
    // single-class frames are left out of the mean
    for p in curve_points(&mean_curve(&rows)?) {
        println!("mean mcc at layer {}: {:.3}", p.layer, p.mcc);
    }
    Ok(())
}

fn main() -> Result<(), altprobe::Error> {
    let dir = std::env::temp_dir().join("altprobe-examples");
    std::fs::create_dir_all(&dir).map_err(altprobe::report::ReportError::Io)?;
    run_example(&dir)
}
