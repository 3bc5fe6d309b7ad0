//! A complexity sweep from a TOML plan file.
//!
//! Each value listed under `k`, `p` or `l2` is one setting with the other
//! knobs at default. `k` is the SVD rank for the linear probe and the hidden
//! width for MLPs. Cells run in parallel; the output row order and every
//! number in it are independent of scheduling. A failing cell (here `k`
//! larger than the 24-dimensional synthetic store) is recorded, not fatal.

use std::path::Path;

use altprobe::datasets::{load_fava, load_lava};
use altprobe::embstore::{synth_store, SynthConfig, SynthScheme, WordFeatures};
use altprobe::experiments::{load_plan, sweep};
use altprobe::report::{export_sweep, import_sweep, Format};

const LAVA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/lava_fixture.tsv");
const FAVA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/fava_fixture.tsv");

pub fn run_example(out_dir: &Path) -> Result<(), altprobe::Error> {
    let store = out_dir.join("sweep.altprobe");
    synth_store(&SynthConfig::new(4, SynthScheme::LinearSignal { sigma: 1.0 }), &load_lava(LAVA)?, &load_fava(FAVA)?, &store)?;
    let plan_path = out_dir.join("sweep.toml");
    let plan_text = format!(
        r#"
lava = {LAVA:?}
fava = {FAVA:?}
store = {store:?}
out = "sweep.csv"
frames = ["spray_load.with", "there.there"]
layers = [3]
probes = ["linear", "mlp1"]
k = [4, 100]
p = [0.3]
l2 = [0.5]
hidden_size = 16
max_iters = 200
seed = 1
"#
    );
    std::fs::write(&plan_path, plan_text).map_err(altprobe::experiments::ExperimentError::Io)?;

    let file = load_plan(&plan_path)?;
    let plan = file.plan()?;
    let lava = load_lava(&file.lava)?;
    let fava = load_fava(&file.fava)?;
    let features = WordFeatures::from_store(&file.store, &lava, &fava, &plan.layers)?;
    let rows = sweep(&plan, &lava, &features);
    assert_eq!(rows.len(), plan.frames.len() * plan.layers.len() * plan.probes.len() * plan.complexities.len());

    let out = file.out.expect("plan names an output");
    export_sweep(&rows, &out, Format::Csv)?;
    assert_eq!(import_sweep(&out, Format::Csv)?, rows);
    for r in &rows {
        let knob = match (r.k, r.train_prop, r.l2) {
            (Some(k), _, _) => format!("k={k}"),
            (None, p, _) if p < 1.0 => format!("p={p}"),
            (None, _, l) if l > 0.0 => format!("l2={l}"),
            _ => "default".into(),
        };
        match r.selectivity {
            Some(s) => println!("{:<16} {:<6} {:<8} selectivity {s:.3}", r.frame.to_string(), r.probe.to_string(), knob),
            None => println!("{:<16} {:<6} {:<8} failed: {}", r.frame.to_string(), r.probe.to_string(), knob, r.error.as_deref().unwrap_or("")),
        }
    }
    Ok(())
}

fn main() -> Result<(), altprobe::Error> {
    let dir = std::env::temp_dir().join("altprobe-examples");
    std::fs::create_dir_all(&dir).map_err(altprobe::experiments::ExperimentError::Io)?;
    run_example(&dir)
}
