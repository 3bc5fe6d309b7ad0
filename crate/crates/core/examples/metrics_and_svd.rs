//! The numerical core on its own: confusion-matrix metrics, the truncated
//! SVD front end, and a probe trained, saved and reloaded.

use std::path::Path;

use altprobe::probes::{fit_svd, predict, probe_from_json, probe_to_json, train, ConfusionMatrix, ProbeConfig, ProbeKind};
use nalgebra::DMatrix;

pub fn run_example(out_dir: &Path) -> Result<(), altprobe::Error> {
    let cm = ConfusionMatrix::new(45, 40, 10, 5);
    println!("mcc {:.4}  accuracy {:.4}", cm.mcc(), cm.accuracy()?);
    // a constant prediction has an undefined correlation; reported as 0
    println!("constant predictor mcc {}", ConfusionMatrix::new(0, 90, 0, 10).mcc());

    // 60 points in 6-D that vary along two directions only
    let x = DMatrix::from_fn(60, 6, |i, j| {
        let (a, b) = ((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos());
        a * [1.0, 0.5, 0.0, -1.0, 0.2, 0.0][j] + b * [0.0, 1.0, 1.0, 0.0, -0.3, 0.4][j]
    });
    let svd = fit_svd(&x, 2)?;
    let residual = (&x - svd.reconstruct(&x)).norm();
    println!("singular values {:.4?}, rank-2 residual {residual:.2e}", svd.singular_values);

    let y: Vec<bool> = (0..60).map(|i| (i as f64 * 0.37).sin() > 0.0).collect();
    let mut config = ProbeConfig::of_kind(ProbeKind::Linear);
    config.svd_rank = Some(2);
    config.l2 = 0.01;
    let probe = train(&config, &x, &y)?;
    let pred = predict(&probe, &x)?;
    println!("{:?} train mcc {:.3}", probe.status, ConfusionMatrix::from_labels(&y, &pred.labels).mcc());

    let path = out_dir.join("probe.json");
    std::fs::write(&path, probe_to_json(&probe)).map_err(altprobe::embstore::StoreError::Io)?;
    let text = std::fs::read_to_string(&path).map_err(altprobe::embstore::StoreError::Io)?;
    let back = probe_from_json(&text)?;
    assert_eq!(predict(&back, &x)?, pred);
    Ok(())
}

fn main() -> Result<(), altprobe::Error> {
    run_example(&std::env::temp_dir())
}
