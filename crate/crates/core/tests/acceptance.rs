//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! ```text
//! cargo test --test acceptance
//! ```

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use altprobe::datasets::fixture::{table_one_corpus, FIXTURE_SEED};
use altprobe::datasets::{load_fava, load_lava, FavaDataset, FrameId, LavaDataset};
use altprobe::embstore::{synth_records, synth_store, SentenceFeatures, SynthConfig, SynthScheme, WordFeatures};
use altprobe::experiments::{
    run_control_experiment, run_sentence_experiment, run_word_experiment, stratified_kfold, sweep,
    ComplexityConfig, ControlOptions, CvOptions, SweepPlan, Task,
};
use altprobe::probes::objective::{LinearObjective, MlpObjective, Objective};
use altprobe::probes::{fit_svd, ConfusionMatrix, ProbeConfig, ProbeKind};
use altprobe::report::{best_layer_table, write_rows, Format, ResultRow, RESULT_COLUMNS, SWEEP_COLUMNS};

const MCC_TOL: f64 = 1e-12;
const GRAD_REL_TOL: f64 = 1e-5;
const GRAD_POINTS: usize = 10;
const SVD_TOL: f64 = 1e-8;
const SENTENCE_MCC_MIN: f64 = 0.95;
const NOISE_MCC_MAX: f64 = 0.15;
const SEEDS: u64 = 10;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn bundled() -> (LavaDataset, FavaDataset) {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    (load_lava(data.join("lava_fixture.tsv")).unwrap(), load_fava(data.join("fava_fixture.tsv")).unwrap())
}

// ---------------------------------------------------------------- MCC

/// Correlation of the two indicator variables written through marginal
/// rates, independent of the library's closed form.
fn mcc_oracle(tp: f64, tn: f64, fp: f64, fn_: f64) -> Option<f64> {
    let n = tp + tn + fp + fn_;
    if n == 0.0 {
        return None;
    }
    let truth = (tp + fn_) / n;
    let predicted = (tp + fp) / n;
    let var = truth * (1.0 - truth) * predicted * (1.0 - predicted);
    if var == 0.0 {
        return None;
    }
    Some((tp / n - truth * predicted) / var.sqrt())
}

fn mcc_oracle_equivalence() -> Outcome {
    let mut cases = 0u64;
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    for tp in 0..=20u64 {
        for tn in 0..=20u64 {
            for fp in 0..=20u64 {
                for fn_ in 0..=20u64 {
                    cases += 1;
                    let got = ConfusionMatrix::new(tp, tn, fp, fn_).mcc();
                    let ok = match mcc_oracle(tp as f64, tn as f64, fp as f64, fn_ as f64) {
                        None => got == 0.0,
                        Some(want) => {
                            worst = worst.max((got - want).abs());
                            (got - want).abs() <= MCC_TOL && (-1.0..=1.0).contains(&got)
                        }
                    };
                    if !ok && bad.len() < 3 {
                        bad.push(format!("({tp},{tn},{fp},{fn_}) -> {got}"));
                    }
                }
            }
        }
    }
    outcome(
        bad.is_empty() && cases == 194_481,
        format!("{cases} matrices, max |diff| {worst:.1e}{}", if bad.is_empty() { String::new() } else { format!(", bad {bad:?}") }),
    )
}

// ---------------------------------------------------------- gradients

fn central_difference(obj: &dyn Objective, params: &[f64], h: f64) -> Vec<f64> {
    let mut p = params.to_vec();
    (0..params.len())
        .map(|i| {
            p[i] = params[i] + h;
            let up = obj.loss(&p);
            p[i] = params[i] - h;
            let down = obj.loss(&p);
            p[i] = params[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(b.iter().map(|x| x * x).sum::<f64>().sqrt());
    diff / scale.max(1e-12)
}

fn gradient_checks() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let (n, d) = (30, 6);
    let x = DMatrix::from_fn(n, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let y: Vec<bool> = (0..n).map(|_| rng.random_bool(0.4)).collect();
    let mut worst = [0.0f64; 3];
    for (slot, kind) in ProbeKind::ALL.into_iter().enumerate() {
        for point in 0..GRAD_POINTS {
            let l2 = [0.0, 0.1, 1.0][point % 3];
            let obj: Box<dyn Objective> = match kind {
                ProbeKind::Linear => Box::new(LinearObjective::new(&x, &y, l2)),
                ProbeKind::Mlp1 => Box::new(MlpObjective::new(&x, &y, l2, 7, 1)),
                ProbeKind::Mlp2 => Box::new(MlpObjective::new(&x, &y, l2, 7, 2)),
            };
            let params: Vec<f64> =
                (0..obj.num_params()).map(|_| 0.7 * rng.sample::<f64, _>(StandardNormal)).collect();
            let (_, analytic) = obj.loss_grad(&params);
            let numeric = central_difference(obj.as_ref(), &params, 1e-5);
            worst[slot] = worst[slot].max(relative_error(&analytic, &numeric));
        }
    }
    outcome(
        worst.iter().all(|w| *w < GRAD_REL_TOL),
        format!("{GRAD_POINTS} points each, max rel err linear {:.1e} mlp1 {:.1e} mlp2 {:.1e}", worst[0], worst[1], worst[2]),
    )
}

// ------------------------------------------------------ stratification

fn stratification() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut worst: f64 = 0.0;
    let mut partition_ok = true;
    for trial in 0..100 {
        let n = rng.random_range(20..=600usize);
        let rate = rng.random_range(0.02..=0.5f64);
        let positives = ((rate * n as f64).round() as usize).max(1);
        let mut y: Vec<bool> = (0..n).map(|i| i < positives).collect();
        y.shuffle(&mut rng);
        let folds = stratified_kfold(&y, 4, trial).unwrap();
        let mut seen = vec![0usize; n];
        for f in 0..4 {
            let members = folds.members(f);
            members.iter().for_each(|i| seen[*i] += 1);
            let pos = members.iter().filter(|i| y[**i]).count() as f64;
            let ideal = positives as f64 * members.len() as f64 / n as f64;
            worst = worst.max((pos - ideal).abs());
            partition_ok &= members.len() == n / 4 || members.len() == n / 4 + 1;
        }
        partition_ok &= seen.iter().all(|c| *c == 1);
    }
    outcome(worst <= 1.0 && partition_ok, format!("100 label vectors, max |positives - ideal| {worst:.3}, partition ok {partition_ok}"))
}

// ----------------------------------------------------------------- SVD

/// Singular values from power iteration on the Gram matrix with
/// deflation.
fn power_iteration_singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    let mut gram = a.transpose() * a;
    let d = gram.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut out = Vec::with_capacity(d);
    for _ in 0..d {
        let mut v = nalgebra::DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        v /= v.norm();
        for _ in 0..200_000 {
            let w = &gram * &v;
            let w = &w / w.norm();
            let moved = (&w - &v).norm();
            v = w;
            if moved < 1e-14 {
                break;
            }
        }
        let lambda = v.dot(&(&gram * &v));
        out.push(lambda.max(0.0).sqrt());
        gram -= lambda * &v * v.transpose();
    }
    out
}

fn svd_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let a = DMatrix::from_fn(50, 30, |_, _| rng.sample::<f64, _>(StandardNormal));
        let svd = fit_svd(&a, 30).unwrap();
        let oracle = power_iteration_singular_values(&a);
        for (s, o) in svd.singular_values.iter().zip(&oracle) {
            worst = worst.max((s - o).abs());
        }
    }
    let u = DMatrix::from_fn(50, 1, |_, _| rng.sample::<f64, _>(StandardNormal));
    let v = DMatrix::from_fn(1, 30, |_, _| rng.sample::<f64, _>(StandardNormal));
    let rank_one = &u * &v;
    let fit = fit_svd(&rank_one, 1).unwrap();
    let residual = (&rank_one - fit.reconstruct(&rank_one)).norm() / rank_one.norm();
    outcome(
        worst <= SVD_TOL && residual <= 1e-12,
        format!("5 random 50x30, max |sigma - oracle| {worst:.1e}; rank-1 relative residual {residual:.1e}"),
    )
}

// ------------------------------------------------------- signal store

fn signal_case() -> Outcome {
    let (lava, fava) = bundled();
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("signal.altprobe");
    let header = synth_store(&SynthConfig::new(0, SynthScheme::LinearSignal { sigma: 0.0 }), &lava, &fava, &store).unwrap();
    let layers: Vec<usize> = (0..header.num_layers).collect();
    let words = WordFeatures::from_store(&store, &lava, &fava, &layers).unwrap();
    let sentences = SentenceFeatures::from_store(&store, &fava, &layers).unwrap();

    let mut rows = Vec::new();
    let mut word_ok = true;
    let mut min_word: f64 = 1.0;
    for frame in FrameId::ALL {
        for &layer in &layers {
            let r = run_word_experiment(&lava, &words, frame, layer, &ProbeConfig::linear(), &CvOptions::default()).unwrap();
            if lava.is_degenerate(frame) {
                word_ok &= r.degenerate && r.mcc == 0.0 && r.accuracy == 1.0;
            } else {
                word_ok &= r.mcc == 1.0;
                min_word = min_word.min(r.mcc);
            }
            rows.push(ResultRow::new(words.model_id(), ProbeKind::Linear, &r));
        }
    }
    let table = best_layer_table(&rows).unwrap();
    let starred_ok = table
        .rows
        .iter()
        .filter(|r| r.degenerate)
        .map(|r| (r.task.to_string(), r.mcc_cell(), r.accuracy_cell()))
        .collect::<Vec<_>>()
        == vec![
            ("caus_inch.causative".to_string(), "0.000".to_string(), "1.000".to_string()),
            ("there.no_there".to_string(), "0.000".to_string(), "1.000".to_string()),
        ];

    let sentence: Vec<f64> = layers
        .iter()
        .map(|&l| run_sentence_experiment(&fava, &sentences, Task::Combined, l, &ProbeConfig::linear()).unwrap().mcc)
        .collect();
    let best_sentence = sentence.iter().copied().fold(f64::MIN, f64::max);
    outcome(
        word_ok && starred_ok && best_sentence >= SENTENCE_MCC_MIN,
        format!(
            "word min mcc {min_word:.3} over 8 frames x {} layers; starred rows ok {starred_ok}; combined sentence mcc by layer {:.3?} (best {best_sentence:.3})",
            layers.len(),
            sentence
        ),
    )
}

// -------------------------------------------------------- noise store

fn noise_case() -> Outcome {
    let (lava, fava) = bundled();
    let mut worst: f64 = 0.0;
    let mut over = Vec::new();
    let mut runs = 0;
    for seed in 0..SEEDS {
        let config = SynthConfig::new(seed, SynthScheme::PureNoise);
        let layers: Vec<usize> = (0..config.num_layers).collect();
        let records = synth_records(&config, &lava, &fava).unwrap().map(Ok);
        let words = WordFeatures::from_records(&config.model_id(), config.hidden_dim, records, &lava, &fava, &layers).unwrap();
        for frame in FrameId::ALL.into_iter().filter(|f| !lava.is_degenerate(*f)) {
            for &layer in &layers {
                let probe = ProbeConfig { seed, ..ProbeConfig::linear() };
                let r = run_word_experiment(&lava, &words, frame, layer, &probe, &CvOptions { folds: 4, seed }).unwrap();
                runs += 1;
                worst = worst.max(r.mcc.abs());
                if r.mcc.abs() > NOISE_MCC_MAX {
                    over.push(format!("seed {seed} {frame} layer {layer}: {:.3}", r.mcc));
                }
            }
        }
    }

    let config = SynthConfig::new(0, SynthScheme::LinearSignal { sigma: 0.0 });
    let layers: Vec<usize> = (0..config.num_layers).collect();
    let records = synth_records(&config, &lava, &fava).unwrap().map(Ok);
    let words = WordFeatures::from_records(&config.model_id(), config.hidden_dim, records, &lava, &fava, &layers).unwrap();
    let frame: FrameId = "spray_load.with".parse().unwrap();
    let mut min_selectivity = f64::MAX;
    for seed in 0..SEEDS {
        for &layer in &layers {
            let opts = ControlOptions { folds: 4, seed, control_seed: 1000 + seed };
            let o = run_control_experiment(&lava, &words, frame, layer, &ProbeConfig::linear(), &ComplexityConfig::default(), &opts)
                .unwrap();
            min_selectivity = min_selectivity.min(o.selectivity);
        }
    }
    outcome(
        over.is_empty() && min_selectivity >= 0.0,
        format!(
            "noise: {runs} runs, max |mcc| {worst:.3}, {} above {NOISE_MCC_MAX}{}; linear selectivity min {min_selectivity:.3} over {SEEDS} seeds x {} layers",
            over.len(),
            if over.is_empty() { String::new() } else { format!(" [{}]", over.join("; ")) },
            layers.len()
        ),
    )
}

// -------------------------------------------------------- determinism

fn run_exports(lava: &LavaDataset, fava: &FavaDataset, threads: usize) -> Vec<u8> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| {
        let config = SynthConfig::new(5, SynthScheme::LinearSignal { sigma: 1.5 });
        let layers: Vec<usize> = (0..config.num_layers).collect();
        let records = synth_records(&config, lava, fava).unwrap().map(Ok);
        let words = WordFeatures::from_records(&config.model_id(), config.hidden_dim, records, lava, fava, &layers).unwrap();
        let mut rows = Vec::new();
        for frame in FrameId::ALL {
            for &layer in &layers {
                let probe = ProbeConfig { seed: 3, ..ProbeConfig::linear() };
                let r = run_word_experiment(lava, &words, frame, layer, &probe, &CvOptions { folds: 4, seed: 3 }).unwrap();
                rows.push(ResultRow::new(words.model_id(), ProbeKind::Linear, &r));
            }
        }
        let mut plan = SweepPlan::new(
            vec!["spray_load.with".parse().unwrap(), "there.there".parse().unwrap()],
            vec![1, 3],
            ProbeKind::ALL.to_vec(),
            vec![ComplexityConfig::default(), ComplexityConfig::with_k(8), ComplexityConfig::with_train_prop(0.5), ComplexityConfig::with_l2(0.1)],
            4,
            11,
        )
        .unwrap();
        plan.base.hidden_size = 16;
        plan.base.max_iters = 100;
        let swept = sweep(&plan, lava, &words);
        let mut bytes = Vec::new();
        for format in [Format::Csv, Format::Json] {
            write_rows(&rows, &RESULT_COLUMNS, format, &mut bytes).unwrap();
            write_rows(&swept, &SWEEP_COLUMNS, format, &mut bytes).unwrap();
        }
        bytes
    })
}

fn determinism() -> Outcome {
    let (lava, fava) = table_one_corpus(FIXTURE_SEED);
    let a = run_exports(&lava, &fava, 1);
    let b = run_exports(&lava, &fava, 4);
    let c = run_exports(&lava, &fava, 4);
    outcome(a == b && b == c, format!("{} export bytes; 1-thread vs 4-thread identical {}; repeat identical {}", a.len(), a == b, b == c))
}

fn main() -> ExitCode {
    type Criterion = (&'static str, Duration, fn() -> Outcome);
    let criteria: [Criterion; 7] = [
        ("mcc oracle equivalence", Duration::from_secs(5), mcc_oracle_equivalence),
        ("gradient checks", Duration::from_secs(10), gradient_checks),
        ("stratification", Duration::from_secs(5), stratification),
        ("svd correctness", Duration::from_secs(10), svd_correctness),
        ("end-to-end signal case", Duration::from_secs(120), signal_case),
        ("end-to-end noise case", Duration::from_secs(300), noise_case),
        ("determinism", Duration::from_secs(300), determinism),
    ];
    let mut failed = 0;
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let o = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let pass = o.pass && in_time;
        failed += usize::from(!pass);
        println!(
            "{} {name}: {} ({:.2}s, budget {}s{})",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if in_time { "" } else { ", over budget" }
        );
    }
    println!("acceptance: {} of 7 criteria passed", 7 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
