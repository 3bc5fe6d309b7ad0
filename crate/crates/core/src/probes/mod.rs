//! Diagnostic probes: logistic regression (trained with damped Newton) and
//! one- or two-hidden-layer ReLU MLPs (trained with backtracking gradient
//! descent), an optional truncated SVD front end, and evaluation metrics.
//!
//! Predictions use a 0.5 probability threshold; a probability of exactly 0.5
//! predicts the positive class.

mod metrics;
pub mod objective;
mod optim;
mod serialize;
mod svd;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use metrics::{accuracy, mcc, ConfusionMatrix};
pub use serialize::{probe_from_json, probe_to_json};
pub use svd::{fit_svd, SvdFrontEnd};

use objective::{mlp_forward, sigmoid, unpack_mlp, LinearObjective, MlpObjective};

#[derive(Debug, Error)]
pub enum ProbeError {
    #[error("need at least {need} training examples, got {got}")]
    TooFewExamples { need: usize, got: usize },
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("invalid probe config: {0}")]
    InvalidConfig(String),
    #[error("rank {rank} exceeds min(n, d) = {max}")]
    RankTooLarge { rank: usize, max: usize },
    #[error("non-finite feature value")]
    NonFiniteInput,
    #[error("cannot compute a metric over zero examples")]
    EmptyEvaluation,
    #[error("model file: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeKind {
    Linear,
    Mlp1,
    Mlp2,
}

impl ProbeKind {
    pub const ALL: [ProbeKind; 3] = [ProbeKind::Linear, ProbeKind::Mlp1, ProbeKind::Mlp2];

    pub fn token(self) -> &'static str {
        match self {
            ProbeKind::Linear => "linear",
            ProbeKind::Mlp1 => "mlp1",
            ProbeKind::Mlp2 => "mlp2",
        }
    }

    fn hidden_layers(self) -> usize {
        match self {
            ProbeKind::Linear => 0,
            ProbeKind::Mlp1 => 1,
            ProbeKind::Mlp2 => 2,
        }
    }
}

impl fmt::Display for ProbeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for ProbeKind {
    type Err = ProbeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProbeKind::ALL
            .into_iter()
            .find(|k| k.token() == s)
            .ok_or_else(|| ProbeError::InvalidConfig(format!("unknown probe kind {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub kind: ProbeKind,
    /// Width of each hidden layer (MLPs only).
    pub hidden_size: usize,
    /// Strength of the `(l2/2)*|W|^2` penalty; biases are not penalised.
    pub l2: f64,
    /// Fit a truncated SVD on the training matrix and train on the top-k
    /// coordinates.
    pub svd_rank: Option<usize>,
    pub seed: u64,
    pub max_iters: usize,
    pub grad_tol: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            kind: ProbeKind::Linear,
            hidden_size: 768,
            l2: 0.0,
            svd_rank: None,
            seed: 0,
            max_iters: 1000,
            grad_tol: 1e-8,
        }
    }
}

impl ProbeConfig {
    /// Unregularised logistic regression.
    pub fn linear() -> ProbeConfig {
        ProbeConfig::default()
    }

    pub fn of_kind(kind: ProbeKind) -> ProbeConfig {
        ProbeConfig { kind, ..ProbeConfig::default() }
    }

    pub fn validate(&self) -> Result<(), ProbeError> {
        let bad = |m: String| Err(ProbeError::InvalidConfig(m));
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return bad(format!("l2 must be finite and >= 0, got {}", self.l2));
        }
        if self.kind != ProbeKind::Linear && self.hidden_size == 0 {
            return bad("hidden_size must be >= 1".into());
        }
        if self.svd_rank == Some(0) {
            return bad("svd_rank must be >= 1".into());
        }
        if !(self.grad_tol > 0.0) {
            return bad("grad_tol must be > 0".into());
        }
        Ok(())
    }
}

/// How training ended. A model is returned in every case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TrainStatus {
    Converged { iterations: usize },
    /// Stopped on `max_iters` or a stalled line search before reaching
    /// `grad_tol`.
    DidNotConverge { iterations: usize, grad_norm: f64 },
    /// Training labels held a single class; the model predicts it.
    Degenerate { positive: bool },
}

impl TrainStatus {
    pub fn is_degenerate(&self) -> bool {
        matches!(self, TrainStatus::Degenerate { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProbe {
    pub weights: Vec<f64>,
    pub bias: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    /// `out x in`
    pub weights: DMatrix<f64>,
    pub bias: DVector<f64>,
}

/// ReLU MLP ending in a single logit.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpProbe {
    pub layers: Vec<DenseLayer>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Head {
    Constant { positive: bool },
    Linear(LinearProbe),
    Mlp(MlpProbe),
}

/// A trained probe.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub config: ProbeConfig,
    pub input_dim: usize,
    pub svd: Option<SvdFrontEnd>,
    pub head: Head,
    pub status: TrainStatus,
    /// Training loss after each accepted optimiser step.
    pub loss_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub probabilities: Vec<f64>,
    pub labels: Vec<bool>,
}

fn check_finite(x: &DMatrix<f64>) -> Result<(), ProbeError> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(ProbeError::NonFiniteInput)
    }
}

/// He-uniform weights, zero biases.
fn init_mlp(shapes: &[(usize, usize)], seed: u64) -> Vec<f64> {
    let mut rng = crate::rng::stream(seed, 0x004d_4c50);
    let mut params = Vec::with_capacity(objective::mlp_num_params(shapes));
    for &(out, fan_in) in shapes {
        let bound = (6.0 / fan_in as f64).sqrt();
        params.extend((0..out * fan_in).map(|_| rng.random_range(-bound..bound)));
        params.extend(std::iter::repeat_n(0.0, out));
    }
    params
}

/// Train a probe on `x` (n x d) with binary targets `y`.
pub fn train(config: &ProbeConfig, x: &DMatrix<f64>, y: &[bool]) -> Result<Probe, ProbeError> {
    config.validate()?;
    let (n, d) = x.shape();
    if n != y.len() {
        return Err(ProbeError::DimMismatch(format!("{n} rows but {} labels", y.len())));
    }
    if n < 2 {
        return Err(ProbeError::TooFewExamples { need: 2, got: n });
    }
    if d == 0 {
        return Err(ProbeError::DimMismatch("zero feature columns".into()));
    }
    check_finite(x)?;
    if let Some(k) = config.svd_rank {
        if k > d {
            return Err(ProbeError::RankTooLarge { rank: k, max: d });
        }
    }

    let positives = y.iter().filter(|t| **t).count();
    if positives == 0 || positives == n {
        let positive = positives == n;
        return Ok(Probe {
            config: config.clone(),
            input_dim: d,
            svd: None,
            head: Head::Constant { positive },
            status: TrainStatus::Degenerate { positive },
            loss_trace: Vec::new(),
        });
    }

    let svd = config.svd_rank.map(|k| fit_svd(x, k)).transpose()?;
    let projected;
    let features = match &svd {
        Some(s) => {
            projected = s.project(x);
            &projected
        }
        None => x,
    };

    let (head, outcome) = match config.kind {
        ProbeKind::Linear => {
            let obj = LinearObjective::new(features, y, config.l2);
            let out = optim::newton(&obj, config.max_iters, config.grad_tol);
            let k = features.ncols();
            let head = Head::Linear(LinearProbe { weights: out.params[..k].to_vec(), bias: out.params[k] });
            (head, out)
        }
        kind => {
            let obj = MlpObjective::new(features, y, config.l2, config.hidden_size, kind.hidden_layers());
            let init = init_mlp(obj.shapes(), config.seed);
            let out = optim::gradient_descent(&obj, init, config.max_iters, config.grad_tol);
            let layers = unpack_mlp(obj.shapes(), &out.params)
                .into_iter()
                .map(|(weights, bias)| DenseLayer { weights, bias })
                .collect();
            (Head::Mlp(MlpProbe { layers }), out)
        }
    };
    let status = if outcome.converged {
        TrainStatus::Converged { iterations: outcome.iterations }
    } else {
        log::debug!(
            "{} probe stopped after {} iterations with |grad|_inf = {:.3e}",
            config.kind,
            outcome.iterations,
            outcome.grad_norm
        );
        TrainStatus::DidNotConverge { iterations: outcome.iterations, grad_norm: outcome.grad_norm }
    };
    Ok(Probe { config: config.clone(), input_dim: d, svd, head, status, loss_trace: outcome.trace })
}

impl Probe {
    /// Raw logits; `None` for a constant model.
    fn logits(&self, x: &DMatrix<f64>) -> Option<Vec<f64>> {
        let projected;
        let features = match &self.svd {
            Some(s) => {
                projected = s.project(x);
                &projected
            }
            None => x,
        };
        match &self.head {
            Head::Constant { .. } => None,
            Head::Linear(p) => {
                let w = DVector::from_column_slice(&p.weights);
                Some((features * w).iter().map(|z| z + p.bias).collect())
            }
            Head::Mlp(m) => {
                let layers: Vec<_> = m.layers.iter().map(|l| (l.weights.clone(), l.bias.clone())).collect();
                let (_, pre) = mlp_forward(&layers, features);
                Some(pre.last().unwrap().iter().copied().collect())
            }
        }
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Result<Prediction, ProbeError> {
        predict(self, x)
    }
}

/// Probabilities and labels (`p >= 0.5` is positive) for the rows of `x`.
pub fn predict(model: &Probe, x: &DMatrix<f64>) -> Result<Prediction, ProbeError> {
    if x.ncols() != model.input_dim {
        return Err(ProbeError::DimMismatch(format!(
            "model expects {} features, got {}",
            model.input_dim,
            x.ncols()
        )));
    }
    let probabilities: Vec<f64> = match (model.logits(x), &model.head) {
        (Some(z), _) => z.into_iter().map(sigmoid).collect(),
        (None, Head::Constant { positive }) => vec![if *positive { 1.0 } else { 0.0 }; x.nrows()],
        (None, _) => unreachable!("only constant heads have no logits"),
    };
    let labels = probabilities.iter().map(|p| *p >= 0.5).collect();
    Ok(Prediction { probabilities, labels })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xor() -> (DMatrix<f64>, Vec<bool>) {
        let x = DMatrix::from_row_slice(4, 2, &[0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0]);
        (x, vec![false, true, true, false])
    }

    #[test]
    fn zero_model_ties_to_positive() {
        let probe = Probe {
            config: ProbeConfig::linear(),
            input_dim: 3,
            svd: None,
            head: Head::Linear(LinearProbe { weights: vec![0.0; 3], bias: 0.0 }),
            status: TrainStatus::Converged { iterations: 0 },
            loss_trace: vec![],
        };
        let x = DMatrix::from_row_slice(2, 3, &[1.0, -5.0, 2.0, 0.0, 0.0, 9.0]);
        let p = predict(&probe, &x).unwrap();
        assert_eq!(p.probabilities, vec![0.5, 0.5]);
        assert_eq!(p.labels, vec![true, true]);
        assert!(matches!(predict(&probe, &DMatrix::zeros(1, 2)), Err(ProbeError::DimMismatch(_))));
    }

    #[test]
    fn single_class_training_gives_constant_model() {
        let x = DMatrix::from_row_slice(3, 1, &[1.0, 2.0, 3.0]);
        let probe = train(&ProbeConfig::linear(), &x, &[true, true, true]).unwrap();
        assert!(probe.status.is_degenerate());
        let p = predict(&probe, &DMatrix::from_row_slice(2, 1, &[-9.0, 9.0])).unwrap();
        assert_eq!(p.labels, vec![true, true]);
    }

    #[test]
    fn linear_cannot_shatter_xor() {
        let (x, y) = xor();
        let probe = train(&ProbeConfig::linear(), &x, &y).unwrap();
        let p = predict(&probe, &x).unwrap();
        let correct = p.labels.iter().zip(&y).filter(|(a, b)| a == b).count();
        assert!(correct as f64 / 4.0 <= 0.75);
    }

    #[test]
    fn mlp_fits_xor() {
        let (x, y) = xor();
        let mut config = ProbeConfig::of_kind(ProbeKind::Mlp1);
        config.hidden_size = 8;
        config.max_iters = 3000;
        config.seed = 1;
        let probe = train(&config, &x, &y).unwrap();
        assert_eq!(predict(&probe, &x).unwrap().labels, y);
    }

    #[test]
    fn config_validation() {
        let x = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let y = [false, true];
        let mut c = ProbeConfig::linear();
        c.l2 = -1.0;
        assert!(matches!(train(&c, &x, &y), Err(ProbeError::InvalidConfig(_))));
        let mut c = ProbeConfig::linear();
        c.svd_rank = Some(2);
        assert!(matches!(train(&c, &x, &y), Err(ProbeError::RankTooLarge { .. })));
        assert!(matches!(
            train(&ProbeConfig::linear(), &DMatrix::zeros(1, 1), &[true]),
            Err(ProbeError::TooFewExamples { .. })
        ));
        assert!("mlp3".parse::<ProbeKind>().is_err());
    }
}
