//! JSON model files. Parameter blobs are little-endian f64 arrays encoded
//! as standard base64.

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{DenseLayer, Head, LinearProbe, MlpProbe, Probe, ProbeConfig, ProbeError, SvdFrontEnd, TrainStatus};

const FORMAT: &str = "altprobe-probe";

#[derive(Serialize, Deserialize)]
struct ProbeFile {
    format: String,
    version: u32,
    config: ProbeConfig,
    status: TrainStatus,
    input_dim: usize,
    svd: Option<SvdBlob>,
    head: HeadBlob,
}

#[derive(Serialize, Deserialize)]
struct SvdBlob {
    rank: usize,
    dim: usize,
    basis: String,
    singular_values: String,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum HeadBlob {
    Constant { positive: bool },
    Linear { params: String },
    /// `(out, in)` per layer; `params` holds row-major weights then biases,
    /// layer by layer.
    Mlp { shapes: Vec<(usize, usize)>, params: String },
}

fn encode(values: impl IntoIterator<Item = f64>) -> String {
    let bytes: Vec<u8> = values.into_iter().flat_map(f64::to_le_bytes).collect();
    STANDARD.encode(bytes)
}

fn decode(blob: &str) -> Result<Vec<f64>, ProbeError> {
    let bytes = STANDARD.decode(blob).map_err(|e| ProbeError::Format(e.to_string()))?;
    if bytes.len() % 8 != 0 {
        return Err(ProbeError::Format("blob length is not a multiple of 8".into()));
    }
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}

fn row_major(m: &DMatrix<f64>) -> impl Iterator<Item = f64> + '_ {
    (0..m.nrows()).flat_map(move |r| (0..m.ncols()).map(move |c| m[(r, c)]))
}

pub fn probe_to_json(probe: &Probe) -> String {
    let svd = probe.svd.as_ref().map(|s| SvdBlob {
        rank: s.rank(),
        dim: s.input_dim(),
        basis: encode(row_major(&s.basis)),
        singular_values: encode(s.singular_values.iter().copied()),
    });
    let head = match &probe.head {
        Head::Constant { positive } => HeadBlob::Constant { positive: *positive },
        Head::Linear(p) => HeadBlob::Linear { params: encode(p.weights.iter().copied().chain([p.bias])) },
        Head::Mlp(m) => HeadBlob::Mlp {
            shapes: m.layers.iter().map(|l| l.weights.shape()).collect(),
            params: encode(
                m.layers
                    .iter()
                    .flat_map(|l| row_major(&l.weights).chain(l.bias.iter().copied()).collect::<Vec<_>>()),
            ),
        },
    };
    let file = ProbeFile {
        format: FORMAT.into(),
        version: 1,
        config: probe.config.clone(),
        status: probe.status,
        input_dim: probe.input_dim,
        svd,
        head,
    };
    serde_json::to_string_pretty(&file).expect("probe file serializes")
}

pub fn probe_from_json(text: &str) -> Result<Probe, ProbeError> {
    let file: ProbeFile = serde_json::from_str(text).map_err(|e| ProbeError::Format(e.to_string()))?;
    if file.format != FORMAT || file.version != 1 {
        return Err(ProbeError::Format(format!("unsupported {} v{}", file.format, file.version)));
    }
    let svd = match file.svd {
        None => None,
        Some(s) => {
            let basis = decode(&s.basis)?;
            if basis.len() != s.rank * s.dim {
                return Err(ProbeError::Format("svd basis size".into()));
            }
            Some(SvdFrontEnd {
                basis: DMatrix::from_row_slice(s.rank, s.dim, &basis),
                singular_values: decode(&s.singular_values)?,
            })
        }
    };
    let head = match file.head {
        HeadBlob::Constant { positive } => Head::Constant { positive },
        HeadBlob::Linear { params } => {
            let mut p = decode(&params)?;
            let bias = p.pop().ok_or_else(|| ProbeError::Format("empty linear blob".into()))?;
            Head::Linear(LinearProbe { weights: p, bias })
        }
        HeadBlob::Mlp { shapes, params } => {
            let p = decode(&params)?;
            if p.len() != super::objective::mlp_num_params(&shapes) {
                return Err(ProbeError::Format("mlp parameter count".into()));
            }
            let mut at = 0;
            let layers = shapes
                .iter()
                .map(|&(o, i)| {
                    let weights = DMatrix::from_row_slice(o, i, &p[at..at + o * i]);
                    at += o * i;
                    let bias = DVector::from_column_slice(&p[at..at + o]);
                    at += o;
                    DenseLayer { weights, bias }
                })
                .collect();
            Head::Mlp(MlpProbe { layers })
        }
    };
    Ok(Probe {
        config: file.config,
        input_dim: file.input_dim,
        svd,
        head,
        status: file.status,
        loss_trace: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probes::{predict, train, ProbeKind};

    #[test]
    fn trained_models_round_trip() {
        let x = DMatrix::from_row_slice(6, 3, &[
            0.1, 1.0, -0.3, 0.9, -0.2, 0.4, -1.2, 0.3, 0.8, 0.5, 0.5, 0.5, -0.7, -0.1, 0.2, 1.1, 0.6, -0.9,
        ]);
        let y = [true, false, true, false, true, false];
        for kind in ProbeKind::ALL {
            let mut c = ProbeConfig::of_kind(kind);
            c.hidden_size = 4;
            c.l2 = 0.1;
            c.svd_rank = Some(2);
            c.max_iters = 50;
            let probe = train(&c, &x, &y).unwrap();
            let back = probe_from_json(&probe_to_json(&probe)).unwrap();
            assert_eq!(back.head, probe.head);
            assert_eq!(back.svd, probe.svd);
            assert_eq!(back.config, probe.config);
            assert_eq!(predict(&back, &x).unwrap(), predict(&probe, &x).unwrap());
        }
        assert!(probe_from_json("{}").is_err());
    }
}
