//! Penalised mean binary log-loss for the probe families, with analytic
//! gradients (and the Hessian for the linear case).
//!
//! Parameters are flat vectors. Linear: `[w_1..w_d, b]`. MLP: for each
//! dense layer, the `out x in` weight matrix row-major, then its `out`
//! biases. Only weights are penalised: `loss + (l2/2) * |weights|^2`.

use nalgebra::{DMatrix, DVector};

/// `ln(1 + e^z)` without overflow.
pub(crate) fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Differentiable training objective over a flat parameter vector.
pub trait Objective {
    fn num_params(&self) -> usize;
    fn loss(&self, params: &[f64]) -> f64;
    fn loss_grad(&self, params: &[f64]) -> (f64, Vec<f64>);
}

fn logloss(logits: impl Iterator<Item = f64>, y: &[f64]) -> f64 {
    let n = y.len() as f64;
    logits.zip(y).map(|(z, t)| softplus(z) - t * z).sum::<f64>() / n
}

pub struct LinearObjective<'a> {
    x: &'a DMatrix<f64>,
    y: Vec<f64>,
    l2: f64,
}

impl<'a> LinearObjective<'a> {
    pub fn new(x: &'a DMatrix<f64>, y: &[bool], l2: f64) -> LinearObjective<'a> {
        LinearObjective { x, y: y.iter().map(|t| f64::from(u8::from(*t))).collect(), l2 }
    }

    fn logits(&self, params: &[f64]) -> DVector<f64> {
        let d = self.x.ncols();
        let w = DVector::from_column_slice(&params[..d]);
        let mut z = self.x * w;
        z.add_scalar_mut(params[d]);
        z
    }

    /// Hessian of the penalised loss, `(d+1) x (d+1)`.
    pub fn hessian(&self, params: &[f64]) -> DMatrix<f64> {
        let (n, d) = self.x.shape();
        let z = self.logits(params);
        let mut xt = DMatrix::zeros(n, d + 1);
        xt.view_mut((0, 0), (n, d)).copy_from(self.x);
        xt.column_mut(d).fill(1.0);
        let mut weighted = xt.clone();
        for (i, zi) in z.iter().enumerate() {
            let p = sigmoid(*zi);
            weighted.row_mut(i).scale_mut(p * (1.0 - p) / n as f64);
        }
        let mut h = xt.transpose() * weighted;
        for j in 0..d {
            h[(j, j)] += self.l2;
        }
        h
    }
}

impl Objective for LinearObjective<'_> {
    fn num_params(&self) -> usize {
        self.x.ncols() + 1
    }

    fn loss(&self, params: &[f64]) -> f64 {
        let d = self.x.ncols();
        let penalty = 0.5 * self.l2 * params[..d].iter().map(|w| w * w).sum::<f64>();
        logloss(self.logits(params).iter().copied(), &self.y) + penalty
    }

    fn loss_grad(&self, params: &[f64]) -> (f64, Vec<f64>) {
        let (n, d) = self.x.shape();
        let z = self.logits(params);
        let loss = self.loss(params);
        let residual =
            DVector::from_iterator(n, z.iter().zip(&self.y).map(|(zi, t)| (sigmoid(*zi) - t) / n as f64));
        let gw = self.x.tr_mul(&residual);
        let mut grad: Vec<f64> = gw.iter().zip(&params[..d]).map(|(g, w)| g + self.l2 * w).collect();
        grad.push(residual.sum());
        (loss, grad)
    }
}

/// Shapes `(out, in)` of the dense layers of an MLP with `hidden` ReLU
/// layers of width `width` over `input` features.
pub fn mlp_shapes(input: usize, width: usize, hidden: usize) -> Vec<(usize, usize)> {
    let mut shapes = Vec::with_capacity(hidden + 1);
    let mut fan_in = input;
    for _ in 0..hidden {
        shapes.push((width, fan_in));
        fan_in = width;
    }
    shapes.push((1, fan_in));
    shapes
}

pub fn mlp_num_params(shapes: &[(usize, usize)]) -> usize {
    shapes.iter().map(|(o, i)| o * i + o).sum()
}

/// Unpack flat MLP parameters into `(W, b)` per layer.
pub(crate) fn unpack_mlp(shapes: &[(usize, usize)], params: &[f64]) -> Vec<(DMatrix<f64>, DVector<f64>)> {
    let mut at = 0;
    shapes
        .iter()
        .map(|&(o, i)| {
            let w = DMatrix::from_row_slice(o, i, &params[at..at + o * i]);
            at += o * i;
            let b = DVector::from_column_slice(&params[at..at + o]);
            at += o;
            (w, b)
        })
        .collect()
}

/// Forward pass; returns the activations entering each layer and the
/// pre-activations of each layer. The last pre-activation is the logit
/// column.
pub(crate) fn mlp_forward(
    layers: &[(DMatrix<f64>, DVector<f64>)],
    x: &DMatrix<f64>,
) -> (Vec<DMatrix<f64>>, Vec<DMatrix<f64>>) {
    let mut inputs = Vec::with_capacity(layers.len());
    let mut pre = Vec::with_capacity(layers.len());
    let mut a = x.clone();
    for (k, (w, b)) in layers.iter().enumerate() {
        let mut z = &a * w.transpose();
        for mut row in z.row_iter_mut() {
            row += b.transpose();
        }
        inputs.push(a);
        a = if k + 1 < layers.len() { z.map(|v| v.max(0.0)) } else { z.clone() };
        pre.push(z);
    }
    (inputs, pre)
}

pub struct MlpObjective<'a> {
    x: &'a DMatrix<f64>,
    y: Vec<f64>,
    l2: f64,
    shapes: Vec<(usize, usize)>,
}

impl<'a> MlpObjective<'a> {
    pub fn new(x: &'a DMatrix<f64>, y: &[bool], l2: f64, width: usize, hidden: usize) -> MlpObjective<'a> {
        MlpObjective {
            x,
            y: y.iter().map(|t| f64::from(u8::from(*t))).collect(),
            l2,
            shapes: mlp_shapes(x.ncols(), width, hidden),
        }
    }

    pub fn shapes(&self) -> &[(usize, usize)] {
        &self.shapes
    }

    fn penalty(&self, layers: &[(DMatrix<f64>, DVector<f64>)]) -> f64 {
        0.5 * self.l2 * layers.iter().map(|(w, _)| w.norm_squared()).sum::<f64>()
    }
}

impl Objective for MlpObjective<'_> {
    fn num_params(&self) -> usize {
        mlp_num_params(&self.shapes)
    }

    fn loss(&self, params: &[f64]) -> f64 {
        let layers = unpack_mlp(&self.shapes, params);
        let (_, pre) = mlp_forward(&layers, self.x);
        logloss(pre.last().unwrap().iter().copied(), &self.y) + self.penalty(&layers)
    }

    fn loss_grad(&self, params: &[f64]) -> (f64, Vec<f64>) {
        let n = self.x.nrows() as f64;
        let layers = unpack_mlp(&self.shapes, params);
        let (inputs, pre) = mlp_forward(&layers, self.x);
        let logits = pre.last().unwrap();
        let loss = logloss(logits.iter().copied(), &self.y) + self.penalty(&layers);

        // dL/dz for the output column
        let mut delta = DMatrix::from_iterator(
            logits.nrows(),
            1,
            logits.iter().zip(&self.y).map(|(z, t)| (sigmoid(*z) - t) / n),
        );
        let mut grads: Vec<(DMatrix<f64>, DVector<f64>)> = Vec::with_capacity(layers.len());
        for k in (0..layers.len()).rev() {
            let (w, _) = &layers[k];
            let gw = delta.transpose() * &inputs[k] + w * self.l2;
            let gb = DVector::from_iterator(delta.ncols(), delta.column_iter().map(|c| c.sum()));
            if k > 0 {
                let mut back = &delta * w;
                back.zip_apply(&pre[k - 1], |g, z| {
                    if z <= 0.0 {
                        *g = 0.0;
                    }
                });
                delta = back;
            }
            grads.push((gw, gb));
        }
        grads.reverse();
        let mut flat = Vec::with_capacity(self.num_params());
        for (gw, gb) in grads {
            for r in 0..gw.nrows() {
                flat.extend(gw.row(r).iter());
            }
            flat.extend(gb.iter());
        }
        (loss, flat)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_link_functions() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
        assert!((softplus(0.0) - 2f64.ln()).abs() < 1e-15);
        assert!((softplus(800.0) - 800.0).abs() < 1e-12);
        assert!(softplus(-800.0) >= 0.0);
    }

    #[test]
    fn linear_loss_at_zero_is_ln2() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, -1.0, 0.5, 0.0, 3.0]);
        let obj = LinearObjective::new(&x, &[true, false, true], 0.3);
        assert!((obj.loss(&[0.0; 3]) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn mlp_layout() {
        let shapes = mlp_shapes(5, 4, 2);
        assert_eq!(shapes, vec![(4, 5), (4, 4), (1, 4)]);
        assert_eq!(mlp_num_params(&shapes), 24 + 20 + 5);
    }
}
