use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputTransform {
    Softplus,
}

/// Fully connected network with ReLU hidden layers and a softplus output.
/// `weights[k]` is row-major `layer_sizes[k+1] × layer_sizes[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layer_sizes: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub activation: Activation,
    pub output_transform: OutputTransform,
}

/// Same shapes as the model's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

/// Dot product with eight independent partial sums.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    let mut acc = [0.0; 8];
    for (x, y) in ca.zip(cb) {
        for l in 0..8 {
            acc[l] += x[l] * y[l];
        }
    }
    acc.iter().sum::<f64>() + tail
}

pub fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl Gradients {
    pub fn zeros_like(model: &MlpModel) -> Self {
        Gradients {
            weights: model.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: model.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    /// Gradient tensors in the order of [`MlpModel::tensors_mut`].
    pub(crate) fn tensors(&self) -> Vec<&[f64]> {
        self.weights
            .iter()
            .zip(&self.biases)
            .flat_map(|(w, b)| [w.as_slice(), b.as_slice()])
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights
            .iter()
            .zip(&self.biases)
            .flat_map(|(w, b)| w.iter().chain(b.iter()).copied())
    }
}

impl MlpModel {
    pub fn zeros(layer_sizes: &[usize]) -> Result<Self> {
        if layer_sizes.len() < 2 || layer_sizes.iter().any(|&n| n == 0) || *layer_sizes.last().unwrap() != 1 {
            return Err(Error::Config(format!("invalid layer sizes {layer_sizes:?}")));
        }
        let pairs = layer_sizes.windows(2);
        Ok(MlpModel {
            layer_sizes: layer_sizes.to_vec(),
            weights: pairs.clone().map(|p| vec![0.0; p[0] * p[1]]).collect(),
            biases: pairs.map(|p| vec![0.0; p[1]]).collect(),
            activation: Activation::Relu,
            output_transform: OutputTransform::Softplus,
        })
    }

    /// He-normal weights, zero biases.
    pub fn init(layer_sizes: &[usize], seed_value: u64) -> Result<Self> {
        let mut m = Self::zeros(layer_sizes)?;
        let mut rng = seed::rng(seed_value, &[0x1217]);
        for (k, w) in m.weights.iter_mut().enumerate() {
            let std = (2.0 / layer_sizes[k] as f64).sqrt();
            for x in w.iter_mut() {
                *x = std * seed::gaussian(&mut rng);
            }
        }
        Ok(m)
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn n_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>() + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::Dimension { expected: self.input_dim(), got: x.len() });
        }
        Ok(())
    }

    /// Pre-activation of every layer for one input.
    fn forward_trace(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut zs: Vec<Vec<f64>> = Vec::with_capacity(self.n_layers());
        let mut act: Vec<f64> = Vec::new();
        for k in 0..self.n_layers() {
            let (n_in, n_out) = (self.layer_sizes[k], self.layer_sizes[k + 1]);
            let input: &[f64] = if k == 0 {
                x
            } else {
                act.clear();
                act.extend(zs[k - 1].iter().map(|v| v.max(0.0)));
                &act
            };
            let w = &self.weights[k];
            let z: Vec<f64> = (0..n_out)
                .map(|o| self.biases[k][o] + dot(&w[o * n_in..(o + 1) * n_in], input))
                .collect();
            zs.push(z);
        }
        zs
    }

    /// Output pre-activation (before softplus).
    pub fn forward_raw(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        Ok(self.forward_trace(x).last().unwrap()[0])
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        self.forward_raw(x).map(softplus)
    }

    /// Adds the gradient of `scale × (ŷ − y)²` for one sample to `g` and
    /// returns the squared error.
    fn accumulate(&self, x: &[f64], y: f64, scale: f64, g: &mut Gradients) -> f64 {
        let zs = self.forward_trace(x);
        let z_out = zs.last().unwrap()[0];
        let err = softplus(z_out) - y;
        let mut delta = vec![2.0 * err * sigmoid(z_out) * scale];
        for k in (0..self.n_layers()).rev() {
            let n_in = self.layer_sizes[k];
            let gw = &mut g.weights[k];
            for (o, &d) in delta.iter().enumerate() {
                g.biases[k][o] += d;
                if d == 0.0 {
                    continue;
                }
                let row = &mut gw[o * n_in..(o + 1) * n_in];
                if k == 0 {
                    for (gi, &xi) in row.iter_mut().zip(x) {
                        *gi += d * xi;
                    }
                } else {
                    for (gi, &zi) in row.iter_mut().zip(&zs[k - 1]) {
                        *gi += d * zi.max(0.0);
                    }
                }
            }
            if k > 0 {
                let w = &self.weights[k];
                let prev = &zs[k - 1];
                let mut next = vec![0.0; n_in];
                for (o, &d) in delta.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    for (i, acc) in next.iter_mut().enumerate() {
                        *acc += w[o * n_in + i] * d;
                    }
                }
                for (i, v) in next.iter_mut().enumerate() {
                    if prev[i] <= 0.0 {
                        *v = 0.0;
                    }
                }
                delta = next;
            }
        }
        err * err
    }

    /// Mean squared error over a batch.
    pub fn mse(&self, xs: &[Vec<f64>], ys: &[f64]) -> Result<f64> {
        if xs.len() != ys.len() {
            return Err(Error::Misaligned(xs.len(), ys.len()));
        }
        if xs.is_empty() {
            return Ok(0.0);
        }
        let mut s = 0.0;
        for (x, &y) in xs.iter().zip(ys) {
            let d = self.forward(x)? - y;
            s += d * d;
        }
        Ok(s / xs.len() as f64)
    }

    /// Writes the checkpoint text: a `layers:` header then, per layer, one line
    /// per weight row followed by one bias line.
    pub fn to_text(&self) -> String {
        let mut s = String::from("layers:");
        for n in &self.layer_sizes {
            let _ = write!(s, " {n}");
        }
        s.push('\n');
        for k in 0..self.n_layers() {
            let n_in = self.layer_sizes[k];
            let _ = writeln!(s, "# layer {k} weights {}x{n_in}", self.layer_sizes[k + 1]);
            for row in self.weights[k].chunks(n_in) {
                push_row(&mut s, row);
            }
            let _ = writeln!(s, "# layer {k} biases");
            push_row(&mut s, &self.biases[k]);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<MlpModel> {
        let bad = |d: String| Error::parse("checkpoint", d);
        let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
        let sizes: Vec<usize> = header
            .strip_prefix("layers:")
            .ok_or_else(|| bad(format!("bad header `{header}`")))?
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| bad(format!("layer sizes: {e}")))?;
        let mut m = MlpModel::zeros(&sizes).map_err(|e| bad(e.to_string()))?;
        let mut read_row = |n: usize| -> Result<Vec<f64>> {
            let line = lines.next().ok_or_else(|| bad("truncated".into()))?;
            let v: Vec<f64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| bad(format!("{e}")))?;
            if v.len() != n || v.iter().any(|x| !x.is_finite()) {
                return Err(bad(format!("expected {n} finite values, got `{line}`")));
            }
            Ok(v)
        };
        for k in 0..m.n_layers() {
            let (n_in, n_out) = (sizes[k], sizes[k + 1]);
            let mut w = Vec::with_capacity(n_in * n_out);
            for _ in 0..n_out {
                w.extend(read_row(n_in)?);
            }
            m.weights[k] = w;
            m.biases[k] = read_row(n_out)?;
        }
        if lines.next().is_some() {
            return Err(bad("trailing data".into()));
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<MlpModel> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        MlpModel::from_text(&text)
    }

    /// Rewrites the first layer so that the model takes raw inputs where it was
    /// trained on `(x − mean) / std`.
    pub fn fold_standardization(&mut self, mean: &[f64], std: &[f64]) {
        let n_in = self.layer_sizes[0];
        let (w, b) = (&mut self.weights[0], &mut self.biases[0]);
        for (o, bo) in b.iter_mut().enumerate() {
            for i in 0..n_in {
                let wi = &mut w[o * n_in + i];
                *wi /= std[i];
                *bo -= *wi * mean[i];
            }
        }
    }

    /// Parameters in the same order as [`Gradients::iter`].
    /// Parameter tensors in the order w0, b0, w1, b1, ...
    pub(crate) fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        self.weights
            .iter_mut()
            .zip(self.biases.iter_mut())
            .flat_map(|(w, b)| [w.as_mut_slice(), b.as_mut_slice()])
            .collect()
    }
}

fn push_row(s: &mut String, row: &[f64]) {
    for (i, v) in row.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{v:.16e}");
    }
    s.push('\n');
}

/// Gradient of the batch mean squared error with respect to every parameter.
pub fn mlp_gradients<X: AsRef<[f64]>>(model: &MlpModel, xs: &[X], ys: &[f64]) -> Result<Gradients> {
    let mut g = Gradients::zeros_like(model);
    batch_gradients(model, xs, ys, &mut g)?;
    Ok(g)
}

/// Overwrites `g` with the batch gradient and returns the batch MSE.
pub(crate) fn batch_gradients<X: AsRef<[f64]>>(
    model: &MlpModel,
    xs: &[X],
    ys: &[f64],
    g: &mut Gradients,
) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::Misaligned(xs.len(), ys.len()));
    }
    if xs.is_empty() {
        return Err(Error::Config("gradient of an empty batch".into()));
    }
    for x in xs {
        model.check_input(x.as_ref())?;
    }
    for v in g.weights.iter_mut().chain(g.biases.iter_mut()) {
        v.iter_mut().for_each(|x| *x = 0.0);
    }
    let scale = 1.0 / xs.len() as f64;
    let mut sse = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        sse += model.accumulate(x.as_ref(), y, scale, g);
    }
    Ok(sse * scale)
}
