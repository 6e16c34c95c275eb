//! Feed-forward classifier: dense + ReLU hidden layers, softmax head.

use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::loss::{sample_loss, softmax_in_place, softmax_rows};
use crate::error::{Error, Result};
use crate::policy::{Observation, Policy};
use crate::rng::seeded_rng;
use crate::trajectory::{FeatureSpec, Source};

/// Hidden widths: a 40-unit first layer, then 80, 160 and 80.
pub const DEFAULT_HIDDEN: [usize; 4] = [40, 80, 160, 80];

/// One dense layer. `w` is `fan_in × fan_out`, so a batch goes through as
/// `x · w + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub feature_spec: FeatureSpec,
    pub dims: Vec<usize>,
    pub layers: Vec<Dense>,
}

/// Per-layer gradients, shaped like the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Dense>,
}

impl Gradients {
    pub fn norm(&self) -> f64 {
        self.layers
            .iter()
            .map(|l| l.w.iter().chain(l.b.iter()).map(|g| g * g).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }
}

impl MlpModel {
    /// He-uniform weights (`U(±sqrt(6 / fan_in))`), zero biases.
    pub fn new(feature_spec: FeatureSpec, hidden: &[usize], seed: u64) -> Self {
        let mut dims = Vec::with_capacity(hidden.len() + 2);
        dims.push(feature_spec.feature_dim());
        dims.extend_from_slice(hidden);
        dims.push(feature_spec.n_ues);
        let mut rng = seeded_rng(seed);
        let layers = dims
            .windows(2)
            .map(|d| {
                let limit = (6.0 / d[0] as f64).sqrt();
                let w = Array2::from_shape_simple_fn((d[0], d[1]), || rng.random_range(-limit..limit));
                Dense { w, b: Array1::zeros(d[1]) }
            })
            .collect();
        Self { feature_spec, dims, layers }
    }

    pub fn zeros(feature_spec: FeatureSpec, hidden: &[usize]) -> Self {
        let mut m = Self::new(feature_spec, hidden, 0);
        for l in &mut m.layers {
            l.w.fill(0.0);
            l.b.fill(0.0);
        }
        m
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn classes(&self) -> usize {
        *self.dims.last().expect("at least two dims")
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// Class probabilities for one feature vector.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::shape(format!("input has {} features, model expects {}", x.len(), self.input_dim())));
        }
        let mut a = Array1::from(x.to_vec());
        let last = self.layers.len() - 1;
        for (i, l) in self.layers.iter().enumerate() {
            let mut z = a.dot(&l.w) + &l.b;
            if i < last {
                z.mapv_inplace(|v| v.max(0.0));
            }
            a = z;
        }
        let mut out = a.to_vec();
        softmax_in_place(&mut out);
        Ok(out)
    }

    /// Class probabilities for a `batch × input_dim` matrix.
    pub fn forward_batch(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_batch(x)?;
        let mut a = x.to_owned();
        let last = self.layers.len() - 1;
        for (i, l) in self.layers.iter().enumerate() {
            a = a.dot(&l.w) + &l.b;
            if i < last {
                a.mapv_inplace(|v| v.max(0.0));
            }
        }
        softmax_rows(&mut a);
        Ok(a)
    }

    fn check_batch(&self, x: ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.input_dim() {
            return Err(Error::shape(format!("batch has {} features, model expects {}", x.ncols(), self.input_dim())));
        }
        Ok(())
    }

    /// Mean cross-entropy of the batch and its exact gradient.
    pub fn backward(&self, x: ArrayView2<f64>, labels: &[usize]) -> Result<(f64, Gradients)> {
        let (_, loss, grads) = self.backprop(x, labels)?;
        Ok((loss, grads))
    }

    /// Like [`backward`](Self::backward), also handing back the batch's
    /// predicted probabilities.
    pub(crate) fn backprop(&self, x: ArrayView2<f64>, labels: &[usize]) -> Result<(Array2<f64>, f64, Gradients)> {
        self.check_batch(x)?;
        if labels.len() != x.nrows() {
            return Err(Error::shape(format!("{} labels for {} samples", labels.len(), x.nrows())));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= self.classes()) {
            return Err(Error::data(format!("label {bad} out of range for {} classes", self.classes())));
        }
        let n = x.nrows() as f64;
        let last = self.layers.len() - 1;

        // acts[i] is the input of layer i; the last entry holds probabilities.
        let mut acts: Vec<Array2<f64>> = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_owned());
        for (i, l) in self.layers.iter().enumerate() {
            let mut z = acts[i].dot(&l.w) + &l.b;
            if i < last {
                z.mapv_inplace(|v| v.max(0.0));
            } else {
                softmax_rows(&mut z);
            }
            acts.push(z);
        }

        let probs = acts.pop().expect("output layer");
        let loss = probs
            .rows()
            .into_iter()
            .zip(labels)
            .map(|(row, &l)| sample_loss(row.as_slice().expect("standard layout"), l))
            .sum::<f64>()
            / n;

        // dL/dz for softmax + cross-entropy, averaged over the batch.
        let mut delta = probs.clone();
        for (mut row, &l) in delta.rows_mut().into_iter().zip(labels) {
            row[l] -= 1.0;
        }
        delta /= n;

        let mut grads: Vec<Dense> = Vec::with_capacity(self.layers.len());
        for i in (0..self.layers.len()).rev() {
            let input = &acts[i];
            let dw = input.t().dot(&delta);
            let db = delta.sum_axis(Axis(0));
            if i > 0 {
                let mut d_prev = delta.dot(&self.layers[i].w.t());
                // ReLU mask from the layer's (post-activation) input.
                ndarray::Zip::from(&mut d_prev).and(input).for_each(|d, &a| {
                    if a <= 0.0 {
                        *d = 0.0;
                    }
                });
                delta = d_prev;
            }
            grads.push(Dense { w: dw, b: db });
        }
        grads.reverse();
        Ok((probs, loss, Gradients { layers: grads }))
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax(&self.forward(x)?))
    }

    fn validate(&self) -> Result<()> {
        if self.dims.len() < 2 || self.layers.len() != self.dims.len() - 1 {
            return Err(Error::data(format!("{} dims do not chain {} layers", self.dims.len(), self.layers.len())));
        }
        if self.dims[0] != self.feature_spec.feature_dim() {
            return Err(Error::data(format!(
                "input dim {} does not match feature spec ({})",
                self.dims[0],
                self.feature_spec.feature_dim()
            )));
        }
        if self.classes() != self.feature_spec.n_ues {
            return Err(Error::data(format!("{} output classes for {} UEs", self.classes(), self.feature_spec.n_ues)));
        }
        for (i, l) in self.layers.iter().enumerate() {
            if l.w.dim() != (self.dims[i], self.dims[i + 1]) || l.b.len() != self.dims[i + 1] {
                return Err(Error::data(format!(
                    "layer {i}: weights {:?} / bias {} do not match dims {} -> {}",
                    l.w.dim(),
                    l.b.len(),
                    self.dims[i],
                    self.dims[i + 1]
                )));
            }
            if l.w.iter().chain(l.b.iter()).any(|v| !v.is_finite()) {
                return Err(Error::data(format!("layer {i}: non-finite parameter")));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&ModelFile::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(s).map_err(|e| Error::data(format!("model file: {e}")))?;
        file.try_into()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerFile {
    w: Vec<Vec<f64>>,
    b: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    feature_spec: FeatureSpec,
    dims: Vec<usize>,
    layers: Vec<LayerFile>,
}

impl From<&MlpModel> for ModelFile {
    fn from(m: &MlpModel) -> Self {
        Self {
            feature_spec: m.feature_spec,
            dims: m.dims.clone(),
            layers: m
                .layers
                .iter()
                .map(|l| LayerFile { w: l.w.rows().into_iter().map(|r| r.to_vec()).collect(), b: l.b.to_vec() })
                .collect(),
        }
    }
}

impl TryFrom<ModelFile> for MlpModel {
    type Error = Error;

    fn try_from(f: ModelFile) -> Result<Self> {
        if f.layers.len() + 1 != f.dims.len() {
            return Err(Error::data(format!("{} dims cannot chain {} layers", f.dims.len(), f.layers.len())));
        }
        let layers = f
            .layers
            .into_iter()
            .enumerate()
            .map(|(i, l)| {
                let (rows, cols) = (f.dims[i], f.dims[i + 1]);
                if l.w.len() != rows || l.w.iter().any(|r| r.len() != cols) {
                    return Err(Error::data(format!("layer {i}: weight matrix is not {rows} x {cols}")));
                }
                let w = Array2::from_shape_vec((rows, cols), l.w.into_iter().flatten().collect())
                    .map_err(|e| Error::data(format!("layer {i}: {e}")))?;
                Ok(Dense { w, b: Array1::from(l.b) })
            })
            .collect::<Result<Vec<_>>>()?;
        let m = MlpModel { feature_spec: f.feature_spec, dims: f.dims, layers };
        m.validate()?;
        Ok(m)
    }
}

/// The learned scheduler: encodes the observation, picks the most probable UE.
#[derive(Debug, Clone)]
pub struct MlpPolicy {
    model: MlpModel,
    buf: Vec<f64>,
}

impl MlpPolicy {
    pub fn new(model: MlpModel) -> Self {
        let buf = vec![0.0; model.input_dim()];
        Self { model, buf }
    }

    pub fn model(&self) -> &MlpModel {
        &self.model
    }
}

impl Policy for MlpPolicy {
    fn select(&mut self, obs: &Observation<'_>) -> usize {
        self.model
            .feature_spec
            .encode_into(obs.q, obs.active_ue, &mut self.buf)
            .expect("observation matches the model's feature spec");
        self.model.predict(&self.buf).expect("buffer sized to the model")
    }

    fn source(&self) -> Source {
        Source::Clone
    }
}
