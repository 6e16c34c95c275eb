//! Mini-batch Adam training of [`MlpModel`] on recorded expert decisions.

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamMoments, AdamParams};
use super::loss::sample_loss;
use super::model::{argmax, MlpModel, DEFAULT_HIDDEN};
use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::rng::seeded_rng;
use crate::trajectory::{FeatureSpec, TrajectoryRecord};

/// Encoded states and the expert's selections.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Array2<f64>,
    pub labels: Vec<usize>,
}

impl Dataset {
    pub fn new(x: Array2<f64>, labels: Vec<usize>) -> Result<Self> {
        if x.nrows() != labels.len() {
            return Err(Error::shape(format!("{} rows for {} labels", x.nrows(), labels.len())));
        }
        Ok(Self { x, labels })
    }

    pub fn from_records(records: &[TrajectoryRecord], spec: &FeatureSpec) -> Result<Self> {
        let dim = spec.feature_dim();
        let mut x = Array2::zeros((records.len(), dim));
        let mut labels = Vec::with_capacity(records.len());
        for (i, (r, mut row)) in records.iter().zip(x.rows_mut()).enumerate() {
            if r.a1 >= spec.n_ues {
                return Err(Error::data(format!("record {i}: a1 = {} with {} UEs", r.a1, spec.n_ues)));
            }
            spec.encode_into(&r.q, r.active_ue, row.as_slice_mut().expect("standard layout"))
                .map_err(|e| Error::data(format!("record {i}: {e}")))?;
            labels.push(r.a1);
        }
        Ok(Self { x, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.x.view()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr0: f64,
    pub adam: AdamParams,
    pub hidden: Vec<usize>,
    pub seed: u64,
    /// Append a one-hot of the served UE to the queue features. The expert's
    /// hysteresis makes its choice depend on who is being served, so without
    /// this the labels are not a function of the input.
    pub active_ue_onehot: bool,
    /// Share of records used for fitting; the rest is validation.
    pub train_ratio: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 40,
            batch_size: 256,
            lr0: 1e-3,
            adam: AdamParams::default(),
            hidden: DEFAULT_HIDDEN.to_vec(),
            seed: 0,
            active_ue_onehot: true,
            train_ratio: 0.8,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::config("epochs must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size must be at least 1"));
        }
        if !(self.lr0 > 0.0 && self.lr0.is_finite()) {
            return Err(Error::config(format!("lr0 must be positive, got {}", self.lr0)));
        }
        if self.hidden.contains(&0) {
            return Err(Error::config("hidden layer widths must be positive"));
        }
        if !(self.train_ratio > 0.0 && self.train_ratio < 1.0) {
            return Err(Error::config(format!("train_ratio must be in (0, 1), got {}", self.train_ratio)));
        }
        Ok(())
    }

    pub fn feature_spec(&self, sim: &SimConfig) -> FeatureSpec {
        FeatureSpec::new(sim.n_ues, sim.queue_limit).with_active_ue(self.active_ue_onehot)
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Time-based decay: `lr0 / (1 + (lr0 / epochs) · epoch)`.
    pub fn learning_rate(&self, epoch: usize) -> f64 {
        self.lr0 / (1.0 + (self.lr0 / self.epochs as f64) * epoch as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub lr: f64,
    /// Running mean over the epoch's batches, measured before each update.
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_loss: Option<f64>,
    pub val_acc: Option<f64>,
}

/// Writes `epoch,train_loss,train_acc,val_loss,val_acc` rows; validation
/// cells are empty when no validation set was given.
pub fn write_history<W: std::io::Write>(history: &[EpochStats], out: W) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        epoch: usize,
        train_loss: f64,
        train_acc: f64,
        val_loss: Option<f64>,
        val_acc: Option<f64>,
    }
    let mut w = csv::Writer::from_writer(out);
    for h in history {
        w.serialize(Row {
            epoch: h.epoch,
            train_loss: h.train_loss,
            train_acc: h.train_acc,
            val_loss: h.val_loss,
            val_acc: h.val_acc,
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trained {
    pub model: MlpModel,
    pub history: Vec<EpochStats>,
}

/// Mean loss and accuracy of `model` on `data`.
pub fn score(model: &MlpModel, data: &Dataset) -> Result<(f64, f64)> {
    if data.is_empty() {
        return Err(Error::data("cannot score an empty dataset"));
    }
    let mut loss = 0.0;
    let mut correct = 0usize;
    for start in (0..data.len()).step_by(4096) {
        let end = (start + 4096).min(data.len());
        let probs = model.forward_batch(data.x.slice(ndarray::s![start..end, ..]))?;
        for (row, &l) in probs.rows().into_iter().zip(&data.labels[start..end]) {
            let p = row.as_slice().expect("standard layout");
            loss += sample_loss(p, l);
            correct += usize::from(argmax(p) == l);
        }
    }
    Ok((loss / data.len() as f64, correct as f64 / data.len() as f64))
}

/// Trains a fresh model. `on_epoch` sees each epoch's statistics as they land.
pub fn train(
    spec: FeatureSpec,
    train_set: &Dataset,
    val_set: Option<&Dataset>,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochStats),
) -> Result<Trained> {
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(Error::data("training set is empty"));
    }
    let mut model = MlpModel::new(spec, &cfg.hidden, cfg.seed);
    if train_set.x.ncols() != model.input_dim() {
        return Err(Error::shape(format!(
            "training features have {} columns, model expects {}",
            train_set.x.ncols(),
            model.input_dim()
        )));
    }
    if let Some(&bad) = train_set.labels.iter().find(|&&l| l >= model.classes()) {
        return Err(Error::data(format!("label {bad} out of range for {} classes", model.classes())));
    }
    let val_set = val_set.filter(|v| !v.is_empty());

    let mut moments: Vec<(AdamMoments, AdamMoments)> =
        model.layers.iter().map(|l| (AdamMoments::zeros(l.w.len()), AdamMoments::zeros(l.b.len()))).collect();
    let mut rng = seeded_rng(cfg.seed ^ 0x05ee_d0fb_a7c4);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut step: u64 = 0;
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        let lr = cfg.learning_rate(epoch);
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for batch in order.chunks(cfg.batch_size) {
            let xb = train_set.x.select(Axis(0), batch);
            let yb: Vec<usize> = batch.iter().map(|&i| train_set.labels[i]).collect();
            let (probs, loss, grads) = model.backprop(xb.view(), &yb)?;
            loss_sum += loss * batch.len() as f64;
            correct += probs
                .rows()
                .into_iter()
                .zip(&yb)
                .filter(|(row, &l)| argmax(row.as_slice().expect("standard layout")) == l)
                .count();
            step += 1;
            for ((layer, g), (mw, mb)) in model.layers.iter_mut().zip(&grads.layers).zip(&mut moments) {
                adam_step(layer.w.as_slice_mut().expect("standard layout"), g.w.as_slice().expect("standard layout"), mw, step, lr, &cfg.adam);
                adam_step(layer.b.as_slice_mut().expect("contiguous"), g.b.as_slice().expect("contiguous"), mb, step, lr, &cfg.adam);
            }
        }
        let n = train_set.len() as f64;
        let (val_loss, val_acc) = match val_set {
            Some(v) => {
                let (l, a) = score(&model, v)?;
                (Some(l), Some(a))
            }
            None => (None, None),
        };
        let stats = EpochStats { epoch, lr, train_loss: loss_sum / n, train_acc: correct as f64 / n, val_loss, val_acc };
        if !stats.train_loss.is_finite() {
            return Err(Error::data(format!("training diverged at epoch {epoch}")));
        }
        on_epoch(&stats);
        history.push(stats);
    }
    Ok(Trained { model, history })
}
