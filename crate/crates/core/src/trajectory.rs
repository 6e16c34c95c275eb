//! Demonstration trajectories: one (state, action) row per event, persisted
//! as JSON lines, plus the state encoding fed to the learner.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Movement;
use crate::rng::seeded_rng;
use crate::world::EventOutcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Scripted,
    Human,
    Clone,
}

/// One demonstration row. Field names and order are the file schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryRecord {
    pub run: u64,
    pub frame: usize,
    pub event: usize,
    pub q: Vec<usize>,
    pub active_ue: usize,
    pub uav_sector: usize,
    pub ue_sectors: Vec<usize>,
    pub a1: usize,
    pub a2: Movement,
    pub t: f64,
    pub source: Source,
}

impl TrajectoryRecord {
    pub fn from_outcome(run: u64, outcome: &EventOutcome, ue_sectors: &[usize], source: Source) -> Self {
        Self {
            run,
            frame: outcome.frame,
            event: outcome.event,
            q: outcome.observed_q.clone(),
            active_ue: outcome.observed_active_ue,
            uav_sector: outcome.observed_uav_sector,
            ue_sectors: ue_sectors.to_vec(),
            a1: outcome.served_ue,
            a2: outcome.movement,
            t: outcome.decided_at,
            source,
        }
    }

    /// Structural checks that do not depend on the world configuration.
    pub fn check(&self) -> Result<()> {
        let n = self.q.len();
        if n == 0 {
            return Err(Error::data("q is empty"));
        }
        if self.ue_sectors.len() != n {
            return Err(Error::data(format!("ue_sectors has {} entries, q has {n}", self.ue_sectors.len())));
        }
        if self.a1 >= n {
            return Err(Error::data(format!("a1 = {} out of range for {n} UEs", self.a1)));
        }
        if self.active_ue >= n {
            return Err(Error::data(format!("active_ue = {} out of range for {n} UEs", self.active_ue)));
        }
        if !self.t.is_finite() {
            return Err(Error::data("t is not finite"));
        }
        Ok(())
    }
}

/// Streams records to any writer, one JSON object per line.
pub struct TrajectoryWriter<W: Write> {
    out: W,
    written: usize,
}

impl<W: Write> TrajectoryWriter<W> {
    pub fn new(out: W) -> Self {
        Self { out, written: 0 }
    }

    pub fn append(&mut self, rec: &TrajectoryRecord) -> Result<()> {
        serde_json::to_writer(&mut self.out, rec)?;
        self.out.write_all(b"\n")?;
        self.written += 1;
        Ok(())
    }

    pub fn written(&self) -> usize {
        self.written
    }

    pub fn finish(mut self) -> Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

pub fn write_jsonl<'a>(records: impl IntoIterator<Item = &'a TrajectoryRecord>, path: impl AsRef<Path>) -> Result<usize> {
    let mut w = TrajectoryWriter::new(BufWriter::new(File::create(path)?));
    for r in records {
        w.append(r)?;
    }
    let n = w.written();
    w.finish()?;
    Ok(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReadMode {
    /// Any bad line fails the whole read.
    #[default]
    Strict,
    /// Stop at the first bad line and return the records before it.
    Lenient,
}

pub fn parse_jsonl<R: BufRead>(input: R, mode: ReadMode) -> Result<Vec<TrajectoryRecord>> {
    let mut out = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<TrajectoryRecord>(&line)
            .map_err(|e| Error::Data { line: Some(line_no), msg: e.to_string() })
            .and_then(|r| {
                r.check().map_err(|e| match e {
                    Error::Data { msg, .. } => Error::Data { line: Some(line_no), msg },
                    other => other,
                })?;
                Ok(r)
            });
        match (parsed, mode) {
            (Ok(r), _) => out.push(r),
            (Err(e), ReadMode::Strict) => return Err(e),
            (Err(_), ReadMode::Lenient) => break,
        }
    }
    Ok(out)
}

pub fn read_jsonl(path: impl AsRef<Path>, mode: ReadMode) -> Result<Vec<TrajectoryRecord>> {
    parse_jsonl(BufReader::new(File::open(path)?), mode)
}

/// Input layout of the learner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureSpec {
    pub n_ues: usize,
    /// Queue lengths are divided by this (the queue limit).
    pub normalize_by: usize,
    /// Append a one-hot of the UE served in the previous event.
    pub include_active_ue_onehot: bool,
}

impl FeatureSpec {
    pub fn new(n_ues: usize, queue_limit: usize) -> Self {
        Self { n_ues, normalize_by: queue_limit, include_active_ue_onehot: false }
    }

    pub fn with_active_ue(mut self, on: bool) -> Self {
        self.include_active_ue_onehot = on;
        self
    }

    pub fn feature_dim(&self) -> usize {
        if self.include_active_ue_onehot {
            2 * self.n_ues
        } else {
            self.n_ues
        }
    }

    /// Writes the features of `(q, active_ue)` into `out`.
    pub fn encode_into(&self, q: &[usize], active_ue: usize, out: &mut [f64]) -> Result<()> {
        if q.len() != self.n_ues {
            return Err(Error::shape(format!("state has {} UEs, feature spec expects {}", q.len(), self.n_ues)));
        }
        if out.len() != self.feature_dim() {
            return Err(Error::shape(format!("output buffer {} != feature_dim {}", out.len(), self.feature_dim())));
        }
        let limit = self.normalize_by as f64;
        for (i, (&len, slot)) in q.iter().zip(out.iter_mut()).enumerate() {
            if len > self.normalize_by {
                return Err(Error::data(format!("q[{i}] = {len} exceeds queue limit {}", self.normalize_by)));
            }
            *slot = len as f64 / limit;
        }
        if self.include_active_ue_onehot {
            if active_ue >= self.n_ues {
                return Err(Error::data(format!("active_ue {active_ue} out of range")));
            }
            let hot = &mut out[self.n_ues..];
            hot.fill(0.0);
            hot[active_ue] = 1.0;
        }
        Ok(())
    }
}

pub fn encode_state(record: &TrajectoryRecord, spec: &FeatureSpec) -> Result<Vec<f64>> {
    let mut out = vec![0.0; spec.feature_dim()];
    spec.encode_into(&record.q, record.active_ue, &mut out)?;
    Ok(out)
}

/// Seeded shuffle-and-cut. The first part holds `round(ratio * N)` items.
pub fn split_dataset<T: Clone>(records: &[T], ratio: f64, seed: u64) -> Result<(Vec<T>, Vec<T>)> {
    if records.is_empty() {
        return Err(Error::data("cannot split an empty dataset"));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::arg(format!("split ratio must be in (0, 1), got {ratio}")));
    }
    let mut idx: Vec<usize> = (0..records.len()).collect();
    idx.shuffle(&mut seeded_rng(seed));
    let cut = (ratio * records.len() as f64).round() as usize;
    let (a, b) = idx.split_at(cut);
    Ok((a.iter().map(|&i| records[i].clone()).collect(), b.iter().map(|&i| records[i].clone()).collect()))
}
