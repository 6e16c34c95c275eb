//! Per-frame metrics: energy/delay throughput (EDT), drops, energy and the
//! longest uninterrupted service session, plus CSV reporting.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::world::EventOutcome;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameMetrics {
    pub frame: usize,
    pub delivered: u64,
    pub service_time_total: f64,
    pub drops: u64,
    pub energy: f64,
    /// bits / (second * joule)
    pub edt: f64,
    pub longest_session: usize,
}

/// `L * delivered / (service_time_total * (1 + drops) * energy)`.
pub fn edt_frame(packet_bits: f64, delivered: u64, service_time_total: f64, drops: u64, energy: f64) -> Result<f64> {
    if service_time_total.is_nan() || service_time_total <= 0.0 || energy.is_nan() || energy <= 0.0 {
        return Err(Error::arg(format!(
            "degenerate frame: service time {service_time_total}, energy {energy}"
        )));
    }
    Ok(packet_bits * delivered as f64 / (service_time_total * (1.0 + drops as f64) * energy))
}

/// Length of the longest run of equal consecutive entries.
pub fn longest_session(served: &[usize]) -> usize {
    let mut best = 0;
    let mut i = 0;
    while i < served.len() {
        let run = served[i..].iter().take_while(|&&u| u == served[i]).count();
        best = best.max(run);
        i += run;
    }
    best
}

pub fn aggregate_frame(events: &[EventOutcome], packet_bits: f64) -> Result<FrameMetrics> {
    let first = events.first().ok_or_else(|| Error::arg("cannot aggregate an empty frame"))?;
    let delivered = events.iter().map(|e| e.delivered as u64).sum();
    let service_time_total = events.iter().map(|e| e.service_time).sum();
    let drops = events.iter().map(EventOutcome::drops).sum();
    let energy = events.iter().map(|e| e.energy_spent).sum();
    let served: Vec<usize> = events.iter().map(|e| e.served_ue).collect();
    Ok(FrameMetrics {
        frame: first.frame,
        delivered,
        service_time_total,
        drops,
        energy,
        edt: edt_frame(packet_bits, delivered, service_time_total, drops, energy)?,
        longest_session: longest_session(&served),
    })
}

/// One CSV row of a comparison report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub policy: String,
    pub run: u64,
    pub frame: usize,
    pub edt: f64,
    pub drops: u64,
    pub energy: f64,
    pub longest_session: usize,
    pub delivered: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub run: u64,
    pub frames: Vec<FrameMetrics>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyMetrics {
    pub policy: String,
    pub runs: Vec<RunMetrics>,
}

/// Flattens per-policy, per-run frame metrics into report rows. Frames of
/// each run must be numbered `0, 1, 2, ...` without gaps.
pub fn report_rows(policies: &[PolicyMetrics]) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    for p in policies {
        for r in &p.runs {
            for (expected, f) in r.frames.iter().enumerate() {
                if f.frame != expected {
                    return Err(Error::data(format!(
                        "policy `{}` run {}: missing frame {expected}",
                        p.policy, r.run
                    )));
                }
                rows.push(ReportRow {
                    policy: p.policy.clone(),
                    run: r.run,
                    frame: f.frame,
                    edt: f.edt,
                    drops: f.drops,
                    energy: f.energy,
                    longest_session: f.longest_session,
                    delivered: f.delivered,
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_report<W: Write>(rows: &[ReportRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the comparison CSV; returns the number of data rows.
pub fn emit_report(policies: &[PolicyMetrics], path: impl AsRef<Path>) -> Result<usize> {
    let rows = report_rows(policies)?;
    write_report(&rows, std::fs::File::create(path)?)?;
    Ok(rows.len())
}

pub fn parse_report<R: Read>(input: R) -> Result<Vec<ReportRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

pub fn read_report(path: impl AsRef<Path>) -> Result<Vec<ReportRow>> {
    parse_report(std::fs::File::open(path)?)
}

/// Mean and sample standard deviation of a metric over rows grouped by policy.
pub fn summarize(rows: &[ReportRow], metric: impl Fn(&ReportRow) -> f64) -> BTreeMap<String, (f64, f64)> {
    let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in rows {
        groups.entry(r.policy.clone()).or_default().push(metric(r));
    }
    groups
        .into_iter()
        .map(|(k, v)| {
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let var = if v.len() > 1 { v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
            (k, (mean, var.sqrt()))
        })
        .collect()
}
