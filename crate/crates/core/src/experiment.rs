//! Episode driver: runs × frames × events under one policy.

use std::ops::Range;

use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::metrics::{aggregate_frame, FrameMetrics, PolicyMetrics, RunMetrics};
use crate::policy::Policy;
use crate::trajectory::TrajectoryRecord;
use crate::world::{EventOutcome, WorldState};

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub run: u64,
    pub frames: Vec<FrameMetrics>,
    /// The battery ran out before the last frame finished.
    pub truncated: bool,
    pub events: usize,
    pub battery_initial: f64,
    pub battery_left: f64,
    pub clock: f64,
    pub total_drops: u64,
}

/// Simulates one run, calling `on_event` after every executed event.
pub fn run_episode<P, F>(cfg: &SimConfig, run: u64, policy: &mut P, mut on_event: F) -> Result<RunResult>
where
    P: Policy + ?Sized,
    F: FnMut(&WorldState, &EventOutcome) -> Result<()>,
{
    let mut world = WorldState::new(cfg, run)?;
    let mut frames = Vec::with_capacity(cfg.frames);
    let mut frame_events = Vec::with_capacity(cfg.events_per_frame);
    let mut truncated = false;
    let mut events = 0;

    'frames: for _ in 0..cfg.frames {
        world.begin_frame()?;
        frame_events.clear();
        for _ in 0..cfg.events_per_frame {
            match world.step_event(policy) {
                Ok(outcome) => {
                    on_event(&world, &outcome)?;
                    frame_events.push(outcome);
                    events += 1;
                }
                Err(Error::BatteryExhausted { .. }) => {
                    truncated = true;
                    if !frame_events.is_empty() {
                        frames.push(aggregate_frame(&frame_events, cfg.packet_size_bits)?);
                    }
                    world.end_frame();
                    break 'frames;
                }
                Err(e) => return Err(e),
            }
        }
        frames.push(aggregate_frame(&frame_events, cfg.packet_size_bits)?);
        world.end_frame();
    }

    Ok(RunResult {
        run,
        frames,
        truncated,
        events,
        battery_initial: world.battery_initial(),
        battery_left: world.battery(),
        clock: world.clock(),
        total_drops: world.drops_cumulative().iter().sum(),
    })
}

/// One run, keeping every event as a trajectory record.
pub fn record_episode<P: Policy + ?Sized>(
    cfg: &SimConfig,
    run: u64,
    policy: &mut P,
) -> Result<(RunResult, Vec<TrajectoryRecord>)> {
    let source = policy.source();
    let mut records = Vec::with_capacity(cfg.frames * cfg.events_per_frame);
    let result = run_episode(cfg, run, policy, |w, o| {
        records.push(TrajectoryRecord::from_outcome(run, o, w.ue_sectors(), source));
        Ok(())
    })?;
    Ok((result, records))
}

/// Maps `f` over run indices. Each run owns its world and its streams, so
/// the result is the same whether or not runs execute in parallel; the
/// output is ordered by run index.
fn map_runs<T, F>(runs: Range<u64>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        runs.into_par_iter().map(&f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        runs.map(f).collect()
    }
}

/// Independent recorded episodes, one fresh policy per run.
pub fn record_runs<P, M>(
    cfg: &SimConfig,
    runs: Range<u64>,
    make_policy: M,
) -> Result<Vec<(RunResult, Vec<TrajectoryRecord>)>>
where
    P: Policy,
    M: Fn() -> P + Sync,
{
    map_runs(runs, |run| record_episode(cfg, run, &mut make_policy()))
}

/// Independent episodes without trajectory capture.
pub fn simulate_runs<P, M>(cfg: &SimConfig, runs: Range<u64>, make_policy: M) -> Result<Vec<RunResult>>
where
    P: Policy,
    M: Fn() -> P + Sync,
{
    map_runs(runs, |run| run_episode(cfg, run, &mut make_policy(), |_, _| Ok(())))
}

/// Packs run results under a policy label for reporting.
pub fn policy_metrics(name: &str, results: &[RunResult]) -> PolicyMetrics {
    PolicyMetrics {
        policy: name.to_string(),
        runs: results.iter().map(|r| RunMetrics { run: r.run, frames: r.frames.clone() }).collect(),
    }
}
