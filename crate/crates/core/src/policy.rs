//! Scheduling policies: the scripted expert, a sticky human stand-in, and the
//! shared interface they plug into.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Movement, SectorRing};
use crate::trajectory::Source;

/// What a policy sees before each event.
#[derive(Debug, Clone, Copy)]
pub struct Observation<'a> {
    pub q: &'a [usize],
    pub active_ue: usize,
    pub uav_sector: usize,
    pub ue_sectors: &'a [usize],
    pub queue_limit: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub ue: usize,
    pub movement: Movement,
}

/// A UE selector. The movement half of the action is never chosen by the
/// policy; [`decide`] derives it from the selected UE's sector.
pub trait Policy {
    fn select(&mut self, obs: &Observation<'_>) -> usize;

    fn source(&self) -> Source;
}

impl<P: Policy + ?Sized> Policy for Box<P> {
    fn select(&mut self, obs: &Observation<'_>) -> usize {
        (**self).select(obs)
    }

    fn source(&self) -> Source {
        (**self).source()
    }
}

/// Runs `policy` and completes its choice with the geometric movement action.
pub fn decide<P: Policy + ?Sized>(policy: &mut P, obs: &Observation<'_>, ring: &SectorRing) -> Result<Decision> {
    let ue = policy.select(obs);
    if ue >= obs.q.len() {
        return Err(Error::arg(format!("policy selected UE {ue} of {}", obs.q.len())));
    }
    let movement = ring.movement_action(obs.uav_sector, obs.ue_sectors[ue])?;
    Ok(Decision { ue, movement })
}

/// Longest-queue selection with switching hysteresis.
///
/// Stays on `current` unless the longest queue (lowest index on ties) beats it
/// by more than `delta` packets.
pub fn scripted_select(qlens: &[usize], current: usize, delta: usize) -> usize {
    let mut best = 0;
    for (i, &q) in qlens.iter().enumerate().skip(1) {
        if q > qlens[best] {
            best = i;
        }
    }
    match qlens.get(current) {
        Some(&cur) if qlens[best] - cur <= delta => current,
        _ => best,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpertConfig {
    /// Queue-length advantage (packets) needed before switching UE.
    pub hysteresis_delta: usize,
}

impl Default for ExpertConfig {
    fn default() -> Self {
        Self { hysteresis_delta: 10 }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExpertPolicy {
    pub cfg: ExpertConfig,
}

impl ExpertPolicy {
    pub fn new(cfg: ExpertConfig) -> Self {
        Self { cfg }
    }
}

impl Policy for ExpertPolicy {
    fn select(&mut self, obs: &Observation<'_>) -> usize {
        scripted_select(obs.q, obs.active_ue, self.cfg.hysteresis_delta)
    }

    fn source(&self) -> Source {
        Source::Scripted
    }
}

/// Full expert action for one observation.
pub fn expert_decide(obs: &Observation<'_>, cfg: &ExpertConfig, ring: &SectorRing) -> Result<Decision> {
    decide(&mut ExpertPolicy::new(*cfg), obs, ring)
}

/// Serves whichever UE was picked last until told otherwise. Drives
/// interactive sessions where a human changes the selection occasionally.
#[derive(Debug, Clone, Copy, Default)]
pub struct StickyPolicy {
    selection: Option<usize>,
}

impl StickyPolicy {
    pub fn set(&mut self, ue: usize) {
        self.selection = Some(ue);
    }

    pub fn selection(&self) -> Option<usize> {
        self.selection
    }
}

impl Policy for StickyPolicy {
    fn select(&mut self, obs: &Observation<'_>) -> usize {
        self.selection.unwrap_or(obs.active_ue)
    }

    fn source(&self) -> Source {
        Source::Human
    }
}
