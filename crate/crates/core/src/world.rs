//! Live simulation state and the per-event step.

use std::collections::VecDeque;
use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{AlphaMode, SimConfig};
use crate::energy::{consume_energy, EnergyLedger};
use crate::error::{Error, Result};
use crate::geometry::{scale_alpha, Movement, SectorRing};
use crate::mobility::{MobilityState, Wedge};
use crate::policy::{decide, Observation, Policy};
use crate::queue::{Enqueue, Packet, UeQueue};
use crate::rng::{stream_rng, Stream};
use crate::sampling::{sample_frame_arrivals, sample_service};

/// Everything that happened in one event, including the state the policy
/// observed before deciding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventOutcome {
    pub frame: usize,
    pub event: usize,
    pub served_ue: usize,
    pub movement: Movement,
    /// Seconds the event took: scaled service time, or `idle_time` if the
    /// selected queue was empty.
    pub service_time: f64,
    pub delivered: u32,
    pub drops_this_event: Vec<u32>,
    pub energy_spent: f64,
    pub observed_q: Vec<usize>,
    pub observed_active_ue: usize,
    pub observed_uav_sector: usize,
    /// Clock at decision time.
    pub decided_at: f64,
}

impl EventOutcome {
    pub fn drops(&self) -> u64 {
        self.drops_this_event.iter().map(|&d| d as u64).sum()
    }
}

#[derive(Debug, Clone)]
struct Streams {
    arrivals: ChaCha8Rng,
    service: ChaCha8Rng,
    mobility: ChaCha8Rng,
}

#[derive(Debug, Clone)]
pub struct WorldState {
    cfg: SimConfig,
    ring: SectorRing,
    run: u64,
    clock: f64,
    frame: usize,
    event: usize,
    frame_open: bool,
    queues: Vec<UeQueue>,
    pending: Vec<VecDeque<f64>>,
    service_base: Vec<f64>,
    next_seq: Vec<u64>,
    sampled: Vec<u64>,
    never_arrived: Vec<u64>,
    uav_sector: usize,
    ue_sectors: Vec<usize>,
    mobility: MobilityState,
    battery: f64,
    battery_initial: f64,
    ledger: EnergyLedger,
    active_ue: usize,
    streams: Streams,
    qbuf: Vec<usize>,
}

impl WorldState {
    /// Fresh world for run `run` of `cfg`. Placement and battery come from
    /// their own streams.
    pub fn new(cfg: &SimConfig, run: u64) -> Result<Self> {
        cfg.validate()?;
        let ring = SectorRing::new(cfg.sectors)?;
        let n = cfg.n_ues;

        let mut place = stream_rng(cfg.seed, run, Stream::Placement);
        let mut ue_sectors: Vec<usize> = rand::seq::index::sample(&mut place, cfg.sectors, n)
            .into_iter()
            .map(|i| i + 1)
            .collect();
        // Keep UE order independent of the sampler's internal ordering.
        ue_sectors.sort_unstable();
        let uav_sector = place.random_range(1..=cfg.sectors);
        let wedges: Vec<Wedge> =
            ue_sectors.iter().map(|&s| Wedge::for_sector(&ring, s, cfg.ue_radius_band)).collect();
        let positions = wedges
            .iter()
            .map(|w| {
                let inset = 0.05 * (w.theta_max - w.theta_min);
                let a = place.random_range(w.theta_min + inset..w.theta_max - inset);
                let r = place.random_range(w.r_min..w.r_max);
                [r * a.cos(), r * a.sin()]
            })
            .collect();
        let headings = (0..n).map(|_| place.random_range(0.0..2.0 * PI)).collect();
        let mobility = MobilityState::new(positions, headings, wedges, cfg.ue_speed, cfg.heading_sigma);

        let [bmin, bmax] = cfg.battery_init_range;
        let mut battery_rng = stream_rng(cfg.seed, run, Stream::Battery);
        let battery = if bmax > bmin { battery_rng.random_range(bmin..=bmax) } else { bmin };

        Ok(Self {
            cfg: cfg.clone(),
            ring,
            run,
            clock: 0.0,
            frame: 0,
            event: 0,
            frame_open: false,
            queues: (0..n).map(|i| UeQueue::new(i, cfg.queue_limit)).collect(),
            pending: vec![VecDeque::new(); n],
            service_base: Vec::new(),
            next_seq: vec![0; n],
            sampled: vec![0; n],
            never_arrived: vec![0; n],
            uav_sector,
            ue_sectors,
            mobility,
            battery,
            battery_initial: battery,
            ledger: EnergyLedger::default(),
            active_ue: 0,
            streams: Streams {
                arrivals: stream_rng(cfg.seed, run, Stream::Arrivals),
                service: stream_rng(cfg.seed, run, Stream::Service),
                mobility: stream_rng(cfg.seed, run, Stream::Mobility),
            },
            qbuf: vec![0; n],
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn ring(&self) -> &SectorRing {
        &self.ring
    }

    pub fn run(&self) -> u64 {
        self.run
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn frame(&self) -> usize {
        self.frame
    }

    pub fn event(&self) -> usize {
        self.event
    }

    pub fn frame_open(&self) -> bool {
        self.frame_open
    }

    pub fn queues(&self) -> &[UeQueue] {
        &self.queues
    }

    pub fn queue_lengths(&self) -> Vec<usize> {
        self.queues.iter().map(UeQueue::len).collect()
    }

    pub fn drops_cumulative(&self) -> Vec<u64> {
        self.queues.iter().map(|q| q.dropped).collect()
    }

    pub fn pending_arrivals(&self) -> &[VecDeque<f64>] {
        &self.pending
    }

    pub fn uav_sector(&self) -> usize {
        self.uav_sector
    }

    pub fn ue_sectors(&self) -> &[usize] {
        &self.ue_sectors
    }

    pub fn ue_positions(&self) -> &[[f64; 2]] {
        &self.mobility.positions
    }

    pub fn mobility(&self) -> &MobilityState {
        &self.mobility
    }

    pub fn battery(&self) -> f64 {
        self.battery
    }

    pub fn battery_initial(&self) -> f64 {
        self.battery_initial
    }

    pub fn ledger(&self) -> &EnergyLedger {
        &self.ledger
    }

    pub fn active_ue(&self) -> usize {
        self.active_ue
    }

    /// Arrival timestamps drawn so far, per UE.
    pub fn sampled(&self) -> &[u64] {
        &self.sampled
    }

    /// Arrivals discarded because their frame ended first, per UE.
    pub fn never_arrived(&self) -> &[u64] {
        &self.never_arrived
    }

    /// Draws this frame's arrivals and base service times.
    pub fn begin_frame(&mut self) -> Result<()> {
        if self.frame_open {
            return Err(Error::arg(format!("frame {} is already open", self.frame)));
        }
        for ue in 0..self.cfg.n_ues {
            let times = sample_frame_arrivals(
                &mut self.streams.arrivals,
                self.cfg.arrival_model,
                self.cfg.lambdas[ue],
                self.cfg.frame_packets_per_ue,
                self.clock,
            )?;
            self.sampled[ue] += times.len() as u64;
            self.pending[ue] = times.into();
        }
        self.service_base = (0..self.cfg.events_per_frame)
            .map(|_| sample_service(&mut self.streams.service, self.cfg.mu_s))
            .collect();
        self.ledger.start_frame();
        self.event = 0;
        self.frame_open = true;
        Ok(())
    }

    /// Closes the frame; arrivals not yet admitted are discarded.
    pub fn end_frame(&mut self) {
        for (ue, pending) in self.pending.iter_mut().enumerate() {
            self.never_arrived[ue] += pending.len() as u64;
            pending.clear();
        }
        self.frame += 1;
        self.frame_open = false;
    }

    /// Admits every pending arrival stamped at or before `t_now`, in order.
    /// Returns `(enqueued, dropped)` per UE.
    pub fn advance_arrivals(&mut self, t_now: f64) -> Vec<(u32, u32)> {
        let mut counts = vec![(0, 0); self.cfg.n_ues];
        for (ue, pending) in self.pending.iter_mut().enumerate() {
            while let Some(&t) = pending.front() {
                if t > t_now {
                    break;
                }
                pending.pop_front();
                let pkt = Packet { ue, seq: self.next_seq[ue], arrival_time: t };
                self.next_seq[ue] += 1;
                match self.queues[ue].enqueue(pkt) {
                    Enqueue::Enqueued => counts[ue].0 += 1,
                    Enqueue::Dropped => counts[ue].1 += 1,
                }
            }
        }
        counts
    }

    fn alpha_for(&self, sector: usize, ue: usize) -> f64 {
        match self.cfg.alpha_mode {
            AlphaMode::Sector => {
                let d = self.ring.distance_unchecked(sector, self.ue_sectors[ue]);
                scale_alpha(d as f64, self.ring.max_distance() as f64).expect("distance within ring")
            }
            AlphaMode::Euclidean => {
                let u = self.ring.uav_position(sector, self.cfg.radius_uav);
                let p = self.mobility.positions[ue];
                let max = self.cfg.radius_uav + self.cfg.ue_radius_band[1];
                let d = (u[0] - p[0]).hypot(u[1] - p[1]).min(max);
                scale_alpha(d, max).expect("distance within bound")
            }
        }
    }

    /// Executes one event under `policy`.
    ///
    /// On [`Error::BatteryExhausted`] the event is not executed: the battery,
    /// queues and UAV position are left as they were (arrivals up to the
    /// current clock have been admitted).
    pub fn step_event<P: Policy + ?Sized>(&mut self, policy: &mut P) -> Result<EventOutcome> {
        if !self.frame_open || self.event >= self.cfg.events_per_frame {
            return Err(Error::arg("no frame in progress"));
        }
        if self.battery <= 0.0 {
            return Err(Error::BatteryExhausted { available: self.battery, required: 0.0 });
        }
        let admitted = self.advance_arrivals(self.clock);

        for (slot, q) in self.qbuf.iter_mut().zip(&self.queues) {
            *slot = q.len();
        }
        let obs = Observation {
            q: &self.qbuf,
            active_ue: self.active_ue,
            uav_sector: self.uav_sector,
            ue_sectors: &self.ue_sectors,
            queue_limit: self.cfg.queue_limit,
        };
        let decision = decide(policy, &obs, &self.ring)?;
        let ue = decision.ue;
        let new_sector = self.ring.apply_unchecked(self.uav_sector, decision.movement);
        let has_packet = !self.queues[ue].is_empty();

        let energy_spent = consume_energy(
            &mut self.battery,
            &mut self.ledger,
            decision.movement,
            has_packet,
            &self.cfg.energy_costs(),
        )?;

        let observed_q = self.qbuf.clone();
        let observed_uav_sector = self.uav_sector;
        let observed_active_ue = self.active_ue;
        let decided_at = self.clock;

        self.uav_sector = new_sector;
        let service_time = if has_packet {
            self.queues[ue].dequeue();
            self.service_base[self.event] * self.alpha_for(new_sector, ue)
        } else {
            self.cfg.idle_time
        };
        self.clock += service_time;
        self.active_ue = ue;

        for i in 0..self.cfg.n_ues {
            self.mobility.ue_mobility_step(i, &mut self.streams.mobility);
        }

        let outcome = EventOutcome {
            frame: self.frame,
            event: self.event,
            served_ue: ue,
            movement: decision.movement,
            service_time,
            delivered: has_packet as u32,
            drops_this_event: admitted.iter().map(|&(_, d)| d).collect(),
            energy_spent,
            observed_q,
            observed_active_ue,
            observed_uav_sector,
            decided_at,
        };
        self.event += 1;
        Ok(outcome)
    }

    /// Per-UE packet accounting:
    /// `sampled == delivered + dropped + queued + pending + never_arrived`.
    pub fn conservation_holds(&self) -> bool {
        self.queues.iter().enumerate().all(|(ue, q)| {
            q.counters_consistent()
                && self.sampled[ue]
                    == q.delivered + q.dropped + q.len() as u64 + self.pending[ue].len() as u64 + self.never_arrived[ue]
        })
    }
}
