//! Interactive session: a paced world driven by a human's sticky UE choice,
//! plus the JSON messages exchanged with the browser.
//!
//! The session itself is synchronous. A server owns one [`Session`], feeds
//! it parsed client commands between events and broadcasts the snapshots it
//! returns.

use std::collections::VecDeque;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::policy::StickyPolicy;
use crate::trajectory::{Source, TrajectoryRecord, TrajectoryWriter};
use crate::world::WorldState;

pub const DEFAULT_SPEED: f64 = 2.0;
/// Pacing bounds in events per second.
pub const SPEED_RANGE: (f64, f64) = (0.1, 1000.0);

/// What the browser sees after each event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub frame: usize,
    pub event: usize,
    pub q: Vec<usize>,
    pub queue_limit: usize,
    pub active_ue: usize,
    pub uav_sector: usize,
    pub ue_sectors: Vec<usize>,
    pub ue_positions: Vec<[f64; 2]>,
    pub battery: f64,
    pub drops_cumulative: Vec<u64>,
    pub clock: f64,
}

impl Snapshot {
    pub fn of(world: &WorldState) -> Self {
        Self {
            frame: world.frame(),
            event: world.event(),
            q: world.queue_lengths(),
            queue_limit: world.config().queue_limit,
            active_ue: world.active_ue(),
            uav_sector: world.uav_sector(),
            ue_sectors: world.ue_sectors().to_vec(),
            ue_positions: world.ue_positions().to_vec(),
            battery: world.battery(),
            drops_cumulative: world.drops_cumulative(),
            clock: world.clock(),
        }
    }
}

/// One WebSocket text frame. Every variant serializes to a flat object with
/// a `kind` field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WireMessage {
    State(Snapshot),
    Hello { n_ues: usize, sectors: usize, queue_limit: usize },
    Select { ue: usize },
    Pause,
    Resume,
    Speed { eps: f64 },
    Error { msg: String },
}

impl WireMessage {
    pub fn hello(cfg: &SimConfig) -> Self {
        Self::Hello { n_ues: cfg.n_ues, sectors: cfg.sectors, queue_limit: cfg.queue_limit }
    }

    pub fn error(msg: impl Into<String>) -> Self {
        Self::Error { msg: msg.into() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("wire messages always serialize")
    }
}

/// A validated client request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Command {
    Select(usize),
    Pause,
    Resume,
    Speed(f64),
}

/// Parses and validates one client frame. The error string is meant for the
/// sending client only.
pub fn parse_command(text: &str, n_ues: usize) -> std::result::Result<Command, String> {
    let msg: WireMessage = serde_json::from_str(text).map_err(|e| format!("malformed message: {e}"))?;
    match msg {
        WireMessage::Select { ue } if ue < n_ues => Ok(Command::Select(ue)),
        WireMessage::Select { ue } => Err(format!("ue {ue} out of range (0..{n_ues})")),
        WireMessage::Pause => Ok(Command::Pause),
        WireMessage::Resume => Ok(Command::Resume),
        WireMessage::Speed { eps } if eps.is_finite() && (SPEED_RANGE.0..=SPEED_RANGE.1).contains(&eps) => {
            Ok(Command::Speed(eps))
        }
        WireMessage::Speed { eps } => {
            Err(format!("speed {eps} outside [{}, {}] events/s", SPEED_RANGE.0, SPEED_RANGE.1))
        }
        other => Err(format!("clients may not send `{}` messages", kind_of(&other))),
    }
}

fn kind_of(msg: &WireMessage) -> &'static str {
    match msg {
        WireMessage::State(_) => "state",
        WireMessage::Hello { .. } => "hello",
        WireMessage::Select { .. } => "select",
        WireMessage::Pause => "pause",
        WireMessage::Resume => "resume",
        WireMessage::Speed { .. } => "speed",
        WireMessage::Error { .. } => "error",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Running,
    Paused,
    /// All frames played or the battery ran out.
    Finished,
}

pub struct Session<W: Write = std::io::Sink> {
    world: WorldState,
    mode: Mode,
    speed: f64,
    human: StickyPolicy,
    mailbox: VecDeque<Command>,
    recorder: Option<TrajectoryWriter<W>>,
    clients: usize,
}

impl Session<std::io::Sink> {
    pub fn new(cfg: &SimConfig, run: u64) -> Result<Self> {
        Self::build(cfg, run, None)
    }
}

impl<W: Write> Session<W> {
    /// A session whose every event is appended to `out` as a trajectory
    /// record with `source = human`.
    pub fn recording(cfg: &SimConfig, run: u64, out: W) -> Result<Self> {
        Self::build(cfg, run, Some(TrajectoryWriter::new(out)))
    }

    fn build(cfg: &SimConfig, run: u64, recorder: Option<TrajectoryWriter<W>>) -> Result<Self> {
        Ok(Self {
            world: WorldState::new(cfg, run)?,
            mode: Mode::Running,
            speed: DEFAULT_SPEED,
            human: StickyPolicy::default(),
            mailbox: VecDeque::new(),
            recorder,
            clients: 0,
        })
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn selection(&self) -> Option<usize> {
        self.human.selection()
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot::of(&self.world)
    }

    pub fn hello(&self) -> WireMessage {
        WireMessage::hello(self.world.config())
    }

    pub fn recorded(&self) -> usize {
        self.recorder.as_ref().map_or(0, TrajectoryWriter::written)
    }

    pub fn client_connected(&mut self) {
        self.clients += 1;
    }

    pub fn client_disconnected(&mut self) {
        self.clients = self.clients.saturating_sub(1);
    }

    pub fn clients(&self) -> usize {
        self.clients
    }

    /// Queues a command; it takes effect before the next event.
    pub fn submit(&mut self, cmd: Command) {
        self.mailbox.push_back(cmd);
    }

    /// Applies queued commands in arrival order.
    fn drain_mailbox(&mut self) {
        while let Some(cmd) = self.mailbox.pop_front() {
            match cmd {
                Command::Select(ue) => self.human.set(ue),
                Command::Pause if self.mode == Mode::Running => self.mode = Mode::Paused,
                Command::Resume if self.mode == Mode::Paused => self.mode = Mode::Running,
                Command::Speed(eps) => self.speed = eps,
                Command::Pause | Command::Resume => {}
            }
        }
    }

    /// Applies pending commands, then executes one event unless paused or
    /// finished. Returns the post-event snapshot when an event ran.
    pub fn tick(&mut self) -> Result<Option<Snapshot>> {
        self.drain_mailbox();
        if self.mode != Mode::Running {
            return Ok(None);
        }
        let cfg = self.world.config();
        let (frames, events_per_frame) = (cfg.frames, cfg.events_per_frame);
        if !self.world.frame_open() {
            if self.world.frame() >= frames {
                self.finish();
                return Ok(None);
            }
            self.world.begin_frame()?;
        }
        let outcome = match self.world.step_event(&mut self.human) {
            Ok(o) => o,
            Err(Error::BatteryExhausted { .. }) => {
                self.world.end_frame();
                self.finish();
                return Ok(None);
            }
            Err(e) => return Err(e),
        };
        if let Some(rec) = self.recorder.as_mut() {
            let record = TrajectoryRecord::from_outcome(self.world.run(), &outcome, self.world.ue_sectors(), Source::Human);
            rec.append(&record)?;
        }
        let snap = self.snapshot();
        if self.world.event() >= events_per_frame {
            self.world.end_frame();
        }
        Ok(Some(snap))
    }

    fn finish(&mut self) {
        self.mode = Mode::Finished;
    }

    /// Flushes and returns the recorder's writer, if any.
    pub fn into_recording(self) -> Result<Option<W>> {
        self.recorder.map(TrajectoryWriter::finish).transpose()
    }
}
