//! WebAssembly bindings for the static browser demo.
//!
//! Three things are exposed: a live world the page animates (with an
//! optional expert autopilot), a per-frame metrics sweep, and a sector-ring
//! explorer for the movement rule and the service-time scale factor. Every
//! call returns JSON so the page never mirrors simulator types.

use relay_core::experiment::run_episode;
use relay_core::geometry::scale_alpha;
use relay_core::policy::scripted_select;
use relay_core::session::{Command, Mode, Session, WireMessage};
use relay_core::{ExpertConfig, ExpertPolicy, Movement, SectorRing, SimConfig};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("plain data serializes")
}

/// Defaults, with `overrides` (a JSON object of config fields) on top.
fn config_from(overrides: &str) -> Result<SimConfig, String> {
    let mut base = serde_json::to_value(SimConfig::default()).map_err(|e| e.to_string())?;
    if !overrides.trim().is_empty() {
        let extra: serde_json::Value = serde_json::from_str(overrides).map_err(|e| format!("bad config JSON: {e}"))?;
        let obj = extra.as_object().ok_or("config must be a JSON object")?;
        for (k, v) in obj {
            base[k] = v.clone();
        }
    }
    let cfg: SimConfig = serde_json::from_value(base).map_err(|e| e.to_string())?;
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

/// A world stepped by the page. The operator's choice is sticky, exactly as
/// in the live server; with autopilot on, the scripted expert chooses.
#[wasm_bindgen]
pub struct DemoWorld {
    session: Session,
    autopilot: bool,
    hysteresis: usize,
}

#[wasm_bindgen]
impl DemoWorld {
    /// `config` is a JSON object of overrides, e.g. `{"seed": 4}`; pass "" for defaults.
    #[wasm_bindgen(constructor)]
    pub fn new(config: &str, run: u32) -> Result<DemoWorld, JsError> {
        let cfg = config_from(config).map_err(js_err)?;
        Self::build(&cfg, run.into()).map_err(js_err)
    }

    /// `{"kind":"hello",...}` describing ring size and UE count.
    pub fn hello(&self) -> String {
        self.session.hello().to_json()
    }

    /// Current state as a `{"kind":"state",...}` message.
    pub fn snapshot(&self) -> String {
        WireMessage::State(self.session.snapshot()).to_json()
    }

    pub fn select(&mut self, ue: u32) -> Result<(), JsError> {
        let n = self.session.world().config().n_ues;
        if ue as usize >= n {
            return Err(JsError::new(&format!("ue {ue} out of range (0..{n})")));
        }
        self.session.submit(Command::Select(ue as usize));
        Ok(())
    }

    pub fn set_autopilot(&mut self, on: bool) {
        self.autopilot = on;
    }

    pub fn finished(&self) -> bool {
        self.session.mode() == Mode::Finished
    }

    /// Runs up to `n` events; returns the last state message, or the current
    /// one when the world has finished.
    pub fn step(&mut self, n: u32) -> Result<String, JsError> {
        self.step_inner(n).map_err(js_err)
    }
}

impl DemoWorld {
    fn build(cfg: &SimConfig, run: u64) -> relay_core::Result<Self> {
        Ok(Self { session: Session::new(cfg, run)?, autopilot: false, hysteresis: ExpertConfig::default().hysteresis_delta })
    }

    fn step_inner(&mut self, n: u32) -> relay_core::Result<String> {
        for _ in 0..n {
            if self.autopilot {
                let w = self.session.world();
                let ue = scripted_select(&w.queue_lengths(), w.active_ue(), self.hysteresis);
                self.session.submit(Command::Select(ue));
            }
            if self.session.tick()?.is_none() {
                break;
            }
        }
        Ok(self.snapshot())
    }
}

#[derive(Serialize)]
struct SweepFrame {
    frame: usize,
    edt: f64,
    drops: u64,
    energy: f64,
    longest_session: usize,
    delivered: u64,
}

#[derive(Serialize)]
struct Sweep {
    frames: Vec<SweepFrame>,
    truncated: bool,
    battery_initial: f64,
    battery_left: f64,
}

/// Per-frame metrics of one expert run: `frames` frames under `config`
/// overrides and hysteresis `delta`.
#[wasm_bindgen]
pub fn frame_sweep(config: &str, frames: u32, delta: u32) -> Result<String, JsError> {
    sweep(config, frames as usize, delta as usize).map_err(js_err)
}

fn sweep(config: &str, frames: usize, delta: usize) -> Result<String, String> {
    let mut cfg = config_from(config)?;
    cfg.frames = frames.max(1);
    let mut expert = ExpertPolicy::new(ExpertConfig { hysteresis_delta: delta });
    let r = run_episode(&cfg, 0, &mut expert, |_, _| Ok(())).map_err(|e| e.to_string())?;
    let frames = r
        .frames
        .iter()
        .map(|f| SweepFrame {
            frame: f.frame,
            edt: f.edt,
            drops: f.drops,
            energy: f.energy,
            longest_session: f.longest_session,
            delivered: f.delivered,
        })
        .collect();
    Ok(to_json(&Sweep { frames, truncated: r.truncated, battery_initial: r.battery_initial, battery_left: r.battery_left }))
}

#[derive(Serialize)]
struct RingPath {
    distance: usize,
    max_distance: usize,
    alpha: f64,
    first_move: Movement,
    /// Sectors visited from `uav` to `target`, both included.
    path: Vec<usize>,
}

/// How the UAV gets from sector `uav` to sector `target` on a ring of
/// `sectors`, and how much that distance stretches service time.
#[wasm_bindgen]
pub fn ring_path(sectors: u32, uav: u32, target: u32) -> Result<String, JsError> {
    ring_inner(sectors as usize, uav as usize, target as usize).map_err(js_err)
}

fn ring_inner(sectors: usize, uav: usize, target: usize) -> relay_core::Result<String> {
    let ring = SectorRing::new(sectors)?;
    let distance = ring.angular_distance(uav, target)?;
    let first_move = ring.movement_action(uav, target)?;
    let mut path = vec![uav];
    let mut at = uav;
    while at != target {
        at = ring.apply_movement(at, ring.movement_action(at, target)?)?;
        path.push(at);
    }
    Ok(to_json(&RingPath {
        distance,
        max_distance: ring.max_distance(),
        alpha: scale_alpha(distance as f64, ring.max_distance() as f64)?,
        first_move,
        path,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn parse(s: &str) -> Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn ring_examples() {
        let v = parse(&ring_inner(36, 17, 14).unwrap());
        assert_eq!(v["distance"], 3);
        assert_eq!(v["first_move"], 0);
        assert_eq!(v["path"], serde_json::json!([17, 16, 15, 14]));
        assert!((v["alpha"].as_f64().unwrap() - (3.0 / 18.0 + 1.0)).abs() < 1e-12);
        let v = parse(&ring_inner(36, 1, 19).unwrap());
        assert_eq!(v["distance"], 18);
        assert_eq!(v["alpha"], 2.0);
        assert_eq!(v["path"].as_array().unwrap().len(), 19);
        let v = parse(&ring_inner(36, 5, 5).unwrap());
        assert_eq!(v["first_move"], 2);
        assert!(ring_inner(36, 0, 5).is_err());
    }

    #[test]
    fn world_steps_and_follows_selection() {
        let cfg = config_from(r#"{"frames": 1, "events_per_frame": 50}"#).unwrap();
        let mut w = DemoWorld::build(&cfg, 0).unwrap();
        assert_eq!(parse(&w.hello())["n_ues"], 5);
        w.session.submit(Command::Select(4));
        let s = parse(&w.step_inner(3).unwrap());
        assert_eq!(s["kind"], "state");
        assert_eq!(s["event"], 3);
        assert_eq!(s["active_ue"], 4);
        let s = parse(&w.step_inner(100).unwrap());
        assert_eq!(s["event"], 50);
        assert!(w.finished());
    }

    #[test]
    fn autopilot_matches_the_expert() {
        let cfg = config_from(r#"{"frames": 2, "events_per_frame": 200}"#).unwrap();
        let mut w = DemoWorld::build(&cfg, 3).unwrap();
        w.autopilot = true;
        let mut served = Vec::new();
        while !w.finished() {
            let s = parse(&w.step_inner(1).unwrap());
            if !w.finished() {
                served.push(s["active_ue"].as_u64().unwrap() as usize);
            }
        }
        let mut expected = Vec::new();
        run_episode(&cfg, 3, &mut ExpertPolicy::default(), |_, o| {
            expected.push(o.served_ue);
            Ok(())
        })
        .unwrap();
        assert_eq!(served, expected);
    }

    #[test]
    fn sweep_reports_every_frame() {
        let v = parse(&sweep(r#"{"events_per_frame": 100, "frame_packets_per_ue": 30}"#, 4, 10).unwrap());
        let frames = v["frames"].as_array().unwrap();
        assert_eq!(frames.len(), 4);
        assert!(frames.iter().all(|f| f["edt"].as_f64().unwrap() >= 0.0));
        assert_eq!(v["truncated"], false);
    }

    #[test]
    fn config_overrides_are_validated() {
        assert!(config_from("").is_ok());
        assert_eq!(config_from(r#"{"seed": 9}"#).unwrap().seed, 9);
        assert!(config_from(r#"{"n_ues": 0}"#).is_err());
        assert!(config_from(r#"{"no_such_field": 1}"#).is_err());
        assert!(config_from("[1]").is_err());
    }
}
