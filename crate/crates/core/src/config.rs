//! World configuration.
//!
//! The on-disk form is a flat `key = value` file (TOML syntax) whose keys are
//! the field names below. Missing keys take their defaults.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::energy::EnergyCosts;
use crate::error::{Error, Result};

/// How `lambdas` are interpreted when drawing inter-arrival gaps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ArrivalModel {
    /// Gap ~ Poisson(λ): λ is the mean gap in seconds, larger λ means slower arrivals.
    #[default]
    PoissonGap,
    /// Gap ~ Exponential with mean 1/λ: λ is a rate in packets per second.
    ExponentialRate,
}

/// Distance measure fed to the service-time scale factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaMode {
    /// Angular distance in sector steps.
    #[default]
    Sector,
    /// Straight-line distance between the UAV and the UE position.
    Euclidean,
}

macro_rules! kebab_enum {
    ($ty:ty { $($var:ident => $s:literal),+ $(,)? }) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $(Self::$var => $s),+ })
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($s => Ok(Self::$var),)+
                    other => Err(Error::config(format!("unknown {} `{other}`", stringify!($ty)))),
                }
            }
        }
    };
}

kebab_enum!(ArrivalModel { PoissonGap => "poisson-gap", ExponentialRate => "exponential-rate" });
kebab_enum!(AlphaMode { Sector => "sector", Euclidean => "euclidean" });

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub n_ues: usize,
    pub sectors: usize,
    pub queue_limit: usize,
    pub frame_packets_per_ue: usize,
    pub events_per_frame: usize,
    pub frames: usize,
    pub runs: usize,
    pub packet_size_bits: f64,
    pub lambdas: Vec<f64>,
    /// Mean base service time in seconds, before distance scaling.
    pub mu_s: f64,
    pub arrival_model: ArrivalModel,
    pub battery_init_range: [f64; 2],
    /// Joules per one-sector move.
    pub e_move: f64,
    /// Joules per event spent hovering.
    pub e_hover: f64,
    /// Joules per delivered packet.
    pub e_tx: f64,
    /// Seconds consumed when the selected queue is empty.
    pub idle_time: f64,
    pub seed: u64,
    pub alpha_mode: AlphaMode,
    pub radius_uav: f64,
    pub ue_radius_band: [f64; 2],
    /// UE speed in meters per event.
    pub ue_speed: f64,
    /// Standard deviation of the per-event heading perturbation, radians.
    pub heading_sigma: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_ues: 5,
            sectors: 36,
            queue_limit: 200,
            frame_packets_per_ue: 220,
            events_per_frame: 1000,
            frames: 50,
            runs: 10,
            packet_size_bits: 800_000.0,
            lambdas: vec![3.0, 5.0, 10.0, 8.0, 7.0],
            mu_s: 2.0,
            arrival_model: ArrivalModel::PoissonGap,
            battery_init_range: [40_000.0, 50_000.0],
            e_move: 0.5,
            e_hover: 0.2,
            e_tx: 0.2,
            idle_time: 0.05,
            seed: 1,
            alpha_mode: AlphaMode::Sector,
            radius_uav: 500.0,
            ue_radius_band: [200.0, 450.0],
            ue_speed: 0.5,
            heading_sigma: 0.3,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::config(format!("{name} must be finite and > 0, got {v}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::config(format!("{name} must be finite and >= 0, got {v}")))
    }
}

impl SimConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: SimConfig = toml::from_str(s).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Renders the configuration in the same format `load` accepts.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("SimConfig is always representable")
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_ues == 0 {
            return Err(Error::config("n_ues must be >= 1"));
        }
        if self.sectors < 2 {
            return Err(Error::config("sectors must be >= 2"));
        }
        if self.n_ues > self.sectors {
            return Err(Error::config(format!(
                "at most one UE per sector: n_ues {} > sectors {}",
                self.n_ues, self.sectors
            )));
        }
        if self.queue_limit == 0 {
            return Err(Error::config("queue_limit must be >= 1"));
        }
        if self.events_per_frame == 0 || self.frames == 0 || self.runs == 0 {
            return Err(Error::config("events_per_frame, frames and runs must be >= 1"));
        }
        if self.lambdas.len() != self.n_ues {
            return Err(Error::config(format!(
                "lambdas has {} entries but n_ues is {}",
                self.lambdas.len(),
                self.n_ues
            )));
        }
        for (i, &l) in self.lambdas.iter().enumerate() {
            positive(&format!("lambdas[{i}]"), l)?;
        }
        positive("mu_s", self.mu_s)?;
        positive("packet_size_bits", self.packet_size_bits)?;
        positive("idle_time", self.idle_time)?;
        non_negative("e_hover", self.e_hover)?;
        non_negative("e_tx", self.e_tx)?;
        non_negative("e_move", self.e_move)?;
        if self.e_move <= self.e_hover {
            return Err(Error::config(format!(
                "e_move ({}) must exceed e_hover ({})",
                self.e_move, self.e_hover
            )));
        }
        let [bmin, bmax] = self.battery_init_range;
        positive("battery_init_range[0]", bmin)?;
        if !(bmax.is_finite() && bmax >= bmin) {
            return Err(Error::config("battery_init_range must be [min, max] with min <= max"));
        }
        positive("radius_uav", self.radius_uav)?;
        let [rmin, rmax] = self.ue_radius_band;
        positive("ue_radius_band[0]", rmin)?;
        if !(rmax.is_finite() && rmax > rmin) {
            return Err(Error::config("ue_radius_band must be [min, max] with min < max"));
        }
        non_negative("ue_speed", self.ue_speed)?;
        non_negative("heading_sigma", self.heading_sigma)?;
        Ok(())
    }

    pub fn energy_costs(&self) -> EnergyCosts {
        EnergyCosts { e_move: self.e_move, e_hover: self.e_hover, e_tx: self.e_tx }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        SimConfig::default().validate().unwrap();
    }

    #[test]
    fn toml_round_trip() {
        let cfg = SimConfig { seed: 99, lambdas: vec![4.0, 6.0, 9.0, 7.0, 8.0], ..Default::default() };
        let back = SimConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn partial_file_uses_defaults() {
        let cfg = SimConfig::from_toml_str("n_ues = 3\nlambdas = [1, 2, 3]\narrival_model = \"exponential-rate\"\n").unwrap();
        assert_eq!(cfg.n_ues, 3);
        assert_eq!(cfg.arrival_model, ArrivalModel::ExponentialRate);
        assert_eq!(cfg.queue_limit, 200);
    }

    #[test]
    fn rejects_bad_values() {
        let bad = [
            SimConfig { lambdas: vec![3.0, 5.0], ..Default::default() },
            SimConfig { lambdas: vec![3.0, 5.0, 0.0, 8.0, 7.0], ..Default::default() },
            SimConfig { lambdas: vec![3.0, 5.0, f64::NAN, 8.0, 7.0], ..Default::default() },
            SimConfig { e_move: 0.1, e_hover: 0.2, ..Default::default() },
            SimConfig { sectors: 1, ..Default::default() },
            SimConfig { queue_limit: 0, ..Default::default() },
            SimConfig { n_ues: 0, lambdas: vec![], ..Default::default() },
            SimConfig { mu_s: -1.0, ..Default::default() },
        ];
        for cfg in bad {
            assert!(matches!(cfg.validate(), Err(Error::Config(_))), "{cfg:?}");
        }
    }

    #[test]
    fn unknown_key_is_rejected() {
        assert!(SimConfig::from_toml_str("n_uess = 3").is_err());
    }

    #[test]
    fn enum_names() {
        assert_eq!("poisson-gap".parse::<ArrivalModel>().unwrap(), ArrivalModel::PoissonGap);
        assert_eq!(AlphaMode::Euclidean.to_string(), "euclidean");
        assert!("gap".parse::<ArrivalModel>().is_err());
    }
}
