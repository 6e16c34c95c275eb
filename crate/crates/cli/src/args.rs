use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use relay_core::bc::TrainConfig;
use relay_core::{AlphaMode, ArrivalModel, ExpertConfig, SimConfig};

#[derive(Debug, Parser)]
#[command(name = "relay", version, about = "UAV relay scheduling: expert simulation, behavioral cloning, comparison")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the world under a policy; write trajectories and per-frame metrics.
    Simulate(SimulateArgs),
    /// Fit the cloning network on a trajectory file.
    Train(TrainArgs),
    /// Teacher-forcing accuracy of a model on a trajectory file.
    Evaluate(EvaluateArgs),
    /// Expert and clone, closed loop, on matched seeds.
    Compare(CompareArgs),
    /// Accuracy and closed-loop metrics of a model under changed arrival rates.
    Shift(ShiftArgs),
    /// Live demonstration session over WebSocket.
    Serve(ServeArgs),
}

/// World settings. Flags override the `--config` file, which overrides the
/// built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct SimArgs {
    /// TOML file with any subset of the world settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n_ues: Option<usize>,
    #[arg(long)]
    pub sectors: Option<usize>,
    #[arg(long)]
    pub queue_limit: Option<usize>,
    #[arg(long)]
    pub frame_packets_per_ue: Option<usize>,
    #[arg(long)]
    pub events_per_frame: Option<usize>,
    #[arg(long)]
    pub frames: Option<usize>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub packet_size_bits: Option<f64>,
    /// Per-UE arrival parameters, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
    /// Mean service time in seconds.
    #[arg(long)]
    pub mu_s: Option<f64>,
    #[arg(long)]
    pub arrival_model: Option<ArrivalModel>,
    /// `min,max` joules.
    #[arg(long, value_delimiter = ',')]
    pub battery_init_range: Option<Vec<f64>>,
    #[arg(long)]
    pub e_move: Option<f64>,
    #[arg(long)]
    pub e_hover: Option<f64>,
    #[arg(long)]
    pub e_tx: Option<f64>,
    #[arg(long)]
    pub idle_time: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub alpha_mode: Option<AlphaMode>,
    #[arg(long)]
    pub radius_uav: Option<f64>,
    /// `min,max` metres.
    #[arg(long, value_delimiter = ',')]
    pub ue_radius_band: Option<Vec<f64>>,
    #[arg(long)]
    pub ue_speed: Option<f64>,
    #[arg(long)]
    pub heading_sigma: Option<f64>,
    /// Packets the expert's best queue must lead the served one by before it switches.
    #[arg(long, default_value_t = ExpertConfig::default().hysteresis_delta)]
    pub hysteresis_delta: usize,
}

fn pair(name: &str, v: Vec<f64>) -> Result<[f64; 2], relay_core::Error> {
    <[f64; 2]>::try_from(v)
        .map_err(|v| relay_core::Error::Config(format!("{name} takes exactly two values, got {}", v.len())))
}

impl SimArgs {
    pub fn resolve(&self) -> relay_core::Result<SimConfig> {
        let mut c = match &self.config {
            Some(path) => SimConfig::load(path)?,
            None => SimConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),+) => { $(if let Some(v) = self.$f.clone() { c.$f = v; })+ };
        }
        set!(
            n_ues, sectors, queue_limit, frame_packets_per_ue, events_per_frame, frames, runs, packet_size_bits, lambdas,
            mu_s, arrival_model, e_move, e_hover, e_tx, idle_time, seed, alpha_mode, radius_uav, ue_speed, heading_sigma
        );
        if let Some(v) = self.battery_init_range.clone() {
            c.battery_init_range = pair("battery_init_range", v)?;
        }
        if let Some(v) = self.ue_radius_band.clone() {
            c.ue_radius_band = pair("ue_radius_band", v)?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn expert(&self) -> ExpertConfig {
        ExpertConfig { hysteresis_delta: self.hysteresis_delta }
    }
}

/// Which scheduler drives a closed-loop run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PolicyKind {
    Expert,
    Clone,
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Expert => "expert",
            Self::Clone => "clone",
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(long, value_enum, default_value_t = PolicyKind::Expert)]
    pub policy: PolicyKind,
    /// Model file; required with `--policy clone`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// JSON-lines trajectory output.
    #[arg(long, default_value = "trajectories.jsonl")]
    pub out: PathBuf,
    /// Per-frame metrics CSV.
    #[arg(long, default_value = "metrics.csv")]
    pub metrics_out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Trajectory file to learn from.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "model.json")]
    pub model_out: PathBuf,
    /// Per-epoch loss and accuracy CSV.
    #[arg(long, default_value = "history.csv")]
    pub history_out: PathBuf,
    /// TOML file with any subset of the training settings.
    #[arg(long)]
    pub train_config: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr0: Option<f64>,
    /// Hidden widths, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,
    /// Seeds initialization, shuffling and the train/validation split.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub active_ue_onehot: Option<bool>,
    #[arg(long)]
    pub train_ratio: Option<f64>,
    /// Queue normalisation; defaults to the world default.
    #[arg(long)]
    pub queue_limit: Option<usize>,
    /// Exit with status 4 if the final validation accuracy is lower.
    #[arg(long)]
    pub min_val_accuracy: Option<f64>,
}

impl TrainArgs {
    pub fn resolve(&self) -> relay_core::Result<TrainConfig> {
        let mut c = match &self.train_config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| relay_core::Error::Config(format!("cannot read {}: {e}", path.display())))?;
                TrainConfig::from_toml_str(&text)?
            }
            None => TrainConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),+) => { $(if let Some(v) = self.$f.clone() { c.$f = v; })+ };
        }
        set!(epochs, batch_size, lr0, hidden, seed, active_ue_onehot, train_ratio);
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Trajectory file, ideally recorded under seeds the model never saw.
    #[arg(long)]
    pub data: PathBuf,
    /// Full report as JSON.
    #[arg(long)]
    pub report_out: Option<PathBuf>,
    #[arg(long)]
    pub confusion_out: Option<PathBuf>,
    /// Exit with status 4 if accuracy is lower.
    #[arg(long)]
    pub min_accuracy: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Policies to run side by side; `expert,expert` checks determinism.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [PolicyKind::Expert, PolicyKind::Clone])]
    pub policies: Vec<PolicyKind>,
    #[arg(long, default_value = "compare.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ShiftArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(long)]
    pub model: PathBuf,
    /// Arrival parameters to test under, comma separated. The matched
    /// baseline uses the world's own `lambdas`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub new_lambdas: Vec<f64>,
    #[arg(long, default_value = "shift.csv")]
    pub out: PathBuf,
    /// Exit with status 4 unless accuracy falls by at least this many points.
    #[arg(long)]
    pub min_drop: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Directory of static files served at `/`.
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
    /// Appends the human's decisions to this trajectory file.
    #[arg(long)]
    pub record: Option<PathBuf>,
    /// Run index, selecting the random streams.
    #[arg(long, default_value_t = 0)]
    pub run: u64,
}
