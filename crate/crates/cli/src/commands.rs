use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use anyhow::{Context, Result};
use relay_core::bc::{evaluate, train, write_history, Dataset, EvalReport, MlpModel, MlpPolicy};
use relay_core::experiment::{policy_metrics, record_runs, simulate_runs, RunResult};
use relay_core::metrics::{emit_report, report_rows, summarize, PolicyMetrics, ReportRow};
use relay_core::trajectory::{read_jsonl, split_dataset, ReadMode, TrajectoryWriter};
use relay_core::{Error, ExpertConfig, ExpertPolicy, FeatureSpec, SimConfig, TrajectoryRecord};

use crate::args::{CompareArgs, EvaluateArgs, PolicyKind, ShiftArgs, SimulateArgs, TrainArgs};

/// A run finished but missed a requested threshold.
#[derive(Debug)]
pub struct ThresholdFailed(pub String);

impl std::fmt::Display for ThresholdFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "threshold not met: {}", self.0)
    }
}

impl std::error::Error for ThresholdFailed {}

fn banner(title: &str, body: &str) {
    eprintln!("# effective {title}");
    for line in body.lines().filter(|l| !l.trim().is_empty()) {
        eprintln!("#   {line}");
    }
}

pub(crate) fn sim_banner(cfg: &SimConfig, expert: ExpertConfig) {
    banner("configuration", &format!("{}# --hysteresis-delta {}", cfg.to_toml_string(), expert.hysteresis_delta));
}

pub fn load_model(path: &Path) -> Result<MlpModel> {
    MlpModel::load(path).with_context(|| format!("loading model {}", path.display()))
}

fn check_model(model: &MlpModel, cfg: &SimConfig) -> Result<()> {
    let fs = model.feature_spec;
    if fs.n_ues != cfg.n_ues || fs.normalize_by != cfg.queue_limit {
        return Err(Error::Data {
            line: None,
            msg: format!(
                "model was trained for {} UEs with queue limit {}, world has {} UEs and limit {}",
                fs.n_ues, fs.normalize_by, cfg.n_ues, cfg.queue_limit
            ),
        }
        .into());
    }
    Ok(())
}

fn runs(cfg: &SimConfig) -> std::ops::Range<u64> {
    0..cfg.runs as u64
}

/// Closed-loop runs under one policy.
fn run_policy(cfg: &SimConfig, kind: PolicyKind, expert: ExpertConfig, model: Option<&MlpModel>) -> Result<Vec<RunResult>> {
    Ok(match kind {
        PolicyKind::Expert => simulate_runs(cfg, runs(cfg), || ExpertPolicy::new(expert))?,
        PolicyKind::Clone => {
            let model = model.context("--model is required for the clone policy")?;
            simulate_runs(cfg, runs(cfg), || MlpPolicy::new(model.clone()))?
        }
    })
}

fn print_run_totals(results: &[RunResult]) {
    println!("run,frames,events,truncated,delivered,drops,energy_j,battery_left_j,clock_s");
    for r in results {
        let delivered: u64 = r.frames.iter().map(|f| f.delivered).sum();
        let energy: f64 = r.frames.iter().map(|f| f.energy).sum();
        println!(
            "{},{},{},{},{},{},{:.1},{:.1},{:.1}",
            r.run,
            r.frames.len(),
            r.events,
            r.truncated,
            delivered,
            r.total_drops,
            energy,
            r.battery_left,
            r.clock
        );
    }
}

type Column = (&'static str, fn(&ReportRow) -> f64);

fn print_summary(rows: &[ReportRow]) {
    let metrics: [Column; 5] = [
        ("edt", |r| r.edt),
        ("drops", |r| r.drops as f64),
        ("energy", |r| r.energy),
        ("longest_session", |r| r.longest_session as f64),
        ("delivered", |r| r.delivered as f64),
    ];
    println!("policy,metric,mean_per_frame,std_per_frame");
    for (name, f) in metrics {
        for (policy, (mean, std)) in summarize(rows, f) {
            println!("{policy},{name},{mean:.6e},{std:.6e}");
        }
    }
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let cfg = args.sim.resolve()?;
    let expert = args.sim.expert();
    sim_banner(&cfg, expert);
    let model = match args.policy {
        PolicyKind::Clone => {
            let path = args.model.as_deref().context("--model is required with --policy clone")?;
            let m = load_model(path)?;
            check_model(&m, &cfg)?;
            Some(m)
        }
        PolicyKind::Expert => None,
    };
    let recorded = match &model {
        Some(m) => record_runs(&cfg, runs(&cfg), || MlpPolicy::new(m.clone()))?,
        None => record_runs(&cfg, runs(&cfg), || ExpertPolicy::new(expert))?,
    };

    let file = File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut writer = TrajectoryWriter::new(BufWriter::new(file));
    for (_, recs) in &recorded {
        for r in recs {
            writer.append(r)?;
        }
    }
    let written = writer.written();
    writer.finish()?;

    let results: Vec<RunResult> = recorded.into_iter().map(|(r, _)| r).collect();
    emit_report(&[policy_metrics(args.policy.name(), &results)], &args.metrics_out)?;
    print_run_totals(&results);
    println!("records {written} -> {}", args.out.display());
    println!("metrics -> {}", args.metrics_out.display());
    Ok(())
}

fn read_records(path: &Path) -> Result<Vec<TrajectoryRecord>> {
    let recs = read_jsonl(path, ReadMode::Strict).with_context(|| format!("reading {}", path.display()))?;
    if recs.is_empty() {
        return Err(Error::Data { line: None, msg: format!("{} holds no records", path.display()) }.into());
    }
    Ok(recs)
}

pub fn train_cmd(args: &TrainArgs) -> Result<()> {
    let tc = args.resolve()?;
    let queue_limit = args.queue_limit.unwrap_or(SimConfig::default().queue_limit);
    banner(
        "training configuration",
        &format!("queue_limit = {queue_limit}\n{}", toml::to_string(&tc).context("rendering training config")?),
    );
    let records = read_records(&args.data)?;
    let n_ues = records[0].q.len();
    let spec = FeatureSpec::new(n_ues, queue_limit).with_active_ue(tc.active_ue_onehot);
    let (fit, val) = split_dataset(&records, tc.train_ratio, tc.seed)?;
    let fit = Dataset::from_records(&fit, &spec)?;
    let val = Dataset::from_records(&val, &spec)?;
    eprintln!("# {} records: {} train / {} validation, {} features", records.len(), fit.len(), val.len(), spec.feature_dim());

    let trained = train(spec, &fit, Some(&val), &tc, |s| {
        eprintln!(
            "epoch {:>3}  lr {:.3e}  train loss {:.4} acc {:.4}  val loss {:.4} acc {:.4}",
            s.epoch,
            s.lr,
            s.train_loss,
            s.train_acc,
            s.val_loss.unwrap_or(f64::NAN),
            s.val_acc.unwrap_or(f64::NAN)
        );
    })?;
    trained.model.save(&args.model_out)?;
    let file = File::create(&args.history_out).with_context(|| format!("creating {}", args.history_out.display()))?;
    write_history(&trained.history, BufWriter::new(file))?;

    let last = trained.history.last().expect("at least one epoch");
    let val_acc = last.val_acc.unwrap_or(last.train_acc);
    println!("final train_acc {:.4} train_loss {:.4}", last.train_acc, last.train_loss);
    println!("final val_acc {val_acc:.4} val_loss {:.4}", last.val_loss.unwrap_or(f64::NAN));
    println!("model -> {}", args.model_out.display());
    println!("history -> {}", args.history_out.display());
    if let Some(min) = args.min_val_accuracy {
        if val_acc < min {
            return Err(ThresholdFailed(format!("validation accuracy {val_acc:.4} < {min}")).into());
        }
    }
    Ok(())
}

fn print_report(report: &EvalReport) {
    println!("samples {}", report.n);
    println!("accuracy {:.4}", report.accuracy);
    println!("mean_loss {:.4}", report.mean_loss);
    print!("{}", report.confusion_csv());
}

pub fn evaluate_cmd(args: &EvaluateArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let records = read_records(&args.data)?;
    let data = Dataset::from_records(&records, &model.feature_spec)?;
    let report = evaluate(&model, &data)?;
    print_report(&report);
    if let Some(path) = &args.report_out {
        std::fs::write(path, serde_json::to_string_pretty(&report)?).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &args.confusion_out {
        std::fs::write(path, report.confusion_csv()).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(min) = args.min_accuracy {
        if report.accuracy < min {
            return Err(ThresholdFailed(format!("accuracy {:.4} < {min}", report.accuracy)).into());
        }
    }
    Ok(())
}

pub fn compare(args: &CompareArgs) -> Result<()> {
    let cfg = args.sim.resolve()?;
    let expert = args.sim.expert();
    sim_banner(&cfg, expert);
    if args.policies.is_empty() {
        return Err(Error::Argument("--policies needs at least one policy".into()).into());
    }
    let model = match &args.model {
        Some(p) => Some(load_model(p)?),
        None => None,
    };
    if let Some(m) = &model {
        check_model(m, &cfg)?;
    }
    let mut all: Vec<PolicyMetrics> = Vec::new();
    for (i, &kind) in args.policies.iter().enumerate() {
        let results = run_policy(&cfg, kind, expert, model.as_ref())?;
        // Repeated policies get a suffix so their rows stay distinguishable.
        let name = if args.policies[..i].contains(&kind) { format!("{}-{}", kind.name(), i) } else { kind.name().to_string() };
        all.push(policy_metrics(&name, &results));
    }
    let n = emit_report(&all, &args.out)?;
    print_summary(&report_rows(&all)?);
    println!("rows {n} -> {}", args.out.display());
    Ok(())
}

/// Teacher-forcing accuracy on fresh expert trajectories recorded under `cfg`.
fn expert_accuracy(cfg: &SimConfig, expert: ExpertConfig, model: &MlpModel) -> Result<(EvalReport, Vec<RunResult>)> {
    let recorded = record_runs(cfg, runs(cfg), || ExpertPolicy::new(expert))?;
    let records: Vec<TrajectoryRecord> = recorded.iter().flat_map(|(_, r)| r.iter().cloned()).collect();
    let report = evaluate(model, &Dataset::from_records(&records, &model.feature_spec)?)?;
    Ok((report, recorded.into_iter().map(|(r, _)| r).collect()))
}

pub fn shift(args: &ShiftArgs) -> Result<()> {
    let base = args.sim.resolve()?;
    let expert = args.sim.expert();
    if args.new_lambdas.len() != base.n_ues {
        return Err(Error::Argument(format!(
            "--new-lambdas has {} values but there are {} UEs",
            args.new_lambdas.len(),
            base.n_ues
        ))
        .into());
    }
    let shifted = SimConfig { lambdas: args.new_lambdas.clone(), ..base.clone() };
    shifted.validate()?;
    sim_banner(&shifted, expert);
    let model = load_model(&args.model)?;
    check_model(&model, &base)?;

    let (matched, _) = expert_accuracy(&base, expert, &model)?;
    let (moved, expert_runs) = expert_accuracy(&shifted, expert, &model)?;
    let clone_runs = run_policy(&shifted, PolicyKind::Clone, expert, Some(&model))?;
    let all = [policy_metrics("expert", &expert_runs), policy_metrics("clone", &clone_runs)];
    let n = emit_report(&all, &args.out)?;

    let drop_points = 100.0 * (matched.accuracy - moved.accuracy);
    println!("matched_lambdas {:?} accuracy {:.4}", base.lambdas, matched.accuracy);
    println!("shifted_lambdas {:?} accuracy {:.4}", shifted.lambdas, moved.accuracy);
    println!("accuracy_drop_points {drop_points:.2}");
    print_summary(&report_rows(&all)?);
    println!("rows {n} -> {}", args.out.display());
    if let Some(min) = args.min_drop {
        if drop_points < min {
            return Err(ThresholdFailed(format!("accuracy dropped {drop_points:.2} points, expected >= {min}")).into());
        }
    }
    Ok(())
}
