//! The `relay` command line: experiment drivers and the demonstration server.

pub mod args;
pub mod commands;
pub mod serve;

use std::fs::File;
use std::io::LineWriter;

use anyhow::{Context, Result};
use relay_core::session::Session;

use args::{Cli, Command, ServeArgs};
pub use commands::ThresholdFailed;

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_DATA: u8 = 3;
pub const EXIT_THRESHOLD: u8 = 4;

/// Process exit status for a failed command.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ThresholdFailed>().is_some() {
        return EXIT_THRESHOLD;
    }
    match err.downcast_ref::<relay_core::Error>() {
        Some(relay_core::Error::Config(_) | relay_core::Error::Argument(_)) => EXIT_CONFIG,
        Some(_) => EXIT_DATA,
        None => 1,
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => commands::simulate(&a),
        Command::Train(a) => commands::train_cmd(&a),
        Command::Evaluate(a) => commands::evaluate_cmd(&a),
        Command::Compare(a) => commands::compare(&a),
        Command::Shift(a) => commands::shift(&a),
        Command::Serve(a) => serve_cmd(&a),
    }
}

fn serve_cmd(args: &ServeArgs) -> Result<()> {
    let cfg = args.sim.resolve()?;
    commands::sim_banner(&cfg, args.sim.expert());
    let rt = tokio::runtime::Runtime::new().context("starting async runtime")?;
    rt.block_on(async {
        let addr = format!("{}:{}", args.host, args.port);
        let listener =
            tokio::net::TcpListener::bind(&addr).await.with_context(|| format!("cannot listen on {addr}"))?;
        eprintln!("serving on http://{} (WebSocket at /ws)", listener.local_addr()?);
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        match &args.record {
            Some(path) => {
                let file = File::options()
                    .create(true)
                    .append(true)
                    .open(path)
                    .with_context(|| format!("opening {}", path.display()))?;
                let session = Session::recording(&cfg, args.run, LineWriter::new(file))?;
                serve::serve(listener, session, args.static_dir.clone(), shutdown).await?;
                eprintln!("recording -> {}", path.display());
            }
            None => {
                serve::serve(listener, Session::new(&cfg, args.run)?, args.static_dir.clone(), shutdown).await?;
            }
        }
        Ok(())
    })
}
