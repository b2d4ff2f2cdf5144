use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use effcap_cli::config::{self, Mode};
use effcap_cli::run::{self, RunError};
use toml::Value;

/// Effective capacity, training allocation and bit-energy sweeps for
/// fixed-rate links with estimated channels.
#[derive(Debug, Parser)]
#[command(name = "effcap", version)]
struct Cli {
    /// One of: ebn0-lowpower, ebn0-wideband, wideband-table, optimal-rho, validate-queue.
    mode: String,
    /// Flat TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration key (repeatable), e.g. --set sweep.snr.points=21.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
}

fn execute(cli: Cli) -> Result<usize, RunError> {
    let text = match &cli.config {
        Some(path) => run::read_config_text(path)?,
        None => String::new(),
    };
    let mut entries = config::parse_entries(&text)?;
    for spec in &cli.set {
        config::apply_override(&mut entries, spec)?;
    }
    let mode: Mode = cli.mode.parse()?;
    entries.insert("mode".into(), Value::String(mode.name().into()));
    entries.insert("output".into(), Value::String(cli.out.display().to_string()));
    if let Some(seed) = cli.seed {
        let seed = i64::try_from(seed).map_err(|_| config::ConfigError::Invalid {
            field: "seed".into(),
            reason: "too large".into(),
        })?;
        entries.insert("seed".into(), Value::Integer(seed));
    }
    let cfg = config::RunConfig::from_entries(&entries)?;
    run::run(&cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let out = cli.out.clone();
    match execute(cli) {
        Ok(rows) => {
            eprintln!("wrote {rows} rows to {}", out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("effcap: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
