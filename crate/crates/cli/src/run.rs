//! Executes a [`RunConfig`] and writes its CSV dataset.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use effcap_core::asymptotics::{self, wideband_result};
use effcap_core::capacity::{self, QosExponent};
use effcap_core::channel;
use effcap_core::queue::{self, ValidationOptions};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ConfigError, Mode, RunConfig};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numerical error: {0}")]
    Numerical(#[from] effcap_core::Error),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: io::Error },
}

impl RunError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 1,
            RunError::Numerical(_) => 2,
            RunError::Io { .. } => 3,
        }
    }
}

/// A header plus rows of numeric (or list) cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

fn cell(v: f64) -> String {
    // shortest representation that parses back to the same f64
    format!("{v}")
}

fn theta(t: f64) -> Result<QosExponent, RunError> {
    Ok(QosExponent::new(t)?)
}

/// Compute the dataset for `config` without touching the filesystem.
pub fn compute(config: &RunConfig) -> Result<Table, RunError> {
    match config.mode {
        Mode::Ebn0LowPower => low_power(config),
        Mode::Ebn0Wideband => wideband_sweep(config),
        Mode::WidebandTable => table(config),
        Mode::OptimalRho => optimal_rho(config),
        Mode::ValidateQueue => validate_queue(config),
    }
}

fn sweep_values(config: &RunConfig) -> Vec<f64> {
    config.sweep.map(|s| s.values()).unwrap_or_default()
}

fn low_power(config: &RunConfig) -> Result<Table, RunError> {
    let mut grid = sweep_values(config);
    let ascending = grid.first() < grid.last();
    if ascending {
        grid.reverse();
    }
    let mut rows = Vec::new();
    for &t in &config.theta_list {
        let mut scan = asymptotics::low_power_scan(theta(t)?, &config.params, &grid)?;
        if ascending {
            scan.reverse();
        }
        rows.extend(scan.into_iter().map(|pt| {
            vec![
                cell(pt.snr),
                cell(t),
                cell(pt.solution.rho_opt),
                cell(pt.solution.r_opt),
                cell(pt.solution.re),
                cell(pt.bit_energy.db()),
            ]
        }));
    }
    Ok(Table {
        header: vec!["snr", "theta", "rho_opt", "r_opt", "re_bits_s_hz", "ebn0_db"],
        rows,
    })
}

fn wideband_sweep(config: &RunConfig) -> Result<Table, RunError> {
    let grid = sweep_values(config);
    let mut rows = Vec::new();
    for &t in &config.theta_list {
        let th = theta(t)?;
        let chunk = grid
            .par_iter()
            .map(|&b| {
                let p = config.params.with_bandwidth(b)?;
                let sol = capacity::solve(th, &p);
                Ok(vec![
                    cell(b),
                    cell(t),
                    cell(sol.re),
                    cell(capacity::bit_energy(&p, sol.re).db()),
                ])
            })
            .collect::<Result<Vec<_>, effcap_core::Error>>()?;
        rows.extend(chunk);
    }
    Ok(Table {
        header: vec!["bandwidth", "theta", "re_bits_s_hz", "ebn0_db"],
        rows,
    })
}

fn table(config: &RunConfig) -> Result<Table, RunError> {
    let rows = config
        .theta_list
        .iter()
        .map(|&t| {
            let w = wideband_result(theta(t)?, &config.params);
            Ok(vec![
                cell(t),
                cell(w.constants.alpha_star),
                cell(w.constants.xi),
                cell(w.ebn0_min_db),
                cell(w.s0),
            ])
        })
        .collect::<Result<_, RunError>>()?;
    Ok(Table {
        header: vec!["theta", "alpha_star", "xi", "ebn0_min_db", "s0"],
        rows,
    })
}

fn optimal_rho(config: &RunConfig) -> Result<Table, RunError> {
    let rows = sweep_values(config)
        .par_iter()
        .map(|&snr| {
            let p = config.params.with_snr_at_fixed_bandwidth(snr)?;
            let rho = channel::optimal_rho(&p);
            let snr_eff = channel::estimation_stats(&p, rho)?.snr_eff;
            Ok(vec![cell(snr), cell(rho), cell(snr_eff)])
        })
        .collect::<Result<_, effcap_core::Error>>()?;
    Ok(Table {
        header: vec!["snr", "rho_opt", "snr_eff_opt"],
        rows,
    })
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(";")
}

fn validate_queue(config: &RunConfig) -> Result<Table, RunError> {
    let opts = ValidationOptions {
        frames: config.frames,
        seed: config.seed,
        stream: 0,
        warmup_fraction: config.warmup_fraction,
        q_levels: None,
    };
    let mut rows = Vec::new();
    for &t in &config.theta_list {
        for v in queue::validate_replications(theta(t)?, &config.params, config.safety, &opts, config.replications) {
            let v = v?;
            let s = &v.summary;
            rows.push(vec![
                cell(v.theta),
                cell(v.safety),
                s.seed.to_string(),
                s.stream.to_string(),
                s.frames.to_string(),
                cell(s.arrival_per_frame),
                cell(s.r),
                cell(s.rho),
                cell(s.alpha),
                cell(s.on_fraction),
                join(&s.q_levels),
                join(&s.counts),
                cell(v.theta_hat),
                cell(v.estimate.r_squared),
                cell(v.ratio),
            ]);
        }
    }
    Ok(Table {
        header: vec![
            "theta",
            "safety",
            "seed",
            "stream",
            "frames",
            "arrival_bits_per_frame",
            "r",
            "rho",
            "alpha",
            "on_fraction",
            "q_levels",
            "counts",
            "theta_hat",
            "r_squared",
            "ratio",
        ],
        rows,
    })
}

/// Serialise a table as CSV (comma separated, LF line endings).
pub fn to_csv(table: &Table) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(&table.header).expect("in-memory write");
    for row in &table.rows {
        w.write_record(row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Write `bytes` to `path` through a temporary file in the same directory,
/// so a failed run never leaves a partial file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), RunError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    if !dir.is_dir() {
        return Err(io_err(path)(io::Error::new(
            io::ErrorKind::NotFound,
            "output directory does not exist",
        )));
    }
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(path))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.as_file().sync_all().map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| io_err(path)(e.error))?;
    Ok(())
}

/// Run `config` and write its CSV to the configured output path. Returns the
/// number of data rows written.
pub fn run(config: &RunConfig) -> Result<usize, RunError> {
    let path = config.output_path.as_deref().ok_or_else(|| ConfigError::Invalid {
        field: "output".into(),
        reason: "an output path is required".into(),
    })?;
    let table = compute(config)?;
    write_atomic(path, &to_csv(&table))?;
    Ok(table.rows.len())
}

/// Read a config file, mapping failures to the I/O exit status.
pub fn read_config_text(path: &Path) -> Result<String, RunError> {
    fs::read_to_string(path).map_err(io_err(path))
}
