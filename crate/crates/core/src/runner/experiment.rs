//! One chain run with its trace, results and manifest on disk.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::engine::{Chain, ChainStats, TraceRecord};
use crate::error::{Error, Result};
use crate::observables::{energy_estimate, order_estimate, EstimatorResult};

use super::config::ExperimentConfig;

pub const TRACE_FILE: &str = "trace.csv";
pub const RESULTS_FILE: &str = "results.json";
pub const MANIFEST_FILE: &str = "manifest.toml";
pub const PARTIAL_MARKER: &str = "trace.partial";
pub const TRACE_HEADER: &str = "iter,n,move,accepted,running_n_mean,running_energy";

/// Decimal notation with `digits` significant digits.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.starts_with("-0") && s.trim_start_matches(['-', '0', '.']).is_empty() {
        s[1..].to_string()
    } else {
        s
    }
}

pub fn trace_line(r: &TraceRecord) -> String {
    format!(
        "{},{},{},{},{},{}",
        r.iter,
        r.n,
        r.direction.label(),
        r.accepted_label(),
        format_significant(r.running_n_mean, 12),
        format_significant(r.running_energy, 12)
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResults {
    pub iterations: usize,
    pub burn_in: usize,
    pub beta: f64,
    pub shift_constant: f64,
    pub final_cutoff: usize,
    /// `None` when the post-burn-in window is empty.
    pub energy: Option<EstimatorResult>,
    pub mean_order: Option<EstimatorResult>,
    pub stats: ChainStats,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub results: RunResults,
}

/// Runs the chain described by `config`, streaming `trace.csv` into
/// `config.out`. On a runtime error the partial trace is kept and a
/// `trace.partial` marker records the failure.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunSummary> {
    let config = config.clone().resolved();
    config.validate()?;
    let h = config.hamiltonian()?;
    let params = config.chain_params()?;
    let out = config.out.clone();
    fs::create_dir_all(&out)?;
    fs::write(out.join(MANIFEST_FILE), config.to_toml())?;

    let mut chain = Chain::new(&h, params.clone())?;
    let sweeps = (0..params.iterations).map(|_| chain.sweep());
    let records = stream_trace(&out, sweeps)?;

    let trace = chain.finish(records);
    let energy = energy_estimate(&trace, trace.beta, trace.shift_constant).ok();
    let mean_order = order_estimate(&trace).ok();
    let results = RunResults {
        iterations: trace.records.len(),
        burn_in: trace.burn_in,
        beta: trace.beta,
        shift_constant: trace.shift_constant,
        final_cutoff: trace.final_cutoff,
        energy,
        mean_order,
        stats: trace.stats,
    };
    let json = serde_json::to_string_pretty(&results).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(out.join(RESULTS_FILE), json + "\n")?;
    Ok(RunSummary {
        out_dir: out,
        results,
    })
}

/// Writes `trace.csv` in `dir` from `records`, stopping at the first error.
/// On error the rows written so far stay on disk next to a `trace.partial`
/// marker holding the message.
pub fn stream_trace<I>(dir: &Path, records: I) -> Result<Vec<TraceRecord>>
where
    I: IntoIterator<Item = Result<TraceRecord>>,
{
    let marker = dir.join(PARTIAL_MARKER);
    if marker.exists() {
        fs::remove_file(&marker)?;
    }
    let mut trace = BufWriter::new(File::create(dir.join(TRACE_FILE))?);
    writeln!(trace, "{TRACE_HEADER}")?;
    let mut kept = Vec::new();
    for r in records {
        match r {
            Ok(r) => {
                writeln!(trace, "{}", trace_line(&r))?;
                kept.push(r);
            }
            Err(e) => {
                trace.flush()?;
                fs::write(&marker, format!("{e}\n"))?;
                return Err(e);
            }
        }
    }
    trace.flush()?;
    Ok(kept)
}

pub fn trace_path(dir: &Path) -> PathBuf {
    dir.join(TRACE_FILE)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_significant(0.0, 12), "0");
        assert_eq!(format_significant(1.0, 12), "1.00000000000");
        assert_eq!(format_significant(-0.947311578947, 12), "-0.947311578947");
        assert_eq!(format_significant(12.5, 4), "12.50");
        assert_eq!(format_significant(123456.0, 3), "123456");
        assert_eq!(format_significant(0.00012345678, 3), "0.000123");
        assert_eq!(format_significant(-1e-20, 3), "-0.0000000000000000000100");
    }

    #[test]
    fn zero_iterations_write_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            iterations: 0,
            burn_in: 0,
            out: dir.path().join("run"),
            ..Default::default()
        };
        let s = run_experiment(&cfg).unwrap();
        let text = fs::read_to_string(trace_path(&s.out_dir)).unwrap();
        assert_eq!(text, format!("{TRACE_HEADER}\n"));
        assert!(s.results.energy.is_none());
        assert!(s.out_dir.join(MANIFEST_FILE).exists());
        assert!(s.out_dir.join(RESULTS_FILE).exists());
    }

    #[test]
    fn failure_leaves_marker() {
        let dir = tempfile::tempdir().unwrap();
        let h = crate::pauli::decompose_xx_chain(3, 1.0, true).unwrap();
        let mut chain = Chain::new(&h, crate::engine::ChainParams::new(1.0, 10, 1, 3)).unwrap();
        let records = (0..10).map(|i| {
            if i < 4 {
                chain.sweep()
            } else {
                Err(Error::Io("disk gone".into()))
            }
        });
        assert_eq!(
            stream_trace(dir.path(), records).unwrap_err(),
            Error::Io("disk gone".into())
        );
        let marker = fs::read_to_string(dir.path().join(PARTIAL_MARKER)).unwrap();
        assert!(marker.contains("disk gone"));
        let text = fs::read_to_string(dir.path().join(TRACE_FILE)).unwrap();
        assert_eq!(text.lines().count(), 5);
        // a clean rerun clears the marker
        stream_trace(dir.path(), std::iter::empty()).unwrap();
        assert!(!dir.path().join(PARTIAL_MARKER).exists());
    }
}
