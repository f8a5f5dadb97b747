//! Timed runs of the corpus. Each benchmark's predicate is checked on an
//! untimed run first and again on every timed run; a failing benchmark gets
//! no timing.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use crate::commands::{execute_compiled, CliError};
use crate::config::RunConfig;
use crate::corpus::{self, Benchmark, EngineName};

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub corpus: PathBuf,
    pub filter: Option<String>,
    pub repeats: usize,
    pub seed: u64,
    pub samples: Option<usize>,
    pub max_executions: Option<usize>,
    pub max_depth: Option<usize>,
    /// 2 million importance samples, 100 thousand mcmc steps and 10
    /// thousand enumerated executions.
    pub full_scale: bool,
    pub parallel: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            corpus: corpus::default_dir(),
            filter: None,
            repeats: 3,
            seed: 0,
            samples: None,
            max_executions: None,
            max_depth: None,
            full_scale: false,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BenchStatus {
    Ok(String),
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub name: String,
    pub engine: &'static str,
    pub samples: Option<usize>,
    /// Wall-clock seconds per repeat; empty unless every run passed.
    pub times: Vec<f64>,
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub status: BenchStatus,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|r| matches!(r.status, BenchStatus::Ok(_)))
    }

    pub fn table(&self) -> String {
        let mut s = format!(
            "{:<22} {:<11} {:>9} {:>10} {:>10}  {}\n",
            "benchmark", "engine", "samples", "mean_s", "sd_s", "status"
        );
        for r in &self.rows {
            let num = |x: Option<f64>| x.map_or("-".to_string(), |x| format!("{x:.4}"));
            let samples = r.samples.map_or("-".to_string(), |n| n.to_string());
            let status = match &r.status {
                BenchStatus::Ok(m) => format!("ok ({m})"),
                BenchStatus::Failed(m) => format!("FAILED: {m}"),
            };
            s.push_str(&format!(
                "{:<22} {:<11} {:>9} {:>10} {:>10}  {}\n",
                r.name,
                r.engine,
                samples,
                num(r.mean),
                num(r.sd),
                status
            ));
        }
        s
    }
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// The run configuration a benchmark uses under `opts`.
pub fn bench_config(b: &Benchmark, opts: &BenchOptions) -> RunConfig {
    let mut cfg = RunConfig::new(&b.path);
    cfg.parallel = opts.parallel;
    cfg.max_depth = opts.max_depth.or(b.expect.max_depth);
    let (full_samples, full_exec) = match b.expect.engine {
        EngineName::Importance => (Some(2_000_000), None),
        EngineName::Mcmc => (Some(100_000), None),
        EngineName::Enumerate => (None, Some(10_000)),
        EngineName::None => (None, None),
    };
    cfg.samples = opts.samples.or(if opts.full_scale { full_samples } else { None });
    cfg.max_executions = opts
        .max_executions
        .or(if opts.full_scale { full_exec } else { None });
    cfg
}

fn effective_count(b: &Benchmark, cfg: &RunConfig) -> Option<usize> {
    match b.expect.engine {
        EngineName::Importance | EngineName::Mcmc => cfg.samples.or(b.expect.samples),
        EngineName::Enumerate => cfg.max_executions.or(b.expect.max_executions),
        EngineName::None => None,
    }
}

pub fn run_benchmark(b: &Benchmark, opts: &BenchOptions) -> BenchRow {
    let base = bench_config(b, opts);
    let mut row = BenchRow {
        name: b.name.clone(),
        engine: b.expect.engine.as_str(),
        samples: effective_count(b, &base),
        times: Vec::new(),
        mean: None,
        sd: None,
        status: BenchStatus::Failed("not run".into()),
    };
    let file = b.path.display().to_string();
    let once = |seed: u64, timed: bool| -> Result<(String, f64), String> {
        let start = Instant::now();
        let compiled = cup_core::pipeline::compile(&b.source, &file).map_err(|e| CliError::from(e).to_string())?;
        let cfg = RunConfig { seed, ..base.clone() };
        let x = execute_compiled(&compiled, &cfg).map_err(|e| e.report().trim_end().to_string())?;
        let secs = start.elapsed().as_secs_f64();
        let summary = b.expect.check.evaluate(&x.value, cfg.max_depth)?;
        Ok((summary, if timed { secs } else { 0.0 }))
    };
    let summary = match once(opts.seed, false) {
        Ok((s, _)) => s,
        Err(e) => {
            row.status = BenchStatus::Failed(e);
            return row;
        }
    };
    for r in 0..opts.repeats.max(1) {
        match once(opts.seed.wrapping_add(r as u64), true) {
            Ok((_, t)) => row.times.push(t),
            Err(e) => {
                row.times.clear();
                row.status = BenchStatus::Failed(format!("repeat {r}: {e}"));
                return row;
            }
        }
    }
    let (m, sd) = mean_sd(&row.times);
    row.mean = Some(m);
    row.sd = Some(sd);
    row.status = BenchStatus::Ok(summary);
    row
}

pub fn run_bench(opts: &BenchOptions, progress: &mut dyn Write) -> Result<BenchReport, corpus::CorpusError> {
    let all = corpus::load(&opts.corpus)?;
    let mut report = BenchReport::default();
    for b in all
        .iter()
        .filter(|b| opts.filter.as_ref().is_none_or(|f| b.name.contains(f.as_str())))
    {
        let row = run_benchmark(b, opts);
        let _ = writeln!(progress, "{}: {}", row.name, if matches!(row.status, BenchStatus::Ok(_)) { "ok" } else { "FAILED" });
        report.rows.push(row);
    }
    Ok(report)
}

/// Run the bench command; 0 when every benchmark passed, 2 otherwise.
pub fn cmd_bench(opts: &BenchOptions, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match run_bench(opts, err) {
        Ok(report) if report.rows.is_empty() => {
            let _ = writeln!(err, "error: no benchmark matches the filter");
            1
        }
        Ok(report) => {
            let _ = out.write_all(report.table().as_bytes());
            if report.all_ok() {
                0
            } else {
                2
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_sample_sd() {
        let (m, sd) = mean_sd(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((sd - 1.0).abs() < 1e-15);
        assert_eq!(mean_sd(&[4.0]), (4.0, 0.0));
    }

    #[test]
    fn full_scale_counts() {
        let all = corpus::load(&corpus::default_dir()).unwrap();
        let opts = BenchOptions {
            full_scale: true,
            ..BenchOptions::default()
        };
        let coin = all.iter().find(|b| b.name == "biasedcoin").unwrap();
        assert_eq!(bench_config(coin, &opts).samples, Some(2_000_000));
        let geo = all.iter().find(|b| b.name == "enumerate_geometric").unwrap();
        let cfg = bench_config(geo, &opts);
        assert_eq!((cfg.max_executions, cfg.max_depth), (Some(10_000), Some(20)));
    }

    #[test]
    fn fibonacci_row_is_verified() {
        let opts = BenchOptions {
            filter: Some("fibonacci".into()),
            repeats: 2,
            ..BenchOptions::default()
        };
        let report = run_bench(&opts, &mut std::io::sink()).unwrap();
        assert_eq!(report.rows.len(), 1);
        let r = &report.rows[0];
        assert_eq!(r.status, BenchStatus::Ok("75025".into()));
        assert_eq!(r.times.len(), 2);
        assert!(r.sd.unwrap() >= 0.0);
    }
}
