//! The benchmark corpus: `.cup` programs with `.expect` TOML sidecars that
//! hold each program's engine parameters and correctness predicate.

use std::fs;
use std::path::{Path, PathBuf};

use cup_core::vm::{DistKind, EmpiricalDistribution, Value};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineName {
    Importance,
    Mcmc,
    Enumerate,
    None,
}

impl EngineName {
    pub fn as_str(self) -> &'static str {
        match self {
            EngineName::Importance => "importance",
            EngineName::Mcmc => "mcmc",
            EngineName::Enumerate => "enumerate",
            EngineName::None => "none",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Check {
    /// The printed result equals `value`.
    Value { value: String },
    /// Posterior mean within `tol` of `target`.
    Mean { target: f64, tol: f64 },
    /// Total variation to Binomial(n, p) below `tol`.
    Binomial { n: u64, p: f64, tol: f64 },
    /// Every mass matches the geometric law, renormalized to the enumerated
    /// depth, within `tol`.
    Geometric { p: f64, tol: f64 },
    /// Every support value is a vector with a length in `min..=max`.
    VectorLength { min: usize, max: usize },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    pub engine: EngineName,
    pub samples: Option<usize>,
    pub max_executions: Option<usize>,
    pub max_depth: Option<usize>,
    /// Every random choice has finite support.
    #[serde(default)]
    pub discrete: bool,
    pub check: Check,
}

#[derive(Debug, Clone)]
pub struct Benchmark {
    pub name: String,
    pub path: PathBuf,
    pub source: String,
    pub expect: Expectation,
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("bad expectations in {path}: {source}")]
    Toml {
        path: PathBuf,
        source: toml::de::Error,
    },
}

/// The corpus shipped with the repository.
pub fn default_dir() -> PathBuf {
    let local = PathBuf::from("corpus");
    if local.is_dir() {
        return local;
    }
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// Every program with a sidecar, sorted by name.
pub fn load(dir: &Path) -> Result<Vec<Benchmark>, CorpusError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CorpusError::Io { path, source }
    };
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(io(dir))? {
        let path = entry.map_err(io(dir))?.path();
        if path.extension().is_none_or(|e| e != "cup") {
            continue;
        }
        let sidecar = path.with_extension("expect");
        if !sidecar.exists() {
            continue;
        }
        let text = fs::read_to_string(&sidecar).map_err(io(&sidecar))?;
        let expect = toml::from_str(&text).map_err(|source| CorpusError::Toml {
            path: sidecar.clone(),
            source,
        })?;
        let source = fs::read_to_string(&path).map_err(io(&path))?;
        let name = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
        out.push(Benchmark {
            name,
            path,
            source,
            expect,
        });
    }
    out.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(out)
}

fn posterior(v: &Value) -> Result<std::sync::Arc<EmpiricalDistribution>, String> {
    match v {
        Value::Dist(d) if d.kind == DistKind::Empirical => d.as_empirical().ok_or_else(|| "dangling posterior".into()),
        other => Err(format!("expected a posterior, got {other}")),
    }
}

fn binomial_pmf(n: u64, p: f64, k: u64) -> f64 {
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
}

impl Check {
    /// `Ok` with a short summary, or the reason the result is wrong.
    pub fn evaluate(&self, result: &Value, max_depth: Option<usize>) -> Result<String, String> {
        match self {
            Check::Value { value } => {
                let got = result.to_string();
                if &got == value {
                    Ok(got)
                } else {
                    Err(format!("expected {value}, got {got}"))
                }
            }
            Check::Mean { target, tol } => {
                let m = posterior(result)?.mean().map_err(|e| e.to_string())?;
                if (m - target).abs() <= *tol {
                    Ok(format!("mean {m:.4}"))
                } else {
                    Err(format!("mean {m} not within {tol} of {target}"))
                }
            }
            Check::Binomial { n, p, tol } => {
                let d = posterior(result)?;
                let mut tv = 0.0;
                for k in 0..=*n {
                    tv += (d.prob(&Value::Int(k as i64)) - binomial_pmf(*n, *p, k)).abs();
                }
                let in_range = |v: &Value| matches!(v, Value::Int(k) if (0..=*n as i64).contains(k));
                tv += d.support.iter().filter(|(v, _)| !in_range(v)).map(|(_, q)| q).sum::<f64>();
                tv *= 0.5;
                if tv < *tol {
                    Ok(format!("tv {tv:.4}"))
                } else {
                    Err(format!("tv {tv} to binomial({n}, {p}) exceeds {tol}"))
                }
            }
            Check::Geometric { p, tol } => {
                let d = posterior(result)?;
                let mass = |k: i64| p * (1.0 - p).powi(k as i32);
                let z = match max_depth {
                    Some(depth) => 1.0 - (1.0 - p).powi(depth as i32),
                    None => d
                        .support
                        .iter()
                        .map(|(v, _)| match v {
                            Value::Int(k) => mass(*k),
                            _ => 0.0,
                        })
                        .sum(),
                };
                let mut worst: f64 = 0.0;
                for (v, q) in &d.support {
                    let Value::Int(k) = v else {
                        return Err(format!("non-integer outcome {v}"));
                    };
                    worst = worst.max((q - mass(*k) / z).abs());
                }
                if let Some(depth) = max_depth {
                    if d.support.len() != depth {
                        return Err(format!("{} outcomes, expected {depth}", d.support.len()));
                    }
                }
                if worst <= *tol {
                    Ok(format!("max error {worst:.2e}"))
                } else {
                    Err(format!("mass error {worst} exceeds {tol}"))
                }
            }
            Check::VectorLength { min, max } => {
                let d = posterior(result)?;
                for (v, _) in &d.support {
                    match v {
                        Value::Vector(xs) if (*min..=*max).contains(&xs.len()) => {}
                        other => return Err(format!("unexpected outcome {other}")),
                    }
                }
                Ok(format!("{} outcomes", d.support.len()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_sidecars_parse() {
        let all = load(&default_dir()).unwrap();
        assert_eq!(all.len(), 11);
        assert!(all.iter().any(|b| b.name == "prefix"));
    }

    #[test]
    fn binomial_pmf_sums_to_one() {
        let s: f64 = (0..=10).map(|k| binomial_pmf(10, 0.3, k)).sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert!((binomial_pmf(10, 0.5, 5) - 252.0 / 1024.0).abs() < 1e-15);
    }

    #[test]
    fn value_check() {
        let c = Check::Value { value: "3".into() };
        assert!(c.evaluate(&Value::Int(3), None).is_ok());
        assert!(c.evaluate(&Value::Int(4), None).is_err());
    }
}
