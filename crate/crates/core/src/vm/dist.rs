//! Distribution values: a kind tag plus three 64-bit payload slots.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use rand_distr::{Beta, Distribution, Exp, Normal, Poisson};

use super::error::VmErrorKind;
use super::rng::Rng;
use super::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum DistKind {
    Normal = 0,
    Bernoulli = 1,
    Poisson = 2,
    UniformDiscrete = 3,
    UniformContinuous = 4,
    Beta = 5,
    Exponential = 6,
    Empirical = 7,
}

impl DistKind {
    pub fn name(self) -> &'static str {
        match self {
            DistKind::Normal => "normal",
            DistKind::Bernoulli => "bernoulli",
            DistKind::Poisson => "poisson",
            DistKind::UniformDiscrete => "uniform-discrete",
            DistKind::UniformContinuous => "uniform-continuous",
            DistKind::Beta => "beta",
            DistKind::Exponential => "exponential",
            DistKind::Empirical => "empirical",
        }
    }

    pub fn is_continuous(self) -> bool {
        matches!(
            self,
            DistKind::Normal | DistKind::UniformContinuous | DistKind::Beta | DistKind::Exponential
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DistValue {
    pub kind: DistKind,
    pub p: [u64; 3],
}

/// Normalized weighted support, as produced by inference.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    /// Distinct values with probabilities summing to 1, in first-occurrence
    /// order of the underlying samples.
    pub support: Vec<(Value, f64)>,
    /// Log of the mean unnormalized weight, for weighted engines.
    pub log_z: Option<f64>,
    /// Number of weighted samples or completed paths behind the estimate.
    pub count: usize,
    cumulative: Vec<f64>,
    index: HashMap<Value, usize>,
}

impl EmpiricalDistribution {
    pub fn new(support: Vec<(Value, f64)>, log_z: Option<f64>) -> Self {
        let mut acc = 0.0;
        let cumulative = support
            .iter()
            .map(|(_, p)| {
                acc += p;
                acc
            })
            .collect();
        let index = support.iter().enumerate().map(|(i, (v, _))| (v.clone(), i)).collect();
        EmpiricalDistribution {
            count: support.len(),
            support,
            log_z,
            cumulative,
            index,
        }
    }

    pub fn with_count(mut self, count: usize) -> Self {
        self.count = count;
        self
    }

    pub fn prob(&self, v: &Value) -> f64 {
        self.index.get(v).map_or(0.0, |&i| self.support[i].1)
    }

    pub fn sample(&self, rng: &mut Rng) -> Value {
        let total = self.cumulative.last().copied().unwrap_or(0.0);
        let u = rng.uniform() * total;
        let i = self.cumulative.partition_point(|&c| c <= u);
        self.support[i.min(self.support.len() - 1)].0.clone()
    }

    fn numeric(&self) -> Result<Vec<(f64, f64)>, VmErrorKind> {
        self.support
            .iter()
            .map(|(v, p)| {
                v.as_f64()
                    .map(|x| (x, *p))
                    .ok_or_else(|| VmErrorKind::Undefined(format!("moments of an empirical distribution over {}", v.type_name())))
            })
            .collect()
    }

    pub fn mean(&self) -> Result<f64, VmErrorKind> {
        Ok(self.numeric()?.iter().map(|(x, p)| x * p).sum())
    }

    pub fn variance(&self) -> Result<f64, VmErrorKind> {
        let xs = self.numeric()?;
        let m: f64 = xs.iter().map(|(x, p)| x * p).sum();
        Ok(xs.iter().map(|(x, p)| p * (x - m) * (x - m)).sum())
    }
}

fn registry() -> &'static RwLock<Vec<Arc<EmpiricalDistribution>>> {
    static REG: OnceLock<RwLock<Vec<Arc<EmpiricalDistribution>>>> = OnceLock::new();
    REG.get_or_init(|| RwLock::new(Vec::new()))
}

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

fn bad(msg: String) -> VmErrorKind {
    VmErrorKind::InvalidDist(msg)
}

impl DistValue {
    fn reals(kind: DistKind, a: f64, b: f64) -> Self {
        DistValue {
            kind,
            p: [a.to_bits(), b.to_bits(), 0],
        }
    }

    fn f(&self, i: usize) -> f64 {
        f64::from_bits(self.p[i])
    }

    fn i(&self, i: usize) -> i64 {
        self.p[i] as i64
    }

    pub fn normal(mean: f64, sd: f64) -> Result<Self, VmErrorKind> {
        if !(sd > 0.0 && sd.is_finite() && mean.is_finite()) {
            return Err(bad(format!("normal({mean}, {sd}) needs finite mean and sd > 0")));
        }
        Ok(Self::reals(DistKind::Normal, mean, sd))
    }

    pub fn bernoulli(p: f64) -> Result<Self, VmErrorKind> {
        if !(0.0..=1.0).contains(&p) {
            return Err(bad(format!("bernoulli({p}) needs p in [0, 1]")));
        }
        Ok(Self::reals(DistKind::Bernoulli, p, 0.0))
    }

    pub fn poisson(rate: f64) -> Result<Self, VmErrorKind> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(bad(format!("poisson({rate}) needs rate > 0")));
        }
        Ok(Self::reals(DistKind::Poisson, rate, 0.0))
    }

    /// Integers `a <= k < b`.
    pub fn uniform_discrete(a: i64, b: i64) -> Result<Self, VmErrorKind> {
        if a >= b {
            return Err(bad(format!("uniform-discrete({a}, {b}) needs a < b")));
        }
        Ok(DistValue {
            kind: DistKind::UniformDiscrete,
            p: [a as u64, b as u64, 0],
        })
    }

    pub fn uniform_continuous(a: f64, b: f64) -> Result<Self, VmErrorKind> {
        if !(a < b && a.is_finite() && b.is_finite()) {
            return Err(bad(format!("uniform-continuous({a}, {b}) needs a < b")));
        }
        Ok(Self::reals(DistKind::UniformContinuous, a, b))
    }

    pub fn beta(a: f64, b: f64) -> Result<Self, VmErrorKind> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(bad(format!("beta({a}, {b}) needs positive parameters")));
        }
        Ok(Self::reals(DistKind::Beta, a, b))
    }

    pub fn exponential(rate: f64) -> Result<Self, VmErrorKind> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(bad(format!("exponential({rate}) needs rate > 0")));
        }
        Ok(Self::reals(DistKind::Exponential, rate, 0.0))
    }

    /// Store `e` in the process-wide support table and return a handle.
    pub fn empirical(e: EmpiricalDistribution) -> Self {
        let mut reg = registry().write().expect("empirical registry poisoned");
        reg.push(Arc::new(e));
        DistValue {
            kind: DistKind::Empirical,
            p: [(reg.len() - 1) as u64, 0, 0],
        }
    }

    pub fn as_empirical(&self) -> Option<Arc<EmpiricalDistribution>> {
        if self.kind != DistKind::Empirical {
            return None;
        }
        registry()
            .read()
            .expect("empirical registry poisoned")
            .get(self.p[0] as usize)
            .cloned()
    }

    fn empirical_table(&self) -> Result<Arc<EmpiricalDistribution>, VmErrorKind> {
        self.as_empirical().ok_or(VmErrorKind::UnsupportedDist(self.kind as u8))
    }

    pub fn sample(&self, rng: &mut Rng) -> Result<Value, VmErrorKind> {
        Ok(match self.kind {
            DistKind::Normal => Value::Real(Normal::new(self.f(0), self.f(1)).map_err(|e| bad(e.to_string()))?.sample(rng.inner())),
            DistKind::Bernoulli => Value::Bool(rng.uniform() < self.f(0)),
            DistKind::Poisson => {
                let k: f64 = Poisson::new(self.f(0)).map_err(|e| bad(e.to_string()))?.sample(rng.inner());
                Value::Int(k as i64)
            }
            DistKind::UniformDiscrete => {
                let (a, b) = (self.i(0), self.i(1));
                Value::Int(a + rng.below((b - a) as usize) as i64)
            }
            DistKind::UniformContinuous => {
                let (a, b) = (self.f(0), self.f(1));
                Value::Real(a + (b - a) * rng.uniform())
            }
            DistKind::Beta => Value::Real(Beta::new(self.f(0), self.f(1)).map_err(|e| bad(e.to_string()))?.sample(rng.inner())),
            DistKind::Exponential => Value::Real(Exp::new(self.f(0)).map_err(|e| bad(e.to_string()))?.sample(rng.inner())),
            DistKind::Empirical => self.empirical_table()?.sample(rng),
        })
    }

    fn mismatch(&self, x: &Value) -> VmErrorKind {
        VmErrorKind::TypeMismatch(format!("cannot score a {} under {}", x.type_name(), self.kind.name()))
    }

    /// Natural-log density or mass; `-inf` outside the support.
    pub fn score(&self, x: &Value) -> Result<f64, VmErrorKind> {
        let real = |x: &Value| match x {
            Value::Real(r) => Ok(*r),
            _ => Err(self.mismatch(x)),
        };
        let int = |x: &Value| match x {
            Value::Int(i) => Ok(*i),
            _ => Err(self.mismatch(x)),
        };
        Ok(match self.kind {
            DistKind::Normal => {
                let (m, s) = (self.f(0), self.f(1));
                let z = (real(x)? - m) / s;
                -0.5 * z * z - s.ln() - LN_SQRT_2PI
            }
            DistKind::Bernoulli => {
                let Value::Bool(b) = x else {
                    return Err(self.mismatch(x));
                };
                let p = self.f(0);
                if *b {
                    p.ln()
                } else {
                    (1.0 - p).ln()
                }
            }
            DistKind::Poisson => {
                let k = int(x)?;
                if k < 0 {
                    f64::NEG_INFINITY
                } else {
                    let l = self.f(0);
                    k as f64 * l.ln() - l - libm::lgamma(k as f64 + 1.0)
                }
            }
            DistKind::UniformDiscrete => {
                let (a, b, k) = (self.i(0), self.i(1), int(x)?);
                if a <= k && k < b {
                    -((b - a) as f64).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            DistKind::UniformContinuous => {
                let (a, b, v) = (self.f(0), self.f(1), real(x)?);
                if a <= v && v <= b {
                    -(b - a).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            DistKind::Beta => {
                let (a, b, v) = (self.f(0), self.f(1), real(x)?);
                if !(0.0..=1.0).contains(&v) {
                    return Ok(f64::NEG_INFINITY);
                }
                let ln_beta = libm::lgamma(a) + libm::lgamma(b) - libm::lgamma(a + b);
                let term = |c: f64, y: f64| if c == 1.0 { 0.0 } else { (c - 1.0) * y.ln() };
                term(a, v) + term(b, 1.0 - v) - ln_beta
            }
            DistKind::Exponential => {
                let (l, v) = (self.f(0), real(x)?);
                if v < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    l.ln() - l * v
                }
            }
            DistKind::Empirical => self.empirical_table()?.prob(x).ln(),
        })
    }

    pub fn mean(&self) -> Result<f64, VmErrorKind> {
        Ok(match self.kind {
            DistKind::Normal => self.f(0),
            DistKind::Bernoulli | DistKind::Poisson => self.f(0),
            DistKind::UniformDiscrete => (self.i(0) + self.i(1) - 1) as f64 / 2.0,
            DistKind::UniformContinuous => (self.f(0) + self.f(1)) / 2.0,
            DistKind::Beta => self.f(0) / (self.f(0) + self.f(1)),
            DistKind::Exponential => 1.0 / self.f(0),
            DistKind::Empirical => self.empirical_table()?.mean()?,
        })
    }

    pub fn variance(&self) -> Result<f64, VmErrorKind> {
        Ok(match self.kind {
            DistKind::Normal => self.f(1) * self.f(1),
            DistKind::Bernoulli => self.f(0) * (1.0 - self.f(0)),
            DistKind::Poisson => self.f(0),
            DistKind::UniformDiscrete => {
                let n = (self.i(1) - self.i(0)) as f64;
                (n * n - 1.0) / 12.0
            }
            DistKind::UniformContinuous => (self.f(1) - self.f(0)).powi(2) / 12.0,
            DistKind::Beta => {
                let (a, b) = (self.f(0), self.f(1));
                a * b / ((a + b).powi(2) * (a + b + 1.0))
            }
            DistKind::Exponential => 1.0 / (self.f(0) * self.f(0)),
            DistKind::Empirical => self.empirical_table()?.variance()?,
        })
    }

    /// Finite support with log masses, for exhaustive enumeration.
    /// Zero-mass points are omitted.
    pub fn support(&self) -> Result<Vec<(Value, f64)>, VmErrorKind> {
        let out = match self.kind {
            DistKind::Bernoulli => {
                let p = self.f(0);
                vec![(Value::Bool(true), p.ln()), (Value::Bool(false), (1.0 - p).ln())]
            }
            DistKind::UniformDiscrete => {
                let (a, b) = (self.i(0), self.i(1));
                let lm = -((b - a) as f64).ln();
                (a..b).map(|k| (Value::Int(k), lm)).collect()
            }
            DistKind::Empirical => self
                .empirical_table()?
                .support
                .iter()
                .map(|(v, p)| (v.clone(), p.ln()))
                .collect(),
            DistKind::Poisson => return Err(VmErrorKind::InfiniteSupport),
            _ => return Err(VmErrorKind::ContinuousDist),
        };
        Ok(out.into_iter().filter(|(_, lm)| *lm > f64::NEG_INFINITY).collect())
    }
}

impl fmt::Display for DistValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = self.kind.name();
        match self.kind {
            DistKind::Bernoulli | DistKind::Poisson | DistKind::Exponential => write!(f, "{name}({:?})", self.f(0)),
            DistKind::UniformDiscrete => write!(f, "{name}({}, {})", self.i(0), self.i(1)),
            DistKind::Empirical => write!(f, "{name}#{}", self.p[0]),
            _ => write!(f, "{name}({:?}, {:?})", self.f(0), self.f(1)),
        }
    }
}
