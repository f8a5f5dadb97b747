use std::collections::HashMap;

use crate::vm::{EmpiricalDistribution, Value, VmErrorKind};

/// One model run's return value and its accumulated log weight.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSample {
    pub value: Value,
    pub log_weight: f64,
}

impl WeightedSample {
    pub fn new(value: Value, log_weight: f64) -> Self {
        WeightedSample { value, log_weight }
    }
}

/// `ln Σ exp(x)` shifted by the maximum. Empty input or all `-inf` gives `-inf`.
pub fn logsumexp(xs: impl IntoIterator<Item = f64> + Clone) -> f64 {
    let m = xs.clone().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.into_iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Merge equal values and normalize their weights. The log normalizing
/// constant is the log of the mean weight.
pub fn normalize(samples: &[WeightedSample]) -> Result<EmpiricalDistribution, VmErrorKind> {
    let (mut d, lse) = normalize_total(samples)?;
    d.log_z = Some(lse - (samples.len() as f64).ln());
    Ok(d)
}

/// As [`normalize`], returning the log of the total weight alongside.
pub(crate) fn normalize_total(samples: &[WeightedSample]) -> Result<(EmpiricalDistribution, f64), VmErrorKind> {
    if let Some(s) = samples.iter().find(|s| s.log_weight.is_nan() || s.log_weight == f64::INFINITY) {
        return Err(VmErrorKind::Engine(format!(
            "log weight {} is not a valid log probability",
            s.log_weight
        )));
    }
    let m = samples.iter().map(|s| s.log_weight).fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return Err(VmErrorKind::AllZeroWeight);
    }
    let mut order: Vec<(Value, f64)> = Vec::new();
    let mut slot: HashMap<&Value, usize> = HashMap::new();
    let mut total = 0.0;
    for s in samples {
        if s.log_weight == f64::NEG_INFINITY {
            continue;
        }
        let w = (s.log_weight - m).exp();
        total += w;
        match slot.get(&s.value) {
            Some(&i) => order[i].1 += w,
            None => {
                slot.insert(&s.value, order.len());
                order.push((s.value.clone(), w));
            }
        }
    }
    for (_, p) in &mut order {
        *p /= total;
    }
    let d = EmpiricalDistribution::new(order, None).with_count(samples.len());
    Ok((d, m + total.ln()))
}
