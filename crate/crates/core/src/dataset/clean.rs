use super::{InverterDataset, SampleRecord, CURRENT_COLUMNS, IRRADIANCE, VOLTAGE_COLUMNS};
use crate::error::{Error, Result};

const MAX_VOLTAGE: f64 = 400.0;
const MAX_IRRADIANCE: f64 = 1500.0;

/// True when any present value is non-finite or physically implausible.
/// Missing values (NaN) are not dirty.
pub fn is_dirty(r: &SampleRecord, capacity: f64) -> bool {
    let bad = |v: f64, ok: &dyn Fn(f64) -> bool| !v.is_nan() && !(v.is_finite() && ok(v));
    let any_feature = r.features.iter().any(|&v| bad(v, &|_| true));
    let voltage = r.features[VOLTAGE_COLUMNS]
        .iter()
        .any(|&v| bad(v, &|v| (0.0..=MAX_VOLTAGE).contains(&v)));
    let current = r.features[CURRENT_COLUMNS]
        .iter()
        .any(|&v| bad(v, &|v| v >= 0.0));
    let irradiance = bad(r.features[IRRADIANCE], &|v| (0.0..=MAX_IRRADIANCE).contains(&v));
    let power = bad(r.active_power, &|v| v.abs() <= capacity)
        || bad(r.reactive_power, &|v| v.abs() <= capacity);
    any_feature || voltage || current || irradiance || power
}

/// Drops dirty rows, forward-fills missing features from the previous kept
/// row, then drops rows that are still incomplete (leading gaps and rows
/// with a missing label).
pub fn clean(dataset: &InverterDataset) -> Result<InverterDataset> {
    let cap = dataset.capacity();
    let mut out: Vec<SampleRecord> = Vec::with_capacity(dataset.len());
    let mut last: Option<[f64; super::FEATURE_COUNT]> = None;

    for r in dataset.records() {
        if is_dirty(r, cap) {
            continue;
        }
        let mut r = r.clone();
        if let Some(prev) = &last {
            for (v, p) in r.features.iter_mut().zip(prev) {
                if v.is_nan() {
                    *v = *p;
                }
            }
        }
        if r.features.iter().any(|v| v.is_nan()) {
            continue;
        }
        last = Some(r.features);
        if r.active_power.is_nan() || r.reactive_power.is_nan() {
            continue;
        }
        out.push(r);
    }

    if out.len() < 2 {
        return Err(Error::EmptyDataset {
            stage: "cleaning",
            count: out.len(),
        });
    }
    debug_assert!(out.iter().all(|r| !r.has_missing()));
    InverterDataset::new(dataset.inverter_id(), cap, out)
}
