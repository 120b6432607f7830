//! Inverter telemetry at 15-minute resolution: CSV ingestion, cleaning,
//! seeded train/test splitting and a synthetic generator.

mod clean;
mod csv_io;
mod split;
mod synth;

use chrono::{DateTime, FixedOffset, Timelike};

use crate::error::{Error, Result};

pub use clean::{clean, is_dirty};
pub use csv_io::{load_csv, read_csv, write_csv, CSV_HEADER};
pub use split::{split, SplitDataset};
pub use synth::{synth_generate, SUNRISE_HOUR, SUNSET_HOUR};

/// Every model consumes exactly this many inputs.
pub const FEATURE_COUNT: usize = 12;

/// Canonical feature order. The first eleven come straight from the CSV,
/// `hour_frac` is derived from the timestamp's wall clock.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "va_rms",
    "vb_rms",
    "vc_rms",
    "ia_rms",
    "ib_rms",
    "ic_rms",
    "irradiance",
    "ambient_temp",
    "module_temp",
    "humidity",
    "wind_speed",
    "hour_frac",
];

pub const VOLTAGE_COLUMNS: std::ops::Range<usize> = 0..3;
pub const CURRENT_COLUMNS: std::ops::Range<usize> = 3..6;
pub const IRRADIANCE: usize = 6;
pub const HOUR_FRAC: usize = 11;

/// One telemetry row. Missing cells are held as NaN until [`clean`] runs.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub timestamp: DateTime<FixedOffset>,
    pub features: [f64; FEATURE_COUNT],
    /// kW
    pub active_power: f64,
    /// kvar
    pub reactive_power: f64,
}

impl SampleRecord {
    pub fn label(&self, target: crate::gbdt::Target) -> f64 {
        match target {
            crate::gbdt::Target::Active => self.active_power,
            crate::gbdt::Target::Reactive => self.reactive_power,
        }
    }

    pub(crate) fn has_missing(&self) -> bool {
        self.features.iter().any(|v| v.is_nan())
            || self.active_power.is_nan()
            || self.reactive_power.is_nan()
    }
}

/// Hour-of-day / 24 on the timestamp's own wall clock.
pub fn hour_fraction(ts: &DateTime<FixedOffset>) -> f64 {
    f64::from(ts.num_seconds_from_midnight()) / 86_400.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct InverterDataset {
    inverter_id: u8,
    capacity: f64,
    records: Vec<SampleRecord>,
}

impl InverterDataset {
    /// Builds a dataset, sorting records by timestamp.
    ///
    /// Fails on non-positive capacity, duplicate timestamps, or fewer than
    /// two records.
    pub fn new(inverter_id: u8, capacity: f64, mut records: Vec<SampleRecord>) -> Result<Self> {
        if inverter_id == 0 {
            return Err(Error::invalid("inverter id must be at least 1"));
        }
        if !(capacity.is_finite() && capacity > 0.0) {
            return Err(Error::invalid(format!(
                "capacity must be a positive finite kW value, got {capacity}"
            )));
        }
        if records.len() < 2 {
            return Err(Error::EmptyDataset {
                stage: "construction",
                count: records.len(),
            });
        }
        records.sort_by_key(|r| r.timestamp);
        if let Some(w) = records.windows(2).find(|w| w[0].timestamp == w[1].timestamp) {
            return Err(Error::invalid(format!(
                "duplicate timestamp {}",
                w[1].timestamp.to_rfc3339()
            )));
        }
        Ok(Self {
            inverter_id,
            capacity,
            records,
        })
    }

    pub fn inverter_id(&self) -> u8 {
        self.inverter_id
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn feature_names(&self) -> [&'static str; FEATURE_COUNT] {
        FEATURE_NAMES
    }

    pub fn records(&self) -> &[SampleRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn with_inverter_id(mut self, inverter_id: u8) -> Result<Self> {
        if inverter_id == 0 {
            return Err(Error::invalid("inverter id must be at least 1"));
        }
        self.inverter_id = inverter_id;
        Ok(self)
    }

    pub fn into_records(self) -> Vec<SampleRecord> {
        self.records
    }
}
