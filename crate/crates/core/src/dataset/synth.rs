//! Synthetic stand-in for measured inverter telemetry.
//!
//! The generator is built so that the 12 features carry the physics a
//! learner needs: irradiance (clear-sky half-sine under a seeded cloud
//! process) drives active power with temperature derating and inverter
//! clipping, reactive power follows a volt-var droop with a deadband and
//! saturation, phase voltages rise with injected power and sag with absorbed
//! reactive power, and phase currents follow apparent power.

use chrono::{FixedOffset, TimeZone};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{hour_fraction, InverterDataset, SampleRecord, FEATURE_COUNT, HOUR_FRAC};
use crate::error::{Error, Result};

pub const SUNRISE_HOUR: f64 = 6.0;
pub const SUNSET_HOUR: f64 = 19.0;

const STEPS_PER_DAY: u32 = 96;
const NOMINAL_VOLTAGE: f64 = 230.0;
const PHASE_OFFSETS: [f64; 3] = [0.6, -0.4, -0.2];
const CURRENT_IMBALANCE: [f64; 3] = [0.01, -0.005, -0.005];

// volt-var curve, per unit of capacity
const DEADBAND_V: f64 = 2.0;
const DROOP_SPAN_V: f64 = 6.0;
const Q_MAX_PU: f64 = 0.44;
// voltage rise at full active power, and per unit reactive power
const RISE_PER_P: f64 = 6.0;
const RISE_PER_Q: f64 = 3.0;

fn n(sd: f64) -> Normal<f64> {
    Normal::new(0.0, sd).expect("positive standard deviation")
}

fn round_to(v: f64, decimals: i32) -> f64 {
    let s = 10f64.powi(decimals);
    (v * s).round() / s
}

/// `n_days * 96` records from 00:00 on 2024-05-20 (UTC+8), one every 15 min.
/// Active power is exactly zero outside `[SUNRISE_HOUR, SUNSET_HOUR]`.
pub fn synth_generate(n_days: u32, capacity: f64, seed: u64) -> Result<InverterDataset> {
    if n_days == 0 {
        return Err(Error::invalid("n_days must be at least 1"));
    }
    if !(capacity.is_finite() && capacity > 0.0) {
        return Err(Error::invalid(format!("capacity must be positive, got {capacity}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tz = FixedOffset::east_opt(8 * 3600).expect("valid offset");
    let start = tz
        .with_ymd_and_hms(2024, 5, 20, 0, 0, 0)
        .single()
        .expect("valid start");

    let mut records = Vec::with_capacity((n_days * STEPS_PER_DAY) as usize);
    let mut cloud = 0.2_f64;
    let mut wind = 2.5_f64;
    let mut grid_drift = 0.0_f64;

    for day in 0..n_days {
        let mean_cloud: f64 = rng.random_range(0.0..0.6);
        let temp_offset = n(2.0).sample(&mut rng);
        for step in 0..STEPS_PER_DAY {
            let ts = start + chrono::Duration::minutes(i64::from(day * STEPS_PER_DAY + step) * 15);
            let hour = hour_fraction(&ts) * 24.0;
            let daylight = hour > SUNRISE_HOUR && hour < SUNSET_HOUR;

            cloud = (0.85 * cloud + 0.15 * mean_cloud + n(0.08).sample(&mut rng)).clamp(0.0, 1.0);
            wind = (0.9 * wind + 0.1 * 3.0 + n(0.4).sample(&mut rng)).max(0.0);
            grid_drift = 0.95 * grid_drift + n(0.4).sample(&mut rng);

            let clear_sky = if daylight {
                let phase = std::f64::consts::PI * (hour - SUNRISE_HOUR) / (SUNSET_HOUR - SUNRISE_HOUR);
                1000.0 * phase.sin().powf(1.2)
            } else {
                0.0
            };
            let irradiance = if daylight {
                (clear_sky * (1.0 - 0.75 * cloud) * (1.0 + n(0.01).sample(&mut rng))).clamp(0.0, 1400.0)
            } else {
                0.0
            };

            let day_angle = 2.0 * std::f64::consts::PI * (hour - 9.0) / 24.0;
            let ambient = 17.0 + 7.0 * day_angle.sin() + temp_offset + n(0.3).sample(&mut rng);
            let module = ambient + 0.028 * irradiance + n(0.5).sample(&mut rng);
            let humidity =
                (70.0 - 2.0 * (ambient - 17.0) + 10.0 * cloud + n(2.0).sample(&mut rng)).clamp(5.0, 100.0);

            let mut p = 0.0;
            let mut q = 0.0;
            if daylight && irradiance > 0.0 {
                let dc = 1.15 * capacity * (irradiance / 1000.0) * (1.0 - 0.0045 * (module - 25.0));
                p = (0.97 * dc).min(capacity) + n(0.003 * capacity).sample(&mut rng);
                p = p.clamp(0.0, capacity);
            }

            let grid_angle = 2.0 * std::f64::consts::PI * (hour - 14.0) / 24.0;
            let grid_v = NOMINAL_VOLTAGE + 3.0 * grid_angle.sin() + grid_drift;
            if p > 0.0 {
                let dv = grid_v + RISE_PER_P * p / capacity - NOMINAL_VOLTAGE;
                let excess = ((dv.abs() - DEADBAND_V) / DROOP_SPAN_V).clamp(0.0, 1.0);
                let available = (capacity * capacity - p * p).max(0.0).sqrt();
                q = (-dv.signum() * excess * Q_MAX_PU * capacity).clamp(-available, available);
                q = (q + n(0.002 * capacity).sample(&mut rng)).clamp(-available, available);
            }

            let mut features = [0.0; FEATURE_COUNT];
            let apparent = (p * p + q * q).sqrt();
            for ph in 0..3 {
                let v = grid_v
                    + RISE_PER_P * p / capacity
                    + RISE_PER_Q * q / capacity
                    + PHASE_OFFSETS[ph]
                    + n(0.3).sample(&mut rng);
                let i = if p > 0.0 {
                    (apparent * 1000.0 / (3.0 * v) * (1.0 + CURRENT_IMBALANCE[ph])
                        + n(0.02).sample(&mut rng))
                    .max(0.0)
                } else {
                    0.0
                };
                features[ph] = round_to(v, 2);
                features[3 + ph] = round_to(i, 3);
            }
            features[6] = round_to(irradiance, 1);
            features[7] = round_to(ambient, 2);
            features[8] = round_to(module, 2);
            features[9] = round_to(humidity, 1);
            features[10] = round_to(wind, 2);
            features[HOUR_FRAC] = hour_fraction(&ts);

            records.push(SampleRecord {
                timestamp: ts,
                features,
                active_power: round_to(p, 4).clamp(0.0, capacity),
                reactive_power: round_to(q, 4).clamp(-capacity, capacity),
            });
        }
    }
    InverterDataset::new(1, capacity, records)
}
