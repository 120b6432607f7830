use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, FixedOffset, NaiveDateTime, SecondsFormat, Utc};

use super::{hour_fraction, InverterDataset, SampleRecord, FEATURE_COUNT, HOUR_FRAC};
use crate::error::{Error, Result};

/// The fixed CSV header. `hour_frac` is not a column; it is derived from
/// `timestamp` on load.
pub const CSV_HEADER: [&str; 14] = [
    "timestamp",
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
    "p_kw",
    "q_kvar",
];

const MEASURED: usize = FEATURE_COUNT - 1;

/// Loads a telemetry CSV. Empty cells are kept as missing (NaN) for
/// [`super::clean`] to handle. Rows are returned sorted by timestamp.
pub fn load_csv(path: impl AsRef<Path>, capacity: f64) -> Result<InverterDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, capacity)
}

pub fn read_csv<R: Read>(reader: R, capacity: f64) -> Result<InverterDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut rows = rdr.records();
    let header = match rows.next() {
        Some(h) => h.map_err(|e| csv_error(e, 1))?,
        None => return Err(Error::EmptyDataset { stage: "load", count: 0 }),
    };
    check_header(&header)?;

    let mut parsed: Vec<(u64, SampleRecord)> = Vec::new();
    for row in rows {
        let row = row.map_err(|e| csv_error(e, 0))?;
        let line = row.position().map_or(0, |p| p.line());
        if row.iter().all(str::is_empty) {
            continue;
        }
        if row.len() != CSV_HEADER.len() {
            return Err(Error::Row {
                line,
                message: format!("expected {} cells, found {}", CSV_HEADER.len(), row.len()),
            });
        }
        parsed.push((line, parse_row(&row, line)?));
    }

    parsed.sort_by_key(|(_, r)| r.timestamp);
    if let Some(w) = parsed.windows(2).find(|w| w[0].1.timestamp == w[1].1.timestamp) {
        return Err(Error::DuplicateTimestamp {
            line: w[1].0,
            timestamp: w[1].1.timestamp.to_rfc3339(),
        });
    }
    if parsed.len() < 2 {
        return Err(Error::EmptyDataset {
            stage: "load",
            count: parsed.len(),
        });
    }
    InverterDataset::new(1, capacity, parsed.into_iter().map(|(_, r)| r).collect())
}

fn check_header(header: &csv::StringRecord) -> Result<()> {
    for (i, expected) in CSV_HEADER.iter().enumerate() {
        let found = header.get(i).unwrap_or("");
        let found = found.trim_start_matches('\u{feff}');
        if found != *expected {
            return Err(Error::Schema {
                column: i + 1,
                expected: (*expected).into(),
                found: found.into(),
            });
        }
    }
    if header.len() > CSV_HEADER.len() {
        return Err(Error::Schema {
            column: CSV_HEADER.len() + 1,
            expected: String::new(),
            found: header[CSV_HEADER.len()].into(),
        });
    }
    Ok(())
}

fn parse_row(row: &csv::StringRecord, line: u64) -> Result<SampleRecord> {
    let timestamp = parse_timestamp(&row[0]).ok_or_else(|| Error::Row {
        line,
        message: format!("unparseable timestamp `{}`", &row[0]),
    })?;
    let cell = |i: usize| -> Result<f64> {
        let s = &row[i];
        if s.is_empty() {
            return Ok(f64::NAN);
        }
        s.parse::<f64>().map_err(|_| Error::Row {
            line,
            message: format!("column {} (`{}`): unparseable value `{s}`", i + 1, CSV_HEADER[i]),
        })
    };
    let mut features = [0.0; FEATURE_COUNT];
    for (j, slot) in features.iter_mut().take(MEASURED).enumerate() {
        *slot = cell(j + 1)?;
    }
    features[HOUR_FRAC] = hour_fraction(&timestamp);
    Ok(SampleRecord {
        timestamp,
        features,
        active_power: cell(MEASURED + 1)?,
        reactive_power: cell(MEASURED + 2)?,
    })
}

/// RFC 3339 with offset, or a naive `YYYY-MM-DD[T ]HH:MM[:SS]` read as UTC.
fn parse_timestamp(s: &str) -> Option<DateTime<FixedOffset>> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t);
    }
    ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"]
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .map(|n| n.and_utc().fixed_offset())
}

fn csv_error(e: csv::Error, fallback_line: u64) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line());
    Error::Row {
        line,
        message: e.to_string(),
    }
}

/// Writes the canonical CSV. Missing values are written as empty cells.
pub fn write_csv<W: Write>(dataset: &InverterDataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let to_err = |e: csv::Error| Error::Numerical(format!("csv write failed: {e}"));
    w.write_record(CSV_HEADER).map_err(to_err)?;
    let num = |v: f64| if v.is_nan() { String::new() } else { v.to_string() };
    for r in dataset.records() {
        let ts = if r.timestamp.offset().local_minus_utc() == 0 {
            r.timestamp
                .with_timezone(&Utc)
                .to_rfc3339_opts(SecondsFormat::Secs, true)
        } else {
            r.timestamp.to_rfc3339_opts(SecondsFormat::Secs, false)
        };
        let mut cells = Vec::with_capacity(CSV_HEADER.len());
        cells.push(ts);
        cells.extend(r.features[..MEASURED].iter().map(|&v| num(v)));
        cells.push(num(r.active_power));
        cells.push(num(r.reactive_power));
        w.write_record(&cells).map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::Numerical(format!("csv write failed: {e}")))?;
    Ok(())
}
