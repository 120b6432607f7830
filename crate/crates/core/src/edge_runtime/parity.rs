use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::rmse;

/// Floor on the denominator of the relative error, so near-zero outputs
/// cannot divide by zero.
pub const DEFAULT_PARITY_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParityReport {
    pub mape_pct: f64,
    pub rmse: f64,
    pub n: usize,
    pub max_abs_diff: f64,
}

pub fn parity_report(full_precision: &[f64], edge: &[f64]) -> Result<ParityReport> {
    parity_report_with_eps(full_precision, edge, DEFAULT_PARITY_EPS)
}

/// Relative error per sample, `|a - b| / max(|a|, eps)`, averaged and
/// expressed as a percentage, together with RMSE and the largest gap.
pub fn parity_report_with_eps(full_precision: &[f64], edge: &[f64], eps: f64) -> Result<ParityReport> {
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("parity epsilon must be positive, got {eps}")));
    }
    let rmse = rmse(full_precision, edge)?;
    let n = full_precision.len();
    let mut rel = 0.0;
    let mut max_abs_diff: f64 = 0.0;
    for (&a, &b) in full_precision.iter().zip(edge) {
        let d = (a - b).abs();
        rel += d / a.abs().max(eps);
        max_abs_diff = max_abs_diff.max(d);
    }
    Ok(ParityReport {
        mape_pct: 100.0 * rel / n as f64,
        rmse,
        n,
        max_abs_diff,
    })
}

/// `printf("%.{digits}g")`: `digits` significant digits, trailing zeros
/// removed, scientific notation outside `1e-4 <= |v| < 10^digits`.
pub fn format_significant(v: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Fraction of pairs whose `%g` renderings at `digits` significant digits
/// are identical.
pub fn display_agreement(a: &[f64], b: &[f64], digits: usize) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::invalid("display agreement needs two equal-length, non-empty streams"));
    }
    let same = a
        .iter()
        .zip(b)
        .filter(|(x, y)| format_significant(**x, digits) == format_significant(**y, digits))
        .count();
    Ok(same as f64 / a.len() as f64)
}
