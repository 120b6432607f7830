//! Regression metrics: R², capacity-normalized error percentage, RMSE.

use serde::Serialize;

use crate::error::{Error, Result};

fn check_lengths(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "prediction streams differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::invalid("metrics need at least one sample"));
    }
    Ok(())
}

/// `1 - SS_res / SS_tot`. Fails when `y` has zero variance.
pub fn r_squared(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_lengths(y, yhat)?;
    if y.len() < 2 {
        return Err(Error::invalid("r_squared needs at least two samples"));
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    if ss_tot == 0.0 {
        return Err(Error::Numerical(
            "r_squared is undefined for labels with zero variance".into(),
        ));
    }
    let ss_res: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

pub fn rmse(a: &[f64], b: &[f64]) -> Result<f64> {
    check_lengths(a, b)?;
    let mse = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64;
    Ok(mse.sqrt())
}

fn check_capacity(cap: f64) -> Result<()> {
    if !(cap.is_finite() && cap > 0.0) {
        return Err(Error::invalid(format!("capacity must be positive, got {cap}")));
    }
    Ok(())
}

/// Error as a percentage of inverter capacity: `100 * rmse(y, yhat) / cap`.
///
/// Stays finite when the labels contain zeros (night-time output).
pub fn capacity_mape(y: &[f64], yhat: &[f64], cap: f64) -> Result<f64> {
    check_capacity(cap)?;
    Ok(100.0 * rmse(y, yhat)? / cap)
}

/// Unnormalized variant, `(1 - sqrt(mean((y - yhat)^2 / cap))) * 100`.
/// Close to 100 for an accurate model; kept for side-by-side comparison.
pub fn capacity_mape_literal(y: &[f64], yhat: &[f64], cap: f64) -> Result<f64> {
    check_capacity(cap)?;
    check_lengths(y, yhat)?;
    let inner = y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b) / cap).sum::<f64>() / y.len() as f64;
    Ok((1.0 - inner.sqrt()) * 100.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricReport {
    pub r_squared: f64,
    pub mape_pct: f64,
    pub rmse: f64,
    pub n: usize,
}

impl MetricReport {
    pub fn evaluate(y: &[f64], yhat: &[f64], cap: f64) -> Result<Self> {
        Ok(Self {
            r_squared: r_squared(y, yhat)?,
            mape_pct: capacity_mape(y, yhat, cap)?,
            rmse: rmse(y, yhat)?,
            n: y.len(),
        })
    }

    /// Same report, with `mape_pct` computed by [`capacity_mape_literal`].
    pub fn evaluate_literal(y: &[f64], yhat: &[f64], cap: f64) -> Result<Self> {
        Ok(Self {
            mape_pct: capacity_mape_literal(y, yhat, cap)?,
            ..Self::evaluate(y, yhat, cap)?
        })
    }

    /// `key=value` lines.
    pub fn to_text(&self) -> String {
        format!(
            "r_squared={:.6}\nmape_pct={:.4}\nrmse={:.6}\nn={}\n",
            self.r_squared, self.mape_pct, self.rmse, self.n
        )
    }
}
