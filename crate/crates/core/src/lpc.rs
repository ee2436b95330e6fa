//! Linear prediction by the autocorrelation method.
//!
//! The predictor is `x̂[n] = Σ a[i]·x[n−i]` for `i = 1..=p`.

use crate::error::{Error, Result};

pub const LPC10_ORDER: usize = 10;
pub const LPC25_ORDER: usize = 25;

/// All-pole predictor coefficients `a[1..=p]`, stored as `a[0..p]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearCoeffs {
    a: Vec<f64>,
}

impl LinearCoeffs {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidInput(
                "predictor order must be at least 1".into(),
            ));
        }
        if a.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(
                "non-finite predictor coefficient".into(),
            ));
        }
        Ok(Self { a })
    }

    pub fn zeros(order: usize) -> Self {
        Self {
            a: vec![0.0; order.max(1)],
        }
    }

    pub fn order(&self) -> usize {
        self.a.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.a
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(|&c| c == 0.0)
    }

    /// Prediction from a history slice whose last element is the most recent sample.
    pub fn predict(&self, history: &[f64]) -> Result<f64> {
        lpc_predict(history, self)
    }
}

/// Analysis window shape applied before the autocorrelation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Taper {
    #[default]
    Rectangular,
    Hamming,
}

/// Biased autocorrelation `r[k] = Σ_{n=k}^{N−1} w[n]·w[n−k]`, `k = 0..=order`.
pub fn autocorrelation(window: &[f64], order: usize) -> Result<Vec<f64>> {
    if window.len() <= order {
        return Err(Error::InvalidInput(format!(
            "window of {} samples is too short for order {order}",
            window.len()
        )));
    }
    Ok((0..=order)
        .map(|k| window[k..].iter().zip(window).map(|(a, b)| a * b).sum())
        .collect())
}

/// Full output of the Levinson-Durbin recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct LevinsonSolution {
    pub coeffs: LinearCoeffs,
    /// Reflection coefficients of the stages that were run, in the
    /// `x̂ = Σ a·x` sign convention (for AR(1) with ρ, `k_1 = ρ`).
    pub reflection: Vec<f64>,
    /// Prediction-error energy after each stage, starting with `r[0]`.
    pub error_energy: Vec<f64>,
}

/// Solves the Toeplitz normal equations for the predictor of the given order.
///
/// The recursion stops early if the error energy drops to zero or below or a
/// reflection coefficient reaches unit magnitude; the remaining coefficients
/// stay zero.
pub fn levinson_durbin(r: &[f64], order: usize) -> Result<LinearCoeffs> {
    levinson_durbin_full(r, order).map(|s| s.coeffs)
}

pub fn levinson_durbin_full(r: &[f64], order: usize) -> Result<LevinsonSolution> {
    if order == 0 {
        return Err(Error::InvalidInput(
            "predictor order must be at least 1".into(),
        ));
    }
    if r.len() < order + 1 {
        return Err(Error::InvalidInput(format!(
            "need {} autocorrelation lags, got {}",
            order + 1,
            r.len()
        )));
    }
    if r.iter().any(|v| !v.is_finite()) || r[0] <= 0.0 {
        return Err(Error::InvalidInput(
            "degenerate autocorrelation (r[0] must be positive and finite)".into(),
        ));
    }

    let mut a = vec![0.0; order];
    let mut prev = vec![0.0; order];
    let mut err = r[0];
    let mut reflection = Vec::with_capacity(order);
    let mut error_energy = Vec::with_capacity(order + 1);
    error_energy.push(err);

    for m in 0..order {
        let acc: f64 = r[m + 1] - (0..m).map(|i| a[i] * r[m - i]).sum::<f64>();
        let k = acc / err;
        if !k.is_finite() || k.abs() >= 1.0 {
            break;
        }
        let next_err = err * (1.0 - k * k);
        if next_err.is_nan() || next_err <= 0.0 {
            break;
        }
        prev[..m].copy_from_slice(&a[..m]);
        for i in 0..m {
            a[i] = prev[i] - k * prev[m - 1 - i];
        }
        a[m] = k;
        err = next_err;
        reflection.push(k);
        error_energy.push(err);
    }

    Ok(LevinsonSolution {
        coeffs: LinearCoeffs { a },
        reflection,
        error_energy,
    })
}

/// Applies the predictor to `history` (most recent sample last).
pub fn lpc_predict(history: &[f64], coeffs: &LinearCoeffs) -> Result<f64> {
    let p = coeffs.order();
    if history.len() < p {
        return Err(Error::InvalidInput(format!(
            "history of {} samples is shorter than predictor order {p}",
            history.len()
        )));
    }
    Ok(dot_reversed(&history[history.len() - p..], &coeffs.a))
}

/// `Σ a[i]·tail[len−1−i]`; `tail.len() == a.len()`.
#[inline]
pub(crate) fn dot_reversed(tail: &[f64], a: &[f64]) -> f64 {
    tail.iter().rev().zip(a).map(|(x, c)| x * c).sum()
}

/// Fits a predictor to a window, mapping degenerate (silent or too short)
/// windows to the zero predictor.
pub fn fit(window: &[f64], order: usize, taper: Taper) -> LinearCoeffs {
    if window.len() <= order {
        return LinearCoeffs::zeros(order);
    }
    let tapered;
    let w = match taper {
        Taper::Rectangular => window,
        Taper::Hamming => {
            tapered = hamming(window);
            &tapered
        }
    };
    autocorrelation(w, order)
        .and_then(|r| levinson_durbin(&r, order))
        .unwrap_or_else(|_| LinearCoeffs::zeros(order))
}

fn hamming(window: &[f64]) -> Vec<f64> {
    let n = window.len();
    if n < 2 {
        return window.to_vec();
    }
    let denom = (n - 1) as f64;
    window
        .iter()
        .enumerate()
        .map(|(i, x)| x * (0.54 - 0.46 * (2.0 * std::f64::consts::PI * i as f64 / denom).cos()))
        .collect()
}
