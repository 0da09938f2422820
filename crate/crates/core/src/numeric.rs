//! Floating-point oracles for the measure transform.
//!
//! The transform of the self-similar measure factors as the infinite product
//! of mask values at geometrically scaled frequencies. Truncating the product
//! leaves a controllable tail: each omitted factor deviates from 1 by at most
//! `2 pi d_max |xi| / N^j`, so the relative error of the truncation is bounded
//! by `exp(sum of deviations) - 1`.
//!
//! Two mask normalizations coexist. `mask_eval` divides by `N`, matching the
//! scaling in the self-similarity relation, and evaluates to `|D| / N` at 0.
//! `mask_eval_normalized` divides by `|D|`, which makes the truncated product
//! the transform of a probability measure (`mu_hat(0) = 1`). The zero sets
//! coincide, so every orthogonality statement is unaffected by the choice.

use num_complex::Complex64;
use thiserror::Error;

use crate::system::CantorSystem;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericError {
    #[error("truncation level must be at least 1")]
    ZeroTruncation,
    #[error("invalid grid: lo = {lo}, hi = {hi}, step = {step}")]
    BadGrid { lo: f64, hi: f64, step: f64 },
}

fn exponential_sum(system: &CantorSystem, t: f64) -> Complex64 {
    system
        .digits()
        .iter()
        .map(|&d| {
            let angle = 2.0 * std::f64::consts::PI * (d as f64) * t;
            Complex64::new(angle.cos(), angle.sin())
        })
        .sum()
}

/// The mask `N^{-1} sum_{d in D} e(d t)`; Z-periodic, with `mask_eval(0) = |D|/N`.
pub fn mask_eval(system: &CantorSystem, t: f64) -> Complex64 {
    exponential_sum(system, t) / system.base() as f64
}

/// The probability-normalized mask `|D|^{-1} sum_{d in D} e(d t)`; same zero
/// set as [`mask_eval`], with value 1 at 0 and modulus at most 1 everywhere.
pub fn mask_eval_normalized(system: &CantorSystem, t: f64) -> Complex64 {
    exponential_sum(system, t) / system.digit_count() as f64
}

/// A truncated evaluation of the transform with its tail bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedTransformValue {
    pub xi: f64,
    pub truncation: u32,
    pub value: Complex64,
    /// Bounds the relative deviation of the omitted tail from 1: the true
    /// transform differs from `value` by at most `|value| * tail_bound`
    /// (and so certainly by at most `|value| * tail_bound + tail_bound`).
    pub tail_bound: f64,
}

/// Evaluate the first `truncation` factors of the product form of the
/// transform, using the probability-normalized mask.
pub fn mu_hat_truncated(
    system: &CantorSystem,
    xi: f64,
    truncation: u32,
) -> Result<TruncatedTransformValue, NumericError> {
    if truncation == 0 {
        return Err(NumericError::ZeroTruncation);
    }
    let base = system.base() as f64;
    let mut value = Complex64::new(1.0, 0.0);
    for j in 1..=truncation {
        value *= mask_eval_normalized(system, xi / base.powi(j as i32));
    }
    let d_max = system.digits().last().copied().unwrap_or(0) as f64;
    // sum_{j > J} 2 pi d_max |xi| N^{-j} = 2 pi d_max |xi| / (N^J (N - 1))
    let tail_sum = 2.0 * std::f64::consts::PI * d_max * xi.abs()
        / (base.powi(truncation as i32) * (base - 1.0));
    let tail_bound = tail_sum.exp_m1();
    Ok(TruncatedTransformValue {
        xi,
        truncation,
        value,
        tail_bound,
    })
}

/// One row of a transform grid evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRow {
    pub xi: f64,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
    pub tail_bound: f64,
}

/// Evaluate the truncated transform on the grid `lo, lo + step, ...` with
/// `floor((hi - lo) / step) + 1` rows.
pub fn mu_hat_grid(
    system: &CantorSystem,
    lo: f64,
    hi: f64,
    step: f64,
    truncation: u32,
) -> Result<Vec<GridRow>, NumericError> {
    if !lo.is_finite() || !hi.is_finite() || !step.is_finite() || lo > hi || step <= 0.0 {
        return Err(NumericError::BadGrid { lo, hi, step });
    }
    let rows = ((hi - lo) / step).floor() as usize + 1;
    (0..rows)
        .map(|i| {
            let xi = lo + i as f64 * step;
            let t = mu_hat_truncated(system, xi, truncation)?;
            Ok(GridRow {
                xi,
                re: t.value.re,
                im: t.value.im,
                abs: t.value.norm(),
                tail_bound: t.tail_bound,
            })
        })
        .collect()
}

/// Render grid rows as CSV with the fixed header and 17 significant digits.
pub fn grid_to_csv(rows: &[GridRow]) -> String {
    let mut out = String::from("xi,re,im,abs,tail_bound\n");
    for row in rows {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            row.xi, row.re, row.im, row.abs, row.tail_bound
        ));
    }
    out
}
