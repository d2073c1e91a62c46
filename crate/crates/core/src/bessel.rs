//! Integer-order Bessel functions of the first kind, plus the upper bounds
//! and large-order estimates the propagator modules lean on.
//!
//! Evaluation uses the power series for small arguments and Miller's
//! backward three-term recurrence otherwise, normalized with the identity
//! `J_0(x) + 2 Σ_{k≥1} J_{2k}(x) = 1`. The backward recurrence is stable in
//! the large-order / moderate-argument regime where the forward recurrence
//! loses all precision.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Hard cap on `|n|`; chosen so the propagator modules stay in range.
pub const MAX_ORDER: i64 = 200;
/// Hard cap on the argument.
pub const MAX_ARGUMENT: f64 = 500.0;

/// Arguments below this go through the power series.
const SERIES_CUTOFF: f64 = 2.0;

/// A single evaluation of `J_n(x)` with bookkeeping.
///
/// `abs_error_estimate` is the residual of the normalization identity (or
/// the last series term); it is informational, not a guarantee.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselEval {
    pub order: i64,
    pub argument: f64,
    pub value: f64,
    pub abs_error_estimate: f64,
}

/// Evaluate `J_n(x)` for integer `n` with `|n| ≤ 200` and `0 ≤ x ≤ 500`.
///
/// Negative orders are resolved through `J_{-n}(x) = (-1)^n J_n(x)` on the
/// same evaluation path, so the parity identity holds exactly.
pub fn eval(n: i64, x: f64) -> Result<BesselEval> {
    if n.abs() > MAX_ORDER {
        return Err(Error::domain(format!(
            "Bessel order |{n}| exceeds the supported maximum {MAX_ORDER}"
        )));
    }
    if !x.is_finite() || x < 0.0 {
        return Err(Error::domain(format!(
            "Bessel argument {x} must be finite and nonnegative"
        )));
    }
    if x > MAX_ARGUMENT {
        return Err(Error::domain(format!(
            "Bessel argument {x} exceeds the supported maximum {MAX_ARGUMENT}"
        )));
    }

    let n_abs = n.unsigned_abs();
    let (value, err) = if x < SERIES_CUTOFF {
        series(n_abs, x)
    } else {
        miller(n_abs, x)
    };
    let sign = if n < 0 && n_abs % 2 == 1 { -1.0 } else { 1.0 };
    Ok(BesselEval {
        order: n,
        argument: x,
        value: sign * value,
        abs_error_estimate: err,
    })
}

/// Convenience wrapper returning just the value.
pub fn bessel_j(n: i64, x: f64) -> Result<f64> {
    eval(n, x).map(|e| e.value)
}

/// Power series `Σ_m (-1)^m (x/2)^{n+2m} / (m! (n+m)!)`, used for `x < 2`.
fn series(n: u64, x: f64) -> (f64, f64) {
    let half = 0.5 * x;
    // Leading term (x/2)^n / n!, built factor by factor to dodge overflow.
    let mut term = 1.0f64;
    for k in 1..=n {
        term *= half / k as f64;
        if term == 0.0 {
            return (0.0, 0.0);
        }
    }
    let ratio = half * half;
    let mut sum = term;
    for m in 1..200u64 {
        term *= -ratio / (m as f64 * (n + m) as f64);
        sum += term;
        if term.abs() <= f64::EPSILON * sum.abs().max(1e-300) {
            break;
        }
    }
    (sum, term.abs())
}

/// Miller's backward recurrence with even-order normalization, for `x ≥ 2`.
fn miller(n: u64, x: f64) -> (f64, f64) {
    // Start far enough above max(n, x) that the trial value has decayed to
    // rounding level by the time the recurrence reaches order n. The
    // 1.5·x^{2/3} term clears the transition zone around order ≈ x, where
    // the decay of J with the order is still slow.
    let start = {
        let m = n + 20 + x.ceil() as u64 + (1.5 * x.powf(2.0 / 3.0)).ceil() as u64;
        if m.is_multiple_of(2) {
            m
        } else {
            m + 1
        }
    };

    const RESCALE: f64 = 1e250;
    let mut upper = 0.0f64; // f_{k+1}
    let mut current = 1e-30f64; // f_k, arbitrary trial scale
    let mut norm = 0.0f64; // accumulates f_0 + 2 Σ f_{2k}
    let mut captured = 0.0f64;
    let trial = current;
    let mut trial_scaled = trial;

    let mut k = start;
    while k > 0 {
        let lower = (2.0 * k as f64 / x) * current - upper;
        upper = current;
        current = lower;
        k -= 1;
        if k == n {
            captured = current;
        }
        if k % 2 == 0 {
            norm += if k == 0 { current } else { 2.0 * current };
        }
        if current.abs() > RESCALE {
            upper /= RESCALE;
            current /= RESCALE;
            norm /= RESCALE;
            captured /= RESCALE;
            trial_scaled /= RESCALE;
        }
    }

    (captured / norm, (trial_scaled / norm).abs())
}

/// The envelope `2/(nπ)` bounding `J_n(x)^2` for `x ≥ 2n`.
pub fn tail_bound(n: i64) -> Result<f64> {
    if n < 1 {
        return Err(Error::domain(format!("tail bound requires n ≥ 1, got {n}")));
    }
    Ok(2.0 / (n as f64 * PI))
}

/// Krasikov's bound on `J_n(x)^2`:
/// `4(4x² - (2n+1)(2n+5)) / (π((4x² - μ)^{3/2} - μ))` with
/// `μ = (2n+1)(2n+3)`, valid for `x > sqrt(μ + μ^{2/3})/2`.
pub fn kra_bound(n: f64, x: f64) -> Result<f64> {
    if n <= -0.5 {
        return Err(Error::domain(format!("bound requires n > -1/2, got {n}")));
    }
    let mu = (2.0 * n + 1.0) * (2.0 * n + 3.0);
    let threshold = (mu + mu.powf(2.0 / 3.0)).sqrt() / 2.0;
    if x <= threshold {
        return Err(Error::domain(format!(
            "argument {x} is below the validity threshold {threshold} for order {n}"
        )));
    }
    let q = 4.0 * x * x;
    let numerator = 4.0 * (q - (2.0 * n + 1.0) * (2.0 * n + 5.0));
    let denominator = PI * ((q - mu).powf(1.5) - mu);
    Ok(numerator / denominator)
}

/// Large-order estimate `J_n(n sech ξ) ≈ e^{-n(ξ - tanh ξ)} / sqrt(2πn tanh ξ)`.
///
/// The argument is supplied as `sech ξ ∈ (0, 1)`, so the estimated quantity
/// is `J_n(x)` at `x = n · sech_xi`.
pub fn large_order_estimate(n: u64, sech_xi: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("estimate requires a positive order".to_string()));
    }
    if !(sech_xi > 0.0 && sech_xi < 1.0) {
        return Err(Error::domain(format!(
            "sech ξ must lie strictly inside (0, 1), got {sech_xi}"
        )));
    }
    let xi = (1.0 / sech_xi).acosh();
    let nf = n as f64;
    Ok((-nf * (xi - xi.tanh())).exp() / (2.0 * PI * nf * xi.tanh()).sqrt())
}
