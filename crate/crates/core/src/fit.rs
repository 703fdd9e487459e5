//! Tail-exponent extraction from empirical curves: the pure power-law
//! models `log N ~ -B λ^{-κ}` / `log Ñ ~ -A t^γ` (fit in log(±log) space)
//! and the d = 2 logarithmically corrected model with pinned exponents.

use crate::error::{Error, Result};
use crate::ids::{IdsCurve, LaplaceCurve};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// `log(−log N)` against `log λ`; exponent κ = −slope.
    PowerLambda,
    /// `log(|log Ñ|)` against `log t`; exponent = slope.
    PowerT,
    /// `log N = −c·λ^{-1-θ/2}(log 1/λ)^{-θ/2}` with only c free.
    LogCorrected2d,
}

/// Fitted tail law with diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub model: FitModel,
    pub exponent: f64,
    pub coefficient: f64,
    pub stderr_exponent: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub n_points: usize,
    /// For the corrected model: r² of the pure-power alternative on the
    /// same window, for model comparison.
    pub alt_r_squared: Option<f64>,
}

/// Abscissa/log-value/stderr triples ready for tail fitting.
#[derive(Debug, Clone)]
pub struct TailCurve {
    pub x: Vec<f64>,
    pub log_value: Vec<f64>,
    pub stderr_log: Vec<f64>,
}

impl TailCurve {
    pub fn new(x: Vec<f64>, log_value: Vec<f64>, stderr_log: Vec<f64>) -> Self {
        assert_eq!(x.len(), log_value.len());
        assert_eq!(x.len(), stderr_log.len());
        TailCurve {
            x,
            log_value,
            stderr_log,
        }
    }

    /// λ-abscissa view of an IDS curve: points with positive mass give
    /// `log N(λ)` with delta-method errors.
    pub fn from_ids(curve: &IdsCurve) -> TailCurve {
        let mut x = Vec::new();
        let mut lv = Vec::new();
        let mut se = Vec::new();
        for j in 0..curve.lambda_grid.len() {
            if curve.n_hat[j] > 0.0 {
                x.push(curve.lambda_grid[j]);
                lv.push(curve.n_hat[j].ln());
                se.push(curve.stderr[j] / curve.n_hat[j]);
            }
        }
        TailCurve {
            x,
            log_value: lv,
            stderr_log: se,
        }
    }

    pub fn from_laplace(curve: &LaplaceCurve) -> TailCurve {
        TailCurve {
            x: curve.t_grid.clone(),
            log_value: curve.log_values.clone(),
            stderr_log: curve.stderr.clone(),
        }
    }
}

/// Window policy: points must be deep (|log value| ≥ min_depth) and
/// resolved (stderr below max_rel_err of the signal); the fit then uses
/// the deepest eligible decade of the abscissa.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WindowPolicy {
    pub min_depth: f64,
    pub max_rel_err: f64,
}

impl Default for WindowPolicy {
    fn default() -> Self {
        WindowPolicy {
            min_depth: 10.0,
            max_rel_err: 0.2,
        }
    }
}

impl WindowPolicy {
    pub fn relaxed(min_depth: f64) -> Self {
        WindowPolicy {
            min_depth,
            max_rel_err: 0.2,
        }
    }
}

fn eligible(curve: &TailCurve, policy: &WindowPolicy) -> Vec<usize> {
    (0..curve.x.len())
        .filter(|&i| {
            let v = curve.log_value[i];
            v.is_finite()
                && curve.x[i] > 0.0
                && v.abs() >= policy.min_depth
                && curve.stderr_log[i] <= policy.max_rel_err * v.abs()
        })
        .collect()
}

/// Deepest eligible decade: smallest-λ decade for models approaching
/// λ → 0, largest-t decade for t → ∞.
fn auto_window(curve: &TailCurve, model: FitModel, policy: &WindowPolicy) -> Result<Vec<usize>> {
    let idx = eligible(curve, policy);
    if idx.is_empty() {
        return Err(Error::config(format!(
            "no eligible points: need |log value| ≥ {} with relative error ≤ {}",
            policy.min_depth, policy.max_rel_err
        )));
    }
    let deep_small_x = matches!(model, FitModel::PowerLambda | FitModel::LogCorrected2d);
    let anchor = if deep_small_x {
        idx.iter()
            .map(|&i| curve.x[i])
            .fold(f64::INFINITY, f64::min)
    } else {
        idx.iter()
            .map(|&i| curve.x[i])
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let within: Vec<usize> = idx
        .into_iter()
        .filter(|&i| {
            if deep_small_x {
                curve.x[i] <= anchor * 10.0
            } else {
                curve.x[i] >= anchor / 10.0
            }
        })
        .collect();
    Ok(within)
}

struct Wls {
    slope: f64,
    intercept: f64,
    stderr_slope: f64,
    r_squared: f64,
}

fn weighted_least_squares(xs: &[f64], ys: &[f64], sigmas: &[f64]) -> Wls {
    let n = xs.len();
    let use_weights = sigmas.iter().any(|&s| s > 0.0);
    let w: Vec<f64> = if use_weights {
        let floor = sigmas
            .iter()
            .cloned()
            .filter(|&s| s > 0.0)
            .fold(f64::INFINITY, f64::min)
            * 0.1;
        sigmas
            .iter()
            .map(|&s| 1.0 / (s.max(floor) * s.max(floor)))
            .collect()
    } else {
        vec![1.0; n]
    };
    let sw: f64 = w.iter().sum();
    let mx: f64 = xs.iter().zip(&w).map(|(&x, &wi)| wi * x).sum::<f64>() / sw;
    let my: f64 = ys.iter().zip(&w).map(|(&y, &wi)| wi * y).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        sxx += w[i] * (xs[i] - mx) * (xs[i] - mx);
        sxy += w[i] * (xs[i] - mx) * (ys[i] - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for i in 0..n {
        let fit = intercept + slope * xs[i];
        ss_res += w[i] * (ys[i] - fit) * (ys[i] - fit);
        ss_tot += w[i] * (ys[i] - my) * (ys[i] - my);
    }
    let dof = (n as f64 - 2.0).max(1.0);
    let stderr_slope = (ss_res / dof / sxx).sqrt();
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Wls {
        slope,
        intercept,
        stderr_slope,
        r_squared,
    }
}

/// Power-law tail fit on the auto-selected window (default policy).
pub fn fit_power(curve: &TailCurve, model: FitModel) -> Result<FitResult> {
    fit_power_with_policy(curve, model, &WindowPolicy::default())
}

/// Power-law tail fit with an explicit window policy.
pub fn fit_power_with_policy(
    curve: &TailCurve,
    model: FitModel,
    policy: &WindowPolicy,
) -> Result<FitResult> {
    if matches!(model, FitModel::LogCorrected2d) {
        return Err(Error::config(
            "use fit_log_corrected for the corrected model".to_string(),
        ));
    }
    let window = auto_window(curve, model, policy)?;
    fit_power_on(curve, model, &window)
}

fn check_sign_consistency(vals: &[f64]) -> Result<f64> {
    let neg = vals.iter().filter(|&&v| v < 0.0).count();
    let pos = vals.iter().filter(|&&v| v > 0.0).count();
    if neg > 0 && pos > 0 {
        return Err(Error::config(format!(
            "log values change sign inside the fit window ({neg} negative, {pos} positive)"
        )));
    }
    if neg == 0 && pos == 0 {
        return Err(Error::config(
            "log values vanish on the fit window".to_string(),
        ));
    }
    Ok(if neg > 0 { -1.0 } else { 1.0 })
}

fn fit_power_on(curve: &TailCurve, model: FitModel, window: &[usize]) -> Result<FitResult> {
    if window.len() < 5 {
        let offenders: Vec<f64> = window.iter().map(|&i| curve.x[i]).collect();
        return Err(Error::config(format!(
            "power-law fit needs at least 5 points, window has {} (abscissas {:?})",
            window.len(),
            offenders
        )));
    }
    let vals: Vec<f64> = window.iter().map(|&i| curve.log_value[i]).collect();
    let dir = check_sign_consistency(&vals)?;
    let xs: Vec<f64> = window.iter().map(|&i| curve.x[i].ln()).collect();
    let ys: Vec<f64> = vals.iter().map(|&v| (dir * v).ln()).collect();
    // δ log(|log N|) = δ log N / |log N|
    let sig: Vec<f64> = window
        .iter()
        .map(|&i| curve.stderr_log[i] / curve.log_value[i].abs())
        .collect();
    let wls = weighted_least_squares(&xs, &ys, &sig);
    let exponent = match model {
        FitModel::PowerLambda => -wls.slope,
        _ => wls.slope,
    };
    let lo = window.iter().map(|&i| curve.x[i]).fold(f64::INFINITY, f64::min);
    let hi = window
        .iter()
        .map(|&i| curve.x[i])
        .fold(f64::NEG_INFINITY, f64::max);
    let result = FitResult {
        model,
        exponent,
        coefficient: wls.intercept.exp(),
        stderr_exponent: wls.stderr_slope,
        r_squared: wls.r_squared,
        window: (lo, hi),
        n_points: window.len(),
        alt_r_squared: None,
    };
    if !result.exponent.is_finite() {
        return Err(Error::numerical("fitted exponent is not finite".to_string()));
    }
    Ok(result)
}

/// d = 2 logarithmically corrected model
/// `log N = -c·λ^{-1-θ/2}(log 1/λ)^{-θ/2}`: exponents pinned, only c is
/// fitted; reports the pure-power r² on the same window for comparison.
pub fn fit_log_corrected(curve: &TailCurve, theta: f64) -> Result<FitResult> {
    fit_log_corrected_with_policy(curve, theta, &WindowPolicy::default())
}

pub fn fit_log_corrected_with_policy(
    curve: &TailCurve,
    theta: f64,
    policy: &WindowPolicy,
) -> Result<FitResult> {
    let window = auto_window(curve, FitModel::LogCorrected2d, policy)?;
    let bad: Vec<f64> = window
        .iter()
        .map(|&i| curve.x[i])
        .filter(|&l| l >= 1.0)
        .collect();
    if !bad.is_empty() {
        return Err(Error::config(format!(
            "log-corrected model needs λ < 1 on the window; offending points {bad:?}"
        )));
    }
    if window.len() < 4 {
        return Err(Error::config(format!(
            "insufficient data: corrected fit needs at least 4 points, got {}",
            window.len()
        )));
    }
    let vals: Vec<f64> = window.iter().map(|&i| curve.log_value[i]).collect();
    let dir = check_sign_consistency(&vals)?;
    if dir > 0.0 {
        return Err(Error::config(
            "log-corrected model expects decaying curves (log N < 0)".to_string(),
        ));
    }
    // linear least squares in c: log N_i = -c·g(λ_i)
    let g: Vec<f64> = window
        .iter()
        .map(|&i| {
            let l = curve.x[i];
            l.powf(-1.0 - theta / 2.0) * (1.0 / l).ln().powf(-theta / 2.0)
        })
        .collect();
    let floor = window
        .iter()
        .map(|&i| curve.stderr_log[i])
        .filter(|&s| s > 0.0)
        .fold(f64::INFINITY, f64::min)
        * 0.1;
    let w: Vec<f64> = window
        .iter()
        .map(|&i| {
            let s = curve.stderr_log[i];
            if s > 0.0 && floor.is_finite() {
                1.0 / (s.max(floor) * s.max(floor))
            } else {
                1.0
            }
        })
        .collect();
    let num: f64 = (0..window.len()).map(|i| -w[i] * g[i] * vals[i]).sum();
    let den: f64 = (0..window.len()).map(|i| w[i] * g[i] * g[i]).sum();
    let c = num / den;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    let mean: f64 =
        (0..window.len()).map(|i| w[i] * vals[i]).sum::<f64>() / w.iter().sum::<f64>();
    for i in 0..window.len() {
        let fit = -c * g[i];
        ss_res += w[i] * (vals[i] - fit) * (vals[i] - fit);
        ss_tot += w[i] * (vals[i] - mean) * (vals[i] - mean);
    }
    let r2 = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    // residual stderr of c from the normal equation
    let dof = (window.len() as f64 - 1.0).max(1.0);
    let stderr_c = (ss_res / dof / den).sqrt();
    let alt = fit_power_on(curve, FitModel::PowerLambda, &window)
        .map(|f| f.r_squared)
        .ok();
    let lo = window.iter().map(|&i| curve.x[i]).fold(f64::INFINITY, f64::min);
    let hi = window
        .iter()
        .map(|&i| curve.x[i])
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(FitResult {
        model: FitModel::LogCorrected2d,
        exponent: 1.0 + theta / 2.0,
        coefficient: c,
        stderr_exponent: stderr_c,
        r_squared: r2,
        window: (lo, hi),
        n_points: window.len(),
        alt_r_squared: alt,
    })
}
