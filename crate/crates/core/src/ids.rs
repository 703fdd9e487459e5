//! Monte Carlo estimators of the integrated density of states `N(λ)`,
//! its negative-potential counterpart `N⁻(λ)`, the classical phase-space
//! IDS `N_c(λ)`, and the Laplace transforms `Ñ(t)` and `Ñ₁(t)`.
//!
//! The `Ñ₁` estimators exploit independence across lattice sites: the
//! annealed average factorizes into per-site expectations
//! `E[exp(∓t·u(x - q - ξ))]`, each evaluated by quadrature against the
//! displacement density. Only the outer x-average (and, in d ≥ 2, the
//! angular average) is sampled. A direct Monte Carlo over whole
//! configurations cannot reach the magnitudes involved (`log Ñ₁` in the
//! hundreds), while the factorized estimator stays exact in ξ.

use crate::error::{Error, Result};
use crate::operator::{assemble, Bc, GridSpec};
use crate::parallel::par_map;
use crate::params::{ball_volume, sphere_surface, ModelParams, PotentialSpec, Sign};
use crate::quad::{
    gauss_legendre, isotonic_nondecreasing, log_integral_shifted, log_sum_exp, mean_stderr,
    neumaier_sum, scale_rule,
};
use crate::randfield::{
    field_v, normalizer, potential_u, sample_configuration, tail_bound, truncation_margin,
};
use crate::rng::point_rng;
use crate::spectra::counting_curve;
use rand::Rng;
use serde::Serialize;
use statrs::function::gamma::{gamma_lr, gamma_ur};

/// Parameter echo attached to every curve.
#[derive(Debug, Clone, Serialize)]
pub struct CurveMeta {
    pub params: ModelParams,
    pub spec: PotentialSpec,
    pub grid: Option<GridSpec>,
    pub margin: u32,
    pub tail_bound: f64,
}

/// Empirical IDS curve with per-point Monte Carlo standard errors.
#[derive(Debug, Clone, Serialize)]
pub struct IdsCurve {
    pub lambda_grid: Vec<f64>,
    pub n_hat: Vec<f64>,
    pub stderr: Vec<f64>,
    pub replicates: usize,
    pub meta: CurveMeta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LaplaceKind {
    N1Quadrature,
    N1Mc,
    FromIds,
    Negative,
}

impl LaplaceKind {
    pub fn label(&self) -> &'static str {
        match self {
            LaplaceKind::N1Quadrature => "n1_quadrature",
            LaplaceKind::N1Mc => "n1_mc",
            LaplaceKind::FromIds => "from_ids",
            LaplaceKind::Negative => "negative",
        }
    }
}

/// Log-domain Laplace-transform curve. `stderr` is zero for deterministic
/// kinds; `ess` and `flagged` report effective-sample-size collapse for the
/// Monte Carlo kinds (a flagged point is reported, never fatal).
#[derive(Debug, Clone, Serialize)]
pub struct LaplaceCurve {
    pub t_grid: Vec<f64>,
    pub log_values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub ess: Vec<f64>,
    pub flagged: Vec<bool>,
    pub remainder: Vec<f64>,
    pub kind: LaplaceKind,
    pub meta: CurveMeta,
}

fn check_lambda_grid(lambda_grid: &[f64]) -> Result<()> {
    if lambda_grid.is_empty() {
        return Err(Error::config("empty lambda grid".to_string()));
    }
    if lambda_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config(
            "lambda grid must be strictly increasing".to_string(),
        ));
    }
    Ok(())
}

fn ensemble_ids(
    params: &ModelParams,
    spec: &PotentialSpec,
    grid: &GridSpec,
    lambda_grid: &[f64],
    replicates: usize,
) -> Result<IdsCurve> {
    params.validate()?;
    spec.validate(params.d)?;
    grid.validate()?;
    check_lambda_grid(lambda_grid)?;
    if grid.d != params.d {
        return Err(Error::config(format!(
            "grid dimension {} does not match params.d = {}",
            grid.d, params.d
        )));
    }
    if replicates < 2 {
        return Err(Error::config(format!(
            "at least 2 replicates required, got {replicates}"
        )));
    }
    if grid.bc != Bc::Dirichlet {
        return Err(Error::config(
            "IDS estimator uses the Dirichlet restriction; set grid.bc = dirichlet".to_string(),
        ));
    }
    let volume = grid.box_r.powi(params.d as i32);
    let per: Vec<Result<Vec<f64>>> = par_map(replicates, |r| {
        let cfg = sample_configuration(params, spec, grid.box_r, r as u64)?;
        let op = assemble(grid, &cfg, spec, spec.sign, params.h)?;
        let summary = counting_curve(&op, lambda_grid)?;
        Ok(summary.counts.iter().map(|&c| c as f64 / volume).collect())
    });
    let mut rows = Vec::with_capacity(replicates);
    for r in per {
        rows.push(r?);
    }
    let m = lambda_grid.len();
    let mut n_hat = vec![0.0; m];
    let mut stderr = vec![0.0; m];
    let mut col = vec![0.0; replicates];
    for j in 0..m {
        for (i, row) in rows.iter().enumerate() {
            col[i] = row[j];
        }
        let (mean, se) = mean_stderr(&col);
        n_hat[j] = mean;
        stderr[j] = se;
    }
    let margin = truncation_margin(spec, params.d);
    Ok(IdsCurve {
        lambda_grid: lambda_grid.to_vec(),
        n_hat,
        stderr,
        replicates,
        meta: CurveMeta {
            params: params.clone(),
            spec: spec.clone(),
            grid: Some(grid.clone()),
            margin,
            tail_bound: tail_bound(spec, params.d, margin),
        },
    })
}

/// Empirical `N(λ)`: mean over replicates of the Dirichlet eigenvalue count
/// per unit volume. Deterministic given the master seed.
pub fn empirical_ids(
    params: &ModelParams,
    spec: &PotentialSpec,
    grid: &GridSpec,
    lambda_grid: &[f64],
    replicates: usize,
) -> Result<IdsCurve> {
    if spec.sign != Sign::Repulsive {
        return Err(Error::config(
            "empirical_ids expects sign = +1; use negative_ids for the attractive case"
                .to_string(),
        ));
    }
    ensemble_ids(params, spec, grid, lambda_grid, replicates)
}

/// Empirical `N⁻(λ)` for the attractive operator `-hΔ - V_ξ`. Requires the
/// bounded-potential hypotheses: no obstacles and finite `u_cap`.
pub fn negative_ids(
    params: &ModelParams,
    spec: &PotentialSpec,
    grid: &GridSpec,
    lambda_grid: &[f64],
    replicates: usize,
) -> Result<IdsCurve> {
    if spec.sign != Sign::Attractive {
        return Err(Error::config("negative_ids expects sign = -1".to_string()));
    }
    if spec.obstacle_rho != 0.0 {
        return Err(Error::config(
            "negative_ids requires obstacle_rho = 0".to_string(),
        ));
    }
    ensemble_ids(params, spec, grid, lambda_grid, replicates)
}

/// Classical IDS `N_c(λ) = ω_d (2π√h)^{-d} R^{-d} E ∫_{Λ_R} (λ-V)₊^{d/2} dx`,
/// inner integral by midpoint quadrature on `n_per_side^d` cells, outer
/// expectation by Monte Carlo over configurations. The grid's boundary
/// condition is irrelevant here.
pub fn classical_ids(
    params: &ModelParams,
    spec: &PotentialSpec,
    grid: &GridSpec,
    lambda_grid: &[f64],
    replicates: usize,
) -> Result<IdsCurve> {
    params.validate()?;
    spec.validate(params.d)?;
    grid.validate()?;
    check_lambda_grid(lambda_grid)?;
    if spec.sign != Sign::Repulsive {
        return Err(Error::config("classical_ids expects sign = +1".to_string()));
    }
    if replicates < 2 {
        return Err(Error::config(format!(
            "at least 2 replicates required, got {replicates}"
        )));
    }
    let d = params.d;
    let n = grid.n_per_side;
    let r_box = grid.box_r;
    let dx = r_box / n as f64;
    let cell = dx.powi(d as i32);
    let prefactor =
        ball_volume(d) / (2.0 * std::f64::consts::PI * params.h.sqrt()).powi(d as i32);
    let volume = r_box.powi(d as i32);
    let total = n.pow(d as u32);
    let node = |idx: usize| -> [f64; 3] {
        let mut rem = idx;
        let mut x = [0.0; 3];
        for x_axis in x.iter_mut().take(d) {
            let i = rem % n;
            rem /= n;
            *x_axis = -r_box / 2.0 + (i as f64 + 0.5) * dx;
        }
        x
    };
    let half_d = d as f64 / 2.0;
    let per: Vec<Result<Vec<f64>>> = par_map(replicates, |r| {
        let cfg = sample_configuration(params, spec, r_box, r as u64)?;
        let vs: Vec<f64> = (0..total)
            .map(|i| field_v(&cfg, spec, node(i)))
            .collect::<Result<_>>()?;
        Ok(lambda_grid
            .iter()
            .map(|&l| {
                let integral = neumaier_sum(vs.iter().map(|&v| {
                    let gap = l - v;
                    if gap > 0.0 {
                        gap.powf(half_d) * cell
                    } else {
                        0.0
                    }
                }));
                prefactor * integral / volume
            })
            .collect())
    });
    let mut rows = Vec::with_capacity(replicates);
    for r in per {
        rows.push(r?);
    }
    let m = lambda_grid.len();
    let mut n_hat = vec![0.0; m];
    let mut stderr = vec![0.0; m];
    let mut col = vec![0.0; replicates];
    for j in 0..m {
        for (i, row) in rows.iter().enumerate() {
            col[i] = row[j];
        }
        let (mean, se) = mean_stderr(&col);
        n_hat[j] = mean;
        stderr[j] = se;
    }
    let margin = truncation_margin(spec, d);
    Ok(IdsCurve {
        lambda_grid: lambda_grid.to_vec(),
        n_hat,
        stderr,
        replicates,
        meta: CurveMeta {
            params: params.clone(),
            spec: spec.clone(),
            grid: Some(grid.clone()),
            margin,
            tail_bound: tail_bound(spec, d, margin),
        },
    })
}

/// Laplace-Stieltjes transform `Ñ(t) = ∫ e^{-tλ} dN(λ)` of an empirical
/// curve: pool-adjacent-violators cleanup, then a log-domain Stieltjes sum.
/// The recorded remainder bounds the mass beyond the λ grid by
/// `e^{-t·λ_max} · dim/R^d`.
pub fn laplace_from_ids(curve: &IdsCurve, t_grid: &[f64]) -> Result<LaplaceCurve> {
    if t_grid.is_empty() {
        return Err(Error::config("empty t grid".to_string()));
    }
    if t_grid.iter().any(|&t| t <= 0.0) {
        return Err(Error::config("laplace_from_ids requires t > 0".to_string()));
    }
    let clean = isotonic_nondecreasing(&curve.n_hat);
    let lam = &curve.lambda_grid;
    let m = lam.len();
    // Stieltjes masses: the first grid point carries everything at or below it.
    let mut mass = Vec::with_capacity(m);
    mass.push(clean[0].max(0.0));
    for j in 1..m {
        mass.push((clean[j] - clean[j - 1]).max(0.0));
    }
    if mass.iter().all(|&w| w <= 0.0) {
        return Err(Error::config(
            "IDS curve carries no spectral mass on the grid".to_string(),
        ));
    }
    let states_per_volume = match &curve.meta.grid {
        Some(g) => g.total_points() as f64 / g.box_r.powi(g.d as i32),
        None => *clean.last().unwrap(),
    };
    let kind = match curve.meta.spec.sign {
        Sign::Repulsive => LaplaceKind::FromIds,
        Sign::Attractive => LaplaceKind::Negative,
    };
    let reps = curve.replicates.max(1) as f64;
    let mut log_values = Vec::with_capacity(t_grid.len());
    let mut stderr = Vec::with_capacity(t_grid.len());
    let mut remainder = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let terms: Vec<f64> = mass
            .iter()
            .zip(lam)
            .filter(|(&w, _)| w > 0.0)
            .map(|(&w, &l)| w.ln() - t * l)
            .collect();
        let lv = log_sum_exp(&terms);
        if !lv.is_finite() {
            return Err(Error::numerical(format!(
                "laplace_from_ids: transform underflowed at t = {t}"
            )));
        }
        log_values.push(lv);
        // Conservative (fully correlated) error propagation through the
        // Abel-summed form σ(Ñ) ≤ Σ_j s_j (e^{-tλ_j} - e^{-tλ_{j+1}}) + s_m e^{-tλ_m}.
        let mut sig_terms: Vec<f64> = Vec::with_capacity(m);
        for j in 0..m {
            let s = curve.stderr[j];
            if s <= 0.0 {
                continue;
            }
            let log_coef = if j + 1 < m {
                let gap = t * (lam[j + 1] - lam[j]);
                -t * lam[j] + (-(-gap).exp()).ln_1p()
            } else {
                -t * lam[j]
            };
            sig_terms.push(s.ln() + log_coef);
        }
        let log_sigma = log_sum_exp(&sig_terms);
        stderr.push(if log_sigma.is_finite() {
            (log_sigma - lv).exp()
        } else {
            0.0
        });
        remainder.push((-t * lam[m - 1]).exp() * states_per_volume);
    }
    let n = t_grid.len();
    Ok(LaplaceCurve {
        t_grid: t_grid.to_vec(),
        log_values,
        stderr,
        ess: vec![reps; n],
        flagged: vec![false; n],
        remainder,
        kind,
        meta: curve.meta.clone(),
    })
}

// ---------------------------------------------------------------------------
// Per-site expectation factors E[exp(∓t·u(z - ξ))]
// ---------------------------------------------------------------------------

pub(crate) mod factor {
    use super::*;

    /// Probability that a 1-D displacement lands in [a, b], together with
    /// the complement, both computed from regularized incomplete-gamma
    /// tails so neither loses precision near 0 or 1.
    pub fn interval_prob_1d(theta: f64, a: f64, b: f64) -> (f64, f64) {
        debug_assert!(a <= b);
        let k = 1.0 / theta;
        let lower = |x: f64| 0.5 * gamma_lr(k, x.abs().powf(theta));
        let upper = |x: f64| 0.5 * gamma_ur(k, x.abs().powf(theta));
        if a >= 0.0 {
            let p = (upper(a) - upper(b)).max(0.0);
            (p, (0.5 + lower(a) + upper(b)).min(1.0))
        } else if b <= 0.0 {
            let p = (upper(-b) - upper(-a)).max(0.0);
            (p, (0.5 + lower(-b) + upper(-a)).min(1.0))
        } else {
            let p = (lower(-a) + lower(b)).min(1.0);
            (p, (upper(-a) + upper(b)).min(1.0))
        }
    }

    /// ln of `1 + (e^{-s·t·u0} - 1)·P`, evaluated without cancellation:
    /// the factor for an indicator-type site.
    pub fn ln_indicator_factor(t: f64, u0: f64, sign: f64, p: f64, p_comp: f64) -> f64 {
        if p <= 0.0 || t == 0.0 || u0 == 0.0 {
            return 0.0;
        }
        let expo = -sign * t * u0;
        // g = e^{expo}·P + (1 - P)
        let a = expo + p.ln();
        let b = if p_comp > 0.0 {
            p_comp.ln()
        } else {
            f64::NEG_INFINITY
        };
        log_sum_exp(&[a, b])
    }

    /// Clearing radius: distance at which `t·u` drops to order one.
    fn clearing_radius(spec: &PotentialSpec, t: f64) -> f64 {
        match spec.compact_r {
            Some(r2) => r2,
            None => {
                if spec.c0 <= 0.0 || spec.u_cap == 0.0 {
                    0.0
                } else {
                    (t * spec.c0).powf(1.0 / spec.alpha).max(spec.r0)
                }
            }
        }
    }

    /// Displacement radius carrying all but ~e^{-80} of the mass.
    fn rho_reach(theta: f64) -> f64 {
        (80.0f64).powf(1.0 / theta)
    }

    /// Subdivide panels so the width stays commensurate with the local
    /// feature scale; keeps the adaptive rule from probing blind on wide
    /// flat stretches.
    fn refine_cuts(cuts: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(cuts.len() * 4);
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            out.push(a);
            let width = b - a;
            let scale = a.abs().min(b.abs()).max(4.0) * 0.5;
            let n = (width / scale).ceil() as usize;
            if n > 1 {
                for k in 1..n.min(64) {
                    out.push(a + width * k as f64 / n as f64);
                }
            }
        }
        out.push(*cuts.last().unwrap());
        out
    }

    /// ln E[exp(-sign·t·u(z - ξ))] for d = 1 by direct y-space adaptive
    /// quadrature against the displacement density (the deterministic
    /// quadrature-oracle route).
    pub fn ln_factor_1d_yspace(
        spec: &PotentialSpec,
        theta: f64,
        t: f64,
        sign: f64,
        z: f64,
    ) -> Result<f64> {
        if t == 0.0 || spec.u_cap == 0.0 {
            return Ok(0.0);
        }
        if let Some(r2) = spec.compact_r {
            let (p, pc) = interval_prob_1d(theta, z - r2, z + r2);
            return Ok(ln_indicator_factor(t, spec.u_cap, sign, p, pc));
        }
        let ln_z = normalizer(1, theta)?.ln();
        let w = clearing_radius(spec, t);
        let reach = rho_reach(theta);
        let ymax = z.abs() + 2.0 * w + reach + 10.0;
        let r_eff = spec.effective_core_radius();
        let mut cuts = vec![
            -ymax,
            -reach,
            0.0,
            z - w,
            z - r_eff,
            z,
            z + r_eff,
            z + w,
            reach,
            ymax,
        ];
        cuts.retain(|c| c.abs() <= ymax);
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let cuts = refine_cuts(&cuts);
        let ln_f = |y: f64| {
            -y.abs().powf(theta) - ln_z - sign * t * potential_u(spec, 1, [z - y, 0.0, 0.0])
        };
        log_integral_shifted(ln_f, &cuts, 1e-10)
    }

    /// ln E[exp(-sign·t·u(z - ξ))] via the radial route: integrate over the
    /// displacement radius with a fixed angular average. The route used by
    /// the Monte Carlo estimator and the only one available in d ≥ 2.
    pub fn ln_factor_radial(
        spec: &PotentialSpec,
        d: usize,
        theta: f64,
        t: f64,
        sign: f64,
        z: [f64; 3],
    ) -> Result<f64> {
        if t == 0.0 || spec.u_cap == 0.0 {
            return Ok(0.0);
        }
        if let Some(r2) = spec.compact_r {
            if d == 1 {
                let (p, pc) = interval_prob_1d(theta, z[0] - r2, z[0] + r2);
                return Ok(ln_indicator_factor(t, spec.u_cap, sign, p, pc));
            }
            return ln_factor_box(spec, d, theta, t, sign, z, r2);
        }
        let zn = crate::randfield::norm(d, z);
        let ln_z = normalizer(d, theta)?.ln();
        let ln_sphere = sphere_surface(d).ln();
        let w = clearing_radius(spec, t);
        let reach = rho_reach(theta);
        let rmax = zn + 2.0 * w + reach + 10.0;
        let r_eff = spec.effective_core_radius();
        let mut cuts = vec![
            0.0,
            (zn - w).max(0.0),
            (zn - r_eff).max(0.0),
            zn,
            zn + r_eff,
            zn + w,
            reach,
            rmax,
        ];
        cuts.retain(|c| *c <= rmax && *c >= 0.0);
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let cuts = refine_cuts(&cuts);

        let (ang_nodes, ang_weights) = gauss_legendre(16);
        let ln_f = |r: f64| {
            let ln_avg = match d {
                1 => {
                    let a = -sign * t * potential_u(spec, 1, [zn - r, 0.0, 0.0]);
                    let b = -sign * t * potential_u(spec, 1, [zn + r, 0.0, 0.0]);
                    log_sum_exp(&[a, b]) - std::f64::consts::LN_2
                }
                2 => {
                    // (1/π) ∫_0^π f(dist(φ)) dφ, dist² = z² + r² - 2 z r cos φ
                    let terms: Vec<f64> = ang_nodes
                        .iter()
                        .zip(&ang_weights)
                        .map(|(&x, &wq)| {
                            let phi = 0.5 * (x + 1.0) * std::f64::consts::PI;
                            let dist2 = zn * zn + r * r - 2.0 * zn * r * phi.cos();
                            let u = potential_u(spec, 2, [dist2.max(0.0).sqrt(), 0.0, 0.0]);
                            (wq * 0.5).ln() - sign * t * u
                        })
                        .collect();
                    log_sum_exp(&terms)
                }
                _ => {
                    // (1/2) ∫_{-1}^{1} f(dist(c)) dc, c = cos φ
                    let terms: Vec<f64> = ang_nodes
                        .iter()
                        .zip(&ang_weights)
                        .map(|(&c, &wq)| {
                            let dist2 = zn * zn + r * r - 2.0 * zn * r * c;
                            let u = potential_u(spec, 3, [dist2.max(0.0).sqrt(), 0.0, 0.0]);
                            (wq * 0.5).ln() - sign * t * u
                        })
                        .collect();
                    log_sum_exp(&terms)
                }
            };
            let ln_radial = if d == 1 {
                0.0
            } else {
                (d as f64 - 1.0) * r.max(f64::MIN_POSITIVE).ln()
            };
            ln_sphere - ln_z + ln_radial - r.powf(theta) + ln_avg
        };
        log_integral_shifted(ln_f, &cuts, 1e-10)
    }

    /// Compact-potential factor in d ≥ 2: `1 + (e^{∓t·u0} - 1)·P(box)`,
    /// with the box probability from a log-domain tensor Gauss rule.
    fn ln_factor_box(
        spec: &PotentialSpec,
        d: usize,
        theta: f64,
        t: f64,
        sign: f64,
        z: [f64; 3],
        r2: f64,
    ) -> Result<f64> {
        let ln_z = normalizer(d, theta)?.ln();
        let (n1, w1) = gauss_legendre(12);
        let ax: Vec<(Vec<f64>, Vec<f64>)> = (0..d)
            .map(|axis| scale_rule(&n1, &w1, z[axis] - r2, z[axis] + r2))
            .collect();
        let mut terms = Vec::new();
        match d {
            2 => {
                for (i, &y0) in ax[0].0.iter().enumerate() {
                    for (j, &y1) in ax[1].0.iter().enumerate() {
                        let r = (y0 * y0 + y1 * y1).sqrt();
                        terms.push((ax[0].1[i] * ax[1].1[j]).ln() - r.powf(theta) - ln_z);
                    }
                }
            }
            _ => {
                for (i, &y0) in ax[0].0.iter().enumerate() {
                    for (j, &y1) in ax[1].0.iter().enumerate() {
                        for (k, &y2) in ax[2].0.iter().enumerate() {
                            let r = (y0 * y0 + y1 * y1 + y2 * y2).sqrt();
                            terms.push(
                                (ax[0].1[i] * ax[1].1[j] * ax[2].1[k]).ln()
                                    - r.powf(theta)
                                    - ln_z,
                            );
                        }
                    }
                }
            }
        }
        let ln_p = log_sum_exp(&terms);
        let p = ln_p.exp().min(1.0);
        Ok(ln_indicator_factor(t, spec.u_cap, sign, p, 1.0 - p))
    }

    /// Far-zone cumulant expansion
    /// `ln g ≈ -s·t·κ₁ + t²κ₂/2 - s·t³κ₃/6` with moments of `u(z - ξ)` from
    /// a fixed Gauss rule; admissible when `t·u` is uniformly small over the
    /// displacement reach.
    pub fn ln_factor_cumulant(
        spec: &PotentialSpec,
        d: usize,
        theta: f64,
        t: f64,
        sign: f64,
        z: [f64; 3],
        ln_norm: f64,
    ) -> f64 {
        let reach = rho_reach(theta);
        let (n1, w1) = gauss_legendre(32);
        let (rn, rw) = scale_rule(&n1, &w1, 0.0, reach);
        let zn = crate::randfield::norm(d, z);
        let (ang_nodes, ang_weights) = gauss_legendre(16);
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        let mut m3 = 0.0;
        for (&r, &wr) in rn.iter().zip(&rw) {
            let density = (sphere_surface(d).ln() - ln_norm
                + if d == 1 {
                    0.0
                } else {
                    (d as f64 - 1.0) * r.max(f64::MIN_POSITIVE).ln()
                }
                - r.powf(theta))
            .exp();
            let mut u_avg = 0.0;
            let mut u2_avg = 0.0;
            let mut u3_avg = 0.0;
            match d {
                1 => {
                    for s in [-1.0, 1.0] {
                        let u = potential_u(spec, 1, [zn - s * r, 0.0, 0.0]);
                        u_avg += 0.5 * u;
                        u2_avg += 0.5 * u * u;
                        u3_avg += 0.5 * u * u * u;
                    }
                }
                2 => {
                    for (&xq, &wq) in ang_nodes.iter().zip(&ang_weights) {
                        let phi = 0.5 * (xq + 1.0) * std::f64::consts::PI;
                        let dist = (zn * zn + r * r - 2.0 * zn * r * phi.cos()).max(0.0).sqrt();
                        let u = potential_u(spec, 2, [dist, 0.0, 0.0]);
                        let w = wq * 0.5;
                        u_avg += w * u;
                        u2_avg += w * u * u;
                        u3_avg += w * u * u * u;
                    }
                }
                _ => {
                    for (&c, &wq) in ang_nodes.iter().zip(&ang_weights) {
                        let dist = (zn * zn + r * r - 2.0 * zn * r * c).max(0.0).sqrt();
                        let u = potential_u(spec, 3, [dist, 0.0, 0.0]);
                        let w = wq * 0.5;
                        u_avg += w * u;
                        u2_avg += w * u * u;
                        u3_avg += w * u * u * u;
                    }
                }
            }
            m1 += wr * density * u_avg;
            m2 += wr * density * u2_avg;
            m3 += wr * density * u3_avg;
        }
        let k2 = m2 - m1 * m1;
        let k3 = m3 - 3.0 * m1 * m2 + 2.0 * m1 * m1 * m1;
        -sign * t * m1 + t * t * k2 / 2.0 - sign * t * t * t * k3 / 6.0
    }

    /// True when the far-zone expansion is admissible at site offset `z`.
    pub fn far_zone(spec: &PotentialSpec, d: usize, theta: f64, t: f64, z: [f64; 3]) -> bool {
        if spec.u_cap == 0.0 {
            return true;
        }
        let reach = rho_reach(theta);
        let zn = crate::randfield::norm(d, z);
        let gap = zn - reach;
        if gap <= spec.effective_core_radius().max(1.0) {
            return false;
        }
        match spec.compact_r {
            Some(r2) => gap > r2, // indicator unreachable within e^{-80} mass
            None => t * spec.c0 / gap.powf(spec.alpha) < 0.05,
        }
    }
}

/// Site-sum policy for d = 1: add per-site log-factors over windows
/// `|q| ≤ Q`, doubling Q with an analytic power tail until two consecutive
/// totals agree.
struct SiteSum1d<'a> {
    spec: &'a PotentialSpec,
    t: f64,
    sign: f64,
}

impl SiteSum1d<'_> {
    fn tail(&self, q_cap: i64) -> f64 {
        match self.spec.compact_r {
            Some(_) => 0.0,
            None => {
                if self.spec.u_cap == 0.0 {
                    return 0.0;
                }
                let a = self.spec.alpha;
                -self.sign * 2.0 * self.t * self.spec.c0 * (q_cap as f64 + 0.5).powf(1.0 - a)
                    / (a - 1.0)
            }
        }
    }

    fn sum<F: Fn(f64) -> Result<f64>>(&self, x: f64, ln_g: &F) -> Result<f64> {
        let mut q_cap: i64 = 16;
        let mut partial = 0.0f64;
        for q in -q_cap..=q_cap {
            partial += ln_g(x - q as f64)?;
        }
        let mut total = partial + self.tail(q_cap);
        loop {
            let next_cap = q_cap * 2;
            if next_cap > (1 << 22) {
                return Err(Error::numerical(format!(
                    "site sum did not converge by |q| = {q_cap} (t = {}, x = {x}); \
                     last total {total:e}",
                    self.t
                )));
            }
            for q in (q_cap + 1)..=next_cap {
                partial += ln_g(x - q as f64)?;
                partial += ln_g(x + q as f64)?;
            }
            let refined = partial + self.tail(next_cap);
            let tol = (1e-8 * refined.abs()).max(1e-10);
            let done = (refined - total).abs() <= tol;
            q_cap = next_cap;
            total = refined;
            if done {
                return Ok(total);
            }
        }
    }
}

fn n1_meta(params: &ModelParams, spec: &PotentialSpec) -> CurveMeta {
    CurveMeta {
        params: params.clone(),
        spec: spec.clone(),
        grid: None,
        margin: 0,
        tail_bound: 0.0,
    }
}

/// Deterministic `log Ñ₁(t)` in d = 1 (sign = +1): per-site factors by
/// adaptive quadrature against the displacement density, outer x-integral
/// by a fixed composite Gauss rule on `Λ_1`. The designated high-precision
/// oracle for the Monte Carlo estimator.
pub fn n1_quadrature(params: &ModelParams, spec: &PotentialSpec, t: f64) -> Result<f64> {
    params.validate()?;
    spec.validate(params.d)?;
    if params.d != 1 {
        return Err(Error::config(
            "n1_quadrature supports d = 1; use n1_mc for d ≥ 2".to_string(),
        ));
    }
    if spec.sign != Sign::Repulsive {
        return Err(Error::config(
            "n1_quadrature expects sign = +1 (see n1_mc for the attractive transform)".to_string(),
        ));
    }
    if t < 0.0 {
        return Err(Error::config(format!("t must be nonnegative, got {t}")));
    }
    if t == 0.0 || spec.u_cap == 0.0 {
        return Ok(0.0);
    }
    let theta = params.theta;
    let ln_norm = normalizer(1, theta)?.ln();
    let summer = SiteSum1d { spec, t, sign: 1.0 };
    let ln_g = |z: f64| -> Result<f64> {
        if factor::far_zone(spec, 1, theta, t, [z, 0.0, 0.0]) {
            Ok(factor::ln_factor_cumulant(
                spec,
                1,
                theta,
                t,
                1.0,
                [z, 0.0, 0.0],
                ln_norm,
            ))
        } else {
            factor::ln_factor_1d_yspace(spec, theta, t, 1.0, z)
        }
    };
    // The site sum is even in x, so integrate 2·∫_0^{1/2} with a composite
    // 2 × 10-point Gauss rule, log-summed.
    let (n10, w10) = gauss_legendre(10);
    let mut terms = Vec::with_capacity(20);
    for p in 0..2 {
        let a = 0.25 * p as f64;
        let (xs, ws) = scale_rule(&n10, &w10, a, a + 0.25);
        for (&x, &w) in xs.iter().zip(&ws) {
            let s = summer.sum(x, &ln_g)?;
            terms.push((2.0 * w).ln() + s);
        }
    }
    let out = log_sum_exp(&terms);
    if !out.is_finite() {
        return Err(Error::numerical(format!(
            "n1_quadrature: x-integral underflowed at t = {t}"
        )));
    }
    Ok(out)
}

/// Deterministic curve over a t grid (points evaluated in parallel).
pub fn n1_quadrature_curve(
    params: &ModelParams,
    spec: &PotentialSpec,
    t_grid: &[f64],
) -> Result<LaplaceCurve> {
    let vals: Vec<Result<f64>> = par_map(t_grid.len(), |i| n1_quadrature(params, spec, t_grid[i]));
    let mut log_values = Vec::with_capacity(t_grid.len());
    for v in vals {
        log_values.push(v?);
    }
    let n = t_grid.len();
    Ok(LaplaceCurve {
        t_grid: t_grid.to_vec(),
        log_values,
        stderr: vec![0.0; n],
        ess: vec![f64::INFINITY; n],
        flagged: vec![false; n],
        remainder: vec![0.0; n],
        kind: LaplaceKind::N1Quadrature,
        meta: n1_meta(params, spec),
    })
}

/// Monte Carlo `log Ñ₁(t)` (both signs, any d ≤ 3): the expectation over ξ
/// factorizes over sites and each factor is integrated radially; only the
/// x-average over `Λ_1` is sampled. Log-sum-exp accumulation; points whose
/// effective sample size drops below 10 are flagged, never fatal.
pub fn n1_mc(
    params: &ModelParams,
    spec: &PotentialSpec,
    t_grid: &[f64],
    replicates: usize,
) -> Result<LaplaceCurve> {
    params.validate()?;
    spec.validate(params.d)?;
    if t_grid.is_empty() {
        return Err(Error::config("empty t grid".to_string()));
    }
    if t_grid.iter().any(|&t| t < 0.0) {
        return Err(Error::config("n1_mc requires t ≥ 0".to_string()));
    }
    if replicates < 2 {
        return Err(Error::config(format!(
            "at least 2 replicates required, got {replicates}"
        )));
    }
    let d = params.d;
    let theta = params.theta;
    let sign = spec.sign.factor();
    let ln_norm = normalizer(d, theta)?.ln();

    // G_r[ti] = Σ_sites ln E[exp(∓t·u(x_r - q - ξ))] at x_r ~ U(Λ_1).
    let rows: Vec<Result<Vec<f64>>> = par_map(replicates, |r| {
        let mut rng = point_rng(params.seed, r as u64);
        let mut x = [0.0f64; 3];
        for x_axis in x.iter_mut().take(d) {
            *x_axis = rng.random::<f64>() - 0.5;
        }
        let mut out = Vec::with_capacity(t_grid.len());
        for &t in t_grid {
            if t == 0.0 || spec.u_cap == 0.0 {
                out.push(0.0);
                continue;
            }
            if d == 1 {
                let summer = SiteSum1d { spec, t, sign };
                let ln_g = |z: f64| -> Result<f64> {
                    if factor::far_zone(spec, 1, theta, t, [z, 0.0, 0.0]) {
                        Ok(factor::ln_factor_cumulant(
                            spec,
                            1,
                            theta,
                            t,
                            sign,
                            [z, 0.0, 0.0],
                            ln_norm,
                        ))
                    } else {
                        factor::ln_factor_radial(spec, 1, theta, t, sign, [z, 0.0, 0.0])
                    }
                };
                out.push(summer.sum(x[0], &ln_g)?);
            } else {
                out.push(site_sum_multidim(spec, d, theta, t, sign, x, ln_norm)?);
            }
        }
        Ok(out)
    });
    let mut g_rows = Vec::with_capacity(replicates);
    for r in rows {
        g_rows.push(r?);
    }
    let n = t_grid.len();
    let mut log_values = Vec::with_capacity(n);
    let mut stderr = Vec::with_capacity(n);
    let mut ess_v = Vec::with_capacity(n);
    let mut flagged = Vec::with_capacity(n);
    for ti in 0..n {
        let gs: Vec<f64> = g_rows.iter().map(|row| row[ti]).collect();
        let gmax = gs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = gs.iter().map(|&g| (g - gmax).exp()).collect();
        let (w_mean, w_se) = mean_stderr(&w);
        log_values.push(gmax + w_mean.ln());
        stderr.push(w_se / w_mean);
        let sw = neumaier_sum(w.iter().cloned());
        let sw2 = neumaier_sum(w.iter().map(|&v| v * v));
        let ess = if sw2 > 0.0 { sw * sw / sw2 } else { 0.0 };
        flagged.push(ess < 10.0);
        ess_v.push(ess);
    }
    Ok(LaplaceCurve {
        t_grid: t_grid.to_vec(),
        log_values,
        stderr,
        ess: ess_v,
        flagged,
        remainder: vec![0.0; n],
        kind: LaplaceKind::N1Mc,
        meta: n1_meta(params, spec),
    })
}

/// Public handle on the per-site radial factor `ln E[exp(-sign·t·u(z-ξ))]`,
/// for benchmarks and external validation.
pub fn factor_ln_radial(
    spec: &PotentialSpec,
    d: usize,
    theta: f64,
    t: f64,
    sign: f64,
    z: [f64; 3],
) -> Result<f64> {
    factor::ln_factor_radial(spec, d, theta, t, sign, z)
}

/// Multidimensional site sum with adaptive sup-norm window and radial tail
/// correction.
fn site_sum_multidim(
    spec: &PotentialSpec,
    d: usize,
    theta: f64,
    t: f64,
    sign: f64,
    x: [f64; 3],
    ln_norm: f64,
) -> Result<f64> {
    let tail = |cap: i64| -> f64 {
        match spec.compact_r {
            Some(_) => 0.0,
            None => {
                if spec.u_cap == 0.0 {
                    return 0.0;
                }
                let a = spec.alpha;
                let dd = d as f64;
                -sign * t * spec.c0 * sphere_surface(d) * (cap as f64 + 0.5).powf(dd - a)
                    / (a - dd)
            }
        }
    };
    let ln_g = |z: [f64; 3]| -> Result<f64> {
        if factor::far_zone(spec, d, theta, t, z) {
            Ok(factor::ln_factor_cumulant(spec, d, theta, t, sign, z, ln_norm))
        } else {
            factor::ln_factor_radial(spec, d, theta, t, sign, z)
        }
    };
    let shell_sum = |cap_lo: i64, cap_hi: i64| -> Result<f64> {
        // sites with cap_lo < |q|_∞ ≤ cap_hi
        let mut acc = 0.0;
        let rng = -cap_hi..=cap_hi;
        for q0 in rng.clone() {
            for q1 in rng.clone() {
                let r2 = if d >= 3 { rng.clone() } else { 0..=0 };
                for q2 in r2 {
                    let inf = q0.abs().max(q1.abs()).max(if d >= 3 { q2.abs() } else { 0 });
                    if inf <= cap_lo {
                        continue;
                    }
                    let z = [x[0] - q0 as f64, x[1] - q1 as f64, x[2] - q2 as f64];
                    acc += ln_g(z)?;
                }
            }
        }
        Ok(acc)
    };
    let mut cap: i64 = 8;
    let mut partial = shell_sum(-1, cap)?;
    let mut total = partial + tail(cap);
    loop {
        let next = cap * 2;
        if next > 1 << 12 {
            return Err(Error::numerical(format!(
                "multidimensional site sum did not converge by |q| = {cap} (t = {t})"
            )));
        }
        partial += shell_sum(cap, next)?;
        let refined = partial + tail(next);
        let tol = (1e-7 * refined.abs()).max(1e-9);
        let done = (refined - total).abs() <= tol;
        cap = next;
        total = refined;
        if done {
            return Ok(total);
        }
    }
}
