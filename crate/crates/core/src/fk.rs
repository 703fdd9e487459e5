//! Feynman-Kac Monte Carlo for the annealed survival probability `S_{t,x}`
//! (repulsive potential, hard-obstacle killing) and the annealed growth
//! functional `S⁻_{t,x}` (attractive potential, no obstacles).
//!
//! Paths are Euler walks with per-axis increment variance `2h·dt`, so the
//! generator is `hΔ` and the free heat kernel is `(4πht)^{-d/2}`, matching
//! the operator normalization `-hΔ + V`. The potential integral along a
//! path uses the trapezoidal rule; killing is checked once per step against
//! the nearby obstacle centers (lattice bucketing, no sub-step bridge
//! correction — guarded by the `dt ≤ ρ²/h` precondition).

use crate::error::{Error, Result};
use crate::ids::{LaplaceCurve, LaplaceKind};
use crate::params::{ModelParams, PotentialSpec, Sign};
use crate::parallel::par_map;
use crate::quad::{log_sum_exp, mean_stderr, neumaier_sum};
use crate::randfield::{field_v_unchecked, norm, sample_configuration, Configuration};
use crate::rng::path_rng;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use std::collections::HashMap;

/// Annealed path-functional estimate on a time grid.
#[derive(Debug, Clone, Serialize)]
pub struct PathEstimate {
    pub t_grid: Vec<f64>,
    pub log_s: Vec<f64>,
    pub stderr: Vec<f64>,
    pub ess: Vec<f64>,
    pub flagged: Vec<bool>,
    pub x: [f64; 3],
    pub n_paths: usize,
    pub n_configs: usize,
    pub dt: f64,
}

/// Environment seen by a path: potential value and hard-core indicator.
pub trait Environment: Sync {
    fn potential(&self, x: [f64; 3]) -> f64;
    fn blocked(&self, x: [f64; 3]) -> bool;
}

/// Constant-potential environment, the deterministic oracle
/// `S_t = exp(∓ v0 t)`.
pub struct ConstEnvironment(pub f64);

impl Environment for ConstEnvironment {
    fn potential(&self, _x: [f64; 3]) -> f64 {
        self.0
    }
    fn blocked(&self, _x: [f64; 3]) -> bool {
        false
    }
}

fn step_targets(t_grid: &[f64], dt: f64) -> Result<Vec<usize>> {
    if t_grid.is_empty() {
        return Err(Error::config("empty t grid".to_string()));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config("t grid must be strictly increasing".to_string()));
    }
    if t_grid[0] < 0.0 {
        return Err(Error::config("t grid must be nonnegative".to_string()));
    }
    Ok(t_grid.iter().map(|&t| (t / dt).round() as usize).collect())
}

/// Simulate one path; returns the log-weight `-sign·∫V dt` at each target
/// step (`-inf` after killing).
fn simulate_path<E: Environment>(
    env: &E,
    rng: &mut impl Rng,
    x0: [f64; 3],
    d: usize,
    h: f64,
    dt: f64,
    targets: &[usize],
    sign: f64,
) -> Vec<f64> {
    let max_step = *targets.iter().max().unwrap();
    let normal = Normal::new(0.0, (2.0 * h * dt).sqrt()).expect("valid stddev");
    let mut out = vec![f64::NEG_INFINITY; targets.len()];
    let mut pos = x0;
    let mut alive = !env.blocked(pos);
    let mut v_prev = if alive { env.potential(pos) } else { 0.0 };
    let mut acc = 0.0f64;
    let write = |step: usize, acc: f64, alive: bool, out: &mut Vec<f64>| {
        for (i, &tg) in targets.iter().enumerate() {
            if tg == step {
                out[i] = if alive { -sign * acc } else { f64::NEG_INFINITY };
            }
        }
    };
    write(0, acc, alive, &mut out);
    if max_step == 0 {
        return out;
    }
    for step in 1..=max_step {
        if alive {
            for axis in 0..d {
                pos[axis] += normal.sample(rng);
            }
            if env.blocked(pos) {
                alive = false;
            } else {
                let v = env.potential(pos);
                acc += 0.5 * dt * (v_prev + v);
                v_prev = v;
            }
        } else {
            // keep consuming the stream so path draws stay aligned
            for _ in 0..d {
                let _ = normal.sample(rng);
            }
        }
        write(step, acc, alive, &mut out);
    }
    out
}

/// Double Monte Carlo (configurations × paths) over an explicit
/// environment builder. Log-sum-exp across paths and configurations;
/// cluster (per-configuration) standard errors.
fn annealed_estimate<E, F>(
    params: &ModelParams,
    build_env: F,
    x: [f64; 3],
    t_grid: &[f64],
    n_paths: usize,
    n_configs: usize,
    dt: f64,
    sign: f64,
) -> Result<PathEstimate>
where
    E: Environment,
    F: Fn(u64) -> Result<E> + Sync,
{
    params.validate()?;
    if !(dt > 0.0) {
        return Err(Error::config(format!("dt must be positive, got {dt}")));
    }
    if n_paths == 0 || n_configs == 0 {
        return Err(Error::config(
            "n_paths and n_configs must be positive".to_string(),
        ));
    }
    let targets = step_targets(t_grid, dt)?;
    let d = params.d;
    let h = params.h;
    // per-config log-mean weights at each time
    let per_config: Vec<Result<Vec<f64>>> = par_map(n_configs, |c| {
        let env = build_env(c as u64)?;
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n_paths);
        for p in 0..n_paths {
            let mut rng = path_rng(params.seed, c as u64, p as u64);
            rows.push(simulate_path(
                &env, &mut rng, x, d, h, dt, &targets, sign,
            ));
        }
        let ln_p = (n_paths as f64).ln();
        Ok((0..targets.len())
            .map(|ti| {
                let col: Vec<f64> = rows.iter().map(|r| r[ti]).collect();
                log_sum_exp(&col) - ln_p
            })
            .collect())
    });
    let mut cfg_logs: Vec<Vec<f64>> = Vec::with_capacity(n_configs);
    for r in per_config {
        cfg_logs.push(r?);
    }
    let nt = t_grid.len();
    let mut log_s = Vec::with_capacity(nt);
    let mut stderr = Vec::with_capacity(nt);
    let mut ess_v = Vec::with_capacity(nt);
    let mut flagged = Vec::with_capacity(nt);
    for ti in 0..nt {
        let logs: Vec<f64> = cfg_logs.iter().map(|r| r[ti]).collect();
        let lmax = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !lmax.is_finite() {
            log_s.push(f64::NEG_INFINITY);
            stderr.push(f64::INFINITY);
            ess_v.push(0.0);
            flagged.push(true);
            continue;
        }
        let w: Vec<f64> = logs.iter().map(|&l| (l - lmax).exp()).collect();
        let (wm, wse) = mean_stderr(&w);
        log_s.push(lmax + wm.ln());
        stderr.push(wse / wm);
        let sw = neumaier_sum(w.iter().cloned());
        let sw2 = neumaier_sum(w.iter().map(|&v| v * v));
        let ess = if sw2 > 0.0 { sw * sw / sw2 } else { 0.0 };
        flagged.push(ess < 10.0);
        ess_v.push(ess);
    }
    Ok(PathEstimate {
        t_grid: t_grid.to_vec(),
        log_s,
        stderr,
        ess: ess_v,
        flagged,
        x,
        n_paths,
        n_configs,
        dt,
    })
}

fn path_box_r(params: &ModelParams, x: [f64; 3], t_max: f64) -> f64 {
    let spread = 8.0 * (2.0 * params.h * t_max.max(1e-9)).sqrt();
    let base = crate::randfield::norm_inf(params.d, x) + spread + 2.0;
    (2.0 * base).ceil().max(4.0)
}

/// Annealed survival probability of the Brownian path among killing
/// potentials and hard obstacles (sign = +1).
#[allow(clippy::too_many_arguments)]
pub fn survival(
    params: &ModelParams,
    spec: &PotentialSpec,
    x: [f64; 3],
    t_grid: &[f64],
    n_paths: usize,
    n_configs: usize,
    dt: f64,
) -> Result<PathEstimate> {
    spec.validate(params.d)?;
    if spec.sign != Sign::Repulsive {
        return Err(Error::config(
            "survival expects sign = +1; use growth for the attractive functional".to_string(),
        ));
    }
    let rho = spec.obstacle_rho;
    if rho > 0.0 && dt > rho * rho / params.h {
        return Err(Error::config(format!(
            "dt = {dt} risks obstacle tunneling; need dt ≤ ρ²/h = {}",
            rho * rho / params.h
        )));
    }
    let t_max = *t_grid.last().ok_or_else(|| Error::config("empty t grid".to_string()))?;
    let box_r = path_box_r(params, x, t_max);
    annealed_estimate(
        params,
        |c| {
            let cfg = sample_configuration(params, spec, box_r, c)?;
            Ok(OwnedEnvironment::new(cfg, spec.clone()))
        },
        x,
        t_grid,
        n_paths,
        n_configs,
        dt,
        1.0,
    )
}

/// Annealed growth functional `S⁻` for the bounded attractive potential
/// (sign = -1, no obstacles).
#[allow(clippy::too_many_arguments)]
pub fn growth(
    params: &ModelParams,
    spec: &PotentialSpec,
    x: [f64; 3],
    t_grid: &[f64],
    n_paths: usize,
    n_configs: usize,
    dt: f64,
) -> Result<PathEstimate> {
    spec.validate(params.d)?;
    if spec.sign != Sign::Attractive {
        return Err(Error::config("growth expects sign = -1".to_string()));
    }
    if spec.obstacle_rho != 0.0 {
        return Err(Error::config("growth requires K = ∅".to_string()));
    }
    let t_max = *t_grid.last().ok_or_else(|| Error::config("empty t grid".to_string()))?;
    let box_r = path_box_r(params, x, t_max);
    annealed_estimate(
        params,
        |c| {
            let cfg = sample_configuration(params, spec, box_r, c)?;
            Ok(OwnedEnvironment::new(cfg, spec.clone()))
        },
        x,
        t_grid,
        n_paths,
        n_configs,
        dt,
        -1.0,
    )
}

/// Owning variant of [`RandomEnvironment`] for per-config construction.
pub struct OwnedEnvironment {
    config: Configuration,
    spec: PotentialSpec,
    buckets: HashMap<[i64; 3], Vec<[f64; 3]>>,
    reach: i64,
}

impl OwnedEnvironment {
    pub fn new(config: Configuration, spec: PotentialSpec) -> Self {
        let rho = spec.obstacle_rho;
        let mut buckets: HashMap<[i64; 3], Vec<[f64; 3]>> = HashMap::new();
        if rho > 0.0 {
            for (q, xi) in config.sites() {
                let center = [
                    q[0] as f64 + xi[0],
                    q[1] as f64 + xi[1],
                    q[2] as f64 + xi[2],
                ];
                let cell = [
                    center[0].floor() as i64,
                    center[1].floor() as i64,
                    center[2].floor() as i64,
                ];
                buckets.entry(cell).or_default().push(center);
            }
        }
        let reach = rho.ceil() as i64 + 1;
        OwnedEnvironment {
            config,
            spec,
            buckets,
            reach,
        }
    }
}

impl Environment for OwnedEnvironment {
    fn potential(&self, x: [f64; 3]) -> f64 {
        field_v_unchecked(&self.config, &self.spec, x)
    }

    fn blocked(&self, x: [f64; 3]) -> bool {
        let rho = self.spec.obstacle_rho;
        if rho == 0.0 {
            return false;
        }
        let d = self.config.d;
        let base = [
            x[0].floor() as i64,
            x[1].floor() as i64,
            x[2].floor() as i64,
        ];
        let r = self.reach;
        let range = |active: bool, b: i64| if active { (b - r)..=(b + r) } else { 0..=0 };
        for c0 in range(true, base[0]) {
            for c1 in range(d >= 2, base[1]) {
                for c2 in range(d >= 3, base[2]) {
                    if let Some(centers) = self.buckets.get(&[c0, c1, c2]) {
                        for c in centers {
                            let rel = [x[0] - c[0], x[1] - c[1], x[2] - c[2]];
                            if norm(d, rel) <= rho {
                                return true;
                            }
                        }
                    }
                }
            }
        }
        false
    }
}

/// Fixed-environment estimate, for oracles and refinement studies.
#[allow(clippy::too_many_arguments)]
pub fn estimate_with_env<E: Environment>(
    params: &ModelParams,
    env: &E,
    x: [f64; 3],
    t_grid: &[f64],
    n_paths: usize,
    n_configs: usize,
    dt: f64,
    sign: Sign,
) -> Result<PathEstimate> {
    annealed_estimate(
        params,
        |_| Ok(EnvRef(env)),
        x,
        t_grid,
        n_paths,
        n_configs,
        dt,
        sign.factor(),
    )
}

struct EnvRef<'a, E: Environment>(&'a E);

impl<E: Environment> Environment for EnvRef<'_, E> {
    fn potential(&self, x: [f64; 3]) -> f64 {
        self.0.potential(x)
    }
    fn blocked(&self, x: [f64; 3]) -> bool {
        self.0.blocked(x)
    }
}

// ---------------------------------------------------------------------------
// Survival vs Laplace-transform direction check
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Inconclusive,
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonPoint {
    pub t: f64,
    pub lhs_log_s: f64,
    pub rhs_bound: f64,
    pub sigma: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub verdict: Verdict,
    pub eps: f64,
    pub points: Vec<ComparisonPoint>,
}

/// Direction check of the survival/transform comparison: at every resolved
/// t the free-endpoint survival should dominate the bridge-normalized
/// transform,
/// `log S_{t,x} ≥ log Ñ(t-ε) + (d/2)·log(4πh(t-ε))` within 2σ.
/// Noise-dominated points are INCONCLUSIVE, never FAIL.
pub fn lemma61_check(
    pathest: &PathEstimate,
    laplace: &LaplaceCurve,
    params: &ModelParams,
    eps: f64,
) -> Result<ComparisonReport> {
    if laplace.kind != LaplaceKind::FromIds {
        return Err(Error::config(
            "lemma61_check needs a from_ids Laplace curve".to_string(),
        ));
    }
    if !(eps > 0.0) {
        return Err(Error::config("eps must be positive".to_string()));
    }
    let lp = &laplace.meta.params;
    if lp.d != params.d || (lp.theta - params.theta).abs() > 1e-12 || (lp.h - params.h).abs() > 1e-12
    {
        return Err(Error::config(
            "lemma61_check: parameter sets do not match".to_string(),
        ));
    }
    let tg = &laplace.t_grid;
    let interp = |t: f64| -> Result<(f64, f64)> {
        if t < tg[0] - 1e-12 || t > tg[tg.len() - 1] + 1e-12 {
            return Err(Error::config(format!(
                "grid mismatch: t - ε = {t} outside the Laplace grid [{}, {}]",
                tg[0],
                tg[tg.len() - 1]
            )));
        }
        let j = tg
            .windows(2)
            .position(|w| t <= w[1] + 1e-12)
            .unwrap_or(tg.len() - 2);
        let (t0, t1) = (tg[j], tg[j + 1]);
        let frac = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        Ok((
            laplace.log_values[j] * (1.0 - frac) + laplace.log_values[j + 1] * frac,
            laplace.stderr[j].max(laplace.stderr[j + 1]),
        ))
    };
    let d_half = params.d as f64 / 2.0;
    let mut points = Vec::new();
    for (i, &t) in pathest.t_grid.iter().enumerate() {
        if t <= eps {
            continue;
        }
        let (ln_n, sig_n) = interp(t - eps)?;
        let rhs = ln_n + d_half * (4.0 * std::f64::consts::PI * params.h * (t - eps)).ln();
        let lhs = pathest.log_s[i];
        let sig_s = pathest.stderr[i];
        let sigma = (sig_s * sig_s + sig_n * sig_n).sqrt();
        let verdict = if !lhs.is_finite()
            || !sigma.is_finite()
            || (lhs != 0.0 && sig_s > 0.5 * lhs.abs())
            || (rhs != 0.0 && sig_n > 0.5 * rhs.abs())
        {
            Verdict::Inconclusive
        } else if lhs >= rhs - 2.0 * sigma {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        points.push(ComparisonPoint {
            t,
            lhs_log_s: lhs,
            rhs_bound: rhs,
            sigma,
            verdict,
        });
    }
    if points.is_empty() {
        return Err(Error::config(
            "no comparable t points (all t ≤ ε)".to_string(),
        ));
    }
    let verdict = if points.iter().any(|p| p.verdict == Verdict::Fail) {
        Verdict::Fail
    } else if points.iter().any(|p| p.verdict == Verdict::Pass) {
        Verdict::Pass
    } else {
        Verdict::Inconclusive
    };
    Ok(ComparisonReport {
        verdict,
        eps,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::{CurveMeta, IdsCurve};
    use approx::assert_relative_eq;

    fn params_1d() -> ModelParams {
        ModelParams::new(1, 1.0, 1.0, 4242)
    }

    #[test]
    fn free_case_survives_exactly() {
        let p = params_1d();
        let spec = PotentialSpec::decay(1.0, 2.0, 0.1, 0.0);
        let est = survival(&p, &spec, [0.0; 3], &[0.0, 0.5, 1.0], 64, 4, 0.05).unwrap();
        for &v in &est.log_s {
            assert_eq!(v, 0.0);
        }
        for &s in &est.stderr {
            assert_eq!(s, 0.0);
        }
    }

    #[test]
    fn constant_potential_oracle() {
        let p = params_1d();
        let v0 = 0.7;
        let env = ConstEnvironment(v0);
        let est = estimate_with_env(
            &p,
            &env,
            [0.0; 3],
            &[0.5, 1.0, 2.0],
            64,
            4,
            0.01,
            Sign::Repulsive,
        )
        .unwrap();
        for (i, &t) in est.t_grid.iter().enumerate() {
            // deterministic: ∫ v0 = v0·t exactly under the trapezoid rule
            assert_relative_eq!(est.log_s[i], -v0 * t, epsilon = 1e-10);
        }
        let grow = estimate_with_env(
            &p,
            &env,
            [0.0; 3],
            &[0.5, 1.0, 2.0],
            64,
            4,
            0.01,
            Sign::Attractive,
        )
        .unwrap();
        for (i, &t) in grow.t_grid.iter().enumerate() {
            assert_relative_eq!(grow.log_s[i], v0 * t, epsilon = 1e-10);
        }
    }

    #[test]
    fn survival_decreases_growth_increases() {
        let p = params_1d();
        let spec = PotentialSpec::compact(1.0, 0.4);
        let ts = [0.5, 1.0, 2.0, 3.0];
        let s = survival(&p, &spec, [0.0; 3], &ts, 48, 12, 0.02).unwrap();
        for w in s.log_s.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "survival must shrink: {w:?}");
        }
        assert!(s.log_s[0] < 0.0);
        let attr = spec.clone().with_sign(Sign::Attractive);
        let g = growth(&p, &attr, [0.0; 3], &ts, 48, 12, 0.02).unwrap();
        for w in g.log_s.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "growth must grow: {w:?}");
        }
        assert!(g.log_s[0] > 0.0);
    }

    #[test]
    fn obstacles_kill_paths() {
        let p = params_1d();
        let spec = PotentialSpec::decay(1.0, 2.0, 0.1, 0.0).with_obstacle(0.15);
        let est = survival(&p, &spec, [0.5, 0.0, 0.0], &[1.0], 64, 8, 0.01).unwrap();
        assert!(
            est.log_s[0] < -0.1,
            "hard cores must kill some paths: {}",
            est.log_s[0]
        );
        // dt precondition
        assert!(survival(&p, &spec, [0.5, 0.0, 0.0], &[1.0], 8, 2, 0.5).is_err());
    }

    #[test]
    fn estimates_are_deterministic() {
        let p = params_1d();
        let spec = PotentialSpec::compact(1.0, 0.4);
        let a = survival(&p, &spec, [0.0; 3], &[1.0, 2.0], 32, 8, 0.02).unwrap();
        let b = survival(&p, &spec, [0.0; 3], &[1.0, 2.0], 32, 8, 0.02).unwrap();
        assert_eq!(a.log_s, b.log_s);
        assert_eq!(a.stderr, b.stderr);
    }

    #[test]
    fn dt_refinement_is_stable() {
        let p = params_1d();
        let spec = PotentialSpec::compact(1.0, 0.4);
        let coarse = survival(&p, &spec, [0.0; 3], &[1.0, 2.0], 96, 24, 0.04).unwrap();
        let fine = survival(&p, &spec, [0.0; 3], &[1.0, 2.0], 96, 24, 0.02).unwrap();
        for i in 0..coarse.t_grid.len() {
            let sigma = (coarse.stderr[i].powi(2) + fine.stderr[i].powi(2)).sqrt();
            assert!(
                (coarse.log_s[i] - fine.log_s[i]).abs() <= 2.0 * sigma + 0.05,
                "t = {}: {} vs {} (σ = {sigma})",
                coarse.t_grid[i],
                coarse.log_s[i],
                fine.log_s[i]
            );
        }
    }

    fn synthetic_laplace(kappa_meta: &ModelParams, lambda0: f64) -> LaplaceCurve {
        // point-mass IDS at λ0 → Ñ(t) = e^{-t·λ0}
        let meta = CurveMeta {
            params: kappa_meta.clone(),
            spec: PotentialSpec::decay(1.0, 2.0, 0.1, 1e6),
            grid: None,
            margin: 0,
            tail_bound: 0.0,
        };
        let curve = IdsCurve {
            lambda_grid: vec![lambda0 - 0.1, lambda0, lambda0 + 0.1],
            n_hat: vec![0.0, 1.0, 1.0],
            stderr: vec![0.0; 3],
            replicates: 4,
            meta,
        };
        crate::ids::laplace_from_ids(&curve, &crate::quad::linspace(0.25, 10.0, 40)).unwrap()
    }

    #[test]
    fn lemma61_closed_form_direction() {
        // closed forms on both sides: survival in a constant potential v0
        // gives log S = -v0·t exactly, while a point-mass IDS at λ0 > v0
        // gives rhs = -λ0(t-ε) + ½log(4πh(t-ε)). For t ≥ 3 the margin
        // (λ0-v0)t - λ0·ε - ½log(4πh(t-ε)) is strictly positive, so the
        // direction check must PASS.
        let p = params_1d();
        let v0 = 0.5;
        let env = ConstEnvironment(v0);
        let est = estimate_with_env(
            &p,
            &env,
            [0.0; 3],
            &crate::quad::linspace(3.0, 8.0, 6),
            32,
            4,
            0.01,
            Sign::Repulsive,
        )
        .unwrap();
        let lap = synthetic_laplace(&p, 1.2);
        let report = lemma61_check(&est, &lap, &p, 0.05).unwrap();
        assert_eq!(report.verdict, Verdict::Pass, "{report:?}");
    }

    #[test]
    fn lemma61_noise_yields_inconclusive_not_fail() {
        let p = params_1d();
        let mut est = estimate_with_env(
            &p,
            &ConstEnvironment(1.2),
            [0.0; 3],
            &crate::quad::linspace(1.0, 4.0, 4),
            8,
            4,
            0.02,
            Sign::Repulsive,
        )
        .unwrap();
        // inflate the error: every point becomes noise-dominated
        for s in &mut est.stderr {
            *s = 100.0;
        }
        let lap = synthetic_laplace(&p, 0.1);
        let report = lemma61_check(&est, &lap, &p, 0.05).unwrap();
        assert_eq!(report.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn lemma61_rejects_mismatched_grids() {
        let p = params_1d();
        let est = estimate_with_env(
            &p,
            &ConstEnvironment(0.5),
            [0.0; 3],
            &[20.0],
            8,
            2,
            0.05,
            Sign::Repulsive,
        )
        .unwrap();
        let lap = synthetic_laplace(&p, 0.5); // grid only reaches t = 8
        assert!(lemma61_check(&est, &lap, &p, 0.05).is_err());
        let other = ModelParams::new(2, 1.0, 1.0, 0);
        assert!(lemma61_check(&est, &lap, &other, 0.05).is_err());
    }
}
