//! Displacement-field sampling and evaluation of the random lattice
//! potential `V_ξ(x) = Σ_q u(x - q - ξ_q)`.
//!
//! Displacements follow the isotropic density `exp(-|x|^θ)/Z(d,θ)`: the
//! radius satisfies `|ξ|^θ ~ Gamma(d/θ, 1)` and the direction is uniform on
//! the sphere. Each lattice site draws from its own counter-based stream,
//! so a configuration is a pure function of (seed, replicate).

use crate::error::{Error, Result};
use crate::params::{sphere_surface, ModelParams, PotentialSpec};
use crate::quad::neumaier_sum;
use crate::rng::site_rng;
use rand::Rng;
use rand_distr::{Distribution, Gamma, UnitCircle, UnitSphere};
use statrs::function::gamma::gamma;

/// Euclidean norm over the first `d` components.
#[inline]
pub fn norm(d: usize, v: [f64; 3]) -> f64 {
    match d {
        1 => v[0].abs(),
        2 => v[0].hypot(v[1]),
        _ => (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt(),
    }
}

/// Sup norm over the first `d` components.
#[inline]
pub fn norm_inf(d: usize, v: [f64; 3]) -> f64 {
    let mut m = v[0].abs();
    if d >= 2 {
        m = m.max(v[1].abs());
    }
    if d >= 3 {
        m = m.max(v[2].abs());
    }
    m
}

#[inline]
fn pow_alpha(base: f64, alpha: f64) -> f64 {
    if alpha == 2.0 {
        base * base
    } else if alpha == 4.0 {
        let b2 = base * base;
        b2 * b2
    } else if alpha == 3.0 {
        base * base * base
    } else if alpha == 6.0 {
        let b2 = base * base;
        b2 * b2 * b2
    } else {
        base.powf(alpha)
    }
}

/// Normalizing constant `Z(d,θ) = |S^{d-1}| Γ(d/θ) / θ` of the displacement
/// density.
pub fn normalizer(d: usize, theta: f64) -> Result<f64> {
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(Error::config(format!(
            "normalizer: theta must be positive, got {theta}"
        )));
    }
    if !(1..=3).contains(&d) {
        return Err(Error::config(format!(
            "normalizer: d must be 1, 2 or 3, got {d}"
        )));
    }
    Ok(sphere_surface(d) * gamma(d as f64 / theta) / theta)
}

/// Radial moment `E|ξ|^k = Γ((d+k)/θ) / Γ(d/θ)`.
pub fn abs_moment(d: usize, theta: f64, k: f64) -> f64 {
    gamma((d as f64 + k) / theta) / gamma(d as f64 / theta)
}

/// Draw one displacement from `exp(-|x|^θ)/Z`. Components beyond `d` are 0.
pub fn sample_displacement<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> [f64; 3] {
    let shape = params.d as f64 / params.theta;
    let gamma_dist = Gamma::new(shape, 1.0).expect("validated shape");
    let s = gamma_dist.sample(rng);
    let r = s.powf(1.0 / params.theta);
    match params.d {
        1 => {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            [sign * r, 0.0, 0.0]
        }
        2 => {
            let dir: [f64; 2] = UnitCircle.sample(rng);
            [r * dir[0], r * dir[1], 0.0]
        }
        _ => {
            let dir: [f64; 3] = UnitSphere.sample(rng);
            [r * dir[0], r * dir[1], r * dir[2]]
        }
    }
}

/// Smallest integer margin whose nominal beyond-window tail of the lattice
/// sum is at most `tail_tol · C0` (decay variant). The compact variant only
/// needs to cover the support plus a displacement allowance.
pub fn truncation_margin(spec: &PotentialSpec, d: usize) -> u32 {
    match spec.compact_r {
        Some(r2) => {
            // Sites beyond the support can only contribute through a large
            // displacement; budget ln(1/tol) of exponential decay for that.
            let allowance = (1.0_f64 / spec.tail_tol).ln().max(1.0);
            (r2 + allowance + 1.0).ceil() as u32
        }
        None => {
            if spec.c0 == 0.0 || spec.u_cap == 0.0 {
                return 1;
            }
            let a = spec.alpha;
            let dd = d as f64;
            // T(m) = C0 |S^{d-1}| m^{d-α} / (α-d) ≤ tail_tol · C0
            let m = (sphere_surface(d) / ((a - dd) * spec.tail_tol)).powf(1.0 / (a - dd));
            (m.ceil() as u32).max(1)
        }
    }
}

/// Nominal tail bound `T = C0 |S^{d-1}| margin^{d-α} / (α-d)` excluded from
/// a truncated lattice sum (0 for the compact variant).
pub fn tail_bound(spec: &PotentialSpec, d: usize, margin: u32) -> f64 {
    match spec.compact_r {
        Some(_) => 0.0,
        None => {
            if spec.c0 == 0.0 || spec.u_cap == 0.0 {
                return 0.0;
            }
            let a = spec.alpha;
            let dd = d as f64;
            spec.c0 * sphere_surface(d) * (margin as f64).powf(dd - a) / (a - dd)
        }
    }
}

/// Single-site potential. Decay variant: `min(u_cap, C0 / max(|x|, r0)^α)`;
/// compact variant: `u_cap · 1{|x|_∞ ≤ r2}`. Always nonnegative; the sign
/// is applied downstream.
pub fn potential_u(spec: &PotentialSpec, d: usize, x: [f64; 3]) -> f64 {
    match spec.compact_r {
        Some(r2) => {
            if norm_inf(d, x) <= r2 {
                spec.u_cap
            } else {
                0.0
            }
        }
        None => {
            if spec.u_cap == 0.0 || spec.c0 == 0.0 {
                return 0.0;
            }
            let r = norm(d, x).max(spec.r0);
            if r == 0.0 {
                return spec.u_cap;
            }
            (spec.c0 / pow_alpha(r, spec.alpha)).min(spec.u_cap)
        }
    }
}

/// One sampled displacement field on the enlarged box `Λ_{R + 2·margin}`.
///
/// Sites are the lattice points with `|q_i| ≤ qmax` per active axis, where
/// `qmax = floor((R + 2·margin)/2)`. Regenerating with the same
/// (seed, replicate) reproduces the table bit-exactly.
#[derive(Debug, Clone)]
pub struct Configuration {
    pub d: usize,
    pub theta: f64,
    pub box_r: f64,
    pub margin: u32,
    pub seed: u64,
    pub replicate: u64,
    qmax: i64,
    displacements: Vec<[f64; 3]>,
    max_disp_inf: f64,
}

/// Memory budget for a single displacement table.
const CONFIG_BUDGET_BYTES: usize = 1 << 31;

impl Configuration {
    fn stride(&self) -> i64 {
        2 * self.qmax + 1
    }

    pub fn qmax(&self) -> i64 {
        self.qmax
    }

    pub fn site_count(&self) -> usize {
        (self.stride() as usize).pow(self.d as u32)
    }

    /// Largest displacement sup-norm in the table.
    pub fn max_disp_inf(&self) -> f64 {
        self.max_disp_inf
    }

    #[inline]
    fn index_of(&self, q: [i64; 3]) -> Option<usize> {
        let s = self.stride();
        let mut idx = 0i64;
        for axis in (0..self.d).rev() {
            let c = q[axis];
            if c.abs() > self.qmax {
                return None;
            }
            idx = idx * s + (c + self.qmax);
        }
        Some(idx as usize)
    }

    /// Displacement of site `q`, if the site is inside the enlarged box.
    #[inline]
    pub fn displacement(&self, q: [i64; 3]) -> Option<[f64; 3]> {
        self.index_of(q).map(|i| self.displacements[i])
    }

    /// Iterate over all (site, displacement) pairs in index order.
    pub fn sites(&self) -> impl Iterator<Item = ([i64; 3], [f64; 3])> + '_ {
        let s = self.stride();
        let d = self.d;
        (0..self.displacements.len()).map(move |i| {
            let mut rem = i as i64;
            let mut q = [0i64; 3];
            for axis_q in q.iter_mut().take(d) {
                *axis_q = rem % s - self.qmax;
                rem /= s;
            }
            (q, self.displacements[i])
        })
    }

    /// All-zero displacement field, for frozen-lattice checks.
    pub fn frozen(d: usize, theta: f64, box_r: f64, margin: u32) -> Configuration {
        let qmax = ((box_r + 2.0 * margin as f64) / 2.0 + 1e-9).floor() as i64;
        let stride = (2 * qmax + 1) as usize;
        let n = stride.pow(d as u32);
        Configuration {
            d,
            theta,
            box_r,
            margin,
            seed: 0,
            replicate: 0,
            qmax,
            displacements: vec![[0.0; 3]; n],
            max_disp_inf: 0.0,
        }
    }

    /// Serialize to the interchange JSON schema.
    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<serde_json::Value> = self
            .sites()
            .map(|(q, xi)| {
                serde_json::json!([
                    q[..self.d].to_vec(),
                    xi[..self.d].to_vec(),
                ])
            })
            .collect();
        serde_json::json!({
            "d": self.d,
            "theta": self.theta,
            "box_r": self.box_r,
            "margin": self.margin,
            "seed": self.seed,
            "replicate": self.replicate,
            "displacements": entries,
        })
    }
}

/// Sample the displacement field for one replicate. Independent draws per
/// lattice site, each from its own (seed, replicate, q) stream.
pub fn sample_configuration(
    params: &ModelParams,
    spec: &PotentialSpec,
    box_r: f64,
    replicate: u64,
) -> Result<Configuration> {
    params.validate()?;
    spec.validate(params.d)?;
    if !(box_r >= 1.0) || !box_r.is_finite() {
        return Err(Error::config(format!(
            "box_r must be at least 1, got {box_r}"
        )));
    }
    let margin = truncation_margin(spec, params.d);
    let qmax = ((box_r + 2.0 * margin as f64) / 2.0 + 1e-9).floor() as i64;
    let stride = (2 * qmax + 1) as usize;
    let n = stride.pow(params.d as u32);
    let bytes = n.saturating_mul(std::mem::size_of::<[f64; 3]>());
    if bytes > CONFIG_BUDGET_BYTES {
        return Err(Error::resource(format!(
            "displacement table for box_r = {box_r}, margin = {margin} needs {bytes} bytes; \
             shrink the box or raise spec.tail_tol"
        )));
    }
    let mut cfg = Configuration {
        d: params.d,
        theta: params.theta,
        box_r,
        margin,
        seed: params.seed,
        replicate,
        qmax,
        displacements: vec![[0.0; 3]; n],
        max_disp_inf: 0.0,
    };
    let sites: Vec<[i64; 3]> = cfg.sites().map(|(q, _)| q).collect();
    let mut max_inf = 0.0f64;
    for (i, q) in sites.into_iter().enumerate() {
        let mut rng = site_rng(params.seed, replicate, q);
        let xi = sample_displacement(params, &mut rng);
        if !xi.iter().all(|c| c.is_finite()) {
            return Err(Error::numerical(format!(
                "non-finite displacement sampled at site {q:?}"
            )));
        }
        max_inf = max_inf.max(norm_inf(params.d, xi));
        cfg.displacements[i] = xi;
    }
    cfg.max_disp_inf = max_inf;
    Ok(cfg)
}

#[inline]
fn window_axis(x: f64, margin: i64, qmax: i64) -> std::ops::RangeInclusive<i64> {
    let lo = ((x - margin as f64).ceil() as i64).max(-qmax);
    let hi = ((x + margin as f64).floor() as i64).min(qmax);
    lo..=hi
}

fn window_sum(config: &Configuration, spec: &PotentialSpec, x: [f64; 3]) -> f64 {
    let d = config.d;
    let m = config.margin as i64;
    let qmax = config.qmax;
    let mut terms: Vec<f64> = Vec::new();
    let r1 = if d >= 2 {
        window_axis(x[1], m, qmax)
    } else {
        0..=0
    };
    let r2 = if d >= 3 {
        window_axis(x[2], m, qmax)
    } else {
        0..=0
    };
    for q0 in window_axis(x[0], m, qmax) {
        for q1 in r1.clone() {
            for q2 in r2.clone() {
                let q = [q0, q1, q2];
                if let Some(xi) = config.displacement(q) {
                    let rel = [
                        x[0] - q0 as f64 - xi[0],
                        x[1] - q1 as f64 - xi[1],
                        x[2] - q2 as f64 - xi[2],
                    ];
                    terms.push(potential_u(spec, d, rel));
                }
            }
        }
    }
    neumaier_sum(terms)
}

/// Random potential at `x ∈ Λ_R`: sum over the sites with
/// `|q - x|_∞ ≤ margin`. The excluded tail is bounded by
/// [`tail_bound`], which the caller records as metadata.
pub fn field_v(config: &Configuration, spec: &PotentialSpec, x: [f64; 3]) -> Result<f64> {
    let half = config.box_r / 2.0 + 1e-12;
    for axis in 0..config.d {
        if x[axis].abs() > half {
            return Err(Error::config(format!(
                "field_v: point {:?} outside the box of side {}",
                &x[..config.d],
                config.box_r
            )));
        }
    }
    Ok(window_sum(config, spec, x))
}

/// Window sum without the box-membership check; used by path estimators
/// whose excursions may leave `Λ_R` while staying inside the sampled table.
pub fn field_v_unchecked(config: &Configuration, spec: &PotentialSpec, x: [f64; 3]) -> f64 {
    window_sum(config, spec, x)
}

/// Maximal spacing of the displaced points inside `Λ_R` (d = 1 only),
/// including the boundary gaps to ±R/2.
pub fn max_gap(config: &Configuration) -> Result<f64> {
    if config.d != 1 {
        return Err(Error::config(format!(
            "max_gap is defined for d = 1 only, got d = {}",
            config.d
        )));
    }
    let half = config.box_r / 2.0;
    let mut pts: Vec<f64> = config
        .sites()
        .map(|(q, xi)| q[0] as f64 + xi[0])
        .filter(|p| p.abs() <= half)
        .collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(max_gap_points(&pts, config.box_r))
}

/// Gap kernel on explicit sorted-or-not points in `Λ_R`.
pub fn max_gap_points(points: &[f64], box_r: f64) -> f64 {
    let half = box_r / 2.0;
    let mut pts: Vec<f64> = points.iter().cloned().filter(|p| p.abs() <= half).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if pts.is_empty() {
        return box_r;
    }
    let mut gap = (pts[0] + half).max(half - pts[pts.len() - 1]);
    for w in pts.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    gap
}

/// Numerical check value for the normalizer: radial quadrature
/// `|S^{d-1}| ∫_0^∞ r^{d-1} e^{-r^θ} dr`. Panel cuts keep the adaptive
/// rule from skipping the mass near the origin.
pub fn normalizer_by_quadrature(d: usize, theta: f64) -> Result<f64> {
    let cut = (80.0f64).powf(1.0 / theta);
    let integrand = |r: f64| r.powi(d as i32 - 1) * (-r.powf(theta)).exp();
    let mut cuts: Vec<f64> = vec![0.0, 0.25, 1.0, 3.0, 9.0, cut];
    cuts.retain(|&c| c <= cut);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let val = crate::quad::adaptive_simpson_panels(integrand, &cuts, 1e-13)?;
    Ok(sphere_surface(d) * val)
}
