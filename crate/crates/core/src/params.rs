//! Global physical parameters and the single-site potential specification.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Surface measure of the unit sphere `S^{d-1}` for d = 1, 2, 3.
pub fn sphere_surface(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI,
        _ => panic!("sphere_surface: unsupported dimension {d}"),
    }
}

/// Volume of the unit ball in dimension d = 1, 2, 3.
pub fn ball_volume(d: usize) -> f64 {
    sphere_surface(d) / d as f64
}

/// Global model parameters: dimension, displacement tail exponent θ,
/// diffusion coefficient h, master seed and worker hint.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub d: usize,
    pub theta: f64,
    pub h: f64,
    #[serde(default)]
    pub seed: u64,
    /// Replicate-parallelism hint; 0 means "let the runtime decide".
    #[serde(default)]
    pub workers: usize,
}

impl ModelParams {
    pub fn new(d: usize, theta: f64, h: f64, seed: u64) -> Self {
        ModelParams {
            d,
            theta,
            h,
            seed,
            workers: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.d) {
            return Err(Error::config(format!(
                "params.d must be 1, 2 or 3, got {}",
                self.d
            )));
        }
        if !(self.theta > 0.0) || !self.theta.is_finite() {
            return Err(Error::config(format!(
                "params.theta must be positive and finite, got {}",
                self.theta
            )));
        }
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::config(format!(
                "params.h must be positive and finite, got {}",
                self.h
            )));
        }
        Ok(())
    }
}

/// Sign of the potential term: repulsive (+u) or attractive (-u).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Attractive,
    Repulsive,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Attractive => -1.0,
            Sign::Repulsive => 1.0,
        }
    }
}

// Serialized as the integer ±1 so run configs stay close to the math.
impl Serialize for Sign {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i8(match self {
            Sign::Attractive => -1,
            Sign::Repulsive => 1,
        })
    }
}

impl<'de> Deserialize<'de> for Sign {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = i8::deserialize(d)?;
        match v {
            -1 => Ok(Sign::Attractive),
            1 => Ok(Sign::Repulsive),
            other => Err(serde::de::Error::custom(format!(
                "sign must be -1 or 1, got {other}"
            ))),
        }
    }
}

fn default_u_cap() -> f64 {
    1e6
}

fn default_tail_tol() -> f64 {
    1e-6
}

fn default_sign() -> Sign {
    Sign::Repulsive
}

/// Single-site potential u: either the capped power-law decay variant
/// `u(x) = min(u_cap, C0 / max(|x|, r0)^α)` or the compact box variant
/// `u(x) = u_cap · 1{|x|_∞ ≤ compact_r}`. The sign is applied downstream
/// (operator assembly, estimators), never inside `u` itself.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub c0: f64,
    pub alpha: f64,
    #[serde(default)]
    pub r0: f64,
    #[serde(default = "default_sign")]
    pub sign: Sign,
    /// Support half-width r2 of the compact variant; `None` selects decay.
    #[serde(default)]
    pub compact_r: Option<f64>,
    #[serde(default = "default_u_cap")]
    pub u_cap: f64,
    /// Hard-obstacle radius ρ; 0 means no obstacles (K = ∅).
    #[serde(default)]
    pub obstacle_rho: f64,
    /// Relative truncation budget for the lattice-sum margin.
    #[serde(default = "default_tail_tol")]
    pub tail_tol: f64,
}

impl PotentialSpec {
    /// Decay-variant potential with the given amplitude and exponent.
    pub fn decay(c0: f64, alpha: f64, r0: f64, u_cap: f64) -> Self {
        PotentialSpec {
            c0,
            alpha,
            r0,
            sign: Sign::Repulsive,
            compact_r: None,
            u_cap,
            obstacle_rho: 0.0,
            tail_tol: default_tail_tol(),
        }
    }

    /// Compact box potential `u_cap · 1{|x|_∞ ≤ r2}`.
    pub fn compact(u_cap: f64, r2: f64) -> Self {
        PotentialSpec {
            c0: 0.0,
            alpha: f64::INFINITY,
            r0: 0.0,
            sign: Sign::Repulsive,
            compact_r: Some(r2),
            u_cap,
            obstacle_rho: 0.0,
            tail_tol: default_tail_tol(),
        }
    }

    pub fn with_sign(mut self, sign: Sign) -> Self {
        self.sign = sign;
        self
    }

    pub fn with_obstacle(mut self, rho: f64) -> Self {
        self.obstacle_rho = rho;
        self
    }

    pub fn with_tail_tol(mut self, tol: f64) -> Self {
        self.tail_tol = tol;
        self
    }

    pub fn is_compact(&self) -> bool {
        self.compact_r.is_some()
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if !(self.u_cap >= 0.0) || !self.u_cap.is_finite() {
            return Err(Error::config(format!(
                "spec.u_cap must be finite and nonnegative, got {}",
                self.u_cap
            )));
        }
        if !(self.r0 >= 0.0) {
            return Err(Error::config("spec.r0 must be nonnegative".to_string()));
        }
        if !(self.obstacle_rho >= 0.0) {
            return Err(Error::config(
                "spec.obstacle_rho must be nonnegative".to_string(),
            ));
        }
        if !(self.tail_tol > 0.0) {
            return Err(Error::config("spec.tail_tol must be positive".to_string()));
        }
        match self.compact_r {
            Some(r2) => {
                if !(r2 >= 0.0) || !r2.is_finite() {
                    return Err(Error::config(format!(
                        "spec.compact_r must be finite and nonnegative, got {r2}"
                    )));
                }
            }
            None => {
                if !(self.alpha > d as f64) {
                    return Err(Error::config(format!(
                        "spec.alpha must exceed d = {d}, got {}",
                        self.alpha
                    )));
                }
                if !(self.c0 > 0.0) && self.u_cap > 0.0 {
                    return Err(Error::config(format!(
                        "spec.c0 must be positive for the decay variant, got {}",
                        self.c0
                    )));
                }
            }
        }
        if self.sign == Sign::Attractive && self.obstacle_rho != 0.0 {
            return Err(Error::config(
                "attractive sign requires obstacle_rho = 0 (bounded negative potential hypotheses)"
                    .to_string(),
            ));
        }
        Ok(())
    }

    /// Radius beyond which the decay variant is exactly `C0 |x|^{-α}`:
    /// the larger of the core radius r0 and the cap crossover.
    pub fn effective_core_radius(&self) -> f64 {
        if self.u_cap == 0.0 || self.c0 == 0.0 {
            return self.r0;
        }
        self.r0.max((self.c0 / self.u_cap).powf(1.0 / self.alpha))
    }
}
