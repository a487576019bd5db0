//! Model parameters, ball geometry and the energy of a single ball.
//!
//! For a ball of volume `m` in `R^d` the Z = 0 energy is
//! `e0(m) = C1·m^{(d-1)/d} + C2·m^{(2d-s)/d}` with `C1 = d·ω_d^{1/d}` (perimeter)
//! and `C2 = γ(d,s)·ω_d^{-(2d-s)/d}` (Riesz self-interaction), where
//! `γ(d,s) = ∬_{B1×B1} |x-y|^{-s} dx dy`.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::quad::{self, Integral};
use crate::special::beta_reg;
use crate::{Error, Result};

/// Default relative tolerance for every quadrature in the crate.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

/// Dimension, exponents, attraction weight and total mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub d: usize,
    pub s: f64,
    pub p: f64,
    #[serde(rename = "Z")]
    pub z: f64,
    #[serde(rename = "M")]
    pub m_total: f64,
}

impl ModelParams {
    pub fn new(d: usize, s: f64, p: f64, z: f64, m_total: f64) -> Result<Self> {
        let params = ModelParams {
            d,
            s,
            p,
            z,
            m_total,
        };
        params.validate()?;
        Ok(params)
    }

    /// Checks `d ≥ 2`, `0 < p < s < d`, `Z ≥ 0` and `M > 0`.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::InvalidParams(msg));
        if self.d < 2 {
            return bad(format!("d ≥ 2 required, got d = {}", self.d));
        }
        if !(self.p.is_finite() && self.s.is_finite()) {
            return bad(format!(
                "s and p must be finite, got s = {}, p = {}",
                self.s, self.p
            ));
        }
        if !(self.p > 0.0) {
            return bad(format!("0 < p required, got p = {}", self.p));
        }
        if !(self.p < self.s) {
            return bad(format!(
                "p < s required, got p = {}, s = {}",
                self.p, self.s
            ));
        }
        if !(self.s < self.d as f64) {
            return bad(format!(
                "s < d required, got s = {}, d = {}",
                self.s, self.d
            ));
        }
        if !(self.z >= 0.0 && self.z.is_finite()) {
            return bad(format!("Z ≥ 0 required, got Z = {}", self.z));
        }
        if !(self.m_total > 0.0 && self.m_total.is_finite()) {
            return bad(format!("M > 0 required, got M = {}", self.m_total));
        }
        Ok(())
    }

    pub fn with_z(mut self, z: f64) -> Self {
        self.z = z;
        self
    }

    pub fn with_mass(mut self, m_total: f64) -> Self {
        self.m_total = m_total;
        self
    }
}

/// Volume `ω_d = π^{d/2}/Γ(d/2+1)` of the unit ball, via `ω_d = ω_{d-2}·2π/d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    let (mut w, start) = if d % 2 == 0 { (1.0, 2) } else { (2.0, 3) };
    let mut k = start;
    while k <= d {
        w *= 2.0 * PI / k as f64;
        k += 2;
    }
    w
}

/// Surface area `d·ω_d` of the unit sphere `S^{d-1}`.
pub fn unit_sphere_area(d: usize) -> f64 {
    d as f64 * unit_ball_volume(d)
}

pub fn ball_radius(mass: f64, d: usize) -> Result<f64> {
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "ball mass must be positive, got {mass}"
        )));
    }
    Ok(libm::pow(mass / unit_ball_volume(d), 1.0 / d as f64))
}

/// Surface area of the sphere bounding a ball of volume `mass`.
pub fn perimeter_ball(mass: f64, d: usize) -> Result<f64> {
    let r = ball_radius(mass, d)?;
    Ok(unit_sphere_area(d) * libm::pow(r, d as f64 - 1.0))
}

/// Volume of the cap of height `h ∈ [0, 2r]` cut from a ball of radius `r`.
pub fn cap_volume(d: usize, r: f64, h: f64) -> f64 {
    let full = unit_ball_volume(d) * libm::pow(r, d as f64);
    if h <= 0.0 {
        return 0.0;
    }
    if h >= 2.0 * r {
        return full;
    }
    if h > r {
        return full - cap_volume(d, r, 2.0 * r - h);
    }
    let x = h * (2.0 * r - h) / (r * r);
    0.5 * full * beta_reg(0.5 * (d as f64 + 1.0), 0.5, x)
}

/// Volume of the intersection of balls of radii `r1`, `r2` with centers at
/// distance `u`.
pub fn lens_volume(d: usize, r1: f64, r2: f64, u: f64) -> f64 {
    let (r1, r2) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
    if u >= r1 + r2 {
        return 0.0;
    }
    if u <= r2 - r1 {
        return unit_ball_volume(d) * libm::pow(r1, d as f64);
    }
    let a1 = (u * u + r1 * r1 - r2 * r2) / (2.0 * u);
    cap_volume(d, r1, r1 - a1) + cap_volume(d, r2, r2 - (u - a1))
}

/// `γ(d,s) = ∬_{B1×B1} |x-y|^{-s} dx dy` through the lens reduction
/// `γ = d·ω_d ∫_0^2 u^{d-1-s} L(u) du`.
pub fn riesz_unit_ball_self_energy(d: usize, s: f64, rel_tol: f64) -> Result<Integral> {
    if !(s < d as f64) {
        return Err(Error::DivergentIntegral {
            exponent: s,
            dim: d,
        });
    }
    if !(s > 0.0) {
        return Err(Error::InvalidInput(format!(
            "Riesz exponent must be positive, got {s}"
        )));
    }
    // u = 2 t^{1/k} removes the u^{k-1} endpoint singularity, k = d - s.
    let k = d as f64 - s;
    let scale = unit_sphere_area(d) * libm::pow(2.0, k) / k;
    let inner = quad::integrate(
        |t| lens_volume(d, 1.0, 1.0, 2.0 * libm::pow(t, 1.0 / k)),
        0.0,
        1.0,
        rel_tol,
        0.0,
    );
    Ok(Integral {
        value: scale * inner.value,
        error: scale * inner.error,
    })
}

/// Masses of interest for the concave/convex structure of `e0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MTilde {
    /// `(C1/C2)^{d/(1+d-s)}`
    pub m_tilde: f64,
    /// Mass where `e0'' = 0`.
    pub inflection: f64,
}

/// Per-`(d, s)` constants of the single-ball energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RieszConstants {
    pub d: usize,
    pub s: f64,
    pub omega_d: f64,
    pub gamma_ds: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    pub tolerance: f64,
}

impl RieszConstants {
    pub fn compute(d: usize, s: f64, tolerance: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParams(format!("d ≥ 2 required, got d = {d}")));
        }
        if !(tolerance > 0.0) {
            return Err(Error::InvalidInput(format!(
                "tolerance must be positive, got {tolerance}"
            )));
        }
        let gamma = riesz_unit_ball_self_energy(d, s, tolerance)?;
        let omega = unit_ball_volume(d);
        let df = d as f64;
        Ok(RieszConstants {
            d,
            s,
            omega_d: omega,
            gamma_ds: gamma.value,
            c1: df * libm::pow(omega, 1.0 / df),
            c2: gamma.value * libm::pow(omega, -(2.0 * df - s) / df),
            tolerance,
        })
    }

    /// Same constants with a replaced perimeter coefficient (comparative statics).
    pub fn with_c1(mut self, c1: f64) -> Self {
        self.c1 = c1;
        self
    }

    fn exponents(&self) -> (f64, f64) {
        let d = self.d as f64;
        ((d - 1.0) / d, (2.0 * d - self.s) / d)
    }

    pub fn perimeter_term(&self, mass: f64) -> f64 {
        self.c1 * libm::pow(mass, self.exponents().0)
    }

    pub fn riesz_term(&self, mass: f64) -> f64 {
        self.c2 * libm::pow(mass, self.exponents().1)
    }

    /// `e0(m) = C1 m^{(d-1)/d} + C2 m^{(2d-s)/d}`, zero at `m = 0`.
    pub fn e0_ball(&self, mass: f64) -> f64 {
        if mass <= 0.0 {
            return 0.0;
        }
        self.perimeter_term(mass) + self.riesz_term(mass)
    }

    /// Error in `e0_ball` inherited from the quadrature behind `γ(d,s)`.
    pub fn e0_error(&self, mass: f64) -> f64 {
        self.tolerance * self.riesz_term(mass.max(0.0))
    }

    /// `e0'(m)`: the Lagrange multiplier carried by a ball of mass `m`.
    pub fn multiplier_ball(&self, mass: f64) -> Result<f64> {
        if !(mass > 0.0) {
            return Err(Error::InvalidInput(format!(
                "multiplier needs positive mass, got {mass}"
            )));
        }
        let (a, b) = self.exponents();
        Ok(self.c1 * a * libm::pow(mass, a - 1.0) + self.c2 * b * libm::pow(mass, b - 1.0))
    }

    pub fn e0_second_derivative(&self, mass: f64) -> f64 {
        let (a, b) = self.exponents();
        self.c1 * a * (a - 1.0) * libm::pow(mass, a - 2.0)
            + self.c2 * b * (b - 1.0) * libm::pow(mass, b - 2.0)
    }

    pub fn m_tilde(&self) -> MTilde {
        let (a, b) = self.exponents();
        let d = self.d as f64;
        let m_tilde = libm::pow(self.c1 / self.c2, d / (1.0 + d - self.s));
        let ratio = self.c1 * a * (1.0 - a) / (self.c2 * b * (b - 1.0));
        MTilde {
            m_tilde,
            inflection: libm::pow(ratio, 1.0 / (b - a)),
        }
    }
}

/// Parameters together with their constants, the handle most operations take.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model {
    pub params: ModelParams,
    pub constants: RieszConstants,
}

impl Model {
    pub fn new(params: ModelParams, tolerance: f64) -> Result<Self> {
        params.validate()?;
        let constants = RieszConstants::compute(params.d, params.s, tolerance)?;
        Ok(Model { params, constants })
    }

    /// Reuse precomputed constants; they must match `(d, s)`.
    pub fn with_constants(params: ModelParams, constants: RieszConstants) -> Result<Self> {
        params.validate()?;
        if constants.d != params.d || constants.s != params.s {
            return Err(Error::InvalidInput(format!(
                "constants for (d, s) = ({}, {}) do not match parameters ({}, {})",
                constants.d, constants.s, params.d, params.s
            )));
        }
        Ok(Model { params, constants })
    }

    pub fn tolerance(&self) -> f64 {
        self.constants.tolerance
    }

    pub fn with_z(mut self, z: f64) -> Self {
        self.params.z = z;
        self
    }

    pub fn e0_ball(&self, mass: f64) -> f64 {
        self.constants.e0_ball(mass)
    }
}

/// A ball of given volume; the only geometric primitive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallDroplet {
    pub center: Vec<f64>,
    pub mass: f64,
    pub radius: f64,
}

impl BallDroplet {
    pub fn new(center: Vec<f64>, mass: f64) -> Result<Self> {
        let d = center.len();
        if d == 0 {
            return Err(Error::InvalidInput("ball center has no coordinates".into()));
        }
        let radius = ball_radius(mass, d)?;
        Ok(BallDroplet {
            center,
            mass,
            radius,
        })
    }

    pub fn at_origin(d: usize, mass: f64) -> Result<Self> {
        Self::new(alloc::vec![0.0; d], mass)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center_norm(&self) -> f64 {
        libm::sqrt(self.center.iter().map(|x| x * x).sum())
    }

    pub fn distance_to(&self, other: &BallDroplet) -> f64 {
        libm::sqrt(
            self.center
                .iter()
                .zip(&other.center)
                .map(|(a, b)| (a - b) * (a - b))
                .sum(),
        )
    }

    pub fn overlaps(&self, other: &BallDroplet) -> bool {
        self.distance_to(other) < self.radius + other.radius
    }
}
