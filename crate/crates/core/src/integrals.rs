//! Riesz cross energies `D(B1,B2) = ∬ |x-y|^{-s}` and confinement integrals
//! `𝒱(B) = ∫_B |x|^{-p}` over balls.
//!
//! The deterministic routes are one-dimensional. For disjoint balls
//!
//! ```text
//! D(B1,B2) = d·ω_d ∫_0^{r1+r2} u^{d-1} L(u) M_s(u,R) du
//! ```
//!
//! where `L` is the lens volume and `M_s(u,R)` the mean of `|x|^{-s}` over a
//! sphere of radius `u` whose center sits at distance `R` from the origin.
//! Since `d·ω_d ∫ u^{d-1} L(u) du = m1·m2`, subtracting `R^{-s}` from `M_s`
//! yields the far-field excess `D − m1 m2 R^{-s}` without cancellation.

use alloc::format;

use serde::{Deserialize, Serialize};

use crate::model::{unit_sphere_area, BallDroplet, ModelParams, DEFAULT_TOLERANCE};
use crate::quad::{self, Integral};
use crate::rng::RngSeed;
use crate::special::{beta_reg, ln_beta};
use crate::{Error, Result};

pub const DEFAULT_MC_SAMPLES: u64 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[serde(rename = "adaptive-1d")]
    Adaptive1d,
    MonteCarlo,
    FarField,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub method: Method,
}

/// How an integral over balls should be evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntegralMethod {
    Adaptive { rel_tol: f64 },
    MonteCarlo { samples: u64, seed: RngSeed },
    FarField,
}

impl IntegralMethod {
    pub fn adaptive() -> Self {
        IntegralMethod::Adaptive {
            rel_tol: DEFAULT_TOLERANCE,
        }
    }

    pub fn monte_carlo(seed: RngSeed) -> Self {
        IntegralMethod::MonteCarlo {
            samples: DEFAULT_MC_SAMPLES,
            seed,
        }
    }
}

/// `M_s(u,R) − R^{-s}` for a sphere of radius `u < R`.
///
/// Uses `M_s = R^{-s} ₂F₁(s/2, 1+(s-d)/2; d/2; u²/R²)` when `u²/R² ≤ 1/2`
/// and an angular quadrature otherwise.
pub fn sphere_mean_excess(d: usize, s: f64, u: f64, big_r: f64, rel_tol: f64) -> f64 {
    if u == 0.0 {
        return 0.0;
    }
    let lead = libm::pow(big_r, -s);
    let z = (u / big_r) * (u / big_r);
    let df = d as f64;
    if z <= 0.5 {
        let (a, b, c) = (0.5 * s, 1.0 + 0.5 * (s - df), 0.5 * df);
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 0..4000 {
            let k = k as f64;
            term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
            sum += term;
            if term == 0.0 || term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        return lead * sum;
    }
    let norm = libm::exp(ln_beta(0.5, 0.5 * (df - 1.0)));
    let gap = big_r - u;
    let mean = quad::integrate(
        |phi| {
            let h = libm::sin(0.5 * phi);
            let dist2 = gap * gap + 4.0 * big_r * u * h * h;
            libm::pow(dist2, -0.5 * s) * libm::pow(libm::sin(phi), df - 2.0)
        },
        0.0,
        core::f64::consts::PI,
        rel_tol * 1e-2,
        0.0,
    );
    mean.value / norm - lead
}

/// Mean of `|x|^{-s}` over the sphere of radius `u` centered at distance `R`.
pub fn sphere_mean(d: usize, s: f64, u: f64, big_r: f64, rel_tol: f64) -> f64 {
    libm::pow(big_r, -s) + sphere_mean_excess(d, s, u, big_r, rel_tol)
}

fn check_kernel(exponent: f64, d: usize) -> Result<()> {
    if !(exponent < d as f64) {
        return Err(Error::DivergentIntegral { exponent, dim: d });
    }
    Ok(())
}

fn check_pair(b1: &BallDroplet, b2: &BallDroplet) -> Result<()> {
    if b1.dim() != b2.dim() {
        return Err(Error::InvalidInput(format!(
            "balls live in different dimensions ({} vs {})",
            b1.dim(),
            b2.dim()
        )));
    }
    Ok(())
}

/// Orders a pair so the result does not depend on argument order.
fn canonical<'a>(b1: &'a BallDroplet, b2: &'a BallDroplet) -> (&'a BallDroplet, &'a BallDroplet) {
    use core::cmp::Ordering;
    let ord = b1
        .radius
        .total_cmp(&b2.radius)
        .then_with(|| {
            b1.center
                .iter()
                .zip(&b2.center)
                .map(|(a, b)| a.total_cmp(b))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        })
        .then_with(|| b1.mass.total_cmp(&b2.mass));
    if ord == Ordering::Greater {
        (b2, b1)
    } else {
        (b1, b2)
    }
}

/// `D(B1,B2) − m1 m2 R^{-s}` for balls with disjoint interiors.
pub fn riesz_cross_excess(
    b1: &BallDroplet,
    b2: &BallDroplet,
    s: f64,
    rel_tol: f64,
) -> Result<Integral> {
    check_pair(b1, b2)?;
    let d = b1.dim();
    check_kernel(s, d)?;
    let (b1, b2) = canonical(b1, b2);
    let big_r = b1.distance_to(b2);
    let (r1, r2) = (b1.radius, b2.radius);
    if big_r < r1 + r2 {
        return Err(Error::MethodUnsupported(
            "overlapping balls need the monte-carlo method",
        ));
    }
    let area = unit_sphere_area(d);
    let scale = 1e-16 * b1.mass * b2.mass * libm::pow(big_r, -s);
    let inner = (r1 - r2).abs();
    let integrand = |u: f64| {
        libm::pow(u, d as f64 - 1.0)
            * crate::model::lens_volume(d, r1, r2, u)
            * sphere_mean_excess(d, s, u, big_r, rel_tol)
    };
    let mut total = quad::integrate(integrand, inner, r1 + r2, rel_tol, scale);
    if inner > 0.0 {
        total = total + quad::integrate(integrand, 0.0, inner, rel_tol, scale);
    }
    Ok(Integral {
        value: area * total.value,
        error: area * total.error,
    })
}

/// Riesz interaction `∬_{B1×B2} |x-y|^{-s} dx dy` between two balls.
pub fn riesz_cross_energy(
    b1: &BallDroplet,
    b2: &BallDroplet,
    params: &ModelParams,
    method: IntegralMethod,
) -> Result<QuadratureResult> {
    check_pair(b1, b2)?;
    let s = params.s;
    check_kernel(s, b1.dim())?;
    let (b1, b2) = canonical(b1, b2);
    match method {
        IntegralMethod::Adaptive { rel_tol } => {
            let excess = riesz_cross_excess(b1, b2, s, rel_tol)?;
            let lead = b1.mass * b2.mass * libm::pow(b1.distance_to(b2), -s);
            let value = lead + excess.value;
            Ok(QuadratureResult {
                value,
                error_estimate: excess.error + 4.0 * f64::EPSILON * value.abs(),
                method: Method::Adaptive1d,
            })
        }
        IntegralMethod::MonteCarlo { samples, seed } => {
            let mut rng = seed.rng("riesz-cross", 0);
            let d = b1.dim();
            let mut x = alloc::vec![0.0; d];
            let mut y = alloc::vec![0.0; d];
            let mut stats = Welford::default();
            for _ in 0..samples {
                rng.in_ball(&b1.center, b1.radius, &mut x);
                rng.in_ball(&b2.center, b2.radius, &mut y);
                let r2: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
                stats.push(libm::pow(r2, -0.5 * s));
            }
            let w = b1.mass * b2.mass;
            Ok(QuadratureResult {
                value: w * stats.mean(),
                error_estimate: w * stats.standard_error(),
                method: Method::MonteCarlo,
            })
        }
        IntegralMethod::FarField => {
            if b1.overlaps(b2) {
                return Err(Error::MethodUnsupported(
                    "overlapping balls need the monte-carlo method",
                ));
            }
            far_field_riesz(b1.mass, b2.mass, b1.distance_to(b2), params)
        }
    }
}

/// Point-mass approximation `m1 m2 R^{-s}` with a mean-value error bound.
///
/// With `δ = r1 + r2` and `R > δ`, every `|x-y|` lies in `[R-δ, R+δ]`, so
/// `| |x-y|^{-s} − R^{-s} | ≤ s δ max((R±δ)^{s-1}) / ((R-δ)^s R^s)`.
/// The bound is infinite when `R ≤ δ`.
pub fn far_field_riesz(
    m1: f64,
    m2: f64,
    big_r: f64,
    params: &ModelParams,
) -> Result<QuadratureResult> {
    if !(big_r > 0.0) {
        return Err(Error::InvalidInput(format!(
            "separation must be positive, got {big_r}"
        )));
    }
    let d = params.d;
    let s = params.s;
    let delta = crate::model::ball_radius(m1, d)? + crate::model::ball_radius(m2, d)?;
    let value = m1 * m2 * libm::pow(big_r, -s);
    let error_estimate = if big_r > delta {
        let near = libm::pow(big_r - delta, s - 1.0);
        let far = libm::pow(big_r + delta, s - 1.0);
        m1 * m2 * s * delta * near.max(far) / (libm::pow(big_r - delta, s) * libm::pow(big_r, s))
    } else {
        f64::INFINITY
    };
    Ok(QuadratureResult {
        value,
        error_estimate,
        method: Method::FarField,
    })
}

/// Measure of `{x : |x| = u} ∩ B(c, r)` with `|c| = c`, `c > 0`.
fn shell_area(d: usize, u: f64, c: f64, r: f64) -> f64 {
    let delta = u - c;
    // 1 − cos φ of the cap boundary, written to avoid cancellation when c ≫ r
    let one_minus_tau = (r * r - delta * delta) / (2.0 * u * c);
    let frac = if one_minus_tau <= 0.0 {
        0.0
    } else if one_minus_tau >= 2.0 {
        1.0
    } else {
        let sin2 = one_minus_tau * (2.0 - one_minus_tau);
        let half = 0.5 * beta_reg(0.5 * (d as f64 - 1.0), 0.5, sin2.min(1.0));
        if one_minus_tau <= 1.0 {
            half
        } else {
            1.0 - half
        }
    };
    unit_sphere_area(d) * libm::pow(u, d as f64 - 1.0) * frac
}

/// `𝒱(B) − m |c|^{-p}` for a ball whose center lies at `|c| ≥ r`.
pub fn confinement_excess(b: &BallDroplet, p: f64, rel_tol: f64) -> Result<Integral> {
    let d = b.dim();
    check_kernel(p, d)?;
    let c = b.center_norm();
    let r = b.radius;
    if c < r {
        return Err(Error::InvalidInput(format!(
            "confinement excess needs the origin outside the ball (|c| = {c}, r = {r})"
        )));
    }
    let lead = libm::pow(c, -p);
    // δ = r sin θ flattens the square-root edges of the shell area
    let int = quad::integrate(
        |theta| {
            let delta = r * libm::sin(theta);
            let u = c + delta;
            let diff = lead * libm::expm1(-p * libm::log1p(delta / c));
            diff * shell_area(d, u, c, r) * r * libm::cos(theta)
        },
        -core::f64::consts::FRAC_PI_2,
        core::f64::consts::FRAC_PI_2,
        rel_tol,
        1e-16 * b.mass * lead,
    );
    Ok(int)
}

/// `∫_B |x|^{-p} dx` (without the attraction weight `Z`).
pub fn confinement_integral(
    b: &BallDroplet,
    params: &ModelParams,
    method: IntegralMethod,
) -> Result<QuadratureResult> {
    let d = b.dim();
    let p = params.p;
    check_kernel(p, d)?;
    let c = b.center_norm();
    let r = b.radius;
    match method {
        IntegralMethod::Adaptive { rel_tol } => {
            let (value, error) = if c == 0.0 {
                (origin_ball_confinement(d, p, r), 0.0)
            } else if c >= r {
                let ex = confinement_excess(b, p, rel_tol)?;
                (b.mass * libm::pow(c, -p) + ex.value, ex.error)
            } else {
                let core_part = origin_ball_confinement(d, p, r - c);
                let shell = quad::integrate(
                    |theta| {
                        let u = r + c * libm::sin(theta);
                        libm::pow(u, -p) * shell_area(d, u, c, r) * c * libm::cos(theta)
                    },
                    -core::f64::consts::FRAC_PI_2,
                    core::f64::consts::FRAC_PI_2,
                    rel_tol,
                    0.0,
                );
                (core_part + shell.value, shell.error)
            };
            Ok(QuadratureResult {
                value,
                error_estimate: error + 4.0 * f64::EPSILON * value.abs(),
                method: Method::Adaptive1d,
            })
        }
        IntegralMethod::MonteCarlo { samples, seed } => {
            let mut rng = seed.rng("confinement", 0);
            let mut x = alloc::vec![0.0; d];
            let mut stats = Welford::default();
            for _ in 0..samples {
                rng.in_ball(&b.center, r, &mut x);
                let n2: f64 = x.iter().map(|v| v * v).sum();
                stats.push(libm::pow(n2, -0.5 * p));
            }
            Ok(QuadratureResult {
                value: b.mass * stats.mean(),
                error_estimate: b.mass * stats.standard_error(),
                method: Method::MonteCarlo,
            })
        }
        IntegralMethod::FarField => far_field_confinement(b, params),
    }
}

/// `m |c|^{-p}` with the bound `m p r (|c| − r)^{-p-1}`.
pub fn far_field_confinement(b: &BallDroplet, params: &ModelParams) -> Result<QuadratureResult> {
    let c = b.center_norm();
    if c == 0.0 {
        return Err(Error::InvalidInput(
            "far-field confinement needs an off-origin ball".into(),
        ));
    }
    let r = b.radius;
    let p = params.p;
    let error_estimate = if c > r {
        b.mass * p * r * libm::pow(c - r, -p - 1.0)
    } else {
        f64::INFINITY
    };
    Ok(QuadratureResult {
        value: b.mass * libm::pow(c, -p),
        error_estimate,
        method: Method::FarField,
    })
}

/// `∫_{B_r(0)} |x|^{-p} dx = d ω_d r^{d-p} / (d-p)`.
pub fn origin_ball_confinement(d: usize, p: f64, r: f64) -> f64 {
    unit_sphere_area(d) * libm::pow(r, d as f64 - p) / (d as f64 - p)
}

#[derive(Default)]
pub(crate) struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub(crate) fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub(crate) fn mean(&self) -> f64 {
        self.mean
    }

    pub(crate) fn standard_error(&self) -> f64 {
        if self.n < 2 {
            return f64::INFINITY;
        }
        libm::sqrt(self.m2 / (self.n - 1) as f64 / self.n as f64)
    }
}
