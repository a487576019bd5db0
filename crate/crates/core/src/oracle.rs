//! Brute-force reference computations.
//!
//! These deliberately avoid the quadrature code paths they check: Monte Carlo
//! uses rejection sampling from a bounding cube, the 1-D minimizer is a dense
//! grid with its own golden-section refinement, and gradients are central
//! differences.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::model::BallDroplet;
use crate::rng::RngSeed;
use crate::{Error, Result};

/// One frozen oracle evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRecord {
    pub oracle: String,
    pub inputs: BTreeMap<String, f64>,
    pub value: Vec<f64>,
    /// Standard error for Monte Carlo, argmin resolution for grid searches,
    /// step-halving discrepancy for finite differences.
    pub uncertainty: f64,
    /// Sample count, grid size or number of function evaluations.
    pub resolution: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl OracleRecord {
    pub fn scalar(&self) -> f64 {
        self.value[0]
    }

    /// Same oracle, same inputs and same resolution.
    pub fn same_run(&self, other: &OracleRecord) -> bool {
        self.oracle == other.oracle
            && self.inputs == other.inputs
            && self.resolution == other.resolution
            && self.seed == other.seed
    }
}

fn ball_volume(d: usize, r: f64) -> f64 {
    let h = 0.5 * d as f64;
    libm::exp(h * libm::log(core::f64::consts::PI) - crate::special::ln_gamma(h + 1.0))
        * libm::pow(r, d as f64)
}

/// `∬_{B1×B2} |x − y|^{-s}` by plain Monte Carlo.
pub fn mc_double_integral(
    b1: &BallDroplet,
    b2: &BallDroplet,
    s: f64,
    samples: u64,
    seed: RngSeed,
) -> Result<OracleRecord> {
    let d = b1.dim();
    if b2.dim() != d {
        return Err(Error::InvalidInput(
            "balls live in different dimensions".into(),
        ));
    }
    if s >= d as f64 {
        return Err(Error::DivergentIntegral {
            exponent: s,
            dim: d,
        });
    }
    if samples < 100_000 {
        return Err(Error::InvalidInput(
            "Monte Carlo oracle needs at least 1e5 samples".into(),
        ));
    }
    let mut rng = seed.rng("oracle/mc-double", 0);
    let mut draw = |b: &BallDroplet, out: &mut [f64]| loop {
        let mut n2 = 0.0;
        for x in out.iter_mut() {
            *x = 2.0 * rng.uniform() - 1.0;
            n2 += *x * *x;
        }
        if n2 <= 1.0 {
            for (x, c) in out.iter_mut().zip(&b.center) {
                *x = c + b.radius * *x;
            }
            return;
        }
    };
    let (mut x, mut y) = (vec![0.0; d], vec![0.0; d]);
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..samples {
        draw(b1, &mut x);
        draw(b2, &mut y);
        let r2: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
        let k = libm::pow(r2, -0.5 * s);
        sum += k;
        sum2 += k * k;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum2 / n - mean * mean).max(0.0) * n / (n - 1.0);
    let vol = ball_volume(d, b1.radius) * ball_volume(d, b2.radius);
    let mut inputs = BTreeMap::new();
    inputs.insert("d".to_string(), d as f64);
    inputs.insert("s".to_string(), s);
    inputs.insert("r1".to_string(), b1.radius);
    inputs.insert("r2".to_string(), b2.radius);
    inputs.insert("separation".to_string(), b1.distance_to(b2));
    Ok(OracleRecord {
        oracle: "mc_double_integral".into(),
        inputs,
        value: vec![vol * mean],
        uncertainty: vol * libm::sqrt(var / n),
        resolution: samples,
        seed: Some(seed.0),
    })
}

/// Dense grid argmin over `[a, b]` followed by golden-section refinement
/// between the neighbours of the best grid point. `value = [argmin, min]`.
pub fn grid_minimize_1d<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    resolution: usize,
) -> Result<OracleRecord> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::InvalidInput(
            "grid interval must satisfy a < b".into(),
        ));
    }
    if resolution < 1000 {
        return Err(Error::InvalidInput(
            "grid oracle needs at least 1e3 points".into(),
        ));
    }
    let h = (b - a) / (resolution - 1) as f64;
    let (mut k, mut best) = (0, f64::INFINITY);
    for i in 0..resolution {
        let v = f(a + h * i as f64);
        if v < best {
            best = v;
            k = i;
        }
    }
    let mut lo = a + h * k.saturating_sub(1) as f64;
    let mut hi = (a + h * (k + 1) as f64).min(b);
    let g = 0.5 * (libm::sqrt(5.0) - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo <= 1e-13 * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    let (mut xm, mut fm) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    let grid_x = a + h * k as f64;
    if best < fm {
        xm = grid_x;
        fm = best;
    }
    let mut inputs = BTreeMap::new();
    inputs.insert("a".to_string(), a);
    inputs.insert("b".to_string(), b);
    Ok(OracleRecord {
        oracle: "grid_minimize_1d".into(),
        inputs,
        value: vec![xm, fm],
        // near a smooth minimum f is flat to O(δ²), so rounding limits the argmin to ~√ε
        uncertainty: (hi - lo).max(libm::sqrt(f64::EPSILON) * xm.abs().max(h)),
        resolution: resolution as u64,
        seed: None,
    })
}

/// Central differences with step `h` in each coordinate.
pub fn finite_difference_gradient<F>(mut f: F, point: &[f64], h: f64) -> Result<OracleRecord>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidInput(
            "finite-difference step must be positive".into(),
        ));
    }
    let mut x = point.to_vec();
    let mut grad = Vec::with_capacity(point.len());
    let mut discrepancy: f64 = 0.0;
    for i in 0..point.len() {
        let mut central = |step: f64| -> Result<f64> {
            x[i] = point[i] + step;
            let fp = f(&x).map_err(|_| Error::StencilFailure { coordinate: i });
            x[i] = point[i] - step;
            let fm = f(&x).map_err(|_| Error::StencilFailure { coordinate: i });
            x[i] = point[i];
            let (fp, fm) = (fp?, fm?);
            if !(fp.is_finite() && fm.is_finite()) {
                return Err(Error::StencilFailure { coordinate: i });
            }
            Ok((fp - fm) / (2.0 * step))
        };
        let g = central(h)?;
        let g2 = central(0.5 * h)?;
        discrepancy = discrepancy.max((g - g2).abs());
        grad.push(g);
    }
    let mut inputs = BTreeMap::new();
    inputs.insert("step".to_string(), h);
    for (i, v) in point.iter().enumerate() {
        inputs.insert(alloc::format!("x{i:02}"), *v);
    }
    Ok(OracleRecord {
        oracle: "finite_difference_gradient".into(),
        inputs,
        value: grad,
        uncertainty: discrepancy,
        resolution: 4 * point.len() as u64,
        seed: None,
    })
}
