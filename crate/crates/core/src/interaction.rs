//! The point interaction energy
//!
//! ```text
//! F_{N,m}(y_0,…,y_N) = Σ_{i≠j} m^i m^j / |y_i − y_j|^s − Σ_{i≥1} m^i / |y_i|^p,   y_0 = 0.
//! ```
//!
//! The double sum runs over ordered pairs, so each pair contributes twice.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::model::ModelParams;
use crate::{Error, Result};

/// Droplet masses `(m^0, …, m^N)`; `m^0` belongs to the droplet pinned at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MassVector(Vec<f64>);

impl MassVector {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::InvalidInput("mass vector is empty".into()));
        }
        if let Some((i, m)) = masses
            .iter()
            .enumerate()
            .find(|(_, m)| !(**m > 0.0 && m.is_finite()))
        {
            return Err(Error::InvalidInput(format!(
                "mass {i} must be positive, got {m}"
            )));
        }
        Ok(MassVector(masses))
    }

    /// Checks `Σ m^i = M` to relative `1e-12`.
    pub fn bind(&self, params: &ModelParams) -> Result<()> {
        let total = self.total();
        if (total - params.m_total).abs() > 1e-12 * params.m_total {
            return Err(Error::InvalidInput(format!(
                "masses sum to {total}, expected M = {}",
                params.m_total
            )));
        }
        Ok(())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Number of movable droplets `N`.
    pub fn n(&self) -> usize {
        self.0.len() - 1
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::MIN, f64::max)
    }
}

impl TryFrom<Vec<f64>> for MassVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        MassVector::new(v)
    }
}

impl From<MassVector> for Vec<f64> {
    fn from(m: MassVector) -> Vec<f64> {
        m.0
    }
}

/// Positions `y_1, …, y_N` in `R^d`; `y_0 = 0` is implicit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct PointConfiguration {
    dim: usize,
    coords: Vec<f64>,
}

impl PointConfiguration {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || coords.len() % dim != 0 {
            return Err(Error::InvalidInput(format!(
                "{} coordinates do not form points in dimension {dim}",
                coords.len()
            )));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(
                "point coordinates must be finite".into(),
            ));
        }
        Ok(PointConfiguration { dim, coords })
    }

    pub fn from_points(dim: usize, points: &[Vec<f64>]) -> Result<Self> {
        if let Some(bad) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::InvalidInput(format!(
                "point has {} coordinates, expected {dim}",
                bad.len()
            )));
        }
        Self::new(dim, points.iter().flatten().copied().collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of movable points `N`.
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// `y_i` for `i ∈ 1..=N`.
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[(i - 1) * self.dim..i * self.dim]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        PointConfiguration {
            dim: self.dim,
            coords: self.coords.iter().map(|x| lambda * x).collect(),
        }
    }

    pub fn norms(&self) -> Vec<f64> {
        (1..=self.len()).map(|i| norm(self.point(i))).collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for PointConfiguration {
    type Error = Error;
    fn try_from(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        if points.is_empty() {
            return Ok(PointConfiguration {
                dim: 1,
                coords: Vec::new(),
            });
        }
        Self::from_points(dim, &points)
    }
}

impl From<PointConfiguration> for Vec<Vec<f64>> {
    fn from(c: PointConfiguration) -> Self {
        c.coords.chunks(c.dim).map(<[f64]>::to_vec).collect()
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    libm::sqrt(x.iter().map(|v| v * v).sum())
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// Repulsion (ordered-pair double sum) and attraction (stored positive).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyParts {
    pub repulsion: f64,
    pub attraction: f64,
    pub total: f64,
}

fn check(masses: &MassVector, config: &PointConfiguration) -> Result<()> {
    if masses.n() != config.len() {
        return Err(Error::InvalidInput(format!(
            "{} masses need {} points, got {}",
            masses.as_slice().len(),
            masses.n(),
            config.len()
        )));
    }
    Ok(())
}

/// Evaluate `F_{N,m}`; coincident points are a structured error.
pub fn f_energy(
    masses: &MassVector,
    config: &PointConfiguration,
    params: &ModelParams,
) -> Result<EnergyParts> {
    check(masses, config)?;
    let m = masses.as_slice();
    let (s, p) = (params.s, params.p);
    let mut pair_sum = 0.0;
    let mut attraction = 0.0;
    for i in 1..=config.len() {
        let yi = config.point(i);
        let ri = norm(yi);
        if ri == 0.0 {
            return Err(Error::DegenerateConfiguration {
                first: 0,
                second: i,
            });
        }
        pair_sum += m[0] * m[i] * libm::pow(ri, -s);
        attraction += m[i] * libm::pow(ri, -p);
        for j in 1..i {
            let rij = dist(yi, config.point(j));
            if rij == 0.0 {
                return Err(Error::DegenerateConfiguration {
                    first: j,
                    second: i,
                });
            }
            pair_sum += m[i] * m[j] * libm::pow(rij, -s);
        }
    }
    let repulsion = 2.0 * pair_sum;
    Ok(EnergyParts {
        repulsion,
        attraction,
        total: repulsion - attraction,
    })
}

/// `∂F/∂y_i` for `i = 1..=N`, flattened point-major.
pub fn f_gradient(
    masses: &MassVector,
    config: &PointConfiguration,
    params: &ModelParams,
) -> Result<Vec<f64>> {
    check(masses, config)?;
    let m = masses.as_slice();
    let (s, p) = (params.s, params.p);
    let d = config.dim();
    let n = config.len();
    let mut grad = alloc::vec![0.0; n * d];
    for i in 1..=n {
        let yi = config.point(i);
        let ri = norm(yi);
        if ri == 0.0 {
            return Err(Error::DegenerateConfiguration {
                first: 0,
                second: i,
            });
        }
        // anchor: repulsion from y_0 = 0 plus the attraction
        let coef =
            -2.0 * s * m[0] * m[i] * libm::pow(ri, -s - 2.0) + p * m[i] * libm::pow(ri, -p - 2.0);
        for k in 0..d {
            grad[(i - 1) * d + k] += coef * yi[k];
        }
        for j in 1..i {
            let yj = config.point(j);
            let rij = dist(yi, yj);
            if rij == 0.0 {
                return Err(Error::DegenerateConfiguration {
                    first: j,
                    second: i,
                });
            }
            let c = -2.0 * s * m[i] * m[j] * libm::pow(rij, -s - 2.0);
            for k in 0..d {
                let g = c * (yi[k] - yj[k]);
                grad[(i - 1) * d + k] += g;
                grad[(j - 1) * d + k] -= g;
            }
        }
    }
    Ok(grad)
}

/// Parts of `F` at `λ·config`, from homogeneity: repulsion `·λ^{-s}`, attraction `·λ^{-p}`.
pub fn f_scaling_split(
    parts: &EnergyParts,
    params: &ModelParams,
    lambda: f64,
) -> Result<EnergyParts> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "scale factor must be positive, got {lambda}"
        )));
    }
    let repulsion = parts.repulsion * libm::pow(lambda, -params.s);
    let attraction = parts.attraction * libm::pow(lambda, -params.p);
    Ok(EnergyParts {
        repulsion,
        attraction,
        total: repulsion - attraction,
    })
}

/// Closed-form minimum of `F` for `N = 1`: `r* = (2 s m0 / p)^{1/(s-p)}`.
/// Returns `(r*, F(r*))`.
pub fn two_body_optimum(m0: f64, m1: f64, params: &ModelParams) -> Result<(f64, f64)> {
    if !(m0 > 0.0 && m1 > 0.0) {
        return Err(Error::InvalidInput(format!(
            "masses must be positive, got ({m0}, {m1})"
        )));
    }
    params.validate()?;
    let (s, p) = (params.s, params.p);
    let r = libm::pow(2.0 * s * m0 / p, 1.0 / (s - p));
    let energy = 2.0 * m0 * m1 * libm::pow(r, -s) - m1 * libm::pow(r, -p);
    Ok((r, energy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn params(d: usize, s: f64, p: f64) -> ModelParams {
        ModelParams::new(d, s, p, 0.0, 2.0).unwrap()
    }

    #[test]
    fn two_point_examples() {
        let pr = params(3, 2.0, 1.0);
        let m = MassVector::new(vec![1.0, 1.0]).unwrap();
        let e = f_energy(
            &m,
            &PointConfiguration::new(3, vec![1.0, 0.0, 0.0]).unwrap(),
            &pr,
        )
        .unwrap();
        assert_eq!((e.repulsion, e.attraction, e.total), (2.0, 1.0, 1.0));
        let e = f_energy(
            &m,
            &PointConfiguration::new(3, vec![0.0, 4.0, 0.0]).unwrap(),
            &pr,
        )
        .unwrap();
        assert!((e.total + 0.125).abs() < 1e-15);
    }

    #[test]
    fn three_point_example() {
        let pr = params(3, 2.0, 1.0);
        let m = MassVector::new(vec![1.0, 1.0, 1.0]).unwrap();
        let r = 4.0;
        let c = PointConfiguration::new(3, vec![r, 0.0, 0.0, -r, 0.0, 0.0]).unwrap();
        let e = f_energy(&m, &c, &pr).unwrap();
        let expected = 4.0 / 16.0 + 2.0 / 64.0 - 0.5;
        assert!((e.total - expected).abs() < 1e-15);
    }

    #[test]
    fn degenerate_configurations_report_indices() {
        let pr = params(3, 2.0, 1.0);
        let m = MassVector::new(vec![1.0, 1.0, 1.0]).unwrap();
        let c = PointConfiguration::new(3, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(
            f_energy(&m, &c, &pr).unwrap_err(),
            Error::DegenerateConfiguration {
                first: 0,
                second: 2
            }
        );
        let c = PointConfiguration::new(3, vec![1.0, 2.0, 0.0, 1.0, 2.0, 0.0]).unwrap();
        assert_eq!(
            f_gradient(&m, &c, &pr).unwrap_err(),
            Error::DegenerateConfiguration {
                first: 1,
                second: 2
            }
        );
    }

    #[test]
    fn stationary_two_body() {
        let pr = params(3, 2.0, 1.0);
        let m = MassVector::new(vec![1.0, 1.0]).unwrap();
        let g = f_gradient(
            &m,
            &PointConfiguration::new(3, vec![4.0, 0.0, 0.0]).unwrap(),
            &pr,
        )
        .unwrap();
        assert!(g.iter().all(|x| x.abs() < 1e-12), "{g:?}");
    }

    #[test]
    fn antisymmetric_pair_gradients() {
        let pr = params(3, 1.7, 0.6);
        let m = MassVector::new(vec![0.8, 1.3, 1.3]).unwrap();
        let c = PointConfiguration::new(3, vec![1.5, -0.5, 2.0, -1.5, 0.5, -2.0]).unwrap();
        let g = f_gradient(&m, &c, &pr).unwrap();
        for k in 0..3 {
            assert_eq!(g[k], -g[3 + k]);
        }
    }

    #[test]
    fn scaling_split_cases() {
        let pr = params(3, 2.0, 1.0);
        let m = MassVector::new(vec![1.0, 2.0, 0.5]).unwrap();
        let c = PointConfiguration::new(3, vec![1.0, 2.0, 0.5, -3.0, 0.25, 1.0]).unwrap();
        let e = f_energy(&m, &c, &pr).unwrap();
        assert_eq!(f_scaling_split(&e, &pr, 1.0).unwrap(), e);
        assert_eq!(
            f_scaling_split(&e, &pr, 2.0).unwrap().repulsion,
            e.repulsion / 4.0
        );
        let direct = f_energy(&m, &c.scaled(3.7), &pr).unwrap();
        let split = f_scaling_split(&e, &pr, 3.7).unwrap();
        assert!((direct.repulsion - split.repulsion).abs() < 1e-12 * direct.repulsion);
        assert!((direct.attraction - split.attraction).abs() < 1e-12 * direct.attraction);
        assert!(f_scaling_split(&e, &pr, 0.0).is_err());
    }

    #[test]
    fn two_body_closed_form() {
        let pr = params(3, 2.0, 1.0);
        let (r, e) = two_body_optimum(1.0, 1.0, &pr).unwrap();
        assert!((r - 4.0).abs() < 1e-14);
        assert!((e + 0.125).abs() < 1e-15);
        let (r2, _) = two_body_optimum(2.0, 1.0, &pr).unwrap();
        assert!((r2 - 8.0).abs() < 1e-13);
        let pr = params(3, 2.5, 1.0);
        let (ra, _) = two_body_optimum(1.0, 1.0, &pr).unwrap();
        let (rb, _) = two_body_optimum(2.0, 1.0, &pr).unwrap();
        assert!((rb / ra - libm::pow(2.0, 1.0 / 1.5)).abs() < 1e-13);
    }

    #[test]
    fn masses_validate() {
        assert!(MassVector::new(vec![]).is_err());
        assert!(MassVector::new(vec![1.0, 0.0]).is_err());
        let m = MassVector::new(vec![1.0, 1.0]).unwrap();
        assert!(m.bind(&params(3, 2.0, 1.0)).is_ok());
        assert!(m.bind(&params(3, 2.0, 1.0).with_mass(3.0)).is_err());
    }
}
