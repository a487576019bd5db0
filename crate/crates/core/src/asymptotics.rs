//! Small-`Z` structure of ball-droplet minimizers.
//!
//! With masses `m^0..m^N` and rescaled positions `y_i`, the physical droplets
//! are balls centered at `x^i = Z^{-1/(s-p)} y_i` (`x^0 = 0`). Their energy
//! behaves like
//!
//! ```text
//! E_Z ≈ Σ e0(m^i) − Z·𝒱(B^0) + Z^{s/(s-p)}·F_{N,m}(0, y_1, …, y_N).
//! ```

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::integrals::{
    confinement_excess, confinement_integral, far_field_confinement, far_field_riesz,
    riesz_cross_excess, IntegralMethod,
};
use crate::interaction::{f_energy, two_body_optimum, MassVector, PointConfiguration};
use crate::model::{unit_sphere_area, BallDroplet, Model, ModelParams, RieszConstants};
use crate::optimizer::{optimal_droplet_count_uncapped, OptimizerOptions, PartitionResult};
use crate::quad;
use crate::{Error, Result};

/// `Z^{-1/(s-p)}`: distance at which droplet repulsion and attraction balance.
pub fn separation_scale(z: f64, params: &ModelParams) -> Result<f64> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "separation scale needs Z > 0, got {z}"
        )));
    }
    Ok(libm::pow(z, -1.0 / (params.s - params.p)))
}

/// Partition, rescaled positions and attraction weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedConfig {
    pub partition: MassVector,
    pub scaled_points: PointConfiguration,
    #[serde(rename = "Z")]
    pub z: f64,
}

impl GeneralizedConfig {
    pub fn new(partition: MassVector, scaled_points: PointConfiguration, z: f64) -> Result<Self> {
        if partition.n() != scaled_points.len() {
            return Err(Error::InvalidInput(format!(
                "{} masses need {} points, got {}",
                partition.as_slice().len(),
                partition.n(),
                scaled_points.len()
            )));
        }
        if !(z >= 0.0 && z.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "Z must be nonnegative, got {z}"
            )));
        }
        Ok(GeneralizedConfig {
            partition,
            scaled_points,
            z,
        })
    }

    /// A single ball of mass `M` at the origin.
    pub fn single(mass: f64, d: usize, z: f64) -> Result<Self> {
        Self::new(
            MassVector::new(alloc::vec![mass])?,
            PointConfiguration::new(d, Vec::new())?,
            z,
        )
    }

    pub fn with_z(&self, z: f64) -> Self {
        GeneralizedConfig { z, ..self.clone() }
    }

    /// Balls of mass `m^i` at `x^i = Z^{-1/(s-p)} y_i`, origin droplet first.
    pub fn physical_droplets(&self, params: &ModelParams) -> Result<Vec<BallDroplet>> {
        let d = params.d;
        let m = self.partition.as_slice();
        let mut out = Vec::with_capacity(m.len());
        out.push(BallDroplet::at_origin(d, m[0])?);
        if m.len() > 1 {
            let t = separation_scale(self.z, params)?;
            for (i, &mi) in m.iter().enumerate().skip(1) {
                let y = self.scaled_points.point(i);
                if y.len() != d {
                    return Err(Error::InvalidInput("point dimension differs from d".into()));
                }
                out.push(BallDroplet::new(y.iter().map(|v| t * v).collect(), mi)?);
            }
        }
        Ok(out)
    }
}

/// Parts of the ball-restricted energy. `confinement` is `Σ ∫_{B^i} |x|^{-p}`
/// without the weight `Z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub perimeter: f64,
    pub riesz_self: f64,
    pub riesz_cross: f64,
    pub confinement: f64,
    pub total: f64,
    pub error_estimate: f64,
}

fn check_disjoint(balls: &[BallDroplet], z: f64) -> Result<()> {
    for i in 0..balls.len() {
        for j in 0..i {
            if balls[i].overlaps(&balls[j]) {
                return Err(Error::InvalidConfiguration(format!(
                    "droplets {j} and {i} overlap at Z = {z}"
                )));
            }
        }
    }
    Ok(())
}

/// `E_Z` of the union of droplets: perimeters, self and ordered-pair cross
/// Riesz energies, minus `Z` times the confinement integrals.
///
/// At `Z = 0` the satellites sit infinitely far away and only `Σ e0(m^i)` remains.
pub fn exact_energy_balls(gc: &GeneralizedConfig, model: &Model) -> Result<EnergyBreakdown> {
    let c = &model.constants;
    let params = &model.params;
    let m = gc.partition.as_slice();
    let perimeter: f64 = m.iter().map(|&mi| c.perimeter_term(mi)).sum();
    let riesz_self: f64 = m.iter().map(|&mi| c.riesz_term(mi)).sum();
    let mut error: f64 = m.iter().map(|&mi| c.e0_error(mi)).sum();
    if gc.z == 0.0 {
        let total = perimeter + riesz_self;
        return Ok(EnergyBreakdown {
            perimeter,
            riesz_self,
            riesz_cross: 0.0,
            confinement: 0.0,
            total,
            error_estimate: error,
        });
    }
    let balls = gc.physical_droplets(params)?;
    check_disjoint(&balls, gc.z)?;
    let method = IntegralMethod::Adaptive {
        rel_tol: model.tolerance(),
    };
    let mut riesz_cross = 0.0;
    for i in 0..balls.len() {
        for j in 0..i {
            let r = crate::integrals::riesz_cross_energy(&balls[i], &balls[j], params, method)?;
            riesz_cross += 2.0 * r.value;
            error += 2.0 * r.error_estimate;
        }
    }
    let mut confinement = 0.0;
    for b in &balls {
        let v = confinement_integral(b, params, method)?;
        confinement += v.value;
        error += gc.z * v.error_estimate;
    }
    Ok(EnergyBreakdown {
        perimeter,
        riesz_self,
        riesz_cross,
        confinement,
        total: perimeter + riesz_self + riesz_cross - gc.z * confinement,
        error_estimate: error,
    })
}

/// Three-term expansion `Σ e0(m^i) − Z 𝒱(B^0) + Z^{s/(s-p)} F_{N,m}(y)`.
pub fn predicted_energy(gc: &GeneralizedConfig, model: &Model) -> Result<f64> {
    let params = &model.params;
    let m = gc.partition.as_slice();
    let lead: f64 = m.iter().map(|&mi| model.e0_ball(mi)).sum();
    if gc.z == 0.0 {
        return Ok(lead);
    }
    let origin = BallDroplet::at_origin(params.d, m[0])?;
    let v0 = confinement_integral(&origin, params, IntegralMethod::adaptive())?.value;
    let interaction = if m.len() > 1 {
        f_energy(&gc.partition, &gc.scaled_points, params)?.total
    } else {
        0.0
    };
    Ok(lead - gc.z * v0 + libm::pow(gc.z, params.s / (params.s - params.p)) * interaction)
}

/// One grid point of an expansion sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    #[serde(rename = "Z")]
    pub z: f64,
    pub exact: f64,
    pub predicted: f64,
    /// `exact − predicted`, assembled from the far-field excesses
    /// `D − m m' R^{-s}` and `𝒱 − m |x|^{-p}` so it stays accurate when it
    /// is far below the rounding level of `exact`.
    pub residual: f64,
    /// Sum of the far-field error bounds of the cross and confinement terms.
    pub bound: f64,
}

/// Least-squares fit of `log|residual|` against `log Z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SlopeFit {
    /// Every residual is exactly zero.
    ExactMatch,
    /// Fewer than two nonzero residuals.
    Insufficient,
    Fitted {
        slope: f64,
        intercept: f64,
        rms: f64,
    },
}

impl SlopeFit {
    pub fn slope(&self) -> Option<f64> {
        match self {
            SlopeFit::Fitted { slope, .. } => Some(*slope),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionSweep {
    pub reports: Vec<ExpansionReport>,
    pub fit: SlopeFit,
}

fn residual_at(gc: &GeneralizedConfig, model: &Model) -> Result<(f64, f64)> {
    let params = &model.params;
    let balls = gc.physical_droplets(params)?;
    let tol = model.tolerance();
    let mut residual = 0.0;
    let mut bound = 0.0;
    for i in 0..balls.len() {
        for j in 0..i {
            residual += 2.0 * riesz_cross_excess(&balls[i], &balls[j], params.s, tol)?.value;
            let sep = balls[i].distance_to(&balls[j]);
            bound +=
                2.0 * far_field_riesz(balls[i].mass, balls[j].mass, sep, params)?.error_estimate;
        }
    }
    for b in balls.iter().skip(1) {
        residual -= gc.z * confinement_excess(b, params.p, tol)?.value;
        bound += gc.z * far_field_confinement(b, params)?.error_estimate;
    }
    Ok((residual, bound))
}

/// Exact vs predicted energy along a grid of `Z`, and the log-log slope of
/// the residual.
pub fn expansion_residual_sweep(
    partition: &MassVector,
    scaled_points: &PointConfiguration,
    model: &Model,
    z_grid: &[f64],
) -> Result<ExpansionSweep> {
    if z_grid.is_empty() || z_grid.iter().any(|z| !(*z > 0.0)) {
        return Err(Error::InvalidInput(
            "Z grid must be nonempty and strictly positive".into(),
        ));
    }
    let mut reports = Vec::with_capacity(z_grid.len());
    for &z in z_grid {
        let gc = GeneralizedConfig::new(partition.clone(), scaled_points.clone(), z)?;
        let exact = exact_energy_balls(&gc, model)?;
        let predicted = predicted_energy(&gc, model)?;
        let (residual, bound) = residual_at(&gc, model)?;
        reports.push(ExpansionReport {
            z,
            exact: exact.total,
            predicted,
            residual,
            bound,
        });
    }
    let fit = fit_loglog(reports.iter().map(|r| (r.z, r.residual)));
    Ok(ExpansionSweep { reports, fit })
}

/// Fit `log|y| = slope·log x + intercept` over entries with `y ≠ 0`.
pub fn fit_loglog<I: IntoIterator<Item = (f64, f64)>>(points: I) -> SlopeFit {
    let pts: Vec<(f64, f64)> = points
        .into_iter()
        .filter(|(_, y)| *y != 0.0)
        .map(|(x, y)| (libm::log(x), libm::log(y.abs())))
        .collect();
    match pts.len() {
        0 => SlopeFit::ExactMatch,
        1 => SlopeFit::Insufficient,
        n => {
            let n = n as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            if sxx == 0.0 {
                return SlopeFit::Insufficient;
            }
            let slope = sxy / sxx;
            let intercept = my - slope * mx;
            let rms = libm::sqrt(
                pts.iter()
                    .map(|p| {
                        let e = p.1 - (slope * p.0 + intercept);
                        e * e
                    })
                    .sum::<f64>()
                    / n,
            );
            SlopeFit::Fitted {
                slope,
                intercept,
                rms,
            }
        }
    }
}

/// `min_{0<m<M} [e0(m) + e0(M−m)] − e0(M)`. Never positive: the infimum
/// includes the `m → 0` limit.
pub fn split_gap(c: &RieszConstants, total: f64) -> f64 {
    let e_total = c.e0_ball(total);
    let h = |m: f64| c.e0_ball(m) + c.e0_ball(total - m);
    const GRID: usize = 512;
    let lo = libm::log(1e-8 * total);
    let hi = libm::log(0.5 * total);
    let at = |k: usize| libm::exp(lo + (hi - lo) * k as f64 / (GRID - 1) as f64);
    let (mut kbest, mut vbest) = (0, f64::INFINITY);
    for k in 0..GRID {
        let v = h(at(k));
        if v < vbest {
            kbest = k;
            vbest = v;
        }
    }
    let a = at(kbest.saturating_sub(1));
    let b = at((kbest + 1).min(GRID - 1));
    let (_, refined) = quad::golden_section(h, a, b, 1e-12);
    vbest.min(refined).min(e_total) - e_total
}

/// Least `M` at which some two-droplet split beats a single ball, by
/// bisection on the sign of [`split_gap`] to relative `1e-6`.
///
/// A ball-model upper proxy for the nonexistence threshold `m*`, not `m*` itself.
pub fn split_threshold(c: &RieszConstants, lo: f64, hi: f64) -> Result<f64> {
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidInput(format!(
            "search interval [{lo}, {hi}] is invalid"
        )));
    }
    let splits = |m: f64| split_gap(c, m) < 0.0;
    let (glo, ghi) = (split_gap(c, lo), split_gap(c, hi));
    if splits(lo) || !splits(hi) {
        return Err(Error::BracketFailure {
            lo,
            hi,
            gap_lo: glo,
            gap_hi: ghi,
        });
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > 1e-6 * b {
        let mid = libm::sqrt(a * b);
        if splits(mid) {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(b)
}

/// Result of comparing a two-droplet configuration against one ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitComparison {
    pub single: EnergyBreakdown,
    pub split: EnergyBreakdown,
    pub config: GeneralizedConfig,
}

/// Two equal droplets of mass `M/2` at physical distance
/// `t = separation_scale(Z)`, against the single origin ball.
pub fn two_droplet_upper_bound(model: &Model, total: f64, z: f64) -> Result<SplitComparison> {
    let d = model.params.d;
    let half = 0.5 * total;
    let mut y = alloc::vec![0.0; d];
    y[0] = 1.0;
    let config = GeneralizedConfig::new(
        MassVector::new(alloc::vec![half, half])?,
        PointConfiguration::new(d, y)?,
        z,
    )?;
    let single = exact_energy_balls(&GeneralizedConfig::single(total, d, z)?, model)?;
    let split = exact_energy_balls(&config, model)?;
    Ok(SplitComparison {
        single,
        split,
        config,
    })
}

/// Separation minimizing the exact two-ball energy at weight `Z`, with the
/// satellite on the first axis. Only the separation-dependent part
/// `2 D(R) − Z 𝒱(B^1)` is minimized.
pub fn optimal_separation(model: &Model, m0: f64, m1: f64, z: f64) -> Result<f64> {
    let params = &model.params;
    let d = params.d;
    let (r_star, _) = two_body_optimum(m0, m1, params)?;
    let guess = r_star * separation_scale(z, params)?;
    let origin = BallDroplet::at_origin(d, m0)?;
    let contact = origin.radius + crate::model::ball_radius(m1, d)?;
    let tol = model.tolerance();
    let energy = |log_r: f64| -> f64 {
        let sep = libm::exp(log_r);
        let mut c = alloc::vec![0.0; d];
        c[0] = sep;
        let sat = match BallDroplet::new(c, m1) {
            Ok(b) => b,
            Err(_) => return f64::INFINITY,
        };
        let cross = riesz_cross_excess(&origin, &sat, params.s, tol)
            .map(|e| m0 * m1 * libm::pow(sep, -params.s) + e.value);
        let conf = confinement_excess(&sat, params.p, tol)
            .map(|e| m1 * libm::pow(sep, -params.p) + e.value);
        match (cross, conf) {
            (Ok(x), Ok(v)) => 2.0 * x - z * v,
            _ => f64::INFINITY,
        }
    };
    let lo = (0.25 * guess).max(contact * (1.0 + 1e-9));
    let hi = 4.0 * guess.max(lo);
    let (log_r, _) = quad::golden_section(energy, libm::log(lo), libm::log(hi), 1e-12);
    Ok(libm::exp(log_r))
}

/// Outcome of a subadditivity test `E_Z(M) ≤ E_Z(m') + E_0(M − m')`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubadditivityVerdict {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`
    pub slack: f64,
    pub holds: bool,
}

/// Ball-model generalized energy at weight `Z`: the best of
/// `e0(m^0) − Z 𝒱(B_{m^0}) + Σ_{i≥1} e0(m^i)` over all droplet counts.
/// `min_depth` is the smallest count searched before the search may stop.
pub fn generalized_energy(
    model: &Model,
    total: f64,
    z: f64,
    min_depth: usize,
    opts: &OptimizerOptions,
) -> Result<PartitionResult> {
    Ok(optimal_droplet_count_uncapped(model, total, Some(z), min_depth, opts)?.1)
}

pub fn subadditivity_check(
    model: &Model,
    total: f64,
    m_prime: f64,
    min_depth: usize,
    opts: &OptimizerOptions,
) -> Result<SubadditivityVerdict> {
    if !(m_prime > 0.0 && m_prime < total) {
        return Err(Error::InvalidInput(format!(
            "need 0 < m' < M, got m' = {m_prime}, M = {total}"
        )));
    }
    let z = model.params.z;
    let lhs = generalized_energy(model, total, z, min_depth, opts)?.value;
    let rhs = generalized_energy(model, m_prime, z, min_depth, opts)?.value
        + generalized_energy(model, total - m_prime, 0.0, min_depth, opts)?.value;
    let slack = rhs - lhs;
    Ok(SubadditivityVerdict {
        lhs,
        rhs,
        slack,
        holds: slack >= -1e-8 * lhs.abs(),
    })
}

/// One row of the `e_Z → e_0` sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    #[serde(rename = "Z")]
    pub z: f64,
    pub value: f64,
    /// `e_0 − e_Z`
    pub gap: f64,
    /// `(d ω_d/(d−p) + M)·Z`
    pub bound: f64,
}

/// Ball-model `e_Z(M)` along a descending grid, with the `Z = 0` row first.
///
/// Every partition found at any grid point is re-scored at every `Z` (origin
/// droplet = largest mass), so each row is the minimum over one common pool.
pub fn ez_to_e0_sweep(
    model: &Model,
    total: f64,
    z_grid: &[f64],
    min_depth: usize,
    opts: &OptimizerOptions,
) -> Result<Vec<ConvergenceRow>> {
    if z_grid.iter().any(|z| !(*z > 0.0)) {
        return Err(Error::InvalidInput(
            "Z grid must be strictly positive".into(),
        ));
    }
    if z_grid.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidInput(
            "Z grid must be strictly descending".into(),
        ));
    }
    let params = &model.params;
    let d = params.d;
    let base = generalized_energy(model, total, 0.0, min_depth, opts)?;
    let mut pool: Vec<Vec<f64>> = alloc::vec![base.partition.as_slice().to_vec()];
    for &z in z_grid {
        pool.push(
            generalized_energy(model, total, z, min_depth, opts)?
                .partition
                .as_slice()
                .to_vec(),
        );
    }
    let conf_coeff = |m: f64| -> Result<f64> {
        let r = crate::model::ball_radius(m, d)?;
        Ok(crate::integrals::origin_ball_confinement(d, params.p, r))
    };
    let constant = unit_sphere_area(d) / (d as f64 - params.p) + total;
    let mut rows = Vec::with_capacity(z_grid.len() + 1);
    rows.push(ConvergenceRow {
        z: 0.0,
        value: base.value,
        gap: 0.0,
        bound: 0.0,
    });
    for &z in z_grid {
        let mut best = f64::INFINITY;
        for masses in &pool {
            let origin = masses.iter().copied().fold(0.0, f64::max);
            let e0: f64 = masses.iter().map(|&m| model.e0_ball(m)).sum();
            best = best.min(e0 - z * conf_coeff(origin)?);
        }
        rows.push(ConvergenceRow {
            z,
            value: best,
            gap: base.value - best,
            bound: constant * z,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn model(d: usize, s: f64, p: f64) -> Model {
        Model::new(ModelParams::new(d, s, p, 0.0, 2.0).unwrap(), 1e-10).unwrap()
    }

    #[test]
    fn separation_scale_cases() {
        let pr = ModelParams::new(3, 2.0, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(separation_scale(1.0, &pr).unwrap(), 1.0);
        assert!((separation_scale(1e-4, &pr).unwrap() - 1e4).abs() < 1e-8);
        let pr = ModelParams::new(4, 3.0, 1.0, 0.0, 1.0).unwrap();
        assert!((separation_scale(1e-4, &pr).unwrap() - 1e2).abs() < 1e-10);
        assert!(separation_scale(0.0, &pr).is_err());
    }

    #[test]
    fn single_ball_energy() {
        let md = model(3, 2.0, 1.0);
        let w = md.constants.omega_d;
        let gc = GeneralizedConfig::single(w, 3, 0.0).unwrap();
        assert!((exact_energy_balls(&gc, &md).unwrap().total - md.e0_ball(w)).abs() < 1e-13);
        let gc = gc.with_z(1.0);
        let e = exact_energy_balls(&gc, &md).unwrap().total;
        assert!((e - (md.e0_ball(w) - 2.0 * core::f64::consts::PI)).abs() < 1e-12);
        assert_eq!(e, predicted_energy(&gc, &md).unwrap());
    }

    #[test]
    fn predicted_two_body_composition() {
        let md = model(3, 2.0, 1.0);
        let z = 1e-3;
        let gc = GeneralizedConfig::new(
            MassVector::new(vec![1.0, 1.0]).unwrap(),
            PointConfiguration::new(3, vec![4.0, 0.0, 0.0]).unwrap(),
            z,
        )
        .unwrap();
        let r0 = crate::model::ball_radius(1.0, 3).unwrap();
        let v0 = crate::integrals::origin_ball_confinement(3, 1.0, r0);
        let expected = 2.0 * md.e0_ball(1.0) - z * v0 + z * z * (-0.125);
        assert!((predicted_energy(&gc, &md).unwrap() - expected).abs() < 1e-13);
        assert_eq!(
            predicted_energy(&gc.with_z(0.0), &md).unwrap(),
            2.0 * md.e0_ball(1.0)
        );
    }

    #[test]
    fn well_separated_pair_envelope() {
        let md = model(3, 2.0, 1.0);
        let r = crate::model::ball_radius(1.0, 3).unwrap();
        let sep = 10.0 * 2.0 * r;
        // put the satellite at `sep` with Z = 1 so that x = y
        let gc = GeneralizedConfig::new(
            MassVector::new(vec![1.0, 1.0]).unwrap(),
            PointConfiguration::new(3, vec![sep, 0.0, 0.0]).unwrap(),
            1.0,
        )
        .unwrap();
        let e = exact_energy_balls(&gc, &md).unwrap();
        let isolated = 2.0 * md.e0_ball(1.0);
        let pr = md.params;
        let ff = far_field_riesz(1.0, 1.0, sep, &pr).unwrap();
        let repulsive = e.perimeter + e.riesz_self + e.riesz_cross;
        assert!(repulsive >= isolated);
        assert!(repulsive <= isolated + 2.0 * (ff.value + ff.error_estimate));
    }

    #[test]
    fn overlapping_droplets_are_rejected() {
        let md = model(3, 2.0, 1.0);
        let gc = GeneralizedConfig::new(
            MassVector::new(vec![1.0, 1.0]).unwrap(),
            PointConfiguration::new(3, vec![0.5, 0.0, 0.0]).unwrap(),
            1.0,
        )
        .unwrap();
        assert!(matches!(
            exact_energy_balls(&gc, &md),
            Err(Error::InvalidConfiguration(_))
        ));
        let sweep = expansion_residual_sweep(&gc.partition, &gc.scaled_points, &md, &[1e-3, 1.0]);
        assert!(matches!(sweep, Err(Error::InvalidConfiguration(ref m)) if m.contains("Z = 1")));
    }

    #[test]
    fn expansion_exact_for_one_ball() {
        let md = model(3, 2.0, 1.0);
        let part = MassVector::new(vec![2.0]).unwrap();
        let pts = PointConfiguration::new(3, vec![]).unwrap();
        let sweep = expansion_residual_sweep(&part, &pts, &md, &[1e-1, 1e-2, 1e-3]).unwrap();
        assert_eq!(sweep.fit, SlopeFit::ExactMatch);
        for r in &sweep.reports {
            assert_eq!(r.residual, 0.0);
            assert_eq!(r.exact, r.predicted);
        }
    }

    #[test]
    fn residual_matches_direct_difference_when_resolvable() {
        // at moderate separation the residual is large enough to see in exact − predicted
        let md = model(3, 2.0, 0.5);
        let part = MassVector::new(vec![1.0, 1.0]).unwrap();
        let pts = PointConfiguration::new(3, vec![2.0, 0.0, 0.0]).unwrap();
        let sweep = expansion_residual_sweep(&part, &pts, &md, &[0.5]).unwrap();
        let r = sweep.reports[0];
        assert!(
            (r.residual - (r.exact - r.predicted)).abs() < 1e-9 * r.residual.abs().max(1e-12),
            "{r:?}"
        );
        assert!(r.residual.abs() <= r.bound);
    }

    #[test]
    fn split_gap_signs() {
        let md = model(3, 2.0, 1.0);
        let c = md.constants;
        let mi = c.m_tilde().inflection;
        assert_eq!(split_gap(&c, 0.1 * mi), 0.0);
        let thr = split_threshold(&c, mi, 100.0 * mi).unwrap();
        assert!(split_gap(&c, 2.0 * thr) < 0.0);
        assert!(split_gap(&c, 0.99 * thr) == 0.0);
        let doubled = split_threshold(&c.with_c1(2.0 * c.c1), mi, 1e4 * mi).unwrap();
        assert!(doubled > thr);
        assert!(matches!(
            split_threshold(&c, 2.0 * thr, 3.0 * thr),
            Err(Error::BracketFailure { .. })
        ));
    }

    #[test]
    fn fit_recovers_power_law() {
        let pts = [1e-1, 1e-2, 1e-3].map(|x: f64| (x, 3.0 * x * x * x));
        let f = fit_loglog(pts);
        assert!((f.slope().unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(fit_loglog([(0.1, 0.0), (0.2, 0.0)]), SlopeFit::ExactMatch);
        assert_eq!(fit_loglog([(0.1, 1.0), (0.2, 0.0)]), SlopeFit::Insufficient);
    }
}
