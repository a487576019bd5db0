//! Minimization of `F_{N,m}` over configurations with `y_0 = 0`, and of the
//! leading-order mass split `Σ e0(m^i)` over the simplex `Σ m^i = M`.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::interaction::{f_energy, f_gradient, norm, MassVector, PointConfiguration};
use crate::model::{unit_ball_volume, unit_sphere_area, Model, ModelParams, RieszConstants};
use crate::rng::RngSeed;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerOptions {
    pub starts: usize,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub step_shrink: f64,
    pub seed: RngSeed,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            starts: 8,
            max_iterations: 5000,
            gradient_tolerance: 1e-9,
            step_shrink: 0.5,
            seed: RngSeed(0),
        }
    }
}

impl OptimizerOptions {
    pub fn validate(&self) -> Result<()> {
        if self.starts == 0 {
            return Err(Error::InvalidInput("at least one start is required".into()));
        }
        if !(self.gradient_tolerance > 0.0) {
            return Err(Error::InvalidInput(
                "gradient tolerance must be positive".into(),
            ));
        }
        if !(self.step_shrink > 0.0 && self.step_shrink < 1.0) {
            return Err(Error::InvalidInput(
                "step shrink factor must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigResult {
    pub config: PointConfiguration,
    pub value: f64,
    pub gradient_norm: f64,
    pub converged: bool,
    pub starts_used: usize,
    /// Index of the start that produced `config`.
    pub best_start: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Converged,
    MaxIterations,
    Stalled,
    Escaped,
}

struct Descent {
    x: Vec<f64>,
    value: f64,
    gnorm: f64,
    status: Status,
}

const ARMIJO: f64 = 1e-4;
const MEMORY: usize = 8;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Limited-memory BFGS with Armijo backtracking on `G(u) = L^p F(L u)`, the
/// energy in units where the natural length `L` is one. Degenerate trial
/// points (collisions) are rejected by shrinking the step. Everything in the
/// returned [`Descent`] is in these units.
#[allow(clippy::too_many_arguments)]
fn lbfgs(
    masses: &MassVector,
    params: &ModelParams,
    dim: usize,
    length: f64,
    x0: Vec<f64>,
    opts: &OptimizerOptions,
    max_step: f64,
    bound: f64,
) -> Result<Descent> {
    let energy_unit = libm::pow(length, params.p);
    // converge in both unit systems: rescaled |∇G| ≤ tol and physical |∇F| ≤ tol
    let tolerance = opts.gradient_tolerance * (energy_unit * length).min(1.0);
    let eval = |u: &[f64]| -> Result<(f64, Vec<f64>)> {
        let c = PointConfiguration::new(dim, u.iter().map(|v| v * length).collect())?;
        let g = f_gradient(masses, &c, params)?;
        Ok((
            energy_unit * f_energy(masses, &c, params)?.total,
            g.iter().map(|v| v * energy_unit * length).collect(),
        ))
    };
    let mut x = x0;
    let (mut fx, mut g) = eval(&x)?;
    let mut hist: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::with_capacity(MEMORY);
    let mut status = Status::MaxIterations;
    for _ in 0..opts.max_iterations {
        let gnorm = libm::sqrt(dot(&g, &g));
        if gnorm <= tolerance {
            status = Status::Converged;
            break;
        }
        // two-loop recursion
        let mut q = g.clone();
        let mut alphas = vec![0.0; hist.len()];
        for (k, (s, y, rho)) in hist.iter().enumerate().rev() {
            alphas[k] = rho * dot(s, &q);
            q.iter_mut()
                .zip(y)
                .for_each(|(qi, yi)| *qi -= alphas[k] * yi);
        }
        if let Some((s, y, _)) = hist.last() {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|v| *v *= gamma);
        }
        for (k, (s, y, rho)) in hist.iter().enumerate() {
            let beta = rho * dot(y, &q);
            q.iter_mut()
                .zip(s)
                .for_each(|(qi, si)| *qi += (alphas[k] - beta) * si);
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&dir, &g);
        if !(slope < 0.0) {
            hist.clear();
            dir = g.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
        }
        let dnorm = libm::sqrt(dot(&dir, &dir));
        let mut alpha = if hist.is_empty() {
            max_step * 0.1 / dnorm
        } else {
            1.0
        };
        alpha = alpha.min(max_step / dnorm);
        let xnorm = libm::sqrt(dot(&x, &x));
        let mut accepted = None;
        while alpha * dnorm > 1e-15 * (1.0 + xnorm) {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + alpha * b).collect();
            match eval(&trial) {
                Ok((ft, gt)) if ft <= fx + ARMIJO * alpha * slope => {
                    accepted = Some((trial, ft, gt));
                    break;
                }
                Ok(_) | Err(Error::DegenerateConfiguration { .. }) => alpha *= opts.step_shrink,
                Err(e) => return Err(e),
            }
        }
        let Some((xn, fn_, gn)) = accepted else {
            if hist.is_empty() {
                status = Status::Stalled;
                break;
            }
            hist.clear();
            continue;
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * libm::sqrt(dot(&s, &s) * dot(&y, &y)) {
            if hist.len() == MEMORY {
                hist.remove(0);
            }
            hist.push((s, y, 1.0 / sy));
        }
        x = xn;
        fx = fn_;
        g = gn;
        if x.chunks(dim).any(|p| norm(p) > bound) {
            status = Status::Escaped;
            break;
        }
    }
    let gnorm = libm::sqrt(dot(&g, &g));
    if status == Status::MaxIterations && gnorm <= tolerance {
        status = Status::Converged;
    }
    Ok(Descent {
        x,
        value: fx,
        gnorm,
        status,
    })
}

/// Radius `(2 s m / p)^{1/(s-p)}` at which a mass `m` at the origin balances a
/// satellite: the initialization scale for multistart.
pub fn init_radius(max_mass: f64, params: &ModelParams) -> f64 {
    libm::pow(
        2.0 * params.s * max_mass / params.p,
        1.0 / (params.s - params.p),
    )
}

/// Minimize `F_{N,m}` from `opts.starts` random initializations.
///
/// Each start places the `N` points independently and uniformly on the
/// sphere of radius `r_init = (2 s max m / p)^{1/(s-p)}`, jittered radially by
/// ±50%. Starts that leave the ball of radius `10·(2 s M / p)^{1/(s-p)}` are
/// discarded. The best converged start wins; ties go to the lower index.
///
/// The descent runs in units of `r_init` (energy `r_init^{-p}`), so
/// the search behaves the same when `s − p` is small and `r_init` is
/// astronomically large. A converged start meets `opts.gradient_tolerance`
/// both in these units and in the original ones, in which `gradient_norm`
/// is reported.
pub fn minimize_config(
    masses: &MassVector,
    params: &ModelParams,
    dim: usize,
    opts: &OptimizerOptions,
) -> Result<ConfigResult> {
    opts.validate()?;
    params.validate()?;
    let n = masses.n();
    if n == 0 {
        return Err(Error::InvalidInput("minimize_config needs N ≥ 1".into()));
    }
    if dim != params.d {
        return Err(Error::InvalidInput(
            "configuration dimension differs from d".into(),
        ));
    }
    let r_init = init_radius(masses.max(), params);
    let bound = 10.0 * init_radius(masses.total(), params).max(r_init);

    let (mut degenerate, mut escaped, mut unconverged) = (0, 0, 0);
    let mut best: Option<(usize, Descent)> = None;
    let mut fallback: Option<(usize, Descent)> = None;
    for start in 0..opts.starts {
        let mut rng = opts.seed.rng("config-start", start as u64);
        let mut u = vec![0.0; n * dim];
        for p in u.chunks_mut(dim) {
            rng.unit_vector(p);
            let radius = 0.5 + rng.uniform();
            p.iter_mut().for_each(|v| *v *= radius);
        }
        let run = match lbfgs(masses, params, dim, r_init, u, opts, 1.0, bound / r_init) {
            Ok(run) => run,
            Err(Error::DegenerateConfiguration { .. }) => {
                degenerate += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        match run.status {
            Status::Escaped => escaped += 1,
            Status::Converged if run.value < 0.0 => {
                if best.as_ref().map_or(true, |(_, b)| run.value < b.value) {
                    best = Some((start, run));
                }
            }
            _ => {
                unconverged += 1;
                if fallback.as_ref().map_or(true, |(_, b)| run.value < b.value) {
                    fallback = Some((start, run));
                }
            }
        }
    }
    let (converged, (best_start, run)) = match (best, fallback) {
        (Some(b), _) => (true, b),
        (None, Some(f)) => (false, f),
        (None, None) => {
            return Err(Error::OptimizationFailed {
                starts: opts.starts,
                degenerate,
                escaped,
                unconverged,
            })
        }
    };
    let energy_unit = libm::pow(r_init, params.p);
    Ok(ConfigResult {
        config: PointConfiguration::new(dim, run.x.iter().map(|v| v * r_init).collect())?,
        value: run.value / energy_unit,
        gradient_norm: run.gnorm / (energy_unit * r_init),
        converged,
        starts_used: opts.starts,
        best_start,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionResult {
    /// Positive droplet masses; droplets the optimizer removed are absent.
    pub partition: MassVector,
    pub value: f64,
    /// `e0'(m^i)` (plus the confinement term for the origin droplet when
    /// it is weighted).
    pub multipliers: Vec<f64>,
    /// The `N` that was asked for.
    pub requested: usize,
    /// All `N + 1` droplets kept positive mass.
    pub interior: bool,
}

impl PartitionResult {
    /// Largest pairwise multiplier gap relative to `|multipliers[0]|`.
    pub fn multiplier_spread(&self) -> f64 {
        let lo = self
            .multipliers
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let hi = self
            .multipliers
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        (hi - lo) / self.multipliers[0].abs()
    }
}

/// Separable cost `Σ f_i(m_i)` with `f_i = e0` and, for the origin droplet,
/// `f_0 = e0 − Z·𝒱(B_{m})`.
struct SplitCost<'a> {
    c: &'a RieszConstants,
    /// `Z · d ω_d/(d−p) · ω_d^{-(d-p)/d}`; zero when the origin is not weighted.
    origin_weight: f64,
    conf_exp: f64,
}

impl<'a> SplitCost<'a> {
    fn new(c: &'a RieszConstants, confinement: Option<(f64, f64)>) -> Self {
        let d = c.d as f64;
        match confinement {
            Some((z, p)) if z > 0.0 => {
                let w = unit_ball_volume(c.d);
                SplitCost {
                    c,
                    origin_weight: z * unit_sphere_area(c.d) / (d - p) * libm::pow(w, -(d - p) / d),
                    conf_exp: (d - p) / d,
                }
            }
            _ => SplitCost {
                c,
                origin_weight: 0.0,
                conf_exp: 1.0,
            },
        }
    }

    fn weighted(&self) -> bool {
        self.origin_weight > 0.0
    }

    fn f(&self, i: usize, m: f64) -> f64 {
        if m <= 0.0 {
            return 0.0;
        }
        let base = self.c.e0_ball(m);
        if i == 0 && self.weighted() {
            base - self.origin_weight * libm::pow(m, self.conf_exp)
        } else {
            base
        }
    }

    fn df(&self, i: usize, m: f64) -> f64 {
        let base = self.c.multiplier_ball(m).unwrap_or(f64::INFINITY);
        if i == 0 && self.weighted() {
            base - self.origin_weight * self.conf_exp * libm::pow(m, self.conf_exp - 1.0)
        } else {
            base
        }
    }

    fn d2f(&self, i: usize, m: f64) -> f64 {
        let base = self.c.e0_second_derivative(m);
        if i == 0 && self.weighted() {
            let a = self.conf_exp;
            base - self.origin_weight * a * (a - 1.0) * libm::pow(m, a - 2.0)
        } else {
            base
        }
    }

    fn total(&self, x: &[f64]) -> f64 {
        x.iter().enumerate().map(|(i, &m)| self.f(i, m)).sum()
    }
}

/// Euclidean projection onto `{x_i ≥ floor, Σ x_i = total}`.
fn project_simplex(x: &mut [f64], total: f64, floor: f64) {
    let budget = total - floor * x.len() as f64;
    let mut v: Vec<f64> = x.iter().map(|a| a - floor).collect();
    let mut sorted = v.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, u) in sorted.iter().enumerate() {
        cum += u;
        let t = (cum - budget) / (k + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    v.iter_mut().for_each(|a| *a = (*a - theta).max(0.0));
    for (xi, vi) in x.iter_mut().zip(&v) {
        *xi = vi + floor;
    }
}

fn projected_gradient(
    cost: &SplitCost,
    x: &mut Vec<f64>,
    total: f64,
    floor: f64,
    opts: &OptimizerOptions,
) {
    let mut fx = cost.total(x);
    let mut alpha = 0.1 * total;
    for _ in 0..opts.max_iterations.min(2000) {
        let g: Vec<f64> = x.iter().enumerate().map(|(i, &m)| cost.df(i, m)).collect();
        let gmax = g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut step = alpha.max(1e-3 * total / gmax.max(1e-300));
        let mut moved = false;
        for _ in 0..80 {
            let mut trial: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - step * b).collect();
            project_simplex(&mut trial, total, floor);
            let decrease: f64 = x
                .iter()
                .zip(&trial)
                .zip(&g)
                .map(|((a, t), gi)| gi * (a - t))
                .sum();
            let ft = cost.total(&trial);
            if ft <= fx - ARMIJO * decrease && decrease > 0.0 {
                let shift: f64 = x.iter().zip(&trial).map(|(a, t)| (a - t).abs()).sum();
                *x = trial;
                fx = ft;
                moved = shift > 1e-13 * total;
                alpha = step * 2.0;
                break;
            }
            step *= opts.step_shrink;
        }
        if !moved {
            break;
        }
    }
}

/// Newton iteration on `f_i'(m_i) = λ`, `Σ m_i = total`, over the positive
/// entries. Steps that raise the energy are refused.
fn newton_polish(cost: &SplitCost, x: &mut [f64]) {
    let active: Vec<usize> = (0..x.len()).filter(|&i| x[i] > 0.0).collect();
    if active.len() < 2 {
        return;
    }
    let mut fx = cost.total(x);
    for _ in 0..100 {
        let g: Vec<f64> = active.iter().map(|&i| cost.df(i, x[i])).collect();
        let h: Vec<f64> = active.iter().map(|&i| cost.d2f(i, x[i])).collect();
        let gmean = g.iter().sum::<f64>() / g.len() as f64;
        let spread = g.iter().fold(0.0f64, |a, v| a.max((v - gmean).abs()));
        if spread <= 1e-14 * gmean.abs() {
            return;
        }
        let inv_sum: f64 = h.iter().map(|v| 1.0 / v).sum();
        if h.contains(&0.0) || !inv_sum.is_finite() || inv_sum.abs() < 1e-300 {
            return;
        }
        let lambda = g.iter().zip(&h).map(|(a, b)| a / b).sum::<f64>() / inv_sum;
        let delta: Vec<f64> = g.iter().zip(&h).map(|(a, b)| (lambda - a) / b).collect();
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = active
                .iter()
                .zip(&delta)
                .map(|(&i, dl)| x[i] + t * dl)
                .collect();
            if trial.iter().all(|m| *m > 0.0) {
                let mut y = x.to_vec();
                for (&i, m) in active.iter().zip(&trial) {
                    y[i] = *m;
                }
                let fy = cost.total(&y);
                if fy <= fx + 1e-15 * fx.abs() {
                    x.copy_from_slice(&y);
                    fx = fy;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            return;
        }
    }
}

/// Polish, then repeatedly try removing a droplet (moving its mass to the
/// best recipient) while that lowers the energy.
fn refine(cost: &SplitCost, x: &mut Vec<f64>, total: f64, floor: f64) {
    for v in x.iter_mut() {
        if *v <= 1e3 * floor {
            *v = 0.0;
        }
    }
    let s: f64 = x.iter().sum();
    if let Some(imax) = argmax(x) {
        x[imax] += total - s;
    }
    newton_polish(cost, x);
    loop {
        let current = cost.total(x);
        let mut improved: Option<(f64, Vec<f64>)> = None;
        // moves between droplets of the same kind and (nearly) the same mass are equivalent
        let key = |i: usize| {
            (
                cost.weighted() && i == 0,
                libm::round(x[i] / total * 1e9) as i64,
            )
        };
        let mut tried = BTreeSet::new();
        for i in 0..x.len() {
            if x[i] <= 0.0 {
                continue;
            }
            for j in 0..x.len() {
                if j == i || x[j] <= 0.0 || !tried.insert((key(i), key(j))) {
                    continue;
                }
                let mut y = x.clone();
                y[j] += y[i];
                y[i] = 0.0;
                newton_polish(cost, &mut y);
                let fy = cost.total(&y);
                if fy < current - 1e-14 * current.abs()
                    && improved.as_ref().map_or(true, |(b, _)| fy < *b)
                {
                    improved = Some((fy, y));
                }
            }
        }
        match improved {
            Some((_, y)) => *x = y,
            None => break,
        }
    }
}

fn argmax(x: &[f64]) -> Option<usize> {
    x.iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
}

fn minimize_split(
    c: &RieszConstants,
    total: f64,
    n: usize,
    confinement: Option<(f64, f64)>,
    opts: &OptimizerOptions,
) -> Result<PartitionResult> {
    opts.validate()?;
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::InvalidInput(alloc::format!(
            "total mass must be positive, got {total}"
        )));
    }
    let cost = SplitCost::new(c, confinement);
    let k = n + 1;
    let floor = 1e-9 * total;
    let inflection = c.m_tilde().inflection;

    let mut candidates: Vec<Vec<f64>> = Vec::new();
    candidates.push(vec![total / k as f64; k]);
    for used in (1..k).filter(|&u| k <= 12 || u + 3 >= k || u.is_power_of_two()) {
        let mut x = vec![0.0; k];
        x[..used].iter_mut().for_each(|v| *v = total / used as f64);
        candidates.push(x);
    }
    for start in 0..opts.starts {
        let mut rng = opts.seed.rng("partition-start", start as u64);
        let mut x: Vec<f64> = (0..k).map(|_| -libm::log(rng.uniform_open0())).collect();
        let s: f64 = x.iter().sum();
        x.iter_mut().for_each(|v| *v *= total / s);
        candidates.push(x);
    }

    let mut best: Option<(f64, Vec<f64>)> = None;
    for cand in candidates {
        let mut x = cand;
        if k > 1 {
            project_simplex(&mut x, total, floor);
            projected_gradient(&cost, &mut x, total, floor, opts);
            refine(&cost, &mut x, total, floor);
        }
        // two droplets in the concave range cannot both be optimal
        let small = x
            .iter()
            .enumerate()
            .filter(|&(i, &m)| m > 0.0 && m < inflection && !(i == 0 && cost.weighted()))
            .count();
        if small >= 2 {
            continue;
        }
        let v = cost.total(&x);
        if best.as_ref().map_or(true, |(b, _)| v < *b) {
            best = Some((v, x));
        }
    }
    // the single-droplet split is never pruned
    let (value, x) = best.unwrap_or_else(|| {
        let mut x = vec![0.0; k];
        x[0] = total;
        (cost.total(&x), x)
    });

    let mut entries: Vec<(usize, f64)> = x
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, m)| *m > 0.0)
        .collect();
    if cost.weighted() {
        if entries[0].0 != 0 {
            // an empty origin slot: the largest droplet moves in
            let imax = argmax(&entries.iter().map(|e| e.1).collect::<Vec<_>>()).unwrap_or(0);
            let m = entries.remove(imax).1;
            entries.insert(0, (0, m));
        }
        entries[1..].sort_by(|a, b| b.1.total_cmp(&a.1));
    } else {
        entries.sort_by(|a, b| b.1.total_cmp(&a.1));
    }
    let masses: Vec<f64> = entries.iter().map(|e| e.1).collect();
    let multipliers = masses
        .iter()
        .enumerate()
        .map(|(i, &m)| cost.df(i, m))
        .collect();
    let interior = masses.len() == k;
    let value = if cost.weighted() {
        masses.iter().enumerate().map(|(i, &m)| cost.f(i, m)).sum()
    } else {
        value
    };
    Ok(PartitionResult {
        partition: MassVector::new(masses)?,
        value,
        multipliers,
        requested: n,
        interior,
    })
}

/// Minimize `Σ_{i=0}^N e0(m^i)` over `m^i ≥ 0`, `Σ m^i = M`.
///
/// Starts: the equal split, the `k`-way equal splits for `k ≤ N`, and
/// `opts.starts` uniform draws on the simplex. Each is run through projected
/// gradient (masses floored at `1e-9·M`), Newton polishing of the multiplier
/// equations and a droplet-removal sweep. Candidates with two droplets below
/// the inflection mass are discarded.
pub fn minimize_masses(
    model: &Model,
    total: f64,
    n: usize,
    opts: &OptimizerOptions,
) -> Result<PartitionResult> {
    minimize_split(&model.constants, total, n, None, opts)
}

/// As [`minimize_masses`], with the origin droplet credited `Z·𝒱(B_{m^0})`:
/// the ball-model generalized energy `e_Z(m^0) + Σ_{i≥1} e0(m^i)`.
pub fn minimize_masses_confined(
    model: &Model,
    total: f64,
    n: usize,
    z: f64,
    opts: &OptimizerOptions,
) -> Result<PartitionResult> {
    minimize_split(&model.constants, total, n, Some((z, model.params.p)), opts)
}

/// Like [`minimize_masses`] but with explicit constants (for comparative statics).
pub fn minimize_masses_with(
    c: &RieszConstants,
    total: f64,
    n: usize,
    opts: &OptimizerOptions,
) -> Result<PartitionResult> {
    minimize_split(c, total, n, None, opts)
}

/// `argmin_{N ≤ N_max}` of [`minimize_masses`]; near-ties (relative `1e-12`)
/// go to the smaller `N`.
pub fn optimal_droplet_count(
    model: &Model,
    total: f64,
    n_max: usize,
    opts: &OptimizerOptions,
) -> Result<(usize, PartitionResult)> {
    best_count(n_max, |n| minimize_masses(model, total, n, opts))
}

/// Droplet-count search for the confined generalized energy.
pub fn optimal_droplet_count_confined(
    model: &Model,
    total: f64,
    n_max: usize,
    z: f64,
    opts: &OptimizerOptions,
) -> Result<(usize, PartitionResult)> {
    best_count(n_max, |n| {
        minimize_masses_confined(model, total, n, z, opts)
    })
}

/// Droplet-count search without a cap: `N` grows past `min_depth` until
/// three consecutive counts fail to improve on the best, or until all
/// droplets would have to sit below the inflection mass. `z = None` is the
/// unconfined problem.
pub fn optimal_droplet_count_uncapped(
    model: &Model,
    total: f64,
    z: Option<f64>,
    min_depth: usize,
    opts: &OptimizerOptions,
) -> Result<(usize, PartitionResult)> {
    let limit = libm::floor(total / model.constants.m_tilde().inflection) as usize + 1;
    let mut best: Option<(usize, PartitionResult)> = None;
    let mut n = 0;
    loop {
        let r = match z {
            Some(z) if z > 0.0 => minimize_masses_confined(model, total, n, z, opts)?,
            _ => minimize_masses(model, total, n, opts)?,
        };
        let better = match &best {
            None => true,
            Some((_, b)) => r.value < b.value - 1e-12 * b.value.abs(),
        };
        if better {
            best = Some((n, r));
        }
        let best_n = best.as_ref().map_or(0, |b| b.0);
        if (n >= min_depth && n >= best_n + 3) || n >= limit.max(min_depth) {
            break;
        }
        n += 1;
    }
    Ok(best.expect("at least one count is evaluated"))
}

fn best_count<F: FnMut(usize) -> Result<PartitionResult>>(
    n_max: usize,
    mut f: F,
) -> Result<(usize, PartitionResult)> {
    let mut best: Option<(usize, PartitionResult)> = None;
    for n in 0..=n_max {
        let r = f(n)?;
        let better = match &best {
            None => true,
            Some((_, b)) => r.value < b.value - 1e-12 * b.value.abs(),
        };
        if better {
            best = Some((n, r));
        }
    }
    Ok(best.expect("n_max ≥ 0 yields one candidate"))
}
