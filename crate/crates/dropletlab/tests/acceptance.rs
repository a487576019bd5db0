//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::process::Command as Process;
use std::time::{Duration, Instant};

use dropletlab::fixtures::{reference_suite, CROSS_INSTANCES};
use dropletlab_core::asymptotics::{
    expansion_residual_sweep, ez_to_e0_sweep, fit_loglog, optimal_separation, split_threshold,
    subadditivity_check, two_droplet_upper_bound,
};
use dropletlab_core::integrals::{
    confinement_integral, origin_ball_confinement, riesz_cross_energy,
};
use dropletlab_core::interaction::{f_energy, f_gradient, two_body_optimum};
use dropletlab_core::optimizer::{minimize_config, minimize_masses};
use dropletlab_core::oracle::{finite_difference_gradient, grid_minimize_1d};
use dropletlab_core::rng::Stream;
use dropletlab_core::{
    BallDroplet, IntegralMethod, MassVector, Model, ModelParams, OptimizerOptions,
    PointConfiguration, RngSeed,
};

const SEED: RngSeed = RngSeed(20240917);

/// Name, runtime budget in seconds, check.
type Criterion = (&'static str, u64, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn model(d: usize, s: f64, p: f64, m: f64) -> Model {
    let params = ModelParams::new(d, s, p, 0.0, m).unwrap();
    Model::with_constants(params, dropletlab::constants(d, s, 1e-10).unwrap()).unwrap()
}

/// Random valid `(d, s, p)` with `d ∈ {2, 3}`.
fn exponents(rng: &mut Stream) -> (usize, f64, f64) {
    let d = if rng.uniform() < 0.5 { 2 } else { 3 };
    let s = d as f64 * (0.1 + 0.85 * rng.uniform());
    let p = s * (0.1 + 0.8 * rng.uniform());
    (d, s, p)
}

/// `n` points in `[-4, 4]^d`, pairwise and from the origin at least `0.3` apart.
fn separated_points(rng: &mut Stream, d: usize, n: usize) -> Vec<f64> {
    let dist = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    };
    let mut pts: Vec<Vec<f64>> = vec![vec![0.0; d]];
    while pts.len() < n + 1 {
        let cand: Vec<f64> = (0..d).map(|_| 8.0 * rng.uniform() - 4.0).collect();
        if pts.iter().all(|q| dist(q, &cand) > 0.3) {
            pts.push(cand);
        }
    }
    pts.into_iter().skip(1).flatten().collect()
}

fn gradient_fidelity() -> Verdict {
    let mut worst = 0.0f64;
    for i in 0..50 {
        let mut rng = SEED.rng("acceptance/gradient", i);
        let (d, s, p) = exponents(&mut rng);
        let n = 1 + (rng.uniform() * 5.0) as usize;
        let masses: Vec<f64> = (0..=n).map(|_| 0.2 + 2.8 * rng.uniform()).collect();
        let y = separated_points(&mut rng, d, n);
        let params = ModelParams::new(d, s, p, 0.0, masses.iter().sum()).unwrap();
        let m = MassVector::new(masses).unwrap();
        let g = f_gradient(&m, &PointConfiguration::new(d, y.clone()).unwrap(), &params).unwrap();
        let fd = finite_difference_gradient(
            |x| f_energy(&m, &PointConfiguration::new(d, x.to_vec())?, &params).map(|e| e.total),
            &y,
            1e-5,
        )
        .unwrap();
        let scale = g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for (a, b) in g.iter().zip(&fd.value) {
            worst = worst.max((a - b).abs() / scale);
        }
    }
    verdict(
        worst < 1e-6,
        format!("worst relative deviation {worst:.2e} < 1e-6 over 50 instances"),
    )
}

fn closed_form_recovery() -> Verdict {
    let params = ModelParams::new(3, 2.0, 1.0, 0.0, 2.0).unwrap();
    let m = MassVector::new(vec![1.0, 1.0]).unwrap();
    let r = minimize_config(&m, &params, 3, &OptimizerOptions::default()).unwrap();
    let radius = r.config.norms()[0];
    let grid = grid_minimize_1d(
        |t| {
            f_energy(
                &m,
                &PointConfiguration::new(3, vec![t, 0.0, 0.0]).unwrap(),
                &params,
            )
            .map(|e| e.total)
            .unwrap_or(f64::INFINITY)
        },
        0.1,
        100.0,
        100_000,
    )
    .unwrap();
    let (r_star, e_star) = two_body_optimum(1.0, 1.0, &params).unwrap();
    let pass = (radius - 4.0).abs() < 1e-4
        && (r.value + 0.125).abs() < 1e-6
        && (grid.value[0] - r_star).abs() < 1e-3
        && (e_star + 0.125).abs() < 1e-15;
    verdict(
        pass,
        format!(
            "|y1| = {radius:.9} (4 ± 1e-4), value = {:.12} (-0.125 ± 1e-6), grid argmin {:.6}",
            r.value, grid.value[0]
        ),
    )
}

fn negativity() -> Verdict {
    let mut worst = f64::NEG_INFINITY;
    for n in 1..=5usize {
        for t in 0..20u64 {
            let mut rng = SEED.rng("acceptance/negativity", 100 * n as u64 + t);
            let (d, s, p) = exponents(&mut rng);
            let masses: Vec<f64> = (0..=n).map(|_| 0.1 + 4.9 * rng.uniform()).collect();
            let params = ModelParams::new(d, s, p, 0.0, masses.iter().sum()).unwrap();
            let opts = OptimizerOptions {
                seed: SEED.derive("acceptance/negativity-starts", 100 * n as u64 + t),
                ..Default::default()
            };
            let r = minimize_config(&MassVector::new(masses).unwrap(), &params, d, &opts).unwrap();
            worst = worst.max(r.value);
        }
    }
    verdict(
        worst < 0.0,
        format!("largest best value {worst:.3e} < 0 over N = 1..5, 20 trials each"),
    )
}

fn quadrature_vs_monte_carlo() -> Verdict {
    let suite = reference_suite();
    let mut worst = 0.0f64;
    let mut all = true;
    for (d, s) in [(2usize, 1.0), (3, 1.0), (3, 2.0)] {
        let tag = format!("{d}-{}", s as u32);
        let c = dropletlab::constants(d, s, 1e-10).unwrap();
        let gamma = suite
            .iter()
            .find(|r| r.label == format!("gamma-{tag}"))
            .unwrap();
        let mc = (gamma.compute)().unwrap();
        assert_eq!(mc.resolution, 10_000_000);
        let z = (c.gamma_ds - mc.scalar()).abs() / mc.uncertainty;
        worst = worst.max(z);
        all &= z <= 3.0;
        let params = ModelParams::new(d, s, 0.5 * s, 0.0, 1.0).unwrap();
        for (k, (m1, m2, r)) in CROSS_INSTANCES.iter().enumerate() {
            let label = format!("cross-{tag}-{}", ['a', 'b', 'c'][k]);
            let mc = (suite.iter().find(|x| x.label == label).unwrap().compute)().unwrap();
            assert_eq!(mc.resolution, 2_000_000);
            let mut c2 = vec![0.0; d];
            c2[0] = *r;
            let q = riesz_cross_energy(
                &BallDroplet::at_origin(d, *m1).unwrap(),
                &BallDroplet::new(c2, *m2).unwrap(),
                &params,
                IntegralMethod::Adaptive { rel_tol: 1e-10 },
            )
            .unwrap();
            let z = (q.value - mc.scalar()).abs() / mc.uncertainty;
            worst = worst.max(z);
            all &= z <= 3.0;
        }
    }
    verdict(
        all,
        format!("largest deviation {worst:.2} standard errors (≤ 3) over 12 integrals"),
    )
}

fn confinement_closed_form() -> Verdict {
    let omega = |d: usize| -> f64 {
        let (mut w, start) = if d % 2 == 0 { (1.0, 2) } else { (2.0, 3) };
        let mut k = start;
        while k <= d {
            w *= 2.0 * std::f64::consts::PI / k as f64;
            k += 2;
        }
        w
    };
    let mut worst = 0.0f64;
    for i in 0..10 {
        let mut rng = SEED.rng("acceptance/confinement", i);
        let d = 2 + (rng.uniform() * 4.0) as usize;
        let p = d as f64 * (0.05 + 0.9 * rng.uniform());
        let r = 0.1 + 2.9 * rng.uniform();
        let params = ModelParams::new(d, 0.5 * (p + d as f64), p, 0.0, 1.0).unwrap();
        let mass = omega(d) * r.powi(d as i32);
        let ball = BallDroplet::at_origin(d, mass).unwrap();
        let got = confinement_integral(&ball, &params, IntegralMethod::adaptive())
            .unwrap()
            .value;
        let want = d as f64 * omega(d) * r.powf(d as f64 - p) / (d as f64 - p);
        worst = worst.max((got / want - 1.0).abs());
        worst = worst.max((origin_ball_confinement(d, p, ball.radius) / want - 1.0).abs());
    }
    verdict(
        worst < 1e-8,
        format!("worst relative deviation {worst:.2e} < 1e-8 over 10 draws"),
    )
}

fn expansion_order() -> Verdict {
    let md = model(3, 2.0, 1.0, 2.0);
    let m = MassVector::new(vec![1.0, 1.0]).unwrap();
    let cfg = minimize_config(&m, &md.params, 3, &OptimizerOptions::default())
        .unwrap()
        .config;
    let sweep = expansion_residual_sweep(&m, &cfg, &md, &[1e-2, 3e-3, 1e-3, 3e-4, 1e-4]).unwrap();
    let slope = sweep.fit.slope();
    let pass = matches!(slope, Some(v) if (2.5..=3.5).contains(&v));
    verdict(
        pass,
        format!(
            "residual slope {} in [2.5, 3.5] (theory (s+1)/(s-p) = 3); residuals {:.2e} .. {:.2e}",
            slope.map_or("n/a".to_string(), |v| format!("{v:.4}")),
            sweep.reports[0].residual,
            sweep.reports.last().unwrap().residual
        ),
    )
}

fn separation_scaling() -> Verdict {
    let md = model(3, 2.0, 1.0, 2.0);
    let grid = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];
    let pts: Vec<(f64, f64)> = grid
        .iter()
        .map(|&z| (z, optimal_separation(&md, 1.0, 1.0, z).unwrap()))
        .collect();
    let slope = fit_loglog(pts.iter().copied()).slope().unwrap();
    let target = -1.0 / (md.params.s - md.params.p);
    verdict(
        (slope - target).abs() <= 0.1,
        format!(
            "separation slope {slope:.4} vs {target:.4} ± 0.1; R(1e-3) = {:.2}",
            pts.last().unwrap().1
        ),
    )
}

fn splitting_beats_one_ball() -> Verdict {
    let md = model(3, 2.0, 1.0, 2.0);
    let mt = md.constants.m_tilde();
    let thr = split_threshold(&md.constants, mt.inflection, 1e3 * mt.m_tilde).unwrap();
    let total = 4.0 * thr;
    let cmp = two_droplet_upper_bound(&md, total, 1e-3).unwrap();
    verdict(
        cmp.split.total < cmp.single.total,
        format!(
            "M = 4 × {thr:.6}: two droplets {:.9} < one ball {:.9}",
            cmp.split.total, cmp.single.total
        ),
    )
}

fn multiplier_balance() -> Verdict {
    let mut worst_spread = 0.0f64;
    let mut worst_equal = 0.0f64;
    let (mut interior, mut equal_cases) = (0, 0);
    for (d, s) in [(3usize, 1.0), (3, 2.0), (2, 1.5)] {
        let md = model(d, s, 0.5 * s, 1.0);
        let infl = md.constants.m_tilde().inflection;
        for n in 1..=4usize {
            for factor in [0.5, 1.5, 3.0, 8.0] {
                let total = factor * (n as f64 + 1.0) * infl;
                let r = minimize_masses(&md, total, n, &OptimizerOptions::default()).unwrap();
                if r.interior {
                    interior += 1;
                    worst_spread = worst_spread.max(r.multiplier_spread());
                }
                if total / (n as f64 + 1.0) > infl {
                    equal_cases += 1;
                    let m = r.partition.as_slice();
                    let mean = m.iter().sum::<f64>() / m.len() as f64;
                    worst_equal = worst_equal
                        .max(m.iter().fold(0.0f64, |a, v| a.max((v / mean - 1.0).abs())));
                }
            }
        }
    }
    verdict(
        worst_spread < 1e-6 && worst_equal < 1e-6,
        format!(
            "multiplier spread {worst_spread:.2e} over {interior} interior optima; \
             mass deviation {worst_equal:.2e} over {equal_cases} cases above the inflection mass"
        ),
    )
}

fn subadditivity() -> Verdict {
    let mut worst = f64::INFINITY;
    for i in 0..20 {
        let mut rng = SEED.rng("acceptance/subadd", i);
        let total = 0.2 + 19.8 * rng.uniform();
        let m_prime = total * (0.02 + 0.96 * rng.uniform());
        let z = (1e-3f64).powf(1.0 - 0.5 * rng.uniform());
        let md = model(3, 2.0, 1.0, total).with_z(z);
        let v = subadditivity_check(&md, total, m_prime, 2, &OptimizerOptions::default()).unwrap();
        worst = worst.min(v.slack / v.lhs.abs());
    }
    verdict(
        worst >= -1e-8,
        format!("smallest relative slack {worst:.3e} ≥ -1e-8 over 20 draws"),
    )
}

fn ez_converges() -> Verdict {
    let md = model(3, 2.0, 1.0, 5.0);
    let grid = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4];
    let rows = ez_to_e0_sweep(&md, 5.0, &grid, 2, &OptimizerOptions::default()).unwrap();
    let bounded = rows.iter().all(|r| r.gap <= r.bound);
    let monotone = rows[1..].windows(2).all(|w| w[1].gap <= w[0].gap)
        && rows[1..].iter().all(|r| r.gap >= 0.0);
    let worst = rows[1..]
        .iter()
        .map(|r| r.gap / r.bound)
        .fold(0.0f64, f64::max);
    verdict(
        bounded && monotone,
        format!("gap/bound ≤ {worst:.3} (≤ 1), monotone: {monotone}"),
    )
}

fn determinism() -> Verdict {
    let commands: [&[&str]; 8] = [
        &["constants", "--d", "3", "--s", "2"],
        &["energy", "--Z", "1e-3", "--masses", "1,0.5"],
        &[
            "optimize", "--d", "3", "--s", "2", "--p", "1", "--masses", "1,1,1",
        ],
        &["partition", "--M", "5", "--Nmax", "3", "--Z", "1e-2"],
        &["sweep", "--M", "3", "--zgrid", "1e-2,1e-3"],
        &["expansion", "--zgrid", "1e-2,1e-3"],
        &["threshold", "--d", "2", "--s", "1.5", "--p", "0.5"],
        &["subadd", "--M", "4", "--mprime", "1.5", "--Z", "1e-2"],
    ];
    let exe = env!("CARGO_BIN_EXE_dropletlab");
    let mut mismatched = Vec::new();
    for args in commands {
        let go = || {
            let out = Process::new(exe)
                .args(args)
                .args(["--seed", "7"])
                .env_remove("DROPLETLAB_TOL")
                .output()
                .unwrap();
            assert_eq!(
                out.status.code(),
                Some(0),
                "{args:?}: {}",
                String::from_utf8_lossy(&out.stdout)
            );
            out.stdout
        };
        if go() != go() {
            mismatched.push(args[0]);
        }
    }
    verdict(
        mismatched.is_empty(),
        format!("8 commands run twice with --seed 7; differing outputs: {mismatched:?}"),
    )
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("gradient fidelity", 10, gradient_fidelity),
        ("closed-form recovery", 5, closed_form_recovery),
        ("negativity", 120, negativity),
        ("quadrature vs Monte Carlo", 120, quadrature_vs_monte_carlo),
        ("confinement closed form", 5, confinement_closed_form),
        ("expansion order", 60, expansion_order),
        ("separation scaling", 120, separation_scaling),
        ("splitting beats one ball", 30, splitting_beats_one_ball),
        ("multiplier balance / equipartition", 30, multiplier_balance),
        ("subadditivity", 60, subadditivity),
        ("e_Z -> e_0", 60, ez_converges),
        ("determinism", 10, determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*budget);
        let pass = v.pass && in_time;
        println!(
            "[{}] {:>2}. {name}: {} [{:.2} s / {budget} s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            v.detail,
            elapsed.as_secs_f64()
        );
        if !pass {
            failed.push(i + 1);
        }
    }
    println!("acceptance: {} of 12 criteria passed", 12 - failed.len());
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
