//! Frozen oracle records.
//!
//! The reference suite is a fixed list of brute-force computations with
//! pinned seeds. Its results live in `fixtures/oracles.jsonl`, one
//! [`OracleRecord`] per line, so regressions in the fast code paths are
//! caught without rerunning the expensive Monte Carlo integrals.

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use dropletlab_core::interaction::{f_energy, two_body_optimum};
use dropletlab_core::oracle::{finite_difference_gradient, grid_minimize_1d, mc_double_integral};
use dropletlab_core::{
    BallDroplet, MassVector, ModelParams, OracleRecord, PointConfiguration, Result, RngSeed,
};

/// `fixtures/oracles.jsonl` inside this crate.
pub fn default_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join("oracles.jsonl")
}

pub fn read_jsonl(path: &Path) -> io::Result<Vec<OracleRecord>> {
    let file = fs::File::open(path)?;
    let mut out = Vec::new();
    for line in io::BufReader::new(file).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?,
        );
    }
    Ok(out)
}

pub fn write_jsonl(path: &Path, records: &[OracleRecord]) -> io::Result<()> {
    let mut buf = Vec::new();
    for r in records {
        serde_json::to_writer(&mut buf, r).map_err(io::Error::other)?;
        buf.push(b'\n');
    }
    let tmp = path.with_extension("jsonl.tmp");
    fs::File::create(&tmp)?.write_all(&buf)?;
    fs::rename(&tmp, path)
}

/// Kind of a reference computation, so cheap ones can be rerun on every test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cost {
    Cheap,
    MonteCarlo,
}

/// One entry of the reference suite.
pub struct Reference {
    pub label: &'static str,
    pub cost: Cost,
    pub compute: fn() -> Result<OracleRecord>,
}

fn ball(d: usize, x: f64, mass: f64) -> Result<BallDroplet> {
    let mut c = vec![0.0; d];
    c[0] = x;
    BallDroplet::new(c, mass)
}

/// Identical unit-radius balls at the origin: `∬ |x − y|^{-s} = γ(d, s)`.
fn gamma_mc(d: usize, s: f64, seed: u64) -> Result<OracleRecord> {
    let unit = dropletlab_core::model::unit_ball_volume(d);
    let b = BallDroplet::at_origin(d, unit)?;
    mc_double_integral(&b, &b, s, 10_000_000, RngSeed(seed))
}

/// Cross-energy instances `(m1, m2, R)` shared by the quadrature checks.
pub const CROSS_INSTANCES: [(f64, f64, f64); 3] =
    [(1.0, 1.0, 2.5), (1.0, 2.0, 4.0), (0.5, 1.5, 6.0)];

fn cross_mc(d: usize, s: f64, k: usize, seed: u64) -> Result<OracleRecord> {
    let (m1, m2, r) = CROSS_INSTANCES[k];
    mc_double_integral(
        &ball(d, 0.0, m1)?,
        &ball(d, r, m2)?,
        s,
        2_000_000,
        RngSeed(seed),
    )
}

fn two_body_grid() -> Result<OracleRecord> {
    let params = ModelParams::new(3, 2.0, 1.0, 0.0, 2.0)?;
    let m = MassVector::new(vec![1.0, 1.0])?;
    grid_minimize_1d(
        |r| {
            let y = PointConfiguration::new(3, vec![r, 0.0, 0.0]).expect("valid point");
            f_energy(&m, &y, &params)
                .map(|e| e.total)
                .unwrap_or(f64::INFINITY)
        },
        0.1,
        100.0,
        100_000,
    )
}

/// The fixed `d = 3`, `N = 3` configuration used for gradient checks.
pub fn gradient_instance() -> (MassVector, PointConfiguration, ModelParams) {
    let m = MassVector::new(vec![1.3, 0.7, 1.1, 0.9]).expect("positive masses");
    let y = PointConfiguration::new(3, vec![2.1, -0.4, 0.3, -0.8, 1.9, 0.5, 0.2, 0.6, -2.4])
        .expect("valid config");
    let params = ModelParams::new(3, 1.7, 0.6, 0.0, m.total()).expect("valid params");
    (m, y, params)
}

fn gradient_fd() -> Result<OracleRecord> {
    let (m, y, params) = gradient_instance();
    finite_difference_gradient(
        |x| f_energy(&m, &PointConfiguration::new(3, x.to_vec())?, &params).map(|e| e.total),
        y.coords(),
        1e-5,
    )
}

fn multiplier_fd() -> Result<OracleRecord> {
    let c = crate::constants(3, 2.0, 1e-10)?;
    finite_difference_gradient(|x| Ok(c.e0_ball(x[0])), &[1.0], 1e-4)
}

/// Equal split of `M = 4 × inflection mass` found by brute force over `(0, M)`.
fn equal_split_grid() -> Result<OracleRecord> {
    let c = crate::constants(3, 2.0, 1e-10)?;
    let total = 4.0 * c.m_tilde().inflection;
    grid_minimize_1d(
        |m| c.e0_ball(m) + c.e0_ball(total - m),
        1e-6 * total,
        total * (1.0 - 1e-6),
        20_001,
    )
}

fn two_body_closed_form() -> Result<OracleRecord> {
    let params = ModelParams::new(3, 2.0, 1.0, 0.0, 2.0)?;
    let (r, e) = two_body_optimum(1.0, 1.0, &params)?;
    let mut rec = two_body_grid()?;
    rec.oracle = "two_body_closed_form_vs_grid".into();
    rec.value = vec![r, e, rec.value[0], rec.value[1]];
    Ok(rec)
}

pub fn reference_suite() -> Vec<Reference> {
    use Cost::*;
    vec![
        Reference {
            label: "gamma-2-1",
            cost: MonteCarlo,
            compute: || gamma_mc(2, 1.0, 21),
        },
        Reference {
            label: "gamma-3-1",
            cost: MonteCarlo,
            compute: || gamma_mc(3, 1.0, 31),
        },
        Reference {
            label: "gamma-3-2",
            cost: MonteCarlo,
            compute: || gamma_mc(3, 2.0, 32),
        },
        Reference {
            label: "cross-2-1-a",
            cost: MonteCarlo,
            compute: || cross_mc(2, 1.0, 0, 210),
        },
        Reference {
            label: "cross-2-1-b",
            cost: MonteCarlo,
            compute: || cross_mc(2, 1.0, 1, 211),
        },
        Reference {
            label: "cross-2-1-c",
            cost: MonteCarlo,
            compute: || cross_mc(2, 1.0, 2, 212),
        },
        Reference {
            label: "cross-3-1-a",
            cost: MonteCarlo,
            compute: || cross_mc(3, 1.0, 0, 310),
        },
        Reference {
            label: "cross-3-1-b",
            cost: MonteCarlo,
            compute: || cross_mc(3, 1.0, 1, 311),
        },
        Reference {
            label: "cross-3-1-c",
            cost: MonteCarlo,
            compute: || cross_mc(3, 1.0, 2, 312),
        },
        Reference {
            label: "cross-3-2-a",
            cost: MonteCarlo,
            compute: || cross_mc(3, 2.0, 0, 320),
        },
        Reference {
            label: "cross-3-2-b",
            cost: MonteCarlo,
            compute: || cross_mc(3, 2.0, 1, 321),
        },
        Reference {
            label: "cross-3-2-c",
            cost: MonteCarlo,
            compute: || cross_mc(3, 2.0, 2, 322),
        },
        Reference {
            label: "two-body-grid",
            cost: Cheap,
            compute: two_body_grid,
        },
        Reference {
            label: "two-body-closed-form",
            cost: Cheap,
            compute: two_body_closed_form,
        },
        Reference {
            label: "gradient-fd",
            cost: Cheap,
            compute: gradient_fd,
        },
        Reference {
            label: "multiplier-fd",
            cost: Cheap,
            compute: multiplier_fd,
        },
        Reference {
            label: "equal-split-grid",
            cost: Cheap,
            compute: equal_split_grid,
        },
    ]
}

/// Recompute every reference record, in suite order.
pub fn regenerate() -> Result<Vec<OracleRecord>> {
    reference_suite().iter().map(|r| (r.compute)()).collect()
}
