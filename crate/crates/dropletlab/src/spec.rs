//! Experiment specifications.
//!
//! A spec comes from an optional JSON document plus flat flags that mirror its
//! keys; flags win. The tolerance falls back to `DROPLETLAB_TOL`, then to the
//! library default. [`SpecInput::resolve`] validates everything and fills in
//! defaults, so the resolved spec alone is enough to replay a run.

use serde::{Deserialize, Serialize};

use dropletlab_core::model::DEFAULT_TOLERANCE;
use dropletlab_core::ModelParams;

pub const TOL_ENV: &str = "DROPLETLAB_TOL";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Constants,
    Energy,
    Optimize,
    Partition,
    Sweep,
    Expansion,
    Threshold,
    Subadd,
}

impl Command {
    fn uses_masses(self) -> bool {
        matches!(
            self,
            Command::Energy | Command::Optimize | Command::Expansion
        )
    }
}

/// Unresolved spec: every key optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecInput {
    pub command: Option<Command>,
    pub d: Option<usize>,
    pub s: Option<f64>,
    pub p: Option<f64>,
    #[serde(rename = "Z")]
    pub z: Option<f64>,
    #[serde(rename = "M")]
    pub m: Option<f64>,
    pub masses: Option<Vec<f64>>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[serde(rename = "Nmax")]
    pub n_max: Option<usize>,
    pub zgrid: Option<Vec<f64>>,
    pub starts: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub mprime: Option<f64>,
    /// Rescaled satellite positions `y_1..y_N` (config files only).
    pub points: Option<Vec<Vec<f64>>>,
    pub out: Option<String>,
}

/// Fully resolved spec, echoed into every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub command: Command,
    pub d: usize,
    pub s: f64,
    pub p: f64,
    #[serde(rename = "Z")]
    pub z: f64,
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub masses: Option<Vec<f64>>,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "Nmax")]
    pub n_max: usize,
    pub zgrid: Vec<f64>,
    pub starts: usize,
    pub seed: u64,
    pub tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mprime: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

pub const DEFAULT_ZGRID: [f64; 5] = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpecError {
    #[error("cannot read config: {0}")]
    Config(String),
    #[error("{0}")]
    Invalid(String),
}

macro_rules! merge {
    ($base:ident, $over:ident; $($f:ident),*) => {
        $( if $over.$f.is_some() { $base.$f = $over.$f; } )*
    };
}

impl SpecInput {
    pub fn from_json(text: &str) -> Result<Self, SpecError> {
        serde_json::from_str(text).map_err(|e| SpecError::Config(e.to_string()))
    }

    /// `self` with every key set in `flags` replaced.
    pub fn overlay(mut self, flags: SpecInput) -> Self {
        merge!(self, flags; command, d, s, p, z, m, masses, n, n_max, zgrid, starts, seed, tol, mprime, points, out);
        self
    }

    /// Validate and materialize defaults. `env_tol` is the raw value of
    /// [`TOL_ENV`], if set.
    pub fn resolve(self, env_tol: Option<&str>) -> Result<ExperimentSpec, SpecError> {
        let bad = |msg: String| Err(SpecError::Invalid(msg));
        let command = match self.command {
            Some(c) => c,
            None => return bad("no command given".into()),
        };
        let tol = match (self.tol, env_tol) {
            (Some(t), _) => t,
            (None, Some(raw)) => match raw.trim().parse::<f64>() {
                Ok(t) => t,
                Err(_) => return bad(format!("{TOL_ENV} is not a number: {raw:?}")),
            },
            (None, None) => DEFAULT_TOLERANCE,
        };
        if !(tol > 0.0 && tol < 1.0) {
            return bad(format!("tol must lie in (0, 1), got {tol}"));
        }
        let d = self.d.unwrap_or(3);
        let s = self.s.unwrap_or(2.0);
        let p = self.p.unwrap_or(1.0);
        let z = self.z.unwrap_or(0.0);
        let starts = self.starts.unwrap_or(8);
        if starts == 0 {
            return bad("starts ≥ 1 required".into());
        }

        let (masses, m, n) = if command.uses_masses() {
            match self.masses {
                Some(ms) => {
                    if ms.is_empty() || ms.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                        return bad("masses must be a nonempty list of positive numbers".into());
                    }
                    let sum: f64 = ms.iter().sum();
                    if let Some(m) = self.m {
                        if (m - sum).abs() > 1e-12 * m.abs().max(sum) {
                            return bad(format!("masses sum to {sum}, but M = {m}"));
                        }
                    }
                    if let Some(n) = self.n {
                        if n + 1 != ms.len() {
                            return bad(format!(
                                "N = {n} needs {} masses, got {}",
                                n + 1,
                                ms.len()
                            ));
                        }
                    }
                    let n = ms.len() - 1;
                    (Some(ms), self.m.unwrap_or(sum), n)
                }
                None => {
                    let n = self.n.unwrap_or(1);
                    let m = self.m.unwrap_or(n as f64 + 1.0);
                    (Some(vec![m / (n as f64 + 1.0); n + 1]), m, n)
                }
            }
        } else {
            (None, self.m.unwrap_or(2.0), self.n.unwrap_or(1))
        };

        if command == Command::Constants {
            if d < 2 {
                return bad(format!("d ≥ 2 required, got d = {d}"));
            }
            if !(s > 0.0 && s < d as f64) {
                return bad(format!("0 < s < d required, got s = {s}, d = {d}"));
            }
        } else {
            ModelParams::new(d, s, p, z, m).map_err(|e| SpecError::Invalid(e.to_string()))?;
        }

        let zgrid = self.zgrid.unwrap_or_else(|| DEFAULT_ZGRID.to_vec());
        if matches!(command, Command::Sweep | Command::Expansion) {
            if zgrid.is_empty() || zgrid.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return bad("zgrid must be a nonempty list of positive numbers".into());
            }
            if zgrid.windows(2).any(|w| !(w[1] < w[0])) {
                return bad("zgrid must be strictly descending".into());
            }
        }

        let mprime = if command == Command::Subadd {
            let mp = self.mprime.unwrap_or(0.5 * m);
            if !(mp > 0.0 && mp < m) {
                return bad(format!(
                    "0 < mprime < M required, got mprime = {mp}, M = {m}"
                ));
            }
            Some(mp)
        } else {
            self.mprime
        };

        if let Some(points) = &self.points {
            if points.len() != n || points.iter().any(|y| y.len() != d) {
                return bad(format!("points must hold {n} vectors of length {d}"));
            }
        }

        Ok(ExperimentSpec {
            command,
            d,
            s,
            p,
            z,
            m,
            masses,
            n,
            n_max: self.n_max.unwrap_or(4),
            zgrid,
            starts,
            seed: self.seed.unwrap_or(0),
            tol,
            mprime,
            points: self.points,
            out: self.out,
        })
    }
}

impl ExperimentSpec {
    pub fn params(&self) -> dropletlab_core::Result<ModelParams> {
        ModelParams::new(self.d, self.s, self.p, self.z, self.m)
    }
}
