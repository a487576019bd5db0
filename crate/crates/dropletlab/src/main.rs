use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

use dropletlab::run::{run_input, usage_failure, Status};
use dropletlab::spec::{SpecError, TOL_ENV};
use dropletlab::{Command, SpecInput};

/// Numerical experiments for the liquid drop model with background attraction.
///
/// Output is a JSON document `{spec, results, errors}` on stdout, or in
/// `--out`. Sweep commands also write `Z,exact,predicted,residual` CSV next to
/// it (same path, `.csv` extension). Exit status: 0 success, 2 usage error,
/// 3 computation error, 1 I/O failure.
#[derive(Debug, Parser)]
#[command(name = "dropletlab", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Space dimension
    #[arg(long)]
    d: Option<usize>,
    /// Riesz exponent, 0 < s < d
    #[arg(long)]
    s: Option<f64>,
    /// Attraction exponent, 0 < p < s
    #[arg(long)]
    p: Option<f64>,
    /// Attraction strength
    #[arg(long = "Z")]
    z: Option<f64>,
    /// Total mass
    #[arg(long = "M")]
    m: Option<f64>,
    /// Droplet masses m0,m1,...,mN (origin droplet first)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    masses: Option<Vec<f64>>,
    /// Number of satellite droplets
    #[arg(long = "N")]
    n: Option<usize>,
    /// Largest satellite count searched
    #[arg(long = "Nmax")]
    n_max: Option<usize>,
    /// Strictly descending Z values
    #[arg(long, value_delimiter = ',')]
    zgrid: Option<Vec<f64>>,
    /// Multistart count
    #[arg(long)]
    starts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Quadrature tolerance (overrides DROPLETLAB_TOL)
    #[arg(long)]
    tol: Option<f64>,
    /// Split mass m' for `subadd`
    #[arg(long)]
    mprime: Option<f64>,
    /// Output path for the JSON document
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file with the same keys as the flags
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Cli {
    fn flags(&self) -> SpecInput {
        SpecInput {
            command: Some(self.command),
            d: self.d,
            s: self.s,
            p: self.p,
            z: self.z,
            m: self.m,
            masses: self.masses.clone(),
            n: self.n,
            n_max: self.n_max,
            zgrid: self.zgrid.clone(),
            starts: self.starts,
            seed: self.seed,
            tol: self.tol,
            mprime: self.mprime,
            points: None,
            out: self.out.as_ref().map(|p| p.display().to_string()),
        }
    }
}

fn write(out: Option<&Path>, json: &str, csv: Option<&str>) -> std::io::Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, json)?;
            if let Some(csv) = csv {
                std::fs::write(path.with_extension("csv"), csv)?;
            }
            Ok(())
        }
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                Status::Usage as u8
            } else {
                0
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let flags = cli.flags();
    let input = match &cli.config {
        Some(path) => match std::fs::read_to_string(path)
            .map_err(|e| SpecError::Config(format!("{}: {e}", path.display())))
            .and_then(|text| SpecInput::from_json(&text))
        {
            Ok(cfg) => cfg.overlay(flags),
            Err(e) => {
                let out = usage_failure(&flags, e);
                let _ = write(cli.out.as_deref(), &out.json, None);
                return ExitCode::from(out.status as u8);
            }
        },
        None => flags,
    };
    let out_path = input.out.as_ref().map(PathBuf::from);
    let env_tol = std::env::var(TOL_ENV).ok();
    let out = run_input(input, env_tol.as_deref());
    if let Err(e) = write(out_path.as_deref(), &out.json, out.csv.as_deref()) {
        eprintln!("dropletlab: cannot write output: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(out.status as u8)
}
