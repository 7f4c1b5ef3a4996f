//! `mforge`: validate labelled polytopes and evaluate their toric Kähler data.

mod commands;
mod output;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, ValueEnum};
use mforge_core::{Error, Tolerances};

pub const EXIT_RUNTIME: u8 = 1;
pub const EXIT_INVALID_INPUT: u8 = 2;
pub const EXIT_USAGE: u8 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Validate,
    Vertices,
    DelzantData,
    Eval,
    Grid,
    LegendreInvert,
    Project,
    Check,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// A comma-separated list of reals.
#[derive(Clone, Debug)]
pub struct Reals(pub Vec<f64>);

/// `r1:θ1,…,rd:θd`
#[derive(Clone, Debug)]
pub struct PolarPoint(pub Vec<(f64, f64)>);

fn parse_real(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("not a real number: {s:?}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("not finite: {s:?}"))
    }
}

fn parse_reals(s: &str) -> Result<Reals, String> {
    s.split(',').map(parse_real).collect::<Result<_, _>>().map(Reals)
}

fn parse_polar(s: &str) -> Result<PolarPoint, String> {
    s.split(',')
        .map(|pair| {
            let (r, t) = pair
                .split_once(':')
                .ok_or_else(|| format!("expected r:theta, got {pair:?}"))?;
            Ok((parse_real(r)?, parse_real(t)?))
        })
        .collect::<Result<_, String>>()
        .map(PolarPoint)
}

fn parse_tolerance(s: &str) -> Result<f64, String> {
    let v = parse_real(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err("tolerances must be positive".into())
    }
}

#[derive(Debug, Parser)]
#[command(name = "mforge", version, about = "Delzant polytopes, Guillemin potentials and toric Kähler metrics")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Polytope description (JSON).
    pub polytope: PathBuf,
    /// Interior point `x1,…,xn`; may be repeated.
    #[arg(long = "point", value_parser = parse_reals, allow_hyphen_values = true)]
    pub points: Vec<Reals>,
    /// Grid points per axis.
    #[arg(long, default_value_t = 33, value_parser = clap::value_parser!(u32).range(2..))]
    pub resolution: u32,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, value_parser = parse_tolerance)]
    pub tol_boundary: Option<f64>,
    #[arg(long, value_parser = parse_tolerance)]
    pub tol_newton: Option<f64>,
    #[arg(long, value_parser = parse_tolerance)]
    pub tol_kn: Option<f64>,
    /// Target `y1,…,yn` for legendre-invert.
    #[arg(long, value_parser = parse_reals, allow_hyphen_values = true)]
    pub y: Option<Reals>,
    /// Point of ℂᵈ in polar form for project.
    #[arg(long, value_parser = parse_polar, allow_hyphen_values = true)]
    pub z: Option<PolarPoint>,
}

impl Cli {
    pub fn tolerances(&self) -> Tolerances {
        let mut tol = Tolerances::default();
        if let Some(v) = self.tol_boundary {
            tol.boundary = v;
        }
        if let Some(v) = self.tol_newton {
            tol.newton = v;
        }
        if let Some(v) = self.tol_kn {
            tol.kn = v;
        }
        tol
    }
}

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub kind: &'static str,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            kind: "usage",
            message: message.into(),
        }
    }

    pub fn runtime(kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            code: EXIT_RUNTIME,
            kind,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::Syntax { .. } => (EXIT_INVALID_INPUT, "syntax"),
            Error::InvalidPolytope(_) => (EXIT_INVALID_INPUT, "invalid_polytope"),
            Error::DimensionMismatch { .. } => (EXIT_INVALID_INPUT, "dimension_mismatch"),
            Error::BoundaryDomain { .. } => (EXIT_INVALID_INPUT, "boundary_domain"),
            Error::NotDelzant(_) => (EXIT_INVALID_INPUT, "not_delzant"),
            Error::OffLevelSet { .. } => (EXIT_INVALID_INPUT, "off_level_set"),
            Error::NotPositiveDefinite { .. } => (EXIT_RUNTIME, "not_positive_definite"),
            Error::InconsistentSystem { .. } => (EXIT_RUNTIME, "inconsistent_system"),
            Error::DependentNormals => (EXIT_RUNTIME, "dependent_normals"),
            Error::Unstable(_) => (EXIT_RUNTIME, "unstable"),
            Error::MaxIterations { .. } => (EXIT_RUNTIME, "max_iterations"),
        };
        Self {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self::runtime("io", e.to_string())
    }
}

fn diagnose(failure: &Failure) {
    let line = serde_json::json!({
        "error": {
            "kind": failure.kind,
            "message": failure.message,
            "exit_code": failure.code,
        }
    });
    eprintln!("{line}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            diagnose(&Failure::usage(e.to_string().trim_end()));
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let result = commands::run(&cli, &mut out);
    let flushed = out.flush();
    match result.and(flushed.map_err(Failure::from)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            diagnose(&failure);
            ExitCode::from(failure.code)
        }
    }
}
