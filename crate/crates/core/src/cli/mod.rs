//! Configuration loading, command dispatch and report assembly.

pub mod commands;
pub mod config;
pub mod report;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use thiserror::Error;

use crate::catalog;
use crate::substitution::{SubstitutionSystem, ValidationReport};
use config::{load_config, ConfigError, SystemConfig};

/// Version of every JSON document the tool writes.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid argument: {0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
    #[error("cannot write {path}: {msg}")]
    Io { path: String, msg: String },
}

impl CliError {
    /// 0 success, 2 schema or usage, 3 mathematical validation, 4 runtime.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(e) => e.exit_code(),
            CliError::Usage(_) => 2,
            CliError::Runtime(_) | CliError::Io { .. } => 4,
        }
    }

    pub fn runtime(e: impl std::fmt::Display) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "tilescope",
    version,
    about = "Analysis toolkit for self-affine tile substitutions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct SystemArgs {
    /// Configuration file, or the name of a bundled system.
    pub system: String,
    /// Directory for reports and artifacts.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Print the report without writing files.
    #[arg(long)]
    pub no_write: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a configuration: expansivity, primitivity, PF identity.
    Validate(SystemArgs),
    /// Substitute a prototile (or the fixed-point seed) k times.
    Generate {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long, default_value_t = 1)]
        level: usize,
        /// Prototile type, 1-based.
        #[arg(long, default_value_t = 1)]
        tile: usize,
        /// Start from the fixed-point seed; the level counts seed periods.
        #[arg(long)]
        fixed_point: bool,
        /// Clip window `lo1,lo2,..:hi1,hi2,..`.
        #[arg(long)]
        window: Option<String>,
    },
    /// Render a substituted patch with raster prototiles.
    Render {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long, default_value_t = 2)]
        level: usize,
        #[arg(long, default_value_t = 1)]
        tile: usize,
        #[arg(long)]
        resolution: Option<f64>,
        /// Write an SVG (the default artifact).
        #[arg(long)]
        svg: bool,
        /// Also write one PGM mask per prototile.
        #[arg(long)]
        pgm: bool,
    },
    /// Solve the adjoint set equations on a raster and report volumes.
    Prototiles {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long)]
        resolution: Option<f64>,
        #[arg(long)]
        iters: Option<usize>,
    },
    /// Tile and patch frequencies from level curves.
    Freq {
        #[command(flatten)]
        sys: SystemArgs,
        /// Patch as `type@x,y;type@x,y`, types 1-based, coordinates in the basis.
        #[arg(long)]
        patch: Vec<String>,
        #[arg(long)]
        levels: Option<usize>,
    },
    /// FLC/ILC evidence and the Meyer heuristic.
    Flc {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Rigidity verdict from return vectors.
    Rigidity {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long)]
        level: Option<usize>,
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Pisot, Pisot-family and totally-non-Pisot classification of Q's eigenvalues.
    Pisot(SystemArgs),
    /// Residue test for candidate dynamical eigenvalues α.
    Eigentest {
        #[command(flatten)]
        sys: SystemArgs,
        /// Candidate `α1,α2,..`; repeatable. Defaults to the configured candidates.
        #[arg(long, allow_hyphen_values = true)]
        alpha: Vec<String>,
        #[arg(long)]
        nmax: Option<usize>,
        #[arg(long)]
        level: Option<usize>,
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Cylinder classes, wiggle boxes and the partition check.
    Cylinders {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        level: Option<usize>,
        /// Side of the enumeration frame.
        #[arg(long)]
        frame: Option<f64>,
    },
    /// Non-mixing overlap bound for a return vector z.
    Mixing {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long, allow_hyphen_values = true)]
        z: Option<String>,
        #[arg(long)]
        host_level: Option<usize>,
        #[arg(long)]
        nmax: Option<usize>,
    },
    /// Local rubber distance between two coloured point sets.
    Metric {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        no_write: bool,
    },
    /// Consolidated verdicts; `--all` adds raster, frequency, cylinder and mixing blocks.
    Report {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long)]
        all: bool,
    },
}

/// A loaded system with its configuration and validation report.
pub struct Loaded {
    pub config: SystemConfig,
    pub system: SubstitutionSystem,
    pub validation: ValidationReport,
}

/// Loads a configuration file, falling back to a bundled system of the same name.
pub fn load_system(spec: &str) -> CliResult<Loaded> {
    let path = Path::new(spec);
    let (config, system, validation) = if path.exists() {
        load_config(path)?
    } else {
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or(spec);
        if !catalog::SOURCES.iter().any(|(n, _)| *n == name) {
            return Err(ConfigError::Io {
                path: spec.to_string(),
                msg: "no such file or bundled system".into(),
            }
            .into());
        }
        let (_, text) = catalog::SOURCES
            .iter()
            .find(|(n, _)| *n == name)
            .expect("checked");
        config::load_config_str(text)?
    };
    Ok(Loaded {
        config,
        system,
        validation,
    })
}

/// An artifact to be written next to the report.
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(name: impl Into<String>, bytes: impl Into<Vec<u8>>) -> Self {
        Artifact {
            name: name.into(),
            bytes: bytes.into(),
        }
    }
}

/// Result of one command: a JSON block with a provenance tag plus files.
pub struct Outcome {
    pub command: String,
    pub method: &'static str,
    pub data: Value,
    pub artifacts: Vec<Artifact>,
}

impl Outcome {
    pub fn new(command: &str, method: &'static str, data: Value) -> Self {
        Outcome {
            command: command.to_string(),
            method,
            data,
            artifacts: Vec::new(),
        }
    }

    pub fn with(mut self, artifact: Artifact) -> Self {
        self.artifacts.push(artifact);
        self
    }
}

/// Replaces characters that are awkward in file names.
pub fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let io = |e: std::io::Error| CliError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    };
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Wraps a command block in the versioned envelope.
pub fn envelope(system: Option<&str>, outcome: &Outcome, status: &str) -> Value {
    json!({
        "schema_version": REPORT_SCHEMA_VERSION,
        "tool": "tilescope",
        "system": system,
        "command": outcome.command,
        "status": status,
        "method": outcome.method,
        "result": outcome.data,
    })
}

pub fn to_pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values serialize") + "\n"
}

fn emit(
    system: Option<&str>,
    params: &str,
    outcome: &Outcome,
    out: &Path,
    no_write: bool,
) -> CliResult<Value> {
    let failed = outcome
        .data
        .get("failed_blocks")
        .and_then(Value::as_array)
        .is_some_and(|a| !a.is_empty());
    let doc = envelope(system, outcome, if failed { "failed" } else { "ok" });
    if !no_write {
        let stem = match system {
            Some(s) => format!("{}_{}", sanitize(s), sanitize(&outcome.command)),
            None => sanitize(&outcome.command),
        };
        let stem = if params.is_empty() {
            stem
        } else {
            format!("{stem}_{}", sanitize(params))
        };
        write_atomic(
            &out.join(format!("{stem}.json")),
            to_pretty(&doc).as_bytes(),
        )?;
        for a in &outcome.artifacts {
            let name = match system {
                Some(s) => format!("{}_{}", sanitize(s), a.name),
                None => a.name.clone(),
            };
            write_atomic(&out.join(name), &a.bytes)?;
        }
    }
    Ok(doc)
}

/// Executes a parsed command and returns the JSON document it produced,
/// flagged when some block of it failed.
pub fn execute(cli: Cli) -> CliResult<(Value, bool)> {
    use commands as c;
    match cli.command {
        Command::Metric {
            a,
            b,
            out,
            no_write,
        } => {
            let outcome = c::metric(&a, &b)?;
            Ok((emit(None, "", &outcome, &out, no_write)?, false))
        }
        cmd => {
            let (args, params, run): (
                SystemArgs,
                String,
                Box<dyn FnOnce(&Loaded) -> CliResult<Outcome>>,
            ) = match cmd {
                Command::Validate(s) => (s, String::new(), Box::new(c::validate)),
                Command::Generate {
                    sys,
                    level,
                    tile,
                    fixed_point,
                    window,
                } => (
                    sys,
                    format!(
                        "level{level}_tile{tile}{}",
                        if fixed_point { "_fp" } else { "" }
                    ),
                    Box::new(move |l| c::generate(l, level, tile, fixed_point, window.as_deref())),
                ),
                Command::Render {
                    sys,
                    level,
                    tile,
                    resolution,
                    svg,
                    pgm,
                } => (
                    sys,
                    format!("level{level}_tile{tile}"),
                    Box::new(move |l| c::render(l, level, tile, resolution, svg || !pgm, pgm)),
                ),
                Command::Prototiles {
                    sys,
                    resolution,
                    iters,
                } => (
                    sys,
                    String::new(),
                    Box::new(move |l| c::prototiles(l, resolution, iters)),
                ),
                Command::Freq { sys, patch, levels } => (
                    sys,
                    String::new(),
                    Box::new(move |l| c::freq(l, &patch, levels)),
                ),
                Command::Flc {
                    sys,
                    levels,
                    radius,
                } => (
                    sys,
                    String::new(),
                    Box::new(move |l| c::flc(l, levels, radius)),
                ),
                Command::Rigidity { sys, level, radius } => (
                    sys,
                    String::new(),
                    Box::new(move |l| c::rigidity(l, level, radius)),
                ),
                Command::Pisot(s) => (s, String::new(), Box::new(c::pisot)),
                Command::Eigentest {
                    sys,
                    alpha,
                    nmax,
                    level,
                    radius,
                } => {
                    let params = nmax.map_or(String::new(), |n| format!("nmax{n}"));
                    (
                        sys,
                        params,
                        Box::new(move |l| c::eigentest(l, &alpha, nmax, level, radius)),
                    )
                }
                Command::Cylinders {
                    sys,
                    m,
                    level,
                    frame,
                } => {
                    let params = m.map_or(String::new(), |m| format!("m{m}"));
                    (
                        sys,
                        params,
                        Box::new(move |l| c::cylinders(l, m, level, frame)),
                    )
                }
                Command::Mixing {
                    sys,
                    z,
                    host_level,
                    nmax,
                } => (
                    sys,
                    String::new(),
                    Box::new(move |l| c::mixing(l, z.as_deref(), host_level, nmax)),
                ),
                Command::Report { sys, all } => (
                    sys,
                    if all { "all".into() } else { String::new() },
                    Box::new(move |l| Ok(report::report(l, all))),
                ),
                Command::Metric { .. } => unreachable!("handled above"),
            };
            let loaded = load_system(&args.system)?;
            let outcome = run(&loaded)?;
            let doc = emit(
                Some(loaded.system.name()),
                &params,
                &outcome,
                &args.out,
                args.no_write,
            )?;
            let failed = doc["status"] == "failed";
            Ok((doc, failed))
        }
    }
}

/// Parses arguments, runs the command, prints the JSON report and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok((doc, failed)) => {
            print!("{}", to_pretty(&doc));
            if failed {
                eprintln!("error: one or more report blocks failed; the partial report was kept");
                4
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
