//! Command-line surface for the cocycle library: configuration, result
//! documents and the self-test harness.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod selftest;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use cocycle_core::acceptance::AcceptanceOptions;

use config::{RawConfig, RunConfig};
use error::{CliError, EXIT_NUMERICAL, EXIT_OK};
use report::{ResultDocument, Status};

#[derive(Debug, Parser)]
#[command(name = "cocycle", version, about = "Scaling-cocycle decomposition, residue and KV densities of classical symbols")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON configuration; an empty document selects the command's preset.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, env = "COCYCLE_OUT", default_value = "cocycle-out")]
    pub out: PathBuf,

    /// Overrides every tolerance of the configuration.
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Extraction lambdas, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub lambda: Option<Vec<f64>>,

    /// Suppresses the summary on stdout.
    #[arg(long, global = true)]
    pub quiet: bool,

    /// Built-in symbol used when the configuration has none.
    #[arg(long, global = true)]
    pub preset: Option<String>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Cocycle residuals of the symbol cocycle on the standard grid.
    Verify,
    /// Splits the symbol cocycle into psi and c.
    Decompose,
    /// Wodzicki residue density and its integral.
    Residue,
    /// Kontsevich-Vishik density and its integral.
    KvTrace,
    /// psi(z, t) of the symbol family over a z-window, with residues at the integers.
    ZetaScan,
    /// Runs the acceptance criteria.
    Selftest {
        #[arg(long, hide = true)]
        corrupt_oracle: Option<u32>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Decompose => "decompose",
            Command::Residue => "residue",
            Command::KvTrace => "kv-trace",
            Command::ZetaScan => "zeta-scan",
            Command::Selftest { .. } => "selftest",
        }
    }

    pub fn default_preset(&self) -> &'static str {
        match self {
            Command::Verify | Command::Residue | Command::Selftest { .. } => "wodzicki-n1",
            Command::Decompose => "kv-fractional",
            Command::KvTrace => "kv-n1",
            Command::ZetaScan => "zeta-n1",
        }
    }
}

/// A finished run: the document and the files written for it.
#[derive(Debug)]
pub struct Execution {
    pub document: ResultDocument,
    pub files: Vec<PathBuf>,
    pub seconds: f64,
}

impl Execution {
    pub fn exit_code(&self) -> i32 {
        match self.document.status {
            Status::Passed => EXIT_OK,
            Status::Failed => EXIT_NUMERICAL,
        }
    }

    pub fn summary(&self) -> String {
        let d = &self.document;
        let mut s = String::new();
        let status = match d.status {
            Status::Passed => "passed",
            Status::Failed => "FAILED",
        };
        let _ = writeln!(s, "{} [{}] config {}", d.command, status, &d.config_hash[..12.min(d.config_hash.len())]);
        for (name, [re, im]) in &d.scalars {
            let _ = writeln!(s, "  {name} = {re:.12} {im:+.3e}i");
        }
        for c in &d.checks {
            let measured = c.measured.map_or("n/a".to_string(), |m| format!("{m:.3e}"));
            let mark = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(s, "  {mark} {}: {measured} <= {:.1e}", c.name, c.threshold);
        }
        for f in &self.files {
            let _ = writeln!(s, "  wrote {}", f.display());
        }
        let _ = writeln!(s, "  {:.2}s", self.seconds);
        s
    }

    /// Names of failed checks, for the exit diagnostic.
    pub fn failure_message(&self) -> Option<String> {
        let failed: Vec<String> = self
            .document
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| match c.measured {
                Some(m) => format!("{} ({m:.3e} > {:.1e})", c.name, c.threshold),
                None => format!("{} (not computed)", c.name),
            })
            .collect();
        (!failed.is_empty()).then(|| format!("tolerance failure: {}", failed.join("; ")))
    }
}

/// Reads the configuration, applies presets and command-line overrides.
pub fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let raw = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
            RawConfig::parse(&text)?
        }
        None => RawConfig::default(),
    };
    let preset = cli.preset.as_deref().unwrap_or(cli.command.default_preset());
    let mut cfg = raw.resolve(preset)?;
    if let Some(tol) = cli.tol {
        cfg = cfg.with_tolerance(tol)?;
    }
    if let Some(lambdas) = &cli.lambda {
        cfg = cfg.with_lambdas(lambdas.clone())?;
    }
    Ok(cfg)
}

pub fn execute(cli: &Cli) -> Result<Execution, CliError> {
    let start = Instant::now();
    let cfg = load_config(cli)?;
    let document = match &cli.command {
        Command::Verify => commands::verify(&cfg)?,
        Command::Decompose => commands::decompose(&cfg)?,
        Command::Residue => commands::residue(&cfg)?,
        Command::KvTrace => commands::kv_trace(&cfg)?,
        Command::ZetaScan => commands::zeta_scan(&cfg)?,
        Command::Selftest { corrupt_oracle } => selftest::selftest(
            &cfg.hash(),
            &AcceptanceOptions {
                corrupt_oracle: *corrupt_oracle,
                ..AcceptanceOptions::default()
            },
        ),
    };
    let files = document.write(&cli.out)?;
    Ok(Execution {
        document,
        files,
        seconds: start.elapsed().as_secs_f64(),
    })
}
