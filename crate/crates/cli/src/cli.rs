//! Argument parsing and the process-level run loop.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_config, RawSettings};
use crate::emit::render;
use crate::report::run;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "qrs-sim",
    version,
    about = "Reference-system calculus simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario and emit its report.
    Run(RunArgs),
}

/// Every value is kept as text here and validated in [`crate::config`], so
/// flag and file errors share one path.
#[derive(Debug, Args)]
pub struct RunArgs {
    /// intro-measurement, pair-correlations, bell, bell-ancilla or chsh-scan.
    #[arg(long)]
    pub scenario: Option<String>,
    /// `key = value` file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Coefficient of the first pair branch, `re` or `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<String>,
    /// Coefficient of the second pair branch, `re` or `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<String>,
    /// First measurement angle, radians.
    #[arg(long, allow_hyphen_values = true)]
    pub theta1: Option<String>,
    /// Second measurement angle, radians.
    #[arg(long, allow_hyphen_values = true)]
    pub theta2: Option<String>,
    /// CHSH settings `a,a',b,b'`, radians.
    #[arg(long, allow_hyphen_values = true)]
    pub angles: Option<String>,
    /// CHSH family scan `start,stop,steps` over t in (0, 2t, t, 3t).
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Number of draws from the scenario's joint table.
    #[arg(long)]
    pub samples: Option<String>,
    /// csv or json.
    #[arg(long)]
    pub format: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<String>,
}

impl RunArgs {
    pub fn settings(&self) -> RawSettings {
        let mut raw = RawSettings::default();
        let flags = [
            ("scenario", &self.scenario),
            ("a", &self.a),
            ("b", &self.b),
            ("theta1", &self.theta1),
            ("theta2", &self.theta2),
            ("angles", &self.angles),
            ("grid", &self.grid),
            ("seed", &self.seed),
            ("samples", &self.samples),
            ("format", &self.format),
            ("out", &self.out),
        ];
        for (key, value) in flags {
            if let Some(value) = value {
                raw.set(key, value.clone(), format!("--{key}"));
            }
        }
        raw
    }
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn execute<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
            } else {
                let _ = write!(stdout, "{text}");
            }
            return e.exit_code();
        }
    };
    let Command::Run(args) = cli.command;

    let spec = match parse_config(args.config.as_deref(), &args.settings()) {
        Ok(spec) => spec,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    let report = match run(&spec) {
        Ok(report) => report,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_INVARIANT;
        }
    };

    let text = render(&report, spec.format);
    let written = match &spec.out {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| format!("cannot write {}: {e}", path.display()))
        }
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| format!("cannot write output: {e}")),
    };
    if let Err(message) = written {
        let _ = writeln!(stderr, "error: {message}");
        return EXIT_CONFIG;
    }

    let mut code = EXIT_OK;
    for check in report.failed_checks() {
        let _ = writeln!(
            stderr,
            "invariant failed: {} residual {:e} (tolerance {:e})",
            check.name, check.residual, check.tolerance
        );
        code = EXIT_INVARIANT;
    }
    code
}
