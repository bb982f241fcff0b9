mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gully_core::model::Scenario;
use gully_core::GullyError;

use crate::output::RunReport;

#[derive(Debug, Parser)]
#[command(name = "gully", version, about = "Thin-tube reaction-diffusion runs, sweeps and verification suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario file (TOML).
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,

    /// Output directory, created when missing.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Width used by single-width commands.
    #[arg(long, global = true, default_value_t = 0)]
    epsilon_index: usize,

    /// Worker threads (defaults to one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Replaces `analysis.seed` from the scenario.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Band trajectory for one width; one CSV per output time.
    Simulate,
    /// Axis trajectory; one CSV per output time.
    Reduce,
    /// All widths against a refined axis reference.
    Converge,
    VerifyGeometry,
    VerifyKernel,
    VerifyReflection,
    VerifyGronwall,
    /// Weighted space-time norms across widths.
    Norms,
    /// Transverse gaps, tangential Laplacian gaps and the axis residual.
    Asymptotics,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Reduce => "reduce",
            Command::Converge => "converge",
            Command::VerifyGeometry => "verify-geometry",
            Command::VerifyKernel => "verify-kernel",
            Command::VerifyReflection => "verify-reflection",
            Command::VerifyGronwall => "verify-gronwall",
            Command::Norms => "norms",
            Command::Asymptotics => "asymptotics",
        }
    }
}

const EXIT_CHECK: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn exit_code(err: &GullyError) -> u8 {
    match err {
        GullyError::Config { .. } | GullyError::Io(_) => EXIT_USAGE,
        _ => EXIT_NUMERICAL,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(path) = cli.scenario.clone() else {
        eprintln!("error: --scenario is required");
        return ExitCode::from(EXIT_USAGE);
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let mut scenario = match Scenario::load(&path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if let Some(seed) = cli.seed {
        scenario.analysis.seed = seed;
    }
    let mut report = RunReport::start(cli.command.name(), &path, &scenario, &cli.out);
    match commands::dispatch(cli.command, &scenario, cli.epsilon_index, &mut report) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    }
    if let Err(e) = report.finish() {
        eprintln!("error: {e}");
        return ExitCode::from(exit_code(&e));
    }
    report.print_summary();
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_kinds_map_to_exit_codes() {
        assert_eq!(exit_code(&GullyError::config("a.b", "bad")), EXIT_USAGE);
        assert_eq!(exit_code(&GullyError::Io(std::io::Error::other("x"))), EXIT_USAGE);
        assert_eq!(exit_code(&GullyError::Numerical("nan".into())), EXIT_NUMERICAL);
        assert_eq!(exit_code(&GullyError::Domain("sigma".into())), EXIT_NUMERICAL);
    }

    #[test]
    fn command_names_match_subcommands() {
        use clap::CommandFactory;
        let names: Vec<String> = Cli::command().get_subcommands().map(|c| c.get_name().to_string()).collect();
        for c in [
            Command::Simulate,
            Command::Reduce,
            Command::Converge,
            Command::VerifyGeometry,
            Command::VerifyKernel,
            Command::VerifyReflection,
            Command::VerifyGronwall,
            Command::Norms,
            Command::Asymptotics,
        ] {
            assert!(names.iter().any(|n| n == c.name()), "{}", c.name());
        }
    }
}
