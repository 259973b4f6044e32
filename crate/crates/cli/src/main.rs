use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pairgen_cli::error::{CliError, CliResult};
use pairgen_cli::materials_cmd::{list_materials, open_db};
use pairgen_cli::run::run_scenario;
use pairgen_cli::scenario::Overrides;
use pairgen_core::observables::Contribution;

#[derive(Parser)]
#[command(
    name = "pairgen",
    version,
    about = "Photon-pair generation in bulk crystals and layered media"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write its outputs.
    Run {
        scenario: PathBuf,
        /// Output directory, default `pairgen-out/<scenario name>`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Number of grid points per frequency axis.
        #[arg(long)]
        grid: Option<usize>,
        /// Restrict the run to one contribution.
        #[arg(long, value_enum)]
        contribution: Option<ContributionArg>,
        /// Material database overriding the scenario's.
        #[arg(long)]
        db: Option<PathBuf>,
    },
    /// Material database commands.
    Materials {
        #[command(subcommand)]
        command: MaterialsCommand,
    },
}

#[derive(Subcommand)]
enum MaterialsCommand {
    /// List the materials of a database.
    List {
        #[arg(long)]
        db: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ContributionArg {
    Volume,
    Surface,
    Total,
}

impl From<ContributionArg> for Contribution {
    fn from(c: ContributionArg) -> Self {
        match c {
            ContributionArg::Volume => Contribution::Volume,
            ContributionArg::Surface => Contribution::Surface,
            ContributionArg::Total => Contribution::Total,
        }
    }
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run {
            scenario,
            out,
            grid,
            contribution,
            db,
        } => {
            let overrides = Overrides {
                grid,
                contribution: contribution.map(Into::into),
                db,
            };
            let report = run_scenario(&scenario, out.as_deref(), &overrides)?;
            println!(
                "wrote {} files to {}",
                report.manifest.outputs.len() + 1,
                report.out_dir.display()
            );
            Ok(())
        }
        Command::Materials {
            command: MaterialsCommand::List { db },
        } => {
            let db = open_db(db.as_deref()).map_err(|e| CliError::runtime("material database", e))?;
            let mut out = std::io::stdout().lock();
            list_materials(&db, &mut out)
                .and_then(|_| out.flush())
                .map_err(|e| CliError::runtime("stdout", e))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
