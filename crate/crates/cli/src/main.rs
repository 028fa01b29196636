use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use fdgen::FormulaId;

mod commands;
mod functions;

use functions::TestFunction;

/// Finite-difference formulas by deferred correction.
#[derive(Parser, Debug)]
#[command(name = "fdgen", version)]
struct Cli {
    /// Emit JSON instead of a text table.
    #[arg(long, global = true)]
    json: bool,

    /// Directory for study CSV files and the plot script.
    #[arg(long, global = true, default_value = ".")]
    csv_dir: PathBuf,

    /// Smallest step of the study grid.
    #[arg(long, global = true)]
    h_min: Option<f64>,

    /// Largest step of the study grid.
    #[arg(long, global = true, default_value_t = 0.01)]
    h_max: f64,

    /// Ratio between consecutive steps of the study grid.
    #[arg(long, global = true, default_value_t = 2.0)]
    h_factor: f64,

    /// Also write a gnuplot script plotting every study CSV.
    #[arg(long, global = true)]
    gnuplot: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the coefficients of a formula family.
    Coeffs {
        family: CoeffFamily,
        /// Number of corrections.
        p: u32,
    },
    /// Print a verified flat stencil as JSON, e.g. `B6`, `IC10`, `centered:p=3`.
    Stencil { id: FormulaId },
    /// Convergence study of one or more formulas on a test function.
    Study {
        /// Comma-separated formula ids.
        ids: FormulaList,
        /// `sin100pi`, `sin1000pi` or `poly:<expr>` such as `poly:x^3`.
        function: TestFunction,
        /// Evaluation point.
        #[arg(allow_hyphen_values = true)]
        x0: f64,
    },
    /// Flatten and verify every formula up to an order.
    VerifyAll {
        #[arg(long, default_value_t = 12)]
        max_order: u32,
    },
}

/// Comma-separated `FormulaId`s such as `B6,BC10`.
#[derive(Clone, Debug)]
struct FormulaList(Vec<FormulaId>);

impl FromStr for FormulaList {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, String> {
        text.split(',')
            .map(|id| id.trim().parse::<FormulaId>().map_err(|e| e.to_string()))
            .collect::<Result<Vec<_>, _>>()
            .map(FormulaList)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CoeffFamily {
    /// Centered derivative and average formulas, merged into one table.
    Centered,
    #[value(alias = "avg")]
    CenteredAverage,
    /// Interior-centered derivative and value formulas, merged.
    Interior,
    /// Forward-centered `a_i` (with `b_i` alongside).
    Fc,
    /// Backward-centered `b_i` (with `a_i` alongside).
    Bc,
    #[value(alias = "forward")]
    F,
    #[value(alias = "backward")]
    B,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Coeffs { family, p } => commands::coeffs(family, p, cli.json),
        Command::Stencil { id } => commands::stencil(&id),
        Command::Study { ids, function, x0 } => {
            let grid = commands::GridOptions {
                h_max: cli.h_max,
                h_min: cli.h_min,
                factor: cli.h_factor,
            };
            commands::study(&ids.0, &function, x0, &grid, &cli.csv_dir, cli.gnuplot)
        }
        Command::VerifyAll { max_order } => commands::verify_all(max_order),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
