use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use wctop::cli::{self, CliError, Format, Options, Output};
use wctop::measure::DEFAULT_GEOMETRIC_ATOMS;

#[derive(Parser)]
#[command(
    name = "wctop",
    version,
    about = "Classify weighted conditional type operators on finite measure spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Relative tolerance, scaled by max(1, ||T||^(2m))
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Highest defect order to examine
    #[arg(long, global = true)]
    m_max: Option<u32>,
    /// Also write the structured report to this file
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Table)]
    format: FormatArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Structured,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the operator described by a spec file
    Classify { spec: PathBuf },
    /// Grid example with u = y^(x/8), w = sqrt((4+x)y)
    ExampleA {
        #[arg(long, default_value_t = 20)]
        nx: usize,
        #[arg(long, default_value_t = 1000)]
        ny: usize,
    },
    /// Geometric example with u(n) = 1/n, w(n) = n
    ExampleB {
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = DEFAULT_GEOMETRIC_ATOMS)]
        n_atoms: usize,
        /// Write the example as a spec file and exit
        #[arg(long)]
        emit_spec: Option<PathBuf>,
    },
    /// Audit the function-level criteria against the defect oracle on random instances
    RandomSuite {
        #[arg(long, default_value_t = 200)]
        count: usize,
        /// Atom counts, e.g. 2..10
        #[arg(long, default_value = "2..10", value_parser = cli::parse_range)]
        dims: std::ops::RangeInclusive<usize>,
        /// Block counts, e.g. 1..4
        #[arg(long, default_value = "1..4", value_parser = cli::parse_range)]
        blocks: std::ops::RangeInclusive<usize>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Tabulate defect and quasi-defect norms for m = 1..m_max
    SweepM {
        spec: PathBuf,
        #[arg(long = "up-to")]
        up_to: Option<u32>,
    },
}

fn run(cli: Cli) -> Result<Option<Output>, CliError> {
    let opts = Options {
        tol: cli.common.tol,
        m_max: cli.common.m_max,
    };
    let out = match cli.command {
        Command::Classify { spec } => cli::cmd_classify(&spec, &opts)?,
        Command::ExampleA { nx, ny } => cli::cmd_example_a(nx, ny, &opts)?,
        Command::ExampleB {
            p,
            n_atoms,
            emit_spec,
        } => {
            if let Some(path) = emit_spec {
                let spec = cli::example_b_spec(p, n_atoms)?;
                std::fs::write(&path, spec.to_toml())
                    .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                return Ok(None);
            }
            cli::cmd_example_b(p, n_atoms, &opts)?
        }
        Command::RandomSuite {
            count,
            dims,
            blocks,
            seed,
        } => cli::cmd_random_suite(count, dims, blocks, seed, &opts)?,
        Command::SweepM { spec, up_to } => cli::cmd_sweep_m(&spec, up_to, &opts)?,
    };
    Ok(Some(out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = match cli.common.format {
        FormatArg::Table => Format::Table,
        FormatArg::Structured => Format::Structured,
    };
    let out_path = cli.common.out.clone();
    match run(cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(out)) => {
            print!("{}", out.render(format));
            if let Some(path) = out_path {
                if let Err(e) = std::fs::write(&path, out.to_json() + "\n") {
                    eprintln!("error: {}: {e}", path.display());
                    return ExitCode::from(cli::EXIT_FAILURE as u8);
                }
            }
            ExitCode::from(out.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
