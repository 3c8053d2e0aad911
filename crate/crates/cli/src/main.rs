use std::path::{Path, PathBuf};
use std::process::ExitCode;

use canon_szego::commands::{self, Method};
use canon_szego::input::{parse_hamiltonian, parse_string};
use canon_szego::output::{Format, Table};
use canon_szego::verify;
use canon_szego::{check_tol, CliError, Grid};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "canon-szego",
    version,
    about = "Weyl functions, entropy and Szego characteristics of canonical systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: FormatArg,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Exact,
    Disk,
}

#[derive(Args)]
struct InputArg {
    /// JSON input file.
    #[arg(long)]
    input: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// m(z) on z = x + i*imag for x on the grid.
    Simulate {
        #[command(flatten)]
        input: InputArg,
        #[arg(long, default_value = "-2:2:9", allow_hyphen_values = true)]
        grid: String,
        #[arg(long, default_value_t = 1.0)]
        imag: f64,
        #[arg(long, value_enum, default_value = "exact")]
        method: MethodArg,
        /// Certified radius for the disk method.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Spectral density w(x) on the grid.
    Density {
        #[command(flatten)]
        input: InputArg,
        #[arg(long, default_value = "-4:4:17", allow_hyphen_values = true)]
        grid: String,
    },
    /// I, J, K at position r by the exact and quadrature routes.
    Entropy {
        #[command(flatten)]
        input: InputArg,
        #[arg(long, default_value_t = 0.0)]
        at: f64,
        /// Convergence tolerance of the line quadrature.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// The eta grid and the terms of the discrete Szego characteristic.
    Szego {
        #[command(flatten)]
        input: InputArg,
    },
    /// Weight characteristics of diag(h, 1/h).
    A2 {
        #[command(flatten)]
        input: InputArg,
        /// Grid size for the [3, 4] length search.
        #[arg(long, default_value_t = 64)]
        p1_grid: usize,
    },
    /// Krein string operations.
    String {
        #[command(subcommand)]
        action: StringAction,
    },
    /// Identity and closed-form checks; exit 0 iff all pass.
    Verify {
        /// Check this Hamiltonian instead of the built-in corpus.
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum StringAction {
    /// The image Hamiltonian.
    Convert {
        #[command(flatten)]
        input: InputArg,
    },
    /// The t_n grid and characteristic terms.
    Analyze {
        #[command(flatten)]
        input: InputArg,
    },
    /// K~ of the string and its image, and the logarithmic integral.
    Ktilde {
        #[command(flatten)]
        input: InputArg,
    },
    /// q(z) on z = x + i*imag for x on the grid.
    Q {
        #[command(flatten)]
        input: InputArg,
        #[arg(long, default_value = "-2:2:9", allow_hyphen_values = true)]
        grid: String,
        #[arg(long, default_value_t = 1.0)]
        imag: f64,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}

fn hamiltonian(input: &InputArg) -> Result<canon_szego_core::hamiltonian::Hamiltonian, CliError> {
    parse_hamiltonian(&read(&input.input)?).map_err(|e| in_file(&input.input, e))
}

fn string(input: &InputArg) -> Result<canon_szego_core::string::StringSpec, CliError> {
    parse_string(&read(&input.input)?).map_err(|e| in_file(&input.input, e))
}

fn in_file(path: &Path, e: CliError) -> CliError {
    match e {
        CliError::Parse { line, column, message } => {
            CliError::Parse { line, column, message: format!("{}: {message}", path.display()) }
        }
        other => other,
    }
}

/// The table and whether every check passed.
fn run(command: Command) -> Result<(Table, bool), CliError> {
    let table = match command {
        Command::Simulate { input, grid, imag, method, tol } => {
            let method = match method {
                MethodArg::Exact => Method::Exact,
                MethodArg::Disk => Method::Disk,
            };
            commands::simulate(&hamiltonian(&input)?, &Grid::parse(&grid)?, imag, method, check_tol(tol)?)?
        }
        Command::Density { input, grid } => commands::density(&hamiltonian(&input)?, &Grid::parse(&grid)?)?,
        Command::Entropy { input, at, tol } => {
            commands::entropy(&hamiltonian(&input)?, at, tol.map(check_tol).transpose()?)?
        }
        Command::Szego { input } => commands::szego(&hamiltonian(&input)?)?,
        Command::A2 { input, p1_grid } => commands::a2(&hamiltonian(&input)?, p1_grid)?,
        Command::String { action } => match action {
            StringAction::Convert { input } => commands::string_convert(&string(&input)?)?,
            StringAction::Analyze { input } => commands::string_analyze(&string(&input)?)?,
            StringAction::Ktilde { input } => commands::string_ktilde(&string(&input)?)?,
            StringAction::Q { input, grid, imag } => commands::string_q(&string(&input)?, &Grid::parse(&grid)?, imag)?,
        },
        Command::Verify { input } => {
            let checks = match input {
                Some(path) => {
                    let h = hamiltonian(&InputArg { input: path.clone() })?;
                    verify::hamiltonian_report(&path.display().to_string(), &h)
                }
                None => verify::corpus_checks(),
            };
            let ok = checks.iter().all(verify::Check::passed);
            return Ok((verify::to_table(&checks), ok));
        }
    };
    Ok((table, true))
}

fn threads() -> Result<Option<usize>, CliError> {
    match std::env::var("CANON_SZEGO_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::field("CANON_SZEGO_THREADS", format!("must be a positive integer, got {v:?}"))),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = match cli.format {
        FormatArg::Json => Format::Json,
        FormatArg::Csv => Format::Csv,
    };
    let result = threads().and_then(|n| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = n {
            builder = builder.num_threads(n);
        }
        let pool = builder.build().map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
        pool.install(|| run(cli.command))
    });
    let (table, ok) = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let text = table.render(format);
    match &cli.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        eprintln!("error: some checks failed");
        ExitCode::from(1)
    }
}
