use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod output;
mod sweep;

use sweep::Sweep;

#[derive(Parser, Debug)]
#[command(
    name = "ptchain",
    version,
    about = "Spectra, metrics and exceptional points of PT-symmetric chains"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: Global,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Hamiltonian spec (JSON)
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
    /// Output file; standard output when absent
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Eigenvalue is real iff |Im| <= tol (1 + |lambda|)
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol_real: f64,
    /// Root-finder stopping tolerance
    #[arg(long, global = true, default_value_t = 1e-14)]
    pub tol_root: f64,
    /// Worker threads for sweeps (0: all cores)
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// Report energies in raw units instead of units of t (uniform) or t2 (SSH)
    #[arg(long, global = true)]
    pub raw: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// Chain built from flags when no --spec is given: SSH bonds t1, t2 (t2 defaults to t1)
/// with defects delta ± i gamma on sites m and n+1-m.
#[derive(Args, Debug, Clone)]
pub struct ChainArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// Defect site (1-based)
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long, default_value_t = 1.0)]
    pub t1: f64,
    #[arg(long)]
    pub t2: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Eigenvalues with multiplicities and phase
    Spectrum {
        #[command(flatten)]
        chain: ChainArgs,
        /// Include eigenvectors (JSON only)
        #[arg(long)]
        vectors: bool,
    },
    /// Intertwiner M, its square root, the Hermitian partner h and the C operator
    Metric {
        #[command(flatten)]
        chain: ChainArgs,
        /// Real part of the free family parameter
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        re_z: f64,
    },
    /// Run the consistency and certificate checks that apply to the chain
    Verify {
        #[command(flatten)]
        chain: ChainArgs,
    },
    /// EP contour of the uniform chain with end defects, on theta = j pi / steps
    EpContour {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 360)]
        theta_steps: usize,
        /// Hopping t
        #[arg(long, default_value_t = 1.0)]
        t1: f64,
    },
    /// Smallest breaking gamma of the SSH chain with end defects over (t1/t2, delta)
    EpSurface {
        #[arg(long)]
        n: usize,
        /// t1 sweep a:b:steps
        #[arg(long, allow_hyphen_values = true)]
        t1: Sweep,
        #[arg(long, default_value_t = 1.0)]
        t2: f64,
        #[arg(long, allow_hyphen_values = true)]
        delta_range: Sweep,
    },
    /// Closed-form spectra of the uniform chain with centre defects, or of the exact SSH case via --spec
    ClosedForm {
        #[arg(long, default_value_t = 3)]
        m: usize,
        /// Hopping t
        #[arg(long, default_value_t = 1.0)]
        t1: f64,
        /// Single row 1..=5; all rows when absent
        #[arg(long)]
        row: Option<u8>,
    },
    /// Phase and real-eigenvalue count over a (delta, gamma) grid
    PhaseDiagram {
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long, allow_hyphen_values = true)]
        delta_range: Sweep,
        #[arg(long, allow_hyphen_values = true)]
        gamma_range: Sweep,
    },
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Math(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Input(_) => 2,
            CliError::Math(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(s) => write!(f, "invalid input: {s}"),
            CliError::Math(s) => write!(f, "computation failed: {s}"),
            CliError::Io(s) => write!(f, "i/o error: {s}"),
        }
    }
}

impl From<ptchain::Error> for CliError {
    fn from(e: ptchain::Error) -> Self {
        match e {
            ptchain::Error::Json(_) => CliError::Input(e.to_string()),
            _ => CliError::Math(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.global.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.global.jobs)
            .build_global()
        {
            eprintln!("ptchain: {e}");
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ptchain: {e}");
            ExitCode::from(e.code())
        }
    }
}
