mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{Format, GlobalFlags, NormSection, RunConfig};
use error::CliError;

#[derive(Parser)]
#[command(
    name = "lierestrict",
    version,
    about = "Root systems, peeling, alcoves, characters and restriction norms"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Cartan type letter (A-G).
    #[arg(long, global = true)]
    family: Option<String>,
    #[arg(long, global = true)]
    rank: Option<usize>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Size of the worker pool.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Largest Weyl group that may be enumerated.
    #[arg(long = "weyl-cap", global = true)]
    weyl_cap: Option<f64>,
    /// Gauss nodes per panel.
    #[arg(long = "q-res", global = true)]
    q_res: Option<usize>,
    /// Threshold of the alcove subdivision.
    #[arg(long, global = true)]
    c: Option<f64>,
    #[arg(long = "node-budget", global = true)]
    node_budget: Option<f64>,
    /// TOML file with defaults for all of the above.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Root system summary.
    Roots,
    /// Optimal peeling sequence and the exhaustive inequality check.
    Peel {
        /// Per-permutation peeling numbers as CSV (rank at most 4).
        #[arg(long)]
        full_table: bool,
    },
    /// Critical exponents.
    Exponents,
    /// Character values.
    Char {
        #[command(subcommand)]
        action: CharCommand,
    },
    /// Alcove geometry.
    Alcove {
        #[command(subcommand)]
        action: AlcoveCommand,
    },
    /// Restriction norms at one or more values of N.
    Norm(NormArgs),
    /// Norms over a range of N with a fitted exponent.
    Scan(NormArgs),
    /// Runs the invariant checks.
    Verify {
        /// Perturbs the marks before checking.
        #[arg(long)]
        inject_corrupt_marks: bool,
    },
}

#[derive(Subcommand)]
enum CharCommand {
    /// Evaluates chi_{N rho} or chi_mu at points given by t-coordinates.
    Eval {
        #[arg(long, conflicts_with = "mu")]
        n: Option<u32>,
        /// Fundamental-weight coordinates of mu, comma separated.
        #[arg(long)]
        mu: Option<String>,
        /// CSV of t-coordinates; `-` reads stdin.
        #[arg(long)]
        points: PathBuf,
    },
}

#[derive(Subcommand)]
enum AlcoveCommand {
    /// Labels points by their cell of the subdivision.
    Classify {
        #[arg(long)]
        n: f64,
        #[arg(long)]
        points: PathBuf,
    },
    /// Affine chart of a facet.
    Chart {
        #[arg(long, default_value = "")]
        nodes: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Facet,
    Weighted,
    Region,
}

#[derive(Args)]
struct NormArgs {
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Node set J, e.g. `{0,2}`.
    #[arg(long)]
    nodes: Option<String>,
    #[arg(long)]
    p: Option<f64>,
    /// Spectral parameter.
    #[arg(long)]
    n: Option<u32>,
    /// Comma-separated N values.
    #[arg(long = "n-values", value_delimiter = ',')]
    n_values: Option<Vec<u32>>,
    /// Divides out the predicted log factor before fitting.
    #[arg(long)]
    log_correct: bool,
    /// Which bound supplies the predicted exponent.
    #[arg(long)]
    bound: Option<String>,
    /// Permutation defining the region mode; the optimal one by default.
    #[arg(long, value_delimiter = ',')]
    perm: Option<Vec<usize>>,
    /// TENSOR_GAUSS or MONTE_CARLO.
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    mc_samples: Option<usize>,
}

impl NormArgs {
    fn section(&self) -> NormSection {
        NormSection {
            mode: self.mode.map(|m| {
                match m {
                    ModeArg::Facet => "facet",
                    ModeArg::Weighted => "weighted",
                    ModeArg::Region => "region",
                }
                .to_string()
            }),
            nodes: self.nodes.clone(),
            p: self.p,
            n: self.n,
            n_values: self.n_values.clone(),
            log_correct: self.log_correct.then_some(true),
            bound: self.bound.clone(),
            perm: self.perm.clone(),
            scheme: self.scheme.clone(),
            mc_samples: self.mc_samples,
        }
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let g = cli.global;
    let flags = GlobalFlags {
        family: g.family,
        rank: g.rank,
        c: g.c,
        q_res: g.q_res,
        weyl_cap: g.weyl_cap,
        node_budget: g.node_budget,
        seed: g.seed,
        format: g.format,
        out: g.out,
        workers: g.workers,
        config: g.config,
    };
    let norm_flags = match &cli.command {
        Command::Norm(a) | Command::Scan(a) => a.section(),
        _ => NormSection::default(),
    };
    let cfg = RunConfig::resolve(flags, norm_flags)?;
    if let Some(w) = cfg.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    let (report, ok) = match cli.command {
        Command::Roots => (commands::roots(&cfg)?, true),
        Command::Peel { full_table } => (commands::peel(&cfg, full_table)?, true),
        Command::Exponents => (commands::exponents(&cfg)?, true),
        Command::Char {
            action: CharCommand::Eval { n, mu, points },
        } => (commands::char_eval(&cfg, n, mu.as_deref(), &points)?, true),
        Command::Alcove { action } => match action {
            AlcoveCommand::Classify { n, points } => (commands::alcove_classify(&cfg, n, &points)?, true),
            AlcoveCommand::Chart { nodes } => (commands::alcove_chart(&cfg, &nodes)?, true),
        },
        Command::Norm(_) => (commands::norm(&cfg)?, true),
        Command::Scan(_) => (commands::scan(&cfg)?, true),
        Command::Verify { inject_corrupt_marks } => commands::verify(&cfg, inject_corrupt_marks)?,
    };
    let bytes = report.render(cfg.format)?;
    output::emit(&bytes, cfg.out.as_deref())?;
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
