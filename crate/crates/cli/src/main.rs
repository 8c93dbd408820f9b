#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "qfa", version, about = "Uncertainty-principle verification for finite von Neumann bi-algebras")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Seed of the random corpus, recorded in every report.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Number of corpus elements.
    #[arg(long, global = true, default_value_t = 100)]
    pub samples: usize,
    /// Pass threshold on gaps (verify) or target accuracy (schwartz explore).
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct TransformArgs {
    /// Built-in transform: dft:n, id:n, group:s3, group:zN, tensor:[a,b,...].
    #[arg(long, conflicts_with = "spec")]
    pub transform: Option<String>,
    /// JSON transform descriptor.
    #[arg(long)]
    pub spec: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct ElementArgs {
    /// Element as JSON: a list of real numbers (counting measure) or a full
    /// element object with shape and data.
    #[arg(long, conflicts_with = "element_file")]
    pub element: Option<String>,
    #[arg(long)]
    pub element_file: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run every applicable checker over a seeded corpus.
    Verify(TransformArgs),
    /// Smooth support along an ε grid.
    Support {
        #[command(flatten)]
        element: ElementArgs,
        #[arg(long, default_value = "1")]
        p: String,
        /// Comma-separated ε values; fractions like 1/3 are accepted.
        #[arg(long, default_value = "0,0.1,0.25,0.5,0.75,1")]
        grid: String,
    },
    /// Smooth entropy intervals along ε and p grids.
    Entropy {
        #[command(flatten)]
        element: ElementArgs,
        #[arg(long, default_value = "1,2,inf")]
        p: String,
        #[arg(long, default_value = "0,0.05,0.1,0.2,0.5,1")]
        eps: String,
    },
    /// Evaluate the two-box norm function K(1/p, 1/q).
    Kfunction {
        #[arg(long)]
        delta: f64,
        /// 1/p; with --iq evaluates a single point.
        #[arg(long, requires = "iq")]
        ip: Option<String>,
        #[arg(long, requires = "ip")]
        iq: Option<String>,
        /// Grid resolution over [0,1]² when no point is given.
        #[arg(long, default_value_t = 10)]
        grid: usize,
        /// Norms x_p,x_q,Fx_p,Fx_q for the norm-product check at (--p, --q).
        #[arg(long, requires_all = ["p", "q"])]
        norms: Option<String>,
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        q: Option<String>,
    },
    /// Gaussian chirp families on the real line.
    Schwartz {
        #[command(subcommand)]
        action: SchwartzAction,
    },
    /// Dump the seeded corpus of a transform's domain.
    Corpus(TransformArgs),
}

#[derive(Subcommand, Debug)]
pub enum SchwartzAction {
    /// Find a chirp/two-bump mixture with F_{p,q} equal to a target.
    Explore {
        #[arg(long)]
        q: String,
        #[arg(long, default_value = "2")]
        p: String,
        #[arg(long)]
        target: f64,
    },
    /// Tables of closed forms against quadrature.
    Sweep {
        #[arg(long, value_enum, default_value_t = Family::Chirp)]
        family: Family,
        #[arg(long, default_value = "2")]
        p: String,
        #[arg(long, default_value = "4")]
        q: String,
        /// Chirp parameter on the slice a² − b² = 1 (curve family).
        #[arg(long, default_value_t = 4.0)]
        a: f64,
        /// Two-bump parameter (curve family).
        #[arg(long, default_value_t = 4.0)]
        c: f64,
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Chirp,
    TwoBump,
    Curve,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(outcome) => ExitCode::from(outcome.code()),
        Err(e) => {
            eprintln!("error: {:#}", e.error);
            ExitCode::from(e.kind.code())
        }
    }
}
