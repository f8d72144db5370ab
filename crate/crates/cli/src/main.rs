use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod output;

use output::{render, Format, Header};

#[derive(Parser, Debug)]
#[command(name = "zetalab", version, about = "Zero sums, prime error terms and their random model")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Worker threads for every parallel stage (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the result here (atomically) instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Omit the `generated:` header line.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
}

/// Where zeros come from: a table file, or computed up to `--t-max`.
#[derive(Args, Debug, Clone)]
pub struct ZeroArgs {
    /// Zero table file (one ordinate per line, optional |ζ'| column).
    #[arg(long)]
    pub zeros: Option<PathBuf>,
    /// Height to compute or load zeros up to.
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Bracketing width for computed zeros.
    #[arg(long, default_value_t = 1e-10)]
    pub err: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    PntExact,
    PntSine,
    Mobius,
}

impl From<Kind> for zetalab::WeightKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::PntExact => zetalab::WeightKind::PntExact,
            Kind::PntSine => zetalab::WeightKind::PntSine,
            Kind::Mobius => zetalab::WeightKind::Mobius,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Side {
    Upper,
    Lower,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Zero tables.
    #[command(subcommand)]
    Zeros(ZerosCmd),
    /// ψ(x) and M(x).
    #[command(subcommand)]
    Sieve(SieveCmd),
    /// Weighted sums over zeros.
    #[command(subcommand)]
    Sums(SumsCmd),
    /// Fejér smoothing.
    #[command(subcommand)]
    Fejer(FejerCmd),
    /// The random model.
    #[command(subcommand)]
    Model(ModelCmd),
    /// Tail frequencies.
    #[command(subcommand)]
    Tails(TailsCmd),
    /// Small integer combinations of ordinates.
    #[command(subcommand)]
    Eli(EliCmd),
    /// Named constants.
    #[command(subcommand)]
    Const(ConstCmd),
}

#[derive(Subcommand, Debug)]
pub enum ZerosCmd {
    /// Compute ordinates up to --t-max and write a zero table.
    Compute {
        #[arg(long)]
        t_max: f64,
        #[arg(long, default_value_t = 1e-10)]
        err: f64,
        /// Add the |ζ'(ρ)| column.
        #[arg(long)]
        zprime: bool,
    },
    /// Load a table and report a summary.
    Load {
        #[arg(long)]
        zeros: PathBuf,
        #[arg(long)]
        t_max: Option<f64>,
    },
    /// Compare N(T) with the smooth count on a unit grid.
    Check {
        #[command(flatten)]
        src: ZeroArgs,
    },
}

#[derive(Args, Debug, Clone)]
pub struct XGrid {
    #[arg(long, default_value_t = 100.0)]
    pub x_min: f64,
    #[arg(long, default_value_t = 1e4)]
    pub x_max: f64,
    /// Number of log-spaced points.
    #[arg(long, default_value_t = 200)]
    pub n: usize,
}

#[derive(Subcommand, Debug)]
pub enum SieveCmd {
    /// Rows (x, ψ(x), (ψ(x)-x)/√x).
    Psi {
        #[command(flatten)]
        grid: XGrid,
    },
    /// Rows (x, M(x), M(x)/√x).
    Mertens {
        #[command(flatten)]
        grid: XGrid,
    },
}

#[derive(Subcommand, Debug)]
pub enum SumsCmd {
    /// F(t, T) on a uniform t grid.
    Eval {
        #[command(flatten)]
        src: ZeroArgs,
        #[arg(long, value_enum, default_value = "pnt-exact")]
        kind: Kind,
        #[arg(long = "T")]
        cutoff: f64,
        #[arg(long, default_value_t = 0.0)]
        t_min: f64,
        #[arg(long, default_value_t = 10.0)]
        t_hi: f64,
        #[arg(long, default_value_t = 101)]
        n: usize,
    },
    /// Growth of H, L, Q along a grid of cutoffs.
    Assumptions {
        #[command(flatten)]
        src: ZeroArgs,
        #[arg(long, value_enum, default_value = "pnt-exact")]
        kind: Kind,
        /// Comma-separated cutoffs, ascending.
        #[arg(long, value_delimiter = ',')]
        t_grid: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
    },
    /// J_{-k}(T) along a grid of cutoffs.
    Jk {
        #[command(flatten)]
        src: ZeroArgs,
        #[arg(long, default_value_t = 1.0)]
        k: f64,
        #[arg(long, value_delimiter = ',')]
        t_grid: Vec<f64>,
    },
    /// Sieve error term against the truncated explicit formula.
    Compare {
        #[command(flatten)]
        src: ZeroArgs,
        #[arg(long, value_enum, default_value = "pnt-exact")]
        kind: Kind,
        #[arg(long = "T")]
        cutoff: f64,
        #[command(flatten)]
        grid: XGrid,
        #[arg(long)]
        jump_window: Option<f64>,
        /// Omit the terms that do not involve nontrivial zeros.
        #[arg(long)]
        zeros_only: bool,
    },
}

#[derive(Args, Debug, Clone)]
pub struct PlanArgs {
    /// Kernel scale.
    #[arg(long = "T")]
    pub t: f64,
    /// Integration half-window.
    #[arg(long = "Z")]
    pub z: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Require Z ≥ (log Y)^A.
    #[arg(long)]
    pub enforce_window: bool,
}

#[derive(Subcommand, Debug)]
pub enum FejerCmd {
    /// Smoothed F(t, Y) on a t grid.
    Smooth {
        #[command(flatten)]
        src: ZeroArgs,
        #[arg(long, value_enum, default_value = "pnt-exact")]
        kind: Kind,
        #[command(flatten)]
        plan: PlanArgs,
        #[arg(long = "Y")]
        y: f64,
        #[arg(long, default_value_t = 0.0)]
        t_min: f64,
        #[arg(long, default_value_t = 5.0)]
        t_hi: f64,
        #[arg(long, default_value_t = 11)]
        n: usize,
    },
    /// Smoothed sum against the triangular-weight sum.
    Identity {
        #[command(flatten)]
        src: ZeroArgs,
        #[arg(long, value_enum, default_value = "pnt-exact")]
        kind: Kind,
        #[command(flatten)]
        plan: PlanArgs,
        #[arg(long = "Y")]
        y: f64,
        #[arg(long, default_value_t = 0.0)]
        t_min: f64,
        #[arg(long, default_value_t = 5.0)]
        t_hi: f64,
        #[arg(long, default_value_t = 11)]
        n: usize,
    },
    /// Σ |r r'| min(1, 1/|γ-γ'|) over X1 < γ, γ' ≤ X2.
    Pairs {
        #[command(flatten)]
        src: ZeroArgs,
        #[arg(long, value_enum, default_value = "pnt-exact")]
        kind: Kind,
        #[arg(long = "X1")]
        x1: f64,
        #[arg(long = "X2")]
        x2: f64,
    },
    /// Second moment of the smoothed tail over Y < γ ≤ Y2.
    Tailmoment {
        #[command(flatten)]
        src: ZeroArgs,
        #[arg(long, value_enum, default_value = "pnt-exact")]
        kind: Kind,
        #[command(flatten)]
        plan: PlanArgs,
        #[arg(long = "Y")]
        y: f64,
        #[arg(long = "Y2")]
        y2: f64,
        /// Time range [1, X] of the average.
        #[arg(long = "X", default_value_t = 1000.0)]
        x: f64,
    },
}

#[derive(Subcommand, Debug)]
pub enum ModelCmd {
    /// Draw samples and report a histogram.
    Sample {
        #[command(flatten)]
        src: ZeroArgs,
        #[arg(long, value_enum, default_value = "pnt-sine")]
        kind: Kind,
        #[arg(long = "T")]
        cutoff: f64,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 40)]
        bins: usize,
    },
    /// Empirical against exact moment generating function.
    Mgf {
        #[command(flatten)]
        src: ZeroArgs,
        #[arg(long, value_enum, default_value = "pnt-sine")]
        kind: Kind,
        #[arg(long = "T")]
        cutoff: f64,
        #[arg(long = "X", default_value_t = 1e5)]
        x: f64,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-2,-1,1,2")]
        s: Vec<f64>,
    },
    /// Mixed cosine moments of the first --m zeros, time average against exact.
    Moments {
        #[command(flatten)]
        src: ZeroArgs,
        #[arg(long, default_value_t = 5)]
        m: usize,
        #[arg(long, default_value_t = 4)]
        max_size: usize,
        #[arg(long = "X", default_value_t = 1e5)]
        x: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EtaKind {
    Convergent,
    AsPrinted,
}

#[derive(Subcommand, Debug)]
pub enum TailsCmd {
    /// Measure of {t ≤ X : ±F(t, T) > V} for a ladder of V.
    Empirical {
        #[command(flatten)]
        src: ZeroArgs,
        #[arg(long, value_enum, default_value = "pnt-sine")]
        kind: Kind,
        #[arg(long = "T")]
        cutoff: f64,
        #[arg(long = "X", default_value_t = 1e5)]
        x: f64,
        #[arg(long, default_value_t = 40)]
        levels: usize,
        #[arg(long, value_enum, default_value = "upper")]
        side: Side,
    },
    /// Predicted tail exp(-c √V e^{√(2πV)}).
    Predicted {
        #[arg(long = "V", value_delimiter = ',')]
        v: Vec<f64>,
        /// Defaults to the convergent value.
        #[arg(long, allow_hyphen_values = true)]
        eta: Option<f64>,
    },
    /// The constant in the predicted tail.
    Eta {
        #[arg(long, value_enum, default_value = "convergent")]
        variant: EtaKind,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
}

#[derive(Args, Debug, Clone)]
pub struct EliArgs {
    #[command(flatten)]
    pub src: ZeroArgs,
    /// Number of leading ordinates.
    #[arg(long)]
    pub m: usize,
    /// Coefficient bound (default m).
    #[arg(long = "L")]
    pub l: Option<i64>,
}

#[derive(Subcommand, Debug)]
pub enum EliCmd {
    Brute(EliArgs),
    Mitm(EliArgs),
    Pigeonhole(EliArgs),
    /// The two conjectural lower bounds at height T.
    Bounds {
        #[arg(long = "T")]
        t: f64,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
    },
}

#[derive(Subcommand, Debug)]
pub enum ConstCmd {
    Montgomery,
    ZetaPrime {
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    NgB {
        #[arg(long, default_value_t = 100_000)]
        p_max: u64,
        #[arg(long, default_value_t = 60)]
        k_max: usize,
    },
    /// log (2N)^N against T (log T)²/(2π).
    Heuristic {
        #[command(flatten)]
        src: ZeroArgs,
        #[arg(long = "T")]
        t: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match commands::run(cli.command) {
        Ok(run) => {
            let header = Header {
                command: argv.join(" "),
                seed: run.seed,
                zeros_digest: run.zeros_digest,
                timestamp: !cli.global.no_timestamp,
            };
            let text = render(&run.body, cli.global.format.unwrap_or(run.default_format), &header);
            match output::emit(&text, cli.global.out.as_deref()) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(&e),
            }
        }
        Err(e) => fail(&e),
    }
}

fn fail(e: &zetalab::Error) -> ExitCode {
    let kind = format!("{e:?}");
    let kind = kind.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error");
    eprintln!("{}", serde_json::json!({ "error": kind, "message": e.to_string() }));
    ExitCode::FAILURE
}
