use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "hardnet", version, about = "Build, lift and verify hard-instance ReLU networks")]
pub struct Cli {
    /// Seed for every random stream.
    #[arg(long, global = true, env = "HARDNET_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Omit the runtime section.
    #[arg(long, global = true)]
    pub canonical_only: bool,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FamilyArgs {
    /// A family spec file (.json) or one of parity, lwr, keyed_toy.
    #[arg(long, default_value = "parity")]
    pub family: String,
    #[arg(long)]
    pub d: Option<usize>,
    /// Comma-separated 1-based coordinates.
    #[arg(long)]
    pub subset: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub q: Option<u64>,
    #[arg(long)]
    pub p: Option<u64>,
    /// Comma-separated secret in Z_q^n.
    #[arg(long)]
    pub w: Option<String>,
    #[arg(long)]
    pub key: Option<u64>,
    #[arg(long)]
    pub depth_budget: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LiftMode {
    Naive,
    Compressed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DistArg {
    Gaussian,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GadgetArg {
    N1,
    N1Vec,
    N2,
    N3,
    Majority,
    Family,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleArg {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyArg {
    Random,
    Correlation,
    Agreement,
    Mixed,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Build a gadget or family network and write its document.
    Compile {
        #[arg(long, value_enum, default_value_t = GadgetArg::Family)]
        gadget: GadgetArg,
        #[command(flatten)]
        family: FamilyArgs,
        /// Target value of N3.
        #[arg(long, default_value_t = 0)]
        t_star: i64,
        /// Upper end of N3's range {0, …, T}.
        #[arg(long, default_value_t = 10)]
        range_max: i64,
        #[arg(long, default_value_t = 3)]
        arity: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lift a family to a real-input network.
    Lift {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, value_enum, default_value_t = LiftMode::Naive)]
        mode: LiftMode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample realizable Boolean examples and map them to real inputs.
    Transform {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, value_enum, default_value_t = DistArg::Gaussian)]
        dist: DistArg,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact and statistical checks of the lift.
    Verify {
        #[command(subcommand)]
        check: VerifyCheck,
    },
    /// Exhaustive pairwise-independence and variance-bound report.
    VerifyPairwise {
        /// lwr, all-functions or parities.
        #[arg(long, default_value = "lwr")]
        family: String,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        q: u64,
        #[arg(long, default_value_t = 2)]
        p: u64,
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Random query tables for the variance check.
        #[arg(long, default_value_t = 100)]
        tables: u64,
    },
    /// Adversarial-oracle game on an LWR family.
    SqGame {
        #[arg(long, default_value = "lwr")]
        family: String,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 8)]
        q: u64,
        #[arg(long, default_value_t = 2)]
        p: u64,
        #[arg(long, default_value_t = 4)]
        d: usize,
        #[arg(long, default_value = "1/4")]
        tau: String,
        #[arg(long, default_value_t = 10)]
        queries: u64,
        #[arg(long, value_enum, default_value_t = StrategyArg::Mixed)]
        strategy: StrategyArg,
    },
    /// Answer real queries about a lifted family through a Boolean oracle.
    SqSimulate {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = 0.1)]
        tau: f64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        /// Query budget Q.
        #[arg(long, default_value_t = 20)]
        budget: u64,
        #[arg(long, default_value_t = 10)]
        trials: u64,
        #[arg(long, default_value_t = 1_000_000)]
        ground_truth_samples: u64,
        #[arg(long, value_enum, default_value_t = OracleArg::Exact)]
        oracle: OracleArg,
        /// Samples per answer for the Monte Carlo oracle.
        #[arg(long, default_value_t = 10_000)]
        oracle_samples: u64,
        /// Override the batch size m.
        #[arg(long)]
        m: Option<u64>,
    },
    /// Non-SQ attacks.
    Attack {
        #[command(subcommand)]
        target: AttackTarget,
    },
    /// Membership queries on the lift answered by a Boolean oracle.
    MqDemo {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = 10_000)]
        queries: u64,
    },
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifyCheck {
    /// Lift network against the reference lift, exactly.
    Identity {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, value_enum, default_value_t = LiftMode::Naive)]
        mode: LiftMode,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long, default_value_t = 1_000)]
        adversarial: u64,
    },
    /// Empirical good-set mass against numerical integration.
    Goodset {
        #[arg(long, default_value_t = 10)]
        d: usize,
        #[arg(long, value_enum, default_value_t = DistArg::Gaussian)]
        dist: DistArg,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
    /// Per-coordinate KS statistic of transformed inputs.
    Marginal {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, value_enum, default_value_t = DistArg::Gaussian)]
        dist: DistArg,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// Lift deviations where some coordinate is within δ of zero.
    Case3 {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = 2_000)]
        samples: u64,
    },
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackTarget {
    /// Gaussian elimination on filtered lifted-parity examples.
    ParityLift {
        #[arg(long, default_value_t = 20)]
        d: usize,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
    },
}
