use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "dstrust", version, about = "Trust aggregation experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep the number of lying recommenders and record each scheme's trust.
    SecurityBench(BenchArgs),
    /// Simulate one configuration across schemes and seeds, or its `[sweep]` if present.
    Netsim(SimArgs),
    /// Like `netsim` but requires a `[sweep]` table.
    Sweep(SimArgs),
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// TOML file with sweep parameters.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Curves CSV to write.
    #[arg(long)]
    pub out: PathBuf,
    /// badmouth or ballot_stuff; overrides the file.
    #[arg(long)]
    pub attack: Option<String>,
    /// Comma-separated schemes.
    #[arg(long)]
    pub scheme: Option<String>,
    /// key=value, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    /// TOML simulation config; defaults apply to anything left out.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Results CSV to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Literal seeds. Without this, `runs` seeds are derived from `master_seed`.
    #[arg(long, value_delimiter = ',')]
    pub seed: Vec<u64>,
    /// Comma-separated schemes.
    #[arg(long)]
    pub scheme: Option<String>,
    /// key=value, repeatable. Dotted keys reach into tables.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Add rows to an existing results file instead of replacing it.
    #[arg(long)]
    pub append: bool,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    pub jobs: Option<usize>,
}
