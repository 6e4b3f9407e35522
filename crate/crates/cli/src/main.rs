//! `powerlaw`: sample graphs, evaluate layer bounds, optimize `(x, l)`,
//! reproduce the figure data and run seed sweeps.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use powerlaw_core::bounds::GridSpec;
use powerlaw_core::graphgen::GenMethod;
use powerlaw_core::model::{LFamily, ModelParams};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "powerlaw",
    version,
    about = "Finite-size layer analysis of power-law random graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a multigraph and write it in the edge-list format.
    Generate(GenerateArgs),
    /// Layer structure, link bounds and the (x, l) optimum as JSON.
    Bounds(BoundsArgs),
    /// Optimal x(N), l(N) and reference curves for N = 1e2..1e10 as CSV.
    Fig1(Fig1Args),
    /// s(x*, l) over the l grid as CSV.
    Fig2(Fig2Args),
    /// Seed sweep: one JSON report per seed plus an aggregate CSV.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args, Clone, Serialize)]
struct ModelArgs {
    /// Node count.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    /// Power-law exponent, 2 < tau < 3.
    #[arg(long, default_value_t = 2.5)]
    tau: f64,
    /// Fixed value of l(N).
    #[arg(long, conflicts_with = "l_family")]
    l: Option<f64>,
    /// Named l(N): `llll` (ln ln ln ln N) or `lll` (ln ln ln N, default).
    #[arg(long)]
    l_family: Option<LFamily>,
}

impl ModelArgs {
    fn params(&self) -> Result<ModelParams> {
        let p = match (self.l, self.l_family) {
            (Some(l), _) => ModelParams::new(self.n, self.tau, l)?,
            (None, fam) => ModelParams::with_family(self.n, self.tau, fam.unwrap_or(LFamily::Lll))?,
        };
        Ok(p)
    }
}

#[derive(Debug, Args, Clone, Serialize)]
struct GridArgs {
    /// l grid as `min:max:points`, log-spaced.
    #[arg(long, default_value = "0.1:10:200")]
    grid_l: String,
    /// Largest core depth searched (default 3 k*).
    #[arg(long)]
    x_max: Option<usize>,
}

impl GridArgs {
    fn grid(&self) -> Result<GridSpec> {
        let mut g: GridSpec = self.grid_l.parse()?;
        g.x_max = self.x_max;
        g.validate()?;
        Ok(g)
    }
}

#[derive(Debug, Args, Serialize)]
struct GenerateArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    #[arg(long, default_value_t = 2.5)]
    tau: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `pairwise` or `endpoint-sampling`; defaults by N.
    #[arg(long)]
    method: Option<GenMethod>,
    /// Output file (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct BoundsArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Also report the core-count bounds at this depth.
    #[arg(long)]
    x: Option<usize>,
    /// The constant ratio c_j / c.
    #[arg(long, default_value_t = 1.0)]
    c_ratio: f64,
    /// Output file (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit 1 if the optimum sits on the grid boundary or disagrees with
    /// the stationary point.
    #[arg(long)]
    check: bool,
}

#[derive(Debug, Args, Serialize)]
struct Fig1Args {
    #[arg(long, default_value_t = 2.5)]
    tau: f64,
    #[command(flatten)]
    grid: GridArgs,
    /// Output file (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit 1 if the series ordering fails at some N >= 1e3.
    #[arg(long)]
    check: bool,
}

#[derive(Debug, Args, Serialize)]
struct Fig2Args {
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(16..))]
    n: u64,
    #[arg(long, default_value_t = 2.5)]
    tau: f64,
    #[command(flatten)]
    grid: GridArgs,
    /// Output file (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit 1 unless the series has a strict interior maximum.
    #[arg(long)]
    check: bool,
}

#[derive(Debug, Args, Serialize)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Single seed.
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    /// Seed list: `1..30` (inclusive) or `1,4,9`.
    #[arg(long)]
    seeds: Option<String>,
    /// Giant-component pairs sampled per seed.
    #[arg(long, default_value_t = 1000)]
    pairs: usize,
    /// Core depth for U'_x and N_x (default: x* of the optimizer).
    #[arg(long)]
    x: Option<usize>,
    #[arg(long)]
    method: Option<GenMethod>,
    #[arg(long, default_value_t = 1.0)]
    c_ratio: f64,
    #[command(flatten)]
    grid: GridArgs,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Exit 1 if any aggregate bound check fails.
    #[arg(long)]
    check: bool,
}

fn parse_seeds(spec: &str) -> Result<Vec<u64>> {
    let spec = spec.trim();
    if let Some((a, b)) = spec.split_once("..") {
        let a: u64 = a.parse().context("seed range start")?;
        let b: u64 = b.parse().context("seed range end")?;
        if b < a {
            bail!("empty seed range `{spec}`");
        }
        return Ok((a..=b).collect());
    }
    let seeds = spec
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .with_context(|| format!("bad seed `{s}`"))
        })
        .collect::<Result<Vec<_>>>()?;
    if seeds.is_empty() {
        bail!("no seeds given");
    }
    Ok(seeds)
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("POWERLAW_THREADS") {
        let threads: usize = v
            .parse()
            .with_context(|| format!("POWERLAW_THREADS must be an integer, got `{v}`"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = || -> Result<bool> {
        init_threads()?;
        match &cli.command {
            Command::Generate(a) => commands::generate(a),
            Command::Bounds(a) => commands::bounds(a),
            Command::Fig1(a) => commands::fig1(a),
            Command::Fig2(a) => commands::fig2(a),
            Command::Simulate(a) => commands::simulate(a),
        }
    };
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_seeds("7, 3,9").unwrap(), vec![7, 3, 9]);
        assert!(parse_seeds("4..1").is_err());
        assert!(parse_seeds("a").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
