use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pilotplan_cli::commands::{
    cmd_optimize, cmd_rates, cmd_sweep, format_rates, parse_linear, resolve_rates, sweep_csv, RateSource,
};
use pilotplan_cli::config::{GroupMode, NcohRange, ScenarioConfig};
use pilotplan_cli::reproduce::{self, Report};
use pilotplan_cli::verify::{cmd_verify, Scale};
use pilotplan_cli::CliError;

#[derive(Parser)]
#[command(name = "pilotplan", version, about = "Pilot reuse planning for prioritized user groups")]
struct Cli {
    /// Scenario JSON file (defaults to the 81-cell two-group scenario).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Monte-Carlo seed, overriding the scenario.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte-Carlo trial count, overriding the scenario.
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Use the rates C_i = c0 + slope * i instead of Monte-Carlo estimates.
    #[arg(long, global = true, value_name = "C0,SLOPE")]
    linear_rates: Option<String>,
    /// Directory for cached rate tables.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Two-group optimizer or greedy allocation over all groups.
    #[arg(long, global = true, value_enum)]
    groups: Option<Groups>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Groups {
    #[value(name = "2")]
    Two,
    #[value(name = "n")]
    Many,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate or load the per-depth rate table.
    Rates,
    /// Optimal assignment for one coherence time.
    Optimize {
        #[arg(long, allow_negative_numbers = true)]
        ncoh: f64,
    },
    /// Optimal and full-reuse net-WSR over a coherence-time range.
    Sweep {
        #[arg(long, value_name = "A:B:STEP")]
        ncoh_range: Option<String>,
    },
    /// Regenerate a reference table or figure and compare with expected values.
    Reproduce {
        #[arg(value_enum)]
        target: Target,
    },
    /// Certify the closed forms against exhaustive search.
    Verify {
        #[arg(value_enum, default_value = "small")]
        scale: VerifyScale,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Table3,
    Table4,
    Fig3,
    Fig4,
    Fig5,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyScale {
    Small,
    FullSmallGrid,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut warnings = Vec::new();
    let result = run(&cli, &mut warnings);
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("output serializes")
}

impl Cli {
    fn apply_overrides(&self, mut cfg: ScenarioConfig) -> Result<ScenarioConfig, CliError> {
        if let Some(seed) = self.seed {
            cfg.channel.seed = seed;
        }
        if let Some(trials) = self.trials {
            cfg.channel.trials = trials;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn scenario(&self) -> Result<ScenarioConfig, CliError> {
        let cfg = match &self.config {
            Some(path) => ScenarioConfig::load(path)?,
            None => ScenarioConfig::table3(),
        };
        self.apply_overrides(cfg)
    }

    fn source(&self) -> Result<RateSource<'_>, CliError> {
        Ok(match &self.linear_rates {
            Some(s) => {
                let (c0, slope) = parse_linear(s)?;
                RateSource::Linear { c0, slope }
            }
            None => RateSource::MonteCarlo { cache_dir: self.cache_dir.as_deref() },
        })
    }

    fn mode(&self, cfg: &ScenarioConfig) -> Result<GroupMode, CliError> {
        cfg.mode(self.groups.map(|g| match g {
            Groups::Two => GroupMode::Two,
            Groups::Many => GroupMode::Many,
        }))
    }
}

fn run(cli: &Cli, warnings: &mut Vec<String>) -> Result<(), CliError> {
    match &cli.command {
        Command::Rates => {
            let cfg = cli.scenario()?;
            let (file, status) = cmd_rates(&cfg, cli.cache_dir.as_deref(), warnings)?;
            eprintln!("rate cache: {status:?}");
            match cli.format {
                Some(Format::Csv) => {
                    println!("depth,mean,std_error");
                    for (i, d) in file.depths.iter().enumerate() {
                        println!("{i},{},{}", d.mean, d.std_error);
                    }
                }
                Some(Format::Json) => println!("{}", json(&file)),
                None => print!("{}", format_rates(&file)),
            }
        }
        Command::Optimize { ncoh } => {
            let cfg = cli.scenario()?;
            let rates = resolve_rates(&cfg, &cli.source()?, warnings)?;
            let record = cmd_optimize(&cfg, &rates, *ncoh, cli.mode(&cfg)?, warnings)?;
            println!("{}", json(&record));
        }
        Command::Sweep { ncoh_range } => {
            let cfg = cli.scenario()?;
            let range = match (ncoh_range, cfg.n_coh_range) {
                (Some(s), _) => NcohRange::parse(s)?,
                (None, Some(r)) => r,
                (None, None) => return Err(CliError::Config("no coherence-time range given (--ncoh-range a:b:step)".into())),
            };
            range.points()?;
            let rates = resolve_rates(&cfg, &cli.source()?, warnings)?;
            let sweep = cmd_sweep(&cfg, &rates, &range, cli.mode(&cfg)?)?;
            match cli.format {
                Some(Format::Json) => println!("{}", json(&sweep)),
                _ => print!("{}", sweep_csv(&sweep)),
            }
        }
        Command::Reproduce { target } => {
            let report = reproduce_target(cli, *target, warnings)?;
            match cli.format {
                Some(Format::Json) => println!("{}", json(&report)),
                _ => print!("{}", report.output),
            }
            eprint!("{}", report.summary());
            report.into_result()?;
        }
        Command::Verify { scale } => {
            let scale = match scale {
                VerifyScale::Small => Scale::Small,
                VerifyScale::FullSmallGrid => Scale::FullSmallGrid,
            };
            let (c0, slope) = match &cli.linear_rates {
                Some(s) => parse_linear(s)?,
                None => (2.0, 6.0),
            };
            let report = cmd_verify(scale, |cells| {
                let m = pilotplan::assignment::partition_depths(cells)?;
                Ok(pilotplan::channel::linear_rate_model(c0, slope, m)?)
            })?;
            println!("{}", json(&report));
            if !report.passed() {
                return Err(CliError::Mismatch("closed form disagrees with exhaustive search".into()));
            }
        }
    }
    Ok(())
}

fn reproduce_target(cli: &Cli, target: Target, warnings: &mut Vec<String>) -> Result<Report, CliError> {
    if let Target::Table4 = target {
        return reproduce::table4();
    }
    let base = match target {
        Target::Fig5 => ScenarioConfig::fig5(),
        _ => ScenarioConfig::table3(),
    };
    let cfg = cli.apply_overrides(base)?;
    let rates = resolve_rates(&cfg, &cli.source()?, warnings)?;
    match target {
        Target::Table3 => reproduce::table3(&rates),
        Target::Fig3 => reproduce::fig3(&rates),
        Target::Fig4 => reproduce::fig4(&rates),
        Target::Fig5 => reproduce::fig5(&rates),
        Target::Table4 => unreachable!(),
    }
}
