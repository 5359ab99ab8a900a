//! Command-line front end: `form-grids`, `run` and `compare`.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use tis_core::grid::{elect_all, form_grids};
use tis_core::sim::{compare_strategies, cost_of, run_scenario, Strategy};
use tis_core::topology::{builtin_testbed, ScenarioConfig};
use tis_core::workload::{generate_workload, Workload};

use crate::config::{load_topology, load_workload};
use crate::report;

#[derive(Debug, Parser)]
#[command(name = "tis", version, about = "Query-centric transport information system simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Form grids and elect coordinators.
    FormGrids(FormGridsArgs),
    /// Simulate one strategy and write its report.
    Run(RunArgs),
    /// Simulate both strategies on the same workload and compare costs.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Use the built-in sixteen-node testbed.
    #[arg(long)]
    pub testbed: bool,
    /// Load the scenario from a JSON config file.
    #[arg(long, value_name = "FILE")]
    pub topology: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    #[command(flatten)]
    pub source: Source,
    /// Grid distance threshold; overrides the config value.
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct WorkloadArgs {
    /// Reporting ticks; overrides the config value.
    #[arg(long)]
    pub ticks: Option<u64>,
    #[arg(long, default_value_t = 20)]
    pub queries: usize,
    #[arg(long, default_value_t = 10)]
    pub requests: usize,
    /// Seed for readings and workload; overrides the config value.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Load the workload from a JSON file instead of generating it.
    #[arg(long, value_name = "FILE")]
    pub workload: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Qcps,
    Flat,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Qcps => Strategy::Qcps,
            StrategyArg::Flat => Strategy::Flat,
        }
    }
}

#[derive(Debug, Args)]
pub struct FormGridsArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[command(flatten)]
    pub workload: WorkloadArgs,
    #[arg(long, value_enum, default_value = "qcps")]
    pub strategy: StrategyArg,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[command(flatten)]
    pub workload: WorkloadArgs,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read `{}`", path.display()))
}

impl ScenarioArgs {
    pub fn load(&self) -> Result<ScenarioConfig> {
        let mut cfg = match &self.source.topology {
            Some(path) => load_topology(&read(path)?).with_context(|| format!("in `{}`", path.display()))?,
            None => builtin_testbed(),
        };
        if let Some(t) = self.threshold {
            cfg.threshold = t;
        }
        Ok(cfg)
    }
}

impl WorkloadArgs {
    /// Applies tick and seed overrides to `cfg` and builds the workload.
    pub fn build(&self, cfg: &mut ScenarioConfig) -> Result<Workload> {
        if let Some(t) = self.ticks {
            cfg.duration_ticks = t;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        cfg.validate_structure()?;
        Ok(match &self.workload {
            Some(path) => load_workload(&read(path)?, cfg).with_context(|| format!("in `{}`", path.display()))?,
            None => generate_workload(cfg, self.queries, self.requests, cfg.seed)?,
        })
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write `{}`", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn form_grids_cmd(args: &FormGridsArgs) -> Result<()> {
    let cfg = args.scenario.load()?;
    cfg.validate_structure()?;
    let grids = elect_all(
        form_grids(&cfg.sensors, cfg.threshold)?,
        &cfg.sensor_index(),
        &cfg.coordinator_overrides,
    )?;
    let text = match args.format {
        Format::Json => report::canonical_json(&report::grids_value(&grids)),
        Format::Text => report::grid_listing(&grids),
        Format::Csv => bail!("form-grids supports --format text or json"),
    };
    emit(args.out.as_deref(), &text)
}

pub fn run_cmd(args: &RunArgs) -> Result<()> {
    let mut cfg = args.scenario.load()?;
    let workload = args.workload.build(&mut cfg)?;
    let trace = run_scenario(&cfg, &workload, args.strategy.into())?;
    let cost = cost_of(&trace, &cfg.cost_params);
    let text = match args.format {
        Format::Json => report::canonical_json(&report::run_report(&cfg, &trace, &cost)),
        Format::Csv => report::costs_csv(&[&cost]),
        Format::Text => bail!("run supports --format json or csv"),
    };
    emit(args.out.as_deref(), &text)
}

pub fn compare_cmd(args: &CompareArgs) -> Result<()> {
    let mut cfg = args.scenario.load()?;
    let workload = args.workload.build(&mut cfg)?;
    let cmp = compare_strategies(&cfg, &workload)?;
    let text = match args.format {
        Format::Json => report::canonical_json(&report::compare_report(&cfg, &cmp)),
        Format::Csv => report::compare_csv(&cmp),
        Format::Text => report::compare_table(&cmp),
    };
    emit(args.out.as_deref(), &text)
}

pub fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::FormGrids(a) => form_grids_cmd(a),
        Command::Run(a) => run_cmd(a),
        Command::Compare(a) => compare_cmd(a),
    }
}
