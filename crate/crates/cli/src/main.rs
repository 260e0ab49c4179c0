use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use flora_core::anneal::SaConfig;
use flora_core::bench_io::gsrc::design_paths;
use flora_core::bench_io::report::format_summary;
use flora_core::bench_io::{report_aggregate, SynthConfig};
use flora_core::pipeline::{parse_stages, Mode, RunConfig};
use flora_core::place::PlaceConfig;
use flora_core::Error;

#[derive(Parser)]
#[command(name = "flora", version, about = "Grid-based rectilinear floorplanner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Floorplan a benchmark and write layouts, SVGs and a metric report.
    Run(Box<RunArgs>),
    /// Average report CSVs over seeds.
    Report {
        #[arg(required = true)]
        csv: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Benchmark name, resolved to <bench-dir>/<design>.blocks and .nets
    #[arg(long, env = "FLORA_DESIGN")]
    design: Option<String>,
    #[arg(long, env = "FLORA_BENCH_DIR", default_value = "data/gsrc")]
    bench_dir: PathBuf,
    #[arg(long, env = "FLORA_BLOCKS", requires = "nets")]
    blocks: Option<PathBuf>,
    #[arg(long, env = "FLORA_NETS", requires = "blocks")]
    nets: Option<PathBuf>,
    /// Starting layout for post mode
    #[arg(long, env = "FLORA_LAYOUT")]
    layout: Option<PathBuf>,
    #[arg(long, env = "FLORA_MODE", default_value = "scratch")]
    mode: String,
    #[arg(long, env = "FLORA_STAGES", default_value = "1,2,3")]
    stages: String,
    /// Number of seeds to run, starting at --seed
    #[arg(long, env = "FLORA_SEEDS", default_value_t = 1)]
    seeds: u64,
    #[arg(long, env = "FLORA_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "FLORA_GRID", default_value_t = 224)]
    grid: usize,
    /// Share of the canvas covered by module area budgets
    #[arg(long, env = "FLORA_UTILIZATION", default_value_t = 0.75)]
    utilization: f64,
    #[arg(long, env = "FLORA_T_INIT", default_value_t = 2000.0)]
    t_init: f64,
    #[arg(long, env = "FLORA_T_END", default_value_t = 1e-3)]
    t_end: f64,
    #[arg(long, env = "FLORA_COOLING", default_value_t = 0.99)]
    cooling: f64,
    /// Moves per temperature (default: one per module)
    #[arg(long, env = "FLORA_STEPS")]
    steps: Option<usize>,
    #[arg(long, env = "FLORA_W_MOD", default_value_t = 0.5)]
    w_mod: f64,
    #[arg(long, env = "FLORA_W_PIN", default_value_t = 0.5)]
    w_pin: f64,
    #[arg(long, env = "FLORA_PIN_SPACING", default_value_t = 1)]
    pin_spacing: u32,
    #[arg(long, env = "FLORA_FILL_RATIO", default_value_t = 0.8)]
    fill_ratio: f64,
    #[arg(long, env = "FLORA_ALLOW_ROTATION", default_value_t = true, action = clap::ArgAction::Set)]
    allow_rotation: bool,
    #[arg(long, env = "FLORA_EXPAND_CAP", default_value_t = 64)]
    expand_cap: usize,
    #[arg(long, env = "FLORA_OUT_DIR", default_value = "out")]
    out_dir: PathBuf,
}

impl RunArgs {
    fn config(self) -> Result<RunConfig, Error> {
        let (design, blocks, nets) = match (self.design, self.blocks, self.nets) {
            (design, Some(b), Some(n)) => {
                let name =
                    design.unwrap_or_else(|| b.file_stem().map_or("design".into(), |s| s.to_string_lossy().into()));
                (name, b, n)
            }
            (Some(d), None, None) => {
                let (b, n) = design_paths(&self.bench_dir, &d);
                (d, b, n)
            }
            _ => return Err(Error::Config("give --design or both --blocks and --nets".into())),
        };
        let mut cfg = RunConfig::new(design, blocks, nets);
        cfg.mode = self.mode.parse()?;
        cfg.external = self.layout;
        cfg.stages = parse_stages(&self.stages)?;
        cfg.seeds = (self.seed..self.seed + self.seeds).collect();
        cfg.grid = self.grid;
        cfg.utilization = self.utilization;
        cfg.sa = SaConfig {
            t_init: self.t_init,
            t_end: self.t_end,
            cooling: self.cooling,
            steps_per_temp: self.steps,
            w_mod: self.w_mod,
            w_pin: self.w_pin,
            ..SaConfig::default()
        };
        cfg.pin_spacing = self.pin_spacing;
        cfg.synth = SynthConfig {
            fill_ratio: self.fill_ratio,
            ..SynthConfig::default()
        };
        cfg.place = PlaceConfig {
            allow_rotation: self.allow_rotation,
            expand_cap: self.expand_cap,
            ..PlaceConfig::default()
        };
        cfg.out_dir = Some(self.out_dir);
        if cfg.mode == Mode::Scratch && cfg.external.is_some() {
            return Err(Error::Config("--layout needs --mode post".into()));
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn is_config_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Config(_)
            | Error::Parse { .. }
            | Error::UndeclaredBlock { .. }
            | Error::LayoutOverlap(_)
            | Error::Read { .. }
            | Error::InvalidLayout(_)
    )
}

fn run(args: RunArgs) -> Result<(), (u8, anyhow::Error)> {
    let cfg = args.config().map_err(|e| (1, e.into()))?;
    let out = cfg.out_dir.clone().unwrap_or_default().join(&cfg.design);
    match flora_core::run(&cfg) {
        Ok(result) => {
            let rows = result.rows();
            let summary = flora_core::bench_io::report::aggregate(&rows);
            print!("{}", format_summary(&summary));
            eprintln!("artifacts written to {}", out.display());
            Ok(())
        }
        Err(e) => {
            let code = if is_config_error(&e) { 1 } else { 2 };
            Err((
                code,
                anyhow::Error::new(e).context(format!("run of {} failed", cfg.design)),
            ))
        }
    }
}

fn report(csv: Vec<PathBuf>) -> Result<(), (u8, anyhow::Error)> {
    let summary = report_aggregate(&csv)
        .context("could not aggregate reports")
        .map_err(|e| (1, e))?;
    print!("{}", format_summary(&summary));
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Run(args) => run(*args),
        Command::Report { csv } => report(csv),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
