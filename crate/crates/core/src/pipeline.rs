//! End-to-end flow: ingest, anneal, remove whitespace, place components,
//! and write per-stage layouts, SVGs and the metric report.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::anneal::{init_external, init_random, run_stage1, SaConfig};
use crate::bench_io::gsrc::{parse_blocks, parse_nets};
use crate::bench_io::{emit_report, emit_svg, load_layout, save_layout, synthesize_components, ReportRow, SynthConfig};
use crate::error::{Error, Result};
use crate::layout::Layout;
use crate::metrics::{FeedthroughParams, MetricRow};
use crate::netlist::Netlist;
use crate::place::{run_stage3, PlaceConfig};
use crate::resize::run_stage2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Start from a random legal layout.
    Scratch,
    /// Start from an externally produced layout.
    Post,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scratch" => Ok(Mode::Scratch),
            "post" => Ok(Mode::Post),
            other => Err(Error::Config(format!("unknown mode `{other}`"))),
        }
    }
}

/// Parse a stage list such as `1,2,3` into the number of stages to run.
/// Only non-empty prefixes of `1,2,3` are accepted.
pub fn parse_stages(s: &str) -> Result<usize> {
    let got: Vec<&str> = s.split(',').map(str::trim).filter(|p| !p.is_empty()).collect();
    let prefix = ["1", "2", "3"];
    if got.is_empty() || got.len() > 3 || got[..] != prefix[..got.len()] {
        return Err(Error::Config(format!("stages must be a prefix of 1,2,3, got `{s}`")));
    }
    Ok(got.len())
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub design: String,
    pub blocks: PathBuf,
    pub nets: PathBuf,
    /// Starting layout for post mode.
    pub external: Option<PathBuf>,
    pub mode: Mode,
    /// Number of stages to run, 1 to 3.
    pub stages: usize,
    pub seeds: Vec<u64>,
    pub grid: usize,
    pub utilization: f64,
    pub sa: SaConfig,
    pub pin_spacing: u32,
    pub synth: SynthConfig,
    pub place: PlaceConfig,
    /// Where to write artifacts; nothing is written when unset.
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(design: impl Into<String>, blocks: impl Into<PathBuf>, nets: impl Into<PathBuf>) -> Self {
        Self {
            design: design.into(),
            blocks: blocks.into(),
            nets: nets.into(),
            external: None,
            mode: Mode::Scratch,
            stages: 3,
            seeds: vec![0],
            grid: 224,
            utilization: 0.75,
            sa: SaConfig::default(),
            pin_spacing: 1,
            synth: SynthConfig::default(),
            place: PlaceConfig::default(),
            out_dir: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.stages) {
            return Err(Error::Config("stage count must be 1, 2 or 3".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if self.grid == 0 {
            return Err(Error::Config("grid must be positive".into()));
        }
        if self.pin_spacing == 0 {
            return Err(Error::Config("pin spacing must be positive".into()));
        }
        if self.place.expand_cap == 0 {
            return Err(Error::Config("expansion cap must be positive".into()));
        }
        match (self.mode, &self.external) {
            (Mode::Post, None) => return Err(Error::Config("post mode needs an external layout".into())),
            (Mode::Scratch, Some(_)) => return Err(Error::Config("an external layout requires post mode".into())),
            _ => {}
        }
        self.sa.validate()
    }
}

/// Layouts and metrics of one seed, in stage order.
#[derive(Debug, Clone)]
pub struct SeedRun {
    pub seed: u64,
    pub start: Layout,
    pub start_row: ReportRow,
    /// Metrics of the final-temperature Stage 1 state, when Stage 1 ran.
    pub stage1_last: Option<ReportRow>,
    pub stages: Vec<(Layout, ReportRow)>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub netlist: Netlist,
    pub runs: Vec<SeedRun>,
}

impl RunOutput {
    pub fn rows(&self) -> Vec<ReportRow> {
        self.runs
            .iter()
            .flat_map(|r| r.stages.iter().map(|(_, row)| row.clone()))
            .collect()
    }

    pub fn baseline_rows(&self) -> Vec<ReportRow> {
        self.runs
            .iter()
            .flat_map(|r| std::iter::once(r.start_row.clone()).chain(r.stage1_last.clone()))
            .collect()
    }
}

/// Parse the benchmark and map it onto the grid (no components yet).
pub fn load_netlist(cfg: &RunConfig) -> Result<Netlist> {
    let blocks = parse_blocks(&cfg.blocks)?;
    let nets = parse_nets(&cfg.nets, &blocks)?;
    Netlist::from_gsrc(&blocks, &nets, cfg.grid, cfg.utilization)
}

fn seed_dir(cfg: &RunConfig, seed: u64) -> Option<PathBuf> {
    cfg.out_dir
        .as_ref()
        .map(|d| d.join(&cfg.design).join(format!("seed{seed}")))
}

fn write_stage(dir: Option<&Path>, layout: &Layout) -> Result<()> {
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir)?;
        save_layout(layout, dir.join(format!("{}.layout", layout.stage)))?;
        emit_svg(layout, dir.join(format!("{}.svg", layout.stage)))?;
    }
    Ok(())
}

fn run_seed(cfg: &RunConfig, base: &Netlist, external: Option<&Layout>, seed: u64) -> Result<SeedRun> {
    let dir = seed_dir(cfg, seed);
    let netlist = synthesize_components(base, seed, &cfg.synth)?;
    let params = FeedthroughParams::from_netlist(&netlist, cfg.pin_spacing);
    let sa = SaConfig { seed, ..cfg.sa.clone() };
    let row_as = |layout: &Layout, stage: String, rt: f64, cum: f64| -> Result<ReportRow> {
        Ok(ReportRow {
            design: cfg.design.clone(),
            seed,
            stage,
            metrics: MetricRow::measure(layout, &netlist, &params, rt)?,
            rt_cum_s: cum,
        })
    };
    let row = |layout: &Layout, rt: f64, cum: f64| row_as(layout, layout.stage.to_string(), rt, cum);

    let clock = Instant::now();
    let start = match external {
        Some(ext) => init_external(&netlist, ext)?,
        None => init_random(&netlist, cfg.grid, cfg.grid, &sa)?,
    };
    let rt = clock.elapsed().as_secs_f64();
    let start_row = row(&start, rt, rt)?;
    write_stage(dir.as_deref(), &start)?;

    let mut cum = 0.0;
    let mut stages = Vec::new();
    let mut stage1_last = None;
    let mut current = start.clone();
    for k in 1..=cfg.stages {
        let clock = Instant::now();
        current = match k {
            1 => {
                let out = run_stage1(&netlist, &params, current, &sa)?;
                let rt = clock.elapsed().as_secs_f64();
                stage1_last = Some(row_as(&out.last, format!("{}-last", out.last.stage), rt, rt)?);
                out.best
            }
            2 => run_stage2(current, &netlist.nets, &params)?,
            _ => run_stage3(current, &cfg.place),
        };
        let rt = clock.elapsed().as_secs_f64();
        cum += rt;
        debug_assert!(current.validate().is_ok());
        write_stage(dir.as_deref(), &current)?;
        stages.push((current.clone(), row(&current, rt, cum)?));
    }
    Ok(SeedRun {
        seed,
        start,
        start_row,
        stage1_last,
        stages,
    })
}

/// Run every seed (in parallel) and write the reports. If any seed fails,
/// the rows of the seeds that finished are still written.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let base = load_netlist(cfg)?;
    let external = match (&cfg.mode, &cfg.external) {
        (Mode::Post, Some(p)) => Some(load_layout(p)?),
        _ => None,
    };
    let results: Vec<Result<SeedRun>> = cfg
        .seeds
        .par_iter()
        .map(|&s| run_seed(cfg, &base, external.as_ref(), s))
        .collect();
    let mut runs = Vec::new();
    let mut first_err = None;
    for r in results {
        match r {
            Ok(run) => runs.push(run),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    let out = RunOutput { netlist: base, runs };
    if let Some(dir) = &cfg.out_dir {
        let dir = dir.join(&cfg.design);
        std::fs::create_dir_all(&dir)?;
        emit_report(&out.rows(), dir.join("report.csv"))?;
        emit_report(&out.baseline_rows(), dir.join("baseline.csv"))?;
    }
    match first_err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_prefixes() {
        assert_eq!(parse_stages("1").unwrap(), 1);
        assert_eq!(parse_stages("1,2").unwrap(), 2);
        assert_eq!(parse_stages("1, 2, 3").unwrap(), 3);
        for bad in ["", "2", "1,3", "1,2,3,4", "3,2,1"] {
            assert!(parse_stages(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn config_checks() {
        let mut cfg = RunConfig::new("x", "a", "b");
        assert!(cfg.validate().is_ok());
        cfg.mode = Mode::Post;
        assert!(cfg.validate().is_err());
        cfg.external = Some("l".into());
        assert!(cfg.validate().is_ok());
        cfg.seeds.clear();
        assert!(cfg.validate().is_err());
    }
}
