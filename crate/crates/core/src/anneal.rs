//! Coarse-grained optimization: simulated annealing over rectangular module
//! positions. A move swaps the anchors of two modules; modules left illegal
//! are re-placed with the wiremask legalizer, and the move is accepted by
//! the Metropolis rule on the normalized feedthrough objective.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::{CellCoord, ModuleId, Rect};
use crate::layout::{Layout, ModuleLayout, Stage};
use crate::masks::{greedy_place_among, position_mask};
use crate::metrics::{bbox_of, span_cells, FeedthroughParams, SaObjective};
use crate::netlist::{Net, Netlist};
use crate::rng::{stream, Stream};

#[derive(Debug, Clone, PartialEq)]
pub struct SaConfig {
    pub t_init: f64,
    pub t_end: f64,
    pub cooling: f64,
    /// Moves per temperature; `None` means one per module.
    pub steps_per_temp: Option<usize>,
    pub w_mod: f64,
    pub w_pin: f64,
    pub seed: u64,
    pub init_attempts: usize,
}

impl Default for SaConfig {
    fn default() -> Self {
        Self {
            t_init: 2000.0,
            t_end: 1e-3,
            cooling: 0.99,
            steps_per_temp: None,
            w_mod: 0.5,
            w_pin: 0.5,
            seed: 0,
            init_attempts: 64,
        }
    }
}

impl SaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return bad("cooling rate must lie in (0, 1)");
        }
        if !(self.t_end > 0.0 && self.t_end < self.t_init) {
            return bad("temperatures must satisfy 0 < t_end < t_init");
        }
        if self.w_mod < 0.0 || self.w_pin < 0.0 || ((self.w_mod + self.w_pin) - 1.0).abs() > 1e-9 {
            return bad("objective weights must be non-negative and sum to 1");
        }
        Ok(())
    }

    /// Number of temperature levels in the schedule.
    pub fn temperature_levels(&self) -> usize {
        let mut t = self.t_init;
        let mut n = 0;
        while t > self.t_end {
            n += 1;
            t *= self.cooling;
        }
        n
    }
}

/// Near-square rectangle of about `area` cells that fits the canvas.
pub fn module_dims(area: u64, canvas: (usize, usize)) -> (usize, usize) {
    let target = (area as f64).max(1.0);
    let w = (target.sqrt().round() as usize).clamp(1, canvas.0);
    let h = ((target / w as f64).round() as usize).clamp(1, canvas.1);
    (w, h)
}

/// Metropolis rule: improvements always pass, a worse move passes when the
/// uniform draw `u` falls below `exp(-delta / temp)`.
#[inline]
pub fn metropolis_accept(delta: f64, temp: f64, u: f64) -> bool {
    delta <= 0.0 || u < (-delta / temp).exp()
}

fn area_order(netlist: &Netlist) -> Vec<ModuleId> {
    let mut order: Vec<ModuleId> = netlist.module_ids().collect();
    order.sort_by_key(|&m| (std::cmp::Reverse(netlist.module(m).area), m));
    order
}

/// Legal anchors whose left and bottom sides each touch the canvas edge or
/// another module.
fn settled_anchors(layout: &Layout, dims: (usize, usize), moving: ModuleId) -> Vec<CellCoord> {
    let canvas = layout.canvas();
    let taken = |x: usize, y: usize| canvas.get(x, y).is_some_and(|m| m != moving);
    position_mask(layout, dims, moving)
        .anchors()
        .filter(|a| {
            let left = a.x == 0 || (a.y..a.y + dims.1).any(|y| taken(a.x - 1, y));
            let below = a.y == 0 || (a.x..a.x + dims.0).any(|x| taken(x, a.y - 1));
            left && below
        })
        .collect()
}

/// Random start: modules in descending area order, each at a uniformly drawn
/// legal anchor among those resting against the edge or placed modules.
/// Retries the whole layout up to `init_attempts` times.
pub fn init_random(netlist: &Netlist, width: usize, height: usize, cfg: &SaConfig) -> Result<Layout> {
    let mut rng = stream(cfg.seed, Stream::Init);
    let order = area_order(netlist);
    'attempt: for _ in 0..cfg.init_attempts.max(1) {
        let mut layout = Layout::for_netlist(width, height, netlist);
        for &m in &order {
            let dims = module_dims(netlist.module(m).area, (width, height));
            let anchors = settled_anchors(&layout, dims, m);
            let Some(a) = anchors.choose(&mut rng) else {
                continue 'attempt;
            };
            layout.paint_rect(m, Rect::new(a.x, a.y, dims.0, dims.1));
        }
        layout.stage = Stage::Init;
        return Ok(layout);
    }
    Err(Error::InitFailure {
        attempts: cfg.init_attempts.max(1),
    })
}

/// Accept an externally produced layout as the Stage 1 start. Every module
/// of the netlist must be present with a rectangular region.
pub fn init_external(netlist: &Netlist, external: &Layout) -> Result<Layout> {
    external.validate()?;
    let mut layout = Layout::for_netlist(external.width(), external.height(), netlist);
    for (i, spec) in netlist.modules.iter().enumerate() {
        let ext = external
            .module_ids()
            .find(|&e| external.module(e).name == spec.name)
            .ok_or_else(|| Error::InvalidLayout(format!("module {} missing from external layout", spec.name)))?;
        let rect = external
            .bbox(ext)
            .filter(|_| external.is_rectangular(ext))
            .ok_or_else(|| Error::InvalidLayout(format!("module {} is not a rectangle", spec.name)))?;
        layout.paint_rect(ModuleId(i as u32), rect);
    }
    layout.stage = Stage::External;
    Ok(layout)
}

/// Extract per-module rectangles from a layout whose modules are all
/// rectangular.
fn module_rects(layout: &Layout) -> Result<Vec<Rect>> {
    layout
        .module_ids()
        .map(|m| {
            layout.bbox(m).filter(|_| layout.is_rectangular(m)).ok_or_else(|| {
                Error::InvalidLayout(format!("module {} is not a placed rectangle", layout.module(m).name))
            })
        })
        .collect()
}

/// Cached feedthrough terms for a layout of rectangles.
#[derive(Debug, Clone)]
struct FeedthroughCache {
    /// Twice the per-net FTmod, i.e. the feedthrough module count.
    net_counts: Vec<u32>,
    net_spans: Vec<Option<Rect>>,
    ftmod2: u64,
    pair_ce: Vec<usize>,
    ftpin: u64,
}

struct Evaluator<'a> {
    nets: &'a [Net],
    nets_by_module: Vec<Vec<usize>>,
    pairs: Vec<(ModuleId, ModuleId, u32)>,
    pairs_by_module: Vec<Vec<usize>>,
    pin_spacing: u32,
    width: usize,
    height: usize,
}

/// Pending cache updates for a trial move.
#[derive(Default)]
struct Trial {
    nets: Vec<(usize, Option<Rect>, u32)>,
    pairs: Vec<(usize, usize)>,
    ftmod2: u64,
    ftpin: u64,
}

impl<'a> Evaluator<'a> {
    fn new(netlist: &'a Netlist, params: &FeedthroughParams, width: usize, height: usize) -> Self {
        let n = netlist.modules.len();
        let pairs: Vec<_> = params
            .demands
            .iter()
            .filter(|(_, &y)| y > 0)
            .map(|(&(a, b), &y)| (a, b, y))
            .collect();
        let mut pairs_by_module = vec![Vec::new(); n];
        for (k, &(a, b, _)) in pairs.iter().enumerate() {
            pairs_by_module[a.index()].push(k);
            pairs_by_module[b.index()].push(k);
        }
        Self {
            nets: &netlist.nets,
            nets_by_module: netlist.nets_by_module(),
            pairs,
            pairs_by_module,
            pin_spacing: params.pin_spacing,
            width,
            height,
        }
    }

    fn span(&self, net: &Net, rects: &[Rect]) -> Option<Rect> {
        let pts = net
            .modules
            .iter()
            .map(|m| rects[m.index()].center())
            .chain(net.fixed_points.iter().copied());
        bbox_of(pts).map(|bb| span_cells(bb, self.width, self.height))
    }

    fn net_count(&self, net: &Net, span: Option<Rect>, rects: &[Rect]) -> u32 {
        let Some(span) = span else {
            return 0;
        };
        rects
            .iter()
            .enumerate()
            .filter(|(m, r)| r.intersects(&span) && !net.contains(ModuleId(*m as u32)))
            .count() as u32
    }

    fn pair_value(&self, ce: usize, demand: u32) -> u64 {
        crate::metrics::ftpin_value(self.pin_spacing, demand, ce)
    }

    fn full(&self, rects: &[Rect]) -> FeedthroughCache {
        let net_spans: Vec<_> = self.nets.iter().map(|n| self.span(n, rects)).collect();
        let net_counts: Vec<u32> = self
            .nets
            .iter()
            .zip(&net_spans)
            .map(|(n, &s)| self.net_count(n, s, rects))
            .collect();
        let pair_ce: Vec<usize> = self
            .pairs
            .iter()
            .map(|&(a, b, _)| rects[a.index()].touching_length(&rects[b.index()]))
            .collect();
        let ftpin = pair_ce
            .iter()
            .zip(&self.pairs)
            .map(|(&ce, &(_, _, y))| self.pair_value(ce, y))
            .sum();
        FeedthroughCache {
            ftmod2: net_counts.iter().map(|&c| c as u64).sum(),
            net_counts,
            net_spans,
            pair_ce,
            ftpin,
        }
    }

    /// Cache deltas after `moved` modules changed from `old` to their
    /// current rects.
    fn trial(&self, cache: &FeedthroughCache, rects: &[Rect], moved: &[(ModuleId, Rect)]) -> Trial {
        let mut t = Trial {
            ftmod2: cache.ftmod2,
            ftpin: cache.ftpin,
            ..Trial::default()
        };
        let mut touched: Vec<usize> = moved
            .iter()
            .flat_map(|(m, _)| self.nets_by_module[m.index()].iter().copied())
            .collect();
        touched.sort_unstable();
        touched.dedup();
        for &n in &touched {
            let net = &self.nets[n];
            let span = self.span(net, rects);
            let count = self.net_count(net, span, rects);
            t.ftmod2 = t.ftmod2 + count as u64 - cache.net_counts[n] as u64;
            t.nets.push((n, span, count));
        }
        for (n, net) in self.nets.iter().enumerate() {
            if touched.binary_search(&n).is_ok() {
                continue;
            }
            let Some(span) = cache.net_spans[n] else {
                continue;
            };
            let mut count = cache.net_counts[n] as i64;
            for &(m, old) in moved {
                if net.contains(m) {
                    continue;
                }
                count += rects[m.index()].intersects(&span) as i64 - old.intersects(&span) as i64;
            }
            if count != cache.net_counts[n] as i64 {
                t.ftmod2 = (t.ftmod2 as i64 + count - cache.net_counts[n] as i64) as u64;
                t.nets.push((n, Some(span), count as u32));
            }
        }
        let mut pair_ids: Vec<usize> = moved
            .iter()
            .flat_map(|(m, _)| self.pairs_by_module[m.index()].iter().copied())
            .collect();
        pair_ids.sort_unstable();
        pair_ids.dedup();
        for k in pair_ids {
            let (a, b, y) = self.pairs[k];
            let ce = rects[a.index()].touching_length(&rects[b.index()]);
            t.ftpin = t.ftpin + self.pair_value(ce, y) - self.pair_value(cache.pair_ce[k], y);
            t.pairs.push((k, ce));
        }
        t
    }

    fn commit(cache: &mut FeedthroughCache, t: Trial) {
        for (n, span, count) in t.nets {
            cache.net_spans[n] = span;
            cache.net_counts[n] = count;
        }
        for (k, ce) in t.pairs {
            cache.pair_ce[k] = ce;
        }
        cache.ftmod2 = t.ftmod2;
        cache.ftpin = t.ftpin;
    }

    fn hpwl(&self, rects: &[Rect]) -> f64 {
        self.nets
            .iter()
            .map(|net| {
                let pts = net
                    .modules
                    .iter()
                    .map(|m| rects[m.index()].center())
                    .chain(net.fixed_points.iter().copied());
                bbox_of(pts).map_or(0.0, |(x0, y0, x1, y1)| (x1 - x0) + (y1 - y0))
            })
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Accepted,
    Rejected,
    /// Legalization found no room; the prior layout was restored.
    NoRoom,
    Skipped,
}

/// Annealing state over a layout of rectangular modules.
pub struct Annealer<'a> {
    netlist: &'a Netlist,
    eval: Evaluator<'a>,
    module_nets: Vec<Vec<&'a Net>>,
    layout: Layout,
    rects: Vec<Rect>,
    /// Rank of each module in descending initial-area order.
    area_rank: Vec<usize>,
    objective: SaObjective,
    cache: FeedthroughCache,
    current: f64,
}

impl<'a> Annealer<'a> {
    pub fn new(netlist: &'a Netlist, params: &FeedthroughParams, initial: Layout, cfg: &SaConfig) -> Result<Self> {
        let rects = module_rects(&initial)?;
        let eval = Evaluator::new(netlist, params, initial.width(), initial.height());
        let cache = eval.full(&rects);
        let objective = SaObjective::new(cfg.w_mod, cfg.w_pin, cache.ftmod2 as f64 / 2.0, cache.ftpin as f64);
        let mut area_rank = vec![0; rects.len()];
        for (rank, m) in area_order(netlist).into_iter().enumerate() {
            area_rank[m.index()] = rank;
        }
        let module_nets = netlist
            .module_ids()
            .map(|m| netlist.nets.iter().filter(|n| n.contains(m)).collect())
            .collect();
        let current = objective.eval(cache.ftmod2 as f64 / 2.0, cache.ftpin as f64);
        Ok(Self {
            netlist,
            eval,
            module_nets,
            layout: initial,
            rects,
            area_rank,
            objective,
            cache,
            current,
        })
    }

    pub fn objective(&self) -> f64 {
        self.current
    }

    pub fn ftmod(&self) -> f64 {
        self.cache.ftmod2 as f64 / 2.0
    }

    pub fn ftpin(&self) -> u64 {
        self.cache.ftpin
    }

    pub fn hpwl(&self) -> f64 {
        self.eval.hpwl(&self.rects)
    }

    pub fn rects(&self) -> &[Rect] {
        &self.rects
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    fn restore(&mut self, saved: &[(ModuleId, Rect)]) {
        for &(m, _) in saved {
            self.layout.clear_module(m);
        }
        for &(m, r) in saved {
            self.layout.paint_rect(m, r);
            self.rects[m.index()] = r;
        }
    }

    /// Swap the anchors of two random modules, legalize, and accept or
    /// reject by the Metropolis rule at `temp`.
    pub fn step(&mut self, rng: &mut ChaCha8Rng, temp: f64) -> StepOutcome {
        let n = self.rects.len();
        if n < 2 {
            return StepOutcome::Skipped;
        }
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let (mi, mj) = (ModuleId(i as u32), ModuleId(j as u32));
        let (ri, rj) = (self.rects[i], self.rects[j]);
        let saved = [(mi, ri), (mj, rj)];
        self.layout.clear_module(mi);
        self.layout.clear_module(mj);

        let mut order = [
            (mi, Rect::new(rj.x, rj.y, ri.w, ri.h)),
            (mj, Rect::new(ri.x, ri.y, rj.w, rj.h)),
        ];
        order.sort_by_key(|(m, _)| self.area_rank[m.index()]);
        let mut illegal = Vec::with_capacity(2);
        for (m, want) in order {
            if self.layout.is_rect_free(&want) {
                self.layout.paint_rect(m, want);
                self.rects[m.index()] = want;
            } else {
                illegal.push(m);
            }
        }
        for m in illegal {
            let old = self.rects[m.index()];
            match greedy_place_among(&self.layout, m, (old.w, old.h), &self.module_nets[m.index()]) {
                Ok(a) => {
                    let r = Rect::new(a.x, a.y, old.w, old.h);
                    self.layout.paint_rect(m, r);
                    self.rects[m.index()] = r;
                }
                Err(_) => {
                    self.restore(&saved);
                    return StepOutcome::NoRoom;
                }
            }
        }

        let trial = self.eval.trial(&self.cache, &self.rects, &saved);
        let next = self.objective.eval(trial.ftmod2 as f64 / 2.0, trial.ftpin as f64);
        let delta = next - self.current;
        let accept = delta <= 0.0 || metropolis_accept(delta, temp, rng.gen::<f64>());
        if accept {
            Evaluator::commit(&mut self.cache, trial);
            self.current = next;
            StepOutcome::Accepted
        } else {
            self.restore(&saved);
            StepOutcome::Rejected
        }
    }

    fn snapshot(&self, rects: &[Rect], stage: Stage) -> Layout {
        let modules = self
            .netlist
            .modules
            .iter()
            .map(|m| ModuleLayout::new(m.name.clone(), m.components.clone()))
            .collect();
        let mut l = Layout::new(self.layout.width(), self.layout.height(), modules);
        for (i, r) in rects.iter().enumerate() {
            l.paint_rect(ModuleId(i as u32), *r);
        }
        l.stage = stage;
        l
    }
}

#[derive(Debug, Clone)]
pub struct Stage1Outcome {
    /// Best layout seen (objective, then HPWL).
    pub best: Layout,
    /// Layout at the end of the schedule.
    pub last: Layout,
    /// Best objective after each temperature level.
    pub trace: Vec<f64>,
    pub accepted: usize,
    pub rejected: usize,
    pub no_room: usize,
}

/// Anneal from `initial` over the full temperature schedule.
pub fn run_stage1(
    netlist: &Netlist,
    params: &FeedthroughParams,
    initial: Layout,
    cfg: &SaConfig,
) -> Result<Stage1Outcome> {
    cfg.validate()?;
    let mut rng = stream(cfg.seed, Stream::Anneal);
    let mut sa = Annealer::new(netlist, params, initial, cfg)?;
    let steps = cfg.steps_per_temp.unwrap_or(netlist.modules.len());
    let mut best_rects = sa.rects.clone();
    let mut best = (sa.current, sa.hpwl());
    let mut trace = Vec::new();
    let (mut accepted, mut rejected, mut no_room) = (0, 0, 0);
    let mut t = cfg.t_init;
    while t > cfg.t_end && steps > 0 {
        for _ in 0..steps {
            match sa.step(&mut rng, t) {
                StepOutcome::Accepted => {
                    accepted += 1;
                    if sa.current <= best.0 {
                        let h = sa.hpwl();
                        if sa.current < best.0 || h < best.1 {
                            best = (sa.current, h);
                            best_rects.copy_from_slice(&sa.rects);
                        }
                    }
                }
                StepOutcome::Rejected => rejected += 1,
                StepOutcome::NoRoom => no_room += 1,
                StepOutcome::Skipped => {}
            }
        }
        trace.push(best.0);
        t *= cfg.cooling;
    }
    Ok(Stage1Outcome {
        best: sa.snapshot(&best_rects, Stage::Stage1),
        last: sa.snapshot(&sa.rects, Stage::Stage1),
        trace,
        accepted,
        rejected,
        no_room,
    })
}
