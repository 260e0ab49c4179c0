//! Evaluation quantities: HPWL, feedthrough module and pin counts, whitespace
//! and placement density, plus the normalized annealing objective.
//!
//! Module reference points are region centroids. A net's feedthrough box is
//! the bounding box of its member centroids (and fixed terminal points),
//! widened to the rectangle of cells it spans.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::geom::{ModuleId, Rect};
use crate::layout::Layout;
use crate::netlist::{Net, Netlist};

/// Pin spacing and per-pair pin demand.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedthroughParams {
    /// Minimum pin spacing in cells.
    pub pin_spacing: u32,
    /// Pins required between each unordered module pair, keyed `(low, high)`.
    pub demands: BTreeMap<(ModuleId, ModuleId), u32>,
}

impl FeedthroughParams {
    /// Demand is the number of nets shared by each pair.
    pub fn from_netlist(netlist: &Netlist, pin_spacing: u32) -> Self {
        assert!(pin_spacing >= 1, "pin spacing must be at least one cell");
        Self {
            pin_spacing,
            demands: netlist.pair_demands(),
        }
    }

    pub fn demand(&self, a: ModuleId, b: ModuleId) -> u32 {
        let key = if a < b { (a, b) } else { (b, a) };
        self.demands.get(&key).copied().unwrap_or(0)
    }

    /// Demanded pairs grouped by module, each entry `(partner, demand)`.
    pub fn partners(&self, modules: usize) -> Vec<Vec<(ModuleId, u32)>> {
        let mut out = vec![Vec::new(); modules];
        for (&(a, b), &y) in &self.demands {
            if y > 0 {
                out[a.index()].push((b, y));
                out[b.index()].push((a, y));
            }
        }
        out
    }
}

/// Pins that do not fit on a shared edge of `common_edge` cells.
#[inline]
pub fn ftpin_value(pin_spacing: u32, demand: u32, common_edge: usize) -> u64 {
    let need = pin_spacing as i64 * demand as i64 - common_edge as i64;
    if need <= 0 {
        0
    } else {
        (need as u64).div_ceil(pin_spacing as u64)
    }
}

/// Axis-aligned box `(x0, y0, x1, y1)` over the net's reference points, or
/// `None` when the net has none.
pub fn net_bbox(layout: &Layout, net: &Net) -> Option<(f64, f64, f64, f64)> {
    let points = net
        .modules
        .iter()
        .filter_map(|&m| layout.centroid(m))
        .chain(net.fixed_points.iter().copied());
    bbox_of(points)
}

pub(crate) fn bbox_of(points: impl Iterator<Item = (f64, f64)>) -> Option<(f64, f64, f64, f64)> {
    points.fold(None, |acc, (x, y)| {
        Some(match acc {
            None => (x, y, x, y),
            Some((x0, y0, x1, y1)) => (x0.min(x), y0.min(y), x1.max(x), y1.max(y)),
        })
    })
}

/// Cells spanned by a continuous box: cell `k` is included when the open
/// interval `(k, k+1)` meets `[lo, hi]`; a degenerate span on a grid line
/// keeps the cell above/right of it. Clamped to the canvas.
pub fn span_cells(bbox: (f64, f64, f64, f64), width: usize, height: usize) -> Rect {
    let axis = |lo: f64, hi: f64, limit: usize| {
        let a = (lo.floor().max(0.0) as usize).min(limit - 1);
        let b = ((hi.ceil() as usize).saturating_sub(1)).min(limit - 1).max(a);
        (a, b)
    };
    let (x0, x1) = axis(bbox.0, bbox.2, width);
    let (y0, y1) = axis(bbox.1, bbox.3, height);
    Rect::new(x0, y0, x1 - x0 + 1, y1 - y0 + 1)
}

pub fn net_hpwl(layout: &Layout, net: &Net) -> Result<f64> {
    let mut points = Vec::with_capacity(net.modules.len() + net.fixed_points.len());
    for &m in &net.modules {
        let c = layout
            .centroid(m)
            .ok_or_else(|| Error::InvalidLayout(format!("net member {} has an empty region", layout.module(m).name)))?;
        points.push(c);
    }
    points.extend(net.fixed_points.iter().copied());
    Ok(bbox_of(points.into_iter()).map_or(0.0, |(x0, y0, x1, y1)| (x1 - x0) + (y1 - y0)))
}

/// Sum of half-perimeters of the nets' centroid bounding boxes, in cells.
pub fn hpwl(layout: &Layout, nets: &[Net]) -> Result<f64> {
    nets.iter().map(|n| net_hpwl(layout, n)).sum()
}

/// Half the number of non-member modules that own a cell inside the net's
/// feedthrough box.
pub fn ftmod(layout: &Layout, net: &Net) -> f64 {
    let mut stamp = vec![false; layout.module_count()];
    ftmod_with(layout, net, &mut stamp) as f64 / 2.0
}

fn ftmod_with(layout: &Layout, net: &Net, seen: &mut [bool]) -> usize {
    let Some(bb) = net_bbox(layout, net) else {
        return 0;
    };
    let span = span_cells(bb, layout.width(), layout.height());
    seen.iter_mut().for_each(|s| *s = false);
    let mut count = 0;
    let canvas = layout.canvas();
    for y in span.y..span.top() {
        for x in span.x..span.right() {
            if let Some(m) = canvas.get(x, y) {
                if !seen[m.index()] {
                    seen[m.index()] = true;
                    if !net.contains(m) {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

pub fn ftmod_total(layout: &Layout, nets: &[Net]) -> f64 {
    let mut seen = vec![false; layout.module_count()];
    let twice: usize = nets.iter().map(|n| ftmod_with(layout, n, &mut seen)).sum();
    twice as f64 / 2.0
}

/// Shared unit-edge length between every pair of touching modules, keyed
/// `(low, high)`. One pass over the canvas.
pub fn common_edges(layout: &Layout) -> HashMap<(ModuleId, ModuleId), usize> {
    let canvas = layout.canvas();
    let mut out = HashMap::new();
    let mut bump = |a: Option<ModuleId>, b: Option<ModuleId>| {
        if let (Some(a), Some(b)) = (a, b) {
            if a != b {
                let key = if a < b { (a, b) } else { (b, a) };
                *out.entry(key).or_insert(0) += 1;
            }
        }
    };
    for y in 0..canvas.height() {
        for x in 0..canvas.width() {
            let here = canvas.get(x, y);
            if x + 1 < canvas.width() {
                bump(here, canvas.get(x + 1, y));
            }
            if y + 1 < canvas.height() {
                bump(here, canvas.get(x, y + 1));
            }
        }
    }
    out
}

/// Feedthrough pins between two modules.
pub fn ftpin(layout: &Layout, i: ModuleId, j: ModuleId, params: &FeedthroughParams) -> Result<u64> {
    assert_ne!(i, j, "ftpin needs two distinct modules");
    let demand = params.demand(i, j);
    if demand == 0 {
        return Ok(0);
    }
    let ce = match (layout.region(i), layout.region(j)) {
        (Ok(a), Ok(b)) => a.common_edge_length(&b)?,
        _ => 0,
    };
    Ok(ftpin_value(params.pin_spacing, demand, ce))
}

pub fn ftpin_total(layout: &Layout, params: &FeedthroughParams) -> u64 {
    let ce = common_edges(layout);
    params
        .demands
        .iter()
        .map(|(key, &y)| ftpin_value(params.pin_spacing, y, ce.get(key).copied().unwrap_or(0)))
        .sum()
}

/// Blank cells as a percentage of the canvas.
pub fn whitespace_pct(layout: &Layout) -> f64 {
    100.0 * layout.blank_count() as f64 / layout.canvas().cell_count() as f64
}

/// Placed component area over total component area; 1 for a module
/// without components.
pub fn pd(layout: &Layout, id: ModuleId) -> f64 {
    let m = layout.module(id);
    let total = m.component_area();
    if total == 0 {
        1.0
    } else {
        m.placed_area() as f64 / total as f64
    }
}

/// Component-area-weighted placement density over all modules, in percent.
pub fn pd_total(layout: &Layout) -> f64 {
    let (placed, total) = layout.modules().iter().fold((0usize, 0usize), |(p, t), m| {
        (p + m.placed_area(), t + m.component_area())
    });
    if total == 0 {
        100.0
    } else {
        100.0 * placed as f64 / total as f64
    }
}

/// Weighted feedthrough objective normalized by reference values (taken from
/// the initial layout), so that the reference layout scores exactly 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaObjective {
    pub w_mod: f64,
    pub w_pin: f64,
    ftmod_ref: f64,
    ftpin_ref: f64,
}

impl SaObjective {
    pub fn new(w_mod: f64, w_pin: f64, ftmod_ref: f64, ftpin_ref: f64) -> Self {
        let norm = |v: f64| if v > 0.0 { v } else { 1.0 };
        Self {
            w_mod,
            w_pin,
            ftmod_ref: norm(ftmod_ref),
            ftpin_ref: norm(ftpin_ref),
        }
    }

    pub fn for_layout(w_mod: f64, w_pin: f64, layout: &Layout, nets: &[Net], params: &FeedthroughParams) -> Self {
        Self::new(
            w_mod,
            w_pin,
            ftmod_total(layout, nets),
            ftpin_total(layout, params) as f64,
        )
    }

    #[inline]
    pub fn eval(&self, ftmod: f64, ftpin: f64) -> f64 {
        self.w_mod * (ftmod / self.ftmod_ref) + self.w_pin * (ftpin / self.ftpin_ref)
    }
}

pub fn sa_objective(layout: &Layout, nets: &[Net], params: &FeedthroughParams, objective: &SaObjective) -> f64 {
    objective.eval(ftmod_total(layout, nets), ftpin_total(layout, params) as f64)
}

/// One row of the report table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricRow {
    pub hpwl: f64,
    pub ftpin: u64,
    pub ftmod: f64,
    pub ws_pct: f64,
    pub pd_pct: f64,
    pub rt_s: f64,
}

impl MetricRow {
    pub fn measure(layout: &Layout, netlist: &Netlist, params: &FeedthroughParams, rt_s: f64) -> Result<Self> {
        Ok(Self {
            hpwl: hpwl(layout, &netlist.nets)?,
            ftpin: ftpin_total(layout, params),
            ftmod: ftmod_total(layout, &netlist.nets),
            ws_pct: whitespace_pct(layout),
            pd_pct: pd_total(layout),
            rt_s,
        })
    }
}
