//! Layout snapshot: canvas ownership plus per-module component placement.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geom::{CellCoord, GridCanvas, ModuleId, Rect, RectilinearRegion};
use crate::netlist::{Component, Netlist};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Init,
    External,
    Stage1,
    Stage2,
    Stage3,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Init => "init",
            Stage::External => "external",
            Stage::Stage1 => "stage1",
            Stage::Stage2 => "stage1+2",
            Stage::Stage3 => "stage1+2+3",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "init" => Stage::Init,
            "external" => Stage::External,
            "stage1" => Stage::Stage1,
            "stage1+2" => Stage::Stage2,
            "stage1+2+3" => Stage::Stage3,
            other => return Err(Error::InvalidLayout(format!("unknown stage tag `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleLayout {
    pub name: String,
    pub components: Vec<Component>,
    /// Placed rectangle per component, `None` while unplaced. A placed rect
    /// may be the component rotated by 90 degrees.
    pub placements: Vec<Option<Rect>>,
}

impl ModuleLayout {
    pub fn new(name: impl Into<String>, components: Vec<Component>) -> Self {
        let placements = vec![None; components.len()];
        Self {
            name: name.into(),
            components,
            placements,
        }
    }

    pub fn component_area(&self) -> usize {
        self.components.iter().map(Component::area).sum()
    }

    pub fn placed_area(&self) -> usize {
        self.components
            .iter()
            .zip(&self.placements)
            .filter(|(_, p)| p.is_some())
            .map(|(c, _)| c.area())
            .sum()
    }

    pub fn clear_placements(&mut self) {
        self.placements.iter_mut().for_each(|p| *p = None);
    }
}

/// Running sums that give O(1) centroid and cell count per module.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct RegionStats {
    count: usize,
    /// Sum of doubled cell-center coordinates, `2x + 1`.
    sum_x2: u64,
    sum_y2: u64,
    bbox: Option<Rect>,
}

impl RegionStats {
    fn add(&mut self, c: CellCoord) {
        self.count += 1;
        self.sum_x2 += 2 * c.x as u64 + 1;
        self.sum_y2 += 2 * c.y as u64 + 1;
        self.bbox = Some(match self.bbox {
            None => Rect::new(c.x, c.y, 1, 1),
            Some(b) => {
                let x0 = b.x.min(c.x);
                let y0 = b.y.min(c.y);
                let x1 = b.right().max(c.x + 1);
                let y1 = b.top().max(c.y + 1);
                Rect::new(x0, y0, x1 - x0, y1 - y0)
            }
        });
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub stage: Stage,
    canvas: GridCanvas,
    modules: Vec<ModuleLayout>,
    stats: Vec<RegionStats>,
}

impl Layout {
    pub fn new(width: usize, height: usize, modules: Vec<ModuleLayout>) -> Self {
        let stats = vec![RegionStats::default(); modules.len()];
        Self {
            stage: Stage::Init,
            canvas: GridCanvas::new(width, height),
            modules,
            stats,
        }
    }

    /// Empty layout whose modules carry the netlist's components.
    pub fn for_netlist(width: usize, height: usize, netlist: &Netlist) -> Self {
        let modules = netlist
            .modules
            .iter()
            .map(|m| ModuleLayout::new(m.name.clone(), m.components.clone()))
            .collect();
        Self::new(width, height, modules)
    }

    pub fn canvas(&self) -> &GridCanvas {
        &self.canvas
    }

    pub fn width(&self) -> usize {
        self.canvas.width()
    }

    pub fn height(&self) -> usize {
        self.canvas.height()
    }

    pub fn module_count(&self) -> usize {
        self.modules.len()
    }

    pub fn module_ids(&self) -> impl Iterator<Item = ModuleId> {
        (0..self.modules.len() as u32).map(ModuleId)
    }

    pub fn modules(&self) -> &[ModuleLayout] {
        &self.modules
    }

    pub fn module(&self, id: ModuleId) -> &ModuleLayout {
        &self.modules[id.index()]
    }

    pub fn module_mut(&mut self, id: ModuleId) -> &mut ModuleLayout {
        &mut self.modules[id.index()]
    }

    pub fn cell_count(&self, id: ModuleId) -> usize {
        self.stats[id.index()].count
    }

    /// Tight bounding rect of the module's cells.
    pub fn bbox(&self, id: ModuleId) -> Option<Rect> {
        self.stats[id.index()].bbox
    }

    /// Mean of the module's cell centers.
    pub fn centroid(&self, id: ModuleId) -> Option<(f64, f64)> {
        let s = &self.stats[id.index()];
        (s.count > 0).then(|| {
            let n = 2.0 * s.count as f64;
            (s.sum_x2 as f64 / n, s.sum_y2 as f64 / n)
        })
    }

    pub fn is_rectangular(&self, id: ModuleId) -> bool {
        let s = &self.stats[id.index()];
        s.bbox.is_some_and(|b| b.area() == s.count)
    }

    /// Component area over the module's current cell count.
    pub fn component_area_ratio(&self, id: ModuleId) -> f64 {
        let cells = self.cell_count(id);
        let comp = self.module(id).component_area();
        if cells == 0 {
            if comp == 0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            comp as f64 / cells as f64
        }
    }

    /// Cells owned by the module in row-major order.
    pub fn region_cells(&self, id: ModuleId) -> Vec<CellCoord> {
        let Some(bb) = self.bbox(id) else {
            return Vec::new();
        };
        bb.cells().filter(|&c| self.canvas.at(c) == Some(id)).collect()
    }

    pub fn region(&self, id: ModuleId) -> Result<RectilinearRegion> {
        RectilinearRegion::new(self.region_cells(id))
    }

    pub fn blank_count(&self) -> usize {
        self.canvas.blank_count()
    }

    pub fn is_rect_free(&self, r: &Rect) -> bool {
        self.canvas.contains_rect(r) && r.cells().all(|c| self.canvas.at(c).is_none())
    }

    /// Assign every cell of `r` to the module. Cells must be blank.
    pub fn paint_rect(&mut self, id: ModuleId, r: Rect) {
        debug_assert!(self.is_rect_free(&r), "painting over owned cells");
        for y in r.y..r.top() {
            for x in r.x..r.right() {
                self.canvas.set(x, y, Some(id));
            }
        }
        let s = &mut self.stats[id.index()];
        // closed-form update so Stage 1 moves stay cheap
        s.count += r.area();
        s.sum_x2 += (r.h as u64) * (r.x as u64 * 2 * r.w as u64 + (r.w as u64) * (r.w as u64));
        s.sum_y2 += (r.w as u64) * (r.y as u64 * 2 * r.h as u64 + (r.h as u64) * (r.h as u64));
        s.bbox = Some(match s.bbox {
            None => r,
            Some(b) => {
                let x0 = b.x.min(r.x);
                let y0 = b.y.min(r.y);
                let x1 = b.right().max(r.right());
                let y1 = b.top().max(r.top());
                Rect::new(x0, y0, x1 - x0, y1 - y0)
            }
        });
    }

    /// Assign blank cells to the module.
    pub fn assign_cells(&mut self, id: ModuleId, cells: impl IntoIterator<Item = CellCoord>) {
        for c in cells {
            debug_assert!(self.canvas.at(c).is_none(), "assigning owned cell {c:?}");
            self.canvas.set(c.x, c.y, Some(id));
            self.stats[id.index()].add(c);
        }
    }

    /// Release all of the module's cells. Component placements are dropped.
    pub fn clear_module(&mut self, id: ModuleId) {
        if let Some(bb) = self.bbox(id) {
            for y in bb.y..bb.top() {
                for x in bb.x..bb.right() {
                    if self.canvas.get(x, y) == Some(id) {
                        self.canvas.set(x, y, None);
                    }
                }
            }
        }
        self.stats[id.index()] = RegionStats::default();
        self.modules[id.index()].clear_placements();
    }

    /// Move cells between modules, or to/from blank when an end is `None`.
    pub fn transfer(&mut self, cells: &[CellCoord], to: Option<ModuleId>) {
        let mut losers = BTreeSet::new();
        for &c in cells {
            if let Some(prev) = self.canvas.at(c) {
                losers.insert(prev);
            }
            self.canvas.set(c.x, c.y, to);
            if let Some(t) = to {
                self.stats[t.index()].add(c);
            }
        }
        for id in losers {
            if Some(id) != to {
                self.recompute_stats(id);
            }
        }
    }

    fn recompute_stats(&mut self, id: ModuleId) {
        let mut s = RegionStats::default();
        if let Some(bb) = self.stats[id.index()].bbox {
            for c in bb.cells() {
                if self.canvas.at(c) == Some(id) {
                    s.add(c);
                }
            }
        }
        self.stats[id.index()] = s;
    }

    /// Check canvas/statistics agreement, region connectivity and component
    /// containment and disjointness.
    pub fn validate(&self) -> Result<()> {
        let mut fresh = vec![RegionStats::default(); self.modules.len()];
        for y in 0..self.height() {
            for x in 0..self.width() {
                if let Some(id) = self.canvas.get(x, y) {
                    let s = fresh
                        .get_mut(id.index())
                        .ok_or_else(|| Error::InvalidLayout(format!("cell ({x},{y}) owned by unknown module {id}")))?;
                    s.add(CellCoord::new(x, y));
                }
            }
        }
        for id in self.module_ids() {
            let name = &self.module(id).name;
            if fresh[id.index()] != self.stats[id.index()] {
                return Err(Error::InvalidLayout(format!("stale region statistics for {name}")));
            }
            let cells = self.region_cells(id);
            if !cells.is_empty() && !cells_connected(&cells) {
                return Err(Error::InvalidLayout(format!("region of {name} is not connected")));
            }
            let m = self.module(id);
            if m.placements.len() != m.components.len() {
                return Err(Error::InvalidLayout(format!("placement count mismatch for {name}")));
            }
            let placed: Vec<Rect> = m.placements.iter().flatten().copied().collect();
            for (c, p) in m.components.iter().zip(&m.placements) {
                if let Some(r) = p {
                    let fits = (r.w == c.w && r.h == c.h) || (r.w == c.h && r.h == c.w);
                    if !fits {
                        return Err(Error::InvalidLayout(format!("component dims changed in {name}")));
                    }
                    if !self.canvas.contains_rect(r) || r.cells().any(|cell| self.canvas.at(cell) != Some(id)) {
                        return Err(Error::InvalidLayout(format!("component outside region of {name}")));
                    }
                }
            }
            for (i, a) in placed.iter().enumerate() {
                if placed[i + 1..].iter().any(|b| a.intersects(b)) {
                    return Err(Error::InvalidLayout(format!("overlapping components in {name}")));
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn cells_connected(cells: &[CellCoord]) -> bool {
    RectilinearRegion::new(cells.to_vec()).is_ok() || cells.is_empty()
}

/// Connectivity check for a module's cells restricted to a local window,
/// skipping `removed` cells. Avoids allocating a full region.
pub(crate) fn connected_without(layout: &Layout, id: ModuleId, removed: &[CellCoord]) -> bool {
    let Some(bb) = layout.bbox(id) else {
        return true;
    };
    let idx = |c: CellCoord| (c.y - bb.y) * bb.w + (c.x - bb.x);
    let mut member = vec![false; bb.area()];
    let mut total = 0;
    for c in bb.cells() {
        if layout.canvas().at(c) == Some(id) {
            member[idx(c)] = true;
            total += 1;
        }
    }
    for &c in removed {
        if bb.contains(c) && member[idx(c)] {
            member[idx(c)] = false;
            total -= 1;
        }
    }
    let Some(start) = bb.cells().find(|&c| member[idx(c)]) else {
        return false;
    };
    let mut seen = vec![false; bb.area()];
    seen[idx(start)] = true;
    let mut queue = VecDeque::from([start]);
    let mut reached = 1;
    while let Some(c) = queue.pop_front() {
        for n in c.neighbors() {
            if bb.contains(n) && member[idx(n)] && !seen[idx(n)] {
                seen[idx(n)] = true;
                reached += 1;
                queue.push_back(n);
            }
        }
    }
    reached == total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_module_layout() -> Layout {
        let mods = vec![ModuleLayout::new("a", vec![]), ModuleLayout::new("b", vec![])];
        Layout::new(6, 4, mods)
    }

    #[test]
    fn paint_rect_stats_match_cellwise() {
        let mut l = two_module_layout();
        l.paint_rect(ModuleId(0), Rect::new(1, 1, 3, 2));
        assert_eq!(l.cell_count(ModuleId(0)), 6);
        assert_eq!(l.centroid(ModuleId(0)), Some((2.5, 2.0)));
        assert!(l.is_rectangular(ModuleId(0)));
        l.validate().unwrap();
    }

    #[test]
    fn transfer_recomputes_loser() {
        let mut l = two_module_layout();
        l.paint_rect(ModuleId(0), Rect::new(0, 0, 4, 2));
        l.transfer(&[CellCoord::new(3, 0), CellCoord::new(3, 1)], Some(ModuleId(1)));
        assert_eq!(l.bbox(ModuleId(0)), Some(Rect::new(0, 0, 3, 2)));
        assert_eq!(l.bbox(ModuleId(1)), Some(Rect::new(3, 0, 1, 2)));
        l.validate().unwrap();
        assert!(connected_without(&l, ModuleId(0), &[CellCoord::new(0, 0)]));
        assert!(!connected_without(
            &l,
            ModuleId(0),
            &[CellCoord::new(1, 0), CellCoord::new(1, 1)]
        ));
    }

    #[test]
    fn clear_module_releases_cells() {
        let mut l = two_module_layout();
        l.paint_rect(ModuleId(1), Rect::new(2, 2, 2, 2));
        l.clear_module(ModuleId(1));
        assert_eq!(l.blank_count(), 24);
        assert_eq!(l.centroid(ModuleId(1)), None);
        l.validate().unwrap();
    }
}
