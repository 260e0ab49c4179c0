//! Cross-stage optimization: best-first tree search that packs each module's
//! components into convex corners of its free space, then boundary
//! refinement that borrows strips from neighbors for macros left unplaced.

use rayon::prelude::*;

use crate::geom::{aspect_ratio, vertex_corners, CellCoord, ModuleId, Rect};
use crate::layout::{connected_without, Layout, Stage};
use crate::netlist::Component;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlaceConfig {
    pub allow_rotation: bool,
    /// Maximum children kept per expansion.
    pub expand_cap: usize,
    pub refine: bool,
}

impl Default for PlaceConfig {
    fn default() -> Self {
        Self {
            allow_rotation: true,
            expand_cap: 64,
            refine: true,
        }
    }
}

/// Free cells of one module inside a local window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreeSpace {
    window: Rect,
    free: Vec<bool>,
}

impl FreeSpace {
    pub fn from_rect(r: Rect) -> Self {
        Self {
            window: r,
            free: vec![true; r.area()],
        }
    }

    pub fn from_cells(window: Rect, cells: impl IntoIterator<Item = CellCoord>) -> Self {
        let mut free = vec![false; window.area()];
        for c in cells {
            assert!(window.contains(c), "cell {c:?} outside window");
            free[(c.y - window.y) * window.w + (c.x - window.x)] = true;
        }
        Self { window, free }
    }

    /// Cells of a module not covered by its placed components.
    pub fn of_module(layout: &Layout, id: ModuleId) -> Option<Self> {
        let window = layout.bbox(id)?;
        let mut fs = Self::from_cells(window, layout.region_cells(id));
        for r in layout.module(id).placements.iter().flatten() {
            fs.occupy(*r);
        }
        Some(fs)
    }

    pub fn window(&self) -> Rect {
        self.window
    }

    #[inline]
    pub fn is_free(&self, x: isize, y: isize) -> bool {
        let w = &self.window;
        if x < w.x as isize || y < w.y as isize {
            return false;
        }
        let (x, y) = (x as usize, y as usize);
        x < w.right() && y < w.top() && self.free[(y - w.y) * w.w + (x - w.x)]
    }

    pub fn rect_free(&self, r: &Rect) -> bool {
        self.window.contains_rect(r)
            && (r.y..r.top()).all(|y| {
                let row = (y - self.window.y) * self.window.w;
                self.free[row + r.x - self.window.x..row + r.right() - self.window.x]
                    .iter()
                    .all(|&f| f)
            })
    }

    pub fn occupy(&mut self, r: Rect) {
        for y in r.y..r.top() {
            let row = (y - self.window.y) * self.window.w;
            for f in &mut self.free[row + r.x - self.window.x..row + r.right() - self.window.x] {
                *f = false;
            }
        }
    }

    pub fn free_count(&self) -> usize {
        self.free.iter().filter(|&&f| f).count()
    }

    pub fn free_cells(&self) -> impl Iterator<Item = CellCoord> + '_ {
        self.window.cells().filter(|c| self.is_free(c.x as isize, c.y as isize))
    }

    #[inline]
    fn vertex(&self, vx: isize, vy: isize) -> usize {
        vertex_corners(
            self.is_free(vx - 1, vy - 1),
            self.is_free(vx, vy - 1),
            self.is_free(vx - 1, vy),
            self.is_free(vx, vy),
        )
    }

    /// Outline vertices of the free cells.
    pub fn corner_count(&self) -> usize {
        let w = &self.window;
        let mut n = 0;
        for vy in w.y..=w.top() {
            for vx in w.x..=w.right() {
                n += self.vertex(vx as isize, vy as isize);
            }
        }
        n
    }

    /// Change in [`Self::corner_count`] if `r` (currently free) were occupied.
    /// Only lattice points on the rectangle boundary can change.
    pub fn corner_delta(&self, r: &Rect) -> isize {
        let in_rect = |x: isize, y: isize| {
            x >= r.x as isize && y >= r.y as isize && x < r.right() as isize && y < r.top() as isize
        };
        let after = |x: isize, y: isize| self.is_free(x, y) && !in_rect(x, y);
        let mut delta = 0isize;
        let mut visit = |vx: isize, vy: isize| {
            let before = self.vertex(vx, vy) as isize;
            let now = vertex_corners(
                after(vx - 1, vy - 1),
                after(vx, vy - 1),
                after(vx - 1, vy),
                after(vx, vy),
            ) as isize;
            delta += now - before;
        };
        let (x0, y0, x1, y1) = (r.x as isize, r.y as isize, r.right() as isize, r.top() as isize);
        for vx in x0..=x1 {
            visit(vx, y0);
            if y1 != y0 {
                visit(vx, y1);
            }
        }
        for vy in y0 + 1..y1 {
            visit(x0, vy);
            if x1 != x0 {
                visit(x1, vy);
            }
        }
        delta
    }
}

fn orientations(c: &Component, allow_rotation: bool) -> Vec<(usize, usize)> {
    // landscape first
    let (long, short) = if c.w >= c.h { (c.w, c.h) } else { (c.h, c.w) };
    if allow_rotation {
        if long == short {
            vec![(long, short)]
        } else {
            vec![(long, short), (short, long)]
        }
    } else {
        vec![(c.w, c.h)]
    }
}

/// Rects of the given dims that sit inside the free space flush against a
/// convex corner of its outline. Sorted by anchor `(y, x)`, landscape
/// orientation first on equal anchors; duplicates removed.
pub fn enumerate_corner_placements(free: &FreeSpace, dims: &[(usize, usize)]) -> Vec<Rect> {
    let w = free.window;
    let mut out = Vec::new();
    for vy in w.y..=w.top() {
        for vx in w.x..=w.right() {
            let (x, y) = (vx as isize, vy as isize);
            let ll = free.is_free(x - 1, y - 1);
            let lr = free.is_free(x, y - 1);
            let ul = free.is_free(x - 1, y);
            let ur = free.is_free(x, y);
            let n = ll as u8 + lr as u8 + ul as u8 + ur as u8;
            // convex corners: a lone free quadrant, or either cell of a diagonal pair
            let convex = n == 1 || (n == 2 && ll == ur);
            if !convex {
                continue;
            }
            for &(dw, dh) in dims {
                let mut push = |rx: Option<usize>, ry: Option<usize>| {
                    if let (Some(rx), Some(ry)) = (rx, ry) {
                        let r = Rect::new(rx, ry, dw, dh);
                        if free.rect_free(&r) {
                            out.push(r);
                        }
                    }
                };
                if ur {
                    push(Some(vx), Some(vy));
                }
                if ul {
                    push(vx.checked_sub(dw), Some(vy));
                }
                if lr {
                    push(Some(vx), vy.checked_sub(dh));
                }
                if ll {
                    push(vx.checked_sub(dw), vy.checked_sub(dh));
                }
            }
        }
    }
    out.sort_by_key(|r| (r.y, r.x, r.w < r.h));
    out.dedup();
    out
}

/// Partial placement inside one module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchNode {
    pub placements: Vec<Option<Rect>>,
    pub free: FreeSpace,
    pub placed_area: usize,
}

impl SearchNode {
    pub fn root(free: FreeSpace, components: usize) -> Self {
        Self {
            placements: vec![None; components],
            free,
            placed_area: 0,
        }
    }

    fn place(&mut self, idx: usize, r: Rect, area: usize) {
        self.free.occupy(r);
        self.placements[idx] = Some(r);
        self.placed_area += area;
    }

    /// Placement density as a fraction of `total` component area.
    pub fn value(&self, total: usize) -> f64 {
        if total == 0 {
            1.0
        } else {
            self.placed_area as f64 / total as f64
        }
    }
}

fn by_area_desc(components: &[Component]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..components.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(components[i].area()), i));
    order
}

/// Greedy rollout from `node`: remaining components largest first, each at
/// the corner placement that adds the fewest outline corners; components
/// with no corner placement are skipped.
pub fn simulate(node: &SearchNode, components: &[Component], allow_rotation: bool) -> SearchNode {
    let mut out = node.clone();
    for i in by_area_desc(components) {
        if out.placements[i].is_some() {
            continue;
        }
        let dims = orientations(&components[i], allow_rotation);
        let cands = enumerate_corner_placements(&out.free, &dims);
        let best = cands
            .iter()
            .map(|r| (out.free.corner_delta(r), *r))
            .min_by_key(|&(d, _)| d);
        if let Some((_, r)) = best {
            out.place(i, r, components[i].area());
        }
    }
    out
}

/// Best-first tree search for one module. Returns the committed node whose
/// placements should be adopted.
pub fn place_components(free: FreeSpace, components: &[Component], cfg: &PlaceConfig) -> SearchNode {
    let total: usize = components.iter().map(Component::area).sum();
    let root = SearchNode::root(free, components.len());
    if total == 0 {
        return root;
    }
    let mut best = simulate(&root, components, cfg.allow_rotation);
    if best.placed_area == total {
        return best;
    }
    let order = by_area_desc(components);
    let mut node = root;
    loop {
        let mut children = Vec::new();
        'fill: for &i in &order {
            if node.placements[i].is_some() {
                continue;
            }
            let dims = orientations(&components[i], cfg.allow_rotation);
            for r in enumerate_corner_placements(&node.free, &dims) {
                if children.len() == cfg.expand_cap {
                    break 'fill;
                }
                let mut child = node.clone();
                child.place(i, r, components[i].area());
                children.push(child);
            }
        }
        if children.is_empty() {
            break;
        }
        let mut next: Option<(usize, SearchNode)> = None;
        for child in children {
            let rollout = simulate(&child, components, cfg.allow_rotation);
            if rollout.placed_area == total {
                return rollout;
            }
            if rollout.placed_area > best.placed_area {
                best = rollout.clone();
            }
            if next.as_ref().is_none_or(|(v, _)| rollout.placed_area > *v) {
                next = Some((rollout.placed_area, child));
            }
        }
        node = next.expect("children is non-empty").1;
    }
    best
}

/// Run the tree search for one module of a layout and adopt its result.
pub fn place_module(layout: &mut Layout, id: ModuleId, cfg: &PlaceConfig) {
    let Some(found) = search_module(layout, id, cfg) else {
        return;
    };
    layout.module_mut(id).placements = found.placements;
}

fn search_module(layout: &Layout, id: ModuleId, cfg: &PlaceConfig) -> Option<SearchNode> {
    let window = layout.bbox(id)?;
    let free = FreeSpace::from_cells(window, layout.region_cells(id));
    Some(place_components(free, &layout.module(id).components, cfg))
}

/// Largest-area all-free rectangle and, separately, the free rectangle with
/// the highest aspect ratio among those holding at least `min_area` cells
/// (or overall, when none is that large).
fn candidate_rects(free: &FreeSpace, min_area: usize) -> Option<(Rect, Rect)> {
    let w = free.window;
    let mut heights = vec![0usize; w.w];
    let mut largest: Option<Rect> = None;
    let mut tall: Option<(f64, Rect)> = None;
    let mut any_tall: Option<(f64, Rect)> = None;
    for y in w.y..w.top() {
        for (i, hgt) in heights.iter_mut().enumerate() {
            *hgt = if free.is_free((w.x + i) as isize, y as isize) {
                *hgt + 1
            } else {
                0
            };
        }
        for i in 0..w.w {
            let hgt = heights[i];
            if hgt == 0 {
                continue;
            }
            let mut l = i;
            while l > 0 && heights[l - 1] >= hgt {
                l -= 1;
            }
            let mut r = i;
            while r + 1 < w.w && heights[r + 1] >= hgt {
                r += 1;
            }
            let rect = Rect::new(w.x + l, y + 1 - hgt, r - l + 1, hgt);
            if largest.is_none_or(|b| rect.area() > b.area()) {
                largest = Some(rect);
            }
            // thinnest sub-rectangle of this one still holding min_area
            let (long, short) = (rect.w.max(rect.h), rect.w.min(rect.h));
            let ar_full = aspect_ratio(rect.w, rect.h);
            if any_tall.is_none_or(|(a, _)| ar_full > a) {
                any_tall = Some((ar_full, rect));
            }
            if rect.area() >= min_area {
                let s = min_area.div_ceil(long).clamp(1, short);
                let sub = if rect.w >= rect.h {
                    Rect::new(rect.x, rect.y, long, s)
                } else {
                    Rect::new(rect.x, rect.y, s, long)
                };
                let ar = aspect_ratio(sub.w, sub.h);
                if tall.is_none_or(|(a, _)| ar > a) {
                    tall = Some((ar, sub));
                }
            }
        }
    }
    let largest = largest?;
    let tall = tall.or(any_tall)?.1;
    Some((largest, tall))
}

/// Maximal rectangles tried after the two preferred ones.
const FALLBACK_RECTS: usize = 4;

/// All-free maximal rectangles, largest first.
fn maximal_rects(free: &FreeSpace) -> Vec<Rect> {
    let w = free.window;
    let mut heights = vec![0usize; w.w];
    let mut out: Vec<Rect> = Vec::new();
    for y in w.y..w.top() {
        for (i, hgt) in heights.iter_mut().enumerate() {
            *hgt = if free.is_free((w.x + i) as isize, y as isize) {
                *hgt + 1
            } else {
                0
            };
        }
        for i in 0..w.w {
            let hgt = heights[i];
            if hgt == 0 {
                continue;
            }
            let mut l = i;
            while l > 0 && heights[l - 1] >= hgt {
                l -= 1;
            }
            let mut r = i;
            while r + 1 < w.w && heights[r + 1] >= hgt {
                r += 1;
            }
            let rect = Rect::new(w.x + l, y + 1 - hgt, r - l + 1, hgt);
            if !out.contains(&rect) {
                out.push(rect);
            }
        }
    }
    out.retain(|r| {
        let up = Rect::new(r.x, r.y, r.w, r.h + 1);
        !free.rect_free(&up)
    });
    out.sort_by(|a, b| b.area().cmp(&a.area()).then((a.y, a.x).cmp(&(b.y, b.x))));
    out
}

/// `r` itself, then its corners cut down to the footprint `dims` where `r`
/// is larger than needed.
fn trimmed(r: Rect, (mw, mh): (usize, usize)) -> Vec<Rect> {
    let xs = if r.w > mw { vec![r.x, r.right() - mw] } else { vec![r.x] };
    let ys = if r.h > mh { vec![r.y, r.top() - mh] } else { vec![r.y] };
    let (w, h) = (r.w.min(mw), r.h.min(mh));
    let mut out = vec![r];
    for &y in &ys {
        for &x in &xs {
            let t = Rect::new(x, y, w, h);
            if !out.contains(&t) {
                out.push(t);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

fn outer_strip(r: Rect, side: Side, width: usize, height: usize) -> Option<Rect> {
    match side {
        Side::Left => (r.x > 0).then(|| Rect::new(r.x - 1, r.y, 1, r.h)),
        Side::Right => (r.right() < width).then(|| Rect::new(r.right(), r.y, 1, r.h)),
        Side::Bottom => (r.y > 0).then(|| Rect::new(r.x, r.y - 1, r.w, 1)),
        Side::Top => (r.top() < height).then(|| Rect::new(r.x, r.top(), r.w, 1)),
    }
}

fn extend(r: Rect, side: Side) -> Rect {
    match side {
        Side::Left => Rect::new(r.x - 1, r.y, r.w + 1, r.h),
        Side::Right => Rect::new(r.x, r.y, r.w + 1, r.h),
        Side::Bottom => Rect::new(r.x, r.y - 1, r.w, r.h + 1),
        Side::Top => Rect::new(r.x, r.y, r.w, r.h + 1),
    }
}

/// Undo record for one transferred strip.
struct Transfer {
    cells: Vec<(CellCoord, ModuleId)>,
    donors: Vec<(ModuleId, Vec<Option<Rect>>)>,
}

/// Try to make room for component `comp` of module `id` by growing `rect`
/// (a free rectangle of the module) strip by strip into neighbors. Donors
/// must stay connected and fully placed. On failure every transfer is undone.
fn grow_for(
    layout: &mut Layout,
    id: ModuleId,
    comp: usize,
    mut rect: Rect,
    dims: (usize, usize),
    cfg: &PlaceConfig,
) -> bool {
    let (mw, mh) = dims;
    let (width, height) = (layout.width(), layout.height());
    let mut undo: Vec<Transfer> = Vec::new();
    loop {
        if rect.w >= mw && rect.h >= mh {
            let target = Rect::new(rect.x, rect.y, mw, mh);
            layout.module_mut(id).placements[comp] = Some(target);
            return true;
        }
        let mut sides = Vec::new();
        if rect.w < mw {
            sides.extend([Side::Left, Side::Right]);
        }
        if rect.h < mh {
            sides.extend([Side::Bottom, Side::Top]);
        }
        let occupied = FreeSpace::of_module(layout, id).expect("module has cells");
        let mut options: Vec<(f64, Side, Rect)> = Vec::new();
        for side in sides {
            let Some(s) = outer_strip(rect, side, width, height) else {
                continue;
            };
            let mut blocked = false;
            let mut key = -1.0f64;
            for cell in s.cells() {
                match layout.canvas().at(cell) {
                    Some(m) if m == id => {
                        if !occupied.is_free(cell.x as isize, cell.y as isize) {
                            blocked = true;
                        }
                    }
                    Some(m) => key = key.max(layout.component_area_ratio(m)),
                    None => {}
                }
            }
            if !blocked {
                options.push((key, side, s));
            }
        }
        options.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut grown = false;
        for (_, side, s) in options {
            if let Some(t) = take_strip(layout, id, s, cfg) {
                undo.push(t);
                rect = extend(rect, side);
                grown = true;
                break;
            }
        }
        if !grown {
            for t in undo.into_iter().rev() {
                restore(layout, t);
            }
            return false;
        }
    }
}

/// Move the strip's cells to `id` if every donor stays connected and can
/// still place all of its components.
fn take_strip(layout: &mut Layout, id: ModuleId, strip: Rect, cfg: &PlaceConfig) -> Option<Transfer> {
    let mut by_donor: Vec<(ModuleId, Vec<CellCoord>)> = Vec::new();
    let mut cells = Vec::new();
    for cell in strip.cells() {
        match layout.canvas().at(cell) {
            Some(m) if m == id => {}
            Some(m) => {
                cells.push((cell, m));
                match by_donor.iter_mut().find(|(d, _)| *d == m) {
                    Some((_, v)) => v.push(cell),
                    None => by_donor.push((m, vec![cell])),
                }
            }
            None => cells.push((cell, ModuleId(u32::MAX))),
        }
    }
    for (donor, lost) in &by_donor {
        if layout.cell_count(*donor) <= lost.len() || !connected_without(layout, *donor, lost) {
            return None;
        }
    }
    // only fully placed modules can lend cells
    for (donor, _) in &by_donor {
        let m = layout.module(*donor);
        if m.placed_area() != m.component_area() {
            return None;
        }
    }
    let mut trial = layout.clone();
    let moved: Vec<CellCoord> = cells.iter().map(|(c, _)| *c).collect();
    trial.transfer(&moved, Some(id));
    let mut donors = Vec::new();
    for (donor, lost) in &by_donor {
        let placed = layout.module(*donor).placements.iter().flatten();
        let untouched = placed.clone().all(|r| lost.iter().all(|c| !r.contains(*c)));
        if untouched {
            donors.push((*donor, layout.module(*donor).placements.clone()));
            continue;
        }
        let found = search_module(&trial, *donor, cfg)?;
        let total = trial.module(*donor).component_area();
        if found.placed_area != total {
            return None;
        }
        donors.push((*donor, layout.module(*donor).placements.clone()));
        trial.module_mut(*donor).placements = found.placements;
    }
    *layout = trial;
    Some(Transfer { cells, donors })
}

fn restore(layout: &mut Layout, t: Transfer) {
    for (cell, owner) in &t.cells {
        let to = (owner.0 != u32::MAX).then_some(*owner);
        layout.transfer(&[*cell], to);
    }
    for (donor, placements) in t.donors {
        layout.module_mut(donor).placements = placements;
    }
}

/// For modules with unplaced components, borrow grid strips from neighbors
/// so the missing components fit. Whitespace and total coverage are
/// unchanged; donors keep every component placed.
pub fn refine_boundaries(layout: &mut Layout, cfg: &PlaceConfig) {
    for id in layout.module_ids().collect::<Vec<_>>() {
        let comps = layout.module(id).components.clone();
        for i in by_area_desc(&comps) {
            if layout.module(id).placements[i].is_some() {
                continue;
            }
            let Some(free) = FreeSpace::of_module(layout, id) else {
                break;
            };
            let Some((largest, tall)) = candidate_rects(&free, comps[i].area()) else {
                continue;
            };
            let want = aspect_ratio(comps[i].w, comps[i].h);
            let gap = |r: &Rect| (r.aspect_ratio() - want).abs();
            let prefer_tall = match gap(&tall).total_cmp(&gap(&largest)) {
                std::cmp::Ordering::Less => true,
                std::cmp::Ordering::Greater => false,
                std::cmp::Ordering::Equal => want > 2.0,
            };
            let (first, second) = if prefer_tall { (tall, largest) } else { (largest, tall) };
            let c = comps[i];
            let along = |r: &Rect| {
                let (long, short) = (c.w.max(c.h), c.w.min(c.h));
                if !cfg.allow_rotation {
                    (c.w, c.h)
                } else if r.w >= r.h {
                    (long, short)
                } else {
                    (short, long)
                }
            };
            let mut attempts: Vec<(Rect, (usize, usize))> = vec![(first, along(&first)), (second, along(&second))];
            for r in maximal_rects(&free).into_iter().take(FALLBACK_RECTS) {
                attempts.push((r, along(&r)));
            }
            if cfg.allow_rotation {
                let flipped: Vec<_> = attempts.iter().map(|&(r, (w, h))| (r, (h, w))).collect();
                attempts.extend(flipped);
            }
            let mut seen = Vec::new();
            'attempts: for (r, dims) in attempts {
                for r in trimmed(r, dims) {
                    if seen.contains(&(r, dims)) {
                        continue;
                    }
                    seen.push((r, dims));
                    if grow_for(layout, id, i, r, dims, cfg) {
                        break 'attempts;
                    }
                }
            }
        }
    }
}

/// Place components in every module, then refine boundaries.
pub fn run_stage3(mut layout: Layout, cfg: &PlaceConfig) -> Layout {
    let ids: Vec<ModuleId> = layout.module_ids().collect();
    let found: Vec<Option<SearchNode>> = ids.par_iter().map(|&id| search_module(&layout, id, cfg)).collect();
    for (id, node) in ids.into_iter().zip(found) {
        if let Some(node) = node {
            layout.module_mut(id).placements = node.placements;
        }
    }
    if cfg.refine {
        refine_boundaries(&mut layout, cfg);
    }
    layout.stage = Stage::Stage3;
    layout
}
