//! Fine-grained optimization: grow rectangular modules into adjacent
//! whitespace, then hand every remaining blank rectangle to the adjacent
//! module whose feedthrough pin count improves most.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::geom::{CellCoord, ModuleId, Rect};
use crate::layout::{Layout, Stage};
use crate::metrics::{common_edges, ftmod, ftpin_value, net_bbox, span_cells, FeedthroughParams};
use crate::netlist::Net;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

const SIDES: [Side; 4] = [Side::Left, Side::Right, Side::Bottom, Side::Top];

/// The one-cell strip just outside `r` on `side`, if it lies on the canvas.
fn strip(r: Rect, side: Side, width: usize, height: usize) -> Option<Rect> {
    match side {
        Side::Left => (r.x > 0).then(|| Rect::new(r.x - 1, r.y, 1, r.h)),
        Side::Right => (r.right() < width).then(|| Rect::new(r.right(), r.y, 1, r.h)),
        Side::Bottom => (r.y > 0).then(|| Rect::new(r.x, r.y - 1, r.w, 1)),
        Side::Top => (r.top() < height).then(|| Rect::new(r.x, r.top(), r.w, 1)),
    }
}

fn grow(r: Rect, side: Side) -> Rect {
    match side {
        Side::Left => Rect::new(r.x - 1, r.y, r.w + 1, r.h),
        Side::Right => Rect::new(r.x, r.y, r.w + 1, r.h),
        Side::Bottom => Rect::new(r.x, r.y - 1, r.w, r.h + 1),
        Side::Top => Rect::new(r.x, r.y, r.w, r.h + 1),
    }
}

/// Grow modules one full blank strip at a time, keeping them rectangular.
/// Modules are taken in descending component-area ratio; each grows on the
/// side with the largest gain until every side is blocked.
pub fn expand_rectangular(layout: &mut Layout) {
    let mut pending: Vec<ModuleId> = layout
        .module_ids()
        .filter(|&m| layout.cell_count(m) > 0 && layout.is_rectangular(m))
        .collect();
    let (w, h) = (layout.width(), layout.height());
    while !pending.is_empty() {
        pending.sort_by(|&a, &b| {
            layout
                .component_area_ratio(b)
                .total_cmp(&layout.component_area_ratio(a))
                .then(a.cmp(&b))
        });
        let m = pending.remove(0);
        let mut rect = layout.bbox(m).expect("module has cells");
        loop {
            let best = SIDES
                .iter()
                .filter_map(|&side| strip(rect, side, w, h).map(|s| (side, s)))
                .filter(|(_, s)| layout.is_rect_free(s))
                .fold(None::<(Side, Rect)>, |acc, (side, s)| match acc {
                    Some((_, b)) if b.area() >= s.area() => acc,
                    _ => Some((side, s)),
                });
            let Some((side, s)) = best else { break };
            layout.paint_rect(m, s);
            rect = grow(rect, side);
        }
    }
}

/// Maximum-area all-blank rectangle containing `cell`. Ties prefer the wider
/// rectangle, then the lowest `(y, x)` anchor.
pub fn largest_blank_rectangle(layout: &Layout, cell: CellCoord) -> Result<Rect> {
    let canvas = layout.canvas();
    if !canvas.in_bounds(cell) {
        return Err(Error::OutOfCanvas(cell, canvas.width(), canvas.height()));
    }
    if canvas.at(cell).is_some() {
        return Err(Error::CellNotBlank(cell));
    }
    let (w, h) = (canvas.width(), canvas.height());
    let (cx, cy) = (cell.x, cell.y);
    // blank run lengths from row cy upward / downward, per column
    let up: Vec<usize> = (0..w)
        .map(|x| (cy..h).take_while(|&y| canvas.is_blank(x, y)).count())
        .collect();
    let down: Vec<usize> = (0..w)
        .map(|x| (0..=cy).rev().take_while(|&y| canvas.is_blank(x, y)).count())
        .collect();
    let up_bounds = column_bounds(&up, cx);
    let down_bounds = column_bounds(&down, cx);

    let mut best: Option<Rect> = None;
    for (a, &(lu, ru)) in up_bounds.iter().enumerate() {
        for (b, &(ld, rd)) in down_bounds.iter().enumerate() {
            let (l, r) = (lu.max(ld), ru.min(rd));
            let cand = Rect::new(l, cy - b, r - l + 1, a + b + 1);
            let better = match best {
                None => true,
                Some(cur) => {
                    (cand.area(), cand.w, std::cmp::Reverse((cand.y, cand.x)))
                        > (cur.area(), cur.w, std::cmp::Reverse((cur.y, cur.x)))
                }
            };
            if better {
                best = Some(cand);
            }
        }
    }
    Ok(best.expect("the cell itself is blank"))
}

/// For each extent `k + 1` (index `k`), the widest column interval around
/// `cx` whose runs are all at least that long.
fn column_bounds(run: &[usize], cx: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(run[cx]);
    for need in 1..=run[cx] {
        let mut l = cx;
        while l > 0 && run[l - 1] >= need {
            l -= 1;
        }
        let mut r = cx;
        while r + 1 < run.len() && run[r + 1] >= need {
            r += 1;
        }
        out.push((l, r));
    }
    out
}

/// Edge counts between the blank rectangle and each module touching it.
fn rect_contacts(layout: &Layout, rect: Rect) -> BTreeMap<ModuleId, usize> {
    let canvas = layout.canvas();
    let mut out = BTreeMap::new();
    let mut visit = |x: usize, y: usize| {
        if let Some(m) = canvas.get(x, y) {
            *out.entry(m).or_insert(0) += 1;
        }
    };
    for y in rect.y..rect.top() {
        if rect.x > 0 {
            visit(rect.x - 1, y);
        }
        if rect.right() < canvas.width() {
            visit(rect.right(), y);
        }
    }
    for x in rect.x..rect.right() {
        if rect.y > 0 {
            visit(x, rect.y - 1);
        }
        if rect.top() < canvas.height() {
            visit(x, rect.top());
        }
    }
    out
}

type EdgeTable = HashMap<(ModuleId, ModuleId), usize>;

fn key(a: ModuleId, b: ModuleId) -> (ModuleId, ModuleId) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn check_blank(layout: &Layout, rect: Rect) -> Result<()> {
    if !layout.canvas().contains_rect(&rect) {
        return Err(Error::OutOfCanvas(
            CellCoord::new(rect.right() - 1, rect.top() - 1),
            layout.width(),
            layout.height(),
        ));
    }
    match rect.cells().find(|&c| layout.canvas().at(c).is_some()) {
        Some(c) => Err(Error::CellNotBlank(c)),
        None => Ok(()),
    }
}

fn delta_with(
    contacts: &BTreeMap<ModuleId, usize>,
    edges: &EdgeTable,
    module: ModuleId,
    params: &FeedthroughParams,
) -> i64 {
    contacts
        .iter()
        .filter(|(&j, _)| j != module)
        .map(|(&j, &extra)| {
            let y = params.demand(module, j);
            if y == 0 {
                return 0;
            }
            let ce = edges.get(&key(module, j)).copied().unwrap_or(0);
            ftpin_value(params.pin_spacing, y, ce + extra) as i64 - ftpin_value(params.pin_spacing, y, ce) as i64
        })
        .sum()
}

/// Change in total feedthrough pins if the blank `rect` were assigned to
/// `module`. The layout is not modified.
pub fn delta_ftpin(layout: &Layout, rect: Rect, module: ModuleId, params: &FeedthroughParams) -> Result<i64> {
    check_blank(layout, rect)?;
    let contacts = rect_contacts(layout, rect);
    if !contacts.contains_key(&module) {
        return Err(Error::NotAdjacent(module));
    }
    Ok(delta_with(&contacts, &common_edges(layout), module, params))
}

/// Change in total feedthrough modules if the blank `rect` were assigned to
/// `module`. Only nets containing `module` or spanning the rect can change.
pub fn delta_ftmod(layout: &Layout, nets: &[Net], rect: Rect, module: ModuleId) -> f64 {
    let (w, h) = (layout.width(), layout.height());
    let affected: Vec<&Net> = nets
        .iter()
        .filter(|n| n.contains(module) || net_bbox(layout, n).is_some_and(|b| span_cells(b, w, h).intersects(&rect)))
        .collect();
    if affected.is_empty() {
        return 0.0;
    }
    let before: f64 = affected.iter().map(|n| ftmod(layout, n)).sum();
    let mut trial = layout.clone();
    trial.paint_rect(module, rect);
    let after: f64 = affected.iter().map(|n| ftmod(&trial, n)).sum();
    after - before
}

/// Assign every blank cell to a module. Repeatedly takes the lowest blank
/// cell, finds its largest blank rectangle and gives it to the adjacent
/// module with the smallest pin delta (ties: smaller feedthrough-module
/// delta, larger component-area ratio, then lower id).
pub fn remove_whitespace(layout: &mut Layout, nets: &[Net], params: &FeedthroughParams) -> Result<()> {
    let mut edges = common_edges(layout);
    while let Some(cell) = layout.canvas().first_blank() {
        let rect = largest_blank_rectangle(layout, cell)?;
        let contacts = rect_contacts(layout, rect);
        let pins: Vec<(i64, ModuleId)> = contacts
            .keys()
            .map(|&m| (delta_with(&contacts, &edges, m, params), m))
            .collect();
        let best_pins = pins.iter().map(|p| p.0).min().ok_or(Error::OrphanBlank(cell))?;
        let tied: Vec<ModuleId> = pins.iter().filter(|p| p.0 == best_pins).map(|p| p.1).collect();
        let winner = if tied.len() == 1 {
            tied[0]
        } else {
            tied.iter()
                .map(|&m| (delta_ftmod(layout, nets, rect, m), m))
                .min_by(|(da, a), (db, b)| {
                    da.total_cmp(db)
                        .then(
                            layout
                                .component_area_ratio(*b)
                                .total_cmp(&layout.component_area_ratio(*a)),
                        )
                        .then(a.cmp(b))
                })
                .map(|(_, m)| m)
                .expect("tied is non-empty")
        };
        for (&j, &extra) in &contacts {
            if j != winner {
                *edges.entry(key(winner, j)).or_insert(0) += extra;
            }
        }
        layout.paint_rect(winner, rect);
    }
    Ok(())
}

/// Expansion followed by whitespace removal.
pub fn run_stage2(mut layout: Layout, nets: &[Net], params: &FeedthroughParams) -> Result<Layout> {
    expand_rectangular(&mut layout);
    remove_whitespace(&mut layout, nets, params)?;
    layout.stage = Stage::Stage2;
    Ok(layout)
}
