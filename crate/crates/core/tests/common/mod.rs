//! Random instance generators and brute-force reference implementations
//! shared by the oracle suites and the acceptance run.
#![allow(dead_code)]

use flora_core::geom::{CellCoord, ModuleId, Rect};
use flora_core::layout::{Layout, ModuleLayout};
use flora_core::masks::wiremask;
use flora_core::metrics::{ftmod_total, ftpin_total, hpwl, FeedthroughParams};
use flora_core::netlist::{Component, ComponentKind, ModuleSpec, Net, Netlist};
use flora_core::place::{place_components, FreeSpace, PlaceConfig};
use flora_core::resize::{delta_ftpin, largest_blank_rectangle};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn names(n: usize) -> Vec<ModuleLayout> {
    (0..n).map(|i| ModuleLayout::new(format!("m{i}"), Vec::new())).collect()
}

/// Up to `n` non-overlapping rectangles dropped at random; modules that do
/// not fit are left empty.
pub fn rect_layout(rng: &mut impl Rng, w: usize, h: usize, n: usize) -> Layout {
    let mut l = Layout::new(w, h, names(n));
    for i in 0..n {
        for _ in 0..50 {
            let rw = rng.gen_range(1..=(w / 2).max(1));
            let rh = rng.gen_range(1..=(h / 2).max(1));
            let r = Rect::new(rng.gen_range(0..=w - rw), rng.gen_range(0..=h - rh), rw, rh);
            if l.is_rect_free(&r) {
                l.paint_rect(ModuleId(i as u32), r);
                break;
            }
        }
    }
    l
}

/// Connected blobs grown cell by cell from random seeds, leaving some blank.
pub fn blob_layout(rng: &mut impl Rng, w: usize, h: usize, n: usize, fill: f64) -> Layout {
    let mut owner: Vec<Option<usize>> = vec![None; w * h];
    let mut cells: Vec<Vec<CellCoord>> = vec![Vec::new(); n];
    let mut all: Vec<usize> = (0..w * h).collect();
    all.shuffle(rng);
    for (i, &s) in all.iter().take(n).enumerate() {
        owner[s] = Some(i);
        cells[i].push(CellCoord::new(s % w, s / w));
    }
    let target = ((w * h) as f64 * fill) as usize;
    let mut placed = n.min(w * h);
    let mut stalls = 0;
    while placed < target && stalls < 20 * w * h {
        let i = rng.gen_range(0..n);
        let Some(&c) = cells[i].choose(rng) else {
            stalls += 1;
            continue;
        };
        let nb: Vec<CellCoord> = c
            .neighbors()
            .filter(|p| p.x < w && p.y < h && owner[p.y * w + p.x].is_none())
            .collect();
        match nb.choose(rng) {
            Some(&p) => {
                owner[p.y * w + p.x] = Some(i);
                cells[i].push(p);
                placed += 1;
            }
            None => stalls += 1,
        }
    }
    let mut l = Layout::new(w, h, names(n));
    for (i, c) in cells.into_iter().enumerate() {
        l.assign_cells(ModuleId(i as u32), c);
    }
    l
}

/// Nets of two to four modules, a third of them with a fixed terminal point
/// on a half-cell position inside the canvas.
pub fn random_nets(rng: &mut impl Rng, modules: usize, count: usize, w: usize, h: usize) -> Vec<Net> {
    (0..count)
        .map(|_| {
            let k = rng.gen_range(2..=4.min(modules).max(2));
            let mut ids: Vec<u32> = (0..modules as u32).collect();
            ids.shuffle(rng);
            let mut net = Net::from_modules(ids.into_iter().take(k).map(ModuleId));
            if rng.gen_bool(1.0 / 3.0) {
                let px = rng.gen_range(0..=2 * w) as f64 / 2.0;
                let py = rng.gen_range(0..=2 * h) as f64 / 2.0;
                net.fixed_points.push((px, py));
            }
            net
        })
        .collect()
}

pub fn netlist_for(layout: &Layout, nets: Vec<Net>) -> Netlist {
    Netlist {
        modules: layout
            .modules()
            .iter()
            .map(|m| ModuleSpec {
                name: m.name.clone(),
                area: 0,
                components: Vec::new(),
            })
            .collect(),
        nets,
    }
}

fn owned(layout: &Layout, id: ModuleId) -> Vec<CellCoord> {
    let mut out = Vec::new();
    for y in 0..layout.height() {
        for x in 0..layout.width() {
            if layout.canvas().get(x, y) == Some(id) {
                out.push(CellCoord::new(x, y));
            }
        }
    }
    out
}

pub fn naive_centroid(layout: &Layout, id: ModuleId) -> Option<(f64, f64)> {
    let cells = owned(layout, id);
    if cells.is_empty() {
        return None;
    }
    let n = cells.len() as f64;
    let sx: f64 = cells.iter().map(|c| c.x as f64 + 0.5).sum();
    let sy: f64 = cells.iter().map(|c| c.y as f64 + 0.5).sum();
    Some((sx / n, sy / n))
}

fn points(layout: &Layout, net: &Net, skip: Option<ModuleId>) -> Vec<(f64, f64)> {
    net.modules
        .iter()
        .filter(|&&m| Some(m) != skip)
        .filter_map(|&m| naive_centroid(layout, m))
        .chain(net.fixed_points.iter().copied())
        .collect()
}

fn bbox(points: &[(f64, f64)]) -> Option<(f64, f64, f64, f64)> {
    let (&(x, y), rest) = points.split_first()?;
    Some(rest.iter().fold((x, y, x, y), |(a, b, c, d), &(px, py)| {
        (a.min(px), b.min(py), c.max(px), d.max(py))
    }))
}

fn half_perimeter(points: &[(f64, f64)]) -> f64 {
    bbox(points).map_or(0.0, |(x0, y0, x1, y1)| (x1 - x0) + (y1 - y0))
}

/// Compare the wiremask of one module against moving it to every anchor
/// and recomputing HPWL from scratch.
pub fn check_wiremask(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let (w, h) = (r.gen_range(4..=16), r.gen_range(4..=16));
    let n = r.gen_range(2..=6);
    let layout = rect_layout(&mut r, w, h, n);
    let count = r.gen_range(1..=8);
    let nets = random_nets(&mut r, n, count, w, h);
    let moving = ModuleId(r.gen_range(0..n as u32));
    let dims = (r.gen_range(1..=w.min(6)), r.gen_range(1..=h.min(6)));
    let mask = wiremask(&layout, &nets, moving, dims);
    let mine: Vec<&Net> = nets.iter().filter(|n| n.contains(moving)).collect();
    let base: f64 = mine
        .iter()
        .map(|n| half_perimeter(&points(&layout, n, Some(moving))))
        .sum();
    for y in 0..h {
        for x in 0..w {
            let fits = x + dims.0 <= w && y + dims.1 <= h;
            let legal = fits
                && (y..y + dims.1)
                    .all(|yy| (x..x + dims.0).all(|xx| layout.canvas().get(xx, yy).is_none_or(|m| m == moving)));
            if legal != mask.is_legal(x, y) {
                return Err(format!("seed {seed}: legality differs at ({x}, {y})"));
            }
            if !legal {
                continue;
            }
            let mut moved = layout.clone();
            moved.clear_module(moving);
            moved.paint_rect(moving, Rect::new(x, y, dims.0, dims.1));
            let with: f64 = mine.iter().map(|n| half_perimeter(&points(&moved, n, None))).sum();
            if with - base != mask.get(x, y) {
                return Err(format!(
                    "seed {seed}: at ({x}, {y}) mask {} vs naive {}",
                    mask.get(x, y),
                    with - base
                ));
            }
            if let Ok(full) = hpwl(&moved, &nets) {
                let naive_full: f64 = nets.iter().map(|n| half_perimeter(&points(&moved, n, None))).sum();
                if full != naive_full {
                    return Err(format!("seed {seed}: hpwl {full} vs naive {naive_full}"));
                }
            }
        }
    }
    Ok(())
}

/// Every all-blank rectangle containing `cell`, best by area, then width,
/// then lowest `(y, x)`.
pub fn exhaustive_lbr(layout: &Layout, cell: CellCoord) -> Rect {
    let (w, h) = (layout.width(), layout.height());
    let mut best: Option<Rect> = None;
    for y0 in 0..=cell.y {
        for x0 in 0..=cell.x {
            for y1 in cell.y + 1..=h {
                for x1 in cell.x + 1..=w {
                    let r = Rect::new(x0, y0, x1 - x0, y1 - y0);
                    if !r.cells().all(|c| layout.canvas().at(c).is_none()) {
                        continue;
                    }
                    let better = match best {
                        None => true,
                        Some(b) => {
                            (r.area(), r.w, std::cmp::Reverse((r.y, r.x)))
                                > (b.area(), b.w, std::cmp::Reverse((b.y, b.x)))
                        }
                    };
                    if better {
                        best = Some(r);
                    }
                }
            }
        }
    }
    best.expect("cell is blank")
}

pub fn check_lbr(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let (w, h) = (r.gen_range(2..=12), r.gen_range(2..=12));
    let density = r.gen_range(0.05..0.6);
    let mut l = Layout::new(w, h, names(1));
    let taken: Vec<CellCoord> = (0..w * h)
        .map(|i| CellCoord::new(i % w, i / w))
        .filter(|_| r.gen_bool(density))
        .collect();
    l.assign_cells(ModuleId(0), taken);
    for y in 0..h {
        for x in 0..w {
            let c = CellCoord::new(x, y);
            if l.canvas().at(c).is_some() {
                continue;
            }
            let got = largest_blank_rectangle(&l, c).map_err(|e| e.to_string())?;
            let want = exhaustive_lbr(&l, c);
            if got != want {
                return Err(format!("seed {seed}: cell ({x}, {y}) got {got:?}, want {want:?}"));
            }
        }
    }
    Ok(())
}

/// Feedthrough modules per net from the cell-span definition, summed.
pub fn naive_ftmod_total(layout: &Layout, nets: &[Net]) -> f64 {
    let (w, h) = (layout.width(), layout.height());
    let axis = |lo: f64, hi: f64, limit: usize| -> Vec<usize> {
        let mut ks: Vec<usize> = (0..limit)
            .filter(|&k| (k as f64) < hi && (k as f64 + 1.0) > lo)
            .collect();
        if ks.is_empty() {
            ks.push((lo.floor().max(0.0) as usize).min(limit - 1));
        }
        ks
    };
    let mut twice = 0usize;
    for net in nets {
        let Some((x0, y0, x1, y1)) = bbox(&points(layout, net, None)) else {
            continue;
        };
        let (xs, ys) = (axis(x0, x1, w), axis(y0, y1, h));
        let mut hit = vec![false; layout.module_count()];
        for &y in &ys {
            for &x in &xs {
                if let Some(m) = layout.canvas().get(x, y) {
                    hit[m.index()] = true;
                }
            }
        }
        twice += hit
            .iter()
            .enumerate()
            .filter(|(i, &on)| on && !net.contains(ModuleId(*i as u32)))
            .count();
    }
    twice as f64 / 2.0
}

/// Pairwise feedthrough pins with shared edges counted cell by cell.
pub fn naive_ftpin_total(layout: &Layout, nets: &[Net], spacing: u64) -> u64 {
    let n = layout.module_count();
    let mut total = 0;
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (ModuleId(i as u32), ModuleId(j as u32));
            let demand = nets.iter().filter(|net| net.contains(a) && net.contains(b)).count() as u64;
            if demand == 0 {
                continue;
            }
            let mut edge = 0u64;
            for c in owned(layout, a) {
                for p in c.neighbors() {
                    if p.x < layout.width() && p.y < layout.height() && layout.canvas().at(p) == Some(b) {
                        edge += 1;
                    }
                }
            }
            let need = (spacing * demand).saturating_sub(edge);
            total += need.div_ceil(spacing);
        }
    }
    total
}

pub fn check_feedthrough_totals(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let (w, h) = (r.gen_range(3..=14), r.gen_range(3..=14));
    let n = r.gen_range(2..=7).min(w * h);
    let fill = r.gen_range(0.5..1.0);
    let l = blob_layout(&mut r, w, h, n, fill);
    let count = r.gen_range(1..=10);
    let nets = random_nets(&mut r, n, count, w, h);
    let spacing = r.gen_range(1..=3u32);
    let params = FeedthroughParams::from_netlist(&netlist_for(&l, nets.clone()), spacing);
    let (got, want) = (ftmod_total(&l, &nets), naive_ftmod_total(&l, &nets));
    if got != want {
        return Err(format!("seed {seed}: ftmod {got} vs {want}"));
    }
    let (got, want) = (ftpin_total(&l, &params), naive_ftpin_total(&l, &nets, spacing as u64));
    if got != want {
        return Err(format!("seed {seed}: ftpin {got} vs {want}"));
    }
    Ok(())
}

/// Incremental pin delta of handing a blank rectangle to each neighbor,
/// against recomputing the total after the assignment.
pub fn check_delta_ftpin(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let (w, h) = (r.gen_range(4..=14), r.gen_range(4..=14));
    let n = r.gen_range(2..=6);
    let fill = r.gen_range(0.4..0.9);
    let l = blob_layout(&mut r, w, h, n, fill);
    let count = r.gen_range(1..=10);
    let nets = random_nets(&mut r, n, count, w, h);
    let spacing = r.gen_range(1..=3u32);
    let params = FeedthroughParams::from_netlist(&netlist_for(&l, nets.clone()), spacing);
    let Some(cell) = l.canvas().first_blank() else {
        return Ok(());
    };
    let rect = largest_blank_rectangle(&l, cell).map_err(|e| e.to_string())?;
    let before = ftpin_total(&l, &params) as i64;
    for m in l.module_ids() {
        let Ok(delta) = delta_ftpin(&l, rect, m, &params) else {
            continue;
        };
        let mut after = l.clone();
        after.paint_rect(m, rect);
        let full = ftpin_total(&after, &params) as i64 - before;
        if delta != full {
            return Err(format!("seed {seed}: module {m:?} delta {delta} vs recomputed {full}"));
        }
    }
    Ok(())
}

/// Largest total area of a subset of `dims` that packs into a `w` x `h`
/// rectangle, rotations allowed. Positions are restricted to sums of other
/// items' sides, which loses no packing.
pub fn best_packing_area(w: usize, h: usize, dims: &[(usize, usize)]) -> usize {
    assert!(w * h <= 64);
    let sums = |pick: fn(&(usize, usize)) -> [usize; 2], limit: usize| {
        let mut s = vec![false; limit + 1];
        s[0] = true;
        for d in dims {
            let mut next = s.clone();
            for v in 0..=limit {
                if s[v] {
                    for side in pick(d) {
                        if v + side <= limit {
                            next[v + side] = true;
                        }
                    }
                }
            }
            s = next;
        }
        (0..=limit).filter(|&v| s[v]).collect::<Vec<_>>()
    };
    let xs = sums(|d| [d.0, d.1], w);
    let ys = sums(|d| [d.0, d.1], h);
    let mask_of = |x: usize, y: usize, rw: usize, rh: usize| -> u64 {
        let mut m = 0u64;
        for yy in y..y + rh {
            for xx in x..x + rw {
                m |= 1 << (yy * w + xx);
            }
        }
        m
    };
    let mut order: Vec<(usize, usize)> = dims.to_vec();
    order.sort_by_key(|d| std::cmp::Reverse(d.0 * d.1));
    let suffix: Vec<usize> = (0..=order.len())
        .map(|i| order[i..].iter().map(|d| d.0 * d.1).sum())
        .collect();
    let cap = w * h;
    let mut best = 0;
    #[allow(clippy::too_many_arguments)]
    fn go(
        i: usize,
        used: u64,
        area: usize,
        order: &[(usize, usize)],
        suffix: &[usize],
        xs: &[usize],
        ys: &[usize],
        w: usize,
        h: usize,
        cap: usize,
        mask_of: &dyn Fn(usize, usize, usize, usize) -> u64,
        best: &mut usize,
    ) {
        *best = (*best).max(area);
        if i == order.len() || area + suffix[i] <= *best || *best == cap {
            return;
        }
        let (a, b) = order[i];
        let orients: &[(usize, usize)] = if a == b { &[(a, b)] } else { &[(a, b), (b, a)] };
        for &(rw, rh) in orients {
            if rw > w || rh > h {
                continue;
            }
            for &y in ys.iter().filter(|&&y| y + rh <= h) {
                for &x in xs.iter().filter(|&&x| x + rw <= w) {
                    let m = mask_of(x, y, rw, rh);
                    if used & m == 0 {
                        go(
                            i + 1,
                            used | m,
                            area + rw * rh,
                            order,
                            suffix,
                            xs,
                            ys,
                            w,
                            h,
                            cap,
                            mask_of,
                            best,
                        );
                    }
                }
            }
        }
        go(i + 1, used, area, order, suffix, xs, ys, w, h, cap, mask_of, best);
    }
    go(0, 0, 0, &order, &suffix, &xs, &ys, w, h, cap, &mask_of, &mut best);
    best
}

/// Outcome of one packing instance: the search's placed area and the optimum.
pub fn packing_instance(seed: u64) -> (usize, usize) {
    let mut r = rng(seed);
    let (w, h) = (r.gen_range(3..=8), r.gen_range(3..=8));
    let k = r.gen_range(1..=5);
    let comps: Vec<Component> = (0..k)
        .map(|_| {
            let cw = r.gen_range(1..=w.max(h).min(6));
            let ch = r.gen_range(1..=w.max(h).min(6));
            Component::new(cw, ch, ComponentKind::Macro)
        })
        .collect();
    let node = place_components(
        FreeSpace::from_rect(Rect::new(0, 0, w, h)),
        &comps,
        &PlaceConfig::default(),
    );
    let dims: Vec<(usize, usize)> = comps.iter().map(|c| (c.w, c.h)).collect();
    (node.placed_area, best_packing_area(w, h, &dims))
}
