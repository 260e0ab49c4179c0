mod common;

use common::*;
use flora_core::anneal::metropolis_accept;
use flora_core::geom::{CellCoord, ModuleId, Rect, RectilinearRegion};
use flora_core::place::{enumerate_corner_placements, FreeSpace};
use rand::Rng;

const INSTANCES: u64 = 200;

fn all(check: fn(u64) -> Result<(), String>) {
    let failures: Vec<String> = (0..INSTANCES).filter_map(|s| check(s).err()).collect();
    assert!(
        failures.is_empty(),
        "{} failures, first: {}",
        failures.len(),
        failures[0]
    );
}

#[test]
fn wiremask_matches_naive_hpwl() {
    all(check_wiremask);
}

#[test]
fn lbr_matches_exhaustive_enumeration() {
    all(check_lbr);
}

#[test]
fn feedthrough_totals_match_brute_force() {
    all(check_feedthrough_totals);
}

#[test]
fn delta_ftpin_matches_recompute() {
    all(check_delta_ftpin);
}

#[test]
fn brute_force_packer_sanity() {
    assert_eq!(best_packing_area(4, 4, &[(2, 2); 4]), 16);
    assert_eq!(best_packing_area(4, 4, &[(2, 2); 5]), 16);
    assert_eq!(best_packing_area(3, 5, &[(5, 2)]), 10);
    assert_eq!(best_packing_area(3, 3, &[(2, 2), (2, 2)]), 4);
    assert_eq!(best_packing_area(5, 5, &[(3, 2), (3, 2), (2, 3), (2, 3), (1, 1)]), 25);
}

#[test]
fn packing_matches_optimum_on_small_modules() {
    let mut equal = 0;
    for seed in 0..INSTANCES {
        let (got, best) = packing_instance(seed);
        assert!(got <= best, "seed {seed}: placed {got} above optimum {best}");
        equal += (got == best) as u64;
    }
    assert!(equal * 10 >= INSTANCES * 9, "{equal}/{INSTANCES} optimal");
}

#[test]
fn metropolis_frequency_within_three_sigma() {
    let mut r = rng(11);
    for (delta, temp) in [(1.0f64, 1.0f64), (0.5, 2.0), (3.0, 1.5), (0.01, 0.1)] {
        let p: f64 = (-delta / temp).exp();
        let trials = 10_000;
        let hits = (0..trials)
            .filter(|_| metropolis_accept(delta, temp, r.gen::<f64>()))
            .count();
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        let dev = (hits as f64 - trials as f64 * p).abs();
        assert!(
            dev <= 3.0 * sigma,
            "delta {delta} temp {temp}: {hits} hits, expected {}",
            trials as f64 * p
        );
    }
}

/// Corners counted by walking the boundary of the free region.
fn traced_corners(free: &FreeSpace) -> usize {
    let cells: Vec<CellCoord> = free.free_cells().collect();
    if cells.is_empty() {
        return 0;
    }
    let owned = |x: isize, y: isize| x >= 0 && y >= 0 && cells.contains(&CellCoord::new(x as usize, y as usize));
    let w = free.window();
    let mut turns = 0;
    for vy in w.y as isize..=w.top() as isize {
        for vx in w.x as isize..=w.right() as isize {
            let q = [
                owned(vx - 1, vy - 1),
                owned(vx, vy - 1),
                owned(vx - 1, vy),
                owned(vx, vy),
            ];
            let n = q.iter().filter(|&&b| b).count();
            turns += match n {
                1 | 3 => 1,
                2 if q[0] == q[3] => 2,
                _ => 0,
            };
        }
    }
    turns
}

#[test]
fn corner_count_matches_outline_tracing() {
    for seed in 0..INSTANCES {
        let mut r = rng(seed);
        let (w, h) = (r.gen_range(2..=10), r.gen_range(2..=10));
        let window = Rect::new(0, 0, w, h);
        let cells: Vec<CellCoord> = window.cells().filter(|_| r.gen_bool(0.6)).collect();
        let free = FreeSpace::from_cells(window, cells.clone());
        assert_eq!(free.corner_count(), traced_corners(&free), "seed {seed}");
        if let Ok(region) = RectilinearRegion::new(cells) {
            assert_eq!(free.corner_count(), region.corner_count(), "seed {seed}");
        }
    }
}

#[test]
fn corner_placements_are_exactly_the_corner_flush_ones() {
    for seed in 0..INSTANCES {
        let mut r = rng(seed);
        let (w, h) = (r.gen_range(2..=9), r.gen_range(2..=9));
        let window = Rect::new(0, 0, w, h);
        let mut free = FreeSpace::from_rect(window);
        for _ in 0..r.gen_range(0..3) {
            let (rw, rh) = (r.gen_range(1..=w), r.gen_range(1..=h));
            free.occupy(Rect::new(r.gen_range(0..=w - rw), r.gen_range(0..=h - rh), rw, rh));
        }
        let dims = (r.gen_range(1..=w), r.gen_range(1..=h));
        let got = enumerate_corner_placements(&free, &[dims]);
        let blocked = |x: isize, y: isize| !free.is_free(x, y);
        let mut want = Vec::new();
        for y in 0..=h - dims.1 {
            for x in 0..=w - dims.0 {
                let rect = Rect::new(x, y, dims.0, dims.1);
                if !free.rect_free(&rect) {
                    continue;
                }
                // a corner cell of the rect whose two outward neighbors are blocked
                let (x0, y0, x1, y1) = (
                    x as isize,
                    y as isize,
                    rect.right() as isize - 1,
                    rect.top() as isize - 1,
                );
                let flush = (blocked(x0 - 1, y0) && blocked(x0, y0 - 1))
                    || (blocked(x1 + 1, y0) && blocked(x1, y0 - 1))
                    || (blocked(x0 - 1, y1) && blocked(x0, y1 + 1))
                    || (blocked(x1 + 1, y1) && blocked(x1, y1 + 1));
                if flush {
                    want.push(rect);
                }
            }
        }
        let mut got_sorted = got.clone();
        got_sorted.sort_by_key(|r| (r.y, r.x, r.w, r.h));
        got_sorted.dedup();
        want.sort_by_key(|r| (r.y, r.x, r.w, r.h));
        assert_eq!(got_sorted, want, "seed {seed} dims {dims:?}");
    }
}

#[test]
fn module_ids_survive_blob_generation() {
    let mut r = rng(5);
    let l = blob_layout(&mut r, 10, 10, 4, 0.8);
    l.validate().unwrap();
    assert!(l.module_ids().all(|m| l.cell_count(m) > 0));
    let _ = ModuleId(0);
}
