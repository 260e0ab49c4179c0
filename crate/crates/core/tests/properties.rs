mod common;

use std::path::Path;

use common::*;
use flora_core::bench_io::layout_file::{layout_from_str, layout_to_string};
use flora_core::bench_io::{synthesize_components, SynthConfig};
use flora_core::geom::ModuleId;
use flora_core::layout::Layout;
use flora_core::metrics::{pd_total, FeedthroughParams};
use flora_core::netlist::{Component, ComponentKind, ModuleSpec, Netlist};
use flora_core::place::{run_stage3, PlaceConfig};
use flora_core::resize::run_stage2;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

/// A random rectangle layout where every module got a rectangle.
fn full_rect_layout(seed: u64) -> (Layout, Vec<flora_core::netlist::Net>) {
    let mut r = rng(seed);
    loop {
        let (w, h) = (r.gen_range(6..=20), r.gen_range(6..=20));
        let n = r.gen_range(2..=6);
        let l = rect_layout(&mut r, w, h, n);
        if l.module_ids().all(|m| l.cell_count(m) > 0) {
            let count = r.gen_range(1..=10);
            let nets = random_nets(&mut r, n, count, w, h);
            return (l, nets);
        }
    }
}

/// Small macros in each module, up to about 60% of its cells.
fn with_components(mut l: Layout, r: &mut impl Rng) -> Layout {
    for id in l.module_ids().collect::<Vec<_>>() {
        let cells = l.cell_count(id);
        let bb = l.bbox(id).unwrap();
        let mut comps = Vec::new();
        let mut used = 0;
        for _ in 0..r.gen_range(1..=4) {
            let (w, h) = (r.gen_range(1..=bb.w.min(4)), r.gen_range(1..=bb.h.min(4)));
            if used + w * h > cells * 6 / 10 {
                break;
            }
            used += w * h;
            comps.push(Component::new(w, h, ComponentKind::Macro));
        }
        let m = l.module_mut(id);
        m.placements = vec![None; comps.len()];
        m.components = comps;
    }
    l
}

fn params_for(l: &Layout, nets: &[flora_core::netlist::Net]) -> FeedthroughParams {
    FeedthroughParams::from_netlist(&netlist_for(l, nets.to_vec()), 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn layout_text_round_trips(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (w, h) = (r.gen_range(2..=12), r.gen_range(2..=12));
        let n = r.gen_range(1..=5).min(w * h);
        let fill = r.gen_range(0.3..1.0);
        let mut l = blob_layout(&mut r, w, h, n, fill);
        for id in l.module_ids().collect::<Vec<_>>() {
            let mut cells = l.region_cells(id);
            cells.shuffle(&mut r);
            let m = l.module_mut(id);
            for (i, c) in cells.iter().take(3).enumerate() {
                m.components.push(Component::new(1, 1, if i == 0 { ComponentKind::Cluster } else { ComponentKind::Macro }));
                m.placements.push(r.gen_bool(0.7).then(|| flora_core::geom::Rect::new(c.x, c.y, 1, 1)));
            }
        }
        l.validate().unwrap();
        let text = layout_to_string(&l).unwrap();
        let back = layout_from_str(&text, Path::new("p")).unwrap();
        prop_assert_eq!(&back, &l);
        prop_assert_eq!(layout_to_string(&back).unwrap(), text);
    }

    #[test]
    fn stage2_leaves_no_whitespace_and_only_grows_modules(seed in any::<u64>()) {
        let (l, nets) = full_rect_layout(seed);
        let params = params_for(&l, &nets);
        let out = run_stage2(l.clone(), &nets, &params).unwrap();
        out.validate().unwrap();
        prop_assert_eq!(out.blank_count(), 0);
        for id in l.module_ids() {
            for c in l.region_cells(id) {
                prop_assert_eq!(out.canvas().at(c), Some(id));
            }
        }
    }

    #[test]
    fn stage3_output_is_valid_and_chains_through_files(seed in any::<u64>()) {
        let (l, nets) = full_rect_layout(seed);
        let mut r = rng(seed ^ 0x5eed);
        let l = with_components(l, &mut r);
        let params = params_for(&l, &nets);
        let s2 = run_stage2(l, &nets, &params).unwrap();
        let text = layout_to_string(&s2).unwrap();
        let reloaded = layout_from_str(&text, Path::new("s2")).unwrap();
        let s3 = run_stage3(reloaded, &PlaceConfig::default());
        s3.validate().unwrap();
        prop_assert_eq!(s3.blank_count(), 0);
        let pd = pd_total(&s3);
        prop_assert!((0.0..=100.0).contains(&pd));
        let cells: usize = s3.module_ids().map(|m| s3.cell_count(m)).sum();
        prop_assert_eq!(cells, s3.width() * s3.height());
        let back = layout_from_str(&layout_to_string(&s3).unwrap(), Path::new("s3")).unwrap();
        prop_assert_eq!(back, s3);
    }

    #[test]
    fn synthesis_hits_the_fill_target(
        areas in proptest::collection::vec(30u64..5000, 1..8),
        seed in any::<u64>(),
    ) {
        let netlist = Netlist {
            modules: areas
                .iter()
                .enumerate()
                .map(|(i, &a)| ModuleSpec { name: format!("m{i}"), area: a, components: vec![] })
                .collect(),
            nets: vec![],
        };
        let cfg = SynthConfig::default();
        let out = synthesize_components(&netlist, seed, &cfg).unwrap();
        for m in &out.modules {
            let target = (cfg.fill_ratio * m.area as f64).round() as i64;
            let total: i64 = m.components.iter().map(|c| c.area() as i64).sum();
            prop_assert!((total - target).abs() <= 1, "{} vs {}", total, target);
            prop_assert!((cfg.macro_range.0..=cfg.macro_range.1).contains(&m.components.len()));
            let clusters = m.components.iter().filter(|c| c.kind == ComponentKind::Cluster).count();
            prop_assert_eq!(clusters, 1);
        }
        prop_assert_eq!(synthesize_components(&netlist, seed, &cfg).unwrap(), out);
    }
}

#[test]
fn stage2_touches_nothing_without_blanks() {
    let mut l = Layout::new(
        4,
        2,
        vec![
            flora_core::layout::ModuleLayout::new("a", vec![]),
            flora_core::layout::ModuleLayout::new("b", vec![]),
        ],
    );
    l.paint_rect(ModuleId(0), flora_core::geom::Rect::new(0, 0, 2, 2));
    l.paint_rect(ModuleId(1), flora_core::geom::Rect::new(2, 0, 2, 2));
    let out = run_stage2(l.clone(), &[], &params_for(&l, &[])).unwrap();
    assert_eq!(out.canvas(), l.canvas());
}
