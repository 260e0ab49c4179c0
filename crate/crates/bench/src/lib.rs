//! Benchmark fixtures: bundled designs with synthesized components, carried
//! through a short anneal so that later stages see realistic layouts.

use std::path::PathBuf;

use flora_core::anneal::{init_random, run_stage1, SaConfig};
use flora_core::bench_io::{synthesize_components, SynthConfig};
use flora_core::metrics::FeedthroughParams;
use flora_core::pipeline::{load_netlist, RunConfig};
use flora_core::resize::run_stage2;
use flora_core::{Layout, Netlist};

pub struct Fixture {
    pub netlist: Netlist,
    pub params: FeedthroughParams,
    pub sa: SaConfig,
    pub init: Layout,
    pub stage1: Layout,
    pub stage2: Layout,
}

pub fn fixture(design: &str) -> Fixture {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/gsrc");
    let cfg = RunConfig::new(
        design,
        dir.join(format!("{design}.blocks")),
        dir.join(format!("{design}.nets")),
    );
    let base = load_netlist(&cfg).expect("bundled design loads");
    let netlist = synthesize_components(&base, 0, &SynthConfig::default()).expect("synthesis");
    let params = FeedthroughParams::from_netlist(&netlist, 1);
    let sa = SaConfig {
        t_init: 10.0,
        cooling: 0.8,
        ..SaConfig::default()
    };
    let init = init_random(&netlist, cfg.grid, cfg.grid, &sa).expect("init");
    let stage1 = run_stage1(&netlist, &params, init.clone(), &sa).expect("anneal").best;
    let stage2 = run_stage2(stage1.clone(), &netlist.nets, &params).expect("whitespace removal");
    Fixture {
        netlist,
        params,
        sa,
        init,
        stage1,
        stage2,
    }
}
