//! Random in-module components for benchmarks that only give module areas.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::netlist::{Component, ComponentKind, Netlist};
use crate::rng::{stream, Stream};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    /// Share of each module's area taken by its components.
    pub fill_ratio: f64,
    /// Inclusive range for the number of components per module.
    pub macro_range: (usize, usize),
    /// Upper bound of the drawn aspect ratio.
    pub max_aspect: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            fill_ratio: 0.8,
            macro_range: (2, 6),
            max_aspect: 3.0,
        }
    }
}

pub fn draw_macro_count(rng: &mut ChaCha8Rng, range: (usize, usize)) -> usize {
    rng.gen_range(range.0..=range.1)
}

/// Split `total` into `k` positive parts with random proportions.
fn split_area(rng: &mut ChaCha8Rng, total: u64, k: usize) -> Vec<u64> {
    let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(1.0..2.0)).collect();
    let spare = total - k as u64;
    let mut parts = super::gsrc::apportion(&weights, spare);
    for p in &mut parts {
        *p += 1;
    }
    parts
}

/// Grid dims for roughly `area` cells with aspect ratio near `ar`
/// (landscape). Dims within `tol` cells of the target area are acceptable;
/// among those the aspect ratio closest to `ar` wins.
pub fn snap_dims(area: u64, ar: f64, tol: u64) -> (usize, usize) {
    let area = area.max(1);
    let mut best: Option<((u64, f64), (usize, usize))> = None;
    let max_w = area as usize;
    let mut w = ((area as f64).sqrt().floor() as usize).max(1);
    // landscape: w >= h, so w ranges over [sqrt(area), area]
    while w <= max_w {
        let h = ((area as f64 / w as f64).round() as usize).max(1);
        if h <= w {
            let err = (w * h).abs_diff(area as usize) as u64;
            let ar_gap = ((w as f64 / h as f64).ln() - ar.ln()).abs();
            let key = (err.saturating_sub(tol), ar_gap);
            let better = match &best {
                None => true,
                Some(((e, g), _)) => key.0 < *e || (key.0 == *e && key.1 < *g),
            };
            if better {
                best = Some((key, (w, h)));
            }
            // past the target aspect with an acceptable area, wider only drifts away
            if w as f64 / h as f64 > ar * 4.0 && best.is_some_and(|((e, _), _)| e == 0) {
                break;
            }
        }
        w += 1;
    }
    best.expect("area >= 1 has a candidate").1
}

/// Give every module `k ~ U{macro_range}` rectangular components whose areas
/// sum to `round(fill_ratio * area)` within one cell. One component per
/// module is tagged as a standard-cell cluster.
pub fn synthesize_components(netlist: &Netlist, seed: u64, cfg: &SynthConfig) -> Result<Netlist> {
    if !(cfg.fill_ratio > 0.0 && cfg.fill_ratio <= 1.0) {
        return Err(Error::Config("fill ratio must lie in (0, 1]".into()));
    }
    if cfg.macro_range.0 < 1 || cfg.macro_range.0 > cfg.macro_range.1 {
        return Err(Error::Config("invalid component count range".into()));
    }
    let mut rng = stream(seed, Stream::Synthesis);
    let mut out = netlist.clone();
    for m in &mut out.modules {
        let target = (cfg.fill_ratio * m.area as f64).round() as u64;
        let k_min = cfg.macro_range.0 as u64;
        if target < k_min {
            return Err(Error::ModuleTooSmall {
                name: m.name.clone(),
                area: m.area,
            });
        }
        let k = draw_macro_count(&mut rng, cfg.macro_range).min(target as usize);
        let parts = split_area(&mut rng, target, k);
        let cluster = rng.gen_range(0..k);
        let mut carry: i64 = 0;
        let mut comps = Vec::with_capacity(k);
        for (j, &part) in parts.iter().enumerate() {
            let want = (part as i64 + carry).max(1) as u64;
            let ar = rng.gen_range(1.0..=cfg.max_aspect);
            let tol = if j + 1 == k { 1 } else { (want / 50).max(1) };
            let (w, h) = snap_dims(want, ar, tol);
            carry = want as i64 - (w * h) as i64;
            let (w, h) = if rng.gen_bool(0.5) { (w, h) } else { (h, w) };
            let kind = if j == cluster {
                ComponentKind::Cluster
            } else {
                ComponentKind::Macro
            };
            comps.push(Component::new(w, h, kind));
        }
        m.components = comps;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::ModuleSpec;
    use rand::SeedableRng;

    fn netlist(areas: &[u64]) -> Netlist {
        Netlist {
            modules: areas
                .iter()
                .enumerate()
                .map(|(i, &a)| ModuleSpec {
                    name: format!("m{i}"),
                    area: a,
                    components: vec![],
                })
                .collect(),
            nets: vec![],
        }
    }

    #[test]
    fn area_hundred_fills_eighty() {
        for seed in 0..50 {
            let out = synthesize_components(&netlist(&[100]), seed, &SynthConfig::default()).unwrap();
            let m = &out.modules[0];
            assert!(m.component_area().abs_diff(80) <= 1, "seed {seed}: {:?}", m.components);
            assert!((2..=6).contains(&m.components.len()));
            let clusters = m.components.iter().filter(|c| c.kind == ComponentKind::Cluster).count();
            assert_eq!(clusters, 1);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let n = netlist(&[500, 1200, 77]);
        let a = synthesize_components(&n, 9, &SynthConfig::default()).unwrap();
        let b = synthesize_components(&n, 9, &SynthConfig::default()).unwrap();
        assert_eq!(a, b);
        let c = synthesize_components(&n, 10, &SynthConfig::default()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn tiny_module_is_rejected() {
        let err = synthesize_components(&netlist(&[100, 1]), 0, &SynthConfig::default()).unwrap_err();
        assert!(matches!(err, Error::ModuleTooSmall { area: 1, .. }));
    }

    #[test]
    fn snapped_dims_respect_tolerance() {
        for area in 1..400u64 {
            for ar in [1.0, 1.7, 3.0] {
                let (w, h) = snap_dims(area, ar, 1);
                assert!((w * h).abs_diff(area as usize) <= 1, "{area} {ar}");
                assert!(w >= h);
            }
        }
        assert_eq!(snap_dims(12, 3.0, 0), (6, 2));
        assert_eq!(snap_dims(16, 1.0, 0), (4, 4));
    }

    #[test]
    fn macro_count_frequencies() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 10_000usize;
        let mut hits = [0usize; 7];
        for _ in 0..n {
            hits[draw_macro_count(&mut rng, (2, 6))] += 1;
        }
        let p = 0.2;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        for (k, &h) in hits.iter().enumerate().skip(2) {
            assert!((h as f64 - n as f64 * p).abs() <= 3.0 * sigma, "k={k}: {h}");
        }
        assert_eq!(hits[0] + hits[1], 0);
    }
}
