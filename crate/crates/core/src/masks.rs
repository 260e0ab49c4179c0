//! Position mask and wiremask for legalizing one rectangular module against
//! the rest of a layout.
//!
//! Anchors are lower-left cells. The moving module's own cells count as free,
//! so callers may leave it painted on the canvas.

use crate::error::{Error, Result};
use crate::geom::{CellCoord, ModuleId};
use crate::layout::Layout;
use crate::metrics::bbox_of;
use crate::netlist::Net;

/// Per-cell legality and HPWL increment. Illegal cells hold `+inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskGrid {
    pub width: usize,
    pub height: usize,
    delta: Vec<f64>,
}

impl MaskGrid {
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.delta[y * self.width + x]
    }

    pub fn is_legal(&self, x: usize, y: usize) -> bool {
        self.get(x, y).is_finite()
    }

    pub fn legal_count(&self) -> usize {
        self.delta.iter().filter(|d| d.is_finite()).count()
    }
}

/// Boolean grid of legal anchors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionMask {
    pub width: usize,
    pub height: usize,
    legal: Vec<bool>,
}

impl PositionMask {
    pub fn is_legal(&self, x: usize, y: usize) -> bool {
        self.legal[y * self.width + x]
    }

    pub fn legal_count(&self) -> usize {
        self.legal.iter().filter(|&&l| l).count()
    }

    pub fn anchors(&self) -> impl Iterator<Item = CellCoord> + '_ {
        self.legal
            .iter()
            .enumerate()
            .filter(|(_, &l)| l)
            .map(|(i, _)| CellCoord::new(i % self.width, i / self.width))
    }
}

/// Summed-area table of cells owned by anything other than `moving`.
struct Occupancy {
    stride: usize,
    sums: Vec<u32>,
}

impl Occupancy {
    fn new(layout: &Layout, moving: ModuleId) -> Self {
        let (w, h) = (layout.width(), layout.height());
        let stride = w + 1;
        let mut sums = vec![0u32; stride * (h + 1)];
        let canvas = layout.canvas();
        for y in 0..h {
            let mut row = 0u32;
            for (x, owner) in canvas.row(y).enumerate() {
                row += matches!(owner, Some(m) if m != moving) as u32;
                sums[(y + 1) * stride + x + 1] = sums[y * stride + x + 1] + row;
            }
        }
        Self { stride, sums }
    }

    #[inline]
    fn is_free(&self, x: usize, y: usize, w: usize, h: usize) -> bool {
        let s = self.stride;
        let (x1, y1) = (x + w, y + h);
        self.sums[y1 * s + x1] + self.sums[y * s + x] == self.sums[y * s + x1] + self.sums[y1 * s + x]
    }
}

pub fn position_mask(layout: &Layout, dims: (usize, usize), moving: ModuleId) -> PositionMask {
    let (w, h) = (layout.width(), layout.height());
    let mut legal = vec![false; w * h];
    if dims.0 <= w && dims.1 <= h && dims.0 > 0 && dims.1 > 0 {
        let occ = Occupancy::new(layout, moving);
        for y in 0..=h - dims.1 {
            for x in 0..=w - dims.0 {
                legal[y * w + x] = occ.is_free(x, y, dims.0, dims.1);
            }
        }
    }
    PositionMask {
        width: w,
        height: h,
        legal,
    }
}

/// Separable HPWL increment: `dx[x] + dy[y]` is the increment of placing the
/// module with anchor `(x, y)`.
fn axis_increments(layout: &Layout, nets: &[&Net], moving: ModuleId, dims: (usize, usize)) -> (Vec<f64>, Vec<f64>) {
    let (w, h) = (layout.width(), layout.height());
    let mut dx = vec![0.0; w];
    let mut dy = vec![0.0; h];
    for net in nets {
        let others = net
            .modules
            .iter()
            .filter(|&&m| m != moving)
            .filter_map(|&m| layout.centroid(m))
            .chain(net.fixed_points.iter().copied());
        let Some((x0, y0, x1, y1)) = bbox_of(others) else {
            continue;
        };
        let half_w = dims.0 as f64 / 2.0;
        for (x, d) in dx.iter_mut().enumerate() {
            let c = x as f64 + half_w;
            *d += (x1.max(c) - x0.min(c)) - (x1 - x0);
        }
        let half_h = dims.1 as f64 / 2.0;
        for (y, d) in dy.iter_mut().enumerate() {
            let c = y as f64 + half_h;
            *d += (y1.max(c) - y0.min(c)) - (y1 - y0);
        }
    }
    (dx, dy)
}

fn nets_with(nets: &[Net], moving: ModuleId) -> Vec<&Net> {
    nets.iter().filter(|n| n.contains(moving)).collect()
}

/// HPWL increment of placing `moving` (with the given dims) at every legal
/// anchor, relative to the layout without it.
pub fn wiremask(layout: &Layout, nets: &[Net], moving: ModuleId, dims: (usize, usize)) -> MaskGrid {
    let pos = position_mask(layout, dims, moving);
    let (dx, dy) = axis_increments(layout, &nets_with(nets, moving), moving, dims);
    let (w, h) = (layout.width(), layout.height());
    let mut delta = vec![f64::INFINITY; w * h];
    for y in 0..h {
        for x in 0..w {
            if pos.is_legal(x, y) {
                delta[y * w + x] = dx[x] + dy[y];
            }
        }
    }
    MaskGrid {
        width: w,
        height: h,
        delta,
    }
}

/// Legal anchor with the smallest positive HPWL increment, falling back to
/// zero-increment anchors. Ties go to the lowest `(y, x)`.
pub fn greedy_place(layout: &Layout, moving: ModuleId, dims: (usize, usize), nets: &[Net]) -> Result<CellCoord> {
    let relevant = nets_with(nets, moving);
    greedy_place_among(layout, moving, dims, &relevant)
}

/// As [`greedy_place`], with the module's nets already selected.
pub(crate) fn greedy_place_among(
    layout: &Layout,
    moving: ModuleId,
    dims: (usize, usize),
    nets: &[&Net],
) -> Result<CellCoord> {
    let (w, h) = (layout.width(), layout.height());
    if dims.0 > w || dims.1 > h || dims.0 == 0 || dims.1 == 0 {
        return Err(Error::NoRoom(moving));
    }
    let occ = Occupancy::new(layout, moving);
    let (dx, dy) = axis_increments(layout, nets, moving, dims);
    let mut best_pos: Option<(f64, CellCoord)> = None;
    let mut best_zero: Option<CellCoord> = None;
    for (y, &ry) in dy.iter().enumerate().take(h - dims.1 + 1) {
        for (x, &rx) in dx.iter().enumerate().take(w - dims.0 + 1) {
            let d = rx + ry;
            let improves = if d > 0.0 {
                best_pos.is_none_or(|(b, _)| d < b)
            } else {
                best_pos.is_none() && best_zero.is_none()
            };
            if improves && occ.is_free(x, y, dims.0, dims.1) {
                if d > 0.0 {
                    best_pos = Some((d, CellCoord::new(x, y)));
                } else {
                    best_zero = Some(CellCoord::new(x, y));
                }
            }
        }
    }
    best_pos.map(|(_, c)| c).or(best_zero).ok_or(Error::NoRoom(moving))
}
