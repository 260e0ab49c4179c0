//! Grid geometry shared by every stage: cells, rectangles, the owned canvas
//! and connected rectilinear cell regions.
//!
//! All coordinates are integer cells with the origin at the lower-left of the
//! canvas. A cell `(x, y)` covers the unit square `[x, x+1) x [y, y+1)`, so its
//! center sits at `(x + 0.5, y + 0.5)`.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModuleId(pub u32);

impl ModuleId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ModuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Cell coordinate. Ordering is row-major: `y` first, then `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CellCoord {
    pub x: usize,
    pub y: usize,
}

impl CellCoord {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }

    /// 4-neighbors that have non-negative coordinates.
    pub fn neighbors(self) -> impl Iterator<Item = CellCoord> {
        let CellCoord { x, y } = self;
        [
            x.checked_sub(1).map(|x| CellCoord::new(x, y)),
            Some(CellCoord::new(x + 1, y)),
            y.checked_sub(1).map(|y| CellCoord::new(x, y)),
            Some(CellCoord::new(x, y + 1)),
        ]
        .into_iter()
        .flatten()
    }
}

impl PartialOrd for CellCoord {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CellCoord {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.y, self.x).cmp(&(other.y, other.x))
    }
}

/// Axis-aligned rectangle of cells anchored at its lower-left cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Rect {
    pub const fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        Self { x, y, w, h }
    }

    #[inline]
    pub fn area(&self) -> usize {
        self.w * self.h
    }

    /// One past the last column.
    #[inline]
    pub fn right(&self) -> usize {
        self.x + self.w
    }

    /// One past the last row.
    #[inline]
    pub fn top(&self) -> usize {
        self.y + self.h
    }

    #[inline]
    pub fn contains(&self, c: CellCoord) -> bool {
        c.x >= self.x && c.x < self.right() && c.y >= self.y && c.y < self.top()
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        other.x >= self.x && other.y >= self.y && other.right() <= self.right() && other.top() <= self.top()
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        self.x < other.right() && other.x < self.right() && self.y < other.top() && other.y < self.top()
    }

    /// Long side over short side, always `>= 1`.
    pub fn aspect_ratio(&self) -> f64 {
        aspect_ratio(self.w, self.h)
    }

    /// Center in continuous coordinates.
    pub fn center(&self) -> (f64, f64) {
        (self.x as f64 + self.w as f64 / 2.0, self.y as f64 + self.h as f64 / 2.0)
    }

    pub fn cells(&self) -> impl Iterator<Item = CellCoord> + '_ {
        (self.y..self.top()).flat_map(move |y| (self.x..self.right()).map(move |x| CellCoord::new(x, y)))
    }

    /// Number of unit edges shared by two disjoint rectangles.
    pub fn touching_length(&self, other: &Rect) -> usize {
        let overlap = |a0: usize, a1: usize, b0: usize, b1: usize| a1.min(b1).saturating_sub(a0.max(b0));
        if self.right() == other.x || other.right() == self.x {
            overlap(self.y, self.top(), other.y, other.top())
        } else if self.top() == other.y || other.top() == self.y {
            overlap(self.x, self.right(), other.x, other.right())
        } else {
            0
        }
    }
}

pub fn aspect_ratio(w: usize, h: usize) -> f64 {
    let (lo, hi) = if w < h { (w, h) } else { (h, w) };
    hi as f64 / lo as f64
}

/// Fixed `width x height` grid where every cell is blank or owned by a module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridCanvas {
    width: usize,
    height: usize,
    owner: Vec<u32>,
}

const BLANK: u32 = u32::MAX;

impl GridCanvas {
    pub fn new(width: usize, height: usize) -> Self {
        assert!(width >= 1 && height >= 1, "canvas must be at least 1x1");
        Self {
            width,
            height,
            owner: vec![BLANK; width * height],
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn cell_count(&self) -> usize {
        self.owner.len()
    }

    #[inline]
    pub fn in_bounds(&self, c: CellCoord) -> bool {
        c.x < self.width && c.y < self.height
    }

    pub fn rect(&self) -> Rect {
        Rect::new(0, 0, self.width, self.height)
    }

    pub fn contains_rect(&self, r: &Rect) -> bool {
        r.w >= 1 && r.h >= 1 && r.right() <= self.width && r.top() <= self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Option<ModuleId> {
        match self.owner[y * self.width + x] {
            BLANK => None,
            id => Some(ModuleId(id)),
        }
    }

    #[inline]
    pub fn at(&self, c: CellCoord) -> Option<ModuleId> {
        self.get(c.x, c.y)
    }

    #[inline]
    pub fn is_blank(&self, x: usize, y: usize) -> bool {
        self.owner[y * self.width + x] == BLANK
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, owner: Option<ModuleId>) {
        self.owner[y * self.width + x] = owner.map_or(BLANK, |m| m.0);
    }

    pub fn blank_count(&self) -> usize {
        self.owner.iter().filter(|&&o| o == BLANK).count()
    }

    /// Lowest `(y, x)` blank cell.
    pub fn first_blank(&self) -> Option<CellCoord> {
        self.owner
            .iter()
            .position(|&o| o == BLANK)
            .map(|i| CellCoord::new(i % self.width, i / self.width))
    }

    pub fn row(&self, y: usize) -> impl Iterator<Item = Option<ModuleId>> + '_ {
        self.owner[y * self.width..(y + 1) * self.width]
            .iter()
            .map(|&o| (o != BLANK).then_some(ModuleId(o)))
    }
}

/// Non-empty, 4-connected set of cells kept sorted in row-major order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RectilinearRegion {
    cells: Vec<CellCoord>,
}

impl RectilinearRegion {
    pub fn new(mut cells: Vec<CellCoord>) -> Result<Self> {
        cells.sort_unstable();
        cells.dedup();
        if cells.is_empty() {
            return Err(Error::EmptyRegion);
        }
        if !is_connected(&cells) {
            return Err(Error::DisconnectedRegion);
        }
        Ok(Self { cells })
    }

    pub fn from_rect(r: Rect) -> Self {
        assert!(r.w >= 1 && r.h >= 1);
        Self {
            cells: r.cells().collect(),
        }
    }

    pub fn cells(&self) -> &[CellCoord] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, c: CellCoord) -> bool {
        self.cells.binary_search(&c).is_ok()
    }

    pub fn bounding_rect(&self) -> Rect {
        bounding_rect(&self.cells).expect("region is non-empty")
    }

    pub fn is_rectangular(&self) -> bool {
        self.bounding_rect().area() == self.cells.len()
    }

    /// Mean of cell centers.
    pub fn centroid(&self) -> (f64, f64) {
        let n = self.cells.len() as f64;
        let (sx, sy) = self
            .cells
            .iter()
            .fold((0.0, 0.0), |(sx, sy), c| (sx + c.x as f64 + 0.5, sy + c.y as f64 + 0.5));
        (sx / n, sy / n)
    }

    /// Unit edges where a cell of `self` is 4-adjacent to a cell of `other`.
    pub fn common_edge_length(&self, other: &RectilinearRegion) -> Result<usize> {
        let theirs: HashSet<CellCoord> = other.cells.iter().copied().collect();
        let mut shared = 0;
        for &c in &self.cells {
            if theirs.contains(&c) {
                return Err(Error::OverlappingRegions(c));
            }
            shared += c.neighbors().filter(|n| theirs.contains(n)).count();
        }
        Ok(shared)
    }

    /// Vertices (convex and concave) of the region outline.
    pub fn corner_count(&self) -> usize {
        let bb = self.bounding_rect();
        let inside = |x: isize, y: isize| x >= 0 && y >= 0 && self.contains(CellCoord::new(x as usize, y as usize));
        let mut corners = 0;
        for vy in bb.y..=bb.top() {
            for vx in bb.x..=bb.right() {
                let (vx, vy) = (vx as isize, vy as isize);
                corners += vertex_corners(
                    inside(vx - 1, vy - 1),
                    inside(vx, vy - 1),
                    inside(vx - 1, vy),
                    inside(vx, vy),
                );
            }
        }
        corners
    }

    pub fn translate(&self, dx: usize, dy: usize) -> Self {
        Self {
            cells: self.cells.iter().map(|c| CellCoord::new(c.x + dx, c.y + dy)).collect(),
        }
    }
}

pub fn bounding_rect(cells: &[CellCoord]) -> Result<Rect> {
    let first = cells.first().ok_or(Error::EmptyRegion)?;
    let (mut x0, mut y0, mut x1, mut y1) = (first.x, first.y, first.x, first.y);
    for c in cells {
        x0 = x0.min(c.x);
        y0 = y0.min(c.y);
        x1 = x1.max(c.x);
        y1 = y1.max(c.y);
    }
    Ok(Rect::new(x0, y0, x1 - x0 + 1, y1 - y0 + 1))
}

/// Outline vertices contributed by the lattice point surrounded by the four
/// cells lower-left, lower-right, upper-left, upper-right. A diagonal pair
/// pinches two vertices into one point.
#[inline]
pub(crate) fn vertex_corners(ll: bool, lr: bool, ul: bool, ur: bool) -> usize {
    match (ll as u8) + (lr as u8) + (ul as u8) + (ur as u8) {
        1 | 3 => 1,
        2 if ll == ur => 2,
        _ => 0,
    }
}

fn is_connected(sorted: &[CellCoord]) -> bool {
    let set: HashSet<CellCoord> = sorted.iter().copied().collect();
    let mut seen = HashSet::with_capacity(set.len());
    let mut queue = VecDeque::from([sorted[0]]);
    seen.insert(sorted[0]);
    while let Some(c) = queue.pop_front() {
        for n in c.neighbors() {
            if set.contains(&n) && seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    seen.len() == set.len()
}
