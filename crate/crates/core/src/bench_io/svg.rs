//! SVG rendering of a layout. Modules are light fills with dark outlines,
//! macros purple and standard-cell clusters red. The y axis points up.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::geom::{ModuleId, Rect};
use crate::layout::Layout;
use crate::netlist::ComponentKind;

const CELL_PX: usize = 4;
const MODULE_FILL: &str = "#fff4c2";
const MACRO_FILL: &str = "#8e44ad";
const CLUSTER_FILL: &str = "#d62728";

/// Boundary segments of a module as `(x0, y0, x1, y1)` in grid units,
/// with collinear unit edges merged.
fn outline(layout: &Layout, id: ModuleId) -> Vec<(usize, usize, usize, usize)> {
    let Some(bb) = layout.bbox(id) else {
        return Vec::new();
    };
    let owns = |x: isize, y: isize| {
        x >= 0
            && y >= 0
            && layout
                .canvas()
                .in_bounds(crate::geom::CellCoord::new(x as usize, y as usize))
            && layout.canvas().get(x as usize, y as usize) == Some(id)
    };
    let mut segs = Vec::new();
    // horizontal edges on line y, between rows y-1 and y
    for y in bb.y..=bb.top() {
        let mut start = None;
        for x in bb.x..=bb.right() {
            let edge = x < bb.right() && owns(x as isize, y as isize - 1) != owns(x as isize, y as isize);
            match (edge, start) {
                (true, None) => start = Some(x),
                (false, Some(s)) => {
                    segs.push((s, y, x, y));
                    start = None;
                }
                _ => {}
            }
        }
    }
    for x in bb.x..=bb.right() {
        let mut start = None;
        for y in bb.y..=bb.top() {
            let edge = y < bb.top() && owns(x as isize - 1, y as isize) != owns(x as isize, y as isize);
            match (edge, start) {
                (true, None) => start = Some(y),
                (false, Some(s)) => {
                    segs.push((x, s, x, y));
                    start = None;
                }
                _ => {}
            }
        }
    }
    segs
}

pub fn render_svg(layout: &Layout) -> String {
    let (w, h) = (layout.width(), layout.height());
    let (pw, ph) = (w * CELL_PX, h * CELL_PX);
    let px = |x: usize| x * CELL_PX;
    let py = |y: usize| ph - y * CELL_PX;
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{pw}" height="{ph}" viewBox="0 0 {pw} {ph}">"#
    )
    .unwrap();
    writeln!(
        s,
        r#"<rect x="0" y="0" width="{pw}" height="{ph}" fill="white" stroke="black"/>"#
    )
    .unwrap();
    let rect = |s: &mut String, r: &Rect, fill: &str| {
        writeln!(
            s,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{fill}"/>"#,
            px(r.x),
            py(r.top()),
            r.w * CELL_PX,
            r.h * CELL_PX
        )
        .unwrap();
    };
    for y in 0..h {
        let mut x = 0;
        while x < w {
            if layout.canvas().get(x, y).is_some() {
                let start = x;
                while x < w && layout.canvas().get(x, y).is_some() {
                    x += 1;
                }
                rect(&mut s, &Rect::new(start, y, x - start, 1), MODULE_FILL);
            } else {
                x += 1;
            }
        }
    }
    for id in layout.module_ids() {
        let m = layout.module(id);
        for (c, p) in m.components.iter().zip(&m.placements) {
            if let Some(r) = p {
                let fill = match c.kind {
                    ComponentKind::Macro => MACRO_FILL,
                    ComponentKind::Cluster => CLUSTER_FILL,
                };
                rect(&mut s, r, fill);
            }
        }
    }
    for id in layout.module_ids() {
        let mut d = String::new();
        for (x0, y0, x1, y1) in outline(layout, id) {
            write!(d, "M{} {}L{} {}", px(x0), py(y0), px(x1), py(y1)).unwrap();
        }
        if !d.is_empty() {
            writeln!(s, r#"<path d="{d}" fill="none" stroke="black" stroke-width="1"/>"#).unwrap();
        }
        if let Some((cx, cy)) = layout.centroid(id) {
            writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="middle">{}</text>"#,
                cx * CELL_PX as f64,
                ph as f64 - cy * CELL_PX as f64,
                layout.module(id).name
            )
            .unwrap();
        }
    }
    s.push_str("</svg>\n");
    s
}

pub fn emit_svg(layout: &Layout, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, render_svg(layout))?;
    Ok(())
}
