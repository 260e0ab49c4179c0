//! Plain-text layout snapshots.
//!
//! ```text
//! FLORA-LAYOUT 1
//! canvas <width> <height>
//! stage <tag>
//! module <name> <runs> <components>
//! r <y> <x> <len>            one per horizontal run of owned cells
//! c <kind> <w> <h> placed <x> <y> <w> <h>
//! c <kind> <w> <h> unplaced
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::{CellCoord, ModuleId, Rect};
use crate::layout::{Layout, ModuleLayout, Stage};
use crate::netlist::{Component, ComponentKind};

const MAGIC: &str = "FLORA-LAYOUT 1";

fn runs(layout: &Layout, id: ModuleId) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    let Some(bb) = layout.bbox(id) else {
        return out;
    };
    for y in bb.y..bb.top() {
        let mut x = bb.x;
        while x < bb.right() {
            if layout.canvas().get(x, y) == Some(id) {
                let start = x;
                while x < bb.right() && layout.canvas().get(x, y) == Some(id) {
                    x += 1;
                }
                out.push((y, start, x - start));
            } else {
                x += 1;
            }
        }
    }
    out
}

pub fn layout_to_string(layout: &Layout) -> Result<String> {
    let mut s = String::new();
    writeln!(s, "{MAGIC}").unwrap();
    writeln!(s, "canvas {} {}", layout.width(), layout.height()).unwrap();
    writeln!(s, "stage {}", layout.stage).unwrap();
    for id in layout.module_ids() {
        let m = layout.module(id);
        if m.name.is_empty() || m.name.contains(char::is_whitespace) {
            return Err(Error::InvalidLayout(format!(
                "module name `{}` cannot be written",
                m.name
            )));
        }
        let r = runs(layout, id);
        writeln!(s, "module {} {} {}", m.name, r.len(), m.components.len()).unwrap();
        for (y, x, len) in r {
            writeln!(s, "r {y} {x} {len}").unwrap();
        }
        for (c, p) in m.components.iter().zip(&m.placements) {
            match p {
                Some(p) => writeln!(
                    s,
                    "c {} {} {} placed {} {} {} {}",
                    c.kind.as_str(),
                    c.w,
                    c.h,
                    p.x,
                    p.y,
                    p.w,
                    p.h
                ),
                None => writeln!(s, "c {} {} {} unplaced", c.kind.as_str(), c.w, c.h),
            }
            .unwrap();
        }
    }
    Ok(s)
}

pub fn save_layout(layout: &Layout, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, layout_to_string(layout)?)?;
    Ok(())
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    path: &'a Path,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next_fields(&mut self) -> Result<Option<Vec<&'a str>>> {
        for (i, l) in self.inner.by_ref() {
            self.line = i + 1;
            let f: Vec<&str> = l.split_whitespace().collect();
            if !f.is_empty() {
                return Ok(Some(f));
            }
        }
        Ok(None)
    }

    fn expect(&mut self, what: &str) -> Result<Vec<&'a str>> {
        match self.next_fields()? {
            Some(f) if f[0] == what => Ok(f),
            Some(f) => Err(self.err(format!("expected `{what}`, found `{}`", f[0]))),
            None => Err(self.err(format!("expected `{what}`, found end of file"))),
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            line: self.line,
            msg: msg.into(),
        }
    }

    fn nums<const N: usize>(&self, f: &[&str]) -> Result<[usize; N]> {
        if f.len() != N {
            return Err(self.err(format!("expected {N} numbers")));
        }
        let mut out = [0; N];
        for (o, s) in out.iter_mut().zip(f) {
            *o = s.parse().map_err(|_| self.err(format!("bad number `{s}`")))?;
        }
        Ok(out)
    }
}

pub fn layout_from_str(text: &str, path: &Path) -> Result<Layout> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        path,
        line: 0,
    };
    match lines.next_fields()? {
        Some(f) if f.join(" ") == MAGIC => {}
        _ => return Err(lines.err("missing FLORA-LAYOUT header")),
    }
    let f = lines.expect("canvas")?;
    let [width, height] = lines.nums(&f[1..])?;
    if width == 0 || height == 0 {
        return Err(lines.err("empty canvas"));
    }
    let f = lines.expect("stage")?;
    let stage: Stage = f.get(1).copied().unwrap_or_default().parse()?;

    let mut modules = Vec::new();
    let mut cells: Vec<Vec<CellCoord>> = Vec::new();
    while let Some(f) = lines.next_fields()? {
        if f[0] != "module" || f.len() != 4 {
            return Err(lines.err("expected `module <name> <runs> <components>`"));
        }
        let name = f[1].to_string();
        let [nruns, ncomps] = lines.nums(&f[2..])?;
        let mut owned = Vec::new();
        for _ in 0..nruns {
            let f = lines.expect("r")?;
            let [y, x, len] = lines.nums(&f[1..])?;
            if y >= height || x + len > width || len == 0 {
                return Err(lines.err(format!("run outside the {width}x{height} canvas")));
            }
            owned.extend((x..x + len).map(|x| CellCoord::new(x, y)));
        }
        let mut m = ModuleLayout::new(name, Vec::new());
        for _ in 0..ncomps {
            let f = lines.expect("c")?;
            if f.len() < 5 {
                return Err(lines.err("short component line"));
            }
            let kind = ComponentKind::parse(f[1]).ok_or_else(|| lines.err(format!("unknown kind `{}`", f[1])))?;
            let [w, h] = lines.nums(&f[2..4])?;
            m.components.push(Component::new(w, h, kind));
            m.placements.push(match f[4] {
                "unplaced" if f.len() == 5 => None,
                "placed" => {
                    let [x, y, pw, ph] = lines.nums(&f[5..])?;
                    Some(Rect::new(x, y, pw, ph))
                }
                _ => return Err(lines.err("expected `placed x y w h` or `unplaced`")),
            });
        }
        modules.push(m);
        cells.push(owned);
    }

    let mut owner: Vec<Option<usize>> = vec![None; width * height];
    let mut overlaps = BTreeSet::new();
    for (i, owned) in cells.iter().enumerate() {
        for c in owned {
            let slot = &mut owner[c.y * width + c.x];
            match *slot {
                Some(j) => {
                    overlaps.insert((j, i));
                }
                None => *slot = Some(i),
            }
        }
    }
    if !overlaps.is_empty() {
        let pairs = overlaps
            .into_iter()
            .map(|(a, b)| (modules[a].name.clone(), modules[b].name.clone()))
            .collect();
        return Err(Error::LayoutOverlap(pairs));
    }
    let mut layout = Layout::new(width, height, modules);
    for (i, owned) in cells.into_iter().enumerate() {
        layout.assign_cells(ModuleId(i as u32), owned);
    }
    layout.stage = stage;
    layout.validate()?;
    Ok(layout)
}

pub fn load_layout(path: impl AsRef<Path>) -> Result<Layout> {
    let path = path.as_ref();
    layout_from_str(&std::fs::read_to_string(path).map_err(Error::read(path))?, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Layout {
        let mut l = Layout::new(
            6,
            4,
            vec![
                ModuleLayout::new(
                    "a",
                    vec![
                        Component::new(2, 1, ComponentKind::Macro),
                        Component::new(1, 1, ComponentKind::Cluster),
                    ],
                ),
                ModuleLayout::new("b", vec![]),
                ModuleLayout::new("c", vec![Component::new(1, 1, ComponentKind::Macro)]),
            ],
        );
        l.paint_rect(ModuleId(0), Rect::new(0, 0, 3, 2));
        l.assign_cells(ModuleId(0), [CellCoord::new(0, 2)]);
        l.paint_rect(ModuleId(1), Rect::new(3, 0, 3, 4));
        l.module_mut(ModuleId(0)).placements[0] = Some(Rect::new(0, 0, 1, 2));
        l.stage = Stage::Stage2;
        l
    }

    #[test]
    fn round_trip() {
        let l = sample();
        let text = layout_to_string(&l).unwrap();
        let back = layout_from_str(&text, Path::new("x")).unwrap();
        assert_eq!(back, l);
        assert_eq!(layout_to_string(&back).unwrap(), text);
    }

    #[test]
    fn shared_cell_is_rejected() {
        let text = "FLORA-LAYOUT 1\ncanvas 4 4\nstage init\nmodule a 1 0\nr 0 0 2\nmodule b 1 0\nr 0 1 2\n";
        match layout_from_str(text, Path::new("x")) {
            Err(Error::LayoutOverlap(pairs)) => assert_eq!(pairs, vec![("a".to_string(), "b".to_string())]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_run_reports_line() {
        let text = "FLORA-LAYOUT 1\ncanvas 4 4\nstage init\nmodule a 1 0\nr 0 3 2\n";
        assert!(matches!(
            layout_from_str(text, Path::new("x")),
            Err(Error::Parse { line: 5, .. })
        ));
    }
}
