//! GSRC / MCNC bookshelf `.blocks` and `.nets` readers.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geom::ModuleId;
use crate::netlist::{ModuleSpec, Net, Netlist};

#[derive(Debug, Clone, PartialEq)]
pub enum BlockShape {
    Soft { min_ar: f64, max_ar: f64 },
    Hard { vertices: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub name: String,
    /// Physical area in the file's units.
    pub area: f64,
    pub shape: BlockShape,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Blocks {
    pub modules: Vec<Block>,
    pub terminals: Vec<String>,
}

impl Blocks {
    pub fn find(&self, name: &str) -> Option<usize> {
        self.modules.iter().position(|b| b.name == name)
    }

    pub fn is_terminal(&self, name: &str) -> bool {
        self.terminals.iter().any(|t| t == name)
    }
}

/// A net as written in the file: block indices plus terminal names.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NetDecl {
    pub blocks: Vec<usize>,
    pub terminals: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Nets {
    /// `NumNets` from the header, when present.
    pub declared: Option<usize>,
    pub nets: Vec<NetDecl>,
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Lines that carry data: comments, blank lines and the format banner are
/// dropped. Yields 1-based line numbers.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() || line.starts_with("UCSC") || line.starts_with("UCLA") {
            None
        } else {
            Some((i + 1, line))
        }
    })
}

/// `Key : value` header line.
fn header(line: &str) -> Option<(&str, &str)> {
    let (k, v) = line.split_once(':')?;
    let k = k.trim();
    k.starts_with("Num").then_some((k, v.trim()))
}

fn shoelace(points: &[(f64, f64)]) -> f64 {
    let n = points.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let (x0, y0) = points[i];
            let (x1, y1) = points[(i + 1) % n];
            x0 * y1 - x1 * y0
        })
        .sum();
    twice.abs() / 2.0
}

fn parse_vertices(s: &str) -> Option<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    let mut rest = s.trim();
    while !rest.is_empty() {
        let open = rest.strip_prefix('(')?;
        let (inner, tail) = open.split_once(')')?;
        let (x, y) = inner.split_once(',')?;
        out.push((x.trim().parse().ok()?, y.trim().parse().ok()?));
        rest = tail.trim_start();
    }
    Some(out)
}

pub fn parse_blocks_str(text: &str, path: &Path) -> Result<Blocks> {
    let mut blocks = Blocks::default();
    for (n, line) in data_lines(text) {
        if header(line).is_some() {
            continue;
        }
        let mut fields = line.splitn(3, char::is_whitespace);
        let name = fields.next().unwrap_or_default().to_string();
        let kind = fields.next().map(str::trim).unwrap_or_default();
        let rest = fields.next().unwrap_or("").trim();
        match kind {
            "terminal" => blocks.terminals.push(name),
            "softrectangular" => {
                let nums: Vec<f64> = rest
                    .split_whitespace()
                    .map(str::parse)
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| parse_err(path, n, "bad soft block numbers"))?;
                let [area, min_ar, max_ar] = nums[..] else {
                    return Err(parse_err(path, n, "soft block needs area, min and max aspect ratio"));
                };
                if area <= 0.0 {
                    return Err(parse_err(path, n, "block area must be positive"));
                }
                blocks.modules.push(Block {
                    name,
                    area,
                    shape: BlockShape::Soft { min_ar, max_ar },
                });
            }
            "hardrectilinear" => {
                let (count, verts) = rest
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| parse_err(path, n, "hard block needs a vertex count"))?;
                let count: usize = count.parse().map_err(|_| parse_err(path, n, "bad vertex count"))?;
                let vertices = parse_vertices(verts).ok_or_else(|| parse_err(path, n, "bad vertex list"))?;
                if vertices.len() != count || count < 4 {
                    return Err(parse_err(
                        path,
                        n,
                        format!("expected {count} vertices, found {}", vertices.len()),
                    ));
                }
                let area = shoelace(&vertices);
                if area <= 0.0 {
                    return Err(parse_err(path, n, "block area must be positive"));
                }
                blocks.modules.push(Block {
                    name,
                    area,
                    shape: BlockShape::Hard { vertices },
                });
            }
            other => return Err(parse_err(path, n, format!("unknown block type `{other}`"))),
        }
    }
    Ok(blocks)
}

pub fn parse_blocks(path: impl AsRef<Path>) -> Result<Blocks> {
    let path = path.as_ref();
    parse_blocks_str(&std::fs::read_to_string(path).map_err(Error::read(path))?, path)
}

pub fn parse_nets_str(text: &str, path: &Path, blocks: &Blocks) -> Result<Nets> {
    let mut out = Nets::default();
    let mut lines = data_lines(text).peekable();
    while let Some((n, line)) = lines.next() {
        if let Some((key, value)) = header(line) {
            match key {
                "NumNets" => {
                    out.declared = Some(value.parse().map_err(|_| parse_err(path, n, "bad NumNets"))?);
                }
                "NumPins" => {}
                _ => return Err(parse_err(path, n, format!("unknown header `{key}`"))),
            }
            continue;
        }
        let degree = line
            .strip_prefix("NetDegree")
            .and_then(|r| r.trim_start().strip_prefix(':'))
            .ok_or_else(|| parse_err(path, n, "expected `NetDegree : d`"))?;
        let degree: usize = degree
            .split_whitespace()
            .next()
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| parse_err(path, n, "bad net degree"))?;
        let mut net = NetDecl::default();
        for _ in 0..degree {
            let (pn, pin) = lines
                .next()
                .ok_or_else(|| parse_err(path, n, format!("net ends early, expected {degree} pins")))?;
            let name = pin.split_whitespace().next().unwrap_or_default();
            if let Some(b) = blocks.find(name) {
                if !net.blocks.contains(&b) {
                    net.blocks.push(b);
                }
            } else if blocks.is_terminal(name) {
                if !net.terminals.iter().any(|t| t == name) {
                    net.terminals.push(name.to_string());
                }
            } else {
                return Err(Error::UndeclaredBlock {
                    net: out.nets.len(),
                    name: format!("{name} ({}:{pn})", path.display()),
                });
            }
        }
        out.nets.push(net);
    }
    Ok(out)
}

pub fn parse_nets(path: impl AsRef<Path>, blocks: &Blocks) -> Result<Nets> {
    let path = path.as_ref();
    parse_nets_str(&std::fs::read_to_string(path).map_err(Error::read(path))?, path, blocks)
}

/// Split `total` cells over `weights` proportionally, largest remainders
/// first.
pub fn apportion(weights: &[f64], total: u64) -> Vec<u64> {
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() || sum <= 0.0 {
        return vec![0; weights.len()];
    }
    let exact: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut out: Vec<u64> = exact.iter().map(|e| e.floor() as u64).collect();
    let mut left = total - out.iter().sum::<u64>();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for i in order.into_iter().cycle() {
        if left == 0 {
            break;
        }
        out[i] += 1;
        left -= 1;
    }
    out
}

impl Netlist {
    /// Scale physical block areas so they fill `utilization` of a
    /// `grid x grid` canvas. Nets without any block member are dropped.
    pub fn from_gsrc(blocks: &Blocks, nets: &Nets, grid: usize, utilization: f64) -> Result<Netlist> {
        if !(utilization > 0.0 && utilization <= 1.0) {
            return Err(Error::Config("utilization must lie in (0, 1]".into()));
        }
        if blocks.modules.is_empty() {
            return Err(Error::Config("benchmark has no blocks".into()));
        }
        let total = (utilization * (grid * grid) as f64).round() as u64;
        let weights: Vec<f64> = blocks.modules.iter().map(|b| b.area).collect();
        let cells = apportion(&weights, total);
        let modules = blocks
            .modules
            .iter()
            .zip(cells)
            .map(|(b, area)| ModuleSpec {
                name: b.name.clone(),
                area,
                components: Vec::new(),
            })
            .collect();
        let nets = nets
            .nets
            .iter()
            .filter(|n| !n.blocks.is_empty())
            .map(|n| Net {
                terminals: n.terminals.clone(),
                ..Net::from_modules(n.blocks.iter().map(|&b| ModuleId(b as u32)))
            })
            .collect();
        Ok(Netlist { modules, nets })
    }
}

/// `.blocks` and `.nets` paths for a named design under `dir`.
pub fn design_paths(dir: &Path, design: &str) -> (PathBuf, PathBuf) {
    (dir.join(format!("{design}.blocks")), dir.join(format!("{design}.nets")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("t")
    }

    const BLOCKS: &str = "UCSC blocks 1.0\n# c\n\nNumSoftRectangularBlocks : 1\nNumHardRectilinearBlocks : 1\nNumTerminals : 1\n\na softrectangular 100 0.5 2.0\nb hardrectilinear 4 (0, 0) (0, 3) (5, 3) (5, 0)\np1 terminal\n";

    #[test]
    fn blocks_and_terminals() {
        let b = parse_blocks_str(BLOCKS, p()).unwrap();
        assert_eq!(b.modules.len(), 2);
        assert_eq!(b.terminals, vec!["p1"]);
        assert_eq!(b.modules[1].area, 15.0);
    }

    #[test]
    fn only_terminals() {
        let b = parse_blocks_str("p1 terminal\np2 terminal\np3 terminal\n", p()).unwrap();
        assert!(b.modules.is_empty());
        assert_eq!(b.terminals.len(), 3);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = parse_blocks_str("UCSC blocks 1.0\n\na softrectangular x 1 2\n", p()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse_blocks_str("a hardrectilinear 4 (0, 0) (0, 1)\n", p()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn nets_dedup_and_terminals() {
        let b = parse_blocks_str(BLOCKS, p()).unwrap();
        let text = "UCLA nets 1.0\nNumNets : 2\nNumPins : 5\nNetDegree : 2\na B\nb B\nNetDegree : 3\na B\na B : %0.0 %1.0\np1 B\n";
        let nets = parse_nets_str(text, p(), &b).unwrap();
        assert_eq!(nets.declared, Some(2));
        assert_eq!(nets.nets[0].blocks, vec![0, 1]);
        assert_eq!(nets.nets[1].blocks, vec![0]);
        assert_eq!(nets.nets[1].terminals, vec!["p1"]);
    }

    #[test]
    fn undeclared_block_is_an_error() {
        let b = parse_blocks_str(BLOCKS, p()).unwrap();
        let err = parse_nets_str("NetDegree : 1\nzz B\n", p(), &b).unwrap_err();
        assert!(matches!(err, Error::UndeclaredBlock { net: 0, .. }));
    }

    #[test]
    fn apportion_sums_exactly() {
        let cells = apportion(&[1.0, 1.0, 1.0], 10);
        assert_eq!(cells.iter().sum::<u64>(), 10);
        assert_eq!(cells, vec![4, 3, 3]);
        assert_eq!(apportion(&[3.0, 1.0], 8), vec![6, 2]);
    }

    #[test]
    fn gsrc_netlist_fills_canvas() {
        let b = parse_blocks_str(BLOCKS, p()).unwrap();
        let nets = parse_nets_str("NetDegree : 1\np1 B\nNetDegree : 2\na B\nb B\n", p(), &b).unwrap();
        let nl = Netlist::from_gsrc(&b, &nets, 10, 1.0).unwrap();
        assert_eq!(nl.modules.iter().map(|m| m.area).sum::<u64>(), 100);
        assert_eq!(nl.nets.len(), 1);
    }
}
