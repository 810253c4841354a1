//! ISPD Bookshelf reader and writer (.aux/.nodes/.nets/.pl/.scl).
//!
//! Bookshelf pin offsets are relative to the cell center; they are converted
//! to lower-left-relative offsets on read and back on write.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::netlist::{Cell, CellKind, Net, Netlist, Pin, Point, Region};

struct Lines<'a> {
    path: &'a Path,
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(path: &'a Path, text: &'a str) -> Self {
        Lines { path, inner: text.lines().enumerate() }
    }

    /// Next non-empty, non-comment line with its 1-based number. Header lines
    /// ("UCLA nodes 1.0") are skipped as well.
    fn next_content(&mut self) -> Option<(usize, &'a str)> {
        for (i, raw) in self.inner.by_ref() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() || line.starts_with("UCLA") {
                continue;
            }
            return Some((i + 1, line));
        }
        None
    }

    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::Parse { path: self.path.to_path_buf(), line, msg: msg.into() }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn num(lines: &Lines, line: usize, tok: Option<&str>, what: &str) -> Result<f64> {
    let tok = tok.ok_or_else(|| lines.err(line, format!("missing {what}")))?;
    tok.parse::<f64>().map_err(|_| lines.err(line, format!("bad {what} {tok:?}")))
}

/// `Key : value` header lines, e.g. `NumNodes : 10`.
fn header_value<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    let rest = line.strip_prefix(key)?.trim_start();
    let rest = rest.strip_prefix(':')?;
    Some(rest.trim())
}

struct AuxFiles {
    nodes: PathBuf,
    nets: PathBuf,
    pl: PathBuf,
    scl: PathBuf,
}

fn parse_aux(path: &Path) -> Result<AuxFiles> {
    let text = read(path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut found: HashMap<&str, PathBuf> = HashMap::new();
    let mut lines = Lines::new(path, &text);
    while let Some((ln, line)) = lines.next_content() {
        let files = line
            .split_once(':')
            .map(|(_, f)| f)
            .ok_or_else(|| lines.err(ln, "expected `RowBasedPlacement : files...`"))?;
        for f in files.split_whitespace() {
            let ext = Path::new(f).extension().and_then(|e| e.to_str()).unwrap_or("");
            match ext {
                "nodes" | "nets" | "pl" | "scl" => {
                    found.insert(ext, dir.join(f));
                }
                "wts" => log::info!("{}: ignoring net weights file {f}", path.display()),
                _ => log::warn!("{}: ignoring unknown file {f}", path.display()),
            }
        }
    }
    let mut take = |k: &str| {
        found.remove(k).ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            msg: format!("no .{k} file listed"),
        })
    };
    Ok(AuxFiles { nodes: take("nodes")?, nets: take("nets")?, pl: take("pl")?, scl: take("scl")? })
}

fn parse_nodes(path: &Path) -> Result<Vec<Cell>> {
    let text = read(path)?;
    let mut lines = Lines::new(path, &text);
    let mut cells = Vec::new();
    while let Some((ln, line)) = lines.next_content() {
        if header_value(line, "NumNodes").is_some() || header_value(line, "NumTerminals").is_some() {
            continue;
        }
        let mut toks = line.split_whitespace();
        let name = toks.next().unwrap_or_default().to_string();
        let width = num(&lines, ln, toks.next(), "width")?;
        let height = num(&lines, ln, toks.next(), "height")?;
        if width <= 0.0 || height <= 0.0 {
            return Err(lines.err(ln, format!("node {name} has non-positive size")));
        }
        let kind = match toks.next() {
            None => CellKind::Movable,
            Some("terminal") => CellKind::Fixed { ni: false },
            Some("terminal_NI") => CellKind::Fixed { ni: true },
            Some(t) => return Err(lines.err(ln, format!("unknown node attribute {t:?}"))),
        };
        cells.push(Cell { name, width, height, kind, pos: Point::default() });
    }
    Ok(cells)
}

fn parse_nets(path: &Path, cells: &[Cell], index: &HashMap<String, usize>) -> Result<Vec<Net>> {
    let text = read(path)?;
    let mut lines = Lines::new(path, &text);
    let mut nets = Vec::new();
    while let Some((ln, line)) = lines.next_content() {
        if header_value(line, "NumNets").is_some() || header_value(line, "NumPins").is_some() {
            continue;
        }
        let rest = header_value(line, "NetDegree").ok_or_else(|| lines.err(ln, "expected `NetDegree : d [name]`"))?;
        let mut toks = rest.split_whitespace();
        let degree = num(&lines, ln, toks.next(), "net degree")? as usize;
        let name = toks.next().map(str::to_string).unwrap_or_else(|| format!("n{}", nets.len()));
        if degree == 0 {
            return Err(lines.err(ln, format!("net {name} has no pins")));
        }
        let mut pins = Vec::with_capacity(degree);
        for _ in 0..degree {
            let (pln, pline) = lines.next_content().ok_or_else(|| lines.err(ln, format!("net {name} ends early")))?;
            let (head, offs) = match pline.split_once(':') {
                Some((h, o)) => (h, Some(o)),
                None => (pline, None),
            };
            let node = head.split_whitespace().next().unwrap_or_default();
            let &cell =
                index.get(node).ok_or_else(|| Error::UnknownNode { net: name.clone(), node: node.to_string() })?;
            let (cx, cy) = match offs {
                Some(o) => {
                    let mut t = o.split_whitespace();
                    (num(&lines, pln, t.next(), "pin x offset")?, num(&lines, pln, t.next(), "pin y offset")?)
                }
                None => (0.0, 0.0),
            };
            let c = &cells[cell];
            pins.push(Pin { cell, dx: cx + 0.5 * c.width, dy: cy + 0.5 * c.height });
        }
        nets.push(Net { name, pins });
    }
    Ok(nets)
}

fn parse_pl(path: &Path, cells: &mut [Cell], index: &HashMap<String, usize>) -> Result<()> {
    let text = read(path)?;
    let mut lines = Lines::new(path, &text);
    while let Some((ln, line)) = lines.next_content() {
        let mut toks = line.split_whitespace();
        let name = toks.next().unwrap_or_default();
        let &i = index.get(name).ok_or_else(|| lines.err(ln, format!("unknown node {name:?}")))?;
        let x = num(&lines, ln, toks.next(), "x")?;
        let y = num(&lines, ln, toks.next(), "y")?;
        cells[i].pos = Point::new(x, y);
        for t in toks {
            match t {
                "/FIXED" if cells[i].is_movable() => cells[i].kind = CellKind::Fixed { ni: false },
                "/FIXED_NI" if cells[i].is_movable() => cells[i].kind = CellKind::Fixed { ni: true },
                _ => {}
            }
        }
    }
    Ok(())
}

fn parse_scl(path: &Path) -> Result<Region> {
    let text = read(path)?;
    let mut lines = Lines::new(path, &text);
    let (mut x0, mut y0) = (f64::INFINITY, f64::INFINITY);
    let (mut x1, mut y1) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut row_height = 0.0;
    let (mut coord, mut height, mut spacing) = (0.0, 0.0, 1.0);
    let mut rows = 0;
    while let Some((ln, line)) = lines.next_content() {
        if let Some(v) = header_value(line, "Coordinate") {
            coord = num(&lines, ln, Some(v), "row coordinate")?;
        } else if let Some(v) = header_value(line, "Height") {
            height = num(&lines, ln, Some(v), "row height")?;
        } else if let Some(v) = header_value(line, "Sitespacing") {
            spacing = num(&lines, ln, Some(v), "site spacing")?;
        } else if let Some(v) = header_value(line, "SubrowOrigin") {
            let mut t = v.split_whitespace();
            let origin = num(&lines, ln, t.next(), "subrow origin")?;
            let sites = match (t.next(), t.next()) {
                (Some("NumSites"), Some(":")) => num(&lines, ln, t.next(), "site count")?,
                (Some(s), _) if s.starts_with("NumSites") => {
                    let s = s.trim_start_matches("NumSites").trim_start_matches(':');
                    let s = if s.is_empty() { t.next() } else { Some(s) };
                    num(&lines, ln, s, "site count")?
                }
                _ => return Err(lines.err(ln, "expected `SubrowOrigin : x NumSites : n`")),
            };
            x0 = x0.min(origin);
            x1 = x1.max(origin + sites * spacing);
            y0 = y0.min(coord);
            y1 = y1.max(coord + height);
            if rows == 0 {
                row_height = height;
            }
            rows += 1;
        }
    }
    let region = Region::new(x0, y0, x1, y1, row_height);
    if rows == 0 || !region.is_valid() {
        return Err(Error::Parse { path: path.to_path_buf(), line: 1, msg: "no usable rows".into() });
    }
    Ok(region)
}

/// Reads a design from its `.aux` file.
pub fn parse_bookshelf(aux: &Path) -> Result<Netlist> {
    let files = parse_aux(aux)?;
    let mut cells = parse_nodes(&files.nodes)?;
    let mut index = HashMap::with_capacity(cells.len());
    for (i, c) in cells.iter().enumerate() {
        if index.insert(c.name.clone(), i).is_some() {
            return Err(Error::invalid(format!("duplicate node {}", c.name)));
        }
    }
    let nets = parse_nets(&files.nets, &cells, &index)?;
    parse_pl(&files.pl, &mut cells, &index)?;
    let region = parse_scl(&files.scl)?;
    Ok(Netlist::new(cells, nets, region))
}

/// Reads a `.pl` file and returns positions for every cell of `netlist`;
/// cells missing from the file keep their current position.
pub fn read_positions(netlist: &Netlist, pl: &Path) -> Result<Vec<Point>> {
    let mut cells = netlist.cells.clone();
    let index: HashMap<String, usize> = cells.iter().enumerate().map(|(i, c)| (c.name.clone(), i)).collect();
    parse_pl(pl, &mut cells, &index)?;
    Ok(cells.iter().map(|c| c.pos).collect())
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn pl_text(netlist: &Netlist, positions: &[Point]) -> String {
    let mut s = String::from("UCLA pl 1.0\n\n");
    for (c, p) in netlist.cells.iter().zip(positions) {
        let marker = match c.kind {
            CellKind::Movable => "",
            CellKind::Fixed { ni: false } => " /FIXED",
            CellKind::Fixed { ni: true } => " /FIXED_NI",
            CellKind::Filler => continue,
        };
        let p = if c.is_fixed() { c.pos } else { *p };
        let _ = writeln!(s, "{} {} {} : N{}", c.name, p.x, p.y, marker);
    }
    s
}

/// Writes placement positions. Fixed cells keep their original coordinates
/// and fillers are dropped.
pub fn write_pl(netlist: &Netlist, positions: &[Point], out: &Path) -> Result<()> {
    write_file(out, &pl_text(netlist, positions))
}

/// Writes a complete Bookshelf design named `base` into `dir` and returns the
/// `.aux` path.
pub fn write_bookshelf(netlist: &Netlist, dir: &Path, base: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let aux = dir.join(format!("{base}.aux"));
    write_file(&aux, &format!("RowBasedPlacement : {base}.nodes {base}.nets {base}.wts {base}.pl {base}.scl\n"))?;

    let cells: Vec<&Cell> = netlist.cells.iter().filter(|c| c.kind != CellKind::Filler).collect();
    let terminals = cells.iter().filter(|c| c.is_fixed()).count();
    let mut s = format!("UCLA nodes 1.0\n\nNumNodes : {}\nNumTerminals : {}\n", cells.len(), terminals);
    for c in &cells {
        let attr = match c.kind {
            CellKind::Fixed { ni: false } => " terminal",
            CellKind::Fixed { ni: true } => " terminal_NI",
            _ => "",
        };
        let _ = writeln!(s, "{} {} {}{}", c.name, c.width, c.height, attr);
    }
    write_file(&dir.join(format!("{base}.nodes")), &s)?;

    let pins: usize = netlist.nets.iter().map(|n| n.pins.len()).sum();
    let mut s = format!("UCLA nets 1.0\n\nNumNets : {}\nNumPins : {}\n", netlist.nets.len(), pins);
    for net in &netlist.nets {
        let _ = writeln!(s, "NetDegree : {} {}", net.pins.len(), net.name);
        for p in &net.pins {
            let c = &netlist.cells[p.cell];
            let _ = writeln!(s, "\t{} B : {} {}", c.name, p.dx - 0.5 * c.width, p.dy - 0.5 * c.height);
        }
    }
    write_file(&dir.join(format!("{base}.nets")), &s)?;

    write_file(&dir.join(format!("{base}.wts")), "UCLA wts 1.0\n")?;
    write_file(&dir.join(format!("{base}.pl")), &pl_text(netlist, &netlist.positions()))?;

    let r = &netlist.region;
    let rows = (r.height() / r.row_height).round() as usize;
    let mut s = format!("UCLA scl 1.0\n\nNumRows : {rows}\n\n");
    for k in 0..rows {
        let _ = write!(
            s,
            "CoreRow Horizontal\n  Coordinate : {}\n  Height : {}\n  Sitewidth : 1\n  Sitespacing : 1\n  \
             Siteorient : 1\n  Sitesymmetry : 1\n  SubrowOrigin : {} NumSites : {}\nEnd\n",
            r.y0 + k as f64 * r.row_height,
            r.row_height,
            r.x0,
            r.width()
        );
    }
    write_file(&dir.join(format!("{base}.scl")), &s)?;
    Ok(aux)
}
