//! Gmsh MSH reader (ASCII 2.2 and 4.1) and 2.2 writer.
//!
//! Physical names select the role of each element: triangles must belong
//! to a group named `stokes` or `darcy`; line elements named `lid` mark the
//! moving lid, `wall` and `interface` lines are accepted and checked.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use sdfem_core::mesh::{EdgeClass, Marker, Mesh, Subdomain};
use sdfem_core::Point;

#[derive(Debug, thiserror::Error)]
pub enum MshError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("unsupported MSH version {0} (expected ASCII 2.2 or 4.1)")]
    UnsupportedVersion(String),
    #[error("binary MSH files are not supported")]
    Binary,
    #[error("unsupported element type {0}")]
    UnsupportedElement(i64),
    #[error("triangle {0} has no stokes/darcy physical tag")]
    UntaggedTriangle(usize),
    #[error("unknown node {0}")]
    UnknownNode(usize),
    #[error("line tagged as interface ({0:?} to {1:?}) is not shared by a Stokes and a Darcy triangle")]
    NonMatchingInterface(Point, Point),
    #[error("malformed MSH file: {0}")]
    Syntax(String),
    #[error(transparent)]
    Mesh(#[from] sdfem_core::Error),
}

/// Raw contents before topology is built.
#[derive(Debug, Default)]
struct Raw {
    nodes: BTreeMap<usize, Point>,
    names: BTreeMap<i64, String>,
    triangles: Vec<([usize; 3], Option<i64>)>,
    lines: Vec<([usize; 2], Option<i64>)>,
}

struct Tokens<'a> {
    it: std::iter::Peekable<std::str::SplitWhitespace<'a>>,
}

impl<'a> Tokens<'a> {
    fn new(s: &'a str) -> Self {
        Tokens { it: s.split_whitespace().peekable() }
    }
    fn next(&mut self) -> Result<&'a str, MshError> {
        self.it.next().ok_or_else(|| MshError::Syntax("unexpected end of file".into()))
    }
    fn num<T: std::str::FromStr>(&mut self) -> Result<T, MshError> {
        let t = self.next()?;
        t.parse().map_err(|_| MshError::Syntax(format!("expected a number, found {t:?}")))
    }
    fn expect(&mut self, tag: &str) -> Result<(), MshError> {
        let t = self.next()?;
        if t == tag {
            Ok(())
        } else {
            Err(MshError::Syntax(format!("expected {tag}, found {t:?}")))
        }
    }
    fn skip_section(&mut self, end: &str) -> Result<(), MshError> {
        while self.next()? != end {}
        Ok(())
    }
}

fn nodes_per_element(kind: i64) -> Option<usize> {
    match kind {
        1 => Some(2),
        2 => Some(3),
        15 => Some(1),
        _ => None,
    }
}

fn push_element(raw: &mut Raw, kind: i64, nodes: &[usize], phys: Option<i64>) -> Result<(), MshError> {
    match kind {
        1 => raw.lines.push(([nodes[0], nodes[1]], phys)),
        2 => raw.triangles.push(([nodes[0], nodes[1], nodes[2]], phys)),
        15 => {}
        other => return Err(MshError::UnsupportedElement(other)),
    }
    Ok(())
}

fn parse_names(t: &mut Tokens, raw: &mut Raw) -> Result<(), MshError> {
    let n: usize = t.num()?;
    for _ in 0..n {
        let _dim: i64 = t.num()?;
        let tag: i64 = t.num()?;
        let mut name = t.next()?.to_string();
        while !(name.len() >= 2 && name.ends_with('"')) {
            name.push(' ');
            name.push_str(t.next()?);
        }
        raw.names.insert(tag, name.trim_matches('"').to_ascii_lowercase());
    }
    t.expect("$EndPhysicalNames")
}

fn parse_v2(t: &mut Tokens, raw: &mut Raw) -> Result<(), MshError> {
    while let Ok(section) = t.next() {
        match section {
            "$PhysicalNames" => parse_names(t, raw)?,
            "$Nodes" => {
                let n: usize = t.num()?;
                for _ in 0..n {
                    let id: usize = t.num()?;
                    let (x, y, _z): (f64, f64, f64) = (t.num()?, t.num()?, t.num()?);
                    raw.nodes.insert(id, [x, y]);
                }
                t.expect("$EndNodes")?;
            }
            "$Elements" => {
                let n: usize = t.num()?;
                for _ in 0..n {
                    let _id: usize = t.num()?;
                    let kind: i64 = t.num()?;
                    let ntags: usize = t.num()?;
                    let tags: Vec<i64> = (0..ntags).map(|_| t.num()).collect::<Result<_, _>>()?;
                    let nn = nodes_per_element(kind).ok_or(MshError::UnsupportedElement(kind))?;
                    let nodes: Vec<usize> = (0..nn).map(|_| t.num()).collect::<Result<_, _>>()?;
                    let phys = tags.first().copied().filter(|p| *p != 0);
                    push_element(raw, kind, &nodes, phys)?;
                }
                t.expect("$EndElements")?;
            }
            s if s.starts_with('$') && !s.starts_with("$End") => {
                let end = format!("$End{}", &s[1..]);
                t.skip_section(&end)?;
            }
            other => return Err(MshError::Syntax(format!("unexpected token {other:?}"))),
        }
    }
    Ok(())
}

fn parse_v4(t: &mut Tokens, raw: &mut Raw) -> Result<(), MshError> {
    // physical tag of each (dim, entity)
    let mut entity_phys: BTreeMap<(usize, i64), i64> = BTreeMap::new();
    while let Ok(section) = t.next() {
        match section {
            "$PhysicalNames" => parse_names(t, raw)?,
            "$Entities" => {
                let counts: [usize; 4] = [t.num()?, t.num()?, t.num()?, t.num()?];
                for (dim, &count) in counts.iter().enumerate() {
                    for _ in 0..count {
                        let tag: i64 = t.num()?;
                        let coords = if dim == 0 { 3 } else { 6 };
                        for _ in 0..coords {
                            let _: f64 = t.num()?;
                        }
                        let nphys: usize = t.num()?;
                        let phys: Vec<i64> = (0..nphys).map(|_| t.num()).collect::<Result<_, _>>()?;
                        if let Some(p) = phys.first() {
                            entity_phys.insert((dim, tag), *p);
                        }
                        if dim > 0 {
                            let nb: usize = t.num()?;
                            for _ in 0..nb {
                                let _: i64 = t.num()?;
                            }
                        }
                    }
                }
                t.expect("$EndEntities")?;
            }
            "$Nodes" => {
                let blocks: usize = t.num()?;
                let _total: usize = t.num()?;
                let (_min, _max): (usize, usize) = (t.num()?, t.num()?);
                for _ in 0..blocks {
                    let (_dim, _tag, parametric, n): (usize, i64, usize, usize) = (t.num()?, t.num()?, t.num()?, t.num()?);
                    if parametric != 0 {
                        return Err(MshError::Syntax("parametric nodes are not supported".into()));
                    }
                    let ids: Vec<usize> = (0..n).map(|_| t.num()).collect::<Result<_, _>>()?;
                    for id in ids {
                        let (x, y, _z): (f64, f64, f64) = (t.num()?, t.num()?, t.num()?);
                        raw.nodes.insert(id, [x, y]);
                    }
                }
                t.expect("$EndNodes")?;
            }
            "$Elements" => {
                let blocks: usize = t.num()?;
                let _total: usize = t.num()?;
                let (_min, _max): (usize, usize) = (t.num()?, t.num()?);
                for _ in 0..blocks {
                    let (dim, tag, kind, n): (usize, i64, i64, usize) = (t.num()?, t.num()?, t.num()?, t.num()?);
                    let nn = nodes_per_element(kind).ok_or(MshError::UnsupportedElement(kind))?;
                    let phys = entity_phys.get(&(dim, tag)).copied();
                    for _ in 0..n {
                        let _id: usize = t.num()?;
                        let nodes: Vec<usize> = (0..nn).map(|_| t.num()).collect::<Result<_, _>>()?;
                        push_element(raw, kind, &nodes, phys)?;
                    }
                }
                t.expect("$EndElements")?;
            }
            s if s.starts_with('$') && !s.starts_with("$End") => {
                let end = format!("$End{}", &s[1..]);
                t.skip_section(&end)?;
            }
            other => return Err(MshError::Syntax(format!("unexpected token {other:?}"))),
        }
    }
    Ok(())
}

/// Parses MSH text into a mesh.
pub fn parse_msh(text: &str) -> Result<Mesh, MshError> {
    let mut t = Tokens::new(text);
    t.expect("$MeshFormat")?;
    let version = t.next()?.to_string();
    let file_type: i64 = t.num()?;
    let _size: usize = t.num()?;
    if file_type != 0 {
        return Err(MshError::Binary);
    }
    // binary files carry an endianness marker here; ASCII files do not
    t.expect("$EndMeshFormat")?;
    let mut raw = Raw::default();
    match version.as_str() {
        "2.2" => parse_v2(&mut t, &mut raw)?,
        "4.1" => parse_v4(&mut t, &mut raw)?,
        _ => return Err(MshError::UnsupportedVersion(version)),
    }
    build(raw)
}

fn build(raw: Raw) -> Result<Mesh, MshError> {
    let mut index = BTreeMap::new();
    let mut vertices = Vec::with_capacity(raw.nodes.len());
    for (id, p) in &raw.nodes {
        index.insert(*id, vertices.len());
        vertices.push(*p);
    }
    let map = |id: usize| index.get(&id).copied().ok_or(MshError::UnknownNode(id));
    let name_of = |p: Option<i64>| p.and_then(|p| raw.names.get(&p)).map(String::as_str);
    let mut tris = Vec::with_capacity(raw.triangles.len());
    for (i, (nodes, phys)) in raw.triangles.iter().enumerate() {
        let dom = match name_of(*phys) {
            Some("stokes") => Subdomain::Stokes,
            Some("darcy") => Subdomain::Darcy,
            _ => return Err(MshError::UntaggedTriangle(i)),
        };
        tris.push(([map(nodes[0])?, map(nodes[1])?, map(nodes[2])?], dom));
    }
    let mut markers = Vec::new();
    let mut interface_lines = Vec::new();
    for (nodes, phys) in &raw.lines {
        let v = [map(nodes[0])?, map(nodes[1])?];
        match name_of(*phys) {
            Some("lid") => markers.push((v, Marker::Lid)),
            Some("wall") => markers.push((v, Marker::Wall)),
            Some("interface") => interface_lines.push(v),
            _ => {}
        }
    }
    let mesh = Mesh::from_parts(vertices, tris, &markers).map_err(|e| match e {
        sdfem_core::Error::NonMatchingInterface(a, b) => MshError::NonMatchingInterface(raw_point(&raw, &index, a), raw_point(&raw, &index, b)),
        other => MshError::Mesh(other),
    })?;
    for v in interface_lines {
        let key = [v[0].min(v[1]), v[0].max(v[1])];
        let ok = mesh.edges.iter().any(|e| e.vertices == key && e.class == EdgeClass::Interface);
        if !ok {
            return Err(MshError::NonMatchingInterface(mesh.vertices[key[0]], mesh.vertices[key[1]]));
        }
    }
    Ok(mesh)
}

fn raw_point(raw: &Raw, index: &BTreeMap<usize, usize>, v: usize) -> Point {
    index.iter().find(|(_, i)| **i == v).map(|(id, _)| raw.nodes[id]).unwrap_or([f64::NAN; 2])
}

pub fn read_msh(path: &Path) -> Result<Mesh, MshError> {
    let text = std::fs::read_to_string(path).map_err(|source| MshError::Io { path: path.display().to_string(), source })?;
    parse_msh(&text)
}

const PHYS_STOKES: usize = 1;
const PHYS_DARCY: usize = 2;
const PHYS_INTERFACE: usize = 3;
const PHYS_LID: usize = 4;
const PHYS_WALL: usize = 5;

/// Writes a mesh as ASCII MSH 2.2 with the physical names understood by
/// [`parse_msh`].
pub fn write_msh(mesh: &Mesh) -> String {
    let mut s = String::new();
    s.push_str("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$PhysicalNames\n5\n");
    for (tag, dim, name) in [(PHYS_STOKES, 2, "stokes"), (PHYS_DARCY, 2, "darcy"), (PHYS_INTERFACE, 1, "interface"), (PHYS_LID, 1, "lid"), (PHYS_WALL, 1, "wall")] {
        let _ = writeln!(s, "{dim} {tag} \"{name}\"");
    }
    s.push_str("$EndPhysicalNames\n$Nodes\n");
    let _ = writeln!(s, "{}", mesh.n_vertices());
    for (i, p) in mesh.vertices.iter().enumerate() {
        let _ = writeln!(s, "{} {:?} {:?} 0", i + 1, p[0], p[1]);
    }
    s.push_str("$EndNodes\n$Elements\n");
    let line_tag = |e: &sdfem_core::mesh::Edge| match (e.class, e.marker) {
        (EdgeClass::Interface, _) => Some(PHYS_INTERFACE),
        (EdgeClass::BoundaryStokes | EdgeClass::BoundaryDarcy, Marker::Lid) => Some(PHYS_LID),
        (EdgeClass::BoundaryStokes | EdgeClass::BoundaryDarcy, Marker::Wall) => Some(PHYS_WALL),
        _ => None,
    };
    let n_lines = mesh.edges.iter().filter(|e| line_tag(e).is_some()).count();
    let _ = writeln!(s, "{}", n_lines + mesh.n_triangles());
    let mut id = 1;
    for e in &mesh.edges {
        if let Some(tag) = line_tag(e) {
            let _ = writeln!(s, "{id} 1 2 {tag} {tag} {} {}", e.vertices[0] + 1, e.vertices[1] + 1);
            id += 1;
        }
    }
    for t in &mesh.triangles {
        let tag = match t.subdomain {
            Subdomain::Stokes => PHYS_STOKES,
            Subdomain::Darcy => PHYS_DARCY,
        };
        let v = t.vertices;
        let _ = writeln!(s, "{id} 2 2 {tag} {tag} {} {} {}", v[0] + 1, v[1] + 1, v[2] + 1);
        id += 1;
    }
    s.push_str("$EndElements\n");
    s
}
