//! TetGen `.node`/`.ele` and Wavefront OBJ.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{Point, TetMesh, TriMesh};
use crate::{Error, Result};

fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = line.split_whitespace().collect();
        (!tokens.is_empty()).then_some((i + 1, tokens))
    })
}

fn parse_num<T: std::str::FromStr>(path: &Path, line: usize, tok: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| Error::parse(path, line, format!("malformed number `{tok}`")))
}

/// Reads a TetGen node/ele pair. The index base (0 or 1) is taken from the
/// first node id.
pub fn load_tet_mesh(node_path: impl AsRef<Path>, ele_path: impl AsRef<Path>) -> Result<TetMesh> {
    let node_path = node_path.as_ref();
    let ele_path = ele_path.as_ref();
    let node_text = fs::read_to_string(node_path).map_err(|e| Error::io(node_path, e))?;
    let ele_text = fs::read_to_string(ele_path).map_err(|e| Error::io(ele_path, e))?;
    let (vertices, base) = parse_nodes(node_path, &node_text)?;
    let tets = parse_elements(ele_path, &ele_text, base, vertices.len())?;
    TetMesh::new(vertices, tets)
}

fn parse_nodes(path: &Path, text: &str) -> Result<(Vec<Point>, usize)> {
    let mut lines = data_lines(text);
    let (hl, header) = lines.next().ok_or(Error::EmptyMesh)?;
    let count: usize = parse_num(path, hl, header[0])?;
    if header.len() > 1 && header[1] != "3" {
        return Err(Error::parse(path, hl, "only 3D nodes are supported"));
    }
    if count == 0 {
        return Err(Error::EmptyMesh);
    }
    let mut vertices = Vec::with_capacity(count);
    let mut base = 0;
    for (n, (ln, tok)) in lines.take(count).enumerate() {
        if tok.len() < 4 {
            return Err(Error::parse(path, ln, "expected `idx x y z`"));
        }
        let id: usize = parse_num(path, ln, tok[0])?;
        if n == 0 {
            if id > 1 {
                return Err(Error::parse(path, ln, "node ids must start at 0 or 1"));
            }
            base = id;
        }
        if id != n + base {
            return Err(Error::parse(path, ln, format!("expected node id {}, got {id}", n + base)));
        }
        vertices.push(Point::new(
            parse_num(path, ln, tok[1])?,
            parse_num(path, ln, tok[2])?,
            parse_num(path, ln, tok[3])?,
        ));
    }
    if vertices.len() != count {
        return Err(Error::parse(path, hl, format!("header promises {count} nodes, found {}", vertices.len())));
    }
    Ok((vertices, base))
}

fn parse_elements(path: &Path, text: &str, base: usize, node_count: usize) -> Result<Vec<[usize; 4]>> {
    let mut lines = data_lines(text);
    let (hl, header) = lines.next().ok_or(Error::EmptyMesh)?;
    let count: usize = parse_num(path, hl, header[0])?;
    if header.len() > 1 && header[1] != "4" {
        return Err(Error::parse(path, hl, "only 4-node tetrahedra are supported"));
    }
    if count == 0 {
        return Err(Error::EmptyMesh);
    }
    let mut tets = Vec::with_capacity(count);
    for (ln, tok) in lines.take(count) {
        if tok.len() < 5 {
            return Err(Error::parse(path, ln, "expected `idx v0 v1 v2 v3`"));
        }
        let mut t = [0usize; 4];
        for k in 0..4 {
            let raw: usize = parse_num(path, ln, tok[k + 1])?;
            if raw < base || raw - base >= node_count {
                return Err(Error::parse(
                    path,
                    ln,
                    format!("node index {raw} out of range ({node_count} nodes, base {base})"),
                ));
            }
            t[k] = raw - base;
        }
        tets.push(t);
    }
    if tets.len() != count {
        return Err(Error::parse(path, hl, format!("header promises {count} elements, found {}", tets.len())));
    }
    Ok(tets)
}

/// Writes a 0-based TetGen node/ele pair.
pub fn write_tet_mesh(mesh: &TetMesh, node_path: impl AsRef<Path>, ele_path: impl AsRef<Path>) -> Result<()> {
    let mut node = format!("{} 3 0 0\n", mesh.vertex_count());
    for (i, p) in mesh.vertices().iter().enumerate() {
        writeln!(node, "{i} {} {} {}", p.x, p.y, p.z).unwrap();
    }
    let mut ele = format!("{} 4 0\n", mesh.tet_count());
    for (i, t) in mesh.tets().iter().enumerate() {
        writeln!(ele, "{i} {} {} {} {}", t[0], t[1], t[2], t[3]).unwrap();
    }
    let node_path = node_path.as_ref();
    let ele_path = ele_path.as_ref();
    fs::write(node_path, node).map_err(|e| Error::io(node_path, e))?;
    fs::write(ele_path, ele).map_err(|e| Error::io(ele_path, e))
}

pub fn obj_string(mesh: &TriMesh) -> String {
    let mut out = String::with_capacity(mesh.vertex_count() * 40 + mesh.face_count() * 24);
    for p in mesh.vertices() {
        writeln!(out, "v {:.9} {:.9} {:.9}", p.x, p.y, p.z).unwrap();
    }
    for f in mesh.faces() {
        writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1).unwrap();
    }
    out
}

pub fn write_obj(mesh: &TriMesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, obj_string(mesh)).map_err(|e| Error::io(path, e))
}
