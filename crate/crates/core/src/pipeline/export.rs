//! CSV artifacts: waypoints, layer table and guidance field.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::layerfield::CurvedLayer;
use crate::mesh::{Point, VertexField};
use crate::surfpath::{Material, Toolpath, Waypoint};
use crate::{Error, Result};

pub const WAYPOINT_HEADER: &str = "layer,path,seq,x,y,z,nx,ny,nz,material";
pub const LAYER_HEADER: &str = "layer,iso_value,face_count,area_mm2";
pub const GUIDANCE_HEADER: &str = "vertex,g";

/// Rows ordered by layer, path and sequence. A closed path repeats its first
/// waypoint as its last row.
pub fn waypoints_csv_string(toolpaths: &[Toolpath]) -> Result<String> {
    if toolpaths.is_empty() {
        return Err(Error::Invalid("no toolpaths to export".into()));
    }
    let mut order: Vec<&Toolpath> = toolpaths.iter().collect();
    order.sort_by_key(|t| (t.layer_index, t.path_index));
    let mut out = String::from(WAYPOINT_HEADER);
    out.push('\n');
    for t in order {
        let closing = t.closed.then(|| t.waypoints.first()).flatten();
        for (seq, w) in t.waypoints.iter().chain(closing).enumerate() {
            let (p, n) = (w.position, w.normal);
            writeln!(
                out,
                "{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{}",
                t.layer_index,
                t.path_index,
                seq,
                p.x,
                p.y,
                p.z,
                n.x,
                n.y,
                n.z,
                t.material.name()
            )
            .unwrap();
        }
    }
    Ok(out)
}

pub fn write_waypoints(toolpaths: &[Toolpath], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, waypoints_csv_string(toolpaths)?).map_err(|e| Error::io(path, e))
}

/// Inverse of [`waypoints_csv_string`]. Iso-values are not stored and come
/// back as NaN.
pub fn parse_waypoints_csv(path: &Path, text: &str) -> Result<Vec<Toolpath>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == WAYPOINT_HEADER => {}
        _ => return Err(Error::parse(path, 1, format!("expected header `{WAYPOINT_HEADER}`"))),
    }
    let mut paths: BTreeMap<(usize, usize), Toolpath> = BTreeMap::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 10 {
            return Err(Error::parse(path, line_no, format!("expected 10 columns, found {}", cols.len())));
        }
        let int = |k: usize| cols[k].parse::<usize>().map_err(|e| Error::parse(path, line_no, format!("column {k}: {e}")));
        let float = |k: usize| cols[k].parse::<f64>().map_err(|e| Error::parse(path, line_no, format!("column {k}: {e}")));
        let (layer, index, seq) = (int(0)?, int(1)?, int(2)?);
        let material = match cols[9] {
            "fiber" => Material::Fiber,
            "matrix" => Material::Matrix,
            m => return Err(Error::parse(path, line_no, format!("unknown material `{m}`"))),
        };
        let t = paths.entry((layer, index)).or_insert_with(|| Toolpath {
            waypoints: Vec::new(),
            closed: false,
            layer_index: layer,
            path_index: index,
            material,
            iso_value: f64::NAN,
        });
        if seq != t.waypoints.len() {
            return Err(Error::parse(path, line_no, format!("sequence {seq} out of order")));
        }
        if material != t.material {
            return Err(Error::parse(path, line_no, "material changes within a path"));
        }
        let position = Point::new(float(3)?, float(4)?, float(5)?);
        let parameter = t
            .waypoints
            .last()
            .map_or(0.0, |w: &Waypoint| w.parameter + (position - w.position).norm());
        t.waypoints.push(Waypoint {
            position,
            normal: Point::new(float(6)?, float(7)?, float(8)?),
            parameter,
        });
    }
    let mut out: Vec<Toolpath> = paths.into_values().collect();
    for t in &mut out {
        let w = &t.waypoints;
        if w.len() > 2 && w[0].position == w[w.len() - 1].position {
            t.waypoints.pop();
            t.closed = true;
        }
    }
    Ok(out)
}

pub fn load_waypoints(path: impl AsRef<Path>) -> Result<Vec<Toolpath>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_waypoints_csv(path, &text)
}

pub fn layers_csv_string(layers: &[CurvedLayer]) -> String {
    let mut out = String::from(LAYER_HEADER);
    out.push('\n');
    for l in layers {
        writeln!(
            out,
            "{},{:.6},{},{:.6}",
            l.layer_index,
            l.iso_value,
            l.surface.face_count(),
            l.surface.total_area()
        )
        .unwrap();
    }
    out
}

/// Shortest round-trip formatting.
pub fn guidance_csv_string(g: &VertexField) -> String {
    let mut out = String::from(GUIDANCE_HEADER);
    out.push('\n');
    for (v, x) in g.values().iter().enumerate() {
        writeln!(out, "{v},{x:?}").unwrap();
    }
    out
}

pub fn parse_guidance_csv(path: &Path, text: &str, vertex_count: usize) -> Result<VertexField> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == GUIDANCE_HEADER => {}
        _ => return Err(Error::parse(path, 1, format!("expected header `{GUIDANCE_HEADER}`"))),
    }
    let mut values = vec![None; vertex_count];
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let (v, x) = line
            .split_once(',')
            .ok_or_else(|| Error::parse(path, i + 1, "expected `vertex,g`"))?;
        let v: usize = v.trim().parse().map_err(|e| Error::parse(path, i + 1, format!("vertex: {e}")))?;
        let x: f64 = x.trim().parse().map_err(|e| Error::parse(path, i + 1, format!("value: {e}")))?;
        match values.get_mut(v) {
            Some(slot @ None) => *slot = Some(x),
            Some(Some(_)) => return Err(Error::parse(path, i + 1, format!("duplicate vertex {v}"))),
            None => return Err(Error::parse(path, i + 1, format!("vertex {v} out of range"))),
        }
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(v, x)| x.ok_or_else(|| Error::parse(path, 0, format!("missing vertex {v}"))))
        .collect::<Result<Vec<_>>>()?;
    VertexField::new(values, vertex_count)
}
