//! Iso-curves of a vertex field on a triangle mesh.

use crate::mesh::{Point, TriMesh, VertexField};
use crate::{Error, Result};

/// Consecutive waypoints closer than this fraction of the mean edge length
/// are merged.
const DUPLICATE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Material {
    #[default]
    Fiber,
    Matrix,
}

impl Material {
    pub fn name(self) -> &'static str {
        match self {
            Material::Fiber => "fiber",
            Material::Matrix => "matrix",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Waypoint {
    pub position: Point,
    /// Unit surface normal.
    pub normal: Point,
    /// Arc length from the first waypoint.
    pub parameter: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Toolpath {
    pub waypoints: Vec<Waypoint>,
    /// The last waypoint connects back to the first.
    pub closed: bool,
    pub layer_index: usize,
    pub path_index: usize,
    pub material: Material,
    pub iso_value: f64,
}

impl Toolpath {
    pub fn length(&self) -> f64 {
        let w = &self.waypoints;
        let open: f64 = w.windows(2).map(|p| (p[1].position - p[0].position).norm()).sum();
        match (self.closed, w.first(), w.last()) {
            (true, Some(a), Some(b)) => open + (a.position - b.position).norm(),
            _ => open,
        }
    }
}

// A vertex sitting exactly on the iso-value counts as above it.
fn above(v: f64, iso: f64) -> bool {
    v >= iso
}

struct Crossings {
    /// Position and normal per crossed edge.
    at: Vec<Option<(Point, Point)>>,
    /// The crossed edges sharing a face with each crossed edge.
    links: Vec<[Option<usize>; 2]>,
}

fn crossings(mesh: &TriMesh, values: &[f64], normals: &[Point], iso: f64) -> Crossings {
    let p = mesh.vertices();
    let at: Vec<Option<(Point, Point)>> = mesh
        .edges()
        .iter()
        .map(|&[a, b]| {
            if above(values[a], iso) == above(values[b], iso) {
                return None;
            }
            let t = ((iso - values[a]) / (values[b] - values[a])).clamp(0.0, 1.0);
            let x = p[a] + (p[b] - p[a]) * t;
            let n = normals[a] * (1.0 - t) + normals[b] * t;
            Some((x, n))
        })
        .collect();
    let mut links = vec![[None, None]; at.len()];
    let mut link = |e: usize, o: usize| {
        let slot = &mut links[e];
        if slot[0].is_none() {
            slot[0] = Some(o);
        } else {
            slot[1] = Some(o);
        }
    };
    for f in 0..mesh.face_count() {
        let crossed: Vec<usize> = mesh.face_edges(f).into_iter().filter(|&e| at[e].is_some()).collect();
        if let [a, b] = crossed[..] {
            link(a, b);
            link(b, a);
        }
    }
    Crossings { at, links }
}

/// Segments of the iso-curve at `iso`, as pairs of crossed edge indices.
pub fn isocurve_segments(mesh: &TriMesh, values: &VertexField, iso: f64) -> Result<Vec<[usize; 2]>> {
    check(mesh, values)?;
    let normals = vec![Point::zeros(); mesh.vertex_count()];
    let c = crossings(mesh, values.values(), &normals, iso);
    let mut out = Vec::new();
    for (e, l) in c.links.iter().enumerate() {
        for o in l.iter().flatten() {
            if e < *o {
                out.push([e, *o]);
            }
        }
    }
    Ok(out)
}

fn check(mesh: &TriMesh, values: &VertexField) -> Result<()> {
    if values.len() != mesh.vertex_count() {
        return Err(Error::Invalid(format!(
            "field has {} values for {} vertices",
            values.len(),
            mesh.vertex_count()
        )));
    }
    Ok(())
}

fn polyline(c: &Crossings, start: usize, visited: &mut [bool]) -> (Vec<usize>, bool) {
    let mut chain = vec![start];
    visited[start] = true;
    let mut prev = None;
    let mut cur = start;
    loop {
        let next = c.links[cur].iter().flatten().copied().find(|&o| Some(o) != prev && !visited[o]);
        match next {
            Some(o) => {
                visited[o] = true;
                chain.push(o);
                prev = Some(cur);
                cur = o;
            }
            None => {
                let closed = chain.len() > 2 && c.links[cur].contains(&Some(start));
                return (chain, closed);
            }
        }
    }
}

fn to_waypoints(mesh: &TriMesh, c: &Crossings, chain: &[usize], faces_normal: impl Fn(usize) -> Point) -> Vec<Waypoint> {
    let tol = DUPLICATE * mesh.average_edge_length();
    let mut out: Vec<Waypoint> = Vec::with_capacity(chain.len());
    for &e in chain {
        let (x, n) = c.at[e].expect("crossed edge");
        let n = if n.norm() > 1e-12 { n.normalize() } else { faces_normal(e) };
        match out.last() {
            Some(w) if (w.position - x).norm() <= tol => {}
            Some(w) => {
                let s = w.parameter + (x - w.position).norm();
                out.push(Waypoint {
                    position: x,
                    normal: n,
                    parameter: s,
                });
            }
            None => out.push(Waypoint {
                position: x,
                normal: n,
                parameter: 0.0,
            }),
        }
    }
    out
}

/// Iso-curves at `(i + 0.5) / n_paths`, highest value first.
pub fn extract_isocurves(mesh: &TriMesh, values: &VertexField, n_paths: usize) -> Result<Vec<Toolpath>> {
    if n_paths == 0 {
        return Err(Error::Invalid("need at least one path".into()));
    }
    check(mesh, values)?;
    let normals = mesh.vertex_normals();
    let tol = DUPLICATE * mesh.average_edge_length();
    let edge_normal = |e: usize| mesh.face_normal(mesh.edge_faces(e).0);
    let mut out = Vec::new();
    for i in (0..n_paths).rev() {
        let iso = (i as f64 + 0.5) / n_paths as f64;
        let c = crossings(mesh, values.values(), &normals, iso);
        let mut visited = vec![false; c.at.len()];
        let mut chains = Vec::new();
        // Open chains start at an end, closed ones anywhere.
        for e in 0..c.at.len() {
            if c.at[e].is_some() && !visited[e] && c.links[e][1].is_none() {
                chains.push(polyline(&c, e, &mut visited));
            }
        }
        for e in 0..c.at.len() {
            if c.at[e].is_some() && !visited[e] {
                chains.push(polyline(&c, e, &mut visited));
            }
        }
        for (chain, closed) in chains {
            let mut waypoints = to_waypoints(mesh, &c, &chain, edge_normal);
            if closed && waypoints.len() > 1 {
                let (a, b) = (&waypoints[0].position, &waypoints[waypoints.len() - 1].position);
                if (a - b).norm() <= tol {
                    waypoints.pop();
                }
            }
            if waypoints.len() < 2 {
                continue;
            }
            out.push(Toolpath {
                waypoints,
                closed,
                layer_index: 0,
                path_index: out.len(),
                material: Material::Fiber,
                iso_value: iso,
            });
        }
    }
    Ok(out)
}
