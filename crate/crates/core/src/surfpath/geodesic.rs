//! Geodesic distance on triangle meshes by the heat method, and the Voronoi
//! partition it induces.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::mesh::{Point, TriMesh};
use crate::solver::SymmetricBuilder;
use crate::Result;

/// Distance reported for vertices with no path to any source.
pub const UNREACHABLE: f64 = f64::INFINITY;

#[derive(Clone, Copy, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Shortest edge-path distances from `sources`, walking only through vertices
/// where `allowed` holds (sources and the final hop are exempt from it only
/// through `allowed` itself). Returns distances and predecessors.
pub fn edge_dijkstra(
    mesh: &TriMesh,
    sources: &[usize],
    allowed: impl Fn(usize) -> bool,
) -> (Vec<f64>, Vec<Option<usize>>) {
    let n = mesh.vertex_count();
    let mut dist = vec![UNREACHABLE; n];
    let mut prev = vec![None; n];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        if dist[s] > 0.0 {
            dist[s] = 0.0;
            heap.push(Reverse((Key(0.0), s)));
        }
    }
    let p = mesh.vertices();
    while let Some(Reverse((Key(d), v))) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &u in mesh.vertex_neighbors(v) {
            if !allowed(u) {
                continue;
            }
            let nd = d + (p[u] - p[v]).norm();
            // Ties keep the lower predecessor for determinism.
            if nd < dist[u] || (nd == dist[u] && prev[u].is_some_and(|w| v < w)) {
                dist[u] = nd;
                prev[u] = Some(v);
                heap.push(Reverse((Key(nd), u)));
            }
        }
    }
    (dist, prev)
}

/// Heat-method geodesic distance from `sources`; falls back to edge-path
/// distance when the linear solves fail. Vertices in components without a
/// source get [`UNREACHABLE`].
pub fn geodesic_field(mesh: &TriMesh, sources: &[usize]) -> Vec<f64> {
    match geodesic_field_heat(mesh, sources) {
        Ok(d) if d.iter().all(|x| !x.is_nan()) => d,
        _ => {
            log::warn!("heat-method geodesics failed; using edge-path distances");
            edge_dijkstra(mesh, sources, |_| true).0
        }
    }
}

pub fn geodesic_field_heat(mesh: &TriMesh, sources: &[usize]) -> Result<Vec<f64>> {
    let n = mesh.vertex_count();
    let (comp, count) = mesh.vertex_components();
    let mut reached = vec![false; count];
    for &s in sources {
        reached[comp[s]] = true;
    }
    let active: Vec<bool> = (0..n).map(|v| reached[comp[v]]).collect();
    let mut index = vec![usize::MAX; n];
    let mut m = 0;
    for v in 0..n {
        if active[v] {
            index[v] = m;
            m += 1;
        }
    }
    let mut out = vec![UNREACHABLE; n];
    if m == 0 {
        return Ok(out);
    }
    let is_source = {
        let mut s = vec![false; n];
        for &v in sources {
            s[v] = true;
        }
        s
    };

    let faces: Vec<(usize, [Point; 3], f64)> = (0..mesh.face_count())
        .filter(|&f| active[mesh.faces()[f][0]])
        .filter_map(|f| mesh.basis_gradients(f).ok().map(|g| (f, g, mesh.face_area(f))))
        .collect();
    let h = mesh.average_edge_length();
    let t = h * h;

    // (M + t L) u = delta
    let mut heat = SymmetricBuilder::new(m);
    let mut mass = vec![0.0; m];
    for &(f, g, area) in &faces {
        let tri = mesh.faces()[f];
        for i in 0..3 {
            mass[index[tri[i]]] += area / 3.0;
            for j in 0..=i {
                let (a, b) = (index[tri[i]], index[tri[j]]);
                heat.add(a.max(b), a.min(b), t * area * g[i].dot(&g[j]));
            }
        }
    }
    for (i, &w) in mass.iter().enumerate() {
        heat.add(i, i, w.max(1e-300));
    }
    let mut rhs = vec![0.0; m];
    for v in 0..n {
        if is_source[v] {
            rhs[index[v]] = 1.0;
        }
    }
    let u = heat.build().solve(&rhs)?;

    // Unit field pointing away from the sources, then L phi = div X with
    // phi = 0 on the sources.
    let mut div = vec![0.0; m];
    for &(f, g, area) in &faces {
        let tri = mesh.faces()[f];
        let grad: Point = (0..3).map(|k| g[k] * u[index[tri[k]]]).sum();
        let len = grad.norm();
        if !(len > 0.0) {
            continue;
        }
        let x = -grad / len;
        for k in 0..3 {
            div[index[tri[k]]] += area * g[k].dot(&x);
        }
    }
    let mut free = vec![usize::MAX; m];
    let mut nf = 0;
    for v in 0..n {
        if active[v] && !is_source[v] {
            free[index[v]] = nf;
            nf += 1;
        }
    }
    let mut poisson = SymmetricBuilder::new(nf);
    for &(f, g, area) in &faces {
        let tri = mesh.faces()[f];
        for i in 0..3 {
            for j in 0..=i {
                let (a, b) = (free[index[tri[i]]], free[index[tri[j]]]);
                if a != usize::MAX && b != usize::MAX {
                    poisson.add(a.max(b), a.min(b), area * g[i].dot(&g[j]));
                }
            }
        }
    }
    let rhs: Vec<f64> = (0..m).filter(|&i| free[i] != usize::MAX).map(|i| div[i]).collect();
    let phi = if nf > 0 { poisson.build().solve(&rhs)? } else { Vec::new() };
    for v in 0..n {
        if !active[v] {
            continue;
        }
        out[v] = if is_source[v] { 0.0 } else { phi[free[index[v]]].max(0.0) };
    }
    Ok(out)
}

/// Nearest-source assignment: vertex `v` goes to the field with the smallest
/// finite value (lowest index on ties); `None` when every field is
/// unreachable there.
pub fn voronoi_partition(fields: &[Vec<f64>]) -> Vec<Option<usize>> {
    voronoi_partition_by(fields, VoronoiRule::Nearest)
}

/// Which field value claims a vertex.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VoronoiRule {
    /// Smallest distance, the usual Voronoi cell.
    #[default]
    Nearest,
    /// Largest finite distance.
    Farthest,
}

/// Region index per vertex, ties going to the lowest index; `None` where
/// every field is unreachable.
pub fn voronoi_partition_by(fields: &[Vec<f64>], rule: VoronoiRule) -> Vec<Option<usize>> {
    let n = fields.first().map_or(0, Vec::len);
    let better = |d: f64, b: f64| match rule {
        VoronoiRule::Nearest => d < b,
        VoronoiRule::Farthest => d > b,
    };
    (0..n)
        .map(|v| {
            let mut best: Option<(f64, usize)> = None;
            for (i, f) in fields.iter().enumerate() {
                let d = f[v];
                if d.is_finite() && best.is_none_or(|(bd, _)| better(d, bd)) {
                    best = Some((d, i));
                }
            }
            best.map(|(_, i)| i)
        })
        .collect()
}
