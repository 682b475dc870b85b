use std::collections::{BTreeSet, VecDeque};

use nalgebra::Matrix3;

use super::{sorted3, Point, VertexField, DEGENERATE_VOLUME};
use crate::{Error, Result};

/// Vertices of the face opposite local vertex `k`, ordered so the face normal
/// points out of a positively oriented tet.
pub(crate) const LOCAL_FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 3, 2], [0, 1, 3], [0, 2, 1]];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryFace {
    /// Outward oriented.
    pub vertices: [usize; 3],
    pub tet: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InteriorFace {
    /// Sorted vertex ids.
    pub vertices: [usize; 3],
    pub tets: [usize; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaceRef {
    Interior(usize),
    Boundary(usize),
}

/// Vertex label sets: fixture region, load region and continuity (ROI) regions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VertexLabels {
    pub fixture: BTreeSet<usize>,
    pub load: BTreeSet<usize>,
    pub roi: Vec<BTreeSet<usize>>,
}

/// Tetrahedral mesh with face adjacency.
///
/// Every tet is stored with positive signed volume; construction flips
/// inverted tets.
#[derive(Clone, Debug)]
pub struct TetMesh {
    vertices: Vec<Point>,
    tets: Vec<[usize; 4]>,
    boundary_faces: Vec<BoundaryFace>,
    interior_faces: Vec<InteriorFace>,
    tet_faces: Vec<[FaceRef; 4]>,
    neighbors: Vec<[Option<usize>; 4]>,
    vertex_neighbors: Vec<Vec<usize>>,
    edge_count: usize,
    average_edge_length: f64,
    labels: VertexLabels,
}

impl TetMesh {
    pub fn new(vertices: Vec<Point>, mut tets: Vec<[usize; 4]>) -> Result<Self> {
        if vertices.is_empty() || tets.is_empty() {
            return Err(Error::EmptyMesh);
        }
        for (e, t) in tets.iter().enumerate() {
            if let Some(&v) = t.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::Topology(format!(
                    "tet {e} references vertex {v} but the mesh has {} vertices",
                    vertices.len()
                )));
            }
            let distinct: BTreeSet<_> = t.iter().collect();
            if distinct.len() != 4 {
                return Err(Error::Topology(format!("tet {e} repeats a vertex: {t:?}")));
            }
        }
        for t in tets.iter_mut() {
            if signed_volume(&vertices, t) < 0.0 {
                t.swap(2, 3);
            }
        }

        let mut keyed: Vec<([usize; 3], usize, usize)> = Vec::with_capacity(tets.len() * 4);
        for (e, t) in tets.iter().enumerate() {
            for (k, lf) in LOCAL_FACES.iter().enumerate() {
                keyed.push((sorted3([t[lf[0]], t[lf[1]], t[lf[2]]]), e, k));
            }
        }
        keyed.sort_unstable();

        let mut boundary_faces = Vec::new();
        let mut interior_faces = Vec::new();
        let mut tet_faces = vec![[FaceRef::Boundary(0); 4]; tets.len()];
        let mut neighbors = vec![[None; 4]; tets.len()];
        let mut i = 0;
        while i < keyed.len() {
            let mut j = i + 1;
            while j < keyed.len() && keyed[j].0 == keyed[i].0 {
                j += 1;
            }
            match j - i {
                1 => {
                    let (_, e, k) = keyed[i];
                    let t = tets[e];
                    let lf = LOCAL_FACES[k];
                    tet_faces[e][k] = FaceRef::Boundary(boundary_faces.len());
                    boundary_faces.push(BoundaryFace {
                        vertices: [t[lf[0]], t[lf[1]], t[lf[2]]],
                        tet: e,
                    });
                }
                2 => {
                    let (key, e0, k0) = keyed[i];
                    let (_, e1, k1) = keyed[i + 1];
                    let idx = interior_faces.len();
                    interior_faces.push(InteriorFace {
                        vertices: key,
                        tets: [e0, e1],
                    });
                    tet_faces[e0][k0] = FaceRef::Interior(idx);
                    tet_faces[e1][k1] = FaceRef::Interior(idx);
                    neighbors[e0][k0] = Some(e1);
                    neighbors[e1][k1] = Some(e0);
                }
                n => {
                    return Err(Error::Topology(format!(
                        "face {:?} is shared by {n} tets",
                        keyed[i].0
                    )))
                }
            }
            i = j;
        }

        let mut edges: Vec<[usize; 2]> = Vec::with_capacity(tets.len() * 6);
        for t in &tets {
            for a in 0..4 {
                for b in (a + 1)..4 {
                    edges.push(super::edge_key(t[a], t[b]));
                }
            }
        }
        edges.sort_unstable();
        edges.dedup();
        let mut vertex_neighbors = vec![Vec::new(); vertices.len()];
        let mut total = 0.0;
        for &[a, b] in &edges {
            vertex_neighbors[a].push(b);
            vertex_neighbors[b].push(a);
            total += (vertices[a] - vertices[b]).norm();
        }
        for nb in vertex_neighbors.iter_mut() {
            nb.sort_unstable();
        }

        Ok(TetMesh {
            average_edge_length: total / edges.len() as f64,
            edge_count: edges.len(),
            vertices,
            tets,
            boundary_faces,
            interior_faces,
            tet_faces,
            neighbors,
            vertex_neighbors,
            labels: VertexLabels::default(),
        })
    }

    pub fn with_labels(mut self, labels: VertexLabels) -> Result<Self> {
        self.set_labels(labels)?;
        Ok(self)
    }

    pub fn set_labels(&mut self, labels: VertexLabels) -> Result<()> {
        let n = self.vertices.len();
        let all = labels
            .fixture
            .iter()
            .chain(labels.load.iter())
            .chain(labels.roi.iter().flatten());
        for &v in all {
            if v >= n {
                return Err(Error::Invalid(format!("label references vertex {v} of {n}")));
            }
        }
        self.labels = labels;
        Ok(())
    }

    pub fn labels(&self) -> &VertexLabels {
        &self.labels
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn tets(&self) -> &[[usize; 4]] {
        &self.tets
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn tet_count(&self) -> usize {
        self.tets.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn face_count(&self) -> usize {
        self.boundary_faces.len() + self.interior_faces.len()
    }

    pub fn boundary_faces(&self) -> &[BoundaryFace] {
        &self.boundary_faces
    }

    pub fn interior_faces(&self) -> &[InteriorFace] {
        &self.interior_faces
    }

    /// Face opposite local vertex `k` of tet `e`.
    pub fn tet_face(&self, e: usize, k: usize) -> FaceRef {
        self.tet_faces[e][k]
    }

    /// Neighbor across the face opposite local vertex `k`.
    pub fn neighbor(&self, e: usize, k: usize) -> Option<usize> {
        self.neighbors[e][k]
    }

    pub fn vertex_neighbors(&self, v: usize) -> &[usize] {
        &self.vertex_neighbors[v]
    }

    pub fn average_edge_length(&self) -> f64 {
        self.average_edge_length
    }

    pub fn centroid(&self, e: usize) -> Point {
        let t = self.tets[e];
        (self.vertices[t[0]] + self.vertices[t[1]] + self.vertices[t[2]] + self.vertices[t[3]]) / 4.0
    }

    pub fn signed_volume(&self, e: usize) -> f64 {
        signed_volume(&self.vertices, &self.tets[e])
    }

    /// (min, max) corners of the vertex bounding box.
    pub fn bounds(&self) -> (Point, Point) {
        bounds(&self.vertices)
    }

    /// Gradients of the four linear basis functions of tet `e`.
    pub fn basis_gradients(&self, e: usize) -> Result<[Point; 4]> {
        let t = self.tets[e];
        let p = |k: usize| self.vertices[t[k]];
        let volume = self.signed_volume(e);
        if volume < DEGENERATE_VOLUME {
            return Err(Error::DegenerateTet { tet: e, volume });
        }
        let edges = Matrix3::from_columns(&[p(1) - p(0), p(2) - p(0), p(3) - p(0)]);
        let inv = edges
            .try_inverse()
            .ok_or(Error::DegenerateTet { tet: e, volume })?;
        let g1: Point = inv.row(0).transpose();
        let g2: Point = inv.row(1).transpose();
        let g3: Point = inv.row(2).transpose();
        Ok([-(g1 + g2 + g3), g1, g2, g3])
    }

    /// Constant gradient of the linear interpolant of `field` over tet `e`.
    pub fn tet_gradient(&self, field: &VertexField, e: usize) -> Result<Point> {
        self.check_field(field)?;
        let grads = self.basis_gradients(e)?;
        let t = self.tets[e];
        Ok((0..4).fold(Point::zeros(), |acc, k| acc + grads[k] * field[t[k]]))
    }

    pub(crate) fn check_field(&self, field: &VertexField) -> Result<()> {
        if field.len() != self.vertices.len() {
            return Err(Error::Invalid(format!(
                "field has {} values, mesh has {} vertices",
                field.len(),
                self.vertices.len()
            )));
        }
        Ok(())
    }

    /// All vertices within `k` edges of `seeds`, seeds included.
    pub fn k_ring<'a>(&self, seeds: impl IntoIterator<Item = &'a usize>, k: usize) -> BTreeSet<usize> {
        k_ring(&self.vertex_neighbors, seeds, k)
    }

    /// Connected components over shared vertices; returns a component id per
    /// vertex and the number of components. Isolated vertices form their own.
    pub fn vertex_components(&self) -> (Vec<usize>, usize) {
        components(&self.vertex_neighbors)
    }

    /// Euler characteristic V - E + F - T.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.edge_count as i64 + self.face_count() as i64
            - self.tet_count() as i64
    }
}

pub(crate) fn signed_volume(vertices: &[Point], t: &[usize; 4]) -> f64 {
    let a = vertices[t[0]];
    (vertices[t[1]] - a).dot(&(vertices[t[2]] - a).cross(&(vertices[t[3]] - a))) / 6.0
}

pub(crate) fn bounds(points: &[Point]) -> (Point, Point) {
    let mut lo = Point::repeat(f64::INFINITY);
    let mut hi = Point::repeat(f64::NEG_INFINITY);
    for p in points {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    (lo, hi)
}

pub(crate) fn k_ring<'a>(
    adjacency: &[Vec<usize>],
    seeds: impl IntoIterator<Item = &'a usize>,
    k: usize,
) -> BTreeSet<usize> {
    let mut depth = vec![usize::MAX; adjacency.len()];
    let mut queue = VecDeque::new();
    for &s in seeds {
        if depth[s] != 0 {
            depth[s] = 0;
            queue.push_back(s);
        }
    }
    let mut out = BTreeSet::new();
    while let Some(v) = queue.pop_front() {
        out.insert(v);
        if depth[v] == k {
            continue;
        }
        for &w in &adjacency[v] {
            if depth[w] == usize::MAX {
                depth[w] = depth[v] + 1;
                queue.push_back(w);
            }
        }
    }
    out
}

pub(crate) fn components(adjacency: &[Vec<usize>]) -> (Vec<usize>, usize) {
    let mut comp = vec![usize::MAX; adjacency.len()];
    let mut count = 0;
    let mut stack = Vec::new();
    for s in 0..adjacency.len() {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = count;
        stack.push(s);
        while let Some(v) = stack.pop() {
            for &w in &adjacency[v] {
                if comp[w] == usize::MAX {
                    comp[w] = count;
                    stack.push(w);
                }
            }
        }
        count += 1;
    }
    (comp, count)
}
