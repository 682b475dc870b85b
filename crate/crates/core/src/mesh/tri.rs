use super::{edge_key, Point, VertexField, DEGENERATE_AREA};
use crate::{Error, Result};

/// Edge-manifold triangle mesh with boundary loops.
#[derive(Clone, Debug)]
pub struct TriMesh {
    vertices: Vec<Point>,
    faces: Vec<[usize; 3]>,
    source_tet: Option<Vec<usize>>,
    edges: Vec<[usize; 2]>,
    /// First and optional second incident face of each edge.
    edge_faces: Vec<(usize, Option<usize>)>,
    /// Edge `k` of a face joins local vertices `k` and `k+1`.
    face_edges: Vec<[usize; 3]>,
    vertex_neighbors: Vec<Vec<usize>>,
    vertex_faces: Vec<Vec<usize>>,
    boundary_loops: Vec<Vec<usize>>,
    on_boundary: Vec<bool>,
}

impl PartialEq for TriMesh {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.faces == other.faces && self.source_tet == other.source_tet
    }
}

impl TriMesh {
    pub fn new(vertices: Vec<Point>, faces: Vec<[usize; 3]>) -> Result<Self> {
        for (f, t) in faces.iter().enumerate() {
            if let Some(&v) = t.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::Topology(format!("face {f} references missing vertex {v}")));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::Topology(format!("face {f} repeats a vertex: {t:?}")));
            }
        }
        let mut keyed: Vec<([usize; 2], usize, usize)> = Vec::with_capacity(faces.len() * 3);
        for (f, t) in faces.iter().enumerate() {
            for k in 0..3 {
                keyed.push((edge_key(t[k], t[(k + 1) % 3]), f, k));
            }
        }
        keyed.sort_unstable();

        let mut edges = Vec::new();
        let mut edge_faces = Vec::new();
        let mut face_edges = vec![[0usize; 3]; faces.len()];
        let mut i = 0;
        while i < keyed.len() {
            let mut j = i + 1;
            while j < keyed.len() && keyed[j].0 == keyed[i].0 {
                j += 1;
            }
            if j - i > 2 {
                return Err(Error::Topology(format!(
                    "edge {:?} bounds {} faces",
                    keyed[i].0,
                    j - i
                )));
            }
            let idx = edges.len();
            edges.push(keyed[i].0);
            edge_faces.push((keyed[i].1, (j - i == 2).then(|| keyed[i + 1].1)));
            for &(_, f, k) in &keyed[i..j] {
                face_edges[f][k] = idx;
            }
            i = j;
        }

        let mut vertex_neighbors = vec![Vec::new(); vertices.len()];
        for &[a, b] in &edges {
            vertex_neighbors[a].push(b);
            vertex_neighbors[b].push(a);
        }
        for nb in vertex_neighbors.iter_mut() {
            nb.sort_unstable();
        }
        let mut vertex_faces = vec![Vec::new(); vertices.len()];
        for (f, t) in faces.iter().enumerate() {
            for &v in t {
                vertex_faces[v].push(f);
            }
        }

        let boundary_loops = trace_boundary_loops(&faces, &edges, &edge_faces, vertices.len())?;
        let mut on_boundary = vec![false; vertices.len()];
        for &v in boundary_loops.iter().flatten() {
            on_boundary[v] = true;
        }

        Ok(TriMesh {
            vertices,
            faces,
            source_tet: None,
            edges,
            edge_faces,
            face_edges,
            vertex_neighbors,
            vertex_faces,
            boundary_loops,
            on_boundary,
        })
    }

    pub fn with_source_tets(mut self, source_tet: Vec<usize>) -> Result<Self> {
        if source_tet.len() != self.faces.len() {
            return Err(Error::Invalid(format!(
                "{} source tets for {} faces",
                source_tet.len(),
                self.faces.len()
            )));
        }
        self.source_tet = Some(source_tet);
        Ok(self)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn source_tets(&self) -> Option<&[usize]> {
        self.source_tet.as_deref()
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn edge_faces(&self, edge: usize) -> (usize, Option<usize>) {
        self.edge_faces[edge]
    }

    pub fn face_edges(&self, f: usize) -> [usize; 3] {
        self.face_edges[f]
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.edges.binary_search(&edge_key(a, b)).ok()
    }

    pub fn vertex_neighbors(&self, v: usize) -> &[usize] {
        &self.vertex_neighbors[v]
    }

    pub fn vertex_faces(&self, v: usize) -> &[usize] {
        &self.vertex_faces[v]
    }

    pub fn boundary_loops(&self) -> &[Vec<usize>] {
        &self.boundary_loops
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.on_boundary[v]
    }

    pub fn is_boundary_edge(&self, edge: usize) -> bool {
        self.edge_faces[edge].1.is_none()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    pub fn face_points(&self, f: usize) -> [Point; 3] {
        self.faces[f].map(|v| self.vertices[v])
    }

    /// Unnormalized normal, length twice the area.
    pub fn face_cross(&self, f: usize) -> Point {
        let [a, b, c] = self.face_points(f);
        (b - a).cross(&(c - a))
    }

    pub fn face_area(&self, f: usize) -> f64 {
        0.5 * self.face_cross(f).norm()
    }

    pub fn face_normal(&self, f: usize) -> Point {
        let n = self.face_cross(f);
        let len = n.norm();
        if len > 0.0 {
            n / len
        } else {
            Point::zeros()
        }
    }

    pub fn face_centroid(&self, f: usize) -> Point {
        let [a, b, c] = self.face_points(f);
        (a + b + c) / 3.0
    }

    pub fn total_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    pub fn average_edge_length(&self) -> f64 {
        if self.edges.is_empty() {
            return 0.0;
        }
        self.edges
            .iter()
            .map(|&[a, b]| (self.vertices[a] - self.vertices[b]).norm())
            .sum::<f64>()
            / self.edges.len() as f64
    }

    /// Area-weighted vertex normals.
    pub fn vertex_normals(&self) -> Vec<Point> {
        let mut normals = vec![Point::zeros(); self.vertices.len()];
        for (f, t) in self.faces.iter().enumerate() {
            let n = self.face_cross(f);
            for &v in t {
                normals[v] += n;
            }
        }
        for n in normals.iter_mut() {
            let len = n.norm();
            if len > 0.0 {
                *n /= len;
            }
        }
        normals
    }

    /// Gradients of the three linear basis functions of face `f`, tangent to it.
    pub fn basis_gradients(&self, f: usize) -> Result<[Point; 3]> {
        let p = self.face_points(f);
        let n = self.face_cross(f);
        let double_area = n.norm();
        if 0.5 * double_area < DEGENERATE_AREA {
            return Err(Error::DegenerateFace {
                face: f,
                area: 0.5 * double_area,
            });
        }
        let unit = n / double_area;
        Ok([0, 1, 2].map(|k| unit.cross(&(p[(k + 2) % 3] - p[(k + 1) % 3])) / double_area))
    }

    /// Intrinsic gradient of the linear interpolant of `field` over face `f`.
    pub fn tri_gradient(&self, field: &VertexField, f: usize) -> Result<Point> {
        if field.len() != self.vertices.len() {
            return Err(Error::Invalid(format!(
                "field has {} values, mesh has {} vertices",
                field.len(),
                self.vertices.len()
            )));
        }
        let g = self.basis_gradients(f)?;
        let t = self.faces[f];
        Ok(g[0] * field[t[0]] + g[1] * field[t[1]] + g[2] * field[t[2]])
    }

    /// Connected components over edges.
    pub fn vertex_components(&self) -> (Vec<usize>, usize) {
        super::tet::components(&self.vertex_neighbors)
    }

    pub fn k_ring<'a>(
        &self,
        seeds: impl IntoIterator<Item = &'a usize>,
        k: usize,
    ) -> std::collections::BTreeSet<usize> {
        super::tet::k_ring(&self.vertex_neighbors, seeds, k)
    }
}

fn trace_boundary_loops(
    faces: &[[usize; 3]],
    edges: &[[usize; 2]],
    edge_faces: &[(usize, Option<usize>)],
    vertex_count: usize,
) -> Result<Vec<Vec<usize>>> {
    // Boundary half-edges oriented like their face.
    let mut outgoing: Vec<Vec<usize>> = vec![Vec::new(); vertex_count];
    let mut in_degree = vec![0usize; vertex_count];
    let mut half_edges = Vec::new();
    for (e, &(f, other)) in edge_faces.iter().enumerate() {
        if other.is_some() {
            continue;
        }
        let [a, b] = edges[e];
        let t = faces[f];
        let forward = (0..3).any(|k| t[k] == a && t[(k + 1) % 3] == b);
        let (from, to) = if forward { (a, b) } else { (b, a) };
        outgoing[from].push(half_edges.len());
        in_degree[to] += 1;
        half_edges.push((from, to));
    }
    for v in 0..vertex_count {
        if outgoing[v].len() != in_degree[v] {
            return Err(Error::Topology(format!(
                "open boundary chain at vertex {v} (orientation is inconsistent)"
            )));
        }
    }
    let mut used = vec![false; half_edges.len()];
    let mut loops = Vec::new();
    for start in 0..half_edges.len() {
        if used[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut h = start;
        loop {
            used[h] = true;
            let (from, to) = half_edges[h];
            cycle.push(from);
            match outgoing[to].iter().find(|&&n| !used[n]) {
                Some(&n) => h = n,
                None => break,
            }
        }
        loops.push(cycle);
    }
    Ok(loops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;

    fn tri(points: [[f64; 3]; 3]) -> TriMesh {
        TriMesh::new(points.map(|p| Point::new(p[0], p[1], p[2])).to_vec(), vec![[0, 1, 2]]).unwrap()
    }

    #[test]
    fn gradient_in_plane() {
        let m = tri([[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.3, 1.5, 0.0]]);
        let f = VertexField::from_fn(m.vertices(), |p| p.x);
        assert!((m.tri_gradient(&f, 0).unwrap() - Point::x()).norm() < 1e-12);
        let c = VertexField::from_fn(m.vertices(), |_| -3.0);
        assert!(m.tri_gradient(&c, 0).unwrap().norm() < 1e-12);
    }

    #[test]
    fn gradient_is_tangential() {
        let m = tri([[0.0, 0.0, 0.0], [0.0, 1.0, 0.2], [0.0, 0.4, 1.0]]);
        let f = VertexField::from_fn(m.vertices(), |p| p.x);
        assert!(m.tri_gradient(&f, 0).unwrap().norm() < 1e-12);
        let g = VertexField::from_fn(m.vertices(), |p| p.x + 2.0 * p.y - p.z);
        let grad = m.tri_gradient(&g, 0).unwrap();
        assert!(grad.dot(&m.face_normal(0)).abs() < 1e-12);
    }

    #[test]
    fn degenerate_face_errors() {
        let m = tri([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]]);
        let f = VertexField::from_fn(m.vertices(), |p| p.x);
        assert!(matches!(m.tri_gradient(&f, 0), Err(Error::DegenerateFace { face: 0, .. })));
    }

    #[test]
    fn nonmanifold_edge_rejected() {
        let v = vec![Point::zeros(), Point::x(), Point::y(), Point::z(), -Point::y()];
        assert!(TriMesh::new(v, vec![[0, 1, 2], [1, 0, 3], [0, 1, 4]]).is_err());
    }

    #[test]
    fn square_has_one_boundary_loop() {
        let m = models::grid_square(4, 1.0);
        assert_eq!(m.boundary_loops().len(), 1);
        assert_eq!(m.boundary_loops()[0].len(), 16);
        assert_eq!(m.euler_characteristic(), 1);
    }

    #[test]
    fn boundary_loops_cover_boundary_edges() {
        let m = models::holed_strip(&[true, false, true], 10.0, 2.5, 8);
        let loop_edges: usize = m.boundary_loops().iter().map(Vec::len).sum();
        let boundary_edges = (0..m.edges().len()).filter(|&e| m.is_boundary_edge(e)).count();
        assert_eq!(loop_edges, boundary_edges);
        assert_eq!(m.boundary_loops().len(), 3);
        assert_eq!(m.euler_characteristic(), -1);
    }
}
