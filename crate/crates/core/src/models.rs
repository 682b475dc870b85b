//! Synthetic meshes and bundled models used by the tests, the CLI `generate`
//! command and the web demo.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use crate::mesh::{Point, TetMesh, TriMesh, VertexLabels};
use crate::stress::StressTensor;

/// Unit cube split into five tets (four corner tets around a central one).
pub fn unit_cube_five_tets() -> TetMesh {
    let vertices = (0..8)
        .map(|v| Point::new((v & 1) as f64, ((v >> 1) & 1) as f64, ((v >> 2) & 1) as f64))
        .collect();
    let tets = vec![[0, 1, 2, 4], [3, 1, 2, 7], [5, 1, 4, 7], [6, 2, 4, 7], [1, 2, 4, 7]];
    TetMesh::new(vertices, tets).expect("five-tet cube")
}

const KUHN: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Structured box mesh, each grid cell split into six tets sharing the main
/// diagonal, so neighboring cells conform.
pub fn box_mesh(cells: [usize; 3], lo: Point, hi: Point) -> TetMesh {
    box_mesh_filtered(cells, lo, hi, |_| true)
}

/// Like [`box_mesh`], keeping only the cells whose center passes `keep`.
/// Unused vertices are dropped.
pub fn box_mesh_filtered(cells: [usize; 3], lo: Point, hi: Point, keep: impl Fn(&Point) -> bool) -> TetMesh {
    let [nx, ny, nz] = cells;
    let step = Point::new(
        (hi.x - lo.x) / nx as f64,
        (hi.y - lo.y) / ny as f64,
        (hi.z - lo.z) / nz as f64,
    );
    let grid_id = |i: usize, j: usize, k: usize| i + (nx + 1) * (j + (ny + 1) * k);
    let mut remap = vec![usize::MAX; (nx + 1) * (ny + 1) * (nz + 1)];
    let mut vertices = Vec::new();
    let mut tets = Vec::new();
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let center = lo + step.component_mul(&Point::new(i as f64 + 0.5, j as f64 + 0.5, k as f64 + 0.5));
                if !keep(&center) {
                    continue;
                }
                let mut corner = |b: [usize; 3]| {
                    let (ci, cj, ck) = (i + b[0], j + b[1], k + b[2]);
                    let g = grid_id(ci, cj, ck);
                    if remap[g] == usize::MAX {
                        remap[g] = vertices.len();
                        vertices.push(lo + step.component_mul(&Point::new(ci as f64, cj as f64, ck as f64)));
                    }
                    remap[g]
                };
                for perm in KUHN {
                    let mut b = [0usize; 3];
                    let v0 = corner(b);
                    b[perm[0]] = 1;
                    let v1 = corner(b);
                    b[perm[1]] = 1;
                    let v2 = corner(b);
                    let v3 = corner([1, 1, 1]);
                    tets.push([v0, v1, v2, v3]);
                }
            }
        }
    }
    TetMesh::new(vertices, tets).expect("structured box mesh")
}

/// Vertices inside an axis-aligned box (inclusive, with a small tolerance).
pub fn vertices_in_box(points: &[Point], lo: Point, hi: Point) -> BTreeSet<usize> {
    let tol = 1e-9 * (hi - lo).norm().max(1.0);
    points
        .iter()
        .enumerate()
        .filter(|(_, p)| (0..3).all(|a| p[a] >= lo[a] - tol && p[a] <= hi[a] + tol))
        .map(|(i, _)| i)
        .collect()
}

/// Prismatic bar along x with its x=0 end labeled fixture and its x=length
/// end labeled load.
pub fn bar(length: f64, width: f64, height: f64, cells: [usize; 3]) -> TetMesh {
    let lo = Point::new(0.0, -width / 2.0, -height / 2.0);
    let hi = Point::new(length, width / 2.0, height / 2.0);
    let mesh = box_mesh(cells, lo, hi);
    let labels = end_labels(&mesh, 0.0, length);
    mesh.with_labels(labels).expect("valid labels")
}

fn end_labels(mesh: &TetMesh, x0: f64, x1: f64) -> VertexLabels {
    let (lo, hi) = mesh.bounds();
    VertexLabels {
        fixture: vertices_in_box(mesh.vertices(), Point::new(x0, lo.y, lo.z), Point::new(x0, hi.y, hi.z)),
        load: vertices_in_box(mesh.vertices(), Point::new(x1, lo.y, lo.z), Point::new(x1, hi.y, hi.z)),
        roi: Vec::new(),
    }
}

/// Parameters of the twisted-bar benchmark: a bar along x carrying a helical
/// uniaxial stress field `s(r) d(p) d(p)^T` with
/// `d = (1, -twist*z, twist*y) / |.|`, so the principal direction winds around
/// the bar axis with a helix angle growing linearly with radius.
#[derive(Clone, Copy, Debug)]
pub struct TwistBar {
    pub length: f64,
    pub width: f64,
    pub height: f64,
    pub cells: [usize; 3],
    /// Helix rate in rad/mm.
    pub twist: f64,
    /// Axial stress on the bar axis (MPa).
    pub stress: f64,
}

impl Default for TwistBar {
    fn default() -> Self {
        TwistBar {
            length: 48.0,
            width: 16.0,
            height: 16.0,
            cells: [24, 8, 8],
            twist: 0.02,
            stress: 10.0,
        }
    }
}

impl TwistBar {
    /// Grid sized to roughly `tets` elements with the default proportions.
    pub fn with_tet_count(tets: usize) -> Self {
        let cubes = (tets as f64 / 6.0).max(1.0);
        // 3:1:1 aspect
        let n = (cubes / 3.0).cbrt();
        let ny = n.round().max(1.0) as usize;
        TwistBar {
            cells: [3 * ny, ny, ny],
            ..TwistBar::default()
        }
    }

    pub fn direction(&self, p: &Point) -> Point {
        Point::new(1.0, -self.twist * p.z, self.twist * p.y).normalize()
    }

    pub fn tensor_at(&self, p: &Point) -> StressTensor {
        let r2 = p.y * p.y + p.z * p.z;
        let r_max2 = (self.width * self.width + self.height * self.height) / 4.0;
        let s = self.stress * (1.0 + r2 / r_max2);
        let d = self.direction(p);
        StressTensor::from_matrix(&(d * d.transpose() * s))
    }

    pub fn mesh(&self) -> TetMesh {
        let m = box_mesh(
            self.cells,
            Point::new(0.0, -self.width / 2.0, -self.height / 2.0),
            Point::new(self.length, self.width / 2.0, self.height / 2.0),
        );
        let labels = end_labels(&m, 0.0, self.length);
        m.with_labels(labels).expect("valid labels")
    }

    /// Analytic tensor at each element centroid.
    pub fn stress_field(&self, mesh: &TetMesh) -> Vec<StressTensor> {
        (0..mesh.tet_count()).map(|e| self.tensor_at(&mesh.centroid(e))).collect()
    }
}

/// Bar along x with two vertical bolt holes, one near each end. Cells whose
/// center falls inside a hole are removed, so hole walls are stair-stepped.
#[derive(Clone, Copy, Debug)]
pub struct BoltedBar {
    pub length: f64,
    pub width: f64,
    pub height: f64,
    pub cells: [usize; 3],
    pub hole_radius: f64,
    /// Hole center distance from each end.
    pub hole_inset: f64,
}

impl Default for BoltedBar {
    fn default() -> Self {
        BoltedBar {
            length: 60.0,
            width: 16.0,
            height: 6.0,
            cells: [40, 11, 4],
            hole_radius: 3.2,
            hole_inset: 8.0,
        }
    }
}

impl BoltedBar {
    pub fn hole_centers(&self) -> [Point; 2] {
        [
            Point::new(self.hole_inset, 0.0, 0.0),
            Point::new(self.length - self.hole_inset, 0.0, 0.0),
        ]
    }

    pub fn mesh(&self) -> TetMesh {
        let holes = self.hole_centers();
        let r = self.hole_radius;
        let m = box_mesh_filtered(
            self.cells,
            Point::new(0.0, -self.width / 2.0, -self.height / 2.0),
            Point::new(self.length, self.width / 2.0, self.height / 2.0),
            |c| holes.iter().all(|h| (c.x - h.x).hypot(c.y - h.y) > r),
        );
        // Vertices on the hole walls: within one cell diagonal of the nominal radius.
        let h = (self.length / self.cells[0] as f64).max(self.width / self.cells[1] as f64);
        let near = |center: &Point| -> BTreeSet<usize> {
            m.vertices()
                .iter()
                .enumerate()
                .filter(|(_, p)| (p.x - center.x).hypot(p.y - center.y) <= r + 0.75 * h)
                .map(|(i, _)| i)
                .collect()
        };
        let labels = VertexLabels {
            fixture: near(&holes[0]),
            load: near(&holes[1]),
            roi: Vec::new(),
        };
        m.with_labels(labels).expect("valid labels")
    }
}

/// Flat `n` x `n` grid on the square [0, size]^2 in the z=0 plane, normals +z.
pub fn grid_square(n: usize, size: f64) -> TriMesh {
    grid_rect(n, n, size, size)
}

pub fn grid_rect(nx: usize, ny: usize, sx: f64, sy: f64) -> TriMesh {
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(Point::new(sx * i as f64 / nx as f64, sy * j as f64 / ny as f64, 0.0));
        }
    }
    let id = |i: usize, j: usize| i + (nx + 1) * j;
    let mut faces = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if (i + j) % 2 == 0 {
                faces.push([a, b, c]);
                faces.push([a, c, d]);
            } else {
                faces.push([a, b, d]);
                faces.push([b, c, d]);
            }
        }
    }
    TriMesh::new(vertices, faces).expect("grid")
}

/// Equilateral triangle of side `size` subdivided `n` times along each side.
pub fn equilateral_grid(n: usize, size: f64) -> TriMesh {
    let h = size / n as f64;
    let mut ids = vec![vec![0usize; n + 1]; n + 1];
    let mut vertices = Vec::new();
    for (j, row) in ids.iter_mut().enumerate() {
        for i in 0..=(n - j) {
            row[i] = vertices.len();
            vertices.push(Point::new(h * (i as f64 + 0.5 * j as f64), h * j as f64 * 3f64.sqrt() / 2.0, 0.0));
        }
    }
    let mut faces = Vec::new();
    for j in 0..n {
        for i in 0..(n - j) {
            faces.push([ids[j][i], ids[j][i + 1], ids[j + 1][i]]);
            if i + 1 < n - j {
                faces.push([ids[j][i + 1], ids[j + 1][i + 1], ids[j + 1][i]]);
            }
        }
    }
    TriMesh::new(vertices, faces).expect("equilateral grid")
}

/// Flat annulus in the z=0 plane centered at the origin.
pub fn annulus(r_in: f64, r_out: f64, n_theta: usize, n_r: usize) -> TriMesh {
    let mut vertices = Vec::new();
    for i in 0..=n_r {
        let r = r_in + (r_out - r_in) * i as f64 / n_r as f64;
        for j in 0..n_theta {
            let t = 2.0 * PI * j as f64 / n_theta as f64;
            vertices.push(Point::new(r * t.cos(), r * t.sin(), 0.0));
        }
    }
    let id = |i: usize, j: usize| i * n_theta + j % n_theta;
    let mut faces = Vec::new();
    for i in 0..n_r {
        for j in 0..n_theta {
            faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    orient_up(vertices, faces)
}

/// Open cylinder of radius `r` around the z axis, from z=0 to z=`height`.
pub fn cylinder(r: f64, height: f64, n_theta: usize, n_h: usize) -> TriMesh {
    let mut vertices = Vec::new();
    for i in 0..=n_h {
        let z = height * i as f64 / n_h as f64;
        for j in 0..n_theta {
            let t = 2.0 * PI * j as f64 / n_theta as f64;
            vertices.push(Point::new(r * t.cos(), r * t.sin(), z));
        }
    }
    let id = |i: usize, j: usize| i * n_theta + j % n_theta;
    let mut faces = Vec::new();
    for i in 0..n_h {
        for j in 0..n_theta {
            faces.push([id(i, j), id(i, j + 1), id(i + 1, j + 1)]);
            faces.push([id(i, j), id(i + 1, j + 1), id(i + 1, j)]);
        }
    }
    TriMesh::new(vertices, faces).expect("cylinder")
}

/// Flat plate assembled from square cells of side `cell`; `pattern[row][col]`
/// marks cells that carry a centered circular hole of radius `radius`. Hole
/// cells use an O-grid with `4 * divisions` points around the hole; plain
/// cells a `divisions` x `divisions` grid, so shared cell sides conform.
pub fn holed_plate(pattern: &[Vec<bool>], cell: f64, radius: f64, divisions: usize) -> TriMesh {
    assert!(radius < 0.5 * cell, "hole must fit inside its cell");
    let n = divisions;
    let rings = (n / 2).max(2);
    let mut welder = Welder::default();
    let mut faces = Vec::new();
    for (r, row) in pattern.iter().enumerate() {
        for (c, &hole) in row.iter().enumerate() {
            let origin = Point::new(c as f64 * cell, r as f64 * cell, 0.0);
            let center = origin + Point::new(0.5 * cell, 0.5 * cell, 0.0);
            if hole {
                let a = 0.5 * cell;
                let square = |j: usize| -> Point {
                    let s = 2.0 * a * (j % n) as f64 / n as f64;
                    match (j / n) % 4 {
                        0 => Point::new(-a + s, -a, 0.0),
                        1 => Point::new(a, -a + s, 0.0),
                        2 => Point::new(a - s, a, 0.0),
                        _ => Point::new(-a, a - s, 0.0),
                    }
                };
                let mut ids = vec![vec![0usize; 4 * n]; rings + 1];
                for (i, ring) in ids.iter_mut().enumerate() {
                    let s = i as f64 / rings as f64;
                    for (j, id) in ring.iter_mut().enumerate() {
                        let sq = square(j);
                        let circ = sq.normalize() * radius;
                        *id = welder.add(center + circ * (1.0 - s) + sq * s);
                    }
                }
                for i in 0..rings {
                    for j in 0..4 * n {
                        let jn = (j + 1) % (4 * n);
                        let (p, q, u, v) = (ids[i][j], ids[i][jn], ids[i + 1][jn], ids[i + 1][j]);
                        faces.push([p, q, u]);
                        faces.push([p, u, v]);
                    }
                }
            } else {
                let h = cell / n as f64;
                let mut ids = vec![vec![0usize; n + 1]; n + 1];
                for (j, row_ids) in ids.iter_mut().enumerate() {
                    for (i, id) in row_ids.iter_mut().enumerate() {
                        *id = welder.add(origin + Point::new(h * i as f64, h * j as f64, 0.0));
                    }
                }
                for j in 0..n {
                    for i in 0..n {
                        let (a, b, c, d) = (ids[j][i], ids[j][i + 1], ids[j + 1][i + 1], ids[j + 1][i]);
                        if (i + j) % 2 == 0 {
                            faces.push([a, b, c]);
                            faces.push([a, c, d]);
                        } else {
                            faces.push([a, b, d]);
                            faces.push([b, c, d]);
                        }
                    }
                }
            }
        }
    }
    orient_up(welder.points, faces)
}

/// A 1 x `holes.len()` strip of plate cells.
pub fn holed_strip(holes: &[bool], cell: f64, radius: f64, divisions: usize) -> TriMesh {
    holed_plate(&[holes.to_vec()], cell, radius, divisions)
}

#[derive(Default)]
struct Welder {
    points: Vec<Point>,
    index: BTreeMap<(i64, i64, i64), usize>,
}

impl Welder {
    fn add(&mut self, p: Point) -> usize {
        let q = |x: f64| (x * 1e7).round() as i64;
        let key = (q(p.x), q(p.y), q(p.z));
        let next = self.points.len();
        *self.index.entry(key).or_insert_with(|| {
            self.points.push(p);
            next
        })
    }
}

fn orient_up(vertices: Vec<Point>, mut faces: Vec<[usize; 3]>) -> TriMesh {
    for f in faces.iter_mut() {
        let [a, b, c] = f.map(|v| vertices[v]);
        if (b - a).cross(&(c - a)).z < 0.0 {
            f.swap(1, 2);
        }
    }
    TriMesh::new(vertices, faces).expect("planar mesh")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_mesh_volume_and_euler() {
        let m = box_mesh([3, 2, 4], Point::zeros(), Point::new(3.0, 2.0, 4.0));
        let vol: f64 = (0..m.tet_count()).map(|e| m.signed_volume(e)).sum();
        assert!((vol - 24.0).abs() < 1e-12);
        assert_eq!(m.euler_characteristic(), 1);
        assert_eq!(m.tet_count(), 6 * 24);
    }

    #[test]
    fn bolted_bar_has_two_tunnels() {
        let b = BoltedBar::default();
        let m = b.mesh();
        // Solid with two through-holes: chi = 1 - 2.
        assert_eq!(m.euler_characteristic(), -1);
        assert!(!m.labels().fixture.is_empty() && !m.labels().load.is_empty());
    }

    #[test]
    fn holed_plate_topology() {
        let m = holed_strip(&[true, false, true], 10.0, 2.5, 8);
        assert_eq!(m.boundary_loops().len(), 3);
        assert_eq!(m.euler_characteristic(), -1);
        let expected = 300.0 - 2.0 * PI * 2.5 * 2.5;
        // Polygonal holes are slightly smaller than the circles.
        assert!((m.total_area() - expected).abs() < 0.02 * expected);
        for f in 0..m.face_count() {
            assert!(m.face_normal(f).z > 0.99);
        }
    }

    #[test]
    fn twist_bar_direction_is_helical() {
        let t = TwistBar::default();
        let d = t.direction(&Point::new(3.0, 0.0, 5.0));
        assert!(d.y < 0.0 && d.z.abs() < 1e-15);
        let s = t.tensor_at(&Point::new(1.0, 2.0, 3.0)).matrix();
        assert!((s - s.transpose()).norm() < 1e-14);
    }
}
