use crate::mesh::{Point, TriMesh};

use super::CurvedLayer;

const LEAF: usize = 4;

#[derive(Clone, Debug)]
struct Node {
    lo: Point,
    hi: Point,
    /// Leaf: `start..end` into `order`; inner: children at `start` and `end`.
    start: usize,
    end: usize,
    leaf: bool,
}

/// Bounding-volume hierarchy over the faces of a triangle mesh for
/// closest-point queries.
#[derive(Clone, Debug)]
pub struct TriangleTree {
    tris: Vec<[Point; 3]>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl TriangleTree {
    pub fn new(mesh: &TriMesh) -> Self {
        let tris: Vec<[Point; 3]> = (0..mesh.face_count()).map(|f| mesh.face_points(f)).collect();
        Self::from_triangles(tris)
    }

    pub fn from_triangles(tris: Vec<[Point; 3]>) -> Self {
        let mut tree = TriangleTree {
            order: (0..tris.len()).collect(),
            tris,
            nodes: Vec::new(),
        };
        if !tree.tris.is_empty() {
            let centers: Vec<Point> = tree.tris.iter().map(|t| (t[0] + t[1] + t[2]) / 3.0).collect();
            tree.build(0, tree.tris.len(), &centers);
        }
        tree
    }

    pub fn is_empty(&self) -> bool {
        self.tris.is_empty()
    }

    fn bounds(&self, range: std::ops::Range<usize>) -> (Point, Point) {
        let mut lo = Point::repeat(f64::INFINITY);
        let mut hi = Point::repeat(f64::NEG_INFINITY);
        for &t in &self.order[range] {
            for p in &self.tris[t] {
                lo = lo.inf(p);
                hi = hi.sup(p);
            }
        }
        (lo, hi)
    }

    fn build(&mut self, start: usize, end: usize, centers: &[Point]) -> usize {
        let (lo, hi) = self.bounds(start..end);
        let id = self.nodes.len();
        self.nodes.push(Node {
            lo,
            hi,
            start,
            end,
            leaf: true,
        });
        if end - start <= LEAF {
            return id;
        }
        let axis = (hi - lo).imax();
        self.order[start..end].sort_by(|&a, &b| centers[a][axis].total_cmp(&centers[b][axis]).then(a.cmp(&b)));
        let mid = (start + end) / 2;
        let left = self.build(start, mid, centers);
        let right = self.build(mid, end, centers);
        self.nodes[id] = Node {
            lo,
            hi,
            start: left,
            end: right,
            leaf: false,
        };
        id
    }

    /// Distance from `p` to the nearest triangle, `None` for an empty tree.
    pub fn distance(&self, p: &Point) -> Option<f64> {
        self.closest(p).map(|q| (q - p).norm())
    }

    /// Nearest point on the mesh surface.
    pub fn closest(&self, p: &Point) -> Option<Point> {
        if self.tris.is_empty() {
            return None;
        }
        let mut best = (f64::INFINITY, *p);
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if box_distance_sq(p, &node.lo, &node.hi) >= best.0 {
                continue;
            }
            if node.leaf {
                for &t in &self.order[node.start..node.end] {
                    let q = closest_on_triangle(p, &self.tris[t]);
                    let d = (q - p).norm_squared();
                    if d < best.0 {
                        best = (d, q);
                    }
                }
            } else {
                let (a, b) = (node.start, node.end);
                let da = box_distance_sq(p, &self.nodes[a].lo, &self.nodes[a].hi);
                let db = box_distance_sq(p, &self.nodes[b].lo, &self.nodes[b].hi);
                if da < db {
                    stack.push(b);
                    stack.push(a);
                } else {
                    stack.push(a);
                    stack.push(b);
                }
            }
        }
        Some(best.1)
    }
}

fn box_distance_sq(p: &Point, lo: &Point, hi: &Point) -> f64 {
    (0..3)
        .map(|k| {
            let d = (lo[k] - p[k]).max(0.0).max(p[k] - hi[k]);
            d * d
        })
        .sum()
}

/// Closest point on triangle `t` to `p` (Voronoi-region walk).
pub(crate) fn closest_on_triangle(p: &Point, t: &[Point; 3]) -> Point {
    let (a, b, c) = (t[0], t[1], t[2]);
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = va + vb + vc;
    if !(denom.abs() > 0.0) {
        // Degenerate triangle: fall back to its edges.
        return [(a, b), (b, c), (c, a)]
            .iter()
            .map(|&(u, v)| closest_on_segment(p, &u, &v))
            .min_by(|x, y| (x - p).norm_squared().total_cmp(&(y - p).norm_squared()))
            .unwrap();
    }
    let v = vb / denom;
    let w = vc / denom;
    a + ab * v + ac * w
}

pub(crate) fn closest_on_segment(p: &Point, a: &Point, b: &Point) -> Point {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return *a;
    }
    a + ab * ((p - a).dot(&ab) / len2).clamp(0.0, 1.0)
}

/// Distance from each sample to the previous layer; `None` throughout when
/// that layer is empty.
pub fn measure_layer_thickness(previous: &CurvedLayer, samples: &[Point]) -> Vec<Option<f64>> {
    let tree = TriangleTree::new(&previous.surface);
    crate::par::map_range(samples.len(), |i| tree.distance(&samples[i]))
}
