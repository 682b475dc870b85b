//! Cut graphs and cutting a layer open along them.

use std::collections::{BTreeMap, BTreeSet};

use super::geodesic::edge_dijkstra;
use super::CriticalContours;
use crate::mesh::{edge_key, Point, TriMesh};
use crate::{Error, Result};

/// The region vertex nearest to the area centroid of the region's faces
/// (faces with all three vertices in the region; the plain vertex mean when
/// there are none). Ties go to the lower vertex index.
pub fn region_center(mesh: &TriMesh, region: &[usize]) -> Result<usize> {
    if region.is_empty() {
        return Err(Error::Invalid("region is empty".into()));
    }
    let members: BTreeSet<usize> = region.iter().copied().collect();
    let (mut area, mut moment) = (0.0, Point::zeros());
    for f in 0..mesh.face_count() {
        if mesh.faces()[f].iter().all(|v| members.contains(v)) {
            let a = mesh.face_area(f);
            area += a;
            moment += mesh.face_centroid(f) * a;
        }
    }
    let target = if area > 0.0 {
        moment / area
    } else {
        members.iter().map(|&v| mesh.vertices()[v]).sum::<Point>() / members.len() as f64
    };
    let mut best = (f64::INFINITY, usize::MAX);
    for &v in &members {
        let d = (mesh.vertices()[v] - target).norm_squared();
        if d < best.0 {
            best = (d, v);
        }
    }
    Ok(best.1)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CutGraph {
    /// Paths linking centers to their contours and to each other.
    pub paths: Vec<Vec<usize>>,
    /// Path from the linked contours to the outer boundary.
    pub outer_leg: Option<Vec<usize>>,
}

impl CutGraph {
    pub fn all_paths(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.paths.iter().chain(self.outer_leg.iter())
    }

    /// Mesh edges along the contour-linking paths.
    pub fn linking_edges(&self) -> BTreeSet<[usize; 2]> {
        self.paths
            .iter()
            .flat_map(|p| p.windows(2).map(|w| edge_key(w[0], w[1])))
            .collect()
    }

    pub fn edges(&self) -> BTreeSet<[usize; 2]> {
        self.all_paths()
            .flat_map(|p| p.windows(2).map(|w| edge_key(w[0], w[1])))
            .collect()
    }
}

fn trace_back(prev: &[Option<usize>], end: usize) -> Vec<usize> {
    let mut path = vec![end];
    let mut v = end;
    while let Some(u) = prev[v] {
        path.push(u);
        v = u;
    }
    path
}

/// Shortest edge path from any of `from` to any of `to`, through vertices
/// that are neither boundary vertices nor in `blocked`. Returned from the
/// `to` end back to the `from` end.
fn flood(
    mesh: &TriMesh,
    from: &[usize],
    to: &BTreeSet<usize>,
    blocked: &BTreeSet<usize>,
    what: &str,
) -> Result<Vec<usize>> {
    if let Some(&v) = from.iter().find(|v| to.contains(v)) {
        return Ok(vec![v]);
    }
    let (dist, prev) = edge_dijkstra(mesh, from, |u| {
        to.contains(&u) || (!mesh.is_boundary_vertex(u) && !blocked.contains(&u))
    });
    // The search runs on through targets, so keep only paths that meet the
    // target set at their end.
    let end = to
        .iter()
        .copied()
        .filter(|&t| dist[t].is_finite())
        .filter(|&t| trace_back(&prev, t)[1..].iter().all(|v| !to.contains(v)))
        .min_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)))
        .ok_or_else(|| Error::Unreachable(format!("no edge path for {what}")))?;
    Ok(trace_back(&prev, end))
}

/// Prim's tree over edge-graph distances between centers, rooted at center
/// 0. Returns `(child, parent)` pairs in insertion order.
fn center_tree(mesh: &TriMesh, centers: &[usize]) -> Result<Vec<(usize, usize)>> {
    let dist: Vec<Vec<f64>> = centers.iter().map(|&c| edge_dijkstra(mesh, &[c], |_| true).0).collect();
    let n = centers.len();
    let mut in_tree = vec![false; n];
    in_tree[0] = true;
    let mut out = Vec::with_capacity(n.saturating_sub(1));
    for _ in 1..n {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in (0..n).filter(|&i| in_tree[i]) {
            for j in (0..n).filter(|&j| !in_tree[j]) {
                let d = dist[i][centers[j]];
                if d.is_finite() && best.is_none_or(|(b, _, _)| d < b) {
                    best = Some((d, j, i));
                }
            }
        }
        let Some((_, j, i)) = best else {
            let j = (0..n).find(|&j| !in_tree[j]).expect("a center outside the tree");
            return Err(Error::Unreachable(format!("center {j} from center 0")));
        };
        in_tree[j] = true;
        out.push((j, i));
    }
    Ok(out)
}

/// Connects every critical contour to its region center, the centers to each
/// other along a minimum spanning tree, and the result to the outer boundary.
pub fn build_cut_graph(mesh: &TriMesh, centers: &[usize], contours: &CriticalContours) -> Result<CutGraph> {
    if contours.contours.is_empty() {
        return Err(Error::Invalid("cut graph needs at least one critical contour".into()));
    }
    if centers.len() != contours.contours.len() {
        return Err(Error::Invalid("one center per critical contour is required".into()));
    }
    let mut tree: BTreeSet<usize> = BTreeSet::new();
    let mut graph = CutGraph::default();
    let spoke = |j: usize, tree: &mut BTreeSet<usize>, graph: &mut CutGraph| -> Result<()> {
        let h = &contours.contours[j];
        let target: BTreeSet<usize> = h.iter().copied().collect();
        let mut path = flood(mesh, &[centers[j]], &target, tree, &format!("center {j} to contour {j}"))?;
        path.reverse();
        tree.extend(path.iter().copied());
        tree.extend(h.iter().copied());
        graph.paths.push(path);
        Ok(())
    };
    spoke(0, &mut tree, &mut graph)?;
    for (j, parent) in center_tree(mesh, centers)? {
        spoke(j, &mut tree, &mut graph)?;
        let target = BTreeSet::from([centers[parent]]);
        let mut blocked = tree.clone();
        blocked.remove(&centers[j]);
        let mut link = flood(mesh, &[centers[j]], &target, &blocked, &format!("center {j} to center {parent}"))?;
        link.reverse();
        tree.extend(link.iter().copied());
        graph.paths.push(link);
    }
    let outer: BTreeSet<usize> = contours.outer.iter().flatten().copied().collect();
    if !outer.is_empty() {
        let from: Vec<usize> = tree.iter().copied().collect();
        let mut leg = flood(mesh, &from, &outer, &BTreeSet::new(), "contours to outer boundary")?;
        leg.reverse();
        graph.outer_leg = Some(leg);
    }
    Ok(graph)
}

/// A cut surface and, for each of its vertices, the original vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct CutMesh {
    pub surface: TriMesh,
    pub origin: Vec<usize>,
}

impl CutMesh {
    pub fn identity(surface: TriMesh) -> Self {
        let origin = (0..surface.vertex_count()).collect();
        CutMesh { surface, origin }
    }
}

/// Splits the mesh along the cut edges: around each cut vertex, faces that
/// stay connected across uncut edges share one copy of the vertex.
pub fn cut_mesh(mesh: &TriMesh, cut: &CutGraph) -> Result<CutMesh> {
    let mut cut_edges: BTreeSet<[usize; 2]> = BTreeSet::new();
    for path in cut.all_paths() {
        for w in path.windows(2) {
            if mesh.edge_index(w[0], w[1]).is_none() {
                return Err(Error::Invalid(format!("cut path step {}-{} is not a mesh edge", w[0], w[1])));
            }
            cut_edges.insert(edge_key(w[0], w[1]));
        }
    }
    if cut_edges.is_empty() {
        return Ok(CutMesh::identity(mesh.clone()));
    }
    let cut_vertices: BTreeSet<usize> = cut_edges.iter().flatten().copied().collect();
    let mut vertices = mesh.vertices().to_vec();
    let mut origin: Vec<usize> = (0..vertices.len()).collect();
    let mut faces = mesh.faces().to_vec();
    for &v in &cut_vertices {
        let fan = mesh.vertex_faces(v);
        // Union faces of the fan that share an uncut edge at v.
        let mut group: BTreeMap<usize, usize> = fan.iter().map(|&f| (f, f)).collect();
        fn find(g: &mut BTreeMap<usize, usize>, f: usize) -> usize {
            let p = g[&f];
            if p == f {
                return f;
            }
            let r = find(g, p);
            g.insert(f, r);
            r
        }
        for &u in mesh.vertex_neighbors(v) {
            if cut_edges.contains(&edge_key(u, v)) {
                continue;
            }
            let e = mesh.edge_index(u, v).expect("neighbor edge");
            if let (a, Some(b)) = mesh.edge_faces(e) {
                let (ra, rb) = (find(&mut group, a), find(&mut group, b));
                if ra != rb {
                    group.insert(ra.max(rb), ra.min(rb));
                }
            }
        }
        let mut roots: Vec<usize> = fan.iter().map(|&f| find(&mut group, f)).collect();
        roots.sort_unstable();
        roots.dedup();
        for &root in &roots[1..] {
            let copy = vertices.len();
            vertices.push(mesh.vertices()[v]);
            origin.push(v);
            for &f in fan {
                if find(&mut group, f) == root {
                    for slot in faces[f].iter_mut() {
                        if *slot == v {
                            *slot = copy;
                        }
                    }
                }
            }
        }
    }
    let mut surface = TriMesh::new(vertices, faces)?;
    if let Some(src) = mesh.source_tets() {
        surface = surface.with_source_tets(src.to_vec())?;
    }
    Ok(CutMesh { surface, origin })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;
    use crate::surfpath::{detect_contours, geodesic_field, voronoi_partition, Selector};

    fn boundary_components(mesh: &TriMesh) -> usize {
        // Union-find over boundary edges, independent of the stored loops.
        let n = mesh.vertex_count();
        let mut parent: Vec<usize> = (0..n).collect();
        fn root(p: &mut [usize], mut v: usize) -> usize {
            while p[v] != v {
                p[v] = p[p[v]];
                v = p[v];
            }
            v
        }
        let mut on = vec![false; n];
        for (e, [a, b]) in mesh.edges().iter().enumerate() {
            if mesh.is_boundary_edge(e) {
                on[*a] = true;
                on[*b] = true;
                let (ra, rb) = (root(&mut parent, *a), root(&mut parent, *b));
                parent[ra] = rb;
            }
        }
        let roots: BTreeSet<usize> = (0..n).filter(|&v| on[v]).map(|v| root(&mut parent, v)).collect();
        roots.len()
    }

    fn brute_euler(mesh: &TriMesh) -> i64 {
        let mut edges = BTreeSet::new();
        for f in mesh.faces() {
            for k in 0..3 {
                edges.insert(edge_key(f[k], f[(k + 1) % 3]));
            }
        }
        let used: BTreeSet<usize> = mesh.faces().iter().flatten().copied().collect();
        used.len() as i64 - edges.len() as i64 + mesh.face_count() as i64
    }

    fn plan_cut(plate: &TriMesh, selectors: &[Selector]) -> (CriticalContours, Vec<usize>, CutGraph) {
        let contours = detect_contours(plate, selectors);
        let fields: Vec<Vec<f64>> = contours.contours.iter().map(|h| geodesic_field(plate, h)).collect();
        let regions = voronoi_partition(&fields);
        let centers: Vec<usize> = (0..fields.len())
            .map(|i| {
                let r: Vec<usize> = (0..regions.len()).filter(|&v| regions[v] == Some(i)).collect();
                region_center(plate, &r).unwrap()
            })
            .collect();
        let cut = build_cut_graph(plate, &centers, &contours).unwrap();
        (contours, centers, cut)
    }

    fn sphere(x: f64, y: f64) -> Selector {
        Selector::Sphere {
            center: [x, y, 0.0],
            radius: 3.0,
        }
    }

    #[test]
    fn center_of_square() {
        let mesh = models::grid_square(4, 1.0);
        let all: Vec<usize> = (0..mesh.vertex_count()).collect();
        let c = region_center(&mesh, &all).unwrap();
        assert!((mesh.vertices()[c] - Point::new(0.5, 0.5, 0.0)).norm() < 1e-12);
        assert_eq!(region_center(&mesh, &[7]).unwrap(), 7);
        assert!(region_center(&mesh, &[]).is_err());
    }

    #[test]
    fn center_of_l_shape_matches_brute_force() {
        let mesh = models::grid_square(6, 6.0);
        let region: Vec<usize> = (0..mesh.vertex_count())
            .filter(|&v| {
                let p = mesh.vertices()[v];
                p.x <= 2.0 + 1e-9 || p.y <= 2.0 + 1e-9
            })
            .collect();
        // Oracle: L made of a 2x6 and a 4x2 rectangle.
        let centroid = (Point::new(1.0, 3.0, 0.0) * 12.0 + Point::new(4.0, 1.0, 0.0) * 8.0) / 20.0;
        let expected = region
            .iter()
            .copied()
            .min_by(|&a, &b| {
                (mesh.vertices()[a] - centroid)
                    .norm()
                    .total_cmp(&(mesh.vertices()[b] - centroid).norm())
                    .then(a.cmp(&b))
            })
            .unwrap();
        assert_eq!(region_center(&mesh, &region).unwrap(), expected);
    }

    #[test]
    fn one_hole_radial_cut() {
        let plate = models::holed_strip(&[true], 10.0, 2.5, 8);
        let (contours, centers, cut) = plan_cut(&plate, &[sphere(5.0, 5.0)]);
        assert_eq!(cut.paths.len(), 1);
        let geo = geodesic_field(&plate, &contours.contours[0])[centers[0]];
        let p = plate.vertices();
        let len: f64 = cut.paths[0].windows(2).map(|w| (p[w[1]] - p[w[0]]).norm()).sum();
        assert!(len >= geo * 0.95 && len <= 1.5 * geo.max(1e-12), "{len} vs {geo}");
        assert_eq!((boundary_components(&plate), brute_euler(&plate)), (2, 0));
        let cutm = cut_mesh(&plate, &cut).unwrap();
        assert_eq!((boundary_components(&cutm.surface), brute_euler(&cutm.surface)), (1, 1));
    }

    #[test]
    fn two_holes_become_one_boundary() {
        let plate = models::holed_strip(&[true, false, true], 10.0, 2.5, 8);
        let (contours, _, cut) = plan_cut(&plate, &[sphere(5.0, 5.0), sphere(25.0, 5.0)]);
        assert_eq!(cut.paths.len(), 3);
        assert!(cut.outer_leg.is_some());
        for p in cut.all_paths() {
            let unique: BTreeSet<_> = p.iter().collect();
            assert_eq!(unique.len(), p.len(), "path repeats a vertex");
        }
        // Linking paths and contours form one connected set.
        let mut touched: Vec<BTreeSet<usize>> = contours.contours.iter().map(|h| h.iter().copied().collect()).collect();
        touched.extend(cut.paths.iter().map(|p| p.iter().copied().collect()));
        let mut merged = touched.remove(0);
        while !touched.is_empty() {
            let i = touched.iter().position(|s| !s.is_disjoint(&merged)).expect("disconnected cut graph");
            merged.extend(touched.remove(i));
        }
        assert_eq!((boundary_components(&plate), brute_euler(&plate)), (3, -1));
        let cutm = cut_mesh(&plate, &cut).unwrap();
        assert_eq!((boundary_components(&cutm.surface), brute_euler(&cutm.surface)), (1, 1));
        assert_eq!(cutm.surface.face_count(), plate.face_count());
        assert!((cutm.surface.total_area() - plate.total_area()).abs() <= 1e-9 * plate.total_area());
        assert_eq!(cutm.surface.boundary_loops().len(), 1);
    }

    #[test]
    fn three_holes_chain_along_a_spanning_tree() {
        // An L of holes: the far corners link through the shared one.
        let plate = models::holed_plate(&[vec![true, true], vec![true, false]], 10.0, 2.5, 8);
        let centers_at = [sphere(5.0, 5.0), sphere(15.0, 5.0), sphere(5.0, 15.0)];
        let (contours, centers, cut) = plan_cut(&plate, &centers_at);
        assert_eq!(contours.contours.len(), 3);
        assert_eq!(cut.paths.len(), 5);
        let ends: BTreeSet<[usize; 2]> = cut
            .paths
            .iter()
            .filter(|p| p.len() > 1 && centers.contains(&p[0]) && centers.contains(p.last().unwrap()))
            .map(|p| edge_key(p[0], *p.last().unwrap()))
            .collect();
        assert_eq!(ends.len(), 2);
        let cutm = cut_mesh(&plate, &cut).unwrap();
        assert_eq!((boundary_components(&plate), brute_euler(&plate)), (4, -2));
        assert_eq!((boundary_components(&cutm.surface), brute_euler(&cutm.surface)), (1, 1));
    }

    #[test]
    fn center_on_contour_gives_single_vertex_path() {
        let plate = models::holed_strip(&[true], 10.0, 2.5, 8);
        let contours = detect_contours(&plate, &[sphere(5.0, 5.0)]);
        let c = contours.contours[0][0];
        let cut = build_cut_graph(&plate, &[c], &contours).unwrap();
        assert_eq!(cut.paths[0], vec![c]);
    }

    #[test]
    fn empty_cut_is_identity() {
        let plate = models::holed_strip(&[true], 10.0, 2.5, 8);
        let out = cut_mesh(&plate, &CutGraph::default()).unwrap();
        assert_eq!(out.surface, plate);
        assert_eq!(out.origin, (0..plate.vertex_count()).collect::<Vec<_>>());
    }

    #[test]
    fn non_edge_path_rejected() {
        let mesh = models::grid_square(4, 1.0);
        let cut = CutGraph {
            paths: vec![vec![0, 24]],
            outer_leg: None,
        };
        assert!(matches!(cut_mesh(&mesh, &cut), Err(Error::Invalid(_))));
    }
}
