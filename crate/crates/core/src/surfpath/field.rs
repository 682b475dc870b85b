//! The toolpath field P on a (cut) layer.

use std::collections::BTreeSet;

use nalgebra::{Matrix3, SymmetricEigen};

use super::cut::{CutGraph, CutMesh};
use super::geodesic::geodesic_field;
use super::isocurve::Material;
use super::{CriticalContours, LayerStress};
use crate::mesh::{edge_key, Point, TriMesh, VertexField};
use crate::solver::LeastSquares;
use crate::{Error, Result};

const REGULARIZATION: f64 = 1e-9;
/// Boundary vertices whose outward direction is within about 45 degrees of
/// the sweep axis anchor the sweep.
const SIDE_COSINE: f64 = 0.7;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToolpathWeights {
    pub sf: f64,
    pub cp: f64,
    pub hf: f64,
}

impl Default for ToolpathWeights {
    fn default() -> Self {
        ToolpathWeights {
            sf: 1.0,
            cp: 1.0,
            hf: 0.5,
        }
    }
}

/// How the field's values were pinned.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Anchoring {
    /// 1 on critical contours, 0 on the outer boundary.
    Contours,
    /// 0 and 1 on opposite sides across the stress direction.
    Sweep,
    /// Normalized distance from the boundary; no solve.
    BoundaryOffset,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ToolpathField {
    /// Normalized to [0, 1].
    pub values: VertexField,
    pub anchoring: Anchoring,
    pub material: Material,
}

fn outward_directions(mesh: &TriMesh) -> Vec<Option<Point>> {
    let mut out = vec![Point::zeros(); mesh.vertex_count()];
    let p = mesh.vertices();
    for lp in mesh.boundary_loops() {
        for k in 0..lp.len() {
            let (a, b) = (lp[k], lp[(k + 1) % lp.len()]);
            let e = mesh.edge_index(a, b).expect("loop edge");
            let f = mesh.edge_faces(e).0;
            let o = (p[b] - p[a]).cross(&mesh.face_normal(f));
            out[a] += o;
            out[b] += o;
        }
    }
    out.into_iter()
        .enumerate()
        .map(|(v, o)| (mesh.is_boundary_vertex(v) && o.norm() > 0.0).then(|| o.normalize()))
        .collect()
}

fn principal_axis(m: Matrix3<f64>) -> Point {
    let eig = SymmetricEigen::new(m);
    let k = eig.eigenvalues.imax();
    eig.eigenvectors.column(k).into_owned()
}

/// Sweep axis: across the dominant stress direction within the layer, or the
/// longest extent when the stress gives none.
fn sweep_axis(mesh: &TriMesh, stress: &LayerStress, use_stress: bool) -> Point {
    if use_stress {
        let smax = stress.max_magnitude();
        let mut t = Matrix3::zeros();
        let mut normal = Point::zeros();
        for f in 0..mesh.face_count() {
            let a = mesh.face_area(f);
            normal += mesh.face_normal(f) * a;
            if !stress.degenerate[f] {
                let d = stress.direction[f];
                t += d * d.transpose() * (a * stress.magnitude[f] / smax);
            }
        }
        let s = normal.cross(&principal_axis(t));
        if s.norm() > 1e-6 * normal.norm() {
            return s.normalize();
        }
    }
    let n = mesh.vertex_count().max(1) as f64;
    let mean = mesh.vertices().iter().sum::<Point>() / n;
    let cov = mesh
        .vertices()
        .iter()
        .fold(Matrix3::zeros(), |acc, p| acc + (p - mean) * (p - mean).transpose());
    principal_axis(cov)
}

/// Low and high sweep anchors of the vertices in `members`.
fn sweep_anchors(mesh: &TriMesh, outward: &[Option<Point>], members: &[usize], axis: &Point) -> (Vec<usize>, Vec<usize>) {
    let (mut lo, mut hi) = (Vec::new(), Vec::new());
    for &v in members {
        if let Some(o) = outward[v] {
            let c = o.dot(axis);
            if c <= -SIDE_COSINE {
                lo.push(v);
            } else if c >= SIDE_COSINE {
                hi.push(v);
            }
        }
    }
    if lo.is_empty() || hi.is_empty() {
        let h = |v: usize| mesh.vertices()[v].dot(axis);
        let min = members.iter().copied().min_by(|&a, &b| h(a).total_cmp(&h(b)));
        let max = members.iter().copied().max_by(|&a, &b| h(a).total_cmp(&h(b)).then(b.cmp(&a)));
        return (min.into_iter().collect(), max.into_iter().filter(|v| Some(*v) != min).collect());
    }
    (lo, hi)
}

/// Normalized geodesic distance from the boundary; its iso-curves are
/// contour-parallel offsets.
pub fn boundary_offset_field(mesh: &TriMesh) -> Result<VertexField> {
    let boundary: Vec<usize> = (0..mesh.vertex_count()).filter(|&v| mesh.is_boundary_vertex(v)).collect();
    if boundary.is_empty() {
        return Err(Error::Invalid("surface has no boundary to offset from".into()));
    }
    let d = geodesic_field(mesh, &boundary);
    let d: Vec<f64> = d.into_iter().map(|x| if x.is_finite() { x } else { 0.0 }).collect();
    VertexField::new(d, mesh.vertex_count())?.normalized()
}

/// Solves for P on `cut.surface` (faces indexed as in the uncut layer).
pub fn solve_toolpath_field(
    cut: &CutMesh,
    stress: &LayerStress,
    graph: Option<&CutGraph>,
    contours: &CriticalContours,
    weights: &ToolpathWeights,
) -> Result<ToolpathField> {
    let w = weights;
    if [w.sf, w.cp, w.hf].iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::Invalid("toolpath weights must be finite and non-negative".into()));
    }
    let mesh = &cut.surface;
    let nv = mesh.vertex_count();
    if mesh.face_count() == 0 {
        return Err(Error::Invalid("layer has no faces".into()));
    }
    if stress.direction.len() != mesh.face_count() {
        return Err(Error::Invalid("layer stress must have one entry per face".into()));
    }
    let smax = stress.max_magnitude();
    let use_stress = w.sf > 0.0 && smax > 0.0 && stress.degenerate.iter().any(|&d| !d);

    let mut fixed: Vec<Option<f64>> = vec![None; nv];
    let anchoring = if graph.is_some() && !contours.contours.is_empty() && !contours.outer.is_empty() {
        let hole: BTreeSet<usize> = contours.contours.iter().flatten().copied().collect();
        let outer: BTreeSet<usize> = contours.outer.iter().flatten().copied().collect();
        for v in 0..nv {
            if hole.contains(&cut.origin[v]) {
                fixed[v] = Some(1.0);
            } else if outer.contains(&cut.origin[v]) {
                fixed[v] = Some(0.0);
            }
        }
        Anchoring::Contours
    } else if use_stress || mesh.boundary_loops().is_empty() {
        if mesh.boundary_loops().is_empty() {
            log::info!("closed layer: anchoring the toolpath field on a sweep");
        }
        Anchoring::Sweep
    } else {
        return Ok(ToolpathField {
            values: boundary_offset_field(mesh)?,
            anchoring: Anchoring::BoundaryOffset,
            material: Material::Matrix,
        });
    };
    // Every piece of the layer needs its own anchors; pieces the contours
    // leave free get a sweep.
    let (comp, count) = mesh.vertex_components();
    let mut members = vec![Vec::new(); count];
    for v in 0..nv {
        members[comp[v]].push(v);
    }
    let outward = outward_directions(mesh);
    let axis = sweep_axis(mesh, stress, use_stress);
    for m in &members {
        if m.iter().any(|&v| fixed[v].is_some()) {
            continue;
        }
        let (lo, hi) = sweep_anchors(mesh, &outward, m, &axis);
        for v in lo {
            fixed[v] = Some(0.0);
        }
        for v in hi {
            fixed[v] = Some(1.0);
        }
    }

    let grads: Vec<Option<[Point; 3]>> = (0..mesh.face_count()).map(|f| mesh.basis_gradients(f).ok()).collect();
    let faces = mesh.faces();
    let mut ls = LeastSquares::new(nv);
    let mut row: Vec<(usize, f64)> = Vec::with_capacity(6);
    // Each term is a mean over its support, so the weights compare terms
    // independently of mesh resolution and cut length.
    if use_stress {
        let sf_faces: Vec<usize> = (0..mesh.face_count())
            .filter(|&f| grads[f].is_some() && !stress.degenerate[f])
            .collect();
        let area: f64 = sf_faces.iter().map(|&f| mesh.face_area(f)).sum();
        for f in sf_faces {
            let (g, d) = (grads[f].unwrap(), stress.direction[f]);
            row.clear();
            row.extend((0..3).map(|k| (faces[f][k], g[k].dot(&d))));
            ls.add_row(&row, 0.0, w.sf * mesh.face_area(f) * stress.magnitude[f] / (smax * area));
        }
    }
    if let (Some(graph), true) = (graph, w.cp > 0.0) {
        let linking = graph.linking_edges();
        let p = mesh.vertices();
        let mut terms = Vec::new();
        for f in 0..mesh.face_count() {
            let Some(g) = grads[f] else { continue };
            let o = faces[f].map(|v| cut.origin[v]);
            for k in 0..3 {
                if linking.contains(&edge_key(o[k], o[(k + 1) % 3])) {
                    let l = (p[faces[f][(k + 1) % 3]] - p[faces[f][k]]).normalize();
                    terms.push((f, g.map(|gi| gi.dot(&l))));
                }
            }
        }
        let area: f64 = terms.iter().map(|&(f, _)| mesh.face_area(f)).sum();
        for (f, c) in terms {
            row.clear();
            row.extend((0..3).map(|i| (faces[f][i], c[i])));
            ls.add_row(&row, 0.0, w.cp * mesh.face_area(f) / area);
        }
    }
    if w.hf > 0.0 {
        let pairs: Vec<([Point; 3], [Point; 3], usize, usize)> = (0..mesh.edges().len())
            .filter_map(|e| match mesh.edge_faces(e) {
                (a, Some(b)) => Some((grads[a]?, grads[b]?, a, b)),
                _ => None,
            })
            .collect();
        let weight = w.hf / pairs.len().max(1) as f64;
        for (ga, gb, a, b) in pairs {
            for axis in 0..3 {
                row.clear();
                row.extend((0..3).map(|k| (faces[a][k], ga[k][axis])));
                row.extend((0..3).map(|k| (faces[b][k], -gb[k][axis])));
                ls.add_row(&row, 0.0, weight);
            }
        }
    }
    let h = mesh.average_edge_length();
    let reg = REGULARIZATION / (h * h);
    for [a, b] in mesh.edges() {
        ls.add_row(&[(*a, 1.0), (*b, -1.0)], 0.0, reg);
    }
    // Vertices on no face keep their neighbors' company through nothing; pin them.
    let mut used = vec![false; nv];
    for f in faces {
        for &v in f {
            used[v] = true;
        }
    }
    for v in 0..nv {
        match fixed[v] {
            Some(x) => ls.fix(v, x),
            None if !used[v] => ls.fix(v, 0.0),
            None => {}
        }
    }
    let raw = ls.solve()?;
    Ok(ToolpathField {
        values: VertexField::new(raw, nv)?.normalized()?,
        anchoring,
        material: Material::Fiber,
    })
}
