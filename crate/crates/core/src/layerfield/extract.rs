//! Marching tetrahedra.

use std::collections::HashMap;

use crate::mesh::{edge_key, Point, TetMesh, TriMesh, VertexField};
use crate::{Error, Result};

/// Values equal to the iso-value are lifted by this much.
pub const ISO_PERTURBATION: f64 = 1e-9;
const WELD: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct CurvedLayer {
    /// Faces carry the tet they were cut from.
    pub surface: TriMesh,
    pub iso_value: f64,
    pub layer_index: usize,
}

/// `(i + 0.5) / n` for `i` in `0..n`.
pub fn iso_values(n_layers: usize) -> Vec<f64> {
    (0..n_layers).map(|i| (i as f64 + 0.5) / n_layers as f64).collect()
}

pub fn extract_isosurfaces(mesh: &TetMesh, g: &VertexField, n_layers: usize) -> Result<Vec<CurvedLayer>> {
    if n_layers == 0 {
        return Err(Error::Invalid("at least one layer is required".into()));
    }
    mesh.check_field(g)?;
    let isos = iso_values(n_layers);
    crate::par::map_range(n_layers, |i| {
        extract_isosurface(mesh, g.values(), isos[i]).map(|surface| CurvedLayer {
            surface,
            iso_value: isos[i],
            layer_index: i,
        })
    })
    .into_iter()
    .collect()
}

/// The level set `g = iso`, oriented so face normals point toward larger `g`.
pub fn extract_isosurface(mesh: &TetMesh, g: &[f64], iso: f64) -> Result<TriMesh> {
    let value = |v: usize| if g[v] == iso { g[v] + ISO_PERTURBATION } else { g[v] };
    let points = mesh.vertices();
    let mut index: HashMap<[usize; 2], usize> = HashMap::new();
    let mut verts: Vec<Point> = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();
    let mut source: Vec<usize> = Vec::new();

    let mut crossing = |a: usize, b: usize, verts: &mut Vec<Point>| -> usize {
        let [a, b] = edge_key(a, b);
        *index.entry([a, b]).or_insert_with(|| {
            let (sa, sb) = (value(a), value(b));
            let t = (iso - sa) / (sb - sa);
            verts.push(points[a] + (points[b] - points[a]) * t);
            verts.len() - 1
        })
    };

    for (e, tet) in mesh.tets().iter().enumerate() {
        let (mut above, mut below) = (Vec::with_capacity(4), Vec::with_capacity(4));
        for &v in tet {
            if value(v) > iso {
                above.push(v);
            } else {
                below.push(v);
            }
        }
        if above.is_empty() || below.is_empty() {
            continue;
        }
        let centroid = |s: &[usize]| s.iter().map(|&v| points[v]).sum::<Point>() / s.len() as f64;
        let up = centroid(&above) - centroid(&below);
        let mut emit = |tri: [usize; 3], verts: &[Point]| {
            let n = (verts[tri[1]] - verts[tri[0]]).cross(&(verts[tri[2]] - verts[tri[0]]));
            faces.push(if n.dot(&up) < 0.0 { [tri[0], tri[2], tri[1]] } else { tri });
            source.push(e);
        };
        match (above.len(), below.len()) {
            (1, 3) | (3, 1) => {
                let (apex, base) = if above.len() == 1 { (above[0], &below) } else { (below[0], &above) };
                let tri = [
                    crossing(apex, base[0], &mut verts),
                    crossing(apex, base[1], &mut verts),
                    crossing(apex, base[2], &mut verts),
                ];
                emit(tri, &verts);
            }
            _ => {
                let (a, b, c, d) = (above[0], above[1], below[0], below[1]);
                let ac = crossing(a, c, &mut verts);
                let ad = crossing(a, d, &mut verts);
                let bd = crossing(b, d, &mut verts);
                let bc = crossing(b, c, &mut verts);
                emit([ac, ad, bd], &verts);
                emit([ac, bd, bc], &verts);
            }
        }
    }
    let tol = WELD * mesh.average_edge_length();
    match weld(&verts, &faces, &source, tol) {
        Some((v, f, s)) => match TriMesh::new(v, f).and_then(|m| m.with_source_tets(s)) {
            Ok(m) => Ok(m),
            Err(_) => TriMesh::new(verts, faces)?.with_source_tets(source),
        },
        None => TriMesh::new(verts, faces)?.with_source_tets(source),
    }
}

type Welded = (Vec<Point>, Vec<[usize; 3]>, Vec<usize>);

/// Merges vertices closer than `tol` and drops the faces that collapse.
/// Returns `None` when nothing merges.
fn weld(
    verts: &[Point],
    faces: &[[usize; 3]],
    source: &[usize],
    tol: f64,
) -> Option<Welded> {
    if verts.is_empty() || !(tol > 0.0) {
        return None;
    }
    let cell = |p: &Point| {
        [
            (p.x / tol).floor() as i64,
            (p.y / tol).floor() as i64,
            (p.z / tol).floor() as i64,
        ]
    };
    let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    let mut target: Vec<usize> = (0..verts.len()).collect();
    let mut merged = false;
    for (i, p) in verts.iter().enumerate() {
        let c = cell(p);
        let mut found = None;
        'search: for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(list) = grid.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) {
                        if let Some(&j) = list.iter().find(|&&j| (verts[j] - p).norm() < tol) {
                            found = Some(j);
                            break 'search;
                        }
                    }
                }
            }
        }
        match found {
            Some(j) => {
                target[i] = j;
                merged = true;
            }
            None => grid.entry(c).or_default().push(i),
        }
    }
    if !merged {
        return None;
    }
    let mut new_index = vec![usize::MAX; verts.len()];
    let mut out_verts = Vec::new();
    for i in 0..verts.len() {
        if target[i] == i {
            new_index[i] = out_verts.len();
            out_verts.push(verts[i]);
        }
    }
    let mut out_faces = Vec::with_capacity(faces.len());
    let mut out_source = Vec::with_capacity(faces.len());
    for (f, s) in faces.iter().zip(source) {
        let t = f.map(|v| new_index[target[v]]);
        if t[0] != t[1] && t[1] != t[2] && t[0] != t[2] {
            out_faces.push(t);
            out_source.push(*s);
        }
    }
    Some((out_verts, out_faces, out_source))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;

    fn cube_layers(n: usize) -> Vec<CurvedLayer> {
        let mesh = models::unit_cube_five_tets();
        let g = VertexField::from_fn(mesh.vertices(), |p| p.z);
        extract_isosurfaces(&mesh, &g, n).unwrap()
    }

    #[test]
    fn cube_planes() {
        let layers = cube_layers(4);
        assert_eq!(layers.len(), 4);
        for (layer, z) in layers.iter().zip([0.125, 0.375, 0.625, 0.875]) {
            assert_eq!(layer.iso_value, z);
            for p in layer.surface.vertices() {
                assert!((p.z - z).abs() <= 1e-9);
            }
            assert!((layer.surface.total_area() - 1.0).abs() <= 1e-9);
            for f in 0..layer.surface.face_count() {
                assert!(layer.surface.face_normal(f).z > 0.0);
            }
            assert_eq!(layer.surface.boundary_loops().len(), 1);
        }
    }

    #[test]
    fn single_tet_quad() {
        let mesh = TetMesh::new(
            vec![Point::zeros(), Point::x(), Point::y(), Point::z()],
            vec![[0, 1, 2, 3]],
        )
        .unwrap();
        let s = extract_isosurface(&mesh, &[0.0, 0.0, 1.0, 1.0], 0.5).unwrap();
        assert_eq!(s.face_count(), 2);
        assert_eq!(s.vertex_count(), 4);
        let p = mesh.vertices();
        let mids = [(0, 2), (0, 3), (1, 2), (1, 3)].map(|(a, b)| (p[a] + p[b]) / 2.0);
        for v in s.vertices() {
            assert!(mids.iter().any(|m| (m - v).norm() < 1e-15), "{v:?}");
        }
    }

    #[test]
    fn faces_lie_on_their_source_tet() {
        let mesh = models::box_mesh([3, 2, 2], Point::zeros(), Point::new(3.0, 2.0, 2.0));
        let g = VertexField::from_fn(mesh.vertices(), |p| (p.x * 0.7 + p.y * p.y * 0.3 + p.z).sin());
        let g = g.normalized().unwrap();
        for layer in extract_isosurfaces(&mesh, &g, 7).unwrap() {
            let src = layer.surface.source_tets().unwrap();
            for (f, face) in layer.surface.faces().iter().enumerate() {
                let e = src[f];
                let grads = mesh.basis_gradients(e).unwrap();
                let x0 = mesh.vertices()[mesh.tets()[e][0]];
                for &v in face {
                    let q = layer.surface.vertices()[v];
                    let lam: Vec<f64> = (0..4)
                        .map(|k| grads[k].dot(&(q - x0)) + if k == 0 { 1.0 } else { 0.0 })
                        .collect();
                    assert!(lam.iter().all(|&l| l >= -1e-8));
                    let on_face = lam.iter().zip(&grads).any(|(l, g)| l.abs() / g.norm() <= 1e-8);
                    assert!(on_face);
                }
            }
        }
    }

    #[test]
    fn iso_through_vertices_is_perturbed() {
        // The middle vertex plane sits exactly on the iso-value.
        let mesh = models::box_mesh([2, 2, 2], Point::zeros(), Point::new(1.0, 1.0, 1.0));
        let g = VertexField::from_fn(mesh.vertices(), |p| p.z);
        let s = extract_isosurface(&mesh, g.values(), 0.5).unwrap();
        assert!(s.face_count() > 0);
        for p in s.vertices() {
            assert!((p.z - 0.5).abs() <= 1e-8);
        }
        assert!((s.total_area() - 1.0).abs() <= 1e-6);
        assert_eq!(s.boundary_loops().len(), 1);
        assert_eq!(s.euler_characteristic(), 1);
    }

    #[test]
    fn layer_count_matches_request() {
        let mesh = models::box_mesh([4, 4, 4], Point::zeros(), Point::new(1.0, 1.0, 1.0));
        let g = VertexField::from_fn(mesh.vertices(), |p| p.x + p.y * 0.5 + p.z * 0.25)
            .normalized()
            .unwrap();
        for n in [1, 3, 10, 17] {
            let layers = extract_isosurfaces(&mesh, &g, n).unwrap();
            assert_eq!(layers.len(), n);
            assert!(layers.iter().all(|l| l.surface.face_count() > 0));
        }
        assert!(extract_isosurfaces(&mesh, &g, 0).is_err());
    }

    #[test]
    fn gauge_shift_is_invisible() {
        let mesh = models::box_mesh([3, 3, 3], Point::zeros(), Point::new(1.0, 1.0, 1.0));
        let raw: Vec<f64> = mesh.vertices().iter().map(|p| p.x * 0.3 + p.z + (p.y * 3.0).sin() * 0.1).collect();
        let a = VertexField::new(raw.clone(), raw.len()).unwrap().normalized().unwrap();
        let shifted: Vec<f64> = raw.iter().map(|v| v + 17.25).collect();
        let b = VertexField::new(shifted, raw.len()).unwrap().normalized().unwrap();
        assert_eq!(extract_isosurfaces(&mesh, &a, 5).unwrap(), extract_isosurfaces(&mesh, &b, 5).unwrap());
    }
}
