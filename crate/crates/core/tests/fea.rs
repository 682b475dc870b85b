use std::collections::BTreeMap;

use fiberslice::models;
use fiberslice::stress::{solve_linear_elasticity, solve_with_prescribed_displacements, BoundaryCondition, Material};
use fiberslice::{Point, TetMesh};
use nalgebra::Matrix3;
use proptest::prelude::*;

fn boundary_vertices(mesh: &TetMesh) -> Vec<usize> {
    let mut v: Vec<usize> = mesh.boundary_faces().iter().flat_map(|f| f.vertices).collect();
    v.sort_unstable();
    v.dedup();
    v
}

fn hooke(strain: &Matrix3<f64>, m: &Material) -> Matrix3<f64> {
    let (e, nu) = (m.youngs_modulus, m.poisson_ratio);
    let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    let mu = e / (2.0 * (1.0 + nu));
    Matrix3::identity() * (lambda * strain.trace()) + strain * (2.0 * mu)
}

#[test]
fn patch_test_reproduces_uniform_stress() {
    let mesh = models::box_mesh([3, 4, 2], Point::new(-1.0, 0.5, 0.0), Point::new(2.0, 3.0, 1.5));
    let material = Material::default();
    let strain = Matrix3::new(2e-3, 5e-4, -3e-4, 5e-4, -1e-3, 8e-4, -3e-4, 8e-4, 1.5e-3);
    let prescribed: BTreeMap<usize, Point> = boundary_vertices(&mesh)
        .into_iter()
        .map(|v| (v, strain * mesh.vertices()[v]))
        .collect();
    let stress = solve_with_prescribed_displacements(&mesh, &material, &prescribed).unwrap();
    let expected = hooke(&strain, &material);
    let scale = expected.abs().max();
    for (e, s) in stress.iter().enumerate() {
        let err = (s.matrix() - expected).abs().max();
        assert!(err <= 1e-6 * scale, "element {e}: error {err:e}");
    }
}

fn end_faces(mesh: &TetMesh, x: f64) -> Vec<usize> {
    mesh.boundary_faces()
        .iter()
        .enumerate()
        .filter(|(_, f)| f.vertices.iter().all(|&v| (mesh.vertices()[v].x - x).abs() < 1e-9))
        .map(|(i, _)| i)
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn tractions_superpose(a in prop::array::uniform3(-5.0f64..5.0), b in prop::array::uniform3(-5.0f64..5.0)) {
        let mesh = models::bar(12.0, 3.0, 3.0, [6, 2, 2]);
        let solve = |t: Point| {
            let bc = BoundaryCondition {
                fixed_vertices: mesh.labels().fixture.clone(),
                loaded_faces: end_faces(&mesh, 12.0),
                traction: t,
                material: Material::default(),
            };
            solve_linear_elasticity(&mesh, &bc).unwrap()
        };
        let (ta, tb) = (Point::from(a), Point::from(b));
        let (sa, sb, sab) = (solve(ta), solve(tb), solve(ta + tb));
        let scale = sab.iter().chain(&sa).chain(&sb).map(|s| s.matrix().abs().max()).fold(1.0, f64::max);
        for e in 0..mesh.tet_count() {
            let diff = (sab[e].matrix() - sa[e].matrix() - sb[e].matrix()).abs().max();
            prop_assert!(diff <= 1e-7 * scale, "element {}: {:e}", e, diff);
        }
    }
}
