//! Linear elasticity on constant-strain tetrahedra.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{SMatrix, SVector};

use super::StressTensor;
use crate::mesh::{Point, TetMesh};
use crate::solver::SymmetricBuilder;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Material {
    /// Young's modulus (MPa).
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
}

impl Default for Material {
    /// Typical PLA.
    fn default() -> Self {
        Material {
            youngs_modulus: 3500.0,
            poisson_ratio: 0.36,
        }
    }
}

impl Material {
    fn elasticity(&self) -> SMatrix<f64, 6, 6> {
        let (e, nu) = (self.youngs_modulus, self.poisson_ratio);
        let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
        let mu = e / (2.0 * (1.0 + nu));
        let mut d = SMatrix::<f64, 6, 6>::zeros();
        for i in 0..3 {
            for j in 0..3 {
                d[(i, j)] = lambda;
            }
            d[(i, i)] += 2.0 * mu;
            d[(i + 3, i + 3)] = mu;
        }
        d
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryCondition {
    /// Vertices with displacement pinned to zero.
    pub fixed_vertices: BTreeSet<usize>,
    /// Boundary face indices carrying `traction`.
    pub loaded_faces: Vec<usize>,
    /// Traction vector (MPa).
    pub traction: Point,
    pub material: Material,
}

impl BoundaryCondition {
    pub fn validate(&self, mesh: &TetMesh) -> Result<()> {
        let m = &self.material;
        if !(m.youngs_modulus > 0.0) {
            return Err(Error::Invalid("Young's modulus must be positive".into()));
        }
        if !(0.0..0.5).contains(&m.poisson_ratio) {
            return Err(Error::Invalid("Poisson ratio must lie in [0, 0.5)".into()));
        }
        if let Some(&v) = self.fixed_vertices.iter().find(|&&v| v >= mesh.vertex_count()) {
            return Err(Error::Invalid(format!("fixed vertex {v} does not exist")));
        }
        if let Some(&f) = self.loaded_faces.iter().find(|&&f| f >= mesh.boundary_faces().len()) {
            return Err(Error::Invalid(format!("loaded face {f} is not a boundary face")));
        }
        if !self.traction.iter().all(|c| c.is_finite()) {
            return Err(Error::Invalid("traction must be finite".into()));
        }
        Ok(())
    }
}

type StrainOperator = SMatrix<f64, 6, 12>;

fn strain_operator(grads: &[Point; 4]) -> StrainOperator {
    let mut b = StrainOperator::zeros();
    for (k, g) in grads.iter().enumerate() {
        let c = 3 * k;
        b[(0, c)] = g.x;
        b[(1, c + 1)] = g.y;
        b[(2, c + 2)] = g.z;
        // engineering shear: xy, yz, zx
        b[(3, c)] = g.y;
        b[(3, c + 1)] = g.x;
        b[(4, c + 1)] = g.z;
        b[(4, c + 2)] = g.y;
        b[(5, c)] = g.z;
        b[(5, c + 2)] = g.x;
    }
    b
}

/// Rigid-body modes left free by the fixed vertices, summed over connected
/// components.
fn free_rigid_modes(mesh: &TetMesh, fixed: &BTreeSet<usize>) -> usize {
    let (comp, count) = mesh.vertex_components();
    let used: BTreeSet<usize> = mesh.tets().iter().flatten().copied().collect();
    let mut modes = 0;
    for c in 0..count {
        if !used.iter().any(|&v| comp[v] == c) {
            continue;
        }
        let pts: Vec<Point> = fixed
            .iter()
            .filter(|&&v| comp[v] == c)
            .map(|&v| mesh.vertices()[v])
            .collect();
        modes += match pts.len() {
            0 => 6,
            1 => 3,
            _ => {
                let scale = (pts[1] - pts[0]).norm().max(1.0);
                let dir = (pts[1] - pts[0]).normalize();
                let collinear = pts.iter().all(|p| (p - pts[0]).cross(&dir).norm() <= 1e-9 * scale);
                usize::from(collinear)
            }
        };
    }
    modes
}

/// Solves for displacements under `bc` and returns one stress tensor per tet.
pub fn solve_linear_elasticity(mesh: &TetMesh, bc: &BoundaryCondition) -> Result<Vec<StressTensor>> {
    bc.validate(mesh)?;
    let modes = free_rigid_modes(mesh, &bc.fixed_vertices);
    if modes > 0 {
        return Err(Error::SingularStiffness { modes });
    }
    let mut forces = vec![Point::zeros(); mesh.vertex_count()];
    for &f in &bc.loaded_faces {
        let [a, b, c] = mesh.boundary_faces()[f].vertices;
        let p = mesh.vertices();
        let area = 0.5 * (p[b] - p[a]).cross(&(p[c] - p[a])).norm();
        for v in [a, b, c] {
            forces[v] += bc.traction * (area / 3.0);
        }
    }
    let prescribed: BTreeMap<usize, Point> = bc.fixed_vertices.iter().map(|&v| (v, Point::zeros())).collect();
    solve_elasticity(mesh, &bc.material, &prescribed, &forces)
}

/// Displacement-driven variant: vertices in `prescribed` take the given
/// displacement, all others are traction free.
pub fn solve_with_prescribed_displacements(
    mesh: &TetMesh,
    material: &Material,
    prescribed: &BTreeMap<usize, Point>,
) -> Result<Vec<StressTensor>> {
    let fixed: BTreeSet<usize> = prescribed.keys().copied().collect();
    let modes = free_rigid_modes(mesh, &fixed);
    if modes > 0 {
        return Err(Error::SingularStiffness { modes });
    }
    solve_elasticity(mesh, material, prescribed, &vec![Point::zeros(); mesh.vertex_count()])
}

fn solve_elasticity(
    mesh: &TetMesh,
    material: &Material,
    prescribed: &BTreeMap<usize, Point>,
    forces: &[Point],
) -> Result<Vec<StressTensor>> {
    let n = mesh.vertex_count();
    let mut dof = vec![usize::MAX; 3 * n];
    let mut free = 0;
    for v in 0..n {
        if !prescribed.contains_key(&v) {
            for a in 0..3 {
                dof[3 * v + a] = free;
                free += 1;
            }
        }
    }
    let given = |v: usize, a: usize| prescribed.get(&v).map_or(0.0, |u| u[a]);

    let d = material.elasticity();
    let operators: Vec<Result<(StrainOperator, f64)>> = crate::par::map_range(mesh.tet_count(), |e| {
        let grads = mesh.basis_gradients(e)?;
        Ok((strain_operator(&grads), mesh.signed_volume(e)))
    });
    let mut stiffness = SymmetricBuilder::new(free);
    let mut load = vec![0.0; free];
    for v in 0..n {
        for a in 0..3 {
            if dof[3 * v + a] != usize::MAX {
                load[dof[3 * v + a]] += forces[v][a];
            }
        }
    }
    for (e, op) in operators.iter().enumerate() {
        let (b, volume) = op.as_ref().map_err(|err| Error::Invalid(err.to_string()))?;
        let ke = b.transpose() * d * b * *volume;
        let t = mesh.tets()[e];
        for i in 0..12 {
            let gi = dof[3 * t[i / 3] + i % 3];
            if gi == usize::MAX {
                continue;
            }
            for j in 0..12 {
                let gj = dof[3 * t[j / 3] + j % 3];
                if gj == usize::MAX {
                    load[gi] -= ke[(i, j)] * given(t[j / 3], j % 3);
                } else if j <= i {
                    stiffness.add(gi, gj, ke[(i, j)]);
                }
            }
        }
    }
    let stiffness = stiffness.build();
    let u = stiffness.solve(&load)?;
    let displacement = |v: usize, a: usize| {
        let g = dof[3 * v + a];
        if g == usize::MAX {
            given(v, a)
        } else {
            u[g]
        }
    };
    Ok(operators
        .iter()
        .enumerate()
        .map(|(e, op)| {
            let (b, _) = op.as_ref().expect("checked above");
            let t = mesh.tets()[e];
            let ue = SVector::<f64, 12>::from_fn(|i, _| displacement(t[i / 3], i % 3));
            let s = d * (b * ue);
            StressTensor::new(s[0], s[1], s[2], s[3], s[4], s[5])
        })
        .collect())
}
