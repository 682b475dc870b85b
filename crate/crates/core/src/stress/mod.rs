//! Per-element stress tensors and their principal decomposition.

mod fea;
mod io;

pub use fea::{solve_linear_elasticity, solve_with_prescribed_displacements, BoundaryCondition, Material};
pub use io::{load_stress_field, parse_stress_csv, stress_csv_string, write_stress_field};

use nalgebra::{Matrix3, SymmetricEigen};

use crate::mesh::Point;

/// Symmetric Cauchy stress in MPa.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StressTensor {
    pub xx: f64,
    pub yy: f64,
    pub zz: f64,
    pub xy: f64,
    pub yz: f64,
    pub zx: f64,
}

impl StressTensor {
    pub fn new(xx: f64, yy: f64, zz: f64, xy: f64, yz: f64, zx: f64) -> Self {
        StressTensor { xx, yy, zz, xy, yz, zx }
    }

    pub fn uniaxial(direction: &Point, magnitude: f64) -> Self {
        let d = direction.normalize();
        Self::from_matrix(&(d * d.transpose() * magnitude))
    }

    /// Symmetrizes `m`.
    pub fn from_matrix(m: &Matrix3<f64>) -> Self {
        StressTensor {
            xx: m[(0, 0)],
            yy: m[(1, 1)],
            zz: m[(2, 2)],
            xy: 0.5 * (m[(0, 1)] + m[(1, 0)]),
            yz: 0.5 * (m[(1, 2)] + m[(2, 1)]),
            zx: 0.5 * (m[(2, 0)] + m[(0, 2)]),
        }
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.xx, self.xy, self.zx, //
            self.xy, self.yy, self.yz, //
            self.zx, self.yz, self.zz,
        )
    }

    pub fn components(&self) -> [f64; 6] {
        [self.xx, self.yy, self.zz, self.xy, self.yz, self.zx]
    }

    pub fn is_finite(&self) -> bool {
        self.components().iter().all(|c| c.is_finite())
    }
}

impl std::ops::Add for StressTensor {
    type Output = StressTensor;
    fn add(self, o: StressTensor) -> StressTensor {
        StressTensor::new(
            self.xx + o.xx,
            self.yy + o.yy,
            self.zz + o.zz,
            self.xy + o.xy,
            self.yz + o.yz,
            self.zx + o.zx,
        )
    }
}

/// Principal stresses sorted by decreasing magnitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrincipalStress {
    pub values: [f64; 3],
    pub directions: [Point; 3],
    /// |s1| and |s2| are tied, so d1 is not well defined.
    pub degenerate: bool,
}

impl PrincipalStress {
    pub fn max_value(&self) -> f64 {
        self.values[0]
    }

    pub fn max_direction(&self) -> Point {
        self.directions[0]
    }
}

/// Relative tie tolerance on |s1| - |s2|.
pub const TIE_TOLERANCE: f64 = 1e-3;

/// Symmetric eigendecomposition, sorted by |value| with each direction's
/// largest-magnitude coordinate made positive.
pub fn principal_decompose(t: &StressTensor) -> PrincipalStress {
    let eig = SymmetricEigen::new(t.matrix());
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .abs()
            .total_cmp(&eig.eigenvalues[a].abs())
            .then(a.cmp(&b))
    });
    let values = order.map(|k| eig.eigenvalues[k]);
    let directions = order.map(|k| canonical_sign(eig.eigenvectors.column(k).into_owned().normalize()));
    let s1 = values[0].abs();
    PrincipalStress {
        values,
        directions,
        degenerate: s1 - values[1].abs() < TIE_TOLERANCE * s1.max(1.0),
    }
}

/// Flips `d` so that its largest-magnitude coordinate is positive.
pub fn canonical_sign(d: Point) -> Point {
    let mut k = 0;
    for a in 1..3 {
        if d[a].abs() > d[k].abs() {
            k = a;
        }
    }
    if d[k] < 0.0 {
        -d
    } else {
        d
    }
}

pub fn decompose_all(tensors: &[StressTensor]) -> Vec<PrincipalStress> {
    crate::par::map_range(tensors.len(), |e| principal_decompose(&tensors[e]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Rotation3;
    use proptest::prelude::*;

    fn residual_ok(t: &StressTensor, p: &PrincipalStress) -> bool {
        let m = t.matrix();
        let tol = 1e-6 * p.values[0].abs().max(1.0);
        (0..3).all(|k| (m * p.directions[k] - p.directions[k] * p.values[k]).norm() <= tol)
    }

    #[test]
    fn diagonal_tensor() {
        let t = StressTensor::new(5.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        let p = principal_decompose(&t);
        assert!((p.values[0] - 5.0).abs() < 1e-12);
        assert!((p.directions[0] - Point::x()).norm() < 1e-12);
        assert!(!p.degenerate);
    }

    #[test]
    fn pure_shear_is_degenerate_at_45_degrees() {
        let t = StressTensor::new(0.0, 0.0, 0.0, 2.0, 0.0, 0.0);
        let p = principal_decompose(&t);
        assert!((p.values[0].abs() - 2.0).abs() < 1e-12);
        assert!((p.values[1].abs() - 2.0).abs() < 1e-12);
        assert!(p.degenerate);
        let d = p.directions[0];
        assert!(d.z.abs() < 1e-12);
        assert!((d.x.abs() - d.y.abs()).abs() < 1e-12);
        assert!(residual_ok(&t, &p));
    }

    #[test]
    fn hydrostatic() {
        let t = StressTensor::new(-3.0, -3.0, -3.0, 0.0, 0.0, 0.0);
        let p = principal_decompose(&t);
        assert!(p.degenerate);
        assert!(residual_ok(&t, &p));
    }

    #[test]
    fn compression_keeps_sign() {
        let t = StressTensor::new(-7.0, 1.0, 0.5, 0.0, 0.0, 0.0);
        let p = principal_decompose(&t);
        assert!((p.values[0] + 7.0).abs() < 1e-12);
    }

    fn tensor() -> impl Strategy<Value = StressTensor> {
        prop::array::uniform6(-100.0..100.0f64).prop_map(|c| StressTensor::new(c[0], c[1], c[2], c[3], c[4], c[5]))
    }

    proptest! {
        #[test]
        fn eigen_residual_and_orthonormality(t in tensor()) {
            let p = principal_decompose(&t);
            prop_assert!(residual_ok(&t, &p));
            for a in 0..3 {
                for b in 0..3 {
                    let expect = if a == b { 1.0 } else { 0.0 };
                    prop_assert!((p.directions[a].dot(&p.directions[b]) - expect).abs() < 1e-8);
                }
            }
            prop_assert!(p.values[0].abs() >= p.values[1].abs() && p.values[1].abs() >= p.values[2].abs());
        }

        #[test]
        fn frame_covariance(t in tensor(), axis in prop::array::uniform3(-1.0..1.0f64), angle in 0.0..std::f64::consts::TAU) {
            let axis = Point::from(axis);
            prop_assume!(axis.norm() > 1e-3);
            let r = Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle);
            let rm = r.matrix();
            let rotated = StressTensor::from_matrix(&(rm * t.matrix() * rm.transpose()));
            let p = principal_decompose(&t);
            let q = principal_decompose(&rotated);
            let scale = p.values[0].abs().max(1.0);
            prop_assume!(p.values[1].abs() - p.values[2].abs() > 1e-6 * scale);
            prop_assume!(p.values[0].abs() - p.values[1].abs() > 1e-6 * scale);
            for k in 0..3 {
                prop_assert!((p.values[k] - q.values[k]).abs() < 1e-8 * p.values[0].abs().max(1.0));
            }
            let gap = (p.values[0].abs() - p.values[1].abs()) / p.values[0].abs().max(1.0);
            prop_assume!(gap > 1e-3);
            let d = r * p.directions[0];
            prop_assert!(d.dot(&q.directions[0]).abs() > 1.0 - 1e-6);
        }
    }
}
