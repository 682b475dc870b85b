//! Point location in a tet mesh.

use crate::mesh::{Point, TetMesh};

/// Barycentric slack for points on shared faces.
pub const INSIDE_TOLERANCE: f64 = 1e-9;

fn contains(mesh: &TetMesh, e: usize, p: &Point) -> bool {
    let Ok(grads) = mesh.basis_gradients(e) else {
        return false;
    };
    let x0 = mesh.vertices()[mesh.tets()[e][0]];
    (0..4).all(|k| grads[k].dot(&(p - x0)) + if k == 0 { 1.0 } else { 0.0 } >= -INSIDE_TOLERANCE)
}

/// Lowest-index tet containing `p`, by testing every tet.
pub fn locate_brute_force(mesh: &TetMesh, p: &Point) -> Option<usize> {
    (0..mesh.tet_count()).find(|&e| contains(mesh, e, p))
}

/// Uniform grid of tet bounding boxes.
#[derive(Clone, Debug)]
pub struct TetLocator<'a> {
    mesh: &'a TetMesh,
    lo: Point,
    cell: Point,
    dims: [usize; 3],
    /// Tets per cell, ascending.
    cells: Vec<Vec<usize>>,
}

impl<'a> TetLocator<'a> {
    pub fn new(mesh: &'a TetMesh) -> Self {
        let (lo, hi) = mesh.bounds();
        let n = mesh.tet_count().max(1) as f64;
        let extent = (hi - lo).map(|x| x.max(1e-12));
        // About two tets per cell.
        let side = (extent.x * extent.y * extent.z / (n / 2.0)).cbrt();
        let dims = [0, 1, 2].map(|k| ((extent[k] / side).ceil() as usize).clamp(1, 512));
        let cell = Point::new(
            extent.x / dims[0] as f64,
            extent.y / dims[1] as f64,
            extent.z / dims[2] as f64,
        );
        let mut cells = vec![Vec::new(); dims[0] * dims[1] * dims[2]];
        let p = mesh.vertices();
        for (e, t) in mesh.tets().iter().enumerate() {
            let mut tlo = p[t[0]];
            let mut thi = p[t[0]];
            for &v in &t[1..] {
                tlo = tlo.inf(&p[v]);
                thi = thi.sup(&p[v]);
            }
            let a = Self::index_of(lo, cell, dims, &(tlo - Point::repeat(1e-9)));
            let b = Self::index_of(lo, cell, dims, &(thi + Point::repeat(1e-9)));
            for i in a[0]..=b[0] {
                for j in a[1]..=b[1] {
                    for k in a[2]..=b[2] {
                        cells[(i * dims[1] + j) * dims[2] + k].push(e);
                    }
                }
            }
        }
        TetLocator {
            mesh,
            lo,
            cell,
            dims,
            cells,
        }
    }

    fn index_of(lo: Point, cell: Point, dims: [usize; 3], p: &Point) -> [usize; 3] {
        [0, 1, 2].map(|k| (((p[k] - lo[k]) / cell[k]).floor().max(0.0) as usize).min(dims[k] - 1))
    }

    /// Same answer as [`locate_brute_force`].
    pub fn locate(&self, p: &Point) -> Option<usize> {
        let [i, j, k] = Self::index_of(self.lo, self.cell, self.dims, p);
        self.cells[(i * self.dims[1] + j) * self.dims[2] + k]
            .iter()
            .copied()
            .find(|&e| contains(self.mesh, e, p))
    }
}
