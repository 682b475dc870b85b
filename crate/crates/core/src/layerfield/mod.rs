//! The guidance field G and the curved layers cut from it.
//!
//! G minimizes a weighted sum of three quadratic energies over per-vertex
//! values:
//!
//! * stress following: `sum_e N(e) (grad G(e) . d(e))^2` over elements crossed
//!   by selected stress lines, so layers contain the principal direction;
//! * gradient compatibility: `sum_faces |grad G(e_i) - grad G(e_j)|^2`, which
//!   keeps layer spacing even;
//! * continuity protection: `sum_v (m G(v) - sum_k G(v_k))^2` over each
//!   protected vertex region of size m, which keeps a region inside one layer.
//!
//! Two vertex sets pinned to 0 and 1 fix the gauge.

mod extract;
mod thickness;

use std::collections::BTreeSet;

use crate::mesh::{Point, TetMesh, VertexField};
use crate::psl::PslWeights;
use crate::solver::LeastSquares;
use crate::stress::PrincipalStress;
use crate::{Error, Result};

pub use extract::{extract_isosurface, extract_isosurfaces, iso_values, CurvedLayer};
pub use thickness::{measure_layer_thickness, TriangleTree};
pub(crate) use thickness::closest_on_segment;

/// Rings added around each labeled region to form its protected region.
pub const ROI_RING: usize = 4;
const REGULARIZATION: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LayerWeights {
    pub sf: f64,
    pub cg: f64,
    pub cp: f64,
}

impl Default for LayerWeights {
    fn default() -> Self {
        LayerWeights {
            sf: 1.0,
            cg: 0.5,
            cp: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerFieldProblem {
    pub weights: LayerWeights,
    pub roi_regions: Vec<BTreeSet<usize>>,
    /// Vertices pinned to 0 and to 1.
    pub anchors: [BTreeSet<usize>; 2],
}

impl LayerFieldProblem {
    /// Anchors at the lowest and highest vertices along `build_direction`
    /// (grown by `anchor_ring` rings); protected regions from the mesh's ROI
    /// labels.
    pub fn new(mesh: &TetMesh, build_direction: Point, weights: LayerWeights, anchor_ring: usize) -> Result<Self> {
        let n = build_direction.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Invalid("build direction must be a non-zero vector".into()));
        }
        let d = build_direction / n;
        let heights: Vec<f64> = mesh.vertices().iter().map(|p| p.dot(&d)).collect();
        let lo = heights.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = heights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let tol = 1e-6 * (hi - lo).max(1e-12);
        let bottom: Vec<usize> = (0..heights.len()).filter(|&v| heights[v] <= lo + tol).collect();
        let top: Vec<usize> = (0..heights.len()).filter(|&v| heights[v] >= hi - tol).collect();
        let problem = LayerFieldProblem {
            weights,
            roi_regions: mesh.labels().roi.iter().map(|r| mesh.k_ring(r, ROI_RING)).collect(),
            anchors: [mesh.k_ring(&bottom, anchor_ring), mesh.k_ring(&top, anchor_ring)],
        };
        problem.validate(mesh)?;
        Ok(problem)
    }

    /// Regrows the protected regions by `ring` rings instead of [`ROI_RING`].
    pub fn with_roi_ring(mut self, mesh: &TetMesh, ring: usize) -> Self {
        self.roi_regions = mesh.labels().roi.iter().map(|r| mesh.k_ring(r, ring)).collect();
        self
    }

    pub fn validate(&self, mesh: &TetMesh) -> Result<()> {
        let w = &self.weights;
        if [w.sf, w.cg, w.cp].iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::Invalid("layer weights must be finite and non-negative".into()));
        }
        let [a, b] = &self.anchors;
        if a.is_empty() || b.is_empty() {
            return Err(Error::Invalid("both anchor sets must be non-empty".into()));
        }
        if let Some(v) = a.intersection(b).next() {
            return Err(Error::Invalid(format!("vertex {v} is in both anchor sets")));
        }
        let n = mesh.vertex_count();
        for set in self.anchors.iter().chain(&self.roi_regions) {
            if let Some(v) = set.iter().find(|&&v| v >= n) {
                return Err(Error::Invalid(format!("vertex {v} does not exist")));
            }
        }
        Ok(())
    }
}

/// Unweighted energies of a field (element weights N(e) included).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LayerEnergies {
    pub sf: f64,
    pub cg: f64,
    pub cp: f64,
}

#[derive(Clone, Debug)]
pub struct GuidanceSolution {
    /// Normalized to [0, 1].
    pub field: VertexField,
    /// Solution with anchors at exactly 0 and 1, before normalization.
    pub raw: Vec<f64>,
    pub energies: LayerEnergies,
}

pub fn solve_guidance_field(
    mesh: &TetMesh,
    principal: &[PrincipalStress],
    weights: &PslWeights,
    problem: &LayerFieldProblem,
) -> Result<VertexField> {
    Ok(solve_guidance_detailed(mesh, principal, weights, problem)?.field)
}

fn all_gradients(mesh: &TetMesh) -> Result<Vec<[Point; 4]>> {
    crate::par::map_range(mesh.tet_count(), |e| mesh.basis_gradients(e))
        .into_iter()
        .collect()
}

pub fn solve_guidance_detailed(
    mesh: &TetMesh,
    principal: &[PrincipalStress],
    weights: &PslWeights,
    problem: &LayerFieldProblem,
) -> Result<GuidanceSolution> {
    problem.validate(mesh)?;
    if principal.len() != mesh.tet_count() || weights.n_psl.len() != mesh.tet_count() {
        return Err(Error::Invalid("stress and weight arrays must have one entry per tet".into()));
    }
    let w = problem.weights;
    let stressed = w.sf > 0.0 && weights.n_psl.iter().any(|&n| n > 0);
    if !stressed && w.cg == 0.0 {
        return Err(Error::Invalid(
            "objective is vacuous: no weighted element and zero gradient-compatibility weight".into(),
        ));
    }
    check_anchored_components(mesh, problem)?;
    let grads = all_gradients(mesh)?;
    let nv = mesh.vertex_count();
    let use_cp = w.cp > 0.0 && !problem.roi_regions.is_empty();
    let n = nv + if use_cp { problem.roi_regions.len() } else { 0 };
    let mut ls = LeastSquares::new(n);
    let tets = mesh.tets();
    let mut row: Vec<(usize, f64)> = Vec::with_capacity(8);

    if w.sf > 0.0 {
        for (e, &count) in weights.n_psl.iter().enumerate() {
            if count == 0 {
                continue;
            }
            let d = principal[e].max_direction();
            row.clear();
            row.extend((0..4).map(|k| (tets[e][k], grads[e][k].dot(&d))));
            ls.add_row(&row, 0.0, w.sf * f64::from(count));
        }
    }
    if w.cg > 0.0 {
        for face in mesh.interior_faces() {
            let [a, b] = face.tets;
            for axis in 0..3 {
                row.clear();
                row.extend((0..4).map(|k| (tets[a][k], grads[a][k][axis])));
                row.extend((0..4).map(|k| (tets[b][k], -grads[b][k][axis])));
                ls.add_row(&row, 0.0, w.cg);
            }
        }
    }
    if use_cp {
        for (r, region) in problem.roi_regions.iter().enumerate() {
            let m = region.len() as f64;
            let mean = nv + r;
            for &v in region {
                ls.add_row(&[(v, m), (mean, -m)], 0.0, w.cp);
            }
        }
    }

    let mut used = vec![false; nv];
    for t in tets {
        for &v in t {
            used[v] = true;
        }
    }
    for v in 0..nv {
        if !used[v] {
            ls.fix(v, 0.5);
        }
    }
    for &v in &problem.anchors[0] {
        ls.fix(v, 0.0);
    }
    for &v in &problem.anchors[1] {
        ls.fix(v, 1.0);
    }
    // A faint edge smoothness term picks one minimizer when the energies alone
    // leave directions free (e.g. stress following with nothing else).
    let h = mesh.average_edge_length();
    let reg = REGULARIZATION / (h * h);
    for v in 0..nv {
        for &u in mesh.vertex_neighbors(v) {
            if u > v {
                ls.add_row(&[(v, 1.0), (u, -1.0)], 0.0, reg);
            }
        }
    }

    let raw = ls.solve()?;
    let raw = raw[..nv].to_vec();
    let energies = layer_energies_with(mesh, &grads, principal, weights, problem, &raw);
    let field = VertexField::new(raw.clone(), nv)?.normalized()?;
    Ok(GuidanceSolution { field, raw, energies })
}

fn check_anchored_components(mesh: &TetMesh, problem: &LayerFieldProblem) -> Result<()> {
    let (comp, count) = mesh.vertex_components();
    let mut has_tet = vec![false; count];
    for t in mesh.tets() {
        has_tet[comp[t[0]]] = true;
    }
    let mut anchored = vec![false; count];
    for &v in problem.anchors.iter().flatten() {
        anchored[comp[v]] = true;
    }
    if let Some(c) = (0..count).find(|&c| has_tet[c] && !anchored[c]) {
        let v = comp.iter().position(|&x| x == c).unwrap();
        return Err(Error::Singular(format!(
            "mesh component {c} (containing vertex {v}) has no anchor vertex"
        )));
    }
    Ok(())
}

/// Energies of an arbitrary per-vertex field under `problem`'s regions.
pub fn layer_energies(
    mesh: &TetMesh,
    principal: &[PrincipalStress],
    weights: &PslWeights,
    problem: &LayerFieldProblem,
    g: &[f64],
) -> Result<LayerEnergies> {
    let grads = all_gradients(mesh)?;
    Ok(layer_energies_with(mesh, &grads, principal, weights, problem, g))
}

fn layer_energies_with(
    mesh: &TetMesh,
    grads: &[[Point; 4]],
    principal: &[PrincipalStress],
    weights: &PslWeights,
    problem: &LayerFieldProblem,
    g: &[f64],
) -> LayerEnergies {
    let tets = mesh.tets();
    let gradient = |e: usize| -> Point { (0..4).map(|k| grads[e][k] * g[tets[e][k]]).sum() };
    let sf = (0..mesh.tet_count())
        .filter(|&e| weights.n_psl[e] > 0)
        .map(|e| f64::from(weights.n_psl[e]) * gradient(e).dot(&principal[e].max_direction()).powi(2))
        .sum();
    let cg = mesh
        .interior_faces()
        .iter()
        .map(|f| (gradient(f.tets[0]) - gradient(f.tets[1])).norm_squared())
        .sum();
    let cp = problem
        .roi_regions
        .iter()
        .map(|region| {
            let m = region.len() as f64;
            let total: f64 = region.iter().map(|&v| g[v]).sum();
            region.iter().map(|&v| (m * g[v] - total).powi(2)).sum::<f64>()
        })
        .sum();
    LayerEnergies { sf, cg, cp }
}
