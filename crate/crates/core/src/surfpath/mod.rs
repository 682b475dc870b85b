//! Per-layer toolpath planning.
//!
//! On each curved layer the stress direction is projected into the surface,
//! critical boundary contours (bolt holes and the like) are found, and the
//! layer is cut open along edge paths that join every critical contour to the
//! outer boundary. A scalar field P is then solved on the cut surface; its
//! iso-curves are the fiber toolpaths, winding around the contours and
//! following the projected stress elsewhere.

mod cut;
mod field;
mod geodesic;
mod isocurve;

use crate::layerfield::CurvedLayer;
use crate::mesh::{Point, TriMesh};
use crate::stress::PrincipalStress;
use crate::{Error, Result};

pub use cut::{build_cut_graph, cut_mesh, region_center, CutGraph, CutMesh};
pub use field::{boundary_offset_field, solve_toolpath_field, Anchoring, ToolpathField, ToolpathWeights};
pub use geodesic::{
    edge_dijkstra, geodesic_field, geodesic_field_heat, voronoi_partition, voronoi_partition_by, VoronoiRule, UNREACHABLE,
};
pub use isocurve::{extract_isocurves, isocurve_segments, Material, Toolpath, Waypoint};

/// Projected magnitude below which a face has no usable in-surface direction.
pub const DEGENERATE_PROJECTION: f64 = 0.1;
/// Fiber cross-section diameter (mm).
pub const FIBER_WIDTH: f64 = 0.37;

#[derive(Clone, Debug, PartialEq)]
pub struct LayerStress {
    /// `|sigma_max|` of each face's source tet (MPa).
    pub magnitude: Vec<f64>,
    /// Unit in-surface direction, zero when the projection vanishes.
    pub direction: Vec<Point>,
    /// Length of the projected unit direction before renormalization.
    pub projection: Vec<f64>,
    pub degenerate: Vec<bool>,
}

impl LayerStress {
    pub fn max_magnitude(&self) -> f64 {
        self.magnitude.iter().copied().fold(0.0, f64::max)
    }
}

pub fn project_stress(layer: &CurvedLayer, principal: &[PrincipalStress]) -> Result<LayerStress> {
    let surface = &layer.surface;
    let source = surface
        .source_tets()
        .ok_or_else(|| Error::Invalid("layer faces carry no source tets".into()))?;
    let n = surface.face_count();
    let mut out = LayerStress {
        magnitude: Vec::with_capacity(n),
        direction: Vec::with_capacity(n),
        projection: Vec::with_capacity(n),
        degenerate: Vec::with_capacity(n),
    };
    for f in 0..n {
        let ps = principal
            .get(source[f])
            .ok_or_else(|| Error::Invalid(format!("face {f} names missing tet {}", source[f])))?;
        let d = ps.max_direction();
        let normal = surface.face_normal(f);
        let p = d - normal * normal.dot(&d);
        let len = p.norm();
        out.magnitude.push(ps.max_value().abs());
        out.projection.push(len);
        out.direction.push(if len > 0.0 { p / len } else { Point::zeros() });
        out.degenerate.push(len < DEGENERATE_PROJECTION);
    }
    Ok(out)
}

/// Model-space region marking critical contours.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Selector {
    Box { min: [f64; 3], max: [f64; 3] },
    Sphere { center: [f64; 3], radius: f64 },
}

impl Selector {
    pub fn contains(&self, p: &Point) -> bool {
        match self {
            Selector::Box { min, max } => (0..3).all(|k| p[k] >= min[k] && p[k] <= max[k]),
            Selector::Sphere { center, radius } => (p - Point::from(*center)).norm() <= *radius,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CriticalContours {
    /// Boundary loops (as stored by the layer) marked critical.
    pub contours: Vec<Vec<usize>>,
    pub outer: Vec<Vec<usize>>,
}

pub fn detect_contours(surface: &TriMesh, selectors: &[Selector]) -> CriticalContours {
    let mut out = CriticalContours::default();
    for lp in surface.boundary_loops() {
        let critical = lp
            .iter()
            .any(|&v| selectors.iter().any(|s| s.contains(&surface.vertices()[v])));
        if critical {
            out.contours.push(lp.clone());
        } else {
            out.outer.push(lp.clone());
        }
    }
    out
}

/// Settings for [`plan_layer`].
#[derive(Clone, Debug, PartialEq)]
pub struct PathParams {
    pub weights: ToolpathWeights,
    pub selectors: Vec<Selector>,
    /// Target distance between neighboring paths (mm).
    pub spacing: f64,
    /// Fixed path count, overriding `spacing`.
    pub n_paths: Option<usize>,
    pub voronoi: VoronoiRule,
}

impl Default for PathParams {
    fn default() -> Self {
        PathParams {
            weights: ToolpathWeights::default(),
            selectors: Vec::new(),
            spacing: FIBER_WIDTH,
            n_paths: None,
            voronoi: VoronoiRule::Nearest,
        }
    }
}

/// Everything computed for one layer.
#[derive(Clone, Debug)]
pub struct LayerPlan {
    pub stress: LayerStress,
    pub contours: CriticalContours,
    pub cut: Option<CutGraph>,
    pub surface: CutMesh,
    pub field: ToolpathField,
    pub toolpaths: Vec<Toolpath>,
}

/// Paths whose mean spacing is about `spacing`: the field spans [0, 1], so a
/// layer of effective width `1 / mean |grad P|` holds that width over
/// `spacing` curves.
pub fn path_count(surface: &TriMesh, p: &[f64], spacing: f64) -> usize {
    let (mut area, mut weighted) = (0.0, 0.0);
    for f in 0..surface.face_count() {
        let Ok(g) = surface.basis_gradients(f) else { continue };
        let [a, b, c] = surface.faces()[f];
        let grad = g[0] * p[a] + g[1] * p[b] + g[2] * p[c];
        let w = surface.face_area(f);
        area += w;
        weighted += w * grad.norm();
    }
    if !(weighted > 0.0) || !(spacing > 0.0) {
        return 1;
    }
    // No surface holds more curves than fit across its bounding box.
    let (lo, hi) = surface.vertices().iter().fold(
        (Point::repeat(f64::INFINITY), Point::repeat(f64::NEG_INFINITY)),
        |(lo, hi), p| (lo.inf(p), hi.sup(p)),
    );
    let cap = ((hi - lo).norm() / spacing).ceil().max(1.0);
    let width = area / weighted;
    (width / spacing).round().clamp(1.0, cap) as usize
}

/// Runs the per-layer steps: projection, contours, cut, field, iso-curves.
pub fn plan_layer(layer: &CurvedLayer, principal: &[PrincipalStress], params: &PathParams) -> Result<LayerPlan> {
    let stress = project_stress(layer, principal)?;
    let surface = &layer.surface;
    let contours = detect_contours(surface, &params.selectors);
    let cut = if contours.contours.is_empty() || contours.outer.is_empty() {
        None
    } else {
        let sources: Vec<Vec<usize>> = contours.contours.clone();
        let fields: Vec<Vec<f64>> = sources.iter().map(|s| geodesic_field(surface, s)).collect();
        let regions = voronoi_partition_by(&fields, params.voronoi);
        let centers = (0..sources.len())
            .map(|i| {
                let members: Vec<usize> = (0..regions.len()).filter(|&v| regions[v] == Some(i)).collect();
                region_center(surface, &members)
            })
            .collect::<Result<Vec<_>>>()?;
        Some(build_cut_graph(surface, &centers, &contours)?)
    };
    let cut_surface = match &cut {
        Some(c) => cut_mesh(surface, c)?,
        None => CutMesh::identity(surface.clone()),
    };
    let field = solve_toolpath_field(&cut_surface, &stress, cut.as_ref(), &contours, &params.weights)?;
    let n_paths = match params.n_paths {
        Some(n) => n.max(1),
        None => path_count(&cut_surface.surface, field.values.values(), params.spacing),
    };
    log::debug!(
        "layer {}: {} faces, {} paths",
        layer.layer_index,
        cut_surface.surface.face_count(),
        n_paths
    );
    let mut toolpaths = extract_isocurves(&cut_surface.surface, &field.values, n_paths)?;
    for t in &mut toolpaths {
        t.layer_index = layer.layer_index;
        t.material = field.material;
    }
    Ok(LayerPlan {
        stress,
        contours,
        cut,
        surface: cut_surface,
        field,
        toolpaths,
    })
}

/// Contour-parallel matrix paths on an uncut layer, numbered from
/// `first_index`.
pub fn matrix_toolpaths(layer: &CurvedLayer, spacing: f64, first_index: usize) -> Result<Vec<Toolpath>> {
    let field = boundary_offset_field(&layer.surface)?;
    let n = path_count(&layer.surface, field.values(), spacing);
    let mut paths = extract_isocurves(&layer.surface, &field, n)?;
    for (i, t) in paths.iter_mut().enumerate() {
        t.layer_index = layer.layer_index;
        t.path_index = first_index + i;
        t.material = Material::Matrix;
    }
    Ok(paths)
}
