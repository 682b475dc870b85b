//! Browser bindings: toolpaths, geodesic distances and matrix offsets on a
//! flat plate with bolt holes.
//!
//! Every operation returns a [`Plot`] holding the plate triangles, a scalar
//! per vertex for shading, and polylines packed as `[n, x0, y0, ..., xn-1,
//! yn-1]` records.

use fiberslice::layerfield::CurvedLayer;
use fiberslice::metrics::{continuity_report, LayerContours};
use fiberslice::models;
use fiberslice::stress::{decompose_all, StressTensor};
use fiberslice::surfpath::{
    self, geodesic_field, matrix_toolpaths, plan_layer, PathParams, Selector, Toolpath, ToolpathWeights, VoronoiRule,
};
use fiberslice::{Point, TriMesh};
use wasm_bindgen::prelude::*;

pub const CELL: f64 = 10.0;
const RADIUS: f64 = 2.5;
const DIVISIONS: usize = 8;

/// Rows of `0`/`1` separated by `/`; `1` cells carry a hole. The first row
/// is at the bottom.
pub fn parse_pattern(pattern: &str) -> Result<Vec<Vec<bool>>, String> {
    let rows: Vec<Vec<bool>> = pattern
        .split('/')
        .map(|row| {
            row.trim()
                .chars()
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    _ => Err(format!("pattern may only hold 0, 1 and /, found `{c}`")),
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let width = rows[0].len();
    if width == 0 || rows.iter().any(|r| r.len() != width) {
        return Err("pattern rows must be non-empty and equally long".into());
    }
    if rows.len() * width > 64 {
        return Err("at most 64 cells".into());
    }
    Ok(rows)
}

fn plate(pattern: &[Vec<bool>]) -> CurvedLayer {
    let surface = models::holed_plate(pattern, CELL, RADIUS, DIVISIONS);
    let n = surface.face_count();
    CurvedLayer {
        surface: surface.with_source_tets(vec![0; n]).expect("one source per face"),
        iso_value: 0.5,
        layer_index: 0,
    }
}

fn hole_selectors(pattern: &[Vec<bool>]) -> Vec<Selector> {
    let mut out = Vec::new();
    for (r, row) in pattern.iter().enumerate() {
        for (c, &hole) in row.iter().enumerate() {
            if hole {
                out.push(Selector::Sphere {
                    center: [(c as f64 + 0.5) * CELL, (r as f64 + 0.5) * CELL, 0.0],
                    radius: RADIUS + 0.1 * CELL,
                });
            }
        }
    }
    out
}

#[wasm_bindgen]
#[derive(Clone, Debug, Default)]
pub struct Plot {
    vertices: Vec<f64>,
    triangles: Vec<u32>,
    values: Vec<f64>,
    paths: Vec<f64>,
    cuts: Vec<f64>,
    summary: String,
}

#[wasm_bindgen]
impl Plot {
    /// `x, y` per vertex.
    pub fn vertices(&self) -> Vec<f64> {
        self.vertices.clone()
    }

    pub fn triangles(&self) -> Vec<u32> {
        self.triangles.clone()
    }

    /// Per-vertex scalar in [0, 1].
    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }

    pub fn paths(&self) -> Vec<f64> {
        self.paths.clone()
    }

    pub fn cuts(&self) -> Vec<f64> {
        self.cuts.clone()
    }

    pub fn summary(&self) -> String {
        self.summary.clone()
    }
}

impl Plot {
    fn of(mesh: &TriMesh, values: &[f64]) -> Plot {
        Plot {
            vertices: mesh.vertices().iter().flat_map(|p| [p.x, p.y]).collect(),
            triangles: mesh.faces().iter().flatten().map(|&v| v as u32).collect(),
            values: values.to_vec(),
            ..Plot::default()
        }
    }

    pub fn path_count(&self) -> usize {
        unpack(&self.paths).len()
    }

    pub fn cut_count(&self) -> usize {
        unpack(&self.cuts).len()
    }

    pub fn summary_text(&self) -> &str {
        &self.summary
    }

    pub fn values_slice(&self) -> &[f64] {
        &self.values
    }
}

fn pack(polylines: impl IntoIterator<Item = Vec<Point>>) -> Vec<f64> {
    let mut out = Vec::new();
    for line in polylines {
        out.push(line.len() as f64);
        out.extend(line.iter().flat_map(|p| [p.x, p.y]));
    }
    out
}

/// Inverse of the packing used by [`Plot::paths`].
pub fn unpack(packed: &[f64]) -> Vec<Vec<[f64; 2]>> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < packed.len() {
        let n = packed[i] as usize;
        out.push((0..n).map(|k| [packed[i + 1 + 2 * k], packed[i + 2 + 2 * k]]).collect());
        i += 1 + 2 * n;
    }
    out
}

fn closed_polyline(t: &Toolpath) -> Vec<Point> {
    let mut pts: Vec<Point> = t.waypoints.iter().map(|w| w.position).collect();
    if t.closed {
        pts.push(pts[0]);
    }
    pts
}

/// Fiber toolpaths for uniaxial in-plane stress at `angle_deg`, with every
/// hole treated as a critical contour.
pub fn plan_plate(
    pattern: &str,
    angle_deg: f64,
    weights: ToolpathWeights,
    spacing: f64,
    farthest: bool,
) -> Result<Plot, String> {
    if spacing.is_nan() || spacing < 0.1 {
        return Err("spacing must be at least 0.1 mm".into());
    }
    let pattern = parse_pattern(pattern)?;
    let layer = plate(&pattern);
    let a = angle_deg.to_radians();
    let principal = decompose_all(&[StressTensor::uniaxial(&Point::new(a.cos(), a.sin(), 0.0), 1.0)]);
    let params = PathParams {
        weights,
        selectors: hole_selectors(&pattern),
        spacing,
        n_paths: None,
        voronoi: if farthest { VoronoiRule::Farthest } else { VoronoiRule::Nearest },
    };
    let plan = plan_layer(&layer, &principal, &params).map_err(|e| e.to_string())?;
    let s = &layer.surface;
    // Values live on the cut copy; show each original vertex's first copy.
    let mut values = vec![0.0; s.vertex_count()];
    for (v, &o) in plan.surface.origin.iter().enumerate().rev() {
        values[o] = plan.field.values.values()[v];
    }
    let mut plot = Plot::of(s, &values);
    plot.paths = pack(plan.toolpaths.iter().map(closed_polyline));
    if let Some(cut) = &plan.cut {
        plot.cuts = pack(cut.all_paths().map(|p| p.iter().map(|&v| s.vertices()[v]).collect()));
    }
    let contours = LayerContours {
        layer_index: 0,
        contours: plan
            .contours
            .contours
            .iter()
            .map(|h| h.iter().map(|&v| s.vertices()[v]).collect())
            .collect(),
        edge_length: s.average_edge_length(),
    };
    let report = continuity_report(&plan.toolpaths, &[contours]);
    let layer_report = &report.layers[0];
    plot.summary = format!(
        "{} paths, {} holes, {} sharp turns, {}",
        plan.toolpaths.len(),
        layer_report.contours,
        layer_report.sharp_turns,
        if layer_report.all_contours_visited {
            "one path visits every hole"
        } else {
            "no single path visits every hole"
        }
    );
    Ok(plot)
}

/// Geodesic distance from the vertex nearest `(x, y)`, scaled to [0, 1].
pub fn plate_geodesic(pattern: &str, x: f64, y: f64) -> Result<Plot, String> {
    let pattern = parse_pattern(pattern)?;
    let s = plate(&pattern).surface;
    let target = Point::new(x, y, 0.0);
    let source = (0..s.vertex_count())
        .min_by(|&a, &b| (s.vertices()[a] - target).norm().total_cmp(&(s.vertices()[b] - target).norm()))
        .ok_or("empty plate")?;
    let d = geodesic_field(&s, &[source]);
    let max = d.iter().copied().filter(|x| x.is_finite()).fold(0.0, f64::max);
    let values: Vec<f64> = d.iter().map(|&x| if max > 0.0 { x / max } else { 0.0 }).collect();
    let mut plot = Plot::of(&s, &values);
    let p = s.vertices()[source];
    plot.summary = format!(
        "source ({:.2}, {:.2}), farthest point {max:.2} mm away (straight-line bound {:.2} mm)",
        p.x,
        p.y,
        s.vertices().iter().map(|q| (q - p).norm()).fold(0.0, f64::max)
    );
    Ok(plot)
}

/// Contour-parallel matrix paths offset from every boundary.
pub fn plate_offsets(pattern: &str, spacing: f64) -> Result<Plot, String> {
    if spacing.is_nan() || spacing < 0.1 {
        return Err("spacing must be at least 0.1 mm".into());
    }
    let pattern = parse_pattern(pattern)?;
    let layer = plate(&pattern);
    let field = surfpath::boundary_offset_field(&layer.surface).map_err(|e| e.to_string())?;
    let paths = matrix_toolpaths(&layer, spacing, 0).map_err(|e| e.to_string())?;
    let mut plot = Plot::of(&layer.surface, field.values());
    plot.paths = pack(paths.iter().map(closed_polyline));
    plot.summary = format!("{} offset loops", paths.len());
    Ok(plot)
}

#[wasm_bindgen(js_name = planPlate)]
#[allow(clippy::too_many_arguments)]
pub fn plan_plate_js(
    pattern: &str,
    angle_deg: f64,
    sf: f64,
    cp: f64,
    hf: f64,
    spacing: f64,
    farthest: bool,
) -> Result<Plot, JsError> {
    plan_plate(pattern, angle_deg, ToolpathWeights { sf, cp, hf }, spacing, farthest).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = plateGeodesic)]
pub fn plate_geodesic_js(pattern: &str, x: f64, y: f64) -> Result<Plot, JsError> {
    plate_geodesic(pattern, x, y).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = plateOffsets)]
pub fn plate_offsets_js(pattern: &str, spacing: f64) -> Result<Plot, JsError> {
    plate_offsets(pattern, spacing).map_err(|e| JsError::new(&e))
}
