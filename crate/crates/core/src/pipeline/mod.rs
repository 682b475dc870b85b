//! End-to-end runs from a [`PipelineConfig`], one artifact set per stage.
//!
//! Every stage reads what earlier stages wrote into the output directory, so
//! any stage can be rerun on its own:
//!
//! | stage   | writes |
//! |---------|--------|
//! | stress  | `stress.csv` |
//! | psl     | `psl_lines.txt`, `psl_weights.csv` |
//! | slice   | `guidance.csv`, `layers.csv`, `layers/layer_NNNN.obj` |
//! | paths   | `waypoints.csv` |
//! | metrics | `reports/*.toml`, `reports/alignment_histogram.csv` |
//!
//! [`run`] executes all of them and adds `manifest.toml`.

mod config;
mod export;
mod generate;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

pub use config::{
    BcConfig, LayersConfig, MeshConfig, MetricsConfig, PipelineConfig, PslConfig, Region, RegionsConfig, RunConfig,
    StressConfig, ToolpathConfig,
};
pub use export::{
    guidance_csv_string, layers_csv_string, load_waypoints, parse_guidance_csv, parse_waypoints_csv,
    waypoints_csv_string, write_waypoints, GUIDANCE_HEADER, LAYER_HEADER, WAYPOINT_HEADER,
};
pub use generate::{generate, Model};

use crate::layerfield::{extract_isosurfaces, solve_guidance_field, CurvedLayer, LayerFieldProblem};
use crate::mesh::io::{load_tet_mesh, obj_string};
use crate::mesh::{Point, TetMesh, VertexField};
use crate::metrics::{alignment_stats, continuity_report, thickness_stats, LayerContours};
use crate::psl::{
    count_psl_weights, parse_weights_csv, psl_dump_string, select_psls, trace_all, weights_csv_string, PslWeights,
};
use crate::stress::{
    decompose_all, load_stress_field, solve_linear_elasticity, stress_csv_string, BoundaryCondition, Material,
    PrincipalStress, StressTensor,
};
use crate::surfpath::{detect_contours, matrix_toolpaths, plan_layer, PathParams, Toolpath};
use crate::{Error, Result};

pub const STRESS_FILE: &str = "stress.csv";
pub const PSL_FILE: &str = "psl_lines.txt";
pub const WEIGHTS_FILE: &str = "psl_weights.csv";
pub const GUIDANCE_FILE: &str = "guidance.csv";
pub const LAYERS_DIR: &str = "layers";
pub const LAYERS_FILE: &str = "layers.csv";
pub const WAYPOINTS_FILE: &str = "waypoints.csv";
pub const REPORTS_DIR: &str = "reports";
pub const MANIFEST_FILE: &str = "manifest.toml";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Stress,
    Psl,
    Slice,
    Paths,
    Metrics,
}

impl Stage {
    pub const ALL: [Stage; 5] = [Stage::Stress, Stage::Psl, Stage::Slice, Stage::Paths, Stage::Metrics];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Stress => "stress",
            Stage::Psl => "psl",
            Stage::Slice => "slice",
            Stage::Paths => "paths",
            Stage::Metrics => "metrics",
        }
    }
}

/// What one stage produced.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct StageRecord {
    pub name: String,
    pub outputs: Vec<String>,
    pub counts: BTreeMap<String, usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Manifest {
    pub seed: u64,
    pub stages: Vec<StageRecord>,
}

fn write(out: &Path, rel: &str, contents: impl AsRef<[u8]>) -> Result<()> {
    let path = out.join(rel);
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))
}

fn read(out: &Path, rel: &str) -> Result<(PathBuf, String)> {
    let path = out.join(rel);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    Ok((path, text))
}

/// The mesh with its labels applied.
pub fn load_mesh(cfg: &PipelineConfig) -> Result<TetMesh> {
    let mesh = load_tet_mesh(&cfg.mesh.node, &cfg.mesh.ele)?;
    let labels = cfg.regions.labels(&mesh)?;
    mesh.with_labels(labels)
}

/// Boundary conditions from the fixture and load labels.
pub fn boundary_condition(mesh: &TetMesh, bc: &BcConfig) -> Result<BoundaryCondition> {
    let labels = mesh.labels();
    if labels.fixture.is_empty() {
        return Err(Error::Config("boundary conditions need a fixture region".into()));
    }
    let loaded_faces: Vec<usize> = mesh
        .boundary_faces()
        .iter()
        .enumerate()
        .filter(|(_, f)| f.vertices.iter().all(|v| labels.load.contains(v)))
        .map(|(i, _)| i)
        .collect();
    if loaded_faces.is_empty() {
        return Err(Error::Config("no boundary face lies entirely in the load region".into()));
    }
    Ok(BoundaryCondition {
        fixed_vertices: labels.fixture.clone(),
        loaded_faces,
        traction: Point::from(bc.traction),
        material: Material {
            youngs_modulus: bc.youngs_modulus,
            poisson_ratio: bc.poisson_ratio,
        },
    })
}

fn load_stress(out: &Path, mesh: &TetMesh) -> Result<Vec<StressTensor>> {
    load_stress_field(out.join(STRESS_FILE), mesh.tet_count())
}

fn load_weights(out: &Path, mesh: &TetMesh) -> Result<PslWeights> {
    let (path, text) = read(out, WEIGHTS_FILE)?;
    parse_weights_csv(&path, &text, mesh.tet_count())
}

fn load_layers(cfg: &PipelineConfig, out: &Path, mesh: &TetMesh) -> Result<Vec<CurvedLayer>> {
    let (path, text) = read(out, GUIDANCE_FILE)?;
    let g: VertexField = parse_guidance_csv(&path, &text, mesh.vertex_count())?;
    extract_isosurfaces(mesh, &g, cfg.layers.count)
}

fn record(stage: Stage, outputs: &[&str], counts: &[(&str, usize)]) -> StageRecord {
    StageRecord {
        name: stage.name().into(),
        outputs: outputs.iter().map(|s| s.to_string()).collect(),
        counts: counts.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        seconds: None,
    }
}

fn stress_stage(cfg: &PipelineConfig, out: &Path, mesh: &TetMesh) -> Result<StageRecord> {
    let tensors = match (&cfg.stress.csv, &cfg.stress.bc) {
        (Some(csv), _) => load_stress_field(csv, mesh.tet_count())?,
        (None, Some(bc)) => solve_linear_elasticity(mesh, &boundary_condition(mesh, bc)?)?,
        (None, None) => return Err(Error::Config("no stress source".into())),
    };
    write(out, STRESS_FILE, stress_csv_string(&tensors))?;
    Ok(record(
        Stage::Stress,
        &[STRESS_FILE],
        &[("vertices", mesh.vertex_count()), ("tets", mesh.tet_count())],
    ))
}

fn psl_stage(cfg: &PipelineConfig, out: &Path, mesh: &TetMesh) -> Result<StageRecord> {
    let principal = decompose_all(&load_stress(out, mesh)?);
    let l_max = cfg.psl.length_factor * mesh.average_edge_length();
    let lines = trace_all(mesh, &principal, l_max);
    let selected = select_psls(&lines, mesh)?;
    let weights = count_psl_weights(mesh, &selected);
    write(out, PSL_FILE, psl_dump_string(&selected))?;
    write(out, WEIGHTS_FILE, weights_csv_string(&weights))?;
    Ok(record(
        Stage::Psl,
        &[PSL_FILE, WEIGHTS_FILE],
        &[
            ("traced", lines.len()),
            ("selected", selected.len()),
            ("critical_elements", weights.critical_count()),
        ],
    ))
}

fn slice_stage(cfg: &PipelineConfig, out: &Path, mesh: &TetMesh) -> Result<StageRecord> {
    let principal = decompose_all(&load_stress(out, mesh)?);
    let weights = load_weights(out, mesh)?;
    let l = &cfg.layers;
    let problem = LayerFieldProblem::new(mesh, Point::from(l.build_direction), l.weights, l.anchor_ring)?
        .with_roi_ring(mesh, l.roi_ring);
    let g = solve_guidance_field(mesh, &principal, &weights, &problem)?;
    write(out, GUIDANCE_FILE, guidance_csv_string(&g))?;
    let layers = extract_isosurfaces(mesh, &g, l.count)?;
    let dir = out.join(LAYERS_DIR);
    if dir.exists() {
        std::fs::remove_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }
    for layer in &layers {
        write(out, &format!("{LAYERS_DIR}/layer_{:04}.obj", layer.layer_index), obj_string(&layer.surface))?;
    }
    write(out, LAYERS_FILE, layers_csv_string(&layers))?;
    let empty = layers.iter().filter(|l| l.surface.face_count() == 0).count();
    Ok(record(
        Stage::Slice,
        &[GUIDANCE_FILE, LAYERS_FILE, LAYERS_DIR],
        &[("layers", layers.len()), ("empty_layers", empty)],
    ))
}

/// Fiber (and optionally matrix) toolpaths for every non-empty layer.
pub fn plan_toolpaths(
    cfg: &PipelineConfig,
    layers: &[CurvedLayer],
    principal: &[PrincipalStress],
) -> Result<(Vec<Toolpath>, usize)> {
    let params = PathParams {
        weights: cfg.toolpaths.weights,
        selectors: cfg.toolpaths.critical.clone(),
        spacing: cfg.spacing(),
        n_paths: cfg.toolpaths.paths_per_layer,
        voronoi: cfg.toolpaths.voronoi,
    };
    let planned = crate::par::map_range(layers.len(), |i| {
        let layer = &layers[i];
        if layer.surface.face_count() == 0 {
            return Ok((Vec::new(), false));
        }
        let wrap = |e: Error| Error::Invalid(format!("layer {}: {e}", layer.layer_index));
        let plan = plan_layer(layer, principal, &params).map_err(wrap)?;
        let mut paths = plan.toolpaths;
        if cfg.toolpaths.matrix {
            paths.extend(matrix_toolpaths(layer, cfg.spacing(), paths.len()).map_err(wrap)?);
        }
        Ok((paths, plan.cut.is_some()))
    });
    let mut all = Vec::new();
    let mut cut_layers = 0;
    for r in planned {
        let (paths, cut) = r?;
        all.extend(paths);
        cut_layers += usize::from(cut);
    }
    Ok((all, cut_layers))
}

fn paths_stage(cfg: &PipelineConfig, out: &Path, mesh: &TetMesh) -> Result<StageRecord> {
    let principal = decompose_all(&load_stress(out, mesh)?);
    let layers = load_layers(cfg, out, mesh)?;
    let (paths, cut_layers) = plan_toolpaths(cfg, &layers, &principal)?;
    write(out, WAYPOINTS_FILE, waypoints_csv_string(&paths)?)?;
    let waypoints = paths.iter().map(|t| t.waypoints.len()).sum();
    Ok(record(
        Stage::Paths,
        &[WAYPOINTS_FILE],
        &[("toolpaths", paths.len()), ("waypoints", waypoints), ("cut_layers", cut_layers)],
    ))
}

/// Critical contours of each layer, as the metrics expect them.
pub fn layer_contours(cfg: &PipelineConfig, layers: &[CurvedLayer]) -> Vec<LayerContours> {
    layers
        .iter()
        .filter(|l| l.surface.face_count() > 0)
        .map(|l| {
            let s = &l.surface;
            let found = detect_contours(s, &cfg.toolpaths.critical);
            LayerContours {
                layer_index: l.layer_index,
                contours: found
                    .contours
                    .iter()
                    .map(|h| h.iter().map(|&v| s.vertices()[v]).collect())
                    .collect(),
                edge_length: s.average_edge_length(),
            }
        })
        .collect()
}

fn metrics_stage(cfg: &PipelineConfig, out: &Path, mesh: &TetMesh) -> Result<StageRecord> {
    let principal = decompose_all(&load_stress(out, mesh)?);
    let weights = load_weights(out, mesh)?;
    let layers = load_layers(cfg, out, mesh)?;
    let paths = load_waypoints(out.join(WAYPOINTS_FILE))?;
    let fiber: Vec<Toolpath> = paths.iter().filter(|t| t.material == crate::surfpath::Material::Fiber).cloned().collect();
    let alignment = alignment_stats(&fiber, &principal, &weights, mesh)?;
    let thickness = thickness_stats(&layers, &paths, cfg.metrics.thickness_band);
    let continuity = continuity_report(&fiber, &layer_contours(cfg, &layers));
    write(out, "reports/alignment.toml", report_toml(&alignment))?;
    write(out, "reports/alignment_histogram.csv", alignment.critical.histogram_csv_string())?;
    write(out, "reports/thickness.toml", report_toml(&thickness))?;
    write(out, "reports/continuity.toml", report_toml(&continuity))?;
    let visited: BTreeSet<usize> = continuity
        .layers
        .iter()
        .filter(|l| l.contours > 0 && l.all_contours_visited)
        .map(|l| l.layer_index)
        .collect();
    Ok(record(
        Stage::Metrics,
        &[
            "reports/alignment.toml",
            "reports/alignment_histogram.csv",
            "reports/thickness.toml",
            "reports/continuity.toml",
        ],
        &[
            ("aligned_samples", alignment.critical.count),
            ("thickness_samples", thickness.samples.len()),
            ("layers_visiting_all_contours", visited.len()),
        ],
    ))
}

fn report_toml<T: Serialize>(report: &T) -> String {
    toml::to_string_pretty(report).expect("report serializes")
}

/// Runs one stage into `out`, reading earlier stages' artifacts from it.
pub fn run_stage(cfg: &PipelineConfig, out: &Path, stage: Stage) -> Result<StageRecord> {
    cfg.validate()?;
    crate::par::with_threads(cfg.run.parallelism, || {
        let mesh = load_mesh(cfg)?;
        stage_on(cfg, out, &mesh, stage)
    })?
}

fn stage_on(cfg: &PipelineConfig, out: &Path, mesh: &TetMesh, stage: Stage) -> Result<StageRecord> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let start = Instant::now();
    let result = match stage {
        Stage::Stress => stress_stage(cfg, out, mesh),
        Stage::Psl => psl_stage(cfg, out, mesh),
        Stage::Slice => slice_stage(cfg, out, mesh),
        Stage::Paths => paths_stage(cfg, out, mesh),
        Stage::Metrics => metrics_stage(cfg, out, mesh),
    };
    let mut rec = result.map_err(|e| Error::Stage {
        stage: stage.name(),
        source: Box::new(e),
    })?;
    let secs = start.elapsed().as_secs_f64();
    log::info!("stage {} finished in {secs:.2} s", stage.name());
    if cfg.run.record_timings {
        rec.seconds = Some(secs);
    }
    Ok(rec)
}

/// Every stage in order, then the manifest.
pub fn run(cfg: &PipelineConfig, out: &Path) -> Result<Manifest> {
    cfg.validate()?;
    crate::par::with_threads(cfg.run.parallelism, || {
        let mesh = load_mesh(cfg)?;
        let mut manifest = Manifest {
            seed: cfg.run.seed,
            stages: Vec::new(),
        };
        for stage in Stage::ALL {
            manifest.stages.push(stage_on(cfg, out, &mesh, stage)?);
        }
        write(out, MANIFEST_FILE, toml::to_string_pretty(&manifest).expect("manifest serializes"))?;
        Ok(manifest)
    })?
}
