//! TOML pipeline configuration.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::layerfield::{LayerWeights, ROI_RING};
use crate::mesh::{Point, TetMesh, VertexLabels};
use crate::psl::DEFAULT_LENGTH_FACTOR;
use crate::stress::Material;
use crate::surfpath::{Selector, ToolpathWeights, VoronoiRule, FIBER_WIDTH};
use crate::{Error, Result};

/// A vertex set given by geometry or by explicit indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Region {
    Box { min: [f64; 3], max: [f64; 3] },
    Sphere { center: [f64; 3], radius: f64 },
    Vertices { ids: Vec<usize> },
}

impl Region {
    pub fn vertices(&self, mesh: &TetMesh) -> Result<BTreeSet<usize>> {
        let select = |s: Selector| -> BTreeSet<usize> {
            (0..mesh.vertex_count()).filter(|&v| s.contains(&mesh.vertices()[v])).collect()
        };
        Ok(match self {
            Region::Box { min, max } => select(Selector::Box { min: *min, max: *max }),
            Region::Sphere { center, radius } => select(Selector::Sphere {
                center: *center,
                radius: *radius,
            }),
            Region::Vertices { ids } => {
                if let Some(v) = ids.iter().find(|&&v| v >= mesh.vertex_count()) {
                    return Err(Error::Config(format!("region vertex {v} does not exist")));
                }
                ids.iter().copied().collect()
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub node: PathBuf,
    pub ele: PathBuf,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegionsConfig {
    pub fixture: Vec<Region>,
    pub load: Vec<Region>,
    /// One continuity region per entry.
    pub roi: Vec<Region>,
}

impl RegionsConfig {
    pub fn labels(&self, mesh: &TetMesh) -> Result<VertexLabels> {
        let union = |rs: &[Region]| -> Result<BTreeSet<usize>> {
            let mut out = BTreeSet::new();
            for r in rs {
                out.extend(r.vertices(mesh)?);
            }
            Ok(out)
        };
        Ok(VertexLabels {
            fixture: union(&self.fixture)?,
            load: union(&self.load)?,
            roi: self.roi.iter().map(|r| r.vertices(mesh)).collect::<Result<_>>()?,
        })
    }
}

/// Built-in FEA: fixture vertices pinned, traction on boundary faces whose
/// vertices all carry the load label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BcConfig {
    /// MPa.
    pub traction: [f64; 3],
    #[serde(default = "default_youngs")]
    pub youngs_modulus: f64,
    #[serde(default = "default_poisson")]
    pub poisson_ratio: f64,
}

fn default_youngs() -> f64 {
    Material::default().youngs_modulus
}

fn default_poisson() -> f64 {
    Material::default().poisson_ratio
}

/// Exactly one of `csv` and `bc`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StressConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bc: Option<BcConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PslConfig {
    /// Maximum line length in mean edge lengths.
    pub length_factor: f64,
}

impl Default for PslConfig {
    fn default() -> Self {
        PslConfig {
            length_factor: DEFAULT_LENGTH_FACTOR,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LayersConfig {
    pub count: usize,
    pub build_direction: [f64; 3],
    pub weights: LayerWeights,
    pub roi_ring: usize,
    /// Rings grown around the extreme vertices pinned to 0 and 1.
    pub anchor_ring: usize,
}

impl Default for LayersConfig {
    fn default() -> Self {
        LayersConfig {
            count: 50,
            build_direction: [0.0, 0.0, 1.0],
            weights: LayerWeights::default(),
            roi_ring: ROI_RING,
            anchor_ring: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToolpathConfig {
    pub weights: ToolpathWeights,
    /// Boundary loops touching any of these are critical contours.
    pub critical: Vec<Selector>,
    /// mm.
    pub fiber_width: f64,
    /// Target path spacing (mm); the fiber width when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
    /// Fixed path count per layer, overriding the spacing.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paths_per_layer: Option<usize>,
    pub voronoi: VoronoiRule,
    /// Also emit contour-parallel matrix paths on every layer.
    pub matrix: bool,
}

impl Default for ToolpathConfig {
    fn default() -> Self {
        ToolpathConfig {
            weights: ToolpathWeights::default(),
            critical: Vec::new(),
            fiber_width: FIBER_WIDTH,
            spacing: None,
            paths_per_layer: None,
            voronoi: VoronoiRule::Nearest,
            matrix: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    /// mm.
    pub thickness_band: [f64; 2],
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            thickness_band: [0.3, 0.7],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub output: PathBuf,
    /// Worker threads; 0 uses every core.
    pub parallelism: usize,
    /// Recorded in the manifest. Every perturbation in the pipeline is a
    /// fixed constant, so it changes nothing.
    pub seed: u64,
    /// Write wall-clock stage timings into the manifest, which makes it
    /// differ between runs.
    pub record_timings: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            output: PathBuf::from("out"),
            parallelism: 0,
            seed: 0,
            record_timings: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub mesh: MeshConfig,
    #[serde(default)]
    pub regions: RegionsConfig,
    pub stress: StressConfig,
    #[serde(default)]
    pub psl: PslConfig,
    #[serde(default)]
    pub layers: LayersConfig,
    #[serde(default)]
    pub toolpaths: ToolpathConfig,
    #[serde(default)]
    pub metrics: MetricsConfig,
    #[serde(default)]
    pub run: RunConfig,
}

fn nonnegative(name: &str, values: &[f64]) -> Result<()> {
    if values.iter().all(|x| x.is_finite() && *x >= 0.0) {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be finite and non-negative")))
    }
}

impl PipelineConfig {
    /// Parses and validates; relative paths resolve against `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.resolve(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            e => e,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.mesh.node);
        fix(&mut self.mesh.ele);
        if let Some(p) = &mut self.stress.csv {
            fix(p);
        }
        fix(&mut self.run.output);
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.stress.csv, &self.stress.bc) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "give either a stress CSV or boundary conditions, not both".into(),
                ))
            }
            (None, None) => return Err(Error::Config("a stress CSV or boundary conditions is required".into())),
            _ => {}
        }
        if let Some(bc) = &self.stress.bc {
            if bc.traction.iter().any(|t| !t.is_finite()) {
                return Err(Error::Config("traction must be finite".into()));
            }
            if !(bc.youngs_modulus > 0.0) || !(0.0..0.5).contains(&bc.poisson_ratio) {
                return Err(Error::Config("need E > 0 and 0 <= poisson_ratio < 0.5".into()));
            }
        }
        let l = &self.layers;
        if l.count == 0 {
            return Err(Error::Config("layer count must be at least 1".into()));
        }
        if Point::from(l.build_direction).norm() == 0.0 {
            return Err(Error::Config("build direction must be non-zero".into()));
        }
        nonnegative("layer weights", &[l.weights.sf, l.weights.cg, l.weights.cp])?;
        let t = &self.toolpaths;
        nonnegative("toolpath weights", &[t.weights.sf, t.weights.cp, t.weights.hf])?;
        if !(t.fiber_width > 0.0) || t.spacing.is_some_and(|s| !(s > 0.0)) {
            return Err(Error::Config("fiber width and spacing must be positive".into()));
        }
        if t.paths_per_layer == Some(0) {
            return Err(Error::Config("paths_per_layer must be at least 1".into()));
        }
        if !(self.psl.length_factor > 0.0) {
            return Err(Error::Config("PSL length factor must be positive".into()));
        }
        let [a, b] = self.metrics.thickness_band;
        if !(a <= b) {
            return Err(Error::Config("thickness band must be ordered".into()));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        self.toolpaths.spacing.unwrap_or(self.toolpaths.fiber_width)
    }
}
