//! Bundled benchmark models written out as ready-to-run pipeline inputs.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::config::{
    BcConfig, LayersConfig, MeshConfig, PipelineConfig, Region, RegionsConfig, StressConfig, ToolpathConfig,
};
use crate::mesh::io::write_tet_mesh;
use crate::mesh::TetMesh;
use crate::models::{self, BoltedBar, TwistBar};
use crate::stress::write_stress_field;
use crate::surfpath::Selector;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    /// Prismatic bar in uniaxial tension (built-in FEA).
    Bar,
    /// Bar with an analytic helical stress field.
    TwistBar,
    /// Bar with two bolt holes in tension (built-in FEA).
    BoltedBar,
}

impl Model {
    pub const ALL: [Model; 3] = [Model::Bar, Model::TwistBar, Model::BoltedBar];

    pub fn name(self) -> &'static str {
        match self {
            Model::Bar => "bar",
            Model::TwistBar => "twist-bar",
            Model::BoltedBar => "bolted-bar",
        }
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Model::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown model `{s}` (try bar, twist-bar, bolted-bar)")))
    }
}

fn ids(set: &std::collections::BTreeSet<usize>) -> Vec<Region> {
    vec![Region::Vertices {
        ids: set.iter().copied().collect(),
    }]
}

/// Writes the mesh, any stress file and `config.toml` into `dir`; returns the
/// config path. `tets` scales the twist bar.
pub fn generate(model: Model, dir: &Path, tets: Option<usize>) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let stem = model.name().replace('-', "_");
    let (node, ele) = (format!("{stem}.node"), format!("{stem}.ele"));
    let mesh: TetMesh;
    let mut stress = StressConfig::default();
    let mut layers = LayersConfig::default();
    let mut toolpaths = ToolpathConfig::default();
    match model {
        Model::Bar => {
            mesh = models::bar(40.0, 10.0, 10.0, [16, 4, 4]);
            stress.bc = Some(BcConfig {
                traction: [1.0, 0.0, 0.0],
                youngs_modulus: 3500.0,
                poisson_ratio: 0.36,
            });
            layers.count = 20;
        }
        Model::TwistBar => {
            let bar = tets.map_or_else(TwistBar::default, TwistBar::with_tet_count);
            mesh = bar.mesh();
            write_stress_field(&bar.stress_field(&mesh), dir.join("stress.csv"))?;
            stress.csv = Some(PathBuf::from("stress.csv"));
        }
        Model::BoltedBar => {
            let bar = BoltedBar::default();
            mesh = bar.mesh();
            stress.bc = Some(BcConfig {
                traction: [5.0, 0.0, 0.0],
                youngs_modulus: 3500.0,
                poisson_ratio: 0.36,
            });
            layers.count = 12;
            let margin = bar.hole_radius + bar.length / bar.cells[0] as f64;
            toolpaths.critical = bar
                .hole_centers()
                .iter()
                .map(|c| Selector::Box {
                    min: [c.x - margin, c.y - margin, -bar.height],
                    max: [c.x + margin, c.y + margin, bar.height],
                })
                .collect();
        }
    }
    write_tet_mesh(&mesh, dir.join(&node), dir.join(&ele))?;
    let labels = mesh.labels();
    let cfg = PipelineConfig {
        mesh: MeshConfig {
            node: node.into(),
            ele: ele.into(),
        },
        regions: RegionsConfig {
            fixture: ids(&labels.fixture),
            load: ids(&labels.load),
            roi: Vec::new(),
        },
        stress,
        psl: Default::default(),
        layers,
        toolpaths,
        metrics: Default::default(),
        run: Default::default(),
    };
    let path = dir.join("config.toml");
    std::fs::write(&path, cfg.to_toml()).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
