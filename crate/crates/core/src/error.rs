use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    #[error("mesh topology: {0}")]
    Topology(String),

    #[error("empty mesh")]
    EmptyMesh,

    #[error("degenerate tetrahedron {tet} (volume {volume:e} mm^3)")]
    DegenerateTet { tet: usize, volume: f64 },

    #[error("degenerate triangle {face} (area {area:e} mm^2)")]
    DegenerateFace { face: usize, area: f64 },

    #[error("stiffness matrix is singular: {modes} rigid-body mode(s) unconstrained")]
    SingularStiffness { modes: usize },

    #[error("linear solve did not converge (relative residual {residual:e})")]
    NotConverged { residual: f64 },

    #[error("linear system is singular: {0}")]
    Singular(String),

    #[error("stress field: {0}")]
    StressField(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("unreachable target: {0}")]
    Unreachable(String),

    #[error("config: {0}")]
    Config(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(path: impl AsRef<std::path::Path>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.as_ref().display().to_string(),
            line,
            msg: msg.into(),
        }
    }
}
