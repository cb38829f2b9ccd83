use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("mesh has zero surface area")]
    EmptyMesh,
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("invalid point cloud: {0}")]
    InvalidCloud(String),
    #[error("invalid transform: {0}")]
    InvalidTransform(String),
    #[error("cloud has {size} points but at least {required} are needed")]
    TooFewPoints { size: usize, required: usize },
    #[error("at least two frames are required, got {0}")]
    TooFewFrames(usize),
    #[error("frame sequence must contain at least one frame")]
    NoFrames,
    #[error("model-labelled point passed where only sensor points are allowed (index {0})")]
    ModelLabelPresent(usize),
    #[error("vision and tactile clouds are both empty")]
    BothEmpty,
    #[error("ground-truth surface cloud is empty")]
    EmptyGroundTruth,
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("total correspondence weight is zero")]
    ZeroTotalWeight,
    #[error("distance gating rejected every correspondence")]
    AllCorrespondencesRejected,
    #[error("every registration start failed; last error: {0}")]
    AllStartsFailed(Box<Error>),
    #[error("bad shape dimensions: {0}")]
    BadDimensions(String),
    #[error("camera position lies inside the mesh")]
    CameraInsideMesh,
    #[error("contact point {index} is {distance:.3} mm from the surface (limit 1 mm)")]
    ContactOffSurface { index: usize, distance: f64 },
    #[error("benchmark contains no scenes")]
    EmptyBenchmark,
    #[error("input has zero variance")]
    ZeroVariance,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid config at line {line}, key `{key}`: {message}")]
    InvalidConfig {
        line: usize,
        key: String,
        message: String,
    },
    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
