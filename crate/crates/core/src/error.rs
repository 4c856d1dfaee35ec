use thiserror::Error;

/// Reason codes reported when the initial data fails a compatibility check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IncompatibilityReason {
    /// Discrete transformed divergence of `u_0` is not zero.
    Divergence,
    /// `u_0 . nu_0 != v_0 . nu_0` on the elastic face.
    NormalTrace,
    /// Initial displacement or velocity violates the clamped end conditions.
    Clamped,
    /// Frozen-structure runs require zero initial displacement and velocity.
    FrozenStructureMotion,
}

impl std::fmt::Display for IncompatibilityReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Self::Divergence => "divergence",
            Self::NormalTrace => "normal_trace",
            Self::Clamped => "clamped",
            Self::FrozenStructureMotion => "frozen_structure_motion",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),
    #[error("polygon cannot be meshed conformingly: {0}")]
    NonRectifiablePolygon(String),
    #[error("mesh has no face tagged elastic")]
    MissingElasticFace,
    #[error("interface displacement violates the clamped end conditions: {0}")]
    ClampViolatedInput(String),
    #[error("linear solver failure: {0}")]
    SolverFailure(String),
    #[error("fields live on different meshes")]
    MeshMismatch,
    #[error("degenerate interface tangent (S = {0:e})")]
    DegenerateTangent(f64),
    #[error("symmetric deformation vanishes; Korn ratio undefined")]
    ZeroDeformation,
    #[error("shell operator is not positive definite: {0}")]
    SingularOperator(String),
    #[error("new ALE map is inadmissible (j_min = {j_min:e})")]
    InadmissibleDomain { j_min: f64 },
    #[error("assembly shape mismatch: {0}")]
    AssemblyShapeMismatch(String),
    #[error("incompatible initial data ({reason}): {detail}")]
    IncompatibleInitialData {
        reason: IncompatibilityReason,
        detail: String,
    },
    #[error("shift h = {h} is not smaller than the trajectory duration {duration}")]
    ShiftTooLarge { h: f64, duration: f64 },
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("run stopped early at step {step}: {detail}")]
    RunStopped { step: usize, detail: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error at line {line}, key `{key}`: {reason}")]
    Parse {
        line: usize,
        key: String,
        reason: String,
    },
    #[error("validation error for `{key}`: {constraint}")]
    Validation { key: String, constraint: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
