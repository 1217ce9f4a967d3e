use thiserror::Error;

/// Errors raised by the channel, grouping, precoding and evaluation stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error("angular bin index {index} out of range for {bins} bins")]
    BinOutOfRange { index: usize, bins: usize },

    #[error("empty angular interval [{lo}, {hi})")]
    EmptyInterval { lo: f64, hi: f64 },

    #[error("invalid array geometry: {0}")]
    Geometry(String),

    #[error("invalid profile `{profile}`: {reason}")]
    Profile { profile: String, reason: String },

    #[error("matrix is not Hermitian positive semidefinite: {0}")]
    NotPsd(String),

    #[error("requested width {requested} exceeds covariance rank {rank}")]
    WidthExceedsRank { requested: usize, rank: usize },

    #[error("insufficient spatial dimensions: {}", format_dims(.0))]
    InsufficientDimensions(Vec<DimensionShortfall>),

    #[error("rank-deficient effective channel for group {group} (condition number {condition:.3e})")]
    RankDeficient { group: usize, condition: f64 },

    #[error("too many streams for group {group}: {streams} streams over {width} dimensions")]
    TooManyStreams { group: usize, streams: usize, width: usize },

    #[error("exhaustive search over {nodes} nodes exceeds the cap of {cap}")]
    SearchTooLarge { nodes: usize, cap: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid evaluation config: {0}")]
    Config(String),

    #[error("selection produced no users")]
    NoUsersSelected,

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Parse(String),

    #[error("schema error at `{path}`: {reason}")]
    Schema { path: String, reason: String },
}

/// One group whose orthogonal complement cannot host its pre-beamformer.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionShortfall {
    pub group: usize,
    pub available: usize,
    pub requested: usize,
}

fn format_dims(v: &[DimensionShortfall]) -> String {
    v.iter()
        .map(|d| format!("group {} needs {} but has {}", d.group, d.requested, d.available))
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
