use thiserror::Error;

use crate::caching::SubfileId;
use crate::topology::CellId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cell {cell} does not exist in a grid of {cells} cells")]
    InvalidCell { cell: CellId, cells: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("cannot parse grid spec `{spec}`: {reason}")]
    GridSpec { spec: String, reason: String },

    #[error("invalid mobility path: {0}")]
    InvalidPath(String),

    #[error("torus is incompatible with the reuse pattern; {requirement}")]
    IncompatibleTorus { requirement: String },

    #[error(
        "coloring is not valid for paths of {path_length} cells; counterexample path {counterexample:?}"
    )]
    InvalidColoring {
        path_length: usize,
        counterexample: Vec<CellId>,
    },

    #[error("exact search refused: {cells} cells exceeds the limit of {limit}")]
    TooLarge { cells: usize, limit: usize },

    #[error("unsupported ({total}, {data}) code: need 1 <= data <= total <= 255")]
    UnsupportedCode { data: usize, total: usize },

    #[error("cannot encode an empty file")]
    EmptyFile,

    #[error("insufficient fragments: have {have} distinct, need {need}")]
    InsufficientFragments { have: usize, need: usize },

    #[error("corrupt fragment: {0}")]
    CorruptFragment(String),

    #[error("caching level t = {level} is not an integer; use memory sharing")]
    NonIntegerLevel { level: String },

    #[error("demand {demand} is outside the library of {files} files")]
    DemandOutOfRange { demand: usize, files: usize },

    #[error("unsupported access pattern: {0}")]
    UnsupportedAccessPattern(String),

    #[error("scheduling error: user {user} at slot {slot} is in color {color}, which it already collected")]
    Scheduling { user: usize, slot: usize, color: usize },

    #[error("undecodable: missing sub-file {missing}")]
    Undecodable { missing: SubfileId },
}
