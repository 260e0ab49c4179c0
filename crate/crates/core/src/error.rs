use std::path::PathBuf;

use thiserror::Error;

use crate::geom::{CellCoord, ModuleId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("region is empty")]
    EmptyRegion,
    #[error("region is not 4-connected")]
    DisconnectedRegion,
    #[error("regions overlap at {0:?}")]
    OverlappingRegions(CellCoord),
    #[error("cell {0:?} is outside the {1}x{2} canvas")]
    OutOfCanvas(CellCoord, usize, usize),
    #[error("cell {0:?} is not blank")]
    CellNotBlank(CellCoord),
    #[error("module {0} is not adjacent to the rectangle")]
    NotAdjacent(ModuleId),
    #[error("no legal anchor for module {0}")]
    NoRoom(ModuleId),
    #[error("could not fit all modules after {attempts} attempts")]
    InitFailure { attempts: usize },
    #[error("blank rectangle at {0:?} has no adjacent module")]
    OrphanBlank(CellCoord),
    #[error("module {name} (area {area}) is too small to host two components")]
    ModuleTooSmall { name: String, area: u64 },
    #[error("{}:{line}: {msg}", path.display())]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("net {net} references undeclared block `{name}`")]
    UndeclaredBlock { net: usize, name: String },
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error("overlapping module regions: {}", fmt_pairs(.0))]
    LayoutOverlap(Vec<(String, String)>),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("report schema mismatch in {}: {msg}", path.display())]
    ReportSchema { path: PathBuf, msg: String },
    #[error("cannot read {}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn read(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
        move |source| Error::Read {
            path: path.to_path_buf(),
            source,
        }
    }
}

fn fmt_pairs(pairs: &[(String, String)]) -> String {
    pairs
        .iter()
        .map(|(a, b)| format!("{a}/{b}"))
        .collect::<Vec<_>>()
        .join(", ")
}
