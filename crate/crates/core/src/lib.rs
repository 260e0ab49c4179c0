//! Grid-based rectilinear floorplanning with feedthrough-aware annealing,
//! whitespace removal and in-module component placement.

pub mod anneal;
pub mod bench_io;
pub mod error;
pub mod geom;
pub mod layout;
pub mod masks;
pub mod metrics;
pub mod netlist;
pub mod pipeline;
pub mod place;
pub mod resize;
pub mod rng;

pub use error::{Error, Result};
pub use geom::{CellCoord, GridCanvas, ModuleId, Rect, RectilinearRegion};
pub use layout::{Layout, ModuleLayout, Stage};
pub use metrics::{FeedthroughParams, MetricRow};
pub use netlist::{Component, ComponentKind, ModuleSpec, Net, Netlist};
pub use pipeline::{run, Mode, RunConfig, RunOutput};
