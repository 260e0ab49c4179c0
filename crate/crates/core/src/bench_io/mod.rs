//! Benchmark ingestion, component synthesis and output artifacts.

pub mod gsrc;
pub mod layout_file;
pub mod report;
pub mod svg;
pub mod synth;

pub use gsrc::{parse_blocks, parse_nets, Blocks, Nets};
pub use layout_file::{load_layout, save_layout};
pub use report::{emit_report, report_aggregate, ReportRow, SummaryRow};
pub use svg::emit_svg;
pub use synth::{synthesize_components, SynthConfig};
