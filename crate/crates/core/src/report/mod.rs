//! Run orchestration, rendering and the toy synthesizer.

pub mod config;
pub mod pipeline;
pub mod render;
pub mod svg;
pub mod synth;

pub use config::{OutputFormat, RunConfig, Section};
pub use pipeline::{
    disclosure, load_inputs, multi_disclosure, resolve_targets, sweep, DisclosureReport, ReplicateMeasures, SummaryRow,
    SweepPoint, SweepReport, TargetReport,
};
pub use render::{render_report, render_sweep};
pub use synth::{bootstrap_synth, SynthMode};
