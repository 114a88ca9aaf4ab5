//! Disclosure risk measures for fully synthetic tabular data.
//!
//! The pipeline loads an original table and one or more synthetic
//! replicates, optionally groups numeric columns, tabulates the composite
//! key `q` against a target, applies exclusions, and computes identity
//! measures, attribute measures, the CAP family and the prior-knowledge
//! checks.

pub mod attribute;
pub mod binning;
pub mod cap;
pub mod checks;
pub mod error;
pub mod exclusions;
pub mod identity;
pub mod ingest;
pub mod report;
pub mod tabulate;

pub use attribute::{attrib_measures, generalized_disclosure, AttribMeasures};
pub use binning::{apply_grouping, group_numeric, BinningResult, GroupingSpec};
pub use cap::{cap_measures, CapMeasures};
pub use checks::{run_checks, Check1Way, Check2Way, CheckFlags, CheckThresholds};
pub use error::{Error, Result};
pub use exclusions::{apply_exclusions, strip_replicated_uniques, ExcludedPair, ExclusionSpec};
pub use identity::{ident_measures, IdentMeasures};
pub use ingest::{load_dataset, load_table, Column, ColumnKind, ColumnTable, LoadOptions, SyntheticSet};
pub use tabulate::{build_pair, build_q_only, proportions, AlignedPair, NaPolicy, Proportions};
