//! Placement-aware control-plane signaling model for a virtualized EPC.
//!
//! The crate answers one planning question: given the EPC control-plane
//! entities, their signaling interfaces and baseline transaction rates,
//! and a placement of the virtualized functions onto segments, hosts, and
//! LANs, how much signaling actually crosses the physical network?
//!
//! * [`model`] declares the entity universe, the interfaces with their
//!   protocol tags, placements, and the path classification rules.
//! * [`profile`] ingests the busy-hour traffic profile and derives the
//!   baseline per-interface rates.
//! * [`grouping`] holds the reference placements and the data-driven
//!   rewrite rules that internalize traffic when functions are
//!   co-segmented.
//! * [`procedures`] catalogs signaling flows (attach, ...) and expands
//!   them into per-step path classes under a placement.
//! * [`engine`] evaluates scenarios analytically or with a seeded
//!   Poisson event simulator, and compares runs.
//! * [`report`] renders and merges reports (JSON, CSV, aligned text).

pub mod engine;
pub mod error;
pub mod grouping;
pub mod model;
pub mod procedures;
pub mod profile;
pub mod report;

pub use engine::{
    compare, run_analytic, run_simulation, Comparison, EngineKind, InterfaceReport, Scenario,
    SimReport,
};
pub use error::{Error, FieldError, Result};
pub use grouping::{
    apply_grouping, isolated_placement, paper_rules, proposed_placement,
    single_segment_placement, AddRate, AddedInterface, GroupedRates, RewriteRule,
};
pub use model::{
    classify_path, validate_placement, EntityKind, Interface, Location, Model, PathClass,
    Placement, Protocol, Violation,
};
pub use procedures::{
    attach_procedure, expand_procedure, Guard, ProcedureBreakdown, ProcedureDef, Step,
};
pub use profile::{
    derive_baseline_rates, load_profile, table_calibrated_rates, Calibration, RateMode,
    RateTable, TrafficProfile,
};
pub use report::{merge, render_comparison, render_report, RenderFormat};
