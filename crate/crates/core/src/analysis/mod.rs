//! LOCC distinguishability analysis: orthogonality-preserving measurement
//! constraints, protocol search, and partition-level verdicts.

pub mod opm;
pub mod search;
pub mod verdict;

pub use opm::{
    indistinguishability_certificate, opm_constraints, opm_triviality, IndistinguishabilityCertificate, OpmAnalysis,
    OpmConstraints,
};
pub use search::{distinguishability_search, replay, LeafKind, ProtocolTree};
pub use verdict::{
    analyze_partition, classify_tripartite, resource_placement_analysis, sweep, threshold_scan, Classification,
    DistinguishabilityVerdict, ResourceReport, Status, ThresholdReport, TripartiteClass,
};
