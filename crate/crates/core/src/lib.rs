//! Exact state minimization for combinatorial filters, including filters
//! whose states may emit several outputs.
//!
//! The pipeline computes which states may share a filter state (the
//! compatibility complex), derives the zipper constraints that keep a merge
//! deterministic, searches for the smallest constrained cover with a SAT
//! solver, and builds the minimal filter from that cover.
//!
//! ```
//! use filtermin_core::{instances, minimize, CdclSolver, MinimizeOptions};
//!
//! let f = instances::gen_nxm(2, 3);
//! let report = minimize(&f, &CdclSolver, &MinimizeOptions::default()).unwrap();
//! assert_eq!(report.minimal_size, 3);
//! assert!(report.certified);
//! ```

#![allow(clippy::needless_range_loop)]

pub mod compat;
pub mod cover;
pub mod dpll;
pub mod encode;
pub mod error;
pub mod filter;
pub mod format;
pub mod instances;
pub mod minimize;
pub mod oracle;
pub mod solver;
pub mod sweep;
pub mod zipper;

pub use compat::{
    class_quotient, compatibility_complex, compatibility_graph, group_compatible,
    pairwise_compatible, CompatibilityGraph, SimplicialComplex,
};
pub use cover::{induce_filter, induced_cover, is_valid_cover, Cover};
pub use encode::{decode_cover, encode_k_cover, CnfInstance, EncodeOptions, Encoding};
pub use error::{Error, Result};
pub use filter::{
    deterministic_isomorphism, output_simulates, Config, PFilter, PFilterBuilder,
    SimulationVerdict, StateId, StateSet,
};
pub use minimize::{
    baseline_stepwise_heuristic, minimize, minimize_so_by_choice_enumeration, MinimizeOptions,
    MinimizeReport, Mode,
};
pub use oracle::{brute_force_minimize, verify_solution, OracleResult, Verdict};
pub use solver::{CdclSolver, DpllSolver, ExternalSolver, SatOutcome, SatSolver, SolverKind};
pub use zipper::{cover_satisfies, generate_zippers, successor_set, ZipperConstraint};
