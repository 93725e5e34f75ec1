//! Adaptive and approximate inversion counting via red-blue dominance,
//! shallow cuttings and red-blue cells, with block I/O accounting on a
//! simulated external memory.

pub mod approx;
pub mod cells;
pub mod counting;
pub mod cuttings;
pub mod dominance;
mod fenwick;
pub mod instance;
pub mod iomodel;

pub use approx::{estimate_dominance, estimate_inversions, Estimate, PairSampler, Regime};
pub use cells::{audit_cells, build_cells, AuditReport, Cell, CellKind, RedBlueCells};
pub use counting::{
    count_adaptive, count_adaptive_ram, count_capped, count_capped_ram, count_nonadaptive,
    AdaptiveCount, CappedOutcome, RoundSchedule,
};
pub use cuttings::{build_blue_cutting, build_red_cutting, Placement, StaircaseCutting};
pub use dominance::{
    brute_force_count, dominates, mergesort_count, reduce_inversions, Color, CountResult,
    InputError, Point, PointSet, ValueList,
};
pub use instance::{generate, GenerateError, InstanceSpec, Shape};
pub use iomodel::{EmParams, IoCounts, IoError, IoTally};
