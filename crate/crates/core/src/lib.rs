//! Duty cycling for pairs of energy-harvesting sensor devices.
//!
//! Two devices `u` and `v` each harvest one slot's worth of energy in some
//! slots of a period. A slot counts toward common active time (CAT) when both
//! devices are awake in it: fully when both harvested in that same slot,
//! discounted by the storage efficiency `eta` when one of them spends energy
//! banked earlier. The crate provides
//!
//! * trace generation and ingestion ([`energy_model`]),
//! * the energy-state graph, matchings and schedules ([`state_graph`]),
//! * the optimal offline algorithm ([`offline`]) and a randomized online
//!   algorithm in two accounting modes ([`online`]),
//! * an exhaustive matching oracle for certification ([`oracle`]),
//! * per-pair metrics ([`metrics`]) and a Monte Carlo harness ([`harness`]).
//!
//! ```
//! use dutycycle::{build_graph, offline_duty_cycle, DeviceId, Efficiency, EnergyTrace};
//!
//! let u = EnergyTrace::from_slots(DeviceId::new("u"), 9, &[1, 4, 6, 8]).unwrap();
//! let v = EnergyTrace::from_slots(DeviceId::new("v"), 9, &[1, 3, 6, 9]).unwrap();
//! let r = offline_duty_cycle(&build_graph(&u, &v, Efficiency::DEFAULT).unwrap());
//! assert_eq!((r.cat_total, r.sat_total), (3.5, 2.0));
//! ```

pub mod energy_model;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod offline;
pub mod online;
pub mod oracle;
pub mod params;
pub mod rng;
pub mod state_graph;

pub use energy_model::{
    generate_pair, generate_trace, read_binary_csv, read_raw_csv, threshold_trace, write_binary_csv, ArrivalModel, DeviceId,
    EnergyTrace, RawTrace,
};
pub use error::{Error, Result};
pub use harness::{run_monte_carlo, run_trace_pairs, verify_suite, Algorithm, Assertion, ExperimentSpec, RunReport, Suite};
pub use metrics::{compute_cat, compute_heterogeneity, ratio_online_to_offline, PairMetrics};
pub use offline::{expected_cat, offline_duty_cycle, OfflineResult};
pub use online::{approx_ratio_bound, online_duty_cycle, Activation, OnlineConfig, OnlineMode, OnlineResult};
pub use oracle::{brute_force_matching, OracleResult};
pub use params::{Efficiency, Probability};
pub use state_graph::{
    build_graph, check_energy_budget, schedule_from_matching, Edge, EdgeKind, Matching, Schedule, Side, StateGraph,
};
