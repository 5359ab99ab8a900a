//! Core model of a query-centric transport information system.
//!
//! Sensors of four types are grouped into type-homogeneous grids, each grid
//! elects a coordinator, readings flow through the coordinators to per-type
//! cloud databases, and users ask centric queries that the cloud answers.
//! The [`sim`] module replays a workload over this architecture and over a
//! flat direct-radio baseline and accounts for communication and
//! computation cost.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod cloud;
pub mod error;
pub mod grid;
pub mod sim;
pub mod topology;
pub mod workload;

mod union_find;

pub use cloud::{
    answer_centric_query, database_for, CentricQuery, CloudDatabase, CloudStore,
    CongestionThresholds, DatabaseName, EstimationReport, Payload, Reading, Service, Window,
};
pub use error::Error;
pub use grid::{elect_all, elect_coordinator, form_grids, ElectionMethod, Grid, GridSet};
pub use sim::{
    compare_strategies, cost_of, run_scenario, Comparison, CostDelta, CostReport, Message,
    SimulationTrace, Site, Strategy,
};
pub use topology::{
    builtin_testbed, distance, CostParams, Position, ScenarioConfig, SensorNode, SensorType,
};
pub use workload::{generate_readings, generate_workload, ReadingRanges, Workload};
