//! Sensors, their types and positions, and the scenario configuration.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::cloud::CongestionThresholds;
use crate::error::Error;
use crate::workload::ReadingRanges;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SensorType {
    Vision,
    Speed,
    Environment,
    Miscellaneous,
}

impl SensorType {
    pub const ALL: [SensorType; 4] = [
        SensorType::Vision,
        SensorType::Speed,
        SensorType::Environment,
        SensorType::Miscellaneous,
    ];

    /// Lower-case name used in config files and reports.
    pub fn as_str(self) -> &'static str {
        match self {
            SensorType::Vision => "vision",
            SensorType::Speed => "speed",
            SensorType::Environment => "environment",
            SensorType::Miscellaneous => "miscellaneous",
        }
    }
}

impl fmt::Display for SensorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SensorType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SensorType::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig {
                field: "type".into(),
                reason: format!("unknown sensor type `{s}`"),
            })
    }
}

/// A point in the deployment area. Units are abstract distance-units.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Position {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Position { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Arithmetic mean of a set of positions; the origin for an empty set.
    pub fn centroid<'a, I: IntoIterator<Item = &'a Position>>(points: I) -> Position {
        let (mut sx, mut sy, mut sz, mut n) = (0.0, 0.0, 0.0, 0usize);
        for p in points {
            sx += p.x;
            sy += p.y;
            sz += p.z;
            n += 1;
        }
        if n == 0 {
            return Position::default();
        }
        let n = n as f64;
        Position::new(sx / n, sy / n, sz / n)
    }
}

/// Euclidean distance in three dimensions.
pub fn distance(a: &Position, b: &Position) -> Result<f64, Error> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidPosition);
    }
    let (dx, dy, dz) = (a.x - b.x, a.y - b.y, a.z - b.z);
    Ok(libm::sqrt(dx * dx + dy * dy + dz * dz))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorNode {
    pub id: String,
    pub sensor_type: SensorType,
    pub position: Position,
    /// The position is a stand-in, not a surveyed coordinate.
    pub placeholder: bool,
}

impl SensorNode {
    pub fn new(id: impl Into<String>, sensor_type: SensorType, position: Position) -> Self {
        SensorNode {
            id: id.into(),
            sensor_type,
            position,
            placeholder: false,
        }
    }
}

/// Per-unit prices used to monetize a trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostParams {
    pub wireless_cost_per_unit_distance: f64,
    /// Price of one message on a coordinator, base-station, cloud or user link.
    pub infra_message_cost: f64,
    pub computation_op_cost: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        CostParams {
            wireless_cost_per_unit_distance: 1.0,
            infra_message_cost: 1.0,
            computation_op_cost: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub sensors: Vec<SensorNode>,
    /// Same-type sensors strictly closer than this share a grid.
    pub threshold: f64,
    pub cost_params: CostParams,
    /// Length of the road segment used for travel-time estimation.
    pub segment_length: f64,
    /// Number of reporting ticks.
    pub duration_ticks: u64,
    pub seed: u64,
    pub coordinator_overrides: BTreeMap<SensorType, String>,
    pub congestion: CongestionThresholds,
    pub reading_ranges: ReadingRanges,
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::InvalidConfig {
        field: field.into(),
        reason: reason.into(),
    }
}

impl ScenarioConfig {
    pub fn new(sensors: Vec<SensorNode>, threshold: f64) -> Self {
        ScenarioConfig {
            sensors,
            threshold,
            cost_params: CostParams::default(),
            segment_length: 1000.0,
            duration_ticks: 100,
            seed: 42,
            coordinator_overrides: BTreeMap::new(),
            congestion: CongestionThresholds::default(),
            reading_ranges: ReadingRanges::default(),
        }
    }

    pub fn sensor(&self, id: &str) -> Option<&SensorNode> {
        self.sensors.iter().find(|s| s.id == id)
    }

    /// Sensors keyed by id.
    pub fn sensor_index(&self) -> BTreeMap<&str, &SensorNode> {
        self.sensors.iter().map(|s| (s.id.as_str(), s)).collect()
    }

    /// Full validation, as applied to configuration files.
    pub fn validate(&self) -> Result<(), Error> {
        self.validate_structure()?;
        if self.duration_ticks < 1 {
            return Err(invalid("duration_ticks", "must be at least 1"));
        }
        Ok(())
    }

    /// Everything [`validate`](Self::validate) checks except the tick
    /// count, so that vacuous zero-tick runs can still be simulated.
    pub fn validate_structure(&self) -> Result<(), Error> {
        let mut seen = BTreeSet::new();
        for (i, s) in self.sensors.iter().enumerate() {
            if s.id.is_empty() {
                return Err(invalid(format!("sensors[{i}].id"), "must not be empty"));
            }
            if !seen.insert(s.id.as_str()) {
                return Err(Error::DuplicateId(s.id.clone()));
            }
            for (axis, v) in [("x", s.position.x), ("y", s.position.y), ("z", s.position.z)] {
                if !v.is_finite() {
                    return Err(invalid(format!("sensors[{i}].{axis}"), "must be finite"));
                }
            }
        }
        if self.threshold.is_nan() || self.threshold <= 0.0 {
            return Err(invalid("threshold", "must be positive"));
        }
        if !(self.segment_length > 0.0 && self.segment_length.is_finite()) {
            return Err(invalid("segment_length", "must be positive and finite"));
        }
        let c = &self.cost_params;
        for (name, v) in [
            ("wireless_cost_per_unit_distance", c.wireless_cost_per_unit_distance),
            ("infra_message_cost", c.infra_message_cost),
            ("computation_op_cost", c.computation_op_cost),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(format!("cost_params.{name}"), "must be non-negative and finite"));
            }
        }
        for (t, id) in &self.coordinator_overrides {
            match self.sensor(id) {
                Some(s) if s.sensor_type == *t => {}
                _ => {
                    return Err(invalid(
                        format!("coordinator_overrides.{t}"),
                        format!("`{id}` is not a {t} sensor"),
                    ))
                }
            }
        }
        self.congestion
            .validate()
            .map_err(|e| invalid("congestion", e.to_string()))?;
        self.reading_ranges
            .validate()
            .map_err(|reason| invalid("reading_ranges", reason))?;
        Ok(())
    }
}

/// Id of the one testbed sensor whose position is a placeholder.
pub const PLACEHOLDER_SENSOR: &str = "MS_1";

const TESTBED: [(&str, SensorType, [f64; 3]); 16] = [
    ("VS_1", SensorType::Vision, [5.0, 45.0, 48.0]),
    ("VS_2", SensorType::Vision, [85.0, 43.0, 75.0]),
    ("VS_3", SensorType::Vision, [38.0, 35.0, 12.0]),
    ("VS_4", SensorType::Vision, [89.0, 56.0, 23.0]),
    ("SS_1", SensorType::Speed, [7.0, 36.0, 10.0]),
    ("SS_2", SensorType::Speed, [94.0, 47.0, 80.0]),
    ("SS_3", SensorType::Speed, [16.0, 35.0, 67.0]),
    ("SS_4", SensorType::Speed, [42.0, 29.0, 63.0]),
    ("ES_1", SensorType::Environment, [37.0, 41.0, 15.0]),
    ("ES_2", SensorType::Environment, [104.0, 35.0, 24.0]),
    ("ES_3", SensorType::Environment, [33.0, 48.0, 56.0]),
    ("ES_4", SensorType::Environment, [86.0, 39.0, 74.0]),
    // No surveyed coordinate exists for MS_1.
    ("MS_1", SensorType::Miscellaneous, [60.0, 40.0, 30.0]),
    ("MS_2", SensorType::Miscellaneous, [58.0, 37.0, 23.0]),
    ("MS_3", SensorType::Miscellaneous, [47.0, 44.0, 46.0]),
    ("MS_4", SensorType::Miscellaneous, [99.0, 38.0, 75.0]),
];

/// The sixteen-node roadside testbed: four sensors of each type, threshold
/// 100, seed 42.
pub fn builtin_testbed() -> ScenarioConfig {
    let sensors = TESTBED
        .iter()
        .map(|&(id, t, [x, y, z])| SensorNode {
            id: id.into(),
            sensor_type: t,
            position: Position::new(x, y, z),
            placeholder: id == PLACEHOLDER_SENSOR,
        })
        .collect();
    ScenarioConfig::new(sensors, 100.0)
}
