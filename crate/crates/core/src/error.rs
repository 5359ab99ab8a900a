use alloc::string::String;
use core::fmt;

use crate::cloud::DatabaseName;
use crate::topology::SensorType;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A coordinate was NaN or infinite.
    InvalidPosition,
    DuplicateId(String),
    /// A configuration value violated its constraint. `field` is a dotted
    /// path into the scenario config, e.g. `sensors[3].x`.
    InvalidConfig { field: String, reason: String },
    /// A coordinator override named a node that is not a member of any grid
    /// of the overridden type.
    InvalidOverride { sensor_type: SensorType, id: String },
    WrongDatabase { database: DatabaseName, sensor_type: SensorType },
    /// A reading's payload is outside its declared domain.
    InvalidReading(String),
    InvalidQuery(String),
    InvalidThresholds { low_max: f64, medium_max: f64 },
    InvalidWorkload(String),
    /// A route referenced a sensor that is not in the topology or not
    /// covered by the grid set.
    UnknownSensor(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidPosition => f.write_str("invalid position: coordinates must be finite"),
            Error::DuplicateId(id) => write!(f, "duplicate sensor id `{id}`"),
            Error::InvalidConfig { field, reason } => write!(f, "invalid config at `{field}`: {reason}"),
            Error::InvalidOverride { sensor_type, id } => write!(
                f,
                "invalid coordinator override: `{id}` is not a member of any {sensor_type} grid"
            ),
            Error::WrongDatabase { database, sensor_type } => write!(
                f,
                "wrong database: {sensor_type} reading cannot be stored in {database}"
            ),
            Error::InvalidReading(reason) => write!(f, "invalid reading: {reason}"),
            Error::InvalidQuery(reason) => write!(f, "invalid query: {reason}"),
            Error::InvalidThresholds { low_max, medium_max } => write!(
                f,
                "invalid congestion thresholds: need 0 <= low_max < medium_max, got {low_max} and {medium_max}"
            ),
            Error::InvalidWorkload(reason) => write!(f, "invalid workload: {reason}"),
            Error::UnknownSensor(id) => write!(f, "routing error: unknown sensor `{id}`"),
        }
    }
}

impl core::error::Error for Error {}
