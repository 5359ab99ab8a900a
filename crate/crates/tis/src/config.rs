//! JSON scenario and workload files.
//!
//! Unknown keys are rejected and every error carries the path of the
//! offending field, e.g. `sensors[3].x` or `cost_params`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tis_core::cloud::{CongestionThresholds, Service};
use tis_core::topology::{CostParams, Position, ScenarioConfig, SensorNode, SensorType};
use tis_core::workload::{ReadingRanges, ScheduledQuery, ScheduledRequest, Workload};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: {source}")]
    Invalid {
        path: String,
        #[source]
        source: tis_core::Error,
    },
}

impl ConfigError {
    pub fn path(&self) -> &str {
        match self {
            ConfigError::Parse { path, .. } | ConfigError::Invalid { path, .. } => path,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum TypeName {
    Vision,
    Speed,
    Environment,
    Miscellaneous,
}

impl From<TypeName> for SensorType {
    fn from(t: TypeName) -> Self {
        match t {
            TypeName::Vision => SensorType::Vision,
            TypeName::Speed => SensorType::Speed,
            TypeName::Environment => SensorType::Environment,
            TypeName::Miscellaneous => SensorType::Miscellaneous,
        }
    }
}

impl From<SensorType> for TypeName {
    fn from(t: SensorType) -> Self {
        match t {
            SensorType::Vision => TypeName::Vision,
            SensorType::Speed => TypeName::Speed,
            SensorType::Environment => TypeName::Environment,
            SensorType::Miscellaneous => TypeName::Miscellaneous,
        }
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SensorEntry {
    id: String,
    #[serde(rename = "type")]
    sensor_type: TypeName,
    x: f64,
    y: f64,
    z: f64,
    /// Marks a coordinate that is a stand-in rather than a measurement.
    #[serde(default, skip_serializing_if = "is_false")]
    placeholder: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CostParamsEntry {
    wireless_cost_per_unit_distance: f64,
    infra_message_cost: f64,
    computation_op_cost: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ThresholdsEntry {
    low_max: f64,
    medium_max: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RangesEntry {
    speed: [f64; 2],
    temperature: [f64; 2],
    humidity: [f64; 2],
    light: [f64; 2],
    distorted_probability: f64,
    vehicle_count_max: u32,
    crash_probability: f64,
}

impl Default for RangesEntry {
    fn default() -> Self {
        ReadingRanges::default().into()
    }
}

impl From<ReadingRanges> for RangesEntry {
    fn from(r: ReadingRanges) -> Self {
        RangesEntry {
            speed: r.speed.into(),
            temperature: r.temperature.into(),
            humidity: r.humidity.into(),
            light: r.light.into(),
            distorted_probability: r.distorted_probability,
            vehicle_count_max: r.vehicle_count_max,
            crash_probability: r.crash_probability,
        }
    }
}

impl From<RangesEntry> for ReadingRanges {
    fn from(r: RangesEntry) -> Self {
        ReadingRanges {
            speed: r.speed.into(),
            temperature: r.temperature.into(),
            humidity: r.humidity.into(),
            light: r.light.into(),
            distorted_probability: r.distorted_probability,
            vehicle_count_max: r.vehicle_count_max,
            crash_probability: r.crash_probability,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    sensors: Vec<SensorEntry>,
    threshold: f64,
    cost_params: CostParamsEntry,
    segment_length: f64,
    duration_ticks: u64,
    seed: u64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    coordinator_overrides: BTreeMap<TypeName, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    congestion_thresholds: Option<ThresholdsEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reading_ranges: Option<RangesEntry>,
}

impl From<ConfigFile> for ScenarioConfig {
    fn from(f: ConfigFile) -> Self {
        let sensors = f
            .sensors
            .into_iter()
            .map(|s| SensorNode {
                id: s.id,
                sensor_type: s.sensor_type.into(),
                position: Position::new(s.x, s.y, s.z),
                placeholder: s.placeholder,
            })
            .collect();
        let mut cfg = ScenarioConfig::new(sensors, f.threshold);
        cfg.cost_params = CostParams {
            wireless_cost_per_unit_distance: f.cost_params.wireless_cost_per_unit_distance,
            infra_message_cost: f.cost_params.infra_message_cost,
            computation_op_cost: f.cost_params.computation_op_cost,
        };
        cfg.segment_length = f.segment_length;
        cfg.duration_ticks = f.duration_ticks;
        cfg.seed = f.seed;
        cfg.coordinator_overrides = f
            .coordinator_overrides
            .into_iter()
            .map(|(t, id)| (t.into(), id))
            .collect();
        if let Some(t) = f.congestion_thresholds {
            cfg.congestion = CongestionThresholds {
                low_max: t.low_max,
                medium_max: t.medium_max,
            };
        }
        if let Some(r) = f.reading_ranges {
            cfg.reading_ranges = r.into();
        }
        cfg
    }
}

impl From<&ScenarioConfig> for ConfigFile {
    fn from(cfg: &ScenarioConfig) -> Self {
        ConfigFile {
            sensors: cfg
                .sensors
                .iter()
                .map(|s| SensorEntry {
                    id: s.id.clone(),
                    sensor_type: s.sensor_type.into(),
                    x: s.position.x,
                    y: s.position.y,
                    z: s.position.z,
                    placeholder: s.placeholder,
                })
                .collect(),
            threshold: cfg.threshold,
            cost_params: CostParamsEntry {
                wireless_cost_per_unit_distance: cfg.cost_params.wireless_cost_per_unit_distance,
                infra_message_cost: cfg.cost_params.infra_message_cost,
                computation_op_cost: cfg.cost_params.computation_op_cost,
            },
            segment_length: cfg.segment_length,
            duration_ticks: cfg.duration_ticks,
            seed: cfg.seed,
            coordinator_overrides: cfg
                .coordinator_overrides
                .iter()
                .map(|(&t, id)| (t.into(), id.clone()))
                .collect(),
            congestion_thresholds: Some(ThresholdsEntry {
                low_max: cfg.congestion.low_max,
                medium_max: cfg.congestion.medium_max,
            }),
            reading_ranges: Some(cfg.reading_ranges.into()),
        }
    }
}

fn parse<'de, T: Deserialize<'de>>(text: &'de str) -> Result<T, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Parse {
        path: e.path().to_string(),
        message: e.into_inner().to_string(),
    })
}

fn invalid(cfg: &ScenarioConfig, err: tis_core::Error) -> ConfigError {
    let path = match &err {
        tis_core::Error::InvalidConfig { field, .. } => field.clone(),
        tis_core::Error::DuplicateId(id) => {
            let i = cfg
                .sensors
                .iter()
                .enumerate()
                .filter(|(_, s)| &s.id == id)
                .nth(1)
                .map_or(0, |(i, _)| i);
            format!("sensors[{i}].id")
        }
        _ => ".".to_string(),
    };
    ConfigError::Invalid { path, source: err }
}

/// Parses and fully validates a scenario config file.
pub fn load_topology(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let cfg: ScenarioConfig = parse::<ConfigFile>(text)?.into();
    cfg.validate().map_err(|e| invalid(&cfg, e))?;
    Ok(cfg)
}

/// Renders `cfg` in the config file format. `load_topology` inverts it.
pub fn serialize_config(cfg: &ScenarioConfig) -> String {
    serde_json::to_string_pretty(&ConfigFile::from(cfg)).expect("config is always serializable")
}

pub(crate) fn config_value(cfg: &ScenarioConfig) -> serde_json::Value {
    serde_json::to_value(ConfigFile::from(cfg)).expect("config is always serializable")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ServiceName {
    RoadCondition,
    VelocityTravelTime,
    Environment,
    Congestion,
}

impl From<ServiceName> for Service {
    fn from(s: ServiceName) -> Self {
        match s {
            ServiceName::RoadCondition => Service::RoadCondition,
            ServiceName::VelocityTravelTime => Service::VelocityTravelTime,
            ServiceName::Environment => Service::Environment,
            ServiceName::Congestion => Service::Congestion,
        }
    }
}

impl From<Service> for ServiceName {
    fn from(s: Service) -> Self {
        match s {
            Service::RoadCondition => ServiceName::RoadCondition,
            Service::VelocityTravelTime => ServiceName::VelocityTravelTime,
            Service::Environment => ServiceName::Environment,
            Service::Congestion => ServiceName::Congestion,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QueryEntry {
    tick: u64,
    services: Vec<ServiceName>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RequestEntry {
    tick: u64,
    requester: String,
    target: String,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WorkloadFile {
    #[serde(default)]
    queries: Vec<QueryEntry>,
    #[serde(default)]
    requests: Vec<RequestEntry>,
}

/// Parses a workload file and checks it against `cfg`.
pub fn load_workload(text: &str, cfg: &ScenarioConfig) -> Result<Workload, ConfigError> {
    let file: WorkloadFile = parse(text)?;
    let workload = Workload {
        queries: file
            .queries
            .into_iter()
            .map(|q| ScheduledQuery {
                tick: q.tick,
                services: q.services.into_iter().map(Service::from).collect::<BTreeSet<_>>(),
            })
            .collect(),
        requests: file
            .requests
            .into_iter()
            .map(|r| ScheduledRequest {
                tick: r.tick,
                requester: r.requester,
                target: r.target,
            })
            .collect(),
    };
    workload.validate(cfg).map_err(|e| ConfigError::Invalid {
        path: ".".into(),
        source: e,
    })?;
    Ok(workload)
}

pub fn serialize_workload(w: &Workload) -> String {
    let file = WorkloadFile {
        queries: w
            .queries
            .iter()
            .map(|q| QueryEntry {
                tick: q.tick,
                services: q.services.iter().map(|&s| s.into()).collect(),
            })
            .collect(),
        requests: w
            .requests
            .iter()
            .map(|r| RequestEntry {
                tick: r.tick,
                requester: r.requester.clone(),
                target: r.target.clone(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("workload is always serializable")
}
