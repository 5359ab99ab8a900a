//! The cloud side: one database per sensor type with one table per
//! sensor, the four estimation services, and centric-query answering.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::Error;
use crate::topology::SensorType;

/// A typed measurement. The variant fixes the sensor type it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Payload {
    Vision { lane_count: u8, distorted: bool },
    /// Distance-units per tick.
    Speed { vehicle_speed: f64 },
    Environment { temperature: f64, humidity: f64, light: f64 },
    Miscellaneous { vehicle_count: u32, crash: bool },
}

impl Payload {
    pub fn sensor_type(&self) -> SensorType {
        match self {
            Payload::Vision { .. } => SensorType::Vision,
            Payload::Speed { .. } => SensorType::Speed,
            Payload::Environment { .. } => SensorType::Environment,
            Payload::Miscellaneous { .. } => SensorType::Miscellaneous,
        }
    }

    fn check(&self) -> Result<(), String> {
        match *self {
            Payload::Vision { lane_count, .. } if !(1..=2).contains(&lane_count) => {
                Err(format!("lane_count {lane_count} not in {{1, 2}}"))
            }
            Payload::Speed { vehicle_speed } if !(vehicle_speed > 0.0 && vehicle_speed.is_finite()) => {
                Err(format!("vehicle_speed {vehicle_speed} must be positive"))
            }
            Payload::Environment { temperature, humidity, light } => {
                if !(0.0..=100.0).contains(&humidity) {
                    Err(format!("humidity {humidity} not in [0, 100]"))
                } else if !temperature.is_finite() {
                    Err(format!("temperature {temperature} must be finite"))
                } else if !(light >= 0.0 && light.is_finite()) {
                    Err(format!("light {light} must be non-negative"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reading {
    pub sensor_id: String,
    pub tick: u64,
    pub payload: Payload,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DatabaseName {
    Vdb,
    Sdb,
    Edb,
    Mdb,
}

impl DatabaseName {
    pub fn as_str(self) -> &'static str {
        match self {
            DatabaseName::Vdb => "VDB",
            DatabaseName::Sdb => "SDB",
            DatabaseName::Edb => "EDB",
            DatabaseName::Mdb => "MDB",
        }
    }
}

impl fmt::Display for DatabaseName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn database_for(t: SensorType) -> DatabaseName {
    match t {
        SensorType::Vision => DatabaseName::Vdb,
        SensorType::Speed => DatabaseName::Sdb,
        SensorType::Environment => DatabaseName::Edb,
        SensorType::Miscellaneous => DatabaseName::Mdb,
    }
}

/// Returned by a successful ingest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ack {
    pub database: DatabaseName,
    pub table: String,
    /// Table length after the append.
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CloudDatabase {
    name: DatabaseName,
    sensor_type: SensorType,
    tables: BTreeMap<String, Vec<Reading>>,
}

impl CloudDatabase {
    pub fn new(sensor_type: SensorType) -> Self {
        CloudDatabase {
            name: database_for(sensor_type),
            sensor_type,
            tables: BTreeMap::new(),
        }
    }

    pub fn name(&self) -> DatabaseName {
        self.name
    }

    pub fn sensor_type(&self) -> SensorType {
        self.sensor_type
    }

    pub fn table(&self, sensor_id: &str) -> Option<&[Reading]> {
        self.tables.get(sensor_id).map(Vec::as_slice)
    }

    pub fn tables(&self) -> impl Iterator<Item = (&str, &[Reading])> {
        self.tables.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// Appends `r` to its sensor's table, creating the table on first use.
    pub fn ingest(&mut self, r: Reading) -> Result<Ack, Error> {
        let t = r.payload.sensor_type();
        if t != self.sensor_type {
            return Err(Error::WrongDatabase {
                database: self.name,
                sensor_type: t,
            });
        }
        r.payload.check().map_err(Error::InvalidReading)?;
        let table = self.tables.entry(r.sensor_id.clone()).or_default();
        let ack_table = r.sensor_id.clone();
        table.push(r);
        Ok(Ack {
            database: self.name,
            table: ack_table,
            rows: table.len(),
        })
    }

    /// All readings with a tick inside `window`, in table then row order.
    pub fn readings_in(&self, window: Window) -> impl Iterator<Item = &Reading> {
        self.tables
            .values()
            .flatten()
            .filter(move |r| window.contains(r.tick))
    }
}

/// The four per-type databases.
#[derive(Debug, Clone, PartialEq)]
pub struct CloudStore {
    databases: [CloudDatabase; 4],
}

impl Default for CloudStore {
    fn default() -> Self {
        CloudStore {
            databases: SensorType::ALL.map(CloudDatabase::new),
        }
    }
}

impl CloudStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn database(&self, t: SensorType) -> &CloudDatabase {
        &self.databases[t as usize]
    }

    /// Routes a reading to the database of its payload type.
    pub fn ingest(&mut self, r: Reading) -> Result<Ack, Error> {
        let t = r.payload.sensor_type();
        self.databases[t as usize].ingest(r)
    }

    pub fn databases(&self) -> &[CloudDatabase] {
        &self.databases
    }
}

/// Inclusive tick interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub from: u64,
    pub to: u64,
}

impl Window {
    pub fn new(from: u64, to: u64) -> Result<Self, Error> {
        if from > to {
            return Err(Error::InvalidQuery(format!("window [{from}, {to}] is reversed")));
        }
        Ok(Window { from, to })
    }

    pub fn contains(&self, tick: u64) -> bool {
        self.from <= tick && tick <= self.to
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Service {
    RoadCondition,
    VelocityTravelTime,
    Environment,
    Congestion,
}

impl Service {
    pub const ALL: [Service; 4] = [
        Service::RoadCondition,
        Service::VelocityTravelTime,
        Service::Environment,
        Service::Congestion,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Service::RoadCondition => "road_condition",
            Service::VelocityTravelTime => "velocity_travel_time",
            Service::Environment => "environment",
            Service::Congestion => "congestion",
        }
    }

    pub fn parse(s: &str) -> Option<Service> {
        Service::ALL.into_iter().find(|v| v.as_str() == s)
    }

    /// The sensor type whose database feeds this service.
    pub fn source_type(self) -> SensorType {
        match self {
            Service::RoadCondition => SensorType::Vision,
            Service::VelocityTravelTime => SensorType::Speed,
            Service::Environment => SensorType::Environment,
            Service::Congestion => SensorType::Miscellaneous,
        }
    }
}

impl fmt::Display for Service {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentricQuery {
    pub query_id: u64,
    pub services: BTreeSet<Service>,
    pub window: Window,
}

impl CentricQuery {
    pub fn new(query_id: u64, services: impl IntoIterator<Item = Service>, window: Window) -> Self {
        CentricQuery {
            query_id,
            services: services.into_iter().collect(),
            window,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.services.is_empty() {
            return Err(Error::InvalidQuery("no services requested".into()));
        }
        Window::new(self.window.from, self.window.to).map(|_| ())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoadCondition {
    pub distorted_fraction: f64,
    pub dominant_lane_count: u8,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityTravelTime {
    pub mean_speed: f64,
    pub travel_time_ticks: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvironmentEstimate {
    pub mean_temperature: f64,
    pub mean_humidity: f64,
    pub mean_light: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CongestionLevel {
    Low,
    Medium,
    High,
}

impl CongestionLevel {
    pub fn as_str(self) -> &'static str {
        match self {
            CongestionLevel::Low => "low",
            CongestionLevel::Medium => "medium",
            CongestionLevel::High => "high",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Congestion {
    pub mean_vehicle_count: f64,
    pub congestion_level: CongestionLevel,
    pub any_crash: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CongestionThresholds {
    pub low_max: f64,
    pub medium_max: f64,
}

impl Default for CongestionThresholds {
    fn default() -> Self {
        CongestionThresholds {
            low_max: 5.0,
            medium_max: 15.0,
        }
    }
}

impl CongestionThresholds {
    pub fn validate(&self) -> Result<(), Error> {
        let ok = self.low_max >= 0.0 && self.low_max < self.medium_max && self.medium_max.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidThresholds {
                low_max: self.low_max,
                medium_max: self.medium_max,
            })
        }
    }

    pub fn classify(&self, mean_vehicle_count: f64) -> CongestionLevel {
        if mean_vehicle_count <= self.low_max {
            CongestionLevel::Low
        } else if mean_vehicle_count <= self.medium_max {
            CongestionLevel::Medium
        } else {
            CongestionLevel::High
        }
    }
}

/// One report section. `None` means no readings fell in the window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Section {
    RoadCondition(Option<RoadCondition>),
    VelocityTravelTime(Option<VelocityTravelTime>),
    Environment(Option<EnvironmentEstimate>),
    Congestion(Option<Congestion>),
}

impl Section {
    pub fn data_available(&self) -> bool {
        match self {
            Section::RoadCondition(v) => v.is_some(),
            Section::VelocityTravelTime(v) => v.is_some(),
            Section::Environment(v) => v.is_some(),
            Section::Congestion(v) => v.is_some(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationReport {
    pub query_id: u64,
    pub sections: BTreeMap<Service, Section>,
}

/// Arithmetic mean, clamped into the sample range so rounding never
/// pushes it outside `[min, max]`.
fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values {
        sum += v;
        n += 1;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (n > 0).then(|| (sum / n as f64).clamp(lo, hi))
}

pub fn estimate_road_condition(vdb: &CloudDatabase, window: Window) -> Option<RoadCondition> {
    let (mut total, mut distorted, mut one_lane, mut two_lane) = (0usize, 0usize, 0usize, 0usize);
    for r in vdb.readings_in(window) {
        if let Payload::Vision { lane_count, distorted: d } = r.payload {
            total += 1;
            distorted += usize::from(d);
            match lane_count {
                1 => one_lane += 1,
                _ => two_lane += 1,
            }
        }
    }
    (total > 0).then(|| RoadCondition {
        distorted_fraction: distorted as f64 / total as f64,
        dominant_lane_count: if one_lane > two_lane { 1 } else { 2 },
    })
}

pub fn estimate_velocity_travel_time(
    sdb: &CloudDatabase,
    window: Window,
    segment_length: f64,
) -> Option<VelocityTravelTime> {
    let speeds = sdb.readings_in(window).filter_map(|r| match r.payload {
        Payload::Speed { vehicle_speed } => Some(vehicle_speed),
        _ => None,
    });
    let mean_speed = mean(speeds)?;
    (mean_speed > 0.0).then(|| VelocityTravelTime {
        mean_speed,
        travel_time_ticks: segment_length / mean_speed,
    })
}

pub fn estimate_environment(edb: &CloudDatabase, window: Window) -> Option<EnvironmentEstimate> {
    let samples: Vec<(f64, f64, f64)> = edb
        .readings_in(window)
        .filter_map(|r| match r.payload {
            Payload::Environment { temperature, humidity, light } => Some((temperature, humidity, light)),
            _ => None,
        })
        .collect();
    Some(EnvironmentEstimate {
        mean_temperature: mean(samples.iter().map(|s| s.0))?,
        mean_humidity: mean(samples.iter().map(|s| s.1))?,
        mean_light: mean(samples.iter().map(|s| s.2))?,
    })
}

pub fn estimate_congestion(
    mdb: &CloudDatabase,
    window: Window,
    thresholds: CongestionThresholds,
) -> Result<Option<Congestion>, Error> {
    thresholds.validate()?;
    let mut any_crash = false;
    let counts = mdb.readings_in(window).filter_map(|r| match r.payload {
        Payload::Miscellaneous { vehicle_count, crash } => {
            any_crash |= crash;
            Some(f64::from(vehicle_count))
        }
        _ => None,
    });
    let mean_vehicle_count = mean(counts);
    Ok(mean_vehicle_count.map(|m| Congestion {
        mean_vehicle_count: m,
        congestion_level: thresholds.classify(m),
        any_crash,
    }))
}

/// Computes one section per requested service from the cloud databases.
pub fn answer_centric_query(
    q: &CentricQuery,
    store: &CloudStore,
    segment_length: f64,
    thresholds: CongestionThresholds,
) -> Result<EstimationReport, Error> {
    q.validate()?;
    let mut sections = BTreeMap::new();
    for &service in &q.services {
        let db = store.database(service.source_type());
        let section = match service {
            Service::RoadCondition => Section::RoadCondition(estimate_road_condition(db, q.window)),
            Service::VelocityTravelTime => Section::VelocityTravelTime(estimate_velocity_travel_time(
                db,
                q.window,
                segment_length,
            )),
            Service::Environment => Section::Environment(estimate_environment(db, q.window)),
            Service::Congestion => Section::Congestion(estimate_congestion(db, q.window, thresholds)?),
        };
        sections.insert(service, section);
    }
    Ok(EstimationReport {
        query_id: q.query_id,
        sections,
    })
}
