//! Logical-clock simulation of the message flows and their cost.
//!
//! Two strategies run over the same workload:
//!
//! * `qcps`: sensors report each tick over radio to their grid coordinator,
//!   whose co-located base station forwards to the cloud over
//!   infrastructure. Inter-sensor requests and user queries are served by
//!   the cloud.
//! * `flat`: no grids and no cloud. Sensors report each tick straight to a
//!   gateway at the centroid of all sensors, requests are direct radio round
//!   trips, and each query is answered by the gateway polling every relevant
//!   sensor and aggregating on site.
//!
//! Within a tick, reports come first, then requests, then queries.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::cloud::{answer_centric_query, CentricQuery, CloudStore, EstimationReport, Window};
use crate::error::Error;
use crate::grid::{elect_all, form_grids, GridSet};
use crate::topology::{distance, CostParams, Position, ScenarioConfig, SensorNode};
use crate::workload::{generate_readings, Workload};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Qcps,
    Flat,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Qcps => "qcps",
            Strategy::Flat => "flat",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Site {
    Sensor(String),
    /// The base station attached to the named coordinator.
    BaseStation(String),
    Cloud,
    User,
    /// Polling point of the flat strategy.
    Gateway,
}

impl Site {
    /// Sites that talk over radio: sensors and the flat gateway.
    pub fn is_radio(&self) -> bool {
        matches!(self, Site::Sensor(_) | Site::Gateway)
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Site::Sensor(id) => f.write_str(id),
            Site::BaseStation(id) => write!(f, "BS[{id}]"),
            Site::Cloud => f.write_str("cloud"),
            Site::User => f.write_str("user"),
            Site::Gateway => f.write_str("gateway"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Medium {
    Wireless,
    Infrastructure,
}

impl Medium {
    pub fn as_str(self) -> &'static str {
        match self {
            Medium::Wireless => "wireless",
            Medium::Infrastructure => "infrastructure",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Report,
    Request,
    Response,
    Query,
    Answer,
}

impl Purpose {
    pub fn as_str(self) -> &'static str {
        match self {
            Purpose::Report => "report",
            Purpose::Request => "request",
            Purpose::Response => "response",
            Purpose::Query => "query",
            Purpose::Answer => "answer",
        }
    }
}

/// One hop of a route, before it is stamped with a tick and id.
#[derive(Debug, Clone, PartialEq)]
pub struct Leg {
    pub src: Site,
    pub dst: Site,
    pub medium: Medium,
    pub purpose: Purpose,
    /// Euclidean length for radio hops, 0 otherwise.
    pub wireless_distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub msg_id: u64,
    pub tick: u64,
    pub src: Site,
    pub dst: Site,
    pub medium: Medium,
    pub purpose: Purpose,
    pub wireless_distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComputationEvent {
    pub tick: u64,
    pub site: Site,
    pub op_count: u64,
}

/// The ordered hops and computations needed to serve one request or query.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Route {
    pub legs: Vec<Leg>,
    pub computations: Vec<(Site, u64)>,
}

impl Route {
    pub fn wireless_distance(&self) -> f64 {
        self.legs.iter().map(|l| l.wireless_distance).sum()
    }

    pub fn count(&self, medium: Medium) -> usize {
        self.legs.iter().filter(|l| l.medium == medium).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub strategy: Strategy,
    /// Ordered by `(tick, msg_id)`; ids are consecutive from 0.
    pub messages: Vec<Message>,
    pub computations: Vec<ComputationEvent>,
    /// Empty for the flat strategy.
    pub grids: GridSet,
    /// One per query, in answer order.
    pub reports: Vec<(u64, EstimationReport)>,
}

/// Resolves site positions and coordinators for one run.
pub struct Network<'a> {
    sensors: BTreeMap<&'a str, &'a SensorNode>,
    coordinators: BTreeMap<&'a str, &'a str>,
    gateway: Position,
}

impl<'a> Network<'a> {
    pub fn new(cfg: &'a ScenarioConfig, grids: &'a GridSet) -> Self {
        Network {
            sensors: cfg.sensor_index(),
            coordinators: grids.coordinator_map(),
            gateway: Position::centroid(cfg.sensors.iter().map(|s| &s.position)),
        }
    }

    pub fn gateway(&self) -> Position {
        self.gateway
    }

    fn position(&self, site: &Site) -> Result<Option<Position>, Error> {
        Ok(match site {
            Site::Sensor(id) => Some(self.sensor(id)?.position),
            Site::Gateway => Some(self.gateway),
            _ => None,
        })
    }

    fn sensor(&self, id: &str) -> Result<&'a SensorNode, Error> {
        self.sensors
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownSensor(id.to_string()))
    }

    fn coordinator(&self, id: &str) -> Result<&'a str, Error> {
        self.sensor(id)?;
        self.coordinators
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownSensor(id.to_string()))
    }

    /// Builds a hop; the medium is wireless exactly when both ends are radio sites.
    pub fn leg(&self, src: Site, dst: Site, purpose: Purpose) -> Result<Leg, Error> {
        let (medium, wireless_distance) = match (self.position(&src)?, self.position(&dst)?) {
            (Some(a), Some(b)) if src.is_radio() && dst.is_radio() => (Medium::Wireless, distance(&a, &b)?),
            _ => (Medium::Infrastructure, 0.0),
        };
        Ok(Leg {
            src,
            dst,
            medium,
            purpose,
            wireless_distance,
        })
    }

    /// Sensor to coordinator over radio, then base station to cloud.
    pub fn route_report(&self, sensor: &str) -> Result<Route, Error> {
        let coord = self.coordinator(sensor)?;
        Ok(Route {
            legs: alloc::vec![
                self.leg(Site::Sensor(sensor.into()), Site::Sensor(coord.into()), Purpose::Report)?,
                self.leg(Site::BaseStation(coord.into()), Site::Cloud, Purpose::Report)?,
            ],
            computations: Vec::new(),
        })
    }

    /// Sensor straight to the flat gateway over radio.
    pub fn route_gateway_report(&self, sensor: &str) -> Result<Route, Error> {
        self.sensor(sensor)?;
        Ok(Route {
            legs: alloc::vec![self.leg(Site::Sensor(sensor.into()), Site::Gateway, Purpose::Report)?],
            computations: Vec::new(),
        })
    }

    /// Coordinator-mediated request: the requester asks its own coordinator,
    /// the cloud computes the answer from the target's table. A requester
    /// that is its own coordinator skips both radio hops.
    pub fn route_sensor_request(&self, requester: &str, target: &str) -> Result<Route, Error> {
        let coord = self.coordinator(requester)?;
        self.coordinator(target)?;
        let mut legs = Vec::with_capacity(4);
        if coord != requester {
            legs.push(self.leg(Site::Sensor(requester.into()), Site::Sensor(coord.into()), Purpose::Request)?);
        }
        legs.push(self.leg(Site::BaseStation(coord.into()), Site::Cloud, Purpose::Request)?);
        legs.push(self.leg(Site::Cloud, Site::BaseStation(coord.into()), Purpose::Response)?);
        if coord != requester {
            legs.push(self.leg(Site::Sensor(coord.into()), Site::Sensor(requester.into()), Purpose::Response)?);
        }
        Ok(Route {
            legs,
            computations: alloc::vec![(Site::Cloud, 1)],
        })
    }

    /// Direct radio round trip; the target serves the data itself.
    pub fn route_direct_request(&self, requester: &str, target: &str) -> Result<Route, Error> {
        self.sensor(requester)?;
        self.sensor(target)?;
        Ok(Route {
            legs: alloc::vec![
                self.leg(Site::Sensor(requester.into()), Site::Sensor(target.into()), Purpose::Request)?,
                self.leg(Site::Sensor(target.into()), Site::Sensor(requester.into()), Purpose::Response)?,
            ],
            computations: alloc::vec![(Site::Sensor(target.into()), 1)],
        })
    }

    /// User to cloud and back, one cloud computation per requested service.
    pub fn route_user_query(&self, q: &CentricQuery) -> Result<Route, Error> {
        q.validate()?;
        Ok(Route {
            legs: alloc::vec![
                self.leg(Site::User, Site::Cloud, Purpose::Query)?,
                self.leg(Site::Cloud, Site::User, Purpose::Answer)?,
            ],
            computations: q.services.iter().map(|_| (Site::Cloud, 1)).collect(),
        })
    }

    /// The gateway polls every sensor feeding each requested service and
    /// aggregates each service once.
    pub fn route_polled_query(&self, q: &CentricQuery) -> Result<(Route, Vec<&'a SensorNode>), Error> {
        q.validate()?;
        let mut legs = alloc::vec![self.leg(Site::User, Site::Gateway, Purpose::Query)?];
        let mut polled = Vec::new();
        for service in &q.services {
            for s in self.sensors.values().filter(|s| s.sensor_type == service.source_type()) {
                legs.push(self.leg(Site::Gateway, Site::Sensor(s.id.clone()), Purpose::Request)?);
                legs.push(self.leg(Site::Sensor(s.id.clone()), Site::Gateway, Purpose::Response)?);
                polled.push(*s);
            }
        }
        legs.push(self.leg(Site::Gateway, Site::User, Purpose::Answer)?);
        Ok((
            Route {
                legs,
                computations: q.services.iter().map(|_| (Site::Gateway, 1)).collect(),
            },
            polled,
        ))
    }
}

/// Path of a coordinator-mediated request under `grids`.
pub fn route_sensor_request(
    requester: &str,
    target: &str,
    grids: &GridSet,
    cfg: &ScenarioConfig,
) -> Result<Route, Error> {
    Network::new(cfg, grids).route_sensor_request(requester, target)
}

/// Path of a direct request under the flat strategy.
pub fn route_direct_request(requester: &str, target: &str, cfg: &ScenarioConfig) -> Result<Route, Error> {
    Network::new(cfg, &GridSet::default()).route_direct_request(requester, target)
}

/// Cloud-side query path and the report it produces.
pub fn route_user_query(
    q: &CentricQuery,
    store: &CloudStore,
    cfg: &ScenarioConfig,
) -> Result<(Route, EstimationReport), Error> {
    let empty = GridSet::default();
    let route = Network::new(cfg, &empty).route_user_query(q)?;
    let report = answer_centric_query(q, store, cfg.segment_length, cfg.congestion)?;
    Ok((route, report))
}

struct Recorder {
    messages: Vec<Message>,
    computations: Vec<ComputationEvent>,
}

impl Recorder {
    fn record(&mut self, tick: u64, route: Route) {
        for leg in route.legs {
            self.messages.push(Message {
                msg_id: self.messages.len() as u64,
                tick,
                src: leg.src,
                dst: leg.dst,
                medium: leg.medium,
                purpose: leg.purpose,
                wireless_distance: leg.wireless_distance,
            });
        }
        for (site, op_count) in route.computations {
            self.computations.push(ComputationEvent { tick, site, op_count });
        }
    }
}

enum Event<'w> {
    Request(&'w str, &'w str),
    Query(u64, &'w crate::workload::ScheduledQuery),
}

/// Replays `workload` over the scenario under `strategy`.
pub fn run_scenario(cfg: &ScenarioConfig, workload: &Workload, strategy: Strategy) -> Result<SimulationTrace, Error> {
    cfg.validate_structure()?;
    workload.validate(cfg)?;

    let grids = match strategy {
        Strategy::Qcps => elect_all(
            form_grids(&cfg.sensors, cfg.threshold)?,
            &cfg.sensor_index(),
            &cfg.coordinator_overrides,
        )?,
        Strategy::Flat => GridSet::default(),
    };
    let net = Network::new(cfg, &grids);

    let mut sensors: Vec<&SensorNode> = cfg.sensors.iter().collect();
    sensors.sort_by(|a, b| a.id.cmp(&b.id));

    // Requests before queries within a tick, each in workload order.
    let mut events: Vec<(u64, Event)> = workload
        .requests
        .iter()
        .map(|r| (r.tick, Event::Request(r.requester.as_str(), r.target.as_str())))
        .chain(
            workload
                .queries
                .iter()
                .enumerate()
                .map(|(i, q)| (q.tick, Event::Query(i as u64, q))),
        )
        .collect();
    events.sort_by_key(|(tick, _)| *tick);
    let last_tick = events.last().map_or(0, |(t, _)| *t);

    let mut rec = Recorder {
        messages: Vec::new(),
        computations: Vec::new(),
    };
    let mut store = CloudStore::new();
    let mut reports = Vec::new();
    let mut pending = events.into_iter().peekable();

    let end = if cfg.duration_ticks == 0 && pending.peek().is_none() {
        0
    } else {
        cfg.duration_ticks.max(last_tick + 1)
    };
    for tick in 0..end {
        if tick < cfg.duration_ticks {
            for s in &sensors {
                match strategy {
                    Strategy::Qcps => {
                        rec.record(tick, net.route_report(&s.id)?);
                        store.ingest(generate_readings(s, tick, cfg.seed, &cfg.reading_ranges))?;
                    }
                    Strategy::Flat => rec.record(tick, net.route_gateway_report(&s.id)?),
                }
            }
        }
        while let Some((_, event)) = pending.next_if(|(t, _)| *t == tick) {
            match (strategy, event) {
                (Strategy::Qcps, Event::Request(a, b)) => rec.record(tick, net.route_sensor_request(a, b)?),
                (Strategy::Flat, Event::Request(a, b)) => rec.record(tick, net.route_direct_request(a, b)?),
                (Strategy::Qcps, Event::Query(id, sq)) => {
                    let q = CentricQuery::new(id, sq.services.iter().copied(), Window::new(0, tick)?);
                    rec.record(tick, net.route_user_query(&q)?);
                    let report = answer_centric_query(&q, &store, cfg.segment_length, cfg.congestion)?;
                    reports.push((tick, report));
                }
                (Strategy::Flat, Event::Query(id, sq)) => {
                    let q = CentricQuery::new(id, sq.services.iter().copied(), Window::new(tick, tick)?);
                    let (route, polled) = net.route_polled_query(&q)?;
                    rec.record(tick, route);
                    let mut local = CloudStore::new();
                    for s in polled {
                        local.ingest(generate_readings(s, tick, cfg.seed, &cfg.reading_ranges))?;
                    }
                    let report = answer_centric_query(&q, &local, cfg.segment_length, cfg.congestion)?;
                    reports.push((tick, report));
                }
            }
        }
    }

    Ok(SimulationTrace {
        strategy,
        messages: rec.messages,
        computations: rec.computations,
        grids,
        reports,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostReport {
    pub strategy: Strategy,
    pub total_wireless_distance: f64,
    pub wireless_message_count: u64,
    pub infra_message_count: u64,
    pub cloud_op_count: u64,
    pub node_op_count: u64,
    pub monetized_total: f64,
}

impl CostReport {
    pub fn zero(strategy: Strategy) -> Self {
        CostReport {
            strategy,
            total_wireless_distance: 0.0,
            wireless_message_count: 0,
            infra_message_count: 0,
            cloud_op_count: 0,
            node_op_count: 0,
            monetized_total: 0.0,
        }
    }
}

/// Sums a trace into its cost components and prices them with `params`.
pub fn cost_of(trace: &SimulationTrace, params: &CostParams) -> CostReport {
    let mut c = CostReport::zero(trace.strategy);
    for m in &trace.messages {
        match m.medium {
            Medium::Wireless => {
                c.total_wireless_distance += m.wireless_distance;
                c.wireless_message_count += 1;
            }
            Medium::Infrastructure => c.infra_message_count += 1,
        }
    }
    for e in &trace.computations {
        match e.site {
            Site::Cloud => c.cloud_op_count += e.op_count,
            _ => c.node_op_count += e.op_count,
        }
    }
    c.monetized_total = params.wireless_cost_per_unit_distance * c.total_wireless_distance
        + params.infra_message_cost * c.infra_message_count as f64
        + params.computation_op_cost * (c.cloud_op_count + c.node_op_count) as f64;
    c
}

/// `qcps - flat` for every cost component.
#[derive(Debug, Clone, PartialEq)]
pub struct CostDelta {
    pub total_wireless_distance: f64,
    pub wireless_message_count: i64,
    pub infra_message_count: i64,
    pub cloud_op_count: i64,
    pub node_op_count: i64,
    pub monetized_total: f64,
}

impl CostDelta {
    pub fn between(qcps: &CostReport, flat: &CostReport) -> Self {
        let d = |a: u64, b: u64| a as i64 - b as i64;
        CostDelta {
            total_wireless_distance: qcps.total_wireless_distance - flat.total_wireless_distance,
            wireless_message_count: d(qcps.wireless_message_count, flat.wireless_message_count),
            infra_message_count: d(qcps.infra_message_count, flat.infra_message_count),
            cloud_op_count: d(qcps.cloud_op_count, flat.cloud_op_count),
            node_op_count: d(qcps.node_op_count, flat.node_op_count),
            monetized_total: qcps.monetized_total - flat.monetized_total,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub qcps_trace: SimulationTrace,
    pub flat_trace: SimulationTrace,
    pub qcps: CostReport,
    pub flat: CostReport,
    pub delta: CostDelta,
}

/// Runs both strategies on the same workload.
pub fn compare_strategies(cfg: &ScenarioConfig, workload: &Workload) -> Result<Comparison, Error> {
    let qcps_trace = run_scenario(cfg, workload, Strategy::Qcps)?;
    let flat_trace = run_scenario(cfg, workload, Strategy::Flat)?;
    let qcps = cost_of(&qcps_trace, &cfg.cost_params);
    let flat = cost_of(&flat_trace, &cfg.cost_params);
    let delta = CostDelta::between(&qcps, &flat);
    Ok(Comparison {
        qcps_trace,
        flat_trace,
        qcps,
        flat,
        delta,
    })
}
