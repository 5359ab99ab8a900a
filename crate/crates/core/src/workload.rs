//! Seeded generation of sensor readings and of the query/request workload.
//!
//! Every draw comes from a ChaCha stream keyed by `(seed, identity, tick)`,
//! so a value never depends on what else was generated before it.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cloud::{Payload, Reading, Service};
use crate::error::Error;
use crate::topology::{ScenarioConfig, SensorNode, SensorType};

/// Sampling ranges for synthetic readings. Bounds are inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadingRanges {
    pub speed: (f64, f64),
    pub temperature: (f64, f64),
    pub humidity: (f64, f64),
    pub light: (f64, f64),
    pub distorted_probability: f64,
    pub vehicle_count_max: u32,
    pub crash_probability: f64,
}

impl Default for ReadingRanges {
    fn default() -> Self {
        ReadingRanges {
            speed: (5.0, 35.0),
            temperature: (-5.0, 45.0),
            humidity: (10.0, 95.0),
            light: (0.0, 1000.0),
            distorted_probability: 0.1,
            vehicle_count_max: 40,
            crash_probability: 0.01,
        }
    }
}

impl ReadingRanges {
    pub fn validate(&self) -> Result<(), String> {
        for (name, (lo, hi)) in [
            ("speed", self.speed),
            ("temperature", self.temperature),
            ("humidity", self.humidity),
            ("light", self.light),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(format!("{name} range [{lo}, {hi}] is not a finite interval"));
            }
        }
        if self.speed.0 <= 0.0 {
            return Err("speed range must be positive".into());
        }
        if self.humidity.0 < 0.0 || self.humidity.1 > 100.0 {
            return Err("humidity range must lie in [0, 100]".into());
        }
        if self.light.0 < 0.0 {
            return Err("light range must be non-negative".into());
        }
        for (name, p) in [
            ("distorted_probability", self.distorted_probability),
            ("crash_probability", self.crash_probability),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("{name} {p} not in [0, 1]"));
            }
        }
        Ok(())
    }
}

fn fnv1a(bytes: &[u8], basis: u64) -> u64 {
    bytes.iter().fold(basis, |h, &b| (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3))
}

/// A ChaCha8 generator whose key mixes `seed` with `label` and whose stream
/// number is `stream`.
pub fn keyed_rng(seed: u64, label: &str, stream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&fnv1a(label.as_bytes(), 0xcbf2_9ce4_8422_2325).to_le_bytes());
    key[16..24].copy_from_slice(&fnv1a(label.as_bytes(), 0x6c62_272e_07bb_0142).to_le_bytes());
    key[24..32].copy_from_slice(&(label.len() as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

/// The reading `sensor` reports at `tick`.
pub fn generate_readings(sensor: &SensorNode, tick: u64, seed: u64, ranges: &ReadingRanges) -> Reading {
    let mut rng = keyed_rng(seed, &format!("reading/{}", sensor.id), tick);
    let payload = match sensor.sensor_type {
        SensorType::Vision => Payload::Vision {
            lane_count: rng.gen_range(1..=2),
            distorted: rng.gen_bool(ranges.distorted_probability),
        },
        SensorType::Speed => Payload::Speed {
            vehicle_speed: uniform(&mut rng, ranges.speed),
        },
        SensorType::Environment => Payload::Environment {
            temperature: uniform(&mut rng, ranges.temperature),
            humidity: uniform(&mut rng, ranges.humidity),
            light: uniform(&mut rng, ranges.light),
        },
        SensorType::Miscellaneous => Payload::Miscellaneous {
            vehicle_count: rng.gen_range(0..=ranges.vehicle_count_max),
            crash: rng.gen_bool(ranges.crash_probability),
        },
    };
    Reading {
        sensor_id: sensor.id.clone(),
        tick,
        payload,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduledQuery {
    pub tick: u64,
    pub services: BTreeSet<Service>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduledRequest {
    pub tick: u64,
    pub requester: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Workload {
    pub queries: Vec<ScheduledQuery>,
    pub requests: Vec<ScheduledRequest>,
}

impl Workload {
    pub fn is_empty(&self) -> bool {
        self.queries.is_empty() && self.requests.is_empty()
    }

    /// Checks the workload against a scenario: ticks may not exceed the run
    /// length and every id must name a sensor.
    pub fn validate(&self, cfg: &ScenarioConfig) -> Result<(), Error> {
        for (i, q) in self.queries.iter().enumerate() {
            if q.tick > cfg.duration_ticks {
                return Err(Error::InvalidWorkload(format!(
                    "queries[{i}].tick {} beyond duration {}",
                    q.tick, cfg.duration_ticks
                )));
            }
            if q.services.is_empty() {
                return Err(Error::InvalidQuery(format!("queries[{i}] requests no services")));
            }
        }
        for (i, r) in self.requests.iter().enumerate() {
            if r.tick > cfg.duration_ticks {
                return Err(Error::InvalidWorkload(format!(
                    "requests[{i}].tick {} beyond duration {}",
                    r.tick, cfg.duration_ticks
                )));
            }
            for id in [&r.requester, &r.target] {
                if cfg.sensor(id).is_none() {
                    return Err(Error::InvalidWorkload(format!("requests[{i}] names unknown sensor `{id}`")));
                }
            }
        }
        Ok(())
    }
}

/// Spreads `n_queries` four-service queries evenly over the run and draws
/// `n_requests` requests between distinct sensors at random ticks.
pub fn generate_workload(
    cfg: &ScenarioConfig,
    n_queries: usize,
    n_requests: usize,
    seed: u64,
) -> Result<Workload, Error> {
    if n_queries == 0 && n_requests == 0 {
        return Ok(Workload::default());
    }
    let duration = cfg.duration_ticks;
    if duration == 0 {
        return Err(Error::InvalidWorkload("events requested but duration is 0 ticks".into()));
    }

    let n = n_queries as u128;
    let queries = (0..n)
        .map(|i| ScheduledQuery {
            // Midpoints of n equal slices of [0, duration).
            tick: ((2 * i + 1) * u128::from(duration) / (2 * n)) as u64,
            services: Service::ALL.into_iter().collect(),
        })
        .collect();

    let mut requests = Vec::with_capacity(n_requests);
    if n_requests > 0 {
        let mut ids: Vec<&str> = cfg.sensors.iter().map(|s| s.id.as_str()).collect();
        ids.sort_unstable();
        if ids.len() < 2 {
            return Err(Error::InvalidWorkload("requests need at least two sensors".into()));
        }
        let mut rng = keyed_rng(seed, "workload/requests", 0);
        for _ in 0..n_requests {
            let tick = rng.gen_range(0..duration);
            let a = rng.gen_range(0..ids.len());
            // Shift past `a` so the pair is uniform over distinct sensors.
            let mut b = rng.gen_range(0..ids.len() - 1);
            if b >= a {
                b += 1;
            }
            requests.push(ScheduledRequest {
                tick,
                requester: ids[a].into(),
                target: ids[b].into(),
            });
        }
        requests.sort_by_key(|r| r.tick);
    }
    Ok(Workload { queries, requests })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::builtin_testbed;

    #[test]
    fn same_key_same_reading() {
        let cfg = builtin_testbed();
        let ranges = ReadingRanges::default();
        for s in &cfg.sensors {
            let a = generate_readings(s, 7, 42, &ranges);
            let b = generate_readings(s, 7, 42, &ranges);
            assert_eq!(a, b);
            assert_eq!(a.payload.sensor_type(), s.sensor_type);
        }
    }

    #[test]
    fn distinct_keys_differ() {
        let cfg = builtin_testbed();
        let ranges = ReadingRanges::default();
        let s = cfg.sensor("ES_1").unwrap();
        assert_ne!(generate_readings(s, 1, 42, &ranges), generate_readings(s, 2, 42, &ranges));
        assert_ne!(generate_readings(s, 1, 42, &ranges), generate_readings(s, 1, 43, &ranges));
    }

    #[test]
    fn empty_workload() {
        let w = generate_workload(&builtin_testbed(), 0, 0, 1).unwrap();
        assert!(w.is_empty());
    }

    #[test]
    fn workload_is_seeded() {
        let cfg = builtin_testbed();
        assert_eq!(
            generate_workload(&cfg, 20, 10, 42).unwrap(),
            generate_workload(&cfg, 20, 10, 42).unwrap()
        );
        assert_ne!(
            generate_workload(&cfg, 0, 10, 42).unwrap(),
            generate_workload(&cfg, 0, 10, 43).unwrap()
        );
    }

    #[test]
    fn requests_use_distinct_pairs() {
        let cfg = builtin_testbed();
        let w = generate_workload(&cfg, 0, 10, 42).unwrap();
        assert_eq!(w.requests.len(), 10);
        assert!(w.requests.iter().all(|r| r.requester != r.target));
        w.validate(&cfg).unwrap();
    }

    #[test]
    fn query_ticks_spread_over_duration() {
        let cfg = builtin_testbed();
        let w = generate_workload(&cfg, 20, 0, 42).unwrap();
        let ticks: Vec<u64> = w.queries.iter().map(|q| q.tick).collect();
        assert_eq!(ticks.len(), 20);
        assert_eq!(ticks[0], 2);
        assert_eq!(ticks[19], 97);
        assert!(ticks.windows(2).all(|p| p[1] - p[0] == 5));
        assert!(w.queries.iter().all(|q| q.services.len() == 4));
    }

    #[test]
    fn zero_duration_rejects_events() {
        let mut cfg = builtin_testbed();
        cfg.duration_ticks = 0;
        assert!(matches!(generate_workload(&cfg, 1, 0, 1), Err(Error::InvalidWorkload(_))));
        assert!(generate_workload(&cfg, 0, 0, 1).is_ok());
    }

    #[test]
    fn validate_rejects_unknown_ids() {
        let cfg = builtin_testbed();
        let w = Workload {
            queries: Vec::new(),
            requests: alloc::vec![ScheduledRequest { tick: 0, requester: "VS_1".into(), target: "XX".into() }],
        };
        assert!(matches!(w.validate(&cfg), Err(Error::InvalidWorkload(_))));
    }
}
