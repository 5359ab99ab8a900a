//! Property tests for grid formation, election, estimators and the simulator.

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use tis_core::cloud::{
    answer_centric_query, estimate_environment, estimate_velocity_travel_time, CentricQuery, CloudDatabase,
    CloudStore, CongestionThresholds, Payload, Reading, Service, Window,
};
use tis_core::grid::{elect_coordinator, form_grids, ElectionMethod};
use tis_core::sim::{cost_of, route_direct_request, route_sensor_request, run_scenario, Strategy as Run};
use tis_core::topology::{builtin_testbed, distance, Position, ScenarioConfig, SensorNode, SensorType};
use tis_core::workload::{generate_readings, generate_workload, ReadingRanges, ScheduledRequest, Workload};

fn euclid(a: &Position, b: &Position) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2) + (a.z - b.z).powi(2)).sqrt()
}

/// Repeated all-pairs relabelling until nothing changes.
fn closure_oracle(sensors: &[SensorNode], threshold: f64) -> BTreeSet<Vec<String>> {
    let mut label: Vec<usize> = (0..sensors.len()).collect();
    loop {
        let mut changed = false;
        for i in 0..sensors.len() {
            for j in 0..sensors.len() {
                let linked = sensors[i].sensor_type == sensors[j].sensor_type
                    && euclid(&sensors[i].position, &sensors[j].position) < threshold;
                if linked && label[i] != label[j] {
                    let (keep, drop) = (label[i].min(label[j]), label[i].max(label[j]));
                    label.iter_mut().filter(|l| **l == drop).for_each(|l| *l = keep);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (i, s) in sensors.iter().enumerate() {
        groups.entry(label[i]).or_default().push(s.id.clone());
    }
    groups
        .into_values()
        .map(|mut g| {
            g.sort();
            g
        })
        .collect()
}

fn argmin_oracle(members: &[&SensorNode]) -> String {
    let mut scored: Vec<(f64, &str)> = members
        .iter()
        .map(|m| {
            let total: f64 = members.iter().map(|o| euclid(&m.position, &o.position)).sum();
            (total, m.id.as_str())
        })
        .collect();
    scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(b.1)));
    scored[0].1.to_string()
}

fn sensor_type() -> impl Strategy<Value = SensorType> {
    prop_oneof![
        Just(SensorType::Vision),
        Just(SensorType::Speed),
        Just(SensorType::Environment),
        Just(SensorType::Miscellaneous),
    ]
}

fn position() -> impl Strategy<Value = Position> {
    (-100.0..100.0f64, -100.0..100.0f64, -100.0..100.0f64).prop_map(|(x, y, z)| Position::new(x, y, z))
}

/// Integer grid positions make exact ties and coincident nodes likely.
fn lattice_position() -> impl Strategy<Value = Position> {
    (0..4i32, 0..4i32, 0..2i32).prop_map(|(x, y, z)| Position::new(x.into(), y.into(), z.into()))
}

fn sensors(max: usize, pos: BoxedStrategy<Position>) -> impl Strategy<Value = Vec<SensorNode>> {
    prop::collection::vec((sensor_type(), pos), 0..=max).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (t, p))| SensorNode::new(format!("n{i:02}"), t, p))
            .collect()
    })
}

fn grid_members(set: &tis_core::grid::GridSet) -> BTreeSet<Vec<String>> {
    set.grids.iter().map(|g| g.members.clone()).collect()
}

proptest! {
    #[test]
    fn distance_is_a_metric(a in position(), b in position(), c in position()) {
        let ab = distance(&a, &b).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(ab, distance(&b, &a).unwrap());
        prop_assert_eq!(distance(&a, &a).unwrap(), 0.0);
        if a != b {
            prop_assert!(ab > 0.0);
        }
        let (ac, cb) = (distance(&a, &c).unwrap(), distance(&c, &b).unwrap());
        prop_assert!(ab <= ac + cb + 1e-9 * (1.0 + ab));
    }

    #[test]
    fn grids_match_closure_oracle(s in sensors(30, position().boxed()), threshold in 1.0..150.0f64) {
        let set = form_grids(&s, threshold).unwrap();
        prop_assert_eq!(grid_members(&set), closure_oracle(&s, threshold));
    }

    #[test]
    fn grids_partition_and_are_homogeneous(s in sensors(30, lattice_position().boxed()), threshold in 0.5..3.0f64) {
        let set = form_grids(&s, threshold).unwrap();
        let types: BTreeMap<&str, SensorType> = s.iter().map(|n| (n.id.as_str(), n.sensor_type)).collect();
        let mut seen = BTreeSet::new();
        for g in &set.grids {
            prop_assert!(!g.members.is_empty());
            prop_assert!(g.members.contains(&g.coordinator));
            for m in &g.members {
                prop_assert!(seen.insert(m.clone()), "{} in two grids", m);
                prop_assert_eq!(types[m.as_str()], g.sensor_type);
            }
        }
        prop_assert_eq!(seen.len(), s.len());
    }

    #[test]
    fn raising_threshold_only_coarsens(s in sensors(30, position().boxed()), t in 1.0..100.0f64, extra in 0.0..100.0f64) {
        let fine = form_grids(&s, t).unwrap();
        let coarse = form_grids(&s, t + extra).unwrap();
        prop_assert!(coarse.len() <= fine.len());
        for g in &fine.grids {
            let home = coarse.grid_of(&g.members[0]).unwrap();
            prop_assert!(g.members.iter().all(|m| home.contains(m)));
        }
    }

    #[test]
    fn threshold_limits(s in sensors(20, position().boxed())) {
        let present: BTreeSet<SensorType> = s.iter().map(|n| n.sensor_type).collect();
        prop_assert_eq!(form_grids(&s, 1e9).unwrap().len(), present.len());

        let min_positive = s.iter().enumerate()
            .flat_map(|(i, a)| s[i + 1..].iter().map(move |b| euclid(&a.position, &b.position)))
            .filter(|d| *d > 0.0)
            .fold(f64::INFINITY, f64::min);
        if min_positive.is_finite() {
            prop_assert_eq!(form_grids(&s, min_positive * 0.999).unwrap().len(), s.len());
        }
    }

    #[test]
    fn input_order_does_not_matter(s in sensors(25, lattice_position().boxed()), seed in any::<u64>(), t in 0.5..3.0f64) {
        let mut shuffled = s.clone();
        let n = shuffled.len();
        let mut x = seed;
        for i in (1..n).rev() {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (x >> 33) as usize % (i + 1));
        }
        prop_assert_eq!(form_grids(&s, t).unwrap(), form_grids(&shuffled, t).unwrap());
    }

    #[test]
    fn election_matches_argmin_oracle(s in sensors(20, lattice_position().boxed())) {
        // Single-type view so each grid can hold up to 20 members.
        let same: Vec<SensorNode> = s.into_iter().map(|mut n| { n.sensor_type = SensorType::Speed; n }).collect();
        let set = form_grids(&same, 100.0).unwrap();
        let index: BTreeMap<&str, &SensorNode> = same.iter().map(|n| (n.id.as_str(), n)).collect();
        for g in &set.grids {
            let members: Vec<&SensorNode> = g.members.iter().map(|m| index[m.as_str()]).collect();
            let (elected, method) = elect_coordinator(g, &index, None).unwrap();
            prop_assert_eq!(method, ElectionMethod::Medoid);
            prop_assert_eq!(&elected, &argmin_oracle(&members));
            prop_assert_eq!(&g.coordinator, &elected);
        }
    }

    #[test]
    fn means_stay_within_sample_range(speeds in prop::collection::vec(0.1..100.0f64, 1..40), segment in 0.1..10_000.0f64) {
        let mut sdb = CloudDatabase::new(SensorType::Speed);
        for (i, v) in speeds.iter().enumerate() {
            sdb.ingest(Reading { sensor_id: "s".into(), tick: i as u64, payload: Payload::Speed { vehicle_speed: *v } }).unwrap();
        }
        let est = estimate_velocity_travel_time(&sdb, Window::new(0, u64::MAX).unwrap(), segment).unwrap();
        let lo = speeds.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = speeds.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lo <= est.mean_speed && est.mean_speed <= hi);
        prop_assert!((est.travel_time_ticks * est.mean_speed - segment).abs() <= 1e-9 * segment);
    }

    #[test]
    fn environment_means_bounded(samples in prop::collection::vec((-50.0..50.0f64, 0.0..=100.0f64, 0.0..1000.0f64), 1..30)) {
        let mut edb = CloudDatabase::new(SensorType::Environment);
        for (i, (t, h, l)) in samples.iter().enumerate() {
            edb.ingest(Reading {
                sensor_id: format!("e{}", i % 4),
                tick: 0,
                payload: Payload::Environment { temperature: *t, humidity: *h, light: *l },
            }).unwrap();
        }
        let e = estimate_environment(&edb, Window::new(0, 0).unwrap()).unwrap();
        let within = |v: f64, xs: Vec<f64>| {
            xs.iter().cloned().fold(f64::INFINITY, f64::min) <= v && v <= xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        };
        prop_assert!(within(e.mean_temperature, samples.iter().map(|s| s.0).collect()));
        prop_assert!(within(e.mean_humidity, samples.iter().map(|s| s.1).collect()));
        prop_assert!(within(e.mean_light, samples.iter().map(|s| s.2).collect()));
    }

    #[test]
    fn report_sections_equal_requested(mask in 1u8..16, ticks in 0u64..4) {
        let cfg = builtin_testbed();
        let mut store = CloudStore::new();
        for t in 0..ticks {
            for s in &cfg.sensors {
                store.ingest(generate_readings(s, t, 1, &ReadingRanges::default())).unwrap();
            }
        }
        let services: BTreeSet<Service> = Service::ALL.into_iter().enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0).map(|(_, s)| s).collect();
        let q = CentricQuery::new(0, services.iter().copied(), Window::new(0, 10).unwrap());
        let report = answer_centric_query(&q, &store, 500.0, CongestionThresholds::default()).unwrap();
        prop_assert_eq!(report.sections.keys().copied().collect::<BTreeSet<_>>(), services);
        prop_assert!(report.sections.values().all(|s| s.data_available() == (ticks > 0)));
    }

    #[test]
    fn ingest_grows_exactly_one_table(ids in prop::collection::vec(0usize..5, 1..20)) {
        let mut db = CloudDatabase::new(SensorType::Miscellaneous);
        for (k, i) in ids.iter().enumerate() {
            let before: Vec<usize> = (0..5).map(|j| db.table(&format!("m{j}")).map_or(0, |t| t.len())).collect();
            db.ingest(Reading { sensor_id: format!("m{i}"), tick: k as u64, payload: Payload::Miscellaneous { vehicle_count: 1, crash: false } }).unwrap();
            let after: Vec<usize> = (0..5).map(|j| db.table(&format!("m{j}")).map_or(0, |t| t.len())).collect();
            for j in 0..5 {
                prop_assert_eq!(after[j], before[j] + usize::from(j == *i));
            }
        }
    }

    #[test]
    fn readings_independent_of_generation_order(tick in 0u64..1000, seed in any::<u64>(), warmup in 0usize..16) {
        let cfg = builtin_testbed();
        let ranges = ReadingRanges::default();
        let target = &cfg.sensors[5];
        let fresh = generate_readings(target, tick, seed, &ranges);
        for s in cfg.sensors.iter().take(warmup) {
            generate_readings(s, tick + 1, seed, &ranges);
        }
        prop_assert_eq!(generate_readings(target, tick, seed, &ranges), fresh);
    }

    #[test]
    fn flat_costs_ignore_threshold(t1 in 0.01..500.0f64, t2 in 0.01..500.0f64, seed in 0u64..50) {
        let mut cfg = builtin_testbed();
        cfg.duration_ticks = 10;
        let w = generate_workload(&cfg, 3, 5, seed).unwrap();
        cfg.threshold = t1;
        let a = cost_of(&run_scenario(&cfg, &w, Run::Flat).unwrap(), &cfg.cost_params);
        cfg.threshold = t2;
        let b = cost_of(&run_scenario(&cfg, &w, Run::Flat).unwrap(), &cfg.cost_params);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn qcps_keeps_computation_in_the_cloud(threshold in 1.0..200.0f64, seed in 0u64..50) {
        let mut cfg = builtin_testbed();
        cfg.duration_ticks = 8;
        cfg.threshold = threshold;
        let w = generate_workload(&cfg, 4, 6, seed).unwrap();
        let q = run_scenario(&cfg, &w, Run::Qcps).unwrap();
        let f = run_scenario(&cfg, &w, Run::Flat).unwrap();
        prop_assert_eq!(cost_of(&q, &cfg.cost_params).node_op_count, 0);
        prop_assert_eq!(cost_of(&f, &cfg.cost_params).cloud_op_count, 0);
        // Query paths never use radio.
        use tis_core::sim::{Medium, Purpose};
        prop_assert!(q.messages.iter().filter(|m| matches!(m.purpose, Purpose::Query | Purpose::Answer)).all(|m| m.medium == Medium::Infrastructure));
    }

    #[test]
    fn per_request_dominance(a in 0usize..16, b in 0usize..16, threshold in 1.0..200.0f64) {
        prop_assume!(a != b);
        let mut cfg = builtin_testbed();
        cfg.threshold = threshold;
        let (req, tgt) = (cfg.sensors[a].id.clone(), cfg.sensors[b].id.clone());
        let grids = form_grids(&cfg.sensors, threshold).unwrap();
        let coord = grids.coordinator_of(&req).unwrap().to_string();
        let pos = |id: &str| cfg.sensor(id).unwrap().position;
        let via_coord = 2.0 * euclid(&pos(&req), &pos(&coord));
        let direct = 2.0 * euclid(&pos(&req), &pos(&tgt));
        let q = route_sensor_request(&req, &tgt, &grids, &cfg).unwrap().wireless_distance();
        let f = route_direct_request(&req, &tgt, &cfg).unwrap().wireless_distance();
        prop_assert!((q - via_coord).abs() < 1e-9 && (f - direct).abs() < 1e-9);
        if grids.grid_of(&req) != grids.grid_of(&tgt) && via_coord < direct {
            prop_assert!(q < f);
        }
    }
}

#[test]
fn humidity_samples_stay_in_range() {
    let cfg = builtin_testbed();
    let ranges = ReadingRanges::default();
    let env: Vec<&SensorNode> = cfg.sensors.iter().filter(|s| s.sensor_type == SensorType::Environment).collect();
    let mut n = 0;
    for tick in 0..2500 {
        for s in &env {
            match generate_readings(s, tick, 42, &ranges).payload {
                Payload::Environment { humidity, temperature, light } => {
                    assert!((10.0..=95.0).contains(&humidity));
                    assert!((-5.0..=45.0).contains(&temperature));
                    assert!((0.0..=1000.0).contains(&light));
                }
                other => panic!("wrong payload {other:?}"),
            }
            n += 1;
        }
    }
    assert_eq!(n, 10_000);
}

#[test]
fn generated_values_within_ranges() {
    let cfg = builtin_testbed();
    let r = ReadingRanges::default();
    for tick in 0..500 {
        for s in &cfg.sensors {
            match generate_readings(s, tick, 7, &r).payload {
                Payload::Vision { lane_count, .. } => assert!(lane_count == 1 || lane_count == 2),
                Payload::Speed { vehicle_speed } => assert!((5.0..=35.0).contains(&vehicle_speed)),
                Payload::Miscellaneous { vehicle_count, .. } => assert!(vehicle_count <= 40),
                Payload::Environment { .. } => {}
            }
        }
    }
}

#[test]
fn traces_are_deterministic() {
    let cfg = builtin_testbed();
    let w = generate_workload(&cfg, 20, 10, 42).unwrap();
    for strategy in [Run::Qcps, Run::Flat] {
        assert_eq!(run_scenario(&cfg, &w, strategy).unwrap(), run_scenario(&cfg, &w, strategy).unwrap());
    }
}

#[test]
fn requester_equal_to_target_is_routable() {
    let mut cfg: ScenarioConfig = builtin_testbed();
    cfg.duration_ticks = 1;
    let w = Workload {
        queries: Vec::new(),
        requests: vec![ScheduledRequest { tick: 0, requester: "SS_1".into(), target: "SS_1".into() }],
    };
    let t = run_scenario(&cfg, &w, Run::Qcps).unwrap();
    assert_eq!(cost_of(&t, &cfg.cost_params).cloud_op_count, 1);
}
