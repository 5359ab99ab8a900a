//! Run reports in canonical form.
//!
//! Canonical JSON has sorted object keys, two-space indentation, integers
//! as integers and every float rendered with exactly six decimals, so the
//! bytes depend only on the values.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};
use tis_core::cloud::{EstimationReport, Section};
use tis_core::grid::GridSet;
use tis_core::sim::{Comparison, CostDelta, CostReport, SimulationTrace};
use tis_core::topology::ScenarioConfig;

use crate::config::config_value;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn format_float(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

/// Serializes `v` canonically, with a trailing newline.
pub fn canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, v: &Value, depth: usize) {
    let pad = |out: &mut String, d: usize| out.extend(std::iter::repeat_n("  ", d));
    match v {
        Value::Null | Value::Bool(_) | Value::String(_) => out.push_str(&v.to_string()),
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => write!(out, "{u}").unwrap(),
            (None, Some(i)) => write!(out, "{i}").unwrap(),
            _ => out.push_str(&format_float(n.as_f64().unwrap_or(0.0))),
        },
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(out, depth + 1);
                write_value(out, item, depth + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, depth);
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                pad(out, depth + 1);
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write_value(out, &map[*k], depth + 1);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            pad(out, depth);
            out.push('}');
        }
    }
}

pub fn cost_value(c: &CostReport) -> Value {
    json!({
        "strategy": c.strategy.as_str(),
        "total_wireless_distance": c.total_wireless_distance,
        "wireless_message_count": c.wireless_message_count,
        "infra_message_count": c.infra_message_count,
        "cloud_op_count": c.cloud_op_count,
        "node_op_count": c.node_op_count,
        "monetized_total": c.monetized_total,
    })
}

pub fn delta_value(d: &CostDelta) -> Value {
    json!({
        "total_wireless_distance": d.total_wireless_distance,
        "wireless_message_count": d.wireless_message_count,
        "infra_message_count": d.infra_message_count,
        "cloud_op_count": d.cloud_op_count,
        "node_op_count": d.node_op_count,
        "monetized_total": d.monetized_total,
    })
}

pub fn grids_value(grids: &GridSet) -> Value {
    grids
        .grids
        .iter()
        .map(|g| {
            json!({
                "grid_id": g.grid_id,
                "type": g.sensor_type.as_str(),
                "members": g.members,
                "coordinator": g.coordinator,
                "election": g.election.as_str(),
            })
        })
        .collect()
}

fn section_value(section: &Section) -> Value {
    let mut m = Map::new();
    m.insert("data_available".into(), section.data_available().into());
    let fields = match section {
        Section::RoadCondition(Some(r)) => json!({
            "distorted_fraction": r.distorted_fraction,
            "dominant_lane_count": r.dominant_lane_count,
        }),
        Section::VelocityTravelTime(Some(v)) => json!({
            "mean_speed": v.mean_speed,
            "travel_time_ticks": v.travel_time_ticks,
        }),
        Section::Environment(Some(e)) => json!({
            "mean_temperature": e.mean_temperature,
            "mean_humidity": e.mean_humidity,
            "mean_light": e.mean_light,
        }),
        Section::Congestion(Some(c)) => json!({
            "mean_vehicle_count": c.mean_vehicle_count,
            "congestion_level": c.congestion_level.as_str(),
            "any_crash": c.any_crash,
        }),
        _ => json!({}),
    };
    if let Value::Object(f) = fields {
        m.extend(f);
    }
    Value::Object(m)
}

pub fn estimation_value(tick: u64, r: &EstimationReport) -> Value {
    let sections: Map<String, Value> = r
        .sections
        .iter()
        .map(|(s, sec)| (s.as_str().to_string(), section_value(sec)))
        .collect();
    json!({ "query_id": r.query_id, "tick": tick, "sections": sections })
}

pub fn trace_value(trace: &SimulationTrace) -> Value {
    let messages: Vec<Value> = trace
        .messages
        .iter()
        .map(|m| {
            json!({
                "msg_id": m.msg_id,
                "tick": m.tick,
                "src": m.src.to_string(),
                "dst": m.dst.to_string(),
                "medium": m.medium.as_str(),
                "purpose": m.purpose.as_str(),
                "wireless_distance": m.wireless_distance,
            })
        })
        .collect();
    let computations: Vec<Value> = trace
        .computations
        .iter()
        .map(|c| json!({ "tick": c.tick, "site": c.site.to_string(), "op_count": c.op_count }))
        .collect();
    json!({
        "strategy": trace.strategy.as_str(),
        "messages": messages,
        "computations": computations,
        "grids": grids_value(&trace.grids),
        "reports": trace.reports.iter().map(|(t, r)| estimation_value(*t, r)).collect::<Vec<_>>(),
    })
}

/// The report of a single-strategy run.
pub fn run_report(cfg: &ScenarioConfig, trace: &SimulationTrace, cost: &CostReport) -> Value {
    let mut costs = Map::new();
    costs.insert(cost.strategy.as_str().into(), cost_value(cost));
    json!({
        "config": config_value(cfg),
        "grids": grids_value(&trace.grids),
        "costs": costs,
        "reports": trace.reports.iter().map(|(t, r)| estimation_value(*t, r)).collect::<Vec<_>>(),
        "version": VERSION,
        "seed": cfg.seed,
    })
}

/// Metrics where the cloud-mediated strategy comes out lower.
pub fn reduced_metrics(d: &CostDelta) -> Vec<&'static str> {
    delta_rows(d)
        .into_iter()
        .filter(|(_, v)| *v < 0.0)
        .map(|(k, _)| k)
        .collect()
}

fn delta_rows(d: &CostDelta) -> [(&'static str, f64); 6] {
    [
        ("total_wireless_distance", d.total_wireless_distance),
        ("wireless_message_count", d.wireless_message_count as f64),
        ("infra_message_count", d.infra_message_count as f64),
        ("cloud_op_count", d.cloud_op_count as f64),
        ("node_op_count", d.node_op_count as f64),
        ("monetized_total", d.monetized_total),
    ]
}

/// The report of a two-strategy comparison: the run report keys plus
/// `delta` (qcps minus flat) and the list of `reduced` metrics.
pub fn compare_report(cfg: &ScenarioConfig, cmp: &Comparison) -> Value {
    let reports: Map<String, Value> = [(&cmp.qcps_trace), (&cmp.flat_trace)]
        .into_iter()
        .map(|t| {
            let rs = t.reports.iter().map(|(tick, r)| estimation_value(*tick, r)).collect();
            (t.strategy.as_str().to_string(), Value::Array(rs))
        })
        .collect();
    json!({
        "config": config_value(cfg),
        "grids": grids_value(&cmp.qcps_trace.grids),
        "costs": { "qcps": cost_value(&cmp.qcps), "flat": cost_value(&cmp.flat) },
        "delta": delta_value(&cmp.delta),
        "reduced": reduced_metrics(&cmp.delta),
        "reports": reports,
        "version": VERSION,
        "seed": cfg.seed,
    })
}

const COST_HEADER: [&str; 7] = [
    "strategy",
    "total_wireless_distance",
    "wireless_message_count",
    "infra_message_count",
    "cloud_op_count",
    "node_op_count",
    "monetized_total",
];

fn cost_row(c: &CostReport) -> [String; 7] {
    [
        c.strategy.as_str().to_string(),
        format_float(c.total_wireless_distance),
        c.wireless_message_count.to_string(),
        c.infra_message_count.to_string(),
        c.cloud_op_count.to_string(),
        c.node_op_count.to_string(),
        format_float(c.monetized_total),
    ]
}

pub fn costs_csv(costs: &[&CostReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COST_HEADER).unwrap();
    for c in costs {
        w.write_record(cost_row(c)).unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

fn metric_rows(cmp: &Comparison) -> Vec<[String; 5]> {
    let (q, f) = (cost_row(&cmp.qcps), cost_row(&cmp.flat));
    delta_rows(&cmp.delta)
        .iter()
        .enumerate()
        .map(|(i, (name, d))| {
            let delta = if name.ends_with("_count") {
                format!("{}", *d as i64)
            } else {
                format_float(*d)
            };
            let label = if *d < 0.0 { "Reduced" } else { "" };
            [name.to_string(), q[i + 1].clone(), f[i + 1].clone(), delta, label.to_string()]
        })
        .collect()
}

pub fn compare_csv(cmp: &Comparison) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["metric", "qcps", "flat", "delta", "label"]).unwrap();
    for row in metric_rows(cmp) {
        w.write_record(row).unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

/// Human-readable comparison; rows where qcps is lower are labeled `Reduced`.
pub fn compare_table(cmp: &Comparison) -> String {
    let mut out = format!("{:<26}{:>16}{:>16}{:>16}\n", "metric", "qcps", "flat", "delta");
    for [name, q, f, d, label] in metric_rows(cmp) {
        let line = format!("{name:<26}{q:>16}{f:>16}{d:>16}  {label}");
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

pub fn grid_listing(grids: &GridSet) -> String {
    let mut out = String::new();
    for g in &grids.grids {
        writeln!(
            out,
            "{}\ttype={}\tmembers={}\tcoordinator={}\telection={}",
            g.grid_id,
            g.sensor_type,
            g.members.join(","),
            g.coordinator,
            g.election
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form() {
        let v = json!({"b": 1.5, "a": [1, -2, 0.1], "c": {"z": true, "y": null}, "d": [], "e": -0.0000001});
        assert_eq!(
            canonical_json(&v),
            "{\n  \"a\": [\n    1,\n    -2,\n    0.100000\n  ],\n  \"b\": 1.500000,\n  \"c\": {\n    \"y\": null,\n    \"z\": true\n  },\n  \"d\": [],\n  \"e\": 0.000000\n}\n"
        );
    }

    #[test]
    fn integral_floats_keep_decimals() {
        assert_eq!(canonical_json(&json!(5.0)), "5.000000\n");
        assert_eq!(canonical_json(&json!(5u64)), "5\n");
    }
}
