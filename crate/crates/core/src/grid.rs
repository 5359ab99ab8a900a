//! Threshold grid formation and coordinator election.
//!
//! Two sensors are linked when they have the same type and lie strictly
//! closer than the threshold; grids are the connected components of that
//! graph. Each grid's coordinator is its medoid, the member with the
//! smallest total distance to the other members, ties going to the
//! lexicographically smallest id.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::Error;
use crate::topology::{distance, SensorNode, SensorType};
use crate::union_find::DisjointSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElectionMethod {
    Medoid,
    Overridden,
}

impl ElectionMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ElectionMethod::Medoid => "medoid",
            ElectionMethod::Overridden => "overridden",
        }
    }
}

impl fmt::Display for ElectionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    /// `G_<n>`, numbered by ascending lowest member id.
    pub grid_id: String,
    pub sensor_type: SensorType,
    /// Sorted, non-empty.
    pub members: Vec<String>,
    pub coordinator: String,
    pub election: ElectionMethod,
}

impl Grid {
    pub fn contains(&self, id: &str) -> bool {
        self.members.binary_search_by(|m| m.as_str().cmp(id)).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GridSet {
    pub grids: Vec<Grid>,
}

impl GridSet {
    pub fn len(&self) -> usize {
        self.grids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grids.is_empty()
    }

    pub fn grid_of(&self, id: &str) -> Option<&Grid> {
        self.grids.iter().find(|g| g.contains(id))
    }

    pub fn coordinator_of(&self, id: &str) -> Option<&str> {
        self.grid_of(id).map(|g| g.coordinator.as_str())
    }

    /// Member id to coordinator id, for every member of every grid.
    pub fn coordinator_map(&self) -> BTreeMap<&str, &str> {
        self.grids
            .iter()
            .flat_map(|g| g.members.iter().map(move |m| (m.as_str(), g.coordinator.as_str())))
            .collect()
    }
}

/// Partitions `sensors` into grids and elects each grid's medoid.
///
/// Output is canonical: members are sorted and grids are ordered by their
/// lowest member id, so the result does not depend on input order.
pub fn form_grids(sensors: &[SensorNode], threshold: f64) -> Result<GridSet, Error> {
    let mut order: Vec<&SensorNode> = sensors.iter().collect();
    order.sort_by(|a, b| a.id.cmp(&b.id));

    let mut ds = DisjointSet::new(order.len());
    for i in 0..order.len() {
        for j in i + 1..order.len() {
            if order[i].sensor_type != order[j].sensor_type {
                continue;
            }
            if distance(&order[i].position, &order[j].position)? < threshold {
                ds.union(i, j);
            }
        }
    }

    // Roots in first-seen order over sorted ids give grids sorted by lowest member.
    let mut components: Vec<(usize, Vec<usize>)> = Vec::new();
    for i in 0..order.len() {
        let root = ds.find(i);
        match components.iter_mut().find(|(r, _)| *r == root) {
            Some((_, members)) => members.push(i),
            None => components.push((root, alloc::vec![i])),
        }
    }

    let index: BTreeMap<&str, &SensorNode> = order.iter().map(|s| (s.id.as_str(), *s)).collect();
    let mut grids = Vec::with_capacity(components.len());
    for (n, (_, members)) in components.into_iter().enumerate() {
        let mut grid = Grid {
            grid_id: format!("G_{}", n + 1),
            sensor_type: order[members[0]].sensor_type,
            members: members.iter().map(|&i| order[i].id.clone()).collect(),
            coordinator: String::new(),
            election: ElectionMethod::Medoid,
        };
        grid.coordinator = medoid(&grid, &index)?;
        grids.push(grid);
    }
    Ok(GridSet { grids })
}

fn medoid(grid: &Grid, sensors: &BTreeMap<&str, &SensorNode>) -> Result<String, Error> {
    let positions = grid
        .members
        .iter()
        .map(|m| {
            sensors
                .get(m.as_str())
                .map(|s| s.position)
                .ok_or_else(|| Error::UnknownSensor(m.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut best: Option<(usize, f64)> = None;
    for (i, p) in positions.iter().enumerate() {
        let mut total = 0.0;
        for q in &positions {
            total += distance(p, q)?;
        }
        // Members are sorted, so strict `<` keeps the smallest id on ties.
        if best.is_none_or(|(_, b)| total < b) {
            best = Some((i, total));
        }
    }
    best.map(|(i, _)| grid.members[i].clone())
        .ok_or_else(|| Error::InvalidQuery("grid has no members".to_string()))
}

/// Chooses the coordinator of `grid`.
///
/// An override wins when it names a member; naming anything else is an
/// error. Without an override the medoid is elected.
pub fn elect_coordinator(
    grid: &Grid,
    sensors: &BTreeMap<&str, &SensorNode>,
    override_id: Option<&str>,
) -> Result<(String, ElectionMethod), Error> {
    if let Some(id) = override_id {
        if grid.contains(id) {
            return Ok((id.to_string(), ElectionMethod::Overridden));
        }
        return Err(Error::InvalidOverride {
            sensor_type: grid.sensor_type,
            id: id.to_string(),
        });
    }
    Ok((medoid(grid, sensors)?, ElectionMethod::Medoid))
}

/// Applies per-type coordinator overrides to a formed grid set.
///
/// An override for a type only touches the grid of that type that contains
/// the named node; other grids of the type keep their medoid.
pub fn elect_all(
    mut grids: GridSet,
    sensors: &BTreeMap<&str, &SensorNode>,
    overrides: &BTreeMap<SensorType, String>,
) -> Result<GridSet, Error> {
    for (&t, id) in overrides {
        let grid = grids
            .grids
            .iter_mut()
            .find(|g| g.sensor_type == t && g.contains(id))
            .ok_or_else(|| Error::InvalidOverride {
                sensor_type: t,
                id: id.clone(),
            })?;
        let (coordinator, method) = elect_coordinator(grid, sensors, Some(id))?;
        grid.coordinator = coordinator;
        grid.election = method;
    }
    Ok(grids)
}
