//! Shipments and whole problem instances.
//!
//! An instance couples a service network with the shipments competing for
//! it, plus the two scalar knobs of the objective: `lambda` prices express
//! capacity-kilometres into the net income, and `big_m` is the logic
//! constant tying the admitted fraction to route usage.

use serde::{Deserialize, Serialize};

use crate::network::{validate_network, NodeId, ServiceNetwork, Violation};

/// Opaque shipment identifier, unique within an instance.
#[derive(
    Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct ShipmentId(pub String);

impl ShipmentId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for ShipmentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ShipmentId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

/// A batch of cars wanting to move from `origin` to `destination` before its
/// due date. Admission may be partial; revenue scales with admitted cars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Shipment {
    pub id: ShipmentId,
    pub origin: NodeId,
    pub destination: NodeId,
    pub volume_cars: f64,
    pub revenue_per_car: f64,
    pub due_date_h: f64,
}

impl Shipment {
    /// Revenue of full admission, the shipment's weight in the objective.
    pub fn full_revenue(&self) -> f64 {
        self.revenue_per_car * self.volume_cars
    }
}

/// A complete car-to-train assignment problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub network: ServiceNetwork,
    pub shipments: Vec<Shipment>,
    /// Price per express capacity-km charged against gross revenue.
    pub lambda: f64,
    /// Logic constant linking admitted fraction and route usage; also the
    /// reciprocal of the smallest admissible fraction.
    pub big_m: f64,
}

/// Both sides of the express operating cost identity: the capacity-km price
/// and the per-train cost ledger must describe the same money.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpressCostReport {
    /// lambda times summed capacity·length over express arcs.
    pub capacity_km_cost: f64,
    /// Summed fixed plus per-km running cost over express trains.
    pub train_ledger_cost: f64,
    /// capacity_km_cost − train_ledger_cost.
    pub discrepancy: f64,
}

/// The constant express operating term of the objective, computed both ways.
/// The capacity-km side is the one subtracted from gross revenue.
pub fn fixed_express_cost(inst: &Instance) -> ExpressCostReport {
    let capacity_km_cost: f64 = inst.lambda
        * inst
            .network
            .arcs()
            .iter()
            .filter(|a| a.class.is_express())
            .filter_map(|a| a.capacity.cars().map(|c| c * a.length_km))
            .sum::<f64>();
    let train_ledger_cost: f64 = inst
        .network
        .express_trains()
        .iter()
        .map(|t| t.fixed_cost + t.per_km_cost * t.route_length_km)
        .sum();
    ExpressCostReport {
        capacity_km_cost,
        train_ledger_cost,
        discrepancy: capacity_km_cost - train_ledger_cost,
    }
}

/// Network violations plus shipment- and parameter-level rules, in one list.
pub fn validate_instance(inst: &Instance) -> Vec<Violation> {
    let mut out = validate_network(&inst.network);

    let mut seen = std::collections::BTreeMap::new();
    for s in &inst.shipments {
        if seen.insert(s.id.clone(), ()).is_some() {
            out.push(Violation::new(s.id.as_str(), "duplicate shipment id"));
        }
        if s.origin == s.destination {
            out.push(Violation::new(
                s.id.as_str(),
                "origin and destination must differ",
            ));
        }
        for (role, node) in [("origin", &s.origin), ("destination", &s.destination)] {
            if inst.network.node(node).is_none() {
                out.push(Violation::new(
                    s.id.as_str(),
                    format!("{role} references unknown node {node}"),
                ));
            }
        }
        if !(s.volume_cars > 0.0) {
            out.push(Violation::new(s.id.as_str(), "volume must be positive"));
        }
        if !(s.revenue_per_car >= 0.0) {
            out.push(Violation::new(
                s.id.as_str(),
                "revenue per car must be non-negative",
            ));
        }
        if !(s.due_date_h > 0.0) {
            out.push(Violation::new(s.id.as_str(), "due date must be positive"));
        }
    }

    if !(inst.lambda >= 0.0) {
        out.push(Violation::new("params", "lambda must be non-negative"));
    }
    if !(inst.big_m > 0.0) {
        out.push(Violation::new("params", "big_m must be positive"));
    }

    out
}
