//! Instance and solution files, plus the bundled reference fixtures.
//!
//! Instances travel as JSON documents with dedicated file structs: unknown
//! keys are rejected, malformed values are reported with the path into the
//! document (`arcs[3].length_km`), and sign-domain mistakes (negative
//! lengths, zero volumes) are caught at parse time. Express train route
//! lengths are not stored; they are recomputed from the train's arcs so the
//! file cannot contradict itself. Semantic cross-checks (dangling node
//! references, broken train chains) stay with `validate_instance`.
//!
//! Saving always emits the canonical form: pretty-printed, fields in
//! declaration order, transfer overrides sorted. `load(save(x))` is
//! structurally `x`; `save(load(text))` is the canonical rendering of
//! `text`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{
    ArcId, Capacity, ExpressTrain, Node, ServiceArc, ServiceNetwork, TrainId, TransferDefaults,
    TransferTable,
};
use crate::shipment::{fixed_express_cost, Instance, Shipment, ShipmentId};
use crate::solver::{SolveStatus, Solution};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{pointer}: {message}")]
    Schema { pointer: String, message: String },
}

fn schema_err(pointer: impl Into<String>, message: impl Into<String>) -> IoError {
    IoError::Schema {
        pointer: pointer.into(),
        message: message.into(),
    }
}

/// One pair-specific transfer duration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileOverride {
    from: ArcId,
    to: ArcId,
    time_h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileTransfers {
    defaults: TransferDefaults,
    #[serde(default)]
    overrides: Vec<FileOverride>,
}

/// Express train as stored: the route length is derived, never written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileTrain {
    id: TrainId,
    fixed_cost: f64,
    per_km_cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileParams {
    lambda: f64,
    big_m: f64,
}

/// The instance document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    nodes: Vec<Node>,
    arcs: Vec<ServiceArc>,
    transfers: FileTransfers,
    #[serde(default)]
    express_trains: Vec<FileTrain>,
    #[serde(default)]
    shipments: Vec<Shipment>,
    params: FileParams,
}

/// Sign-domain rules enforced at parse time, each with a document path.
fn check_domains(file: &InstanceFile) -> Result<(), IoError> {
    for (i, arc) in file.arcs.iter().enumerate() {
        if !(arc.length_km > 0.0) {
            return Err(schema_err(format!("arcs[{i}].length_km"), "must be positive"));
        }
        if !(arc.travel_time_h > 0.0) {
            return Err(schema_err(
                format!("arcs[{i}].travel_time_h"),
                "must be positive",
            ));
        }
        if let Capacity::Cars(c) = arc.capacity {
            if !(c >= 0.0) {
                return Err(schema_err(
                    format!("arcs[{i}].capacity"),
                    "must be non-negative",
                ));
            }
        }
    }
    let d = &file.transfers.defaults;
    if !(d.reclassification_h >= 0.0) {
        return Err(schema_err(
            "transfers.defaults.reclassification_h",
            "must be non-negative",
        ));
    }
    if !(d.block_swap_h >= 0.0) {
        return Err(schema_err(
            "transfers.defaults.block_swap_h",
            "must be non-negative",
        ));
    }
    for (i, o) in file.transfers.overrides.iter().enumerate() {
        if !(o.time_h >= 0.0) {
            return Err(schema_err(
                format!("transfers.overrides[{i}].time_h"),
                "must be non-negative",
            ));
        }
    }
    for (i, t) in file.express_trains.iter().enumerate() {
        if !(t.fixed_cost >= 0.0) {
            return Err(schema_err(
                format!("express_trains[{i}].fixed_cost"),
                "must be non-negative",
            ));
        }
        if !(t.per_km_cost >= 0.0) {
            return Err(schema_err(
                format!("express_trains[{i}].per_km_cost"),
                "must be non-negative",
            ));
        }
    }
    for (i, s) in file.shipments.iter().enumerate() {
        if !(s.volume_cars > 0.0) {
            return Err(schema_err(
                format!("shipments[{i}].volume_cars"),
                "must be positive",
            ));
        }
        if !(s.revenue_per_car >= 0.0) {
            return Err(schema_err(
                format!("shipments[{i}].revenue_per_car"),
                "must be non-negative",
            ));
        }
        if !(s.due_date_h > 0.0) {
            return Err(schema_err(
                format!("shipments[{i}].due_date_h"),
                "must be positive",
            ));
        }
    }
    if !(file.params.lambda >= 0.0) {
        return Err(schema_err("params.lambda", "must be non-negative"));
    }
    if !(file.params.big_m > 0.0) {
        return Err(schema_err("params.big_m", "must be positive"));
    }
    Ok(())
}

fn file_to_instance(file: InstanceFile) -> Result<Instance, IoError> {
    check_domains(&file)?;

    let mut overrides = BTreeMap::new();
    for (i, o) in file.transfers.overrides.iter().enumerate() {
        if overrides
            .insert((o.from.clone(), o.to.clone()), o.time_h)
            .is_some()
        {
            return Err(schema_err(
                format!("transfers.overrides[{i}]"),
                format!("duplicate override for pair ({}, {})", o.from, o.to),
            ));
        }
    }

    let trains = file
        .express_trains
        .iter()
        .map(|t| ExpressTrain {
            id: t.id.clone(),
            fixed_cost: t.fixed_cost,
            per_km_cost: t.per_km_cost,
            route_length_km: file
                .arcs
                .iter()
                .filter(|a| a.express_train_id.as_ref() == Some(&t.id))
                .map(|a| a.length_km)
                .sum(),
        })
        .collect();

    Ok(Instance {
        network: ServiceNetwork::new(
            file.nodes,
            file.arcs,
            TransferTable {
                defaults: file.transfers.defaults,
                overrides,
            },
            trains,
        ),
        shipments: file.shipments,
        lambda: file.params.lambda,
        big_m: file.params.big_m,
    })
}

fn instance_to_file(inst: &Instance) -> InstanceFile {
    let net = &inst.network;
    InstanceFile {
        nodes: net.nodes().to_vec(),
        arcs: net.arcs().to_vec(),
        transfers: FileTransfers {
            defaults: net.transfers().defaults,
            overrides: net
                .transfers()
                .overrides
                .iter()
                .map(|((from, to), &time_h)| FileOverride {
                    from: from.clone(),
                    to: to.clone(),
                    time_h,
                })
                .collect(),
        },
        express_trains: net
            .express_trains()
            .iter()
            .map(|t| FileTrain {
                id: t.id.clone(),
                fixed_cost: t.fixed_cost,
                per_km_cost: t.per_km_cost,
            })
            .collect(),
        shipments: inst.shipments.clone(),
        params: FileParams {
            lambda: inst.lambda,
            big_m: inst.big_m,
        },
    }
}

/// Parses an instance document from JSON text. Errors carry the path to the
/// offending value within the document.
pub fn parse_instance(text: &str) -> Result<Instance, IoError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let file: InstanceFile = serde_path_to_error::deserialize(&mut de)
        .map_err(|e| schema_err(e.path().to_string(), e.inner().to_string()))?;
    file_to_instance(file)
}

/// Canonical JSON rendering of an instance.
pub fn render_instance(inst: &Instance) -> String {
    let mut text = serde_json::to_string_pretty(&instance_to_file(inst))
        .expect("instance serialization cannot fail");
    text.push('\n');
    text
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance, IoError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.to_owned(),
        source,
    })?;
    parse_instance(&text)
}

pub fn save_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<(), IoError> {
    let path = path.as_ref();
    std::fs::write(path, render_instance(inst)).map_err(|source| IoError::Write {
        path: path.to_owned(),
        source,
    })
}

/// The bundled reference network: two competing shipments, four strategy
/// families for the first and three for the second, one express train, and
/// capacities loose enough that everything fits.
pub fn figure1() -> Instance {
    parse_instance(include_str!("../fixtures/figure1.json")).expect("bundled fixture is valid")
}

/// The bundled bottleneck variant: same topology, but the direct through
/// arc is too small for both shipments together, the southern shuttles cap
/// the detour, and the express train is nearly full.
pub fn figure1_tight() -> Instance {
    parse_instance(include_str!("../fixtures/figure1_tight.json"))
        .expect("bundled fixture is valid")
}

/// A shipment's route in a solution file: a chain of arc ids, or rejected.
#[derive(Debug, Clone, PartialEq)]
pub enum RouteField {
    Rejected,
    Chain(Vec<ArcId>),
}

impl Serialize for RouteField {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        match self {
            RouteField::Rejected => ser.serialize_str("rejected"),
            RouteField::Chain(arcs) => arcs.serialize(ser),
        }
    }
}

impl<'de> Deserialize<'de> for RouteField {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> serde::de::Visitor<'de> for V {
            type Value = RouteField;

            fn expecting(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str("an array of arc ids or the string \"rejected\"")
            }

            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<RouteField, E> {
                if v == "rejected" {
                    Ok(RouteField::Rejected)
                } else {
                    Err(E::invalid_value(serde::de::Unexpected::Str(v), &self))
                }
            }

            fn visit_seq<A: serde::de::SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> Result<RouteField, A::Error> {
                let mut arcs = Vec::new();
                while let Some(id) = seq.next_element::<ArcId>()? {
                    arcs.push(id);
                }
                Ok(RouteField::Chain(arcs))
            }
        }
        de.deserialize_any(V)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShipmentOutcome {
    pub id: ShipmentId,
    pub chain: RouteField,
    pub xi: f64,
    pub admitted_cars: f64,
    pub time_used_h: f64,
    pub due_date_h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcUtilization {
    pub id: ArcId,
    pub flow_cars: f64,
    pub capacity: Capacity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveSection {
    pub gross: f64,
    pub express_constant: f64,
    pub net: f64,
    /// Capacity-km price side of the operating cost identity.
    pub eq10_lhs: f64,
    /// Per-train ledger side of the operating cost identity.
    pub eq10_rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub status: String,
    pub bound_gap: f64,
    pub nodes_explored: u64,
}

/// The solution document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    pub objective: ObjectiveSection,
    pub solver: SolverSection,
    pub shipments: Vec<ShipmentOutcome>,
    pub arcs: Vec<ArcUtilization>,
}

/// Renders a solved instance as a solution document: per-shipment outcomes,
/// per-arc loads, and the objective decomposition with both sides of the
/// operating cost identity.
pub fn solution_file(inst: &Instance, sol: &Solution) -> SolutionFile {
    let cost = fixed_express_cost(inst);

    let shipments: Vec<ShipmentOutcome> = inst
        .shipments
        .iter()
        .zip(&sol.assignments)
        .map(|(g, choice)| {
            debug_assert_eq!(g.id, choice.shipment);
            match &choice.chain {
                Some(chain) => ShipmentOutcome {
                    id: g.id.clone(),
                    chain: RouteField::Chain(chain.arcs.clone()),
                    xi: choice.xi,
                    admitted_cars: choice.xi * g.volume_cars,
                    time_used_h: chain.total_time_h,
                    due_date_h: g.due_date_h,
                },
                None => ShipmentOutcome {
                    id: g.id.clone(),
                    chain: RouteField::Rejected,
                    xi: 0.0,
                    admitted_cars: 0.0,
                    time_used_h: 0.0,
                    due_date_h: g.due_date_h,
                },
            }
        })
        .collect();

    let arcs: Vec<ArcUtilization> = inst
        .network
        .arcs()
        .iter()
        .map(|arc| {
            let flow_cars = inst
                .shipments
                .iter()
                .zip(&sol.assignments)
                .filter_map(|(g, choice)| {
                    choice.chain.as_ref().and_then(|chain| {
                        chain
                            .arcs
                            .contains(&arc.id)
                            .then_some(choice.xi * g.volume_cars)
                    })
                })
                .sum();
            ArcUtilization {
                id: arc.id.clone(),
                flow_cars,
                capacity: arc.capacity,
            }
        })
        .collect();

    SolutionFile {
        objective: ObjectiveSection {
            gross: sol.objective_gross,
            express_constant: cost.capacity_km_cost,
            net: sol.objective_net,
            eq10_lhs: cost.capacity_km_cost,
            eq10_rhs: cost.train_ledger_cost,
        },
        solver: SolverSection {
            status: match sol.status {
                SolveStatus::Optimal => "optimal".to_owned(),
                SolveStatus::InfeasibleTrivial => "infeasible-trivial".to_owned(),
                SolveStatus::Aborted => "aborted".to_owned(),
            },
            bound_gap: sol.bound_gap,
            nodes_explored: sol.nodes_explored,
        },
        shipments,
        arcs,
    }
}

pub fn parse_solution(text: &str) -> Result<SolutionFile, IoError> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de)
        .map_err(|e| schema_err(e.path().to_string(), e.inner().to_string()))
}

pub fn render_solution(sol: &SolutionFile) -> String {
    let mut text =
        serde_json::to_string_pretty(sol).expect("solution serialization cannot fail");
    text.push('\n');
    text
}

pub fn load_solution(path: impl AsRef<Path>) -> Result<SolutionFile, IoError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.to_owned(),
        source,
    })?;
    parse_solution(&text)
}

pub fn save_solution(sol: &SolutionFile, path: impl AsRef<Path>) -> Result<(), IoError> {
    let path = path.as_ref();
    std::fs::write(path, render_solution(sol)).map_err(|source| IoError::Write {
        path: path.to_owned(),
        source,
    })
}
