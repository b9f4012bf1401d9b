//! Service network model: nodes, directed service arcs, transfer semantics.
//!
//! Arcs are *train services*, not tracks: an express train running
//! A → B → C with a block swap at B contributes two arcs that share an
//! `express_train_id`. Two arcs `m`, `n` are adjacent when `m` ends where
//! `n` starts; moving cars across that junction is either a full
//! reclassification (at a yard hump) or a block swap (intact car group,
//! same express train, at a logistics center).

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

macro_rules! id_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }
    };
}

id_type!(
    /// Opaque node identifier, unique within a network.
    NodeId
);
id_type!(
    /// Opaque service-arc identifier, unique within a network.
    ArcId
);
id_type!(
    /// Opaque express-train identifier, unique within a network.
    TrainId
);

/// What kind of station a node is; decides what a transfer there costs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    ClassificationYard,
    LogisticsCenter,
    EnterpriseSiding,
}

/// A station in the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
    /// Human-readable label; the id stays machine-friendly.
    pub name: String,
}

/// Service class of an arc. Express arcs run on a schedule and belong to a
/// declared express train; the other three are unscheduled regular services.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArcClass {
    Local,
    Shuttle,
    Through,
    Express,
}

impl ArcClass {
    pub fn is_express(self) -> bool {
        matches!(self, ArcClass::Express)
    }
}

/// Per-arc car capacity. Regular services may advertise unlimited slack
/// ("the railway will run another section"); express arcs never do.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Capacity {
    Cars(f64),
    Unbounded,
}

impl Capacity {
    /// Finite value if bounded.
    pub fn cars(self) -> Option<f64> {
        match self {
            Capacity::Cars(c) => Some(c),
            Capacity::Unbounded => None,
        }
    }

    pub fn is_unbounded(self) -> bool {
        matches!(self, Capacity::Unbounded)
    }
}

impl Serialize for Capacity {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        match self {
            Capacity::Cars(c) => ser.serialize_f64(*c),
            Capacity::Unbounded => ser.serialize_str("unbounded"),
        }
    }
}

impl<'de> Deserialize<'de> for Capacity {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = Capacity;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a car count or the string \"unbounded\"")
            }

            fn visit_f64<E: serde::de::Error>(self, v: f64) -> Result<Capacity, E> {
                Ok(Capacity::Cars(v))
            }

            fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<Capacity, E> {
                Ok(Capacity::Cars(v as f64))
            }

            fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<Capacity, E> {
                Ok(Capacity::Cars(v as f64))
            }

            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<Capacity, E> {
                if v == "unbounded" {
                    Ok(Capacity::Unbounded)
                } else {
                    Err(E::invalid_value(serde::de::Unexpected::Str(v), &self))
                }
            }
        }
        de.deserialize_any(V)
    }
}

/// A directed train service between two stations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceArc {
    pub id: ArcId,
    /// Start node (where the service departs).
    pub head: NodeId,
    /// End node (where the service terminates).
    pub tail: NodeId,
    pub class: ArcClass,
    pub capacity: Capacity,
    pub length_km: f64,
    pub travel_time_h: f64,
    /// Present exactly when `class` is express.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub express_train_id: Option<TrainId>,
}

/// The two ways cars change trains at a junction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransferKind {
    /// Full re-sorting over a yard hump.
    Reclassification,
    /// An intact car group moved between sections of the same express train
    /// during its scheduled stop at a logistics center.
    BlockSwap,
}

/// Fallback transfer durations by kind, used when no pair-specific entry
/// exists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferDefaults {
    pub reclassification_h: f64,
    pub block_swap_h: f64,
}

/// Transfer durations: per-pair overrides on top of per-kind defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferTable {
    pub defaults: TransferDefaults,
    pub overrides: BTreeMap<(ArcId, ArcId), f64>,
}

/// A scheduled express train; its service arcs reference it by id.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpressTrain {
    pub id: TrainId,
    pub fixed_cost: f64,
    pub per_km_cost: f64,
    /// Whole-route length; must equal the summed lengths of the train's arcs.
    pub route_length_km: f64,
}

/// An immutable service network. Lookups by id are index-backed; the stored
/// `nodes`/`arcs` order is preserved everywhere it shows (model rows, files).
#[derive(Debug, Clone, PartialEq)]
pub struct ServiceNetwork {
    nodes: Vec<Node>,
    arcs: Vec<ServiceArc>,
    transfers: TransferTable,
    express_trains: Vec<ExpressTrain>,
    node_index: BTreeMap<NodeId, usize>,
    arc_index: BTreeMap<ArcId, usize>,
}

impl ServiceNetwork {
    /// Assembles a network without judging it; run [`validate_network`] to
    /// learn what is wrong with it. On duplicate ids the first entry wins
    /// for lookups and validation reports the duplicates.
    pub fn new(
        nodes: Vec<Node>,
        arcs: Vec<ServiceArc>,
        transfers: TransferTable,
        express_trains: Vec<ExpressTrain>,
    ) -> Self {
        let mut node_index = BTreeMap::new();
        for (i, n) in nodes.iter().enumerate() {
            node_index.entry(n.id.clone()).or_insert(i);
        }
        let mut arc_index = BTreeMap::new();
        for (i, a) in arcs.iter().enumerate() {
            arc_index.entry(a.id.clone()).or_insert(i);
        }
        Self {
            nodes,
            arcs,
            transfers,
            express_trains,
            node_index,
            arc_index,
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn arcs(&self) -> &[ServiceArc] {
        &self.arcs
    }

    pub fn transfers(&self) -> &TransferTable {
        &self.transfers
    }

    pub fn express_trains(&self) -> &[ExpressTrain] {
        &self.express_trains
    }

    pub fn node(&self, id: &NodeId) -> Option<&Node> {
        self.node_index.get(id).map(|&i| &self.nodes[i])
    }

    pub fn arc(&self, id: &ArcId) -> Option<&ServiceArc> {
        self.arc_index.get(id).map(|&i| &self.arcs[i])
    }

    pub fn express_train(&self, id: &TrainId) -> Option<&ExpressTrain> {
        self.express_trains.iter().find(|t| &t.id == id)
    }

    /// Arcs of one express train, in stored order.
    pub fn train_arcs(&self, id: &TrainId) -> Vec<&ServiceArc> {
        self.arcs
            .iter()
            .filter(|a| a.express_train_id.as_ref() == Some(id))
            .collect()
    }
}

/// A single broken rule, naming the offending entity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    /// Id (or id pair) of the entity at fault.
    pub entity: String,
    /// What rule it breaks.
    pub rule: String,
}

impl Violation {
    pub fn new(entity: impl Into<String>, rule: impl Into<String>) -> Self {
        Self {
            entity: entity.into(),
            rule: rule.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.entity, self.rule)
    }
}

/// Tolerance for the route-length bookkeeping check, in km.
const ROUTE_LENGTH_TOL_KM: f64 = 1e-9;

/// Checks every structural rule and returns all violations (empty means the
/// network is well-formed). Never panics on bad data.
pub fn validate_network(net: &ServiceNetwork) -> Vec<Violation> {
    let mut out = Vec::new();

    let mut seen_nodes = BTreeMap::new();
    for n in net.nodes() {
        if seen_nodes.insert(n.id.clone(), ()).is_some() {
            out.push(Violation::new(n.id.as_str(), "duplicate node id"));
        }
    }

    let mut seen_arcs = BTreeMap::new();
    for a in net.arcs() {
        if seen_arcs.insert(a.id.clone(), ()).is_some() {
            out.push(Violation::new(a.id.as_str(), "duplicate arc id"));
        }
        if a.head == a.tail {
            out.push(Violation::new(a.id.as_str(), "arc starts and ends at the same node"));
        }
        for end in [&a.head, &a.tail] {
            if net.node(end).is_none() {
                out.push(Violation::new(
                    a.id.as_str(),
                    format!("references unknown node {end}"),
                ));
            }
        }
        if !(a.length_km > 0.0) {
            out.push(Violation::new(a.id.as_str(), "length must be positive"));
        }
        if !(a.travel_time_h > 0.0) {
            out.push(Violation::new(a.id.as_str(), "travel time must be positive"));
        }
        if let Capacity::Cars(c) = a.capacity {
            if !(c >= 0.0) {
                out.push(Violation::new(a.id.as_str(), "capacity must be non-negative"));
            }
        }
        match (&a.class, &a.express_train_id) {
            (ArcClass::Express, None) => out.push(Violation::new(
                a.id.as_str(),
                "express arc without an express_train_id",
            )),
            (ArcClass::Express, Some(t)) => {
                if net.express_train(t).is_none() {
                    out.push(Violation::new(
                        a.id.as_str(),
                        format!("references undeclared express train {t}"),
                    ));
                }
            }
            (_, Some(_)) => out.push(Violation::new(
                a.id.as_str(),
                "non-express arc carries an express_train_id",
            )),
            (_, None) => {}
        }
        if a.class.is_express() && a.capacity.is_unbounded() {
            out.push(Violation::new(
                a.id.as_str(),
                "express arcs must have bounded capacity",
            ));
        }
    }

    let mut seen_trains = BTreeMap::new();
    for t in net.express_trains() {
        if seen_trains.insert(t.id.clone(), ()).is_some() {
            out.push(Violation::new(t.id.as_str(), "duplicate express train id"));
        }
        if !(t.fixed_cost >= 0.0) {
            out.push(Violation::new(t.id.as_str(), "fixed cost must be non-negative"));
        }
        if !(t.per_km_cost >= 0.0) {
            out.push(Violation::new(t.id.as_str(), "per-km cost must be non-negative"));
        }
        let arcs = net.train_arcs(&t.id);
        if arcs.is_empty() {
            out.push(Violation::new(t.id.as_str(), "express train has no service arcs"));
            continue;
        }
        // One connected head-to-tail run: each arc starts where the previous
        // one ended, in stored order.
        for pair in arcs.windows(2) {
            if pair[0].tail != pair[1].head {
                out.push(Violation::new(
                    t.id.as_str(),
                    format!(
                        "train arcs do not chain: {} ends at {} but {} starts at {}",
                        pair[0].id, pair[0].tail, pair[1].id, pair[1].head
                    ),
                ));
            }
        }
        let total: f64 = arcs.iter().map(|a| a.length_km).sum();
        if (total - t.route_length_km).abs() > ROUTE_LENGTH_TOL_KM {
            out.push(Violation::new(
                t.id.as_str(),
                format!(
                    "route length {} does not match summed arc lengths {total}",
                    t.route_length_km
                ),
            ));
        }
    }

    let tr = net.transfers();
    if !(tr.defaults.reclassification_h >= 0.0) {
        out.push(Violation::new(
            "transfer defaults",
            "reclassification time must be non-negative",
        ));
    }
    if !(tr.defaults.block_swap_h >= 0.0) {
        out.push(Violation::new(
            "transfer defaults",
            "block swap time must be non-negative",
        ));
    }
    for ((m, n), &time) in &tr.overrides {
        let pair = format!("({m}, {n})");
        if !(time >= 0.0) {
            out.push(Violation::new(&pair, "transfer time must be non-negative"));
        }
        match (net.arc(m), net.arc(n)) {
            (Some(am), Some(an)) => {
                if am.tail != an.head {
                    out.push(Violation::new(
                        &pair,
                        "transfer entry for arcs that are not head-to-tail adjacent",
                    ));
                }
            }
            _ => out.push(Violation::new(&pair, "transfer entry references unknown arcs")),
        }
    }

    out
}

/// Error for transfer queries on arcs that do not meet.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("arcs {from} and {to} are not head-to-tail adjacent")]
pub struct NotAdjacent {
    pub from: ArcId,
    pub to: ArcId,
}

fn require_adjacent(m: &ServiceArc, n: &ServiceArc) -> Result<(), NotAdjacent> {
    if m.tail == n.head {
        Ok(())
    } else {
        Err(NotAdjacent {
            from: m.id.clone(),
            to: n.id.clone(),
        })
    }
}

/// What happens to cars moving from arc `m` onto arc `n`: a block swap when
/// both arcs belong to the same express train and they meet at a logistics
/// center; a full reclassification in every other case.
pub fn transfer_kind(
    net: &ServiceNetwork,
    m: &ServiceArc,
    n: &ServiceArc,
) -> Result<TransferKind, NotAdjacent> {
    require_adjacent(m, n)?;
    let same_train = match (&m.express_train_id, &n.express_train_id) {
        (Some(a), Some(b)) => a == b,
        _ => false,
    };
    let at_center = net
        .node(&m.tail)
        .map(|node| node.kind == NodeKind::LogisticsCenter)
        .unwrap_or(false);
    if same_train && at_center {
        Ok(TransferKind::BlockSwap)
    } else {
        Ok(TransferKind::Reclassification)
    }
}

/// Transfer duration for moving cars from `m` onto `n`: the pair-specific
/// entry when present, otherwise the default for the transfer's kind.
pub fn transfer_time(
    net: &ServiceNetwork,
    m: &ServiceArc,
    n: &ServiceArc,
) -> Result<f64, NotAdjacent> {
    if let Some(&t) = net.transfers().overrides.get(&(m.id.clone(), n.id.clone())) {
        require_adjacent(m, n)?;
        return Ok(t);
    }
    Ok(match transfer_kind(net, m, n)? {
        TransferKind::Reclassification => net.transfers().defaults.reclassification_h,
        TransferKind::BlockSwap => net.transfers().defaults.block_swap_h,
    })
}
