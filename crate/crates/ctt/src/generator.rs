//! Seeded random instance generation.
//!
//! Networks come out layered the same way the bundled fixture is: a west-east
//! line of classification yards joined by shuttle arcs, logistics centers
//! hanging off the yards, sparse long through arcs, one to three express
//! trains running center to center, and one enterprise siding per shipment
//! endpoint reached by local arcs. All drawn quantities are kept on coarse
//! decimal grids (integer kilometres aligned to the class speed, tenth-hour
//! travel times, half-hour transfer times) so every derived model number has
//! a short exact decimal form, and express train costs are constructed so the
//! capacity-km pricing of the express constant and the per-train cost ledger
//! agree to the last bit.
//!
//! Everything is drawn from one seeded stream in a fixed order, so equal
//! seeds give byte-identical instances.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::enumerate_chains;
use crate::network::{
    ArcClass, ArcId, Capacity, ExpressTrain, Node, NodeId, NodeKind, ServiceArc, ServiceNetwork,
    TransferDefaults, TransferTable,
};
use crate::shipment::{Instance, Shipment};

/// Express classes run at 160, 120, or 80 km/h; everything regular at 50.
const EXPRESS_SPEEDS_KMH: [f64; 3] = [160.0, 120.0, 80.0];
const REGULAR_SPEED_KMH: f64 = 50.0;

/// How generously due dates are drawn, as the share of shipments that end up
/// with at least one feasible chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// Roughly nine in ten shipments routable.
    Loose,
    /// Roughly three in four.
    Mixed,
    /// Roughly three in five.
    Tight,
}

impl Profile {
    pub fn feasible_share(self) -> f64 {
        match self {
            Profile::Loose => 0.9,
            Profile::Mixed => 0.75,
            Profile::Tight => 0.6,
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::Loose => "loose",
            Profile::Mixed => "mixed",
            Profile::Tight => "tight",
        })
    }
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "loose" => Ok(Profile::Loose),
            "mixed" => Ok(Profile::Mixed),
            "tight" => Ok(Profile::Tight),
            other => Err(format!(
                "unknown profile {other:?}; expected loose, mixed, or tight"
            )),
        }
    }
}

/// A kilometre count aligned to the class speed, so length/speed lands
/// exactly on a tenth of an hour.
fn aligned_length(rng: &mut ChaCha8Rng, speed_kmh: f64, tenths: std::ops::RangeInclusive<u32>) -> f64 {
    let unit = speed_kmh / 10.0;
    unit * rng.gen_range(tenths) as f64
}

fn regular_arc(
    id: usize,
    head: &NodeId,
    tail: &NodeId,
    class: ArcClass,
    capacity: Capacity,
    length_km: f64,
) -> ServiceArc {
    ServiceArc {
        id: format!("Arc{id}").as_str().into(),
        head: head.clone(),
        tail: tail.clone(),
        class,
        capacity,
        length_km,
        travel_time_h: length_km / REGULAR_SPEED_KMH,
        express_train_id: None,
    }
}

/// Ceiling / floor to one decimal, used to keep drawn due dates on the same
/// short-decimal grid as everything else.
fn ceil_tenth(x: f64) -> f64 {
    (x * 10.0).ceil() / 10.0
}

fn floor_tenth(x: f64) -> f64 {
    (x * 10.0).floor() / 10.0
}

/// Builds a pseudo-random valid instance. Equal arguments give identical
/// results, down to the serialized bytes. Sizes must all be at least one.
///
/// Yards form a line with two-way shuttle arcs; each center hangs off a yard
/// by a pair of local connectors; through arcs skip along the line; express
/// trains run over the centers (degenerating to yard–center hops when only
/// one center exists); every shipment gets its own origin and destination
/// sidings tied to the line by local arcs. Due dates are then drawn so that
/// the profile's share of shipments keeps at least one feasible chain and
/// the rest are due before their fastest possible chain.
pub fn generate(
    seed: u64,
    n_yards: usize,
    n_centers: usize,
    n_shipments: usize,
    profile: Profile,
) -> Instance {
    assert!(n_yards >= 1, "need at least one yard");
    assert!(n_centers >= 1, "need at least one center");
    assert!(n_shipments >= 1, "need at least one shipment");

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes: Vec<Node> = Vec::new();
    let mut arcs: Vec<ServiceArc> = Vec::new();
    let mut next_arc = 1usize;

    let yard_ids: Vec<NodeId> = (1..=n_yards)
        .map(|i| NodeId::from(format!("Y{i}").as_str()))
        .collect();
    for (i, id) in yard_ids.iter().enumerate() {
        nodes.push(Node {
            id: id.clone(),
            kind: NodeKind::ClassificationYard,
            name: format!("Classification yard {}", i + 1),
        });
    }

    // Center j sits on yard j mod n_yards.
    let center_ids: Vec<NodeId> = (1..=n_centers)
        .map(|j| NodeId::from(format!("P{j}").as_str()))
        .collect();
    let center_yard: Vec<usize> = (0..n_centers).map(|j| j % n_yards).collect();
    for (j, id) in center_ids.iter().enumerate() {
        nodes.push(Node {
            id: id.clone(),
            kind: NodeKind::LogisticsCenter,
            name: format!("Logistics center {}", j + 1),
        });
    }

    // Yard line: segment lengths west to east, then two-way shuttles.
    let segments: Vec<f64> = (0..n_yards.saturating_sub(1))
        .map(|_| aligned_length(&mut rng, REGULAR_SPEED_KMH, 16..=40))
        .collect();
    for (i, &len) in segments.iter().enumerate() {
        for (head, tail) in [
            (&yard_ids[i], &yard_ids[i + 1]),
            (&yard_ids[i + 1], &yard_ids[i]),
        ] {
            let cap = Capacity::Cars(5.0 * rng.gen_range(8..=24) as f64);
            arcs.push(regular_arc(next_arc, head, tail, ArcClass::Shuttle, cap, len));
            next_arc += 1;
        }
    }

    // Sparse through arcs skipping at least one yard.
    let mut through_budget = n_yards.max(2);
    'through: for i in 0..n_yards {
        for j in i + 2..n_yards {
            if rng.gen_range(0..10) < 3 {
                let len: f64 = segments[i..j].iter().sum();
                let cap = Capacity::Cars(5.0 * rng.gen_range(10..=30) as f64);
                arcs.push(regular_arc(
                    next_arc,
                    &yard_ids[i],
                    &yard_ids[j],
                    ArcClass::Through,
                    cap,
                    len,
                ));
                next_arc += 1;
                through_budget -= 1;
                if through_budget == 0 {
                    break 'through;
                }
            }
        }
    }

    // Local connectors between each center and its yard, both directions.
    for (j, center) in center_ids.iter().enumerate() {
        let yard = &yard_ids[center_yard[j]];
        let len = aligned_length(&mut rng, REGULAR_SPEED_KMH, 1..=6);
        for (head, tail) in [(center, yard), (yard, center)] {
            arcs.push(regular_arc(
                next_arc,
                head,
                tail,
                ArcClass::Local,
                Capacity::Unbounded,
                len,
            ));
            next_arc += 1;
        }
    }

    // Express trains: center-to-center runs when possible, otherwise a
    // yard–center hop so at least one scheduled service always exists.
    let n_trains = rng.gen_range(1..=3usize);
    let mut trains: Vec<ExpressTrain> = Vec::new();
    let mut train_arc_ids: Vec<Vec<ArcId>> = Vec::new();
    let mut overrides: BTreeMap<(ArcId, ArcId), f64> = BTreeMap::new();
    for t in 1..=n_trains {
        let train_id = format!("E{t}");
        let speed = EXPRESS_SPEEDS_KMH[rng.gen_range(0..EXPRESS_SPEEDS_KMH.len())];
        let stops: Vec<NodeId> = if n_centers >= 2 {
            let hops = rng.gen_range(2..=4usize.min(n_centers));
            let mut picked: Vec<usize> = (0..n_centers).collect();
            picked.shuffle(&mut rng);
            picked.truncate(hops);
            picked.sort_unstable();
            picked.iter().map(|&j| center_ids[j].clone()).collect()
        } else if n_yards >= 2 {
            let a = rng.gen_range(0..n_yards);
            let b = (a + 1 + rng.gen_range(0..n_yards - 1)) % n_yards;
            vec![yard_ids[a].clone(), center_ids[0].clone(), yard_ids[b].clone()]
        } else {
            vec![yard_ids[0].clone(), center_ids[0].clone()]
        };
        let mut ids = Vec::new();
        let mut route_length = 0.0;
        for pair in stops.windows(2) {
            let len = aligned_length(&mut rng, speed, 20..=45);
            let cap = 5.0 * rng.gen_range(4..=16) as f64;
            let arc_id = ArcId::from(format!("Arc{next_arc}").as_str());
            arcs.push(ServiceArc {
                id: arc_id.clone(),
                head: pair[0].clone(),
                tail: pair[1].clone(),
                class: ArcClass::Express,
                capacity: Capacity::Cars(cap),
                length_km: len,
                travel_time_h: len / speed,
                express_train_id: Some(train_id.as_str().into()),
            });
            next_arc += 1;
            route_length += len;
            ids.push(arc_id);
        }
        if ids.len() >= 2 && rng.gen_range(0..2) == 0 {
            // A faster-than-default block swap at the first junction.
            overrides.insert(
                (ids[0].clone(), ids[1].clone()),
                0.5 * rng.gen_range(2..=4) as f64,
            );
        }
        trains.push(ExpressTrain {
            id: train_id.as_str().into(),
            fixed_cost: 0.0,   // set once capacities are final
            per_km_cost: 0.0,  // set once capacities are final
            route_length_km: route_length,
        });
        train_arc_ids.push(ids);
    }

    // Shipments: a fresh origin and destination siding each, attached to the
    // yard line (sometimes through a center), never more than four yards
    // apart so an eight-arc chain always exists.
    let mut shipments: Vec<Shipment> = Vec::new();
    for g in 1..=n_shipments {
        let yard_o = rng.gen_range(0..n_yards);
        let delta = rng.gen_range(-4i64..=4);
        let yard_d = (yard_o as i64 + delta).clamp(0, n_yards as i64 - 1) as usize;

        let attach = |yard: usize, rng: &mut ChaCha8Rng| -> NodeId {
            let via_center = rng.gen_range(0..4) == 0;
            if via_center {
                let local: Vec<usize> = (0..n_centers)
                    .filter(|&j| center_yard[j] == yard)
                    .collect();
                if let Some(&j) = local.first() {
                    return center_ids[j].clone();
                }
            }
            yard_ids[yard].clone()
        };
        let attach_o = attach(yard_o, &mut rng);
        let attach_d = attach(yard_d, &mut rng);

        let origin = NodeId::from(format!("O{g}").as_str());
        let destination = NodeId::from(format!("D{g}").as_str());
        nodes.push(Node {
            id: origin.clone(),
            kind: NodeKind::EnterpriseSiding,
            name: format!("Origin siding {g}"),
        });
        nodes.push(Node {
            id: destination.clone(),
            kind: NodeKind::EnterpriseSiding,
            name: format!("Destination siding {g}"),
        });
        let len_o = aligned_length(&mut rng, REGULAR_SPEED_KMH, 1..=6);
        arcs.push(regular_arc(
            next_arc,
            &origin,
            &attach_o,
            ArcClass::Local,
            Capacity::Unbounded,
            len_o,
        ));
        next_arc += 1;
        let len_d = aligned_length(&mut rng, REGULAR_SPEED_KMH, 1..=6);
        arcs.push(regular_arc(
            next_arc,
            &attach_d,
            &destination,
            ArcClass::Local,
            Capacity::Unbounded,
            len_d,
        ));
        next_arc += 1;

        shipments.push(Shipment {
            id: format!("g{g}").as_str().into(),
            origin,
            destination,
            volume_cars: 5.0 * rng.gen_range(2..=10) as f64,
            revenue_per_car: 0.5 * rng.gen_range(8..=24) as f64,
            // Placeholder until the fastest chain time is known.
            due_date_h: 1e9,
        });
    }

    let lambda = [1.0, 1.5, 2.0][rng.gen_range(0..3)];

    // Price each train so the capacity-km side and the per-train ledger
    // agree exactly: all quantities sit on a dyadic grid, so the identity
    // survives floating-point evaluation bit-for-bit.
    for (train, ids) in trains.iter_mut().zip(&train_arc_ids) {
        let cap_km: f64 = ids
            .iter()
            .map(|id| {
                let arc = arcs.iter().find(|a| &a.id == id).expect("own arc");
                let cap = arc.capacity.cars().expect("express arcs are bounded");
                cap * arc.length_km
            })
            .sum();
        let priced = lambda * cap_km;
        let per_km = (priced / (2.0 * train.route_length_km)).floor();
        train.per_km_cost = per_km;
        train.fixed_cost = priced - per_km * train.route_length_km;
    }

    let transfers = TransferTable {
        defaults: TransferDefaults {
            reclassification_h: 0.5 * rng.gen_range(8..=12) as f64,
            block_swap_h: 0.5 * rng.gen_range(2..=5) as f64,
        },
        overrides,
    };

    let mut inst = Instance {
        network: ServiceNetwork::new(nodes, arcs, transfers, trains),
        shipments,
        lambda,
        big_m: 1e6,
    };

    // Due dates last: the profile decides how many shipments stay routable.
    // Routable ones get due dates padded past their fastest chain; the rest
    // are due strictly before it, so no chain of up to eight arcs fits.
    let fastest: Vec<f64> = inst
        .shipments
        .iter()
        .map(|g| {
            let chains = enumerate_chains(&inst, g, 8);
            debug_assert!(!chains.is_empty(), "construction guarantees a chain");
            chains
                .iter()
                .map(|c| c.total_time_h)
                .fold(f64::INFINITY, f64::min)
        })
        .collect();

    let share = profile.feasible_share();
    let n = inst.shipments.len();
    let feasible_count = ((share * n as f64).round() as usize).clamp(1, n);
    let mut designation: Vec<usize> = (0..n).collect();
    designation.shuffle(&mut rng);
    let mut feasible = vec![false; n];
    for &g in designation.iter().take(feasible_count) {
        feasible[g] = true;
    }
    for (g, shipment) in inst.shipments.iter_mut().enumerate() {
        let factor = if feasible[g] {
            0.05 * rng.gen_range(24..=36) as f64 // 1.20 ..= 1.80
        } else {
            0.05 * rng.gen_range(8..=16) as f64 // 0.40 ..= 0.80
        };
        let raw = fastest[g] * factor;
        shipment.due_date_h = if feasible[g] {
            ceil_tenth(raw)
        } else {
            floor_tenth(raw).max(0.1)
        };
    }

    debug_assert_eq!(crate::shipment::validate_instance(&inst), Vec::new());
    inst
}
