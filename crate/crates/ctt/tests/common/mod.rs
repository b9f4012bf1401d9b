//! Shared test helpers: a seeded sampler for small random instances.
//!
//! The sampler guarantees hard caps — at most 4 shipments, 12 arcs, and 6
//! chains per shipment — by drawing candidates deterministically and
//! skipping any that overflow a cap, so a given seed always yields the same
//! instance. All drawn numbers sit on short decimal grids, which keeps
//! every model coefficient exactly representable in the LP writer's
//! twelve-digit format.

use std::collections::BTreeMap;

use ctt::chain::enumerate_chains;
use ctt::network::{
    ArcClass, Capacity, ExpressTrain, Node, NodeId, NodeKind, ServiceArc, ServiceNetwork,
    TransferDefaults, TransferTable,
};
use ctt::shipment::{validate_instance, Instance, Shipment};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MAX_SHIPMENTS: usize = 4;
pub const MAX_ARCS: usize = 12;
pub const MAX_CHAINS_PER_SHIPMENT: usize = 6;

/// Deterministic small instance meeting all sampler caps.
pub fn sample_instance(seed: u64) -> Instance {
    for attempt in 0..10_000u64 {
        let inst = candidate(seed.wrapping_mul(10_000).wrapping_add(attempt));
        let caps_ok = inst.network.arcs().len() <= MAX_ARCS
            && inst.shipments.len() <= MAX_SHIPMENTS
            && inst
                .shipments
                .iter()
                .all(|g| enumerate_chains(&inst, g, 8).len() <= MAX_CHAINS_PER_SHIPMENT);
        if caps_ok && validate_instance(&inst).is_empty() {
            return inst;
        }
    }
    panic!("seed {seed}: no candidate met the sampler caps");
}

fn candidate(mix: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(mix);

    let n_nodes = rng.gen_range(3..=5usize);
    let kinds = [
        NodeKind::ClassificationYard,
        NodeKind::LogisticsCenter,
        NodeKind::EnterpriseSiding,
    ];
    let nodes: Vec<Node> = (0..n_nodes)
        .map(|i| Node {
            id: NodeId::from(format!("n{}", i + 1).as_str()),
            kind: kinds[i % kinds.len()],
            name: format!("Station {}", i + 1),
        })
        .collect();

    let mut arcs: Vec<ServiceArc> = Vec::new();
    let mut next_arc = 1usize;
    let push_arc = |arcs: &mut Vec<ServiceArc>,
                        next_arc: &mut usize,
                        head: usize,
                        tail: usize,
                        class: ArcClass,
                        capacity: Capacity,
                        length_km: f64,
                        time_h: f64,
                        train: Option<&str>| {
        arcs.push(ServiceArc {
            id: format!("a{next_arc}").as_str().into(),
            head: nodes[head].id.clone(),
            tail: nodes[tail].id.clone(),
            class,
            capacity,
            length_km,
            travel_time_h: time_h,
            express_train_id: train.map(Into::into),
        });
        *next_arc += 1;
    };

    // Occasionally a two-arc express train over three distinct stations.
    let mut trains: Vec<ExpressTrain> = Vec::new();
    let mut overrides: BTreeMap<(ctt::network::ArcId, ctt::network::ArcId), f64> =
        BTreeMap::new();
    if rng.gen_range(0..10) < 3 && n_nodes >= 3 {
        let a = rng.gen_range(0..n_nodes);
        let b = (a + 1 + rng.gen_range(0..n_nodes - 1)) % n_nodes;
        let c = loop {
            let c = rng.gen_range(0..n_nodes);
            if c != a && c != b {
                break c;
            }
        };
        let speed = [160.0, 120.0, 80.0][rng.gen_range(0..3)];
        let len1 = (speed / 10.0) * rng.gen_range(20..=40) as f64;
        let len2 = (speed / 10.0) * rng.gen_range(20..=40) as f64;
        let cap1 = Capacity::Cars(5.0 * rng.gen_range(2..=8) as f64);
        let cap2 = Capacity::Cars(5.0 * rng.gen_range(2..=8) as f64);
        push_arc(
            &mut arcs, &mut next_arc, a, b,
            ArcClass::Express, cap1, len1, len1 / speed, Some("E1"),
        );
        push_arc(
            &mut arcs, &mut next_arc, b, c,
            ArcClass::Express, cap2, len2, len2 / speed, Some("E1"),
        );
        trains.push(ExpressTrain {
            id: "E1".into(),
            fixed_cost: 100.0 * rng.gen_range(1..=40) as f64,
            per_km_cost: rng.gen_range(1..=20) as f64,
            route_length_km: len1 + len2,
        });
        if rng.gen_range(0..2) == 0 {
            overrides.insert(
                (arcs[0].id.clone(), arcs[1].id.clone()),
                0.5 * rng.gen_range(1..=4) as f64,
            );
        }
    }

    // Regular arcs over the remaining ordered pairs, up to the arc cap.
    for i in 0..n_nodes {
        for j in 0..n_nodes {
            if i == j || arcs.len() >= MAX_ARCS {
                continue;
            }
            if rng.gen_range(0..10) < 4 {
                let len = 5.0 * rng.gen_range(1..=20) as f64;
                let capacity = if rng.gen_range(0..10) < 6 {
                    Capacity::Cars(5.0 * rng.gen_range(2..=12) as f64)
                } else {
                    Capacity::Unbounded
                };
                push_arc(
                    &mut arcs, &mut next_arc, i, j,
                    ArcClass::Shuttle, capacity, len, len / 50.0, None,
                );
            }
        }
    }

    let transfers = TransferTable {
        defaults: TransferDefaults {
            reclassification_h: 0.5 * rng.gen_range(6..=10) as f64,
            block_swap_h: 0.5 * rng.gen_range(2..=4) as f64,
        },
        overrides,
    };

    let n_shipments = rng.gen_range(1..=MAX_SHIPMENTS);
    let shipments: Vec<Shipment> = (1..=n_shipments)
        .map(|g| {
            let o = rng.gen_range(0..n_nodes);
            let d = (o + 1 + rng.gen_range(0..n_nodes - 1)) % n_nodes;
            Shipment {
                id: format!("g{g}").as_str().into(),
                origin: nodes[o].id.clone(),
                destination: nodes[d].id.clone(),
                volume_cars: 5.0 * rng.gen_range(1..=8) as f64,
                revenue_per_car: 0.5 * rng.gen_range(6..=20) as f64,
                due_date_h: 0.5 * rng.gen_range(10..=120) as f64,
            }
        })
        .collect();

    let lambda = [1.0, 1.5, 2.0][rng.gen_range(0..3)];
    Instance {
        network: ServiceNetwork::new(nodes, arcs, transfers, trains),
        shipments,
        lambda,
        big_m: 1e6,
    }
}
