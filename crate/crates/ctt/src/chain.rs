//! Service-chain enumeration.
//!
//! A service chain is a head-to-tail sequence of arcs from a shipment's
//! origin to its destination that revisits no node and whose total time —
//! travel plus every junction transfer — fits the due date. Enumeration is
//! a depth-first walk that extends along arcs in ascending id order, so the
//! result comes out in lexicographic order of arc-id sequences; since all
//! travel and transfer times are non-negative, cutting a branch the moment
//! its accumulated time exceeds the due date loses nothing.

use serde::Serialize;
use thiserror::Error;

use crate::network::{transfer_kind, transfer_time, ArcId, NodeId, ServiceArc, TransferKind};
use crate::shipment::{Instance, Shipment, ShipmentId};

/// One admissible way to route a shipment, with its time and transfer bill.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ServiceChain {
    pub shipment_id: ShipmentId,
    /// Head-to-tail arc ids from origin to destination.
    pub arcs: Vec<ArcId>,
    /// Travel time plus all transfer times.
    pub total_time_h: f64,
    pub reclassification_count: usize,
    pub block_swap_count: usize,
}

/// Why an arc list failed to form a chain.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChainError {
    #[error("unknown arc id {0}")]
    UnknownArc(ArcId),
    #[error("empty arc list")]
    Empty,
    #[error("arcs {from} and {to} are consecutive but not head-to-tail adjacent")]
    NotAdjacent { from: ArcId, to: ArcId },
    #[error("chain runs {found_head} -> {found_tail}, shipment wants {origin} -> {destination}")]
    EndpointMismatch {
        found_head: NodeId,
        found_tail: NodeId,
        origin: NodeId,
        destination: NodeId,
    },
}

/// Computes time and transfer counts for a given arc sequence. Transfers
/// happen between consecutive arcs only; nothing extra is charged at the
/// origin or destination.
pub fn chain_stats(
    inst: &Instance,
    shipment: &Shipment,
    arcs: &[ArcId],
) -> Result<ServiceChain, ChainError> {
    if arcs.is_empty() {
        return Err(ChainError::Empty);
    }
    let net = &inst.network;
    let resolved: Vec<&ServiceArc> = arcs
        .iter()
        .map(|id| net.arc(id).ok_or_else(|| ChainError::UnknownArc(id.clone())))
        .collect::<Result<_, _>>()?;

    let mut total = 0.0;
    let mut reclassifications = 0;
    let mut block_swaps = 0;
    for (i, arc) in resolved.iter().enumerate() {
        total += arc.travel_time_h;
        if i == 0 {
            continue;
        }
        let prev = resolved[i - 1];
        let kind = transfer_kind(net, prev, arc).map_err(|e| ChainError::NotAdjacent {
            from: e.from,
            to: e.to,
        })?;
        match kind {
            TransferKind::Reclassification => reclassifications += 1,
            TransferKind::BlockSwap => block_swaps += 1,
        }
        // Adjacency is already proven, so the lookup cannot fail.
        total += transfer_time(net, prev, arc).expect("adjacent arcs");
    }

    let found_head = resolved[0].head.clone();
    let found_tail = resolved[resolved.len() - 1].tail.clone();
    if found_head != shipment.origin || found_tail != shipment.destination {
        return Err(ChainError::EndpointMismatch {
            found_head,
            found_tail,
            origin: shipment.origin.clone(),
            destination: shipment.destination.clone(),
        });
    }

    Ok(ServiceChain {
        shipment_id: shipment.id.clone(),
        arcs: arcs.to_vec(),
        total_time_h: total,
        reclassification_count: reclassifications,
        block_swap_count: block_swaps,
    })
}

/// All time-feasible simple chains for `shipment` with at most `max_arcs`
/// arcs, in lexicographic order of their arc-id sequences.
pub fn enumerate_chains(inst: &Instance, shipment: &Shipment, max_arcs: usize) -> Vec<ServiceChain> {
    // Outgoing arcs per node, ascending by arc id so the walk emits chains
    // in lexicographic order.
    let mut out_arcs: std::collections::BTreeMap<&NodeId, Vec<&ServiceArc>> =
        std::collections::BTreeMap::new();
    for arc in inst.network.arcs() {
        out_arcs.entry(&arc.head).or_default().push(arc);
    }
    for list in out_arcs.values_mut() {
        list.sort_by(|a, b| a.id.cmp(&b.id));
    }

    let mut search = Walk {
        inst,
        shipment,
        out_arcs,
        max_arcs,
        stack: Vec::new(),
        visited: vec![&shipment.origin],
        found: Vec::new(),
    };
    search.extend_from(&shipment.origin, 0.0);
    search.found
}

struct Walk<'a> {
    inst: &'a Instance,
    shipment: &'a Shipment,
    out_arcs: std::collections::BTreeMap<&'a NodeId, Vec<&'a ServiceArc>>,
    max_arcs: usize,
    stack: Vec<&'a ServiceArc>,
    visited: Vec<&'a NodeId>,
    found: Vec<ServiceChain>,
}

impl<'a> Walk<'a> {
    fn extend_from(&mut self, at: &'a NodeId, time: f64) {
        if *at == self.shipment.destination {
            // Extending past the destination would revisit it, so the path
            // is complete. An empty stack means origin equals destination,
            // which admits no chain.
            if !self.stack.is_empty() {
                let arcs: Vec<ArcId> = self.stack.iter().map(|a| a.id.clone()).collect();
                self.found.push(
                    chain_stats(self.inst, self.shipment, &arcs).expect("walk builds valid chains"),
                );
            }
            return;
        }
        if self.stack.len() == self.max_arcs {
            return;
        }
        let Some(candidates) = self.out_arcs.get(at) else {
            return;
        };
        for arc in candidates.clone() {
            if self.visited.iter().any(|&v| *v == arc.tail) {
                continue;
            }
            let hop = match self.stack.last() {
                Some(prev) => {
                    transfer_time(&self.inst.network, prev, arc).expect("adjacent by construction")
                        + arc.travel_time_h
                }
                None => arc.travel_time_h,
            };
            let next_time = time + hop;
            if next_time > self.shipment.due_date_h {
                continue; // all extensions only get slower
            }
            self.stack.push(arc);
            self.visited.push(&arc.tail);
            self.extend_from(&arc.tail, next_time);
            self.visited.pop();
            self.stack.pop();
        }
    }
}
