//! Car-to-train assignment for rail express cargo on a mixed service network.
//!
//! A freight network mixes scheduled express trains (fixed paths, hard
//! capacities, block swaps at logistics centers) with unscheduled regular
//! services (locals, shuttles, through trains reclassified at yards). This
//! crate models such a network, enumerates the service chains a shipment can
//! ride, builds the exact mixed-integer formulation of the car-to-train
//! assignment problem, and solves desk-scale instances to proven optimality
//! with a chain-based branch-and-bound over exact LP subproblems.
//!
//! The pieces compose in one direction:
//!
//! * [`network`] — nodes, service arcs, transfer semantics;
//! * [`shipment`] — shipments, whole instances, the express cost constant;
//! * [`chain`] — time-feasible service-chain enumeration;
//! * [`milp`] — the linearized assignment model, LP export, feasibility audit;
//! * [`solver`] — exact solve, LP subproblems, exhaustive oracle;
//! * [`instance_io`] — JSON instance/solution files and bundled fixtures;
//! * [`generator`] — seeded random instance generation.

pub mod chain;
pub mod generator;
pub mod instance_io;
pub mod lp_format;
pub mod milp;
pub mod network;
pub mod shipment;
pub mod simplex;
pub mod solver;
