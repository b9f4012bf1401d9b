//! Exact solving by branch-and-bound over per-shipment chain choices.
//!
//! Fixing a chain (or rejection) for every shipment leaves a tiny linear
//! program in the admitted fractions: maximize revenue subject to car
//! capacities on the shared arcs, each routed fraction boxed in
//! [1/big_m, 1]. Branch-and-bound walks the choice tree — most valuable
//! shipments first, strongest chains first, rejection last — and bounds
//! each prefix by the exactly-solved LP over the fixed shipments plus every
//! undecided shipment at its best standalone value. Pruning happens only
//! when a bound cannot strictly beat the incumbent, so the incumbent's
//! value is provably optimal when the tree is exhausted and `bound_gap` is
//! reported as zero.
//!
//! Choosing chains instead of raw arc variables hard-wires the one-route
//! rule and keeps cycles structurally impossible; [`lift_assignment`]
//! translates a solution back into the full model's variable space so the
//! row-by-row audit in [`crate::milp::check_solution`] can confirm it.
//!
//! [`oracle`] is the cross-check: exhaustive enumeration of every chain
//! combination through the same leaf LP, refusing instances where the
//! combination count exceeds its cap.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;

use thiserror::Error;

use crate::chain::{enumerate_chains, ServiceChain};
use crate::milp::{MilpModel, VarKind};
use crate::network::{ArcId, Violation};
use crate::shipment::{fixed_express_cost, validate_instance, Instance, ShipmentId};
use crate::simplex::{maximize, SimplexOutcome};

/// Feasibility slack for the LP layer.
const FEAS_EPS: f64 = 1e-9;

/// One shipment's outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainChoice {
    pub shipment: ShipmentId,
    /// The routed chain, or `None` when the shipment is rejected.
    pub chain: Option<ServiceChain>,
    /// Admitted fraction; zero when rejected.
    pub xi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Incumbent proved best possible.
    Optimal,
    /// Shipments exist but none has a single feasible chain.
    InfeasibleTrivial,
    /// Node budget ran out; best incumbent returned with its bound gap.
    Aborted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// Instance shipment order.
    pub assignments: Vec<ChainChoice>,
    /// Revenue of the admitted fractions.
    pub objective_gross: f64,
    /// Gross minus the fixed express operating constant.
    pub objective_net: f64,
    pub status: SolveStatus,
    /// Best-possible minus incumbent at stop time; zero when optimal.
    pub bound_gap: f64,
    /// Branch-and-bound nodes popped, or combinations tried by the oracle.
    pub nodes_explored: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Longest chain considered, in arcs.
    pub max_arcs: usize,
    /// Objective tolerance reported with the optimality claim.
    pub tol: f64,
    /// Abort after this many popped nodes (`None`: run to proof).
    pub node_budget: Option<u64>,
    /// Worker threads; anything above 1 trades deterministic tie-breaking
    /// for speed.
    pub workers: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_arcs: 8,
            tol: 1e-6,
            node_budget: None,
            workers: 1,
        }
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("instance is invalid ({} violations; first: {})", .0.len(), .0[0])]
    InvalidInstance(Vec<Violation>),
}

#[derive(Debug, Clone, Copy)]
pub struct OracleOptions {
    pub max_arcs: usize,
    /// Refuse above this many chain combinations.
    pub cap: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            max_arcs: 8,
            cap: 1e6,
        }
    }
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("instance is invalid ({} violations; first: {})", .0.len(), .0[0])]
    InvalidInstance(Vec<Violation>),
    #[error(
        "{combinations:e} chain combinations exceed the oracle cap {cap:e}; \
         the oracle is for small instances only"
    )]
    TooManyCombinations { combinations: f64, cap: f64 },
}

/// One admitted-fraction column of the leaf LP.
#[derive(Debug, Clone, PartialEq)]
pub struct LpColumn {
    pub shipment: ShipmentId,
    /// Objective coefficient: revenue of full admission.
    pub objective: f64,
    pub lower: f64,
    pub upper: f64,
}

/// One capacity row of the leaf LP: loads are (column, cars) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct LpCapacityRow {
    pub arc: ArcId,
    pub loads: Vec<(usize, f64)>,
    pub capacity: f64,
}

/// The residual problem once every shipment's route is fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSubproblem {
    pub columns: Vec<LpColumn>,
    pub rows: Vec<LpCapacityRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal {
        /// Per-column admitted fraction.
        xi: Vec<f64>,
        objective: f64,
        /// One shadow price per capacity row.
        duals: Vec<f64>,
    },
    /// The column lower bounds alone overrun some capacity.
    Infeasible,
}

/// Solves the boxed capacity LP exactly. The problem is shifted so the
/// lower bounds sit at the origin; that makes the all-slack simplex basis
/// feasible, and infeasibility shows up directly as a negative shifted
/// capacity.
pub fn solve_lp(sub: &LpSubproblem) -> LpOutcome {
    let n = sub.columns.len();
    if n == 0 {
        if sub.rows.iter().any(|r| r.capacity < -FEAS_EPS) {
            return LpOutcome::Infeasible;
        }
        return LpOutcome::Optimal {
            xi: Vec::new(),
            objective: 0.0,
            duals: vec![0.0; sub.rows.len()],
        };
    }

    let mut base = 0.0;
    for col in &sub.columns {
        if col.upper < col.lower - FEAS_EPS {
            return LpOutcome::Infeasible;
        }
        base += col.objective * col.lower;
    }

    let mut rows: Vec<(Vec<f64>, f64)> = Vec::with_capacity(sub.rows.len() + n);
    for row in &sub.rows {
        let mut coeffs = vec![0.0; n];
        let mut shifted = row.capacity;
        for &(j, load) in &row.loads {
            coeffs[j] += load;
            shifted -= load * sub.columns[j].lower;
        }
        if shifted < -FEAS_EPS {
            return LpOutcome::Infeasible;
        }
        rows.push((coeffs, shifted.max(0.0)));
    }
    for (j, col) in sub.columns.iter().enumerate() {
        let mut coeffs = vec![0.0; n];
        coeffs[j] = 1.0;
        rows.push((coeffs, (col.upper - col.lower).max(0.0)));
    }

    let c: Vec<f64> = sub.columns.iter().map(|col| col.objective).collect();
    match maximize(&c, &rows) {
        SimplexOutcome::Optimal {
            x,
            objective,
            duals,
        } => LpOutcome::Optimal {
            xi: x
                .iter()
                .zip(&sub.columns)
                .map(|(u, col)| col.lower + u)
                .collect(),
            objective: base + objective,
            duals: duals[..sub.rows.len()].to_vec(),
        },
        SimplexOutcome::Unbounded => unreachable!("every column is boxed above"),
    }
}

/// Enumerated chains and standalone values, shared by both search paths.
struct Prep {
    /// Per shipment, in enumeration (lexicographic) order.
    chains: Vec<Vec<ServiceChain>>,
    /// Best-case solo gross value per chain: full revenue times the largest
    /// fraction the chain's own capacities allow.
    standalone: Vec<Vec<f64>>,
    /// Max standalone value per shipment (zero when unroutable).
    best_alone: Vec<f64>,
}

fn prepare(inst: &Instance, max_arcs: usize) -> Prep {
    let mut chains = Vec::with_capacity(inst.shipments.len());
    let mut standalone = Vec::with_capacity(inst.shipments.len());
    let mut best_alone = Vec::with_capacity(inst.shipments.len());
    for g in &inst.shipments {
        let list = enumerate_chains(inst, g, max_arcs);
        let values: Vec<f64> = list
            .iter()
            .map(|chain| g.full_revenue() * standalone_fraction(inst, g.volume_cars, chain))
            .collect();
        best_alone.push(values.iter().copied().fold(0.0, f64::max));
        chains.push(list);
        standalone.push(values);
    }
    Prep {
        chains,
        standalone,
        best_alone,
    }
}

/// Largest admittable fraction if the chain had its arcs to itself.
fn standalone_fraction(inst: &Instance, volume: f64, chain: &ServiceChain) -> f64 {
    let mut frac: f64 = 1.0;
    for id in &chain.arcs {
        let arc = inst.network.arc(id).expect("chains reference known arcs");
        if let Some(cap) = arc.capacity.cars() {
            frac = frac.min(cap / volume);
        }
    }
    frac.max(0.0)
}

/// Builds the leaf LP for the routed subset, columns and rows both in
/// instance order.
fn subproblem_for(inst: &Instance, routed: &[(usize, &ServiceChain)]) -> LpSubproblem {
    let lower = 1.0 / inst.big_m;
    let columns: Vec<LpColumn> = routed
        .iter()
        .map(|&(gi, _)| {
            let g = &inst.shipments[gi];
            LpColumn {
                shipment: g.id.clone(),
                objective: g.full_revenue(),
                lower,
                upper: 1.0,
            }
        })
        .collect();

    let mut rows = Vec::new();
    for arc in inst.network.arcs() {
        let Some(cap) = arc.capacity.cars() else {
            continue;
        };
        let loads: Vec<(usize, f64)> = routed
            .iter()
            .enumerate()
            .filter(|(_, (_, chain))| chain.arcs.contains(&arc.id))
            .map(|(col, &(gi, _))| (col, inst.shipments[gi].volume_cars))
            .collect();
        if !loads.is_empty() {
            rows.push(LpCapacityRow {
                arc: arc.id.clone(),
                loads,
                capacity: cap,
            });
        }
    }
    LpSubproblem { columns, rows }
}

/// LP value of a set of fixed routings, or `None` when even the lower
/// bounds do not fit.
fn fixed_value(inst: &Instance, routed: &[(usize, &ServiceChain)]) -> Option<(f64, Vec<f64>)> {
    match solve_lp(&subproblem_for(inst, routed)) {
        LpOutcome::Optimal { xi, objective, .. } => Some((objective, xi)),
        LpOutcome::Infeasible => None,
    }
}

/// A branch-and-bound node: choices made for `order[..choices.len()]`.
/// A choice is `Some(chain index)` or `None` for rejection.
struct Node {
    choices: Vec<Option<usize>>,
    bound: f64,
}

/// Shared search state; one instance serves any number of workers.
struct Search<'i> {
    inst: &'i Instance,
    prep: &'i Prep,
    /// Shipment indices, most valuable first.
    order: Vec<usize>,
    /// Per shipment (instance index): candidate choices in branch order —
    /// chains by decreasing standalone value (enumeration order on ties),
    /// rejection last.
    candidates: Vec<Vec<Option<usize>>>,
    /// Incumbent value as f64 bits, monotonically raised.
    best_bits: AtomicU64,
    /// Incumbent payload, kept consistent with `best_bits` under the lock.
    best: Mutex<Option<(f64, Vec<Option<usize>>, Vec<f64>)>>,
    nodes: AtomicU64,
    budget: Option<u64>,
    aborted: AtomicBool,
    /// Largest bound left unexplored at abort time.
    open_bound: Mutex<f64>,
}

impl<'i> Search<'i> {
    fn incumbent(&self) -> f64 {
        f64::from_bits(self.best_bits.load(Ordering::SeqCst))
    }

    fn offer(&self, value: f64, choices: &[Option<usize>], xi: Vec<f64>) {
        let mut guard = self.best.lock().expect("incumbent lock");
        let current = guard.as_ref().map_or(f64::NEG_INFINITY, |(v, _, _)| *v);
        if value > current {
            *guard = Some((value, choices.to_vec(), xi));
            self.best_bits.store(value.to_bits(), Ordering::SeqCst);
        }
    }

    fn routed_of<'p>(&'p self, choices: &[Option<usize>]) -> Vec<(usize, &'p ServiceChain)> {
        let mut routed: Vec<(usize, &ServiceChain)> = choices
            .iter()
            .enumerate()
            .filter_map(|(depth, choice)| {
                choice.map(|ci| {
                    let gi = self.order[depth];
                    (gi, &self.prep.chains[gi][ci])
                })
            })
            .collect();
        routed.sort_by_key(|&(gi, _)| gi);
        routed
    }

    /// Bound for a prefix: exact LP over the fixed part plus best-case
    /// standalone value for everything undecided. Negative infinity when
    /// the prefix is already infeasible.
    fn prefix_bound(&self, choices: &[Option<usize>]) -> f64 {
        let Some((fixed, _)) = fixed_value(self.inst, &self.routed_of(choices)) else {
            return f64::NEG_INFINITY;
        };
        let undecided: f64 = self.order[choices.len()..]
            .iter()
            .map(|&gi| self.prep.best_alone[gi])
            .sum();
        fixed + undecided
    }

    /// Depth-first search from one node. Returns false when the budget ran
    /// out and the search must stop.
    fn dfs(&self, root: Node) -> bool {
        let mut stack = vec![root];
        while let Some(node) = stack.pop() {
            let popped = self.nodes.fetch_add(1, Ordering::SeqCst) + 1;
            if self.budget.is_some_and(|b| popped > b) {
                // This node goes unprocessed; it is an open bound, not an
                // explored node.
                self.nodes.fetch_sub(1, Ordering::SeqCst);
                self.aborted.store(true, Ordering::SeqCst);
                let open = stack
                    .iter()
                    .map(|n| n.bound)
                    .fold(node.bound, f64::max);
                let mut guard = self.open_bound.lock().expect("open bound lock");
                *guard = guard.max(open);
                return false;
            }
            if node.bound <= self.incumbent() {
                continue;
            }
            if node.choices.len() == self.order.len() {
                // Leaf: the LP is exact here.
                if let Some((value, xi)) = fixed_value(self.inst, &self.routed_of(&node.choices)) {
                    debug_assert!(
                        value <= node.bound + 1e-7,
                        "leaf value {value} above its bound {}",
                        node.bound
                    );
                    if value > self.incumbent() {
                        self.offer(value, &node.choices, xi);
                    }
                }
                continue;
            }
            // Children in reverse candidate order so the strongest pops
            // first.
            let gi = self.order[node.choices.len()];
            for &choice in self.candidates[gi].iter().rev() {
                let mut choices = node.choices.clone();
                choices.push(choice);
                let bound = self.prefix_bound(&choices);
                debug_assert!(
                    bound <= node.bound + 1e-7,
                    "child bound {bound} above parent {}",
                    node.bound
                );
                if bound > self.incumbent() {
                    stack.push(Node { choices, bound });
                }
            }
        }
        true
    }
}

/// Assembles the per-shipment outcomes from a full choice vector and the
/// matching leaf LP fractions.
fn assemble(
    inst: &Instance,
    prep: &Prep,
    order: &[usize],
    choices: &[Option<usize>],
    xi: &[f64],
) -> Vec<ChainChoice> {
    let mut by_shipment: BTreeMap<usize, Option<&ServiceChain>> = BTreeMap::new();
    for (depth, choice) in choices.iter().enumerate() {
        let gi = order[depth];
        by_shipment.insert(gi, choice.map(|ci| &prep.chains[gi][ci]));
    }
    // Routed columns were built in instance order; walk them back out.
    let mut next_col = 0usize;
    inst.shipments
        .iter()
        .enumerate()
        .map(|(gi, g)| match by_shipment.get(&gi) {
            Some(Some(chain)) => {
                let value = xi[next_col];
                next_col += 1;
                ChainChoice {
                    shipment: g.id.clone(),
                    chain: Some((*chain).clone()),
                    xi: value,
                }
            }
            _ => ChainChoice {
                shipment: g.id.clone(),
                chain: None,
                xi: 0.0,
            },
        })
        .collect()
}

fn all_rejected(inst: &Instance) -> Vec<ChainChoice> {
    inst.shipments
        .iter()
        .map(|g| ChainChoice {
            shipment: g.id.clone(),
            chain: None,
            xi: 0.0,
        })
        .collect()
}

fn finish(inst: &Instance, assignments: Vec<ChainChoice>, gross: f64, status: SolveStatus, bound_gap: f64, nodes_explored: u64) -> Solution {
    Solution {
        assignments,
        objective_gross: gross,
        objective_net: gross - fixed_express_cost(inst).capacity_km_cost,
        status,
        bound_gap,
        nodes_explored,
    }
}

/// Solves to proven optimality (or to the node budget) by branch-and-bound.
pub fn solve(inst: &Instance, options: &SolveOptions) -> Result<Solution, SolveError> {
    let violations = validate_instance(inst);
    if !violations.is_empty() {
        return Err(SolveError::InvalidInstance(violations));
    }

    if inst.shipments.is_empty() {
        return Ok(finish(inst, Vec::new(), 0.0, SolveStatus::Optimal, 0.0, 0));
    }

    let prep = prepare(inst, options.max_arcs);
    if prep.chains.iter().all(Vec::is_empty) {
        return Ok(finish(
            inst,
            all_rejected(inst),
            0.0,
            SolveStatus::InfeasibleTrivial,
            0.0,
            0,
        ));
    }

    let mut order: Vec<usize> = (0..inst.shipments.len()).collect();
    order.sort_by(|&a, &b| {
        inst.shipments[b]
            .full_revenue()
            .partial_cmp(&inst.shipments[a].full_revenue())
            .expect("revenues are finite")
            .then(a.cmp(&b))
    });

    let candidates: Vec<Vec<Option<usize>>> = (0..inst.shipments.len())
        .map(|gi| {
            let mut idx: Vec<usize> = (0..prep.chains[gi].len()).collect();
            idx.sort_by(|&a, &b| {
                prep.standalone[gi][b]
                    .partial_cmp(&prep.standalone[gi][a])
                    .expect("values are finite")
                    .then(a.cmp(&b))
            });
            let mut cand: Vec<Option<usize>> = idx.into_iter().map(Some).collect();
            cand.push(None);
            cand
        })
        .collect();

    let search = Search {
        inst,
        prep: &prep,
        order,
        candidates,
        best_bits: AtomicU64::new(f64::NEG_INFINITY.to_bits()),
        best: Mutex::new(None),
        nodes: AtomicU64::new(0),
        budget: options.node_budget,
        aborted: AtomicBool::new(false),
        open_bound: Mutex::new(f64::NEG_INFINITY),
    };

    let root = Node {
        choices: Vec::new(),
        bound: search.prefix_bound(&[]),
    };

    let workers = options.workers.max(1);
    if workers == 1 {
        search.dfs(root);
    } else {
        // Work queue of the root's children; each worker runs its own
        // depth-first search under the shared incumbent.
        let queue: Vec<Node> = {
            let gi = search.order[0];
            search.candidates[gi]
                .iter()
                .filter_map(|&choice| {
                    let choices = vec![choice];
                    let bound = search.prefix_bound(&choices);
                    (bound > f64::NEG_INFINITY).then_some(Node { choices, bound })
                })
                .collect()
        };
        let next = AtomicUsize::new(0);
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    if search.aborted.load(Ordering::SeqCst) {
                        break;
                    }
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    if i >= queue.len() {
                        break;
                    }
                    let item = &queue[i];
                    let keep_going = search.dfs(Node {
                        choices: item.choices.clone(),
                        bound: item.bound,
                    });
                    if !keep_going {
                        break;
                    }
                });
            }
        });
        if search.aborted.load(Ordering::SeqCst) {
            // Unclaimed queue items count as open bounds too.
            let claimed = next.load(Ordering::SeqCst).min(queue.len());
            let open = queue[claimed..]
                .iter()
                .map(|n| n.bound)
                .fold(f64::NEG_INFINITY, f64::max);
            let mut guard = search.open_bound.lock().expect("open bound lock");
            *guard = guard.max(open);
        }
    }

    let nodes_explored = search.nodes.load(Ordering::SeqCst);
    let aborted = search.aborted.load(Ordering::SeqCst);
    let best = search.best.lock().expect("incumbent lock").take();

    let (gross, assignments) = match best {
        Some((value, choices, xi)) => (
            value,
            assemble(inst, &prep, &search.order, &choices, &xi),
        ),
        // Nothing evaluated before the budget ran out; fall back to the
        // always-feasible all-rejected answer.
        None => (0.0, all_rejected(inst)),
    };

    let (status, bound_gap) = if aborted {
        let open = *search.open_bound.lock().expect("open bound lock");
        (SolveStatus::Aborted, (open - gross).max(0.0))
    } else {
        (SolveStatus::Optimal, 0.0)
    };

    let solution = finish(inst, assignments, gross, status, bound_gap, nodes_explored);

    #[cfg(debug_assertions)]
    if !aborted {
        // Every emitted solution must survive the row-by-row model audit.
        let model = crate::milp::build_milp(inst, crate::milp::BuildOptions::default())
            .expect("instance was validated above");
        let values = lift_assignment(&model, &solution);
        let report = crate::milp::check_solution(&model, &values, 1e-9)
            .expect("lift covers all variables");
        debug_assert!(
            report.is_feasible(),
            "solver emitted an infeasible solution: {:?} {:?} {:?}",
            report.row_violations,
            report.var_violations,
            report.identity_violations,
        );
    }

    Ok(solution)
}

/// Exhaustive ground truth: tries every chain combination (rejection
/// included) through the same leaf LP and keeps the best, breaking value
/// ties toward the lexicographically smallest chain-index tuple. Refuses
/// instances whose combination count exceeds the cap.
pub fn oracle(inst: &Instance, options: &OracleOptions) -> Result<Solution, OracleError> {
    let violations = validate_instance(inst);
    if !violations.is_empty() {
        return Err(OracleError::InvalidInstance(violations));
    }

    if inst.shipments.is_empty() {
        return Ok(finish(inst, Vec::new(), 0.0, SolveStatus::Optimal, 0.0, 0));
    }

    let prep = prepare(inst, options.max_arcs);
    let combinations = prep
        .chains
        .iter()
        .fold(1.0, |acc, list| acc * (list.len() + 1) as f64);
    if combinations > options.cap {
        return Err(OracleError::TooManyCombinations {
            combinations,
            cap: options.cap,
        });
    }

    if prep.chains.iter().all(Vec::is_empty) {
        return Ok(finish(
            inst,
            all_rejected(inst),
            0.0,
            SolveStatus::InfeasibleTrivial,
            0.0,
            1,
        ));
    }

    let n = inst.shipments.len();
    let order: Vec<usize> = (0..n).collect();
    // Mixed-radix counter over chain indices, rejection encoded as the
    // highest digit so earlier (smaller) tuples win ties under strict
    // improvement.
    let mut digits = vec![0usize; n];
    let mut best: Option<(f64, Vec<Option<usize>>, Vec<f64>)> = None;
    let mut tried: u64 = 0;
    loop {
        tried += 1;
        let choices: Vec<Option<usize>> = digits
            .iter()
            .enumerate()
            .map(|(gi, &d)| (d < prep.chains[gi].len()).then_some(d))
            .collect();
        let routed: Vec<(usize, &ServiceChain)> = choices
            .iter()
            .enumerate()
            .filter_map(|(gi, c)| c.map(|ci| (gi, &prep.chains[gi][ci])))
            .collect();
        if let Some((value, xi)) = fixed_value(inst, &routed) {
            if best.as_ref().map_or(true, |(v, _, _)| value > *v) {
                best = Some((value, choices, xi));
            }
        }

        // Advance the counter; most significant digit first gives
        // lexicographic tuple order.
        let mut pos = n;
        while pos > 0 {
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] <= prep.chains[pos].len() {
                break;
            }
            digits[pos] = 0;
            if pos == 0 {
                let (value, choices, xi) = best.expect("the all-rejected tuple is feasible");
                let assignments = assemble(inst, &prep, &order, &choices, &xi);
                return Ok(finish(
                    inst,
                    assignments,
                    value,
                    SolveStatus::Optimal,
                    0.0,
                    tried,
                ));
            }
        }
    }
}

/// Expands a chain-level solution into the full variable space of the
/// model: arc usage and transfer indicators from each chain, admitted flows
/// as xi on used arcs, route indicators for routed shipments.
pub fn lift_assignment(model: &MilpModel, sol: &Solution) -> Vec<f64> {
    let by_id: BTreeMap<&ShipmentId, &ChainChoice> = sol
        .assignments
        .iter()
        .map(|choice| (&choice.shipment, choice))
        .collect();
    let uses = |shipment: &ShipmentId, arc: &ArcId| -> bool {
        by_id
            .get(shipment)
            .and_then(|c| c.chain.as_ref())
            .is_some_and(|chain| chain.arcs.contains(arc))
    };

    model
        .variables
        .iter()
        .map(|var| match &var.kind {
            VarKind::AdmittedFraction { shipment } => {
                by_id.get(shipment).map_or(0.0, |c| c.xi)
            }
            VarKind::RouteOpen { shipment } => by_id
                .get(shipment)
                .is_some_and(|c| c.chain.is_some()) as u8 as f64,
            VarKind::ArcUse { shipment, arc } => uses(shipment, arc) as u8 as f64,
            VarKind::AdmittedFlow { shipment, arc } => {
                if uses(shipment, arc) {
                    by_id.get(shipment).map_or(0.0, |c| c.xi)
                } else {
                    0.0
                }
            }
            VarKind::TransferUse { shipment, from, to } => by_id
                .get(shipment)
                .and_then(|c| c.chain.as_ref())
                .is_some_and(|chain| {
                    chain
                        .arcs
                        .windows(2)
                        .any(|w| &w[0] == from && &w[1] == to)
                }) as u8 as f64,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance_io::{figure1, figure1_tight};
    use crate::milp::{build_milp, check_solution, BuildOptions};
    use crate::network::{
        ArcClass, Capacity, Node as NetNode, NodeKind, ServiceArc, ServiceNetwork,
        TransferDefaults, TransferTable,
    };
    use crate::shipment::Shipment;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn col(shipment: &str, objective: f64, lower: f64) -> LpColumn {
        LpColumn {
            shipment: shipment.into(),
            objective,
            lower,
            upper: 1.0,
        }
    }

    #[test]
    fn single_knapsack_ratio() {
        // One shipment of 10 cars on a 4-car arc at revenue 3/car.
        let sub = LpSubproblem {
            columns: vec![col("g", 30.0, 0.0)],
            rows: vec![LpCapacityRow {
                arc: "m".into(),
                loads: vec![(0, 10.0)],
                capacity: 4.0,
            }],
        };
        match solve_lp(&sub) {
            LpOutcome::Optimal {
                xi,
                objective,
                duals,
            } => {
                assert!((xi[0] - 0.4).abs() < 1e-12);
                assert!((objective - 12.0).abs() < 1e-12);
                assert!((duals[0] - 3.0).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn greedy_dominance_on_a_shared_arc() {
        let sub = LpSubproblem {
            columns: vec![col("a", 50.0, 0.0), col("b", 20.0, 0.0)],
            rows: vec![LpCapacityRow {
                arc: "m".into(),
                loads: vec![(0, 10.0), (1, 10.0)],
                capacity: 10.0,
            }],
        };
        match solve_lp(&sub) {
            LpOutcome::Optimal { xi, objective, .. } => {
                assert!((xi[0] - 1.0).abs() < 1e-12);
                assert!(xi[1].abs() < 1e-12);
                assert!((objective - 50.0).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn lower_bounds_overrunning_capacity_is_infeasible() {
        let sub = LpSubproblem {
            columns: vec![col("a", 1.0, 0.5), col("b", 1.0, 0.5)],
            rows: vec![LpCapacityRow {
                arc: "m".into(),
                loads: vec![(0, 10.0), (1, 10.0)],
                capacity: 5.0,
            }],
        };
        assert_eq!(solve_lp(&sub), LpOutcome::Infeasible);
    }

    /// Exhaustive check of small random subproblems against brute-force
    /// vertex enumeration: every basic point of {A u <= b, 0 <= u <= ub}
    /// comes from picking n active constraints and solving the square
    /// system.
    #[test]
    fn random_subproblems_match_vertex_enumeration() {
        fn solve_square(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
            let n = b.len();
            let mut m: Vec<Vec<f64>> = a
                .iter()
                .zip(b)
                .map(|(row, rhs)| {
                    let mut r = row.clone();
                    r.push(*rhs);
                    r
                })
                .collect();
            for i in 0..n {
                let pivot = (i..n).max_by(|&p, &q| {
                    m[p][i].abs().partial_cmp(&m[q][i].abs()).unwrap()
                })?;
                if m[pivot][i].abs() < 1e-10 {
                    return None;
                }
                m.swap(i, pivot);
                for r in 0..n {
                    if r != i {
                        let f = m[r][i] / m[i][i];
                        for c in i..=n {
                            m[r][c] -= f * m[i][c];
                        }
                    }
                }
            }
            Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
        }

        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for trial in 0..40 {
            let n = 4;
            let columns: Vec<LpColumn> = (0..n)
                .map(|j| col(&format!("g{j}"), (rng.gen_range(1..=50) as f64) / 2.0, 0.0))
                .collect();
            let rows: Vec<LpCapacityRow> = (0..3)
                .map(|r| LpCapacityRow {
                    arc: format!("m{r}").as_str().into(),
                    loads: (0..n)
                        .map(|j| (j, rng.gen_range(0..=8) as f64))
                        .filter(|&(_, w)| w > 0.0)
                        .collect(),
                    capacity: rng.gen_range(1..=12) as f64,
                })
                .filter(|row| !row.loads.is_empty())
                .collect();
            let sub = LpSubproblem {
                columns: columns.clone(),
                rows: rows.clone(),
            };

            // All constraints as dense (coeffs, rhs) pairs: capacity rows,
            // upper bounds, lower bounds.
            let mut cons: Vec<(Vec<f64>, f64)> = Vec::new();
            for row in &rows {
                let mut coeffs = vec![0.0; n];
                for &(j, w) in &row.loads {
                    coeffs[j] = w;
                }
                cons.push((coeffs, row.capacity));
            }
            for j in 0..n {
                let mut up = vec![0.0; n];
                up[j] = 1.0;
                cons.push((up, 1.0));
                let mut lo = vec![0.0; n];
                lo[j] = -1.0;
                cons.push((lo, 0.0));
            }

            let mut best = f64::NEG_INFINITY;
            let k = cons.len();
            for a in 0..k {
                for b in a + 1..k {
                    for c in b + 1..k {
                        for d in c + 1..k {
                            let active = [a, b, c, d];
                            let a_mat: Vec<Vec<f64>> =
                                active.iter().map(|&i| cons[i].0.clone()).collect();
                            let b_vec: Vec<f64> = active.iter().map(|&i| cons[i].1).collect();
                            let Some(u) = solve_square(&a_mat, &b_vec) else {
                                continue;
                            };
                            let feasible = cons.iter().all(|(coeffs, rhs)| {
                                coeffs.iter().zip(&u).map(|(c, x)| c * x).sum::<f64>()
                                    <= rhs + 1e-7
                            });
                            if feasible {
                                let val: f64 = columns
                                    .iter()
                                    .zip(&u)
                                    .map(|(cl, x)| cl.objective * x)
                                    .sum();
                                best = best.max(val);
                            }
                        }
                    }
                }
            }

            match solve_lp(&sub) {
                LpOutcome::Optimal { objective, .. } => {
                    assert!(
                        (objective - best).abs() < 1e-9,
                        "trial {trial}: simplex {objective} vs vertices {best}"
                    );
                }
                other => panic!("trial {trial}: unexpected {other:?}"),
            }
        }
    }

    /// o --m--> d, one shipment that fits whole.
    fn tiny_instance() -> Instance {
        let nodes = vec![
            NetNode {
                id: "o".into(),
                kind: NodeKind::EnterpriseSiding,
                name: "o".into(),
            },
            NetNode {
                id: "d".into(),
                kind: NodeKind::EnterpriseSiding,
                name: "d".into(),
            },
        ];
        let arcs = vec![ServiceArc {
            id: "m".into(),
            head: "o".into(),
            tail: "d".into(),
            class: ArcClass::Local,
            capacity: Capacity::Cars(20.0),
            length_km: 100.0,
            travel_time_h: 2.0,
            express_train_id: None,
        }];
        Instance {
            network: ServiceNetwork::new(
                nodes,
                arcs,
                TransferTable {
                    defaults: TransferDefaults {
                        reclassification_h: 5.0,
                        block_swap_h: 2.0,
                    },
                    overrides: BTreeMap::new(),
                },
                vec![],
            ),
            shipments: vec![Shipment {
                id: "g".into(),
                origin: "o".into(),
                destination: "d".into(),
                volume_cars: 10.0,
                revenue_per_car: 3.0,
                due_date_h: 8.0,
            }],
            lambda: 1.0,
            big_m: 1e6,
        }
    }

    #[test]
    fn one_shipment_one_chain_full_admission() {
        let sol = solve(&tiny_instance(), &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective_gross - 30.0).abs() < 1e-9);
        assert_eq!(sol.bound_gap, 0.0);
        let choice = &sol.assignments[0];
        assert!((choice.xi - 1.0).abs() < 1e-9);
        assert_eq!(
            choice.chain.as_ref().unwrap().arcs,
            vec![ArcId::from("m")]
        );
    }

    #[test]
    fn impossible_due_dates_mean_trivially_infeasible() {
        let mut inst = tiny_instance();
        inst.shipments[0].due_date_h = 0.5;
        let sol = solve(&inst, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::InfeasibleTrivial);
        assert_eq!(sol.objective_gross, 0.0);
        assert_eq!(sol.assignments[0].chain, None);
    }

    #[test]
    fn zero_shipments_is_optimal_nothing() {
        let mut inst = tiny_instance();
        inst.shipments.clear();
        for sol in [
            solve(&inst, &SolveOptions::default()).unwrap(),
            oracle(&inst, &OracleOptions::default()).unwrap(),
        ] {
            assert_eq!(sol.status, SolveStatus::Optimal);
            assert_eq!(sol.objective_gross, 0.0);
            assert!(sol.assignments.is_empty());
        }
    }

    #[test]
    fn generous_fixture_routes_both_shipments_fully() {
        let inst = figure1();
        let sol = solve(&inst, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective_gross - 9600.0).abs() < 1e-6);
        assert!((sol.objective_net - (9600.0 - 137_760.0)).abs() < 1e-6);
        for choice in &sol.assignments {
            assert!((choice.xi - 1.0).abs() < 1e-9, "{choice:?}");
        }
        let truth = oracle(&inst, &OracleOptions::default()).unwrap();
        assert!((truth.objective_gross - sol.objective_gross).abs() < 1e-6);
    }

    #[test]
    fn tight_fixture_prices_the_bottleneck() {
        // The direct through arc fits only one shipment whole; the best the
        // other can do is two thirds over the southern shuttles.
        let inst = figure1_tight();
        let truth = oracle(&inst, &OracleOptions::default()).unwrap();
        assert!((truth.objective_gross - 8400.0).abs() < 1e-6);
        let sol = solve(&inst, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective_gross - 8400.0).abs() < 1e-6);
        let by_id: BTreeMap<&str, &ChainChoice> = sol
            .assignments
            .iter()
            .map(|c| (c.shipment.as_str(), c))
            .collect();
        assert!((by_id["s-t"].xi - 1.0).abs() < 1e-9);
        assert!((by_id["sp-t"].xi - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn solutions_lift_to_row_feasible_assignments() {
        for inst in [figure1(), figure1_tight()] {
            let sol = solve(&inst, &SolveOptions::default()).unwrap();
            let model = build_milp(&inst, BuildOptions::default()).unwrap();
            let values = lift_assignment(&model, &sol);
            let report = check_solution(&model, &values, 1e-9).unwrap();
            assert!(report.is_feasible(), "{:?}", report.row_violations);
            assert!(report.warnings.is_empty(), "{:?}", report.warnings);
            assert!((report.gross_objective - sol.objective_gross).abs() < 1e-9);
        }
    }

    #[test]
    fn node_budget_aborts_with_a_sound_gap() {
        let inst = figure1_tight();
        let sol = solve(
            &inst,
            &SolveOptions {
                node_budget: Some(1),
                ..SolveOptions::default()
            },
        )
        .unwrap();
        assert_eq!(sol.status, SolveStatus::Aborted);
        // Nothing was proven; the gap must cover the true optimum.
        assert!(sol.objective_gross + sol.bound_gap >= 8400.0 - 1e-6);
        assert!(sol.nodes_explored <= 1);
    }

    #[test]
    fn parallel_mode_reaches_the_same_objective() {
        let inst = figure1_tight();
        let single = solve(&inst, &SolveOptions::default()).unwrap();
        let multi = solve(
            &inst,
            &SolveOptions {
                workers: 4,
                ..SolveOptions::default()
            },
        )
        .unwrap();
        assert!((single.objective_gross - multi.objective_gross).abs() < 1e-6);
        assert_eq!(multi.status, SolveStatus::Optimal);
    }

    #[test]
    fn oracle_refuses_oversized_combination_spaces() {
        let inst = figure1();
        match oracle(
            &inst,
            &OracleOptions {
                cap: 2.0,
                ..OracleOptions::default()
            },
        ) {
            Err(OracleError::TooManyCombinations { combinations, cap }) => {
                assert!(combinations > cap);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn oracle_breaks_value_ties_lexicographically() {
        // Two interchangeable arcs; the chain through the smaller arc id
        // enumerates first and must be kept.
        let nodes = vec![
            NetNode {
                id: "o".into(),
                kind: NodeKind::EnterpriseSiding,
                name: "o".into(),
            },
            NetNode {
                id: "d".into(),
                kind: NodeKind::EnterpriseSiding,
                name: "d".into(),
            },
        ];
        let mk = |id: &str| ServiceArc {
            id: id.into(),
            head: "o".into(),
            tail: "d".into(),
            class: ArcClass::Local,
            capacity: Capacity::Cars(20.0),
            length_km: 100.0,
            travel_time_h: 2.0,
            express_train_id: None,
        };
        let inst = Instance {
            network: ServiceNetwork::new(
                nodes,
                vec![mk("mB"), mk("mA")],
                TransferTable {
                    defaults: TransferDefaults {
                        reclassification_h: 5.0,
                        block_swap_h: 2.0,
                    },
                    overrides: BTreeMap::new(),
                },
                vec![],
            ),
            shipments: vec![Shipment {
                id: "g".into(),
                origin: "o".into(),
                destination: "d".into(),
                volume_cars: 10.0,
                revenue_per_car: 3.0,
                due_date_h: 8.0,
            }],
            lambda: 1.0,
            big_m: 1e6,
        };
        let sol = oracle(&inst, &OracleOptions::default()).unwrap();
        assert_eq!(
            sol.assignments[0].chain.as_ref().unwrap().arcs,
            vec![ArcId::from("mA")]
        );
    }

    #[test]
    fn rejecting_an_invalid_instance_lists_violations() {
        let mut inst = tiny_instance();
        inst.big_m = 0.0;
        assert!(matches!(
            solve(&inst, &SolveOptions::default()),
            Err(SolveError::InvalidInstance(_))
        ));
        assert!(matches!(
            oracle(&inst, &OracleOptions::default()),
            Err(OracleError::InvalidInstance(_))
        ));
    }
}
