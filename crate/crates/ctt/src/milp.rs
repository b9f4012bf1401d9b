//! The linearized car-to-train assignment model.
//!
//! One model row-for-row: for each shipment g and arc m there is a binary
//! use variable `x`, an admitted fraction `xi` in \[0,1\], a transfer
//! indicator `y` per adjacent arc pair, a linearized admitted flow
//! `z = xi·x` per arc, and a route indicator `r`. The bilinear pieces of
//! the native formulation enter through two exact devices:
//!
//! * products of binaries (`y = x·x`) through the sandwich
//!   `x_m + x_n − 1 ≤ y ≤ (x_m + x_n)/2` with `y` binary, which pins `y`
//!   to the product at every 0/1 point;
//! * continuous-times-binary (`z = xi·x`) through the three-sided envelope
//!   `z ≤ xi`, `z ≤ x`, `z ≥ xi + x − 1` with `z ≥ 0`, which is exact —
//!   not merely a relaxation — because `x` is binary.
//!
//! Route structure is enforced with the route indicator: outflow at the
//! origin and inflow at the destination both equal `r`, interior nodes
//! conserve flow and admit at most one inbound used arc, and `xi ≤ r`
//! keeps revenue off closed routes.
//!
//! The model is what gets exported to LP files and audited by
//! [`check_solution`]; the exact solver works on service chains instead
//! and only *lifts* its answers into this variable space.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::network::{transfer_time, ArcId, NodeId, Violation};
use crate::shipment::{fixed_express_cost, validate_instance, Instance, ShipmentId};

/// What a model variable stands for.
#[derive(Debug, Clone, PartialEq)]
pub enum VarKind {
    /// Binary: shipment rides arc.
    ArcUse { shipment: ShipmentId, arc: ArcId },
    /// Fraction of the shipment's volume admitted, in \[0,1\].
    AdmittedFraction { shipment: ShipmentId },
    /// Binary: shipment transfers from one arc onto an adjacent one.
    TransferUse {
        shipment: ShipmentId,
        from: ArcId,
        to: ArcId,
    },
    /// Admitted fraction flowing on an arc (the xi·x product), in \[0,1\].
    AdmittedFlow { shipment: ShipmentId, arc: ArcId },
    /// Binary: the shipment's route is open at all.
    RouteOpen { shipment: ShipmentId },
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarRef {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
    pub binary: bool,
}

/// Row comparison sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        })
    }
}

/// One linear row: terms over variable indices, a sense, and a rhs.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub label: String,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// Per-shipment endpoints carried along for audits of lifted solutions.
#[derive(Debug, Clone, PartialEq)]
pub struct ShipmentMeta {
    pub id: ShipmentId,
    pub origin: NodeId,
    pub destination: NodeId,
}

/// The assembled maximization model. `objective` holds the gross revenue
/// terms; `constant_offset` is the express operating constant subtracted
/// from gross to obtain net income. Variable and row order is deterministic
/// for a given instance.
#[derive(Debug, Clone, PartialEq)]
pub struct MilpModel {
    pub variables: Vec<VarRef>,
    pub constraints: Vec<Constraint>,
    pub objective: Vec<(usize, f64)>,
    pub constant_offset: f64,
    pub shipments: Vec<ShipmentMeta>,
    /// head/tail per arc id, for route reconstruction in audits.
    pub arc_ends: BTreeMap<ArcId, (NodeId, NodeId)>,
}

impl MilpModel {
    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn constraint(&self, label: &str) -> Option<&Constraint> {
        self.constraints.iter().find(|c| c.label == label)
    }
}

/// Model-building switches.
#[derive(Debug, Clone, Copy, Default)]
pub struct BuildOptions {
    /// Relax the transfer indicators to continuous \[0,1\]. At binary arc
    /// usage the sandwich still pins each one hard against the product
    /// whenever the two usages agree, and leaves only harmless slack
    /// below 1/2 otherwise, so exports stay sound for bound computation.
    pub relax_y: bool,
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("instance is invalid ({} violations; first: {})", .0.len(), .0[0])]
    InvalidInstance(Vec<Violation>),
}

/// Makes an identifier LP-safe and collision-free within one namespace.
struct Namer {
    used: BTreeMap<String, usize>,
}

impl Namer {
    fn new() -> Self {
        Self {
            used: BTreeMap::new(),
        }
    }

    fn name(&mut self, raw: String) -> String {
        let base: String = raw
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
            .collect();
        let n = self.used.entry(base.clone()).or_insert(0);
        *n += 1;
        if *n == 1 {
            base
        } else {
            format!("{base}__{n}")
        }
    }
}

/// Builds the full model for a valid instance.
///
/// Row families, in emission order:
/// * `eq2_<g>` — travel plus transfer time within the due date;
/// * `lin13lo/lin13hi_<g>_<m>_<n>` — the transfer-indicator sandwich;
/// * `eq3_<m>` — car capacity per capacitated arc, over the linearized flows;
/// * `mcc1..3_<g>_<m>` — the exact product envelope for `z = xi·x`;
/// * `eq4_<g>_<m>` — admitted fraction forces arc usage accounting
///   (`M·xi ≥ x`), one row per pair, no aggregation;
/// * `bal_src/bal_dst/bal_xi_<g>`, `bal_<k>_<g>`, `deg_<k>_<g>` — route
///   structure via the route indicator.
pub fn build_milp(inst: &Instance, options: BuildOptions) -> Result<MilpModel, BuildError> {
    let violations = validate_instance(inst);
    if !violations.is_empty() {
        return Err(BuildError::InvalidInstance(violations));
    }

    let net = &inst.network;
    let arcs = net.arcs();

    // Ordered adjacent pairs (m ends where n starts), in arc-order of m
    // then n; one transfer variable per shipment and pair.
    let mut adjacent: Vec<(usize, usize, f64)> = Vec::new();
    for (i, m) in arcs.iter().enumerate() {
        for (j, n) in arcs.iter().enumerate() {
            if m.tail == n.head {
                let tau = transfer_time(net, m, n).expect("adjacent by construction");
                adjacent.push((i, j, tau));
            }
        }
    }

    let mut vars: Vec<VarRef> = Vec::new();
    let mut names = Namer::new();
    let mut xi = Vec::new(); // per shipment
    let mut route = Vec::new(); // per shipment
    let mut arc_use = Vec::new(); // per shipment, per arc
    let mut flow = Vec::new(); // per shipment, per arc
    let mut transfer = Vec::new(); // per shipment, per adjacent pair

    for g in &inst.shipments {
        let gid = g.id.as_str();
        xi.push(vars.len());
        vars.push(VarRef {
            name: names.name(format!("xi_{gid}")),
            kind: VarKind::AdmittedFraction {
                shipment: g.id.clone(),
            },
            lower: 0.0,
            upper: 1.0,
            binary: false,
        });
        route.push(vars.len());
        vars.push(VarRef {
            name: names.name(format!("r_{gid}")),
            kind: VarKind::RouteOpen {
                shipment: g.id.clone(),
            },
            lower: 0.0,
            upper: 1.0,
            binary: true,
        });
        let mut xs = Vec::with_capacity(arcs.len());
        for m in arcs {
            xs.push(vars.len());
            vars.push(VarRef {
                name: names.name(format!("x_{gid}_{}", m.id)),
                kind: VarKind::ArcUse {
                    shipment: g.id.clone(),
                    arc: m.id.clone(),
                },
                lower: 0.0,
                upper: 1.0,
                binary: true,
            });
        }
        arc_use.push(xs);
        let mut zs = Vec::with_capacity(arcs.len());
        for m in arcs {
            zs.push(vars.len());
            vars.push(VarRef {
                name: names.name(format!("z_{gid}_{}", m.id)),
                kind: VarKind::AdmittedFlow {
                    shipment: g.id.clone(),
                    arc: m.id.clone(),
                },
                lower: 0.0,
                upper: 1.0,
                binary: false,
            });
        }
        flow.push(zs);
        let mut ys = Vec::with_capacity(adjacent.len());
        for &(i, j, _) in &adjacent {
            ys.push(vars.len());
            vars.push(VarRef {
                name: names.name(format!("y_{gid}_{}_{}", arcs[i].id, arcs[j].id)),
                kind: VarKind::TransferUse {
                    shipment: g.id.clone(),
                    from: arcs[i].id.clone(),
                    to: arcs[j].id.clone(),
                },
                lower: 0.0,
                upper: 1.0,
                binary: !options.relax_y,
            });
        }
        transfer.push(ys);
    }

    let mut rows: Vec<Constraint> = Vec::new();
    let mut labels = Namer::new();
    let push_row =
        |rows: &mut Vec<Constraint>, labels: &mut Namer, label: String, terms: Vec<(usize, f64)>, sense: Sense, rhs: f64| {
            rows.push(Constraint {
                label: labels.name(label),
                terms,
                sense,
                rhs,
            });
        };

    // Due dates: travel time on used arcs plus transfer time on used
    // junctions. Zero-time terms are skipped outright.
    for (gi, g) in inst.shipments.iter().enumerate() {
        let gid = g.id.as_str();
        let mut terms = Vec::new();
        for (mi, m) in arcs.iter().enumerate() {
            terms.push((arc_use[gi][mi], m.travel_time_h));
        }
        for (pi, &(_, _, tau)) in adjacent.iter().enumerate() {
            if tau != 0.0 {
                terms.push((transfer[gi][pi], tau));
            }
        }
        push_row(
            &mut rows,
            &mut labels,
            format!("eq2_{gid}"),
            terms,
            Sense::Le,
            g.due_date_h,
        );
    }

    // Transfer sandwich per shipment and adjacent pair.
    for (gi, g) in inst.shipments.iter().enumerate() {
        let gid = g.id.as_str();
        for (pi, &(i, j, _)) in adjacent.iter().enumerate() {
            let (mid, nid) = (&arcs[i].id, &arcs[j].id);
            let y = transfer[gi][pi];
            let xm = arc_use[gi][i];
            let xn = arc_use[gi][j];
            push_row(
                &mut rows,
                &mut labels,
                format!("lin13lo_{gid}_{mid}_{nid}"),
                vec![(xm, 1.0), (xn, 1.0), (y, -1.0)],
                Sense::Le,
                1.0,
            );
            push_row(
                &mut rows,
                &mut labels,
                format!("lin13hi_{gid}_{mid}_{nid}"),
                vec![(y, 1.0), (xm, -0.5), (xn, -0.5)],
                Sense::Le,
                0.0,
            );
        }
    }

    // Capacity over linearized flows, one row per capacitated arc.
    for (mi, m) in arcs.iter().enumerate() {
        if let Some(cap) = m.capacity.cars() {
            let terms = inst
                .shipments
                .iter()
                .enumerate()
                .map(|(gi, g)| (flow[gi][mi], g.volume_cars))
                .collect();
            push_row(
                &mut rows,
                &mut labels,
                format!("eq3_{}", m.id),
                terms,
                Sense::Le,
                cap,
            );
        }
    }

    // Product envelope tying z to xi·x.
    for (gi, g) in inst.shipments.iter().enumerate() {
        let gid = g.id.as_str();
        for (mi, m) in arcs.iter().enumerate() {
            let z = flow[gi][mi];
            let x = arc_use[gi][mi];
            push_row(
                &mut rows,
                &mut labels,
                format!("mcc1_{gid}_{}", m.id),
                vec![(z, 1.0), (xi[gi], -1.0)],
                Sense::Le,
                0.0,
            );
            push_row(
                &mut rows,
                &mut labels,
                format!("mcc2_{gid}_{}", m.id),
                vec![(z, 1.0), (x, -1.0)],
                Sense::Le,
                0.0,
            );
            push_row(
                &mut rows,
                &mut labels,
                format!("mcc3_{gid}_{}", m.id),
                vec![(z, 1.0), (xi[gi], -1.0), (x, -1.0)],
                Sense::Ge,
                -1.0,
            );
        }
    }

    // Admission forces the big-M logic row for every arc, one row per
    // (shipment, arc) exactly as formulated — no aggregation.
    for (gi, g) in inst.shipments.iter().enumerate() {
        let gid = g.id.as_str();
        for (mi, m) in arcs.iter().enumerate() {
            push_row(
                &mut rows,
                &mut labels,
                format!("eq4_{gid}_{}", m.id),
                vec![(xi[gi], inst.big_m), (arc_use[gi][mi], -1.0)],
                Sense::Ge,
                0.0,
            );
        }
    }

    // Route structure.
    for (gi, g) in inst.shipments.iter().enumerate() {
        let gid = g.id.as_str();
        let mut src_terms: Vec<(usize, f64)> = arcs
            .iter()
            .enumerate()
            .filter(|(_, m)| m.head == g.origin)
            .map(|(mi, _)| (arc_use[gi][mi], 1.0))
            .collect();
        src_terms.push((route[gi], -1.0));
        push_row(
            &mut rows,
            &mut labels,
            format!("bal_src_{gid}"),
            src_terms,
            Sense::Eq,
            0.0,
        );

        let mut dst_terms: Vec<(usize, f64)> = arcs
            .iter()
            .enumerate()
            .filter(|(_, m)| m.tail == g.destination)
            .map(|(mi, _)| (arc_use[gi][mi], 1.0))
            .collect();
        dst_terms.push((route[gi], -1.0));
        push_row(
            &mut rows,
            &mut labels,
            format!("bal_dst_{gid}"),
            dst_terms,
            Sense::Eq,
            0.0,
        );

        push_row(
            &mut rows,
            &mut labels,
            format!("bal_xi_{gid}"),
            vec![(xi[gi], 1.0), (route[gi], -1.0)],
            Sense::Le,
            0.0,
        );

        for k in net.nodes() {
            if k.id == g.origin || k.id == g.destination {
                continue;
            }
            let inbound: Vec<usize> = arcs
                .iter()
                .enumerate()
                .filter(|(_, m)| m.tail == k.id)
                .map(|(mi, _)| arc_use[gi][mi])
                .collect();
            let outbound: Vec<usize> = arcs
                .iter()
                .enumerate()
                .filter(|(_, m)| m.head == k.id)
                .map(|(mi, _)| arc_use[gi][mi])
                .collect();
            if !inbound.is_empty() || !outbound.is_empty() {
                let mut terms: Vec<(usize, f64)> =
                    inbound.iter().map(|&v| (v, 1.0)).collect();
                terms.extend(outbound.iter().map(|&v| (v, -1.0)));
                push_row(
                    &mut rows,
                    &mut labels,
                    format!("bal_{}_{gid}", k.id),
                    terms,
                    Sense::Eq,
                    0.0,
                );
            }
            if !inbound.is_empty() {
                push_row(
                    &mut rows,
                    &mut labels,
                    format!("deg_{}_{gid}", k.id),
                    inbound.iter().map(|&v| (v, 1.0)).collect(),
                    Sense::Le,
                    1.0,
                );
            }
        }
    }

    let objective: Vec<(usize, f64)> = inst
        .shipments
        .iter()
        .enumerate()
        .filter(|(_, g)| g.full_revenue() != 0.0)
        .map(|(gi, g)| (xi[gi], g.full_revenue()))
        .collect();

    Ok(MilpModel {
        variables: vars,
        constraints: rows,
        objective,
        constant_offset: fixed_express_cost(inst).capacity_km_cost,
        shipments: inst
            .shipments
            .iter()
            .map(|g| ShipmentMeta {
                id: g.id.clone(),
                origin: g.origin.clone(),
                destination: g.destination.clone(),
            })
            .collect(),
        arc_ends: arcs
            .iter()
            .map(|m| (m.id.clone(), (m.head.clone(), m.tail.clone())))
            .collect(),
    })
}

/// A row evaluated outside its allowed side.
#[derive(Debug, Clone, PartialEq)]
pub struct RowViolation {
    pub label: String,
    pub activity: f64,
    pub sense: Sense,
    pub rhs: f64,
    /// How far outside, always positive.
    pub amount: f64,
}

impl fmt::Display for RowViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: activity {} violates {} {} by {}",
            self.label, self.activity, self.sense, self.rhs, self.amount
        )
    }
}

/// A variable outside its box or off its binary lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct VarViolation {
    pub variable: String,
    pub value: f64,
    pub problem: String,
}

impl fmt::Display for VarViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}: {}", self.variable, self.value, self.problem)
    }
}

/// Outcome of auditing an assignment against the model.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub gross_objective: f64,
    pub net_objective: f64,
    pub row_violations: Vec<RowViolation>,
    pub var_violations: Vec<VarViolation>,
    /// Product identities `y = x·x` and `z = xi·x`, checked wherever the
    /// involved usages are binary-valued.
    pub identity_violations: Vec<VarViolation>,
    /// Structural oddities that the rows themselves permit, like closed
    /// cycles riding along with a route.
    pub warnings: Vec<String>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.row_violations.is_empty()
            && self.var_violations.is_empty()
            && self.identity_violations.is_empty()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum CheckError {
    #[error("assignment has {got} values, model has {expected} variables")]
    LengthMismatch { expected: usize, got: usize },
    #[error("no value for variable {0}")]
    MissingVariable(String),
    #[error("value for unknown variable {0}")]
    UnknownVariable(String),
}

/// Builds a dense assignment vector from named values; every model variable
/// must be present and nothing else.
pub fn assignment_from_named(
    model: &MilpModel,
    named: &BTreeMap<String, f64>,
) -> Result<Vec<f64>, CheckError> {
    for name in named.keys() {
        if model.var_index(name).is_none() {
            return Err(CheckError::UnknownVariable(name.clone()));
        }
    }
    model
        .variables
        .iter()
        .map(|v| {
            named
                .get(&v.name)
                .copied()
                .ok_or_else(|| CheckError::MissingVariable(v.name.clone()))
        })
        .collect()
}

fn is_binary_valued(v: f64, tol: f64) -> bool {
    (v.abs() <= tol) || ((v - 1.0).abs() <= tol)
}

/// Audits an assignment: every row, every bound, binary integrality, the
/// two product identities at binary points, and route shape (reporting
/// cycle artifacts as warnings, since the rows genuinely allow them).
pub fn check_solution(
    model: &MilpModel,
    values: &[f64],
    tol: f64,
) -> Result<FeasibilityReport, CheckError> {
    if values.len() != model.variables.len() {
        return Err(CheckError::LengthMismatch {
            expected: model.variables.len(),
            got: values.len(),
        });
    }

    let mut row_violations = Vec::new();
    for row in &model.constraints {
        let activity: f64 = row.terms.iter().map(|&(v, c)| c * values[v]).sum();
        let amount = match row.sense {
            Sense::Le => activity - row.rhs,
            Sense::Ge => row.rhs - activity,
            Sense::Eq => (activity - row.rhs).abs(),
        };
        if amount > tol {
            row_violations.push(RowViolation {
                label: row.label.clone(),
                activity,
                sense: row.sense,
                rhs: row.rhs,
                amount,
            });
        }
    }

    let mut var_violations = Vec::new();
    for (v, var) in model.variables.iter().enumerate() {
        let val = values[v];
        if val < var.lower - tol || val > var.upper + tol {
            var_violations.push(VarViolation {
                variable: var.name.clone(),
                value: val,
                problem: format!("outside bounds [{}, {}]", var.lower, var.upper),
            });
        }
        if var.binary && !is_binary_valued(val, tol) {
            var_violations.push(VarViolation {
                variable: var.name.clone(),
                value: val,
                problem: "binary variable off the 0/1 lattice".to_owned(),
            });
        }
    }

    // Indexes for identity checks and route reconstruction.
    let mut x_val: BTreeMap<(&ShipmentId, &ArcId), f64> = BTreeMap::new();
    let mut xi_val: BTreeMap<&ShipmentId, f64> = BTreeMap::new();
    let mut r_val: BTreeMap<&ShipmentId, f64> = BTreeMap::new();
    for (v, var) in model.variables.iter().enumerate() {
        match &var.kind {
            VarKind::ArcUse { shipment, arc } => {
                x_val.insert((shipment, arc), values[v]);
            }
            VarKind::AdmittedFraction { shipment } => {
                xi_val.insert(shipment, values[v]);
            }
            VarKind::RouteOpen { shipment } => {
                r_val.insert(shipment, values[v]);
            }
            _ => {}
        }
    }

    let mut identity_violations = Vec::new();
    for (v, var) in model.variables.iter().enumerate() {
        match &var.kind {
            VarKind::TransferUse { shipment, from, to } => {
                let (Some(&xm), Some(&xn)) =
                    (x_val.get(&(shipment, from)), x_val.get(&(shipment, to)))
                else {
                    continue;
                };
                if is_binary_valued(xm, tol) && is_binary_valued(xn, tol) {
                    let expected = xm.round() * xn.round();
                    if (values[v] - expected).abs() > tol {
                        identity_violations.push(VarViolation {
                            variable: var.name.clone(),
                            value: values[v],
                            problem: format!("transfer indicator should equal {expected}"),
                        });
                    }
                }
            }
            VarKind::AdmittedFlow { shipment, arc } => {
                let (Some(&xm), Some(&frac)) =
                    (x_val.get(&(shipment, arc)), xi_val.get(shipment))
                else {
                    continue;
                };
                if is_binary_valued(xm, tol) {
                    let expected = frac * xm.round();
                    if (values[v] - expected).abs() > tol {
                        identity_violations.push(VarViolation {
                            variable: var.name.clone(),
                            value: values[v],
                            problem: format!("admitted flow should equal {expected}"),
                        });
                    }
                }
            }
            _ => {}
        }
    }

    // Route shape per shipment: used arcs with an open route should form a
    // single origin→destination walk; anything extra is a cycle artifact.
    let mut warnings = Vec::new();
    for meta in &model.shipments {
        let used: Vec<&ArcId> = x_val
            .iter()
            .filter(|((sid, _), &v)| **sid == meta.id && (v - 1.0).abs() <= tol)
            .map(|((_, aid), _)| *aid)
            .collect();
        let open = r_val
            .get(&meta.id)
            .map(|&r| (r - 1.0).abs() <= tol)
            .unwrap_or(false);
        if !open {
            if !used.is_empty() {
                warnings.push(format!(
                    "shipment {}: {} arcs used while the route is closed (cycle artifact)",
                    meta.id,
                    used.len()
                ));
            }
            continue;
        }
        // Follow the unique outgoing used arc from the origin.
        let mut walked = 0usize;
        let mut at = meta.origin.clone();
        let mut reached = false;
        for _ in 0..=used.len() {
            if at == meta.destination {
                reached = true;
                break;
            }
            let mut next = used
                .iter()
                .filter(|aid| model.arc_ends[**aid].0 == at)
                .collect::<Vec<_>>();
            next.sort();
            match next.len() {
                0 => break,
                1 => {
                    at = model.arc_ends[*next[0]].1.clone();
                    walked += 1;
                }
                _ => break, // branching; the degree rows already flagged it
            }
        }
        if !reached {
            warnings.push(format!(
                "shipment {}: used arcs do not walk from {} to {}",
                meta.id, meta.origin, meta.destination
            ));
        } else if walked < used.len() {
            warnings.push(format!(
                "shipment {}: route carries {} extra used arcs off the walk (cycle artifact)",
                meta.id,
                used.len() - walked
            ));
        }
    }

    let gross_objective: f64 = model.objective.iter().map(|&(v, c)| c * values[v]).sum();
    Ok(FeasibilityReport {
        gross_objective,
        net_objective: gross_objective - model.constant_offset,
        row_violations,
        var_violations,
        identity_violations,
        warnings,
    })
}
