//! Command-line front end: validate instances, enumerate service chains,
//! solve assignments exactly, brute-force small instances, export the MILP
//! in LP format, generate seeded random instances, and audit solution files.
//!
//! Exit codes: 0 success, 1 validation failure, 2 infeasible/aborted/refused,
//! 3 I/O or usage error. Diagnostics go to standard error; data goes to the
//! requested file or standard output.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use ctt::chain::{enumerate_chains, chain_stats};
use ctt::generator::{generate, Profile};
use ctt::instance_io::{
    self, load_instance, load_solution, render_instance, render_solution, save_instance,
    RouteField, SolutionFile,
};
use ctt::lp_format::{export_lp, fmt_num};
use ctt::milp::{build_milp, check_solution, BuildOptions};
use ctt::network::Capacity;
use ctt::shipment::{fixed_express_cost, validate_instance, Instance};
use ctt::solver::{
    lift_assignment, oracle, solve, ChainChoice, OracleError, OracleOptions, Solution,
    SolveError, SolveOptions, SolveStatus,
};

const EXIT_OK: u8 = 0;
const EXIT_INVALID: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_USAGE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "ctt",
    version,
    about = "Car-to-train assignment on mixed scheduled/unscheduled rail freight networks",
    propagate_version = true
)]
struct CliConfig {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SearchArgs {
    /// Longest service chain considered, in arcs.
    #[arg(long, default_value_t = 8)]
    max_arcs: usize,
    /// Numeric tolerance for reported feasibility checks.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance file against every structural rule.
    Validate {
        /// Instance file (JSON).
        instance: PathBuf,
    },
    /// List each shipment's feasible service chains with times and counts.
    #[command(name = "enumerate-chains")]
    EnumerateChains {
        /// Instance file (JSON).
        instance: PathBuf,
        /// Only this shipment.
        #[arg(long)]
        shipment: Option<String>,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Solve the assignment to proven optimality and report the result.
    Solve {
        /// Instance file (JSON).
        instance: PathBuf,
        /// Write the solution document here (JSON).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also write the fully linearized model next to the solve.
        #[arg(long)]
        emit_lp: Option<PathBuf>,
        /// Stop after this many branch-and-bound nodes.
        #[arg(long)]
        node_budget: Option<u64>,
        /// Deterministic single-threaded search (the default).
        #[arg(long, conflicts_with = "workers")]
        single_worker: bool,
        /// Opt into parallel search with this many workers.
        #[arg(long)]
        workers: Option<usize>,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Exhaustively try every chain combination (small instances only).
    Oracle {
        /// Instance file (JSON).
        instance: PathBuf,
        /// Write the solution document here (JSON).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Refuse instances with more chain combinations than this.
        #[arg(long, default_value_t = 1e6)]
        oracle_cap: f64,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Write the assignment model as a CPLEX-LP file.
    #[command(name = "export-lp")]
    ExportLp {
        /// Instance file (JSON).
        instance: PathBuf,
        /// Write here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Box the transfer indicators in [0, 1] instead of declaring them
        /// binary.
        #[arg(long)]
        relax_y: bool,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Generate a seeded random instance.
    Gen {
        /// Write here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Random seed; the same seed always yields the same instance.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Classification yards on the backbone line.
        #[arg(long, default_value_t = 4)]
        yards: usize,
        /// Logistics centers hosting express stops.
        #[arg(long, default_value_t = 2)]
        centers: usize,
        /// Shipments to generate.
        #[arg(long, default_value_t = 6)]
        shipments: usize,
        /// Share of shipments left routable: loose, mixed, or tight.
        #[arg(long, default_value = "mixed")]
        profile: String,
    },
    /// Audit a solution document against an instance, row by row.
    Check {
        /// Instance file (JSON).
        instance: PathBuf,
        /// Solution document produced by `solve` or `oracle`.
        solution: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
    },
}

fn main() -> ExitCode {
    let cli = match CliConfig::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            // Help and version belong on stdout; true errors on stderr.
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    ExitCode::from(run(cli))
}

fn run(cli: CliConfig) -> u8 {
    match cli.command {
        Command::Validate { instance } => cmd_validate(&instance),
        Command::EnumerateChains {
            instance,
            shipment,
            search,
        } => cmd_enumerate(&instance, shipment.as_deref(), &search),
        Command::Solve {
            instance,
            output,
            emit_lp,
            node_budget,
            single_worker: _,
            workers,
            search,
        } => cmd_solve(
            &instance,
            output.as_deref(),
            emit_lp.as_deref(),
            node_budget,
            workers.unwrap_or(1),
            &search,
        ),
        Command::Oracle {
            instance,
            output,
            oracle_cap,
            search,
        } => cmd_oracle(&instance, output.as_deref(), oracle_cap, &search),
        Command::ExportLp {
            instance,
            output,
            relax_y,
            search: _,
        } => cmd_export_lp(&instance, output.as_deref(), relax_y),
        Command::Gen {
            output,
            seed,
            yards,
            centers,
            shipments,
            profile,
        } => cmd_gen(output.as_deref(), seed, yards, centers, shipments, &profile),
        Command::Check {
            instance,
            solution,
            search,
        } => cmd_check(&instance, &solution, &search),
    }
}

fn read_instance(path: &Path) -> Result<Instance, u8> {
    load_instance(path).map_err(|err| {
        eprintln!("error: {err}");
        EXIT_USAGE
    })
}

fn write_or_print(path: Option<&Path>, text: &str) -> u8 {
    match path {
        Some(p) => match std::fs::write(p, text) {
            Ok(()) => EXIT_OK,
            Err(err) => {
                eprintln!("error: cannot write {}: {err}", p.display());
                EXIT_USAGE
            }
        },
        None => {
            print!("{text}");
            EXIT_OK
        }
    }
}

fn cmd_validate(path: &Path) -> u8 {
    let inst = match read_instance(path) {
        Ok(inst) => inst,
        Err(code) => return code,
    };
    let violations = validate_instance(&inst);
    if violations.is_empty() {
        println!(
            "ok: {} nodes, {} arcs, {} express trains, {} shipments",
            inst.network.nodes().len(),
            inst.network.arcs().len(),
            inst.network.express_trains().len(),
            inst.shipments.len()
        );
        EXIT_OK
    } else {
        for v in &violations {
            eprintln!("violation: {v}");
        }
        eprintln!("{} violations", violations.len());
        EXIT_INVALID
    }
}

fn cmd_enumerate(path: &Path, only: Option<&str>, search: &SearchArgs) -> u8 {
    let inst = match read_instance(path) {
        Ok(inst) => inst,
        Err(code) => return code,
    };
    let violations = validate_instance(&inst);
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("violation: {v}");
        }
        return EXIT_INVALID;
    }
    if let Some(id) = only {
        if !inst.shipments.iter().any(|g| g.id.as_str() == id) {
            eprintln!("error: no shipment named {id:?} in {}", path.display());
            return EXIT_USAGE;
        }
    }
    for g in &inst.shipments {
        if only.is_some_and(|id| id != g.id.as_str()) {
            continue;
        }
        let chains = enumerate_chains(&inst, g, search.max_arcs);
        println!(
            "shipment {} ({} -> {}): {} chains within {} h",
            g.id,
            g.origin,
            g.destination,
            chains.len(),
            fmt_num(g.due_date_h)
        );
        for (i, chain) in chains.iter().enumerate() {
            let arcs: Vec<&str> = chain.arcs.iter().map(|a| a.as_str()).collect();
            println!(
                "  [{}] {}  time {} h  reclassifications {}  block swaps {}",
                i + 1,
                arcs.join(" -> "),
                fmt_num(chain.total_time_h),
                chain.reclassification_count,
                chain.block_swap_count
            );
        }
    }
    EXIT_OK
}

/// Human-readable solve report. Net is recomputed from the very strings
/// printed for gross and the express constant, so the three lines always
/// agree at string level.
fn print_report(inst: &Instance, sol: &Solution, file: &SolutionFile) {
    println!("status: {}", file.solver.status);
    if sol.status == SolveStatus::Aborted {
        println!("bound gap: {}", fmt_num(sol.bound_gap));
    }
    println!("nodes explored: {}", sol.nodes_explored);
    println!();
    println!("shipments:");
    for outcome in &file.shipments {
        match &outcome.chain {
            RouteField::Rejected => println!("  {}: rejected", outcome.id),
            RouteField::Chain(arcs) => {
                let names: Vec<&str> = arcs.iter().map(|a| a.as_str()).collect();
                println!(
                    "  {}: {}  xi {}  cars {}  time {} h  due {} h  slack {} h",
                    outcome.id,
                    names.join(" -> "),
                    fmt_num(outcome.xi),
                    fmt_num(outcome.admitted_cars),
                    fmt_num(outcome.time_used_h),
                    fmt_num(outcome.due_date_h),
                    fmt_num(outcome.due_date_h - outcome.time_used_h),
                );
            }
        }
    }
    println!();
    println!("arc utilization:");
    for arc in &file.arcs {
        if arc.flow_cars == 0.0 {
            continue;
        }
        match arc.capacity {
            Capacity::Cars(cap) => println!(
                "  {}: {} / {} cars",
                arc.id,
                fmt_num(arc.flow_cars),
                fmt_num(cap)
            ),
            Capacity::Unbounded => {
                println!("  {}: {} cars (unbounded)", arc.id, fmt_num(arc.flow_cars))
            }
        }
    }
    println!();
    let gross_s = fmt_num(file.objective.gross);
    let constant_s = fmt_num(file.objective.express_constant);
    let net_printed = gross_s.parse::<f64>().expect("own format")
        - constant_s.parse::<f64>().expect("own format");
    println!("objective:");
    println!("  gross revenue:     {gross_s}");
    println!("  express constant:  {constant_s}");
    println!("  net objective:     {}", fmt_num(net_printed));
    let cost = fixed_express_cost(inst);
    println!(
        "  operating identity: capacity-km {} vs train ledger {} (discrepancy {})",
        fmt_num(cost.capacity_km_cost),
        fmt_num(cost.train_ledger_cost),
        fmt_num(cost.discrepancy)
    );
}

fn emit_solution(
    inst: &Instance,
    sol: &Solution,
    output: Option<&Path>,
) -> u8 {
    let file = instance_io::solution_file(inst, sol);
    print_report(inst, sol, &file);
    if let Some(path) = output {
        let code = write_or_print(Some(path), &render_solution(&file));
        if code != EXIT_OK {
            return code;
        }
        eprintln!("solution written to {}", path.display());
    }
    match sol.status {
        SolveStatus::Optimal => EXIT_OK,
        SolveStatus::InfeasibleTrivial | SolveStatus::Aborted => EXIT_INFEASIBLE,
    }
}

fn report_solve_error(err: SolveError) -> u8 {
    match err {
        SolveError::InvalidInstance(violations) => {
            for v in &violations {
                eprintln!("violation: {v}");
            }
            EXIT_INVALID
        }
    }
}

fn cmd_solve(
    path: &Path,
    output: Option<&Path>,
    emit_lp: Option<&Path>,
    node_budget: Option<u64>,
    workers: usize,
    search: &SearchArgs,
) -> u8 {
    let inst = match read_instance(path) {
        Ok(inst) => inst,
        Err(code) => return code,
    };
    let options = SolveOptions {
        max_arcs: search.max_arcs,
        tol: search.tol,
        node_budget,
        workers,
    };
    let sol = match solve(&inst, &options) {
        Ok(sol) => sol,
        Err(err) => return report_solve_error(err),
    };
    if let Some(lp_path) = emit_lp {
        let model = build_milp(&inst, BuildOptions::default()).expect("instance already validated");
        let code = write_or_print(Some(lp_path), &export_lp(&model));
        if code != EXIT_OK {
            return code;
        }
        eprintln!("model written to {}", lp_path.display());
    }
    emit_solution(&inst, &sol, output)
}

fn cmd_oracle(path: &Path, output: Option<&Path>, cap: f64, search: &SearchArgs) -> u8 {
    let inst = match read_instance(path) {
        Ok(inst) => inst,
        Err(code) => return code,
    };
    let options = OracleOptions {
        max_arcs: search.max_arcs,
        cap,
    };
    match oracle(&inst, &options) {
        Ok(sol) => emit_solution(&inst, &sol, output),
        Err(OracleError::InvalidInstance(violations)) => {
            for v in &violations {
                eprintln!("violation: {v}");
            }
            EXIT_INVALID
        }
        Err(err @ OracleError::TooManyCombinations { .. }) => {
            eprintln!("error: {err}");
            EXIT_INFEASIBLE
        }
    }
}

fn cmd_export_lp(path: &Path, output: Option<&Path>, relax_y: bool) -> u8 {
    let inst = match read_instance(path) {
        Ok(inst) => inst,
        Err(code) => return code,
    };
    let model = match build_milp(&inst, BuildOptions { relax_y }) {
        Ok(model) => model,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_INVALID;
        }
    };
    write_or_print(output, &export_lp(&model))
}

fn cmd_gen(
    output: Option<&Path>,
    seed: u64,
    yards: usize,
    centers: usize,
    shipments: usize,
    profile: &str,
) -> u8 {
    let profile: Profile = match profile.parse() {
        Ok(p) => p,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_USAGE;
        }
    };
    if yards == 0 || centers == 0 || shipments == 0 {
        eprintln!("error: --yards, --centers, and --shipments must all be at least 1");
        return EXIT_USAGE;
    }
    let inst = generate(seed, yards, centers, shipments, profile);
    match output {
        Some(path) => match save_instance(&inst, path) {
            Ok(()) => {
                eprintln!("instance written to {}", path.display());
                EXIT_OK
            }
            Err(err) => {
                eprintln!("error: {err}");
                EXIT_USAGE
            }
        },
        None => {
            print!("{}", render_instance(&inst));
            EXIT_OK
        }
    }
}

/// Rebuilds the chain choices recorded in a solution document and audits
/// them against the instance's model rows, then re-checks the file's own
/// arithmetic (objective lines and per-shipment car counts).
fn cmd_check(instance: &Path, solution: &Path, search: &SearchArgs) -> u8 {
    let inst = match read_instance(instance) {
        Ok(inst) => inst,
        Err(code) => return code,
    };
    let file = match load_solution(solution) {
        Ok(file) => file,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_USAGE;
        }
    };

    let mut problems: Vec<String> = Vec::new();

    // Reassemble assignments in instance order from the recorded outcomes.
    let mut assignments: Vec<ChainChoice> = Vec::new();
    for g in &inst.shipments {
        let Some(outcome) = file.shipments.iter().find(|o| o.id == g.id) else {
            problems.push(format!("shipment {} missing from the solution", g.id));
            continue;
        };
        match &outcome.chain {
            RouteField::Rejected => {
                if outcome.xi != 0.0 {
                    problems.push(format!("{}: rejected but xi is {}", g.id, outcome.xi));
                }
                assignments.push(ChainChoice {
                    shipment: g.id.clone(),
                    chain: None,
                    xi: 0.0,
                });
            }
            RouteField::Chain(arcs) => match chain_stats(&inst, g, arcs) {
                Ok(chain) => {
                    if (outcome.time_used_h - chain.total_time_h).abs() > search.tol {
                        problems.push(format!(
                            "{}: recorded time {} differs from chain time {}",
                            g.id, outcome.time_used_h, chain.total_time_h
                        ));
                    }
                    if (outcome.admitted_cars - outcome.xi * g.volume_cars).abs() > search.tol {
                        problems.push(format!(
                            "{}: admitted cars {} is not xi * volume",
                            g.id, outcome.admitted_cars
                        ));
                    }
                    assignments.push(ChainChoice {
                        shipment: g.id.clone(),
                        chain: Some(chain),
                        xi: outcome.xi,
                    });
                }
                Err(err) => {
                    problems.push(format!("{}: recorded chain is invalid: {err}", g.id));
                }
            },
        }
    }
    for outcome in &file.shipments {
        if !inst.shipments.iter().any(|g| g.id == outcome.id) {
            problems.push(format!("solution names unknown shipment {}", outcome.id));
        }
    }

    if problems.is_empty() {
        let gross: f64 = inst
            .shipments
            .iter()
            .zip(&assignments)
            .map(|(g, choice)| g.full_revenue() * choice.xi)
            .sum();
        let constant = fixed_express_cost(&inst).capacity_km_cost;
        if (file.objective.gross - gross).abs() > search.tol {
            problems.push(format!(
                "recorded gross {} differs from recomputed {}",
                file.objective.gross, gross
            ));
        }
        if file.objective.net != file.objective.gross - file.objective.express_constant {
            problems.push("net is not exactly gross minus express constant".to_owned());
        }
        if (file.objective.express_constant - constant).abs() > search.tol {
            problems.push(format!(
                "recorded express constant {} differs from recomputed {}",
                file.objective.express_constant, constant
            ));
        }

        match build_milp(&inst, BuildOptions::default()) {
            Ok(model) => {
                let shim = Solution {
                    assignments,
                    objective_gross: gross,
                    objective_net: gross - constant,
                    status: SolveStatus::Optimal,
                    bound_gap: 0.0,
                    nodes_explored: 0,
                };
                let values = lift_assignment(&model, &shim);
                let report = check_solution(&model, &values, search.tol)
                    .expect("lifted assignment covers every variable");
                for v in &report.row_violations {
                    problems.push(format!("row {v}"));
                }
                for v in &report.var_violations {
                    problems.push(format!("variable {v}"));
                }
                for v in &report.identity_violations {
                    problems.push(format!("identity {v}"));
                }
                for w in &report.warnings {
                    eprintln!("warning: {w}");
                }
            }
            Err(err) => {
                eprintln!("error: {err}");
                return EXIT_INVALID;
            }
        }
    }

    if problems.is_empty() {
        println!(
            "ok: solution satisfies all model rows at tolerance {}",
            fmt_num(search.tol)
        );
        EXIT_OK
    } else {
        for p in &problems {
            eprintln!("check failed: {p}");
        }
        eprintln!("{} problems", problems.len());
        EXIT_INVALID
    }
}
