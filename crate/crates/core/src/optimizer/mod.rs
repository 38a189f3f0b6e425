//! Linear SAT-UNSAT MaxSAT search and diverse optimal-solution extraction.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cnf::{Assignment, Clause, IncTotalizer, Lit, Var, VarPool, WcnfFormula};
use crate::sat::{SatResult, Solver, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    /// The cost is proven minimal.
    Optimal,
    /// The time budget ran out after a model was found.
    Feasible,
    /// The hard clauses are unsatisfiable.
    Unsat,
    /// The time budget ran out before any model was found.
    Unknown,
}

/// One improved upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProgressPoint {
    pub seconds: f64,
    pub cost: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MaxSatConfig {
    pub deadline: Option<Instant>,
    pub seed: u64,
}

/// Result of [`linear_maxsat`].
///
/// After an `Optimal` or `Feasible` run the solver holds the hard clauses, the
/// relaxed soft clauses and the bound `cost <= self.cost` as permanent
/// clauses, so its models are exactly the models of cost at most `cost`.
#[derive(Debug)]
pub struct SolveOutcome {
    pub cost: u64,
    pub model: Option<Assignment>,
    pub status: SolveStatus,
    pub solver: Solver,
    pub pool: VarPool,
    pub progress: Vec<ProgressPoint>,
}

/// Linear search with the default configuration.
pub fn linear_maxsat(phi: &WcnfFormula, deadline: Option<Instant>) -> SolveOutcome {
    linear_maxsat_with(phi, &MaxSatConfig { deadline, ..Default::default() }, &mut |_| {})
}

/// Linear SAT-UNSAT search; `observe` sees every improved bound as it is found.
pub fn linear_maxsat_with(
    phi: &WcnfFormula,
    cfg: &MaxSatConfig,
    observe: &mut dyn FnMut(&ProgressPoint),
) -> SolveOutcome {
    let mut solver = Solver::with_config(SolverConfig { seed: cfg.seed, ..Default::default() });
    solver.reserve_vars(phi.n_vars);
    solver.set_deadline(cfg.deadline);
    let mut pool = VarPool::starting_after(phi.n_vars);
    for c in &phi.hard {
        solver.add_clause(c);
    }
    let mut softs = Vec::with_capacity(phi.soft.len());
    for (c, w) in &phi.soft {
        let relax = if c.len() == 1 {
            !c[0]
        } else {
            let b = pool.new_lit();
            let mut relaxed = c.clone();
            relaxed.push(b);
            solver.add_clause(&relaxed);
            b
        };
        softs.push(Soft { clause: c.clone(), relax, weight: *w });
    }
    let inner = search(&mut solver, &mut pool, &softs, true, observe);
    SolveOutcome {
        cost: inner.cost,
        model: inner.model,
        status: inner.status,
        solver,
        pool,
        progress: inner.progress,
    }
}

struct Soft {
    clause: Clause,
    // true whenever the clause is allowed to be falsified
    relax: Lit,
    weight: u64,
}

struct Search {
    cost: u64,
    model: Option<Assignment>,
    status: SolveStatus,
    progress: Vec<ProgressPoint>,
}

/// The linear loop over an already loaded solver. With `retain`, each found
/// bound is asserted permanently before the next (assumed) tightening.
fn search(
    solver: &mut Solver,
    pool: &mut VarPool,
    softs: &[Soft],
    retain: bool,
    observe: &mut dyn FnMut(&ProgressPoint),
) -> Search {
    let start = Instant::now();
    let top: u64 = softs.iter().map(|s| s.weight).sum::<u64>() + 1;
    let mut tot = IncTotalizer::weighted(softs.iter().map(|s| (s.relax, s.weight)));
    let mut out = Search { cost: top, model: None, status: SolveStatus::Unknown, progress: Vec::new() };
    let mut assumption: Option<Lit> = None;
    loop {
        let assumptions: Vec<Lit> = assumption.into_iter().collect();
        match solver.solve(&assumptions) {
            SatResult::Sat => {
                let m = solver.model().expect("model after SAT").clone();
                let cost: u64 = softs.iter().filter(|s| !m.satisfies(&s.clause)).map(|s| s.weight).sum();
                debug_assert!(cost < out.cost);
                out.cost = cost;
                out.model = Some(m);
                let point = ProgressPoint { seconds: start.elapsed().as_secs_f64(), cost };
                observe(&point);
                out.progress.push(point);
                if cost == 0 {
                    out.status = SolveStatus::Optimal;
                    return out;
                }
                if retain {
                    let units = tot.update(cost as usize, pool).expect("bounds decrease");
                    solver.add_clauses(&units);
                }
                let (defs, lit) = tot.bound_literal(cost as usize - 1, pool);
                solver.add_clauses(&defs);
                assumption = lit;
            }
            SatResult::Unsat => {
                out.status = if out.model.is_some() { SolveStatus::Optimal } else { SolveStatus::Unsat };
                return out;
            }
            SatResult::Interrupted => {
                out.status = if out.model.is_some() { SolveStatus::Feasible } else { SolveStatus::Unknown };
                return out;
            }
        }
    }
}

/// How the diversity objective is encoded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Diversity {
    /// One soft unit `(¬l, 1)` per target literal of every earlier solution.
    #[default]
    Literals,
    /// Weighted units over positive target literals only. Equivalent to
    /// `Literals` (cost shifted by a constant) when every model of the
    /// instance sets the same number of target variables true; much smaller.
    Overlap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MdsolConfig {
    pub k: usize,
    pub deadline: Option<Instant>,
    pub accept_suboptimal: bool,
    pub diversity: Diversity,
}

impl Default for MdsolConfig {
    fn default() -> Self {
        MdsolConfig { k: 100, deadline: None, accept_suboptimal: false, diversity: Diversity::Literals }
    }
}

/// Solutions of [`mdsol`] with their diversity cost (in `Literals` units).
#[derive(Debug, Clone, Default)]
pub struct DiverseRun {
    pub solutions: Vec<Assignment>,
    pub costs: Vec<u64>,
    /// Blocking clauses added to the solver, one per solution.
    pub blocking: Vec<Clause>,
    /// True when the instance ran out of solutions.
    pub exhausted: bool,
    /// True when the deadline cut the run short.
    pub timed_out: bool,
}

/// Diverse solution extraction over the clause set held by `state.solver`.
///
/// Each round solves a MaxSAT problem whose hard part is the solver's clause
/// set plus the blocking clauses of earlier solutions and whose soft part
/// prefers target polarities seen less often so far.
pub fn mdsol(state: &mut SolveOutcome, vars: &[Var], cfg: &MdsolConfig) -> DiverseRun {
    let mut run = DiverseRun::default();
    // multiplicity of each target literal over earlier solutions
    let mut seen: BTreeMap<Lit, u64> = BTreeMap::new();
    state.solver.set_deadline(cfg.deadline);
    while run.solutions.len() < cfg.k {
        let softs: Vec<Soft> = match cfg.diversity {
            Diversity::Literals => seen
                .iter()
                .map(|(&l, &w)| Soft { clause: vec![!l], relax: l, weight: w })
                .collect(),
            Diversity::Overlap => seen
                .iter()
                .filter(|(l, _)| !l.is_negated())
                .map(|(&l, &w)| Soft { clause: vec![!l], relax: l, weight: w })
                .collect(),
        };
        let res = search(&mut state.solver, &mut state.pool, &softs, false, &mut |_| {});
        let accept = match res.status {
            SolveStatus::Optimal => true,
            SolveStatus::Feasible => {
                run.timed_out = true;
                cfg.accept_suboptimal
            }
            SolveStatus::Unsat => {
                run.exhausted = true;
                false
            }
            SolveStatus::Unknown => {
                run.timed_out = true;
                false
            }
        };
        if !accept {
            break;
        }
        let m = res.model.expect("model for accepted status");
        let lits: Vec<Lit> = vars.iter().map(|&v| m.lit_of(v)).collect();
        let literal_cost: u64 = lits.iter().map(|l| seen.get(l).copied().unwrap_or(0)).sum();
        let block: Clause = lits.iter().map(|&l| !l).collect();
        state.solver.add_clause(&block);
        for &l in &lits {
            *seen.entry(l).or_insert(0) += 1;
        }
        run.blocking.push(block);
        run.costs.push(literal_cost);
        run.solutions.push(m);
        if run.timed_out {
            break;
        }
    }
    run
}

#[cfg(test)]
mod tests;
