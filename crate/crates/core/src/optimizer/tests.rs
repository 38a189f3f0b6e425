use super::*;
use crate::oracle::{brute_force_maxsat, OracleBudget};
use proptest::prelude::*;

fn v(i: u32) -> Var {
    Var::from_index(i)
}

fn or_with_two_softs() -> WcnfFormula {
    let mut f = WcnfFormula::new();
    f.add_hard(vec![v(0).pos(), v(1).pos()]);
    f.add_soft(vec![v(0).neg()], 1);
    f.add_soft(vec![v(1).neg()], 1);
    f
}

#[test]
fn cost_one_for_a_disjunction() {
    let out = linear_maxsat(&or_with_two_softs(), None);
    assert_eq!(out.status, SolveStatus::Optimal);
    assert_eq!(out.cost, 1);
    assert_eq!(or_with_two_softs().cost(out.model.as_ref().unwrap()), 1);
}

#[test]
fn no_softs_means_one_query() {
    let mut f = WcnfFormula::new();
    f.add_hard(vec![v(0).pos()]);
    let out = linear_maxsat(&f, None);
    assert_eq!((out.status, out.cost), (SolveStatus::Optimal, 0));
    assert_eq!(out.progress.len(), 1);
}

#[test]
fn contradictory_hard_clauses() {
    let mut f = WcnfFormula::new();
    f.add_hard(vec![v(0).pos()]);
    f.add_hard(vec![v(0).neg()]);
    f.add_soft(vec![v(1).pos()], 3);
    let out = linear_maxsat(&f, None);
    assert_eq!(out.status, SolveStatus::Unsat);
    assert_eq!(out.cost, 4);
    assert!(out.model.is_none());
}

#[test]
fn expired_deadline_gives_unknown() {
    let f = or_with_two_softs();
    let past = Instant::now() - std::time::Duration::from_secs(1);
    let out = linear_maxsat(&f, Some(past));
    assert_eq!(out.status, SolveStatus::Unknown);
    assert!(out.model.is_none());
}

#[test]
fn retained_solver_holds_only_optimal_models() {
    let mut f = or_with_two_softs();
    f.add_soft(vec![v(2).pos()], 2);
    let mut out = linear_maxsat(&f, None);
    assert_eq!(out.cost, 1);
    let mut n = 0;
    while out.solver.solve(&[]) == SatResult::Sat {
        let m = out.solver.model().unwrap().clone();
        assert!(f.cost(&m) <= 1);
        let block: Clause = (0..3).map(|i| !m.lit_of(v(i))).collect();
        out.solver.add_clause(&block);
        n += 1;
    }
    // x xor y, z true
    assert_eq!(n, 2);
}

#[test]
fn mdsol_k_zero() {
    let mut out = linear_maxsat(&or_with_two_softs(), None);
    let run = mdsol(&mut out, &[v(0), v(1)], &MdsolConfig { k: 0, ..Default::default() });
    assert!(run.solutions.is_empty());
}

#[test]
fn mdsol_exhausts_two_models() {
    let mut out = linear_maxsat(&or_with_two_softs(), None);
    let run = mdsol(&mut out, &[v(0), v(1)], &MdsolConfig { k: 5, ..Default::default() });
    assert_eq!(run.solutions.len(), 2);
    assert!(run.exhausted);
    let p: Vec<(bool, bool)> =
        run.solutions.iter().map(|m| (m.var_value(v(0)), m.var_value(v(1)))).collect();
    assert_ne!(p[0], p[1]);
}

/// Models over `n` free variables with hard clauses `hard`; the second
/// diverse solution must minimize agreement with the first.
#[test]
fn second_solution_is_most_diverse() {
    let mut f = WcnfFormula::new();
    // at least two of four variables true
    let vars: Vec<Var> = (0..4).map(v).collect();
    for skip in 0..4 {
        let c: Clause = vars.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, x)| x.pos()).collect();
        f.add_hard(c);
    }
    let mut out = linear_maxsat(&f, None);
    let run = mdsol(&mut out, &vars, &MdsolConfig { k: 2, ..Default::default() });
    assert_eq!(run.solutions.len(), 2);
    let first: Vec<bool> = vars.iter().map(|&x| run.solutions[0].var_value(x)).collect();
    let agreement = |bits: u32| (0..4).filter(|&i| (bits >> i & 1 == 1) == first[i]).count() as u64;
    let best = (0..16u32)
        .filter(|&b| b.count_ones() >= 2)
        .filter(|&b| (0..4).any(|i| (b >> i & 1 == 1) != first[i]))
        .map(agreement)
        .min()
        .unwrap();
    assert_eq!(run.costs[1], best);
    let second: u32 = (0..4).filter(|&i| run.solutions[1].var_value(vars[i])).map(|i| 1 << i).sum();
    assert_eq!(agreement(second), best);
}

#[test]
fn overlap_matches_literal_diversity_on_fixed_weight_models() {
    // exactly two of four true: every model sets the same number of targets
    let vars: Vec<Var> = (0..4).map(v).collect();
    let mut f = WcnfFormula::new();
    for skip in 0..4 {
        let c: Clause = vars.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, x)| x.pos()).collect();
        f.add_hard(c);
        let c: Clause = vars.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, x)| x.neg()).collect();
        f.add_hard(c);
    }
    let mut a = linear_maxsat(&f, None);
    let mut b = linear_maxsat(&f, None);
    let ra = mdsol(&mut a, &vars, &MdsolConfig { k: 10, ..Default::default() });
    let rb = mdsol(&mut b, &vars, &MdsolConfig { k: 10, diversity: Diversity::Overlap, ..Default::default() });
    assert_eq!(ra.solutions.len(), 6);
    assert_eq!(rb.solutions.len(), 6);
    // every round reaches the same optimal diversity cost
    assert_eq!(ra.costs, rb.costs);
}

fn arb_wcnf() -> impl Strategy<Value = WcnfFormula> {
    (1u32..=12, 0usize..20, 0usize..12).prop_flat_map(|(n, nh, ns)| {
        let lit = (0..n, any::<bool>()).prop_map(|(x, s)| v(x).lit(s));
        let clause = prop::collection::vec(lit, 1..4);
        (
            Just(n),
            prop::collection::vec(clause.clone(), nh),
            prop::collection::vec((clause, 1u64..4), ns),
        )
            .prop_map(|(n, hard, soft)| {
                let mut f = WcnfFormula::new();
                f.n_vars = n;
                for c in hard {
                    f.add_hard(c);
                }
                for (c, w) in soft {
                    f.add_soft(c, w);
                }
                f
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]
    #[test]
    fn agrees_with_enumeration(f in arb_wcnf()) {
        let want = brute_force_maxsat(&f, &OracleBudget::default()).unwrap();
        let out = linear_maxsat(&f, None);
        match want {
            None => prop_assert_eq!(out.status, SolveStatus::Unsat),
            Some(c) => {
                prop_assert_eq!(out.status, SolveStatus::Optimal);
                prop_assert_eq!(out.cost, c);
                prop_assert_eq!(f.cost(out.model.as_ref().unwrap()), c);
                prop_assert!(out.progress.windows(2).all(|w| w[0].cost > w[1].cost));
            }
        }
    }
}
