use super::*;
use crate::cnf::Var;
use crate::oracle::{brute_force_mpdt, OracleBudget};
use crate::sat::{SatResult, Solver};
use proptest::prelude::*;

fn ds(rows: &[(&[u8], usize)]) -> BinDataset {
    BinDataset::from_bits(
        rows.iter().map(|(x, _)| x.iter().map(|&b| b == 1).collect()).collect(),
        rows.iter().map(|&(_, y)| y).collect(),
    )
    .unwrap()
}

fn solver_for(inst: &MpdtInstance) -> Solver {
    let mut s = Solver::new();
    s.reserve_vars(inst.formula.n_vars);
    for c in &inst.formula.hard {
        s.add_clause(c);
    }
    s
}

fn xor() -> BinDataset {
    ds(&[(&[0, 0], 0), (&[0, 1], 1), (&[1, 0], 1), (&[1, 1], 0)])
}

#[test]
fn soft_set_is_odd_nodes() {
    let d = ds(&[(&[0], 0), (&[1], 1)]);
    let inst = MpdtInstance::build(&d, 7, 3).unwrap();
    assert_eq!(inst.formula.soft.len(), 4);
    let etas: Vec<Var> = inst.formula.soft.iter().map(|(c, w)| {
        assert_eq!(*w, 1);
        assert_eq!(c.len(), 1);
        assert!(c[0].is_negated());
        c[0].var()
    }).collect();
    let want: Vec<Var> = [1, 3, 5, 7].iter().map(|&i| inst.layout.eta_var(i)).collect();
    assert_eq!(etas, want);
}

#[test]
fn bad_bounds_are_rejected() {
    let d = ds(&[(&[0], 0), (&[1], 1)]);
    assert!(matches!(MpdtInstance::build(&d, 4, 3), Err(Error::EvenUpperBound(4))));
    assert!(matches!(MpdtInstance::build(&d, 5, 4), Err(Error::BadLowerBound(4))));
    assert!(matches!(MpdtInstance::build(&d, 5, 1), Err(Error::BadLowerBound(1))));
    assert!(matches!(MpdtInstance::build(&d, 3, 5), Err(Error::UpperBelowLower { .. })));
    let bad = ds(&[(&[1], 0), (&[1], 1)]);
    assert!(matches!(MpdtInstance::build(&bad, 3, 3), Err(Error::Inseparable(_))));
}

#[test]
fn single_split_decodes() {
    let d = ds(&[(&[0], 0), (&[1], 1)]);
    let inst = MpdtInstance::build(&d, 3, 3).unwrap();
    let mut s = solver_for(&inst);
    assert_eq!(s.solve(&[]), SatResult::Sat);
    let t = inst.decode(s.model().unwrap()).unwrap();
    assert_eq!(t.size(), 3);
    assert_eq!(t.predict(&[false]).unwrap(), 0);
    assert_eq!(t.predict(&[true]).unwrap(), 1);
}

#[test]
fn node_usage_bounds() {
    let d = ds(&[(&[0], 0), (&[1], 1)]);
    let inst = MpdtInstance::build(&d, 5, 3).unwrap();
    let mut s = solver_for(&inst);
    // three nodes suffice, but the lower bound keeps node 3
    assert_eq!(s.solve(&[inst.layout.eta_var(5).neg()]), SatResult::Sat);
    assert_eq!(s.solve(&[inst.layout.eta_var(3).neg()]), SatResult::Unsat);
}

#[test]
fn xor_needs_seven_nodes() {
    let inst = MpdtInstance::build(&xor(), 9, 3).unwrap();
    let mut s = solver_for(&inst);
    assert_eq!(s.solve(&[inst.layout.eta_var(7).neg()]), SatResult::Unsat);
    assert_eq!(s.solve(&[inst.layout.eta_var(9).neg()]), SatResult::Sat);
    let t = inst.decode(s.model().unwrap()).unwrap();
    assert_eq!(t.size(), 7);
    assert_eq!(t.evaluate(&xor()).unwrap(), 1.0);
}

#[test]
fn three_classes_use_class_slots() {
    let d = ds(&[(&[0, 0], 0), (&[0, 1], 1), (&[1, 0], 2), (&[1, 1], 2)]);
    let inst = MpdtInstance::build(&d, 7, 3).unwrap();
    assert!(inst.layout.is_multiclass());
    let mut s = solver_for(&inst);
    assert_eq!(s.solve(&[inst.layout.eta_var(5).neg()]), SatResult::Unsat);
    assert_eq!(s.solve(&[inst.layout.eta_var(7).neg()]), SatResult::Sat);
    let t = inst.decode(s.model().unwrap()).unwrap();
    assert_eq!(t.size(), 5);
    assert_eq!(t.evaluate(&d).unwrap(), 1.0);
}

#[test]
fn decode_rejects_non_models() {
    let d = ds(&[(&[0], 0), (&[1], 1)]);
    let inst = MpdtInstance::build(&d, 3, 3).unwrap();
    let zero = Assignment::all_false(inst.formula.n_vars as usize);
    assert!(matches!(inst.decode(&zero), Err(Error::Integrity(_))));
}

#[test]
fn duplicates_are_merged() {
    let d = ds(&[(&[0], 0), (&[1], 1), (&[1], 1), (&[0], 0)]);
    let inst = MpdtInstance::build(&d, 3, 3).unwrap();
    assert_eq!(inst.n_examples, 2);
}

#[test]
fn layout_json_lists_every_variable() {
    let inst = MpdtInstance::build(&xor(), 7, 3).unwrap();
    let j = inst.layout.to_json();
    assert_eq!(j.variables.len() as u32, inst.layout.n_vars());
    assert!(j.variables.iter().any(|e| e.name == "eta" && e.index == vec![7]));
}

/// Pure random data over `k` features: labels from a random function of the
/// bits, one example per distinct vector.
fn arb_dataset(max_k: usize, max_m: usize, classes: usize) -> impl Strategy<Value = BinDataset> {
    (1..=max_k, prop::collection::vec((any::<u8>(), 0..classes), 2..=max_m)).prop_map(move |(k, rows)| {
        let mut seen = std::collections::BTreeMap::new();
        for (x, y) in rows {
            seen.entry(x as usize & ((1 << k) - 1)).or_insert(y);
        }
        let (xs, ys): (Vec<Vec<bool>>, Vec<usize>) =
            seen.into_iter().map(|(x, y)| ((0..k).map(|b| x >> b & 1 == 1).collect(), y)).unzip();
        let mut d = BinDataset::from_bits(xs, ys).unwrap();
        d.n_classes = classes;
        d
    })
}

fn check_model_invariants(inst: &MpdtInstance, m: &Assignment, d: &BinDataset) -> Result<(), TestCaseError> {
    let lay = &inst.layout;
    for i in (3..=lay.n).step_by(2) {
        prop_assert!(!m.var_value(lay.eta_var(i)) || m.var_value(lay.eta_var(i - 2)));
    }
    let t = inst.decode(m).unwrap();
    prop_assert_eq!(t.size() % 2, 1);
    prop_assert_eq!(t.evaluate(d).unwrap(), 1.0);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    /// Every minimum pure tree found by exhaustive search satisfies the
    /// encoding, and no smaller tree does.
    #[test]
    fn oracle_trees_satisfy_the_encoding(d in arb_dataset(3, 8, 2), extra in 0usize..2) {
        let (size, tree) = brute_force_mpdt(&d, &OracleBudget { max_size: 15, ..Default::default() }).unwrap();
        prop_assume!(size >= 3);
        let inst = MpdtInstance::build(&d, size + 2 * extra, 3).unwrap();
        let lits = inst.tree_literals(&tree).unwrap();
        let mut s = solver_for(&inst);
        prop_assert_eq!(s.solve(&lits), SatResult::Sat);
        let back = inst.decode(s.model().unwrap()).unwrap();
        prop_assert_eq!(back.size(), size);
        for x in &d.examples {
            prop_assert_eq!(back.predict(x).unwrap(), tree.predict(x).unwrap());
        }
        check_model_invariants(&inst, s.model().unwrap(), &d)?;
        if size > 3 {
            let smaller = inst.layout.eta_var(size).neg();
            prop_assert_eq!(s.solve(&[smaller]), SatResult::Unsat);
        }
    }

    #[test]
    fn multiclass_oracle_trees_satisfy_the_encoding(d in arb_dataset(3, 8, 3)) {
        let (size, tree) = brute_force_mpdt(&d, &OracleBudget { max_size: 15, ..Default::default() }).unwrap();
        prop_assume!(size >= 3);
        let inst = MpdtInstance::build(&d, size, 3).unwrap();
        let mut s = solver_for(&inst);
        prop_assert_eq!(s.solve(&inst.tree_literals(&tree).unwrap()), SatResult::Sat);
        check_model_invariants(&inst, s.model().unwrap(), &d)?;
        if size > 3 {
            prop_assert_eq!(s.solve(&[inst.layout.eta_var(size - 2).neg()]), SatResult::Unsat);
        }
    }

    /// Several models of one instance: each decodes to a pure tree.
    #[test]
    fn enumerated_models_are_pure(d in arb_dataset(3, 6, 2)) {
        let (size, _) = brute_force_mpdt(&d, &OracleBudget { max_size: 15, ..Default::default() }).unwrap();
        prop_assume!(size >= 3);
        let inst = MpdtInstance::build(&d, size + 2, 3).unwrap();
        let mut s = solver_for(&inst);
        for _ in 0..6 {
            if s.solve(&[]) != SatResult::Sat { break; }
            let m = s.model().unwrap().clone();
            check_model_invariants(&inst, &m, &d)?;
            let block: Vec<Lit> = inst.target_vars().iter().map(|&v| !m.lit_of(v)).collect();
            s.add_clause(&block);
        }
    }
}

/// `q(n) = C(2n) - 2 C(n)` isolates the part of the clause count that grows
/// faster than linearly in the node bound.
#[test]
fn clause_count_grows_quadratically_in_nodes() {
    let d = ds(&[(&[0, 0, 1], 0), (&[0, 1, 0], 1), (&[1, 0, 0], 1), (&[1, 1, 1], 0), (&[0, 0, 0], 1)]);
    let count = |n: usize| MpdtInstance::build(&d, n, 3).unwrap().formula.hard.len() as f64;
    let (c1, c2, c4) = (count(15), count(31), count(63));
    let ratio = (c4 - 2.0 * c2) / (c2 - 2.0 * c1);
    assert!((3.2..=4.8).contains(&ratio), "ratio {ratio}");
}
