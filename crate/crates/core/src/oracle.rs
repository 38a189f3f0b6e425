//! Exhaustive reference solvers for tiny instances.

use std::collections::HashMap;

use crate::cnf::{Assignment, WcnfFormula};
use crate::dataset::BinDataset;
use crate::tree::{DecisionTree, Node};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_features: usize,
    pub max_examples: usize,
    pub max_size: usize,
    pub max_vars: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget { max_features: 6, max_examples: 24, max_size: 11, max_vars: 20 }
    }
}

/// Minimum soft cost over all assignments satisfying the hard clauses, or
/// `None` when there are none.
pub fn brute_force_maxsat(phi: &WcnfFormula, budget: &OracleBudget) -> Result<Option<u64>, Error> {
    let n = phi.n_vars as usize;
    if n > budget.max_vars || n >= 64 {
        return Err(Error::BudgetExceeded(format!("{n} variables")));
    }
    let mut best = None;
    for bits in 0..1u64 << n {
        let a = Assignment::from_bits(bits, n);
        if phi.hard_satisfied(&a) {
            let c = phi.cost(&a);
            best = Some(best.map_or(c, |b: u64| b.min(c)));
        }
    }
    Ok(best)
}

/// Size of the smallest pure decision tree for `ds`, with one such tree.
///
/// Searches every feature at every node: the best tree for an example subset
/// with a set of still-testable features is either a leaf (subset pure) or a
/// test on one of those features followed by the best trees for both halves.
pub fn brute_force_mpdt(ds: &BinDataset, budget: &OracleBudget) -> Result<(usize, DecisionTree), Error> {
    if ds.n_features > budget.max_features {
        return Err(Error::BudgetExceeded(format!("{} features", ds.n_features)));
    }
    if ds.len() > budget.max_examples {
        return Err(Error::BudgetExceeded(format!("{} examples", ds.len())));
    }
    let conflicts = ds.check_separability();
    if !conflicts.is_empty() {
        return Err(Error::Inseparable(conflicts));
    }
    let mut search = Search { ds, memo: HashMap::new() };
    let all_examples = if ds.is_empty() { 0 } else { u32::MAX >> (32 - ds.len()) };
    let all_features = (1u32 << ds.n_features) - 1;
    let size = search.best(all_examples, all_features);
    if size > budget.max_size {
        return Err(Error::BudgetExceeded(format!("minimum size {size} above {}", budget.max_size)));
    }
    let mut nodes = Vec::new();
    search.build(all_examples, all_features, &mut nodes);
    let tree = DecisionTree::new(nodes, 0, ds.n_features)?;
    Ok((size, tree))
}

struct Search<'a> {
    ds: &'a BinDataset,
    // (examples, features) -> (size, best feature or None for a leaf)
    memo: HashMap<(u32, u32), (usize, Option<usize>)>,
}

impl Search<'_> {
    fn pure_label(&self, ex: u32) -> Option<usize> {
        let mut label = None;
        for q in 0..self.ds.len() {
            if ex >> q & 1 == 1 {
                match label {
                    None => label = Some(self.ds.labels[q]),
                    Some(l) if l != self.ds.labels[q] => return None,
                    _ => {}
                }
            }
        }
        Some(label.unwrap_or(0))
    }

    fn halves(&self, ex: u32, f: usize) -> (u32, u32) {
        let mut on1 = 0;
        for q in 0..self.ds.len() {
            if ex >> q & 1 == 1 && self.ds.examples[q][f] {
                on1 |= 1 << q;
            }
        }
        (ex & !on1, on1)
    }

    fn solve(&mut self, ex: u32, feats: u32) -> (usize, Option<usize>) {
        if let Some(&r) = self.memo.get(&(ex, feats)) {
            return r;
        }
        let r = if self.pure_label(ex).is_some() {
            (1, None)
        } else {
            let mut best = (usize::MAX, None);
            for f in 0..self.ds.n_features {
                if feats >> f & 1 == 0 {
                    continue;
                }
                let (on0, on1) = self.halves(ex, f);
                let rest = feats & !(1 << f);
                let a = self.best(on0, rest);
                let b = self.best(on1, rest);
                let size = 1usize.saturating_add(a).saturating_add(b);
                if size < best.0 {
                    best = (size, Some(f));
                }
            }
            best
        };
        self.memo.insert((ex, feats), r);
        r
    }

    fn best(&mut self, ex: u32, feats: u32) -> usize {
        self.solve(ex, feats).0
    }

    fn build(&mut self, ex: u32, feats: u32, nodes: &mut Vec<Node>) -> usize {
        let id = nodes.len();
        match self.solve(ex, feats).1 {
            None => nodes.push(Node::Leaf { class: self.pure_label(ex).expect("pure") }),
            Some(f) => {
                nodes.push(Node::Leaf { class: 0 });
                let (on0_ex, on1_ex) = self.halves(ex, f);
                let rest = feats & !(1 << f);
                let on1 = self.build(on1_ex, rest, nodes);
                let on0 = self.build(on0_ex, rest, nodes);
                nodes[id] = Node::Decision { feature: f, on1, on0 };
            }
        }
        id
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::Var;
    use proptest::prelude::*;

    fn ds(rows: &[(&[u8], usize)]) -> BinDataset {
        BinDataset::from_bits(
            rows.iter().map(|(x, _)| x.iter().map(|&b| b == 1).collect()).collect(),
            rows.iter().map(|&(_, y)| y).collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_split() {
        let (s, t) = brute_force_mpdt(&ds(&[(&[0], 0), (&[1], 1)]), &OracleBudget::default()).unwrap();
        assert_eq!(s, 3);
        assert_eq!(t.size(), 3);
    }

    #[test]
    fn xor_needs_seven_nodes() {
        let xor = ds(&[(&[0, 0], 0), (&[0, 1], 1), (&[1, 0], 1), (&[1, 1], 0)]);
        let (s, t) = brute_force_mpdt(&xor, &OracleBudget::default()).unwrap();
        assert_eq!(s, 7);
        assert_eq!(t.evaluate(&xor).unwrap(), 1.0);
    }

    #[test]
    fn constant_labels_give_a_leaf() {
        let (s, _) = brute_force_mpdt(&ds(&[(&[0], 1), (&[1], 1)]), &OracleBudget::default()).unwrap();
        assert_eq!(s, 1);
    }

    #[test]
    fn inseparable_and_budget_errors() {
        let bad = ds(&[(&[0], 0), (&[0], 1)]);
        assert!(matches!(brute_force_mpdt(&bad, &OracleBudget::default()), Err(Error::Inseparable(_))));
        let wide = BinDataset::from_bits(vec![vec![false; 7]], vec![0]).unwrap();
        assert!(matches!(brute_force_mpdt(&wide, &OracleBudget::default()), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn maxsat_small_cases() {
        let x = Var::from_index(0);
        let y = Var::from_index(1);
        let mut f = WcnfFormula::new();
        f.add_hard(vec![x.pos(), y.pos()]);
        f.add_soft(vec![x.neg()], 1);
        f.add_soft(vec![y.neg()], 1);
        assert_eq!(brute_force_maxsat(&f, &OracleBudget::default()).unwrap(), Some(1));
        let mut g = WcnfFormula::new();
        g.add_hard(vec![x.pos()]);
        g.add_hard(vec![x.neg()]);
        assert_eq!(brute_force_maxsat(&g, &OracleBudget::default()).unwrap(), None);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(60))]
        #[test]
        fn adding_an_example_never_shrinks(
            k in 1usize..4,
            rows in prop::collection::vec((0u8..16, 0usize..2), 1..10),
        ) {
            let make = |rows: &[(u8, usize)]| {
                let mut seen = std::collections::BTreeMap::new();
                for &(x, y) in rows {
                    seen.entry(x & ((1 << k) - 1)).or_insert(y);
                }
                let (xs, ys): (Vec<_>, Vec<_>) = seen
                    .into_iter()
                    .map(|(x, y)| ((0..k).map(|b| x >> b & 1 == 1).collect::<Vec<_>>(), y))
                    .unzip();
                BinDataset::from_bits(xs, ys).unwrap()
            };
            let small = make(&rows[..rows.len() - 1]);
            let big = make(&rows);
            let budget = OracleBudget { max_size: 31, ..Default::default() };
            if small.is_empty() { return Ok(()); }
            let (a, t) = brute_force_mpdt(&small, &budget).unwrap();
            let (b, _) = brute_force_mpdt(&big, &budget).unwrap();
            prop_assert!(a <= b);
            prop_assert_eq!(t.evaluate(&small).unwrap(), 1.0);
        }
    }
}
