//! Partial MaxSAT encoding of minimum pure decision trees, and decoding of
//! models back into trees.

mod layout;

use std::collections::BTreeMap;

pub use layout::{eta_index, lr, rr, LayoutEntry, LayoutJson, VariableLayout};

use crate::cnf::{exactly_one, Assignment, Clause, Lit, VarPool, WcnfFormula};
use crate::dataset::BinDataset;
use crate::tree::{DecisionTree, Node};
use crate::Error;

/// The encoding of one dataset at one node upper bound.
#[derive(Debug, Clone)]
pub struct MpdtInstance {
    pub layout: VariableLayout,
    pub formula: WcnfFormula,
    pub lb: usize,
    pub ub: usize,
    /// Distinct examples encoded (duplicates are merged).
    pub n_examples: usize,
}

impl MpdtInstance {
    /// Encodes `ds` with node bound `ub` and size lower bound `lb`.
    pub fn build(ds: &BinDataset, ub: usize, lb: usize) -> Result<Self, Error> {
        if ub % 2 == 0 {
            return Err(Error::EvenUpperBound(ub));
        }
        if lb < 3 || lb % 2 == 0 {
            return Err(Error::BadLowerBound(lb));
        }
        if ub < lb {
            return Err(Error::UpperBelowLower { ub, lb });
        }
        let conflicts = ds.check_separability();
        if !conflicts.is_empty() {
            return Err(Error::Inseparable(conflicts));
        }
        let mut unique: BTreeMap<&[bool], usize> = BTreeMap::new();
        for (x, &y) in ds.examples.iter().zip(&ds.labels) {
            unique.insert(x.as_slice(), y);
        }
        let examples: Vec<(&[bool], usize)> = unique.into_iter().collect();

        let mut pool = VarPool::new();
        let layout = VariableLayout::new(ub, ds.n_features, ds.n_classes, &mut pool);
        let mut enc = Emitter { lay: &layout, pool, f: WcnfFormula::new() };
        enc.f.n_vars = layout.n_vars();
        enc.soft();
        enc.node_usage(lb);
        enc.tree_layout()?;
        enc.features()?;
        enc.purity(&examples)?;
        enc.pruning();
        let mut formula = enc.f;
        formula.n_vars = formula.n_vars.max(enc.pool.n_vars());
        Ok(MpdtInstance { layout, formula, lb, ub, n_examples: examples.len() })
    }

    /// Reads the tree out of a model of the hard clauses.
    pub fn decode(&self, m: &Assignment) -> Result<DecisionTree, Error> {
        if m.len() < self.layout.n_vars() as usize {
            return Err(Error::NoModel("assignment shorter than the encoding"));
        }
        if let Some(i) = self.formula.hard.iter().position(|c| !m.satisfies(c)) {
            return Err(Error::Integrity(i));
        }
        let lay = &self.layout;
        let used: Vec<usize> = (1..=lay.n).filter(|&i| m.lit_value(lay.eta(i))).collect();
        // used nodes form a prefix 1..=s
        let mut nodes = Vec::with_capacity(used.len());
        for &i in &used {
            let integrity = || Error::Integrity(usize::MAX);
            if m.var_value(lay.v(i)) {
                let class = if lay.is_multiclass() {
                    (0..lay.n_classes).find(|&k| m.var_value(lay.c(k, i))).ok_or_else(integrity)?
                } else {
                    usize::from(m.var_value(lay.c(0, i)))
                };
                nodes.push(Node::Leaf { class });
            } else {
                let feature = (0..lay.k).find(|&r| m.var_value(lay.a(r, i))).ok_or_else(integrity)?;
                let left = lay
                    .lr(i)
                    .find(|&j| lay.l(i, j).is_some_and(|x| m.var_value(x)))
                    .ok_or_else(integrity)?;
                // node i is stored at position i - 1; the odd (right) child
                // receives value 1, the even (left) one value 0
                nodes.push(Node::Decision { feature, on1: left, on0: left - 1 });
            }
        }
        DecisionTree::new(nodes, 0, lay.k)
    }

    /// Values of the layout variables that describe `tree` laid out
    /// breadth-first (value-0 child first). Class variables that the tree
    /// leaves open are omitted. Auxiliary variables of the cardinality
    /// encodings are not covered; pass the result as assumptions.
    pub fn tree_literals(&self, tree: &DecisionTree) -> Result<Vec<Lit>, Error> {
        let lay = &self.layout;
        if tree.n_features() != lay.k {
            return Err(Error::FeatureMismatch { expected: lay.k, got: tree.n_features() });
        }
        if tree.size() > lay.n {
            return Err(Error::Config(format!("tree of size {} exceeds bound {}", tree.size(), lay.n)));
        }
        // order[i - 1] = tree node at position i
        let mut order = vec![tree.root()];
        let mut head = 0;
        while head < order.len() {
            if let Node::Decision { on1, on0, .. } = tree.nodes()[order[head]] {
                order.push(on0);
                order.push(on1);
            }
            head += 1;
        }
        let s = order.len();
        let mut pos_of = vec![0usize; tree.size()];
        for (p, &t) in order.iter().enumerate() {
            pos_of[t] = p + 1;
        }
        // ruled[i][r] = Some(v) when value v of feature r cannot reach node i
        let mut ruled: Vec<Vec<Option<bool>>> = vec![vec![None; lay.k]; lay.n + 1];
        let mut tested: Vec<Vec<bool>> = vec![vec![false; lay.k]; lay.n + 1];
        for i in 1..=s {
            if let Node::Decision { feature, on1, on0 } = tree.nodes()[order[i - 1]] {
                tested[i][feature] = true;
                for (child, value) in [(pos_of[on0], false), (pos_of[on1], true)] {
                    ruled[child] = ruled[i].clone();
                    ruled[child][feature] = Some(!value);
                    tested[child] = tested[i].clone();
                }
            }
        }

        let mut out = Vec::new();
        let mut set = |var: crate::cnf::Var, value: bool| out.push(var.lit(value));
        let (mut leaves, mut decisions) = (0usize, 0usize);
        for i in 1..=lay.n {
            let node = (i <= s).then(|| tree.nodes()[order[i - 1]]);
            if i % 2 == 1 {
                set(lay.eta_var(i), i <= s);
            }
            let is_leaf = matches!(node, Some(Node::Leaf { .. }));
            set(lay.v(i), is_leaf);
            let left = match node {
                Some(Node::Decision { on0, .. }) => Some(pos_of[on0]),
                _ => None,
            };
            for j in lay.lr(i) {
                set(lay.l(i, j).expect("in range"), left == Some(j));
                set(lay.r(i, j + 1).expect("in range"), left == Some(j));
            }
            for r in 0..lay.k {
                let assigned = matches!(node, Some(Node::Decision { feature, .. }) if feature == r);
                set(lay.a(r, i), assigned);
                set(lay.u(r, i), i <= s && tested[i][r]);
                set(lay.d(false, r, i), i <= s && ruled[i][r] == Some(false));
                set(lay.d(true, r, i), i <= s && ruled[i][r] == Some(true));
            }
            match node {
                Some(Node::Leaf { class }) => {
                    if lay.is_multiclass() {
                        for k in 0..lay.n_classes {
                            set(lay.c(k, i), k == class);
                        }
                    } else {
                        set(lay.c(0, i), class == 1);
                    }
                }
                _ if lay.is_multiclass() => {
                    for k in 0..lay.n_classes {
                        set(lay.c(k, i), false);
                    }
                }
                _ => {}
            }
            if let Some(n) = node {
                match n {
                    Node::Leaf { .. } => leaves += 1,
                    Node::Decision { .. } => decisions += 1,
                }
            }
            for t in 0..=i.div_ceil(2) {
                set(lay.lambda(t, i).expect("in range"), t <= leaves);
            }
            for t in 0..=i {
                set(lay.tau(t, i).expect("in range"), t <= decisions);
            }
        }
        Ok(out)
    }

    /// Variables whose assignments distinguish trees: every `a_{r,j}`.
    pub fn target_vars(&self) -> Vec<crate::cnf::Var> {
        let lay = &self.layout;
        (1..=lay.n).flat_map(|j| (0..lay.k).map(move |r| lay.a(r, j))).collect()
    }
}

struct Emitter<'a> {
    lay: &'a VariableLayout,
    pool: VarPool,
    f: WcnfFormula,
}

impl Emitter<'_> {
    fn hard(&mut self, c: Clause) {
        self.f.add_hard(c);
    }

    /// `conds → exactly one of lits`; with no literals, `¬conds`.
    fn exactly_one_if(&mut self, conds: &[Lit], lits: &[Lit]) -> Result<(), Error> {
        let negated: Vec<Lit> = conds.iter().map(|&c| !c).collect();
        if lits.is_empty() {
            self.hard(negated);
            return Ok(());
        }
        for mut c in exactly_one(lits, &mut self.pool)? {
            c.extend_from_slice(&negated);
            self.hard(c);
        }
        Ok(())
    }

    /// `x ↔ (a ∨ ⋀ conj)`, where `a = None` is constant false.
    fn define_or_and(&mut self, x: Lit, a: Option<Lit>, conj: &[Lit]) {
        for &c in conj {
            let mut cl = vec![!x, c];
            cl.extend(a);
            self.hard(cl);
        }
        if let Some(a) = a {
            self.hard(vec![!a, x]);
        }
        let mut cl: Clause = conj.iter().map(|&c| !c).collect();
        cl.push(x);
        self.hard(cl);
    }

    fn soft(&mut self) {
        for i in (1..=self.lay.n).step_by(2) {
            self.f.add_soft(vec![self.lay.eta_var(i).neg()], 1);
        }
    }

    fn node_usage(&mut self, lb: usize) {
        let lay = self.lay;
        for i in (3..=lay.n).step_by(2) {
            let eta = lay.eta_var(i).pos();
            self.hard(vec![eta, lay.v(i).neg()]);
            self.hard(vec![eta, lay.v(i - 1).neg()]);
            self.hard(vec![!eta, lay.eta_var(i - 2).pos()]);
        }
        self.hard(vec![lay.eta(lb)]);
    }

    fn tree_layout(&mut self) -> Result<(), Error> {
        let lay = self.lay;
        self.hard(vec![lay.v(1).neg()]);
        for i in 1..=lay.n {
            let lefts: Vec<usize> = lay.lr(i).collect();
            let vi = lay.v(i);
            if lefts.is_empty() {
                self.hard(vec![!lay.eta(i), vi.pos()]);
                continue;
            }
            let mut ls = Vec::with_capacity(lefts.len());
            for &j in &lefts {
                let l = lay.l(i, j).expect("in range").pos();
                let r = lay.r(i, j + 1).expect("sibling in range").pos();
                ls.push(l);
                self.hard(vec![vi.neg(), !l]);
                self.hard(vec![!l, r]);
                self.hard(vec![l, !r]);
                // a child of any node is itself used
                self.hard(vec![!l, lay.eta(j)]);
            }
            self.exactly_one_if(&[vi.neg(), lay.eta(i)], &ls)?;
        }
        for j in 2..=lay.n {
            let ps: Vec<Lit> = lay.parents(j).into_iter().map(|(_, p)| p.pos()).collect();
            self.exactly_one_if(&[lay.eta(j)], &ps)?;
        }
        Ok(())
    }

    fn features(&mut self) -> Result<(), Error> {
        let lay = self.lay;
        for j in 1..=lay.n {
            let parents = lay.parents(j);
            for r in 0..lay.k {
                let a = lay.a(r, j).pos();
                for value in [false, true] {
                    let d = lay.d(value, r, j).pos();
                    if j == 1 {
                        self.hard(vec![!d]);
                        continue;
                    }
                    // value 0 is ruled out below the right (odd) child, value 1
                    // below the left (even) child
                    let via_edge = (j % 2 == 1) != value;
                    let mut any_parent = vec![!d];
                    for &(i, p) in &parents {
                        let p = p.pos();
                        let dp = lay.d(value, r, i).pos();
                        any_parent.push(p);
                        self.hard(vec![!p, !dp, d]);
                        if via_edge {
                            let ai = lay.a(r, i).pos();
                            self.hard(vec![!p, !ai, d]);
                            self.hard(vec![!d, !p, ai, dp]);
                        } else {
                            self.hard(vec![!d, !p, dp]);
                        }
                    }
                    self.hard(any_parent);
                }

                let u = lay.u(r, j).pos();
                self.hard(vec![!a, u]);
                let mut reasons = vec![!u, a];
                for &(i, p) in &parents {
                    let p = p.pos();
                    let ui = lay.u(r, i).pos();
                    self.hard(vec![!ui, !p, !a]);
                    self.hard(vec![!ui, !p, u]);
                    self.hard(vec![!u, !p, a, ui]);
                    reasons.push(p);
                }
                self.hard(reasons);

                self.hard(vec![lay.v(j).neg(), !a]);
                // unused nodes carry no feature
                self.hard(vec![lay.eta(j), !a]);
            }
            let feats: Vec<Lit> = (0..lay.k).map(|r| lay.a(r, j).pos()).collect();
            self.exactly_one_if(&[lay.v(j).neg(), lay.eta(j)], &feats)?;
        }
        Ok(())
    }

    fn purity(&mut self, examples: &[(&[bool], usize)]) -> Result<(), Error> {
        let lay = self.lay;
        for j in 2..=lay.n {
            let v = lay.v(j).pos();
            if lay.is_multiclass() {
                for k in 0..lay.n_classes {
                    self.hard(vec![v, lay.c(k, j).neg()]);
                }
                let cs: Vec<Lit> = (0..lay.n_classes).map(|k| lay.c(k, j).pos()).collect();
                self.exactly_one_if(&[v], &cs)?;
            }
            for &(x, y) in examples {
                // an example of class y reaching leaf j forces the leaf to y
                let class_lit = if lay.is_multiclass() { lay.c(y, j).pos() } else { lay.c(0, j).lit(y == 1) };
                let mut cl = vec![!v, class_lit];
                cl.extend((0..lay.k).map(|r| lay.d(x[r], r, j).pos()));
                self.hard(cl);
            }
        }
        Ok(())
    }

    fn pruning(&mut self) {
        let lay = self.lay;
        for i in 1..=lay.n {
            let lam0 = lay.lambda(0, i).expect("λ_0").pos();
            let tau0 = lay.tau(0, i).expect("τ_0").pos();
            self.hard(vec![lam0]);
            self.hard(vec![tau0]);
            let v = lay.v(i).pos();
            let eta = lay.eta(i);
            for t in 1..=i.div_ceil(2) {
                let x = lay.lambda(t, i).expect("in range").pos();
                let prev = lay.lambda(t, i - 1).filter(|_| i > 1).map(|p| p.pos());
                let mut conj = vec![v, eta];
                if i > 1 {
                    conj.push(lay.lambda(t - 1, i - 1).expect("in range").pos());
                } else if t > 1 {
                    unreachable!("λ range at node 1 is [0, 1]");
                }
                self.define_or_and(x, prev, &conj);
            }
            for t in 1..=i {
                let x = lay.tau(t, i).expect("in range").pos();
                let prev = lay.tau(t, i - 1).filter(|_| i > 1).map(|p| p.pos());
                let mut conj = vec![!v, eta];
                if i > 1 {
                    conj.push(lay.tau(t - 1, i - 1).expect("in range").pos());
                } else if t > 1 {
                    unreachable!("τ range at node 1 is [0, 1]");
                }
                self.define_or_and(x, prev, &conj);
            }
            for t in 1..=i.div_ceil(2) {
                let x = lay.lambda(t, i).expect("in range").neg();
                let j = 2 * (i - t + 1);
                if let Some(l) = lay.l(i, j) {
                    self.hard(vec![x, l.neg()]);
                }
                if let Some(r) = lay.r(i, j + 1) {
                    self.hard(vec![x, r.neg()]);
                }
            }
            for t in i.div_ceil(2).max(1)..=i {
                let x = lay.tau(t, i).expect("in range").neg();
                if let Some(l) = lay.l(i, 2 * (t - 1)) {
                    self.hard(vec![x, l.neg()]);
                }
                if let Some(r) = lay.r(i, 2 * t - 1) {
                    self.hard(vec![x, r.neg()]);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests;
