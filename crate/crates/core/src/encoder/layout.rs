use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cnf::{Lit, Var, VarPool};

/// Map between encoding symbols and solver variables.
///
/// Nodes are numbered 1..=n breadth-first; features 0..k. Maps indexed by node
/// keep an unused slot 0 so that `v[i]` is node `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableLayout {
    pub n: usize,
    pub k: usize,
    pub n_classes: usize,
    v: Vec<Var>,
    l: BTreeMap<(usize, usize), Var>,
    r: BTreeMap<(usize, usize), Var>,
    eta: Vec<Option<Var>>,
    a: Vec<Vec<Var>>,
    u: Vec<Vec<Var>>,
    d0: Vec<Vec<Var>>,
    d1: Vec<Vec<Var>>,
    // c[slot][j]; a single slot for two classes
    c: Vec<Vec<Var>>,
    lambda: Vec<Vec<Var>>,
    tau: Vec<Vec<Var>>,
    n_vars: u32,
}

/// Even candidates for the left child of `i`.
pub fn lr(i: usize, n: usize) -> impl Iterator<Item = usize> {
    let lo = i + 1 + (i + 1) % 2;
    let hi = (2 * i).min(n.saturating_sub(1));
    (lo..=hi).step_by(2)
}

/// Odd candidates for the right child of `i`.
pub fn rr(i: usize, n: usize) -> impl Iterator<Item = usize> {
    let lo = i + 2 + (i + 3) % 2;
    let hi = (2 * i + 1).min(n);
    (lo..=hi).step_by(2)
}

/// Index of the odd node whose η-variable covers node `i`.
pub const fn eta_index(i: usize) -> usize {
    if i % 2 == 0 {
        i + 1
    } else {
        i
    }
}

impl VariableLayout {
    pub fn new(n: usize, k: usize, n_classes: usize, pool: &mut VarPool) -> Self {
        let mut fresh = |count: usize| -> Vec<Var> { (0..count).map(|_| pool.new_var()).collect() };
        let node_vars = |fresh: &mut dyn FnMut(usize) -> Vec<Var>| {
            let mut v = fresh(n);
            v.insert(0, Var::from_index(u32::MAX >> 1));
            v
        };
        let v = node_vars(&mut fresh);
        let mut l = BTreeMap::new();
        for i in 1..=n {
            for j in lr(i, n) {
                l.insert((i, j), fresh(1)[0]);
            }
        }
        let mut r = BTreeMap::new();
        for i in 1..=n {
            for j in rr(i, n) {
                r.insert((i, j), fresh(1)[0]);
            }
        }
        let mut eta = vec![None; n + 1];
        for i in (1..=n).step_by(2) {
            eta[i] = Some(fresh(1)[0]);
        }
        let per_feature = |fresh: &mut dyn FnMut(usize) -> Vec<Var>| -> Vec<Vec<Var>> {
            (0..k).map(|_| node_vars(fresh)).collect()
        };
        let a = per_feature(&mut fresh);
        let u = per_feature(&mut fresh);
        let d0 = per_feature(&mut fresh);
        let d1 = per_feature(&mut fresh);
        let slots = if n_classes <= 2 { 1 } else { n_classes };
        let c = (0..slots).map(|_| node_vars(&mut fresh)).collect();
        let mut lambda = vec![Vec::new()];
        for i in 1..=n {
            lambda.push(fresh(i.div_ceil(2) + 1));
        }
        let mut tau = vec![Vec::new()];
        for i in 1..=n {
            tau.push(fresh(i + 1));
        }
        let n_vars = pool.n_vars();
        VariableLayout { n, k, n_classes, v, l, r, eta, a, u, d0, d1, c, lambda, tau, n_vars }
    }

    pub fn n_vars(&self) -> u32 {
        self.n_vars
    }

    pub fn lr(&self, i: usize) -> impl Iterator<Item = usize> {
        lr(i, self.n)
    }

    pub fn rr(&self, i: usize) -> impl Iterator<Item = usize> {
        rr(i, self.n)
    }

    pub fn v(&self, i: usize) -> Var {
        self.v[i]
    }

    pub fn l(&self, i: usize, j: usize) -> Option<Var> {
        self.l.get(&(i, j)).copied()
    }

    pub fn r(&self, i: usize, j: usize) -> Option<Var> {
        self.r.get(&(i, j)).copied()
    }

    /// `p_{j,i}`: the l or r variable linking parent `i` to child `j`.
    pub fn p(&self, j: usize, i: usize) -> Option<Var> {
        if j % 2 == 0 {
            self.l(i, j)
        } else {
            self.r(i, j)
        }
    }

    /// Candidate parents of `j` with their linking variables.
    pub fn parents(&self, j: usize) -> Vec<(usize, Var)> {
        (j / 2..j).filter_map(|i| self.p(j, i).map(|p| (i, p))).collect()
    }

    /// `η_i` for odd `i`.
    pub fn eta_var(&self, i: usize) -> Var {
        self.eta[i].expect("η exists for odd nodes")
    }

    /// `η(i)` as a positive literal.
    pub fn eta(&self, i: usize) -> Lit {
        self.eta_var(eta_index(i)).pos()
    }

    pub fn a(&self, r: usize, j: usize) -> Var {
        self.a[r][j]
    }

    pub fn u(&self, r: usize, j: usize) -> Var {
        self.u[r][j]
    }

    pub fn d(&self, value: bool, r: usize, j: usize) -> Var {
        if value {
            self.d1[r][j]
        } else {
            self.d0[r][j]
        }
    }

    /// Class variable for slot `k`; binary datasets have only slot 0 (`c_j`).
    pub fn c(&self, k: usize, j: usize) -> Var {
        self.c[k][j]
    }

    pub fn is_multiclass(&self) -> bool {
        self.c.len() > 1
    }

    pub fn lambda(&self, t: usize, i: usize) -> Option<Var> {
        self.lambda.get(i).and_then(|row| row.get(t)).copied()
    }

    pub fn tau(&self, t: usize, i: usize) -> Option<Var> {
        self.tau.get(i).and_then(|row| row.get(t)).copied()
    }

    /// Every variable with its symbol and indices, in allocation order.
    pub fn entries(&self) -> Vec<LayoutEntry> {
        let mut out = Vec::new();
        let mut push = |name: &str, index: Vec<usize>, var: Var| {
            out.push(LayoutEntry { name: name.to_string(), index, var: var.dimacs() });
        };
        for i in 1..=self.n {
            push("v", vec![i], self.v[i]);
        }
        for (&(i, j), &x) in &self.l {
            push("l", vec![i, j], x);
        }
        for (&(i, j), &x) in &self.r {
            push("r", vec![i, j], x);
        }
        for i in (1..=self.n).step_by(2) {
            push("eta", vec![i], self.eta_var(i));
        }
        for (name, table) in [("a", &self.a), ("u", &self.u), ("d0", &self.d0), ("d1", &self.d1)] {
            for (r, row) in table.iter().enumerate() {
                for j in 1..=self.n {
                    push(name, vec![r, j], row[j]);
                }
            }
        }
        for (k, row) in self.c.iter().enumerate() {
            for j in 1..=self.n {
                if self.is_multiclass() {
                    push("c", vec![k, j], row[j]);
                } else {
                    push("c", vec![j], row[j]);
                }
            }
        }
        for i in 1..=self.n {
            for (t, &x) in self.lambda[i].iter().enumerate() {
                push("lambda", vec![t, i], x);
            }
        }
        for i in 1..=self.n {
            for (t, &x) in self.tau[i].iter().enumerate() {
                push("tau", vec![t, i], x);
            }
        }
        out
    }

    pub fn to_json(&self) -> LayoutJson {
        LayoutJson {
            n: self.n,
            k: self.k,
            n_classes: self.n_classes,
            n_vars: self.n_vars,
            variables: self.entries(),
        }
    }
}

/// One encoding variable; `var` is the 1-based DIMACS index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutEntry {
    pub name: String,
    pub index: Vec<usize>,
    pub var: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutJson {
    pub n: usize,
    pub k: usize,
    pub n_classes: usize,
    pub n_vars: u32,
    pub variables: Vec<LayoutEntry>,
}
