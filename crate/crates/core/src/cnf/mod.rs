//! Propositional building blocks: variables, literals, clauses, weighted
//! formulas, cardinality encodings and DIMACS/WCNF text formats.

mod card;
mod io;
mod totalizer;

use std::fmt;
use std::ops::Not;

use serde::{Deserialize, Serialize};

pub use card::{exactly_one, exactly_one_with_threshold, PAIRWISE_THRESHOLD};
pub use io::{
    read_dimacs, read_dimacs_file, read_wcnf, read_wcnf_file, write_dimacs, write_wcnf,
    write_wcnf_file, Cnf,
};
pub use totalizer::IncTotalizer;

/// A propositional variable. Stored 0-based; DIMACS index is `index() + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Var(u32);

impl Var {
    pub const fn from_index(idx: u32) -> Self {
        Var(idx)
    }

    /// Builds a variable from its 1-based DIMACS index.
    pub fn from_dimacs(idx: u32) -> Self {
        assert!(idx >= 1, "DIMACS variable indices start at 1");
        Var(idx - 1)
    }

    #[inline]
    pub const fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub const fn dimacs(self) -> u32 {
        self.0 + 1
    }

    #[inline]
    pub const fn pos(self) -> Lit {
        Lit(self.0 << 1)
    }

    #[inline]
    pub const fn neg(self) -> Lit {
        Lit((self.0 << 1) | 1)
    }

    #[inline]
    pub const fn lit(self, positive: bool) -> Lit {
        if positive {
            self.pos()
        } else {
            self.neg()
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.dimacs())
    }
}

/// A literal, packed as `var << 1 | negated`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    #[inline]
    pub const fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    #[inline]
    pub const fn is_negated(self) -> bool {
        self.0 & 1 == 1
    }

    #[inline]
    pub const fn code(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub const fn from_code(code: u32) -> Self {
        Lit(code)
    }

    pub fn from_dimacs(value: i32) -> Self {
        assert!(value != 0, "0 is the DIMACS clause terminator, not a literal");
        let var = Var::from_dimacs(value.unsigned_abs());
        var.lit(value > 0)
    }

    pub fn to_dimacs(self) -> i32 {
        let v = self.var().dimacs() as i32;
        if self.is_negated() {
            -v
        } else {
            v
        }
    }
}

impl Not for Lit {
    type Output = Lit;

    #[inline]
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

pub type Clause = Vec<Lit>;

/// Hands out fresh variables. Never reissues an index.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VarPool {
    issued: u32,
}

impl VarPool {
    pub fn new() -> Self {
        Self::default()
    }

    /// A pool whose next variable follows `n_vars` already-used ones.
    pub fn starting_after(n_vars: u32) -> Self {
        VarPool { issued: n_vars }
    }

    pub fn new_var(&mut self) -> Var {
        let v = Var(self.issued);
        self.issued += 1;
        v
    }

    pub fn new_lit(&mut self) -> Lit {
        self.new_var().pos()
    }

    pub fn n_vars(&self) -> u32 {
        self.issued
    }

    /// Makes sure `var` counts as issued.
    pub fn reserve(&mut self, var: Var) {
        self.issued = self.issued.max(var.0 + 1);
    }
}

/// A total truth assignment, indexed by variable.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Assignment(Vec<bool>);

impl Assignment {
    pub fn new(values: Vec<bool>) -> Self {
        Assignment(values)
    }

    pub fn all_false(n_vars: usize) -> Self {
        Assignment(vec![false; n_vars])
    }

    /// Decodes bit `i` of `bits` as the value of variable `i`.
    pub fn from_bits(bits: u64, n_vars: usize) -> Self {
        Assignment((0..n_vars).map(|i| bits >> i & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Unassigned (out of range) variables read as false.
    #[inline]
    pub fn var_value(&self, var: Var) -> bool {
        self.0.get(var.index()).copied().unwrap_or(false)
    }

    #[inline]
    pub fn lit_value(&self, lit: Lit) -> bool {
        self.var_value(lit.var()) != lit.is_negated()
    }

    /// The literal over `var` that this assignment makes true.
    pub fn lit_of(&self, var: Var) -> Lit {
        var.lit(self.var_value(var))
    }

    pub fn set(&mut self, var: Var, value: bool) {
        if var.index() >= self.0.len() {
            self.0.resize(var.index() + 1, false);
        }
        self.0[var.index()] = value;
    }

    pub fn satisfies(&self, clause: &[Lit]) -> bool {
        clause.iter().any(|&l| self.lit_value(l))
    }

    pub fn values(&self) -> &[bool] {
        &self.0
    }
}

/// Hard clauses plus weighted soft clauses.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WcnfFormula {
    pub hard: Vec<Clause>,
    pub soft: Vec<(Clause, u64)>,
    pub n_vars: u32,
}

impl WcnfFormula {
    pub fn new() -> Self {
        Self::default()
    }

    fn note_vars(&mut self, clause: &[Lit]) {
        for l in clause {
            self.n_vars = self.n_vars.max(l.var().dimacs());
        }
    }

    pub fn add_hard(&mut self, clause: Clause) {
        self.note_vars(&clause);
        self.hard.push(clause);
    }

    pub fn add_soft(&mut self, clause: Clause, weight: u64) {
        assert!(weight >= 1, "soft clause weights are positive");
        self.note_vars(&clause);
        self.soft.push((clause, weight));
    }

    pub fn soft_weight_sum(&self) -> u64 {
        self.soft.iter().map(|(_, w)| w).sum()
    }

    /// `top` of the classic WCNF header: one more than the total soft weight.
    pub fn top(&self) -> u64 {
        self.soft_weight_sum() + 1
    }

    pub fn hard_satisfied(&self, a: &Assignment) -> bool {
        self.hard.iter().all(|c| a.satisfies(c))
    }

    /// Weight of falsified soft clauses.
    pub fn cost(&self, a: &Assignment) -> u64 {
        self.soft
            .iter()
            .filter(|(c, _)| !a.satisfies(c))
            .map(|(_, w)| w)
            .sum()
    }
}
