use super::{Clause, Lit, VarPool};
use crate::Error;

/// Incremental totalizer over a multiset of input literals.
///
/// Root output `j` is forced true whenever at least `j + 1` inputs are true,
/// so `Σ inputs <= b` is the single unit `¬output[b]`. The tree is only
/// materialized on the first non-trivial bound and is capped at that bound
/// plus one, which keeps the encoding small when bounds start far below the
/// input count.
#[derive(Debug, Clone)]
pub struct IncTotalizer {
    inputs: Vec<Lit>,
    outputs: Vec<Lit>,
    bound: Option<usize>,
}

impl IncTotalizer {
    pub fn new(inputs: Vec<Lit>) -> Self {
        IncTotalizer {
            inputs,
            outputs: Vec::new(),
            bound: None,
        }
    }

    /// Weighted inputs, each literal repeated once per weight unit.
    pub fn weighted(inputs: impl IntoIterator<Item = (Lit, u64)>) -> Self {
        let mut lits = Vec::new();
        for (l, w) in inputs {
            lits.extend(std::iter::repeat_n(l, w as usize));
        }
        Self::new(lits)
    }

    pub fn inputs(&self) -> &[Lit] {
        &self.inputs
    }

    /// Output literals materialized so far.
    pub fn outputs(&self) -> &[Lit] {
        &self.outputs
    }

    /// The tightest bound asserted through [`IncTotalizer::update`].
    pub fn current_bound(&self) -> Option<usize> {
        self.bound
    }

    /// Tightens the asserted bound to `Σ inputs <= b`.
    ///
    /// Returns the clauses to add: any newly materialized definitions plus the
    /// unit `¬output[b]` (nothing when `b` is at least the input count).
    pub fn update(&mut self, b: usize, pool: &mut VarPool) -> Result<Vec<Clause>, Error> {
        if let Some(cur) = self.bound {
            if b >= cur {
                return Err(Error::BoundNotDecreasing { current: cur, requested: b });
            }
        }
        self.bound = Some(b);
        let (mut clauses, lit) = self.bound_literal(b, pool);
        clauses.extend(lit.map(|l| vec![l]));
        Ok(clauses)
    }

    /// Materializes whatever `Σ inputs <= b` needs without asserting it.
    ///
    /// Returns the definitional clauses to add and the literal `¬output[b]`
    /// to pass as an assumption (`None` when the bound is trivially true).
    pub fn bound_literal(&mut self, b: usize, pool: &mut VarPool) -> (Vec<Clause>, Option<Lit>) {
        if b >= self.inputs.len() {
            return (Vec::new(), None);
        }
        let mut clauses = Vec::new();
        if self.outputs.len() <= b {
            // Rebuild with a larger cap. Older definitions stay valid: they only
            // force their own (now unused) outputs upwards.
            let cap = (b + 1).min(self.inputs.len());
            self.outputs = build(&self.inputs, cap, pool, &mut clauses);
        }
        (clauses, Some(!self.outputs[b]))
    }
}

fn build(lits: &[Lit], cap: usize, pool: &mut VarPool, out: &mut Vec<Clause>) -> Vec<Lit> {
    if lits.len() == 1 {
        return vec![lits[0]];
    }
    let mid = lits.len() / 2;
    let left = build(&lits[..mid], cap, pool, out);
    let right = build(&lits[mid..], cap, pool, out);
    let width = cap.min(lits.len());
    let outputs: Vec<Lit> = (0..width).map(|_| pool.new_lit()).collect();
    for i in 0..=left.len() {
        for j in 0..=right.len() {
            let sum = i + j;
            if sum == 0 || sum > width {
                continue;
            }
            let mut clause = Vec::with_capacity(3);
            if i > 0 {
                clause.push(!left[i - 1]);
            }
            if j > 0 {
                clause.push(!right[j - 1]);
            }
            clause.push(outputs[sum - 1]);
            out.push(clause);
        }
    }
    outputs
}
