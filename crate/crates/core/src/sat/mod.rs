//! Incremental CDCL SAT solver with assumptions.
//!
//! Two-watched-literal propagation, first-UIP learning with recursive clause
//! minimization, VSIDS branching with phase saving, Luby restarts and
//! activity/LBD-based learnt clause deletion. Clauses persist across calls to
//! [`Solver::solve`]; assumptions hold for a single call only.

mod heap;

use std::time::Instant;

use crate::cnf::{Assignment, Cnf, Lit, Var};
use crate::Error;
use heap::VarHeap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SatResult {
    Sat,
    Unsat,
    /// A conflict or time budget ran out before the search finished.
    Interrupted,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub solves: u64,
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub restarts: u64,
    pub learnts_removed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub seed: u64,
    /// Probability of a random branching decision.
    pub random_branch_freq: f64,
    pub var_decay: f64,
    pub clause_decay: f64,
    pub restart_base: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            seed: 0,
            random_branch_freq: 0.0,
            var_decay: 0.95,
            clause_decay: 0.999,
            restart_base: 100,
        }
    }
}

const TRUE: i8 = 1;
const FALSE: i8 = -1;
const UNDEF: i8 = 0;

type CRef = u32;

#[derive(Debug, Clone)]
struct ClauseData {
    lits: Vec<Lit>,
    learnt: bool,
    deleted: bool,
    lbd: u32,
    activity: f64,
}

#[derive(Debug, Clone, Copy)]
struct Watcher {
    cref: CRef,
    blocker: Lit,
}

enum Search {
    Sat,
    Unsat,
    Restart,
    Interrupted,
}

#[derive(Debug, Clone)]
pub struct Solver {
    cfg: SolverConfig,
    clauses: Vec<ClauseData>,
    originals: Vec<CRef>,
    learnts: Vec<CRef>,
    watches: Vec<Vec<Watcher>>,

    assigns: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<Option<CRef>>,
    polarity: Vec<bool>,
    seen: Vec<u8>,
    activity: Vec<f64>,
    heap: VarHeap,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,

    var_inc: f64,
    cla_inc: f64,
    max_learnts: f64,
    rng_state: u64,
    ok: bool,

    conflict_budget: Option<u64>,
    deadline: Option<Instant>,

    last: Option<SatResult>,
    model: Option<Assignment>,
    stats: SolverStats,
    analyze_stack: Vec<Lit>,
    analyze_toclear: Vec<Lit>,
}

impl Default for Solver {
    fn default() -> Self {
        Self::new()
    }
}

impl Solver {
    pub fn new() -> Self {
        Self::with_config(SolverConfig::default())
    }

    pub fn with_seed(seed: u64) -> Self {
        Self::with_config(SolverConfig { seed, ..Default::default() })
    }

    pub fn with_config(cfg: SolverConfig) -> Self {
        Solver {
            rng_state: cfg.seed ^ 0x9E37_79B9_7F4A_7C15,
            cfg,
            clauses: Vec::new(),
            originals: Vec::new(),
            learnts: Vec::new(),
            watches: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            polarity: Vec::new(),
            seen: Vec::new(),
            activity: Vec::new(),
            heap: VarHeap::default(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            var_inc: 1.0,
            cla_inc: 1.0,
            max_learnts: 0.0,
            ok: true,
            conflict_budget: None,
            deadline: None,
            last: None,
            model: None,
            stats: SolverStats::default(),
            analyze_stack: Vec::new(),
            analyze_toclear: Vec::new(),
        }
    }

    pub fn from_cnf(cnf: &Cnf) -> Self {
        let mut s = Self::new();
        s.reserve_vars(cnf.n_vars);
        for c in &cnf.clauses {
            s.add_clause(c);
        }
        s
    }

    pub fn n_vars(&self) -> u32 {
        self.assigns.len() as u32
    }

    pub fn n_clauses(&self) -> usize {
        self.originals.len()
    }

    pub fn stats(&self) -> SolverStats {
        self.stats
    }

    /// Limits the number of conflicts of each subsequent `solve` call.
    pub fn set_conflict_budget(&mut self, budget: Option<u64>) {
        self.conflict_budget = budget;
    }

    /// Wall-clock instant after which `solve` returns `Interrupted`.
    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.deadline = deadline;
    }

    /// Grows the variable table so that variables `1..=n` exist.
    pub fn reserve_vars(&mut self, n: u32) {
        while self.n_vars() < n {
            let v = self.assigns.len();
            self.assigns.push(UNDEF);
            self.level.push(0);
            self.reason.push(None);
            self.polarity.push(false);
            self.seen.push(0);
            self.activity.push(0.0);
            self.watches.push(Vec::new());
            self.watches.push(Vec::new());
            self.heap.insert(v, &self.activity);
        }
    }

    #[inline]
    fn lit_value(&self, l: Lit) -> i8 {
        let v = self.assigns[l.var().index()];
        if l.is_negated() {
            -v
        } else {
            v
        }
    }

    #[inline]
    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    /// Adds a clause permanently. The empty clause makes the solver UNSAT.
    pub fn add_clause(&mut self, clause: &[Lit]) {
        self.model = None;
        self.last = None;
        if !self.ok {
            return;
        }
        if let Some(max) = clause.iter().map(|l| l.var().dimacs()).max() {
            self.reserve_vars(max);
        }
        debug_assert_eq!(self.decision_level(), 0);
        let mut lits = clause.to_vec();
        lits.sort_unstable();
        lits.dedup();
        let mut kept = Vec::with_capacity(lits.len());
        for (i, &l) in lits.iter().enumerate() {
            if i + 1 < lits.len() && lits[i + 1] == !l {
                return; // tautology
            }
            match self.lit_value(l) {
                TRUE => return,
                FALSE => {}
                _ => kept.push(l),
            }
        }
        match kept.len() {
            0 => self.ok = false,
            1 => {
                self.enqueue(kept[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
            }
            _ => {
                let cref = self.alloc(kept, false, 0);
                self.originals.push(cref);
                self.attach(cref);
            }
        }
    }

    pub fn add_clauses<'a>(&mut self, clauses: impl IntoIterator<Item = &'a Vec<Lit>>) {
        for c in clauses {
            self.add_clause(c);
        }
    }

    fn alloc(&mut self, lits: Vec<Lit>, learnt: bool, lbd: u32) -> CRef {
        let cref = self.clauses.len() as CRef;
        self.clauses.push(ClauseData { lits, learnt, deleted: false, lbd, activity: 0.0 });
        cref
    }

    fn attach(&mut self, cref: CRef) {
        let c = &self.clauses[cref as usize].lits;
        let (a, b) = (c[0], c[1]);
        self.watches[a.code()].push(Watcher { cref, blocker: b });
        self.watches[b.code()].push(Watcher { cref, blocker: a });
    }

    #[inline]
    fn enqueue(&mut self, l: Lit, reason: Option<CRef>) {
        let v = l.var().index();
        debug_assert_eq!(self.assigns[v], UNDEF);
        self.assigns[v] = if l.is_negated() { FALSE } else { TRUE };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn propagate(&mut self) -> Option<CRef> {
        let mut conflict = None;
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let (mut i, mut j) = (0, 0);
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.lit_value(w.blocker) == TRUE {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cref = w.cref as usize;
                {
                    let c = &mut self.clauses[cref].lits;
                    if c[0] == false_lit {
                        c.swap(0, 1);
                    }
                }
                let first = self.clauses[cref].lits[0];
                let new_w = Watcher { cref: w.cref, blocker: first };
                if first != w.blocker && self.lit_value(first) == TRUE {
                    ws[j] = new_w;
                    j += 1;
                    continue;
                }
                let len = self.clauses[cref].lits.len();
                let mut moved = false;
                for k in 2..len {
                    let lk = self.clauses[cref].lits[k];
                    if self.lit_value(lk) != FALSE {
                        let c = &mut self.clauses[cref].lits;
                        c.swap(1, k);
                        self.watches[lk.code()].push(new_w);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = new_w;
                j += 1;
                if self.lit_value(first) == FALSE {
                    conflict = Some(w.cref);
                    self.qhead = self.trail.len();
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, Some(w.cref));
                }
            }
            ws.truncate(j);
            self.watches[false_lit.code()] = ws;
            if conflict.is_some() {
                break;
            }
        }
        conflict
    }

    fn cancel_until(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let lim = self.trail_lim[level as usize];
        for idx in (lim..self.trail.len()).rev() {
            let l = self.trail[idx];
            let v = l.var().index();
            self.assigns[v] = UNDEF;
            self.reason[v] = None;
            self.polarity[v] = !l.is_negated();
            if !self.heap.contains(v) {
                self.heap.insert(v, &self.activity);
            }
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(level as usize);
        self.qhead = lim;
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        if self.heap.contains(v) {
            self.heap.increase(v, &self.activity);
        }
    }

    fn bump_clause(&mut self, cref: CRef) {
        let c = &mut self.clauses[cref as usize];
        c.activity += self.cla_inc;
        if c.activity > 1e20 {
            for &r in &self.learnts {
                self.clauses[r as usize].activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    fn abstract_level(&self, v: usize) -> u32 {
        1 << (self.level[v] & 31)
    }

    /// First-UIP conflict analysis. Returns the learnt clause (asserting
    /// literal first, highest remaining level second) and the backjump level.
    fn analyze(&mut self, mut confl: CRef) -> (Vec<Lit>, u32) {
        let mut learnt: Vec<Lit> = vec![Lit::from_code(0)];
        let mut path = 0usize;
        let mut p: Option<Lit> = None;
        let mut index = self.trail.len();
        loop {
            if self.clauses[confl as usize].learnt {
                self.bump_clause(confl);
            }
            let start = usize::from(p.is_some());
            let len = self.clauses[confl as usize].lits.len();
            for k in start..len {
                let q = self.clauses[confl as usize].lits[k];
                let v = q.var().index();
                if self.seen[v] == 0 && self.level[v] > 0 {
                    self.bump_var(v);
                    self.seen[v] = 1;
                    if self.level[v] >= self.decision_level() {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var().index()] != 0 {
                    break;
                }
            }
            let pl = self.trail[index];
            p = Some(pl);
            self.seen[pl.var().index()] = 0;
            path -= 1;
            if path == 0 {
                break;
            }
            confl = self.reason[pl.var().index()].expect("implied literal has a reason");
        }
        learnt[0] = !p.expect("conflict analysis visits at least one literal");

        // recursive minimization
        self.analyze_toclear.clear();
        self.analyze_toclear.extend_from_slice(&learnt);
        let mut abstract_levels = 0u32;
        for l in &learnt[1..] {
            abstract_levels |= self.abstract_level(l.var().index());
        }
        let mut kept = 1;
        for i in 1..learnt.len() {
            let l = learnt[i];
            if self.reason[l.var().index()].is_none() || !self.lit_redundant(l, abstract_levels) {
                learnt[kept] = l;
                kept += 1;
            }
        }
        learnt.truncate(kept);
        for l in std::mem::take(&mut self.analyze_toclear) {
            self.seen[l.var().index()] = 0;
        }

        let bt = if learnt.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var().index()] > self.level[learnt[max_i].var().index()] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            self.level[learnt[1].var().index()]
        };
        (learnt, bt)
    }

    fn lit_redundant(&mut self, p: Lit, abstract_levels: u32) -> bool {
        self.analyze_stack.clear();
        self.analyze_stack.push(p);
        let top = self.analyze_toclear.len();
        while let Some(q) = self.analyze_stack.pop() {
            let cref = self.reason[q.var().index()].expect("only implied literals are expanded");
            let len = self.clauses[cref as usize].lits.len();
            for k in 1..len {
                let l = self.clauses[cref as usize].lits[k];
                let v = l.var().index();
                if self.seen[v] == 0 && self.level[v] > 0 {
                    if self.reason[v].is_some() && (self.abstract_level(v) & abstract_levels) != 0 {
                        self.seen[v] = 1;
                        self.analyze_stack.push(l);
                        self.analyze_toclear.push(l);
                    } else {
                        for j in top..self.analyze_toclear.len() {
                            self.seen[self.analyze_toclear[j].var().index()] = 0;
                        }
                        self.analyze_toclear.truncate(top);
                        return false;
                    }
                }
            }
        }
        true
    }

    fn lbd(&mut self, lits: &[Lit]) -> u32 {
        let mut levels: Vec<u32> = lits.iter().map(|l| self.level[l.var().index()]).collect();
        levels.sort_unstable();
        levels.dedup();
        levels.len() as u32
    }

    fn locked(&self, cref: CRef) -> bool {
        let first = self.clauses[cref as usize].lits[0];
        self.lit_value(first) == TRUE && self.reason[first.var().index()] == Some(cref)
    }

    fn reduce_db(&mut self) {
        let mut cands: Vec<CRef> = self.learnts.clone();
        cands.sort_by(|&a, &b| {
            let (ca, cb) = (&self.clauses[a as usize], &self.clauses[b as usize]);
            // most valuable last
            cb.lbd.cmp(&ca.lbd).then(ca.activity.total_cmp(&cb.activity))
        });
        let limit = cands.len() / 2;
        let mut removed = 0;
        let mut keep = Vec::with_capacity(cands.len());
        for (i, &cref) in cands.iter().enumerate() {
            let c = &self.clauses[cref as usize];
            if i < limit && c.lits.len() > 2 && c.lbd > 2 && !self.locked(cref) {
                let c = &mut self.clauses[cref as usize];
                c.deleted = true;
                c.lits = Vec::new();
                removed += 1;
            } else {
                keep.push(cref);
            }
        }
        keep.sort_unstable();
        self.learnts = keep;
        self.stats.learnts_removed += removed;
        if removed > 0 {
            let clauses = &self.clauses;
            for ws in &mut self.watches {
                ws.retain(|w| !clauses[w.cref as usize].deleted);
            }
        }
    }

    fn next_random(&mut self) -> u64 {
        // xorshift64*
        let mut x = self.rng_state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.rng_state = x;
        x.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        if self.cfg.random_branch_freq > 0.0 && !self.heap.is_empty() {
            let r = (self.next_random() >> 11) as f64 / (1u64 << 53) as f64;
            if r < self.cfg.random_branch_freq {
                let pick = self.next_random() as usize % self.heap.len();
                let v = self.heap.at(pick);
                if self.assigns[v] == UNDEF {
                    return Some(Var::from_index(v as u32).lit(self.polarity[v]));
                }
            }
        }
        while let Some(v) = self.heap.pop_max(&self.activity) {
            if self.assigns[v] == UNDEF {
                return Some(Var::from_index(v as u32).lit(self.polarity[v]));
            }
        }
        None
    }

    fn out_of_budget(&self, conflicts_at_start: u64) -> bool {
        if let Some(b) = self.conflict_budget {
            if self.stats.conflicts - conflicts_at_start >= b {
                return true;
            }
        }
        if let Some(d) = self.deadline {
            if self.stats.conflicts % 64 == 0 && Instant::now() >= d {
                return true;
            }
        }
        false
    }

    fn search(&mut self, nof_conflicts: u64, assumptions: &[Lit], conflicts_at_start: u64) -> Search {
        let mut conflicts_here = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts_here += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return Search::Unsat;
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let lbd = self.lbd(&learnt);
                    let first = learnt[0];
                    let cref = self.alloc(learnt, true, lbd);
                    self.learnts.push(cref);
                    self.attach(cref);
                    self.bump_clause(cref);
                    self.enqueue(first, Some(cref));
                }
                self.var_inc /= self.cfg.var_decay;
                self.cla_inc /= self.cfg.clause_decay;
                if self.out_of_budget(conflicts_at_start) {
                    self.cancel_until(0);
                    return Search::Interrupted;
                }
            } else {
                if conflicts_here >= nof_conflicts {
                    self.cancel_until(0);
                    return Search::Restart;
                }
                if self.learnts.len() as f64 - self.trail.len() as f64 >= self.max_learnts {
                    self.reduce_db();
                }
                let mut next = None;
                while (self.decision_level() as usize) < assumptions.len() {
                    let a = assumptions[self.decision_level() as usize];
                    self.reserve_vars(a.var().dimacs());
                    match self.lit_value(a) {
                        TRUE => self.trail_lim.push(self.trail.len()),
                        FALSE => return Search::Unsat,
                        _ => {
                            next = Some(a);
                            break;
                        }
                    }
                }
                let next = match next {
                    Some(l) => l,
                    None => match self.pick_branch() {
                        Some(l) => {
                            self.stats.decisions += 1;
                            l
                        }
                        None => return Search::Sat,
                    },
                };
                self.trail_lim.push(self.trail.len());
                self.enqueue(next, None);
            }
        }
    }

    /// Decides satisfiability of the clause set under `assumptions`.
    pub fn solve(&mut self, assumptions: &[Lit]) -> SatResult {
        self.stats.solves += 1;
        self.model = None;
        if let Some(max) = assumptions.iter().map(|l| l.var().dimacs()).max() {
            self.reserve_vars(max);
        }
        if !self.ok {
            self.last = Some(SatResult::Unsat);
            return SatResult::Unsat;
        }
        if self.deadline.is_some_and(|d| Instant::now() >= d) {
            self.last = Some(SatResult::Interrupted);
            return SatResult::Interrupted;
        }
        self.max_learnts = self.max_learnts.max(self.originals.len() as f64 / 3.0).max(2000.0);
        let start = self.stats.conflicts;
        let mut restarts = 0u32;
        let result = loop {
            let budget = luby(2.0, restarts) * self.cfg.restart_base as f64;
            match self.search(budget as u64, assumptions, start) {
                Search::Sat => {
                    let values = self.assigns.iter().map(|&a| a == TRUE).collect();
                    self.model = Some(Assignment::new(values));
                    break SatResult::Sat;
                }
                Search::Unsat => break SatResult::Unsat,
                Search::Interrupted => break SatResult::Interrupted,
                Search::Restart => {
                    restarts += 1;
                    self.stats.restarts += 1;
                    self.max_learnts *= 1.05;
                }
            }
        };
        self.cancel_until(0);
        self.last = Some(result);
        result
    }

    /// The model found by the last `solve`, which must have returned SAT.
    pub fn model(&self) -> Result<&Assignment, Error> {
        match (self.last, &self.model) {
            (Some(SatResult::Sat), Some(m)) => Ok(m),
            (None, _) => Err(Error::NoModel("solve has not been called since the last change")),
            _ => Err(Error::NoModel("last solve did not return SAT")),
        }
    }

    /// Whether the clause set (without assumptions) is known to be UNSAT.
    pub fn is_inconsistent(&self) -> bool {
        !self.ok
    }
}

/// Luby sequence value for index `x`, scaled by powers of `y`.
fn luby(y: f64, mut x: u32) -> f64 {
    let (mut size, mut seq) = (1u32, 0i32);
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    y.powi(seq)
}
