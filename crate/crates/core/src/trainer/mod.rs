//! End-to-end training: bounds, encoding, optimization, diverse solutions and
//! selection on a held-out split.

mod greedy;

use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use greedy::greedy_upper_bound;

use crate::dataset::{stratified_partition, BinDataset};
use crate::encoder::MpdtInstance;
use crate::optimizer::{linear_maxsat_with, mdsol, Diversity, MaxSatConfig, MdsolConfig, ProgressPoint, SolveStatus};
use crate::tree::DecisionTree;
use crate::{rng, Error};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Share of the input kept for training by [`train`]; the rest selects.
    pub p: f64,
    /// Number of optimal trees to request.
    pub k: usize,
    /// Selection-accuracy slack below the best tree.
    pub delta: f64,
    pub seed: u64,
    pub time_budget: Option<Duration>,
    pub lb: usize,
    pub accept_suboptimal_diverse: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            p: 0.8,
            k: 100,
            delta: 0.0,
            seed: 0,
            time_budget: None,
            lb: 3,
            accept_suboptimal_diverse: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::Config(format!("p must lie in (0, 1), got {}", self.p)));
        }
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if !(self.delta >= 0.0) {
            return Err(Error::Config(format!("delta must be non-negative, got {}", self.delta)));
        }
        if self.lb < 3 || self.lb % 2 == 0 {
            return Err(Error::BadLowerBound(self.lb));
        }
        Ok(())
    }
}

/// Wall time per phase in seconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimes {
    pub bounds: f64,
    pub encode: f64,
    pub solve: f64,
    pub diverse: f64,
    pub select: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Trees in the order they were found.
    pub trees: Vec<DecisionTree>,
    pub selection_accuracy: Vec<f64>,
    /// Indices into `trees` within `delta` of the best selection accuracy.
    pub kept: Vec<usize>,
    /// The member of `kept` drawn under the run seed.
    pub selected: usize,
    pub greedy_size: usize,
    pub lb: usize,
    pub size: usize,
    pub cost: u64,
    pub status: SolveStatus,
    /// True when the diverse enumeration ran out of trees before `k`.
    pub exhausted: bool,
    pub n_vars: u32,
    pub n_hard: usize,
    pub progress: Vec<ProgressPoint>,
    pub times: PhaseTimes,
}

impl TrainOutcome {
    pub fn tree(&self) -> &DecisionTree {
        &self.trees[self.selected]
    }
}

/// Splits `ds` by `cfg.p` (stratified) and trains on the parts.
pub fn train(ds: &BinDataset, cfg: &TrainConfig) -> Result<TrainOutcome, Error> {
    cfg.validate()?;
    let mut r = rng::substream(cfg.seed, rng::SPLIT);
    let parts = stratified_partition(&ds.labels, ds.n_classes, &[cfg.p, 1.0 - cfg.p], &mut r);
    train_with_selection(&ds.subset(&parts[0]), &ds.subset(&parts[1]), cfg)
}

/// Trains on `tr` and ranks the optimal trees on `sel`.
pub fn train_with_selection(tr: &BinDataset, sel: &BinDataset, cfg: &TrainConfig) -> Result<TrainOutcome, Error> {
    train_observed(tr, sel, cfg, &mut |_| {})
}

/// As [`train_with_selection`]; `observe` sees each improved bound.
pub fn train_observed(
    tr: &BinDataset,
    sel: &BinDataset,
    cfg: &TrainConfig,
    observe: &mut dyn FnMut(&ProgressPoint),
) -> Result<TrainOutcome, Error> {
    cfg.validate()?;
    let deadline = cfg.time_budget.map(|d| Instant::now() + d);
    let mut times = PhaseTimes::default();

    let t = Instant::now();
    let (greedy, ub) = greedy_upper_bound(tr)?;
    times.bounds = t.elapsed().as_secs_f64();

    if ub == 1 {
        // constant labels: the encoding has no room for a bare leaf root
        let selection_accuracy = vec![greedy.evaluate(sel)?];
        return Ok(TrainOutcome {
            trees: vec![greedy],
            selection_accuracy,
            kept: vec![0],
            selected: 0,
            greedy_size: 1,
            lb: 1,
            size: 1,
            cost: 1,
            status: SolveStatus::Optimal,
            exhausted: true,
            n_vars: 0,
            n_hard: 0,
            progress: Vec::new(),
            times,
        });
    }
    let lb = cfg.lb.min(ub);

    let t = Instant::now();
    let inst = MpdtInstance::build(tr, ub, lb)?;
    times.encode = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let mcfg = MaxSatConfig { deadline, seed: rng::derive_seed(cfg.seed, rng::SOLVER) };
    let mut outcome = linear_maxsat_with(&inst.formula, &mcfg, observe);
    times.solve = t.elapsed().as_secs_f64();
    match outcome.status {
        SolveStatus::Unknown => return Err(Error::Timeout),
        SolveStatus::Unsat => return Err(Error::NoModel("encoding unsatisfiable below the greedy bound")),
        SolveStatus::Optimal | SolveStatus::Feasible => {}
    }

    let t = Instant::now();
    let dcfg = MdsolConfig {
        k: cfg.k,
        deadline,
        accept_suboptimal: cfg.accept_suboptimal_diverse,
        diversity: Diversity::Overlap,
    };
    let run = mdsol(&mut outcome, &inst.target_vars(), &dcfg);
    times.diverse = t.elapsed().as_secs_f64();

    let models = if run.solutions.is_empty() {
        vec![outcome.model.clone().expect("model for a feasible run")]
    } else {
        run.solutions
    };
    let t = Instant::now();
    let mut trees = Vec::with_capacity(models.len());
    for m in &models {
        let tree = inst.decode(m)?;
        if tree.evaluate(tr)? != 1.0 {
            return Err(Error::Integrity(usize::MAX));
        }
        trees.push(tree);
    }
    let selection_accuracy = trees.iter().map(|t| t.evaluate(sel)).collect::<Result<Vec<_>, _>>()?;
    let kept = keep_within(&selection_accuracy, cfg.delta);
    let selected = kept[rng::substream(cfg.seed, rng::SELECT).gen_range(0..kept.len())];
    times.select = t.elapsed().as_secs_f64();

    Ok(TrainOutcome {
        size: trees[0].size(),
        trees,
        selection_accuracy,
        kept,
        selected,
        greedy_size: ub,
        lb,
        cost: outcome.cost,
        status: outcome.status,
        exhausted: run.exhausted,
        n_vars: inst.formula.n_vars,
        n_hard: inst.formula.hard.len(),
        progress: outcome.progress,
        times,
    })
}

/// Indices whose accuracy is at least the maximum minus `delta`.
pub fn keep_within(acc: &[f64], delta: f64) -> Vec<usize> {
    let best = acc.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (0..acc.len()).filter(|&i| acc[i] >= best - delta - 1e-12).collect()
}

/// Test accuracy averaged over re-splits of `pool` into selection and test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResplitReport {
    pub mean_test_accuracy: f64,
    pub test_accuracy: Vec<f64>,
    pub selected: Vec<usize>,
}

/// For each of `n` seeded stratified re-splits of `pool` (selection share
/// `sel_frac`), picks a tree among `trees` on the selection part as training
/// does and scores it on the test part. Splits run on `jobs` threads; results
/// do not depend on `jobs`.
pub fn resplit_evaluate(
    trees: &[DecisionTree],
    pool: &BinDataset,
    sel_frac: f64,
    n: usize,
    delta: f64,
    seed: u64,
    jobs: usize,
) -> Result<ResplitReport, Error> {
    if trees.is_empty() {
        return Err(Error::Config("no trees to evaluate".into()));
    }
    if !(sel_frac > 0.0 && sel_frac < 1.0) {
        return Err(Error::Config(format!("selection share must lie in (0, 1), got {sel_frac}")));
    }
    let one = |r: usize| -> Result<(f64, usize), Error> {
        let s = rng::derive_seed(seed, rng::RESPLIT).wrapping_add(r as u64);
        let mut g = rng::substream(s, rng::RESPLIT);
        let parts = stratified_partition(&pool.labels, pool.n_classes, &[sel_frac, 1.0 - sel_frac], &mut g);
        let (sel, test) = (pool.subset(&parts[0]), pool.subset(&parts[1]));
        let acc = trees.iter().map(|t| t.evaluate(&sel)).collect::<Result<Vec<_>, _>>()?;
        let kept = keep_within(&acc, delta);
        let pick = kept[rng::substream(s, rng::SELECT).gen_range(0..kept.len())];
        Ok((trees[pick].evaluate(&test)?, pick))
    };
    let jobs = jobs.max(1).min(n.max(1));
    let mut results: Vec<Option<Result<(f64, usize), Error>>> = (0..n).map(|_| None).collect();
    std::thread::scope(|scope| {
        let chunks: Vec<_> = results
            .chunks_mut(n.div_ceil(jobs).max(1))
            .enumerate()
            .map(|(c, chunk)| {
                let one = &one;
                let base = c * n.div_ceil(jobs).max(1);
                scope.spawn(move || {
                    for (off, slot) in chunk.iter_mut().enumerate() {
                        *slot = Some(one(base + off));
                    }
                })
            })
            .collect();
        for h in chunks {
            h.join().expect("re-split worker panicked");
        }
    });
    let mut test_accuracy = Vec::with_capacity(n);
    let mut selected = Vec::with_capacity(n);
    for r in results {
        let (a, p) = r.expect("filled")?;
        test_accuracy.push(a);
        selected.push(p);
    }
    let mean = if n == 0 { 0.0 } else { test_accuracy.iter().sum::<f64>() / n as f64 };
    Ok(ResplitReport { mean_test_accuracy: mean, test_accuracy, selected })
}
