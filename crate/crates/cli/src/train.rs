use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use anyhow::Context;
use mpdt_core::dataset::stratified_partition;
use mpdt_core::optimizer::ProgressPoint;
use mpdt_core::trainer::{greedy_upper_bound, resplit_evaluate, train_observed, PhaseTimes};
use mpdt_core::tree::TreeJson;
use mpdt_core::{rng, BinDataset, DecisionTree, Error, SolveStatus, SplitSpec, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::{exit, load_dataset, write_atomic, DataArgs, TrainArgs};

/// Everything `train` reports about a run except wall times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub input: String,
    pub n_rows: usize,
    pub n_features: usize,
    pub n_classes: usize,
    pub split_sizes: [usize; 3],
    pub greedy_size: usize,
    pub lb: usize,
    pub optimum_size: usize,
    pub cost: u64,
    pub status: SolveStatus,
    pub n_solutions: usize,
    pub exhausted: bool,
    pub selection_accuracy: Vec<f64>,
    pub kept: Vec<usize>,
    pub selected: usize,
    pub train_accuracy: f64,
    pub selected_selection_accuracy: f64,
    pub test_accuracy: f64,
    pub resplits: usize,
    pub resplit_mean_test_accuracy: Option<f64>,
    pub n_vars: u32,
    pub n_hard_clauses: usize,
    /// Successive upper bounds of the linear search.
    pub bounds: Vec<u64>,
}

/// All optimal trees of a run with their selection scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionsFile {
    pub trees: Vec<TreeJson>,
    pub selection_accuracy: Vec<f64>,
    pub kept: Vec<usize>,
    pub selected: usize,
}

impl SolutionsFile {
    pub fn read(path: &Path) -> anyhow::Result<Vec<DecisionTree>> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let file: SolutionsFile = serde_json::from_str(&text)?;
        Ok(file.trees.iter().map(DecisionTree::from_json).collect::<Result<_, _>>()?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub optimum_size: usize,
    pub cost: u64,
    pub n_solutions: usize,
    pub test_accuracy: f64,
    pub resplit_mean_test_accuracy: Option<f64>,
}

/// Configuration echo, timings and outcome of one `train` run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config: TrainArgs,
    pub seed: u64,
    pub times: PhaseTimes,
    pub resplit_seconds: f64,
    pub total_seconds: f64,
    pub progress: Vec<ProgressPoint>,
    pub summary: Option<RunSummary>,
}

pub fn cmd_train(args: &TrainArgs) -> anyhow::Result<i32> {
    let args = match &args.from_manifest {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let manifest: RunManifest = serde_json::from_str(&text)?;
            TrainArgs { out: args.out.clone(), jobs: args.jobs, from_manifest: None, ..manifest.config }
        }
        None => args.clone(),
    };
    let start = Instant::now();
    let input = args.input.clone().ok_or_else(|| Error::Config("no input file".into()))?;
    let [ftr, fsel, fte] = args.split.0;
    let spec = SplitSpec::new(ftr, fsel, fte, args.seed)?;
    let time_budget = match args.timeout {
        Some(t) if !(t > 0.0 && t.is_finite()) => return Err(Error::Config(format!("bad timeout {t}")).into()),
        Some(t) => Some(Duration::from_secs_f64(t)),
        None => None,
    };
    let cfg = TrainConfig {
        p: ftr / (ftr + fsel),
        k: args.k,
        delta: args.delta,
        seed: args.seed,
        time_budget,
        lb: args.lb,
        accept_suboptimal_diverse: args.accept_suboptimal_diverse,
    };
    cfg.validate()?;
    let data_args = DataArgs {
        input: input.clone(),
        label: args.label.clone(),
        bins: args.bins,
        resolve_conflicts: args.resolve_conflicts,
    };
    let ds = load_dataset(&data_args)?;
    let parts = split_parts(&ds, &spec);
    let (tr, sel, test) = (ds.subset(&parts[0]), ds.subset(&parts[1]), ds.subset(&parts[2]));
    eprintln!(
        "{}: {} rows, {} binary features, {} classes; split {}/{}/{}",
        input.display(),
        ds.len(),
        ds.n_features,
        ds.n_classes,
        tr.len(),
        sel.len(),
        test.len()
    );

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: TrainArgs { out: Default::default(), from_manifest: None, ..args.clone() },
        seed: args.seed,
        times: PhaseTimes::default(),
        resplit_seconds: 0.0,
        total_seconds: 0.0,
        progress: Vec::new(),
        summary: None,
    };

    let mut observe = |p: &ProgressPoint| eprintln!("c {:>9.3}s  o {}", p.seconds, p.cost);
    let outcome = match train_observed(&tr, &sel, &cfg, &mut observe) {
        Ok(o) => o,
        Err(Error::Timeout) => {
            if args.fallback_greedy {
                let (greedy, size) = greedy_upper_bound(&tr)?;
                greedy.write_json(args.out.join("model.json"))?;
                eprintln!("time budget exhausted; wrote the greedy tree of size {size} as the model");
            }
            manifest.total_seconds = start.elapsed().as_secs_f64();
            write_atomic(&args.out.join("manifest.json"), &to_json(&manifest)?)?;
            return Err(Error::Timeout.into());
        }
        Err(e) => return Err(e.into()),
    };

    let tree = outcome.tree();
    let train_accuracy = tree.evaluate(&tr)?;
    let selected_selection_accuracy = tree.evaluate(&sel)?;
    let test_accuracy = tree.evaluate(&test)?;
    let t = Instant::now();
    let resplit_mean_test_accuracy = if args.resplits > 0 {
        let mut pool_idx: Vec<usize> = parts[1].iter().chain(&parts[2]).copied().collect();
        pool_idx.sort_unstable();
        let pool = ds.subset(&pool_idx);
        let r = resplit_evaluate(&outcome.trees, &pool, fsel / (fsel + fte), args.resplits, args.delta, args.seed, args.jobs)?;
        Some(r.mean_test_accuracy)
    } else {
        None
    };
    let resplit_seconds = t.elapsed().as_secs_f64();

    let report = TrainReport {
        input: input.display().to_string(),
        n_rows: ds.len(),
        n_features: ds.n_features,
        n_classes: ds.n_classes,
        split_sizes: [tr.len(), sel.len(), test.len()],
        greedy_size: outcome.greedy_size,
        lb: outcome.lb,
        optimum_size: outcome.size,
        cost: outcome.cost,
        status: outcome.status,
        n_solutions: outcome.trees.len(),
        exhausted: outcome.exhausted,
        selection_accuracy: outcome.selection_accuracy.clone(),
        kept: outcome.kept.clone(),
        selected: outcome.selected,
        train_accuracy,
        selected_selection_accuracy,
        test_accuracy,
        resplits: args.resplits,
        resplit_mean_test_accuracy,
        n_vars: outcome.n_vars,
        n_hard_clauses: outcome.n_hard,
        bounds: outcome.progress.iter().map(|p| p.cost).collect(),
    };
    let solutions = SolutionsFile {
        trees: outcome.trees.iter().map(DecisionTree::to_json).collect(),
        selection_accuracy: outcome.selection_accuracy.clone(),
        kept: outcome.kept.clone(),
        selected: outcome.selected,
    };
    tree.write_json(args.out.join("model.json"))?;
    fs::write(args.out.join("solutions.json"), to_json(&solutions)?)?;
    fs::write(args.out.join("tree.dot"), tree.to_dot(Some(&ds)))?;
    fs::write(args.out.join("report.json"), to_json(&report)?)?;

    manifest.times = outcome.times;
    manifest.resplit_seconds = resplit_seconds;
    manifest.progress = outcome.progress.clone();
    manifest.total_seconds = start.elapsed().as_secs_f64();
    manifest.summary = Some(RunSummary {
        optimum_size: outcome.size,
        cost: outcome.cost,
        n_solutions: outcome.trees.len(),
        test_accuracy,
        resplit_mean_test_accuracy,
    });
    write_atomic(&args.out.join("manifest.json"), &to_json(&manifest)?)?;

    println!("tree size         {} (cost {}, {:?})", outcome.size, outcome.cost, outcome.status);
    println!(
        "solutions         {}{}",
        outcome.trees.len(),
        if outcome.exhausted { " (all)" } else { "" }
    );
    println!("selection acc.    {:.1}", 100.0 * selected_selection_accuracy);
    println!("test acc.         {:.1}", 100.0 * test_accuracy);
    if let Some(m) = resplit_mean_test_accuracy {
        println!("mean test acc.    {:.1} over {} re-splits", 100.0 * m, args.resplits);
    }
    Ok(exit::OK)
}

fn to_json<T: Serialize>(v: &T) -> anyhow::Result<Vec<u8>> {
    let mut s = serde_json::to_vec_pretty(v)?;
    s.push(b'\n');
    Ok(s)
}

/// Train/selection/test row indices of a split specification.
pub(crate) fn split_parts(ds: &BinDataset, spec: &SplitSpec) -> Vec<Vec<usize>> {
    let mut g = rng::substream(spec.seed, rng::SPLIT);
    stratified_partition(&ds.labels, ds.n_classes, &spec.fractions(), &mut g)
}
