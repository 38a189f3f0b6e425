use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::{Duration, Instant};

use mpdt_core::cnf::{read_dimacs_file, read_wcnf_file, write_wcnf_file};
use mpdt_core::optimizer::{linear_maxsat_with, MaxSatConfig};
use mpdt_core::oracle::{brute_force_mpdt, OracleBudget};
use mpdt_core::trainer::{greedy_upper_bound, resplit_evaluate};
use mpdt_core::{Assignment, BinDataset, DecisionTree, Error, MpdtInstance, SatResult, Solver, SolveStatus, SplitSpec};
use serde::Serialize;

use crate::train::{split_parts, SolutionsFile};
use crate::{exit, load_dataset, read_binarized, DataArgs, EncodeArgs, EvaluateArgs, ExportArgs, ExportFormat, FileArgs, Part, PreprocessArgs};

pub fn cmd_preprocess(args: &PreprocessArgs) -> anyhow::Result<i32> {
    let ds = load_dataset(&args.data)?;
    ds.write_bin_file(&args.out)?;
    println!("{} rows, {} binary features, {} classes", ds.len(), ds.n_features, ds.n_classes);
    Ok(exit::OK)
}

#[derive(Serialize)]
struct EncodeSidecar {
    ub: usize,
    lb: usize,
    n_examples: usize,
    #[serde(flatten)]
    layout: mpdt_core::encoder::LayoutJson,
}

pub fn cmd_encode(args: &EncodeArgs) -> anyhow::Result<i32> {
    let ds = load_dataset(&args.data)?;
    let ub = if args.ub == "auto" {
        let (_, size) = greedy_upper_bound(&ds)?;
        if size == 1 {
            return Err(Error::Config("all rows share one label; the tree is a single leaf".into()).into());
        }
        size
    } else {
        args.ub.parse::<usize>().map_err(|e| Error::Config(format!("bad --ub `{}`: {e}", args.ub)))?
    };
    let inst = MpdtInstance::build(&ds, ub, args.lb)?;
    write_wcnf_file(&inst.formula, &args.out)?;
    let sidecar = EncodeSidecar { ub, lb: inst.lb, n_examples: inst.n_examples, layout: inst.layout.to_json() };
    let layout_path = args.out.with_extension("layout.json");
    fs::write(&layout_path, serde_json::to_string_pretty(&sidecar)? + "\n")?;
    println!(
        "{} variables, {} hard and {} soft clauses; variable map in {}",
        inst.formula.n_vars,
        inst.formula.hard.len(),
        inst.formula.soft.len(),
        layout_path.display()
    );
    Ok(exit::OK)
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> anyhow::Result<i32> {
    let tree = DecisionTree::read_json(&args.model)?;
    let ds = load_dataset(&args.data)?;
    if tree.n_features() != ds.n_features {
        return Err(Error::FeatureMismatch { expected: tree.n_features(), got: ds.n_features }.into());
    }
    let [ftr, fsel, fte] = args.split.0;
    let spec = SplitSpec::new(ftr, fsel, fte, args.seed)?;
    let parts = split_parts(&ds, &spec);
    if let Some(n) = args.resplits {
        let path = match &args.solutions {
            Some(p) => p.clone(),
            None => args.model.parent().unwrap_or(Path::new(".")).join("solutions.json"),
        };
        let trees = SolutionsFile::read(&path)?;
        let mut pool_idx: Vec<usize> = parts[1].iter().chain(&parts[2]).copied().collect();
        pool_idx.sort_unstable();
        let pool = ds.subset(&pool_idx);
        let r = resplit_evaluate(&trees, &pool, fsel / (fsel + fte), n, args.delta, args.seed, args.jobs)?;
        println!("mean test accuracy {:.2} over {} re-splits", 100.0 * r.mean_test_accuracy, n);
        return Ok(exit::OK);
    }
    let part = match args.part {
        Part::All => ds,
        Part::Train => ds.subset(&parts[0]),
        Part::Selection => ds.subset(&parts[1]),
        Part::Test => ds.subset(&parts[2]),
    };
    let acc = tree.evaluate(&part)?;
    println!("accuracy {:.2} on {} rows", 100.0 * acc, part.len());
    Ok(exit::OK)
}

pub fn cmd_export(args: &ExportArgs) -> anyhow::Result<i32> {
    let tree = DecisionTree::read_json(&args.model)?;
    let text = match args.format {
        ExportFormat::Json => tree.to_json_string(),
        ExportFormat::Dot => {
            let ds = match &args.data {
                Some(p) => Some(read_binarized(p, &args.label, args.bins)?),
                None => None,
            };
            if let Some(d) = &ds {
                if d.n_features != tree.n_features() {
                    return Err(Error::FeatureMismatch { expected: tree.n_features(), got: d.n_features }.into());
                }
            }
            tree.to_dot(ds.as_ref())
        }
    };
    fs::write(&args.out, text)?;
    Ok(exit::OK)
}

fn deadline(timeout: Option<f64>) -> Result<Option<Instant>, Error> {
    match timeout {
        Some(t) if !(t > 0.0 && t.is_finite()) => Err(Error::Config(format!("bad timeout {t}"))),
        Some(t) => Ok(Some(Instant::now() + Duration::from_secs_f64(t))),
        None => Ok(None),
    }
}

fn write_model(out: &mut impl Write, m: &Assignment, n_vars: u32) -> io::Result<()> {
    write!(out, "v")?;
    for i in 1..=n_vars {
        let x = i as i64;
        let on = m.values().get(i as usize - 1).copied().unwrap_or(false);
        write!(out, " {}", if on { x } else { -x })?;
    }
    writeln!(out, " 0")
}

pub fn cmd_sat(args: &FileArgs) -> anyhow::Result<i32> {
    let cnf = read_dimacs_file(&args.input)?;
    let mut solver = Solver::from_cnf(&cnf);
    solver.set_deadline(deadline(args.timeout)?);
    let res = solver.solve(&[]);
    let mut out = BufWriter::new(io::stdout().lock());
    match res {
        SatResult::Sat => {
            writeln!(out, "s SATISFIABLE")?;
            write_model(&mut out, solver.model()?, cnf.n_vars)?;
        }
        SatResult::Unsat => writeln!(out, "s UNSATISFIABLE")?,
        SatResult::Interrupted => {
            writeln!(out, "s UNKNOWN")?;
            out.flush()?;
            return Ok(exit::TIMEOUT);
        }
    }
    out.flush()?;
    Ok(exit::OK)
}

pub fn cmd_maxsat(args: &FileArgs) -> anyhow::Result<i32> {
    let phi = read_wcnf_file(&args.input)?;
    let cfg = MaxSatConfig { deadline: deadline(args.timeout)?, ..Default::default() };
    let res = linear_maxsat_with(&phi, &cfg, &mut |p| println!("o {}", p.cost));
    let mut out = BufWriter::new(io::stdout().lock());
    let code = match res.status {
        SolveStatus::Optimal => {
            writeln!(out, "s OPTIMUM FOUND")?;
            exit::OK
        }
        SolveStatus::Feasible => {
            writeln!(out, "s SATISFIABLE")?;
            exit::TIMEOUT
        }
        SolveStatus::Unsat => {
            writeln!(out, "s UNSATISFIABLE")?;
            exit::OK
        }
        SolveStatus::Unknown => {
            writeln!(out, "s UNKNOWN")?;
            exit::TIMEOUT
        }
    };
    if let Some(m) = &res.model {
        write_model(&mut out, m, phi.n_vars)?;
    }
    out.flush()?;
    Ok(code)
}

pub fn cmd_oracle(args: &DataArgs) -> anyhow::Result<i32> {
    let ds: BinDataset = load_dataset(args)?;
    let (size, tree) = brute_force_mpdt(&ds, &OracleBudget::default())?;
    println!("minimum size {size}");
    println!("{}", tree.to_json_string());
    Ok(exit::OK)
}
