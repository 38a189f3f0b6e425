//! Minimum pure decision trees through Partial MaxSAT.
//!
//! A binarized dataset is compiled into a Partial MaxSAT instance whose
//! optimum is half the size (rounded up) of the smallest decision tree that
//! classifies every training example correctly. The instance is solved with a
//! linear SAT-UNSAT search over the bundled CDCL solver; further optimal
//! trees are enumerated with diversity preferences and ranked on a held-out
//! selection split.

pub mod cnf;
pub mod dataset;
pub mod encoder;
mod error;
pub mod optimizer;
pub mod oracle;
pub mod rng;
pub mod sat;
pub mod trainer;
pub mod tree;

pub use cnf::{Assignment, Clause, Lit, Var, VarPool, WcnfFormula};
pub use dataset::{BinDataset, RawDataset, SplitSpec};
pub use encoder::{MpdtInstance, VariableLayout};
pub use error::{Error, Result};
pub use optimizer::{linear_maxsat, mdsol, SolveOutcome, SolveStatus};
pub use sat::{SatResult, Solver};
pub use trainer::{train, TrainConfig, TrainOutcome};
pub use tree::{DecisionTree, Node};
