//! Shared inputs for the benchmarks.

use std::path::Path;

use mpdt_core::{BinDataset, RawDataset};

/// A bundled dataset from `data/`, binarized with 8 bins.
pub fn bundled(name: &str) -> BinDataset {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(format!("{name}.csv"));
    RawDataset::load_csv(p, "target")
        .and_then(|r| r.discretize(8))
        .and_then(|r| r.binarize())
        .unwrap_or_else(|e| panic!("{name}: {e}"))
}
