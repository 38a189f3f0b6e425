//! Tabular data loading, uniform discretization, binary feature encoding and
//! stratified splitting.

mod split;

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::Error;

pub use split::{stratified_partition, stratified_split, SplitSpec};

/// Columns with more distinct numeric values than this are continuous.
pub const MAX_CATEGORICAL_NUMERIC: usize = 8;
pub const DEFAULT_BINS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Continuous(Vec<f64>),
    /// Numeric categories; order follows the numeric value.
    Ordinal(Vec<f64>),
    /// Text categories; order follows first appearance.
    Nominal(Vec<String>),
    /// Exactly two distinct raw values.
    Binary(Vec<String>),
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Continuous(v) | ColumnData::Ordinal(v) => v.len(),
            ColumnData::Nominal(v) | ColumnData::Binary(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ColumnData::Continuous(_) => "continuous",
            ColumnData::Ordinal(_) => "ordinal",
            ColumnData::Nominal(_) => "nominal",
            ColumnData::Binary(_) => "binary",
        }
    }

    /// Distinct values in encoding order, rendered as text.
    fn domain(&self) -> Vec<String> {
        match self {
            ColumnData::Continuous(v) | ColumnData::Ordinal(v) => {
                let mut d = v.clone();
                d.sort_by(f64::total_cmp);
                d.dedup();
                d.into_iter().map(fmt_num).collect()
            }
            ColumnData::Nominal(v) => first_appearance(v),
            ColumnData::Binary(v) => {
                let nums: Option<Vec<f64>> = v.iter().map(|s| s.parse().ok()).collect();
                match nums {
                    Some(nums) => {
                        let mut d = nums;
                        d.sort_by(f64::total_cmp);
                        d.dedup();
                        // map back to the raw spelling of each numeric value
                        d.iter()
                            .map(|x| v.iter().find(|s| s.parse::<f64>().ok() == Some(*x)).cloned().unwrap_or_default())
                            .collect()
                    }
                    None => first_appearance(v),
                }
            }
        }
    }

    fn render(&self, row: usize) -> String {
        match self {
            ColumnData::Continuous(v) | ColumnData::Ordinal(v) => fmt_num(v[row]),
            ColumnData::Nominal(v) | ColumnData::Binary(v) => v[row].clone(),
        }
    }
}

fn fmt_num(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

fn first_appearance(v: &[String]) -> Vec<String> {
    let mut seen = Vec::new();
    for s in v {
        if !seen.contains(s) {
            seen.push(s.clone());
        }
    }
    seen
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    pub column_names: Vec<String>,
    pub columns: Vec<ColumnData>,
    pub label_column: usize,
    pub n_rows: usize,
}

fn is_missing(cell: &str) -> bool {
    cell.is_empty() || cell == "?"
}

fn infer_column(name: &str, cells: Vec<String>) -> Result<ColumnData, Error> {
    if let Some(row) = cells.iter().position(|c| is_missing(c)) {
        return Err(Error::MissingValue { column: name.to_string(), row });
    }
    let distinct = first_appearance(&cells).len();
    let nums: Option<Vec<f64>> = cells.iter().map(|c| c.parse::<f64>().ok()).collect();
    Ok(match nums {
        Some(v) if distinct > MAX_CATEGORICAL_NUMERIC => ColumnData::Continuous(v),
        _ if distinct == 2 => ColumnData::Binary(cells),
        Some(v) => ColumnData::Ordinal(v),
        None => ColumnData::Nominal(cells),
    })
}

impl RawDataset {
    /// Reads a comma-separated file with a mandatory header row.
    pub fn load_csv(path: impl AsRef<Path>, label: &str) -> Result<Self, Error> {
        Self::read_csv(BufReader::new(File::open(path)?), label)
    }

    pub fn read_csv<R: Read>(reader: R, label: &str) -> Result<Self, Error> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if header.is_empty() || header.iter().all(String::is_empty) {
            return Err(Error::EmptyDataset);
        }
        let label_column = header
            .iter()
            .position(|h| h == label)
            .ok_or_else(|| Error::MissingLabel(label.to_string()))?;
        let mut cells: Vec<Vec<String>> = vec![Vec::new(); header.len()];
        let mut n_rows = 0;
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() == 1 && rec.get(0) == Some("") {
                continue;
            }
            if rec.len() != header.len() {
                return Err(Error::RaggedRow { row: row + 1, got: rec.len(), expected: header.len() });
            }
            for (c, cell) in rec.iter().enumerate() {
                cells[c].push(cell.to_string());
            }
            n_rows += 1;
        }
        if n_rows == 0 {
            return Err(Error::EmptyDataset);
        }
        let columns = header
            .iter()
            .zip(cells)
            .map(|(name, col)| infer_column(name, col))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RawDataset { column_names: header, columns, label_column, n_rows })
    }

    pub fn feature_columns(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.columns.len()).filter(move |&c| c != self.label_column)
    }

    /// Replaces every continuous feature column by `n_bins` equal-width bin
    /// indices over `[min, max]`; the maximum falls into the last bin.
    pub fn discretize(&self, n_bins: usize) -> Result<Self, Error> {
        if n_bins < 2 {
            return Err(Error::Config(format!("need at least 2 bins, got {n_bins}")));
        }
        let mut out = self.clone();
        for c in self.feature_columns() {
            if let ColumnData::Continuous(v) = &self.columns[c] {
                out.columns[c] = ColumnData::Ordinal(uniform_bins(v, n_bins));
            }
        }
        Ok(out)
    }

    /// Encodes every feature column with ceil(log2 |D|) big-endian bits and
    /// maps labels to `0..n_classes`.
    pub fn binarize(&self) -> Result<BinDataset, Error> {
        let mut provenance = Vec::new();
        let mut domains = Vec::new();
        let mut codes: Vec<Vec<usize>> = Vec::new();
        for c in self.feature_columns() {
            let col = &self.columns[c];
            if matches!(col, ColumnData::Continuous(_)) {
                return Err(Error::ContinuousColumn(self.column_names[c].clone()));
            }
            let domain = col.domain();
            let index: HashMap<&str, usize> = domain.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
            let width = bits_for(domain.len());
            for bit in 0..width {
                provenance.push(FeatureOrigin { column: domains.len(), bit, width });
            }
            codes.push((0..self.n_rows).map(|r| index[col.render(r).as_str()]).collect());
            domains.push(ColumnDomain { name: self.column_names[c].clone(), values: domain });
        }
        let label_col = &self.columns[self.label_column];
        let class_names = match label_col {
            ColumnData::Nominal(v) | ColumnData::Binary(v)
                if v.iter().any(|s| s.parse::<f64>().is_err()) =>
            {
                first_appearance(v)
            }
            other => other.domain(),
        };
        let class_index: HashMap<&str, usize> =
            class_names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let labels: Vec<usize> = (0..self.n_rows).map(|r| class_index[label_col.render(r).as_str()]).collect();
        let examples = (0..self.n_rows)
            .map(|r| {
                provenance
                    .iter()
                    .map(|o: &FeatureOrigin| codes[o.column][r] >> (o.width - 1 - o.bit) & 1 == 1)
                    .collect()
            })
            .collect();
        Ok(BinDataset {
            n_features: provenance.len(),
            n_classes: class_names.len(),
            examples,
            labels,
            row_ids: (0..self.n_rows).collect(),
            provenance,
            domains,
            class_names,
        })
    }
}

/// Equal-width binning; a constant column maps to bin 0.
pub fn uniform_bins(values: &[f64], n_bins: usize) -> Vec<f64> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max <= min {
        return vec![0.0; values.len()];
    }
    let width = (max - min) / n_bins as f64;
    let edges: Vec<f64> = (1..n_bins).map(|i| min + width * i as f64).collect();
    values
        .iter()
        .map(|&x| edges.iter().take_while(|&&e| x >= e).count() as f64)
        .collect()
}

fn bits_for(domain: usize) -> usize {
    let mut bits = 0;
    while (1usize << bits) < domain {
        bits += 1;
    }
    bits
}

/// Where a binary feature came from: bit `bit` (0 = most significant) of the
/// `width`-bit code of original feature column `column`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureOrigin {
    pub column: usize,
    pub bit: usize,
    pub width: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnDomain {
    pub name: String,
    pub values: Vec<String>,
}

/// Binarized examples with integer class labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinDataset {
    pub examples: Vec<Vec<bool>>,
    pub labels: Vec<usize>,
    pub n_features: usize,
    pub n_classes: usize,
    /// Index of each example in the dataset it was first built from.
    pub row_ids: Vec<usize>,
    pub provenance: Vec<FeatureOrigin>,
    pub domains: Vec<ColumnDomain>,
    pub class_names: Vec<String>,
}

impl BinDataset {
    /// Builds a dataset from raw bits with anonymous provenance.
    pub fn from_bits(examples: Vec<Vec<bool>>, labels: Vec<usize>) -> Result<Self, Error> {
        if examples.len() != labels.len() {
            return Err(Error::Config("example and label counts differ".into()));
        }
        let k = examples.first().map_or(0, Vec::len);
        if examples.iter().any(|e| e.len() != k) {
            return Err(Error::Config("examples have different lengths".into()));
        }
        let n_classes = labels.iter().max().map_or(0, |m| m + 1);
        Ok(BinDataset {
            n_features: k,
            n_classes,
            row_ids: (0..examples.len()).collect(),
            provenance: (0..k).map(|i| FeatureOrigin { column: i, bit: 0, width: 1 }).collect(),
            domains: (0..k)
                .map(|i| ColumnDomain { name: format!("f{i}"), values: vec!["0".into(), "1".into()] })
                .collect(),
            class_names: (0..n_classes).map(|c| c.to_string()).collect(),
            examples,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// Human-readable name of binary feature `f`.
    pub fn feature_name(&self, f: usize) -> String {
        match self.provenance.get(f) {
            Some(o) if o.width > 1 => format!("{}[bit{}]", self.domains[o.column].name, o.bit),
            Some(o) => self.domains[o.column].name.clone(),
            None => format!("f{f}"),
        }
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    pub fn subset(&self, idx: &[usize]) -> BinDataset {
        BinDataset {
            examples: idx.iter().map(|&i| self.examples[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            row_ids: idx.iter().map(|&i| self.row_ids[i]).collect(),
            ..self.clone_meta()
        }
    }

    fn clone_meta(&self) -> BinDataset {
        BinDataset {
            examples: Vec::new(),
            labels: Vec::new(),
            row_ids: Vec::new(),
            n_features: self.n_features,
            n_classes: self.n_classes,
            provenance: self.provenance.clone(),
            domains: self.domains.clone(),
            class_names: self.class_names.clone(),
        }
    }

    /// Decodes example `q` back to the categorical value of each original
    /// feature column.
    pub fn decode_row(&self, q: usize) -> Vec<String> {
        let mut codes = vec![0usize; self.domains.len()];
        for (f, o) in self.provenance.iter().enumerate() {
            if self.examples[q][f] {
                codes[o.column] |= 1 << (o.width - 1 - o.bit);
            }
        }
        codes
            .iter()
            .zip(&self.domains)
            .map(|(&c, d)| d.values.get(c).cloned().unwrap_or_default())
            .collect()
    }

    /// Maximal groups of examples sharing a bit-vector but not a label.
    pub fn check_separability(&self) -> Vec<Vec<usize>> {
        let mut groups: BTreeMap<&[bool], Vec<usize>> = BTreeMap::new();
        for (i, e) in self.examples.iter().enumerate() {
            groups.entry(e.as_slice()).or_default().push(i);
        }
        let mut conflicts: Vec<Vec<usize>> = groups
            .into_values()
            .filter(|g| g.iter().any(|&i| self.labels[i] != self.labels[g[0]]))
            .collect();
        conflicts.sort();
        conflicts
    }

    pub fn is_separable(&self) -> bool {
        self.check_separability().is_empty()
    }

    /// Drops minority-label members of every conflict group (ties keep the
    /// smaller class id).
    pub fn resolve_conflicts_majority(&self) -> BinDataset {
        let mut drop = vec![false; self.len()];
        for group in self.check_separability() {
            let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
            for &i in &group {
                *counts.entry(self.labels[i]).or_default() += 1;
            }
            let best = counts.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).map(|(&c, _)| c).unwrap();
            for &i in &group {
                if self.labels[i] != best {
                    drop[i] = true;
                }
            }
        }
        let keep: Vec<usize> = (0..self.len()).filter(|&i| !drop[i]).collect();
        self.subset(&keep)
    }

    /// Header `k n_rows n_classes`, then one line of `k` bits and the class id
    /// per example.
    pub fn write_bin<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "{} {} {}", self.n_features, self.len(), self.n_classes)?;
        for (e, l) in self.examples.iter().zip(&self.labels) {
            for &b in e {
                write!(w, "{} ", u8::from(b))?;
            }
            writeln!(w, "{l}")?;
        }
        Ok(())
    }

    pub fn write_bin_file(&self, path: impl AsRef<Path>) -> Result<(), Error> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_bin(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn read_bin<R: BufRead>(r: R) -> Result<Self, Error> {
        let mut lines = r.lines().enumerate().filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
        let bad = |line: usize, msg: &str| Error::Parse { line, msg: msg.to_string() };
        let (_, header) = lines.next().ok_or_else(|| bad(1, "missing header"))?;
        let nums: Vec<usize> = header?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad(1, "bad header")))
            .collect::<Result<_, _>>()?;
        let [k, n, n_classes] = nums[..] else {
            return Err(bad(1, "header must be `k n_rows n_classes`"));
        };
        let mut examples = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for (i, line) in lines {
            let line = line?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != k + 1 {
                return Err(bad(i + 1, "wrong number of fields"));
            }
            let bits = toks[..k]
                .iter()
                .map(|t| match *t {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    _ => Err(bad(i + 1, "feature values must be 0 or 1")),
                })
                .collect::<Result<Vec<_>, _>>()?;
            let label: usize = toks[k].parse().map_err(|_| bad(i + 1, "bad class id"))?;
            if label >= n_classes {
                return Err(bad(i + 1, "class id out of range"));
            }
            examples.push(bits);
            labels.push(label);
        }
        if examples.len() != n {
            return Err(bad(0, "row count differs from header"));
        }
        let mut ds = BinDataset::from_bits(examples, labels)?;
        ds.n_features = k;
        ds.n_classes = n_classes;
        ds.class_names = (0..n_classes).map(|c| c.to_string()).collect();
        Ok(ds)
    }

    pub fn read_bin_file(path: impl AsRef<Path>) -> Result<Self, Error> {
        Self::read_bin(BufReader::new(File::open(path)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv(text: &str, label: &str) -> Result<RawDataset, Error> {
        RawDataset::read_csv(text.as_bytes(), label)
    }

    #[test]
    fn minimal_csv() {
        let ds = csv("a,y\n1,0\n", "y").unwrap();
        assert_eq!(ds.n_rows, 1);
        assert_eq!(ds.feature_columns().count(), 1);
    }

    #[test]
    fn header_only_is_empty() {
        assert!(matches!(csv("a,y\n", "y"), Err(Error::EmptyDataset)));
        assert!(matches!(csv("", "y"), Err(Error::EmptyDataset) | Err(Error::MissingLabel(_))));
    }

    #[test]
    fn load_errors() {
        assert!(matches!(csv("a,b\n1,2\n", "y"), Err(Error::MissingLabel(_))));
        assert!(matches!(csv("a,y\n1,2\n1\n", "y"), Err(Error::RaggedRow { .. })));
        assert!(matches!(csv("a,y\n?,2\n", "y"), Err(Error::MissingValue { .. })));
        assert!(matches!(csv("a,y\n,2\n", "y"), Err(Error::MissingValue { .. })));
        assert!(matches!(RawDataset::load_csv("/nonexistent/x.csv", "y"), Err(Error::Io(_))));
    }

    #[test]
    fn column_types_are_inferred() {
        let mut text = String::from("c,o,n,b,y\n");
        for i in 0..10 {
            text.push_str(&format!("{}.5,{},v{},{},{}\n", i, i % 3, i % 4, if i % 2 == 0 { "yes" } else { "no" }, i % 2));
        }
        let ds = csv(&text, "y").unwrap();
        let kinds: Vec<&str> = ds.columns.iter().map(ColumnData::kind).collect();
        assert_eq!(kinds, vec!["continuous", "ordinal", "nominal", "binary", "binary"]);
    }

    #[test]
    fn uniform_binning_clamps_the_maximum() {
        let v: Vec<f64> = (0..=8).map(f64::from).collect();
        assert_eq!(uniform_bins(&v, 8), vec![0., 1., 2., 3., 4., 5., 6., 7., 7.]);
    }

    #[test]
    fn constant_column_is_one_bin() {
        assert_eq!(uniform_bins(&[5.0, 5.0], 8), vec![0.0, 0.0]);
    }

    #[test]
    fn discretize_leaves_non_continuous_columns() {
        let ds = csv("b,y\n0,a\n1,b\n", "y").unwrap();
        assert_eq!(ds.discretize(8).unwrap(), ds);
        assert!(ds.discretize(1).is_err());
    }

    #[test]
    fn eight_valued_ordinal_takes_three_bits() {
        let mut text = String::from("o,y\n");
        for i in 0..8 {
            text.push_str(&format!("{},{}\n", 7 - i, i % 2));
        }
        let b = csv(&text, "y").unwrap().binarize().unwrap();
        assert_eq!(b.n_features, 3);
        // value 7 is the first row: big-endian 111
        assert_eq!(b.examples[0], vec![true, true, true]);
        assert_eq!(b.examples[7], vec![false, false, false]);
        assert_eq!(b.decode_row(2), vec!["5".to_string()]);
    }

    #[test]
    fn binary_column_maps_to_one_feature() {
        let b = csv("x,y\n0,a\n1,b\n1,a\n", "y").unwrap().binarize().unwrap();
        assert_eq!(b.n_features, 1);
        assert_eq!(b.examples, vec![vec![false], vec![true], vec![true]]);
        assert_eq!(b.labels, vec![0, 1, 0]);
        assert_eq!(b.n_classes, 2);
    }

    #[test]
    fn binarize_rejects_continuous() {
        let mut text = String::from("c,y\n");
        for i in 0..10 {
            text.push_str(&format!("{i}.25,{}\n", i % 2));
        }
        let raw = csv(&text, "y").unwrap();
        assert!(matches!(raw.binarize(), Err(Error::ContinuousColumn(_))));
        assert_eq!(raw.discretize(8).unwrap().binarize().unwrap().n_features, 3);
    }

    #[test]
    fn nominal_uses_first_appearance_order() {
        let b = csv("n,y\nred,0\nblue,1\ngreen,0\nred,1\n", "y").unwrap().binarize().unwrap();
        assert_eq!(b.domains[0].values, vec!["red", "blue", "green"]);
        assert_eq!(b.examples[2], vec![true, false]);
    }

    #[test]
    fn separability() {
        let clash = BinDataset::from_bits(vec![vec![false, true], vec![false, true]], vec![0, 1]).unwrap();
        assert_eq!(clash.check_separability(), vec![vec![0, 1]]);
        let fine = BinDataset::from_bits(vec![vec![false, true], vec![true, false]], vec![0, 1]).unwrap();
        assert!(fine.check_separability().is_empty());
    }

    #[test]
    fn majority_resolution_drops_minority() {
        let ds = BinDataset::from_bits(
            vec![vec![true], vec![true], vec![true], vec![false]],
            vec![1, 0, 1, 0],
        )
        .unwrap();
        let r = ds.resolve_conflicts_majority();
        assert_eq!(r.labels, vec![1, 1, 0]);
        assert!(r.is_separable());
    }

    #[test]
    fn bin_format_round_trip() {
        let ds = BinDataset::from_bits(vec![vec![true, false], vec![false, false]], vec![1, 0]).unwrap();
        let mut buf = Vec::new();
        ds.write_bin(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "2 2 2\n1 0 1\n0 0 0\n");
        let back = BinDataset::read_bin(buf.as_slice()).unwrap();
        assert_eq!(back.examples, ds.examples);
        assert_eq!(back.labels, ds.labels);
    }
}
