use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::BinDataset;
use crate::{rng, Error};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_frac: f64,
    pub selection_frac: f64,
    pub test_frac: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec { train_frac: 0.64, selection_frac: 0.16, test_frac: 0.20, seed: 0 }
    }
}

impl SplitSpec {
    pub fn new(train: f64, selection: f64, test: f64, seed: u64) -> Result<Self, Error> {
        let s = SplitSpec { train_frac: train, selection_frac: selection, test_frac: test, seed };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), Error> {
        let fr = [self.train_frac, self.selection_frac, self.test_frac];
        if fr.iter().any(|&f| !(f > 0.0)) {
            return Err(Error::Config("split fractions must be positive".into()));
        }
        if (fr.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Config("split fractions must sum to 1".into()));
        }
        Ok(())
    }

    pub fn fractions(&self) -> [f64; 3] {
        [self.train_frac, self.selection_frac, self.test_frac]
    }
}

/// Train/selection/test split under `spec.seed`'s split stream.
pub fn stratified_split(ds: &BinDataset, spec: &SplitSpec) -> Result<(BinDataset, BinDataset, BinDataset), Error> {
    spec.validate()?;
    let mut rng = rng::substream(spec.seed, rng::SPLIT);
    let parts = stratified_partition(&ds.labels, ds.n_classes, &spec.fractions(), &mut rng);
    Ok((ds.subset(&parts[0]), ds.subset(&parts[1]), ds.subset(&parts[2])))
}

/// Part sizes: the last part takes `ceil(n * f_last)`, each earlier part
/// (except the first) the ceiling of its share of what is left, and the
/// first part keeps the remainder.
pub(crate) fn part_sizes(n: usize, fracs: &[f64]) -> Vec<usize> {
    let mut sizes = vec![0; fracs.len()];
    let mut remaining = n;
    for s in (1..fracs.len()).rev() {
        let share: f64 = fracs[..=s].iter().sum();
        let want = (remaining as f64 * fracs[s] / share - 1e-9).ceil().max(0.0) as usize;
        sizes[s] = want.min(remaining);
        remaining -= sizes[s];
    }
    sizes[0] = remaining;
    sizes
}

/// Stratified partition of example indices into `fracs.len()` parts.
///
/// Part sizes come from [`part_sizes`]. Each class receives a row of counts
/// within one of `n_c * size_s / n` (rounded to floor or ceiling, column sums
/// exact); members are shuffled per class before being dealt out. Classes
/// with fewer members than parts go entirely to the first part. Indices in
/// each part are sorted.
pub fn stratified_partition<R: Rng>(labels: &[usize], n_classes: usize, fracs: &[f64], rng: &mut R) -> Vec<Vec<usize>> {
    let n_parts = fracs.len();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &l) in labels.iter().enumerate() {
        members[l].push(i);
    }
    let eligible: Vec<usize> = (0..n_classes).filter(|&c| members[c].len() >= n_parts).collect();
    let n_eligible: usize = eligible.iter().map(|&c| members[c].len()).sum();
    let sizes = part_sizes(n_eligible, fracs);
    let counts = apportion(&eligible.iter().map(|&c| members[c].len()).collect::<Vec<_>>(), &sizes);

    let mut parts: Vec<Vec<usize>> = vec![Vec::new(); n_parts];
    let mut row_of = vec![None; n_classes];
    for (r, &c) in eligible.iter().enumerate() {
        row_of[c] = Some(r);
    }
    for (c, mem) in members.iter_mut().enumerate() {
        mem.shuffle(rng);
        match row_of[c] {
            None => parts[0].extend_from_slice(mem),
            Some(r) => {
                let mut it = mem.iter();
                for (s, part) in parts.iter_mut().enumerate() {
                    part.extend(it.by_ref().take(counts[r][s]));
                }
            }
        }
    }
    for p in &mut parts {
        p.sort_unstable();
    }
    parts
}

/// Integer matrix with row sums `rows`, column sums `cols` and every entry the
/// floor or ceiling of `rows[r] * cols[s] / Σ rows`. Rounding up is decided by
/// max-flow over the fractional cells, preferring larger fractional parts.
fn apportion(rows: &[usize], cols: &[usize]) -> Vec<Vec<usize>> {
    let n: usize = rows.iter().sum();
    if n == 0 {
        return vec![vec![0; cols.len()]; rows.len()];
    }
    let mut counts = vec![vec![0usize; cols.len()]; rows.len()];
    let mut fracs = vec![vec![0.0f64; cols.len()]; rows.len()];
    for r in 0..rows.len() {
        for s in 0..cols.len() {
            let num = rows[r] * cols[s];
            counts[r][s] = num / n;
            fracs[r][s] = (num % n) as f64 / n as f64;
        }
    }
    let mut row_need: Vec<usize> = rows.iter().zip(&counts).map(|(&t, c)| t - c.iter().sum::<usize>()).collect();
    let mut col_need: Vec<usize> =
        (0..cols.len()).map(|s| cols[s] - counts.iter().map(|c| c[s]).sum::<usize>()).collect();

    // Bipartite flow: row r -> column s through cell (r, s) if fractional.
    // `up[r][s]` marks cells already rounded up.
    let mut up = vec![vec![false; cols.len()]; rows.len()];
    for r in 0..rows.len() {
        while row_need[r] > 0 {
            let mut seen_cols = vec![false; cols.len()];
            let mut seen_rows = vec![false; rows.len()];
            if !augment(r, &fracs, &mut up, &mut col_need, &mut seen_rows, &mut seen_cols) {
                break;
            }
            row_need[r] -= 1;
        }
    }
    debug_assert!(row_need.iter().all(|&x| x == 0), "apportionment must exist");
    for r in 0..rows.len() {
        for s in 0..cols.len() {
            counts[r][s] += usize::from(up[r][s]);
        }
    }
    counts
}

fn augment(
    r: usize,
    fracs: &[Vec<f64>],
    up: &mut [Vec<bool>],
    col_need: &mut [usize],
    seen_rows: &mut [bool],
    seen_cols: &mut [bool],
) -> bool {
    seen_rows[r] = true;
    let mut order: Vec<usize> = (0..col_need.len()).filter(|&s| fracs[r][s] > 0.0 && !up[r][s]).collect();
    order.sort_by(|&a, &b| fracs[r][b].total_cmp(&fracs[r][a]).then(a.cmp(&b)));
    for s in order {
        if seen_cols[s] {
            continue;
        }
        seen_cols[s] = true;
        if col_need[s] > 0 {
            col_need[s] -= 1;
            up[r][s] = true;
            return true;
        }
        // column s is full: try to move one of its round-ups to another column
        for r2 in 0..up.len() {
            if up[r2][s] && !seen_rows[r2] {
                up[r2][s] = false;
                if augment(r2, fracs, up, col_need, seen_rows, seen_cols) {
                    up[r][s] = true;
                    return true;
                }
                up[r2][s] = true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const DEFAULT_FRACS: [f64; 3] = [0.64, 0.16, 0.20];

    #[test]
    fn three_way_sizes_match_known_row_counts() {
        // (rows, train, sel, test)
        for (n, tr, sel, te) in [
            (105, 67, 17, 21),
            (101, 64, 16, 21),
            (128, 81, 21, 26),
            (160, 102, 26, 32),
            (500, 320, 80, 100),
            (120, 76, 20, 24),
            (8124, 5199, 1300, 1625),
            (556, 355, 89, 112),
        ] {
            assert_eq!(part_sizes(n, &DEFAULT_FRACS), vec![tr, sel, te], "n={n}");
        }
    }

    #[test]
    fn single_class_exact_proportions() {
        assert_eq!(part_sizes(10, &[0.8, 0.1, 0.1]), vec![8, 1, 1]);
        let labels = vec![0; 10];
        let mut rng = rng::substream(1, rng::SPLIT);
        let parts = stratified_partition(&labels, 1, &[0.8, 0.1, 0.1], &mut rng);
        assert_eq!(parts.iter().map(Vec::len).collect::<Vec<_>>(), vec![8, 1, 1]);
    }

    #[test]
    fn append_like_split_sizes() {
        let labels: Vec<usize> = (0..105).map(|i| usize::from(i % 5 == 0)).collect();
        let ds = BinDataset::from_bits(vec![vec![false]; 105], labels).unwrap();
        let (a, b, c) = stratified_split(&ds, &SplitSpec::default()).unwrap();
        assert_eq!((a.len(), b.len(), c.len()), (67, 17, 21));
    }

    #[test]
    fn tiny_classes_go_to_train() {
        let labels = vec![0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1];
        let mut rng = rng::substream(3, rng::SPLIT);
        let parts = stratified_partition(&labels, 2, &DEFAULT_FRACS, &mut rng);
        assert!(parts[0].contains(&10) && parts[0].contains(&11));
    }

    #[test]
    fn invalid_specs() {
        assert!(SplitSpec::new(0.5, 0.5, 0.0, 0).is_err());
        assert!(SplitSpec::new(0.5, 0.3, 0.3, 0).is_err());
        assert!(SplitSpec::new(0.64, 0.16, 0.2, 0).is_ok());
    }

    proptest! {
        #[test]
        fn partition_invariants(
            labels in prop::collection::vec(0usize..4, 1..200),
            seed in any::<u64>(),
        ) {
            let n_classes = 4;
            let mut rng = rng::substream(seed, rng::SPLIT);
            let parts = stratified_partition(&labels, n_classes, &DEFAULT_FRACS, &mut rng);
            let mut all: Vec<usize> = parts.concat();
            all.sort_unstable();
            prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());

            let mut class_n = vec![0usize; n_classes];
            for &l in &labels { class_n[l] += 1; }
            let eligible: usize = class_n.iter().filter(|&&c| c >= 3).sum();
            let sizes = part_sizes(eligible, &DEFAULT_FRACS);
            for (s, part) in parts.iter().enumerate() {
                for c in 0..n_classes {
                    if class_n[c] < 3 { continue; }
                    let got = part.iter().filter(|&&i| labels[i] == c).count() as f64;
                    let target = class_n[c] as f64 * sizes[s] as f64 / eligible as f64;
                    prop_assert!((got - target).abs() < 1.0, "class {} part {}: {} vs {}", c, s, got, target);
                }
            }
            // same seed, same partition
            let mut rng2 = rng::substream(seed, rng::SPLIT);
            prop_assert_eq!(parts, stratified_partition(&labels, n_classes, &DEFAULT_FRACS, &mut rng2));
        }
    }
}
