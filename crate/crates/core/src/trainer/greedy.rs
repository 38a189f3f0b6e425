use crate::dataset::BinDataset;
use crate::tree::{DecisionTree, Node};
use crate::Error;

/// Top-down pure tree: each impure node splits on the feature with the
/// highest information gain (lowest index on ties). When no split gains
/// anything, the lowest-index feature that separates the node is used.
pub fn greedy_upper_bound(ds: &BinDataset) -> Result<(DecisionTree, usize), Error> {
    let conflicts = ds.check_separability();
    if !conflicts.is_empty() {
        return Err(Error::Inseparable(conflicts));
    }
    let mut nodes = Vec::new();
    let idx: Vec<usize> = (0..ds.len()).collect();
    grow(ds, &idx, &mut nodes);
    let tree = DecisionTree::new(nodes, 0, ds.n_features)?;
    let size = tree.size();
    Ok((tree, size))
}

fn entropy(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.log2()
        })
        .sum()
}

fn grow(ds: &BinDataset, idx: &[usize], nodes: &mut Vec<Node>) -> usize {
    let id = nodes.len();
    let mut counts = vec![0usize; ds.n_classes.max(1)];
    for &i in idx {
        counts[ds.labels[i]] += 1;
    }
    let majority = (0..counts.len()).max_by(|&a, &b| counts[a].cmp(&counts[b]).then(b.cmp(&a))).unwrap_or(0);
    nodes.push(Node::Leaf { class: majority });
    if counts.iter().filter(|&&c| c > 0).count() <= 1 {
        return id;
    }
    let base = entropy(&counts);
    let mut best: Option<(f64, usize)> = None;
    for f in 0..ds.n_features {
        let mut c1 = vec![0usize; counts.len()];
        let mut n1 = 0;
        for &i in idx {
            if ds.examples[i][f] {
                c1[ds.labels[i]] += 1;
                n1 += 1;
            }
        }
        if n1 == 0 || n1 == idx.len() {
            continue;
        }
        let c0: Vec<usize> = counts.iter().zip(&c1).map(|(a, b)| a - b).collect();
        let n = idx.len() as f64;
        let gain = base - (n1 as f64 / n) * entropy(&c1) - ((idx.len() - n1) as f64 / n) * entropy(&c0);
        // strict comparison keeps the lowest index among equal gains
        if best.is_none_or(|(g, _)| gain > g + 1e-12) {
            best = Some((gain, f));
        }
    }
    let Some((_, f)) = best else {
        unreachable!("separable data always has a splitting feature at an impure node");
    };
    let (on1_idx, on0_idx): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| ds.examples[i][f]);
    let on1 = grow(ds, &on1_idx, nodes);
    let on0 = grow(ds, &on0_idx, nodes);
    nodes[id] = Node::Decision { feature: f, on1, on0 };
    id
}
