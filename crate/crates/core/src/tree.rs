//! Decision trees over binary features.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::BinDataset;
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    /// Examples with feature value 1 continue at `on1`, value 0 at `on0`.
    Decision { feature: usize, on1: usize, on0: usize },
    Leaf { class: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    root: usize,
    n_features: usize,
}

impl DecisionTree {
    /// Checks the structure and returns the tree.
    pub fn new(nodes: Vec<Node>, root: usize, n_features: usize) -> Result<Self, Error> {
        let t = DecisionTree { nodes, root, n_features };
        t.validate()?;
        Ok(t)
    }

    pub fn leaf(class: usize, n_features: usize) -> Self {
        DecisionTree { nodes: vec![Node::Leaf { class }], root: 0, n_features }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    /// Longest root-to-leaf path counted in edges.
    pub fn depth(&self) -> usize {
        fn go(t: &DecisionTree, i: usize) -> usize {
            match t.nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Decision { on1, on0, .. } => 1 + go(t, on1).max(go(t, on0)),
            }
        }
        go(self, self.root)
    }

    /// One root, one parent per other node, every node reachable, no feature
    /// repeated along a path, features in range.
    pub fn validate(&self) -> Result<(), Error> {
        let bad = |m: String| Err(Error::MalformedTree(m));
        if self.root >= self.nodes.len() {
            return bad(format!("root {} out of range", self.root));
        }
        let mut parents = vec![0usize; self.nodes.len()];
        for n in &self.nodes {
            if let Node::Decision { feature, on1, on0 } = *n {
                if feature >= self.n_features {
                    return bad(format!("feature {feature} out of range"));
                }
                for c in [on1, on0] {
                    if c >= self.nodes.len() {
                        return bad(format!("child {c} out of range"));
                    }
                    parents[c] += 1;
                }
            }
        }
        if parents[self.root] != 0 {
            return bad("root has a parent".into());
        }
        if let Some(i) = (0..self.nodes.len()).find(|&i| i != self.root && parents[i] != 1) {
            return bad(format!("node {i} has {} parents", parents[i]));
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut path = Vec::new();
        self.check_paths(self.root, &mut path, &mut seen)?;
        if seen.iter().any(|s| !s) {
            return bad("unreachable node".into());
        }
        Ok(())
    }

    fn check_paths(&self, i: usize, path: &mut Vec<usize>, seen: &mut [bool]) -> Result<(), Error> {
        if seen[i] {
            return Err(Error::MalformedTree("cycle".into()));
        }
        seen[i] = true;
        if let Node::Decision { feature, on1, on0 } = self.nodes[i] {
            if path.contains(&feature) {
                return Err(Error::MalformedTree(format!("feature {feature} tested twice on a path")));
            }
            path.push(feature);
            self.check_paths(on1, path, seen)?;
            self.check_paths(on0, path, seen)?;
            path.pop();
        }
        Ok(())
    }

    pub fn predict(&self, x: &[bool]) -> Result<usize, Error> {
        if x.len() != self.n_features {
            return Err(Error::FeatureMismatch { expected: self.n_features, got: x.len() });
        }
        let mut i = self.root;
        loop {
            match self.nodes[i] {
                Node::Leaf { class } => return Ok(class),
                Node::Decision { feature, on1, on0 } => i = if x[feature] { on1 } else { on0 },
            }
        }
    }

    /// Fraction of correctly classified examples (1.0 on an empty set).
    pub fn evaluate(&self, ds: &BinDataset) -> Result<f64, Error> {
        if ds.n_features != self.n_features {
            return Err(Error::FeatureMismatch { expected: self.n_features, got: ds.n_features });
        }
        if ds.is_empty() {
            return Ok(1.0);
        }
        let mut correct = 0usize;
        for (x, &y) in ds.examples.iter().zip(&ds.labels) {
            correct += usize::from(self.predict(x)? == y);
        }
        Ok(correct as f64 / ds.len() as f64)
    }

    pub fn to_json(&self) -> TreeJson {
        TreeJson {
            nodes: self
                .nodes
                .iter()
                .enumerate()
                .map(|(id, n)| match *n {
                    Node::Decision { feature, on1, on0 } => NodeJson {
                        id,
                        kind: NodeKind::Decision,
                        feature: Some(feature),
                        class: None,
                        on1: Some(on1),
                        on0: Some(on0),
                    },
                    Node::Leaf { class } => {
                        NodeJson { id, kind: NodeKind::Leaf, feature: None, class: Some(class), on1: None, on0: None }
                    }
                })
                .collect(),
            root: self.root,
            n_features: self.n_features,
        }
    }

    pub fn from_json(j: &TreeJson) -> Result<Self, Error> {
        let mut nodes = vec![None; j.nodes.len()];
        for n in &j.nodes {
            let slot = nodes
                .get_mut(n.id)
                .ok_or_else(|| Error::MalformedTree(format!("node id {} out of range", n.id)))?;
            let missing = |f: &str| Error::MalformedTree(format!("node {} lacks `{f}`", n.id));
            *slot = Some(match n.kind {
                NodeKind::Decision => Node::Decision {
                    feature: n.feature.ok_or_else(|| missing("feature"))?,
                    on1: n.on1.ok_or_else(|| missing("on1"))?,
                    on0: n.on0.ok_or_else(|| missing("on0"))?,
                },
                NodeKind::Leaf => Node::Leaf { class: n.class.ok_or_else(|| missing("class"))? },
            });
        }
        let nodes = nodes
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::MalformedTree("duplicate node ids".into()))?;
        DecisionTree::new(nodes, j.root, j.n_features)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("tree serializes") + "\n"
    }

    pub fn from_json_str(s: &str) -> Result<Self, Error> {
        Self::from_json(&serde_json::from_str(s)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<(), Error> {
        fs::write(path, self.to_json_string())?;
        Ok(())
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self, Error> {
        Self::from_json_str(&fs::read_to_string(path)?)
    }

    /// Graphviz rendering; `ds` supplies feature and class names when given.
    pub fn to_dot(&self, ds: Option<&BinDataset>) -> String {
        let mut s = String::from("digraph tree {\n  node [fontname=\"Helvetica\"];\n");
        for (i, n) in self.nodes.iter().enumerate() {
            match *n {
                Node::Decision { feature, .. } => {
                    let name = ds.map_or_else(|| format!("f{feature}"), |d| d.feature_name(feature));
                    let _ = writeln!(s, "  n{i} [shape=box, label=\"{}\"];", name.replace('"', "\\\""));
                }
                Node::Leaf { class } => {
                    let name = ds
                        .and_then(|d| d.class_names.get(class).cloned())
                        .unwrap_or_else(|| class.to_string());
                    let _ = writeln!(s, "  n{i} [shape=ellipse, label=\"{}\"];", name.replace('"', "\\\""));
                }
            }
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if let Node::Decision { on1, on0, .. } = *n {
                let _ = writeln!(s, "  n{i} -> n{on1} [label=\"1\"];");
                let _ = writeln!(s, "  n{i} -> n{on0} [label=\"0\"];");
            }
        }
        s.push_str("}\n");
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Decision,
    Leaf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeJson {
    pub id: usize,
    pub kind: NodeKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub feature: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub class: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub on1: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub on0: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeJson {
    pub nodes: Vec<NodeJson>,
    pub root: usize,
    pub n_features: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn stump() -> DecisionTree {
        DecisionTree::new(
            vec![Node::Decision { feature: 0, on1: 1, on0: 2 }, Node::Leaf { class: 1 }, Node::Leaf { class: 0 }],
            0,
            1,
        )
        .unwrap()
    }

    #[test]
    fn stump_classifies_its_data() {
        let ds = BinDataset::from_bits(vec![vec![false], vec![true]], vec![0, 1]).unwrap();
        assert_eq!(stump().evaluate(&ds).unwrap(), 1.0);
        assert_eq!(stump().size(), 3);
        assert_eq!(stump().depth(), 1);
    }

    #[test]
    fn constant_leaf_on_balanced_labels() {
        let ds = BinDataset::from_bits(vec![vec![false], vec![true], vec![true], vec![false]], vec![0, 1, 0, 1]).unwrap();
        assert_eq!(DecisionTree::leaf(0, 1).evaluate(&ds).unwrap(), 0.5);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(matches!(stump().predict(&[true, false]), Err(Error::FeatureMismatch { .. })));
    }

    #[test]
    fn malformed_trees_are_rejected() {
        // repeated feature on a path
        let nodes = vec![
            Node::Decision { feature: 0, on1: 1, on0: 2 },
            Node::Decision { feature: 0, on1: 3, on0: 4 },
            Node::Leaf { class: 0 },
            Node::Leaf { class: 0 },
            Node::Leaf { class: 1 },
        ];
        assert!(DecisionTree::new(nodes, 0, 2).is_err());
        // shared child
        let nodes = vec![Node::Decision { feature: 0, on1: 1, on0: 1 }, Node::Leaf { class: 0 }];
        assert!(DecisionTree::new(nodes, 0, 1).is_err());
    }

    #[test]
    fn dot_has_three_nodes_two_edges() {
        let dot = stump().to_dot(None);
        assert_eq!(dot.matches("shape=").count(), 3);
        assert_eq!(dot.matches("->").count(), 2);
    }

    #[test]
    fn leaf_only_dot() {
        let dot = DecisionTree::leaf(0, 3).to_dot(None);
        assert_eq!(dot.matches("shape=").count(), 1);
        assert_eq!(dot.matches("->").count(), 0);
    }

    /// Random valid tree: features drawn without repetition along each path.
    fn arb_tree() -> impl Strategy<Value = DecisionTree> {
        (1usize..6, prop::collection::vec(any::<u32>(), 64)).prop_map(|(k, coins)| {
            let mut nodes = Vec::new();
            let mut coin = coins.into_iter().cycle();
            fn grow(
                nodes: &mut Vec<Node>,
                free: Vec<usize>,
                coin: &mut impl Iterator<Item = u32>,
            ) -> usize {
                let c = coin.next().unwrap();
                let id = nodes.len();
                nodes.push(Node::Leaf { class: (c % 3) as usize });
                if free.is_empty() || c % 4 == 0 {
                    return id;
                }
                let f = free[(c as usize / 4) % free.len()];
                let rest: Vec<usize> = free.iter().copied().filter(|&g| g != f).collect();
                let on1 = grow(nodes, rest.clone(), coin);
                let on0 = grow(nodes, rest, coin);
                nodes[id] = Node::Decision { feature: f, on1, on0 };
                id
            }
            grow(&mut nodes, (0..k).collect(), &mut coin);
            DecisionTree::new(nodes, 0, k).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn json_round_trip(t in arb_tree()) {
            let back = DecisionTree::from_json_str(&t.to_json_string()).unwrap();
            prop_assert_eq!(back, t);
        }

        #[test]
        fn size_parity_and_depth(t in arb_tree()) {
            prop_assert_eq!(t.size() % 2, 1);
            prop_assert_eq!(t.n_leaves(), t.size() - t.n_leaves() + 1);
            prop_assert!(t.depth() <= (t.size() - 1) / 2);
        }
    }
}
