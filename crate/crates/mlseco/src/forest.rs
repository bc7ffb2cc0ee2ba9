//! Randomized decision-tree ensembles, trained per (label, depth cap)
//! configuration. The forests exist solely as a source of diverse rules;
//! they are never used as voting classifiers.
//!
//! Trees are binary: nominal attributes split into (= value) vs (!= value)
//! branches, numeric attributes into (< threshold) vs (>= threshold).
//! Instances are bagged with replacement and each node considers a random
//! subset of the attributes, choosing the split with the best information
//! gain.

use crate::dataset::{AttributeKind, MultiLabelDataset, Value};
use crate::error::{Error, Result};
use crate::rng::{sample_with_replacement, sample_without_replacement, Stream};

/// Gains below this threshold count as zero (no split).
const GAIN_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitTest {
    /// Left branch: attribute equals the value; right: it does not.
    NominalEq(u32),
    /// Left branch: attribute is strictly below the threshold; right: >=.
    NumericLt(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Leaf {
        class: u8,
        /// Bag instances per class that reached this leaf.
        support: [u32; 2],
    },
    Split {
        attr: usize,
        test: SplitTest,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

#[derive(Debug, Clone)]
pub struct DecisionTree {
    pub root: TreeNode,
    pub label: usize,
    /// Depth cap used while growing; 0 means unrestricted.
    pub depth_cap: usize,
    /// The bag (with duplicates) this tree was fit on, kept for auditing.
    pub bag: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ForestConfig {
    /// Trees per forest.
    pub tree_count: usize,
    /// Maximum tree depth in edges; 0 = unrestricted.
    pub max_depth: usize,
    /// Bag size as a fraction of the training set; drawn with replacement.
    pub bag_fraction: f64,
    /// Attributes sampled per node; `None` uses floor(log2(l-1)) + 1.
    pub attr_sample: Option<usize>,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            tree_count: 10,
            max_depth: 0,
            bag_fraction: 1.0,
            attr_sample: None,
            seed: 0,
        }
    }
}

impl ForestConfig {
    /// Effective number of attributes examined per node.
    pub fn attrs_per_node(&self, num_attrs: usize) -> usize {
        let k = self.attr_sample.unwrap_or_else(|| {
            if num_attrs <= 2 {
                1
            } else {
                (num_attrs - 1).ilog2() as usize + 1
            }
        });
        k.clamp(1, num_attrs)
    }
}

fn entropy(c0: usize, c1: usize) -> f64 {
    let n = c0 + c1;
    if n == 0 {
        return 0.0;
    }
    let mut h = 0.0;
    for &c in &[c0, c1] {
        if c > 0 {
            let p = c as f64 / n as f64;
            h -= p * p.log2();
        }
    }
    h
}

fn info_gain(parent: (usize, usize), left: (usize, usize), right: (usize, usize)) -> f64 {
    let n = (parent.0 + parent.1) as f64;
    let nl = (left.0 + left.1) as f64;
    let nr = (right.0 + right.1) as f64;
    entropy(parent.0, parent.1)
        - nl / n * entropy(left.0, left.1)
        - nr / n * entropy(right.0, right.1)
}

struct Grower<'a> {
    ds: &'a MultiLabelDataset,
    label: usize,
    minority: u8,
    k: usize,
    depth_cap: usize,
    rng: rand_chacha::ChaCha8Rng,
}

impl Grower<'_> {
    fn class_of(&self, row: usize) -> u8 {
        self.ds.labels.get(row, self.label)
    }

    fn leaf(&self, counts: [u32; 2]) -> TreeNode {
        let class = match counts[1].cmp(&counts[0]) {
            std::cmp::Ordering::Greater => 1,
            std::cmp::Ordering::Less => 0,
            std::cmp::Ordering::Equal => self.minority,
        };
        TreeNode::Leaf {
            class,
            support: counts,
        }
    }

    fn grow(&mut self, rows: &[usize], depth: usize) -> TreeNode {
        let mut counts = [0u32; 2];
        for &r in rows {
            counts[self.class_of(r) as usize] += 1;
        }
        let pure = counts[0] == 0 || counts[1] == 0;
        let capped = self.depth_cap > 0 && depth >= self.depth_cap;
        if pure || capped {
            return self.leaf(counts);
        }

        let mut candidates =
            sample_without_replacement(&mut self.rng, self.ds.num_attributes(), self.k);
        candidates.sort_unstable();

        let parent = (counts[0] as usize, counts[1] as usize);
        let mut best: Option<(f64, usize, SplitTest)> = None;
        for attr in candidates {
            match &self.ds.attributes[attr].kind {
                AttributeKind::Numeric => {
                    let mut pairs: Vec<(f64, u8)> = rows
                        .iter()
                        .map(|&r| match self.ds.instances[r].values[attr] {
                            Value::Numeric(v) => (v, self.class_of(r)),
                            _ => unreachable!("dataset must be imputed before training"),
                        })
                        .collect();
                    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
                    let mut left = (0usize, 0usize);
                    for i in 0..pairs.len() - 1 {
                        if pairs[i].1 == 0 {
                            left.0 += 1;
                        } else {
                            left.1 += 1;
                        }
                        let (a, b) = (pairs[i].0, pairs[i + 1].0);
                        if a == b {
                            continue;
                        }
                        let mid = a + (b - a) / 2.0;
                        if !(a < mid) {
                            continue;
                        }
                        let right = (parent.0 - left.0, parent.1 - left.1);
                        let gain = info_gain(parent, left, right);
                        if gain > best.as_ref().map_or(GAIN_EPS, |b| b.0) {
                            best = Some((gain, attr, SplitTest::NumericLt(mid)));
                        }
                    }
                }
                AttributeKind::Nominal(values) => {
                    let mut per_value = vec![(0usize, 0usize); values.len()];
                    for &r in rows {
                        match self.ds.instances[r].values[attr] {
                            Value::Nominal(v) => {
                                let slot = &mut per_value[v as usize];
                                if self.class_of(r) == 0 {
                                    slot.0 += 1;
                                } else {
                                    slot.1 += 1;
                                }
                            }
                            _ => unreachable!("dataset must be imputed before training"),
                        }
                    }
                    for (v, &left) in per_value.iter().enumerate() {
                        let nl = left.0 + left.1;
                        if nl == 0 || nl == rows.len() {
                            continue;
                        }
                        let right = (parent.0 - left.0, parent.1 - left.1);
                        let gain = info_gain(parent, left, right);
                        if gain > best.as_ref().map_or(GAIN_EPS, |b| b.0) {
                            best = Some((gain, attr, SplitTest::NominalEq(v as u32)));
                        }
                    }
                }
            }
        }

        let Some((_, attr, test)) = best else {
            return self.leaf(counts);
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&r| goes_left(self.ds, r, attr, test));
        debug_assert!(!left_rows.is_empty() && !right_rows.is_empty());
        let left = self.grow(&left_rows, depth + 1);
        let right = self.grow(&right_rows, depth + 1);
        TreeNode::Split {
            attr,
            test,
            left: Box::new(left),
            right: Box::new(right),
        }
    }
}

fn goes_left(ds: &MultiLabelDataset, row: usize, attr: usize, test: SplitTest) -> bool {
    match (test, ds.instances[row].values[attr]) {
        (SplitTest::NominalEq(v), Value::Nominal(x)) => x == v,
        (SplitTest::NumericLt(t), Value::Numeric(x)) => x < t,
        _ => unreachable!("attribute kind mismatch"),
    }
}

/// Fit one tree on a fresh bag drawn from `stream`.
pub fn train_tree(
    ds: &MultiLabelDataset,
    label: usize,
    config: &ForestConfig,
    stream: Stream,
) -> Result<DecisionTree> {
    let m = ds.num_instances();
    if m == 0 {
        return Err(Error::Dataset("cannot train on an empty dataset".into()));
    }
    let bag_size = (m as f64 * config.bag_fraction).ceil() as usize;
    let mut bag_rng = stream.named("bag").rng();
    let bag = sample_with_replacement(&mut bag_rng, m, bag_size.max(1));
    let mut grower = Grower {
        ds,
        label,
        minority: ds.minority[label],
        k: config.attrs_per_node(ds.num_attributes()),
        depth_cap: config.max_depth,
        rng: stream.named("grow").rng(),
    };
    let root = grower.grow(&bag, 0);
    Ok(DecisionTree {
        root,
        label,
        depth_cap: config.max_depth,
        bag,
    })
}

/// Fit `config.tree_count` trees. Each tree's stream is derived from
/// (seed, label, depth cap, tree ordinal), so the forest is reproducible
/// regardless of execution order.
pub fn train_forest(
    ds: &MultiLabelDataset,
    label: usize,
    config: &ForestConfig,
) -> Result<Vec<DecisionTree>> {
    let base = Stream::new(config.seed)
        .named("forest")
        .child(label as u64)
        .child(config.max_depth as u64);
    let trees = crate::exec::map_range(config.tree_count, |k| {
        train_tree(ds, label, config, base.child(k as u64))
    });
    trees.into_iter().collect()
}

impl DecisionTree {
    /// Route an instance to its leaf.
    pub fn route(&self, ds: &MultiLabelDataset, row: usize) -> &TreeNode {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { .. } => return node,
                TreeNode::Split {
                    attr,
                    test,
                    left,
                    right,
                } => {
                    node = if goes_left(ds, row, *attr, *test) {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn max_path_len(&self) -> usize {
        fn depth(node: &TreeNode) -> usize {
            match node {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + depth(left).max(depth(right)),
            }
        }
        depth(&self.root)
    }

    /// Indented text dump for debugging; not a stability surface.
    pub fn dump(&self, ds: &MultiLabelDataset) -> String {
        fn rec(node: &TreeNode, ds: &MultiLabelDataset, indent: usize, out: &mut String) {
            let pad = "  ".repeat(indent);
            match node {
                TreeNode::Leaf { class, support } => {
                    out.push_str(&format!("{pad}-> {class} {support:?}\n"));
                }
                TreeNode::Split {
                    attr, test, left, right,
                } => {
                    let name = &ds.attributes[*attr].name;
                    let desc = match (test, &ds.attributes[*attr].kind) {
                        (SplitTest::NominalEq(v), AttributeKind::Nominal(vals)) => {
                            format!("{name} = {}", vals[*v as usize])
                        }
                        (SplitTest::NumericLt(t), _) => format!("{name} < {t}"),
                        (SplitTest::NominalEq(v), _) => format!("{name} = #{v}"),
                    };
                    out.push_str(&format!("{pad}{desc}\n"));
                    rec(left, ds, indent + 1, out);
                    out.push_str(&format!("{pad}!({desc})\n"));
                    rec(right, ds, indent + 1, out);
                }
            }
        }
        let mut out = String::new();
        rec(&self.root, ds, 0, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{AttributeSpec, Instance, LabelMatrix};

    fn numeric_dataset(xs: &[f64], ys: &[u8]) -> MultiLabelDataset {
        MultiLabelDataset::new(
            "t".into(),
            vec![AttributeSpec::numeric("x")],
            xs.iter()
                .map(|&x| Instance {
                    values: vec![Value::Numeric(x)],
                })
                .collect(),
            LabelMatrix::from_rows(&ys.iter().map(|&y| vec![y]).collect::<Vec<_>>()),
            vec!["l".into()],
        )
        .unwrap()
    }

    #[test]
    fn pure_bag_yields_single_leaf() {
        let ds = numeric_dataset(&[1.0, 2.0, 3.0], &[1, 1, 1]);
        let tree = train_tree(&ds, 0, &ForestConfig::default(), Stream::new(5)).unwrap();
        assert!(matches!(tree.root, TreeNode::Leaf { class: 1, .. }));
    }

    #[test]
    fn depth_cap_one_gives_a_stump() {
        let ds = numeric_dataset(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], &[0, 0, 0, 1, 1, 1]);
        let config = ForestConfig {
            max_depth: 1,
            ..ForestConfig::default()
        };
        for seed in 0..10 {
            let tree = train_tree(&ds, 0, &config, Stream::new(seed)).unwrap();
            assert!(tree.max_path_len() <= 1);
        }
    }

    #[test]
    fn fixed_seed_reproduces_the_tree() {
        let ds = numeric_dataset(&[5.0, 2.0, 9.0, 4.0, 7.0, 1.0], &[0, 1, 0, 1, 0, 1]);
        let a = train_tree(&ds, 0, &ForestConfig::default(), Stream::new(77)).unwrap();
        let b = train_tree(&ds, 0, &ForestConfig::default(), Stream::new(77)).unwrap();
        assert_eq!(a.root, b.root);
        assert_eq!(a.bag, b.bag);
    }

    #[test]
    fn forest_has_requested_tree_count_and_is_deterministic() {
        let ds = numeric_dataset(&[5.0, 2.0, 9.0, 4.0, 7.0, 1.0], &[0, 1, 0, 1, 0, 1]);
        let config = ForestConfig {
            seed: 3,
            ..ForestConfig::default()
        };
        let f1 = train_forest(&ds, 0, &config).unwrap();
        let f2 = train_forest(&ds, 0, &config).unwrap();
        assert_eq!(f1.len(), 10);
        for (a, b) in f1.iter().zip(&f2) {
            assert_eq!(a.root, b.root);
        }
    }

    #[test]
    fn single_unrestricted_tree() {
        let ds = numeric_dataset(&[1.0, 2.0, 3.0, 4.0], &[0, 0, 1, 1]);
        let config = ForestConfig {
            tree_count: 1,
            max_depth: 0,
            seed: 1,
            ..ForestConfig::default()
        };
        let forest = train_forest(&ds, 0, &config).unwrap();
        assert_eq!(forest.len(), 1);
    }

    #[test]
    fn bag_size_is_ceil_of_fraction() {
        let ds = numeric_dataset(&[1.0, 2.0, 3.0, 4.0, 5.0], &[0, 1, 0, 1, 0]);
        let config = ForestConfig {
            bag_fraction: 0.5,
            ..ForestConfig::default()
        };
        let tree = train_tree(&ds, 0, &config, Stream::new(2)).unwrap();
        assert_eq!(tree.bag.len(), 3); // ceil(5 * 0.5)
    }

    #[test]
    fn splits_strictly_reduce_impurity_on_the_bag() {
        // Re-walk each tree with its recorded bag and check every internal
        // node has positive information gain.
        fn check(node: &TreeNode, ds: &MultiLabelDataset, label: usize, rows: &[usize]) {
            if let TreeNode::Split {
                attr, test, left, right,
            } = node
            {
                let (l, r): (Vec<usize>, Vec<usize>) =
                    rows.iter().partition(|&&row| goes_left(ds, row, *attr, *test));
                let count = |rs: &[usize]| {
                    let c1 = rs.iter().filter(|&&row| ds.labels.get(row, label) == 1).count();
                    (rs.len() - c1, c1)
                };
                let gain = info_gain(count(rows), count(&l), count(&r));
                assert!(gain > 0.0, "non-positive gain {gain}");
                check(left, ds, label, &l);
                check(right, ds, label, &r);
            }
        }
        let xs: Vec<f64> = (0..40).map(|i| (i * 37 % 23) as f64).collect();
        let ys: Vec<u8> = (0..40).map(|i| ((i * 13 % 7) > 3) as u8).collect();
        let ds = numeric_dataset(&xs, &ys);
        for seed in 0..5 {
            let tree = train_tree(&ds, 0, &ForestConfig::default(), Stream::new(seed)).unwrap();
            check(&tree.root, &ds, 0, &tree.bag.clone());
        }
    }

    #[test]
    fn attr_sample_default_formula() {
        let config = ForestConfig::default();
        assert_eq!(config.attrs_per_node(1), 1);
        assert_eq!(config.attrs_per_node(2), 1);
        assert_eq!(config.attrs_per_node(3), 2); // floor(log2(2)) + 1
        assert_eq!(config.attrs_per_node(9), 4); // floor(log2(8)) + 1
        assert_eq!(config.attrs_per_node(129), 8);
    }
}
