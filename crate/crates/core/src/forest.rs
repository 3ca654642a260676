//! Binary random forest with weighted Gini splits.
//!
//! Each tree grows on a bootstrap resample drawn from its own ChaCha stream
//! (`seed`, stream = tree index), so trees are independent of scheduling and
//! training is bit-reproducible. Class weighting enters as per-sample weights
//! in both the impurity and the leaf tallies.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Mode;
use crate::error::{Error, Result};
use crate::features::Layout;
use crate::par::Execution;

pub const MODEL_VERSION: u32 = 1;

/// Number of features examined per split.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    /// ⌈√d⌉
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, d: usize) -> usize {
        let m = match self {
            MaxFeatures::Sqrt => (d as f64).sqrt().ceil() as usize,
            MaxFeatures::All => d,
            MaxFeatures::Count(m) => m,
        };
        m.clamp(1, d.max(1))
    }
}

/// Which class receives `class_weight_ratio`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightedClass {
    /// The less frequent class of the training labels (positive on a tie).
    Minority,
    Positive,
    Negative,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_features: MaxFeatures,
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
    pub class_weight_ratio: f64,
    pub weighted_class: WeightedClass,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 150,
            max_features: MaxFeatures::Sqrt,
            min_leaf: 1,
            max_depth: None,
            class_weight_ratio: 1.0,
            weighted_class: WeightedClass::Minority,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestConfig {
    /// Defaults for a mode: role classifiers weight the minority class 20×.
    pub fn for_mode(mode: Mode) -> Self {
        ForestConfig {
            class_weight_ratio: match mode {
                Mode::Interaction => 1.0,
                Mode::Role => 20.0,
            },
            ..ForestConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::invalid("n_trees must be at least 1"));
        }
        if !self.class_weight_ratio.is_finite() || self.class_weight_ratio < 1.0 {
            return Err(Error::invalid(format!(
                "class_weight_ratio must be a finite value >= 1, got {}",
                self.class_weight_ratio
            )));
        }
        if self.min_leaf == 0 {
            return Err(Error::invalid("min_leaf must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    /// Samples with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// Weighted class tallies of the in-bag samples reaching the leaf.
    Leaf { pos: f64, neg: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    /// Root at index 0.
    pub nodes: Vec<Node>,
    /// Weighted in-bag count; equals the sum of all leaf tallies.
    pub total_weight: f64,
}

impl Tree {
    fn leaf(&self, x: &[f64]) -> (f64, f64) {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
                Node::Leaf { pos, neg } => return (pos, neg),
            }
        }
    }

    /// Positive-class weighted fraction of the leaf reached by `x`.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let (pos, neg) = self.leaf(x);
        if pos + neg > 0.0 {
            pos / (pos + neg)
        } else {
            0.0
        }
    }

    pub fn leaf_tally_sum(&self) -> f64 {
        self.nodes
            .iter()
            .map(|n| match n {
                Node::Leaf { pos, neg } => pos + neg,
                Node::Split { .. } => 0.0,
            })
            .sum()
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
                Node::Leaf { .. } => 0,
            }
        }
        go(&self.nodes, 0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub version: u32,
    pub config: ForestConfig,
    pub layout_hash: String,
    pub n_features: usize,
    /// Set when the training labels held a single class.
    pub degenerate: Option<bool>,
    pub trees: Vec<Tree>,
}

/// Row-major samples with binary labels.
#[derive(Clone, Copy, Debug)]
pub struct TrainingData<'a> {
    pub rows: &'a [Vec<f64>],
    pub labels: &'a [bool],
}

impl Forest {
    pub fn train(data: TrainingData<'_>, layout_hash: &str, config: &ForestConfig, exec: Execution) -> Result<Forest> {
        config.validate()?;
        let TrainingData { rows, labels } = data;
        if rows.len() != labels.len() {
            return Err(Error::invalid(format!(
                "{} samples but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        if rows.is_empty() {
            return Err(Error::invalid("cannot train a forest on zero samples"));
        }
        let d = rows[0].len();
        if let Some(i) = rows.iter().position(|r| r.len() != d) {
            return Err(Error::invalid(format!(
                "sample {i} has {} features, expected {d}",
                rows[i].len()
            )));
        }
        if let Some(i) = rows.iter().position(|r| r.iter().any(|v| !v.is_finite())) {
            return Err(Error::invalid(format!("sample {i} has a non-finite feature")));
        }

        let n_pos = labels.iter().filter(|&&l| l).count();
        let n_neg = labels.len() - n_pos;
        let degenerate = if n_pos == 0 || n_neg == 0 {
            let class = n_pos > 0;
            log::warn!(
                "training labels hold a single class ({}); forest predicts it with certainty",
                if class { "positive" } else { "negative" }
            );
            Some(class)
        } else {
            None
        };

        let weighted_positive = match config.weighted_class {
            WeightedClass::Positive => true,
            WeightedClass::Negative => false,
            WeightedClass::Minority => n_pos <= n_neg,
        };
        let class_weight = |label: bool| {
            if label == weighted_positive {
                config.class_weight_ratio
            } else {
                1.0
            }
        };

        let trees = match degenerate {
            Some(class) => {
                let w: f64 = labels.iter().map(|&l| class_weight(l)).sum();
                let (pos, neg) = if class { (w, 0.0) } else { (0.0, w) };
                vec![Tree {
                    nodes: vec![Node::Leaf { pos, neg }],
                    total_weight: w,
                }]
            }
            None => {
                let cols = Columns::new(rows, d);
                let weights: Vec<f64> = labels.iter().map(|&l| class_weight(l)).collect();
                let grower = Grower {
                    cols: &cols,
                    labels,
                    class_weights: &weights,
                    max_features: config.max_features.resolve(d),
                    min_leaf: config.min_leaf,
                    max_depth: config.max_depth.unwrap_or(usize::MAX),
                };
                exec.map_range(0..config.n_trees, |t| {
                    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                    rng.set_stream(t as u64);
                    grower.grow(&mut rng, config.bootstrap)
                })
            }
        };

        Ok(Forest {
            version: MODEL_VERSION,
            config: config.clone(),
            layout_hash: layout_hash.to_string(),
            n_features: d,
            degenerate,
            trees,
        })
    }

    /// Trains on samples ordered by `keys`, so the result does not depend on
    /// the order in which samples are supplied.
    pub fn train_keyed<K: Ord>(
        keys: &[K],
        data: TrainingData<'_>,
        layout_hash: &str,
        config: &ForestConfig,
        exec: Execution,
    ) -> Result<Forest> {
        if keys.len() != data.rows.len() {
            return Err(Error::invalid("one key per sample required"));
        }
        let mut order: Vec<usize> = (0..keys.len()).collect();
        order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
        let rows: Vec<Vec<f64>> = order.iter().map(|&i| data.rows[i].clone()).collect();
        let labels: Vec<bool> = order.iter().map(|&i| data.labels[i]).collect();
        Forest::train(
            TrainingData {
                rows: &rows,
                labels: &labels,
            },
            layout_hash,
            config,
            exec,
        )
    }

    pub fn check_layout(&self, layout: &Layout) -> Result<()> {
        let found = layout.hash();
        if found != self.layout_hash || layout.len() != self.n_features {
            return Err(Error::LayoutMismatch {
                expected: self.layout_hash.clone(),
                found,
            });
        }
        Ok(())
    }

    /// Mean positive-class fraction over trees. The row must follow the
    /// training layout; see [`Forest::check_layout`].
    pub fn predict_row(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features {
            return Err(Error::invalid(format!(
                "vector has {} features, model expects {}",
                x.len(),
                self.n_features
            )));
        }
        if let Some(class) = self.degenerate {
            return Ok(if class { 1.0 } else { 0.0 });
        }
        let sum: f64 = self.trees.iter().map(|t| t.predict(x)).sum();
        Ok((sum / self.trees.len() as f64).clamp(0.0, 1.0))
    }

    pub fn predict_proba(&self, layout: &Layout, x: &[f64]) -> Result<f64> {
        self.check_layout(layout)?;
        self.predict_row(x)
    }

    pub fn predict_batch(&self, layout: &Layout, rows: &[Vec<f64>], exec: Execution) -> Result<Vec<f64>> {
        self.check_layout(layout)?;
        exec.map(rows, |r| self.predict_row(r)).into_iter().collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("forest serializes")
    }

    pub fn from_json(text: &str, location: &str) -> Result<Forest> {
        let f: Forest = serde_json::from_str(text).map_err(|e| Error::parse(location, e.to_string()))?;
        if f.version != MODEL_VERSION {
            return Err(Error::parse(
                location,
                format!(
                    "model version {} is not supported (expected {MODEL_VERSION})",
                    f.version
                ),
            ));
        }
        f.check_structure().map_err(|m| Error::parse(location, m))?;
        Ok(f)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Forest> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Forest::from_json(&text, &path.display().to_string())
    }

    fn check_structure(&self) -> std::result::Result<(), String> {
        if self.trees.is_empty() {
            return Err("forest has no trees".into());
        }
        for (t, tree) in self.trees.iter().enumerate() {
            let n = tree.nodes.len();
            if n == 0 {
                return Err(format!("tree {t} is empty"));
            }
            for node in &tree.nodes {
                if let Node::Split {
                    feature, left, right, ..
                } = *node
                {
                    if feature >= self.n_features || left >= n || right >= n {
                        return Err(format!("tree {t} has an out-of-range node"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Column-major copy of the training matrix.
struct Columns {
    n: usize,
    data: Vec<f64>,
}

impl Columns {
    fn new(rows: &[Vec<f64>], d: usize) -> Self {
        let n = rows.len();
        let mut data = vec![0.0; n * d];
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                data[j * n + i] = v;
            }
        }
        Columns { n, data }
    }

    fn get(&self, feature: usize, sample: usize) -> f64 {
        self.data[feature * self.n + sample]
    }

    fn d(&self) -> usize {
        self.data.len().checked_div(self.n).unwrap_or(0)
    }
}

struct Grower<'a> {
    cols: &'a Columns,
    labels: &'a [bool],
    class_weights: &'a [f64],
    max_features: usize,
    min_leaf: usize,
    max_depth: usize,
}

#[derive(Clone, Copy)]
struct Split {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl Split {
    fn better_than(&self, other: &Option<Split>) -> bool {
        match other {
            None => true,
            Some(o) => {
                self.gain > o.gain
                    || (self.gain == o.gain
                        && (self.feature, self.threshold).partial_cmp(&(o.feature, o.threshold))
                            == Some(std::cmp::Ordering::Less))
            }
        }
    }
}

fn gini(pos: f64, neg: f64) -> f64 {
    let w = pos + neg;
    if w <= 0.0 {
        return 0.0;
    }
    let p = pos / w;
    2.0 * p * (1.0 - p)
}

impl Grower<'_> {
    fn grow(&self, rng: &mut ChaCha8Rng, bootstrap: bool) -> Tree {
        let n = self.cols.n;
        let mut multiplicity = vec![0u32; n];
        if bootstrap {
            for _ in 0..n {
                multiplicity[rng.random_range(0..n)] += 1;
            }
        } else {
            multiplicity.iter_mut().for_each(|m| *m = 1);
        }
        let weights: Vec<f64> = (0..n).map(|i| multiplicity[i] as f64 * self.class_weights[i]).collect();
        let mut idx: Vec<usize> = (0..n).filter(|&i| multiplicity[i] > 0).collect();
        let total_weight = idx.iter().map(|&i| weights[i]).sum();

        let mut nodes = Vec::new();
        let mut features: Vec<usize> = (0..self.cols.d()).collect();
        let mut scratch = Vec::with_capacity(idx.len());
        self.build(&mut idx, &weights, 0, rng, &mut features, &mut scratch, &mut nodes);
        Tree { nodes, total_weight }
    }

    fn tally(&self, idx: &[usize], weights: &[f64]) -> (f64, f64) {
        let mut pos = 0.0;
        let mut neg = 0.0;
        for &i in idx {
            if self.labels[i] {
                pos += weights[i];
            } else {
                neg += weights[i];
            }
        }
        (pos, neg)
    }

    #[allow(clippy::too_many_arguments)]
    fn build(
        &self,
        idx: &mut [usize],
        weights: &[f64],
        depth: usize,
        rng: &mut ChaCha8Rng,
        features: &mut [usize],
        scratch: &mut Vec<(f64, f64, bool)>,
        nodes: &mut Vec<Node>,
    ) -> usize {
        let id = nodes.len();
        let (pos, neg) = self.tally(idx, weights);
        nodes.push(Node::Leaf { pos, neg });
        if pos == 0.0 || neg == 0.0 || depth >= self.max_depth || idx.len() < 2 * self.min_leaf {
            return id;
        }
        let Some(split) = self.best_split(idx, weights, pos, neg, rng, features, scratch) else {
            return id;
        };

        // Partition in place: left block first, order within blocks kept.
        let mut left: Vec<usize> = Vec::with_capacity(idx.len());
        let mut right: Vec<usize> = Vec::with_capacity(idx.len());
        for &i in idx.iter() {
            if self.cols.get(split.feature, i) <= split.threshold {
                left.push(i);
            } else {
                right.push(i);
            }
        }
        let nl = left.len();
        idx[..nl].copy_from_slice(&left);
        idx[nl..].copy_from_slice(&right);
        let (li, ri) = idx.split_at_mut(nl);
        let l = self.build(li, weights, depth + 1, rng, features, scratch, nodes);
        let r = self.build(ri, weights, depth + 1, rng, features, scratch, nodes);
        nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: l,
            right: r,
        };
        id
    }

    /// Examines features in a random order until `max_features` non-constant
    /// ones have been scored; continues past that only while no valid split
    /// exists.
    #[allow(clippy::too_many_arguments)]
    fn best_split(
        &self,
        idx: &[usize],
        weights: &[f64],
        pos: f64,
        neg: f64,
        rng: &mut ChaCha8Rng,
        features: &mut [usize],
        scratch: &mut Vec<(f64, f64, bool)>,
    ) -> Option<Split> {
        let d = features.len();
        let total = pos + neg;
        let parent = gini(pos, neg);
        let mut best: Option<Split> = None;
        let mut scored = 0;
        for k in 0..d {
            if scored >= self.max_features && best.is_some() {
                break;
            }
            let j = rng.random_range(k..d);
            features.swap(k, j);
            let f = features[k];

            scratch.clear();
            scratch.extend(idx.iter().map(|&i| (self.cols.get(f, i), weights[i], self.labels[i])));
            scratch.sort_by(|a, b| a.0.total_cmp(&b.0));
            if scratch[0].0 == scratch[scratch.len() - 1].0 {
                continue;
            }
            scored += 1;

            let (mut lp, mut ln) = (0.0, 0.0);
            let m = scratch.len();
            for s in 0..m - 1 {
                let (v, w, y) = scratch[s];
                if y {
                    lp += w;
                } else {
                    ln += w;
                }
                let next = scratch[s + 1].0;
                if v == next {
                    continue;
                }
                let nl = s + 1;
                if nl < self.min_leaf || m - nl < self.min_leaf {
                    continue;
                }
                let (rp, rn) = (pos - lp, neg - ln);
                let wl = lp + ln;
                let wr = rp + rn;
                let gain = parent - (wl / total) * gini(lp, ln) - (wr / total) * gini(rp, rn);
                let mut threshold = v + (next - v) / 2.0;
                if threshold >= next {
                    threshold = v;
                }
                let cand = Split {
                    feature: f,
                    threshold,
                    gain,
                };
                if cand.better_than(&best) {
                    best = Some(cand);
                }
            }
        }
        best
    }
}
