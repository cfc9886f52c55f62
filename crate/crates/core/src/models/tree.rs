//! Binary decision trees grown best-first on pre-binned features.
//!
//! Each feature is binned once into its sorted unique values, so split
//! search at a node is a histogram pass over the node's rows. Candidate
//! thresholds are midpoints between consecutive values present in the node;
//! a row goes left when `x < threshold`. Among equally good splits the
//! lowest feature index, then the lowest threshold, wins.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// Node arena; the root is node 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn leaf(value: f64) -> Self {
        Tree {
            nodes: vec![TreeNode::Leaf { value }],
        }
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        match self.nodes[self.leaf_index(row)] {
            TreeNode::Leaf { value } => value,
            TreeNode::Split { .. } => unreachable!(),
        }
    }

    /// Arena index of the leaf that `row` falls into.
    pub fn leaf_index(&self, row: &[f64]) -> usize {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                TreeNode::Leaf { .. } => return at,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[feature] < threshold { left } else { right },
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, TreeNode::Leaf { .. })).count()
    }

    pub fn n_splits(&self) -> usize {
        self.nodes.len() - self.n_leaves()
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, at: usize) -> usize {
            match t.nodes[at] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + go(t, left).max(go(t, right)),
            }
        }
        go(self, 0)
    }

    /// The root split, if any.
    pub fn root_split(&self) -> Option<(usize, f64)> {
        match self.nodes[0] {
            TreeNode::Split { feature, threshold, .. } => Some((feature, threshold)),
            TreeNode::Leaf { .. } => None,
        }
    }
}

/// Features binned into their sorted unique values.
#[derive(Debug, Clone)]
pub(crate) struct BinnedFeatures {
    /// bins[f][row] indexes values[f].
    bins: Vec<Vec<u32>>,
    values: Vec<Vec<f64>>,
}

impl BinnedFeatures {
    pub fn new(data: &Dataset) -> Self {
        let p = data.n_features();
        let mut bins = Vec::with_capacity(p);
        let mut values = Vec::with_capacity(p);
        for t in 0..p {
            let col = data.column(t);
            let mut uniq = col.clone();
            uniq.sort_by(f64::total_cmp);
            uniq.dedup();
            let b = col
                .iter()
                .map(|x| uniq.binary_search_by(|u| u.total_cmp(x)).unwrap() as u32)
                .collect();
            bins.push(b);
            values.push(uniq);
        }
        BinnedFeatures { bins, values }
    }

    pub fn n_features(&self) -> usize {
        self.bins.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Criterion {
    /// Weighted Gini impurity on a 0/1 target; leaves hold the class-1 fraction.
    Gini,
    /// Squared error on a gradient target; leaves hold a Newton step S / H.
    Newton,
}

impl Criterion {
    /// Split score of a child with total weight `w` and weighted target sum
    /// `s`; a split's gain is the children's scores minus the parent's.
    fn score(self, w: f64, s: f64) -> f64 {
        match self {
            Criterion::Gini => (s * s + (w - s) * (w - s)) / w,
            Criterion::Newton => s * s / w,
        }
    }

    fn leaf_value(self, st: &Stats) -> f64 {
        match self {
            Criterion::Gini => st.s / st.w,
            Criterion::Newton => {
                if st.h > 1e-300 {
                    st.s / st.h
                } else {
                    0.0
                }
            }
        }
    }

    fn is_pure(self, st: &Stats) -> bool {
        match self {
            Criterion::Gini => st.s == 0.0 || st.s == st.w,
            Criterion::Newton => false,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Stats {
    w: f64,
    s: f64,
    h: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct GrowParams {
    /// Minimum total weight in each child.
    pub min_leaf: f64,
    /// Maximum number of leaves; `usize::MAX` grows until purity.
    pub max_leaves: usize,
    /// Features drawn per split; `None` uses all.
    pub mtry: Option<usize>,
}

/// Per-row training inputs: weight, target, and (for Newton) curvature.
pub(crate) struct Targets<'a> {
    pub weight: &'a [f64],
    pub target: &'a [f64],
    pub hessian: Option<&'a [f64]>,
}

#[derive(Debug, Clone, Copy)]
struct SplitChoice {
    gain: f64,
    feature: usize,
    bin: u32,
    threshold: f64,
}

struct Pending {
    gain: f64,
    node: usize,
    start: usize,
    end: usize,
    split: SplitChoice,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Pending {}
impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Pending {
    // Largest gain first; earlier nodes first on ties.
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain
            .total_cmp(&other.gain)
            .then_with(|| other.node.cmp(&self.node))
    }
}

struct Scratch {
    w: Vec<Vec<f64>>,
    s: Vec<Vec<f64>>,
    touched: Vec<u32>,
}

pub(crate) struct TreeGrower<'a> {
    binned: &'a BinnedFeatures,
    targets: Targets<'a>,
    criterion: Criterion,
    params: GrowParams,
    scratch: Scratch,
}

impl<'a> TreeGrower<'a> {
    pub fn new(binned: &'a BinnedFeatures, targets: Targets<'a>, criterion: Criterion, params: GrowParams) -> Self {
        let scratch = Scratch {
            w: binned.values.iter().map(|v| vec![0.0; v.len()]).collect(),
            s: binned.values.iter().map(|v| vec![0.0; v.len()]).collect(),
            touched: Vec::new(),
        };
        TreeGrower {
            binned,
            targets,
            criterion,
            params,
            scratch,
        }
    }

    fn stats(&self, rows: &[usize]) -> Stats {
        let mut st = Stats::default();
        for &i in rows {
            let w = self.targets.weight[i];
            st.w += w;
            st.s += w * self.targets.target[i];
            if let Some(h) = self.targets.hessian {
                st.h += w * h[i];
            }
        }
        st
    }

    fn best_split(&mut self, rows: &[usize], parent: &Stats, rng: Option<&mut Rng>) -> Option<SplitChoice> {
        if self.criterion.is_pure(parent) || parent.w < 2.0 * self.params.min_leaf {
            return None;
        }
        let p = self.binned.n_features();
        let features: Vec<usize> = match (self.params.mtry, rng) {
            (Some(m), Some(rng)) if m < p => {
                let mut f = index::sample(rng, p, m).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..p).collect(),
        };
        let parent_score = self.criterion.score(parent.w, parent.s);
        let min_gain = 1e-12 * parent.w.max(1.0);
        let mut best: Option<SplitChoice> = None;
        for f in features {
            let bins = &self.binned.bins[f];
            let (hw, hs) = (&mut self.scratch.w[f], &mut self.scratch.s[f]);
            let touched = &mut self.scratch.touched;
            touched.clear();
            for &i in rows {
                let b = bins[i] as usize;
                let w = self.targets.weight[i];
                if hw[b] == 0.0 {
                    touched.push(b as u32);
                }
                hw[b] += w;
                hs[b] += w * self.targets.target[i];
            }
            if touched.len() > 1 {
                touched.sort_unstable();
                let (mut wl, mut sl) = (0.0, 0.0);
                for k in 0..touched.len() - 1 {
                    let b = touched[k] as usize;
                    wl += hw[b];
                    sl += hs[b];
                    let wr = parent.w - wl;
                    if wl < self.params.min_leaf {
                        continue;
                    }
                    if wr < self.params.min_leaf {
                        break;
                    }
                    let sr = parent.s - sl;
                    let gain = self.criterion.score(wl, sl) + self.criterion.score(wr, sr) - parent_score;
                    if gain > min_gain && best.is_none_or(|bst| gain > bst.gain) {
                        let vals = &self.binned.values[f];
                        let (lo, hi) = (vals[b], vals[touched[k + 1] as usize]);
                        let mut threshold = 0.5 * (lo + hi);
                        if threshold <= lo {
                            threshold = hi;
                        }
                        best = Some(SplitChoice {
                            gain,
                            feature: f,
                            bin: b as u32,
                            threshold,
                        });
                    }
                }
            }
            for &b in touched.iter() {
                hw[b as usize] = 0.0;
                hs[b as usize] = 0.0;
            }
        }
        best
    }

    /// Grow a tree on the rows with positive weight.
    pub fn grow(mut self, mut rng: Option<&mut Rng>) -> Tree {
        let mut rows: Vec<usize> = (0..self.targets.weight.len())
            .filter(|&i| self.targets.weight[i] > 0.0)
            .collect();
        if rows.is_empty() {
            return Tree::leaf(0.0);
        }
        let root_stats = self.stats(&rows);
        let mut nodes = vec![TreeNode::Leaf {
            value: self.criterion.leaf_value(&root_stats),
        }];
        let mut heap = BinaryHeap::new();
        let n = rows.len();
        if let Some(split) = self.best_split(&rows, &root_stats, rng.as_deref_mut()) {
            heap.push(Pending {
                gain: split.gain,
                node: 0,
                start: 0,
                end: n,
                split,
            });
        }
        let mut leaves = 1;
        let mut buf = Vec::with_capacity(n);
        while leaves < self.params.max_leaves {
            let Some(pending) = heap.pop() else { break };
            let SplitChoice { feature, bin, threshold, .. } = pending.split;
            let slice = &mut rows[pending.start..pending.end];
            let bins = &self.binned.bins[feature];
            buf.clear();
            buf.extend(slice.iter().copied().filter(|&i| bins[i] <= bin));
            let n_left = buf.len();
            buf.extend(slice.iter().copied().filter(|&i| bins[i] > bin));
            slice.copy_from_slice(&buf);

            let (l, r) = (nodes.len(), nodes.len() + 1);
            nodes[pending.node] = TreeNode::Split {
                feature,
                threshold,
                left: l,
                right: r,
            };
            leaves += 1;
            let mid = pending.start + n_left;
            for (child, start, end) in [(l, pending.start, mid), (r, mid, pending.end)] {
                let st = self.stats(&rows[start..end]);
                nodes.push(TreeNode::Leaf {
                    value: self.criterion.leaf_value(&st),
                });
                if let Some(split) = self.best_split(&rows[start..end], &st, rng.as_deref_mut()) {
                    heap.push(Pending {
                        gain: split.gain,
                        node: child,
                        start,
                        end,
                        split,
                    });
                }
            }
        }
        Tree { nodes }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::FeatureSpec;

    fn data(rows: Vec<Vec<f64>>, y: Vec<u8>) -> Dataset {
        let p = rows[0].len();
        let specs = (0..p).map(|t| FeatureSpec::continuous(&format!("x{t}"), "")).collect();
        Dataset::new(specs, rows, y, vec![]).unwrap()
    }

    fn gini_tree(d: &Dataset, min_leaf: f64, max_leaves: usize) -> Tree {
        let binned = BinnedFeatures::new(d);
        let w = vec![1.0; d.n_rows()];
        let y: Vec<f64> = d.response().iter().map(|&v| v as f64).collect();
        TreeGrower::new(
            &binned,
            Targets {
                weight: &w,
                target: &y,
                hessian: None,
            },
            Criterion::Gini,
            GrowParams {
                min_leaf,
                max_leaves,
                mtry: None,
            },
        )
        .grow(None)
    }

    #[test]
    fn separable_gives_two_pure_leaves() {
        let d = data(vec![vec![1.0], vec![2.0], vec![3.0], vec![10.0], vec![11.0]], vec![0, 0, 0, 1, 1]);
        let t = gini_tree(&d, 1.0, usize::MAX);
        assert_eq!(t.n_leaves(), 2);
        assert_eq!(t.root_split(), Some((0, 6.5)));
        assert_eq!(t.predict(&[0.0]), 0.0);
        assert_eq!(t.predict(&[20.0]), 1.0);
    }

    #[test]
    fn max_leaves_and_min_leaf_respected() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64, (i * 7 % 11) as f64]).collect();
        let y: Vec<u8> = (0..40).map(|i| ((i * 13 % 5) < 2) as u8).collect();
        let d = data(rows, y);
        let t = gini_tree(&d, 3.0, 5);
        assert!(t.n_leaves() <= 5);
        let t = gini_tree(&d, 25.0, usize::MAX);
        assert_eq!(t.n_leaves(), 1);
    }

    #[test]
    fn threshold_sits_between_node_values() {
        let d = data(vec![vec![1.0], vec![1.0], vec![4.0], vec![4.0]], vec![0, 0, 1, 1]);
        let t = gini_tree(&d, 1.0, usize::MAX);
        assert_eq!(t.root_split(), Some((0, 2.5)));
        // A point at the threshold goes right.
        assert_eq!(t.predict(&[2.5]), 1.0);
    }
}
