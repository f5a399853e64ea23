//! CART decision trees grown on (possibly repeated) row indices.

use serde::{Deserialize, Serialize};

use crate::rng::Stream;
use crate::scalar::Scalar;

/// Targets a tree is grown against.
pub(crate) enum TreeTargets<'a, F> {
    /// Gini impurity on 0-based class labels.
    Classes { labels: &'a [usize], n_classes: usize },
    /// Variance reduction on real targets.
    Values(&'a [F]),
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TreeParams {
    /// `None` grows until leaves are pure or hold a single sample.
    pub max_depth: Option<usize>,
    /// Number of non-constant candidate features examined per split.
    pub max_features: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", bound = "F: Scalar")]
pub(crate) enum Node<F> {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: F,
        left: u32,
        right: u32,
    },
    /// Class-frequency vector, or a single mean for regression.
    Leaf { value: Vec<F> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub(crate) struct Tree<F> {
    pub nodes: Vec<Node<F>>,
}

struct Candidate<F> {
    score: F,
    feature: usize,
    threshold: F,
}

impl<F: Scalar> Tree<F> {
    pub fn leaf_value(&self, x: &[F]) -> &[F] {
        let mut idx = 0usize;
        loop {
            match &self.nodes[idx] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if x[*feature] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk<F>(nodes: &[Node<F>], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => {
                    1 + walk(nodes, *left as usize).max(walk(nodes, *right as usize))
                }
            }
        }
        walk(&self.nodes, 0)
    }

    /// Grows a tree on `rows` (indices into the row-major `x`, repeats allowed).
    pub fn grow(
        x: &[F],
        n_features: usize,
        targets: &TreeTargets<'_, F>,
        rows: Vec<usize>,
        params: TreeParams,
        rng: &mut Stream,
    ) -> Tree<F> {
        let mut nodes = vec![Node::Leaf { value: Vec::new() }];
        // (node slot, rows, depth)
        let mut stack = vec![(0usize, rows, 0usize)];
        while let Some((slot, rows, depth)) = stack.pop() {
            let leaf = leaf_value(targets, &rows);
            let can_split = rows.len() >= 2
                && params.max_depth.map_or(true, |m| depth < m)
                && !is_pure(targets, &rows);
            let best = if can_split {
                best_split(x, n_features, targets, &rows, params.max_features, rng)
            } else {
                None
            };
            match best {
                None => nodes[slot] = Node::Leaf { value: leaf },
                Some(c) => {
                    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
                        .iter()
                        .partition(|&&r| x[r * n_features + c.feature] <= c.threshold);
                    let left = nodes.len();
                    nodes.push(Node::Leaf { value: Vec::new() });
                    nodes.push(Node::Leaf { value: Vec::new() });
                    nodes[slot] = Node::Split {
                        feature: c.feature,
                        threshold: c.threshold,
                        left: left as u32,
                        right: (left + 1) as u32,
                    };
                    stack.push((left + 1, right_rows, depth + 1));
                    stack.push((left, left_rows, depth + 1));
                }
            }
        }
        Tree { nodes }
    }
}

fn leaf_value<F: Scalar>(targets: &TreeTargets<'_, F>, rows: &[usize]) -> Vec<F> {
    let n = F::from_usize(rows.len().max(1)).unwrap();
    match targets {
        TreeTargets::Classes { labels, n_classes } => {
            let mut counts = vec![0usize; *n_classes];
            for &r in rows {
                counts[labels[r]] += 1;
            }
            counts
                .into_iter()
                .map(|c| F::from_usize(c).unwrap() / n)
                .collect()
        }
        TreeTargets::Values(y) => vec![rows.iter().map(|&r| y[r]).sum::<F>() / n],
    }
}

fn is_pure<F: Scalar>(targets: &TreeTargets<'_, F>, rows: &[usize]) -> bool {
    match targets {
        TreeTargets::Classes { labels, .. } => rows.iter().all(|&r| labels[r] == labels[rows[0]]),
        TreeTargets::Values(y) => rows.iter().all(|&r| y[r] == y[rows[0]]),
    }
}

/// Best split over up to `max_features` non-constant features, visited in random order.
///
/// Ties are resolved towards the lowest feature index, then the lowest threshold.
fn best_split<F: Scalar>(
    x: &[F],
    d: usize,
    targets: &TreeTargets<'_, F>,
    rows: &[usize],
    max_features: usize,
    rng: &mut Stream,
) -> Option<Candidate<F>> {
    let order = rng.permutation(d);
    let mut best: Option<Candidate<F>> = None;
    let mut visited = 0usize;
    let mut sorted: Vec<(F, usize)> = Vec::with_capacity(rows.len());
    for feature in order {
        if visited >= max_features {
            break;
        }
        sorted.clear();
        sorted.extend(rows.iter().map(|&r| (x[r * d + feature], r)));
        sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite features"));
        if sorted[0].0 == sorted[sorted.len() - 1].0 {
            continue;
        }
        visited += 1;
        if let Some(c) = scan_feature(targets, &sorted, feature) {
            let better = match &best {
                None => true,
                Some(b) => {
                    c.score > b.score
                        || (c.score == b.score
                            && (c.feature, c.threshold.as_f64()) < (b.feature, b.threshold.as_f64()))
                }
            };
            if better {
                best = Some(c);
            }
        }
    }
    best
}

/// Scans thresholds between consecutive distinct values of one feature.
///
/// The score is the quantity whose maximization minimizes the weighted child
/// impurity: `sum_c nL_c^2 / nL + sum_c nR_c^2 / nR` for Gini, and
/// `SL^2 / nL + SR^2 / nR` for squared error.
fn scan_feature<F: Scalar>(
    targets: &TreeTargets<'_, F>,
    sorted: &[(F, usize)],
    feature: usize,
) -> Option<Candidate<F>> {
    let n = sorted.len();
    let mut best: Option<Candidate<F>> = None;
    let mut consider = |score: F, i: usize| {
        let (lo, hi) = (sorted[i].0, sorted[i + 1].0);
        let mut threshold = lo + (hi - lo) / F::lit(2.0);
        if threshold >= hi {
            threshold = lo;
        }
        if best.as_ref().map_or(true, |b| score > b.score) {
            best = Some(Candidate {
                score,
                feature,
                threshold,
            });
        }
    };
    match targets {
        TreeTargets::Classes { labels, n_classes } => {
            let mut right = vec![0usize; *n_classes];
            for &(_, r) in sorted {
                right[labels[r]] += 1;
            }
            let mut left = vec![0usize; *n_classes];
            // sum of squared counts, maintained incrementally
            let mut sq_left = 0usize;
            let mut sq_right: usize = right.iter().map(|&c| c * c).sum();
            for i in 0..n - 1 {
                let c = labels[sorted[i].1];
                sq_left += 2 * left[c] + 1;
                left[c] += 1;
                sq_right -= 2 * right[c] - 1;
                right[c] -= 1;
                if sorted[i].0 == sorted[i + 1].0 {
                    continue;
                }
                let nl = F::from_usize(i + 1).unwrap();
                let nr = F::from_usize(n - i - 1).unwrap();
                let score = F::from_usize(sq_left).unwrap() / nl + F::from_usize(sq_right).unwrap() / nr;
                consider(score, i);
            }
        }
        TreeTargets::Values(y) => {
            let total: F = sorted.iter().map(|&(_, r)| y[r]).sum();
            let mut sum_left = F::zero();
            for i in 0..n - 1 {
                sum_left += y[sorted[i].1];
                if sorted[i].0 == sorted[i + 1].0 {
                    continue;
                }
                let nl = F::from_usize(i + 1).unwrap();
                let nr = F::from_usize(n - i - 1).unwrap();
                let sum_right = total - sum_left;
                let score = sum_left * sum_left / nl + sum_right * sum_right / nr;
                consider(score, i);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> (Vec<f64>, Vec<usize>) {
        // two features; class is determined by feature 1 > 0.5
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..10 {
            for j in 0..10 {
                x.push(i as f64 / 10.0);
                x.push(j as f64 / 10.0);
                y.push(usize::from(j as f64 / 10.0 > 0.5));
            }
        }
        (x, y)
    }

    #[test]
    fn learns_axis_aligned_rule() {
        let (x, y) = grid();
        let targets = TreeTargets::Classes {
            labels: &y,
            n_classes: 2,
        };
        let params = TreeParams {
            max_depth: Some(3),
            max_features: 2,
        };
        let tree = Tree::grow(&x, 2, &targets, (0..100).collect(), params, &mut Stream::new(1));
        match &tree.nodes[0] {
            Node::Split {
                feature, threshold, ..
            } => {
                assert_eq!(*feature, 1);
                assert!((threshold - 0.55).abs() < 1e-12);
            }
            _ => panic!("root should split"),
        }
        assert_eq!(tree.leaf_value(&[0.0, 0.9]), &[0.0, 1.0]);
        assert_eq!(tree.depth(), 1);
    }

    #[test]
    fn respects_depth_limit() {
        let x: Vec<f64> = (0..64).map(|i| i as f64).collect();
        let y: Vec<usize> = (0..64).map(|i| i % 2).collect();
        let targets = TreeTargets::Classes {
            labels: &y,
            n_classes: 2,
        };
        let params = TreeParams {
            max_depth: Some(4),
            max_features: 1,
        };
        let tree = Tree::grow(&x, 1, &targets, (0..64).collect(), params, &mut Stream::new(2));
        assert!(tree.depth() <= 4);
    }

    #[test]
    fn regression_tree_fits_step() {
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let y: Vec<f64> = (0..20).map(|i| if i < 10 { 1.0 } else { 5.0 }).collect();
        let params = TreeParams {
            max_depth: None,
            max_features: 1,
        };
        let tree = Tree::grow(&x, 1, &TreeTargets::Values(&y), (0..20).collect(), params, &mut Stream::new(3));
        assert_eq!(tree.leaf_value(&[3.0]), &[1.0]);
        assert_eq!(tree.leaf_value(&[13.0]), &[5.0]);
        assert_eq!(tree.depth(), 1);
    }

    #[test]
    fn constant_features_give_leaf() {
        let x = vec![1.0_f64; 6];
        let y = vec![0usize, 1, 0, 1, 0, 1];
        let targets = TreeTargets::Classes {
            labels: &y,
            n_classes: 2,
        };
        let params = TreeParams {
            max_depth: Some(8),
            max_features: 1,
        };
        let tree = Tree::grow(&x, 1, &targets, (0..6).collect(), params, &mut Stream::new(4));
        assert_eq!(tree.nodes.len(), 1);
        assert_eq!(tree.leaf_value(&[1.0]), &[0.5, 0.5]);
    }
}
