use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{IplError, Result};
use crate::interpret::ImportanceReport;
use crate::polycore::MultiIndex;
use crate::solver::check_labels;

pub const DEFAULT_MIN_LEAF: usize = 5;

/// A candidate split variable: a monomial over the embedded inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolTerm {
    pub name: String,
    pub alpha: MultiIndex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Node {
    Leaf {
        label: i8,
    },
    /// Rows with `term value <= threshold` go left.
    Split {
        term: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

/// Depth-limited binary classifier; labels are `-1` (normal) and `1`
/// (abnormal). Term values are computed from raw embedded inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarningTree {
    pub root: Node,
    pub max_depth: usize,
    pub pool: Vec<PoolTerm>,
}

impl WarningTree {
    pub fn new(root: Node, max_depth: usize, pool: Vec<PoolTerm>) -> Result<Self> {
        fn check(node: &Node, pool: usize) -> Result<()> {
            match node {
                Node::Leaf { label } if *label == 1 || *label == -1 => Ok(()),
                Node::Leaf { label } => Err(IplError::InvalidParameter(format!("leaf label {label}"))),
                Node::Split {
                    term,
                    threshold,
                    left,
                    right,
                } => {
                    if *term >= pool {
                        return Err(IplError::InvalidParameter(format!("split term {term} outside pool")));
                    }
                    if !threshold.is_finite() {
                        return Err(IplError::NonFinite("split threshold"));
                    }
                    check(left, pool)?;
                    check(right, pool)
                }
            }
        }
        check(&root, pool.len())?;
        if root.depth() > max_depth {
            return Err(IplError::InvalidParameter(format!(
                "tree depth {} exceeds {max_depth}",
                root.depth()
            )));
        }
        if let Some(dim) = pool.first().map(|p| p.alpha.dim()) {
            if pool.iter().any(|p| p.alpha.dim() != dim) {
                return Err(IplError::InvalidParameter("pool terms differ in dimension".into()));
            }
        }
        Ok(Self { root, max_depth, pool })
    }

    /// Depth of the deepest leaf.
    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { label } => return f64::from(*label),
                Node::Split {
                    term,
                    threshold,
                    left,
                    right,
                } => {
                    node = if self.pool[*term].alpha.monomial(x) <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn predict_matrix(&self, inputs: &DMatrix<f64>) -> Vec<f64> {
        (0..inputs.nrows())
            .map(|i| {
                let x: Vec<f64> = inputs.row(i).iter().copied().collect();
                self.predict(&x)
            })
            .collect()
    }
}

/// The first `m` ranked terms as a split pool.
pub fn pool_from_report(report: &ImportanceReport, m: usize) -> Vec<PoolTerm> {
    report
        .top_k(m)
        .iter()
        .map(|e| PoolTerm {
            name: e.name.clone(),
            alpha: e.alpha.clone(),
        })
        .collect()
}

fn gini(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = pos as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

fn majority(pos: usize, n: usize) -> i8 {
    if 2 * pos >= n {
        1
    } else {
        -1
    }
}

/// A threshold between `lo < hi` rounded to 6 significant digits when the
/// rounded value still separates them.
fn split_point(lo: f64, hi: f64) -> f64 {
    let mut mid = lo + (hi - lo) / 2.0;
    if mid >= hi {
        mid = lo;
    }
    let rounded: f64 = format!("{mid:.5e}").parse().unwrap_or(mid);
    if lo <= rounded && rounded < hi {
        rounded
    } else {
        mid
    }
}

struct Builder<'a> {
    values: Vec<Vec<f64>>,
    labels: &'a [f64],
    min_leaf: usize,
    max_depth: usize,
}

impl Builder<'_> {
    fn grow(&self, rows: &[usize], depth: usize) -> Node {
        let n = rows.len();
        let pos = rows.iter().filter(|&&r| self.labels[r] > 0.0).count();
        let leaf = Node::Leaf {
            label: majority(pos, n),
        };
        if depth >= self.max_depth || pos == 0 || pos == n || n < 2 * self.min_leaf {
            return leaf;
        }
        let parent = gini(pos, n);
        let mut best: Option<(f64, usize, f64)> = None;
        for (f, col) in self.values.iter().enumerate() {
            let mut order = rows.to_vec();
            order.sort_by(|&a, &b| col[a].total_cmp(&col[b]).then(a.cmp(&b)));
            let mut left_pos = 0;
            for i in 0..n - 1 {
                if self.labels[order[i]] > 0.0 {
                    left_pos += 1;
                }
                let nl = i + 1;
                let nr = n - nl;
                let (lo, hi) = (col[order[i]], col[order[i + 1]]);
                if nl < self.min_leaf || nr < self.min_leaf || lo == hi {
                    continue;
                }
                let score = (nl as f64 * gini(left_pos, nl) + nr as f64 * gini(pos - left_pos, nr)) / n as f64;
                if best.is_none_or(|(b, _, _)| score < b - 1e-12) {
                    best = Some((score, f, split_point(lo, hi)));
                }
            }
        }
        match best {
            Some((score, f, threshold)) if score < parent - 1e-12 => {
                let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| self.values[f][i] <= threshold);
                Node::Split {
                    term: f,
                    threshold,
                    left: Box::new(self.grow(&l, depth + 1)),
                    right: Box::new(self.grow(&r, depth + 1)),
                }
            }
            _ => leaf,
        }
    }
}

/// Greedy Gini induction restricted to `pool`. `inputs` holds raw embedded
/// rows; `labels` are in `{-1, 1}`. Stops at `max_depth`, on pure nodes,
/// when a node cannot give both children `min_leaf` rows, or when no
/// split lowers impurity. Majority ties become `1`.
pub fn build_warning_tree(
    inputs: &DMatrix<f64>,
    labels: &[f64],
    pool: Vec<PoolTerm>,
    max_depth: usize,
    min_leaf: usize,
) -> Result<WarningTree> {
    if pool.is_empty() {
        return Err(IplError::Empty("feature pool is empty"));
    }
    if labels.is_empty() {
        return Err(IplError::Empty("no training rows"));
    }
    if inputs.nrows() != labels.len() {
        return Err(IplError::DimensionMismatch {
            expected: inputs.nrows(),
            found: labels.len(),
            context: "tree labels",
        });
    }
    if min_leaf == 0 {
        return Err(IplError::InvalidParameter("min_leaf must be positive".into()));
    }
    check_labels(labels)?;
    for p in &pool {
        if p.alpha.dim() != inputs.ncols() {
            return Err(IplError::DimensionMismatch {
                expected: inputs.ncols(),
                found: p.alpha.dim(),
                context: "pool term dimension",
            });
        }
    }
    let values: Vec<Vec<f64>> = pool
        .iter()
        .map(|p| {
            (0..inputs.nrows())
                .map(|i| {
                    let x: Vec<f64> = inputs.row(i).iter().copied().collect();
                    p.alpha.monomial(&x)
                })
                .collect()
        })
        .collect();
    let b = Builder {
        values,
        labels,
        min_leaf,
        max_depth,
    };
    let rows: Vec<usize> = (0..labels.len()).collect();
    let root = b.grow(&rows, 0);
    WarningTree::new(root, max_depth, pool)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x1_pool() -> Vec<PoolTerm> {
        vec![PoolTerm {
            name: "x1".into(),
            alpha: MultiIndex::linear(1, 0),
        }]
    }

    #[test]
    fn separable_single_feature() {
        let xs: Vec<f64> = (0..40).map(|i| i as f64 / 40.0 + 0.0125).collect();
        let ys: Vec<f64> = xs.iter().map(|x| if *x > 0.5 { 1.0 } else { -1.0 }).collect();
        let t = build_warning_tree(&DMatrix::from_column_slice(40, 1, &xs), &ys, x1_pool(), 1, 5).unwrap();
        match &t.root {
            Node::Split { threshold, .. } => assert!((threshold - 0.5).abs() < 0.02, "{threshold}"),
            other => panic!("expected split, got {other:?}"),
        }
        let pred = t.predict_matrix(&DMatrix::from_column_slice(40, 1, &xs));
        assert_eq!(pred, ys);
    }

    #[test]
    fn depth_zero_is_majority_leaf() {
        let x = DMatrix::from_column_slice(4, 1, &[0.0, 1.0, 2.0, 3.0]);
        let t = build_warning_tree(&x, &[-1.0, -1.0, -1.0, 1.0], x1_pool(), 0, 1).unwrap();
        assert_eq!(t.root, Node::Leaf { label: -1 });
        let t = build_warning_tree(&x, &[-1.0, -1.0, 1.0, 1.0], x1_pool(), 0, 1).unwrap();
        assert_eq!(t.root, Node::Leaf { label: 1 });
    }

    #[test]
    fn pure_data_gives_single_leaf() {
        let x = DMatrix::from_column_slice(4, 1, &[0.0, 1.0, 2.0, 3.0]);
        let t = build_warning_tree(&x, &[1.0; 4], x1_pool(), 3, 1).unwrap();
        assert_eq!(t.root, Node::Leaf { label: 1 });
        assert_eq!(t.depth(), 0);
    }

    #[test]
    fn split_points_prefer_short_decimals() {
        assert_eq!(split_point(0.1, 0.2), 0.15);
        assert_eq!(split_point(90.0, 92.0), 91.0);
        let lo = 1.0000001;
        let hi = 1.0000002;
        let t = split_point(lo, hi);
        assert!(lo <= t && t < hi);
    }

    #[test]
    fn rejects_bad_inputs() {
        let x = DMatrix::from_column_slice(2, 1, &[0.0, 1.0]);
        assert!(build_warning_tree(&x, &[1.0, -1.0], vec![], 1, 1).is_err());
        assert!(build_warning_tree(&x, &[1.0, 0.0], x1_pool(), 1, 1).is_err());
        assert!(build_warning_tree(&x, &[1.0], x1_pool(), 1, 1).is_err());
    }
}
