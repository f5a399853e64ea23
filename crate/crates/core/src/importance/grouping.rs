//! Row groups for conditional permutations: rows are only exchanged with
//! rows that look alike on every other feature.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::rng::Stream;
use crate::scalar::Scalar;

/// Default bin count for [`GroupingSpec::QuantileBins`].
pub const DEFAULT_QUANTILE_BINS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupingSpec {
    /// Rows share a group when all other features are bit-identical.
    ExactMatch,
    /// Each other feature is cut at its empirical quantiles into `bins` bins;
    /// rows share a group when all bin indices agree.
    QuantileBins { bins: usize },
}

impl Default for GroupingSpec {
    fn default() -> Self {
        GroupingSpec::ExactMatch
    }
}

/// Groups of row indices, ordered by first appearance; every row is in exactly one.
pub fn group_rows<F: Scalar>(test: &Dataset<F>, j: usize, spec: GroupingSpec) -> Vec<Vec<usize>> {
    let n = test.n_rows();
    let d = test.n_features();
    let keys: Vec<Vec<u64>> = match spec {
        GroupingSpec::ExactMatch => (0..n)
            .map(|i| {
                test.row(i)
                    .iter()
                    .enumerate()
                    .filter(|&(c, _)| c != j)
                    // -0.0 and 0.0 compare equal, so they share a key
                    .map(|(_, &v)| (v + F::zero()).as_f64().to_bits())
                    .collect()
            })
            .collect(),
        GroupingSpec::QuantileBins { bins } => {
            let bins = bins.clamp(1, n.max(1));
            let cuts: Vec<Vec<F>> = (0..d)
                .map(|c| if c == j { Vec::new() } else { quantile_cuts(&test.column(c), bins) })
                .collect();
            (0..n)
                .map(|i| {
                    test.row(i)
                        .iter()
                        .enumerate()
                        .filter(|&(c, _)| c != j)
                        .map(|(c, &v)| cuts[c].iter().filter(|&&cut| v > cut).count() as u64)
                        .collect()
                })
                .collect()
        }
    };
    let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, key) in keys.into_iter().enumerate() {
        let g = *index.entry(key).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(i);
    }
    groups
}

/// Inner cut points at probabilities `1/bins, ..., (bins-1)/bins` (lower empirical quantile).
fn quantile_cuts<F: Scalar>(column: &[F], bins: usize) -> Vec<F> {
    let mut sorted = column.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite features"));
    let n = sorted.len();
    let mut cuts: Vec<F> = (1..bins)
        .map(|b| sorted[((b * n).div_ceil(bins)).saturating_sub(1).min(n - 1)])
        .collect();
    cuts.dedup();
    cuts
}

/// A permutation that only exchanges rows within the same group.
pub fn grouped_permutation(groups: &[Vec<usize>], n: usize, rng: &mut Stream) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for g in groups {
        if g.len() < 2 {
            continue;
        }
        let mut shuffled = g.clone();
        rng.shuffle(&mut shuffled);
        for (&dst, &src) in g.iter().zip(&shuffled) {
            perm[dst] = src;
        }
    }
    perm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Targets;

    fn ds(rows: Vec<Vec<f64>>) -> Dataset<f64> {
        let n = rows.len();
        let d = rows[0].len();
        Dataset::from_rows(
            &rows,
            (0..d).map(|c| format!("x{c}")).collect(),
            "y",
            Targets::Real(vec![0.0; n]),
        )
        .unwrap()
    }

    #[test]
    fn exact_match_ignores_permuted_column() {
        let d = ds(vec![
            vec![1.0, 0.0],
            vec![2.0, 1.0],
            vec![3.0, 0.0],
            vec![4.0, -0.0],
        ]);
        let g = group_rows(&d, 0, GroupingSpec::ExactMatch);
        assert_eq!(g, vec![vec![0, 2, 3], vec![1]]);
    }

    #[test]
    fn quantile_bins_partition_rows() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![0.0, i as f64]).collect();
        let g = group_rows(&ds(rows), 0, GroupingSpec::QuantileBins { bins: 4 });
        assert_eq!(g.len(), 4);
        assert!(g.iter().all(|grp| grp.len() == 5));
    }

    #[test]
    fn grouped_permutation_stays_in_group() {
        let groups = vec![vec![0, 2, 4], vec![1, 3], vec![5]];
        let mut rng = Stream::new(9);
        for _ in 0..20 {
            let p = grouped_permutation(&groups, 6, &mut rng);
            for g in &groups {
                let mut img: Vec<usize> = g.iter().map(|&i| p[i]).collect();
                img.sort_unstable();
                assert_eq!(&img, g);
            }
        }
    }
}
