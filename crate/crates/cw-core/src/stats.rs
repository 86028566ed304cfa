//! Sample statistics: the pair correlation `P` and the mean squared subset
//! sum `T`.
//!
//! Per observation the pair sum over distinct indices collapses to
//! `rowsum^2 - K`, so both statistics reduce to the integer accumulation of
//! squared row sums. The accumulator is exact (u128), so the values are
//! independent of summation order (chunked parallel reductions give
//! bit-identical results) and the algebraic identity
//! `K (K-1) P + K = T` holds to the last ulp.

use crate::sampler::SampleMatrix;
use alloc::vec::Vec;
use core::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StatisticKind {
    PairCorrelation,
    SquaredSum,
}

/// One group's statistic value plus the shape it was computed from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupStatistic {
    pub value: f64,
    pub kind: StatisticKind,
    pub n_obs: usize,
    pub k_obs: usize,
}

/// Per-group statistics of one sample.
#[derive(Clone, Debug, PartialEq)]
pub struct StatisticVector {
    pub groups: Vec<GroupStatistic>,
}

impl StatisticVector {
    #[inline]
    pub fn value(&self, group: usize) -> f64 {
        self.groups[group].value
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.groups.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StatsError {
    /// Pair correlations need at least two observed votes per group.
    PairNeedsTwoColumns { group: usize, k_obs: usize },
    NoObservations,
}

impl fmt::Display for StatsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatsError::PairNeedsTwoColumns { group, k_obs } => write!(
                f,
                "pair correlation undefined for group {group} with k_obs = {k_obs}"
            ),
            StatsError::NoObservations => write!(f, "sample has no observations"),
        }
    }
}

impl core::error::Error for StatsError {}

/// Sum over rows of (row sum)^2, exactly.
fn squared_row_sums(sample: &SampleMatrix, group: usize) -> u128 {
    let mut acc: u128 = 0;
    for row in sample.rows(group) {
        let s: i64 = row.iter().map(|&e| i64::from(e)).sum();
        acc += (s * s) as u128;
    }
    acc
}

/// Pair-correlation statistic `P` per group: the average over observations
/// of the mean product over distinct observed pairs.
pub fn compute_p(sample: &SampleMatrix) -> Result<StatisticVector, StatsError> {
    if sample.n_obs() == 0 {
        return Err(StatsError::NoObservations);
    }
    let mut groups = Vec::with_capacity(sample.group_count());
    for g in 0..sample.group_count() {
        let k = sample.k_obs(g);
        if k < 2 {
            return Err(StatsError::PairNeedsTwoColumns { group: g, k_obs: k });
        }
        let n = sample.n_obs();
        let acc = squared_row_sums(sample, g);
        // (sum of rowsum^2 - n K) / (n K (K-1)), all integers until the end.
        let numer = acc as i128 - (n as i128) * (k as i128);
        let denom = (n as u128) * (k as u128) * (k as u128 - 1);
        groups.push(GroupStatistic {
            value: numer as f64 / denom as f64,
            kind: StatisticKind::PairCorrelation,
            n_obs: n,
            k_obs: k,
        });
    }
    Ok(StatisticVector { groups })
}

/// Squared-sum statistic `T` per group: the average over observations of the
/// squared subset sum.
pub fn compute_t(sample: &SampleMatrix) -> Result<StatisticVector, StatsError> {
    if sample.n_obs() == 0 {
        return Err(StatsError::NoObservations);
    }
    let mut groups = Vec::with_capacity(sample.group_count());
    for g in 0..sample.group_count() {
        let n = sample.n_obs();
        let acc = squared_row_sums(sample, g);
        groups.push(GroupStatistic {
            value: acc as f64 / n as f64,
            kind: StatisticKind::SquaredSum,
            n_obs: n,
            k_obs: sample.k_obs(g),
        });
    }
    Ok(StatisticVector { groups })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GroupSpec;
    use crate::sampler::{sample_subset, SampleMatrix, SamplerConfig};

    fn matrix(k: usize, rows: &[&[i8]]) -> SampleMatrix {
        let data: Vec<i8> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        SampleMatrix::from_blocks(rows.len(), alloc::vec![(k, data)]).unwrap()
    }

    #[test]
    fn unanimous_sample_has_p_one_t_ksq() {
        let m = matrix(4, &[&[1, 1, 1, 1], &[-1, -1, -1, -1]]);
        assert_eq!(compute_p(&m).unwrap().value(0), 1.0);
        assert_eq!(compute_t(&m).unwrap().value(0), 16.0);
    }

    #[test]
    fn single_discordant_pair() {
        let m = matrix(2, &[&[1, -1]]);
        assert_eq!(compute_p(&m).unwrap().value(0), -1.0);
        assert_eq!(compute_t(&m).unwrap().value(0), 0.0);
    }

    #[test]
    fn hand_enumerated_three_column_case() {
        // rows (+1,+1,+1) and (+1,+1,-1): row sums 3, 1.
        // P = ((9-3)/6 + (1-3)/6) / 2 = 1/3, T = (9+1)/2 = 5.
        let m = matrix(3, &[&[1, 1, 1], &[1, 1, -1]]);
        assert!((compute_p(&m).unwrap().value(0) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(compute_t(&m).unwrap().value(0), 5.0);
    }

    #[test]
    fn balanced_even_rows_give_t_zero() {
        let m = matrix(4, &[&[1, 1, -1, -1], &[-1, 1, 1, -1]]);
        assert_eq!(compute_t(&m).unwrap().value(0), 0.0);
        // P = (0 - K) / (K(K-1)) = -1/3
        assert!((compute_p(&m).unwrap().value(0) + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn k2_pair_correlation_is_plain_product_mean() {
        // For two columns P reduces to the average of x1 * x2.
        let rows: &[&[i8]] = &[&[1, 1], &[1, -1], &[-1, -1], &[1, 1], &[-1, 1]];
        let m = matrix(2, rows);
        let direct: f64 = rows
            .iter()
            .map(|r| f64::from(r[0]) * f64::from(r[1]))
            .sum::<f64>()
            / rows.len() as f64;
        assert_eq!(compute_p(&m).unwrap().value(0), direct);
    }

    #[test]
    fn p_requires_two_columns() {
        let m = matrix(1, &[&[1], &[-1]]);
        assert_eq!(
            compute_p(&m).unwrap_err(),
            StatsError::PairNeedsTwoColumns { group: 0, k_obs: 1 }
        );
        // T is fine with one column.
        assert_eq!(compute_t(&m).unwrap().value(0), 1.0);
    }

    #[test]
    fn identity_links_p_and_t_on_sampled_data() {
        let g = GroupSpec::new(1.1, 25, 9).unwrap();
        let m = sample_subset(&g, 4096, &SamplerConfig::new(3, 0));
        let p = compute_p(&m).unwrap().value(0);
        let t = compute_t(&m).unwrap().value(0);
        let k = 9.0;
        assert!(
            (k * (k - 1.0) * p + k - t).abs() <= 1e-12 * t.abs().max(1.0),
            "identity violated: p={p} t={t}"
        );
    }

    #[test]
    fn p_from_row_sums_equals_explicit_pair_sum() {
        // The O(K^2) definition, computed directly, must agree exactly.
        let g = GroupSpec::new(0.9, 30, 13).unwrap();
        let m = sample_subset(&g, 500, &SamplerConfig::new(5, 1));
        let k = 13usize;
        let mut total = 0i64;
        for row in m.rows(0) {
            for i in 0..k {
                for j in 0..k {
                    if i != j {
                        total += i64::from(row[i]) * i64::from(row[j]);
                    }
                }
            }
        }
        let explicit = total as f64 / (500.0 * (k * (k - 1)) as f64);
        let fast = compute_p(&m).unwrap().value(0);
        assert!((explicit - fast).abs() < 1e-14, "{explicit} vs {fast}");
    }
}
