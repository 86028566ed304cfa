//! Partition function and magnetization-sector distribution of one group.
//!
//! The voters are exchangeable, so the Gibbs sum over all `2^N`
//! configurations collapses to `N + 1` magnetization sectors: the margin
//! `S = 2j - N` has weight `C(N, j) * exp(beta * S^2 / (2N))`, where `j`
//! counts yes-votes. Everything is kept in the log domain until the final
//! normalized probabilities.

use crate::math::{self, KahanSum, LnFactorials};
use alloc::vec::Vec;

/// Sector weights, log partition function, and normalized sector
/// probabilities for one `(n_pop, beta)` pair. Immutable after construction.
#[derive(Clone, Debug)]
pub struct MagnetizationDistribution {
    n_pop: u32,
    beta: f64,
    log_weights: Vec<f64>,
    log_z: f64,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl MagnetizationDistribution {
    /// O(N) construction via log-sum-exp over the sectors.
    pub fn new(n_pop: u32, beta: f64) -> Self {
        let n = n_pop as usize;
        let nf = f64::from(n_pop);
        let lnfact = LnFactorials::up_to(n);

        let mut log_weights = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let s = 2.0 * j as f64 - nf;
            log_weights.push(lnfact.ln_binomial(n, j) + beta * s * s / (2.0 * nf));
        }
        let log_z = math::log_sum_exp(&log_weights);

        let probs: Vec<f64> = log_weights.iter().map(|&lw| math::exp(lw - log_z)).collect();

        let mut cumulative = Vec::with_capacity(n + 1);
        let mut acc = KahanSum::new();
        for &p in &probs {
            acc.add(p);
            cumulative.push(acc.value());
        }
        // Guarantee the inverse-CDF search always lands inside the table.
        cumulative[n] = 1.0;

        Self {
            n_pop,
            beta,
            log_weights,
            log_z,
            probs,
            cumulative,
        }
    }

    #[inline]
    pub fn n_pop(&self) -> u32 {
        self.n_pop
    }

    #[inline]
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Log of the partition function `Z`.
    #[inline]
    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    /// Log weight of sector `j` (that is, of margin `S = 2j - N`).
    #[inline]
    pub fn log_weight(&self, j: usize) -> f64 {
        self.log_weights[j]
    }

    /// `P(S = 2j - N)` for `j = 0..=N`.
    #[inline]
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Margin value of sector `j`.
    #[inline]
    pub fn margin(&self, j: usize) -> i64 {
        2 * j as i64 - i64::from(self.n_pop)
    }

    /// Inverse-CDF lookup: smallest sector `j` with `cum[j] >= u`.
    #[inline]
    pub fn sector_for(&self, u: f64) -> usize {
        self.cumulative.partition_point(|&c| c < u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math;

    /// Brute-force 2^N enumeration of the partition function.
    fn enumerate_log_z(n: u32, beta: f64) -> f64 {
        let mut z = 0.0f64;
        for bits in 0u64..(1 << n) {
            let plus = bits.count_ones() as i64;
            let s = (2 * plus - i64::from(n)) as f64;
            z += math::exp(beta * s * s / (2.0 * f64::from(n)));
        }
        math::ln(z)
    }

    #[test]
    fn single_voter_partition_function() {
        // Z = 2 exp(beta/2) regardless of sign of beta.
        for beta in [-1.0, 0.0, 0.7, 3.0] {
            let d = MagnetizationDistribution::new(1, beta);
            let expected = math::ln(2.0) + beta / 2.0;
            assert!((d.log_z() - expected).abs() < 1e-14, "beta={beta}");
        }
    }

    #[test]
    fn two_voters_beta_one() {
        // Enumeration of 4 configurations: Z = 2e + 2.
        let d = MagnetizationDistribution::new(2, 1.0);
        let expected = math::ln(2.0 * math::exp(1.0) + 2.0);
        assert!((d.log_z() - expected).abs() < 1e-14);
    }

    #[test]
    fn beta_zero_is_binomial() {
        let d = MagnetizationDistribution::new(20, 0.0);
        assert!((d.log_z() - 20.0 * math::ln(2.0)).abs() < 1e-12);
        let lnfact = math::LnFactorials::up_to(20);
        for j in 0..=20usize {
            let expected = math::exp(lnfact.ln_binomial(20, j) - 20.0 * math::ln(2.0));
            assert!((d.probs()[j] - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn log_z_matches_enumeration_small_n() {
        for n in 1..=12u32 {
            for beta in [-0.5, 0.0, 0.5, 1.0, 1.5] {
                let d = MagnetizationDistribution::new(n, beta);
                let brute = enumerate_log_z(n, beta);
                assert!(
                    (d.log_z() - brute).abs() <= 1e-10 * brute.abs().max(1.0),
                    "n={n} beta={beta}: {} vs {}",
                    d.log_z(),
                    brute
                );
            }
        }
    }

    #[test]
    fn probabilities_sum_to_one_on_grid() {
        for n in (1..=200u32).step_by(7).chain([200]) {
            for beta in [-1.0, 0.0, 0.5, 1.0, 1.5, 3.0] {
                let d = MagnetizationDistribution::new(n, beta);
                let total: f64 = d.probs().iter().sum();
                assert!(
                    (total - 1.0).abs() < 1e-12,
                    "n={n} beta={beta} total={total}"
                );
            }
        }
    }

    #[test]
    fn weights_are_symmetric() {
        let d = MagnetizationDistribution::new(31, 1.3);
        for j in 0..=31usize {
            assert_eq!(d.log_weight(j), d.log_weight(31 - j));
        }
    }

    #[test]
    fn sector_lookup_brackets_cumulative() {
        let d = MagnetizationDistribution::new(9, 0.8);
        assert_eq!(d.sector_for(0.0), 0);
        assert_eq!(d.sector_for(1.0), d.probs().len() - 1);
        // Interior: u just above cum[j] must map to j+1.
        let mut acc = 0.0;
        for j in 0..5 {
            acc += d.probs()[j];
            let next = d.sector_for(acc + 1e-12);
            assert!(next > j, "u just above cum[{j}] gave {next}");
        }
    }
}
