//! Exact finite-`N` moments of the margin `S` and the observed subset sum
//! `Sigma`, plus the maximum-likelihood optimality-condition root finder.
//!
//! Conditioned on the margin `S = s`, the number `H` of yes-votes among the
//! `K` observed voters is hypergeometric `(N, (N+s)/2, K)` and
//! `Sigma = 2H - K`. All inner expectations are direct sums over the
//! hypergeometric support; only even moments are ever nonzero (and stored).

use crate::math::{self, KahanSum, LnFactorials};
use crate::partition::MagnetizationDistribution;
use alloc::vec::Vec;
use core::fmt;

/// Default ceiling on `N * K` summation work per call.
pub const DEFAULT_MOMENT_BUDGET: u64 = 1 << 26;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MomentsError {
    /// The `N * K` double summation exceeds the configured work budget.
    BudgetExceeded { required: u64, budget: u64 },
    BadArguments,
}

impl fmt::Display for MomentsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MomentsError::BudgetExceeded { required, budget } => write!(
                f,
                "moment summation needs {required} cells, budget is {budget}"
            ),
            MomentsError::BadArguments => write!(f, "need n_pop >= 1, 1 <= k_obs <= n_pop, k_max >= 1"),
        }
    }
}

impl core::error::Error for MomentsError {}

/// Enumeration-oracle output: `E S^{2k}`, `E Sigma^{2k}` for `k = 1..=k_max`,
/// the pair correlation `E X1 X2`, and `ln Z`.
#[derive(Clone, Debug)]
pub struct ExactMoments {
    n_pop: u32,
    k_obs: u32,
    beta: f64,
    e_s2k: Vec<f64>,
    e_sigma2k: Vec<f64>,
    e_pair: Option<f64>,
    log_z: f64,
}

impl ExactMoments {
    #[inline]
    pub fn n_pop(&self) -> u32 {
        self.n_pop
    }

    #[inline]
    pub fn k_obs(&self) -> u32 {
        self.k_obs
    }

    #[inline]
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `E S^{2k}`; `k` is 1-based and must be within the computed range.
    #[inline]
    pub fn s_moment(&self, k: usize) -> f64 {
        self.e_s2k[k - 1]
    }

    /// `E Sigma^{2k}`.
    #[inline]
    pub fn sigma_moment(&self, k: usize) -> f64 {
        self.e_sigma2k[k - 1]
    }

    /// Pair correlation `E X1 X2 = (E S^2 - N) / (N (N-1))`; `None` when the
    /// group has a single voter.
    #[inline]
    pub fn pair_correlation(&self) -> Option<f64> {
        self.e_pair
    }

    #[inline]
    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    /// `Var(Sigma^2 / K)`, the spread entering the high-temperature variance
    /// formulas. Requires `k_max >= 2`.
    pub fn var_sigma2_over_k(&self) -> f64 {
        let k = f64::from(self.k_obs);
        (self.sigma_moment(2) - self.sigma_moment(1) * self.sigma_moment(1)) / (k * k)
    }

    /// `Var((Sigma / K)^2)`. Requires `k_max >= 2`.
    pub fn var_sigma_over_k_sq(&self) -> f64 {
        let k2 = f64::from(self.k_obs) * f64::from(self.k_obs);
        (self.sigma_moment(2) - self.sigma_moment(1) * self.sigma_moment(1)) / (k2 * k2)
    }
}

/// Exact moments with the default work budget.
pub fn exact_moments(
    n_pop: u32,
    k_obs: u32,
    beta: f64,
    k_max: usize,
) -> Result<ExactMoments, MomentsError> {
    exact_moments_with_budget(n_pop, k_obs, beta, k_max, DEFAULT_MOMENT_BUDGET)
}

/// Exact moments subject to an explicit `N * K` cell budget.
pub fn exact_moments_with_budget(
    n_pop: u32,
    k_obs: u32,
    beta: f64,
    k_max: usize,
    budget: u64,
) -> Result<ExactMoments, MomentsError> {
    if n_pop == 0 || k_obs == 0 || k_obs > n_pop || k_max == 0 {
        return Err(MomentsError::BadArguments);
    }
    let required = u64::from(n_pop) * u64::from(k_obs);
    if required > budget {
        return Err(MomentsError::BudgetExceeded { required, budget });
    }

    let n = n_pop as usize;
    let k = k_obs as usize;
    let dist = MagnetizationDistribution::new(n_pop, beta);
    let lnfact = LnFactorials::up_to(n);
    let ln_choose_nk = lnfact.ln_binomial(n, k);

    let mut s_acc: Vec<KahanSum> = alloc::vec![KahanSum::new(); k_max];
    let mut sigma_acc: Vec<KahanSum> = alloc::vec![KahanSum::new(); k_max];
    let mut pair_acc = KahanSum::new();

    for j in 0..=n {
        let p = dist.probs()[j];
        if p == 0.0 {
            continue;
        }
        let s = dist.margin(j) as f64;
        let s2 = s * s;

        let mut s_pow = 1.0;
        for acc in s_acc.iter_mut() {
            s_pow *= s2;
            acc.add(p * s_pow);
        }
        // Centered term for the pair correlation avoids the N-scale
        // cancellation of E S^2 - N.
        pair_acc.add(p * (s2 - f64::from(n_pop)));

        // Inner expectation over the hypergeometric support.
        let n_plus = j;
        let h_lo = k.saturating_sub(n - n_plus);
        let h_hi = k.min(n_plus);
        let mut inner: Vec<KahanSum> = alloc::vec![KahanSum::new(); k_max];
        for h in h_lo..=h_hi {
            let w = math::exp(
                lnfact.ln_binomial(n_plus, h) + lnfact.ln_binomial(n - n_plus, k - h)
                    - ln_choose_nk,
            );
            let sig = (2 * h as i64 - k as i64) as f64;
            let sig2 = sig * sig;
            let mut pow = 1.0;
            for acc in inner.iter_mut() {
                pow *= sig2;
                acc.add(w * pow);
            }
        }
        for (acc, inn) in sigma_acc.iter_mut().zip(inner.iter()) {
            acc.add(p * inn.value());
        }
    }

    let e_s2k: Vec<f64> = s_acc.iter().map(KahanSum::value).collect();
    let e_sigma2k: Vec<f64> = sigma_acc.iter().map(KahanSum::value).collect();
    let e_pair = if n_pop >= 2 {
        Some(pair_acc.value() / (f64::from(n_pop) * f64::from(n_pop - 1)))
    } else {
        None
    };

    Ok(ExactMoments {
        n_pop,
        k_obs,
        beta,
        e_s2k,
        e_sigma2k,
        e_pair,
        log_z: dist.log_z(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MlSolveError {
    /// `target` is not enclosed by the bracket values of `E Sigma^2`.
    TargetNotBracketed { e_lo: f64, e_hi: f64, target: f64 },
    /// `E Sigma^2` failed to be strictly increasing along the bracket.
    NonMonotonic { beta: f64 },
    Moments(MomentsError),
}

impl fmt::Display for MlSolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MlSolveError::TargetNotBracketed { e_lo, e_hi, target } => write!(
                f,
                "target {target} outside bracketed moment range [{e_lo}, {e_hi}]"
            ),
            MlSolveError::NonMonotonic { beta } => {
                write!(f, "E Sigma^2 not strictly increasing at beta = {beta}")
            }
            MlSolveError::Moments(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for MlSolveError {}

impl From<MomentsError> for MlSolveError {
    fn from(e: MomentsError) -> Self {
        MlSolveError::Moments(e)
    }
}

/// Exact finite-`N` maximum-likelihood-condition root: the `beta` with
/// `E_{beta,N} Sigma^2 = target`, by bisection on the exact moment map.
///
/// This is the oracle the closed-form `zeta` estimator is measured against.
/// Stops when `|E Sigma^2 - target| <= 1e-9 * K^2`. Monotonicity of the
/// moment map along the bracket is asserted at every step.
pub fn ml_condition_solve(
    target: f64,
    n_pop: u32,
    k_obs: u32,
    bracket: (f64, f64),
) -> Result<f64, MlSolveError> {
    let eval = |beta: f64| -> Result<f64, MomentsError> {
        Ok(exact_moments(n_pop, k_obs, beta, 1)?.sigma_moment(1))
    };
    let (mut lo, mut hi) = bracket;
    let mut e_lo = eval(lo)?;
    let mut e_hi = eval(hi)?;
    if !(e_lo <= target && target <= e_hi) {
        return Err(MlSolveError::TargetNotBracketed { e_lo, e_hi, target });
    }
    let kf = f64::from(k_obs);
    let tol = 1e-9 * kf * kf;

    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let e_mid = eval(mid)?;
        if !(e_lo <= e_mid && e_mid <= e_hi) {
            return Err(MlSolveError::NonMonotonic { beta: mid });
        }
        if math::abs(e_mid - target) <= tol || hi - lo < 1e-13 * (1.0 + math::abs(mid)) {
            return Ok(mid);
        }
        if e_mid < target {
            lo = mid;
            e_lo = e_mid;
        } else {
            hi = mid;
            e_hi = e_mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
