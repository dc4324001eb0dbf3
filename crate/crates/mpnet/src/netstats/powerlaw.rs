//! Discrete power-law fitting over the tail of an integer sample.
//!
//! The exponent over a tail `x >= d_min` is the maximum-likelihood estimate
//! `gamma = 1 + n_tail / Σ ln(x_i / (d_min − ½))`, and `d_min` itself is
//! chosen among the observed values to minimise the Kolmogorov–Smirnov
//! distance between the tail and the fitted law. Tails smaller than
//! [`MIN_TAIL`] observations are not considered.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;

/// Smallest tail size a candidate `d_min` may leave.
pub const MIN_TAIL: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub gamma: f64,
    pub d_min: u64,
    pub n_tail: usize,
    pub ks_distance: f64,
}

/// Hurwitz zeta `ζ(s, a) = Σ_{k≥a} k^(-s)` for `s > 1`, via direct summation
/// with an Euler–Maclaurin tail.
pub(crate) fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    debug_assert!(s > 1.0 && a >= 0.5);
    let direct = 32usize;
    let mut sum = 0.0;
    for k in 0..direct {
        sum += (a + k as f64).powf(-s);
    }
    let b = a + direct as f64;
    sum + b.powf(1.0 - s) / (s - 1.0) - 0.5 * b.powf(-s) + s * b.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * b.powf(-s - 3.0) / 720.0
}

struct Candidate {
    d_min: u64,
    gamma: f64,
    n_tail: usize,
    ks: f64,
}

/// Fit a discrete power law to a multiset of positive integers.
pub fn fit_power_law(samples: &[u64]) -> Result<PowerLawFit> {
    if samples.is_empty() {
        return Err(Error::NoTail);
    }
    if samples.iter().any(|&x| x == 0) {
        return Err(Error::InvalidConfig(
            "power-law samples must be positive integers".into(),
        ));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    if sorted[0] == sorted[n - 1] {
        return Err(Error::NoTail);
    }

    let mut distinct: Vec<u64> = sorted.clone();
    distinct.dedup();
    if distinct.len() < 10 {
        return Err(Error::InvalidConfig(format!(
            "need at least 10 distinct values, got {}",
            distinct.len()
        )));
    }

    // suffix_ln[i] = Σ_{j >= i} ln(sorted[j])
    let mut suffix_ln = vec![0.0f64; n + 1];
    for i in (0..n).rev() {
        suffix_ln[i] = suffix_ln[i + 1] + (sorted[i] as f64).ln();
    }

    // Candidate cutoffs: every distinct value that leaves a large enough
    // tail with at least two distinct values in it.
    let candidates: Vec<u64> = distinct
        .iter()
        .copied()
        .filter(|&d| {
            let start = sorted.partition_point(|&x| x < d);
            n - start >= MIN_TAIL && sorted[start] != sorted[n - 1]
        })
        .collect();
    if candidates.is_empty() {
        return Err(Error::NoTail);
    }

    let max_val = sorted[n - 1];
    let evaluated = exec::map_collect(candidates.len(), |ci| {
        let d = candidates[ci];
        let start = sorted.partition_point(|&x| x < d);
        let n_tail = n - start;
        let log_sum = suffix_ln[start] - n_tail as f64 * (d as f64 - 0.5).ln();
        let gamma = 1.0 + n_tail as f64 / log_sum;

        // Distinct tail values with multiplicities, ascending.
        let tail = &sorted[start..];
        let mut tail_distinct: Vec<(u64, usize)> = Vec::new();
        for &x in tail {
            match tail_distinct.last_mut() {
                Some((v, c)) if *v == x => *c += 1,
                _ => tail_distinct.push((x, 1)),
            }
        }

        // ζ(γ, val + 1) for every distinct value, walking the zeta down from
        // the far end so each candidate costs O(max_val − d) pows total.
        let mut zeta_at = vec![0.0f64; tail_distinct.len()];
        let mut z = hurwitz_zeta(gamma, max_val as f64 + 1.0);
        let mut k = max_val; // invariant: z == ζ(γ, k + 1)
        for (idx, &(val, _)) in tail_distinct.iter().enumerate().rev() {
            while k > val {
                z += (k as f64).powf(-gamma);
                k -= 1;
            }
            zeta_at[idx] = z;
        }
        while k >= d {
            z += (k as f64).powf(-gamma);
            if k == d {
                break;
            }
            k -= 1;
        }
        let zeta_d = z;

        // KS over the atoms: empirical vs model CDF within the tail.
        let mut ks = 0.0f64;
        let mut cum = 0usize;
        for (idx, &(_, count)) in tail_distinct.iter().enumerate() {
            cum += count;
            let emp_cdf = cum as f64 / n_tail as f64;
            let model_cdf = 1.0 - zeta_at[idx] / zeta_d;
            ks = ks.max((emp_cdf - model_cdf).abs());
        }
        Candidate {
            d_min: d,
            gamma,
            n_tail,
            ks,
        }
    });

    let best = evaluated
        .iter()
        .min_by(|a, b| {
            a.ks.partial_cmp(&b.ks)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.d_min.cmp(&b.d_min))
        })
        .expect("candidate list is non-empty");
    Ok(PowerLawFit {
        gamma: best.gamma,
        d_min: best.d_min,
        n_tail: best.n_tail,
        ks_distance: best.ks,
    })
}

/// Gini coefficient of a non-negative sample:
/// `G = Σ_i (2i − n − 1)·x_(i) / (n·Σx)` over the ascending order statistics.
pub fn gini_coefficient(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidConfig("empty sample".into()));
    }
    if samples.iter().any(|&x| !(x >= 0.0)) {
        return Err(Error::InvalidConfig("Gini requires non-negative values".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    let n = sorted.len() as f64;
    let total: f64 = exec::stable_sum(&sorted);
    if total <= 0.0 {
        return Err(Error::InvalidConfig("Gini undefined for an all-zero sample".into()));
    }
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| (2.0 * (i + 1) as f64 - n - 1.0) * x)
        .sum();
    Ok(weighted / (n * total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::ZetaSampler;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hurwitz_zeta_matches_known_values() {
        // ζ(2, 1) = π²/6
        let z = hurwitz_zeta(2.0, 1.0);
        assert!((z - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-12, "{z}");
        // ζ(2, 2) = π²/6 − 1
        let z = hurwitz_zeta(2.0, 2.0);
        assert!((z - (std::f64::consts::PI.powi(2) / 6.0 - 1.0)).abs() < 1e-12);
        // Direct summation cross-check at s = 3.5, a = 7.
        let direct: f64 = (7u64..400_000).map(|k| (k as f64).powf(-3.5)).sum();
        assert!((hurwitz_zeta(3.5, 7.0) - direct).abs() < 1e-10);
    }

    #[test]
    fn all_equal_sample_has_no_tail() {
        assert!(matches!(fit_power_law(&[4; 100]), Err(Error::NoTail)));
    }

    #[test]
    fn recovers_generator_exponent() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let sampler = ZetaSampler::new(2.5, 5);
        let samples: Vec<u64> = (0..100_000).map(|_| sampler.sample(&mut rng)).collect();
        let fit = fit_power_law(&samples).unwrap();
        assert!(
            (2.45..=2.55).contains(&fit.gamma),
            "gamma {} d_min {} ks {}",
            fit.gamma,
            fit.d_min,
            fit.ks_distance
        );
        assert!(fit.d_min <= 8, "d_min {}", fit.d_min);
    }

    #[test]
    fn gini_known_values() {
        assert_eq!(gini_coefficient(&[1.0, 1.0, 1.0, 1.0]).unwrap(), 0.0);
        let g = gini_coefficient(&[0.0, 0.0, 0.0, 4.0]).unwrap();
        assert!((g - 0.75).abs() < 1e-15);
    }

    #[test]
    fn gini_is_scale_invariant() {
        let xs = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0];
        let scaled: Vec<f64> = xs.iter().map(|x| x * 17.0).collect();
        assert_eq!(
            gini_coefficient(&xs).unwrap(),
            gini_coefficient(&scaled).unwrap()
        );
    }

    #[test]
    fn gini_rejects_all_zero() {
        assert!(gini_coefficient(&[0.0, 0.0]).is_err());
    }
}
