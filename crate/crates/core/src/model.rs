//! Hypothesized models, observed counts, and the Pearson statistic.

use crate::error::Error;

/// A multinomial null hypothesis: the sample size n and the category
/// probabilities p_1..p_k. Single source of k, n, and p for the crate.
///
/// Every probability must lie strictly inside (0, 1) and the vector must
/// sum to 1. Strict construction ([`CategoryModel::new`]) allows a sum
/// discrepancy of at most 1e-9 and stores the probabilities as given;
/// lenient construction ([`CategoryModel::new_lenient`]) allows 1e-6 and
/// renormalizes.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryModel {
    n: u64,
    probs: Vec<f64>,
}

impl CategoryModel {
    /// Maximum deviation of `sum(probs)` from 1 accepted without renormalizing.
    pub const STRICT_SUM_TOLERANCE: f64 = 1e-9;
    /// Maximum deviation of `sum(probs)` from 1 accepted with renormalization.
    pub const LENIENT_SUM_TOLERANCE: f64 = 1e-6;

    pub fn new(probs: &[f64], n: u64) -> Result<Self, Error> {
        Self::validate(probs, n, Self::STRICT_SUM_TOLERANCE)?;
        Ok(Self {
            n,
            probs: probs.to_vec(),
        })
    }

    /// Accepts a looser sum tolerance and divides through by the sum.
    pub fn new_lenient(probs: &[f64], n: u64) -> Result<Self, Error> {
        let sum = Self::validate(probs, n, Self::LENIENT_SUM_TOLERANCE)?;
        let probs = probs.iter().map(|p| p / sum).collect();
        Ok(Self { n, probs })
    }

    fn validate(probs: &[f64], n: u64, tolerance: f64) -> Result<f64, Error> {
        if n == 0 {
            return Err(Error::NonPositiveSampleSize);
        }
        if probs.len() < 2 {
            return Err(Error::TooFewCategories { k: probs.len() });
        }
        for (index, &value) in probs.iter().enumerate() {
            if !(value > 0.0 && value < 1.0) {
                return Err(Error::NonPositiveProbability { index, value });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > tolerance {
            return Err(Error::SumNotOne { sum, tolerance });
        }
        Ok(sum)
    }

    pub fn k(&self) -> usize {
        self.probs.len()
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn min_prob(&self) -> f64 {
        self.probs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// The symmetric function Q = sum over categories of 1/p.
    ///
    /// Terms are accumulated in increasing magnitude (largest p first) to
    /// limit rounding error when the probabilities are very uneven.
    pub fn inverse_prob_sum(&self) -> f64 {
        let mut inv: Vec<f64> = self.probs.iter().map(|p| 1.0 / p).collect();
        inv.sort_unstable_by(f64::total_cmp);
        inv.iter().sum()
    }

    /// Covariance matrix of the standardized counts, I - sqrt(p) sqrt(p)'.
    pub fn covariance_matrix(&self) -> CovarianceMatrix {
        let roots: Vec<f64> = self.probs.iter().map(|p| p.sqrt()).collect();
        let entries = (0..self.k())
            .map(|i| {
                (0..self.k())
                    .map(|j| {
                        let off = -roots[i] * roots[j];
                        if i == j {
                            1.0 + off
                        } else {
                            off
                        }
                    })
                    .collect()
            })
            .collect();
        CovarianceMatrix { entries }
    }

    /// Elementary symmetric polynomials (s1, s2, s3) of the probabilities:
    /// sums of products of distinct p_i taken 1, 2, and 3 at a time.
    pub fn symmetric_polynomials(&self) -> (f64, f64, f64) {
        let (mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0);
        // Incremental update: extending the set by p multiplies existing
        // subsets; higher orders must be updated first.
        for &p in &self.probs {
            s3 += s2 * p;
            s2 += s1 * p;
            s1 += p;
        }
        (s1, s2, s3)
    }
}

/// The k-by-k covariance matrix of the standardized counts.
///
/// Idempotent with trace k - 1, which pins the degrees of freedom of the
/// limiting chi-square distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    entries: Vec<Vec<f64>>,
}

impl CovarianceMatrix {
    pub fn entries(&self) -> &[Vec<f64>] {
        &self.entries
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn trace(&self) -> f64 {
        (0..self.size()).map(|i| self.entries[i][i]).sum()
    }

    /// Largest entrywise deviation of V*V from V; zero for an exactly
    /// idempotent matrix.
    pub fn idempotency_defect(&self) -> f64 {
        let k = self.size();
        let mut worst: f64 = 0.0;
        for i in 0..k {
            for j in 0..k {
                let vv: f64 = (0..k)
                    .map(|l| self.entries[i][l] * self.entries[l][j])
                    .sum();
                worst = worst.max((vv - self.entries[i][j]).abs());
            }
        }
        worst
    }
}

/// Observed category counts, exact integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservedCounts {
    counts: Vec<u64>,
}

impl ObservedCounts {
    pub fn new(counts: &[u64]) -> Result<Self, Error> {
        if counts.len() < 2 {
            return Err(Error::TooFewCategories { k: counts.len() });
        }
        Ok(Self {
            counts: counts.to_vec(),
        })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

fn check_pair(model: &CategoryModel, obs: &ObservedCounts) -> Result<(), Error> {
    if model.k() != obs.counts().len() {
        return Err(Error::DimensionMismatch {
            expected: model.k(),
            got: obs.counts().len(),
        });
    }
    if obs.total() != model.n() {
        return Err(Error::CountSumMismatch {
            expected: model.n(),
            got: obs.total(),
        });
    }
    Ok(())
}

/// Standardized counts Y_i = (X_i - n p_i) / sqrt(n p_i).
pub fn y_vector(model: &CategoryModel, obs: &ObservedCounts) -> Result<Vec<f64>, Error> {
    check_pair(model, obs)?;
    let n = model.n() as f64;
    Ok(model
        .probs()
        .iter()
        .zip(obs.counts())
        .map(|(&p, &x)| (x as f64 - n * p) / (n * p).sqrt())
        .collect())
}

/// Pearson statistic T = sum of (X_i - n p_i)^2 / (n p_i).
pub fn t_statistic(model: &CategoryModel, obs: &ObservedCounts) -> Result<f64, Error> {
    check_pair(model, obs)?;
    let n = model.n() as f64;
    Ok(model
        .probs()
        .iter()
        .zip(obs.counts())
        .map(|(&p, &x)| {
            let d = x as f64 - n * p;
            d * d / (n * p)
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn strict_rejects_out_of_range_inputs() {
        assert!(matches!(
            CategoryModel::new(&[1.0], 5),
            Err(Error::TooFewCategories { k: 1 })
        ));
        assert!(matches!(
            CategoryModel::new(&[0.0, 1.0], 5),
            Err(Error::NonPositiveProbability { index: 0, .. })
        ));
        assert!(matches!(
            CategoryModel::new(&[-0.2, 1.2], 5),
            Err(Error::NonPositiveProbability { index: 0, .. })
        ));
        assert!(matches!(
            CategoryModel::new(&[0.3, f64::NAN], 5),
            Err(Error::NonPositiveProbability { index: 1, .. })
        ));
        assert!(matches!(
            CategoryModel::new(&[0.5, 0.6], 10),
            Err(Error::SumNotOne { .. })
        ));
        assert!(matches!(
            CategoryModel::new(&[0.5, 0.5], 0),
            Err(Error::NonPositiveSampleSize)
        ));
        let m = CategoryModel::new(&[0.5, 0.5], 10).unwrap();
        assert_eq!((m.k(), m.n()), (2, 10));
    }

    #[test]
    fn sum_tolerance_boundaries() {
        // 5e-10 off: accepted without renormalization.
        let m = CategoryModel::new(&[0.5, 0.5 + 5e-10], 3).unwrap();
        assert_eq!(m.probs()[1], 0.5 + 5e-10);
        // 1e-8 off: rejected strictly, accepted leniently.
        assert!(CategoryModel::new(&[0.5, 0.50000001], 3).is_err());
        let m = CategoryModel::new_lenient(&[0.5, 0.50000001], 3).unwrap();
        let sum: f64 = m.probs().iter().sum();
        assert!((sum - 1.0).abs() < 1e-15);
        // 1e-5 off: rejected even leniently.
        assert!(CategoryModel::new_lenient(&[0.5, 0.50001], 3).is_err());
    }

    #[test]
    fn lenient_renormalizes_proportionally() {
        let m = CategoryModel::new_lenient(&[0.2000001, 0.3, 0.5], 7).unwrap();
        let ratio = m.probs()[1] / m.probs()[2];
        assert!((ratio - 0.6).abs() < 1e-12);
    }

    #[test]
    fn t_statistic_matches_hand_values() {
        let m = CategoryModel::new(&[0.5, 0.5], 10).unwrap();
        let exact = ObservedCounts::new(&[5, 5]).unwrap();
        assert_eq!(t_statistic(&m, &exact).unwrap(), 0.0);
        assert_eq!(y_vector(&m, &exact).unwrap(), vec![0.0, 0.0]);

        let skew = ObservedCounts::new(&[8, 2]).unwrap();
        // (8-5)^2/5 + (2-5)^2/5 = 18/5.
        assert!((t_statistic(&m, &skew).unwrap() - 3.6).abs() < 1e-15);
        let y = y_vector(&m, &skew).unwrap();
        assert!((y[0] - 3.0 / 5f64.sqrt()).abs() < 1e-15);
        assert!((y[1] + 3.0 / 5f64.sqrt()).abs() < 1e-15);

        let m = CategoryModel::new(&[0.25, 0.75], 4).unwrap();
        let c = ObservedCounts::new(&[4, 0]).unwrap();
        // 9/1 + 9/3 = 12.
        assert!((t_statistic(&m, &c).unwrap() - 12.0).abs() < 1e-15);
    }

    #[test]
    fn pairing_checks_dimensions_and_count_sum() {
        let m = CategoryModel::new(&[0.5, 0.5], 10).unwrap();
        let wrong_len = ObservedCounts::new(&[1, 2, 3]).unwrap();
        assert!(matches!(
            t_statistic(&m, &wrong_len),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 3
            })
        ));
        let wrong_sum = ObservedCounts::new(&[4, 5]).unwrap();
        assert!(matches!(
            y_vector(&m, &wrong_sum),
            Err(Error::CountSumMismatch {
                expected: 10,
                got: 9
            })
        ));
    }

    #[test]
    fn covariance_matches_two_category_closed_form() {
        let m = CategoryModel::new(&[0.5, 0.5], 4).unwrap();
        let v = m.covariance_matrix();
        let want = [[0.5, -0.5], [-0.5, 0.5]];
        for (row, wrow) in v.entries().iter().zip(&want) {
            for (got, expect) in row.iter().zip(wrow) {
                assert!((got - expect).abs() < 1e-15);
            }
        }
        assert!((v.trace() - 1.0).abs() < 1e-15);
        assert!(v.idempotency_defect() < 1e-15);
    }

    #[test]
    fn symmetric_polynomials_hand_values() {
        let m = CategoryModel::new(&[0.5, 0.5], 4).unwrap();
        let (s1, s2, s3) = m.symmetric_polynomials();
        assert!((s1 - 1.0).abs() < 1e-15);
        assert!((s2 - 0.25).abs() < 1e-15);
        assert_eq!(s3, 0.0);

        let third = 1.0 / 3.0;
        let m = CategoryModel::new_lenient(&[third, third, third], 4).unwrap();
        let (_, s2, s3) = m.symmetric_polynomials();
        assert!((s2 - 1.0 / 3.0).abs() < 1e-15);
        assert!((s3 - 1.0 / 27.0).abs() < 1e-15);
    }

    #[test]
    fn inverse_prob_sum_spot_value() {
        let m = CategoryModel::new(&[0.1, 0.2, 0.3, 0.4], 9).unwrap();
        // 10 + 5 + 10/3 + 2.5
        assert!((m.inverse_prob_sum() - (17.5 + 10.0 / 3.0)).abs() < 1e-12);
    }

    pub(crate) fn arb_model(max_k: usize) -> impl Strategy<Value = CategoryModel> {
        (prop::collection::vec(0.05f64..1.0, 2..=max_k), 1u64..200).prop_map(|(raw, n)| {
            let sum: f64 = raw.iter().sum();
            let probs: Vec<f64> = raw.iter().map(|w| w / sum).collect();
            CategoryModel::new_lenient(&probs, n).unwrap()
        })
    }

    proptest! {
        #[test]
        fn t_is_nonnegative_and_equals_y_norm(
            model in arb_model(8),
            raw_counts in prop::collection::vec(0u64..40, 8),
        ) {
            let k = model.k();
            let n = model.n();
            // Distribute the required total n over the k categories.
            let mut counts: Vec<u64> = raw_counts[..k].to_vec();
            let mut total: u64 = counts.iter().sum();
            while total > n {
                let i = counts.iter().position(|&c| c > 0).unwrap();
                counts[i] -= 1;
                total -= 1;
            }
            counts[0] += n - total;
            let obs = ObservedCounts::new(&counts).unwrap();

            let t = t_statistic(&model, &obs).unwrap();
            prop_assert!(t >= 0.0);

            let y = y_vector(&model, &obs).unwrap();
            let norm2: f64 = y.iter().map(|yi| yi * yi).sum();
            prop_assert!((t - norm2).abs() <= 1e-12 * (1.0 + t));

            // sum Y_i sqrt(n p_i) = sum (X_i - n p_i) = 0.
            let nf = n as f64;
            let dot: f64 = y
                .iter()
                .zip(model.probs())
                .map(|(yi, &p)| yi * (nf * p).sqrt())
                .sum();
            prop_assert!(dot.abs() <= 1e-9 * nf.max(1.0));
        }

        #[test]
        fn covariance_structure_holds(model in arb_model(12)) {
            let v = model.covariance_matrix();
            let k = model.k();
            prop_assert!((v.trace() - (k as f64 - 1.0)).abs() < 1e-12);
            prop_assert!(v.idempotency_defect() < 1e-12);
            for i in 0..k {
                for j in 0..k {
                    prop_assert_eq!(v.entries()[i][j], v.entries()[j][i]);
                }
            }
        }

        #[test]
        fn power_sum_identities_hold(model in arb_model(10)) {
            let (s1, s2, s3) = model.symmetric_polynomials();
            prop_assert!((s1 - 1.0).abs() < 1e-12);
            let p2: f64 = model.probs().iter().map(|p| p * p).sum();
            let p3: f64 = model.probs().iter().map(|p| p * p * p).sum();
            prop_assert!((p2 - (s1 * s1 - 2.0 * s2)).abs() < 1e-12);
            prop_assert!((p3 - (s1.powi(3) - 3.0 * s1 * s2 + 3.0 * s3)).abs() < 1e-12);
        }
    }
}
