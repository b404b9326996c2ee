//! Cumulants of the standardized counts and the correction coefficients.
//!
//! The standardized count vector Y has third and fourth joint cumulants of
//! order 1/sqrt(n) and 1/n. Two scalar contractions of those cumulants,
//! B and C, drive the density correction:
//!
//!   B = (1/8) sum over i,j of kappa_{i,i,j,j}
//!   C = (1/8) sum over i,j,l of kappa_{i,j,j} kappa_{i,l,l}
//!     + (1/12) sum over i,j,l of kappa_{i,j,l}^2
//!
//! Both collapse to closed forms in Q = sum of 1/p_i:
//!
//!   B = (Q - k^2 - 2k + 2) / (8n)
//!   C = (5(Q - k^2) + 2(k-1)(k-2)) / (24n)
//!
//! This module implements the cumulant formulas, the brute-force sums (kept
//! as an independent verification route; never substituted by the closed
//! forms), the closed forms themselves, and the validity diagnostics.

use crate::error::Error;
use crate::model::CategoryModel;

/// Largest k accepted by the O(k^3) brute-force sums. They exist to verify
/// the closed forms, not to compute production values.
pub const BRUTEFORCE_MAX_K: usize = 200;

/// The validity bound: the correction is trustworthy while |B| and |C|
/// stay at or below 0.15 k.
pub fn validity_threshold(k: usize) -> f64 {
    0.15 * k as f64
}

/// B, C, and the diagnostics that qualify them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectionCoefficients {
    pub b: f64,
    pub c: f64,
    /// Q = sum of 1/p_i; always at least k^2, with equality iff uniform.
    pub q: f64,
    pub k: usize,
    pub n: u64,
    /// 0.15 k, the bound applied to |B| and |C|.
    pub threshold: f64,
    pub valid: bool,
}

impl CorrectionCoefficients {
    /// Builds the coefficient set from Q directly, without a model. Used
    /// when Q (or B) is known but the probabilities are not.
    pub fn from_q(q: f64, k: usize, n: u64) -> Result<Self, Error> {
        if k < 2 {
            return Err(Error::TooFewCategories { k });
        }
        if n == 0 {
            return Err(Error::NonPositiveSampleSize);
        }
        let b = b_from_q(q, k, n);
        let c = c_from_q(q, k, n);
        let threshold = validity_threshold(k);
        let valid = b.abs() <= threshold && c.abs() <= threshold;
        Ok(Self {
            b,
            c,
            q,
            k,
            n,
            threshold,
            valid,
        })
    }
}

/// Closed-form coefficients plus validity flag for a model.
pub fn coefficients(model: &CategoryModel) -> CorrectionCoefficients {
    CorrectionCoefficients::from_q(model.inverse_prob_sum(), model.k(), model.n())
        .expect("a valid model has k >= 2 and n >= 1")
}

pub fn b_from_q(q: f64, k: usize, n: u64) -> f64 {
    let k = k as f64;
    (q - k * k - 2.0 * k + 2.0) / (8.0 * n as f64)
}

pub fn c_from_q(q: f64, k: usize, n: u64) -> f64 {
    let k = k as f64;
    (5.0 * (q - k * k) + 2.0 * (k - 1.0) * (k - 2.0)) / (24.0 * n as f64)
}

pub fn b_closed_form(model: &CategoryModel) -> f64 {
    b_from_q(model.inverse_prob_sum(), model.k(), model.n())
}

pub fn c_closed_form(model: &CategoryModel) -> f64 {
    c_from_q(model.inverse_prob_sum(), model.k(), model.n())
}

fn check_index(model: &CategoryModel, index: usize) -> Result<(), Error> {
    if index >= model.k() {
        return Err(Error::IndexOutOfRange {
            index,
            k: model.k(),
        });
    }
    Ok(())
}

/// Third joint cumulant of (Y_i, Y_j, Y_l), any index pattern, 0-based.
///
/// Symmetric under permutation; the three distinct patterns are
///   kappa_{i,i,i} = (1 - p_i)(1 - 2 p_i) / sqrt(n p_i)
///   kappa_{i,i,j} = -sqrt(p_j) (1 - 2 p_i) / sqrt(n)       (i repeated)
///   kappa_{i,j,l} = 2 sqrt(p_i p_j p_l) / sqrt(n)          (all distinct)
pub fn cumulant3(model: &CategoryModel, i: usize, j: usize, l: usize) -> Result<f64, Error> {
    check_index(model, i)?;
    check_index(model, j)?;
    check_index(model, l)?;
    let p = model.probs();
    let n = model.n() as f64;
    let value = if i == j && j == l {
        let pi = p[i];
        (1.0 - pi) * (1.0 - 2.0 * pi) / (n * pi).sqrt()
    } else if i == j {
        third_repeated(p[i], p[l], n)
    } else if i == l {
        third_repeated(p[i], p[j], n)
    } else if j == l {
        third_repeated(p[j], p[i], n)
    } else {
        // Multiply in sorted order so the result is bitwise invariant
        // under permutations of (i, j, l).
        let mut v = [p[i], p[j], p[l]];
        v.sort_unstable_by(f64::total_cmp);
        2.0 * (v[0] * v[1] * v[2]).sqrt() / n.sqrt()
    };
    Ok(value)
}

// kappa with `repeated` appearing twice and `single` once.
fn third_repeated(repeated: f64, single: f64, n: f64) -> f64 {
    -single.sqrt() * (1.0 - 2.0 * repeated) / n.sqrt()
}

/// Fourth joint cumulant with paired indices: kappa_{i,i,j,j}, 0-based.
///
///   i = j: kappa_{i,i,i,i} = (1/p_i - 7 + 12 p_i - 6 p_i^2) / n
///   i != j: kappa_{i,i,j,j} = (2 p_i + 2 p_j - 6 p_i p_j - 1) / n
pub fn cumulant4_paired(model: &CategoryModel, i: usize, j: usize) -> Result<f64, Error> {
    check_index(model, i)?;
    check_index(model, j)?;
    let p = model.probs();
    let n = model.n() as f64;
    let value = if i == j {
        let pi = p[i];
        (1.0 / pi - 7.0 + 12.0 * pi - 6.0 * pi * pi) / n
    } else {
        // p_i * p_j groups first so the value is bitwise symmetric in (i, j).
        (2.0 * p[i] + 2.0 * p[j] - 6.0 * (p[i] * p[j]) - 1.0) / n
    };
    Ok(value)
}

/// Log of the joint moment generating function of Y at the point t:
///
///   M(t) = n ln( sum over m of p_m exp(t_m / sqrt(n p_m)) )
///        - sum over m of t_m sqrt(n p_m)
///
/// The log-sum is shifted by its largest exponent, so no overflow for any
/// finite t. All cumulants above are partial derivatives of M at t = 0;
/// the test suite differentiates M numerically to cross-check them.
pub fn log_mgf(model: &CategoryModel, t: &[f64]) -> Result<f64, Error> {
    if t.len() != model.k() {
        return Err(Error::DimensionMismatch {
            expected: model.k(),
            got: t.len(),
        });
    }
    let n = model.n() as f64;
    let exponents: Vec<f64> = model
        .probs()
        .iter()
        .zip(t)
        .map(|(&p, &tm)| tm / (n * p).sqrt())
        .collect();
    let shift = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = model
        .probs()
        .iter()
        .zip(&exponents)
        .map(|(&p, &a)| p * (a - shift).exp())
        .sum();
    let linear: f64 = model
        .probs()
        .iter()
        .zip(t)
        .map(|(&p, &tm)| tm * (n * p).sqrt())
        .sum();
    Ok(n * (shift + sum.ln()) - linear)
}

fn check_bruteforce_size(model: &CategoryModel) -> Result<(), Error> {
    if model.k() > BRUTEFORCE_MAX_K {
        return Err(Error::BruteForceTooLarge {
            k: model.k(),
            limit: BRUTEFORCE_MAX_K,
        });
    }
    Ok(())
}

/// B by its definition: (1/8) sum over all (i, j) of kappa_{i,i,j,j}.
pub fn b_bruteforce(model: &CategoryModel) -> Result<f64, Error> {
    check_bruteforce_size(model)?;
    let k = model.k();
    let mut sum = 0.0;
    for i in 0..k {
        for j in 0..k {
            sum += cumulant4_paired(model, i, j)?;
        }
    }
    Ok(sum / 8.0)
}

/// C by its definition: the two third-cumulant contractions with weights
/// 1/8 and 1/12, accumulated over all k^3 index triples.
pub fn c_bruteforce(model: &CategoryModel) -> Result<f64, Error> {
    check_bruteforce_size(model)?;
    let k = model.k();
    let mut paired = 0.0;
    let mut squared = 0.0;
    for i in 0..k {
        for j in 0..k {
            let kappa_ijj = cumulant3(model, i, j, j)?;
            for l in 0..k {
                paired += kappa_ijj * cumulant3(model, i, l, l)?;
                let kappa_ijl = cumulant3(model, i, j, l)?;
                squared += kappa_ijl * kappa_ijl;
            }
        }
    }
    Ok(paired / 8.0 + squared / 12.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn model(probs: &[f64], n: u64) -> CategoryModel {
        CategoryModel::new_lenient(probs, n).unwrap()
    }

    #[test]
    fn cumulant3_hand_values() {
        // 1 - 2p vanishes at p = 1/2.
        let m = model(&[0.5, 0.5], 4);
        assert_eq!(cumulant3(&m, 0, 0, 0).unwrap(), 0.0);

        let m = model(&[0.25, 0.75], 4);
        assert!((cumulant3(&m, 0, 0, 0).unwrap() - 0.375).abs() < 1e-15);

        let m = model(&[0.2, 0.3, 0.5], 1);
        let want = 2.0 * 0.03f64.sqrt();
        assert!((cumulant3(&m, 0, 1, 2).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn cumulant3_repeated_index_pattern() {
        // kappa_{i,i,j} = -sqrt(p_j)(1 - 2 p_i)/sqrt(n), regardless of
        // where the repeated index sits.
        let m = model(&[0.25, 0.75], 4);
        let want = -(0.75f64.sqrt()) * 0.5 / 2.0;
        for (i, j, l) in [(0, 0, 1), (0, 1, 0), (1, 0, 0)] {
            let got = cumulant3(&m, i, j, l).unwrap();
            assert!((got - want).abs() < 1e-15, "pattern ({i},{j},{l})");
        }
    }

    #[test]
    fn cumulant4_hand_values() {
        let m = model(&[0.5, 0.5], 4);
        assert!((cumulant4_paired(&m, 0, 0).unwrap() + 0.125).abs() < 1e-15);
        assert!((cumulant4_paired(&m, 0, 1).unwrap() + 0.125).abs() < 1e-15);

        let m = model(&[0.25, 0.75], 1);
        assert!((cumulant4_paired(&m, 0, 1).unwrap() + 0.125).abs() < 1e-15);
    }

    #[test]
    fn index_bounds_are_enforced() {
        let m = model(&[0.5, 0.5], 4);
        assert!(matches!(
            cumulant3(&m, 0, 2, 0),
            Err(Error::IndexOutOfRange { index: 2, k: 2 })
        ));
        assert!(matches!(
            cumulant4_paired(&m, 5, 0),
            Err(Error::IndexOutOfRange { index: 5, k: 2 })
        ));
    }

    #[test]
    fn log_mgf_basics() {
        let m = model(&[0.2, 0.3, 0.5], 7);
        assert!(log_mgf(&m, &[0.0, 0.0, 0.0]).unwrap().abs() < 1e-12);
        assert!(matches!(
            log_mgf(&m, &[0.0, 0.0]),
            Err(Error::DimensionMismatch {
                expected: 3,
                got: 2
            })
        ));
        // Large arguments stay finite thanks to the max shift.
        let big = log_mgf(&m, &[1e4, -1e4, 3e3]).unwrap();
        assert!(big.is_finite());
    }

    #[test]
    fn bruteforce_matches_hand_values() {
        let uniform5 = model(&[0.2; 5], 20);
        assert!((b_bruteforce(&uniform5).unwrap() + 0.05).abs() < 1e-14);
        assert!((c_bruteforce(&uniform5).unwrap() - 0.05).abs() < 1e-14);

        let m = model(&[0.2, 0.8], 10);
        assert!((b_bruteforce(&m).unwrap() - 0.003125).abs() < 1e-14);
        assert!((c_bruteforce(&m).unwrap() - 0.046875).abs() < 1e-14);
    }

    #[test]
    fn closed_forms_match_hand_values() {
        let uniform5 = model(&[0.2; 5], 20);
        assert!((b_closed_form(&uniform5) + 0.05).abs() < 1e-15);
        assert!((c_closed_form(&uniform5) - 0.05).abs() < 1e-15);

        let m = model(&[0.2, 0.8], 10);
        assert!((b_closed_form(&m) - 0.003125).abs() < 1e-15);
        assert!((c_closed_form(&m) - 0.046875).abs() < 1e-15);
    }

    #[test]
    fn figure_regime_coefficients_from_q() {
        // k=15, n=10 with Q chosen so that B = 0.31: C must come out near
        // the reported 2.62 (exact value 628/240).
        let q: f64 = 8.0 * 10.0 * 0.31 + 225.0 + 30.0 - 2.0;
        assert!((q - 277.8).abs() < 1e-12);
        let co = CorrectionCoefficients::from_q(q, 15, 10).unwrap();
        assert!((co.b - 0.31).abs() < 1e-12);
        assert!((co.c - 628.0 / 240.0).abs() < 1e-12);
        assert!((co.c - 2.62).abs() < 0.005);
        assert!(!co.valid);
        assert!((co.threshold - 2.25).abs() < 1e-15);

        // k=15, n=15 with B = 0.085: C near the reported 1.54, valid.
        let q = 8.0 * 15.0 * 0.085 + 225.0 + 30.0 - 2.0;
        let co = CorrectionCoefficients::from_q(q, 15, 15).unwrap();
        assert!((co.c - 555.0 / 360.0).abs() < 1e-12);
        assert!((co.c - 1.54).abs() < 0.005);
        assert!(co.valid);
    }

    #[test]
    fn coefficients_flag_uniform_case_valid() {
        let co = coefficients(&model(&[0.2; 5], 20));
        assert!((co.b + 0.05).abs() < 1e-15);
        assert!((co.c - 0.05).abs() < 1e-15);
        assert!((co.q - 25.0).abs() < 1e-12);
        assert!(co.valid);
        assert!((co.threshold - 0.75).abs() < 1e-15);
        assert_eq!((co.k, co.n), (5, 20));
    }

    #[test]
    fn bruteforce_is_capped() {
        let k = BRUTEFORCE_MAX_K + 1;
        let probs = vec![1.0 / k as f64; k];
        let m = CategoryModel::new_lenient(&probs, 50).unwrap();
        assert!(matches!(
            b_bruteforce(&m),
            Err(Error::BruteForceTooLarge { .. })
        ));
        assert!(matches!(
            c_bruteforce(&m),
            Err(Error::BruteForceTooLarge { .. })
        ));
    }

    #[test]
    fn uniform_reductions_spot_check() {
        for k in [2usize, 5, 11, 20] {
            for n in [5u64, 20, 100] {
                let m = model(&vec![1.0 / k as f64; k], n);
                let kf = k as f64;
                let nf = n as f64;
                let b_want = -(kf - 1.0) / (4.0 * nf);
                let c_want = (kf - 1.0) * (kf - 2.0) / (12.0 * nf);
                assert!(
                    (b_closed_form(&m) - b_want).abs() <= 1e-14 * b_want.abs(),
                    "B at k={k} n={n}"
                );
                assert!(
                    (c_closed_form(&m) - c_want).abs() <= 1e-14 * (1.0 + c_want.abs()),
                    "C at k={k} n={n}"
                );
            }
        }
    }

    fn arb_model() -> impl Strategy<Value = CategoryModel> {
        (prop::collection::vec(0.05f64..1.0, 2..=9), 1u64..100).prop_map(|(raw, n)| {
            let sum: f64 = raw.iter().sum();
            let probs: Vec<f64> = raw.iter().map(|w| w / sum).collect();
            CategoryModel::new_lenient(&probs, n).unwrap()
        })
    }

    proptest! {
        #[test]
        fn cumulant3_is_permutation_symmetric(
            m in arb_model(),
            i in 0usize..9,
            j in 0usize..9,
            l in 0usize..9,
        ) {
            let k = m.k();
            let (i, j, l) = (i % k, j % k, l % k);
            let base = cumulant3(&m, i, j, l).unwrap();
            for (a, b, c) in [(i, l, j), (j, i, l), (j, l, i), (l, i, j), (l, j, i)] {
                prop_assert_eq!(cumulant3(&m, a, b, c).unwrap(), base);
            }
            prop_assert_eq!(
                cumulant4_paired(&m, i, j).unwrap(),
                cumulant4_paired(&m, j, i).unwrap()
            );
        }

        #[test]
        fn bruteforce_agrees_with_closed_forms(m in arb_model()) {
            let b_slow = b_bruteforce(&m).unwrap();
            let b_fast = b_closed_form(&m);
            prop_assert!(
                (b_slow - b_fast).abs() <= 1e-12 * (1.0 + b_fast.abs()),
                "B: {b_slow} vs {b_fast}"
            );
            let c_slow = c_bruteforce(&m).unwrap();
            let c_fast = c_closed_form(&m);
            prop_assert!(
                (c_slow - c_fast).abs() <= 1e-12 * (1.0 + c_fast.abs()),
                "C: {c_slow} vs {c_fast}"
            );
        }

        #[test]
        fn q_dominates_k_squared(m in arb_model()) {
            let co = coefficients(&m);
            let k2 = (m.k() * m.k()) as f64;
            prop_assert!(co.q >= k2 - 1e-9 * k2);
            // C is nonnegative as a consequence.
            prop_assert!(co.c >= 0.0);
        }
    }
}
