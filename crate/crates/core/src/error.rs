//! Error type shared across the crate.

use std::fmt;

/// Everything that can go wrong constructing models or evaluating the
/// corrected distributions.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A category probability was zero, negative, NaN, or >= 1.
    NonPositiveProbability { index: usize, value: f64 },
    /// Probabilities do not sum to 1 within the allowed tolerance.
    SumNotOne { sum: f64, tolerance: f64 },
    /// Fewer than two categories.
    TooFewCategories { k: usize },
    /// Sample size must be a positive integer.
    NonPositiveSampleSize,
    /// A vector had the wrong length for the model.
    DimensionMismatch { expected: usize, got: usize },
    /// Observed counts do not sum to the model's sample size.
    CountSumMismatch { expected: u64, got: u64 },
    /// A category index was not in 0..k.
    IndexOutOfRange { index: usize, k: usize },
    /// An argument was outside the mathematical domain of a function.
    Domain(String),
    /// The correction coefficients exceed the validity threshold and
    /// `force` was not requested.
    Validity { b: f64, c: f64, threshold: f64 },
    /// Root bracketing failed; no critical value exists in the search range.
    NoRootInBracket,
    /// An iterative routine failed to converge.
    ConvergenceFailure(&'static str),
    /// Exact enumeration would visit more count vectors than the cap allows.
    TooManyOutcomes { outcomes: u128, limit: u128 },
    /// The O(k^3) brute-force cumulant sums are capped at moderate k.
    BruteForceTooLarge { k: usize, limit: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonPositiveProbability { index, value } => write!(
                f,
                "probability at index {index} is {value}; each must lie in (0, 1)"
            ),
            Error::SumNotOne { sum, tolerance } => write!(
                f,
                "probabilities sum to {sum}, not 1 (tolerance {tolerance})"
            ),
            Error::TooFewCategories { k } => {
                write!(f, "need at least 2 categories, got {k}")
            }
            Error::NonPositiveSampleSize => write!(f, "sample size must be at least 1"),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "expected {expected} entries, got {got}")
            }
            Error::CountSumMismatch { expected, got } => {
                write!(f, "counts sum to {got}, expected sample size {expected}")
            }
            Error::IndexOutOfRange { index, k } => {
                write!(f, "category index {index} out of range for k = {k}")
            }
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Validity { b, c, threshold } => write!(
                f,
                "correction out of its validity range: B = {} and C = {} \
                 must not exceed {} in magnitude",
                crate::sig12(*b),
                crate::sig12(*c),
                crate::sig12(*threshold)
            ),
            Error::NoRootInBracket => {
                write!(f, "critical-value search failed to bracket a root")
            }
            Error::ConvergenceFailure(what) => {
                write!(f, "{what} failed to converge")
            }
            Error::TooManyOutcomes { outcomes, limit } => write!(
                f,
                "exact enumeration needs {outcomes} count vectors, cap is {limit}"
            ),
            Error::BruteForceTooLarge { k, limit } => write!(
                f,
                "brute-force cumulant sums are capped at k = {limit}, got k = {k}"
            ),
        }
    }
}

impl std::error::Error for Error {}
