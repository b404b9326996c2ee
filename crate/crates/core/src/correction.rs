//! The corrected density, distribution function, p-values, and critical
//! values of the Pearson statistic.
//!
//! The plain chi-square approximation is refined by two polynomial terms
//! weighted by B and C:
//!
//!   f_T(t) = chi2_pdf(t) * (1 + B q_B(t) + C q_C(t))
//!
//! with d = k - 1 and
//!
//!   q_B(t) = t^2/(d(d+2)) - 2t/d + 1
//!   q_C(t) = t^3/(d(d+2)(d+4)) - 3t^2/(d(d+2)) + 3t/d - 1
//!
//! Both polynomials have zero mean and zero first moment against the
//! chi-square weight, so the correction preserves total mass 1 and mean d.
//! The antiderivative collapses to a closed form, giving the corrected
//! distribution function
//!
//!   F_T(u) = chi2_cdf(u) - 2 chi2_pdf(u) (u/d) [ B (u/(d+2) - 1)
//!          + C (u^2/((d+2)(d+4)) - 2u/(d+2) + 1) ]
//!
//! For large |B| or |C| the corrected density can dip negative and F_T can
//! be locally nonmonotone; values are returned raw, and the 0.15k validity
//! rule gates critical-value solving unless explicitly forced.

use crate::cumulants::{coefficients, validity_threshold, CorrectionCoefficients};
use crate::error::Error;
use crate::model::{t_statistic, CategoryModel, ObservedCounts};
use crate::special::ChiSquare;

/// A chi-square distribution with k - 1 degrees of freedom perturbed by
/// correction coefficients B and C.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectedDistribution {
    k: usize,
    b: f64,
    c: f64,
    chi: ChiSquare,
}

impl CorrectedDistribution {
    pub fn new(k: usize, b: f64, c: f64) -> Result<Self, Error> {
        if k < 2 {
            return Err(Error::TooFewCategories { k });
        }
        if !b.is_finite() || !c.is_finite() {
            return Err(Error::Domain(format!(
                "correction coefficients must be finite, got B = {b} and C = {c}"
            )));
        }
        Ok(Self {
            k,
            b,
            c,
            chi: ChiSquare::new(k - 1)?,
        })
    }

    pub fn from_coefficients(co: &CorrectionCoefficients) -> Result<Self, Error> {
        Self::new(co.k, co.b, co.c)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn dof(&self) -> usize {
        self.k - 1
    }

    /// The plain chi-square this distribution perturbs.
    pub fn chi_square(&self) -> ChiSquare {
        self.chi
    }

    pub fn threshold(&self) -> f64 {
        validity_threshold(self.k)
    }

    /// Whether |B| and |C| respect the 0.15k rule of thumb.
    pub fn is_valid(&self) -> bool {
        let thr = self.threshold();
        self.b.abs() <= thr && self.c.abs() <= thr
    }

    // The two correction polynomials at t.
    fn polynomials(&self, t: f64) -> (f64, f64) {
        let d = (self.k - 1) as f64;
        let qb = t * t / (d * (d + 2.0)) - 2.0 * t / d + 1.0;
        let qc = t * t * t / (d * (d + 2.0) * (d + 4.0)) - 3.0 * t * t / (d * (d + 2.0))
            + 3.0 * t / d
            - 1.0;
        (qb, qc)
    }

    /// Corrected density at t >= 0. May be negative in the far tail for
    /// large |B|, |C|; returned as-is.
    pub fn pdf(&self, t: f64) -> Result<f64, Error> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!(
                "corrected density needs t >= 0, got {t}"
            )));
        }
        let (qb, qc) = self.polynomials(t);
        Ok(self.chi.pdf(t)? * (1.0 + self.b * qb + self.c * qc))
    }

    /// Corrected distribution function at u >= 0, returned raw: no
    /// clamping, so excursions outside [0, 1] are visible to callers.
    pub fn cdf(&self, u: f64) -> Result<f64, Error> {
        if !(u >= 0.0) {
            return Err(Error::Domain(format!(
                "corrected distribution needs u >= 0, got {u}"
            )));
        }
        if u == 0.0 {
            return Ok(0.0);
        }
        let d = (self.k - 1) as f64;
        let bracket = self.b * (u / (d + 2.0) - 1.0)
            + self.c * (u * u / ((d + 2.0) * (d + 4.0)) - 2.0 * u / (d + 2.0) + 1.0);
        Ok(self.chi.cdf(u)? - 2.0 * self.chi.pdf(u)? * (u / d) * bracket)
    }

    /// Right-tail p-value 1 - cdf(t), before clamping.
    pub fn pvalue_raw(&self, t_obs: f64) -> Result<f64, Error> {
        Ok(1.0 - self.cdf(t_obs)?)
    }

    /// Right-tail p-value clamped into [0, 1].
    pub fn pvalue(&self, t_obs: f64) -> Result<f64, Error> {
        Ok(self.pvalue_raw(t_obs)?.clamp(0.0, 1.0))
    }

    /// The u solving cdf(u) = 1 - alpha, located near the plain quantile.
    ///
    /// Refuses to solve when the validity rule is violated, unless
    /// `force` is set. The root is bracketed around the plain chi-square
    /// quantile (half-width starting at 2 and doubling up to 6 times),
    /// then polished by Newton steps safeguarded by bisection.
    pub fn critical(&self, alpha: f64, force: bool) -> Result<f64, Error> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!(
                "alpha must be in (0, 1), got {alpha}"
            )));
        }
        if !force && !self.is_valid() {
            return Err(Error::Validity {
                b: self.b,
                c: self.c,
                threshold: self.threshold(),
            });
        }
        let target = 1.0 - alpha;
        let center = self.chi.quantile(target)?;

        let mut delta = 2.0;
        let mut bracket = None;
        for _ in 0..7 {
            let lo = (center - delta).max(0.0);
            let hi = center + delta;
            let flo = self.cdf(lo)? - target;
            let fhi = self.cdf(hi)? - target;
            if flo == 0.0 {
                return Ok(lo);
            }
            if fhi == 0.0 {
                return Ok(hi);
            }
            if flo.signum() != fhi.signum() {
                bracket = Some((lo, hi, flo));
                break;
            }
            delta *= 2.0;
        }
        let (mut lo, mut hi, mut flo) = bracket.ok_or(Error::NoRootInBracket)?;

        let mut x = if center > lo && center < hi {
            center
        } else {
            0.5 * (lo + hi)
        };
        for _ in 0..100 {
            let f = self.cdf(x)? - target;
            if f.abs() <= 1e-11 {
                return Ok(x);
            }
            if f.signum() == flo.signum() {
                lo = x;
                flo = f;
            } else {
                hi = x;
            }
            let slope = self.pdf(x)?;
            let newton = x - f / slope;
            let next = if newton.is_finite() && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - x).abs() <= 1e-14 * (1.0 + x.abs()) {
                // Stagnated; accept only if already within the contract.
                if f.abs() <= 1e-9 {
                    return Ok(next);
                }
                return Err(Error::ConvergenceFailure("corrected critical value"));
            }
            x = next;
        }
        Err(Error::ConvergenceFailure("corrected critical value"))
    }
}

/// Everything a goodness-of-fit run reports.
#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    pub t_value: f64,
    pub dof: usize,
    /// 1 - chi2_cdf(T), the uncorrected right-tail p-value.
    pub p_plain: f64,
    /// Corrected p-value, clamped into [0, 1].
    pub p_corrected: f64,
    pub b: f64,
    pub c: f64,
    /// Whether B and C respect the 0.15k rule.
    pub validity: bool,
    pub warnings: Vec<String>,
}

/// Probabilities this small inflate Q (and with it B and C) enough to
/// deserve a warning.
pub const TINY_PROBABILITY: f64 = 1e-6;

/// Runs the corrected goodness-of-fit test: computes T, the coefficients,
/// and both p-values. Alpha is validated here but the decision is left to
/// the caller; the report carries everything needed for it.
pub fn run_test(
    model: &CategoryModel,
    obs: &ObservedCounts,
    alpha: f64,
) -> Result<TestReport, Error> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!(
            "alpha must be in (0, 1), got {alpha}"
        )));
    }
    let t = t_statistic(model, obs)?;
    let co = coefficients(model);
    let dist = CorrectedDistribution::from_coefficients(&co)?;

    let p_plain = dist.chi_square().sf(t)?;
    let raw = dist.pvalue_raw(t)?;
    let p_corrected = raw.clamp(0.0, 1.0);

    let mut warnings = Vec::new();
    if !co.valid {
        warnings.push(format!(
            "correction outside its validity range: B = {} and C = {} with threshold {}; \
             corrected results are unreliable",
            crate::sig12(co.b),
            crate::sig12(co.c),
            crate::sig12(co.threshold)
        ));
    }
    if model.min_prob() < TINY_PROBABILITY {
        warnings.push(format!(
            "smallest category probability {} is below {TINY_PROBABILITY}; \
             it inflates Q and with it the correction coefficients",
            crate::sig12(model.min_prob())
        ));
    }
    if (raw - p_corrected).abs() > 1e-6 {
        warnings.push(format!(
            "raw corrected p-value {} fell outside [0; 1] and was clamped to {}",
            crate::sig12(raw),
            crate::sig12(p_corrected)
        ));
    }

    Ok(TestReport {
        t_value: t,
        dof: model.k() - 1,
        p_plain,
        p_corrected,
        b: co.b,
        c: co.c,
        validity: co.valid,
        warnings,
    })
}
