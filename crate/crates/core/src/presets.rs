//! Ready-made probability vectors: uniform, geometric ladders, and four
//! named regimes used to exercise the correction from comfortably valid
//! to clearly out of its trust region.

use crate::error::Error;
use crate::model::CategoryModel;

/// k equal probabilities.
pub fn uniform(k: usize) -> Result<Vec<f64>, Error> {
    if k < 2 {
        return Err(Error::TooFewCategories { k });
    }
    Ok(vec![1.0 / k as f64; k])
}

/// k probabilities in geometric progression, normalized so the ratio of
/// the last to the first equals `ratio`.
pub fn geometric(k: usize, ratio: f64) -> Result<Vec<f64>, Error> {
    if k < 2 {
        return Err(Error::TooFewCategories { k });
    }
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(Error::Domain(format!(
            "geometric ratio must be positive and finite, got {ratio}"
        )));
    }
    let r = ratio.powf(1.0 / (k - 1) as f64);
    let mut probs: Vec<f64> = (0..k).map(|i| r.powi(i as i32)).collect();
    let sum: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= sum;
    }
    Ok(probs)
}

/// Named demonstration regimes: geometric models at small n where the
/// 1/n correction matters, ordered from mild to past the validity rule.
pub fn figure_regime(name: &str) -> Option<CategoryModel> {
    let (k, ratio, n) = match name {
        "fig1" => (5, 3.0, 20),
        "fig2" => (10, 5.0, 12),
        "fig3" => (15, 5.0, 10),
        "fig4" => (15, 4.0, 15),
        _ => return None,
    };
    let probs = geometric(k, ratio).expect("fixed arguments are valid");
    Some(CategoryModel::new_lenient(&probs, n).expect("geometric output is a valid model"))
}

pub const FIGURE_NAMES: [&str; 4] = ["fig1", "fig2", "fig3", "fig4"];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cumulants::coefficients;

    #[test]
    fn uniform_basics() {
        assert_eq!(uniform(4).unwrap(), vec![0.25; 4]);
        assert!(uniform(1).is_err());
    }

    #[test]
    fn geometric_endpoint_ratio() {
        for &(k, ratio) in &[(5usize, 3.0f64), (10, 5.0), (15, 4.0), (7, 0.25)] {
            let p = geometric(k, ratio).unwrap();
            assert_eq!(p.len(), k);
            let sum: f64 = p.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            assert!((p[k - 1] / p[0] - ratio).abs() < 1e-10 * ratio);
        }
    }

    #[test]
    fn geometric_ratio_one_is_uniform() {
        let p = geometric(6, 1.0).unwrap();
        for &x in &p {
            assert!((x - 1.0 / 6.0).abs() < 1e-15);
        }
    }

    #[test]
    fn geometric_rejects_bad_arguments() {
        assert!(geometric(1, 2.0).is_err());
        assert!(geometric(5, 0.0).is_err());
        assert!(geometric(5, -1.0).is_err());
        assert!(geometric(5, f64::INFINITY).is_err());
        assert!(geometric(5, f64::NAN).is_err());
    }

    #[test]
    fn regimes_have_the_expected_coefficients() {
        // Reference values computed independently with multi-precision
        // arithmetic from the closed forms.
        let cases = [
            ("fig1", -0.024990, 0.091683, true),
            ("fig2", 0.117843, 1.008905, true),
            ("fig3", 0.415853, 2.793088, false),
            ("fig4", 0.135918, 1.626531, true),
        ];
        for (name, b, c, valid) in cases {
            let m = figure_regime(name).unwrap();
            let co = coefficients(&m);
            assert!((co.b - b).abs() < 1e-5, "{name} B = {}", co.b);
            assert!((co.c - c).abs() < 1e-5, "{name} C = {}", co.c);
            assert_eq!(co.valid, valid, "{name} validity");
        }
    }

    #[test]
    fn unknown_regime_is_none() {
        assert!(figure_regime("fig9").is_none());
        assert!(figure_regime("").is_none());
        for name in FIGURE_NAMES {
            assert!(figure_regime(name).is_some());
        }
    }
}
