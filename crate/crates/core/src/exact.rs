//! Exact finite-sample distribution of the Pearson statistic by full
//! multinomial enumeration. Desk-scale ground truth for the corrected
//! approximation.

use crate::error::Error;
use crate::model::CategoryModel;
use crate::sig12;
use crate::special::ln_gamma_unchecked;

/// Enumeration refuses to visit more count vectors than this.
pub const MAX_OUTCOMES: u128 = 10_000_000;

/// Number of count vectors enumerate_exact would visit: C(n+k-1, k-1).
/// Saturates at u128::MAX on overflow (far beyond any cap).
pub fn composition_count(k: usize, n: u64) -> u128 {
    let mut acc: u128 = 1;
    for i in 1..k as u128 {
        // acc is C(n+i-1, i-1); multiplying then dividing stays exact.
        match acc.checked_mul(n as u128 + i) {
            Some(v) => acc = v / i,
            None => return u128::MAX,
        }
    }
    acc
}

/// The discrete distribution of T: atoms (t, prob) with strictly
/// increasing t and probabilities summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDistribution {
    model: CategoryModel,
    atoms: Vec<(f64, f64)>,
    cumulative: Vec<f64>,
}

impl ExactDistribution {
    pub fn model(&self) -> &CategoryModel {
        &self.model
    }

    /// Atoms (t, prob) sorted by strictly increasing t.
    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    /// Right-continuous step function: total probability of atoms with
    /// t <= u.
    pub fn cdf(&self, u: f64) -> f64 {
        let idx = self.atoms.partition_point(|&(t, _)| t <= u);
        if idx == 0 {
            0.0
        } else {
            self.cumulative[idx - 1].min(1.0)
        }
    }

    /// Exact mean of T; equals k - 1 for every model.
    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|&(t, p)| t * p).sum()
    }
}

/// Enumerates every count vector summing to n, in lexicographically
/// decreasing order, computing each probability in log space. Outcomes
/// with equal T (after rounding to 12 significant digits) are merged into
/// one atom, their probabilities accumulated largest-first.
pub fn enumerate_exact(model: &CategoryModel) -> Result<ExactDistribution, Error> {
    let k = model.k();
    let n = model.n();
    let outcomes = composition_count(k, n);
    if outcomes > MAX_OUTCOMES {
        return Err(Error::TooManyOutcomes {
            outcomes,
            limit: MAX_OUTCOMES,
        });
    }

    // Log-factorials: tabulated when small, computed directly otherwise.
    let table: Option<Vec<f64>> = if n <= 100_000 {
        Some(
            (0..=n)
                .map(|i| ln_gamma_unchecked(i as f64 + 1.0))
                .collect(),
        )
    } else {
        None
    };
    let ln_fact = |x: u64| match &table {
        Some(t) => t[x as usize],
        None => ln_gamma_unchecked(x as f64 + 1.0),
    };

    let ln_p: Vec<f64> = model.probs().iter().map(|p| p.ln()).collect();
    let np: Vec<f64> = model.probs().iter().map(|p| p * n as f64).collect();

    let mut entries: Vec<(f64, f64)> = Vec::with_capacity(outcomes as usize);
    let mut x = vec![0u64; k];
    x[0] = n;
    loop {
        let mut log_pmf = ln_fact(n);
        let mut t = 0.0;
        for (i, &xi) in x.iter().enumerate() {
            log_pmf += xi as f64 * ln_p[i] - ln_fact(xi);
            let d = xi as f64 - np[i];
            t += d * d / np[i];
        }
        entries.push((sig12(t), log_pmf.exp()));

        // Advance the composition odometer: move one unit from the
        // rightmost positive coordinate before the last slot, and sweep
        // everything after it back.
        if x[k - 1] == n {
            break;
        }
        let tail = x[k - 1];
        let mut j = k - 2;
        while x[j] == 0 {
            j -= 1;
        }
        x[j] -= 1;
        x[k - 1] = 0;
        x[j + 1] += tail + 1;
    }

    // Merge equal-T outcomes; within an atom, add probabilities from
    // largest to smallest for a deterministic, well-conditioned sum.
    entries.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    let mut atoms: Vec<(f64, f64)> = Vec::new();
    for (t, p) in entries {
        match atoms.last_mut() {
            Some(last) if last.0 == t => last.1 += p,
            _ => atoms.push((t, p)),
        }
    }

    let mut cumulative = Vec::with_capacity(atoms.len());
    let mut total = 0.0;
    for &(_, p) in &atoms {
        total += p;
        cumulative.push(total);
    }

    Ok(ExactDistribution {
        model: model.clone(),
        atoms,
        cumulative,
    })
}

/// The arithmetic progression containing the support of T under uniform
/// probabilities: from k - n to n(k - 1) in steps of 2k/n. Not every
/// lattice point is attainable (and points below 0 never are); the support
/// is a subset.
pub fn uniform_lattice(k: usize, n: u64) -> (f64, f64, f64) {
    assert!(k >= 2, "need at least 2 categories");
    assert!(n >= 1, "need a positive sample size");
    let kf = k as f64;
    let nf = n as f64;
    (kf - nf, nf * (kf - 1.0), 2.0 * kf / nf)
}
