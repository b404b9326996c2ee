//! Seed-deterministic Monte Carlo simulation of the null distribution of
//! the Pearson statistic, and its comparison against the plain and
//! corrected chi-square approximations.
//!
//! Determinism contract: sample number i is generated from its own random
//! substream derived from (seed, i) alone, so the worker count partitions
//! the work without ever changing the output. The final vector is sorted,
//! making the result a pure function of (model, samples, seed).

use crate::correction::CorrectedDistribution;
use crate::cumulants::{coefficients, CorrectionCoefficients};
use crate::error::Error;
use crate::model::{CategoryModel, ObservedCounts};
use rand_chacha::ChaCha8Rng;
use rand_core::{Rng, SeedableRng};

/// A fresh generator for one sample: the 256-bit key is expanded from
/// (seed, index) by a splitmix64 chain, so distinct samples get distinct,
/// well-mixed keys no matter how the work is partitioned.
fn substream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
    let mut state = seed ^ index.wrapping_mul(GOLDEN);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        state = state.wrapping_add(GOLDEN);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        chunk.copy_from_slice(&z.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

fn unit_f64(bits: u64) -> f64 {
    // 53 uniform bits in [0, 1).
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Alias-method sampler for one categorical draw in O(1).
#[derive(Debug, Clone)]
pub struct MultinomialSampler {
    threshold: Vec<f64>,
    alias: Vec<usize>,
}

impl MultinomialSampler {
    /// Builds the alias table (Vose's construction, deterministic).
    pub fn new(model: &CategoryModel) -> Self {
        let k = model.k();
        let mut scaled: Vec<f64> = model.probs().iter().map(|p| p * k as f64).collect();
        let mut threshold = vec![1.0; k];
        let mut alias: Vec<usize> = (0..k).collect();
        let mut small: Vec<usize> = Vec::with_capacity(k);
        let mut large: Vec<usize> = Vec::with_capacity(k);
        for (i, &s) in scaled.iter().enumerate() {
            if s < 1.0 {
                small.push(i);
            } else {
                large.push(i);
            }
        }
        while let (Some(s), Some(l)) = (small.pop(), large.pop()) {
            threshold[s] = scaled[s];
            alias[s] = l;
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            if scaled[l] < 1.0 {
                small.push(l);
            } else {
                large.push(l);
            }
        }
        // Whatever remains on either stack has weight 1 up to rounding;
        // the defaults (threshold 1, self-alias) already handle it.
        Self { threshold, alias }
    }

    /// One categorical draw; consumes exactly two generator outputs.
    pub fn sample_index(&self, rng: &mut impl Rng) -> usize {
        let k = self.threshold.len();
        let column = ((rng.next_u64() as u128 * k as u128) >> 64) as usize;
        if unit_f64(rng.next_u64()) < self.threshold[column] {
            column
        } else {
            self.alias[column]
        }
    }

    /// n categorical draws aggregated into counts.
    pub fn sample_counts_into(&self, n: u64, rng: &mut impl Rng, counts: &mut [u64]) {
        counts.fill(0);
        for _ in 0..n {
            counts[self.sample_index(rng)] += 1;
        }
    }
}

/// One multinomial draw from the model.
pub fn sample_counts(model: &CategoryModel, rng: &mut impl Rng) -> ObservedCounts {
    let sampler = MultinomialSampler::new(model);
    let mut counts = vec![0u64; model.k()];
    sampler.sample_counts_into(model.n(), rng, &mut counts);
    ObservedCounts::new(&counts).expect("k >= 2 by model invariant")
}

/// The sorted simulated values of T.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    sorted_t: Vec<f64>,
    sample_count: u64,
    seed: u64,
}

impl EmpiricalDistribution {
    pub fn sorted_t(&self) -> &[f64] {
        &self.sorted_t
    }

    pub fn sample_count(&self) -> u64 {
        self.sample_count
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Fraction of simulated values at or below u.
    pub fn cdf(&self, u: f64) -> f64 {
        let below = self.sorted_t.partition_point(|&t| t <= u);
        below as f64 / self.sorted_t.len() as f64
    }

    pub fn mean(&self) -> f64 {
        self.sorted_t.iter().sum::<f64>() / self.sorted_t.len() as f64
    }
}

/// Simulates `samples` values of T. Bit-identical output for a fixed
/// (model, samples, seed), independent of `workers`.
pub fn simulate(
    model: &CategoryModel,
    samples: u64,
    seed: u64,
    workers: usize,
) -> Result<EmpiricalDistribution, Error> {
    if samples == 0 {
        return Err(Error::Domain("need at least 1 sample".into()));
    }
    let sampler = MultinomialSampler::new(model);
    let n = model.n();
    let k = model.k();
    let np: Vec<f64> = model.probs().iter().map(|p| p * n as f64).collect();

    let total = samples as usize;
    let mut t_values = vec![0.0f64; total];
    let workers = workers.max(1).min(total);
    let chunk = total.div_ceil(workers);

    std::thread::scope(|scope| {
        let sampler = &sampler;
        let np = &np;
        let mut rest: &mut [f64] = &mut t_values;
        let mut first_index = 0u64;
        while !rest.is_empty() {
            let len = rest.len().min(chunk);
            let (head, tail) = rest.split_at_mut(len);
            rest = tail;
            let start = first_index;
            first_index += len as u64;
            scope.spawn(move || {
                let mut counts = vec![0u64; k];
                for (offset, slot) in head.iter_mut().enumerate() {
                    let mut rng = substream_rng(seed, start + offset as u64);
                    sampler.sample_counts_into(n, &mut rng, &mut counts);
                    let mut t = 0.0;
                    for (&x, &e) in counts.iter().zip(np) {
                        let d = x as f64 - e;
                        t += d * d / e;
                    }
                    *slot = t;
                }
            });
        }
    });

    t_values.sort_unstable_by(f64::total_cmp);
    Ok(EmpiricalDistribution {
        sorted_t: t_values,
        sample_count: samples,
        seed,
    })
}

/// One rejection-rate row of a comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailError {
    pub alpha: f64,
    /// Fraction of simulated T above the plain chi-square critical value.
    pub plain_rate: f64,
    /// Fraction above the corrected critical value.
    pub corrected_rate: f64,
}

/// How the plain and corrected approximations each fit the simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    /// The coefficients behind the corrected curve; `valid` flags whether
    /// the correction is inside its trust region.
    pub coefficients: CorrectionCoefficients,
    /// sup over the grid of |empirical - plain chi-square| CDF distance.
    pub sup_dist_plain: f64,
    /// sup over the grid of |empirical - corrected| CDF distance.
    pub sup_dist_corrected: f64,
    /// Rejection rates at the 10%, 5%, and 1% critical values.
    pub tail_errors: Vec<TailError>,
    /// The 201 evaluation points, 0 to the 0.9999 chi-square quantile.
    pub grid: Vec<f64>,
}

const TAIL_ALPHAS: [f64; 3] = [0.10, 0.05, 0.01];

/// Measures both approximations against the simulation. Runs even when
/// the validity rule is violated (critical values are force-solved); the
/// violation is visible in `coefficients.valid`.
pub fn compare(
    empirical: &EmpiricalDistribution,
    model: &CategoryModel,
) -> Result<ComparisonReport, Error> {
    let co = coefficients(model);
    let corrected = CorrectedDistribution::from_coefficients(&co)?;
    let chi = corrected.chi_square();

    let upper = chi.quantile(0.9999)?;
    let grid: Vec<f64> = (0..=200).map(|i| upper * i as f64 / 200.0).collect();

    let mut sup_plain: f64 = 0.0;
    let mut sup_corrected: f64 = 0.0;
    for &u in &grid {
        let e = empirical.cdf(u);
        sup_plain = sup_plain.max((e - chi.cdf(u)?).abs());
        sup_corrected = sup_corrected.max((e - corrected.cdf(u)?).abs());
    }

    let mut tail_errors = Vec::with_capacity(TAIL_ALPHAS.len());
    for alpha in TAIL_ALPHAS {
        let plain_crit = chi.quantile(1.0 - alpha)?;
        let corrected_crit = corrected.critical(alpha, true)?;
        tail_errors.push(TailError {
            alpha,
            plain_rate: 1.0 - empirical.cdf(plain_crit),
            corrected_rate: 1.0 - empirical.cdf(corrected_crit),
        });
    }

    Ok(ComparisonReport {
        coefficients: co,
        sup_dist_plain: sup_plain,
        sup_dist_corrected: sup_corrected,
        tail_errors,
        grid,
    })
}

/// Density-normalized histogram of the simulation over [0, upper]:
/// sum of density * bin_width equals the fraction of samples <= upper.
pub fn histogram(
    empirical: &EmpiricalDistribution,
    bins: usize,
    upper: f64,
) -> Result<Vec<(f64, f64)>, Error> {
    if bins == 0 {
        return Err(Error::Domain("need at least 1 bin".into()));
    }
    if !(upper > 0.0) {
        return Err(Error::Domain(format!(
            "histogram upper bound must be positive, got {upper}"
        )));
    }
    let width = upper / bins as f64;
    let mut counts = vec![0u64; bins];
    for &t in empirical.sorted_t() {
        if t > upper {
            break;
        }
        let idx = ((t / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let total = empirical.sample_count() as f64;
    Ok(counts
        .iter()
        .enumerate()
        .map(|(i, &c)| ((i as f64 + 0.5) * width, c as f64 / (total * width)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(probs: &[f64], n: u64) -> CategoryModel {
        CategoryModel::new_lenient(probs, n).unwrap()
    }

    #[test]
    fn alias_table_two_categories() {
        let sampler = MultinomialSampler::new(&model(&[0.25, 0.75], 1));
        // Scaled weights are (0.5, 1.5): category 0 keeps 0.5 of its
        // column and aliases to category 1.
        assert_eq!(sampler.threshold[0], 0.5);
        assert_eq!(sampler.alias[0], 1);
        assert_eq!(sampler.threshold[1], 1.0);
    }

    #[test]
    fn one_big_draw_lands_in_the_binomial_band() {
        // Flagged statistical check: a fair two-category draw with n = 1e6
        // has standard error 5e-4, so a 6-sigma band is [0.497, 0.503].
        let m = model(&[0.5, 0.5], 1_000_000);
        let mut rng = substream_rng(42, 0);
        let obs = sample_counts(&m, &mut rng);
        let frac = obs.counts()[0] as f64 / 1e6;
        assert!((0.497..=0.503).contains(&frac), "fraction {frac}");
        assert_eq!(obs.total(), 1_000_000);
    }

    #[test]
    fn simulate_is_deterministic_and_worker_independent() {
        let m = model(&[0.2, 0.3, 0.5], 7);
        let a = simulate(&m, 500, 9, 1).unwrap();
        let b = simulate(&m, 500, 9, 1).unwrap();
        let c = simulate(&m, 500, 9, 3).unwrap();
        let d = simulate(&m, 500, 9, 64).unwrap();
        assert_eq!(a.sorted_t(), b.sorted_t());
        assert_eq!(a.sorted_t(), c.sorted_t());
        assert_eq!(a.sorted_t(), d.sorted_t());
        // A different seed must actually change the draw.
        let e = simulate(&m, 500, 10, 1).unwrap();
        assert_ne!(a.sorted_t(), e.sorted_t());
        assert_eq!(a.sample_count(), 500);
        assert_eq!(a.seed(), 9);
    }

    #[test]
    fn simulate_rejects_zero_samples() {
        let m = model(&[0.5, 0.5], 3);
        assert!(simulate(&m, 0, 1, 1).is_err());
        let one = simulate(&m, 1, 1, 8).unwrap();
        assert_eq!(one.sorted_t().len(), 1);
    }

    #[test]
    fn sample_mean_approaches_dof() {
        // Flagged statistical check, 5-sigma band around k - 1.
        let m = model(&[0.25; 4], 10);
        let sim = simulate(&m, 20_000, 123, 4).unwrap();
        let band = 5.0 * (2.0 * 3.0f64).sqrt() / (20_000f64).sqrt();
        assert!((sim.mean() - 3.0).abs() < band, "mean {}", sim.mean());
    }

    #[test]
    fn uniform_simulation_respects_the_lattice() {
        let m = model(&[0.2; 5], 20);
        let sim = simulate(&m, 5_000, 7, 2).unwrap();
        let (min, max, step) = crate::exact::uniform_lattice(5, 20);
        for &t in sim.sorted_t() {
            assert!(t >= 0.0 && t <= max + 1e-9);
            let steps = (t - min) / step;
            let nearest = min + steps.round() * step;
            assert!((t - nearest).abs() < 1e-9, "value {t} off the lattice");
        }
    }

    #[test]
    fn empirical_cdf_order_statistics() {
        // T is discrete (k = 2, n = 11: at most 12 distinct values), so the
        // cdf at an order statistic counts the whole tie group.
        let m = model(&[0.3, 0.7], 11);
        let sim = simulate(&m, 1001, 3, 1).unwrap();
        assert_eq!(sim.cdf(f64::NEG_INFINITY), 0.0);
        assert_eq!(sim.cdf(sim.sorted_t()[0] - 1.0), 0.0);
        assert_eq!(sim.cdf(sim.sorted_t()[1000]), 1.0);
        for i in [100usize, 500, 900] {
            let at = sim.cdf(sim.sorted_t()[i]);
            assert!(at >= (i + 1) as f64 / 1001.0, "index {i}: cdf {at}");
        }
        assert!(sim.cdf(1.0) <= sim.cdf(2.0));
    }

    #[test]
    fn histogram_masses_add_up() {
        let m = model(&[0.5, 0.5], 2);
        // T takes value 0 with probability 1/2 and 2 with probability 1/2.
        let sim = simulate(&m, 4_000, 11, 2).unwrap();
        let hist = histogram(&sim, 2, 2.0).unwrap();
        assert_eq!(hist.len(), 2);
        let mass: f64 = hist.iter().map(|&(_, d)| d * 1.0).sum();
        // Every sample is <= 2, so total mass is exactly 1.
        assert!((mass - 1.0).abs() < 1e-12);
        assert!((hist[0].0 - 0.5).abs() < 1e-12);
        assert!((hist[1].0 - 1.5).abs() < 1e-12);
        // All mass in one bin: density 1/width there, 0 elsewhere.
        let tight = histogram(&sim, 1, 60.0).unwrap();
        assert!((tight[0].1 - 1.0 / 60.0).abs() < 1e-12);

        assert!(histogram(&sim, 0, 2.0).is_err());
        assert!(histogram(&sim, 2, 0.0).is_err());
    }

    #[test]
    fn compare_smoke() {
        let m = model(&[1.0 / 3.0; 3], 12);
        let sim = simulate(&m, 2_000, 5, 2).unwrap();
        let report = compare(&sim, &m).unwrap();
        assert_eq!(report.grid.len(), 201);
        assert_eq!(report.grid[0], 0.0);
        assert!(report.sup_dist_plain >= 0.0 && report.sup_dist_plain <= 1.0);
        assert!(report.sup_dist_corrected >= 0.0 && report.sup_dist_corrected <= 1.0);
        assert_eq!(report.tail_errors.len(), 3);
        for te in &report.tail_errors {
            assert!((0.0..=1.0).contains(&te.plain_rate));
            assert!((0.0..=1.0).contains(&te.corrected_rate));
        }
        // Rejection regions shrink as alpha does.
        assert!(report.tail_errors[0].plain_rate >= report.tail_errors[2].plain_rate);
        assert!(report.coefficients.valid);
    }
}
