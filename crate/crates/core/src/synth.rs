//! Seeded synthetic data: random solver instances, simulated timing
//! counts and raw elapsed-time samples.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Gamma};

use crate::error_model::{
    category_probs, ModelError, RawTimingSamples, TimingObservations, TimingRecord,
};
use crate::solver::{Instance, SolverError};
use crate::GammaParams;

/// Random instance on a `rows x cols` grid scanned every `duration`
/// seconds: integer frequencies in `[0, max_freq]` (at least one positive),
/// error probabilities uniform in `[0, 1]`, times `duration * (j + k)`.
pub fn random_instance<R: Rng>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    max_freq: u64,
    duration: f64,
    epsilon: f64,
) -> Result<Instance<f64>, SolverError> {
    let m = rows * cols;
    let mut freqs: Vec<f64> = (0..m)
        .map(|_| rng.random_range(0..=max_freq) as f64)
        .collect();
    if freqs.iter().all(|f| *f == 0.0) {
        freqs[0] = 1.0;
    }
    let times = (1..=rows)
        .flat_map(|j| (1..=cols).map(move |k| duration * (j + k) as f64))
        .collect();
    let errors = (0..m).map(|_| rng.random::<f64>()).collect();
    Instance::from_parts(freqs, times, errors, epsilon)
}

/// Splits `trials` by `probs`, flooring and handing the remainder to the
/// largest fractional parts (lowest index first on ties).
pub fn expected_counts(probs: &[f64], trials: u64) -> Vec<u64> {
    let raw: Vec<f64> = probs.iter().map(|p| p * trials as f64).collect();
    let mut counts: Vec<u64> = raw.iter().map(|v| v.floor() as u64).collect();
    let assigned: u64 = counts.iter().sum();
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| {
        (raw[b] - raw[b].floor())
            .total_cmp(&(raw[a] - raw[a].floor()))
            .then(a.cmp(&b))
    });
    for &i in order
        .iter()
        .cycle()
        .take(trials.saturating_sub(assigned) as usize)
    {
        counts[i] += 1;
    }
    counts
}

/// One multinomial draw of `trials` over `probs`.
pub fn sample_counts<R: Rng>(rng: &mut R, probs: &[f64], trials: u64) -> Vec<u64> {
    let mut left = trials;
    let mut mass = 1.0;
    let mut counts = Vec::with_capacity(probs.len());
    for (i, &p) in probs.iter().enumerate() {
        let c = if i + 1 == probs.len() || mass <= 0.0 {
            left
        } else {
            let q = (p / mass).clamp(0.0, 1.0);
            Binomial::new(left, q)
                .expect("probability in [0, 1]")
                .sample(rng)
        };
        counts.push(c);
        left -= c;
        mass -= p;
    }
    counts
}

/// How simulated category counts are produced.
pub enum CountMode<'a, R> {
    /// Deterministic counts matching the model proportions.
    Expected,
    Sampled(&'a mut R),
}

/// Early/correct/miss counts for each `(duration, row, params)` condition.
pub fn simulate_timing<R: Rng>(
    conditions: &[(f64, usize, GammaParams)],
    trials: u64,
    mut mode: CountMode<'_, R>,
) -> Result<TimingObservations<f64>, ModelError> {
    let mut records = Vec::with_capacity(conditions.len());
    for &(duration, row, params) in conditions {
        let probs = category_probs(&params, duration, row)?.as_array();
        let c = match &mut mode {
            CountMode::Expected => expected_counts(&probs, trials),
            CountMode::Sampled(rng) => sample_counts(*rng, &probs, trials),
        };
        records.push(TimingRecord {
            duration,
            target_row: row,
            n_early: c[0],
            n_correct: c[1],
            n_miss: c[2],
        });
    }
    Ok(TimingObservations { records })
}

/// `count` elapsed times drawn from `params`.
pub fn sample_elapsed<R: Rng>(
    rng: &mut R,
    params: &GammaParams,
    duration: f64,
    row: usize,
    count: usize,
) -> RawTimingSamples<f64> {
    let dist = Gamma::new(params.kappa(), params.theta()).expect("validated parameters");
    RawTimingSamples {
        duration,
        target_row: row,
        elapsed: (0..count).map(|_| dist.sample(rng)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn expected_counts_conserve_total() {
        assert_eq!(expected_counts(&[0.5, 0.25, 0.25], 10), vec![5, 3, 2]);
        assert_eq!(
            expected_counts(&[1.0 / 3.0; 3], 100).iter().sum::<u64>(),
            100
        );
        assert_eq!(expected_counts(&[0.0, 1.0, 0.0], 7), vec![0, 7, 0]);
    }

    #[test]
    fn multinomial_conserves_total() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = sample_counts(&mut rng, &[0.2, 0.5, 0.3], 1000);
        assert_eq!(c.iter().sum::<u64>(), 1000);
        assert!(c[1] > 400 && c[1] < 600);
    }

    #[test]
    fn random_instance_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let inst = random_instance(&mut rng, 3, 3, 1000, 0.35, 0.5).unwrap();
        assert_eq!(inst.len(), 9);
        assert!((inst.times()[0] - 0.7).abs() < 1e-15);
        assert!((inst.times()[8] - 2.1).abs() < 1e-15);
    }
}
