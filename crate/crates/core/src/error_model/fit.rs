//! Estimating Gamma parameters from trial data.

use crate::scalar::{count, lit, Real};

use super::special::ln_gamma;
use super::{
    category_probs, nelder_mead, CategoryProbs, GammaParams, ModelError, NelderMeadConfig,
};

/// Fits search `ln kappa` and `ln theta` inside `[-LOG_PARAM_BOX, LOG_PARAM_BOX]`.
pub const LOG_PARAM_BOX: f64 = 20.0;

/// Smallest raw-sample condition accepted by [`fit_gamma_samples`].
pub const MIN_RAW_SAMPLES: usize = 10;

/// Observed category counts for one (duration, target row) block of trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingRecord<T> {
    pub duration: T,
    pub target_row: usize,
    pub n_early: u64,
    pub n_correct: u64,
    pub n_miss: u64,
}

impl<T: Real> TimingRecord<T> {
    pub fn total(&self) -> u64 {
        self.n_early + self.n_correct + self.n_miss
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TimingObservations<T> {
    pub records: Vec<TimingRecord<T>>,
}

/// Fitting condition: cursor duration and target row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Condition<T> {
    pub duration: T,
    pub row: usize,
}

impl<T: Real> Condition<T> {
    pub fn matches(&self, duration: T, row: usize) -> bool {
        row == self.row
            && (duration - self.duration).abs()
                <= lit::<T>(1e-9) * self.duration.abs().max(T::one())
    }
}

impl<T: Real> TimingObservations<T> {
    /// Distinct conditions in first-appearance order.
    pub fn conditions(&self) -> Vec<Condition<T>> {
        let mut out: Vec<Condition<T>> = Vec::new();
        for r in &self.records {
            if !out.iter().any(|c| c.matches(r.duration, r.target_row)) {
                out.push(Condition {
                    duration: r.duration,
                    row: r.target_row,
                });
            }
        }
        out
    }

    /// Summed `[early, correct, miss]` counts for a condition.
    pub fn counts_for(&self, condition: &Condition<T>) -> [u64; 3] {
        self.records
            .iter()
            .filter(|r| condition.matches(r.duration, r.target_row))
            .fold([0; 3], |acc, r| {
                [acc[0] + r.n_early, acc[1] + r.n_correct, acc[2] + r.n_miss]
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport<T> {
    pub condition: Condition<T>,
    pub params: GammaParams<T>,
    /// Sum of squared differences between model and observed proportions.
    pub goodness: T,
    /// All observed mass sits in one category, or a log-parameter ended on
    /// the search box boundary. The parameters are then not identified.
    pub degenerate: bool,
    pub observed: CategoryProbs<T>,
    pub model: CategoryProbs<T>,
    pub trials: u64,
}

fn boxed<T: Real>(v: T) -> T {
    let b = lit::<T>(LOG_PARAM_BOX);
    v.max(-b).min(b)
}

fn on_box<T: Real>(v: T) -> bool {
    v.abs() >= lit::<T>(LOG_PARAM_BOX) - lit(1e-9)
}

/// Runs the simplex search twice, the second time restarting from the first
/// result, to recover from an early collapse.
fn minimize_twice<T, F>(
    mut objective: F,
    x0: &[T],
    config: &NelderMeadConfig<T>,
) -> Result<Vec<T>, ModelError>
where
    T: Real,
    F: FnMut(&[T]) -> T,
{
    let first = nelder_mead(&mut objective, x0, config)?;
    let second = nelder_mead(&mut objective, &first.x, config)?;
    Ok(if second.fx <= first.fx {
        second.x
    } else {
        first.x
    })
}

/// Least-squares fit of the category model to the observed proportions of
/// one condition. The search starts at `(2, D*j/2)`.
pub fn fit_gamma_counts<T: Real>(
    obs: &TimingObservations<T>,
    condition: Condition<T>,
) -> Result<FitReport<T>, ModelError> {
    let counts = obs.counts_for(&condition);
    let trials: u64 = counts.iter().sum();
    if trials == 0 {
        return Err(ModelError::NoDataForCondition {
            duration: condition.duration.to_f64().unwrap_or(f64::NAN),
            row: condition.row,
        });
    }
    if !(condition.duration > T::zero()) || condition.row == 0 {
        return Err(ModelError::Domain(
            "condition needs a positive duration and a 1-based row",
        ));
    }
    let total = count::<T>(trials);
    let observed = CategoryProbs {
        early: count::<T>(counts[0]) / total,
        correct: count::<T>(counts[1]) / total,
        miss: count::<T>(counts[2]) / total,
    };
    let (d, j) = (condition.duration, condition.row);

    let sse = |logp: &[T]| -> T {
        let Ok(params) = GammaParams::new(boxed(logp[0]).exp(), boxed(logp[1]).exp()) else {
            return T::infinity();
        };
        match category_probs(&params, d, j) {
            Ok(model) => model
                .as_array()
                .iter()
                .zip(observed.as_array())
                .map(|(m, o)| (*m - o) * (*m - o))
                .sum(),
            Err(_) => T::infinity(),
        }
    };

    let start = [
        lit::<T>(2.0).ln(),
        (d * T::from_usize(j).unwrap() / lit(2.0)).ln(),
    ];
    let config = NelderMeadConfig {
        max_iters: 5_000,
        tolerance: lit(1e-26),
        x_tolerance: lit(1e-10),
    };
    let best = minimize_twice(sse, &start, &config)?;
    let (lk, lt) = (boxed(best[0]), boxed(best[1]));
    let params = GammaParams::new(lk.exp(), lt.exp())?;
    let model = category_probs(&params, d, j)?;
    let goodness = model
        .as_array()
        .iter()
        .zip(observed.as_array())
        .map(|(m, o)| (*m - o) * (*m - o))
        .sum();
    Ok(FitReport {
        condition,
        params,
        goodness,
        degenerate: on_box(lk) || on_box(lt) || counts.iter().filter(|&&c| c > 0).count() == 1,
        observed,
        model,
        trials,
    })
}

/// Elapsed switch times recorded for one condition.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTimingSamples<T> {
    pub duration: T,
    pub target_row: usize,
    pub elapsed: Vec<T>,
}

/// Maximum-likelihood Gamma fit to raw elapsed times, started from the
/// method-of-moments estimate.
pub fn fit_gamma_samples<T: Real>(
    samples: &RawTimingSamples<T>,
) -> Result<GammaParams<T>, ModelError> {
    let xs = &samples.elapsed;
    if xs.len() < MIN_RAW_SAMPLES {
        return Err(ModelError::TooFewSamples {
            got: xs.len(),
            need: MIN_RAW_SAMPLES,
        });
    }
    if xs.iter().any(|x| !(*x > T::zero()) || !x.is_finite()) {
        return Err(ModelError::Domain("elapsed times must be positive"));
    }
    let n = T::from_usize(xs.len()).unwrap();
    let mean = xs.iter().copied().sum::<T>() / n;
    let var = xs.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / n;
    if !(var > mean * mean * T::epsilon()) {
        return Err(ModelError::ZeroVariance);
    }
    let mean_ln = xs.iter().map(|x| x.ln()).sum::<T>() / n;

    // per-sample negative log-likelihood from the sufficient statistics
    let nll = |logp: &[T]| -> T {
        let (lk, lt) = (boxed(logp[0]), boxed(logp[1]));
        let (k, th) = (lk.exp(), lt.exp());
        -((k - T::one()) * mean_ln - mean / th - ln_gamma(k) - k * lt)
    };
    let start = [(mean * mean / var).ln(), (var / mean).ln()];
    let config = NelderMeadConfig {
        max_iters: 5_000,
        tolerance: lit(1e-15),
        x_tolerance: lit(1e-10),
    };
    let best = minimize_twice(nll, &start, &config)?;
    GammaParams::new(boxed(best[0]).exp(), boxed(best[1]).exp())
}
