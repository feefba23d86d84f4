use crate::scalar::Real;

use super::special::{ln_gamma, regularized_gamma};
use super::{GammaParams, ModelError};

/// Gamma density `x^(k-1) e^(-x/θ) / (Γ(k) θ^k)` for `x > 0`.
pub fn gamma_pdf<T: Real>(x: T, params: &GammaParams<T>) -> Result<T, ModelError> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(ModelError::Domain("density requires x > 0"));
    }
    let (k, th) = (params.kappa(), params.theta());
    let ln_density = (k - T::one()) * x.ln() - x / th - ln_gamma(k) - k * th.ln();
    Ok(ln_density.exp())
}

/// Regularized lower incomplete gamma `P(kappa, x / theta)`.
pub fn gamma_cdf<T: Real>(x: T, params: &GammaParams<T>) -> Result<T, ModelError> {
    if x < T::zero() || x.is_nan() {
        return Err(ModelError::Domain("cdf requires x >= 0"));
    }
    Ok(regularized_gamma(params.kappa(), x / params.theta())?.0)
}

/// Survival function `1 - F(x)`, computed without cancellation.
pub fn gamma_sf<T: Real>(x: T, params: &GammaParams<T>) -> Result<T, ModelError> {
    if x < T::zero() || x.is_nan() {
        return Err(ModelError::Domain("survival function requires x >= 0"));
    }
    Ok(regularized_gamma(params.kappa(), x / params.theta())?.1)
}

/// Probabilities of switching before, inside and after the target window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CategoryProbs<T> {
    pub early: T,
    pub correct: T,
    pub miss: T,
}

impl<T: Real> CategoryProbs<T> {
    pub fn as_array(&self) -> [T; 3] {
        [self.early, self.correct, self.miss]
    }

    /// Probability the stage does not end in a correct selection.
    pub fn error(&self) -> T {
        T::one() - self.correct
    }
}

/// Category probabilities for target row (or column) `j` at step duration `d`.
pub fn category_probs<T: Real>(
    params: &GammaParams<T>,
    d: T,
    j: usize,
) -> Result<CategoryProbs<T>, ModelError> {
    if !(d > T::zero()) || !d.is_finite() {
        return Err(ModelError::Domain("cursor duration must be positive"));
    }
    if j == 0 {
        return Err(ModelError::Domain("target index is 1-based"));
    }
    let k = params.kappa();
    let lo = d * T::from_usize(j).unwrap() / params.theta();
    let hi = d * T::from_usize(j + 1).unwrap() / params.theta();
    let (p_lo, q_lo) = regularized_gamma(k, lo)?;
    let (p_hi, q_hi) = regularized_gamma(k, hi)?;
    // take the difference on whichever side keeps the smaller magnitudes
    let correct = if lo >= k + T::one() {
        q_lo - q_hi
    } else {
        p_hi - p_lo
    };
    Ok(CategoryProbs {
        early: p_lo,
        correct: correct.max(T::zero()).min(T::one()),
        miss: q_hi,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Early,
    Correct,
    Miss,
}

impl Outcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::Early => "early",
            Outcome::Correct => "correct",
            Outcome::Miss => "miss",
        }
    }
}

/// Classifies a switch action `elapsed` seconds after the pass started.
/// Correct iff `elapsed` lies in `[d*target, d*(target+1))`.
pub fn classify_elapsed<T: Real>(d: T, target: usize, elapsed: T) -> Outcome {
    let lo = d * T::from_usize(target).unwrap();
    let hi = d * T::from_usize(target + 1).unwrap();
    if elapsed < lo {
        Outcome::Early
    } else if elapsed < hi {
        Outcome::Correct
    } else {
        Outcome::Miss
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gp(k: f64, t: f64) -> GammaParams<f64> {
        GammaParams::new(k, t).unwrap()
    }

    #[test]
    fn pdf_closed_forms() {
        assert!((gamma_pdf(1.0, &gp(1.0, 1.0)).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert!((gamma_pdf(2.0, &gp(2.0, 1.0)).unwrap() - 2.0 * (-2.0f64).exp()).abs() < 1e-15);
        // 40-digit reference value
        let v = gamma_pdf(1.2, &gp(3.5, 0.4)).unwrap();
        assert!((v - 0.583_826_079_955_697_5).abs() < 1e-13);
    }

    #[test]
    fn pdf_rejects_bad_inputs() {
        assert!(gamma_pdf(0.0, &gp(1.0, 1.0)).is_err());
        assert!(gamma_pdf(-1.0, &gp(1.0, 1.0)).is_err());
        assert!(GammaParams::new(0.0, 1.0).is_err());
        assert!(GammaParams::new(1.0, -2.0).is_err());
        assert!(GammaParams::new(f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn cdf_closed_forms() {
        let v = gamma_cdf(2.0, &gp(1.0, 2.0)).unwrap();
        assert!((v - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert_eq!(gamma_cdf(0.0, &gp(3.7, 0.2)).unwrap(), 0.0);
        let v = gamma_cdf(0.9, &gp(2.5, 0.3)).unwrap();
        assert!((v - 0.693_781_081_586_721_6).abs() < 1e-13);
        assert!(gamma_cdf(-0.1, &gp(1.0, 1.0)).is_err());
    }

    #[test]
    fn exponential_categories() {
        let c = category_probs(&gp(1.0, 1.0), std::f64::consts::LN_2, 1).unwrap();
        assert!((c.early - 0.5).abs() < 1e-15);
        assert!((c.correct - 0.25).abs() < 1e-15);
        assert!((c.miss - 0.25).abs() < 1e-15);
    }

    #[test]
    fn reference_categories() {
        let c = category_probs(&gp(2.0, 0.2), 0.35, 3).unwrap();
        assert!((c.early - 0.967_203_010_005_116_3).abs() < 1e-13);
        assert!((c.correct - 0.025_501_934_270_447_52).abs() < 1e-13);
        assert!((c.miss - 0.007_295_055_724_436_13).abs() < 1e-13);
    }

    #[test]
    fn categories_reject_bad_inputs() {
        assert!(category_probs(&gp(1.0, 1.0), 0.0, 1).is_err());
        assert!(category_probs(&gp(1.0, 1.0), 0.3, 0).is_err());
    }

    #[test]
    fn sharp_mode_inside_window_is_correct() {
        // mode (k-1)θ placed at D(j + 0.5)
        let (d, j, theta) = (0.35, 3, 1e-4);
        let kappa = d * (j as f64 + 0.5) / theta + 1.0;
        let c = category_probs(&gp(kappa, theta), d, j).unwrap();
        assert!(c.correct > 1.0 - 1e-9, "{c:?}");
    }

    #[test]
    fn classification_windows() {
        assert_eq!(classify_elapsed(0.5, 2, 0.99), Outcome::Early);
        assert_eq!(classify_elapsed(0.5, 2, 1.0), Outcome::Correct);
        assert_eq!(classify_elapsed(0.5, 2, 1.49), Outcome::Correct);
        assert_eq!(classify_elapsed(0.5, 2, 1.5), Outcome::Miss);
    }
}
