//! Log-gamma and the regularized incomplete gamma functions.

use crate::scalar::{lit, Real};

use super::ModelError;

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const MAX_ITER: usize = 1000;

/// ln Γ(x) for x > 0 via the Lanczos approximation (g = 7, 9 terms).
pub fn ln_gamma<T: Real>(x: T) -> T {
    let half = lit::<T>(0.5);
    if x < half {
        // reflection: Γ(x)Γ(1-x) = π / sin(πx)
        let pi = T::PI();
        return pi.ln() - (pi * x).sin().abs().ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = lit::<T>(LANCZOS_COEFFS[0]);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc = acc + lit::<T>(c) / (x + lit(i as f64));
    }
    let t = x + lit::<T>(LANCZOS_G) + half;
    half * (lit::<T>(2.0) * T::PI()).ln() + (x + half) * t.ln() - t + acc.ln()
}

/// Γ(x) for x > 0.
pub fn gamma_fn<T: Real>(x: T) -> T {
    ln_gamma(x).exp()
}

/// Returns `(P(a, x), Q(a, x))`, the regularized lower and upper incomplete
/// gamma functions. Series for `x < a + 1`, Lentz continued fraction
/// otherwise; the other half is the complement.
pub fn regularized_gamma<T: Real>(a: T, x: T) -> Result<(T, T), ModelError> {
    if !(a > T::zero()) || !a.is_finite() || x < T::zero() || x.is_nan() {
        return Err(ModelError::Domain(
            "incomplete gamma requires a > 0 and x >= 0",
        ));
    }
    if x == T::zero() {
        return Ok((T::zero(), T::one()));
    }
    if x.is_infinite() {
        return Ok((T::one(), T::zero()));
    }
    let log_prefactor = a * x.ln() - x - ln_gamma(a);
    if x < a + T::one() {
        let p = (series(a, x)? + log_prefactor).exp().min(T::one());
        Ok((p, T::one() - p))
    } else {
        let q = (continued_fraction(a, x)? + log_prefactor)
            .exp()
            .min(T::one());
        Ok((T::one() - q, q))
    }
}

/// ln of Σ_{n≥0} x^n / (a (a+1) ... (a+n)).
fn series<T: Real>(a: T, x: T) -> Result<T, ModelError> {
    let eps = T::epsilon();
    let mut ap = a;
    let mut term = T::one() / a;
    let mut sum = term;
    for _ in 0..MAX_ITER {
        ap = ap + T::one();
        term = term * x / ap;
        sum = sum + term;
        if term.abs() < sum.abs() * eps {
            return Ok(sum.ln());
        }
    }
    Err(ModelError::ConvergenceFailure)
}

/// ln of the continued fraction for Q(a, x) without its prefactor.
fn continued_fraction<T: Real>(a: T, x: T) -> Result<T, ModelError> {
    let eps = T::epsilon();
    let tiny = T::min_positive_value() / eps;
    let two = lit::<T>(2.0);
    let mut b = x + T::one() - a;
    let mut c = T::one() / tiny;
    let mut d = T::one() / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let fi = lit::<T>(i as f64);
        let an = -fi * (fi - a);
        b = b + two;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = T::one() / d;
        let delta = d * c;
        h = h * delta;
        if (delta - T::one()).abs() < eps {
            return Ok(h.ln());
        }
    }
    Err(ModelError::ConvergenceFailure)
}
