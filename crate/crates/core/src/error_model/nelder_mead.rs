//! Downhill simplex minimization.

use std::cmp::Ordering;

use crate::scalar::{lit, Real};

use super::ModelError;

const REFLECTION: f64 = 1.0;
const EXPANSION: f64 = 2.0;
const CONTRACTION: f64 = 0.5;
const SHRINK: f64 = 0.5;

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadConfig<T> {
    pub max_iters: usize,
    /// Stop once `f(worst) - f(best)` over the simplex drops below this
    /// and the simplex is no wider than `x_tolerance`.
    pub tolerance: T,
    /// Coordinate span, relative to `max(1, |x|)`.
    pub x_tolerance: T,
}

impl<T: Real> Default for NelderMeadConfig<T> {
    fn default() -> Self {
        Self {
            max_iters: 10_000,
            tolerance: lit(1e-16),
            x_tolerance: lit(1e-8),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult<T> {
    pub x: Vec<T>,
    pub fx: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `objective` starting from `x0`.
///
/// The initial simplex offsets coordinate `c` by `max(0.05 |x0_c|, 0.00025)`.
/// Non-finite objective values away from the start are treated as `+inf`.
pub fn nelder_mead<T, F>(
    mut objective: F,
    x0: &[T],
    config: &NelderMeadConfig<T>,
) -> Result<NelderMeadResult<T>, ModelError>
where
    T: Real,
    F: FnMut(&[T]) -> T,
{
    let m = x0.len();
    if m == 0 {
        return Err(ModelError::Domain(
            "nelder_mead needs at least one coordinate",
        ));
    }
    let f0 = objective(x0);
    if !f0.is_finite() {
        return Err(ModelError::NonFiniteObjective);
    }
    let mut eval = |x: &[T]| {
        let v = objective(x);
        if v.is_finite() {
            v
        } else {
            T::infinity()
        }
    };

    let mut simplex: Vec<(Vec<T>, T)> = Vec::with_capacity(m + 1);
    simplex.push((x0.to_vec(), f0));
    for c in 0..m {
        let mut v = x0.to_vec();
        let step = (lit::<T>(0.05) * x0[c].abs()).max(lit(0.00025));
        v[c] = v[c] + step;
        let fv = eval(&v);
        simplex.push((v, fv));
    }

    let by_value =
        |a: &(Vec<T>, T), b: &(Vec<T>, T)| a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal);
    let mut iterations = 0;
    let mut converged = false;
    loop {
        simplex.sort_by(by_value);
        let narrow = simplex[1..].iter().all(|(v, _)| {
            v.iter()
                .zip(&simplex[0].0)
                .all(|(&a, &b)| (a - b).abs() <= config.x_tolerance * b.abs().max(T::one()))
        });
        if simplex[m].1 - simplex[0].1 < config.tolerance && narrow {
            converged = true;
            break;
        }
        if iterations >= config.max_iters {
            break;
        }
        iterations += 1;

        let inv = T::one() / T::from_usize(m).unwrap();
        let centroid: Vec<T> = (0..m)
            .map(|c| simplex[..m].iter().map(|(v, _)| v[c]).sum::<T>() * inv)
            .collect();
        let along = |coef: f64, towards: &[T]| -> Vec<T> {
            centroid
                .iter()
                .zip(towards)
                .map(|(&c, &w)| c + lit::<T>(coef) * (w - c))
                .collect()
        };

        let worst = simplex[m].0.clone();
        let (f_best, f_second, f_worst) = (simplex[0].1, simplex[m - 1].1, simplex[m].1);
        let reflected = along(-REFLECTION, &worst);
        let f_reflected = eval(&reflected);

        if f_reflected < f_best {
            let expanded = along(-REFLECTION * EXPANSION, &worst);
            let f_expanded = eval(&expanded);
            simplex[m] = if f_expanded < f_reflected {
                (expanded, f_expanded)
            } else {
                (reflected, f_reflected)
            };
            continue;
        }
        if f_reflected < f_second {
            simplex[m] = (reflected, f_reflected);
            continue;
        }
        if f_reflected < f_worst {
            let outside = along(-REFLECTION * CONTRACTION, &worst);
            let f_outside = eval(&outside);
            if f_outside <= f_reflected {
                simplex[m] = (outside, f_outside);
                continue;
            }
        } else {
            let inside = along(CONTRACTION, &worst);
            let f_inside = eval(&inside);
            if f_inside < f_worst {
                simplex[m] = (inside, f_inside);
                continue;
            }
        }

        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let shrunk: Vec<T> = best
                .iter()
                .zip(&vertex.0)
                .map(|(&b, &v)| b + lit::<T>(SHRINK) * (v - b))
                .collect();
            let f = eval(&shrunk);
            *vertex = (shrunk, f);
        }
    }

    let (x, fx) = simplex.swap_remove(0);
    Ok(NelderMeadResult {
        x,
        fx,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tight() -> NelderMeadConfig<f64> {
        NelderMeadConfig {
            max_iters: 20_000,
            tolerance: 1e-20,
            x_tolerance: 1e-10,
        }
    }

    #[test]
    fn convex_quadratic() {
        let r = nelder_mead(
            |x| (x[0] - 3.0).powi(2) + (x[1] + 1.0).powi(2),
            &[0.0, 0.0],
            &tight(),
        )
        .unwrap();
        assert!(
            (r.x[0] - 3.0).abs() < 1e-6 && (r.x[1] + 1.0).abs() < 1e-6,
            "{r:?}"
        );
        assert!(r.converged);
    }

    #[test]
    fn rosenbrock() {
        let rosen = |x: &[f64]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2);
        let r = nelder_mead(rosen, &[-1.2, 1.0], &tight()).unwrap();
        assert!(r.fx < 1e-8, "{r:?}");
        // independent check of the returned point
        assert!(rosen(&r.x) < 1e-8);
        assert!((r.x[0] - 1.0).abs() < 1e-3 && (r.x[1] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn one_dimensional() {
        let r = nelder_mead(|x| x[0] * x[0], &[5.0], &tight()).unwrap();
        assert!(r.x[0].abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn non_finite_start_is_rejected() {
        let err = nelder_mead(|x: &[f64]| x[0].ln(), &[-1.0], &tight()).unwrap_err();
        assert_eq!(err, ModelError::NonFiniteObjective);
        assert!(nelder_mead(|_: &[f64]| 0.0, &[], &tight()).is_err());
    }

    #[test]
    fn never_worse_than_start() {
        let f = |x: &[f64]| (x[0].sin() * 3.0 + x[1].cos()).abs() + 0.1 * x[0] * x[0];
        for start in [[0.3, 0.2], [2.0, -1.0], [-4.0, 5.0]] {
            let r = nelder_mead(
                f,
                &start,
                &NelderMeadConfig {
                    max_iters: 50,
                    tolerance: 1e-12,
                    x_tolerance: 1e-8,
                },
            )
            .unwrap();
            assert!(r.fx <= f(&start));
        }
    }

    #[test]
    fn respects_iteration_cap() {
        let r = nelder_mead(
            |x| x[0] * x[0] + x[1] * x[1],
            &[10.0, 10.0],
            &NelderMeadConfig {
                max_iters: 3,
                tolerance: 0.0,
                x_tolerance: 0.0,
            },
        )
        .unwrap();
        assert_eq!(r.iterations, 3);
        assert!(!r.converged);
    }
}
