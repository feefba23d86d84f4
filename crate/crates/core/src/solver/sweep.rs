//! Independent solves across cursor durations.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::corpus::CharacterFrequencies;
use crate::error_model::{build_error_table, ErrorTable, GammaParams};
use crate::layout::{CursorConfig, KeyboardSpec};
use crate::scalar::Real;

use super::exact::{solve_exact, ExactOptions};
use super::{Instance, OptResult, SolverError};

type TableFn<'a, T> = dyn Fn(T) -> Result<ErrorTable<T>, SolverError> + Send + Sync + 'a;

/// Everything except the duration and the budget.
pub struct Problem<'a, T> {
    pub spec: &'a KeyboardSpec,
    pub freqs: &'a CharacterFrequencies,
    tables: Box<TableFn<'a, T>>,
}

impl<'a, T: Real> Problem<'a, T> {
    /// Error tables come from one set of row and column stage models,
    /// re-evaluated at each duration.
    pub fn with_stage_params(
        spec: &'a KeyboardSpec,
        freqs: &'a CharacterFrequencies,
        row_params: BTreeMap<usize, GammaParams<T>>,
        col_params: Option<BTreeMap<usize, GammaParams<T>>>,
    ) -> Self {
        Self::with_tables(spec, freqs, move |d| {
            Ok(build_error_table(
                &row_params,
                col_params.as_ref(),
                spec,
                d,
            )?)
        })
    }

    /// Error tables come from an arbitrary per-duration builder.
    pub fn with_tables(
        spec: &'a KeyboardSpec,
        freqs: &'a CharacterFrequencies,
        tables: impl Fn(T) -> Result<ErrorTable<T>, SolverError> + Send + Sync + 'a,
    ) -> Self {
        Self {
            spec,
            freqs,
            tables: Box::new(tables),
        }
    }

    pub fn instance(&self, duration: T, epsilon: T) -> Result<Instance<T>, SolverError> {
        let cfg = CursorConfig::new(duration)?;
        let table = (self.tables)(duration)?;
        Instance::build(self.spec, self.freqs, &cfg, &table, epsilon)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry<T> {
    pub duration: T,
    pub result: OptResult<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport<T> {
    /// One entry per duration, in input order.
    pub entries: Vec<SweepEntry<T>>,
    /// Index of the feasible entry with the lowest time cost; the earliest
    /// wins ties.
    pub best: usize,
}

impl<T> SweepReport<T> {
    pub fn best_entry(&self) -> &SweepEntry<T> {
        &self.entries[self.best]
    }
}

/// Solves each duration exactly, in parallel.
pub fn sweep_durations<T: Real>(
    problem: &Problem<'_, T>,
    durations: &[T],
    epsilon: T,
    options: &ExactOptions<T>,
) -> Result<SweepReport<T>, SolverError> {
    if durations.is_empty()
        || durations
            .iter()
            .any(|d| !(*d > T::zero()) || !d.is_finite())
    {
        return Err(SolverError::BadDurations);
    }
    let entries = durations
        .par_iter()
        .map(|&duration| {
            let inst = problem.instance(duration, epsilon)?;
            Ok(SweepEntry {
                duration,
                result: solve_exact(&inst, options),
            })
        })
        .collect::<Result<Vec<_>, SolverError>>()?;
    let mut best: Option<usize> = None;
    for (i, e) in entries.iter().enumerate() {
        if let Some(c) = e.result.time_cost() {
            if best.is_none_or(|b| c < entries[b].result.time_cost().unwrap()) {
                best = Some(i);
            }
        }
    }
    let best = best.ok_or(SolverError::AllInfeasible)?;
    Ok(SweepReport { entries, best })
}
