use std::collections::BTreeMap;

use crate::layout::{KeyboardSpec, Position};
use crate::scalar::Real;

use super::{category_probs, GammaParams, ModelError};

/// Per-position error probabilities `p_jk` at one cursor duration.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTable<T> {
    duration: T,
    rows: usize,
    cols: usize,
    p: Vec<T>,
}

impl<T: Real> ErrorTable<T> {
    /// Builds a table from row-major probabilities.
    pub fn from_row_major(
        duration: T,
        rows: usize,
        cols: usize,
        p: Vec<T>,
    ) -> Result<Self, ModelError> {
        if p.len() != rows * cols {
            return Err(ModelError::Domain(
                "error table size does not match the grid",
            ));
        }
        if p.iter().any(|v| !(*v >= T::zero() && *v <= T::one())) {
            return Err(ModelError::Domain("error probabilities must lie in [0, 1]"));
        }
        Ok(Self {
            duration,
            rows,
            cols,
            p,
        })
    }

    /// Composes independent row and column stage errors:
    /// `p_jk = 1 - (1 - e_j)(1 - e_k)`.
    pub fn from_stage_errors(
        duration: T,
        row_errors: &[T],
        col_errors: &[T],
    ) -> Result<Self, ModelError> {
        let p = row_errors
            .iter()
            .flat_map(|&ej| {
                col_errors
                    .iter()
                    .map(move |&ek| T::one() - (T::one() - ej) * (T::one() - ek))
            })
            .collect();
        Self::from_row_major(duration, row_errors.len(), col_errors.len(), p)
    }

    pub fn duration(&self) -> T {
        self.duration
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, pos: Position) -> T {
        self.p[(pos.row - 1) * self.cols + (pos.col - 1)]
    }

    /// Rows of the table, top to bottom.
    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.p.chunks(self.cols).map(|r| r.to_vec()).collect()
    }

    pub fn matches(&self, spec: &KeyboardSpec) -> bool {
        self.rows == spec.rows() && self.cols == spec.cols()
    }
}

/// Stage error `1 - p_correct` for every index `1..=len`.
fn stage_errors<T: Real>(
    params: &BTreeMap<usize, GammaParams<T>>,
    d: T,
    len: usize,
) -> Result<Vec<T>, ModelError> {
    (1..=len)
        .map(|idx| {
            let gp = params.get(&idx).ok_or(ModelError::MissingParams(idx))?;
            Ok(category_probs(gp, d, idx)?.error())
        })
        .collect()
}

/// Error table for `spec` at duration `d`. Column stages reuse the row
/// models when `col_params` is `None`.
pub fn build_error_table<T: Real>(
    row_params: &BTreeMap<usize, GammaParams<T>>,
    col_params: Option<&BTreeMap<usize, GammaParams<T>>>,
    spec: &KeyboardSpec,
    d: T,
) -> Result<ErrorTable<T>, ModelError> {
    let rows = stage_errors(row_params, d, spec.rows())?;
    let cols = stage_errors(col_params.unwrap_or(row_params), d, spec.cols())?;
    ErrorTable::from_stage_errors(d, &rows, &cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{CharacterInventory, Glyph};

    fn spec2x2() -> KeyboardSpec {
        let inv = CharacterInventory::new("abcd".chars().map(Glyph::Char).collect()).unwrap();
        KeyboardSpec::new(2, 2, inv, vec![]).unwrap()
    }

    #[test]
    fn error_free_stages() {
        let t = ErrorTable::from_stage_errors(0.35, &[0.0; 3], &[0.0; 4]).unwrap();
        assert!(t.to_rows().iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn absorbing_row_error() {
        let t = ErrorTable::from_stage_errors(0.35, &[0.1, 1.0], &[0.2, 0.3]).unwrap();
        assert_eq!(t.to_rows()[1], vec![1.0, 1.0]);
    }

    #[test]
    fn exponential_two_by_two() {
        let exp1 = GammaParams::new(1.0, 1.0).unwrap();
        let params: BTreeMap<_, _> = [(1, exp1), (2, exp1)].into_iter().collect();
        let t = build_error_table(&params, None, &spec2x2(), std::f64::consts::LN_2).unwrap();
        assert!((t.get(Position::new(1, 1)) - 0.9375).abs() < 1e-14);
        // row-2 window: p_correct = e^(-2 ln 2) - e^(-3 ln 2)
        let pc2 = 0.25f64 - 0.125;
        let e1 = 0.75;
        let e2 = 1.0 - pc2;
        assert!((t.get(Position::new(1, 2)) - (1.0 - (1.0 - e1) * (1.0 - e2))).abs() < 1e-14);
    }

    #[test]
    fn missing_stage_params() {
        let params: BTreeMap<_, _> = [(1, GammaParams::new(1.0, 1.0).unwrap())]
            .into_iter()
            .collect();
        assert_eq!(
            build_error_table(&params, None, &spec2x2(), 0.35),
            Err(ModelError::MissingParams(2))
        );
    }

    #[test]
    fn rejects_out_of_range_probabilities() {
        assert!(ErrorTable::from_row_major(0.3, 1, 2, vec![0.2, 1.5]).is_err());
        assert!(ErrorTable::from_row_major(0.3, 1, 2, vec![0.2]).is_err());
    }
}
