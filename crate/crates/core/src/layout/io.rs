//! JSON forms of keyboard specs and optimized layouts.

use serde::{Deserialize, Serialize};

use crate::corpus::{CharacterInventory, Glyph, KeyIndex};
use crate::format::FormatError;

use super::{
    assignment_from_grid, render_layout, Assignment, FixedAssignment, KeyboardSpec, Position,
};

/// `{rows, cols, inventory, fixed: [[i, j, k], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyboardSpecFile {
    pub rows: usize,
    pub cols: usize,
    pub inventory: Vec<String>,
    pub fixed: Vec<[usize; 3]>,
}

impl KeyboardSpecFile {
    pub fn from_spec(spec: &KeyboardSpec) -> Self {
        Self {
            rows: spec.rows(),
            cols: spec.cols(),
            inventory: spec.inventory().glyphs().iter().map(Glyph::token).collect(),
            fixed: spec
                .fixed()
                .iter()
                .map(|f| [f.key.0, f.pos.row, f.pos.col])
                .collect(),
        }
    }

    pub fn to_spec(&self) -> Result<KeyboardSpec, FormatError> {
        let glyphs = self
            .inventory
            .iter()
            .map(|t| Glyph::parse_token(t))
            .collect::<Result<Vec<_>, _>>()?;
        let inventory = CharacterInventory::new(glyphs)?;
        let fixed = self
            .fixed
            .iter()
            .map(|&[i, j, k]| FixedAssignment {
                key: KeyIndex(i),
                pos: Position::new(j, k),
            })
            .collect();
        Ok(KeyboardSpec::new(self.rows, self.cols, inventory, fixed)?)
    }
}

pub fn read_spec_json(text: &str) -> Result<KeyboardSpec, FormatError> {
    serde_json::from_str::<KeyboardSpecFile>(text)?.to_spec()
}

pub fn write_spec_json(spec: &KeyboardSpec) -> String {
    let mut s =
        serde_json::to_string_pretty(&KeyboardSpecFile::from_spec(spec)).expect("spec serializes");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub name: String,
    pub status: String,
    pub lower_bound: Option<f64>,
    pub node_count: u64,
}

/// Optimized layout plus the settings and costs it was produced with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutFile {
    pub rows: usize,
    pub cols: usize,
    pub grid: Vec<Vec<String>>,
    #[serde(rename = "duration_D")]
    pub duration: f64,
    pub epsilon: f64,
    #[serde(rename = "C_t")]
    pub time_cost: f64,
    #[serde(rename = "C_e")]
    pub error_cost: f64,
    pub solver: SolverSummary,
    pub corpus_sha256: String,
}

impl LayoutFile {
    pub fn grid_tokens(assign: &Assignment, spec: &KeyboardSpec) -> Vec<Vec<String>> {
        render_layout(assign, spec)
            .iter()
            .map(|row| row.iter().map(Glyph::token).collect())
            .collect()
    }

    /// Recovers the assignment against `spec`.
    pub fn assignment(&self, spec: &KeyboardSpec) -> Result<Assignment, FormatError> {
        if self.rows != spec.rows() || self.cols != spec.cols() {
            return Err(super::LayoutError::LayoutSpecMismatch(format!(
                "layout is {}x{}, spec is {}x{}",
                self.rows,
                self.cols,
                spec.rows(),
                spec.cols()
            ))
            .into());
        }
        let grid = self
            .grid
            .iter()
            .map(|row| {
                row.iter()
                    .map(|t| Glyph::parse_token(t))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| super::LayoutError::LayoutSpecMismatch(e.to_string()))?;
        Ok(assignment_from_grid(&grid, spec)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("layout serializes");
        s.push('\n');
        s
    }
}
