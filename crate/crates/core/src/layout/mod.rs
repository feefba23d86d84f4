//! Keyboard geometry, assignments and the per-character cost of a layout.
//!
//! Grid indices are 1-based. The cursor reaches row `j` after `j` steps and
//! column `k` of that row after another `k`, so entering the key at `(j, k)`
//! takes `D * (j + k)` seconds.

pub mod io;

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::corpus::{CharacterFrequencies, CharacterInventory, Glyph, KeyIndex};
use crate::error_model::ErrorTable;
use crate::scalar::{count, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Position {
    pub row: usize,
    pub col: usize,
}

impl Position {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LayoutError {
    #[error("grid must have at least one row and one column")]
    EmptyGrid,
    #[error("inventory has {inventory} keys but the grid has {positions} positions")]
    InventorySize { inventory: usize, positions: usize },
    #[error("position {0} is outside the grid")]
    IndexOutOfRange(Position),
    #[error("key {0} is not in the inventory")]
    UnknownKey(KeyIndex),
    #[error("conflicting fixed assignment: {0}")]
    ConflictingFixedAssignment(String),
    #[error("assignment is not a bijection: {0}")]
    NotBijective(String),
    #[error("fixed key {key} must sit at {expected}, found at {found}")]
    FixedViolated {
        key: KeyIndex,
        expected: Position,
        found: Position,
    },
    #[error("inputs describe different inventories: {0}")]
    MismatchedInventory(String),
    #[error("cursor duration must be positive and finite")]
    BadDuration,
    #[error("grid does not match the keyboard spec: {0}")]
    LayoutSpecMismatch(String),
}

/// Key pinned to a position before optimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FixedAssignment {
    pub key: KeyIndex,
    pub pos: Position,
}

/// Grid dimensions, key inventory and pinned keys.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyboardSpec {
    rows: usize,
    cols: usize,
    inventory: CharacterInventory,
    fixed: Vec<FixedAssignment>,
}

impl KeyboardSpec {
    pub fn new(
        rows: usize,
        cols: usize,
        inventory: CharacterInventory,
        fixed: Vec<FixedAssignment>,
    ) -> Result<Self, LayoutError> {
        if rows == 0 || cols == 0 {
            return Err(LayoutError::EmptyGrid);
        }
        if inventory.len() != rows * cols {
            return Err(LayoutError::InventorySize {
                inventory: inventory.len(),
                positions: rows * cols,
            });
        }
        let spec = Self {
            rows,
            cols,
            inventory,
            fixed,
        };
        let mut keys = HashSet::new();
        let mut positions = HashSet::new();
        for f in &spec.fixed {
            spec.check_key(f.key)?;
            spec.check_position(f.pos)?;
            if !keys.insert(f.key) {
                return Err(LayoutError::ConflictingFixedAssignment(format!(
                    "key {} fixed twice",
                    f.key
                )));
            }
            if !positions.insert(f.pos) {
                return Err(LayoutError::ConflictingFixedAssignment(format!(
                    "position {} fixed twice",
                    f.pos
                )));
            }
        }
        Ok(spec)
    }

    /// The 8x8 board with the default inventory and the digit keys 55-64
    /// pinned to (7,7), (7,8) and (8,1)..(8,8).
    pub fn default_8x8() -> Self {
        Self::new(8, 8, CharacterInventory::default_64(), digit_block())
            .expect("default spec is valid")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn size(&self) -> usize {
        self.rows * self.cols
    }

    pub fn inventory(&self) -> &CharacterInventory {
        &self.inventory
    }

    pub fn fixed(&self) -> &[FixedAssignment] {
        &self.fixed
    }

    /// Positions in row-major order.
    pub fn positions(&self) -> impl Iterator<Item = Position> + '_ {
        (1..=self.rows).flat_map(move |r| (1..=self.cols).map(move |c| Position::new(r, c)))
    }

    pub fn check_position(&self, pos: Position) -> Result<(), LayoutError> {
        if pos.row == 0 || pos.row > self.rows || pos.col == 0 || pos.col > self.cols {
            return Err(LayoutError::IndexOutOfRange(pos));
        }
        Ok(())
    }

    fn check_key(&self, key: KeyIndex) -> Result<(), LayoutError> {
        if key.0 == 0 || key.0 > self.inventory.len() {
            return Err(LayoutError::UnknownKey(key));
        }
        Ok(())
    }

    fn slot(&self, pos: Position) -> usize {
        (pos.row - 1) * self.cols + (pos.col - 1)
    }
}

/// Digit keys 55-64 along the bottom of an 8x8 board.
pub fn digit_block() -> Vec<FixedAssignment> {
    let positions = [
        (7, 7),
        (7, 8),
        (8, 1),
        (8, 2),
        (8, 3),
        (8, 4),
        (8, 5),
        (8, 6),
        (8, 7),
        (8, 8),
    ];
    positions
        .iter()
        .enumerate()
        .map(|(i, &(r, c))| FixedAssignment {
            key: KeyIndex(55 + i),
            pos: Position::new(r, c),
        })
        .collect()
}

/// A complete placement: key `i` sits at `positions()[i - 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pos: Vec<Position>,
}

impl Assignment {
    /// Validates bijectivity and the spec's fixed keys.
    pub fn new(spec: &KeyboardSpec, pos: Vec<Position>) -> Result<Self, LayoutError> {
        if pos.len() != spec.size() {
            return Err(LayoutError::NotBijective(format!(
                "{} keys placed, grid has {}",
                pos.len(),
                spec.size()
            )));
        }
        let mut seen = vec![false; spec.size()];
        for (i, p) in pos.iter().enumerate() {
            spec.check_position(*p)?;
            let s = spec.slot(*p);
            if seen[s] {
                return Err(LayoutError::NotBijective(format!(
                    "position {p} holds two keys (second is key {})",
                    i + 1
                )));
            }
            seen[s] = true;
        }
        for f in spec.fixed() {
            let found = pos[f.key.0 - 1];
            if found != f.pos {
                return Err(LayoutError::FixedViolated {
                    key: f.key,
                    expected: f.pos,
                    found,
                });
            }
        }
        Ok(Self { pos })
    }

    /// Keys in inventory order, filling the grid row by row (the
    /// "alphabetical" layout when the inventory is sorted), with fixed keys
    /// at their pins.
    pub fn in_order(spec: &KeyboardSpec) -> Self {
        let part = apply_fixed(spec).expect("validated spec");
        let mut pos = vec![Position::new(0, 0); spec.size()];
        for f in &part.fixed {
            pos[f.key.0 - 1] = f.pos;
        }
        for (k, p) in part.free_keys.iter().zip(&part.free_positions) {
            pos[k.0 - 1] = *p;
        }
        Self { pos }
    }

    pub fn position(&self, key: KeyIndex) -> Position {
        self.pos[key.0 - 1]
    }

    pub fn positions(&self) -> &[Position] {
        &self.pos
    }

    pub fn len(&self) -> usize {
        self.pos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pos.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CursorConfig<T> {
    duration: T,
}

impl<T: Real> CursorConfig<T> {
    pub fn new(duration: T) -> Result<Self, LayoutError> {
        if !(duration > T::zero()) || !duration.is_finite() {
            return Err(LayoutError::BadDuration);
        }
        Ok(Self { duration })
    }

    pub fn duration(&self) -> T {
        self.duration
    }
}

/// Expected seconds per character and error probability per character.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayoutMetrics<T> {
    pub time_cost: T,
    pub error_cost: T,
}

/// `D * (j + k)`.
pub fn scan_time<T: Real>(
    spec: &KeyboardSpec,
    pos: Position,
    cfg: &CursorConfig<T>,
) -> Result<T, LayoutError> {
    spec.check_position(pos)?;
    Ok(step_time(pos, cfg.duration()))
}

#[inline]
pub(crate) fn step_time<T: Real>(pos: Position, duration: T) -> T {
    duration * T::from_usize(pos.row + pos.col).unwrap()
}

fn check_freqs(assign: &Assignment, freqs: &CharacterFrequencies) -> Result<(), LayoutError> {
    if freqs.len() != assign.len() {
        return Err(LayoutError::MismatchedInventory(format!(
            "{} frequencies for {} keys",
            freqs.len(),
            assign.len()
        )));
    }
    Ok(())
}

/// `(1/n) Σ_i f_i t_pos(i)`.
pub fn time_cost<T: Real>(
    assign: &Assignment,
    freqs: &CharacterFrequencies,
    cfg: &CursorConfig<T>,
) -> Result<T, LayoutError> {
    check_freqs(assign, freqs)?;
    let total: T = freqs
        .counts()
        .iter()
        .zip(assign.positions())
        .map(|(&f, &p)| count::<T>(f) * step_time(p, cfg.duration()))
        .sum();
    Ok(total / count::<T>(freqs.n()))
}

/// `(1/n) Σ_i f_i p_pos(i)`.
pub fn error_cost<T: Real>(
    assign: &Assignment,
    freqs: &CharacterFrequencies,
    table: &ErrorTable<T>,
) -> Result<T, LayoutError> {
    check_freqs(assign, freqs)?;
    let max_pos = assign.positions().iter().fold(Position::new(0, 0), |m, p| {
        Position::new(m.row.max(p.row), m.col.max(p.col))
    });
    if max_pos.row > table.rows() || max_pos.col > table.cols() {
        return Err(LayoutError::MismatchedInventory(
            "error table smaller than the grid".into(),
        ));
    }
    let total: T = freqs
        .counts()
        .iter()
        .zip(assign.positions())
        .map(|(&f, &p)| count::<T>(f) * table.get(p))
        .sum();
    Ok((total / count::<T>(freqs.n())).min(T::one()))
}

pub fn evaluate<T: Real>(
    assign: &Assignment,
    freqs: &CharacterFrequencies,
    cfg: &CursorConfig<T>,
    table: &ErrorTable<T>,
) -> Result<LayoutMetrics<T>, LayoutError> {
    Ok(LayoutMetrics {
        time_cost: time_cost(assign, freqs, cfg)?,
        error_cost: error_cost(assign, freqs, table)?,
    })
}

/// Split of keys and positions into pinned and free parts.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPartition {
    pub fixed: Vec<FixedAssignment>,
    /// Free keys in index order.
    pub free_keys: Vec<KeyIndex>,
    /// Free positions in row-major order.
    pub free_positions: Vec<Position>,
}

pub fn apply_fixed(spec: &KeyboardSpec) -> Result<FixedPartition, LayoutError> {
    let mut key_taken = vec![false; spec.size()];
    let mut pos_taken = vec![false; spec.size()];
    for f in spec.fixed() {
        if std::mem::replace(&mut key_taken[f.key.0 - 1], true) {
            return Err(LayoutError::ConflictingFixedAssignment(format!(
                "key {} fixed twice",
                f.key
            )));
        }
        if std::mem::replace(&mut pos_taken[spec.slot(f.pos)], true) {
            return Err(LayoutError::ConflictingFixedAssignment(format!(
                "position {} fixed twice",
                f.pos
            )));
        }
    }
    Ok(FixedPartition {
        fixed: spec.fixed().to_vec(),
        free_keys: spec
            .inventory()
            .keys()
            .filter(|k| !key_taken[k.0 - 1])
            .collect(),
        free_positions: spec
            .positions()
            .filter(|p| !pos_taken[spec.slot(*p)])
            .collect(),
    })
}

/// Glyph grid, top row first.
pub fn render_layout(assign: &Assignment, spec: &KeyboardSpec) -> Vec<Vec<Glyph>> {
    let mut grid = vec![vec![Glyph::Blank; spec.cols()]; spec.rows()];
    for (key, p) in spec.inventory().keys().zip(assign.positions()) {
        grid[p.row - 1][p.col - 1] = spec.inventory().glyph(key).expect("key in inventory");
    }
    grid
}

/// Inverts [`render_layout`]. Blank cells are matched to blank keys in
/// index order.
pub fn assignment_from_grid(
    grid: &[Vec<Glyph>],
    spec: &KeyboardSpec,
) -> Result<Assignment, LayoutError> {
    if grid.len() != spec.rows() || grid.iter().any(|r| r.len() != spec.cols()) {
        return Err(LayoutError::LayoutSpecMismatch(format!(
            "expected a {}x{} grid",
            spec.rows(),
            spec.cols()
        )));
    }
    let inv = spec.inventory();
    let mut pos = vec![None; spec.size()];
    let mut blank_keys = inv.keys().filter(|k| inv.glyph(*k) == Some(Glyph::Blank));
    for (r, row) in grid.iter().enumerate() {
        for (c, g) in row.iter().enumerate() {
            let here = Position::new(r + 1, c + 1);
            let key = match g {
                Glyph::Blank => blank_keys.next().ok_or_else(|| {
                    LayoutError::LayoutSpecMismatch("more blank cells than blank keys".into())
                })?,
                Glyph::Char(ch) => inv.index_of(*ch).ok_or_else(|| {
                    LayoutError::LayoutSpecMismatch(format!("glyph {ch:?} is not in the inventory"))
                })?,
            };
            if pos[key.0 - 1].replace(here).is_some() {
                return Err(LayoutError::LayoutSpecMismatch(format!(
                    "glyph {g:?} appears twice"
                )));
            }
        }
    }
    let pos: Vec<Position> = pos
        .into_iter()
        .collect::<Option<_>>()
        .ok_or_else(|| LayoutError::LayoutSpecMismatch("grid misses keys".into()))?;
    Assignment::new(spec, pos).map_err(|e| LayoutError::LayoutSpecMismatch(e.to_string()))
}
