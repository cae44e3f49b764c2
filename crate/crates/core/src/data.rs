// SPDX-License-Identifier: MIT OR Apache-2.0

//! The `n x m` observation matrix: one row per sample, one column per variable.

use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Row-major `n x m` matrix of observations with an optional missing-value mask.
///
/// Cells are stored as `f64` for every family; discrete families hold
/// integral values. A mask entry of `false` marks a missing cell, whose
/// stored value is ignored.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DataMatrix {
    n: usize,
    m: usize,
    cells: Vec<f64>,
    mask: Option<Vec<bool>>,
}

impl DataMatrix {
    pub fn new(n: usize, m: usize, cells: Vec<f64>) -> Result<Self> {
        Self::build(n, m, cells, None)
    }

    /// Builds a matrix with a mask (`true` = observed). Every column must
    /// keep at least one observed cell.
    pub fn with_mask(n: usize, m: usize, cells: Vec<f64>, mask: Vec<bool>) -> Result<Self> {
        Self::build(n, m, cells, Some(mask))
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.as_ref().len());
        let mut cells = Vec::with_capacity(n * m);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != m {
                return Err(Error::Shape(format!(
                    "row {} has {} cells, expected {m}",
                    i + 1,
                    row.len()
                )));
            }
            cells.extend_from_slice(row);
        }
        Self::new(n, m, cells)
    }

    fn build(n: usize, m: usize, cells: Vec<f64>, mask: Option<Vec<bool>>) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::Shape(format!(
                "need n >= 1 and m >= 1, got {n} x {m}"
            )));
        }
        if cells.len() != n * m {
            return Err(Error::Shape(format!(
                "{} cells for a {n} x {m} matrix",
                cells.len()
            )));
        }
        // An all-true mask carries no information.
        let mask = mask.filter(|mk| mk.iter().any(|&o| !o));
        if let Some(mk) = &mask {
            if mk.len() != n * m {
                return Err(Error::Shape(format!(
                    "mask has {} entries for a {n} x {m} matrix",
                    mk.len()
                )));
            }
            for col in 0..m {
                if !(0..n).any(|row| mk[row * m + col]) {
                    return Err(Error::EmptyColumn { col: col + 1 });
                }
            }
        }
        Ok(Self { n, m, cells, mask })
    }

    /// Number of samples (rows).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of variables (columns).
    pub fn m(&self) -> usize {
        self.m
    }

    /// Cell at 0-based `(row, col)`.
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.cells[row * self.m + col]
    }

    #[inline]
    pub fn is_observed(&self, row: usize, col: usize) -> bool {
        self.mask.as_ref().map_or(true, |mk| mk[row * self.m + col])
    }

    pub fn has_missing(&self) -> bool {
        self.mask.is_some()
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn mask(&self) -> Option<&[bool]> {
        self.mask.as_deref()
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.cells[row * self.m..(row + 1) * self.m]
    }

    /// New matrix made of the given rows (0-based, repeats allowed). Masks
    /// travel with their rows.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let mut cells = Vec::with_capacity(rows.len() * self.m);
        for &r in rows {
            cells.extend_from_slice(self.row(r));
        }
        let mask = self.mask.as_ref().map(|mk| {
            let mut out = Vec::with_capacity(rows.len() * self.m);
            for &r in rows {
                out.extend_from_slice(&mk[r * self.m..(r + 1) * self.m]);
            }
            out
        });
        Self::build(rows.len(), self.m, cells, mask)
    }

    /// Adds `shift` to every cell.
    pub fn shifted(&self, shift: f64) -> Self {
        Self {
            cells: self.cells.iter().map(|x| x + shift).collect(),
            ..self.clone()
        }
    }

    /// Multiplies every cell by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            cells: self.cells.iter().map(|x| x * factor).collect(),
            ..self.clone()
        }
    }
}
