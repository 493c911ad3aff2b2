//! Incremental exact Gaussian elimination over the rationals.
//!
//! [`Echelon`] keeps a stack of linear equations `a·x = b` in row-echelon
//! form. Pushing an equation reduces it against the stored pivot rows and
//! classifies it as independent, dependent, or inconsistent; popping undoes
//! the most recent recorded push. Stored rows are never rewritten, so a push
//! followed by a pop restores the previous state exactly — the shape needed
//! by depth-first searches over subsets of equations, where each branch adds
//! one equation and removes it on backtrack.
//!
//! All arithmetic is over arbitrary-precision rationals; there is no pivot
//! growth to manage and no tolerance to tune.

use alloc::vec::Vec;

use num_rational::BigRational;
use num_traits::Zero;

/// Classification of a pushed equation against the rows already stored.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PushOutcome {
    /// The equation added a new pivot; the rank grew by one.
    Independent,
    /// The equation is implied by the stored rows; recorded, rank unchanged.
    Dependent,
    /// The equation contradicts the stored rows. Nothing was recorded and
    /// there is no matching [`Echelon::pop`].
    Inconsistent,
}

#[derive(Clone, Debug)]
struct Row {
    /// Coefficients followed by the right-hand side, with the leading
    /// coefficient normalized to 1.
    entries: Vec<BigRational>,
    /// Column of the leading 1 (always a coefficient column).
    pivot: usize,
}

/// An incremental row-echelon form of a system of rational equations
/// `a·x = b` in a fixed number of unknowns.
///
/// Every stored row has zeros in the pivot columns of the rows stored before
/// it, so reducing a new row by the stored rows in insertion order yields a
/// row with zeros in *all* stored pivot columns — no back-substitution into
/// older rows is ever needed, which is what makes [`Echelon::pop`] O(1).
#[derive(Clone, Debug)]
pub struct Echelon {
    columns: usize,
    rows: Vec<Row>,
    /// One entry per recorded push: whether it stored a row.
    journal: Vec<bool>,
}

impl Echelon {
    /// An empty system in `columns` unknowns.
    pub fn new(columns: usize) -> Self {
        Echelon { columns, rows: Vec::new(), journal: Vec::new() }
    }

    /// Number of unknowns.
    pub fn columns(&self) -> usize {
        self.columns
    }

    /// Rank of the coefficient matrix of the stored system.
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Number of recorded pushes (dependent ones included).
    pub fn depth(&self) -> usize {
        self.journal.len()
    }

    /// Pushes the equation `coefficients · x = rhs`.
    ///
    /// An [`Inconsistent`](PushOutcome::Inconsistent) equation leaves the
    /// state untouched; the other two outcomes are undone by [`pop`].
    ///
    /// [`pop`]: Echelon::pop
    pub fn push(&mut self, coefficients: &[BigRational], rhs: &BigRational) -> PushOutcome {
        assert_eq!(coefficients.len(), self.columns, "one coefficient per unknown");
        let mut entries = Vec::with_capacity(self.columns + 1);
        entries.extend_from_slice(coefficients);
        entries.push(rhs.clone());
        for row in &self.rows {
            let factor = entries[row.pivot].clone();
            if factor.is_zero() {
                continue;
            }
            for (e, r) in entries.iter_mut().zip(&row.entries) {
                if !r.is_zero() {
                    *e -= &factor * r;
                }
            }
        }
        match entries[..self.columns].iter().position(|e| !e.is_zero()) {
            Some(pivot) => {
                let lead = entries[pivot].clone();
                for e in &mut entries {
                    if !e.is_zero() {
                        *e /= &lead;
                    }
                }
                self.rows.push(Row { entries, pivot });
                self.journal.push(true);
                PushOutcome::Independent
            }
            None if entries[self.columns].is_zero() => {
                self.journal.push(false);
                PushOutcome::Dependent
            }
            None => PushOutcome::Inconsistent,
        }
    }

    /// Undoes the most recent recorded push.
    ///
    /// # Panics
    ///
    /// If there is no recorded push to undo.
    pub fn pop(&mut self) {
        let stored = self.journal.pop().expect("pop without a matching push");
        if stored {
            self.rows.pop();
        }
    }
}
