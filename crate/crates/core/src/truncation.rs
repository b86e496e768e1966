use serde::{Deserialize, Serialize};

use crate::error::{QError, Result};

/// Stopping policy shared by every infinite sum and product.
///
/// A sum or product stops once `tail_window` consecutive terms are each below
/// `rel_tol` relative to the running value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub rel_tol: f64,
    pub max_terms: usize,
    pub tail_window: usize,
}

impl Default for Truncation {
    fn default() -> Self {
        Self {
            rel_tol: 1e-14,
            max_terms: 20_000,
            tail_window: 5,
        }
    }
}

impl Truncation {
    pub fn new(rel_tol: f64, max_terms: usize, tail_window: usize) -> Result<Self> {
        let t = Self {
            rel_tol,
            max_terms,
            tail_window,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(QError::InvalidParameters(format!(
                "rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        if self.tail_window == 0 || self.max_terms < self.tail_window {
            return Err(QError::InvalidParameters(format!(
                "need max_terms >= tail_window >= 1 (got {} and {})",
                self.max_terms, self.tail_window
            )));
        }
        Ok(())
    }
}

/// Counts consecutive "small" terms.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TailCounter {
    run: usize,
    window: usize,
}

impl TailCounter {
    pub(crate) fn new(window: usize) -> Self {
        Self { run: 0, window }
    }

    /// Records one term; returns true once the window is filled.
    pub(crate) fn push(&mut self, small: bool) -> bool {
        if small {
            self.run += 1;
        } else {
            self.run = 0;
        }
        self.run >= self.window
    }
}

/// Truncation for two-sided lattice sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BilateralTruncation {
    pub base: Truncation,
    pub max_neg: usize,
    pub max_pos: usize,
}

impl Default for BilateralTruncation {
    fn default() -> Self {
        Self {
            base: Truncation::default(),
            max_neg: 400,
            max_pos: 400,
        }
    }
}

impl BilateralTruncation {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.max_neg == 0 || self.max_pos == 0 {
            return Err(QError::InvalidParameters(
                "bilateral truncation needs max_neg, max_pos >= 1".into(),
            ));
        }
        Ok(())
    }
}
