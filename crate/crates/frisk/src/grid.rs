//! Uniform cell-centered grids in one and two dimensions.
//!
//! Cells are indexed flat in row-major order with the last coordinate fastest
//! (in 2D: flat = i1 * n2 + i2). Cell i along a dimension has center
//! lo + (i + 1/2) h with h = (hi - lo)/n.

use serde::{Deserialize, Serialize};

use crate::error::{FriskError, Result};

/// One grid dimension: n uniform cells covering [lo, hi].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridDim {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl GridDim {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(FriskError::Config(format!(
                "grid bounds must be finite with lo < hi, got [{lo}, {hi}]"
            )));
        }
        if n == 0 {
            return Err(FriskError::Config("grid needs at least one cell".into()));
        }
        Ok(GridDim { lo, hi, n })
    }

    pub fn h(&self) -> f64 {
        (self.hi - self.lo) / self.n as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        debug_assert!(i < self.n);
        self.lo + (i as f64 + 0.5) * self.h()
    }
}

/// A 1D or 2D uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dims: Vec<GridDim>,
}

impl Grid {
    pub fn new_1d(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Ok(Grid {
            dims: vec![GridDim::new(lo, hi, n)?],
        })
    }

    pub fn new_2d(d1: GridDim, d2: GridDim) -> Result<Self> {
        GridDim::new(d1.lo, d1.hi, d1.n)?;
        GridDim::new(d2.lo, d2.hi, d2.n)?;
        Ok(Grid { dims: vec![d1, d2] })
    }

    pub fn from_dims(dims: Vec<GridDim>) -> Result<Self> {
        if dims.is_empty() || dims.len() > 2 {
            return Err(FriskError::Config(format!(
                "grids support 1 or 2 dimensions, got {}",
                dims.len()
            )));
        }
        for d in &dims {
            GridDim::new(d.lo, d.hi, d.n)?;
        }
        Ok(Grid { dims })
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[GridDim] {
        &self.dims
    }

    pub fn num_cells(&self) -> usize {
        self.dims.iter().map(|d| d.n).product()
    }

    /// Flat index from per-dimension indices (last dimension fastest).
    pub fn flat(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.dim());
        match self.dims.len() {
            1 => multi[0],
            _ => multi[0] * self.dims[1].n + multi[1],
        }
    }

    /// Per-dimension indices from a flat index.
    pub fn multi(&self, flat: usize, out: &mut [usize]) {
        debug_assert!(flat < self.num_cells());
        match self.dims.len() {
            1 => out[0] = flat,
            _ => {
                out[0] = flat / self.dims[1].n;
                out[1] = flat % self.dims[1].n;
            }
        }
    }

    /// Cell center of a flat index.
    pub fn center(&self, flat: usize, out: &mut [f64]) {
        let mut mi = [0usize; 2];
        self.multi(flat, &mut mi[..self.dim()]);
        for (d, o) in out.iter_mut().enumerate().take(self.dim()) {
            *o = self.dims[d].center(mi[d]);
        }
    }

    /// All cell centers in flat order.
    pub fn centers(&self) -> Vec<Vec<f64>> {
        let dim = self.dim();
        (0..self.num_cells())
            .map(|i| {
                let mut c = vec![0.0; dim];
                self.center(i, &mut c);
                c
            })
            .collect()
    }
}
