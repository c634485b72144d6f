//! Solves (c0 I - L) u = rhs for the implicit time stepper.
//!
//! The matrix is a strictly diagonally dominant M-matrix whenever c0 > 0
//! (row sums of |off-diagonals| equal |diag| minus the absorption rates), so
//! a dense LU factorization is safe for small systems and Jacobi-conditioned
//! BiCGSTAB converges for large ones. The factorization or CSR structure is
//! built once and reused across all time steps.

use nalgebra::{DMatrix, DVector};

use crate::error::{FriskError, Result};
use crate::generator::GeneratorMatrix;

/// Above this many cells the solver switches to sparse iterations: dense LU
/// is O(n^3) to factor and O(n^2) to store, both fine up to roughly here.
const DENSE_LIMIT: usize = 1500;

const BICGSTAB_TOL: f64 = 1e-9;
const BICGSTAB_MAX_ITERS: usize = 10_000;

pub enum StepSolver {
    Dense(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
    Sparse(SparseStep),
}

/// CSR form of c0 I - L plus the symmetric Gauss-Seidel preconditioner.
/// Rows are kept in ascending column order with the diagonal position
/// recorded, so the forward/backward sweeps can split at the diagonal.
pub struct SparseStep {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    vals: Vec<f64>,
    diag_idx: Vec<usize>,
    inv_diag: Vec<f64>,
}

impl StepSolver {
    pub fn new(gen: &GeneratorMatrix, c0: f64) -> Result<Self> {
        if gen.n() <= DENSE_LIMIT {
            Self::new_dense(gen, c0)
        } else {
            Self::new_sparse(gen, c0)
        }
    }

    pub fn new_dense(gen: &GeneratorMatrix, c0: f64) -> Result<Self> {
        check_c0(c0)?;
        let n = gen.n();
        let mut m = DMatrix::<f64>::zeros(n, n);
        for r in 0..n {
            m[(r, r)] = c0 - gen.diag()[r];
            for &(c, rate) in &gen.rows()[r] {
                m[(r, c as usize)] = -rate;
            }
        }
        Ok(StepSolver::Dense(m.lu()))
    }

    pub fn new_sparse(gen: &GeneratorMatrix, c0: f64) -> Result<Self> {
        check_c0(c0)?;
        let n = gen.n();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        let mut diag_idx = Vec::with_capacity(n);
        let mut inv_diag = Vec::with_capacity(n);
        row_ptr.push(0);
        for r in 0..n {
            let d = c0 - gen.diag()[r];
            if d <= 0.0 {
                return Err(FriskError::LinearSolve(format!(
                    "nonpositive diagonal {d} in row {r}; c0 too small"
                )));
            }
            inv_diag.push(1.0 / d);
            // Row entries in column order; the diagonal slots into place.
            let mut placed = false;
            let mut prev_col = -1i64;
            for &(c, rate) in &gen.rows()[r] {
                if (c as i64) <= prev_col || c as usize == r {
                    return Err(FriskError::LinearSolve(format!(
                        "generator row {r} not in strict column order"
                    )));
                }
                prev_col = c as i64;
                if !placed && c as usize > r {
                    diag_idx.push(col_idx.len());
                    col_idx.push(r as u32);
                    vals.push(d);
                    placed = true;
                }
                col_idx.push(c);
                vals.push(-rate);
            }
            if !placed {
                diag_idx.push(col_idx.len());
                col_idx.push(r as u32);
                vals.push(d);
            }
            row_ptr.push(col_idx.len());
        }
        Ok(StepSolver::Sparse(SparseStep {
            n,
            row_ptr,
            col_idx,
            vals,
            diag_idx,
            inv_diag,
        }))
    }

    pub fn n(&self) -> usize {
        match self {
            StepSolver::Dense(lu) => lu.l().nrows(),
            StepSolver::Sparse(s) => s.n,
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        self.solve_warm(rhs, None)
    }

    /// Solve with an initial guess (previous time level); the direct path
    /// ignores it.
    pub fn solve_warm(&self, rhs: &[f64], guess: Option<&[f64]>) -> Result<Vec<f64>> {
        match self {
            StepSolver::Dense(lu) => {
                let b = DVector::from_column_slice(rhs);
                let x = lu.solve(&b).ok_or_else(|| {
                    FriskError::LinearSolve("dense LU: singular step matrix".into())
                })?;
                Ok(x.data.into())
            }
            StepSolver::Sparse(s) => s.bicgstab(rhs, guess),
        }
    }
}

fn check_c0(c0: f64) -> Result<()> {
    if !(c0 > 0.0) || !c0.is_finite() {
        return Err(FriskError::LinearSolve(format!(
            "step matrix requires c0 > 0, got {c0}"
        )));
    }
    Ok(())
}

impl SparseStep {
    fn mat_vec(&self, x: &[f64], y: &mut [f64]) {
        for r in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.col_idx[k] as usize];
            }
            y[r] = acc;
        }
    }

    /// Symmetric Gauss-Seidel preconditioner M = (D + Lo) D^{-1} (D + Up)
    /// applied as out = M^{-1} p. The step matrix is an M-matrix (positive
    /// diagonal, nonpositive off-diagonals, strictly diagonally dominant), so
    /// both triangular sweeps are well posed.
    fn precond(&self, p: &[f64], out: &mut [f64], fwd: &mut [f64]) {
        for r in 0..self.n {
            let mut acc = p[r];
            for k in self.row_ptr[r]..self.diag_idx[r] {
                acc -= self.vals[k] * fwd[self.col_idx[k] as usize];
            }
            fwd[r] = acc * self.inv_diag[r];
        }
        for r in (0..self.n).rev() {
            let mut acc = self.vals[self.diag_idx[r]] * fwd[r];
            for k in self.diag_idx[r] + 1..self.row_ptr[r + 1] {
                acc -= self.vals[k] * out[self.col_idx[k] as usize];
            }
            out[r] = acc * self.inv_diag[r];
        }
    }

    /// SGS-preconditioned BiCGSTAB (van der Vorst). Relative residual
    /// tolerance on ||b - A x|| / ||b||; the converged solution is verified
    /// against the true residual before returning.
    fn bicgstab(&self, b: &[f64], guess: Option<&[f64]>) -> Result<Vec<f64>> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let b_norm = norm2(b);
        if b_norm == 0.0 {
            return Ok(vec![0.0; n]);
        }
        let mut x: Vec<f64> = match guess {
            Some(g) if g.len() == n => g.to_vec(),
            // Jacobi starting guess.
            _ => b.iter().zip(&self.inv_diag).map(|(v, d)| v * d).collect(),
        };
        let mut r = vec![0.0; n];
        self.mat_vec(&x, &mut r);
        for i in 0..n {
            r[i] = b[i] - r[i];
        }
        if norm2(&r) <= BICGSTAB_TOL * b_norm {
            return self.finish(x, b, b_norm);
        }
        let r0 = r.clone();
        let mut rho = 1.0;
        let mut alpha = 1.0;
        let mut omega = 1.0;
        let mut v = vec![0.0; n];
        let mut p = vec![0.0; n];
        let mut phat = vec![0.0; n];
        let mut shat = vec![0.0; n];
        let mut sweep = vec![0.0; n];
        let mut t = vec![0.0; n];

        for iter in 0..BICGSTAB_MAX_ITERS {
            let rho_new = dot(&r0, &r);
            if rho_new.abs() < f64::MIN_POSITIVE * 1e4 {
                return Err(FriskError::LinearSolve(format!(
                    "bicgstab breakdown (rho = {rho_new:.3e}) at iteration {iter}, \
                     residual {:.3e}",
                    norm2(&r) / b_norm
                )));
            }
            let beta = (rho_new / rho) * (alpha / omega);
            rho = rho_new;
            for i in 0..n {
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
            }
            self.precond(&p, &mut phat, &mut sweep);
            self.mat_vec(&phat, &mut v);
            alpha = rho / dot(&r0, &v);
            // s = r - alpha v (reuse r).
            for i in 0..n {
                r[i] -= alpha * v[i];
            }
            if norm2(&r) <= BICGSTAB_TOL * b_norm {
                for i in 0..n {
                    x[i] += alpha * phat[i];
                }
                return self.finish(x, b, b_norm);
            }
            self.precond(&r, &mut shat, &mut sweep);
            self.mat_vec(&shat, &mut t);
            let tt = dot(&t, &t);
            if tt == 0.0 {
                return Err(FriskError::LinearSolve(format!(
                    "bicgstab stagnated (t = 0) at iteration {iter}"
                )));
            }
            omega = dot(&t, &r) / tt;
            for i in 0..n {
                x[i] += alpha * phat[i] + omega * shat[i];
                r[i] -= omega * t[i];
            }
            let rel = norm2(&r) / b_norm;
            if rel <= BICGSTAB_TOL {
                return self.finish(x, b, b_norm);
            }
            if !rel.is_finite() {
                return Err(FriskError::LinearSolve(format!(
                    "bicgstab diverged (residual {rel}) at iteration {iter}"
                )));
            }
            if omega == 0.0 {
                return Err(FriskError::LinearSolve(format!(
                    "bicgstab breakdown (omega = 0) at iteration {iter}"
                )));
            }
        }
        Err(FriskError::LinearSolve(format!(
            "bicgstab: no convergence after {BICGSTAB_MAX_ITERS} iterations, \
             residual {:.3e}",
            norm2(&r) / b_norm
        )))
    }

    /// Guard against recursive-residual drift: the recurrence can report
    /// convergence while the true residual lags, so recompute it once.
    fn finish(&self, x: Vec<f64>, b: &[f64], b_norm: f64) -> Result<Vec<f64>> {
        let mut ax = vec![0.0; self.n];
        self.mat_vec(&x, &mut ax);
        let mut resid = 0.0f64;
        for i in 0..self.n {
            resid += (b[i] - ax[i]) * (b[i] - ax[i]);
        }
        let rel = resid.sqrt() / b_norm;
        if !(rel <= 100.0 * BICGSTAB_TOL) {
            return Err(FriskError::LinearSolve(format!(
                "bicgstab: converged recurrence but true residual {rel:.3e}"
            )));
        }
        finish(x, 0)
    }
}

fn finish(x: Vec<f64>, _iters: usize) -> Result<Vec<f64>> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(FriskError::LinearSolve("non-finite solution entries".into()));
    }
    Ok(x)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
