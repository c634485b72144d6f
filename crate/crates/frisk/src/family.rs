//! The randomized 2D drift family used for dataset generation, and the fixed
//! out-of-distribution test system.
//!
//! Each drift component is
//! f(x1,x2) = c0 + c11 x1 + c12 x2 + c21 x1^2 + c22 x2^2 + cx x1 x2
//!          + c31 |x1|^1.5 + c32 |x2|^1.5
//!          + sum_{k1=1}^{K1} sum_{k2=1}^{K2} [a sin(2 pi (s1 k1 x1 + s2 k2 x2))
//!          + b cos(2 pi (s1 k1 x1 + s2 k2 x2))] / (k1^2 + k2^2)^(d/2),
//! with every coefficient drawn independently from its configured interval.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FriskError, Result};
use crate::grid::{Grid, GridDim};

/// Closed sampling interval for one coefficient class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi) {
            return Err(FriskError::Config(format!(
                "coefficient bound {name} must be a finite interval, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        Ok(())
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.lo == self.hi {
            self.lo
        } else {
            rng.gen_range(self.lo..=self.hi)
        }
    }
}

/// Per-class sampling intervals for the family coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoeffBounds {
    pub c0: Interval,
    pub c1: Interval,
    pub c2: Interval,
    pub c12: Interval,
    pub c3: Interval,
    pub a: Interval,
    pub b: Interval,
}

impl Default for CoeffBounds {
    fn default() -> Self {
        let unit = Interval::new(-1.0, 1.0);
        let fourier = Interval::new(-3.0, 3.0);
        CoeffBounds {
            c0: unit,
            c1: unit,
            c2: unit,
            c12: unit,
            c3: unit,
            a: fourier,
            b: fourier,
        }
    }
}

/// Structural parameters of the family: mode counts, spectral decay, frequency
/// scales, and coefficient bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub k1: usize,
    pub k2: usize,
    pub d: f64,
    pub s1: f64,
    pub s2: f64,
    pub bounds: CoeffBounds,
}

impl Default for FamilyParams {
    fn default() -> Self {
        FamilyParams {
            k1: 3,
            k2: 3,
            d: 2.0,
            s1: 1.0,
            s2: 1.0,
            bounds: CoeffBounds::default(),
        }
    }
}

impl FamilyParams {
    pub fn validate(&self) -> Result<()> {
        if self.k1 < 1 || self.k2 < 1 {
            return Err(FriskError::Config(format!(
                "mode counts must be >= 1, got K1={}, K2={}",
                self.k1, self.k2
            )));
        }
        if !(self.d > 0.0) {
            return Err(FriskError::Config(format!(
                "spectral decay d must be > 0, got {}",
                self.d
            )));
        }
        if !self.s1.is_finite() || !self.s2.is_finite() {
            return Err(FriskError::Config("frequency scales must be finite".into()));
        }
        for (name, iv) in [
            ("c0", self.bounds.c0),
            ("c1", self.bounds.c1),
            ("c2", self.bounds.c2),
            ("c12", self.bounds.c12),
            ("c3", self.bounds.c3),
            ("a", self.bounds.a),
            ("b", self.bounds.b),
        ] {
            iv.validate(name)?;
        }
        Ok(())
    }
}

/// Sampled coefficients for one scalar drift component. Fourier coefficient
/// vectors are row-major over (k1, k2) with k2 fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentCoeffs {
    pub c0: f64,
    pub c1: [f64; 2],
    pub c2: [f64; 2],
    pub c12: f64,
    pub c3: [f64; 2],
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl ComponentCoeffs {
    pub fn zero(k1: usize, k2: usize) -> Self {
        ComponentCoeffs {
            c0: 0.0,
            c1: [0.0; 2],
            c2: [0.0; 2],
            c12: 0.0,
            c3: [0.0; 2],
            a: vec![0.0; k1 * k2],
            b: vec![0.0; k1 * k2],
        }
    }

    fn sample<R: Rng + ?Sized>(bounds: &CoeffBounds, k1: usize, k2: usize, rng: &mut R) -> Self {
        ComponentCoeffs {
            c0: bounds.c0.sample(rng),
            c1: [bounds.c1.sample(rng), bounds.c1.sample(rng)],
            c2: [bounds.c2.sample(rng), bounds.c2.sample(rng)],
            c12: bounds.c12.sample(rng),
            c3: [bounds.c3.sample(rng), bounds.c3.sample(rng)],
            a: (0..k1 * k2).map(|_| bounds.a.sample(rng)).collect(),
            b: (0..k1 * k2).map(|_| bounds.b.sample(rng)).collect(),
        }
    }

    fn eval(&self, k1: usize, k2: usize, d: f64, s1: f64, s2: f64, x: &[f64]) -> f64 {
        let (x1, x2) = (x[0], x[1]);
        let mut v = self.c0
            + self.c1[0] * x1
            + self.c1[1] * x2
            + self.c2[0] * x1 * x1
            + self.c2[1] * x2 * x2
            + self.c12 * x1 * x2
            + self.c3[0] * x1.abs().powf(1.5)
            + self.c3[1] * x2.abs().powf(1.5);
        for i in 0..k1 {
            for j in 0..k2 {
                let ki = (i + 1) as f64;
                let kj = (j + 1) as f64;
                let phase = 2.0 * PI * (s1 * ki * x1 + s2 * kj * x2);
                let decay = (ki * ki + kj * kj).powf(0.5 * d);
                let (sin, cos) = phase.sin_cos();
                v += (self.a[i * k2 + j] * sin + self.b[i * k2 + j] * cos) / decay;
            }
        }
        v
    }
}

/// The stored coefficient set for one (f1, f2) drift pair. Evaluation is
/// exactly reproducible from the stored data alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DriftCoeffs {
    Family {
        k1: usize,
        k2: usize,
        d: f64,
        s1: f64,
        s2: f64,
        f1: ComponentCoeffs,
        f2: ComponentCoeffs,
    },
    /// The fixed out-of-distribution system; constants live in `eval_drift`.
    Ood,
}

/// Draws one (f1, f2) pair with independent coefficients.
pub fn sample_drift<R: Rng + ?Sized>(family: &FamilyParams, rng: &mut R) -> Result<DriftCoeffs> {
    family.validate()?;
    Ok(DriftCoeffs::Family {
        k1: family.k1,
        k2: family.k2,
        d: family.d,
        s1: family.s1,
        s2: family.s2,
        f1: ComponentCoeffs::sample(&family.bounds, family.k1, family.k2, rng),
        f2: ComponentCoeffs::sample(&family.bounds, family.k1, family.k2, rng),
    })
}

/// Evaluates a stored drift pair at x = (x1, x2).
pub fn eval_drift(coeffs: &DriftCoeffs, x: &[f64]) -> [f64; 2] {
    match coeffs {
        DriftCoeffs::Family {
            k1,
            k2,
            d,
            s1,
            s2,
            f1,
            f2,
        } => [
            f1.eval(*k1, *k2, *d, *s1, *s2, x),
            f2.eval(*k1, *k2, *d, *s1, *s2, x),
        ],
        DriftCoeffs::Ood => {
            let (x1, x2) = (x[0], x[1]);
            let f1 = 1.32 * x1 + 1.32 * x2 + 1.0;
            let f2 = 10.0 * x1.abs().powf(1.6) - 5.0 * x2.abs().powf(1.6)
                + 2.0 * (3.0 * PI * x2).cos()
                + 1.0
                + 20.0 * (0.96 * x1 + 0.36 * x2 + PI).sin();
            [f1, f2]
        }
    }
}

/// The fixed out-of-distribution drift.
pub fn ood_drift() -> DriftCoeffs {
    DriftCoeffs::Ood
}

/// Solve domain for the OOD system, covering the flow structure that feeds
/// back into the unit square: trajectories dive through the bottom along the
/// f2 escape channel and recirculate left of x1 = -0.76 before the
/// 10|x1|^1.6 term drives them back up. Enlarging beyond [-2, 1] x [-4, 1]
/// moves unit-square safety values by under 2e-3, below the spatial
/// discretization error at any affordable resolution. `per_unit` is the cell
/// count per unit length, matching the dataset grids at 33.
pub fn ood_solve_grid(per_unit: usize) -> Result<Grid> {
    Grid::new_2d(
        GridDim::new(-2.0, 1.0, 3 * per_unit)?,
        GridDim::new(-4.0, 1.0, 5 * per_unit)?,
    )
}
