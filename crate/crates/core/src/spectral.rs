//! FFT plumbing shared by the split-step solvers.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Uniform grid `x_j = min + j (max - min) / (n - 1)`, treated as periodic
/// with period `n * spacing`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl UniformGrid {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Self> {
        if n < 2 || !(max > min) {
            return Err(Error::param("grid", "need max > min and at least two points"));
        }
        Ok(Self { min, max, n })
    }

    /// `n` points with spacing `dx` starting at `min`.
    pub fn from_spacing(min: f64, dx: f64, n: usize) -> Result<Self> {
        Self::new(min, min + (n - 1) as f64 * dx, n)
    }

    /// Period of the grid when treated as periodic.
    pub fn period(&self) -> f64 {
        self.n as f64 * self.spacing()
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / (self.n - 1) as f64
    }

    pub fn point(&self, j: usize) -> f64 {
        self.min + j as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.point(j)).collect()
    }
}

/// Angular wavenumbers of an `n`-point grid with spacing `dx`, in FFT order.
pub fn wavenumbers(n: usize, dx: f64) -> Vec<f64> {
    let dk = 2.0 * std::f64::consts::PI / (n as f64 * dx);
    (0..n)
        .map(|j| {
            let m = if j <= (n - 1) / 2 { j as i64 } else { j as i64 - n as i64 };
            m as f64 * dk
        })
        .collect()
}

/// Forward/inverse FFT pair of a fixed length. `inverse` divides by `n`.
#[derive(Clone)]
pub struct Fft1d {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<C64>,
}

impl Fft1d {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        Self {
            n,
            fwd,
            inv,
            scratch: vec![C64::new(0.0, 0.0); len],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&mut self, data: &mut [C64]) {
        self.fwd.process_with_scratch(data, &mut self.scratch);
    }

    pub fn inverse(&mut self, data: &mut [C64]) {
        self.inv.process_with_scratch(data, &mut self.scratch);
        let s = 1.0 / self.n as f64;
        data.iter_mut().for_each(|v| *v *= s);
    }
}
