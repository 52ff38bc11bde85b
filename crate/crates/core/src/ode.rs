//! Classical fixed-step fourth-order Runge-Kutta for complex state vectors.
//!
//! Every tier that integrates an ODE (two-level, tight-binding) goes through
//! this one stepper so cross-tier comparisons see the same truncation error
//! structure.

use num_complex::Complex64 as C64;

/// Reusable RK4 workspace for states of a fixed length.
pub struct Rk4 {
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
}

impl Rk4 {
    pub fn new(len: usize) -> Self {
        let zero = vec![C64::new(0.0, 0.0); len];
        Self {
            k1: zero.clone(),
            k2: zero.clone(),
            k3: zero.clone(),
            k4: zero.clone(),
            tmp: zero,
        }
    }

    /// Advance `y` from `z` to `z + h` for `dy/dz = f(z, y)`.
    ///
    /// `f(z, y, out)` must overwrite `out` with the derivative.
    pub fn step<F>(&mut self, f: &mut F, z: f64, y: &mut [C64], h: f64)
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        let n = y.len();
        debug_assert_eq!(n, self.k1.len());
        let half = 0.5 * h;

        f(z, y, &mut self.k1);
        for i in 0..n {
            self.tmp[i] = y[i] + self.k1[i] * half;
        }
        f(z + half, &self.tmp, &mut self.k2);
        for i in 0..n {
            self.tmp[i] = y[i] + self.k2[i] * half;
        }
        f(z + half, &self.tmp, &mut self.k3);
        for i in 0..n {
            self.tmp[i] = y[i] + self.k3[i] * h;
        }
        f(z + h, &self.tmp, &mut self.k4);

        let sixth = h / 6.0;
        for i in 0..n {
            y[i] += (self.k1[i] + (self.k2[i] + self.k3[i]) * 2.0 + self.k4[i]) * sixth;
        }
    }
}

/// Number of whole steps of size close to `dz` covering `[0, span]`, and the
/// adjusted step that lands exactly on `span`.
pub fn step_plan(span: f64, dz: f64) -> (usize, f64) {
    if span <= 0.0 {
        return (0, dz);
    }
    let n = (span / dz - 1e-9).ceil().max(1.0) as usize;
    (n, span / n as f64)
}

pub fn norm_sqr(y: &[C64]) -> f64 {
    y.iter().map(|c| c.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_phase_is_fourth_order() {
        // i dy/dz = w y  =>  y = exp(-i w z)
        let w = 3.0;
        let err = |h: f64| {
            let mut rk = Rk4::new(1);
            let mut y = vec![C64::new(1.0, 0.0)];
            let (n, h) = step_plan(1.0, h);
            let mut f = |_z: f64, y: &[C64], out: &mut [C64]| out[0] = -C64::i() * w * y[0];
            for k in 0..n {
                rk.step(&mut f, k as f64 * h, &mut y, h);
            }
            (y[0] - C64::from_polar(1.0, -w)).norm()
        };
        let ratio = err(0.02) / err(0.01);
        assert!((ratio - 16.0).abs() < 1.0, "ratio {ratio}");
    }

    #[test]
    fn step_plan_lands_on_span() {
        let (n, h) = step_plan(2.8556, 2.8556 / 2000.0);
        assert_eq!(n, 2000);
        assert!((h * n as f64 - 2.8556).abs() < 1e-12);
        let (n, h) = step_plan(1.0, 0.3);
        assert_eq!(n, 4);
        assert!((h - 0.25).abs() < 1e-15);
    }
}
