//! Small scalar numerics: Romberg quadrature and bracketed root finding.

use crate::error::{Error, Result};

/// Romberg integration of `f` over `[a, b]` to relative tolerance `rel_tol`.
///
/// For smooth periodic integrands over a whole period the trapezoid column
/// already converges geometrically, so the extrapolation costs nothing there.
pub fn romberg<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    const MAX_LEVEL: usize = 22;
    let h0 = b - a;
    if h0 == 0.0 {
        return Ok(0.0);
    }
    let mut prev_row: Vec<f64> = vec![0.5 * h0 * (f(a) + f(b))];
    let mut n_mid = 1usize;
    for level in 1..MAX_LEVEL {
        let h = h0 / (2 * n_mid) as f64;
        let mid_sum: f64 = (0..n_mid).map(|i| f(a + (2 * i + 1) as f64 * h)).sum();
        let mut row = Vec::with_capacity(level + 1);
        row.push(0.5 * prev_row[0] + h * mid_sum);
        let mut factor = 1.0;
        for j in 1..=level {
            factor *= 4.0;
            let r = row[j - 1] + (row[j - 1] - prev_row[j - 1]) / (factor - 1.0);
            row.push(r);
        }
        let best = row[level];
        let scale = best.abs().max(f64::MIN_POSITIVE);
        // Accept either a settled extrapolation or a settled trapezoid column.
        let d_extrap = (best - prev_row[level - 1]).abs();
        let d_trap = (row[0] - prev_row[0]).abs();
        if level >= 4 && (d_extrap <= rel_tol * scale || d_trap <= rel_tol * scale) {
            return Ok(if d_trap <= d_extrap { row[0] } else { best });
        }
        prev_row = row;
        n_mid *= 2;
    }
    Err(Error::Solver(format!(
        "Romberg quadrature on [{a}, {b}] did not reach relative tolerance {rel_tol:e}"
    )))
}

/// Root of `f` inside `[lo, hi]` by the Illinois variant of regula falsi.
///
/// Requires a sign change across the bracket.
pub fn bracketed_root<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    x_tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let mut f_lo = f(lo)?;
    let mut f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Solver(format!(
            "no sign change on [{lo}, {hi}]: f = ({f_lo:.4e}, {f_hi:.4e})"
        )));
    }
    let mut side = 0i8;
    for _ in 0..max_iter {
        let x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        let fx = f(x)?;
        if fx == 0.0 || (hi - lo).abs() < x_tol {
            return Ok(x);
        }
        if fx.signum() == f_hi.signum() {
            hi = x;
            f_hi = fx;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        } else {
            lo = x;
            f_lo = fx;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        }
        if (hi - lo).abs() < x_tol {
            return Ok(0.5 * (lo + hi));
        }
    }
    Err(Error::Solver(format!(
        "root search did not converge within {max_iter} iterations"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn romberg_polynomial_and_periodic() {
        let v = romberg(|x| x * x * x, 0.0, 2.0, 1e-13).unwrap();
        assert!((v - 4.0).abs() < 1e-12);
        // Bessel-type periodic integral: (1/2pi) int exp(cos y) dy = I0(1)
        let v = romberg(|y| y.cos().exp(), 0.0, 2.0 * PI, 1e-14).unwrap() / (2.0 * PI);
        assert!((v - 1.266_065_877_752_008_4).abs() < 1e-13);
    }

    #[test]
    fn illinois_finds_cos_root() {
        let r = bracketed_root(|x| Ok(x.cos() - x), 0.0, 1.0, 1e-14, 200).unwrap();
        assert!((r - 0.739_085_133_215_160_6).abs() < 1e-12);
    }

    #[test]
    fn illinois_rejects_bad_bracket() {
        assert!(bracketed_root(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-10, 50).is_err());
    }
}
