//! Bloch-Floquet bands of the straight continuum superlattice by plane-wave
//! expansion, and the tight-binding fit of its two lowest bands.
//!
//! Modes are `E = u_n(x, q) exp(i q x) exp(-i omega_n z)` with `u_n`
//! periodic over the cell `2a`, expanded as `u = sum_m c_m exp(i G_m x)`,
//! `G_m = pi m / a`. Eigenvalues are in cm^-1 in the frame of the wave
//! equation (guided bands are negative).

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::bpm::OpticsParams;
use crate::error::{Error, Result};
use crate::numerics::bracketed_root;
use crate::spectral::Fft1d;
use crate::tight_binding::{dispersion, SuperlatticeParams};
use crate::C64;

/// Samples per cell used to Fourier-analyse the index profile.
const CELL_SAMPLES: usize = 2048;

#[derive(Debug, Clone)]
pub struct BandStructure {
    /// `q a` of each sample, in `(-pi/2, pi/2]`.
    pub qa: Vec<f64>,
    /// `omega[band][iq]`, ascending in band index at every `q`.
    pub omega: Vec<Vec<f64>>,
    /// `modes[iq][band]`: unit-norm plane-wave coefficients `c_m`,
    /// `m = -M ..= M`. Empty for synthetic band sets.
    pub modes: Vec<Vec<Vec<C64>>>,
    pub spacing_um: f64,
}

impl BandStructure {
    pub fn n_bands(&self) -> usize {
        self.omega.len()
    }

    pub fn n_plane_waves(&self) -> usize {
        self.modes.first().and_then(|m| m.first()).map_or(0, |c| c.len())
    }

    /// `u_n(x, q)` of band `band` at sample `iq`, normalised so that
    /// `(1 / 2a) int_cell |u|^2 dx = 1`.
    pub fn periodic_part(&self, band: usize, iq: usize, x_um: f64) -> C64 {
        let c = &self.modes[iq][band];
        let m_max = (c.len() / 2) as i64;
        c.iter()
            .enumerate()
            .map(|(i, cm)| {
                let g = PI * (i as i64 - m_max) as f64 / self.spacing_um;
                cm * C64::from_polar(1.0, g * x_um)
            })
            .sum()
    }

    /// Bands from the tight-binding dispersion, shifted by `offset`.
    pub fn from_tight_binding(params: &SuperlatticeParams, n_q: usize, offset: f64) -> Self {
        let qa = zone_samples(n_q);
        let (lo, hi): (Vec<f64>, Vec<f64>) = qa
            .iter()
            .map(|&q| {
                let (m, p) = dispersion(q, params);
                (m + offset, p + offset)
            })
            .unzip();
        Self {
            qa,
            omega: vec![lo, hi],
            modes: Vec::new(),
            spacing_um: params.spacing_um,
        }
    }
}

/// `n_q` uniform samples of `q a` in `(-pi/2, pi/2]`.
pub fn zone_samples(n_q: usize) -> Vec<f64> {
    (0..n_q).map(|i| -0.5 * PI + PI * (i + 1) as f64 / n_q as f64).collect()
}

/// Fourier coefficients `V_j`, `j = -2M ..= 2M`, of the cell potential
/// `2 pi (n_s - n(x)) / lambda`.
fn potential_coefficients(optics: &OpticsParams, m_max: usize) -> Result<Vec<C64>> {
    let span = 2 * m_max;
    if 2 * span + 1 >= CELL_SAMPLES {
        return Err(Error::param("n_plane_waves", "too many plane waves for the cell sampling"));
    }
    let cell = 2.0 * optics.spacing_um;
    let dx = cell / CELL_SAMPLES as f64;
    let scale = optics.index_scale();
    let mut v: Vec<C64> = (0..CELL_SAMPLES)
        .map(|j| C64::new(-scale * optics.periodic_index_change(j as f64 * dx), 0.0))
        .collect();
    Fft1d::new(CELL_SAMPLES).forward(&mut v);
    let inv = 1.0 / CELL_SAMPLES as f64;
    Ok((-(span as i64)..=span as i64)
        .map(|j| v[j.rem_euclid(CELL_SAMPLES as i64) as usize] * inv)
        .collect())
}

fn hamiltonian(optics: &OpticsParams, vhat: &[C64], m_max: usize, qa: f64) -> DMatrix<C64> {
    let n = 2 * m_max + 1;
    let a = optics.spacing_um;
    let d = optics.diffraction();
    let span = 2 * m_max as i64;
    DMatrix::from_fn(n, n, |r, c| {
        let j = r as i64 - c as i64;
        let mut h = vhat[(j + span) as usize];
        if r == c {
            let k = qa / a + PI * (r as i64 - m_max as i64) as f64 / a;
            h += d * k * k;
        }
        h
    })
}

fn check_truncation(n_plane_waves: usize) -> Result<usize> {
    if n_plane_waves % 2 == 0 || n_plane_waves < 41 {
        return Err(Error::param("n_plane_waves", "need an odd count of at least 41"));
    }
    Ok(n_plane_waves / 2)
}

/// Lowest `n_bands` bands at the given `q a` values.
pub fn plane_wave_bands_at(
    optics: &OpticsParams,
    n_plane_waves: usize,
    qa: &[f64],
    n_bands: usize,
) -> Result<BandStructure> {
    optics.validate()?;
    let m_max = check_truncation(n_plane_waves)?;
    let n_bands = n_bands.min(n_plane_waves);
    let vhat = potential_coefficients(optics, m_max)?;

    let solved: Vec<Result<(Vec<f64>, Vec<Vec<C64>>)>> = qa
        .par_iter()
        .map(|&q| {
            let h = hamiltonian(optics, &vhat, m_max, q);
            let herm = (&h - h.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max);
            let scale = h.iter().map(|v| v.norm()).fold(0.0, f64::max);
            if herm > 1e-12 * scale.max(1.0) {
                return Err(Error::Solver(format!("plane-wave matrix not Hermitian: {herm:.2e}")));
            }
            let eig = h.symmetric_eigen();
            if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
                return Err(Error::Solver(format!("eigen-solver failed at qa = {q}")));
            }
            let mut order: Vec<usize> = (0..n_plane_waves).collect();
            order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
            let w = order[..n_bands].iter().map(|&i| eig.eigenvalues[i]).collect();
            let modes = order[..n_bands]
                .iter()
                .map(|&i| eig.eigenvectors.column(i).iter().cloned().collect())
                .collect();
            Ok((w, modes))
        })
        .collect();

    let mut omega = vec![Vec::with_capacity(qa.len()); n_bands];
    let mut modes = Vec::with_capacity(qa.len());
    for r in solved {
        let (w, m) = r?;
        for (b, v) in w.into_iter().enumerate() {
            omega[b].push(v);
        }
        modes.push(m);
    }
    Ok(BandStructure {
        qa: qa.to_vec(),
        omega,
        modes,
        spacing_um: optics.spacing_um,
    })
}

/// Band diagram on `n_q` uniform zone samples; warns when adding 20 plane
/// waves moves the two lowest bands by more than 1e-4 cm^-1.
pub fn plane_wave_bands(optics: &OpticsParams, n_plane_waves: usize, n_q: usize) -> Result<BandStructure> {
    let qa = zone_samples(n_q);
    let bands = plane_wave_bands_at(optics, n_plane_waves, &qa, 4)?;
    let shift = truncation_shift(optics, n_plane_waves)?;
    if shift > 1e-4 {
        log::warn!("plane-wave truncation: bands move by {shift:.2e} cm^-1 with 20 more plane waves");
    }
    Ok(bands)
}

/// Largest change of the two lowest bands when 20 plane waves are added,
/// checked at a few zone points.
pub fn truncation_shift(optics: &OpticsParams, n_plane_waves: usize) -> Result<f64> {
    let probe = [0.0, 0.25 * PI, 0.5 * PI];
    let a = plane_wave_bands_at(optics, n_plane_waves, &probe, 2)?;
    let b = plane_wave_bands_at(optics, n_plane_waves + 20, &probe, 2)?;
    Ok(a.omega
        .iter()
        .flatten()
        .zip(b.omega.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TightBindingFit {
    pub sigma: f64,
    pub delta: f64,
    /// RMS deviation of the half-splitting from the fitted law, cm^-1.
    pub residual: f64,
    /// Mean midgap position of the two bands, cm^-1.
    pub offset: f64,
    /// Residual above 10% of the half-splitting bandwidth.
    pub poor_fit: bool,
}

/// Fit `(omega_2 - omega_1) / 2 = sqrt(delta^2 + 4 sigma^2 cos^2(qa))`.
///
/// A linear least-squares fit of the squared splitting seeds a Gauss-Newton
/// refinement on the splitting itself.
pub fn fit_tight_binding(bands: &BandStructure) -> Result<TightBindingFit> {
    if bands.n_bands() < 2 || bands.qa.len() < 2 {
        return Err(Error::param("bands", "need two bands on at least two q samples"));
    }
    let g: Vec<f64> = bands.omega[1].iter().zip(&bands.omega[0]).map(|(u, l)| 0.5 * (u - l)).collect();
    let c2: Vec<f64> = bands.qa.iter().map(|q| q.cos().powi(2)).collect();
    let offset = bands.omega[1].iter().zip(&bands.omega[0]).map(|(u, l)| 0.5 * (u + l)).sum::<f64>()
        / g.len() as f64;

    // g^2 = d2 + 4 s2 c2, linear in (d2, s2)
    let n = g.len() as f64;
    let (sx, sy) = (c2.iter().sum::<f64>(), g.iter().map(|v| v * v).sum::<f64>());
    let sxx = c2.iter().map(|c| c * c).sum::<f64>();
    let sxy = c2.iter().zip(&g).map(|(c, v)| c * v * v).sum::<f64>();
    let det = n * sxx - sx * sx;
    if det.abs() < 1e-300 {
        return Err(Error::Degenerate("q samples do not resolve cos^2(qa)".into()));
    }
    let slope = (n * sxy - sx * sy) / det;
    let icpt = (sy - slope * sx) / n;
    let mut sigma = (0.25 * slope).max(0.0).sqrt();
    let mut delta = icpt.max(0.0).sqrt();
    if sigma == 0.0 {
        sigma = 1e-3 * g.iter().cloned().fold(0.0, f64::max).max(1e-12);
    }
    if delta == 0.0 {
        delta = 1e-3 * sigma;
    }

    for _ in 0..50 {
        let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (gi, ci) in g.iter().zip(&c2) {
            let model = (delta * delta + 4.0 * sigma * sigma * ci).sqrt();
            let (jd, js) = (delta / model, 4.0 * sigma * ci / model);
            let r = gi - model;
            a11 += jd * jd;
            a12 += jd * js;
            a22 += js * js;
            b1 += jd * r;
            b2 += js * r;
        }
        let det = a11 * a22 - a12 * a12;
        if det.abs() < 1e-300 {
            break;
        }
        let dd = (a22 * b1 - a12 * b2) / det;
        let ds = (a11 * b2 - a12 * b1) / det;
        delta += dd;
        sigma += ds;
        if dd.abs() <= 1e-15 * delta.abs().max(1.0) && ds.abs() <= 1e-15 * sigma.abs().max(1.0) {
            break;
        }
    }
    let (delta, sigma) = (delta.abs(), sigma.abs());
    let residual = (g
        .iter()
        .zip(&c2)
        .map(|(gi, ci)| (gi - (delta * delta + 4.0 * sigma * sigma * ci).sqrt()).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let width = g.iter().cloned().fold(f64::MIN, f64::max) - g.iter().cloned().fold(f64::MAX, f64::min);
    let poor_fit = residual > 0.1 * width.max(f64::MIN_POSITIVE);
    if poor_fit {
        log::warn!("tight-binding fit residual {residual:.3e} exceeds 10% of the band width");
    }
    Ok(TightBindingFit {
        sigma,
        delta,
        residual,
        offset,
        poor_fit,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub channel_width_um: f64,
    pub dn2: f64,
    pub fit: TightBindingFit,
}

/// Search settings for [`calibrate_channel`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationSearch {
    pub width_bracket_um: (f64, f64),
    pub n_plane_waves: usize,
    pub n_q: usize,
    /// Relative tolerance on both fitted constants.
    pub rel_tol: f64,
}

impl Default for CalibrationSearch {
    fn default() -> Self {
        Self {
            width_bracket_um: (5.0, 8.0),
            n_plane_waves: 81,
            n_q: 128,
            rel_tol: 1e-6,
        }
    }
}

fn fitted(optics: &OpticsParams, search: &CalibrationSearch) -> Result<TightBindingFit> {
    let qa = zone_samples(search.n_q);
    fit_tight_binding(&plane_wave_bands_at(optics, search.n_plane_waves, &qa, 2)?)
}

/// Adjust the channel width so the fitted `sigma` hits `target_sigma`, then
/// `dn2` so the fitted `delta` hits `target_delta`, alternating until both hold.
pub fn calibrate_channel(
    target_sigma: f64,
    target_delta: f64,
    template: &OpticsParams,
    search: &CalibrationSearch,
) -> Result<Calibration> {
    let (w_lo, w_hi) = search.width_bracket_um;
    let mut optics = *template;

    // sigma must grow with width across the bracket
    let probes: Vec<f64> = (0..5).map(|i| w_lo + (w_hi - w_lo) * i as f64 / 4.0).collect();
    let mut last = f64::NEG_INFINITY;
    for &w in &probes {
        let s = fitted(&OpticsParams { channel_width_um: w, ..optics }, search)?.sigma;
        if s <= last {
            return Err(Error::Calibration(format!(
                "fitted sigma is not increasing with width in [{w_lo}, {w_hi}] um (sigma {s:.4} at {w} um)"
            )));
        }
        last = s;
    }

    let diag = |what: &str, e: Error| Error::Calibration(format!("{what} search failed: {e}"));
    for _ in 0..20 {
        let fit = fitted(&optics, search)?;
        let ok_s = (fit.sigma - target_sigma).abs() <= search.rel_tol * target_sigma;
        let ok_d = (fit.delta - target_delta).abs() <= search.rel_tol * target_delta;
        if ok_s && ok_d {
            return Ok(Calibration {
                channel_width_um: optics.channel_width_um,
                dn2: optics.dn2,
                fit,
            });
        }
        if !ok_s {
            let base = optics;
            optics.channel_width_um = bracketed_root(
                |w| Ok(fitted(&OpticsParams { channel_width_um: w, ..base }, search)?.sigma - target_sigma),
                w_lo,
                w_hi,
                1e-9,
                100,
            )
            .map_err(|e| diag("width", e))?;
        }
        let base = optics;
        optics.dn2 = bracketed_root(
            |dn2| Ok(fitted(&OpticsParams { dn2, ..base }, search)?.delta - target_delta),
            0.9 * base.dn1,
            base.dn1,
            1e-13,
            100,
        )
        .map_err(|e| diag("dn2", e))?;
    }
    Err(Error::Calibration(format!(
        "width/dn2 alternation did not settle on sigma = {target_sigma}, delta = {target_delta}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_medium_gives_folded_parabola() {
        let optics = OpticsParams {
            dn1: 1e-12,
            dn2: 1e-12,
            ..OpticsParams::default()
        };
        let qa = [0.3, -1.0, 0.5 * PI];
        let b = plane_wave_bands_at(&optics, 41, &qa, 4).unwrap();
        let d = optics.diffraction();
        let a = optics.spacing_um;
        for (iq, q) in qa.iter().enumerate() {
            let mut free: Vec<f64> = (-3i64..=3)
                .map(|m| {
                    let k = q / a + PI * m as f64 / a;
                    d * k * k
                })
                .collect();
            free.sort_by(f64::total_cmp);
            for band in 0..4 {
                assert!((b.omega[band][iq] - free[band]).abs() < 1e-6, "band {band} q {q}");
            }
        }
    }

    #[test]
    fn bands_are_even_and_modes_orthonormal() {
        let optics = OpticsParams::default();
        let b = plane_wave_bands_at(&optics, 41, &[0.4, -0.4], 3).unwrap();
        for band in 0..3 {
            assert!((b.omega[band][0] - b.omega[band][1]).abs() < 1e-10);
        }
        for i in 0..3 {
            for j in 0..3 {
                let dot: C64 = b.modes[0][i].iter().zip(&b.modes[0][j]).map(|(x, y)| x.conj() * y).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn synthetic_fit_is_exact() {
        let p = SuperlatticeParams::fitted_silica(2);
        let b = BandStructure::from_tight_binding(&p, 128, -7.5);
        let fit = fit_tight_binding(&b).unwrap();
        assert!((fit.sigma - 2.0).abs() < 1e-10, "{}", fit.sigma);
        assert!((fit.delta - 1.817).abs() < 1e-10, "{}", fit.delta);
        assert!((fit.offset + 7.5).abs() < 1e-12);
        assert!(fit.residual < 1e-10 && !fit.poor_fit);
    }

    #[test]
    fn truncation_rules() {
        let optics = OpticsParams::default();
        assert!(plane_wave_bands_at(&optics, 40, &[0.0], 2).is_err());
        assert!(plane_wave_bands_at(&optics, 39, &[0.0], 2).is_err());
    }

    #[test]
    fn periodic_part_is_cell_periodic() {
        let optics = OpticsParams::default();
        let b = plane_wave_bands_at(&optics, 41, &[0.7], 2).unwrap();
        for x in [0.0, 3.3, -7.1] {
            let u0 = b.periodic_part(0, 0, x);
            let u1 = b.periodic_part(0, 0, x + 2.0 * optics.spacing_um);
            assert!((u0 - u1).norm() < 1e-10 * u0.norm().max(1.0));
        }
    }
}
