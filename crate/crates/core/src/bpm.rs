//! Split-step solution of the paraxial wave equation in the waveguide frame,
//! `i dE/dz = -D d2E/dx2 + V(x) E + F(z) (x/a) E`,
//! with `D = lambda / (4 pi n_s)`, `V = 2 pi (n_s - n(x)) / lambda` and the
//! bending force `F = 2 pi n_s a x0''(z) / lambda`.
//!
//! `x` is in um and `z` in cm throughout, so `D` is carried in um^2/cm.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::drive::{DriveProfile, OpticalConstants, UM_TO_CM};
use crate::error::{Error, Result};
use crate::ode::step_plan;
use crate::spectral::{wavenumbers, Fft1d, UniformGrid};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelShape {
    /// `dn exp(-|2 (x - xc) / w|^order)`
    SuperGaussian { order: f64 },
    /// `dn cos^2(pi (x - xc) / w)` for `|x - xc| < w/2`, zero outside.
    RaisedCosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OpticsParams {
    pub n_s: f64,
    pub lambda_cm: f64,
    /// Peak index change of sublattice A guides.
    pub dn1: f64,
    /// Peak index change of sublattice B guides.
    pub dn2: f64,
    pub spacing_um: f64,
    pub channel_width_um: f64,
    pub channel_shape: ChannelShape,
}

/// Channel width that, with [`CALIBRATED_DN2`], puts the two lowest bands on
/// sigma = 2 cm^-1, delta = 1.817 cm^-1 (order-4 super-Gaussian guides).
pub const CALIBRATED_WIDTH_UM: f64 = 6.608_05;
pub const CALIBRATED_DN2: f64 = 0.001_957_74;

impl Default for OpticsParams {
    fn default() -> Self {
        Self {
            n_s: 1.42,
            lambda_cm: 633e-7,
            dn1: 0.002,
            dn2: CALIBRATED_DN2,
            spacing_um: 10.0,
            channel_width_um: CALIBRATED_WIDTH_UM,
            channel_shape: ChannelShape::SuperGaussian { order: 4.0 },
        }
    }
}

impl OpticsParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.n_s > 0.0) {
            return Err(Error::param("n_s", "substrate index must be positive"));
        }
        if !(self.lambda_cm > 0.0) {
            return Err(Error::param("lambda_cm", "wavelength must be positive"));
        }
        if !(self.dn2 > 0.0) || !(self.dn1 >= self.dn2) {
            return Err(Error::param("dn1", "need dn1 >= dn2 > 0"));
        }
        if !(self.spacing_um > 0.0) {
            return Err(Error::param("spacing_um", "spacing must be positive"));
        }
        if !(self.channel_width_um > 0.0) {
            return Err(Error::param("channel_width_um", "width must be positive"));
        }
        if self.channel_width_um >= self.spacing_um {
            return Err(Error::Geometry(format!(
                "channel width {} um overlaps neighbours at spacing {} um",
                self.channel_width_um, self.spacing_um
            )));
        }
        if let ChannelShape::SuperGaussian { order } = self.channel_shape {
            if !(order >= 2.0) {
                return Err(Error::param("channel_shape.order", "super-Gaussian order must be at least 2"));
            }
        }
        Ok(())
    }

    pub fn constants(&self) -> OpticalConstants {
        OpticalConstants {
            n_s: self.n_s,
            lambda_cm: self.lambda_cm,
            spacing_um: self.spacing_um,
        }
    }

    /// Diffraction coefficient `lambda / (4 pi n_s)` in um^2/cm.
    pub fn diffraction(&self) -> f64 {
        self.lambda_cm / (4.0 * PI * self.n_s) / (UM_TO_CM * UM_TO_CM)
    }

    /// Wavenumber per unit index change, `2 pi / lambda` in cm^-1.
    pub fn index_scale(&self) -> f64 {
        2.0 * PI / self.lambda_cm
    }

    /// Index change of one channel centred at the origin.
    pub fn channel(&self, dn: f64, dx: f64) -> f64 {
        let w = self.channel_width_um;
        match self.channel_shape {
            ChannelShape::SuperGaussian { order } => dn * (-(2.0 * dx / w).abs().powf(order)).exp(),
            ChannelShape::RaisedCosine => {
                if dx.abs() < 0.5 * w {
                    dn * (PI * dx / w).cos().powi(2)
                } else {
                    0.0
                }
            }
        }
    }

    /// Index change of the infinite superlattice at `x` (A guide at the origin).
    pub fn periodic_index_change(&self, x: f64) -> f64 {
        let a = self.spacing_um;
        let cell = 2.0 * a;
        let u = x - cell * (x / cell).round();
        // images within reach of the channel tails
        (-2..=2)
            .map(|m| {
                let xa = m as f64 * cell;
                self.channel(self.dn1, u - xa) + self.channel(self.dn2, u - xa - a)
            })
            .sum()
    }
}

/// Bragg angle `lambda / (4 n_s a)` in radians.
pub fn bragg_angle(optics: &OpticalConstants) -> f64 {
    optics.lambda_cm / (4.0 * optics.n_s * optics.spacing_um * UM_TO_CM)
}

/// Grid of `cells` superlattice periods sampled at `n` points, centred on 0.
pub fn lattice_grid(optics: &OpticsParams, cells: usize, n: usize) -> Result<UniformGrid> {
    let period = cells as f64 * 2.0 * optics.spacing_um;
    UniformGrid::from_spacing(-0.5 * period, period / n as f64, n)
}

/// Index profile `n(x)` of an `n_guides` array, guides `g = -n/2 .. n/2 - 1`
/// at `x = g a`; even `g` are sublattice A (`dn1`).
pub fn build_index_profile(optics: &OpticsParams, n_guides: usize, grid: &UniformGrid) -> Result<Vec<f64>> {
    optics.validate()?;
    if n_guides == 0 || n_guides % 2 != 0 {
        return Err(Error::param("n_guides", "need a positive even number of guides"));
    }
    let half = (n_guides / 2) as i64;
    let a = optics.spacing_um;
    Ok(grid
        .points()
        .iter()
        .map(|&x| {
            // only guides within a few widths contribute
            let g0 = (x / a).round() as i64;
            let dn: f64 = (g0 - 2..=g0 + 2)
                .filter(|g| (-half..half).contains(g))
                .map(|g| {
                    let dn = if g.rem_euclid(2) == 0 { optics.dn1 } else { optics.dn2 };
                    optics.channel(dn, x - g as f64 * a)
                })
                .sum();
            optics.n_s + dn
        })
        .collect())
}

/// Raised-cosine absorbing layers on both grid edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Absorber {
    /// Fraction of the window covered by each layer; 0 disables absorption.
    pub fraction: f64,
    /// Peak damping rate, cm^-1.
    pub strength_per_cm: f64,
    /// Absorbed power (relative to the input) that triggers a warning.
    pub warn_intake: f64,
    /// Absorbed power that aborts the run.
    pub error_intake: f64,
}

impl Default for Absorber {
    fn default() -> Self {
        Self {
            fraction: 0.1,
            strength_per_cm: 100.0,
            warn_intake: 1e-3,
            error_intake: 1e-2,
        }
    }
}

impl Absorber {
    pub fn disabled() -> Self {
        Self {
            fraction: 0.0,
            ..Self::default()
        }
    }

    fn mask(&self, grid: &UniformGrid, dz: f64) -> Option<Vec<f64>> {
        if self.fraction <= 0.0 || self.strength_per_cm <= 0.0 {
            return None;
        }
        let width = self.fraction * (grid.max - grid.min);
        Some(
            grid.points()
                .iter()
                .map(|&x| {
                    let depth = (grid.min + width - x).max(x - (grid.max - width)).max(0.0) / width;
                    let s = (0.5 * PI * depth.min(1.0)).sin();
                    (-self.strength_per_cm * dz * s * s).exp()
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub envelope: Vec<C64>,
    pub grid: UniformGrid,
    pub z: f64,
    pub absorber: Absorber,
}

impl FieldGrid {
    pub fn new(envelope: Vec<C64>, grid: UniformGrid, absorber: Absorber) -> Result<Self> {
        if envelope.len() != grid.n {
            return Err(Error::Shape(format!("{} samples on a {}-point grid", envelope.len(), grid.n)));
        }
        Ok(Self {
            envelope,
            grid,
            z: 0.0,
            absorber,
        })
    }

    /// `int |E|^2 dx`.
    pub fn power(&self) -> f64 {
        self.envelope.iter().map(|e| e.norm_sqr()).sum::<f64>() * self.grid.spacing()
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.envelope.iter().map(|e| e.norm_sqr()).collect()
    }

    pub fn normalize(&mut self) {
        let s = self.power().sqrt();
        self.envelope.iter_mut().for_each(|e| *e /= s);
    }
}

/// `exp[-(x/w0)^2] exp(2 pi i n_s x theta / lambda)`, normalised to unit power.
pub fn gaussian_tilted_input(
    w0_um: f64,
    theta: f64,
    optics: &OpticsParams,
    grid: &UniformGrid,
    absorber: Absorber,
) -> Result<FieldGrid> {
    if !(w0_um > 0.0) {
        return Err(Error::param("w0_um", "spot size must be positive"));
    }
    let kx = 2.0 * PI * optics.n_s * theta / optics.lambda_cm * UM_TO_CM;
    let env = grid
        .points()
        .iter()
        .map(|&x| C64::from_polar((-(x / w0_um).powi(2)).exp(), kx * x))
        .collect();
    let mut f = FieldGrid::new(env, *grid, absorber)?;
    f.normalize();
    Ok(f)
}

/// How the bending force enters the propagator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveGauge {
    /// Linear ramp `F(z) x / a` in the potential step, as in the wave equation.
    Length,
    /// Field carried as `E' = E exp(i Phi x / a)`; the drive shifts the
    /// diffraction kernel to `D (kappa - Phi / a)^2`. Stored snapshots are
    /// mapped back to `E`.
    Velocity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpmSettings {
    pub dz_cm: f64,
    /// Store every n-th step (first and last always stored).
    pub snapshot_every: usize,
    pub gauge: DriveGauge,
}

impl Default for BpmSettings {
    fn default() -> Self {
        Self {
            dz_cm: 5e-4,
            snapshot_every: usize::MAX,
            gauge: DriveGauge::Length,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BpmOutput {
    pub snapshots: Vec<FieldGrid>,
    /// Power removed by the absorber over the run.
    pub absorbed: f64,
    pub steps: usize,
}

/// Propagate `input` through the index profile `index` (sampled on the
/// input grid) from `input.z` to `z_end`.
pub fn bpm_run(
    input: &FieldGrid,
    index: &[f64],
    optics: &OpticsParams,
    drive: &DriveProfile,
    z_end: f64,
    settings: &BpmSettings,
) -> Result<BpmOutput> {
    optics.validate()?;
    let grid = input.grid;
    let n = grid.n;
    if index.len() != n {
        return Err(Error::Shape(format!("index profile has {} samples, field {}", index.len(), n)));
    }
    if !(settings.dz_cm > 0.0) {
        return Err(Error::param("dz_cm", "step must be positive"));
    }
    if z_end < input.z {
        return Err(Error::param("z_end", "cannot integrate backwards"));
    }
    drive.check_span(input.z, z_end)?;

    let (steps, h) = step_plan(z_end - input.z, settings.dz_cm);
    let x = grid.points();
    let inv_a = 1.0 / optics.spacing_um;
    let potential: Vec<f64> = index.iter().map(|ni| optics.index_scale() * (optics.n_s - ni)).collect();
    let half_v: Vec<C64> = potential.iter().map(|v| C64::from_polar(1.0, -0.5 * h * v)).collect();
    let kappa = wavenumbers(n, grid.spacing());
    let d = optics.diffraction();
    let free_kernel: Vec<C64> = kappa.iter().map(|k| C64::from_polar(1.0, -d * k * k * h)).collect();
    let mask = input.absorber.mask(&grid, h);
    let p0 = input.power();
    let dx = grid.spacing();

    let mut fft = Fft1d::new(n);
    let mut field = input.envelope.clone();
    let gauge = settings.gauge;
    let to_carried = |f: &mut [C64], phi: f64| {
        if gauge == DriveGauge::Velocity && phi != 0.0 {
            for (e, x) in f.iter_mut().zip(&x) {
                *e *= C64::from_polar(1.0, phi * x * inv_a);
            }
        }
    };
    let to_physical = |f: &mut [C64], phi: f64| {
        if gauge == DriveGauge::Velocity && phi != 0.0 {
            for (e, x) in f.iter_mut().zip(&x) {
                *e *= C64::from_polar(1.0, -phi * x * inv_a);
            }
        }
    };
    to_carried(&mut field, drive.phase_at(input.z));

    let every = settings.snapshot_every.max(1);
    let mut snapshots = vec![input.clone()];
    let mut absorbed = 0.0;
    let mut warned = false;
    let mut kernel = free_kernel.clone();
    for i in 0..steps {
        let z0 = input.z + i as f64 * h;
        let (z1, zm) = (z0 + h, z0 + 0.5 * h);
        match gauge {
            DriveGauge::Length => {
                let (p0, pm, p1) = (drive.phase_at(z0), drive.phase_at(zm), drive.phase_at(z1));
                potential_step(&mut field, &half_v, &x, inv_a * (pm - p0));
                fft.forward(&mut field);
                for (e, k) in field.iter_mut().zip(&free_kernel) {
                    *e *= k;
                }
                fft.inverse(&mut field);
                potential_step(&mut field, &half_v, &x, inv_a * (p1 - pm));
            }
            DriveGauge::Velocity => {
                let int_phi = drive.phase_integral(z0, z1) * inv_a;
                let int_phi2 = drive.phase_sqr_integral(z0, z1) * inv_a * inv_a;
                for ((kern, k), free) in kernel.iter_mut().zip(&kappa).zip(&free_kernel) {
                    *kern = free * C64::from_polar(1.0, d * (2.0 * k * int_phi - int_phi2));
                }
                potential_step(&mut field, &half_v, &x, 0.0);
                fft.forward(&mut field);
                for (e, k) in field.iter_mut().zip(&kernel) {
                    *e *= k;
                }
                fft.inverse(&mut field);
                potential_step(&mut field, &half_v, &x, 0.0);
            }
        }
        if let Some(m) = &mask {
            let mut lost = 0.0;
            for (e, m) in field.iter_mut().zip(m) {
                if *m < 1.0 {
                    let before = e.norm_sqr();
                    *e *= *m;
                    lost += before - e.norm_sqr();
                }
            }
            absorbed += lost * dx;
            let intake = absorbed / p0;
            if intake > input.absorber.error_intake {
                return Err(Error::DomainOverflow(format!(
                    "absorber took {intake:.3e} of the input power by z = {z1:.4} cm"
                )));
            }
            if intake > input.absorber.warn_intake && !warned {
                log::warn!("absorber intake {intake:.3e} of input power at z = {z1:.4} cm");
                warned = true;
            }
        }
        if (i + 1) % every == 0 || i + 1 == steps {
            let mut env = field.clone();
            to_physical(&mut env, drive.phase_at(z1));
            snapshots.push(FieldGrid {
                envelope: env,
                grid,
                z: z1,
                absorber: input.absorber,
            });
        }
    }
    Ok(BpmOutput {
        snapshots,
        absorbed,
        steps,
    })
}

fn potential_step(field: &mut [C64], half_v: &[C64], x: &[f64], ramp: f64) {
    if ramp == 0.0 {
        for (e, v) in field.iter_mut().zip(half_v) {
            *e *= v;
        }
    } else {
        for ((e, v), x) in field.iter_mut().zip(half_v).zip(x) {
            *e *= v * C64::from_polar(1.0, -ramp * x);
        }
    }
}

/// Free Gaussian beam `w0 / sqrt(w0^2 + 4 i D z) exp(-x^2 / (w0^2 + 4 i D z))`.
pub fn free_gaussian(x: f64, z: f64, w0: f64, diffraction: f64) -> C64 {
    let q = C64::new(w0 * w0, 4.0 * diffraction * z);
    (C64::new(w0, 0.0) / q.sqrt()) * (-(x * x) / q).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bragg_angle_values() {
        let o = OpticsParams::default().constants();
        let t = bragg_angle(&o);
        assert!((t.to_degrees() - 0.6385).abs() < 1e-3, "{}", t.to_degrees());
        let wide = OpticalConstants { spacing_um: 20.0, ..o };
        assert!((bragg_angle(&wide) - 0.5 * t).abs() < 1e-15);
        let red = OpticalConstants { lambda_cm: 2.0 * o.lambda_cm, ..o };
        assert!((bragg_angle(&red) - 2.0 * t).abs() < 1e-15);
    }

    #[test]
    fn profile_values() {
        let optics = OpticsParams {
            channel_shape: ChannelShape::RaisedCosine,
            ..OpticsParams::default()
        };
        let grid = UniformGrid::new(-100.0, 100.0, 801).unwrap();
        let n = build_index_profile(&optics, 20, &grid).unwrap();
        let at = |x: f64| n[((x - grid.min) / grid.spacing()).round() as usize];
        assert!((at(0.0) - 1.422).abs() < 1e-12);
        assert!((at(5.0) - 1.42).abs() < 1e-15);
        assert!((at(10.0) - 1.42 - optics.dn2).abs() < 1e-12);
        let sg = build_index_profile(&OpticsParams::default(), 20, &grid).unwrap();
        let max = sg.iter().cloned().fold(0.0, f64::max);
        assert!((max - 1.422).abs() < 1e-12);
        for j in 200..400 {
            assert!((sg[j + 80] - sg[j]).abs() < 1e-15, "2a periodicity at {j}");
        }
    }

    #[test]
    fn overlapping_channels_rejected() {
        let optics = OpticsParams {
            channel_width_um: 10.0,
            ..OpticsParams::default()
        };
        let grid = UniformGrid::new(-50.0, 50.0, 101).unwrap();
        assert!(matches!(build_index_profile(&optics, 4, &grid), Err(Error::Geometry(_))));
        assert!(build_index_profile(&OpticsParams::default(), 5, &grid).is_err());
    }

    #[test]
    fn tilted_input_spectrum_centre() {
        let optics = OpticsParams::default();
        let grid = lattice_grid(&optics, 41, 4096).unwrap();
        let f = gaussian_tilted_input(80.0, 0.0, &optics, &grid, Absorber::disabled()).unwrap();
        assert!((f.power() - 1.0).abs() < 1e-14);
        assert!(f.envelope.iter().all(|e| e.im == 0.0 && e.re >= 0.0));

        let theta = 0.5 * bragg_angle(&optics.constants());
        let f = gaussian_tilted_input(80.0, theta, &optics, &grid, Absorber::disabled()).unwrap();
        let mut spec = f.envelope.clone();
        Fft1d::new(grid.n).forward(&mut spec);
        let k = wavenumbers(grid.n, grid.spacing());
        let w: f64 = spec.iter().map(|s| s.norm_sqr()).sum();
        let kbar: f64 = spec.iter().zip(&k).map(|(s, k)| s.norm_sqr() * k).sum::<f64>() / w;
        assert!((kbar * optics.spacing_um - PI / 4.0).abs() < 1e-6, "{}", kbar * optics.spacing_um);
    }

    #[test]
    fn free_diffraction_matches_closed_form() {
        let optics = OpticsParams::default();
        let grid = UniformGrid::from_spacing(-819.2, 0.4, 4096).unwrap();
        let w0 = 20.0;
        let input = gaussian_tilted_input(w0, 0.0, &optics, &grid, Absorber::disabled()).unwrap();
        let uniform = vec![optics.n_s; grid.n];
        let z = 1.5;
        let out = bpm_run(
            &input,
            &uniform,
            &optics,
            &DriveProfile::straight(),
            z,
            &BpmSettings { dz_cm: 0.05, ..BpmSettings::default() },
        )
        .unwrap();
        let last = out.snapshots.last().unwrap();
        let scale = input.envelope[grid.n / 2].re;
        let d = optics.diffraction();
        let mut worst = 0.0f64;
        let peak = free_gaussian(0.0, z, w0, d).norm();
        for (e, x) in last.envelope.iter().zip(grid.points()) {
            let exact = free_gaussian(x, z, w0, d) * scale;
            worst = worst.max((e - exact).norm() / (peak * scale));
        }
        assert!(worst < 1e-6, "{worst}");
    }
}
