//! Waveguide-axis bending and the gauge phase / transverse force it induces.
//!
//! A bent axis `x0(z)` appears, in the frame co-moving with the waveguides, as
//! a uniform transverse force `F(z) = 2 pi n_s a x0''(z) / lambda` acting on
//! the lattice. The accumulated phase `Phi(z) = int_0^z F = 2 pi n_s a x0'(z) / lambda`
//! is the Peierls phase per site after gauging the force away.
//!
//! Units: `z` and the period in cm, bending amplitude and lattice spacing in
//! micrometres, wavelength in cm. Rates come out in cm^-1.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) const UM_TO_CM: f64 = 1e-4;

/// Optical constants that convert a bending profile into a lattice phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalConstants {
    /// Substrate (bulk) refractive index.
    pub n_s: f64,
    /// Vacuum wavelength, cm.
    pub lambda_cm: f64,
    /// Distance between adjacent waveguides, um.
    pub spacing_um: f64,
}

impl OpticalConstants {
    /// Fused-silica array excited at 633 nm with 10 um guide spacing.
    pub const fn fused_silica_633() -> Self {
        Self {
            n_s: 1.42,
            lambda_cm: 633e-7,
            spacing_um: 10.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda_cm > 0.0) {
            return Err(Error::param("lambda_cm", "wavelength must be positive"));
        }
        if !(self.n_s > 0.0) {
            return Err(Error::param("n_s", "refractive index must be positive"));
        }
        if !(self.spacing_um > 0.0) {
            return Err(Error::param("spacing_um", "spacing must be positive"));
        }
        Ok(())
    }
}

/// `Phi_0 = 4 pi^2 n_s a A / (lambda Lambda)` for a sinusoidal bend of amplitude `A`.
pub fn phase_amplitude(amplitude_um: f64, period_cm: f64, optics: &OpticalConstants) -> Result<f64> {
    optics.validate()?;
    if !(period_cm > 0.0) {
        return Err(Error::param("period_cm", "modulation period must be positive"));
    }
    let a_cm = optics.spacing_um * UM_TO_CM;
    let amp_cm = amplitude_um * UM_TO_CM;
    Ok(4.0 * PI * PI * optics.n_s * a_cm * amp_cm / (optics.lambda_cm * period_cm))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveKind {
    Straight,
    Sinusoidal,
    SingleCycle,
    Tabulated,
}

/// Bending geometry a profile was built from, kept for reporting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bending {
    pub amplitude_um: f64,
    pub optics: OpticalConstants,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriveProfile {
    kind: DriveKind,
    phi0: f64,
    period_cm: f64,
    bending: Option<Bending>,
    table: Option<PhaseTable>,
}

impl DriveProfile {
    pub fn straight() -> Self {
        Self {
            kind: DriveKind::Straight,
            phi0: 0.0,
            period_cm: f64::INFINITY,
            bending: None,
            table: None,
        }
    }

    /// `Phi(z) = phi0 sin(2 pi z / Lambda)` for all `z >= 0`.
    pub fn sinusoidal(phi0: f64, period_cm: f64) -> Result<Self> {
        Self::periodic(DriveKind::Sinusoidal, phi0, period_cm)
    }

    /// One cycle of the sinusoid on `[0, Lambda]`, zero phase elsewhere.
    pub fn single_cycle(phi0: f64, period_cm: f64) -> Result<Self> {
        Self::periodic(DriveKind::SingleCycle, phi0, period_cm)
    }

    /// Profile for an axis `x0(z) = -A cos(2 pi z / Lambda)`; for the single
    /// cycle variant the axis is held at `x0 = -A` after `z = Lambda`.
    pub fn from_bending(
        kind: DriveKind,
        amplitude_um: f64,
        period_cm: f64,
        optics: OpticalConstants,
    ) -> Result<Self> {
        match kind {
            DriveKind::Straight => {
                let mut p = Self::straight();
                p.bending = Some(Bending {
                    amplitude_um: 0.0,
                    optics,
                });
                return Ok(p);
            }
            DriveKind::Tabulated => {
                return Err(Error::param("kind", "tabulated profiles are built from a phase table"));
            }
            _ => {}
        }
        let phi0 = phase_amplitude(amplitude_um, period_cm, &optics)?;
        let mut p = Self::periodic(kind, phi0, period_cm)?;
        p.bending = Some(Bending {
            amplitude_um,
            optics,
        });
        Ok(p)
    }

    /// Phase sampled at `(z, Phi)` pairs, interpolated by a natural cubic spline.
    pub fn tabulated(z_cm: Vec<f64>, phase: Vec<f64>) -> Result<Self> {
        let table = PhaseTable::new(z_cm, phase)?;
        let span = table.z_max() - table.z_min();
        let phi0 = table.phase.iter().fold(0.0f64, |m, p| m.max(p.abs()));
        Ok(Self {
            kind: DriveKind::Tabulated,
            phi0,
            period_cm: span,
            bending: None,
            table: Some(table),
        })
    }

    fn periodic(kind: DriveKind, phi0: f64, period_cm: f64) -> Result<Self> {
        if !(period_cm > 0.0) || !period_cm.is_finite() {
            return Err(Error::param("period_cm", "modulation period must be positive"));
        }
        if !phi0.is_finite() {
            return Err(Error::param("phi0", "phase amplitude must be finite"));
        }
        Ok(Self {
            kind,
            phi0,
            period_cm,
            bending: None,
            table: None,
        })
    }

    pub fn kind(&self) -> DriveKind {
        self.kind
    }

    /// `Phi_0`; for tabulated profiles the largest |Phi| in the table.
    pub fn phase_amplitude(&self) -> f64 {
        self.phi0
    }

    pub fn period_cm(&self) -> f64 {
        self.period_cm
    }

    pub fn bending(&self) -> Option<&Bending> {
        self.bending.as_ref()
    }

    /// Range of `z` on which the profile is defined.
    pub fn domain(&self) -> (f64, f64) {
        match self.kind {
            DriveKind::Straight | DriveKind::SingleCycle => (f64::NEG_INFINITY, f64::INFINITY),
            DriveKind::Sinusoidal => (0.0, f64::INFINITY),
            DriveKind::Tabulated => {
                let t = self.table.as_ref().expect("tabulated drive has a table");
                (t.z_min(), t.z_max())
            }
        }
    }

    /// Fails if `[z0, z1]` is not inside the profile's domain.
    pub fn check_span(&self, z0: f64, z1: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        for z in [z0, z1] {
            if !(z >= lo - 1e-12 && z <= hi + 1e-12) {
                return Err(Error::OutOfDomain {
                    what: "z",
                    value: z,
                    min: lo,
                    max: hi,
                });
            }
        }
        Ok(())
    }

    /// Gauge phase `Phi(z)`.
    pub fn phase(&self, z: f64) -> Result<f64> {
        self.check_span(z, z)?;
        Ok(self.phase_at(z))
    }

    /// Transverse force `F(z) = dPhi/dz`.
    pub fn force(&self, z: f64) -> Result<f64> {
        self.check_span(z, z)?;
        Ok(self.force_at(z))
    }

    /// Unchecked phase, for integrators that validated their span up front.
    pub(crate) fn phase_at(&self, z: f64) -> f64 {
        let w = 2.0 * PI / self.period_cm;
        match self.kind {
            DriveKind::Straight => 0.0,
            DriveKind::Sinusoidal => self.phi0 * (w * z).sin(),
            DriveKind::SingleCycle => {
                if (0.0..=self.period_cm).contains(&z) {
                    self.phi0 * (w * z).sin()
                } else {
                    0.0
                }
            }
            DriveKind::Tabulated => self.table.as_ref().map_or(0.0, |t| t.eval(z).0),
        }
    }

    pub(crate) fn force_at(&self, z: f64) -> f64 {
        let w = 2.0 * PI / self.period_cm;
        match self.kind {
            DriveKind::Straight => 0.0,
            DriveKind::Sinusoidal => self.phi0 * w * (w * z).cos(),
            DriveKind::SingleCycle => {
                if (0.0..=self.period_cm).contains(&z) {
                    self.phi0 * w * (w * z).cos()
                } else {
                    0.0
                }
            }
            DriveKind::Tabulated => self.table.as_ref().map_or(0.0, |t| t.eval(z).1),
        }
    }

    /// Axis displacement `x0(z)` in um, when the profile came from a bend.
    pub fn axis_offset_um(&self, z: f64) -> Option<f64> {
        let b = self.bending?;
        let w = 2.0 * PI / self.period_cm;
        Some(match self.kind {
            DriveKind::Straight => 0.0,
            DriveKind::Sinusoidal => -b.amplitude_um * (w * z).cos(),
            DriveKind::SingleCycle => {
                if z < 0.0 {
                    -b.amplitude_um
                } else if z <= self.period_cm {
                    -b.amplitude_um * (w * z).cos()
                } else {
                    -b.amplitude_um
                }
            }
            DriveKind::Tabulated => return None,
        })
    }

    /// `int_{z0}^{z1} Phi(z) dz` by Simpson's rule on the (short) interval.
    pub(crate) fn phase_integral(&self, z0: f64, z1: f64) -> f64 {
        let zm = 0.5 * (z0 + z1);
        (z1 - z0) * (self.phase_at(z0) + 4.0 * self.phase_at(zm) + self.phase_at(z1)) / 6.0
    }

    /// `int_{z0}^{z1} Phi(z)^2 dz`, same rule.
    pub(crate) fn phase_sqr_integral(&self, z0: f64, z1: f64) -> f64 {
        let zm = 0.5 * (z0 + z1);
        let (a, b, c) = (self.phase_at(z0), self.phase_at(zm), self.phase_at(z1));
        (z1 - z0) * (a * a + 4.0 * b * b + c * c) / 6.0
    }
}

/// Natural cubic spline through `(z, Phi)` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTable {
    z: Vec<f64>,
    phase: Vec<f64>,
    // second derivatives at the knots
    curvature: Vec<f64>,
}

impl PhaseTable {
    pub fn new(z: Vec<f64>, phase: Vec<f64>) -> Result<Self> {
        if z.len() != phase.len() {
            return Err(Error::Shape(format!(
                "phase table has {} z samples but {} phase samples",
                z.len(),
                phase.len()
            )));
        }
        if z.len() < 3 {
            return Err(Error::param("table", "need at least three samples"));
        }
        if z.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("table", "z samples must be strictly increasing"));
        }
        if z[0].abs() > 1e-12 || phase[0].abs() > 1e-12 {
            return Err(Error::param("table", "table must start at z = 0 with Phi(0) = 0"));
        }
        let curvature = natural_spline_curvature(&z, &phase);
        Ok(Self {
            z,
            phase,
            curvature,
        })
    }

    pub fn z_min(&self) -> f64 {
        self.z[0]
    }

    pub fn z_max(&self) -> f64 {
        self.z[self.z.len() - 1]
    }

    /// Interpolated value and derivative at `x`.
    fn eval(&self, x: f64) -> (f64, f64) {
        let n = self.z.len();
        let i = match self.z.partition_point(|&zi| zi <= x) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let h = self.z[i + 1] - self.z[i];
        let a = (self.z[i + 1] - x) / h;
        let b = (x - self.z[i]) / h;
        let (y0, y1) = (self.phase[i], self.phase[i + 1]);
        let (m0, m1) = (self.curvature[i], self.curvature[i + 1]);
        let value = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let slope = (y1 - y0) / h - (3.0 * a * a - 1.0) * h * m0 / 6.0 + (3.0 * b * b - 1.0) * h * m1 / 6.0;
        (value, slope)
    }
}

fn natural_spline_curvature(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    // Thomas algorithm on the interior knots.
    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];
    for i in 1..n - 1 {
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        let a = h0 / 6.0;
        let b = (h0 + h1) / 3.0;
        let c = h1 / 6.0;
        let d = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
        let denom = b - a * c_prime[i - 1];
        c_prime[i] = c / denom;
        d_prime[i] = (d - a * d_prime[i - 1]) / denom;
    }
    for i in (1..n - 1).rev() {
        m[i] = d_prime[i] - c_prime[i] * m[i + 1];
    }
    m
}
