//! One-dimensional Dirac spinor driven by a homogeneous gauge field,
//! `i dpsi/dz = -i sigma alpha dpsi/dxi - 2 sigma Phi(z) alpha psi + delta beta psi`
//! with `alpha = sigma_x`, `beta = sigma_z`, and the correspondence to the
//! binary lattice near the zone edge.
//!
//! The generator is homogeneous in `xi`, so it is block diagonal in Fourier
//! space. Each step applies the exact exponential of the step-integrated 2x2
//! block per wavenumber; the only error is the dropped commutator of the
//! drive with the mass term, third order in the step.

use crate::error::{Error, Result};
use crate::ode::step_plan;
use crate::spectral::{wavenumbers, Fft1d, UniformGrid};
use crate::tight_binding::{site_label, Gauge, ModeVector, SuperlatticeParams};
use crate::two_level::Stepping;
use crate::C64;

/// Edge-to-peak density ratio that counts as touching the boundary.
pub const EDGE_DENSITY_LIMIT: f64 = 1e-8;

/// Cell grid `xi = x / (2a)`.
pub type XiGrid = UniformGrid;

#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    pub psi1: Vec<C64>,
    pub psi2: Vec<C64>,
    pub grid: XiGrid,
    pub z: f64,
}

/// Free dispersion `(-eps(k), +eps(k))`, `eps = sqrt(delta^2 + sigma^2 k^2)`.
pub fn free_dispersion(k: f64, params: &SuperlatticeParams) -> (f64, f64) {
    let e = (params.delta * params.delta + params.sigma * params.sigma * k * k).sqrt();
    (-e, e)
}

/// Unit eigenvectors of `sigma k alpha + delta beta`: `(negative, positive)`.
///
/// Negative branch `(sigma k, -eps - delta)`, positive branch
/// `(eps + delta, sigma k)`, both normalised; neither degenerates for `delta > 0`.
pub fn free_eigenvectors(k: f64, params: &SuperlatticeParams) -> ([f64; 2], [f64; 2]) {
    let (_, e) = free_dispersion(k, params);
    let sk = params.sigma * k;
    let big = e + params.delta;
    let norm = sk.hypot(big);
    if norm == 0.0 {
        // massless and at rest: any orthonormal pair
        return ([0.0, 1.0], [1.0, 0.0]);
    }
    ([sk / norm, -big / norm], [big / norm, sk / norm])
}

impl SpinorField {
    pub fn new(psi1: Vec<C64>, psi2: Vec<C64>, grid: XiGrid, z: f64) -> Result<Self> {
        if psi1.len() != grid.n || psi2.len() != grid.n {
            return Err(Error::Shape(format!(
                "spinor components of length {} and {} on a {}-point grid",
                psi1.len(),
                psi2.len(),
                grid.n
            )));
        }
        Ok(Self { psi1, psi2, grid, z })
    }

    /// `int (|psi1|^2 + |psi2|^2) dxi`.
    pub fn norm(&self) -> f64 {
        self.density().iter().sum::<f64>() * self.grid.spacing()
    }

    pub fn density(&self) -> Vec<f64> {
        self.psi1
            .iter()
            .zip(&self.psi2)
            .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
            .collect()
    }

    /// Gaussian packet `exp(-((xi - center)/width)^2) exp(i k0 xi)` projected
    /// onto the negative-energy branch and normalised to unit norm.
    pub fn negative_packet(
        grid: XiGrid,
        k0: f64,
        center: f64,
        width: f64,
        params: &SuperlatticeParams,
    ) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::param("width", "packet width must be positive"));
        }
        let mut env: Vec<C64> = grid
            .points()
            .iter()
            .map(|&x| C64::from_polar((-((x - center) / width).powi(2)).exp(), k0 * x))
            .collect();
        let mut fft = Fft1d::new(grid.n);
        fft.forward(&mut env);
        let ks = wavenumbers(grid.n, grid.spacing());
        let mut f1 = vec![C64::new(0.0, 0.0); grid.n];
        let mut f2 = vec![C64::new(0.0, 0.0); grid.n];
        for (i, &k) in ks.iter().enumerate() {
            let (neg, _) = free_eigenvectors(k, params);
            f1[i] = env[i] * neg[0];
            f2[i] = env[i] * neg[1];
        }
        fft.inverse(&mut f1);
        fft.inverse(&mut f2);
        let mut field = Self::new(f1, f2, grid, 0.0)?;
        let s = field.norm().sqrt();
        field.psi1.iter_mut().chain(field.psi2.iter_mut()).for_each(|v| *v /= s);
        Ok(field)
    }

    /// Spinor plane wave `(s1, s2) exp(i k xi)` (unnormalised).
    pub fn plane_wave(grid: XiGrid, k: f64, spinor: [C64; 2]) -> Self {
        let ph: Vec<C64> = grid.points().iter().map(|&x| C64::from_polar(1.0, k * x)).collect();
        Self {
            psi1: ph.iter().map(|p| p * spinor[0]).collect(),
            psi2: ph.iter().map(|p| p * spinor[1]).collect(),
            grid,
            z: 0.0,
        }
    }

    /// Norm carried by the negative and positive energy branches.
    pub fn band_weights(&self, params: &SuperlatticeParams) -> (f64, f64) {
        let n = self.grid.n;
        let mut f1 = self.psi1.clone();
        let mut f2 = self.psi2.clone();
        let mut fft = Fft1d::new(n);
        fft.forward(&mut f1);
        fft.forward(&mut f2);
        let ks = wavenumbers(n, self.grid.spacing());
        // Parseval: int |psi|^2 dxi = dxi / n * sum |psi_hat|^2
        let scale = self.grid.spacing() / n as f64;
        let (mut wn, mut wp) = (0.0, 0.0);
        for (i, &k) in ks.iter().enumerate() {
            let (neg, pos) = free_eigenvectors(k, params);
            wn += (f1[i] * neg[0] + f2[i] * neg[1]).norm_sqr();
            wp += (f1[i] * pos[0] + f2[i] * pos[1]).norm_sqr();
        }
        (wn * scale, wp * scale)
    }

    /// Split into the parts on each energy branch.
    pub fn branch_parts(&self, params: &SuperlatticeParams) -> (SpinorField, SpinorField) {
        let n = self.grid.n;
        let mut f1 = self.psi1.clone();
        let mut f2 = self.psi2.clone();
        let mut fft = Fft1d::new(n);
        fft.forward(&mut f1);
        fft.forward(&mut f2);
        let ks = wavenumbers(n, self.grid.spacing());
        let zero = vec![C64::new(0.0, 0.0); n];
        let (mut n1, mut n2, mut p1, mut p2) = (zero.clone(), zero.clone(), zero.clone(), zero);
        for (i, &k) in ks.iter().enumerate() {
            let (neg, pos) = free_eigenvectors(k, params);
            let an = f1[i] * neg[0] + f2[i] * neg[1];
            let ap = f1[i] * pos[0] + f2[i] * pos[1];
            n1[i] = an * neg[0];
            n2[i] = an * neg[1];
            p1[i] = ap * pos[0];
            p2[i] = ap * pos[1];
        }
        for v in [&mut n1, &mut n2, &mut p1, &mut p2] {
            fft.inverse(v);
        }
        (
            SpinorField { psi1: n1, psi2: n2, grid: self.grid, z: self.z },
            SpinorField { psi1: p1, psi2: p2, grid: self.grid, z: self.z },
        )
    }

    /// Density-weighted mean position.
    pub fn centroid(&self) -> f64 {
        let d = self.density();
        let total: f64 = d.iter().sum();
        d.iter().enumerate().map(|(j, w)| w * self.grid.point(j)).sum::<f64>() / total
    }

    fn check_edges(&self) -> Result<()> {
        let d = self.density();
        let peak = d.iter().cloned().fold(0.0, f64::max);
        let band = (self.grid.n / 100).max(1);
        let edge = d[..band].iter().chain(&d[self.grid.n - band..]).cloned().fold(0.0, f64::max);
        if edge > EDGE_DENSITY_LIMIT * peak {
            return Err(Error::DomainOverflow(format!(
                "spinor edge density {:.2e} of peak at z = {:.4}",
                edge / peak,
                self.z
            )));
        }
        Ok(())
    }
}

/// Evolve `field` from `field.z` to `z_end`; returns sampled snapshots
/// including the initial and final fields.
pub fn dirac_evolve(
    field: &SpinorField,
    drive: &crate::drive::DriveProfile,
    params: &SuperlatticeParams,
    z_end: f64,
    steps: &Stepping,
) -> Result<Vec<SpinorField>> {
    propagate(field, drive, params, z_end, steps, true)
}

fn propagate(
    field: &SpinorField,
    drive: &crate::drive::DriveProfile,
    params: &SuperlatticeParams,
    z_end: f64,
    steps: &Stepping,
    watch_edges: bool,
) -> Result<Vec<SpinorField>> {
    if !(steps.dz > 0.0) {
        return Err(Error::param("dz", "step must be positive"));
    }
    if z_end < field.z {
        return Err(Error::param("z_end", "cannot integrate backwards"));
    }
    drive.check_span(field.z, z_end)?;
    if watch_edges {
        field.check_edges()?;
    }

    let n = field.grid.n;
    let ks = wavenumbers(n, field.grid.spacing());
    let mut fft = Fft1d::new(n);
    let mut f1 = field.psi1.clone();
    let mut f2 = field.psi2.clone();
    fft.forward(&mut f1);
    fft.forward(&mut f2);

    let (count, h) = step_plan(z_end - field.z, steps.dz);
    let every = steps.sample_every.max(1);
    let (sigma, delta) = (params.sigma, params.delta);
    let mut out = vec![field.clone()];
    for i in 0..count {
        let z0 = field.z + i as f64 * h;
        let int_phi = drive.phase_integral(z0, z0 + h);
        let md = delta * h;
        for (j, &k) in ks.iter().enumerate() {
            // exp(-i (bx alpha + bz beta)) with the step-integrated coefficients
            let bx = sigma * (k * h - 2.0 * int_phi);
            let r = bx.hypot(md);
            let (c, s) = (r.cos(), if r > 0.0 { r.sin() / r } else { 1.0 });
            let (a, b) = (f1[j], f2[j]);
            let mi = C64::new(0.0, -s);
            f1[j] = a * C64::new(c, 0.0) + mi * (a * md + b * bx);
            f2[j] = b * C64::new(c, 0.0) + mi * (a * bx - b * md);
        }
        if (i + 1) % every == 0 || i + 1 == count {
            let mut p1 = f1.clone();
            let mut p2 = f2.clone();
            fft.inverse(&mut p1);
            fft.inverse(&mut p2);
            let snap = SpinorField {
                psi1: p1,
                psi2: p2,
                grid: field.grid,
                z: z0 + h,
            };
            if watch_edges {
                snap.check_edges()?;
            }
            out.push(snap);
        }
    }
    Ok(out)
}

/// Unpack a gauged lattice state into the slowly varying spinor,
/// `a_{2j} = (-1)^j psi1(j)`, `a_{2j-1} = -i (-1)^j psi2(j)`.
///
/// The grid is `xi = j` (units of `2a`). The odd partner of the lowest even
/// site wraps around the ring when it falls off the lattice.
pub fn spinor_from_lattice(state: &ModeVector) -> Result<SpinorField> {
    if state.gauge != Gauge::Gauged {
        return Err(Error::param("gauge", "the spinor map acts on gauged amplitudes"));
    }
    let n = state.len();
    if n % 2 != 0 {
        return Err(Error::Shape(format!("odd site count {n}")));
    }
    let (j_min, m) = cell_range(n);
    let mut psi1 = Vec::with_capacity(m);
    let mut psi2 = Vec::with_capacity(m);
    for jj in 0..m {
        let j = j_min + jj as i64;
        let sign = if j.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        psi1.push(state.amplitudes[slot(2 * j, n)] * sign);
        psi2.push(state.amplitudes[slot(2 * j - 1, n)] * C64::new(0.0, sign));
    }
    let grid = XiGrid::new(j_min as f64, (j_min + m as i64 - 1) as f64, m)?;
    SpinorField::new(psi1, psi2, grid, state.z)
}

/// Inverse of [`spinor_from_lattice`] for a field on its cell grid.
pub fn lattice_from_spinor(field: &SpinorField) -> Result<ModeVector> {
    let m = field.grid.n;
    let n = 2 * m;
    let (j_min, _) = cell_range(n);
    if field.grid.min != j_min as f64 || (field.grid.spacing() - 1.0).abs() > 1e-12 {
        return Err(Error::Shape("spinor grid is not the cell grid of a lattice".into()));
    }
    let mut amps = vec![C64::new(0.0, 0.0); n];
    for jj in 0..m {
        let j = j_min + jj as i64;
        let sign = if j.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        amps[slot(2 * j, n)] = field.psi1[jj] * sign;
        amps[slot(2 * j - 1, n)] = field.psi2[jj] * C64::new(0.0, -sign);
    }
    ModeVector::new(amps, Gauge::Gauged, field.z)
}

fn cell_range(n: usize) -> (i64, usize) {
    let l_min = site_label(0, n);
    (l_min.div_euclid(2) + l_min.rem_euclid(2), n / 2)
}

fn slot(l: i64, n: usize) -> usize {
    (l - site_label(0, n)).rem_euclid(n as i64) as usize
}
