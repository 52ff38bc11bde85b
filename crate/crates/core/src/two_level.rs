//! Momentum-resolved two-level reduction of the driven superlattice.
//!
//! A plane wave with Bloch number `q` stays a plane wave under the gauged
//! coupled-mode equations, so only the two sublattice amplitudes evolve.
//! Projected on the straight-lattice Bloch modes they become the occupation
//! amplitudes `(r_-, r_+)` of the lower and upper minibands, obeying
//! `i d/dz (r_-, r_+) = Z(z) (r_-, r_+)`.
//!
//! `Z` is stored in the traceless symmetric form `[[z11, z12], [z12, -z11]]`.
//! It equals minus the projected generator up to the sign of the
//! off-diagonal element, so amplitudes come out complex-conjugated relative
//! to a direct projection while all occupations agree exactly.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::drive::{phase_amplitude, DriveKind, DriveProfile, OpticalConstants};
use crate::error::{Error, Result};
use crate::numerics::romberg;
use crate::ode::{step_plan, Rk4};
use crate::tight_binding::{dispersion, SuperlatticeParams};
use crate::C64;

/// Relative norm drift beyond which a two-level run is rejected.
pub const NORM_DRIFT_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelState {
    pub r_minus: C64,
    pub r_plus: C64,
    pub z: f64,
    pub qa: f64,
}

impl TwoLevelState {
    /// Lower miniband fully occupied at `z = 0`.
    pub fn ground(qa: f64) -> Self {
        Self {
            r_minus: C64::new(1.0, 0.0),
            r_plus: C64::new(0.0, 0.0),
            z: 0.0,
            qa,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.r_minus.norm_sqr() + self.r_plus.norm_sqr()
    }

    /// Upper-band occupation `|r_+|^2`.
    pub fn upper_population(&self) -> f64 {
        self.r_plus.norm_sqr()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingMatrix {
    pub z11: f64,
    pub z12: f64,
}

impl CouplingMatrix {
    pub fn as_array(&self) -> [[f64; 2]; 2] {
        [[self.z11, self.z12], [self.z12, -self.z11]]
    }
}

/// Occupation-basis coupling at Bloch number `qa` and gauge phase `phi`.
pub fn coupling_matrix_full(qa: f64, phi: f64, params: &SuperlatticeParams) -> Result<CouplingMatrix> {
    let (_, wp) = dispersion(qa, params);
    if wp <= 0.0 {
        return Err(Error::Degenerate(format!("gap closes at qa = {qa} for delta = 0")));
    }
    let (s, d) = (params.sigma, params.delta);
    let c = qa.cos();
    let cs = (qa - phi).cos();
    Ok(CouplingMatrix {
        z11: (d * d + 4.0 * s * s * c * cs) / wp,
        z12: 2.0 * s * d * (c - cs) / wp,
    })
}

/// Zone-edge form, with `qa = pi/2 + k/2`, valid for small `k` and `phi`.
pub fn coupling_matrix_reduced(k: f64, phi: f64, params: &SuperlatticeParams) -> Result<CouplingMatrix> {
    let (s, d) = (params.sigma, params.delta);
    let eps = (d * d + s * s * k * k).sqrt();
    if eps <= 0.0 {
        return Err(Error::Degenerate("massless particle at rest (delta = 0, k = 0)".into()));
    }
    Ok(CouplingMatrix {
        z11: eps - 2.0 * s * s * k * phi / eps,
        z12: -2.0 * s * d * phi / eps,
    })
}

/// `k` of the Dirac description for Bloch number `qa`.
pub fn dirac_momentum(qa: f64) -> f64 {
    2.0 * qa - PI
}

/// Physical constants of a one-dimensional Dirac particle in a homogeneous
/// vector potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiracConstants {
    pub hbar: f64,
    pub c: f64,
    pub mass: f64,
    pub charge: f64,
}

impl DiracConstants {
    /// Rest frequency `m c^2 / hbar`.
    pub fn rest_frequency(&self) -> f64 {
        self.mass * self.c * self.c / self.hbar
    }

    /// `hbar eps(p) = sqrt(p^2 c^2 + (m c^2)^2)`; returns `eps`.
    pub fn energy(&self, p: f64) -> f64 {
        let mc2 = self.mass * self.c * self.c;
        (p * p * self.c * self.c + mc2 * mc2).sqrt() / self.hbar
    }
}

/// Dictionary between lattice and particle variables:
/// `c <-> sigma`, `m c^2 / hbar <-> delta`, `e A / (2 hbar c) <-> Phi`, `p = hbar k`.
///
/// `hbar` and `e` are free; any choice gives the same dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiracUnitsMap {
    pub hbar: f64,
    pub charge: f64,
}

impl Default for DiracUnitsMap {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            charge: 1.0,
        }
    }
}

impl DiracUnitsMap {
    pub fn constants(&self, params: &SuperlatticeParams) -> DiracConstants {
        let c = params.sigma;
        DiracConstants {
            hbar: self.hbar,
            c,
            mass: params.delta * self.hbar / (c * c),
            charge: self.charge,
        }
    }

    /// `(sigma, delta)` recovered from particle constants.
    pub fn lattice(&self, k: &DiracConstants) -> (f64, f64) {
        (k.c, k.rest_frequency())
    }

    pub fn momentum(&self, k: f64) -> f64 {
        self.hbar * k
    }

    pub fn wavenumber(&self, p: f64) -> f64 {
        p / self.hbar
    }

    pub fn vector_potential(&self, phi: f64, consts: &DiracConstants) -> f64 {
        2.0 * self.hbar * consts.c * phi / self.charge
    }

    pub fn phase(&self, a_x: f64, consts: &DiracConstants) -> f64 {
        self.charge * a_x / (2.0 * self.hbar * consts.c)
    }
}

/// Particle form of the reduced coupling, in physical variables.
pub fn coupling_matrix_dirac(p: f64, a_x: f64, k: &DiracConstants) -> Result<CouplingMatrix> {
    let eps = k.energy(p);
    if eps <= 0.0 {
        return Err(Error::Degenerate("massless particle at rest".into()));
    }
    let h2 = k.hbar * k.hbar;
    let mc2 = k.mass * k.c * k.c;
    Ok(CouplingMatrix {
        z11: eps - p * k.c * k.charge * a_x / (h2 * eps),
        z12: -mc2 * k.charge * a_x / (h2 * eps),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    Full,
    Reduced,
    Dirac,
}

fn coupling(kind: MatrixKind, qa: f64, phi: f64, params: &SuperlatticeParams) -> Result<CouplingMatrix> {
    match kind {
        MatrixKind::Full => coupling_matrix_full(qa, phi, params),
        MatrixKind::Reduced => coupling_matrix_reduced(dirac_momentum(qa), phi, params),
        MatrixKind::Dirac => {
            let map = DiracUnitsMap::default();
            let consts = map.constants(params);
            let p = map.momentum(dirac_momentum(qa));
            coupling_matrix_dirac(p, map.vector_potential(phi, &consts), &consts)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stepping {
    pub dz: f64,
    /// Keep every `sample_every`-th step (first and last always kept).
    pub sample_every: usize,
}

impl Stepping {
    pub fn new(dz: f64) -> Self {
        Self { dz, sample_every: 1 }
    }

    pub fn sampled(mut self, every: usize) -> Self {
        self.sample_every = every.max(1);
        self
    }
}

/// Integrate the occupation equations from `state.z` to `z_end`.
pub fn evolve(
    state: &TwoLevelState,
    drive: &DriveProfile,
    params: &SuperlatticeParams,
    kind: MatrixKind,
    z_end: f64,
    steps: &Stepping,
) -> Result<Vec<TwoLevelState>> {
    params.validate()?;
    if !(steps.dz > 0.0) {
        return Err(Error::param("dz", "step must be positive"));
    }
    if z_end < state.z {
        return Err(Error::param("z_end", "cannot integrate backwards"));
    }
    let n0 = state.norm_sqr();
    if (n0 - 1.0).abs() > 1e-12 {
        return Err(Error::param("state", format!("occupations must sum to 1, got {n0}")));
    }
    drive.check_span(state.z, z_end)?;
    // surface degenerate configurations before integrating
    coupling(kind, state.qa, drive.phase_at(state.z), params)?;

    let qa = state.qa;
    let minus_i = C64::new(0.0, -1.0);
    let mut rhs = |z: f64, y: &[C64], out: &mut [C64]| {
        let m = coupling(kind, qa, drive.phase_at(z), params).expect("checked above");
        out[0] = minus_i * (y[0] * m.z11 + y[1] * m.z12);
        out[1] = minus_i * (y[0] * m.z12 - y[1] * m.z11);
    };

    let (n, h) = step_plan(z_end - state.z, steps.dz);
    let every = steps.sample_every.max(1);
    let mut rk = Rk4::new(2);
    let mut y = [state.r_minus, state.r_plus];
    let mut out = Vec::with_capacity(n / every + 2);
    out.push(*state);
    for i in 0..n {
        rk.step(&mut rhs, state.z + i as f64 * h, &mut y, h);
        if (i + 1) % every == 0 || i + 1 == n {
            out.push(TwoLevelState {
                r_minus: y[0],
                r_plus: y[1],
                z: state.z + (i + 1) as f64 * h,
                qa,
            });
        }
    }
    let drift = (y[0].norm_sqr() + y[1].norm_sqr() - n0).abs();
    if drift > NORM_DRIFT_LIMIT {
        return Err(Error::Accuracy {
            what: "two-level norm",
            drift,
            limit: NORM_DRIFT_LIMIT,
            suggested_step: crate::tight_binding::suggest_step(h, drift, NORM_DRIFT_LIMIT),
        });
    }
    Ok(out)
}

/// Upper-band occupation after a drive-on interval `[0, l0]`, starting from
/// the lower band.
///
/// For sinusoidal and single-cycle drives `l0` must be a whole number of
/// modulation periods.
pub fn transition_probability(
    qa: f64,
    drive: &DriveProfile,
    params: &SuperlatticeParams,
    kind: MatrixKind,
    l0: f64,
    dz: f64,
) -> Result<f64> {
    whole_cycles(drive, l0)?;
    let traj = evolve(&TwoLevelState::ground(qa), drive, params, kind, l0, &Stepping::new(dz).sampled(usize::MAX))?;
    Ok(traj.last().unwrap().upper_population())
}

/// Number of modulation cycles in `l0`, or an error if it is not whole.
pub fn whole_cycles(drive: &DriveProfile, l0: f64) -> Result<u64> {
    match drive.kind() {
        DriveKind::Sinusoidal | DriveKind::SingleCycle => {
            let cycles = l0 / drive.period_cm();
            let whole = cycles.round();
            if whole < 1.0 || (cycles - whole).abs() > 1e-9 * whole.max(1.0) {
                return Err(Error::param(
                    "l0",
                    format!("drive-on length must be a whole number of periods, got {cycles} periods"),
                ));
            }
            Ok(whole as u64)
        }
        DriveKind::Straight | DriveKind::Tabulated => Ok(0),
    }
}

/// Quasi-energy of the sinusoidally driven Bloch mode,
/// `E = (1/2pi) int_0^{2pi} sqrt(delta^2 + 4 sigma^2 cos^2(qa - phi0 sin y)) dy`.
pub fn quasi_energy(qa: f64, phi0: f64, params: &SuperlatticeParams) -> Result<f64> {
    let (s, d) = (params.sigma, params.delta);
    let f = |y: f64| {
        let c = (qa - phi0 * y.sin()).cos();
        (d * d + 4.0 * s * s * c * c).sqrt()
    };
    romberg(f, 0.0, 2.0 * PI, 1e-12).map(|v| v / (2.0 * PI))
}

/// How the modulation amplitude depends on the period being solved for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResonanceDrive {
    /// `Phi_0` held fixed.
    FixedPhase(f64),
    /// Bend amplitude held fixed, so `Phi_0` scales as `1 / Lambda`.
    FixedBending {
        amplitude_um: f64,
        optics: OpticalConstants,
    },
}

/// Modulation period of the `n`-photon resonance, `n 2pi / Lambda = 2 E`.
pub fn resonance_period(n: u32, qa: f64, drive: ResonanceDrive, params: &SuperlatticeParams) -> Result<f64> {
    if n == 0 {
        return Err(Error::param("n", "photon number must be at least 1"));
    }
    let nf = n as f64;
    match drive {
        ResonanceDrive::FixedPhase(phi0) => Ok(nf * PI / quasi_energy(qa, phi0, params)?),
        ResonanceDrive::FixedBending { amplitude_um, optics } => {
            let map = |lambda: f64| -> Result<f64> {
                let phi0 = phase_amplitude(amplitude_um, lambda, &optics)?;
                Ok(nf * PI / quasi_energy(qa, phi0, params)?)
            };
            let mut lambda = nf * PI / dispersion(qa, params).1;
            let mut damping = 1.0;
            let mut last_step = f64::INFINITY;
            for _ in 0..100 {
                let next = map(lambda)?;
                let step = next - lambda;
                if step.abs() <= 1e-10 * lambda.abs() {
                    return Ok(next);
                }
                if step.abs() > 0.9 * last_step {
                    damping *= 0.5;
                }
                last_step = step.abs();
                lambda += damping * step;
            }
            Err(Error::Solver(format!(
                "resonance period for n = {n} did not converge in 100 iterations"
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tight_binding::{bloch_eigenvector, Branch};

    fn params() -> SuperlatticeParams {
        SuperlatticeParams::fitted_silica(2)
    }

    #[test]
    fn straight_matrix_is_band_energy() {
        let p = params();
        let m = coupling_matrix_full(PI / 4.0, 0.0, &p).unwrap();
        assert!((m.z11 - 3.361_768_730_9).abs() < 1e-9);
        assert_eq!(m.z12, 0.0);
    }

    #[test]
    fn full_matrix_matches_basis_rotation() {
        // R^T T R with R = [v_-, v_+] is the projected generator; the stored
        // form is its negative with the off-diagonal sign set by sign(cos qa).
        let p = params();
        for &(qa, phi) in &[(PI / 4.0, 0.4), (0.3, -1.1), (2.0, 0.7)] {
            let m = coupling_matrix_full(qa, phi, &p).unwrap();
            let t_off = -2.0 * p.sigma * (qa - phi).cos();
            let t = [[p.delta, t_off], [t_off, -p.delta]];
            let vm = bloch_eigenvector(qa, Branch::Minus, &p);
            let vp = bloch_eigenvector(qa, Branch::Plus, &p);
            let form = |a: [f64; 2], b: [f64; 2]| {
                a[0] * (t[0][0] * b[0] + t[0][1] * b[1]) + a[1] * (t[1][0] * b[0] + t[1][1] * b[1])
            };
            let sign = qa.cos().signum();
            assert!((form(vm, vm) + m.z11).abs() < 1e-12);
            assert!((form(vp, vp) - m.z11).abs() < 1e-12);
            assert!((form(vm, vp) - sign * m.z12).abs() < 1e-12);
        }
    }

    #[test]
    fn reduced_special_cases() {
        let p = params();
        let m = coupling_matrix_reduced(0.0, 0.3, &p).unwrap();
        assert!((m.z11 - p.delta).abs() < 1e-15);
        assert!((m.z12 + 2.0 * p.sigma * 0.3).abs() < 1e-15);
        let m = coupling_matrix_reduced(0.8, 0.0, &p).unwrap();
        assert!((m.z11 - (p.delta * p.delta + 4.0 * 0.64).sqrt()).abs() < 1e-15);
        assert_eq!(m.z12, 0.0);
        let massless = SuperlatticeParams { delta: 0.0, ..p };
        assert!(coupling_matrix_reduced(0.0, 0.1, &massless).is_err());
    }

    #[test]
    fn dirac_units_map() {
        let p = params();
        for map in [DiracUnitsMap::default(), DiracUnitsMap { hbar: 0.37, charge: -2.5 }] {
            let consts = map.constants(&p);
            let (s, d) = map.lattice(&consts);
            assert!((s - p.sigma).abs() < 1e-15 && (d - p.delta).abs() < 1e-14);
            for &(k, phi) in &[(0.0, 0.2), (0.3, -0.5), (-1.2, 1.4)] {
                let a = map.vector_potential(phi, &consts);
                assert!((map.phase(a, &consts) - phi).abs() < 1e-15);
                let r = coupling_matrix_reduced(k, phi, &p).unwrap();
                let q = coupling_matrix_dirac(map.momentum(k), a, &consts).unwrap();
                assert!((r.z11 - q.z11).abs().max((r.z12 - q.z12).abs()) < 1e-14, "{r:?} {q:?}");
            }
            let a = 0.7;
            let m = coupling_matrix_dirac(0.0, a, &consts).unwrap();
            let mc2 = consts.mass * consts.c * consts.c;
            let ident = m.z12 * consts.hbar * consts.hbar * consts.energy(0.0) / mc2;
            assert!((ident + consts.charge * a).abs() < 1e-13);
        }
    }

    #[test]
    fn undriven_stays_in_lower_band() {
        let p = params();
        let traj = evolve(
            &TwoLevelState::ground(PI / 4.0),
            &DriveProfile::straight(),
            &p,
            MatrixKind::Full,
            10.0,
            &Stepping::new(0.002),
        )
        .unwrap();
        assert!(traj.iter().all(|s| s.upper_population() == 0.0));
    }

    #[test]
    fn quasi_energy_limits_and_symmetry() {
        let p = params();
        let (_, w) = dispersion(PI / 4.0, &p);
        assert!((quasi_energy(PI / 4.0, 0.0, &p).unwrap() - w).abs() < 1e-13);
        let a = quasi_energy(0.4, 0.9, &p).unwrap();
        let b = quasi_energy(-0.4, -0.9, &p).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn resonance_period_direct() {
        let p = params();
        let l3 = resonance_period(3, PI / 4.0, ResonanceDrive::FixedPhase(0.4), &p).unwrap();
        assert!((l3 - 2.8556).abs() < 1e-3, "{l3}");
        let l6 = resonance_period(6, PI / 4.0, ResonanceDrive::FixedPhase(0.4), &p).unwrap();
        assert!((l6 - 2.0 * l3).abs() < 1e-12);
        let (_, w) = dispersion(PI / 4.0, &p);
        let l1 = resonance_period(1, PI / 4.0, ResonanceDrive::FixedPhase(0.0), &p).unwrap();
        assert!((l1 - PI / w).abs() < 1e-13);
        assert!(resonance_period(0, PI / 4.0, ResonanceDrive::FixedPhase(0.4), &p).is_err());
    }

    #[test]
    fn resonance_period_fixed_bending_is_self_consistent() {
        let p = params();
        let optics = OpticalConstants::fused_silica_633();
        let l = resonance_period(
            3,
            PI / 4.0,
            ResonanceDrive::FixedBending { amplitude_um: 1.5, optics },
            &p,
        )
        .unwrap();
        let phi0 = phase_amplitude(1.5, l, &optics).unwrap();
        let e = quasi_energy(PI / 4.0, phi0, &p).unwrap();
        assert!((3.0 * 2.0 * PI / l - 2.0 * e).abs() < 1e-8);
    }

    #[test]
    fn whole_cycle_enforcement() {
        let d = DriveProfile::sinusoidal(0.4, 2.0).unwrap();
        assert_eq!(whole_cycles(&d, 6.0).unwrap(), 3);
        assert!(whole_cycles(&d, 5.0).is_err());
        assert!(whole_cycles(&d, 0.0).is_err());
        assert_eq!(whole_cycles(&DriveProfile::straight(), 1.234).unwrap(), 0);
    }
}
