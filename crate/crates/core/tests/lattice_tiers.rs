use std::f64::consts::PI;

use pairsim_core::diagnostics::{lattice_census, lattice_transition_probability, CensusSettings};
use pairsim_core::dirac::{dirac_evolve, spinor_from_lattice};
use pairsim_core::drive::DriveProfile;
use pairsim_core::tight_binding::{
    bloch_eigenvector, default_step, dispersion, evolve_bare, evolve_gauged, gauge_transform, Boundary, Branch,
    GaugeDirection, Integration, ModeVector, SuperlatticeParams,
};
use pairsim_core::two_level::{evolve, MatrixKind, Stepping, TwoLevelState};
use pairsim_core::{Error, C64};

const QA: f64 = PI / 4.0;

fn fig2a() -> DriveProfile {
    DriveProfile::sinusoidal(0.4, 2.8556).unwrap()
}

fn point(phi0: f64) -> DriveProfile {
    DriveProfile::single_cycle(phi0, 0.6676).unwrap()
}

fn ring(n: usize) -> SuperlatticeParams {
    SuperlatticeParams::fitted_silica(n)
}

/// Upper-band population along a gauged plane-wave run and the matching
/// two-level run, sampled at the same z.
fn plane_wave_pair(drive: &DriveProfile, z_end: f64, dz: f64, every: usize) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    let params = ring(16);
    let start = ModeVector::bloch_mode(QA, Branch::Minus, &params).unwrap();
    let traj = evolve_gauged(&start, &params, drive, z_end, &Integration::new(dz, Boundary::Periodic).sampled(every)).unwrap();
    let lattice: Vec<(f64, f64)> = lattice_transition_probability(&traj, &params)
        .unwrap()
        .iter()
        .map(|o| (o.z, o.upper))
        .collect();
    let reduced = evolve(&TwoLevelState::ground(QA), drive, &params, MatrixKind::Full, z_end, &Stepping::new(dz).sampled(every))
        .unwrap()
        .iter()
        .map(|s| (s.z, s.upper_population()))
        .collect();
    (lattice, reduced)
}

fn max_gap(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            assert!((x.0 - y.0).abs() < 1e-9);
            (x.1 - y.1).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn plane_wave_lattice_matches_two_level_on_resonance() {
    let (lat, two) = plane_wave_pair(&fig2a(), 5.0 * 2.8556 * 9.0, 2.8556 / 2000.0, 200);
    let gap = max_gap(&lat, &two);
    assert!(gap < 1e-6, "{gap}");
    let pmax = two.iter().map(|p| p.1).fold(0.0, f64::max);
    assert!(pmax > 0.99, "{pmax}");
}

#[test]
fn plane_wave_lattice_matches_two_level_single_cycle() {
    for phi0 in [0.0, 4.0, 6.0] {
        let (lat, two) = plane_wave_pair(&point(phi0), 0.6676, 0.6676 / 4000.0, 10);
        let gap = max_gap(&lat, &two);
        assert!(gap < 1e-6, "phi0 {phi0}: {gap}");
    }
}

#[test]
fn lower_band_weight_completes_the_lattice_projection() {
    let params = ring(16);
    let start = ModeVector::gaussian(QA, 0.0, 2.0, 16).unwrap();
    let traj = evolve_gauged(&start, &params, &point(4.0), 0.6676, &Integration::new(1e-4, Boundary::Periodic).sampled(500)).unwrap();
    for o in lattice_transition_probability(&traj, &params).unwrap() {
        assert!((o.lower + o.upper - 1.0).abs() < 1e-6, "{o:?}");
    }
    let pure = ModeVector::bloch_mode(QA, Branch::Minus, &params).unwrap();
    let p0 = lattice_transition_probability(&[pure], &params).unwrap()[0].upper;
    assert!(p0 < 1e-12);
}

#[test]
fn driven_runs_conserve_power() {
    let params = ring(16);
    let drive = fig2a();
    let start = ModeVector::gaussian(QA, 0.0, 3.0, 16).unwrap();
    let z_end = 3.0 * 2.8556 * 14.0;
    let dz = default_step(&drive, &params);
    let traj = evolve_gauged(&start, &params, &drive, z_end, &Integration::new(dz, Boundary::Periodic).sampled(5000)).unwrap();
    for s in &traj {
        assert!((s.power() - 1.0).abs() < 1e-9, "z {}: {}", s.z, s.power());
    }
    let two = evolve(&TwoLevelState::ground(QA), &drive, &params, MatrixKind::Full, z_end, &Stepping::new(dz).sampled(5000)).unwrap();
    for s in &two {
        assert!((s.norm_sqr() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn bare_and_gauged_runs_are_gauge_equivalent() {
    let n = 48;
    let params = ring(n);
    let drive = point(4.0);
    let gauged0 = ModeVector::gaussian(QA, 0.0, 4.0, n).unwrap();
    let bare0 = gauge_transform(&gauged0, &drive, GaugeDirection::ToBare).unwrap();
    for boundary in [Boundary::Periodic, Boundary::HardWall] {
        let opts = Integration::new(2e-5, boundary);
        let g = evolve_gauged(&gauged0, &params, &drive, 0.5, &opts).unwrap().pop().unwrap();
        let b = evolve_bare(&bare0, &params, &drive, 0.5, &opts).unwrap().pop().unwrap();
        let mapped = gauge_transform(&g, &drive, GaugeDirection::ToBare).unwrap();
        let worst = mapped
            .amplitudes
            .iter()
            .zip(&b.amplitudes)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "{boundary:?}: {worst}");
        // round trip is the identity
        let back = gauge_transform(&mapped, &drive, GaugeDirection::ToGauged).unwrap();
        for (x, y) in back.amplitudes.iter().zip(&g.amplitudes) {
            assert!((x - y).norm() < 1e-14);
        }
    }
}

#[test]
fn bloch_mode_phase_rate_equals_dispersion() {
    let params = ring(16);
    let straight = DriveProfile::straight();
    for branch in [Branch::Minus, Branch::Plus] {
        let start = ModeVector::bloch_mode(QA, branch, &params).unwrap();
        // |omega z| < pi keeps the phase unwrapped
        let z = 0.5;
        let end = evolve_gauged(&start, &params, &straight, z, &Integration::new(1e-4, Boundary::Periodic))
            .unwrap()
            .pop()
            .unwrap();
        let (wm, wp) = dispersion(QA, &params);
        let omega = if branch == Branch::Minus { wm } else { wp };
        // common phase of every site
        let ratio: C64 = end.amplitudes.iter().zip(&start.amplitudes).map(|(a, b)| a * b.conj()).sum();
        let rate = -ratio.arg() / z;
        assert!((rate - omega).abs() < 1e-8 * omega.abs(), "{branch:?}: {rate} vs {omega}");
        for (a, b) in end.amplitudes.iter().zip(&start.amplitudes) {
            assert!((a.norm() - b.norm()).abs() < 1e-10);
        }
    }
}

#[test]
fn packet_centroid_moves_at_group_velocity() {
    // upper band at qa = pi/4: d omega/dq a = -2 sigma^2 sin(2 qa) / omega
    let n = 600;
    let params = ring(n);
    let start = ModeVector::band_packet(QA, -60.0, 12.0, Branch::Plus, &params).unwrap();
    let z = 6.0;
    let traj = evolve_gauged(&start, &params, &DriveProfile::straight(), z, &Integration::new(1e-3, Boundary::HardWall).sampled(500)).unwrap();
    let centroid = |s: &ModeVector| -> f64 {
        (0..s.len()).map(|i| s.site(i) as f64 * s.amplitudes[i].norm_sqr()).sum::<f64>() / s.power()
    };
    let moved = centroid(traj.last().unwrap()) - centroid(&traj[0]);
    let (_, wp) = dispersion(QA, &params);
    let vg = -2.0 * params.sigma.powi(2) * (2.0 * QA).sin() / wp;
    let measured = moved / z;
    assert!((measured - vg).abs() < 0.02 * vg.abs(), "{measured} vs {vg}");
    let edge: f64 = traj.last().unwrap().amplitudes[..10].iter().map(|a| a.norm_sqr()).sum();
    assert!(edge < 1e-6);
    assert_eq!(lattice_census(traj.last().unwrap(), &CensusSettings::for_spacing(1.0)).unwrap().len(), 1);
}

#[test]
fn coarse_lattice_step_reports_accuracy_error() {
    let params = ring(16);
    let start = ModeVector::bloch_mode(QA, Branch::Minus, &params).unwrap();
    let err = evolve_gauged(&start, &params, &point(6.0), 0.6676, &Integration::new(0.2, Boundary::Periodic)).unwrap_err();
    match err {
        Error::Accuracy { suggested_step, .. } => assert!(suggested_step < 0.2),
        e => panic!("unexpected {e:?}"),
    }
}

/// Independent integration of the sublattice equations for one Bloch
/// number, projected on the instantaneous-free eigenvectors.
fn sublattice_upper(phi0: f64, z_end: f64, dz: f64, params: &SuperlatticeParams) -> f64 {
    let drive = point(phi0);
    let (s, d) = (params.sigma, params.delta);
    let gen = |z: f64, y: [C64; 2]| -> [C64; 2] {
        let phi = drive.phase(z).unwrap();
        let off = -s * ((C64::from_polar(1.0, QA - phi)) + C64::from_polar(1.0, -(QA - phi)));
        let i = C64::new(0.0, 1.0);
        [-i * (d * y[0] + off * y[1]), -i * (off.conj() * y[0] - d * y[1])]
    };
    let vm = bloch_eigenvector(QA, Branch::Minus, params);
    let mut y = [C64::new(vm[0], 0.0), C64::new(vm[1], 0.0)];
    let steps = (z_end / dz).round() as usize;
    let h = z_end / steps as f64;
    let add = |a: [C64; 2], b: [C64; 2], f: f64| [a[0] + b[0] * f, a[1] + b[1] * f];
    for k in 0..steps {
        let z = k as f64 * h;
        let k1 = gen(z, y);
        let k2 = gen(z + 0.5 * h, add(y, k1, 0.5 * h));
        let k3 = gen(z + 0.5 * h, add(y, k2, 0.5 * h));
        let k4 = gen(z + h, add(y, k3, h));
        for j in 0..2 {
            y[j] += (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) * (h / 6.0);
        }
    }
    let vp = bloch_eigenvector(QA, Branch::Plus, params);
    (y[0] * vp[0] + y[1] * vp[1]).norm_sqr()
}

#[test]
fn rotated_basis_evolution_matches_sublattice_evolution() {
    let params = ring(16);
    for phi0 in [4.0, 6.0] {
        let direct = sublattice_upper(phi0, 0.6676, 0.6676 / 8000.0, &params);
        let two = evolve(&TwoLevelState::ground(QA), &point(phi0), &params, MatrixKind::Full, 0.6676, &Stepping::new(0.6676 / 8000.0))
            .unwrap()
            .last()
            .unwrap()
            .upper_population();
        assert!((direct - two).abs() < 1e-8, "phi0 {phi0}: {direct} vs {two}");
    }
}

/// Upper-band weight after the single-cycle drive from a lower-band packet,
/// on the lattice and in the Dirac continuum.
fn dirac_vs_lattice(qa: f64, phi0: f64, width_cells: f64) -> (f64, f64) {
    let n = 1024;
    let params = ring(n);
    let drive = point(phi0);
    let start = ModeVector::band_packet(qa, 0.0, 2.0 * width_cells, Branch::Minus, &params).unwrap();
    let lat = evolve_gauged(&start, &params, &drive, 0.6676, &Integration::new(2e-4, Boundary::Periodic)).unwrap();
    let p_lat = lattice_transition_probability(&lat[lat.len() - 1..], &params).unwrap()[0].upper;

    let spinor = spinor_from_lattice(&start).unwrap();
    let out = dirac_evolve(&spinor, &drive, &params, 0.6676, &Stepping::new(2e-4)).unwrap();
    let last = out.last().unwrap();
    assert!((last.norm() - spinor.norm()).abs() < 1e-9 * spinor.norm());
    let (n_, p_) = last.band_weights(&params);
    (p_lat, p_ / (n_ + p_))
}

#[test]
fn dirac_tier_tracks_lattice_near_the_gap_edge() {
    // small k and weak drive: the linearised spectrum is accurate
    let (lat, dir) = dirac_vs_lattice(0.5 * PI - 0.05, 0.5, 16.0);
    println!("near edge: lattice {lat}, dirac {dir}");
    assert!(lat > 1e-3);
    assert!((lat - dir).abs() < 0.02, "{lat} vs {dir}");
}

#[test]
fn negative_packet_starts_in_the_negative_branch() {
    let params = ring(64);
    let grid = pairsim_core::spectral::UniformGrid::new(-200.0, 200.0, 2048).unwrap();
    let field = pairsim_core::dirac::SpinorField::negative_packet(grid, -PI / 2.0, 0.0, 16.0, &params).unwrap();
    let (neg, pos) = field.band_weights(&params);
    assert!(neg / (neg + pos) > 1.0 - 1e-6);
}
