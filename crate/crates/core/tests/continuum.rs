use std::f64::consts::PI;

use pairsim_core::bands::{calibrate_channel, fit_tight_binding, plane_wave_bands, plane_wave_bands_at, CalibrationSearch};
use pairsim_core::bpm::{
    bpm_run, bragg_angle, build_index_profile, gaussian_tilted_input, lattice_grid, Absorber, BpmSettings, DriveGauge,
    FieldGrid, OpticsParams,
};
use pairsim_core::diagnostics::{band_filtered, band_populations, grid_zone_samples};
use pairsim_core::drive::{DriveKind, DriveProfile};
use pairsim_core::spectral::UniformGrid;

fn fig5_setup(optics: &OpticsParams) -> (UniformGrid, Vec<f64>, FieldGrid) {
    let grid = lattice_grid(optics, 41, 4096).unwrap();
    let index = build_index_profile(optics, 60, &grid).unwrap();
    let theta = 0.5 * bragg_angle(&optics.constants());
    let absorber = Absorber {
        error_intake: 0.3,
        warn_intake: 0.2,
        ..Absorber::default()
    };
    let input = gaussian_tilted_input(80.0, theta, optics, &grid, absorber).unwrap();
    (grid, index, input)
}

fn grid_bands(optics: &OpticsParams, grid: &UniformGrid) -> pairsim_core::bands::BandStructure {
    let qa = grid_zone_samples(grid, optics.spacing_um).unwrap();
    plane_wave_bands_at(optics, 81, &qa, 4).unwrap()
}

#[test]
fn default_profile_fits_target_constants() {
    let optics = OpticsParams::default();
    let bands = plane_wave_bands(&optics, 81, 128).unwrap();
    let fit = fit_tight_binding(&bands).unwrap();
    assert!((fit.sigma - 2.0).abs() < 0.02 * 2.0, "sigma {}", fit.sigma);
    assert!((fit.delta - 1.817).abs() < 0.02 * 1.817, "delta {}", fit.delta);
    assert!(!fit.poor_fit);
    // delta is half the gap at the zone edge
    let edge = bands.qa.iter().position(|q| (q - 0.5 * PI).abs() < 1e-12).unwrap();
    let half_gap = 0.5 * (bands.omega[1][edge] - bands.omega[0][edge]);
    assert!((half_gap - fit.delta).abs() < 0.01 * fit.delta, "{half_gap} vs {}", fit.delta);
    // real profile: even bands
    for b in 0..2 {
        for i in 0..126 {
            assert!((bands.omega[b][i] - bands.omega[b][126 - i]).abs() < 1e-10);
        }
    }
}

#[test]
fn calibration_reproduces_shipped_geometry() {
    let template = OpticsParams {
        dn2: 0.00196,
        ..OpticsParams::default()
    };
    let cal = calibrate_channel(2.0, 1.817, &template, &CalibrationSearch::default()).unwrap();
    println!("calibrated width {} um, dn2 {}", cal.channel_width_um, cal.dn2);
    let shipped = OpticsParams::default();
    assert!((cal.channel_width_um - shipped.channel_width_um).abs() < 1e-4);
    assert!((cal.dn2 - shipped.dn2).abs() < 1e-8);

    // already on target: width does not move
    let again = calibrate_channel(cal.fit.sigma, cal.fit.delta, &shipped, &CalibrationSearch::default()).unwrap();
    assert_eq!(again.channel_width_um, shipped.channel_width_um);
}

#[test]
fn periodic_run_is_unitary() {
    let optics = OpticsParams::default();
    let (_, index, mut input) = fig5_setup(&optics);
    input.absorber = Absorber::disabled();
    let drive = DriveProfile::from_bending(DriveKind::SingleCycle, 45.0, 0.67, optics.constants()).unwrap();
    for gauge in [DriveGauge::Velocity, DriveGauge::Length] {
        let out = bpm_run(&input, &index, &optics, &drive, 1.0, &BpmSettings { gauge, ..BpmSettings::default() }).unwrap();
        let p = out.snapshots.last().unwrap().power();
        assert!((p - 1.0).abs() < 1e-10, "{gauge:?}: {p}");
    }
}

#[test]
fn launch_is_mostly_lowest_band() {
    let optics = OpticsParams::default();
    let (grid, _, input) = fig5_setup(&optics);
    let bands = grid_bands(&optics, &grid);
    let pops = band_populations(&input, &bands, 1.0).unwrap();
    println!("launch populations {:?}", pops);
    assert!(pops.guided_fraction(0) > 0.9, "{:?}", pops);
    assert!(pops.band[0] > pops.band[1]);
}

#[test]
fn gauges_agree_on_band_populations() {
    let optics = OpticsParams::default();
    let (grid, index, input) = fig5_setup(&optics);
    let bands = grid_bands(&optics, &grid);
    let drive = DriveProfile::from_bending(DriveKind::SingleCycle, 30.0, 0.67, optics.constants()).unwrap();
    let run = |gauge| {
        let out = bpm_run(&input, &index, &optics, &drive, 1.0, &BpmSettings { gauge, ..BpmSettings::default() }).unwrap();
        band_populations(out.snapshots.last().unwrap(), &bands, 1.0).unwrap()
    };
    let (l, v) = (run(DriveGauge::Length), run(DriveGauge::Velocity));
    for b in 0..2 {
        assert!((l.band[b] - v.band[b]).abs() < 1e-3, "band {b}: {} vs {}", l.band[b], v.band[b]);
    }
}

#[test]
fn step_halving_moves_populations_little() {
    let optics = OpticsParams::default();
    let (grid, index, input) = fig5_setup(&optics);
    let bands = grid_bands(&optics, &grid);
    let drive = DriveProfile::from_bending(DriveKind::SingleCycle, 45.0, 0.67, optics.constants()).unwrap();
    let run = |dz| {
        let out = bpm_run(&input, &index, &optics, &drive, 1.0, &BpmSettings { dz_cm: dz, ..BpmSettings::default() }).unwrap();
        band_populations(out.snapshots.last().unwrap(), &bands, 1.0).unwrap()
    };
    let (a, b) = (run(5e-4), run(2.5e-4));
    for k in 0..2 {
        assert!((a.band[k] - b.band[k]).abs() < 1e-4, "band {k}: {} vs {}", a.band[k], b.band[k]);
    }
}

#[test]
fn pure_lowest_band_packet_splits_as_two_level_predicts() {
    // Launch only the band-1 content of the tilted beam; the single-cycle
    // drive with A = 45 um then moves a fraction close to the two-level value
    // into band 2.
    let optics = OpticsParams::default();
    let (grid, index, input) = fig5_setup(&optics);
    let bands = grid_bands(&optics, &grid);
    let mut pure = band_filtered(&input, &bands, 0).unwrap();
    pure.normalize();
    let drive = DriveProfile::from_bending(DriveKind::SingleCycle, 45.0, 0.67, optics.constants()).unwrap();
    let out = bpm_run(&pure, &index, &optics, &drive, 0.67, &BpmSettings::default()).unwrap();
    let pops = band_populations(out.snapshots.last().unwrap(), &bands, 1.0).unwrap();
    println!("pure band-1 launch after one cycle: {:?}", pops);
    let frac = pops.guided_fraction(1);
    assert!((frac - 0.43).abs() < 0.05, "{frac}");
}
