//! Tier dispatch: one scenario in, tables, dumps and scalar metrics out.

use std::collections::BTreeMap;
use std::path::Path;

use pairsim_core::bands::{
    calibrate_channel, fit_tight_binding, plane_wave_bands_at, truncation_shift, zone_samples, CalibrationSearch,
};
use pairsim_core::bpm::{
    bpm_run, bragg_angle, build_index_profile, gaussian_tilted_input, lattice_grid, BpmSettings,
};
use pairsim_core::diagnostics::{
    field_observables, grid_zone_samples, lattice_census, lattice_transition_probability, moments, packet_census,
    track_velocities, Packet,
};
use pairsim_core::dirac::{dirac_evolve, spinor_from_lattice, SpinorField, XiGrid};
use pairsim_core::drive::{DriveKind, DriveProfile};
use pairsim_core::io::FieldDump;
use pairsim_core::spectral::UniformGrid;
use pairsim_core::tight_binding::{
    default_step, evolve_bare, evolve_gauged, gauge_transform, Branch, Gauge, GaugeDirection, Integration,
    ModeVector, SuperlatticeParams,
};
use pairsim_core::two_level::{dirac_momentum, evolve, resonance_period, ResonanceDrive, Stepping, TwoLevelState};
use serde::Serialize;

use crate::config::{InputKind, Scenario, Tier};
use crate::error::CliError;
use crate::output::{Cell, Manifest, OutputDir, Table};

/// Everything a run produces, before anything touches the disk.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub tier: Tier,
    pub metrics: BTreeMap<String, f64>,
    pub tables: Vec<Table>,
    pub dumps: Vec<(String, FieldDump)>,
    /// Packets of the last recorded snapshot, with tracked velocities.
    pub final_packets: Vec<Packet>,
}

impl RunReport {
    fn new(tier: Tier) -> Self {
        Self {
            tier,
            metrics: BTreeMap::new(),
            tables: Vec::new(),
            dumps: Vec::new(),
            final_packets: Vec::new(),
        }
    }

    pub fn metric(&self, key: &str) -> Option<f64> {
        self.metrics.get(key).copied()
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    fn set(&mut self, key: &str, v: f64) {
        self.metrics.insert(key.to_string(), v);
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    tier: Tier,
    metrics: &'a BTreeMap<String, f64>,
    final_packets: &'a [Packet],
}

#[derive(Debug, Clone)]
pub struct ResolvedDrive {
    pub profile: DriveProfile,
    pub phi0: f64,
    pub period_cm: f64,
    pub n_target: Option<u32>,
}

fn cfg_err(path: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        path: path.to_string(),
        message: message.into(),
    }
}

pub fn resolve_drive(s: &Scenario) -> Result<ResolvedDrive, CliError> {
    let d = &s.drive;
    let consts = s.optics.constants();
    let profile = match d.kind {
        DriveKind::Straight => DriveProfile::straight(),
        DriveKind::Tabulated => {
            if d.table_z_cm.is_empty() {
                return Err(cfg_err("drive.table_z_cm", "tabulated drives need a phase table"));
            }
            DriveProfile::tabulated(d.table_z_cm.clone(), d.table_phase.clone())?
        }
        kind => {
            let bending = match (d.phi0, d.amplitude_um) {
                (Some(_), None) => None,
                (None, Some(a)) => Some(a),
                _ => return Err(cfg_err("drive", "give exactly one of `phi0` and `amplitude_um`")),
            };
            let period = match (d.period_cm, d.resonance_order) {
                (Some(p), None) => p,
                (None, Some(n)) => {
                    let rd = match bending {
                        Some(amplitude_um) => ResonanceDrive::FixedBending {
                            amplitude_um,
                            optics: consts,
                        },
                        None => ResonanceDrive::FixedPhase(d.phi0.unwrap()),
                    };
                    resonance_period(n, s.input.qa, rd, &s.lattice.params())?
                }
                _ => return Err(cfg_err("drive", "give exactly one of `period_cm` and `resonance_order`")),
            };
            match bending {
                Some(a) => DriveProfile::from_bending(kind, a, period, consts)?,
                None if kind == DriveKind::Sinusoidal => DriveProfile::sinusoidal(d.phi0.unwrap(), period)?,
                None => DriveProfile::single_cycle(d.phi0.unwrap(), period)?,
            }
        }
    };
    Ok(ResolvedDrive {
        phi0: profile.phase_amplitude(),
        period_cm: profile.period_cm(),
        n_target: d.resonance_order,
        profile,
    })
}

fn z_end(s: &Scenario, drive: &ResolvedDrive) -> Result<f64, CliError> {
    let z = match s.numerics.z_end_cm {
        Some(z) => z,
        None => match drive.profile.kind() {
            DriveKind::SingleCycle => drive.period_cm,
            DriveKind::Tabulated => drive.profile.domain().1,
            _ => return Err(cfg_err("numerics.z_end_cm", "required for this drive")),
        },
    };
    if !(z > 0.0) || !z.is_finite() {
        return Err(cfg_err("numerics.z_end_cm", "must be positive"));
    }
    Ok(z)
}

fn wrong_input(tier: Tier, kind: InputKind) -> CliError {
    cfg_err("input.kind", format!("{kind:?} input is not available for the {tier:?} tier"))
}

/// Run the scenario without writing anything.
pub fn evaluate(s: &Scenario) -> Result<RunReport, CliError> {
    if s.numerics.sample_every == 0 {
        return Err(cfg_err("numerics.sample_every", "must be at least 1"));
    }
    if s.output.dump_stride == 0 {
        return Err(cfg_err("output.dump_stride", "must be at least 1"));
    }
    match s.tier {
        Tier::TwoLevel => two_level(s),
        Tier::TightBinding => tight_binding(s),
        Tier::Dirac => dirac(s),
        Tier::Bpm => bpm(s),
        Tier::Bands => bands(s),
        Tier::Calibrate => calibrate(s),
    }
}

/// Run and write tables, dumps, `summary.json`, `resolved.toml` and
/// `manifest.json` under `out`.
pub fn run(s: &Scenario, out: &Path, seedless: bool) -> Result<(RunReport, Manifest), CliError> {
    let report = evaluate(s)?;
    let mut dir = OutputDir::create(out)?;
    for t in &report.tables {
        dir.table(t)?;
    }
    for (name, d) in &report.dumps {
        dir.dump(name, d)?;
    }
    let summary = Summary {
        tier: report.tier,
        metrics: &report.metrics,
        final_packets: &report.final_packets,
    };
    dir.write("summary.json", &serde_json::to_vec_pretty(&summary).expect("summary serialises"))?;
    let tier = serde_json::to_value(s.tier).expect("tier serialises");
    let manifest = dir.finish(tier.as_str().unwrap_or_default().to_string(), &s.to_toml(), seedless)?;
    Ok((report, manifest))
}

fn drive_metrics(r: &mut RunReport, s: &Scenario, d: &ResolvedDrive) {
    r.set("phi0", d.phi0);
    r.set("lambda_cm", d.period_cm);
    r.set("qa", s.input.qa);
    if let Some(n) = d.n_target {
        r.set("n_target", n as f64);
    }
}

fn peak(series: impl Iterator<Item = (f64, f64)>) -> (f64, f64) {
    series.fold((0.0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a })
}

fn two_level(s: &Scenario) -> Result<RunReport, CliError> {
    let kind = s.input.resolved_kind(s.tier);
    if kind != InputKind::LowerBand {
        return Err(wrong_input(s.tier, kind));
    }
    let params = s.lattice.params();
    let drive = resolve_drive(s)?;
    let z_end = z_end(s, &drive)?;
    let dz = s.numerics.dz_cm.unwrap_or_else(|| default_step(&drive.profile, &params));
    let traj = evolve(
        &TwoLevelState::ground(s.input.qa),
        &drive.profile,
        &params,
        s.numerics.matrix,
        z_end,
        &Stepping::new(dz).sampled(s.numerics.sample_every),
    )?;
    let mut t = Table::new("trajectory", &["z_cm", "P", "re_rm", "im_rm", "re_rp", "im_rp"]);
    for st in &traj {
        t.push(vec![
            st.z.into(),
            st.upper_population().into(),
            st.r_minus.re.into(),
            st.r_minus.im.into(),
            st.r_plus.re.into(),
            st.r_plus.im.into(),
        ]);
    }
    let mut r = RunReport::new(s.tier);
    drive_metrics(&mut r, s, &drive);
    let (zp, pmax) = peak(traj.iter().map(|st| (st.z, st.upper_population())));
    r.set("p_final", traj.last().unwrap().upper_population());
    r.set("p_max", pmax);
    r.set("z_at_p_max", zp);
    r.set("dz_cm", dz);
    r.tables.push(t);
    Ok(r)
}

fn packet_header(base: &[&str], max_packets: usize, unit: &str) -> Vec<String> {
    let mut h: Vec<String> = base.iter().map(|s| s.to_string()).collect();
    for i in 1..=max_packets {
        h.push(format!("packet{i}_center_{unit}"));
        h.push(format!("packet{i}_power"));
        h.push(format!("packet{i}_velocity"));
    }
    h
}

fn packet_cells(packets: &[Packet]) -> Vec<Cell> {
    packets
        .iter()
        .flat_map(|p| [p.center.into(), p.power.into(), p.velocity.into()])
        .collect()
}

/// Velocity-tracked censuses for every prefix of the history.
fn tracked(history: &[(f64, Vec<Packet>)]) -> Vec<Vec<Packet>> {
    (1..=history.len()).map(|i| track_velocities(&history[..i])).collect()
}

fn dump_indices(n: usize, stride: usize) -> impl Iterator<Item = usize> {
    (0..n).filter(move |&i| i % stride == 0 || i + 1 == n)
}

fn lattice_input(s: &Scenario, params: &SuperlatticeParams, sites_per_unit: f64) -> Result<ModeVector, CliError> {
    let i = &s.input;
    let c = i.center * sites_per_unit;
    let w = i.width * sites_per_unit;
    Ok(match i.resolved_kind(s.tier) {
        InputKind::LowerBand => ModeVector::bloch_mode(i.qa, Branch::Minus, params)?,
        InputKind::BlochMode => ModeVector::bloch_mode(i.qa, i.branch, params)?,
        InputKind::Gaussian => ModeVector::gaussian(i.qa, c, w, params.n_sites)?,
        InputKind::BandPacket => ModeVector::band_packet(i.qa, c, w, i.branch, params)?,
        k => return Err(wrong_input(s.tier, k)),
    })
}

fn tight_binding(s: &Scenario) -> Result<RunReport, CliError> {
    let params = s.lattice.params();
    let drive = resolve_drive(s)?;
    let z_end = z_end(s, &drive)?;
    let dz = s.numerics.dz_cm.unwrap_or_else(|| default_step(&drive.profile, &params));
    let opts = Integration::new(dz, s.numerics.boundary).sampled(s.numerics.sample_every);
    let start = lattice_input(s, &params, 1.0)?;
    let traj = match s.numerics.lattice_gauge {
        Gauge::Gauged => evolve_gauged(&start, &params, &drive.profile, z_end, &opts)?,
        Gauge::Bare => {
            let bare = gauge_transform(&start, &drive.profile, GaugeDirection::ToBare)?;
            evolve_bare(&bare, &params, &drive.profile, z_end, &opts)?
                .iter()
                .map(|m| gauge_transform(m, &drive.profile, GaugeDirection::ToGauged))
                .collect::<Result<_, _>>()?
        }
    };
    let occ = lattice_transition_probability(&traj, &params)?;
    let census = s.census.settings(1.0);
    let history: Vec<(f64, Vec<Packet>)> = traj
        .iter()
        .map(|m| Ok((m.z, lattice_census(m, &census)?)))
        .collect::<Result<_, CliError>>()?;
    let packets = tracked(&history);
    let max_p = packets.iter().map(Vec::len).max().unwrap_or(0);
    let header = packet_header(&["z_cm", "P_upper", "P_lower", "power", "centroid_site", "n_packets"], max_p, "site");
    let mut t = Table {
        name: "observables".into(),
        header,
        rows: Vec::new(),
    };
    let sites: Vec<f64> = (0..params.n_sites).map(|i| start.site(i) as f64).collect();
    for ((m, o), p) in traj.iter().zip(&occ).zip(&packets) {
        let intensity: Vec<f64> = m.amplitudes.iter().map(|a| a.norm_sqr()).collect();
        let (centroid, _) = moments(&sites, &intensity);
        let mut row = vec![m.z.into(), o.upper.into(), o.lower.into(), m.power().into(), centroid.into(), Cell::Int(p.len() as i64)];
        row.extend(packet_cells(p));
        t.push(row);
    }
    let mut r = RunReport::new(s.tier);
    drive_metrics(&mut r, s, &drive);
    let (zp, pmax) = peak(occ.iter().map(|o| (o.z, o.upper)));
    r.set("p_final", occ.last().unwrap().upper);
    r.set("p_max", pmax);
    r.set("z_at_p_max", zp);
    r.set("power_final", traj.last().unwrap().power());
    r.set("dz_cm", dz);
    if s.output.dumps {
        let n = params.n_sites as f64;
        let grid = UniformGrid::new(-(n / 2.0).floor(), n - 1.0 - (n / 2.0).floor(), params.n_sites)?;
        for i in dump_indices(traj.len(), s.output.dump_stride) {
            r.dumps.push((
                format!("dumps/lattice_{i:05}.bin"),
                FieldDump {
                    grid,
                    z: traj[i].z,
                    components: vec![traj[i].amplitudes.clone()],
                },
            ));
        }
    }
    r.final_packets = packets.last().cloned().unwrap_or_default();
    r.tables.push(t);
    Ok(r)
}

fn dirac(s: &Scenario) -> Result<RunReport, CliError> {
    let params = s.lattice.params();
    let drive = resolve_drive(s)?;
    let z_end = z_end(s, &drive)?;
    let dz = s.numerics.dz_cm.unwrap_or_else(|| default_step(&drive.profile, &params));
    let start = match s.input.resolved_kind(s.tier) {
        InputKind::NegativePacket => {
            let half = s.numerics.xi_half_width;
            let n = s.numerics.grid_points;
            if !(half > 0.0) || n < 2 {
                return Err(cfg_err("numerics", "Dirac grid needs xi_half_width > 0 and grid_points >= 2"));
            }
            let grid = XiGrid::from_spacing(-half, 2.0 * half / n as f64, n)?;
            SpinorField::negative_packet(grid, dirac_momentum(s.input.qa), s.input.center, s.input.width, &params)?
        }
        InputKind::BandPacket | InputKind::Gaussian | InputKind::BlochMode | InputKind::LowerBand => {
            // cells are two sites
            spinor_from_lattice(&lattice_input(s, &params, 2.0)?)?
        }
        k => return Err(wrong_input(s.tier, k)),
    };
    let traj = dirac_evolve(&start, &drive.profile, &params, z_end, &Stepping::new(dz).sampled(s.numerics.sample_every))?;
    let census = s.census.settings(1.0);
    let xi = start.grid.points();
    let history: Vec<(f64, Vec<Packet>)> = traj
        .iter()
        .map(|f| Ok((f.z, packet_census(&xi, &f.density(), &census)?)))
        .collect::<Result<_, CliError>>()?;
    let packets = tracked(&history);
    let max_p = packets.iter().map(Vec::len).max().unwrap_or(0);
    let header = packet_header(&["z_cm", "P_upper", "P_lower", "norm", "centroid_cell", "n_packets"], max_p, "cell");
    let mut t = Table {
        name: "observables".into(),
        header,
        rows: Vec::new(),
    };
    let mut upper = Vec::with_capacity(traj.len());
    for (f, p) in traj.iter().zip(&packets) {
        let (neg, pos) = f.band_weights(&params);
        let u = pos / (neg + pos);
        upper.push((f.z, u));
        let mut row = vec![f.z.into(), u.into(), (neg / (neg + pos)).into(), f.norm().into(), f.centroid().into(), Cell::Int(p.len() as i64)];
        row.extend(packet_cells(p));
        t.push(row);
    }
    let mut r = RunReport::new(s.tier);
    drive_metrics(&mut r, s, &drive);
    let (zp, pmax) = peak(upper.iter().copied());
    r.set("p_final", upper.last().unwrap().1);
    r.set("p_max", pmax);
    r.set("z_at_p_max", zp);
    r.set("norm_final", traj.last().unwrap().norm());
    r.set("dz_cm", dz);
    if s.output.dumps {
        for i in dump_indices(traj.len(), s.output.dump_stride) {
            r.dumps.push((
                format!("dumps/spinor_{i:05}.bin"),
                FieldDump {
                    grid: traj[i].grid,
                    z: traj[i].z,
                    components: vec![traj[i].psi1.clone(), traj[i].psi2.clone()],
                },
            ));
        }
    }
    r.final_packets = packets.last().cloned().unwrap_or_default();
    r.tables.push(t);
    Ok(r)
}

fn bpm(s: &Scenario) -> Result<RunReport, CliError> {
    let kind = s.input.resolved_kind(s.tier);
    if kind != InputKind::TiltedGaussian {
        return Err(wrong_input(s.tier, kind));
    }
    if s.input.center != 0.0 {
        return Err(cfg_err("input.center", "the continuum beam is launched at the window centre"));
    }
    let optics = s.optics;
    optics.validate()?;
    let drive = resolve_drive(s)?;
    let z_end = z_end(s, &drive)?;
    let n = &s.numerics;
    let grid = lattice_grid(&optics, n.grid_cells, n.grid_points)?;
    let index = build_index_profile(&optics, n.n_guides, &grid)?;
    let theta = s.input.tilt_bragg_fraction * bragg_angle(&optics.constants());
    let input = gaussian_tilted_input(s.input.w0_um, theta, &optics, &grid, n.absorber)?;
    let qa = grid_zone_samples(&grid, optics.spacing_um)?;
    let bands = plane_wave_bands_at(&optics, n.n_plane_waves, &qa, n.n_bands.max(2))?;
    let settings = BpmSettings {
        dz_cm: n.dz_cm.unwrap_or(BpmSettings::default().dz_cm),
        snapshot_every: n.sample_every,
        gauge: n.bpm_gauge,
    };
    let out = bpm_run(&input, &index, &optics, &drive.profile, z_end, &settings)?;
    let census = s.census.settings(optics.spacing_um);
    let obs = out
        .snapshots
        .iter()
        .map(|f| field_observables(f, Some(&bands), &census, 1.0))
        .collect::<Result<Vec<_>, _>>()?;
    let history: Vec<(f64, Vec<Packet>)> = obs.iter().map(|o| (o.z, o.packets.clone())).collect();
    let packets = tracked(&history);
    let max_p = packets.iter().map(Vec::len).max().unwrap_or(0);
    let header = packet_header(&["z_cm", "band1", "band2", "remainder", "centroid_um", "n_packets"], max_p, "um");
    let mut t = Table {
        name: "observables".into(),
        header,
        rows: Vec::new(),
    };
    for (o, p) in obs.iter().zip(&packets) {
        let bp = o.band_power.as_ref().expect("bands supplied");
        let rest = bp.remainder + bp.band[2..].iter().sum::<f64>();
        let mut row = vec![o.z.into(), bp.band[0].into(), bp.band[1].into(), rest.into(), o.centroid_x.into(), Cell::Int(p.len() as i64)];
        row.extend(packet_cells(p));
        t.push(row);
    }
    let mut r = RunReport::new(s.tier);
    drive_metrics(&mut r, s, &drive);
    let last = obs.last().unwrap().band_power.clone().unwrap();
    r.set("band1_final", last.band[0]);
    r.set("band2_final", last.band[1]);
    r.set("remainder_final", last.remainder + last.band[2..].iter().sum::<f64>());
    r.set("band2_guided_fraction", last.guided_fraction(1));
    r.set("p_final", last.guided_fraction(1));
    let first = obs[0].band_power.as_ref().unwrap();
    r.set("band1_guided_launch", first.guided_fraction(0));
    r.set("absorbed", out.absorbed);
    r.set("theta_rad", theta);
    r.set("dz_cm", settings.dz_cm);
    r.set("packet_count", packets.last().map_or(0, Vec::len) as f64);
    if s.output.dumps {
        for i in dump_indices(out.snapshots.len(), s.output.dump_stride) {
            let f = &out.snapshots[i];
            let mut it = Table::new(&format!("dumps/field_{i:05}"), &["x_um", "intensity"]);
            for (x, e) in f.grid.points().iter().zip(&f.envelope) {
                it.push(vec![Cell::Float(*x), Cell::Float(e.norm_sqr())]);
            }
            r.tables.push(it);
            r.dumps.push((
                format!("dumps/field_{i:05}.bin"),
                FieldDump {
                    grid: f.grid,
                    z: f.z,
                    components: vec![f.envelope.clone()],
                },
            ));
        }
    }
    r.final_packets = packets.last().cloned().unwrap_or_default();
    r.tables.push(t);
    Ok(r)
}

fn bands(s: &Scenario) -> Result<RunReport, CliError> {
    let optics = s.optics;
    optics.validate()?;
    let n = &s.numerics;
    let qa = zone_samples(n.n_q);
    let b = plane_wave_bands_at(&optics, n.n_plane_waves, &qa, n.n_bands.max(2))?;
    let fit = fit_tight_binding(&b)?;
    let shift = truncation_shift(&optics, n.n_plane_waves)?;
    let mut header = vec!["qa".to_string()];
    header.extend((1..=b.n_bands()).map(|i| format!("omega_{i}")));
    header.extend(["tb_minus".to_string(), "tb_plus".to_string()]);
    let mut t = Table {
        name: "bands".into(),
        header,
        rows: Vec::new(),
    };
    let tb = SuperlatticeParams {
        sigma: fit.sigma,
        delta: fit.delta,
        spacing_um: optics.spacing_um,
        n_sites: 2,
    };
    for (iq, &q) in b.qa.iter().enumerate() {
        let (wm, wp) = pairsim_core::tight_binding::dispersion(q, &tb);
        let mut row: Vec<Cell> = vec![q.into()];
        row.extend(b.omega.iter().map(|band| Cell::Float(band[iq])));
        row.push((fit.offset + wm).into());
        row.push((fit.offset + wp).into());
        t.push(row);
    }
    let mut r = RunReport::new(s.tier);
    r.set("sigma", fit.sigma);
    r.set("delta", fit.delta);
    r.set("fit_residual", fit.residual);
    r.set("fit_offset", fit.offset);
    r.set("poor_fit", if fit.poor_fit { 1.0 } else { 0.0 });
    r.set("truncation_shift", shift);
    r.tables.push(t);
    Ok(r)
}

fn calibrate(s: &Scenario) -> Result<RunReport, CliError> {
    let c = &s.calibration;
    let search = CalibrationSearch {
        width_bracket_um: (c.width_min_um, c.width_max_um),
        n_plane_waves: s.numerics.n_plane_waves,
        n_q: s.numerics.n_q,
        rel_tol: c.rel_tol,
    };
    let cal = calibrate_channel(c.target_sigma, c.target_delta, &s.optics, &search)?;
    let mut t = Table::new("calibration", &["channel_width_um", "dn2", "sigma", "delta", "fit_residual"]);
    t.push(vec![
        cal.channel_width_um.into(),
        cal.dn2.into(),
        cal.fit.sigma.into(),
        cal.fit.delta.into(),
        cal.fit.residual.into(),
    ]);
    let mut r = RunReport::new(s.tier);
    r.set("channel_width_um", cal.channel_width_um);
    r.set("dn2", cal.dn2);
    r.set("sigma", cal.fit.sigma);
    r.set("delta", cal.fit.delta);
    r.set("fit_residual", cal.fit.residual);
    r.tables.push(t);
    Ok(r)
}
