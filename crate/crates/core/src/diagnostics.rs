//! Observables extracted from trajectories: band-resolved power, lattice
//! transition probability, moments and the packet census.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bands::BandStructure;
use crate::bpm::FieldGrid;
use crate::error::{Error, Result};
use crate::spectral::{Fft1d, UniformGrid};
use crate::tight_binding::{bloch_components, bloch_eigenvector, Branch, Gauge, ModeVector, SuperlatticeParams};
use crate::C64;

/// Number of superlattice cells spanned by a periodic grid; the period must
/// be a whole number of cells for the Bloch projection to be exact.
pub fn grid_cells(grid: &UniformGrid, spacing_um: f64) -> Result<usize> {
    let cells = grid.period() / (2.0 * spacing_um);
    let whole = cells.round();
    if whole < 1.0 || (cells - whole).abs() > 1e-9 * whole {
        return Err(Error::Shape(format!(
            "grid period {} um is not a whole number of {} um cells",
            grid.period(),
            2.0 * spacing_um
        )));
    }
    Ok(whole as usize)
}

/// `q a` values resolved by a periodic grid, in `(-pi/2, pi/2]`, ascending.
pub fn grid_zone_samples(grid: &UniformGrid, spacing_um: f64) -> Result<Vec<f64>> {
    let cells = grid_cells(grid, spacing_um)? as i64;
    Ok(folded_indices(cells).map(|p| PI * p as f64 / cells as f64).collect())
}

fn folded_indices(cells: i64) -> impl Iterator<Item = i64> {
    (-(cells - 1) / 2)..=(cells / 2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandPopulations {
    /// Power in each band, as a fraction of the reference power.
    pub band: Vec<f64>,
    /// Reference power minus the banded power: higher bands and losses.
    pub remainder: f64,
}

impl BandPopulations {
    /// Share of band `b` within the two lowest bands.
    pub fn guided_fraction(&self, b: usize) -> f64 {
        self.band[b] / (self.band[0] + self.band[1])
    }
}

/// Project a field onto the Bloch modes of `bands`, which must be sampled at
/// the grid's own zone points ([`grid_zone_samples`]).
pub fn band_populations(field: &FieldGrid, bands: &BandStructure, reference_power: f64) -> Result<BandPopulations> {
    let amps = bloch_amplitudes(field, bands)?;
    let scale = field.grid.spacing() / field.grid.n as f64;
    let band: Vec<f64> = (0..bands.n_bands())
        .map(|b| amps.iter().map(|per_q| per_q[b].norm_sqr()).sum::<f64>() * scale / reference_power)
        .collect();
    let remainder = 1.0 - band.iter().sum::<f64>();
    Ok(BandPopulations { band, remainder })
}

/// Bloch amplitudes `b[iq][band]` of the field (unnormalised FFT scale).
fn bloch_amplitudes(field: &FieldGrid, bands: &BandStructure) -> Result<Vec<Vec<C64>>> {
    let grid = field.grid;
    let qa = grid_zone_samples(&grid, bands.spacing_um)?;
    if qa.len() != bands.qa.len() || qa.iter().zip(&bands.qa).any(|(x, y)| (x - y).abs() > 1e-12) {
        return Err(Error::Shape("band structure is not sampled at the grid's zone points".into()));
    }
    let n_pw = bands.n_plane_waves();
    if n_pw == 0 {
        return Err(Error::Shape("band structure carries no Bloch modes".into()));
    }
    let cells = qa.len() as i64;
    let n = grid.n as i64;
    let m_max = (n_pw / 2) as i64;
    if cells * m_max + cells / 2 > n / 2 {
        return Err(Error::Shape("plane-wave basis exceeds the grid's spectral range".into()));
    }
    let mut spec = field.envelope.clone();
    Fft1d::new(grid.n).forward(&mut spec);
    let dk = 2.0 * PI / grid.period();
    Ok(folded_indices(cells)
        .enumerate()
        .map(|(iq, pf)| {
            let coeffs: Vec<C64> = (-m_max..=m_max)
                .map(|m| {
                    let p = pf + cells * m;
                    let kappa = dk * p as f64;
                    spec[p.rem_euclid(n) as usize] * C64::from_polar(1.0, -kappa * grid.min)
                })
                .collect();
            bands.modes[iq]
                .iter()
                .map(|u| u.iter().zip(&coeffs).map(|(u, c)| u.conj() * c).sum())
                .collect()
        })
        .collect())
}

/// Field made of the band-`band` components of `field` only.
pub fn band_filtered(field: &FieldGrid, bands: &BandStructure, band: usize) -> Result<FieldGrid> {
    let amps = bloch_amplitudes(field, bands)?;
    let grid = field.grid;
    let cells = bands.qa.len() as i64;
    let n = grid.n as i64;
    let m_max = (bands.n_plane_waves() / 2) as i64;
    let dk = 2.0 * PI / grid.period();
    let mut spec = vec![C64::new(0.0, 0.0); grid.n];
    for (iq, pf) in folded_indices(cells).enumerate() {
        let b = amps[iq][band];
        for (i, m) in (-m_max..=m_max).enumerate() {
            let p = pf + cells * m;
            let kappa = dk * p as f64;
            spec[p.rem_euclid(n) as usize] += b * bands.modes[iq][band][i] * C64::from_polar(1.0, kappa * grid.min);
        }
    }
    Fft1d::new(grid.n).inverse(&mut spec);
    Ok(FieldGrid {
        envelope: spec,
        ..field.clone()
    })
}

/// Band occupations of a gauged lattice state, summed over all Bloch numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeOccupation {
    pub z: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Upper/lower miniband weights along a gauged trajectory, relative to each
/// state's power.
pub fn lattice_transition_probability(
    traj: &[ModeVector],
    params: &SuperlatticeParams,
) -> Result<Vec<LatticeOccupation>> {
    traj.iter()
        .map(|s| {
            if s.gauge != Gauge::Gauged {
                return Err(Error::param("gauge", "band projection needs gauged amplitudes"));
            }
            let total = s.power();
            let (mut lower, mut upper) = (0.0, 0.0);
            for c in bloch_components(s)? {
                let vm = bloch_eigenvector(c.qa, Branch::Minus, params);
                let vp = bloch_eigenvector(c.qa, Branch::Plus, params);
                lower += (c.s[0] * vm[0] + c.s[1] * vm[1]).norm_sqr();
                upper += (c.s[0] * vp[0] + c.s[1] * vp[1]).norm_sqr();
            }
            Ok(LatticeOccupation {
                z: s.z,
                lower: lower / total,
                upper: upper / total,
            })
        })
        .collect()
}

/// Intensity-weighted mean and variance of `x`.
pub fn moments(x: &[f64], intensity: &[f64]) -> (f64, f64) {
    let total: f64 = intensity.iter().sum();
    let mean = x.iter().zip(intensity).map(|(x, w)| x * w).sum::<f64>() / total;
    let var = x.iter().zip(intensity).map(|(x, w)| (x - mean).powi(2) * w).sum::<f64>() / total;
    (mean, var)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CensusSettings {
    /// Segment threshold as a fraction of the smoothed peak.
    pub threshold: f64,
    /// Segments closer than this are merged (x units).
    pub merge_distance: f64,
    /// Boxcar width applied before thresholding (x units); 0 disables.
    pub smoothing: f64,
}

impl CensusSettings {
    /// Threshold 0.1, merge radius and smoothing of one superlattice period.
    pub fn for_spacing(spacing: f64) -> Self {
        Self {
            threshold: 0.1,
            merge_distance: 2.0 * spacing,
            smoothing: 2.0 * spacing,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Packet {
    pub center: f64,
    pub power: f64,
    /// Transverse velocity (x units per cm) when tracked, else `None`.
    pub velocity: Option<f64>,
}

/// Segment an intensity profile into packets. Packets are returned in
/// order of decreasing power.
pub fn packet_census(x: &[f64], intensity: &[f64], settings: &CensusSettings) -> Result<Vec<Packet>> {
    if !(settings.threshold > 0.0 && settings.threshold < 1.0) {
        return Err(Error::param("threshold", "must lie in (0, 1)"));
    }
    if x.len() != intensity.len() || x.len() < 2 {
        return Err(Error::Shape("census needs matching x and intensity arrays".into()));
    }
    let dx = x[1] - x[0];
    let smooth = boxcar(intensity, (settings.smoothing / dx).round() as usize);
    let peak = smooth.iter().cloned().fold(0.0, f64::max);
    if peak <= 0.0 {
        return Ok(Vec::new());
    }
    let cut = settings.threshold * peak;
    let mut segments: Vec<(usize, usize)> = Vec::new();
    let mut start = None;
    for (i, &v) in smooth.iter().enumerate() {
        match (start, v >= cut) {
            (None, true) => start = Some(i),
            (Some(s), false) => {
                segments.push((s, i));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        segments.push((s, smooth.len()));
    }
    let mut merged: Vec<(usize, usize)> = Vec::new();
    for seg in segments {
        match merged.last_mut() {
            Some(last) if x[seg.0] - x[last.1 - 1] < settings.merge_distance => last.1 = seg.1,
            _ => merged.push(seg),
        }
    }
    let mut packets: Vec<Packet> = merged
        .into_iter()
        .map(|(s, e)| {
            let w = &intensity[s..e];
            let (center, _) = moments(&x[s..e], w);
            Packet {
                center,
                power: w.iter().sum::<f64>() * dx,
                velocity: None,
            }
        })
        .collect();
    packets.sort_by(|a, b| b.power.total_cmp(&a.power));
    Ok(packets)
}

fn boxcar(v: &[f64], width: usize) -> Vec<f64> {
    if width <= 1 {
        return v.to_vec();
    }
    let half = width / 2;
    let mut prefix = vec![0.0; v.len() + 1];
    for (i, x) in v.iter().enumerate() {
        prefix[i + 1] = prefix[i] + x;
    }
    (0..v.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(v.len());
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

/// Attach velocities to the packets of the last census by following each
/// back through up to four earlier censuses (nearest centre) and fitting a
/// least-squares slope of centre against `z`.
pub fn track_velocities(history: &[(f64, Vec<Packet>)]) -> Vec<Packet> {
    let Some((_, last)) = history.last() else {
        return Vec::new();
    };
    let window = &history[history.len().saturating_sub(5)..];
    last.iter()
        .map(|p| {
            let mut pts = vec![(window[window.len() - 1].0, p.center)];
            let mut c = p.center;
            for (z, packets) in window.iter().rev().skip(1) {
                let Some(prev) = packets
                    .iter()
                    .min_by(|a, b| (a.center - c).abs().total_cmp(&(b.center - c).abs()))
                else {
                    break;
                };
                c = prev.center;
                pts.push((*z, c));
            }
            Packet {
                velocity: slope(&pts),
                ..*p
            }
        })
        .collect()
}

fn slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (mz, mx) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let szz: f64 = pts.iter().map(|p| (p.0 - mz).powi(2)).sum();
    if szz == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mz) * (p.1 - mx)).sum::<f64>() / szz)
}

/// Snapshot observables of a continuum field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub z: f64,
    pub band_power: Option<BandPopulations>,
    pub centroid_x: f64,
    pub second_moment: f64,
    pub packets: Vec<Packet>,
}

impl Observables {
    pub fn packet_count(&self) -> usize {
        self.packets.len()
    }
}

pub fn field_observables(
    field: &FieldGrid,
    bands: Option<&BandStructure>,
    census: &CensusSettings,
    reference_power: f64,
) -> Result<Observables> {
    let x = field.grid.points();
    let intensity = field.intensity();
    let (centroid_x, second_moment) = moments(&x, &intensity);
    let band_power = bands.map(|b| band_populations(field, b, reference_power)).transpose()?;
    Ok(Observables {
        z: field.z,
        band_power,
        centroid_x,
        second_moment,
        packets: packet_census(&x, &intensity, census)?,
    })
}

/// Census of a lattice state with sites as the x coordinate.
pub fn lattice_census(state: &ModeVector, census: &CensusSettings) -> Result<Vec<Packet>> {
    let x: Vec<f64> = (0..state.len()).map(|i| state.site(i) as f64).collect();
    let intensity: Vec<f64> = state.amplitudes.iter().map(|a| a.norm_sqr()).collect();
    packet_census(&x, &intensity, census)
}
