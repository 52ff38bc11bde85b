//! Scenario files: TOML with one table per concern.
//!
//! Every table is optional and falls back to the defaults below; unknown keys
//! are rejected. `--set section.key=value` edits the parsed document before
//! it is checked against the schema, so overrides get the same validation.

use std::f64::consts::PI;
use std::path::Path;

use pairsim_core::bpm::{Absorber, DriveGauge, OpticsParams};
use pairsim_core::diagnostics::CensusSettings;
use pairsim_core::drive::DriveKind;
use pairsim_core::tight_binding::{Boundary, Branch, Gauge, SuperlatticeParams};
use pairsim_core::two_level::MatrixKind;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    TwoLevel,
    TightBinding,
    Dirac,
    Bpm,
    Bands,
    Calibrate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub tier: Tier,
    #[serde(default)]
    pub lattice: LatticeSection,
    #[serde(default)]
    pub optics: OpticsParams,
    #[serde(default)]
    pub drive: DriveSection,
    #[serde(default)]
    pub input: InputSection,
    #[serde(default)]
    pub numerics: NumericsSection,
    #[serde(default)]
    pub census: CensusSection,
    #[serde(default)]
    pub calibration: CalibrationSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeSection {
    /// Coupling constant, cm^-1.
    pub sigma: f64,
    /// Half the sublattice propagation-constant mismatch, cm^-1.
    pub delta: f64,
    pub spacing_um: f64,
    pub n_sites: usize,
}

impl Default for LatticeSection {
    fn default() -> Self {
        let p = SuperlatticeParams::fitted_silica(256);
        Self {
            sigma: p.sigma,
            delta: p.delta,
            spacing_um: p.spacing_um,
            n_sites: p.n_sites,
        }
    }
}

impl LatticeSection {
    pub fn params(&self) -> SuperlatticeParams {
        SuperlatticeParams {
            sigma: self.sigma,
            delta: self.delta,
            spacing_um: self.spacing_um,
            n_sites: self.n_sites,
        }
    }
}

/// Drive amplitude is given either as `phi0` or as a bending `amplitude_um`
/// (converted with the optics table); the period either directly or as the
/// order of a multiphoton resonance at `input.qa`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriveSection {
    pub kind: DriveKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude_um: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub period_cm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resonance_order: Option<u32>,
    /// Tabulated profiles: sample positions and phases.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub table_z_cm: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub table_phase: Vec<f64>,
}

impl Default for DriveSection {
    fn default() -> Self {
        Self {
            kind: DriveKind::Straight,
            phi0: None,
            amplitude_um: None,
            period_cm: None,
            resonance_order: None,
            table_z_cm: Vec::new(),
            table_phase: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputKind {
    /// Plane wave in the lower band (two-level and lattice tiers).
    LowerBand,
    /// Single Bloch mode of `branch`.
    BlochMode,
    /// Gaussian site envelope with carrier `qa`, both bands.
    Gaussian,
    /// Gaussian envelope filtered onto `branch`.
    BandPacket,
    /// Negative-energy Dirac packet on its own grid.
    NegativePacket,
    /// Tilted Gaussian beam for the continuum tier.
    TiltedGaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<InputKind>,
    /// Bloch number times lattice spacing.
    pub qa: f64,
    pub branch: Branch,
    /// Packet centre: sites (lattice), cells (Dirac) or um (continuum).
    pub center: f64,
    /// Packet 1/e amplitude half-width, same units as `center`.
    pub width: f64,
    /// Continuum beam waist, um.
    pub w0_um: f64,
    /// Continuum tilt as a fraction of the Bragg angle.
    pub tilt_bragg_fraction: f64,
}

impl Default for InputSection {
    fn default() -> Self {
        Self {
            kind: None,
            qa: PI / 4.0,
            branch: Branch::Minus,
            center: 0.0,
            width: 16.0,
            w0_um: 80.0,
            tilt_bragg_fraction: 0.5,
        }
    }
}

impl InputSection {
    pub fn resolved_kind(&self, tier: Tier) -> InputKind {
        self.kind.unwrap_or(match tier {
            Tier::Dirac => InputKind::NegativePacket,
            Tier::Bpm => InputKind::TiltedGaussian,
            Tier::TightBinding => InputKind::BandPacket,
            _ => InputKind::LowerBand,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericsSection {
    /// End of the run; defaults to one period for single-cycle drives.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_end_cm: Option<f64>,
    /// Step; tier default when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dz_cm: Option<f64>,
    /// Record observables every n-th step.
    pub sample_every: usize,
    pub matrix: MatrixKind,
    pub boundary: Boundary,
    pub lattice_gauge: Gauge,
    pub bpm_gauge: DriveGauge,
    /// Continuum grid points / Dirac grid points.
    pub grid_points: usize,
    /// Continuum window in superlattice periods (2a each).
    pub grid_cells: usize,
    pub n_guides: usize,
    /// Dirac grid half width in cells.
    pub xi_half_width: f64,
    pub absorber: Absorber,
    pub n_plane_waves: usize,
    pub n_bands: usize,
    /// Bloch numbers across the zone for the band tier.
    pub n_q: usize,
}

impl Default for NumericsSection {
    fn default() -> Self {
        Self {
            z_end_cm: None,
            dz_cm: None,
            sample_every: 100,
            matrix: MatrixKind::Full,
            boundary: Boundary::HardWall,
            lattice_gauge: Gauge::Gauged,
            bpm_gauge: DriveGauge::Length,
            grid_points: 4096,
            grid_cells: 41,
            n_guides: 60,
            xi_half_width: 256.0,
            absorber: Absorber::default(),
            n_plane_waves: 81,
            n_bands: 4,
            n_q: 128,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CensusSection {
    pub threshold: f64,
    /// In x units of the tier; `2a` (or two sites) when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub merge_distance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub smoothing: Option<f64>,
}

impl Default for CensusSection {
    fn default() -> Self {
        Self {
            threshold: 0.1,
            merge_distance: None,
            smoothing: None,
        }
    }
}

impl CensusSection {
    pub fn settings(&self, spacing: f64) -> CensusSettings {
        let d = CensusSettings::for_spacing(spacing);
        CensusSettings {
            threshold: self.threshold,
            merge_distance: self.merge_distance.unwrap_or(d.merge_distance),
            smoothing: self.smoothing.unwrap_or(d.smoothing),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationSection {
    pub target_sigma: f64,
    pub target_delta: f64,
    pub width_min_um: f64,
    pub width_max_um: f64,
    pub rel_tol: f64,
}

impl Default for CalibrationSection {
    fn default() -> Self {
        Self {
            target_sigma: 2.0,
            target_delta: 1.817,
            width_min_um: 5.0,
            width_max_um: 8.0,
            rel_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    /// Write binary field dumps.
    pub dumps: bool,
    /// Dump every n-th recorded sample (first and last always).
    pub dump_stride: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dumps: false,
            dump_stride: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axes: Vec<Axis>,
}

/// One sweep axis: explicit `values`, or `start..=stop` in steps of `step`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub key: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

impl Axis {
    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        let bad = |msg: &str| CliError::Config {
            path: format!("sweep.axes[{}]", self.key),
            message: msg.to_string(),
        };
        match (self.values.is_empty(), self.start, self.stop, self.step) {
            (false, None, None, None) => Ok(self.values.clone()),
            (true, Some(a), Some(b), Some(h)) => {
                if !(h > 0.0) || b < a {
                    return Err(bad("need step > 0 and stop >= start"));
                }
                let n = ((b - a) / h + 1e-9).floor() as usize;
                Ok((0..=n).map(|i| a + i as f64 * h).collect())
            }
            _ => Err(bad("give either `values` or all of `start`, `stop`, `step`")),
        }
    }

    /// Parse `key=start:stop:step` or `key=v1,v2,...`.
    pub fn parse(spec: &str) -> Result<Self, CliError> {
        let err = |m: &str| CliError::Usage(format!("axis `{spec}`: {m}"));
        let (key, rest) = spec.split_once('=').ok_or_else(|| err("expected key=..."))?;
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| err("not a number"));
        let mut axis = Axis {
            key: key.trim().to_string(),
            values: Vec::new(),
            start: None,
            stop: None,
            step: None,
        };
        let parts: Vec<&str> = rest.split(':').collect();
        match parts.len() {
            3 => {
                axis.start = Some(num(parts[0])?);
                axis.stop = Some(num(parts[1])?);
                axis.step = Some(num(parts[2])?);
            }
            1 => axis.values = rest.split(',').map(num).collect::<Result<_, _>>()?,
            _ => return Err(err("expected start:stop:step or a comma list")),
        }
        Ok(axis)
    }
}

/// Parsed but not yet schema-checked document.
#[derive(Debug, Clone, PartialEq)]
pub struct Document(pub toml::Table);

impl Document {
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        text.parse::<toml::Table>().map(Document).map_err(|e| CliError::Config {
            path: origin.to_string(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Apply `a.b.c=value`; the value is read as a TOML literal, falling back
    /// to a bare string.
    pub fn set(&mut self, assignment: &str) -> Result<(), CliError> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("override `{assignment}` is not key=value")))?;
        let value = parse_literal(raw.trim());
        self.set_value(key.trim(), value)
    }

    pub fn set_value(&mut self, key: &str, value: toml::Value) -> Result<(), CliError> {
        let parts: Vec<&str> = key.split('.').collect();
        if parts.iter().any(|p| p.is_empty()) {
            return Err(CliError::Usage(format!("bad key `{key}`")));
        }
        let mut table = &mut self.0;
        for (i, part) in parts[..parts.len() - 1].iter().enumerate() {
            let entry = table
                .entry(part.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            table = entry.as_table_mut().ok_or_else(|| CliError::Config {
                path: parts[..=i].join("."),
                message: "is not a table".into(),
            })?;
        }
        table.insert(parts[parts.len() - 1].to_string(), value);
        Ok(())
    }

    pub fn scenario(&self) -> Result<Scenario, CliError> {
        let de = toml::Value::Table(self.0.clone());
        serde_path_to_error::deserialize::<_, Scenario>(de).map_err(|e| CliError::Config {
            path: e.path().to_string(),
            message: e.inner().message().to_string(),
        })
    }
}

fn parse_literal(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

impl Scenario {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_takes_defaults() {
        let s = Document::parse("tier = \"two_level\"", "t").unwrap().scenario().unwrap();
        assert_eq!(s.tier, Tier::TwoLevel);
        assert_eq!(s.lattice.sigma, 2.0);
        assert_eq!(s.optics, OpticsParams::default());
    }

    #[test]
    fn unknown_key_reports_path() {
        let err = Document::parse("tier = \"bpm\"\n[drive]\nphi = 3\n", "t")
            .unwrap()
            .scenario()
            .unwrap_err();
        match err {
            CliError::Config { path, message } => {
                assert_eq!(path, "drive.phi");
                assert!(message.contains("phi"), "{message}");
            }
            e => panic!("{e:?}"),
        }
        let err = Document::parse("tier = \"bpm\"\n[numerics]\ngrid_points = \"many\"\n", "t")
            .unwrap()
            .scenario()
            .unwrap_err();
        assert!(matches!(err, CliError::Config { ref path, .. } if path == "numerics.grid_points"), "{err:?}");
    }

    #[test]
    fn overrides_parse_literals() {
        let mut d = Document::parse("tier = \"two_level\"", "t").unwrap();
        d.set("drive.kind=single_cycle").unwrap();
        d.set("drive.phi0 = 6").unwrap();
        d.set("numerics.absorber.fraction=0.2").unwrap();
        let s = d.scenario().unwrap();
        assert_eq!(s.drive.kind, DriveKind::SingleCycle);
        assert_eq!(s.drive.phi0, Some(6.0));
        assert_eq!(s.numerics.absorber.fraction, 0.2);
        assert!(d.set("tier.x=1").is_err());
    }

    #[test]
    fn resolved_round_trip() {
        let mut d = Document::parse("tier = \"bpm\"", "t").unwrap();
        d.set("drive.amplitude_um=45").unwrap();
        let s = d.scenario().unwrap();
        let again = Document::parse(&s.to_toml(), "r").unwrap().scenario().unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn axis_forms() {
        let a = Axis::parse("drive.phi0=0:8:0.05").unwrap();
        let p = a.points().unwrap();
        assert_eq!(p.len(), 161);
        assert!((p[160] - 8.0).abs() < 1e-12);
        let b = Axis::parse("drive.phi0=1,2.5").unwrap();
        assert_eq!(b.points().unwrap(), vec![1.0, 2.5]);
        assert!(Axis::parse("drive.phi0=1:2").is_err());
    }
}
