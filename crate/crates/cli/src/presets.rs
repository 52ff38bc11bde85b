//! Scenario files shipped with the binary.

use crate::config::Document;
use crate::error::CliError;

pub const PRESETS: &[(&str, &str)] = &[
    ("fig2a", include_str!("../presets/fig2a.toml")),
    ("fig2b", include_str!("../presets/fig2b.toml")),
    ("fig3", include_str!("../presets/fig3.toml")),
    ("fig5a", include_str!("../presets/fig5a.toml")),
    ("fig5b", include_str!("../presets/fig5b.toml")),
    ("fig5c", include_str!("../presets/fig5c.toml")),
    ("bands", include_str!("../presets/bands.toml")),
    ("calibrate", include_str!("../presets/calibrate.toml")),
    ("lattice_b", include_str!("../presets/lattice_b.toml")),
    ("dirac_b", include_str!("../presets/dirac_b.toml")),
];

pub fn text(name: &str) -> Result<&'static str, CliError> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| {
            let known: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
            CliError::Usage(format!("unknown preset `{name}` (known: {})", known.join(", ")))
        })
}

pub fn document(name: &str) -> Result<Document, CliError> {
    Document::parse(text(name)?, &format!("preset {name}"))
}

/// First comment line of the preset.
pub fn description(text: &str) -> &str {
    text.lines()
        .next()
        .and_then(|l| l.strip_prefix('#'))
        .map_or("", str::trim)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        for (name, _) in PRESETS {
            document(name).unwrap().scenario().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }
}
