//! Caption parameter sets shipped with the binary.

use std::collections::BTreeMap;

use antibunch::model::{config_from_entries, parse_entries, Config, ConfigError};

/// `(name, document)` for every built-in configuration.
pub const PRESETS: &[(&str, &str)] = &[
    ("fig1b/z12-0.25", include_str!("../presets/fig1b/z12-0.25.conf")),
    ("fig1b/z12-0.5", include_str!("../presets/fig1b/z12-0.5.conf")),
    ("fig1b/z12-1.0", include_str!("../presets/fig1b/z12-1.0.conf")),
    ("fig1b/z12-1.5", include_str!("../presets/fig1b/z12-1.5.conf")),
    ("fig2/antisymmetric", include_str!("../presets/fig2/antisymmetric.conf")),
    ("fig2/symmetric", include_str!("../presets/fig2/symmetric.conf")),
    ("fig3a/z2-0.8", include_str!("../presets/fig3a/z2-0.8.conf")),
    ("fig3a/z2-1.7", include_str!("../presets/fig3a/z2-1.7.conf")),
    ("fig3b/dielectric", include_str!("../presets/fig3b/dielectric.conf")),
    ("fig3b/metal-a", include_str!("../presets/fig3b/metal-a.conf")),
    ("fig3b/metal-b", include_str!("../presets/fig3b/metal-b.conf")),
    ("fig4/dielectric", include_str!("../presets/fig4/dielectric.conf")),
    ("fig4/metal-a", include_str!("../presets/fig4/metal-a.conf")),
    ("fig4/metal-b", include_str!("../presets/fig4/metal-b.conf")),
    ("sm2/a-dielectric", include_str!("../presets/sm2/a-dielectric.conf")),
    ("sm2/a-metal-a", include_str!("../presets/sm2/a-metal-a.conf")),
    ("sm2/a-metal-b", include_str!("../presets/sm2/a-metal-b.conf")),
    ("sm2/b-dielectric", include_str!("../presets/sm2/b-dielectric.conf")),
    ("sm2/b-metal-a", include_str!("../presets/sm2/b-metal-a.conf")),
    ("sm2/b-metal-b", include_str!("../presets/sm2/b-metal-b.conf")),
    ("sm2/c-dielectric", include_str!("../presets/sm2/c-dielectric.conf")),
    ("sm2/c-metal-a", include_str!("../presets/sm2/c-metal-a.conf")),
    ("sm2/c-metal-b", include_str!("../presets/sm2/c-metal-b.conf")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Knobs shared by every figure pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub grid: Option<usize>,
    pub threshold: f64,
    pub relative: bool,
    pub lmax: usize,
    /// Entries from a user configuration file, applied on top of each preset.
    pub overrides: BTreeMap<String, String>,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            grid: None,
            threshold: 1e-2,
            relative: false,
            lmax: antibunch::greens::DEFAULT_L_MAX,
            overrides: BTreeMap::new(),
        }
    }
}

impl Settings {
    /// Resolves preset `name` with the user overrides and grid size applied.
    pub fn load(&self, name: &str) -> Result<Config, ConfigError> {
        let text = preset(name).ok_or_else(|| ConfigError::new("preset", format!("unknown preset {name:?}")))?;
        let mut entries = parse_entries(text)?;
        for (k, v) in &self.overrides {
            if k == "geometry.offset" {
                entries.remove("geometry.gap");
            }
            if k == "geometry.gap" {
                entries.remove("geometry.offset");
            }
            entries.insert(k.clone(), v.clone());
        }
        if let Some(n) = self.grid {
            entries.insert("grid.n".into(), n.to_string());
        }
        config_from_entries(&entries)
    }
}
