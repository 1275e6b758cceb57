//! Domain types and the key-value configuration format.
//!
//! Every length is stored in units of the emission wavelength `λ₀` and every
//! rate in units of the free-space decay rate `γ₀`, so `k₀ = 2π` throughout
//! the crate. Lengths given in nanometres are converted with the photon
//! energy `ħω₀`.
//!
//! # Configuration grammar
//!
//! ```text
//! document := line*
//! line     := ws* (comment | entry)? ws* NEWLINE
//! comment  := '#' any*
//! entry    := key ws* '=' ws* value
//! key      := section '.' name          (section ∈ geometry, dimer, drive, grid)
//! value    := number [unit] | complex | word | vector
//! unit     := 'nm' | 'lambda0' | 'deg' | 'rad'
//! complex  := number | number ('+'|'-') number 'i' | number 'i'
//! vector   := number ',' number ',' number
//! ```
//!
//! Recognised keys (defaults in brackets):
//!
//! | key | meaning |
//! |-----|---------|
//! | `geometry.kind` | `free`, `mirror`, `substrate` or `sphere` |
//! | `geometry.epsilon` | relative permittivity (substrate, sphere) |
//! | `geometry.radius` | sphere radius |
//! | `geometry.offset` / `geometry.gap` | emitter distance from the sphere centre / surface |
//! | `dimer.z1`, `dimer.z2` | axial emitter heights (not used for spheres) |
//! | `dimer.orientation` | dipole direction [0,0,1] |
//! | `dimer.gamma0` | free-space decay rate [1] |
//! | `dimer.photon_energy_ev` | `ħω₀`, needed when lengths are in nm |
//! | `drive.detuning` | `Δ` in `γ₀` units, or a multiple of `g12` such as `g12`, `-g12` [0] |
//! | `drive.omega1`, `drive.omega2` | complex pump rates [0] |
//! | `grid.theta_min`, `grid.theta_max` | angular range [0, π/2 for substrates, π otherwise] |
//! | `grid.n` | points per axis [721] |

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// `ħc` in eV·nm.
pub const HBAR_C_EV_NM: f64 = 197.326_980_4;

/// Free-space wavenumber in units of `1/λ₀`.
pub const K0: f64 = 2.0 * PI;

/// Emission wavelength in nm for a photon energy in eV.
pub fn wavelength_nm(photon_energy_ev: f64) -> f64 {
    2.0 * PI * HBAR_C_EV_NM / photon_energy_ev
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{key}: {message}")]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError { key: key.into(), message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimerConfig {
    pub z1: f64,
    pub z2: f64,
    pub orientation: [f64; 3],
    pub gamma0: f64,
    /// `ħω₀` in eV, if the configuration fixes a physical wavelength.
    pub photon_energy_ev: Option<f64>,
}

impl DimerConfig {
    /// Vertical dipoles at heights `z1`, `z2` (in `λ₀`).
    pub fn axial(z1: f64, z2: f64) -> Self {
        DimerConfig { z1, z2, orientation: [0.0, 0.0, 1.0], gamma0: 1.0, photon_energy_ev: None }
    }

    pub fn with_orientation(mut self, orientation: [f64; 3]) -> Self {
        self.orientation = orientation;
        self
    }

    pub fn separation(&self) -> f64 {
        self.z2 - self.z1
    }

    pub fn is_vertical(&self) -> bool {
        self.orientation[0] == 0.0 && self.orientation[1] == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Environment {
    FreeSpace,
    PerfectMirror,
    Substrate { epsilon: Complex64 },
    /// Sphere of `radius` at the origin; the emitters sit at `±offset` on the z axis.
    Sphere { epsilon: Complex64, radius: f64, offset: f64 },
}

impl Environment {
    pub fn name(&self) -> &'static str {
        match self {
            Environment::FreeSpace => "free",
            Environment::PerfectMirror => "mirror",
            Environment::Substrate { .. } => "substrate",
            Environment::Sphere { .. } => "sphere",
        }
    }

    pub fn is_planar(&self) -> bool {
        matches!(self, Environment::PerfectMirror | Environment::Substrate { .. })
    }

    /// Default angular range: the upper half-space for planar substrates.
    pub fn default_theta_max(&self) -> f64 {
        if self.is_planar() {
            FRAC_PI_2
        } else {
            PI
        }
    }
}

/// Detuning either fixed or tied to the coherent coupling of the dimer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Detuning {
    Fixed(f64),
    /// `Δ = factor · g12`.
    CouplingMultiple(f64),
}

impl Detuning {
    pub fn resolve(&self, g12: f64) -> f64 {
        match *self {
            Detuning::Fixed(d) => d,
            Detuning::CouplingMultiple(f) => f * g12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveConfig {
    pub detuning: Detuning,
    pub omega: [Complex64; 2],
}

impl DriveConfig {
    pub fn new(detuning: f64, omega1: Complex64, omega2: Complex64) -> Self {
        DriveConfig { detuning: Detuning::Fixed(detuning), omega: [omega1, omega2] }
    }

    pub fn undriven() -> Self {
        Self::new(0.0, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub theta_min: f64,
    pub theta_max: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn new(theta_min: f64, theta_max: f64, n: usize) -> Self {
        GridSpec { theta_min, theta_max, n }
    }

    pub fn default_for(env: &Environment) -> Self {
        GridSpec { theta_min: 0.0, theta_max: env.default_theta_max(), n: 721 }
    }

    pub fn step(&self) -> f64 {
        (self.theta_max - self.theta_min) / (self.n - 1) as f64
    }

    /// Grid node `i`. Computed from the fraction `i/(n-1)` so that grids whose
    /// sizes divide each other share nodes bit-for-bit.
    pub fn angle(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.theta_max
        } else {
            self.theta_min + (self.theta_max - self.theta_min) * (i as f64 / (self.n - 1) as f64)
        }
    }

    /// Index of the node nearest to `theta`.
    pub fn nearest(&self, theta: f64) -> usize {
        let f = ((theta - self.theta_min) / self.step()).round();
        f.clamp(0.0, (self.n - 1) as f64) as usize
    }

    pub fn angles(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.angle(i)).collect()
    }

    pub fn validate(&self, env: &Environment) -> Result<(), ConfigError> {
        if self.n < 2 {
            return Err(ConfigError::new("grid.n", "need at least two points"));
        }
        if !(0.0 <= self.theta_min && self.theta_min < self.theta_max && self.theta_max <= PI) {
            return Err(ConfigError::new("grid.theta_max", "require 0 <= theta_min < theta_max <= pi"));
        }
        if env.is_planar() && self.theta_max > FRAC_PI_2 {
            return Err(ConfigError::new(
                "grid.theta_max",
                "planar substrates only admit detection in the upper half-space (theta <= pi/2)",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub dimer: DimerConfig,
    pub environment: Environment,
    pub drive: DriveConfig,
    pub grid: GridSpec,
}

impl Config {
    pub fn validate(&self) -> Result<(), ConfigError> {
        validate_dimer(&self.dimer, &self.environment)?;
        validate_environment(&self.environment)?;
        validate_drive(&self.drive)?;
        self.grid.validate(&self.environment)
    }

    /// SHA-256 of the serialised configuration, hex encoded.
    pub fn digest(&self) -> String {
        hex_digest(self.to_string().as_bytes())
    }
}

pub(crate) fn hex_digest(bytes: &[u8]) -> String {
    let hash = Sha256::digest(bytes);
    hash.iter().map(|b| format!("{b:02x}")).collect()
}

fn validate_dimer(d: &DimerConfig, env: &Environment) -> Result<(), ConfigError> {
    let norm = d.orientation.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(ConfigError::new("dimer.orientation", format!("must be a unit vector (norm {norm})")));
    }
    if !(d.gamma0 > 0.0 && d.gamma0.is_finite()) {
        return Err(ConfigError::new("dimer.gamma0", "must be positive"));
    }
    if !d.z1.is_finite() || !d.z2.is_finite() {
        return Err(ConfigError::new("dimer.z1", "positions must be finite"));
    }
    if env.is_planar() && !(d.z2 > d.z1 && d.z1 >= 0.0) {
        return Err(ConfigError::new("dimer.z2", "substrate geometry requires z2 > z1 >= 0"));
    }
    if let Some(e) = d.photon_energy_ev {
        if !(e > 0.0 && e.is_finite()) {
            return Err(ConfigError::new("dimer.photon_energy_ev", "must be positive"));
        }
    }
    Ok(())
}

fn validate_environment(env: &Environment) -> Result<(), ConfigError> {
    match *env {
        Environment::Substrate { epsilon } => {
            if epsilon.im < 0.0 {
                return Err(ConfigError::new("geometry.epsilon", "Im(epsilon) must be >= 0"));
            }
        }
        Environment::Sphere { epsilon, radius, offset } => {
            if epsilon.im < 0.0 {
                return Err(ConfigError::new("geometry.epsilon", "Im(epsilon) must be >= 0"));
            }
            if !(radius > 0.0) {
                return Err(ConfigError::new("geometry.radius", "must be positive"));
            }
            if !(offset > radius) {
                return Err(ConfigError::new("geometry.offset", "emitter inside sphere"));
            }
        }
        Environment::FreeSpace | Environment::PerfectMirror => {}
    }
    Ok(())
}

fn validate_drive(d: &DriveConfig) -> Result<(), ConfigError> {
    let finite = |c: Complex64| c.re.is_finite() && c.im.is_finite();
    if !finite(d.omega[0]) {
        return Err(ConfigError::new("drive.omega1", "must be finite"));
    }
    if !finite(d.omega[1]) {
        return Err(ConfigError::new("drive.omega2", "must be finite"));
    }
    let det = match d.detuning {
        Detuning::Fixed(v) | Detuning::CouplingMultiple(v) => v,
    };
    if !det.is_finite() {
        return Err(ConfigError::new("drive.detuning", "must be finite"));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Parsing

pub fn parse_number(key: &str, text: &str) -> Result<f64, ConfigError> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| ConfigError::new(key, format!("malformed number {text:?}")))
}

/// Parses `a`, `bi`, `a+bi` or `a-bi`.
pub fn parse_complex(key: &str, text: &str) -> Result<Complex64, ConfigError> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || ConfigError::new(key, format!("malformed complex number {text:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i') else {
        return Ok(Complex64::new(parse_number(key, &t)?, 0.0));
    };
    // Split at the last sign that is not the leading one and not part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    match split {
        Some(i) => {
            let re = body[..i].parse::<f64>().map_err(|_| bad())?;
            let im_text = &body[i..];
            let im = match im_text {
                "+" => 1.0,
                "-" => -1.0,
                s => s.parse::<f64>().map_err(|_| bad())?,
            };
            Ok(Complex64::new(re, im))
        }
        None => {
            let im = match body {
                "" | "+" => 1.0,
                "-" => -1.0,
                s => s.parse::<f64>().map_err(|_| bad())?,
            };
            Ok(Complex64::new(0.0, im))
        }
    }
}

pub fn format_complex(c: Complex64) -> String {
    if c.im < 0.0 || (c.im == 0.0 && c.im.is_sign_negative()) {
        format!("{}-{}i", c.re, -c.im)
    } else {
        format!("{}+{}i", c.re, c.im)
    }
}

enum Length {
    Wavelengths(f64),
    Nanometres(f64),
}

fn parse_length(key: &str, text: &str) -> Result<Length, ConfigError> {
    let t = text.trim();
    if let Some(v) = t.strip_suffix("nm") {
        Ok(Length::Nanometres(parse_number(key, v)?))
    } else if let Some(v) = t.strip_suffix("lambda0") {
        Ok(Length::Wavelengths(parse_number(key, v)?))
    } else {
        Ok(Length::Wavelengths(parse_number(key, t)?))
    }
}

fn parse_angle(key: &str, text: &str) -> Result<f64, ConfigError> {
    let t = text.trim();
    if let Some(v) = t.strip_suffix("deg") {
        Ok(parse_number(key, v)?.to_radians())
    } else if let Some(v) = t.strip_suffix("rad") {
        parse_number(key, v)
    } else if t == "pi" {
        Ok(PI)
    } else if t == "pi/2" {
        Ok(FRAC_PI_2)
    } else {
        parse_number(key, t)
    }
}

fn parse_detuning(key: &str, text: &str) -> Result<Detuning, ConfigError> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some(factor) = t.strip_suffix("g12") {
        let f = match factor {
            "" | "+" => 1.0,
            "-" => -1.0,
            s => parse_number(key, s.trim_end_matches('*'))?,
        };
        Ok(Detuning::CouplingMultiple(f))
    } else {
        Ok(Detuning::Fixed(parse_number(key, &t)?))
    }
}

const KNOWN_KEYS: &[&str] = &[
    "geometry.kind",
    "geometry.epsilon",
    "geometry.radius",
    "geometry.offset",
    "geometry.gap",
    "dimer.z1",
    "dimer.z2",
    "dimer.orientation",
    "dimer.gamma0",
    "dimer.photon_energy_ev",
    "drive.detuning",
    "drive.omega1",
    "drive.omega2",
    "grid.theta_min",
    "grid.theta_max",
    "grid.n",
];

/// Splits a document into `key -> value` entries, rejecting unknown and duplicate keys.
pub fn parse_entries(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::new(format!("line {}", lineno + 1), "expected `key = value`"))?;
        let key = k.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(ConfigError::new(key, "unknown key"));
        }
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(ConfigError::new(key, "duplicate key"));
        }
    }
    Ok(map)
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<Config, ConfigError> {
    let entries = parse_entries(text)?;
    config_from_entries(&entries)
}

/// Builds a configuration from already-split entries (used for CLI overrides).
pub fn config_from_entries(entries: &BTreeMap<String, String>) -> Result<Config, ConfigError> {
    let get = |k: &str| entries.get(k).map(String::as_str);
    let require = |k: &str| get(k).ok_or_else(|| ConfigError::new(k, "missing key"));

    let photon_energy_ev = get("dimer.photon_energy_ev")
        .map(|v| parse_number("dimer.photon_energy_ev", v))
        .transpose()?;
    let to_lambda = |key: &str, len: Length| -> Result<f64, ConfigError> {
        match len {
            Length::Wavelengths(v) => Ok(v),
            Length::Nanometres(v) => {
                let e = photon_energy_ev.ok_or_else(|| {
                    ConfigError::new(key, "lengths in nm require dimer.photon_energy_ev")
                })?;
                Ok(v / wavelength_nm(e))
            }
        }
    };
    let length = |key: &str| -> Result<f64, ConfigError> { to_lambda(key, parse_length(key, require(key)?)?) };

    let kind = require("geometry.kind")?;
    let environment = match kind {
        "free" => Environment::FreeSpace,
        "mirror" => Environment::PerfectMirror,
        "substrate" => Environment::Substrate {
            epsilon: parse_complex("geometry.epsilon", require("geometry.epsilon")?)?,
        },
        "sphere" => {
            let epsilon = parse_complex("geometry.epsilon", require("geometry.epsilon")?)?;
            let radius = length("geometry.radius")?;
            let offset = match (get("geometry.offset"), get("geometry.gap")) {
                (Some(_), Some(_)) => {
                    return Err(ConfigError::new("geometry.gap", "give either offset or gap, not both"))
                }
                (Some(_), None) => length("geometry.offset")?,
                (None, Some(_)) => radius + length("geometry.gap")?,
                (None, None) => return Err(ConfigError::new("geometry.offset", "missing key")),
            };
            Environment::Sphere { epsilon, radius, offset }
        }
        other => {
            return Err(ConfigError::new("geometry.kind", format!("unknown geometry {other:?}")));
        }
    };

    let orientation = match get("dimer.orientation") {
        None => [0.0, 0.0, 1.0],
        Some(v) => {
            let parts: Vec<&str> = v.split(',').collect();
            if parts.len() != 3 {
                return Err(ConfigError::new("dimer.orientation", "expected three components"));
            }
            let mut o = [0.0; 3];
            for (slot, p) in o.iter_mut().zip(parts) {
                *slot = parse_number("dimer.orientation", p)?;
            }
            o
        }
    };
    let gamma0 = get("dimer.gamma0").map(|v| parse_number("dimer.gamma0", v)).transpose()?.unwrap_or(1.0);
    let (z1, z2) = match environment {
        Environment::Sphere { offset, .. } => {
            if get("dimer.z1").is_some() || get("dimer.z2").is_some() {
                return Err(ConfigError::new("dimer.z1", "sphere geometry places emitters at +/-offset"));
            }
            (offset, -offset)
        }
        _ => (length("dimer.z1")?, length("dimer.z2")?),
    };
    let dimer = DimerConfig { z1, z2, orientation, gamma0, photon_energy_ev };

    let detuning = get("drive.detuning")
        .map(|v| parse_detuning("drive.detuning", v))
        .transpose()?
        .unwrap_or(Detuning::Fixed(0.0));
    let omega = |k: &str| -> Result<Complex64, ConfigError> {
        get(k).map(|v| parse_complex(k, v)).transpose().map(|o| o.unwrap_or_default())
    };
    let drive = DriveConfig { detuning, omega: [omega("drive.omega1")?, omega("drive.omega2")?] };

    let mut grid = GridSpec::default_for(&environment);
    if let Some(v) = get("grid.theta_min") {
        grid.theta_min = parse_angle("grid.theta_min", v)?;
    }
    if let Some(v) = get("grid.theta_max") {
        grid.theta_max = parse_angle("grid.theta_max", v)?;
    }
    if let Some(v) = get("grid.n") {
        grid.n = v
            .trim()
            .parse()
            .map_err(|_| ConfigError::new("grid.n", format!("malformed integer {v:?}")))?;
    }

    let config = Config { dimer, environment, drive, grid };
    config.validate()?;
    Ok(config)
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "geometry.kind = {}", self.environment.name())?;
        match self.environment {
            Environment::Substrate { epsilon } => {
                writeln!(f, "geometry.epsilon = {}", format_complex(epsilon))?;
            }
            Environment::Sphere { epsilon, radius, offset } => {
                writeln!(f, "geometry.epsilon = {}", format_complex(epsilon))?;
                writeln!(f, "geometry.radius = {radius}")?;
                writeln!(f, "geometry.offset = {offset}")?;
            }
            _ => {}
        }
        if !matches!(self.environment, Environment::Sphere { .. }) {
            writeln!(f, "dimer.z1 = {}", self.dimer.z1)?;
            writeln!(f, "dimer.z2 = {}", self.dimer.z2)?;
        }
        let [x, y, z] = self.dimer.orientation;
        writeln!(f, "dimer.orientation = {x}, {y}, {z}")?;
        writeln!(f, "dimer.gamma0 = {}", self.dimer.gamma0)?;
        if let Some(e) = self.dimer.photon_energy_ev {
            writeln!(f, "dimer.photon_energy_ev = {e}")?;
        }
        match self.drive.detuning {
            Detuning::Fixed(d) => writeln!(f, "drive.detuning = {d}")?,
            Detuning::CouplingMultiple(m) => writeln!(f, "drive.detuning = {m}*g12")?,
        }
        writeln!(f, "drive.omega1 = {}", format_complex(self.drive.omega[0]))?;
        writeln!(f, "drive.omega2 = {}", format_complex(self.drive.omega[1]))?;
        writeln!(f, "grid.theta_min = {}", self.grid.theta_min)?;
        writeln!(f, "grid.theta_max = {}", self.grid.theta_max)?;
        writeln!(f, "grid.n = {}", self.grid.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn mirror_configuration() {
        let cfg = parse_config("geometry.kind = mirror\ndimer.z1 = 0.6\ndimer.z2 = 0.8\n").unwrap();
        assert_eq!(cfg.environment, Environment::PerfectMirror);
        assert_relative_eq!(cfg.dimer.separation(), 0.2, epsilon = 1e-15);
        assert_eq!(cfg.grid.theta_max, FRAC_PI_2);
    }

    #[test]
    fn sphere_in_nanometres() {
        let cfg = parse_config(
            "geometry.kind = sphere\n\
             geometry.epsilon = 2.13\n\
             geometry.radius = 200 nm\n\
             geometry.gap = 100 nm\n\
             dimer.photon_energy_ev = 3\n",
        )
        .unwrap();
        // Independent conversion: λ₀ = hc/E with hc = 1239.84198 eV·nm.
        let lambda = 1_239.841_984 / 3.0;
        assert_relative_eq!(lambda, 413.28, epsilon = 0.01);
        let Environment::Sphere { radius, offset, .. } = cfg.environment else { panic!() };
        assert_relative_eq!(offset, 300.0 / lambda, max_relative = 1e-8);
        assert_relative_eq!(radius, 200.0 / lambda, max_relative = 1e-8);
        assert_relative_eq!(offset, 0.7259, epsilon = 1e-4);
        assert_relative_eq!(radius, 0.4839, epsilon = 1e-4);
        assert_eq!(cfg.dimer.z1, offset);
        assert_eq!(cfg.dimer.z2, -offset);
        assert_eq!(cfg.grid.theta_max, PI);
    }

    #[test]
    fn emitter_inside_sphere_is_rejected() {
        let err = parse_config(
            "geometry.kind = sphere\ngeometry.epsilon = 2\ngeometry.radius = 0.5\ngeometry.offset = 0.4\n",
        )
        .unwrap_err();
        assert_eq!(err.key, "geometry.offset");
        assert!(err.message.contains("emitter inside sphere"));
    }

    #[test]
    fn errors_carry_key_path() {
        let e = parse_config("geometry.kind = mirror\ndimer.z1 = 0.6\n").unwrap_err();
        assert_eq!(e.key, "dimer.z2");
        let e = parse_config("geometry.kind = mirror\ndimer.z1 = 0.6x\ndimer.z2 = 1\n").unwrap_err();
        assert_eq!(e.key, "dimer.z1");
        let e = parse_config("geometry.kind = substrate\ngeometry.epsilon = 2+\ndimer.z1 = 0.1\ndimer.z2 = 1\n")
            .unwrap_err();
        assert_eq!(e.key, "geometry.epsilon");
        let e = parse_config("geometry.colour = red\n").unwrap_err();
        assert_eq!(e.key, "geometry.colour");
        let e = parse_config("geometry.kind = mirror\ndimer.z1 = 0.9\ndimer.z2 = 0.8\n").unwrap_err();
        assert_eq!(e.key, "dimer.z2");
        let e = parse_config("geometry.kind = mirror\ndimer.z1 = 0.1\ndimer.z2 = 0.8\ngrid.theta_max = pi\n")
            .unwrap_err();
        assert_eq!(e.key, "grid.theta_max");
    }

    #[test]
    fn complex_forms() {
        let p = |s| parse_complex("k", s).unwrap();
        assert_eq!(p("2.13"), Complex64::new(2.13, 0.0));
        assert_eq!(p("-5+0.1i"), Complex64::new(-5.0, 0.1));
        assert_eq!(p("-3 + 0.01i"), Complex64::new(-3.0, 0.01));
        assert_eq!(p("1e-3-2e+2i"), Complex64::new(1e-3, -200.0));
        assert_eq!(p("-i"), Complex64::new(0.0, -1.0));
        assert_eq!(p("0.5i"), Complex64::new(0.0, 0.5));
        assert!(parse_complex("k", "abc").is_err());
    }

    #[test]
    fn detuning_tied_to_coupling() {
        let cfg = parse_config(
            "geometry.kind = mirror\ndimer.z1 = 0.6\ndimer.z2 = 0.8\ndrive.detuning = -g12\ndrive.omega1 = 0.1\ndrive.omega2 = -0.1\n",
        )
        .unwrap();
        assert_eq!(cfg.drive.detuning, Detuning::CouplingMultiple(-1.0));
        assert_eq!(cfg.drive.detuning.resolve(0.3), -0.3);
    }

    fn arb_config() -> impl Strategy<Value = Config> {
        let env = prop_oneof![
            Just(Environment::FreeSpace),
            Just(Environment::PerfectMirror),
            (-20.0f64..20.0, 0.0f64..5.0)
                .prop_map(|(re, im)| Environment::Substrate { epsilon: Complex64::new(re, im) }),
            (-20.0f64..20.0, 0.0f64..5.0, 0.05f64..1.0, 0.01f64..1.0).prop_map(|(re, im, r, g)| {
                Environment::Sphere { epsilon: Complex64::new(re, im), radius: r, offset: r + g }
            }),
        ];
        (env, 0.0f64..2.0, 0.001f64..2.0, -3.0f64..3.0, -2.0f64..2.0, -2.0f64..2.0, 2usize..1000)
            .prop_map(|(environment, z1, dz, det, o1, o2, n)| {
                let (a, b) = match environment {
                    Environment::Sphere { offset, .. } => (offset, -offset),
                    _ => (z1, z1 + dz),
                };
                Config {
                    dimer: DimerConfig {
                        z1: a,
                        z2: b,
                        orientation: [0.6, 0.0, 0.8],
                        gamma0: 1.0,
                        photon_energy_ev: Some(3.0),
                    },
                    environment,
                    drive: DriveConfig {
                        detuning: Detuning::Fixed(det),
                        omega: [Complex64::new(o1, o2), Complex64::new(o2, -o1)],
                    },
                    grid: GridSpec { n, ..GridSpec::default_for(&environment) },
                }
            })
    }

    proptest! {
        #[test]
        fn serialisation_round_trips(cfg in arb_config()) {
            let text = cfg.to_string();
            let back = parse_config(&text).unwrap();
            prop_assert_eq!(back, cfg);
            prop_assert_eq!(back.to_string(), text);
        }
    }
}
