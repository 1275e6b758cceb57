//! Dense `(θ, θ′)` maps and their on-disk form.
//!
//! A map is written as a CSV matrix (rows `θ`, columns `θ′`, angles in
//! radians to nine decimals in the header row and first column) next to a
//! JSON sidecar holding the grid, the geometry and SHA-256 digests.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlation::{g2_from_fields, intensity_from_fields, two_photon_from, Scene, MASK_FLOOR};
use crate::dynamics::CorrelatorSet;
use crate::error::{Error, Result};
use crate::model::{format_complex, hex_digest, DimerConfig, Environment, GridSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Payload {
    /// Complex `Ψ(θ, θ′)`.
    Psi,
    /// `|Ψ(θ, θ′)|²`.
    Psi2,
    /// Normalized correlation, `NaN` where masked.
    G2,
    /// Product of the marginal intensities `I(θ) I(θ′)`.
    Intensity,
}

impl Payload {
    pub fn name(&self) -> &'static str {
        match self {
            Payload::Psi => "psi",
            Payload::Psi2 => "psi2",
            Payload::G2 => "g2",
            Payload::Intensity => "intensity",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MapValues {
    Complex(Vec<Complex64>),
    Real(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub environment: Environment,
    pub dimer: DimerConfig,
    pub environment_sha256: String,
    pub dimer_sha256: String,
}

impl Provenance {
    pub fn new(environment: Environment, dimer: DimerConfig) -> Self {
        let env_json = serde_json::to_string(&environment).expect("environment serializes");
        let dimer_json = serde_json::to_string(&dimer).expect("dimer serializes");
        Provenance {
            environment,
            dimer,
            environment_sha256: hex_digest(env_json.as_bytes()),
            dimer_sha256: hex_digest(dimer_json.as_bytes()),
        }
    }
}

/// Values on the square grid `grid × grid`, row-major with `θ` as the row index.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularMap {
    pub grid: GridSpec,
    pub payload: Payload,
    pub values: MapValues,
    pub provenance: Provenance,
}

impl AngularMap {
    pub fn n(&self) -> usize {
        self.grid.n
    }

    pub fn real(&self, i: usize, j: usize) -> f64 {
        match &self.values {
            MapValues::Real(v) => v[i * self.grid.n + j],
            MapValues::Complex(v) => v[i * self.grid.n + j].norm_sqr(),
        }
    }

    pub fn complex(&self, i: usize, j: usize) -> Option<Complex64> {
        match &self.values {
            MapValues::Complex(v) => Some(v[i * self.grid.n + j]),
            MapValues::Real(_) => None,
        }
    }

    /// Real values, taking `|z|²` of complex entries.
    pub fn real_values(&self) -> Vec<f64> {
        match &self.values {
            MapValues::Real(v) => v.clone(),
            MapValues::Complex(v) => v.iter().map(|z| z.norm_sqr()).collect(),
        }
    }

    /// Largest `|m(i,j) - m(j,i)|`, ignoring masked entries.
    pub fn asymmetry(&self) -> f64 {
        let n = self.grid.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..i {
                let d = match &self.values {
                    MapValues::Complex(v) => (v[i * n + j] - v[j * n + i]).norm(),
                    MapValues::Real(v) => {
                        let (a, b) = (v[i * n + j], v[j * n + i]);
                        if a.is_nan() && b.is_nan() {
                            0.0
                        } else {
                            (a - b).abs()
                        }
                    }
                };
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn to_csv(&self) -> String {
        let angles = self.grid.angles();
        let n = self.grid.n;
        let mut out = String::with_capacity(n * n * 20);
        out.push_str("theta\\theta_prime");
        for a in &angles {
            let _ = write!(out, ",{a:.9}");
        }
        out.push('\n');
        for (i, a) in angles.iter().enumerate() {
            let _ = write!(out, "{a:.9}");
            for j in 0..n {
                match &self.values {
                    MapValues::Complex(v) => {
                        let _ = write!(out, ",{}", format_complex(v[i * n + j]));
                    }
                    MapValues::Real(v) => {
                        let _ = write!(out, ",{}", v[i * n + j]);
                    }
                }
            }
            out.push('\n');
        }
        out
    }

    /// JSON sidecar describing `csv`, the text returned by [`AngularMap::to_csv`].
    pub fn sidecar_json(&self, csv: &str) -> String {
        let doc = serde_json::json!({
            "payload": self.payload,
            "grid": self.grid,
            "layout": "rows theta, columns theta_prime, radians",
            "provenance": self.provenance,
            "data_sha256": hex_digest(csv.as_bytes()),
        });
        serde_json::to_string_pretty(&doc).expect("sidecar serializes")
    }
}

/// Evaluates `payload` on every grid pair. Rows are computed in parallel;
/// each entry depends only on its own angles, so the result is independent
/// of the thread count.
pub fn map_sweep(
    scene: &Scene,
    grid: &GridSpec,
    payload: Payload,
    corr: Option<&CorrelatorSet>,
) -> Result<AngularMap> {
    grid.validate(&scene.environment)?;
    let profile = scene.profile(grid)?;
    let n = grid.n;
    let need_scalar = || {
        profile.psi.as_ref().ok_or_else(|| {
            Error::Unsupported("scalar Ψ maps need polarization-independent path amplitudes".into())
        })
    };
    let need_corr = || corr.ok_or_else(|| Error::Domain(format!("{} map needs correlators", payload.name())));
    let values = match payload {
        Payload::Psi | Payload::Psi2 => {
            let psi = need_scalar()?;
            let rows: Vec<Vec<Complex64>> = (0..n)
                .into_par_iter()
                .map(|i| (0..n).map(|j| two_photon_from(&psi[i], &psi[j])).collect())
                .collect();
            let flat = rows.into_iter().flatten();
            if payload == Payload::Psi {
                MapValues::Complex(flat.collect())
            } else {
                MapValues::Real(flat.map(|z| z.norm_sqr()).collect())
            }
        }
        Payload::G2 => {
            let corr = need_corr()?;
            let intens = profile.intensities(corr);
            let floor = MASK_FLOOR * intens.iter().cloned().fold(0.0, f64::max);
            let f = &profile.fields;
            let rows: Vec<Vec<f64>> = (0..n)
                .into_par_iter()
                .map(|i| (0..n).map(|j| g2_from_fields(&f[i], &f[j], corr, floor).unwrap_or(f64::NAN)).collect())
                .collect();
            MapValues::Real(rows.into_iter().flatten().collect())
        }
        Payload::Intensity => {
            let corr = need_corr()?;
            let intens: Vec<f64> = profile.fields.iter().map(|f| intensity_from_fields(f, corr)).collect();
            MapValues::Real((0..n * n).map(|k| intens[k / n] * intens[k % n]).collect())
        }
    };
    Ok(AngularMap {
        grid: *grid,
        payload,
        values,
        provenance: Provenance::new(scene.environment, scene.dimer),
    })
}

/// Marginal intensity `I(θ)` along the grid, in single-emitter units.
pub fn intensity_profile(scene: &Scene, grid: &GridSpec, corr: &CorrelatorSet) -> Result<Vec<f64>> {
    Ok(scene.profile(grid)?.intensities(corr))
}
