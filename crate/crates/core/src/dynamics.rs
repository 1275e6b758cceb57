//! Lindblad dynamics of the driven dimer in the laser frame.
//!
//! Density matrices live in the product basis `|gg⟩, |ge⟩, |eg⟩, |ee⟩`
//! (second slot is emitter 2) and are vectorized row-major, so entry
//! `ρ_ab` sits at index `4a + b`.

use std::fmt::Write as _;

use nalgebra::{Matrix4, SMatrix, SVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::couplings::CouplingSet;
use crate::error::{Error, Result};
use crate::model::DriveConfig;

pub type Operator = Matrix4<Complex64>;
pub type Superoperator = SMatrix<Complex64, 16, 16>;
pub type Vectorized = SVector<Complex64, 16>;

pub const BASIS_LABELS: [&str; 4] = ["gg", "ge", "eg", "ee"];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Lowering operator of emitter `i` (0 or 1).
pub fn sigma(i: usize) -> Operator {
    let mut m = Operator::zeros();
    match i {
        0 => {
            m[(0, 2)] = ONE;
            m[(1, 3)] = ONE;
        }
        1 => {
            m[(0, 1)] = ONE;
            m[(2, 3)] = ONE;
        }
        _ => panic!("emitter index {i} out of range"),
    }
    m
}

/// Superoperator of `ρ ↦ X ρ Y`.
fn sandwich(x: &Operator, y: &Operator) -> Superoperator {
    let mut s = Superoperator::zeros();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    s[(4 * a + b, 4 * c + d)] = x[(a, c)] * y[(d, b)];
                }
            }
        }
    }
    s
}

pub fn vectorize(rho: &Operator) -> Vectorized {
    Vectorized::from_fn(|k, _| rho[(k / 4, k % 4)])
}

pub fn unvectorize(v: &Vectorized) -> Operator {
    Operator::from_fn(|a, b| v[4 * a + b])
}

/// Hamiltonian `-Δ Σσ†σ + g₁₂(σ₁†σ₂ + σ₂†σ₁) + Σ(Ω_i σ_i + Ω_i* σ_i†)`.
pub fn hamiltonian(couplings: &CouplingSet, drive: &DriveConfig) -> Operator {
    let s = [sigma(0), sigma(1)];
    let d = [s[0].adjoint(), s[1].adjoint()];
    let delta = drive.detuning.resolve(couplings.g12);
    let mut h = (d[0] * s[0] + d[1] * s[1]) * Complex64::from(-delta);
    h += (d[0] * s[1] + d[1] * s[0]) * Complex64::from(couplings.g12);
    for i in 0..2 {
        h += s[i] * drive.omega[i] + d[i] * drive.omega[i].conj();
    }
    h
}

/// Generator `L` with `dvec(ρ)/dt = L vec(ρ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub matrix: Superoperator,
}

impl Generator {
    pub fn apply(&self, rho: &Operator) -> Operator {
        unvectorize(&(self.matrix * vectorize(rho)))
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..16).map(|r| self.matrix.row(r).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// Number of singular values below `tol` times the largest one.
    pub fn kernel_dimension(&self, tol: f64) -> usize {
        let sv = self.matrix.singular_values();
        let top = sv.max();
        sv.iter().filter(|&&v| v <= tol * top).count()
    }
}

/// Builds the master-equation generator. Fails when the dissipation matrix
/// is not positive semidefinite.
pub fn build_generator(couplings: &CouplingSet, drive: &DriveConfig) -> Result<Generator> {
    if !couplings.is_finite() {
        return Err(Error::Domain("non-finite coupling constants".into()));
    }
    if !couplings.is_positive_semidefinite(1e-12) {
        return Err(Error::Domain(format!(
            "dissipation matrix is not positive semidefinite: {couplings:?}"
        )));
    }
    let h = hamiltonian(couplings, drive);
    let id = Operator::identity();
    let minus_i = Complex64::new(0.0, -1.0);
    let mut l = (sandwich(&h, &id) - sandwich(&id, &h)) * minus_i;
    let gamma = [[couplings.gamma11, couplings.gamma12], [couplings.gamma12, couplings.gamma22]];
    let s = [sigma(0), sigma(1)];
    for i in 0..2 {
        for j in 0..2 {
            let g = gamma[i][j];
            if g == 0.0 {
                continue;
            }
            let sd = s[i].adjoint();
            let n = sd * s[j];
            let term = sandwich(&s[j], &sd) * Complex64::from(2.0) - sandwich(&n, &id) - sandwich(&id, &n);
            l += term * Complex64::from(g / 2.0);
        }
    }
    Ok(Generator { matrix: l })
}

/// A 4×4 density matrix with its physicality diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub rho: Operator,
}

impl DensityMatrix {
    pub fn new(rho: Operator) -> Self {
        DensityMatrix { rho }
    }

    pub fn basis(index: usize) -> Self {
        let mut rho = Operator::zeros();
        rho[(index, index)] = ONE;
        DensityMatrix { rho }
    }

    /// Projector on the pure state with amplitudes `psi`.
    pub fn pure(psi: [Complex64; 4]) -> Self {
        DensityMatrix { rho: Operator::from_fn(|a, b| psi[a] * psi[b].conj()) }
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (self.rho - self.rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = (self.rho + self.rho.adjoint()) * Complex64::from(0.5);
        h.symmetric_eigenvalues().min()
    }

    pub fn is_physical(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
            && (self.trace() - ONE).norm() <= tol
            && self.min_eigenvalue() >= -tol
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        (self.rho - other.rho).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub density: DensityMatrix,
    /// Largest `|ρ - ρ†|` entry removed by symmetrization.
    pub hermiticity_correction: f64,
    /// `max |L vec(ρ)|` of the returned state.
    pub residual: f64,
}

/// Unique steady state of `generator`.
pub fn steady_state(generator: &Generator) -> Result<SteadyState> {
    let dim = generator.kernel_dimension(1e-10);
    if dim != 1 {
        return Err(Error::DegenerateKernel(dim));
    }
    let mut a = generator.matrix;
    let mut rhs = Vectorized::zeros();
    for k in 0..16 {
        a[(0, k)] = if k % 5 == 0 { ONE } else { ZERO };
    }
    rhs[0] = ONE;
    let v = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("trace-constrained generator is singular".into()))?;
    let raw = unvectorize(&v);
    let correction = (raw - raw.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let rho = (raw + raw.adjoint()) * Complex64::from(0.5);
    let residual = (generator.matrix * vectorize(&rho)).iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(SteadyState { density: DensityMatrix::new(rho), hermiticity_correction: correction, residual })
}

/// Expectation values entering the correlation functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelatorSet {
    /// `⟨σ_i† σ_j⟩`.
    pub coherence: [[Complex64; 2]; 2],
    /// `⟨σ₁† σ₂† σ₁ σ₂⟩`.
    pub double_excitation: f64,
}

impl CorrelatorSet {
    /// Correlators of one emitter fully excited and the other in its ground state.
    pub fn single_excited() -> Self {
        correlators(&DensityMatrix::basis(2))
    }
}

pub fn correlators(state: &DensityMatrix) -> CorrelatorSet {
    let s = [sigma(0), sigma(1)];
    let mut coherence = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            coherence[i][j] = (state.rho * s[i].adjoint() * s[j]).trace();
        }
    }
    CorrelatorSet { coherence, double_excitation: state.rho[(3, 3)].re }
}

/// Fixed-step RK4 integration of the master equation up to `horizon`.
pub fn evolve_oracle(generator: &Generator, rho0: &DensityMatrix, horizon: f64, step: f64) -> Result<DensityMatrix> {
    if !(step > 0.0) || !(horizon >= 0.0) {
        return Err(Error::Domain(format!("invalid horizon {horizon} or step {step}")));
    }
    if step * generator.norm_inf() >= 1.0 {
        return Err(Error::Unstable(format!(
            "step {step} too large for generator norm {}",
            generator.norm_inf()
        )));
    }
    let l = &generator.matrix;
    let mut v = vectorize(&rho0.rho);
    let trace0 = rho0.trace();
    let steps = (horizon / step).ceil() as usize;
    let h = if steps == 0 { 0.0 } else { horizon / steps as f64 };
    let hc = Complex64::from(h);
    for n in 0..steps {
        let k1 = l * v;
        let k2 = l * (v + k1 * (hc * 0.5));
        let k3 = l * (v + k2 * (hc * 0.5));
        let k4 = l * (v + k3 * hc);
        v += (k1 + k2 * Complex64::from(2.0) + k3 * Complex64::from(2.0) + k4) * (hc / 6.0);
        if n % 256 == 0 || n + 1 == steps {
            let tr: Complex64 = (0..4).map(|a| v[5 * a]).sum();
            if (tr - trace0).norm() > 1e-9 || !v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::Unstable(format!("trace drifted to {tr} at t = {}", (n + 1) as f64 * h)));
            }
        }
    }
    Ok(DensityMatrix::new(unvectorize(&v)))
}

/// `|ρ_ab|` and `arg ρ_ab` over the basis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tomography {
    pub basis: [&'static str; 4],
    pub modulus: [[f64; 4]; 4],
    pub phase: [[f64; 4]; 4],
}

pub fn tomography_export(state: &DensityMatrix) -> Tomography {
    let mut modulus = [[0.0; 4]; 4];
    let mut phase = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            let z = state.rho[(a, b)];
            modulus[a][b] = z.norm();
            phase[a][b] = if z.norm() == 0.0 { 0.0 } else { z.arg() };
        }
    }
    Tomography { basis: BASIS_LABELS, modulus, phase }
}

impl Tomography {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,col,modulus,phase\n");
        for a in 0..4 {
            for b in 0..4 {
                let _ = writeln!(out, "{},{},{},{}", self.basis[a], self.basis[b], self.modulus[a][b], self.phase[a][b]);
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tomography serializes")
    }
}
