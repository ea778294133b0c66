//! Operators and states of the battery ladder and the collective atom spin.
//!
//! Basis conventions used throughout the crate:
//! * battery levels `n = 0..=N_B`, ascending;
//! * spin states `|j, m⟩` stored by index `s = j − m`, so `m = j, j−1, …, −j`;
//! * joint index `s·(N_B+1) + n` (spin is the slow index).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ONE, ZERO};

/// Largest joint (spin ⊗ battery) dimension accepted by dense builders.
pub const JOINT_DIM_CAP: usize = 10_000;

/// Finite uniform energy ladder with levels `0..=top_level`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatterySpec {
    top_level: usize,
    energy_spacing: f64,
}

impl BatterySpec {
    pub fn new(top_level: usize, energy_spacing: f64) -> Result<Self> {
        if top_level < 1 {
            return Err(Error::InvalidParameter(format!(
                "battery top level must be >= 1, got {top_level}"
            )));
        }
        if !(energy_spacing > 0.0 && energy_spacing.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "energy spacing must be positive, got {energy_spacing}"
            )));
        }
        Ok(Self {
            top_level,
            energy_spacing,
        })
    }

    /// Ladder with unit spacing.
    pub fn with_top(top_level: usize) -> Result<Self> {
        Self::new(top_level, 1.0)
    }

    /// `N_B`, the highest level index.
    pub fn top_level(&self) -> usize {
        self.top_level
    }

    /// Hilbert-space dimension `N_B + 1`.
    pub fn dim(&self) -> usize {
        self.top_level + 1
    }

    pub fn energy_spacing(&self) -> f64 {
        self.energy_spacing
    }
}

/// `N_A` two-level atoms prepared in a (possibly dephased) coherent spin state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomEnsembleSpec {
    n_atoms: usize,
    polar_angle: f64,
    azimuthal_angle: f64,
    coherence: f64,
}

impl AtomEnsembleSpec {
    pub fn new(
        n_atoms: usize,
        polar_angle: f64,
        azimuthal_angle: f64,
        coherence: f64,
    ) -> Result<Self> {
        if n_atoms < 1 {
            return Err(Error::InvalidParameter("n_atoms must be >= 1".into()));
        }
        if !(0.0..=PI).contains(&polar_angle) {
            return Err(Error::InvalidParameter(format!(
                "polar angle must lie in [0, pi], got {polar_angle}"
            )));
        }
        if !(0.0..2.0 * PI).contains(&azimuthal_angle) {
            return Err(Error::InvalidParameter(format!(
                "azimuthal angle must lie in [0, 2pi), got {azimuthal_angle}"
            )));
        }
        if !(0.0..=1.0).contains(&coherence) {
            return Err(Error::InvalidParameter(format!(
                "coherence factor must lie in [0, 1], got {coherence}"
            )));
        }
        Ok(Self {
            n_atoms,
            polar_angle,
            azimuthal_angle,
            coherence,
        })
    }

    /// Coherent (`c = 1`) charger with `φ₀ = 0`.
    pub fn coherent(n_atoms: usize, polar_angle: f64) -> Result<Self> {
        Self::new(n_atoms, polar_angle, 0.0, 1.0)
    }

    /// Incoherent (`c = 0`) charger with `φ₀ = 0`.
    pub fn incoherent(n_atoms: usize, polar_angle: f64) -> Result<Self> {
        Self::new(n_atoms, polar_angle, 0.0, 0.0)
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    /// Total spin `j = N_A / 2`.
    pub fn j(&self) -> f64 {
        self.n_atoms as f64 / 2.0
    }

    /// `2j + 1`.
    pub fn spin_dim(&self) -> usize {
        self.n_atoms + 1
    }

    pub fn polar_angle(&self) -> f64 {
        self.polar_angle
    }

    pub fn azimuthal_angle(&self) -> f64 {
        self.azimuthal_angle
    }

    pub fn coherence(&self) -> f64 {
        self.coherence
    }

    /// Closed-form `⟨J_z⟩ = j cos θ₀`.
    pub fn jz_mean(&self) -> f64 {
        self.j() * self.polar_angle.cos()
    }

    /// Closed-form `⟨J₋⟩ = c j sin θ₀ e^{−iφ₀}`.
    pub fn jminus_mean(&self) -> Complex64 {
        Complex64::from_polar(
            self.coherence * self.j() * self.polar_angle.sin(),
            -self.azimuthal_angle,
        )
    }
}

/// `B`, `B†` and `n̂` on the battery ladder.
#[derive(Debug, Clone)]
pub struct LadderOps {
    pub lower: CMatrix,
    pub raise: CMatrix,
    pub number: CMatrix,
}

/// `J₊`, `J₋` and `J_z` for spin `j`.
#[derive(Debug, Clone)]
pub struct SpinOps {
    pub plus: CMatrix,
    pub minus: CMatrix,
    pub z: CMatrix,
}

/// `B = Σ_{n≥1} |n−1⟩⟨n|` with unit matrix elements (not `√n`).
pub fn build_ladder_ops(spec: &BatterySpec) -> LadderOps {
    let d = spec.dim();
    let mut lower = CMatrix::zeros(d, d);
    for n in 1..d {
        lower[(n - 1, n)] = ONE;
    }
    let raise = lower.adjoint();
    let number = CMatrix::from_fn(d, d, |r, c| {
        if r == c {
            Complex64::new(r as f64, 0.0)
        } else {
            ZERO
        }
    });
    LadderOps {
        lower,
        raise,
        number,
    }
}

/// `⟨j, m+1| J₊ |j, m⟩ = √(j(j+1) − m(m+1))`.
pub fn raising_coefficient(j: f64, m: f64) -> f64 {
    (j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
}

/// Angular-momentum matrices for spin `j = (spin_dim − 1)/2`.
pub fn spin_ops_for_dim(spin_dim: usize) -> SpinOps {
    let j = (spin_dim as f64 - 1.0) / 2.0;
    let mut plus = CMatrix::zeros(spin_dim, spin_dim);
    let mut z = CMatrix::zeros(spin_dim, spin_dim);
    for s in 0..spin_dim {
        let m = j - s as f64;
        z[(s, s)] = Complex64::new(m, 0.0);
        if s > 0 {
            // |j, m⟩ (index s) -> |j, m+1⟩ (index s-1)
            plus[(s - 1, s)] = Complex64::new(raising_coefficient(j, m), 0.0);
        }
    }
    let minus = plus.adjoint();
    SpinOps { plus, minus, z }
}

pub fn build_spin_ops(spec: &AtomEnsembleSpec) -> SpinOps {
    spin_ops_for_dim(spec.spin_dim())
}

/// Density matrix of the charger in the `|j, m⟩` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomState {
    matrix: CMatrix,
}

impl AtomState {
    /// Wraps a matrix after checking Hermiticity, trace and positivity.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() < 2 {
            return Err(Error::InvalidParameter(
                "atom state must be square with dimension >= 2".into(),
            ));
        }
        let herm = linalg::max_abs_diff(&matrix, &matrix.adjoint());
        if herm > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "atom state is not Hermitian (deviation {herm:e})"
            )));
        }
        let tr = linalg::trace(&matrix);
        if (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "atom state trace is {tr}, expected 1"
            )));
        }
        let min_eig = linalg::hermitian_eigenvalues(&matrix)[0];
        if !(min_eig >= -1e-12) {
            return Err(Error::InvalidAtomState(min_eig));
        }
        Ok(Self { matrix })
    }

    /// Wraps a matrix without validation.
    pub fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn j(&self) -> f64 {
        (self.dim() as f64 - 1.0) / 2.0
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    table.push(0.0);
    for i in 1..=n {
        acc += (i as f64).ln();
        table.push(acc);
    }
    table
}

/// `base^exp` with the convention `0^0 = 1`, evaluated in log space.
fn ln_pow(base: f64, exp: usize) -> f64 {
    if exp == 0 {
        0.0
    } else {
        exp as f64 * base.ln()
    }
}

/// Amplitudes `d_m` of the coherent spin state `|θ₀, φ₀⟩`, indexed by `s = j − m`.
pub fn coherent_amplitudes(spec: &AtomEnsembleSpec) -> Vec<Complex64> {
    let n = spec.n_atoms();
    let lf = ln_factorials(n);
    let half = spec.polar_angle() / 2.0;
    let (cos_h, sin_h) = (half.cos().abs(), half.sin().abs());
    (0..=n)
        .map(|s| {
            // j + m = n − s, j − m = s
            let ln_binom = lf[n] - lf[s] - lf[n - s];
            let ln_mag = 0.5 * ln_binom + ln_pow(cos_h, n - s) + ln_pow(sin_h, s);
            let mag = if ln_mag.is_finite() {
                ln_mag.exp()
            } else {
                0.0
            };
            Complex64::from_polar(mag, s as f64 * spec.azimuthal_angle())
        })
        .collect()
}

/// `ρ_A = Σ|d_m|²|m⟩⟨m| + c Σ_{m≠m′} d_m d*_{m′} |m⟩⟨m′|`.
pub fn coherent_spin_state(spec: &AtomEnsembleSpec) -> AtomState {
    let d = coherent_amplitudes(spec);
    let c = spec.coherence();
    let dim = d.len();
    let matrix = CMatrix::from_fn(dim, dim, |r, col| {
        let v = d[r] * d[col].conj();
        if r == col {
            Complex64::new(v.re, 0.0)
        } else {
            v * c
        }
    });
    AtomState { matrix }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinMoments {
    pub jz_mean: f64,
    pub jminus_mean: Complex64,
}

/// `tr(ρ_A J_z)` and `tr(ρ_A J₋)`.
pub fn spin_moments(state: &AtomState) -> SpinMoments {
    let ops = spin_ops_for_dim(state.dim());
    let jz = (state.matrix() * &ops.z).trace().re;
    let jm = (state.matrix() * &ops.minus).trace();
    SpinMoments {
        jz_mean: jz,
        jminus_mean: jm,
    }
}

/// Dense joint operators on spin ⊗ battery.
#[derive(Debug, Clone)]
pub struct JointOperators {
    /// `ε J_z + ε n̂`
    pub free: CMatrix,
    /// `J₊B + J₋B†`, the coupling divided by `ħg`.
    pub coupling: CMatrix,
    /// `J_z ⊗ 1 + 1 ⊗ n̂`, the conserved excitation number.
    pub excitations: CMatrix,
}

impl JointOperators {
    /// `H = H₀ + g V`.
    pub fn hamiltonian(&self, g: f64) -> CMatrix {
        &self.free + self.coupling.scale(g)
    }
}

pub fn check_joint_dim(battery: &BatterySpec, atoms: &AtomEnsembleSpec) -> Result<usize> {
    let dim = battery.dim() * atoms.spin_dim();
    if dim > JOINT_DIM_CAP {
        return Err(Error::DimensionCap {
            dim,
            cap: JOINT_DIM_CAP,
        });
    }
    Ok(dim)
}

pub fn build_joint_operators(
    battery: &BatterySpec,
    atoms: &AtomEnsembleSpec,
) -> Result<JointOperators> {
    check_joint_dim(battery, atoms)?;
    let ladder = build_ladder_ops(battery);
    let spin = build_spin_ops(atoms);
    let id_b = linalg::identity(battery.dim());
    let id_a = linalg::identity(atoms.spin_dim());
    let eps = battery.energy_spacing();
    let excitations = linalg::kron(&spin.z, &id_b) + linalg::kron(&id_a, &ladder.number);
    let free = excitations.scale(eps);
    let coupling =
        linalg::kron(&spin.plus, &ladder.lower) + linalg::kron(&spin.minus, &ladder.raise);
    Ok(JointOperators {
        free,
        coupling,
        excitations,
    })
}
