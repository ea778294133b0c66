//! Battery density matrices.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ONE, ZERO};
use crate::tolerance::Tolerances;

/// Density matrix `ρ_B` on the `N_B + 1` battery levels.
#[derive(Debug, Clone, PartialEq)]
pub struct BatteryState {
    matrix: CMatrix,
}

impl BatteryState {
    /// Validates Hermiticity, trace and positivity with default tolerances.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let state = Self { matrix };
        state.validate(&Tolerances::default())?;
        Ok(state)
    }

    /// Wraps a matrix without any check.
    pub fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    /// `|n⟩⟨n|` on a ladder of dimension `dim`.
    pub fn fock(dim: usize, n: usize) -> Self {
        assert!(n < dim, "level {n} outside ladder of dimension {dim}");
        let mut matrix = CMatrix::zeros(dim, dim);
        matrix[(n, n)] = ONE;
        Self { matrix }
    }

    /// The empty battery `|0⟩⟨0|`.
    pub fn ground(dim: usize) -> Self {
        Self::fock(dim, 0)
    }

    /// `|ψ⟩⟨ψ|` for the normalised amplitudes `psi`.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let d = psi.len();
        let matrix = CMatrix::from_fn(d, d, |r, c| psi[r] * psi[c].conj() / (norm * norm));
        Ok(Self { matrix })
    }

    /// `1/d` on every level.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: linalg::identity(dim).scale(1.0 / dim as f64),
        }
    }

    /// Diagonal state with the given populations.
    pub fn diagonal(populations: &[f64]) -> Result<Self> {
        let d = populations.len();
        let matrix = CMatrix::from_fn(d, d, |r, c| {
            if r == c {
                Complex64::new(populations[r], 0.0)
            } else {
                ZERO
            }
        });
        Self::new(matrix)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// Population `P_n = ⟨n|ρ|n⟩`.
    pub fn population(&self, n: usize) -> f64 {
        self.matrix[(n, n)].re
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|n| self.population(n)).collect()
    }

    pub fn trace(&self) -> Complex64 {
        linalg::trace(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::hermitian_eigenvalues(&self.matrix)[0]
    }

    /// Hermiticity and trace, without an eigen-decomposition.
    pub fn validate_cheap(&self, tol: &Tolerances) -> std::result::Result<(), String> {
        if self.matrix.nrows() != self.matrix.ncols() {
            return Err("matrix is not square".into());
        }
        if self
            .matrix
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err("non-finite entries".into());
        }
        let d = self.dim();
        let mut herm: f64 = 0.0;
        for c in 0..d {
            for r in 0..=c {
                herm = herm.max((self.matrix[(r, c)] - self.matrix[(c, r)].conj()).norm());
            }
        }
        if herm > tol.hermiticity() {
            return Err(format!("Hermiticity deviation {herm:e}"));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > tol.trace() || tr.im.abs() > tol.trace() {
            return Err(format!("trace {tr} deviates from 1"));
        }
        Ok(())
    }

    /// Full validation: Hermiticity, unit trace and positivity.
    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        self.validate_cheap(tol).map_err(Error::InvalidState)?;
        let min = self.min_eigenvalue();
        if !(min >= -tol.positivity()) {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }
}
