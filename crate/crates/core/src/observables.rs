//! Per-step observables of a battery state.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::hermitian_eigenvalues;
use crate::operators::BatterySpec;
use crate::state::BatteryState;
use crate::tolerance::Tolerances;

/// Populations and coherence read off a state.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationStats {
    pub n_bar: f64,
    pub p_dist: Vec<f64>,
    pub p0: f64,
    pub p_top: f64,
    /// `β = tr(ρB)`, the sum of the first subdiagonal.
    pub beta: Complex64,
}

pub fn excitation_stats(state: &BatteryState) -> ExcitationStats {
    let m = state.matrix();
    let dim = state.dim();
    let p_dist: Vec<f64> = (0..dim).map(|n| m[(n, n)].re).collect();
    let n_bar = p_dist.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
    // tr(ρB) = Σ_n ρ[n, n−1]·B[n−1, n] with unit ladder elements
    let beta = (1..dim).map(|n| m[(n, n - 1)]).sum();
    ExcitationStats {
        n_bar,
        p0: p_dist[0],
        p_top: p_dist[dim - 1],
        p_dist,
        beta,
    }
}

/// `(n̄_k − n̄₀)/(kτ)` in units of `gε`.
pub fn charging_power(n_bar: f64, n_bar_0: f64, k: usize, tau: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::ZeroSteps);
    }
    Ok((n_bar - n_bar_0) / (k as f64 * tau))
}

/// Ergotropy and the diagonal of the passive state.
#[derive(Debug, Clone, PartialEq)]
pub struct Ergotropy {
    /// Units of `ε`.
    pub value: f64,
    /// Passive-state populations, nonincreasing with level.
    pub passive: Vec<f64>,
}

/// Passive state: eigenvalues in descending order on ascending levels.
///
/// Equal eigenvalues keep their eigensolver order, so the output is
/// deterministic for a given input.
pub fn passive_populations(eigenvalues: &[f64]) -> Vec<f64> {
    let mut r = eigenvalues.to_vec();
    r.sort_by(|a, b| b.total_cmp(a));
    r
}

pub fn ergotropy(state: &BatteryState, spec: &BatterySpec) -> Result<Ergotropy> {
    ergotropy_with(state, spec, &Tolerances::default())
}

pub fn ergotropy_with(
    state: &BatteryState,
    spec: &BatterySpec,
    tol: &Tolerances,
) -> Result<Ergotropy> {
    if state.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: state.dim(),
        });
    }
    let eig = hermitian_eigenvalues(state.matrix());
    if eig.iter().any(|e| !e.is_finite()) {
        return Err(Error::InvalidState("eigensolver did not converge".into()));
    }
    let min = eig[0];
    if min < -tol.ergotropy_positivity() {
        return Err(Error::InvalidState(format!(
            "eigenvalue {min:e} is negative"
        )));
    }
    let passive = passive_populations(&eig);
    let eps = spec.energy_spacing();
    let energy = eps * excitation_stats(state).n_bar;
    let passive_energy: f64 = passive
        .iter()
        .enumerate()
        .map(|(n, r)| eps * n as f64 * r)
        .sum();
    let value = energy - passive_energy;
    if !(value >= -tol.ergotropy_positivity()) {
        return Err(Error::InvalidState(format!("negative ergotropy {value:e}")));
    }
    Ok(Ergotropy {
        value: value.max(0.0),
        passive,
    })
}

/// Ergotropy per unit charging time, `ℰ/(kτ)`, in units of `gε` when the
/// ergotropy is given in units of `ε`.
pub fn ergotropy_power(ergotropy: f64, k: usize, tau: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::ZeroSteps);
    }
    Ok(ergotropy / (k as f64 * tau))
}

/// `tr ρ²`.
pub fn purity(state: &BatteryState) -> f64 {
    let m = state.matrix();
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Everything recorded for one step of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct StepObservables {
    pub k: usize,
    pub k_tau: f64,
    pub n_bar: f64,
    /// Units of `ε`.
    pub energy: f64,
    pub p_dist: Vec<f64>,
    pub beta: Complex64,
    pub p0: f64,
    pub p_top: f64,
    /// Units of `gε`; zero at `k = 0`.
    pub power: f64,
    /// `None` when not evaluated at this step.
    pub ergotropy: Option<f64>,
    pub ergotropy_power: Option<f64>,
    pub purity: f64,
}

impl StepObservables {
    /// Observables at step `k` of a run that started with `n_bar_0`.
    pub fn measure(
        state: &BatteryState,
        spec: &BatterySpec,
        k: usize,
        tau: f64,
        n_bar_0: f64,
        with_ergotropy: bool,
        tol: &Tolerances,
    ) -> Result<Self> {
        let stats = excitation_stats(state);
        let power = if k == 0 {
            0.0
        } else {
            charging_power(stats.n_bar, n_bar_0, k, tau)?
        };
        let (erg, erg_power) = if with_ergotropy {
            let e = ergotropy_with(state, spec, tol)?.value;
            let p = if k == 0 {
                0.0
            } else {
                ergotropy_power(e, k, tau)?
            };
            (Some(e), Some(p))
        } else {
            (None, None)
        };
        Ok(Self {
            k,
            k_tau: k as f64 * tau,
            energy: spec.energy_spacing() * stats.n_bar,
            n_bar: stats.n_bar,
            p_dist: stats.p_dist,
            beta: stats.beta,
            p0: stats.p0,
            p_top: stats.p_top,
            power,
            ergotropy: erg,
            ergotropy_power: erg_power,
            purity: purity(state),
        })
    }

    /// Row invariants; returns the first violation found.
    pub fn check(&self, top_level: usize, tol: &Tolerances) -> std::result::Result<(), String> {
        let total: f64 = self.p_dist.iter().sum();
        if (total - 1.0).abs() > 1e-9 * tol.scale {
            return Err(format!("populations sum to {total}"));
        }
        let slack = 1e-9 * tol.scale;
        if self.n_bar < -slack || self.n_bar > top_level as f64 + slack {
            return Err(format!("n_bar {} outside [0, {top_level}]", self.n_bar));
        }
        if let Some(e) = self.ergotropy {
            if e < 0.0 || e > self.energy + slack {
                return Err(format!("ergotropy {e} outside [0, {}]", self.energy));
            }
        }
        if !(self.purity > 0.0 && self.purity <= 1.0 + 1e-12 * tol.scale) {
            return Err(format!("purity {}", self.purity));
        }
        if self.beta.norm() > 1.0 + slack {
            return Err(format!("|beta| = {} exceeds 1", self.beta.norm()));
        }
        Ok(())
    }
}
