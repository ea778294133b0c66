//! Short-time analytic predictions for charging an empty battery.
//!
//! All powers are in units of `gε`. The formulas assume `φ₀ = 0` wherever
//! only the magnitude of `⟨J₋⟩` enters.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operators::{AtomEnsembleSpec, BatterySpec};
use crate::special::{bessel_j1_ratio, catalan_f64, integrate};

/// `f(∞) = 8/(3π)`.
pub const F_INFINITY: f64 = 8.0 / (3.0 * PI);

/// Slope constant of the linear ridge law `τ = 1.17(1 − 2θ₀/π)`.
pub const RIDGE_TAU_AT_ZERO: f64 = 1.17;

/// Per-collision drift of `n̄`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftParameters {
    /// `v = 2 sin²τ ⟨J_z⟩`
    pub v: f64,
    /// `Ω = sin(2τ) |⟨J₋⟩|`
    pub omega: f64,
    /// `sin(2τ)⟨J₋⟩`, carrying the phase `e^{−iφ₀}`.
    pub omega_phased: Complex64,
    /// `α = iτ⟨J₋⟩`
    pub alpha: Complex64,
}

impl DriftParameters {
    /// From raw values, with a real (`φ₀ = 0`) coherence term.
    pub fn from_values(v: f64, omega: f64, alpha: Complex64) -> Self {
        Self {
            v,
            omega,
            omega_phased: Complex64::new(omega, 0.0),
            alpha,
        }
    }
}

pub fn drift_parameters(atoms: &AtomEnsembleSpec, tau: f64) -> DriftParameters {
    let jm = atoms.jminus_mean();
    let s = tau.sin();
    DriftParameters {
        v: 2.0 * s * s * atoms.jz_mean(),
        omega: (2.0 * tau).sin() * jm.norm(),
        omega_phased: jm * (2.0 * tau).sin(),
        alpha: Complex64::new(0.0, tau) * jm,
    }
}

/// `⌈x⌉`, treating values within `1e−9` relative of an integer as that
/// integer so that e.g. `200/2.4999999999999996` gives 80.
fn robust_ceiling(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

/// Rates at or below this are rounding residue (e.g. `cos(π/2)` in `v`).
pub const MIN_CHARGING_RATE: f64 = 1e-12;

/// `k_est = ⌈N_B/(v + Ω)⌉`, the estimated number of collisions to full charge.
pub fn estimate_full_charge_step(battery: &BatterySpec, drift: &DriftParameters) -> Result<u64> {
    let rate = drift.v + drift.omega;
    if !(rate > MIN_CHARGING_RATE) {
        return Err(Error::NonCharging(rate));
    }
    Ok((robust_ceiling(battery.top_level() as f64 / rate) as u64).max(1))
}

/// `n̄_k = n̄₀ + k[v + Im(Ω β₀*)]` for `k = 0..=steps` (no boundaries, `β_k = β₀`).
pub fn recursion_no_boundary(
    n0: f64,
    beta0: Complex64,
    drift: &DriftParameters,
    steps: usize,
) -> Vec<f64> {
    let gain = drift.v + (drift.omega_phased * beta0.conj()).im;
    (0..=steps).map(|k| n0 + k as f64 * gain).collect()
}

/// `n̄_k` from the β-resolved sum `n̄₀ + kv + Σ_{k′<k} Im(Ω β_{k′}*)`.
///
/// `betas[k′]` must hold `β_{k′}`; the result has `betas.len() + 1` entries.
pub fn recursion_with_betas(n0: f64, drift: &DriftParameters, betas: &[Complex64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(betas.len() + 1);
    let mut n = n0;
    out.push(n);
    for beta in betas {
        n += drift.v + (drift.omega_phased * beta.conj()).im;
        out.push(n);
    }
    out
}

/// Saturated peak estimate `(v + Ω)k`, reached when `Im β ≈ −1`.
pub fn peak_position_saturated(drift: &DriftParameters, k: usize) -> f64 {
    (drift.v + drift.omega) * k as f64
}

/// `⟨0|(αB† − α*B)^{2n}|0⟩ = (−1)^n |α|^{2n} C_n`.
pub fn vacuum_moment(n: u32, alpha: Complex64) -> f64 {
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * alpha.norm().powi(2 * n as i32) * catalan_f64(n)
}

/// `⟨0|(αB† − α*B)^l|0⟩` for any power `l`; zero for odd `l`.
pub fn vacuum_moment_of_power(power: u32, alpha: Complex64) -> f64 {
    if power % 2 == 1 {
        0.0
    } else {
        vacuum_moment(power / 2, alpha)
    }
}

/// `⟨0|D(kα)|0⟩ = J₁(2k|α|)/(k|α|)`, equal to 1 at `k|α| = 0`.
pub fn vacuum_amplitude(k: usize, alpha: Complex64) -> f64 {
    bessel_j1_ratio(k as f64 * alpha.norm())
}

/// `β_k ≈ β₀ − α Σ_{k′<k} (J₁(2k′|α|)/(k′|α|))²` for `k = 0..=steps`.
pub fn beta_sequence(steps: usize, alpha: Complex64, beta0: Complex64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut acc = 0.0;
    out.push(beta0);
    for k in 1..=steps {
        let r = vacuum_amplitude(k - 1, alpha);
        acc += r * r;
        out.push(beta0 - alpha * acc);
    }
    out
}

/// Vacuum population `⟨0|ρ_B(k)|0⟩ ≈ (J₁(2k|α|)/(k|α|))²`.
pub fn vacuum_population(k: usize, alpha: Complex64) -> f64 {
    let r = vacuum_amplitude(k, alpha);
    r * r
}

/// `(J₁(2k′|α|)/k′)²`, with the `k′ = 0` term replaced by its limit `|α|²`.
fn discrete_weight(kp: usize, a: f64) -> f64 {
    let r = a * bessel_j1_ratio(kp as f64 * a);
    r * r
}

/// `n̄_k ≈ 2 Σ_{k′=0}^{k−2} (k − 1 − k′)(J₁(2k′|α|)/k′)²` for an empty battery.
pub fn n_bar_discrete(k: usize, alpha: Complex64) -> f64 {
    if k < 2 {
        return 0.0;
    }
    let a = alpha.norm();
    2.0 * (0..=k - 2)
        .map(|kp| (k - 1 - kp) as f64 * discrete_weight(kp, a))
        .sum::<f64>()
}

/// [`n_bar_discrete`] for every `k = 0..=steps` in `O(steps)`.
pub fn n_bar_discrete_sequence(steps: usize, alpha: Complex64) -> Vec<f64> {
    let a = alpha.norm();
    let mut out = Vec::with_capacity(steps + 1);
    let mut n = 0.0;
    let mut partial = 0.0;
    out.push(0.0);
    for k in 1..=steps {
        if k >= 2 {
            partial += discrete_weight(k - 2, a);
        }
        n += 2.0 * partial;
        out.push(n);
    }
    out
}

/// `f(x) = (1/x) ∫₀ˣ (x − u)[J₁(2u)/u]² du`, absolute error below `1e−8`.
pub fn f_of_x(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let integrand = |u: f64| {
        let r = bessel_j1_ratio(u);
        (x - u) * r * r
    };
    // panels of width <= 1 keep every sub-integrand smooth and cheap
    let panels = x.ceil().max(1.0) as usize;
    let width = x / panels as f64;
    let tol = 1e-10 * x / panels as f64;
    let total: f64 = (0..panels)
        .map(|i| {
            let a = i as f64 * width;
            let b = if i + 1 == panels { x } else { a + width };
            integrate(integrand, a, b, tol)
        })
        .sum();
    total / x
}

/// `n̄ ≈ 2x f(x)` with `x = kτ|⟨J₋⟩|`.
pub fn n_bar_integral(k_tau: f64, jminus_mean: f64) -> f64 {
    let x = k_tau * jminus_mean.abs();
    2.0 * x * f_of_x(x)
}

/// Upper-bound power from the saturated drift, in units of `gε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBound {
    pub value: f64,
    /// `sin(τ + θ₀) < 0`: the formula gives negative power.
    pub unphysical: bool,
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `P ≈ N_A (sin τ/τ) sin(τ + θ₀)` (coherent charger, `c = 1`).
pub fn power_upper_bound(atoms: &AtomEnsembleSpec, tau: f64) -> PowerBound {
    let value = atoms.n_atoms() as f64 * upper_bound_profile(atoms.polar_angle(), tau);
    PowerBound {
        value,
        unphysical: value < 0.0,
    }
}

/// `(sin τ/τ) sin(τ + θ₀)`, the bound per atom.
pub fn upper_bound_profile(theta0: f64, tau: f64) -> f64 {
    sinc(tau) * (tau + theta0).sin()
}

/// `P_coh ≈ 2|⟨J₋⟩| f(kτ|⟨J₋⟩|)`.
pub fn coherent_power(k_tau: f64, atoms: &AtomEnsembleSpec) -> f64 {
    let jm = atoms.jminus_mean().norm();
    2.0 * jm * f_of_x(k_tau * jm)
}

/// `P_coh,max ≈ (8/3π) N_A`.
pub fn coherent_power_max(n_atoms: usize) -> f64 {
    F_INFINITY * n_atoms as f64
}

/// `P_inc ≈ 2⟨J_z⟩ sin²τ/τ`.
pub fn incoherent_power(tau: f64, atoms: &AtomEnsembleSpec) -> f64 {
    2.0 * atoms.jz_mean() * tau.sin() * sinc(tau)
}

/// Root of `τ cot τ = 1/2` in `(0, π)`, by bisection.
pub fn incoherent_optimal_tau() -> f64 {
    // τ cot τ − 1/2 decreases monotonically from 1/2 to −∞ on (0, π)
    let g = |t: f64| t * t.cos() / t.sin() - 0.5;
    let (mut lo, mut hi) = (1e-6, PI - 1e-6);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// `P_inc,max = N_A sin²τ₀/τ₀` with `θ₀ = 0`.
pub fn incoherent_power_max(n_atoms: usize) -> f64 {
    let t0 = incoherent_optimal_tau();
    n_atoms as f64 * t0.sin().powi(2) / t0
}

/// `τ` maximising `(sin τ/τ) sin(τ + θ₀)` at fixed `θ₀ ∈ [0, π/2]`,
/// by golden-section search on `(0, π − θ₀)`.
pub fn ridge_tau(theta0: f64) -> f64 {
    let f = |t: f64| upper_bound_profile(theta0, t);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, PI - theta0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-11 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Linear ridge law `τ = 1.17(1 − 2θ₀/π)`.
pub fn ridge_tau_linear(theta0: f64) -> f64 {
    RIDGE_TAU_AT_ZERO * (1.0 - theta0 / FRAC_PI_2)
}

/// Per-step analytic companion of a simulated trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPrediction {
    pub k: usize,
    pub n_bar: f64,
    pub beta: Complex64,
    /// `⟨0|ρ_B(k)|0⟩`
    pub p0: f64,
}

/// Analytic model bound to one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormModel {
    pub battery: BatterySpec,
    pub atoms: AtomEnsembleSpec,
    pub tau: f64,
    pub drift: DriftParameters,
    /// `None` when `v + Ω ≤ 0`.
    pub k_est: Option<u64>,
}

impl ClosedFormModel {
    pub fn new(battery: BatterySpec, atoms: AtomEnsembleSpec, tau: f64) -> Self {
        let drift = drift_parameters(&atoms, tau);
        let k_est = estimate_full_charge_step(&battery, &drift).ok();
        Self {
            battery,
            atoms,
            tau,
            drift,
            k_est,
        }
    }

    pub fn k_est(&self) -> Result<u64> {
        estimate_full_charge_step(&self.battery, &self.drift)
    }

    /// `x = kτ|⟨J₋⟩|`.
    pub fn scaled_time(&self, k: usize) -> f64 {
        k as f64 * self.tau * self.atoms.jminus_mean().norm()
    }

    /// Predictions for `k = 0..=steps` (empty initial battery).
    pub fn predictions(&self, steps: usize) -> Vec<StepPrediction> {
        let alpha = self.drift.alpha;
        let n_bars = n_bar_discrete_sequence(steps, alpha);
        let betas = beta_sequence(steps, alpha, Complex64::new(0.0, 0.0));
        (0..=steps)
            .map(|k| StepPrediction {
                k,
                n_bar: n_bars[k],
                beta: betas[k],
                p0: vacuum_population(k, alpha).clamp(0.0, 1.0),
            })
            .collect()
    }
}
