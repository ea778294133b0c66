//! Trajectory, scan, sweep and optimum scenarios.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};
use std::path::PathBuf;

use rayon::prelude::*;
use serde_json::{json, Value};

use spincharge::closed_form::{
    coherent_power, coherent_power_max, incoherent_optimal_tau, incoherent_power,
    incoherent_power_max, power_upper_bound, ridge_tau, ridge_tau_linear, ClosedFormModel,
};
use spincharge::{
    run_trajectory, AtomEnsembleSpec, BatterySpec, BatteryState, RunOptions, Tolerances,
};

use crate::config::{Budget, ExperimentConfig, Grid};
use crate::output::{num, opt, OutDir, Table};
use crate::CliError;

/// Everything a scenario needs besides its configuration.
pub struct Context {
    pub out: PathBuf,
    pub tolerances: Tolerances,
}

pub const SCAN_HEADER: &[&str] = &[
    "n_atoms",
    "theta0",
    "tau",
    "coherence",
    "steps",
    "k_tau",
    "n_bar",
    "power_scaled",
    "ergotropy_power_scaled",
    "purity",
    "p_top",
    "k_est",
    "power_bound_scaled",
    "power_coh_pred_scaled",
    "power_inc_pred_scaled",
    "divergence",
    "error",
];

pub const TRAJECTORY_HEADER: &[&str] = &[
    "k",
    "k_tau",
    "n_bar",
    "energy",
    "power",
    "ergotropy",
    "ergotropy_power",
    "purity",
    "beta_re",
    "beta_im",
    "p0",
    "p_top",
    "n_bar_pred",
    "beta_pred_re",
    "beta_pred_im",
];

/// Coherent power agreement window: `|P − P_coh|/N_A` at small τ.
const COHERENT_TOLERANCE: f64 = 0.02;
const COHERENT_MAX_TAU: f64 = 0.05;
/// Relative agreement of incoherent power while the top level is empty.
const INCOHERENT_TOLERANCE: f64 = 0.05;
const BOUNDARY_POPULATION: f64 = 1e-3;
/// `|n̄ − n̄_pred| / N_B` and `|β − β_pred|` inside `k ≤ k_est`.
const N_BAR_TOLERANCE: f64 = 0.03;
const BETA_TOLERANCE: f64 = 0.05;

pub fn battery(cfg: &ExperimentConfig, default_top: usize) -> Result<BatterySpec, CliError> {
    Ok(BatterySpec::new(
        cfg.n_b.unwrap_or(default_top),
        cfg.energy_spacing.unwrap_or(1.0),
    )?)
}

fn vacuum_start(battery: &BatterySpec, cfg: &ExperimentConfig) -> Result<BatteryState, CliError> {
    let level = cfg.initial_level.unwrap_or(0);
    if level > battery.top_level() {
        return Err(CliError::Validation(format!(
            "initial_level {level} exceeds the top level {}",
            battery.top_level()
        )));
    }
    Ok(BatteryState::fock(battery.dim(), level))
}

/// One parameter point evaluated to the end of its budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSpec {
    pub n_atoms: usize,
    pub theta0: f64,
    pub tau: f64,
    pub coherence: f64,
    pub budget: Budget,
}

/// Agreement label between simulated and closed-form power.
#[allow(clippy::too_many_arguments)]
pub fn divergence_label(
    coherence: f64,
    tau: f64,
    steps: usize,
    k_est: Option<u64>,
    p_top: f64,
    power: f64,
    coherent: f64,
    incoherent: f64,
) -> &'static str {
    let in_coherent_window = coherence == 1.0
        && tau.abs() <= COHERENT_MAX_TAU
        && k_est.is_some_and(|k| steps as u64 <= k);
    let in_incoherent_window = coherence == 0.0 && p_top <= BOUNDARY_POPULATION;
    if in_coherent_window {
        if (power - coherent).abs() <= COHERENT_TOLERANCE {
            "ok"
        } else {
            "diverged"
        }
    } else if in_incoherent_window {
        if (power - incoherent).abs() <= INCOHERENT_TOLERANCE * incoherent.abs() {
            "ok"
        } else {
            "diverged"
        }
    } else {
        "n/a"
    }
}

/// Runs one point from `initial` and formats a [`SCAN_HEADER`] row.
/// Failures land in the `error` column.
pub fn evaluate_point(
    ctx: &Context,
    battery: &BatterySpec,
    phi0: f64,
    p: &PointSpec,
    ergotropy: bool,
    initial: &BatteryState,
) -> Vec<String> {
    let mut row = vec![
        p.n_atoms.to_string(),
        num(p.theta0),
        num(p.tau),
        num(p.coherence),
    ];
    match point_values(ctx, battery, phi0, p, ergotropy, initial) {
        Ok(values) => row.extend(values),
        Err(e) => {
            row.extend(std::iter::repeat_n(String::new(), SCAN_HEADER.len() - 5));
            row.push(e.tag().to_string());
        }
    }
    row
}

fn point_values(
    ctx: &Context,
    battery: &BatterySpec,
    phi0: f64,
    p: &PointSpec,
    ergotropy: bool,
    initial: &BatteryState,
) -> spincharge::Result<Vec<String>> {
    let atoms = AtomEnsembleSpec::new(p.n_atoms, p.theta0, phi0, p.coherence)?;
    let model = ClosedFormModel::new(*battery, atoms, p.tau);
    let steps = p.budget.steps(p.tau, || model.k_est())?;
    if steps == 0 {
        return Err(spincharge::Error::ZeroSteps);
    }
    let options = RunOptions {
        stride: steps,
        ergotropy,
        tolerances: ctx.tolerances,
        ..RunOptions::default()
    };
    let traj = run_trajectory(battery, &atoms, p.tau, steps, initial, &options)?;
    let last = traj.last();
    let n = p.n_atoms as f64;
    let k_tau = last.k_tau;
    let power = last.power / n;
    let coherent = coherent_power(k_tau.abs(), &atoms) / n;
    let incoherent = incoherent_power(p.tau, &atoms) / n;
    let label = divergence_label(
        p.coherence,
        p.tau,
        steps,
        model.k_est,
        last.p_top,
        power,
        coherent,
        incoherent,
    );
    Ok(vec![
        steps.to_string(),
        num(k_tau),
        num(last.n_bar),
        num(power),
        opt(last.ergotropy_power.map(|e| e / n)),
        num(last.purity),
        num(last.p_top),
        model.k_est.map(|k| k.to_string()).unwrap_or_default(),
        num(power_upper_bound(&atoms, p.tau).value / n),
        num(coherent),
        num(incoherent),
        label.to_string(),
        String::new(),
    ])
}

/// Evaluates points in parallel on the current rayon pool, in input order.
pub fn evaluate_points(
    ctx: &Context,
    battery: &BatterySpec,
    phi0: f64,
    points: &[PointSpec],
    ergotropy: bool,
    initial: &BatteryState,
) -> Vec<Vec<String>> {
    points
        .par_iter()
        .map(|p| evaluate_point(ctx, battery, phi0, p, ergotropy, initial))
        .collect()
}

fn parameters_json(battery: &BatterySpec, atoms: &AtomEnsembleSpec, tau: f64) -> Value {
    json!({
        "n_b": battery.top_level(),
        "energy_spacing": battery.energy_spacing(),
        "n_atoms": atoms.n_atoms(),
        "theta0": atoms.polar_angle(),
        "phi0": atoms.azimuthal_angle(),
        "coherence": atoms.coherence(),
        "tau": tau,
    })
}

fn base_meta(scenario: &str, ctx: &Context) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("scenario".into(), json!(scenario));
    m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    m.insert("numeric_tolerance".into(), json!(ctx.tolerances.scale));
    m
}

pub fn run_trajectory_scenario(cfg: &ExperimentConfig, ctx: &Context) -> Result<(), CliError> {
    let battery = battery(cfg, 200)?;
    let atoms = AtomEnsembleSpec::new(
        cfg.n_atoms.unwrap_or(10),
        cfg.theta0.unwrap_or(FRAC_PI_3),
        cfg.phi0.unwrap_or(0.0),
        cfg.coherence.unwrap_or(1.0),
    )?;
    let tau = cfg.tau.unwrap_or(FRAC_PI_4);
    let model = ClosedFormModel::new(battery, atoms, tau);
    let steps = cfg
        .budget
        .unwrap_or(Budget::KEst)
        .steps(tau, || model.k_est())?;
    let initial = vacuum_start(&battery, cfg)?;
    let options = RunOptions {
        stride: cfg.stride.unwrap_or(1),
        ergotropy: cfg.ergotropy.unwrap_or(true),
        tolerances: ctx.tolerances,
        ..RunOptions::default()
    };
    let traj = run_trajectory(&battery, &atoms, tau, steps, &initial, &options)?;

    let mut table = Table::new(TRAJECTORY_HEADER);
    let mut n_bar_dev: f64 = 0.0;
    let mut beta_dev: f64 = 0.0;
    let mut first_flagged: Option<usize> = None;
    let window = model.k_est.map(|k| k as usize);
    for (i, s) in traj.steps.iter().enumerate() {
        let pred = traj.predictions.as_ref().map(|p| p[i]);
        if let (Some(p), Some(end)) = (pred, window) {
            if s.k <= end {
                let dn = (s.n_bar - p.n_bar).abs();
                let db = (s.beta - p.beta).norm();
                n_bar_dev = n_bar_dev.max(dn);
                beta_dev = beta_dev.max(db);
                let flagged =
                    dn > N_BAR_TOLERANCE * battery.top_level() as f64 || db > BETA_TOLERANCE;
                if flagged && first_flagged.is_none() {
                    first_flagged = Some(s.k);
                }
            }
        }
        table.push(vec![
            s.k.to_string(),
            num(s.k_tau),
            num(s.n_bar),
            num(s.energy),
            num(s.power),
            opt(s.ergotropy),
            opt(s.ergotropy_power),
            num(s.purity),
            num(s.beta.re),
            num(s.beta.im),
            num(s.p0),
            num(s.p_top),
            opt(pred.map(|p| p.n_bar)),
            opt(pred.map(|p| p.beta.re)),
            opt(pred.map(|p| p.beta.im)),
        ]);
    }

    let mut out = OutDir::create(&ctx.out)?;
    out.table("trajectory.csv", &table)?;
    let mut meta = base_meta("trajectory", ctx);
    meta.insert("parameters".into(), parameters_json(&battery, &atoms, tau));
    meta.insert("steps".into(), json!(steps));
    meta.insert(
        "initial_level".into(),
        json!(cfg.initial_level.unwrap_or(0)),
    );
    meta.insert(
        "derived".into(),
        json!({
            "v": model.drift.v,
            "omega": model.drift.omega,
            "alpha": [model.drift.alpha.re, model.drift.alpha.im],
            "k_est": model.k_est,
        }),
    );
    let divergence = match (&traj.predictions, window) {
        (Some(_), Some(end)) => json!({
            "window_end_k": end,
            "n_bar_max_deviation": n_bar_dev,
            "n_bar_tolerance": N_BAR_TOLERANCE * battery.top_level() as f64,
            "beta_max_deviation": beta_dev,
            "beta_tolerance": BETA_TOLERANCE,
            "flagged": first_flagged.is_some(),
            "first_flagged_k": first_flagged,
        }),
        _ => Value::Null,
    };
    meta.insert("divergence".into(), divergence);
    out.sidecar("trajectory.json", Value::Object(meta))?;
    Ok(())
}

pub fn run_scan(cfg: &ExperimentConfig, ctx: &Context) -> Result<(), CliError> {
    let battery = battery(cfg, 200)?;
    let n_atoms = cfg.n_atoms.unwrap_or(10);
    let coherence = cfg.coherence.unwrap_or(1.0);
    let phi0 = cfg.phi0.unwrap_or(0.0);
    let budget = cfg.budget.unwrap_or(Budget::KTau(60.0 / n_atoms as f64));
    let thetas = cfg
        .theta_grid(Grid {
            min: 0.0,
            max: FRAC_PI_2,
            count: 9,
        })
        .points();
    let taus = cfg
        .tau_grid(Grid {
            min: 0.05,
            max: 1.5,
            count: 9,
        })
        .points();
    let mut points: Vec<PointSpec> = thetas
        .iter()
        .flat_map(|&theta0| {
            taus.iter().map(move |&tau| PointSpec {
                n_atoms,
                theta0,
                tau,
                coherence,
                budget,
            })
        })
        .collect();
    points.sort_by(|a, b| a.theta0.total_cmp(&b.theta0).then(a.tau.total_cmp(&b.tau)));
    let initial = vacuum_start(&battery, cfg)?;
    let rows = evaluate_points(
        ctx,
        &battery,
        phi0,
        &points,
        cfg.ergotropy.unwrap_or(true),
        &initial,
    );

    let mut table = Table::new(SCAN_HEADER);
    let mut failures = 0;
    let mut diverged = 0;
    for r in rows {
        failures += usize::from(!r[SCAN_HEADER.len() - 1].is_empty());
        diverged += usize::from(r[SCAN_HEADER.len() - 2] == "diverged");
        table.push(r);
    }
    let mut out = OutDir::create(&ctx.out)?;
    out.table("scan.csv", &table)?;
    let mut meta = base_meta("scan_theta_tau", ctx);
    meta.insert(
        "parameters".into(),
        json!({
            "n_b": battery.top_level(),
            "n_atoms": n_atoms,
            "coherence": coherence,
            "phi0": phi0,
            "theta0": thetas,
            "tau": taus,
            "budget": budget_json(budget),
        }),
    );
    meta.insert("points".into(), json!(table.len()));
    meta.insert("failed_points".into(), json!(failures));
    meta.insert("diverged_points".into(), json!(diverged));
    out.sidecar("scan.json", Value::Object(meta))?;
    Ok(())
}

pub fn run_sweep(cfg: &ExperimentConfig, ctx: &Context) -> Result<(), CliError> {
    let battery = battery(cfg, 200)?;
    let na_list = cfg.na_list.clone().unwrap_or_else(|| vec![1, 2, 4, 8]);
    let theta0 = cfg.theta0.unwrap_or(FRAC_PI_2);
    let tau = cfg.tau.unwrap_or(0.01);
    let coherence = cfg.coherence.unwrap_or(1.0);
    let phi0 = cfg.phi0.unwrap_or(0.0);
    let points: Vec<PointSpec> = na_list
        .iter()
        .map(|&n| PointSpec {
            n_atoms: n,
            theta0,
            tau,
            coherence,
            budget: cfg.budget.unwrap_or(Budget::KTau(60.0 / n as f64)),
        })
        .collect();
    let initial = vacuum_start(&battery, cfg)?;
    let rows = evaluate_points(
        ctx,
        &battery,
        phi0,
        &points,
        cfg.ergotropy.unwrap_or(true),
        &initial,
    );
    let mut table = Table::new(SCAN_HEADER);
    for r in rows {
        table.push(r);
    }
    let mut out = OutDir::create(&ctx.out)?;
    out.table("sweep_na.csv", &table)?;
    let mut meta = base_meta("sweep_na", ctx);
    meta.insert(
        "parameters".into(),
        json!({
            "n_b": battery.top_level(),
            "n_atoms": na_list,
            "theta0": theta0,
            "tau": tau,
            "coherence": coherence,
            "phi0": phi0,
            "budget": cfg.budget.map(budget_json).unwrap_or(json!("k_tau = 60/n_atoms")),
        }),
    );
    out.sidecar("sweep_na.json", Value::Object(meta))?;
    Ok(())
}

pub fn budget_json(b: Budget) -> Value {
    match b {
        Budget::Steps(n) => json!({ "steps": n }),
        Budget::KTau(kt) => json!({ "k_tau": kt }),
        Budget::KEst => json!("k_est"),
    }
}

/// Text report of the closed-form optima.
pub fn optimal_report(n_atoms: usize) -> String {
    let tau0 = incoherent_optimal_tau();
    let mut s = String::new();
    s.push_str(&format!("tau0 = {}\n", num(tau0)));
    s.push_str(&format!("tau0 * cot(tau0) = {}\n", num(tau0 / tau0.tan())));
    s.push_str(&format!(
        "P_inc_max / N_A = {}\n",
        num(incoherent_power_max(n_atoms) / n_atoms as f64)
    ));
    s.push_str(&format!(
        "P_coh_max / N_A = {}\n",
        num(coherent_power_max(n_atoms) / n_atoms as f64)
    ));
    s.push_str("theta0,tau_ridge,tau_linear\n");
    for i in 0..=8 {
        let theta = i as f64 * FRAC_PI_2 / 8.0;
        s.push_str(&format!(
            "{},{},{}\n",
            num(theta),
            num(ridge_tau(theta)),
            num(ridge_tau_linear(theta))
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divergence_windows() {
        assert_eq!(
            divergence_label(1.0, 0.01, 100, Some(200), 0.0, 0.80, 0.81, 0.0),
            "ok"
        );
        assert_eq!(
            divergence_label(1.0, 0.01, 100, Some(200), 0.0, 0.70, 0.81, 0.0),
            "diverged"
        );
        assert_eq!(
            divergence_label(1.0, 0.01, 300, Some(200), 0.0, 0.70, 0.81, 0.0),
            "n/a"
        );
        assert_eq!(
            divergence_label(1.0, 0.3, 10, Some(200), 0.0, 0.70, 0.81, 0.0),
            "n/a"
        );
        assert_eq!(
            divergence_label(0.0, 0.3, 10, Some(20), 0.0, 0.50, 0.0, 0.51),
            "ok"
        );
        assert_eq!(
            divergence_label(0.0, 0.3, 10, Some(20), 0.2, 0.10, 0.0, 0.51),
            "n/a"
        );
        assert_eq!(
            divergence_label(0.5, 0.01, 10, Some(20), 0.0, 0.10, 0.2, 0.51),
            "n/a"
        );
    }

    #[test]
    fn report_lists_ridge_rows() {
        let r = optimal_report(1);
        assert!(r.starts_with("tau0 = 1.16556118521\n"));
        assert_eq!(r.lines().count(), 4 + 1 + 9);
    }
}
