//! Data behind each figure, one subcommand per figure.
//!
//! Defaults follow the published parameter sets; battery size, atom
//! number, polar angle and grids can be overridden from the config.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_8, PI};

use rayon::prelude::*;
use serde_json::{json, Value};

use spincharge::closed_form::{
    coherent_power, f_of_x, incoherent_optimal_tau, incoherent_power, incoherent_power_max,
    n_bar_discrete_sequence, peak_position_saturated, power_upper_bound, ridge_tau,
    ridge_tau_linear, ClosedFormModel, F_INFINITY,
};
use spincharge::special::catalan;
use spincharge::{
    run_trajectory, AtomEnsembleSpec, BatterySpec, BatteryState, RunOptions, Trajectory,
};

use crate::config::{Budget, ExperimentConfig, Grid};
use crate::output::{num, OutDir, Table};
use crate::scenarios::{battery, evaluate_points, Context, PointSpec, SCAN_HEADER};
use crate::CliError;

/// Number of population snapshots per protocol.
const SNAPSHOTS: usize = 8;

fn run(
    ctx: &Context,
    battery: &BatterySpec,
    atoms: &AtomEnsembleSpec,
    tau: f64,
    steps: usize,
    stride: usize,
    ergotropy: bool,
) -> spincharge::Result<Trajectory> {
    let options = RunOptions {
        stride: stride.max(1),
        ergotropy,
        tolerances: ctx.tolerances,
        ..RunOptions::default()
    };
    run_trajectory(
        battery,
        atoms,
        tau,
        steps,
        &BatteryState::ground(battery.dim()),
        &options,
    )
}

fn protocol_name(coherence: f64) -> &'static str {
    if coherence == 0.0 {
        "incoherent"
    } else {
        "coherent"
    }
}

pub fn figure2(cfg: &ExperimentConfig, ctx: &Context) -> Result<(), CliError> {
    let battery = battery(cfg, 200)?;
    let n_atoms = cfg.n_atoms.unwrap_or(10);
    let theta0 = cfg.theta0.unwrap_or(FRAC_PI_3);
    let phi0 = cfg.phi0.unwrap_or(0.0);
    let top = battery.top_level() as f64;
    let slow_budget = match cfg.budget {
        Some(Budget::KTau(kt)) => kt,
        None => 70.0,
        Some(other) => {
            return Err(CliError::Validation(format!(
                "figure2 accepts only k_tau_budget for the slow incoherent run, got {other:?}"
            )))
        }
    };
    let incoherent = AtomEnsembleSpec::new(n_atoms, theta0, phi0, 0.0)?;
    let coherent = AtomEnsembleSpec::new(n_atoms, theta0, phi0, 1.0)?;

    // (tau, atoms, steps, stride) for every n̄ series
    let fast = FRAC_PI_4;
    let slow = 0.01;
    let k_est = |a: &AtomEnsembleSpec, tau: f64| ClosedFormModel::new(battery, *a, tau).k_est();
    let fast_steps = 2 * k_est(&coherent, fast)?.max(k_est(&incoherent, fast)?) as usize;
    let slow_coherent_steps = k_est(&coherent, slow)? as usize;
    let slow_incoherent_steps = (slow_budget / slow).round() as usize;
    let series = [
        (fast, coherent, fast_steps, 1),
        (fast, incoherent, fast_steps, 1),
        (slow, coherent, slow_coherent_steps, 10),
        (slow, incoherent, slow_incoherent_steps, 10),
    ];
    let trajectories = series
        .par_iter()
        .map(|(tau, atoms, steps, stride)| run(ctx, &battery, atoms, *tau, *steps, *stride, false))
        .collect::<spincharge::Result<Vec<_>>>()?;

    let mut nbar = Table::new(&["protocol", "tau", "k", "k_tau", "n_bar"]);
    for ((tau, atoms, _, _), traj) in series.iter().zip(&trajectories) {
        for s in &traj.steps {
            nbar.push(vec![
                protocol_name(atoms.coherence()).into(),
                num(*tau),
                s.k.to_string(),
                num(s.k_tau),
                num(s.n_bar),
            ]);
        }
    }

    let mut dists = Table::new(&[
        "protocol",
        "tau",
        "k",
        "k_tau",
        "n",
        "p_n",
        "p_n_rescaled",
        "peak_pred",
    ]);
    let mut markers = Table::new(&["protocol", "tau", "v", "omega", "k_est", "k_est_tau"]);
    let mut sampled = serde_json::Map::new();
    for ((tau, atoms, _, _), traj) in series.iter().zip(&trajectories).take(2) {
        let model = ClosedFormModel::new(battery, *atoms, *tau);
        let ke = model.k_est()? as usize;
        let ks: Vec<usize> = (0..SNAPSHOTS)
            .map(|i| (i * ke + (SNAPSHOTS - 1) / 2) / (SNAPSHOTS - 1))
            .collect();
        sampled.insert(protocol_name(atoms.coherence()).into(), json!(ks));
        for &k in &ks {
            let s = &traj.steps[k];
            let peak = s.p_dist.iter().copied().fold(0.0, f64::max);
            let predicted = peak_position_saturated(&model.drift, k).min(top);
            for (n, p) in s.p_dist.iter().enumerate() {
                dists.push(vec![
                    protocol_name(atoms.coherence()).into(),
                    num(*tau),
                    k.to_string(),
                    num(s.k_tau),
                    n.to_string(),
                    num(*p),
                    num(if peak > 0.0 { p / peak } else { 0.0 }),
                    num(predicted),
                ]);
            }
        }
    }
    for (tau, atoms, _, _) in &series {
        let model = ClosedFormModel::new(battery, *atoms, *tau);
        let ke = model.k_est()?;
        markers.push(vec![
            protocol_name(atoms.coherence()).into(),
            num(*tau),
            num(model.drift.v),
            num(model.drift.omega),
            ke.to_string(),
            num(ke as f64 * tau),
        ]);
    }

    let alpha = ClosedFormModel::new(battery, coherent, slow).drift.alpha;
    let discrete = n_bar_discrete_sequence(slow_coherent_steps, alpha);
    let mut closed = Table::new(&["k", "k_tau", "n_bar_discrete"]);
    for (k, n) in discrete.iter().enumerate().step_by(10) {
        closed.push(vec![k.to_string(), num(k as f64 * slow), num(*n)]);
    }

    let mut out = OutDir::create(&ctx.out)?;
    out.table("fig2_distributions.csv", &dists)?;
    out.table("fig2_nbar.csv", &nbar)?;
    out.table("fig2_closed_form.csv", &closed)?;
    out.table("fig2_markers.csv", &markers)?;
    let argmax: Vec<Value> = series
        .iter()
        .zip(&trajectories)
        .map(|((tau, atoms, _, _), t)| {
            let best = t.argmax_n_bar();
            json!({ "protocol": protocol_name(atoms.coherence()), "tau": tau, "k": best.k, "k_tau": best.k_tau, "n_bar": best.n_bar })
        })
        .collect();
    let meta = json!({
        "scenario": "figure2",
        "version": env!("CARGO_PKG_VERSION"),
        "numeric_tolerance": ctx.tolerances.scale,
        "parameters": { "n_b": battery.top_level(), "n_atoms": n_atoms, "theta0": theta0, "phi0": phi0 },
        "snapshot_k": sampled,
        "snapshot_rule": "8 evenly spaced k in [0, k_est] at tau = pi/4, rounded to the nearest integer",
        "slow_incoherent_k_tau": slow_budget,
        "n_bar_argmax": argmax,
    });
    out.sidecar("fig2.json", meta)?;
    Ok(())
}

pub fn figure3(_cfg: &ExperimentConfig, ctx: &Context) -> Result<(), CliError> {
    let h = 1e-4;
    let mut f_table = Table::new(&["x", "f", "f_plus_x_fprime", "f_inf"]);
    for i in 0..=400 {
        let x = i as f64 * 0.1;
        let derivative = if x < h {
            (f_of_x(x + h) - f_of_x(x)) / h
        } else {
            (f_of_x(x + h) - f_of_x(x - h)) / (2.0 * h)
        };
        let f = f_of_x(x);
        f_table.push(vec![
            num(x),
            num(f),
            num(f + x * derivative),
            num(F_INFINITY),
        ]);
    }
    let mut cat = Table::new(&["n", "catalan"]);
    for n in 0..=10u32 {
        cat.push(vec![n.to_string(), catalan(n).to_string()]);
    }
    let mut out = OutDir::create(&ctx.out)?;
    out.table("fig3_f.csv", &f_table)?;
    out.table("fig3_catalan.csv", &cat)?;
    let f40 = f_of_x(40.0);
    let meta = json!({
        "scenario": "figure3",
        "version": env!("CARGO_PKG_VERSION"),
        "derivative": "central difference, h = 1e-4 (forward at x = 0)",
        "f_30": f_of_x(30.0),
        "f_40": f40,
        "f_inf": F_INFINITY,
        "f_inf_minus_f_40": F_INFINITY - f40,
    });
    out.sidecar("fig3.json", meta)?;
    Ok(())
}

pub fn figure4(cfg: &ExperimentConfig, ctx: &Context) -> Result<(), CliError> {
    let battery = battery(cfg, 200)?;
    let phi0 = cfg.phi0.unwrap_or(0.0);
    let ergotropy = cfg.ergotropy.unwrap_or(false);
    let initial = BatteryState::ground(battery.dim());
    let budget = |n: usize| Budget::KTau(60.0 / n as f64);
    let na_list = cfg.na_list.clone().unwrap_or_else(|| vec![1, 2, 4]);

    // (a) power against θ₀ at τ = 0.01
    let thetas_a = Grid {
        min: 0.0,
        max: PI,
        count: 17,
    }
    .points();
    let points_a: Vec<PointSpec> = na_list
        .iter()
        .flat_map(|&n| {
            thetas_a.iter().map(move |&theta0| PointSpec {
                n_atoms: n,
                theta0,
                tau: 0.01,
                coherence: 1.0,
                budget: budget(n),
            })
        })
        .collect();
    let rows_a = evaluate_points(ctx, &battery, phi0, &points_a, ergotropy, &initial);

    // (b) power against N_A at θ₀ = π/8, plus the θ₀ = π/2 reference
    let na_b: Vec<usize> = (1..=10).collect();
    let series_b = [
        (FRAC_PI_8, 0.01),
        (FRAC_PI_8, 0.3),
        (FRAC_PI_8, 0.88),
        (FRAC_PI_2, 0.01),
    ];
    let points_b: Vec<PointSpec> = series_b
        .iter()
        .flat_map(|&(theta0, tau)| {
            na_b.iter().map(move |&n| PointSpec {
                n_atoms: n,
                theta0,
                tau,
                coherence: 1.0,
                budget: budget(n),
            })
        })
        .collect();
    let rows_b = evaluate_points(ctx, &battery, phi0, &points_b, ergotropy, &initial);

    // (c) (θ₀, τ) heatmap for N_A = 10
    let n_c = cfg.n_atoms.unwrap_or(10);
    let thetas_c = cfg
        .theta_grid(Grid {
            min: 0.0,
            max: FRAC_PI_2,
            count: 9,
        })
        .points();
    let taus_c = cfg
        .tau_grid(Grid {
            min: 0.05,
            max: 1.5,
            count: 9,
        })
        .points();
    let points_c: Vec<PointSpec> = thetas_c
        .iter()
        .flat_map(|&theta0| {
            taus_c.iter().map(move |&tau| PointSpec {
                n_atoms: n_c,
                theta0,
                tau,
                coherence: 1.0,
                budget: budget(n_c),
            })
        })
        .collect();
    let rows_c = evaluate_points(ctx, &battery, phi0, &points_c, ergotropy, &initial);

    let mut a = Table::new(SCAN_HEADER);
    rows_a.into_iter().for_each(|r| a.push(r));
    let mut header_b = vec!["series"];
    header_b.extend_from_slice(SCAN_HEADER);
    let mut b = Table::new(&header_b);
    for (i, r) in rows_b.into_iter().enumerate() {
        let mut row = vec![(i / na_b.len()).to_string()];
        row.extend(r);
        b.push(row);
    }
    let power_col = SCAN_HEADER
        .iter()
        .position(|h| *h == "power_scaled")
        .expect("power column");
    let mut ridge = Table::new(&[
        "theta0",
        "tau_sim_argmax",
        "power_scaled_max",
        "tau_ridge",
        "tau_ridge_linear",
    ]);
    for (i, &theta0) in thetas_c.iter().enumerate() {
        let rows = &rows_c[i * taus_c.len()..(i + 1) * taus_c.len()];
        let best = rows
            .iter()
            .zip(&taus_c)
            .filter_map(|(r, tau)| r[power_col].parse::<f64>().ok().map(|p| (p, *tau)))
            .max_by(|x, y| x.0.total_cmp(&y.0));
        ridge.push(vec![
            num(theta0),
            best.map(|(_, t)| num(t)).unwrap_or_default(),
            best.map(|(p, _)| num(p)).unwrap_or_default(),
            num(ridge_tau(theta0)),
            num(ridge_tau_linear(theta0)),
        ]);
    }
    let mut c = Table::new(SCAN_HEADER);
    rows_c.into_iter().for_each(|r| c.push(r));

    // (d) analytic bound per atom
    let mut d = Table::new(&["theta0", "tau", "bound_scaled", "unphysical"]);
    let thetas_d = Grid {
        min: 0.0,
        max: PI,
        count: 41,
    }
    .points();
    let taus_d = Grid {
        min: 0.01,
        max: PI,
        count: 41,
    }
    .points();
    let unit = |theta0: f64| AtomEnsembleSpec::coherent(1, theta0);
    for &theta0 in &thetas_d {
        let atoms = unit(theta0)?;
        for &tau in &taus_d {
            let bound = power_upper_bound(&atoms, tau);
            d.push(vec![
                num(theta0),
                num(tau),
                num(bound.value),
                u8::from(bound.unphysical).to_string(),
            ]);
        }
    }

    let mut out = OutDir::create(&ctx.out)?;
    out.table("fig4a.csv", &a)?;
    out.table("fig4b.csv", &b)?;
    out.table("fig4c.csv", &c)?;
    out.table("fig4c_ridge.csv", &ridge)?;
    out.table("fig4d.csv", &d)?;
    let meta = json!({
        "scenario": "figure4",
        "version": env!("CARGO_PKG_VERSION"),
        "numeric_tolerance": ctx.tolerances.scale,
        "n_b": battery.top_level(),
        "k_tau": "60 / n_atoms",
        "panel_a": { "tau": 0.01, "n_atoms": na_list, "theta0": thetas_a },
        "panel_b": {
            "n_atoms": na_b,
            "series": series_b.iter().enumerate().map(|(i, (t, tau))| json!({ "series": i, "theta0": t, "tau": tau })).collect::<Vec<_>>(),
        },
        "panel_c": { "n_atoms": n_c, "theta0": thetas_c, "tau": taus_c },
        "panel_d": { "theta0": [0.0, PI, 41], "tau": [0.01, PI, 41], "unphysical": "tau + theta0 > pi" },
    });
    out.sidecar("fig4.json", meta)?;
    Ok(())
}

pub fn figure5(cfg: &ExperimentConfig, ctx: &Context) -> Result<(), CliError> {
    let battery = battery(cfg, 200)?;
    let theta0 = cfg.theta0.unwrap_or(FRAC_PI_2);
    let phi0 = cfg.phi0.unwrap_or(0.0);
    let na_list = cfg.na_list.clone().unwrap_or_else(|| vec![1, 4]);
    let k_tau_max = match cfg.budget {
        Some(Budget::KTau(kt)) => kt,
        None => 15.0,
        Some(other) => {
            return Err(CliError::Validation(format!(
                "figure5 accepts only k_tau_budget, got {other:?}"
            )))
        }
    };
    let taus = [0.01, 0.1, 0.3];
    let mut runs = Vec::new();
    for &n in &na_list {
        let atoms = AtomEnsembleSpec::new(n, theta0, phi0, 1.0)?;
        for &tau in &taus {
            let steps = (k_tau_max / tau).round() as usize;
            runs.push((atoms, tau, steps, (steps / 150).max(1)));
        }
    }
    let trajectories = runs
        .par_iter()
        .map(|(atoms, tau, steps, stride)| run(ctx, &battery, atoms, *tau, *steps, *stride, true))
        .collect::<spincharge::Result<Vec<_>>>()?;

    let mut table = Table::new(&[
        "n_atoms",
        "tau",
        "k",
        "k_tau",
        "power_scaled",
        "ergotropy_power_scaled",
        "purity",
        "power_coh_pred_scaled",
    ]);
    for ((atoms, tau, _, _), traj) in runs.iter().zip(&trajectories) {
        let n = atoms.n_atoms() as f64;
        for s in traj.steps.iter().filter(|s| s.k > 0) {
            table.push(vec![
                atoms.n_atoms().to_string(),
                num(*tau),
                s.k.to_string(),
                num(s.k_tau),
                num(s.power / n),
                num(s.ergotropy_power.unwrap_or(f64::NAN) / n),
                num(s.purity),
                num(coherent_power(s.k_tau, atoms) / n),
            ]);
        }
    }
    let mut reference = Table::new(&["label", "tau", "value_scaled"]);
    let pole = AtomEnsembleSpec::incoherent(1, 0.0)?;
    for &tau in &taus {
        reference.push(vec![
            "p_inc".into(),
            num(tau),
            num(incoherent_power(tau, &pole)),
        ]);
    }
    let tau0 = incoherent_optimal_tau();
    reference.push(vec![
        "p_inc_max".into(),
        num(tau0),
        num(incoherent_power_max(1)),
    ]);

    let mut out = OutDir::create(&ctx.out)?;
    out.table("fig5.csv", &table)?;
    out.table("fig5_reference.csv", &reference)?;
    let meta = json!({
        "scenario": "figure5",
        "version": env!("CARGO_PKG_VERSION"),
        "numeric_tolerance": ctx.tolerances.scale,
        "parameters": { "n_b": battery.top_level(), "n_atoms": na_list, "theta0": theta0, "phi0": phi0, "tau": taus, "k_tau_max": k_tau_max },
        "record_rule": "every max(1, steps / 150)-th step and the last step",
    });
    out.sidecar("fig5.json", meta)?;
    Ok(())
}
