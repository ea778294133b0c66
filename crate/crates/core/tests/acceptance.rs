//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero when any criterion fails.

mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_8, PI};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::Rng;

use spincharge::closed_form::{
    coherent_power, incoherent_optimal_tau, incoherent_power, n_bar_discrete, ridge_tau,
    ridge_tau_linear, vacuum_moment, ClosedFormModel, F_INFINITY,
};
use spincharge::collision::{dense_unitary, joint_reference_step};
use spincharge::linalg::{self, max_abs_diff};
use spincharge::observables::excitation_stats;
use spincharge::operators::{build_joint_operators, coherent_spin_state};
use spincharge::special::{bessel_j1, catalan};
use spincharge::{
    apply_collision, build_channel, run_trajectory, AtomEnsembleSpec, BatterySpec, BatteryState,
    RunOptions, Tolerances, Trajectory,
};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new() -> Self {
        Self {
            pass: true,
            detail: String::new(),
        }
    }

    fn check(&mut self, ok: bool, what: String) {
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        self.detail.push_str(&what);
        if !ok {
            self.detail.push_str(" [x]");
            self.pass = false;
        }
    }
}

fn fast_options() -> RunOptions {
    RunOptions {
        ergotropy: false,
        positivity_every: 100,
        ..RunOptions::default()
    }
}

fn run(
    top: usize,
    atoms: AtomEnsembleSpec,
    tau: f64,
    steps: usize,
    opts: &RunOptions,
) -> Trajectory {
    let battery = BatterySpec::with_top(top).unwrap();
    run_trajectory(
        &battery,
        &atoms,
        tau,
        steps,
        &BatteryState::ground(top + 1),
        opts,
    )
    .expect("trajectory runs")
}

fn steps_for(k_tau: f64, tau: f64) -> usize {
    (k_tau / tau).round() as usize
}

/// Full-charge timing at `τ = π/4`.
fn criterion_1() -> Outcome {
    let mut out = Outcome::new();
    let battery = BatterySpec::with_top(200).unwrap();
    for (label, c, target, window) in [("coherent", 1.0, 23.6, 2.0), ("incoherent", 0.0, 62.8, 3.0)]
    {
        let atoms = AtomEnsembleSpec::new(10, FRAC_PI_3, 0.0, c).unwrap();
        let model = ClosedFormModel::new(battery, atoms, FRAC_PI_4);
        let k_est = model.k_est().unwrap() as usize;
        let t = run(200, atoms, FRAC_PI_4, 2 * k_est, &fast_options());
        let peak = t.argmax_n_bar();
        out.check(
            (peak.k_tau - target).abs() <= window,
            format!(
                "{label}: argmax n_bar at k_tau = {:.2} (k = {}, n_bar = {:.2}) over k <= {}, target {target} +- {window}",
                peak.k_tau,
                peak.k,
                peak.n_bar,
                2 * k_est
            ),
        );
    }
    out
}

/// Closed-form excitation law at `τ = 0.01`.
fn criterion_2() -> Outcome {
    let mut out = Outcome::new();
    let top = 200;
    let nb = top as f64;
    let battery = BatterySpec::with_top(top).unwrap();
    let atoms = AtomEnsembleSpec::coherent(10, FRAC_PI_3).unwrap();
    let tau = 0.01;
    let model = ClosedFormModel::new(battery, atoms, tau);
    let k_est = model.k_est().unwrap() as usize;
    let t = run(top, atoms, tau, k_est, &fast_options());
    let predictions = t.predictions.as_ref().unwrap();
    let max_dev = t
        .steps
        .iter()
        .zip(predictions)
        .map(|(s, p)| (s.n_bar - p.n_bar).abs())
        .fold(0.0, f64::max);
    out.check(
        max_dev <= 0.03 * nb,
        format!(
            "max |n_bar_discrete - exact| = {:.4} N_B over k <= k_est = {k_est}",
            max_dev / nb
        ),
    );
    let discrete = n_bar_discrete(k_est, model.drift.alpha) / nb;
    out.check(
        (0.80..=0.84).contains(&discrete),
        format!("n_bar_discrete(k_est) = {discrete:.4} N_B, band [0.80, 0.84]"),
    );
    let exact = t.last().n_bar / nb;
    out.check(
        (0.84..=0.90).contains(&exact),
        format!("exact n_bar(k_est) = {exact:.4} N_B, band [0.84, 0.90]"),
    );
    out
}

/// Coherent power optimum at `θ₀ = π/2`.
fn criterion_3() -> Outcome {
    let mut out = Outcome::new();
    let tau = 0.01;
    for n_atoms in [1usize, 2, 4] {
        let atoms = AtomEnsembleSpec::coherent(n_atoms, FRAC_PI_2).unwrap();
        let steps = steps_for(60.0 / n_atoms as f64, tau);
        let opts = RunOptions {
            stride: steps,
            ..fast_options()
        };
        let t = run(200, atoms, tau, steps, &opts);
        let last = t.last();
        let simulated = last.power / n_atoms as f64;
        let predicted = coherent_power(last.k_tau, &atoms) / n_atoms as f64;
        out.check(
            (simulated - predicted).abs() <= 0.02,
            format!(
                "N_A={n_atoms}: P/N_A = {simulated:.4} vs sin(theta0) f(x) = {predicted:.4}, 8/(3pi) - P/N_A = {:.4}",
                F_INFINITY - simulated
            ),
        );
    }
    out
}

/// Incoherent optimum.
fn criterion_4() -> Outcome {
    let mut out = Outcome::new();
    let tau0 = incoherent_optimal_tau();
    let residual = tau0 / tau0.tan() - 0.5;
    out.check(
        residual.abs() <= 1e-9 && (tau0 * 100.0).round() / 100.0 == 1.17,
        format!("tau0 = {tau0:.10}, tau0 cot tau0 - 1/2 = {residual:.1e}"),
    );
    let n_atoms = 10;
    let atoms = AtomEnsembleSpec::incoherent(n_atoms, 0.0).unwrap();
    let p_inc = incoherent_power(tau0, &atoms) / n_atoms as f64;
    out.check(
        (p_inc - 0.72).abs() <= 0.01,
        format!("P_inc(tau0)/N_A = {p_inc:.4}"),
    );

    let v = 2.0 * atoms.j() * tau0.sin().powi(2);
    let steps = (10.0 / tau0).floor() as usize;
    let t = run(200, atoms, tau0, steps, &RunOptions::default());
    let mut worst = 0.0f64;
    let mut max_top = 0.0f64;
    for pair in t.steps.windows(2) {
        worst = worst.max(((pair[1].n_bar - pair[0].n_bar) - v).abs() / v);
        max_top = max_top.max(pair[1].p_top);
    }
    out.check(
        worst <= 0.02 && max_top <= 1e-3,
        format!("{steps} steps: max relative gain error {worst:.2e} vs v = {v:.4}, max p_top = {max_top:.1e}"),
    );
    out
}

/// Ridge law and the power held at `θ₀ = π/8`.
fn criterion_5() -> Outcome {
    let mut out = Outcome::new();
    for theta in [FRAC_PI_8, FRAC_PI_4, 3.0 * FRAC_PI_8] {
        let numeric = ridge_tau(theta);
        let linear = ridge_tau_linear(theta);
        out.check(
            (numeric - linear).abs() <= 0.05,
            format!("theta0 = {theta:.4}: ridge {numeric:.4} vs linear {linear:.4}"),
        );
    }
    for n_atoms in [1usize, 2, 4] {
        let atoms = AtomEnsembleSpec::coherent(n_atoms, FRAC_PI_8).unwrap();
        let budget = 60.0 / n_atoms as f64;
        let power = |tau: f64| {
            let steps = steps_for(budget, tau);
            let opts = RunOptions {
                stride: steps,
                ..fast_options()
            };
            run(200, atoms, tau, steps, &opts).last().power / n_atoms as f64
        };
        let fast = power(0.88);
        let slow = power(0.01);
        out.check(
            fast > slow && (fast - 0.85).abs() <= 0.15 * 0.85,
            format!("N_A={n_atoms}: P/N_A(tau=0.88) = {fast:.4}, P/N_A(tau=0.01) = {slow:.4}"),
        );
    }
    out
}

/// Ergotropy against stored energy.
fn criterion_6() -> Outcome {
    let mut out = Outcome::new();
    let n_atoms = 4;
    let atoms = AtomEnsembleSpec::coherent(n_atoms, FRAC_PI_2).unwrap();
    let battery = BatterySpec::with_top(200).unwrap();

    let tau = 0.01;
    let k_est = ClosedFormModel::new(battery, atoms, tau).k_est().unwrap() as usize;
    let steps = k_est / 10;
    let t = run(200, atoms, tau, steps, &RunOptions::default());
    let mut min_purity = f64::INFINITY;
    let mut worst = 0.0f64;
    for s in t.steps.iter().skip(1) {
        min_purity = min_purity.min(s.purity);
        worst = worst.max((s.ergotropy_power.unwrap() - s.power).abs() / s.power);
    }
    out.check(
        min_purity >= 0.99 && worst <= 0.02,
        format!(
            "tau=0.01, k <= {steps}: min purity {min_purity:.5}, max |P_erg - P|/P = {worst:.2e}"
        ),
    );

    let tau = 0.3;
    let steps = steps_for(60.0 / n_atoms as f64, tau);
    let t = run(200, atoms, tau, steps, &RunOptions::default());
    let mut ordered = true;
    let mut min_gap = f64::INFINITY;
    for s in t.steps.iter().skip(1) {
        let erg = s.ergotropy_power.unwrap();
        ordered &= erg <= s.power + 1e-9;
        if s.k_tau > 5.0 {
            ordered &= erg < s.power;
            min_gap = min_gap.min((s.power - erg) / s.power);
        }
    }
    out.check(
        ordered && min_gap >= 0.01,
        format!("tau=0.3, k_tau <= {:.1}: P_erg <= P holds = {ordered}, min gap beyond k_tau 5 = {min_gap:.4}", t.last().k_tau),
    );
    out
}

/// Combinatorial and special-function oracles.
fn criterion_7() -> Outcome {
    let mut out = Outcome::new();
    let mut worst = 0.0f64;
    for alpha in [
        Complex64::new(0.1, 0.0),
        Complex64::new(0.0, 0.7),
        Complex64::new(0.6, -0.8),
        Complex64::new(1.3, 0.4),
    ] {
        for n in 0..=8u32 {
            let oracle = common::ladder_moment_oracle(n as usize, alpha);
            let value = vacuum_moment(n, alpha);
            worst = worst.max((value - oracle.re).abs().max(oracle.im.abs()) / oracle.norm());
        }
    }
    out.check(
        worst <= 1e-10,
        format!("vacuum moments n <= 8: max rel err {worst:.1e}"),
    );

    let mut worst = 0.0f64;
    for i in 0..=300 {
        let x = 3.0 * i as f64 / 300.0;
        let closed = if x == 0.0 {
            1.0
        } else {
            bessel_j1(2.0 * x) / x
        };
        worst = worst.max((common::catalan_series(x, 40) - closed).abs());
    }
    out.check(
        worst <= 1e-9,
        format!("Catalan series vs J1(2x)/x on [0, 3]: max err {worst:.1e}"),
    );
    out.check(catalan(3) == 5u32.into(), format!("C_3 = {}", catalan(3)));
    out
}

/// Channel property suite on randomized small instances.
fn criterion_8() -> Outcome {
    let mut out = Outcome::new();
    let tol = Tolerances::default();
    let mut rng = common::rng(0x5eed_c0111);
    let mut worst_trace = 0.0f64;
    let mut worst_min_eig = 0.0f64;
    let mut worst_completeness = 0.0f64;
    let mut worst_conservation = 0.0f64;
    let mut worst_joint = 0.0f64;
    let mut worst_offdiag = 0.0f64;
    let mut worst_beta = 0.0f64;
    for _ in 0..50 {
        let top = rng.random_range(1..=12usize);
        let n_atoms = rng.random_range(1..=4usize);
        let theta = rng.random_range(0.0..=PI);
        let phi = rng.random_range(0.0..2.0 * PI);
        let c = rng.random_range(0.0..=1.0);
        let tau = rng.random_range(0.05..3.0);
        let battery = BatterySpec::with_top(top).unwrap();
        let atoms = AtomEnsembleSpec::new(n_atoms, theta, phi, c).unwrap();
        let rank = rng.random_range(1..=top + 1);
        let rho = common::random_density(&mut rng, top + 1, rank);

        let channel = build_channel(&battery, &atoms, tau).unwrap();
        worst_completeness = worst_completeness.max(channel.completeness_deviation());
        let next = apply_collision(&rho, &channel).unwrap();
        worst_trace = worst_trace.max((next.trace().re - 1.0).abs());
        worst_min_eig = worst_min_eig.min(next.min_eigenvalue());

        let atom_state = coherent_spin_state(&atoms);
        let u = dense_unitary(&battery, &atoms, tau).unwrap();
        let reference = joint_reference_step(&rho, &atom_state, &u);
        worst_joint = worst_joint.max(max_abs_diff(next.matrix(), &reference));

        let ops = build_joint_operators(&battery, &atoms).unwrap();
        let joint = linalg::kron(atom_state.matrix(), rho.matrix());
        let evolved = &u * &joint * u.adjoint();
        let before = linalg::trace(&(&joint * &ops.excitations)).re;
        let after = linalg::trace(&(&evolved * &ops.excitations)).re;
        worst_conservation = worst_conservation.max((after - before).abs());

        let incoherent = AtomEnsembleSpec::new(n_atoms, theta, phi, 0.0).unwrap();
        let diag_channel = build_channel(&battery, &incoherent, tau).unwrap();
        let diag = BatteryState::diagonal(&rho.populations()).unwrap();
        let mapped = apply_collision(&diag, &diag_channel).unwrap();
        let m = mapped.matrix();
        for r in 0..m.nrows() {
            for col in 0..m.ncols() {
                if r != col {
                    worst_offdiag = worst_offdiag.max(m[(r, col)].norm());
                }
            }
        }

        let t = run_trajectory(&battery, &atoms, tau, 20, &rho, &RunOptions::default()).unwrap();
        for s in &t.steps {
            worst_beta = worst_beta.max(s.beta.norm());
        }
        worst_beta = worst_beta.max(excitation_stats(&rho).beta.norm());
    }
    out.check(
        worst_trace <= tol.trace(),
        format!("trace {worst_trace:.1e}"),
    );
    out.check(
        worst_min_eig >= -tol.positivity(),
        format!("min eigenvalue {worst_min_eig:.1e}"),
    );
    out.check(
        worst_completeness <= tol.completeness(),
        format!("completeness {worst_completeness:.1e}"),
    );
    out.check(
        worst_conservation <= 1e-9,
        format!("<J_z + n> drift {worst_conservation:.1e}"),
    );
    out.check(
        worst_joint <= 1e-10,
        format!("channel vs joint {worst_joint:.1e}"),
    );
    out.check(
        worst_offdiag <= 1e-12,
        format!("c=0 off-diagonal {worst_offdiag:.1e}"),
    );
    out.check(
        worst_beta <= 1.0 + 1e-12,
        format!("max |beta| {worst_beta:.6}"),
    );
    out
}

type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        (
            1,
            "full-charge timing",
            Duration::from_secs(30),
            criterion_1,
        ),
        (
            2,
            "closed-form excitation law",
            Duration::from_secs(60),
            criterion_2,
        ),
        (
            3,
            "coherent power optimum",
            Duration::from_secs(60),
            criterion_3,
        ),
        (
            4,
            "incoherent optimum",
            Duration::from_secs(20),
            criterion_4,
        ),
        (5, "ridge law", Duration::from_secs(60), criterion_5),
        (
            6,
            "ergotropy agreement",
            Duration::from_secs(60),
            criterion_6,
        ),
        (
            7,
            "combinatorial oracles",
            Duration::from_secs(5),
            criterion_7,
        ),
        (
            8,
            "channel properties",
            Duration::from_secs(60),
            criterion_8,
        ),
    ];
    let mut failures = 0;
    for (id, name, budget, f) in criteria {
        let start = Instant::now();
        let mut outcome = f();
        let elapsed = start.elapsed();
        outcome.check(
            elapsed <= budget,
            format!("{:.1}s of {}s", elapsed.as_secs_f64(), budget.as_secs()),
        );
        let status = if outcome.pass { "PASS" } else { "FAIL" };
        if !outcome.pass {
            failures += 1;
        }
        println!("{status} criterion {id} ({name}): {}", outcome.detail);
    }
    println!("{} of 8 criteria passed", 8 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
