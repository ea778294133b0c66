mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

use proptest::prelude::*;

use spincharge::collision::{
    build_unitary_blocks, dense_unitary, displacement_evolve, joint_reference_step,
};
use spincharge::linalg::{self, max_abs_diff, trace_distance};
use spincharge::observables::excitation_stats;
use spincharge::operators::{build_joint_operators, coherent_spin_state, AtomState};
use spincharge::{
    apply_collision, build_channel, build_channel_for_state, run_trajectory, AtomEnsembleSpec,
    BatterySpec, BatteryState, RunOptions, Tolerances,
};

fn random_atom_state(rng: &mut rand_chacha::ChaCha8Rng, dim: usize, rank: usize) -> AtomState {
    AtomState::new(common::random_density(rng, dim, rank).into_matrix()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn channel_equals_joint_evolution(
        seed in any::<u64>(),
        top in 1usize..=12,
        n_atoms in 1usize..=4,
        tau in -2.0f64..2.0,
        rank_b in 1usize..4,
        rank_a in 1usize..4,
    ) {
        let mut rng = common::rng(seed);
        let battery = BatterySpec::with_top(top).unwrap();
        let atoms = AtomEnsembleSpec::coherent(n_atoms, 0.5).unwrap();
        let rho_b = common::random_density(&mut rng, top + 1, rank_b);
        let rho_a = random_atom_state(&mut rng, n_atoms + 1, rank_a);
        let channel = build_channel_for_state(&battery, &atoms, &rho_a, tau).unwrap();
        prop_assert!(channel.completeness_deviation() <= 1e-10);

        let u = dense_unitary(&battery, &atoms, tau).unwrap();
        let reference = joint_reference_step(&rho_b, &rho_a, &u);
        let out = apply_collision(&rho_b, &channel).unwrap();
        prop_assert!(max_abs_diff(out.matrix(), &reference) <= 1e-10);
        prop_assert!((out.trace().re - 1.0).abs() <= 1e-10);
        prop_assert!(out.min_eigenvalue() >= -1e-9);
    }

    #[test]
    fn joint_excitation_number_is_conserved(
        seed in any::<u64>(),
        top in 1usize..=12,
        n_atoms in 1usize..=4,
        tau in -3.0f64..3.0,
    ) {
        let mut rng = common::rng(seed);
        let battery = BatterySpec::with_top(top).unwrap();
        let atoms = AtomEnsembleSpec::coherent(n_atoms, 1.0).unwrap();
        let ops = build_joint_operators(&battery, &atoms).unwrap();
        let rho_b = common::random_density(&mut rng, top + 1, 3);
        let rho_a = random_atom_state(&mut rng, n_atoms + 1, 2);
        let joint = linalg::kron(rho_a.matrix(), rho_b.matrix());
        let u = build_unitary_blocks(&battery, &atoms, tau).unwrap().to_dense();
        let evolved = &u * &joint * u.adjoint();
        let before = linalg::trace(&(&joint * &ops.excitations)).re;
        let after = linalg::trace(&(&evolved * &ops.excitations)).re;
        prop_assert!((before - after).abs() <= 1e-9);
    }

    #[test]
    fn blocks_reassemble_the_dense_exponential(
        top in 1usize..=10,
        n_atoms in 1usize..=5,
        tau in -2.5f64..2.5,
    ) {
        let battery = BatterySpec::with_top(top).unwrap();
        let atoms = AtomEnsembleSpec::coherent(n_atoms, 0.3).unwrap();
        let blocks = build_unitary_blocks(&battery, &atoms, tau).unwrap().to_dense();
        let dense = dense_unitary(&battery, &atoms, tau).unwrap();
        prop_assert!(max_abs_diff(&blocks, &dense) <= 1e-9);
        let id = linalg::identity(blocks.nrows());
        prop_assert!(max_abs_diff(&(&blocks * blocks.adjoint()), &id) <= 1e-10);
    }

    #[test]
    fn incoherent_charger_keeps_diagonal_states_diagonal(
        seed in any::<u64>(),
        top in 1usize..=12,
        n_atoms in 1usize..=4,
        theta in 0.0f64..PI,
        tau in 0.0f64..3.0,
    ) {
        let mut rng = common::rng(seed);
        let pops = common::random_density(&mut rng, top + 1, top + 1).populations();
        let rho_b = BatteryState::diagonal(&pops).unwrap();
        let battery = BatterySpec::with_top(top).unwrap();
        let atoms = AtomEnsembleSpec::incoherent(n_atoms, theta).unwrap();
        let out = build_channel(&battery, &atoms, tau).unwrap().apply_unchecked(&rho_b);
        let m = out.matrix();
        for r in 0..=top {
            for c in 0..=top {
                if r != c {
                    prop_assert!(m[(r, c)].norm() <= 1e-12);
                }
            }
        }
    }
}

#[test]
fn trace_is_preserved_over_ten_thousand_steps() {
    let battery = BatterySpec::with_top(24).unwrap();
    let atoms = AtomEnsembleSpec::coherent(3, 1.2).unwrap();
    let channel = build_channel(&battery, &atoms, 0.4).unwrap();
    let tol = Tolerances::default();
    let mut state = BatteryState::ground(25);
    for k in 1..=10_000 {
        state = apply_collision(&state, &channel).unwrap();
        assert!((state.trace().re - 1.0).abs() <= 1e-9, "k {k}");
        if k % 500 == 0 {
            assert!(state.min_eigenvalue() >= -1e-8, "k {k}");
            state.validate(&tol).unwrap();
        }
    }
}

#[test]
fn full_battery_is_fixed_under_excited_charger() {
    let battery = BatterySpec::with_top(15).unwrap();
    for n_atoms in [1, 3, 6] {
        let atoms = AtomEnsembleSpec::coherent(n_atoms, 0.0).unwrap();
        let out = build_channel(&battery, &atoms, 0.7)
            .unwrap()
            .apply_unchecked(&BatteryState::fock(16, 15));
        assert!((excitation_stats(&out).n_bar - 15.0).abs() < 1e-12);
    }
}

#[test]
fn identity_channel_leaves_state_unchanged() {
    let mut rng = common::rng(7);
    let battery = BatterySpec::with_top(9).unwrap();
    let atoms = AtomEnsembleSpec::coherent(3, 1.0).unwrap();
    let channel = build_channel(&battery, &atoms, 0.0).unwrap();
    assert_eq!(channel.kraus_ops().len(), 1);
    let rho = common::random_density(&mut rng, 10, 4);
    assert!(
        max_abs_diff(
            apply_collision(&rho, &channel).unwrap().matrix(),
            rho.matrix()
        ) < 1e-15
    );
}

#[test]
fn pure_charger_kraus_count() {
    let battery = BatterySpec::with_top(9).unwrap();
    for n_atoms in 1..=6 {
        let atoms = AtomEnsembleSpec::coherent(n_atoms, 0.9).unwrap();
        assert_eq!(
            build_channel(&battery, &atoms, 0.3)
                .unwrap()
                .kraus_ops()
                .len(),
            n_atoms + 1
        );
    }
}

#[test]
fn kraus_bandwidth_is_bounded_by_spin_dimension() {
    let battery = BatterySpec::with_top(20).unwrap();
    let atoms = AtomEnsembleSpec::new(4, 1.1, 0.5, 0.6).unwrap();
    let channel = build_channel(&battery, &atoms, 0.8).unwrap();
    for k in channel.kraus_ops() {
        assert!(k.bandwidth() <= 5);
        for band in k.bands() {
            assert!(band.offset.unsigned_abs() <= 4);
        }
    }
}

#[test]
fn displacement_approaches_exact_dynamics_as_tau_shrinks() {
    let battery = BatterySpec::with_top(40).unwrap();
    let atoms = AtomEnsembleSpec::coherent(2, FRAC_PI_2).unwrap();
    let k_tau: f64 = 1.0;
    let ground = BatteryState::ground(41);
    let mut distances = Vec::new();
    for tau in [0.1, 0.03, 0.01] {
        let steps = (k_tau / tau).round() as usize;
        let opts = RunOptions {
            stride: steps,
            ergotropy: false,
            ..RunOptions::default()
        };
        let channel = build_channel(&battery, &atoms, tau).unwrap();
        let mut exact = ground.clone();
        for _ in 0..steps {
            exact = channel.apply_unchecked(&exact);
        }
        let traj = run_trajectory(&battery, &atoms, tau, steps, &ground, &opts).unwrap();
        assert!((traj.last().n_bar - excitation_stats(&exact).n_bar).abs() < 1e-12);
        let approx = displacement_evolve(&ground, &atoms, tau, steps);
        distances.push(trace_distance(exact.matrix(), approx.matrix()));
    }
    assert!(distances.windows(2).all(|w| w[1] < w[0]), "{distances:?}");
}

#[test]
fn run_with_zero_steps_records_initial_state() {
    let battery = BatterySpec::with_top(10).unwrap();
    let atoms = AtomEnsembleSpec::coherent(2, 1.0).unwrap();
    let t = run_trajectory(
        &battery,
        &atoms,
        0.3,
        0,
        &BatteryState::fock(11, 3),
        &RunOptions::default(),
    )
    .unwrap();
    assert_eq!(t.steps.len(), 1);
    assert_eq!(t.steps[0].k, 0);
    assert!((t.steps[0].n_bar - 3.0).abs() < 1e-15);
}

#[test]
fn incoherent_gain_is_exactly_v_between_boundaries() {
    let battery = BatterySpec::with_top(200).unwrap();
    let atoms = AtomEnsembleSpec::incoherent(10, FRAC_PI_3).unwrap();
    let opts = RunOptions {
        ergotropy: false,
        ..RunOptions::default()
    };
    // from |100⟩, eight collisions shift at most 80 levels either way
    let t = run_trajectory(
        &battery,
        &atoms,
        PI / 4.0,
        8,
        &BatteryState::fock(201, 100),
        &opts,
    )
    .unwrap();
    for s in &t.steps {
        assert!(
            (s.n_bar - 100.0 - 2.5 * s.k as f64).abs() < 1e-10,
            "k {}",
            s.k
        );
    }
}

#[test]
fn incoherent_charge_from_vacuum_follows_v_until_boundaries_matter() {
    let battery = BatterySpec::with_top(200).unwrap();
    let atoms = AtomEnsembleSpec::incoherent(10, FRAC_PI_3).unwrap();
    let opts = RunOptions {
        ergotropy: false,
        ..RunOptions::default()
    };
    let t = run_trajectory(
        &battery,
        &atoms,
        PI / 4.0,
        40,
        &BatteryState::ground(201),
        &opts,
    )
    .unwrap();
    let last = t.last();
    assert!(last.p0 < 1e-3 && last.p_top < 1e-3);
    let slope = (last.n_bar - t.steps[20].n_bar) / 20.0;
    assert!((slope - 2.5).abs() < 0.05 * 2.5, "slope {slope}");
}

#[test]
fn coherent_atom_state_has_expected_moments() {
    for (n, theta, phi) in [(1, 0.3, 0.0), (4, FRAC_PI_2, 1.0), (7, 2.5, 5.0)] {
        let atoms = AtomEnsembleSpec::new(n, theta, phi, 1.0).unwrap();
        let rho = coherent_spin_state(&atoms);
        let spin = spincharge::operators::build_spin_ops(&atoms);
        let j = n as f64 / 2.0;
        let jz = linalg::trace(&(rho.matrix() * &spin.z)).re;
        let jm = linalg::trace(&(rho.matrix() * &spin.minus));
        assert!((jz - j * theta.cos()).abs() < 1e-12);
        assert!((jm.norm() - j * theta.sin()).abs() < 1e-12);
        assert!((rho.purity() - 1.0).abs() < 1e-12);
    }
}
