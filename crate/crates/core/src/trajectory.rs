//! Repeated collisions with per-step observables and analytic companions.

use num_complex::Complex64;

use crate::closed_form::ClosedFormModel;
use crate::collision::{apply_collision, build_channel, CollisionChannel};
use crate::error::{Error, Result};
use crate::observables::{excitation_stats, StepObservables};
use crate::operators::{AtomEnsembleSpec, BatterySpec};
use crate::state::BatteryState;
use crate::tolerance::Tolerances;

/// How much work to do per step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Record every `stride`-th step (the last step is always recorded).
    pub stride: usize,
    /// Evaluate ergotropy on recorded steps. Costs one eigensolve each.
    pub ergotropy: bool,
    /// Full positivity check every this many steps; 0 disables it.
    pub positivity_every: usize,
    pub tolerances: Tolerances,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            stride: 1,
            ergotropy: true,
            positivity_every: 50,
            tolerances: Tolerances::default(),
        }
    }
}

/// Parameters a trajectory was produced with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunParameters {
    pub battery: BatterySpec,
    pub atoms: AtomEnsembleSpec,
    pub tau: f64,
    pub steps: usize,
}

/// Closed-form companion values for one recorded step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Companion {
    pub n_bar: f64,
    pub beta: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: RunParameters,
    pub steps: Vec<StepObservables>,
    /// `None` when the initial battery is not the vacuum, where the
    /// closed forms do not apply.
    pub predictions: Option<Vec<Companion>>,
}

impl Trajectory {
    pub fn last(&self) -> &StepObservables {
        self.steps.last().expect("a trajectory records step 0")
    }

    /// Step with the largest `n̄` (first one on ties).
    pub fn argmax_n_bar(&self) -> &StepObservables {
        let mut best = &self.steps[0];
        for s in &self.steps {
            if s.n_bar > best.n_bar {
                best = s;
            }
        }
        best
    }
}

/// Simulates `steps` collisions from `initial` and records observables.
pub fn run_trajectory(
    battery: &BatterySpec,
    atoms: &AtomEnsembleSpec,
    tau: f64,
    steps: usize,
    initial: &BatteryState,
    options: &RunOptions,
) -> Result<Trajectory> {
    let channel = build_channel(battery, atoms, tau)?.with_tolerances(options.tolerances);
    run_with_channel(&channel, battery, steps, initial, options)
}

/// As [`run_trajectory`] with a prebuilt channel.
pub fn run_with_channel(
    channel: &CollisionChannel,
    battery: &BatterySpec,
    steps: usize,
    initial: &BatteryState,
    options: &RunOptions,
) -> Result<Trajectory> {
    if initial.dim() != battery.dim() {
        return Err(Error::DimensionMismatch {
            expected: battery.dim(),
            got: initial.dim(),
        });
    }
    if options.stride == 0 {
        return Err(Error::InvalidParameter("stride must be at least 1".into()));
    }
    let tol = options.tolerances;
    let tau = channel.tau();
    let n_bar_0 = excitation_stats(initial).n_bar;
    let record = |k: usize| k.is_multiple_of(options.stride) || k == steps;

    let mut out = Vec::with_capacity((steps / options.stride).saturating_add(2).min(1 << 16));
    let mut state = initial.clone();
    for k in 0..=steps {
        if k > 0 {
            state = apply_collision(&state, channel).map_err(|e| at_step(e, k))?;
            if options.positivity_every > 0 && (k % options.positivity_every == 0 || k == steps) {
                state.validate(&tol).map_err(|e| at_step(e, k))?;
            }
        }
        if record(k) {
            let obs =
                StepObservables::measure(&state, battery, k, tau, n_bar_0, options.ergotropy, &tol)
                    .map_err(|e| at_step(e, k))?;
            obs.check(battery.top_level(), &tol)
                .map_err(|reason| Error::InvariantViolation { step: k, reason })?;
            out.push(obs);
        }
    }

    let vacuum = initial.population(0) > 1.0 - 1e-12;
    let predictions = vacuum.then(|| {
        let model = ClosedFormModel::new(*battery, *channel.atoms(), tau);
        let all = model.predictions(steps);
        out.iter()
            .map(|s| Companion {
                n_bar: all[s.k].n_bar,
                beta: all[s.k].beta,
            })
            .collect()
    });

    Ok(Trajectory {
        params: RunParameters {
            battery: *battery,
            atoms: *channel.atoms(),
            tau,
            steps,
        },
        steps: out,
        predictions,
    })
}

fn at_step(e: Error, k: usize) -> Error {
    match e {
        Error::InvariantViolation { reason, .. } => Error::InvariantViolation { step: k, reason },
        Error::InvalidState(reason) => Error::InvariantViolation { step: k, reason },
        other => other,
    }
}
