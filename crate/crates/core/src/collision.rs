//! Exact single-collision evolution and the induced channel on the battery.
//!
//! The coupling `J₊B + J₋B†` conserves `m + n`, so the collision unitary
//! `U_τ = exp[−iτ(J₊B + J₋B†)]` is block diagonal over sectors of fixed
//! `q = n − s` (with `s = j − m`). Inside a sector the coupling is a real
//! symmetric tridiagonal matrix of dimension at most `2j + 1`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::{self, Band, KrausOperator};
use crate::linalg::{self, CMatrix, ZERO};
use crate::operators::{
    build_ladder_ops, check_joint_dim, coherent_spin_state, raising_coefficient, AtomEnsembleSpec,
    AtomState, BatterySpec,
};
use crate::state::BatteryState;
use crate::tolerance::Tolerances;

/// One conserved-excitation sector of `U_τ`.
#[derive(Debug, Clone)]
pub struct SectorBlock {
    /// `q = n − s`, constant inside the sector.
    pub label: isize,
    /// Smallest spin index `s` present in the sector.
    pub first_spin: usize,
    /// `exp(−iτT)` restricted to the sector, indexed by `s − first_spin`.
    pub unitary: CMatrix,
}

/// `U_τ` stored sector by sector.
#[derive(Debug, Clone)]
pub struct BlockUnitary {
    spin_dim: usize,
    battery_dim: usize,
    tau: f64,
    blocks: Vec<SectorBlock>,
}

impl BlockUnitary {
    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn blocks(&self) -> &[SectorBlock] {
        &self.blocks
    }

    pub fn spin_dim(&self) -> usize {
        self.spin_dim
    }

    pub fn battery_dim(&self) -> usize {
        self.battery_dim
    }

    /// `⟨s_out, n_out| U |s_in, n_in⟩` with `n_out = n_in + s_out − s_in`.
    ///
    /// Returns zero when `n_out` falls off the ladder.
    pub fn element(&self, s_out: usize, s_in: usize, n_in: usize) -> Complex64 {
        let n_out = n_in as isize + s_out as isize - s_in as isize;
        if n_out < 0 || n_out >= self.battery_dim as isize {
            return ZERO;
        }
        let label = n_in as isize - s_in as isize;
        let block = &self.blocks[(label + self.spin_dim as isize - 1) as usize];
        debug_assert_eq!(block.label, label);
        block.unitary[(s_out - block.first_spin, s_in - block.first_spin)]
    }

    /// Dense joint matrix in the `s·(N_B+1) + n` ordering.
    pub fn to_dense(&self) -> CMatrix {
        let nb = self.battery_dim;
        let dim = self.spin_dim * nb;
        let mut u = CMatrix::zeros(dim, dim);
        for block in &self.blocks {
            let len = block.unitary.nrows();
            for a in 0..len {
                for b in 0..len {
                    let (sa, sb) = (block.first_spin + a, block.first_spin + b);
                    let na = (block.label + sa as isize) as usize;
                    let nb_ = (block.label + sb as isize) as usize;
                    u[(sa * nb + na, sb * nb + nb_)] = block.unitary[(a, b)];
                }
            }
        }
        u
    }
}

/// Sector decomposition of `U_τ` via real-symmetric eigensolves of each block.
pub fn build_unitary_blocks(
    battery: &BatterySpec,
    atoms: &AtomEnsembleSpec,
    tau: f64,
) -> Result<BlockUnitary> {
    if !tau.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "tau must be finite, got {tau}"
        )));
    }
    check_joint_dim(battery, atoms)?;
    let spin_dim = atoms.spin_dim();
    let top = battery.top_level() as isize;
    let j = atoms.j();
    let two_j = spin_dim as isize - 1;

    let blocks = (-two_j..=top)
        .map(|label| {
            let first = (-label).max(0) as usize;
            let last = two_j.min(top - label) as usize;
            let len = last - first + 1;
            // ⟨s−1, n−1| J₊B |s, n⟩ = √(j(j+1) − m(m+1)), m = j − s
            let coupling = DMatrix::<f64>::from_fn(len, len, |a, b| {
                let (sa, sb) = (first + a, first + b);
                if sa + 1 == sb {
                    raising_coefficient(j, j - sb as f64)
                } else if sb + 1 == sa {
                    raising_coefficient(j, j - sa as f64)
                } else {
                    0.0
                }
            });
            let unitary = exp_minus_i_symmetric(coupling, tau);
            SectorBlock {
                label,
                first_spin: first,
                unitary,
            }
        })
        .collect();

    Ok(BlockUnitary {
        spin_dim,
        battery_dim: battery.dim(),
        tau,
        blocks,
    })
}

/// `exp(−iτT)` for real symmetric `T`.
fn exp_minus_i_symmetric(t: DMatrix<f64>, tau: f64) -> CMatrix {
    let n = t.nrows();
    if n == 1 {
        return CMatrix::from_element(1, 1, Complex64::from_polar(1.0, -tau * t[(0, 0)]));
    }
    let eig = t.symmetric_eigen();
    let v = &eig.eigenvectors;
    CMatrix::from_fn(n, n, |r, c| {
        (0..n)
            .map(|k| Complex64::from_polar(v[(r, k)] * v[(c, k)], -tau * eig.eigenvalues[k]))
            .sum()
    })
}

/// Dense `U_τ` by exponentiating the full joint coupling (reference path).
pub fn dense_unitary(battery: &BatterySpec, atoms: &AtomEnsembleSpec, tau: f64) -> Result<CMatrix> {
    let ops = crate::operators::build_joint_operators(battery, atoms)?;
    Ok(linalg::expm_hermitian(&ops.coupling, tau))
}

/// The per-collision channel `ρ_B ↦ Tr_A[U(ρ_B ⊗ ρ_A)U†]` in Kraus form.
///
/// Immutable after construction; share it freely between threads.
#[derive(Debug, Clone)]
pub struct CollisionChannel {
    tau: f64,
    dim: usize,
    atoms: AtomEnsembleSpec,
    kraus: Vec<KrausOperator>,
    tolerances: Tolerances,
}

impl CollisionChannel {
    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Charger parameters the channel was built from.
    pub fn atoms(&self) -> &AtomEnsembleSpec {
        &self.atoms
    }

    pub fn kraus_ops(&self) -> &[KrausOperator] {
        &self.kraus
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tolerances
    }

    pub fn with_tolerances(mut self, tolerances: Tolerances) -> Self {
        self.tolerances = tolerances;
        self
    }

    /// `‖Σ K†K − 1‖_max`.
    pub fn completeness_deviation(&self) -> f64 {
        let mut acc = CMatrix::zeros(self.dim, self.dim);
        for k in &self.kraus {
            k.accumulate_gram(&mut acc);
        }
        linalg::max_abs_diff(&acc, &linalg::identity(self.dim))
    }

    /// Applies the channel without re-validating the output.
    pub fn apply_unchecked(&self, state: &BatteryState) -> BatteryState {
        let out = kernel::apply_kraus(&self.kraus, state.matrix().as_slice(), self.dim);
        BatteryState::from_matrix_unchecked(CMatrix::from_vec(self.dim, self.dim, out))
    }

    /// Sequential kernel regardless of the `parallel` feature.
    pub fn apply_sequential(&self, state: &BatteryState) -> BatteryState {
        let out = kernel::apply_kraus_sequential(&self.kraus, state.matrix().as_slice(), self.dim);
        BatteryState::from_matrix_unchecked(CMatrix::from_vec(self.dim, self.dim, out))
    }
}

/// Eigen-decomposition of the charger state with clamping of tiny negative
/// eigenvalues. Returns `(p_i, χ_i)` with `p_i` renormalised to sum to one.
fn charger_ensemble(
    atom_state: &AtomState,
    tol: &Tolerances,
) -> Result<Vec<(f64, Vec<Complex64>)>> {
    let m = atom_state.matrix();
    let dim = m.nrows();
    let diagonal = (0..dim).all(|r| (0..dim).all(|c| r == c || m[(r, c)] == ZERO));
    let (values, vectors): (Vec<f64>, CMatrix) = if diagonal {
        (
            (0..dim).map(|i| m[(i, i)].re).collect(),
            linalg::identity(dim),
        )
    } else {
        linalg::hermitian_eigen(m)
    };
    let mut ensemble = Vec::new();
    for (i, &p) in values.iter().enumerate() {
        if !(p >= -tol.atom_clamp()) {
            return Err(Error::InvalidAtomState(p));
        }
        if p < tol.atom_drop() {
            continue;
        }
        ensemble.push((p, vectors.column(i).iter().copied().collect()));
    }
    let total: f64 = ensemble.iter().map(|(p, _)| p).sum();
    if !(total > 0.0) {
        return Err(Error::InvalidAtomState(0.0));
    }
    for (p, _) in ensemble.iter_mut() {
        *p /= total;
    }
    Ok(ensemble)
}

/// Channel for the coherent-spin charger described by `atoms`.
pub fn build_channel(
    battery: &BatterySpec,
    atoms: &AtomEnsembleSpec,
    tau: f64,
) -> Result<CollisionChannel> {
    build_channel_for_state(battery, atoms, &coherent_spin_state(atoms), tau)
}

/// Channel for an arbitrary charger state on spin `j = N_A/2`.
///
/// `K_{m′,i} = √p_i ⟨m′|U_τ|χ_i⟩` for every spin bra `m′` and every
/// eigenpair `(p_i, χ_i)` of `ρ_A` with `p_i ≥ 1e−14`.
pub fn build_channel_for_state(
    battery: &BatterySpec,
    atoms: &AtomEnsembleSpec,
    atom_state: &AtomState,
    tau: f64,
) -> Result<CollisionChannel> {
    let tolerances = Tolerances::default();
    if atom_state.dim() != atoms.spin_dim() {
        return Err(Error::DimensionMismatch {
            expected: atoms.spin_dim(),
            got: atom_state.dim(),
        });
    }
    let ensemble = charger_ensemble(atom_state, &tolerances)?;
    let dim = battery.dim();
    if tau == 0.0 {
        return Ok(CollisionChannel {
            tau,
            dim,
            atoms: *atoms,
            kraus: vec![KrausOperator::identity(dim)],
            tolerances,
        });
    }
    let unitary = build_unitary_blocks(battery, atoms, tau)?;
    let spin_dim = atoms.spin_dim();

    let mut kraus = Vec::with_capacity(ensemble.len() * spin_dim);
    for (p, chi) in &ensemble {
        let weight = p.sqrt();
        for s_out in 0..spin_dim {
            let mut bands = Vec::new();
            for (s_in, &amp) in chi.iter().enumerate() {
                if amp == ZERO {
                    continue;
                }
                let offset = s_out as isize - s_in as isize;
                let coeffs: Vec<Complex64> = (0..dim)
                    .map(|row| {
                        let n_in = row as isize - offset;
                        if n_in < 0 || n_in >= dim as isize {
                            ZERO
                        } else {
                            unitary.element(s_out, s_in, n_in as usize) * amp * weight
                        }
                    })
                    .collect();
                if coeffs.iter().any(|z| *z != ZERO) {
                    bands.push(Band { offset, coeffs });
                }
            }
            if !bands.is_empty() {
                kraus.push(KrausOperator::new(dim, bands));
            }
        }
    }

    let channel = CollisionChannel {
        tau,
        dim,
        atoms: *atoms,
        kraus,
        tolerances,
    };
    let dev = channel.completeness_deviation();
    if dev > tolerances.completeness() {
        return Err(Error::InvariantViolation {
            step: 0,
            reason: format!("Kraus completeness deviation {dev:e}"),
        });
    }
    Ok(channel)
}

/// `ρ′ = Σ K ρ K†`, followed by a Hermiticity/trace check.
///
/// Positivity needs an eigen-decomposition and is left to
/// [`BatteryState::validate`], which callers run on sampled steps.
pub fn apply_collision(state: &BatteryState, channel: &CollisionChannel) -> Result<BatteryState> {
    if state.dim() != channel.dim() {
        return Err(Error::DimensionMismatch {
            expected: channel.dim(),
            got: state.dim(),
        });
    }
    let next = channel.apply_unchecked(state);
    next.validate_cheap(channel.tolerances())
        .map_err(|reason| Error::InvariantViolation { step: 0, reason })?;
    Ok(next)
}

/// Reference collision: builds `ρ_B ⊗ ρ_A` (in the spin-slow ordering),
/// evolves it with a dense `U` and traces the spin out.
pub fn joint_reference_step(
    state: &BatteryState,
    atom_state: &AtomState,
    unitary: &CMatrix,
) -> CMatrix {
    let joint = linalg::kron(atom_state.matrix(), state.matrix());
    let evolved = unitary * joint * unitary.adjoint();
    linalg::trace_out_slow(&evolved, atom_state.dim(), state.dim())
}

/// Short-time approximation `ρ_B(k) ≈ D†(kα) ρ_B(0) D(kα)` with
/// `D(β) = exp(βB† − β*B)` and `α = iτ⟨J₋⟩`.
pub fn displacement_evolve(
    initial: &BatteryState,
    atoms: &AtomEnsembleSpec,
    tau: f64,
    k: usize,
) -> BatteryState {
    let alpha = Complex64::new(0.0, tau) * atoms.jminus_mean();
    displace_by(initial, alpha * k as f64)
}

/// `D†(β) ρ D(β)` on the truncated ladder.
pub fn displace_by(initial: &BatteryState, beta: Complex64) -> BatteryState {
    if beta == ZERO {
        return initial.clone();
    }
    let top = initial.dim() - 1;
    let ladder = build_ladder_ops(&BatterySpec::with_top(top).expect("dim >= 2"));
    // G = βB† − β*B is anti-Hermitian; with H = iG, exp(G) = exp(−iH).
    let generator = ladder.raise * beta - ladder.lower * beta.conj();
    let h = generator * Complex64::new(0.0, 1.0);
    let d = linalg::expm_hermitian(&h, 1.0);
    let rho = d.adjoint() * initial.matrix() * &d;
    BatteryState::from_matrix_unchecked(rho)
}
