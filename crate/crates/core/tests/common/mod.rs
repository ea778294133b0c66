//! Shared fixtures and independent oracles for integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spincharge::linalg::CMatrix;
use spincharge::BatteryState;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

/// `G G† / tr` for a random `dim × rank` matrix `G`.
pub fn random_density(rng: &mut ChaCha8Rng, dim: usize, rank: usize) -> BatteryState {
    let g = gaussian_matrix(rng, dim, rank.max(1));
    let rho = &g * g.adjoint();
    let tr = rho.trace().re;
    BatteryState::new(rho.unscale(tr)).expect("random state is valid")
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> CMatrix {
    let g = gaussian_matrix(rng, dim, dim);
    (&g + g.adjoint()).scale(0.5)
}

/// `⟨0|(αB† − α*B)^{2n}|0⟩` by repeated matrix-vector products on a
/// ladder with `2n + 2` levels and unit hopping elements.
pub fn ladder_moment_oracle(n: usize, alpha: Complex64) -> Complex64 {
    let dim = 2 * n + 2;
    let mut v = vec![Complex64::new(0.0, 0.0); dim];
    v[0] = Complex64::new(1.0, 0.0);
    for _ in 0..2 * n {
        let mut w = vec![Complex64::new(0.0, 0.0); dim];
        for (i, &x) in v.iter().enumerate() {
            if i + 1 < dim {
                w[i + 1] += alpha * x;
            }
            if i > 0 {
                w[i - 1] -= alpha.conj() * x;
            }
        }
        v = w;
    }
    v[0]
}

/// Number of up/down lattice paths of length `2n` that never dip below zero.
pub fn dyck_paths(n: usize) -> u64 {
    fn walk(height: usize, remaining: usize) -> u64 {
        if remaining == 0 {
            return (height == 0) as u64;
        }
        if height > remaining {
            return 0;
        }
        let mut count = walk(height + 1, remaining - 1);
        if height > 0 {
            count += walk(height - 1, remaining - 1);
        }
        count
    }
    walk(0, 2 * n)
}

/// `Σ_{n<terms} (−1)^n x^{2n} C_n / (2n)!` with `C_n` from Dyck-path counts
/// for small `n` and the product formula beyond.
pub fn catalan_series(x: f64, terms: usize) -> f64 {
    let mut sum = 0.0;
    let mut catalan = 1.0f64;
    let mut fact = 1.0f64;
    for n in 0..terms {
        if n > 0 {
            catalan *= 2.0 * (2.0 * n as f64 - 1.0) / (n as f64 + 1.0);
            fact *= (2 * n - 1) as f64 * (2 * n) as f64;
        }
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * x.powi(2 * n as i32) * catalan / fact;
    }
    sum
}
