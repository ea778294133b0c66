//! Banded Kraus operators and the `ρ ↦ Σ K ρ K†` kernel.
//!
//! Matrices are dense column-major slices of length `dim²`, the layout
//! `nalgebra` uses. With the `parallel` feature the kernel splits work over
//! output columns with rayon; without it the same loops run sequentially.
//! Both paths perform identical floating-point operations in identical
//! order per column, so they agree bit for bit.

use num_complex::Complex64;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::linalg::{CMatrix, ZERO};

/// One non-zero diagonal of a banded operator.
///
/// `coeffs[row]` holds `K[row, row − offset]`; entries whose column falls
/// outside the matrix are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub offset: isize,
    pub coeffs: Vec<Complex64>,
}

impl Band {
    /// Rows for which `row − offset` is a valid column.
    fn rows(&self, dim: usize) -> std::ops::Range<usize> {
        let lo = self.offset.max(0) as usize;
        let hi = (dim as isize + self.offset.min(0)).max(0) as usize;
        lo..hi.max(lo)
    }
}

/// A Kraus operator stored as a list of diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausOperator {
    dim: usize,
    bands: Vec<Band>,
}

impl KrausOperator {
    /// Diagonals lying entirely outside the matrix are dropped.
    pub fn new(dim: usize, mut bands: Vec<Band>) -> Self {
        for b in &bands {
            assert_eq!(b.coeffs.len(), dim);
        }
        bands.retain(|b| b.offset.unsigned_abs() < dim);
        bands.sort_by_key(|b| b.offset);
        Self { dim, bands }
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(
            dim,
            vec![Band {
                offset: 0,
                coeffs: vec![Complex64::new(1.0, 0.0); dim],
            }],
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    /// Number of stored diagonals.
    pub fn bandwidth(&self) -> usize {
        self.bands.len()
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for band in &self.bands {
            for row in band.rows(self.dim) {
                let col = (row as isize - band.offset) as usize;
                m[(row, col)] = band.coeffs[row];
            }
        }
        m
    }

    /// `K†K` accumulated into `acc` (dense, `dim × dim`).
    pub fn accumulate_gram(&self, acc: &mut CMatrix) {
        for row in 0..self.dim {
            for b1 in &self.bands {
                if !b1.rows(self.dim).contains(&row) {
                    continue;
                }
                let c1 = (row as isize - b1.offset) as usize;
                let k1 = b1.coeffs[row].conj();
                for b2 in &self.bands {
                    if !b2.rows(self.dim).contains(&row) {
                        continue;
                    }
                    let c2 = (row as isize - b2.offset) as usize;
                    acc[(c1, c2)] += k1 * b2.coeffs[row];
                }
            }
        }
    }
}

/// Column `col` of `K ρ`.
#[inline]
fn left_multiply_column(kraus: &KrausOperator, rho_col: &[Complex64], out: &mut [Complex64]) {
    out.fill(ZERO);
    for band in &kraus.bands {
        let rows = band.rows(kraus.dim);
        let shift = band.offset;
        let src_lo = (rows.start as isize - shift) as usize;
        let len = rows.len();
        let coeffs = &band.coeffs[rows.clone()];
        let src = &rho_col[src_lo..src_lo + len];
        for ((o, k), r) in out[rows].iter_mut().zip(coeffs).zip(src) {
            *o += k * r;
        }
    }
}

/// Upper-triangular part (rows `0..=col`) of column `col` of `X K†`,
/// accumulated into `out`.
#[inline]
fn right_multiply_column(
    kraus: &KrausOperator,
    x: &[Complex64],
    col: usize,
    out: &mut [Complex64],
) {
    let dim = kraus.dim;
    let rows = col + 1;
    for band in &kraus.bands {
        let src_col = col as isize - band.offset;
        if src_col < 0 || src_col >= dim as isize {
            continue;
        }
        let w = band.coeffs[col].conj();
        if w == ZERO {
            continue;
        }
        let start = src_col as usize * dim;
        let src = &x[start..start + rows];
        for (o, v) in out[..rows].iter_mut().zip(src) {
            *o += w * v;
        }
    }
}

fn mirror_upper(out: &mut [Complex64], dim: usize) {
    for c in 0..dim {
        for r in c + 1..dim {
            out[c * dim + r] = out[r * dim + c].conj();
        }
    }
}

/// `Σ_K K ρ K†`, single-threaded.
pub fn apply_kraus_sequential(
    kraus: &[KrausOperator],
    rho: &[Complex64],
    dim: usize,
) -> Vec<Complex64> {
    assert_eq!(rho.len(), dim * dim);
    let mut out = vec![ZERO; dim * dim];
    let mut x = vec![ZERO; dim * dim];
    for k in kraus {
        debug_assert_eq!(k.dim, dim);
        for (x_col, rho_col) in x.chunks_mut(dim).zip(rho.chunks(dim)) {
            left_multiply_column(k, rho_col, x_col);
        }
        for (col, out_col) in out.chunks_mut(dim).enumerate() {
            right_multiply_column(k, &x, col, out_col);
        }
    }
    mirror_upper(&mut out, dim);
    out
}

/// `Σ_K K ρ K†`, split over columns with rayon.
#[cfg(feature = "parallel")]
pub fn apply_kraus_parallel(
    kraus: &[KrausOperator],
    rho: &[Complex64],
    dim: usize,
) -> Vec<Complex64> {
    assert_eq!(rho.len(), dim * dim);
    let mut out = vec![ZERO; dim * dim];
    let mut x = vec![ZERO; dim * dim];
    for k in kraus {
        debug_assert_eq!(k.dim, dim);
        x.par_chunks_mut(dim)
            .zip(rho.par_chunks(dim))
            .for_each(|(x_col, rho_col)| left_multiply_column(k, rho_col, x_col));
        let x_ref = &x;
        out.par_chunks_mut(dim)
            .enumerate()
            .for_each(|(col, out_col)| right_multiply_column(k, x_ref, col, out_col));
    }
    mirror_upper(&mut out, dim);
    out
}

/// `Σ_K K ρ K†` with the backend selected at compile time.
pub fn apply_kraus(kraus: &[KrausOperator], rho: &[Complex64], dim: usize) -> Vec<Complex64> {
    #[cfg(feature = "parallel")]
    {
        apply_kraus_parallel(kraus, rho, dim)
    }
    #[cfg(not(feature = "parallel"))]
    {
        apply_kraus_sequential(kraus, rho, dim)
    }
}
