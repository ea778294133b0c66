//! Small dense linear-algebra helpers on top of `nalgebra`, with Hermitian
//! eigensolves delegated to `faer`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

/// Kronecker product `a ⊗ b`; the index of `a` is the slow one.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `(m + m†)/2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

fn to_faer(m: &CMatrix) -> faer::Mat<Complex64> {
    let h = hermitian_part(m);
    faer::Mat::from_fn(h.nrows(), h.ncols(), |r, c| h[(r, c)])
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Only the Hermitian part of `m` is used. Columns of the returned matrix
/// are the matching eigenvectors. If the solver fails to converge every
/// returned value is NaN.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    let Ok(eig) = to_faer(m).self_adjoint_eigen(faer::Side::Lower) else {
        return (
            vec![f64::NAN; n],
            CMatrix::from_element(n, n, Complex64::new(f64::NAN, 0.0)),
        );
    };
    let raw: Vec<f64> = eig.S().column_vector().iter().map(|z| z.re).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| raw[a].total_cmp(&raw[b]));
    let u = eig.U();
    let values = order.iter().map(|&i| raw[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| u[(r, order[c])]);
    (values, vectors)
}

/// Eigenvalues of a Hermitian matrix, ascending (NaN on solver failure).
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    match to_faer(m).self_adjoint_eigenvalues(faer::Side::Lower) {
        Ok(mut values) => {
            values.sort_by(f64::total_cmp);
            values
        }
        Err(_) => vec![f64::NAN; m.nrows()],
    }
}

/// `exp(-i t H)` for Hermitian `H`, by full eigen-decomposition.
pub fn expm_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(h);
    let phases = DVector::from_iterator(
        values.len(),
        values.iter().map(|&e| Complex64::from_polar(1.0, -t * e)),
    );
    let scaled = CMatrix::from_fn(vectors.nrows(), vectors.ncols(), |r, c| {
        vectors[(r, c)] * phases[c]
    });
    scaled * vectors.adjoint()
}

/// Partial trace over the slow (first) factor of a `slow ⊗ fast` operator.
pub fn trace_out_slow(joint: &CMatrix, slow_dim: usize, fast_dim: usize) -> CMatrix {
    assert_eq!(joint.nrows(), slow_dim * fast_dim);
    CMatrix::from_fn(fast_dim, fast_dim, |a, b| {
        (0..slow_dim)
            .map(|s| joint[(s * fast_dim + a, s * fast_dim + b)])
            .sum()
    })
}

/// Trace distance `½‖a − b‖₁` between two Hermitian matrices.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    0.5 * hermitian_eigenvalues(&(a - b))
        .iter()
        .map(|e| e.abs())
        .sum::<f64>()
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}
