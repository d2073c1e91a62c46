//! Dense complex linear algebra used by the dense cross-check paths.
//!
//! Everything here operates on explicit matrices and is intended for
//! moderate dimensions (a few thousand at most). The production
//! propagators never go through this module; it exists so that closed-form
//! results can be checked against generic dense evolution.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest entrywise deviation from Hermiticity, `max |M - M†|`.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

/// Eigendecomposition of a Hermitian matrix: `M = V diag(values) V†`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: DVector<f64>,
    pub vectors: CMatrix,
}

pub fn hermitian_eigen(m: &CMatrix) -> HermitianEigen {
    let eig = m.clone().symmetric_eigen();
    HermitianEigen {
        values: eig.eigenvalues,
        vectors: eig.eigenvectors,
    }
}

impl HermitianEigen {
    /// Apply `exp(-i M t)` to `state` using the stored factorization.
    pub fn evolve(&self, state: &CVector, t: f64) -> CVector {
        let mut coeffs = self.vectors.adjoint() * state;
        for (k, c) in coeffs.iter_mut().enumerate() {
            *c *= Complex64::from_polar(1.0, -self.values[k] * t);
        }
        &self.vectors * coeffs
    }
}

/// `exp(-i H t) |state>` for Hermitian `H` via a fresh eigendecomposition.
pub fn evolve_hermitian(h: &CMatrix, state: &CVector, t: f64) -> CVector {
    hermitian_eigen(h).evolve(state, t)
}

/// Matrix exponential by scaling-and-squaring with a Padé(13) approximant.
///
/// Independent of the eigendecomposition route above; the two serve as
/// cross-checks for each other in the tests.
pub fn expm(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm requires a square matrix");
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }

    // Padé(13) coefficients (Higham 2005, SIAM J. Matrix Anal. Appl. 26(4)).
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA13: f64 = 5.371920351148152;

    let norm = one_norm(a);
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a * Complex64::new(1.0 / f64::powi(2.0, s as i32), 0.0);

    let c = |x: f64| Complex64::new(x, 0.0);
    let id = CMatrix::identity(n, n);
    let a2 = &scaled * &scaled;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;

    let u_inner = &a6 * c(B[13]) + &a4 * c(B[11]) + &a2 * c(B[9]);
    let u = &scaled
        * (&a6 * &u_inner + &a6 * c(B[7]) + &a4 * c(B[5]) + &a2 * c(B[3]) + &id * c(B[1]));
    let v_inner = &a6 * c(B[12]) + &a4 * c(B[10]) + &a2 * c(B[8]);
    let v = &a6 * &v_inner + &a6 * c(B[6]) + &a4 * c(B[4]) + &a2 * c(B[2]) + &id * c(B[0]);

    let denom = &v - &u;
    let numer = &v + &u;
    let mut result = denom
        .lu()
        .solve(&numer)
        .expect("Padé denominator must be invertible");
    for _ in 0..s {
        result = &result * &result;
    }
    result
}

fn one_norm(m: &CMatrix) -> f64 {
    (0..m.ncols())
        .map(|c| m.column(c).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Eigendecomposition of a unitary matrix: returns `(eigenvalues, V)` with
/// `U = V diag(eigenvalues) V†` and orthonormal columns.
///
/// Works through the commuting Hermitian parts `C = (U+U†)/2` and
/// `S = (U-U†)/2i`, diagonalizing `C` first and then `S` within each
/// eigenvalue cluster of `C`.
pub fn unitary_eigen(u: &CMatrix) -> (CVector, CMatrix) {
    let n = u.nrows();
    assert_eq!(n, u.ncols());
    let c = (u + u.adjoint()) * Complex64::new(0.5, 0.0);
    let s = (u - u.adjoint()) * Complex64::new(0.0, -0.5);

    let eig_c = hermitian_eigen(&c);
    // Sort by the eigenvalue of C so clusters are contiguous.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig_c.values[a].partial_cmp(&eig_c.values[b]).unwrap());
    let mut basis = CMatrix::zeros(n, n);
    let mut cvals = vec![0.0; n];
    for (slot, &src) in order.iter().enumerate() {
        basis.set_column(slot, &eig_c.vectors.column(src));
        cvals[slot] = eig_c.values[src];
    }

    let cluster_tol = 1e-8;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (cvals[end] - cvals[end - 1]).abs() < cluster_tol {
            end += 1;
        }
        if end - start > 1 {
            let w = basis.columns(start, end - start).into_owned();
            let s_sub = w.adjoint() * &s * &w;
            let eig_s = hermitian_eigen(&s_sub);
            let rotated = &w * &eig_s.vectors;
            for (off, col) in (start..end).enumerate() {
                basis.set_column(col, &rotated.column(off));
            }
        }
        start = end;
    }

    let mut values = CVector::zeros(n);
    for k in 0..n {
        let v = basis.column(k);
        values[k] = (v.adjoint() * u * v)[(0, 0)];
    }
    (values, basis)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}
