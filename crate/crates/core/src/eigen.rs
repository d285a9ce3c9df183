//! Smallest eigenpair of a Hermitian matrix.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

/// Entrywise tolerance for the Hermitian check, relative to `max(1, max|h|)`.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Residual bound relative to `max(1, ‖H‖_F)`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

const MAX_QR_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    /// Unit-norm eigenvector in canonical phase.
    pub vector: Vec<Complex64>,
    /// `‖Hu - λu‖`.
    pub residual: f64,
}

/// Rotates `v` so that its largest-modulus entry (lowest index on ties within
/// 1e-12) is real and nonnegative.
pub fn canonicalize_phase(v: &mut [Complex64]) {
    let mut best: Option<(usize, f64)> = None;
    for (j, z) in v.iter().enumerate() {
        let a = z.norm();
        match best {
            Some((_, b)) if a <= b + 1e-12 => {}
            _ => best = Some((j, a)),
        }
    }
    let Some((j, a)) = best else { return };
    if a == 0.0 {
        return;
    }
    let rot = v[j].conj() / a;
    for z in v.iter_mut() {
        *z *= rot;
    }
    v[j] = Complex64::new(a, 0.0);
}

pub fn frobenius(h: &DMatrix<Complex64>) -> f64 {
    h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn residual(h: &DMatrix<Complex64>, u: &[Complex64], value: f64) -> f64 {
    let n = u.len();
    (0..n)
        .map(|r| {
            let hu: Complex64 = (0..n).map(|c| h[(r, c)] * u[c]).sum();
            (hu - u[r] * value).norm_sqr()
        })
        .sum::<f64>()
        .sqrt()
}

/// Smallest eigenvalue of `h` and a canonical-phase unit eigenvector.
///
/// Uses a full Hermitian decomposition (Householder tridiagonalisation plus
/// implicit QR); the eigenvalue is then refreshed as the Rayleigh quotient of
/// the returned vector.
pub fn min_eigenpair(h: &DMatrix<Complex64>) -> Result<EigenPair> {
    let n = h.nrows();
    if n == 0 || h.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: h.ncols() });
    }
    let scale = h.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let mut asym = 0.0f64;
    for r in 0..n {
        for c in r..n {
            asym = asym.max((h[(r, c)] - h[(c, r)].conj()).norm());
        }
    }
    if asym > HERMITIAN_TOLERANCE * scale {
        return Err(Error::NotHermitian(asym));
    }
    let sym = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let bound = RESIDUAL_TOLERANCE * frobenius(&sym).max(1.0);

    let Some(eig) = sym.clone().try_symmetric_eigen(f64::EPSILON, MAX_QR_ITERATIONS) else {
        return Err(Error::NoConvergence { residual: f64::NAN });
    };
    let (col, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (j, &v)| if v < acc.1 { (j, v) } else { acc });
    let mut vector: Vec<Complex64> = eig.eigenvectors.column(col).iter().copied().collect();
    let norm = vector.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in vector.iter_mut() {
        *z /= norm;
    }
    canonicalize_phase(&mut vector);

    let value = rayleigh_quotient(&sym, &vector);
    let residual = residual(&sym, &vector, value);
    if !residual.is_finite() || residual > bound {
        return Err(Error::NoConvergence { residual });
    }
    Ok(EigenPair { value, vector, residual })
}

/// `u*Hu / u*u`.
pub fn rayleigh_quotient(h: &DMatrix<Complex64>, u: &[Complex64]) -> f64 {
    let n = u.len();
    let mut num = Complex64::new(0.0, 0.0);
    for r in 0..n {
        let row: Complex64 = (0..n).map(|c| h[(r, c)] * u[c]).sum();
        num += u[r].conj() * row;
    }
    num.re / u.iter().map(|z| z.norm_sqr()).sum::<f64>()
}
