//! Small dense linear-algebra helpers.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `(M + Mᵀ) / 2`.
pub fn symmetrize<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    (m + m.transpose()) * T::lit(0.5)
}

/// Returns `true` when `m` is square, symmetric to a relative 1e-12 and
/// admits a Cholesky factorization.
pub fn is_spd<T: Real>(m: &DMatrix<T>) -> bool {
    if !m.is_square() || m.iter().any(|x| !x.is_finite()) {
        return false;
    }
    let scale = m.amax().max(T::lit(1e-30));
    let asym = (m - m.transpose()).amax();
    if asym > scale * T::lit(1e-12).max(T::default_epsilon() * T::lit(16.0)) {
        return false;
    }
    m.clone().cholesky().is_some()
}

/// Inverse of a symmetric positive-definite matrix via Cholesky.
pub fn spd_inverse<T: Real>(m: &DMatrix<T>, what: &'static str) -> Result<DMatrix<T>> {
    let chol = symmetrize(m)
        .cholesky()
        .ok_or(Error::NotPositiveDefinite(what))?;
    Ok(symmetrize(&chol.inverse()))
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue<T: Real>(m: &DMatrix<T>) -> T {
    symmetrize(m)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(T::max_value().unwrap_or_else(T::one), |a, b| a.min(b))
}

/// Frobenius relative error `‖a − b‖ / max(‖b‖, floor)`.
pub fn relative_error<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> T {
    let denom = b.norm().max(T::lit(1e-30));
    (a - b).norm() / denom
}

/// Central-difference Jacobian of `f` at `x` with step `h`.
pub fn central_difference<T, F>(f: F, x: &DVector<T>, h: T) -> Result<DMatrix<T>>
where
    T: Real,
    F: Fn(&DVector<T>) -> Result<DVector<T>>,
{
    let n = x.len();
    let mut cols: Vec<DVector<T>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += h;
        xm[i] -= h;
        let d = (f(&xp)? - f(&xm)?) / (h + h);
        cols.push(d);
    }
    let rows = cols.first().map_or(0, |c| c.len());
    Ok(DMatrix::from_fn(rows, n, |r, c| cols[c][r]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn spd_detection() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        assert!(is_spd(&a));
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(!is_spd(&b));
        let c = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 2.0]);
        assert!(!is_spd(&c));
    }

    #[test]
    fn fd_of_quadratic() {
        let f = |x: &DVector<f64>| Ok(DVector::from_vec(vec![x[0] * x[0], x[0] * x[1]]));
        let j = central_difference(f, &DVector::from_vec(vec![1.5, -2.0]), 1e-6).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[3.0, 0.0, -2.0, 1.5]);
        assert_relative_eq!(j, expect, epsilon = 1e-8);
    }

    #[test]
    fn inverse_of_spd() {
        let a = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let inv = spd_inverse(&a, "a").unwrap();
        assert_relative_eq!(&a * inv, DMatrix::identity(2, 2), epsilon = 1e-14);
        assert!(spd_inverse(&DMatrix::<f64>::zeros(2, 2), "z").is_err());
    }
}
