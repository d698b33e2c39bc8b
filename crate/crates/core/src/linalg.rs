use nalgebra::{DMatrix, DVector};

use crate::error::{MopError, Result};
use crate::scalar::Real;

/// Least-squares solution of `design * beta ≈ rhs` via Householder QR.
///
/// Fails with `SingularDesign` when the smallest singular value of `design`
/// falls below `T::rank_tolerance()` times the largest.
pub(crate) fn least_squares<T: Real>(design: DMatrix<T>, rhs: &DVector<T>) -> Result<DVector<T>> {
    let (n, p) = design.shape();
    if n < p {
        return Err(MopError::Underdetermined { p, n });
    }
    let sv = design.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if !(max > T::zero()) || min < T::rank_tolerance() * max {
        return Err(MopError::SingularDesign);
    }
    let qr = design.qr();
    let qty = qr.q().transpose() * rhs;
    qr.r().solve_upper_triangular(&qty).ok_or(MopError::SingularDesign)
}

pub(crate) enum NormalSolve<T> {
    Solved(DVector<T>),
    /// Factorization succeeded but is too poorly conditioned to trust; carries
    /// the column scaling applied so a caller can re-solve more stably.
    IllConditioned(Vec<T>),
    Singular,
}

/// Squared pivot ratio under which the Cholesky route hands over to QR.
const CHOLESKY_RATIO: f64 = 1e-6;

/// Solves the normal equations `a x = b` (`a` symmetric positive semidefinite)
/// after symmetric diagonal equilibration.
pub(crate) fn solve_normal_equations<T: Real>(mut a: DMatrix<T>, mut b: DVector<T>) -> NormalSolve<T> {
    let p = a.nrows();
    let mut scale = Vec::with_capacity(p);
    for i in 0..p {
        let d = a[(i, i)];
        if !(d > T::zero()) {
            return NormalSolve::Singular;
        }
        scale.push(T::one() / d.sqrt());
    }
    for r in 0..p {
        for c in 0..p {
            a[(r, c)] *= scale[r] * scale[c];
        }
        b[r] *= scale[r];
    }
    let Some(chol) = a.cholesky() else {
        return NormalSolve::IllConditioned(scale);
    };
    let l = chol.l_dirty();
    let (mut lo, mut hi) = (l[(0, 0)], l[(0, 0)]);
    for i in 1..p {
        lo = lo.min(l[(i, i)]);
        hi = hi.max(l[(i, i)]);
    }
    let ratio = (lo / hi) * (lo / hi);
    if ratio < T::of(CHOLESKY_RATIO) {
        return NormalSolve::IllConditioned(scale);
    }
    chol.solve_mut(&mut b);
    for (x, &s) in b.iter_mut().zip(&scale) {
        *x *= s;
    }
    NormalSolve::Solved(b)
}

/// QR least squares without the singular value check; `None` when the
/// triangular factor is numerically rank deficient.
pub(crate) fn least_squares_qr<T: Real>(design: DMatrix<T>, rhs: &DVector<T>) -> Option<DVector<T>> {
    let (n, p) = design.shape();
    if n < p {
        return None;
    }
    let qr = design.qr();
    let r = qr.r();
    let (mut lo, mut hi) = (r[(0, 0)].abs(), r[(0, 0)].abs());
    for i in 1..p {
        lo = lo.min(r[(i, i)].abs());
        hi = hi.max(r[(i, i)].abs());
    }
    if !(hi > T::zero()) || lo < T::rank_tolerance().sqrt() * hi {
        return None;
    }
    let qty = qr.q().transpose() * rhs;
    r.solve_upper_triangular(&qty)
}
