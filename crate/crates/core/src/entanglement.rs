//! Wootters concurrence of two-qubit states.

use log::debug;
use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::model::XState;
use crate::TOL_POS;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcurrenceBreakdown {
    /// `|c_P| - sqrt(p00 p11)`.
    pub f1: f64,
    /// `|c_Q| - sqrt(p01 p10)`.
    pub f2: f64,
    /// `max(0, 2 f1, 2 f2)`.
    pub c: f64,
}

fn clamp_population(p: f64) -> f64 {
    if p < 0.0 {
        debug!("clamping population {p:e} to zero before sqrt");
        if p < -TOL_POS {
            log::warn!("population {p:e} is below the positivity tolerance");
        }
        0.0
    } else {
        p
    }
}

/// Closed-form concurrence of an X state.
pub fn concurrence_x(x: &XState) -> ConcurrenceBreakdown {
    let (p00, p01, p10, p11) = (
        clamp_population(x.p00),
        clamp_population(x.p01),
        clamp_population(x.p10),
        clamp_population(x.p11),
    );
    let f1 = x.c_p.norm() - (p00 * p11).sqrt();
    let f2 = x.c_q.norm() - (p01 * p10).sqrt();
    let c = 0.0f64.max(2.0 * f1).max(2.0 * f2).min(1.0);
    ConcurrenceBreakdown { f1, f2, c }
}

const X_PATTERN_TOL: f64 = 1e-14;
const HERMITIAN_TOL: f64 = 1e-10;

fn is_x_shaped(rho: &Matrix4<Complex64>) -> bool {
    (0..4).all(|i| (0..4).all(|j| i == j || i + j == 3 || rho[(i, j)].norm() <= X_PATTERN_TOL))
}

/// Wootters concurrence of a general two-qubit density matrix.
///
/// X-shaped inputs use the closed-form spectrum of `rho (sy x sy) rho* (sy x sy)`;
/// anything else goes through [`wootters_concurrence_eigen`].
pub fn wootters_concurrence(rho: &Matrix4<Complex64>) -> Result<f64> {
    check_hermitian(rho)?;
    if !is_x_shaped(rho) {
        return wootters_concurrence_eigen(rho);
    }
    let p = |i: usize| clamp_population(rho[(i, i)].re);
    let outer = (p(1) * p(2)).sqrt();
    let inner = (p(0) * p(3)).sqrt();
    let cp = rho[(1, 2)].norm();
    let cq = rho[(0, 3)].norm();
    let roots = [outer + cp, (outer - cp).abs(), inner + cq, (inner - cq).abs()];
    Ok(concurrence_from_roots(roots))
}

/// Numerical route: the eigenvalues of `r = rho rho~` coincide with those of
/// the Hermitian `sqrt(rho) rho~ sqrt(rho)`, evaluated here through an SVD.
pub fn wootters_concurrence_eigen(rho: &Matrix4<Complex64>) -> Result<f64> {
    check_hermitian(rho)?;
    let herm = (rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    if let Some(min) = eig.eigenvalues.iter().copied().reduce(f64::min) {
        if min < -TOL_POS {
            return domain(format!("density matrix is not positive (eigenvalue {min:e})"));
        }
    }
    let sqrt_vals = eig.eigenvalues.map(|l| Complex64::new(l.max(0.0).sqrt(), 0.0));
    let sqrt_rho = eig.eigenvectors * Matrix4::from_diagonal(&sqrt_vals) * eig.eigenvectors.adjoint();

    // sqrt(rho) rho~ sqrt(rho) = A A^dagger with A = sqrt(rho) Y conj(sqrt(rho)),
    // so the square roots of its eigenvalues are the singular values of A.
    let a = sqrt_rho * spin_flip() * sqrt_rho.conjugate();
    let sv = a.singular_values();
    let roots = [sv[0], sv[1], sv[2], sv[3]];
    Ok(concurrence_from_roots(roots))
}

fn concurrence_from_roots(mut roots: [f64; 4]) -> f64 {
    roots.sort_by(|a, b| b.total_cmp(a));
    (roots[0] - roots[1] - roots[2] - roots[3]).clamp(0.0, 1.0)
}

/// `sigma_y (x) sigma_y` in the computational basis.
fn spin_flip() -> Matrix4<Complex64> {
    let mut m = Matrix4::zeros();
    m[(0, 3)] = Complex64::new(-1.0, 0.0);
    m[(3, 0)] = Complex64::new(-1.0, 0.0);
    m[(1, 2)] = Complex64::new(1.0, 0.0);
    m[(2, 1)] = Complex64::new(1.0, 0.0);
    m
}

fn check_hermitian(rho: &Matrix4<Complex64>) -> Result<()> {
    let dev = (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if dev > HERMITIAN_TOL {
        return domain(format!("density matrix is not Hermitian (deviation {dev:e})"));
    }
    Ok(())
}
