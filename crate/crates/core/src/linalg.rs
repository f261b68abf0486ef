use nalgebra::{Matrix4, SymmetricEigen, Vector4};

use crate::C64;

pub(crate) type Mat4 = Matrix4<C64>;

pub(crate) fn hermitian_part(m: &Mat4) -> Mat4 {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

pub(crate) fn hermiticity_defect(m: &Mat4) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Real eigenvalues of a Hermitian matrix, ascending.
pub(crate) fn hermitian_eigenvalues(m: &Mat4) -> Vector4<f64> {
    let mut ev = SymmetricEigen::new(hermitian_part(m)).eigenvalues;
    ev.as_mut_slice().sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Principal square root of a positive semidefinite Hermitian matrix.
/// Negative rounding eigenvalues are clamped to zero.
pub(crate) fn sqrt_psd(m: &Mat4) -> Mat4 {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let roots = eig.eigenvalues.map(|x| C64::new(x.max(0.0).sqrt(), 0.0));
    let u = &eig.eigenvectors;
    u * Mat4::from_diagonal(&roots) * u.adjoint()
}

/// Uhlmann fidelity (Tr √(√ρ σ √ρ))².
pub(crate) fn fidelity(rho: &Mat4, sigma: &Mat4) -> f64 {
    let s = sqrt_psd(rho);
    let inner = s * sigma * s;
    let tr: f64 = hermitian_eigenvalues(&inner)
        .iter()
        .map(|x| x.max(0.0).sqrt())
        .sum();
    tr * tr
}
