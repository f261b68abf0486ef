//! Concurrence of the distributed state and the entropic degree of spatial
//! indistinguishability.

use nalgebra::{Matrix4, SymmetricEigen};

use crate::linalg::hermitian_part;
use crate::slocc::DistributedState;
use crate::states::{Region, SpatialConfig, Statistics};
use crate::{Error, Result, C64};

/// Accuracy of [`config_for_indistinguishability`].
pub const INVERSION_TOL: f64 = 1e-12;

/// Entropic indistinguishability together with the single-particle
/// detection probabilities it was computed from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IndistinguishabilityDegree {
    pub value: f64,
    pub p_l_psi1: f64,
    pub p_r_psi1: f64,
    pub p_l_psi2: f64,
    pub p_r_psi2: f64,
}

impl IndistinguishabilityDegree {
    /// The two joint products `(P_Lψ₁·P_Rψ₂, P_Lψ₂·P_Rψ₁)`.
    pub fn products(&self) -> (f64, f64) {
        (self.p_l_psi1 * self.p_r_psi2, self.p_l_psi2 * self.p_r_psi1)
    }
}

fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

fn entropy_of_products(a: f64, b: f64) -> Result<f64> {
    let z = a + b;
    if z <= 0.0 {
        return Err(Error::Undefined);
    }
    Ok((plogp(a / z) + plogp(b / z)).clamp(0.0, 1.0))
}

pub fn indistinguishability(config: &SpatialConfig) -> Result<IndistinguishabilityDegree> {
    let sq = |region, slot| config.modulus(region, slot).powi(2);
    let mut d = IndistinguishabilityDegree {
        value: 0.0,
        p_l_psi1: sq(Region::L, 1),
        p_r_psi1: sq(Region::R, 1),
        p_l_psi2: sq(Region::L, 2),
        p_r_psi2: sq(Region::R, 2),
    };
    let (a, b) = d.products();
    d.value = entropy_of_products(a, b)?;
    Ok(d)
}

/// Indistinguishability on the `l = r′` branch as a function of `l²`.
fn branch_value(l2: f64) -> f64 {
    let a = l2 * l2;
    let b = (1.0 - l2) * (1.0 - l2);
    entropy_of_products(a, b).unwrap_or(0.0)
}

/// `l²` on the `l = r′` branch with the requested indistinguishability.
///
/// `I(l²)` falls monotonically from 1 at `l² = ½` to 0 at `l² = 1`, so plain
/// bisection converges.
pub fn l2_for_indistinguishability(target: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&target) {
        return Err(Error::InvalidConfig(format!(
            "indistinguishability {target} outside [0, 1]"
        )));
    }
    if target == 1.0 {
        return Ok(0.5);
    }
    if target == 0.0 {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.5_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if branch_value(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < INVERSION_TOL * 1e-3 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn config_for_indistinguishability(
    target: f64,
    theta: f64,
    statistics: Statistics,
) -> Result<SpatialConfig> {
    SpatialConfig::l_equals_rprime(l2_for_indistinguishability(target)?, theta, statistics)
}

/// `σy ⊗ σy`, real and anti-diagonal with signs (-1, 1, 1, -1).
fn spin_flip_operator() -> Matrix4<C64> {
    let mut yy = Matrix4::<C64>::zeros();
    yy[(0, 3)] = C64::new(-1.0, 0.0);
    yy[(1, 2)] = C64::new(1.0, 0.0);
    yy[(2, 1)] = C64::new(1.0, 0.0);
    yy[(3, 0)] = C64::new(-1.0, 0.0);
    yy
}

/// Wootters concurrence of a two-qubit density matrix.
///
/// The roots `√μᵢ` of the spectrum of `ρρ̃` are the singular values of
/// `τ = Vᵀ (σy ⊗ σy) V` with `ρ = V V†`. Going through `τ` avoids taking square
/// roots of rounding-level eigenvalues, which would put `1e-8` noise on pure
/// states.
pub fn concurrence_matrix(rho: &Matrix4<C64>) -> f64 {
    let eig = SymmetricEigen::new(hermitian_part(rho));
    let weights = eig.eigenvalues.map(|p| C64::new(p.max(0.0).sqrt(), 0.0));
    let v = eig.eigenvectors * Matrix4::from_diagonal(&weights);
    let tau = v.transpose() * spin_flip_operator() * v;
    let mut roots: Vec<f64> = tau.singular_values().iter().copied().collect();
    roots.sort_by(|a, b| b.total_cmp(a));
    (roots[0] - roots[1] - roots[2] - roots[3]).clamp(0.0, 1.0)
}

pub fn concurrence(state: &DistributedState) -> f64 {
    concurrence_matrix(state.matrix())
}

/// `max(0, 2 max p − 1)` for states diagonal in a Bell basis.
pub fn bell_diagonal_concurrence(populations: &[f64]) -> f64 {
    let top = populations.iter().copied().fold(0.0, f64::max);
    (2.0 * top - 1.0).max(0.0)
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`.
pub fn fidelity(rho: &Matrix4<C64>, sigma: &Matrix4<C64>) -> f64 {
    crate::linalg::fidelity(rho, sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{stationary_concurrence, ChannelKind};
    use nalgebra::{Matrix2, Vector4};
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn bell(k: usize) -> Vector4<C64> {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        let z = C64::new(0.0, 0.0);
        match k {
            0 => Vector4::new(z, h, -h, z),
            1 => Vector4::new(z, h, h, z),
            2 => Vector4::new(h, z, z, h),
            _ => Vector4::new(h, z, z, -h),
        }
    }

    fn werner(p: f64) -> Matrix4<C64> {
        let v = bell(0);
        v * v.adjoint() * C64::new(p, 0.0) + Matrix4::identity() * C64::new((1.0 - p) / 4.0, 0.0)
    }

    #[test]
    fn concurrence_reference_values() {
        let s = bell(0);
        assert!((concurrence_matrix(&(s * s.adjoint())) - 1.0).abs() < 1e-12);
        assert!(concurrence_matrix(&(Matrix4::identity() * C64::new(0.25, 0.0))) < 1e-12);
        assert!(concurrence_matrix(&werner(1.0 / 3.0)) < 1e-12);
        assert!((concurrence_matrix(&werner(0.5)) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn product_state_has_no_concurrence() {
        let v = Vector4::new(C64::new(0.6, 0.0), C64::new(0.0, 0.8), C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        assert!(concurrence_matrix(&(v * v.adjoint())) < 1e-7);
    }

    #[test]
    fn bell_diagonal_fast_path() {
        assert_eq!(bell_diagonal_concurrence(&[1.0, 0.0, 0.0, 0.0]), 1.0);
        assert_eq!(bell_diagonal_concurrence(&[0.25; 4]), 0.0);
        assert!((bell_diagonal_concurrence(&[0.6, 0.4, 0.0, 0.0]) - 0.2).abs() < 1e-15);
        let p = [0.6, 0.4, 0.0, 0.0];
        let mut rho = Matrix4::zeros();
        for (k, &pk) in p.iter().enumerate() {
            rho += bell(k) * bell(k).adjoint() * C64::new(pk, 0.0);
        }
        assert!((concurrence_matrix(&rho) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn indistinguishability_reference_values() {
        let sep = SpatialConfig::separated(Statistics::Fermion);
        assert_eq!(indistinguishability(&sep).unwrap().value, 0.0);
        let same = SpatialConfig::from_probabilities(0.3, 0.3, 0.0, Statistics::Boson).unwrap();
        assert!((indistinguishability(&same).unwrap().value - 1.0).abs() < 1e-15);
        let cfg = SpatialConfig::l_equals_rprime(0.8, 0.0, Statistics::Boson).unwrap();
        assert!((indistinguishability(&cfg).unwrap().value - 0.3227569588973982).abs() < 1e-12);
    }

    #[test]
    fn both_products_zero_is_undefined() {
        let cfg = SpatialConfig::from_probabilities(1.0, 1.0, 0.0, Statistics::Boson).unwrap();
        assert_eq!(indistinguishability(&cfg), Err(Error::Undefined));
    }

    #[test]
    fn inversion_endpoints_and_frozen_values() {
        assert_eq!(l2_for_indistinguishability(1.0).unwrap(), 0.5);
        assert_eq!(l2_for_indistinguishability(0.0).unwrap(), 1.0);
        assert!((l2_for_indistinguishability(0.5).unwrap() - 0.7398575406601586).abs() < 1e-10);
        assert!((l2_for_indistinguishability(0.75).unwrap() - 0.6567851205573815).abs() < 1e-10);
        assert!(l2_for_indistinguishability(1.2).is_err());
        for target in [0.1, 0.5, 0.75, 0.99] {
            let cfg = config_for_indistinguishability(target, 0.0, Statistics::Fermion).unwrap();
            assert!((indistinguishability(&cfg).unwrap().value - target).abs() < 1e-10);
        }
    }

    #[test]
    fn dephasing_plateau_grows_with_indistinguishability() {
        let mut last = -1.0;
        for k in 0..=50 {
            let cfg = config_for_indistinguishability(k as f64 / 50.0, 0.0, Statistics::Fermion).unwrap();
            let c = stationary_concurrence(ChannelKind::PhaseDamping, &cfg);
            assert!(c >= last - 1e-12);
            last = c;
        }
    }

    fn unitary(a: f64, b: f64, c: f64) -> Matrix2<C64> {
        let e = |x: f64| C64::from_polar(1.0, x);
        Matrix2::new(
            e(b) * a.cos(),
            e(c) * a.sin(),
            -e(-c) * a.sin(),
            e(-b) * a.cos(),
        )
    }

    fn random_state(w: &[f64; 32]) -> Matrix4<C64> {
        let mut m = Matrix4::<C64>::zeros();
        for i in 0..16 {
            m[(i / 4, i % 4)] = C64::new(w[2 * i], w[2 * i + 1]);
        }
        let rho = m * m.adjoint();
        rho / rho.trace()
    }

    proptest! {
        #[test]
        fn concurrence_is_bounded(w in prop::array::uniform32(-1.0f64..1.0)) {
            let c = concurrence_matrix(&random_state(&w));
            prop_assert!((0.0..=1.0).contains(&c));
        }

        #[test]
        fn concurrence_is_local_unitary_invariant(
            w in prop::array::uniform32(-1.0f64..1.0),
            angles in prop::array::uniform6(0.0f64..6.3),
        ) {
            let rho = random_state(&w);
            let u = unitary(angles[0], angles[1], angles[2]).kronecker(&unitary(angles[3], angles[4], angles[5]));
            let rotated = u * rho * u.adjoint();
            prop_assert!((concurrence_matrix(&rho) - concurrence_matrix(&rotated)).abs() < 1e-10);
        }

        #[test]
        fn indistinguishability_ignores_labels(l2 in 0.0f64..1.0, lp2 in 0.0f64..1.0, theta in 0.0f64..6.3) {
            let a = SpatialConfig::from_probabilities(l2, lp2, theta, Statistics::Boson).unwrap();
            let b = SpatialConfig::from_probabilities(lp2, l2, theta, Statistics::Boson).unwrap();
            match (indistinguishability(&a), indistinguishability(&b)) {
                (Ok(x), Ok(y)) => {
                    prop_assert!((0.0..=1.0).contains(&x.value));
                    prop_assert!((x.value - y.value).abs() < 1e-12);
                }
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "swap changed definedness"),
            }
        }
    }
}
