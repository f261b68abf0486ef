//! Spatially localized post-selection onto one particle in L and one in R.
//!
//! A slot-basis pseudospin matrix `ρ` stands for the identical-particle state
//! `Σ ρ[s, s′] |ψ₁s₁, ψ₂s₂⟩⟨ψ₁s′₁, ψ₂s′₂|`. Those two-particle vectors are not
//! orthonormal, so the state is normalized by `Tr(G ρ)` with the Gram matrix
//! `G`, and the projector `Π_LR` acts through the amplitudes
//! `K[(a,b), (s₁,s₂)] = ⟨L a, R b | ψ₁ s₁, ψ₂ s₂⟩`:
//!
//! ```text
//! ρ_LR = K ρ K† / Tr(K ρ K†),    P_LR = Tr(K ρ K†) / Tr(G ρ)
//! ```
//!
//! For a mixture `Σ q_u |u⟩⟨u|` of basis states this reduces to
//! `Tr(G ρ) = Σ q_u N_u`, which is how [`project`] evaluates it.

use nalgebra::{Matrix4, Vector4};

use crate::channels::{decay_pair, xi, ChannelKind};
use crate::linalg::{hermitian_eigenvalues, hermitian_part, hermiticity_defect};
use crate::states::{
    bell_state_norm, selection_rule_check, slot_index, BasisLabel, BellPopulations,
    PseudospinState, Region, SingleParticle, SpatialConfig, Spin,
};
use crate::{Error, Result, C64};

/// Post-selection below this probability is reported as impossible.
pub const MIN_PROBABILITY: f64 = 1e-12;

/// Tolerance for flagging closed-form probabilities outside `[0, 1]`.
pub const RANGE_TOL: f64 = 1e-9;

const SPINS: [Spin; 2] = [Spin::Up, Spin::Down];

/// The distributed state on `{L↑R↑, L↑R↓, L↓R↑, L↓R↓}` and its success
/// probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistributedState {
    matrix: Matrix4<C64>,
    probability: f64,
}

impl DistributedState {
    /// Validates Hermiticity, unit trace and positivity within `1e-10`.
    pub fn new(matrix: Matrix4<C64>, probability: f64) -> Result<Self> {
        const TOL: f64 = 1e-10;
        if hermiticity_defect(&matrix) > TOL {
            return Err(Error::InvalidState("distributed state is not Hermitian".into()));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TOL || tr.im.abs() > TOL {
            return Err(Error::InvalidState(format!("distributed state has trace {tr}")));
        }
        if hermitian_eigenvalues(&matrix)[0] < -TOL {
            return Err(Error::InvalidState("distributed state is not positive".into()));
        }
        if !(-1e-12..=1.0 + 1e-12).contains(&probability) {
            return Err(Error::InvalidState(format!("probability {probability} outside [0, 1]")));
        }
        Ok(DistributedState {
            matrix,
            probability,
        })
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.matrix
    }

    pub fn probability(&self) -> f64 {
        self.probability
    }

    /// `⟨v|ρ_LR|v⟩` for a normalized vector on the L–R basis.
    pub fn weight(&self, v: &Vector4<C64>) -> f64 {
        (v.adjoint() * self.matrix * v)[(0, 0)].re
    }
}

fn localized_pair(a: Spin, b: Spin) -> (SingleParticle, SingleParticle) {
    (
        SingleParticle::localized(Region::L, a),
        SingleParticle::localized(Region::R, b),
    )
}

fn slot_pair(config: &SpatialConfig, s1: Spin, s2: Spin) -> (SingleParticle, SingleParticle) {
    (
        SingleParticle::new(config.psi1(), s1),
        SingleParticle::new(config.psi2(), s2),
    )
}

/// Unnormalized L–R amplitudes of the identical-particle state built from
/// `label`.
pub fn projected_amplitudes(config: &SpatialConfig, label: BasisLabel) -> Vector4<C64> {
    let stat = config.statistics();
    let mut v = Vector4::zeros();
    for a in SPINS {
        for b in SPINS {
            let (bra1, bra2) = localized_pair(a, b);
            v[slot_index(a, b)] = label
                .slot_terms()
                .into_iter()
                .map(|(coef, s1, s2)| {
                    let (k1, k2) = slot_pair(config, s1, s2);
                    crate::states::symmetrized_amplitude(&bra1, &bra2, &k1, &k2, stat) * coef
                })
                .sum();
        }
    }
    v
}

fn finish(numerator: Matrix4<C64>, weight: f64, norm: f64) -> Result<DistributedState> {
    if norm <= MIN_PROBABILITY {
        return Err(Error::InvalidState(format!("state norm {norm:e} vanishes")));
    }
    let probability = weight / norm;
    if probability.is_nan() || probability < MIN_PROBABILITY {
        return Err(Error::ZeroProbability(probability));
    }
    Ok(DistributedState {
        matrix: hermitian_part(&(numerator / C64::new(weight, 0.0))),
        // weight ≤ norm analytically; only rounding can push the ratio past 1
        probability: probability.min(1.0),
    })
}

/// Projects a basis-diagonal state onto the L–R subspace.
pub fn project(populations: &BellPopulations, config: &SpatialConfig) -> Result<DistributedState> {
    selection_rule_check(config, populations)?;
    let mut numerator = Matrix4::<C64>::zeros();
    let mut weight = 0.0;
    let mut norm = 0.0;
    for (label, q) in populations.iter() {
        if q == 0.0 {
            continue;
        }
        let v = projected_amplitudes(config, label);
        numerator += v * v.adjoint() * C64::new(q, 0.0);
        weight += q * v.norm_squared();
        norm += q * bell_state_norm(config, label);
    }
    finish(numerator, weight, norm)
}

/// `K[(a,b), (s₁,s₂)] = ⟨L a, R b | ψ₁ s₁, ψ₂ s₂⟩`.
pub fn projection_map(config: &SpatialConfig) -> Matrix4<C64> {
    let stat = config.statistics();
    let mut k = Matrix4::zeros();
    for a in SPINS {
        for b in SPINS {
            let (bra1, bra2) = localized_pair(a, b);
            for s1 in SPINS {
                for s2 in SPINS {
                    let (k1, k2) = slot_pair(config, s1, s2);
                    k[(slot_index(a, b), slot_index(s1, s2))] =
                        crate::states::symmetrized_amplitude(&bra1, &bra2, &k1, &k2, stat);
                }
            }
        }
    }
    k
}

/// `G[s′, s] = ⟨ψ₁s′₁, ψ₂s′₂ | ψ₁s₁, ψ₂s₂⟩`.
pub fn gram_matrix(config: &SpatialConfig) -> Matrix4<C64> {
    let stat = config.statistics();
    let mut g = Matrix4::zeros();
    for s1p in SPINS {
        for s2p in SPINS {
            let (b1, b2) = slot_pair(config, s1p, s2p);
            for s1 in SPINS {
                for s2 in SPINS {
                    let (k1, k2) = slot_pair(config, s1, s2);
                    g[(slot_index(s1p, s2p), slot_index(s1, s2))] =
                        crate::states::symmetrized_amplitude(&b1, &b2, &k1, &k2, stat);
                }
            }
        }
    }
    g
}

/// Projects an arbitrary pseudospin matrix, e.g. an oracle output.
pub fn project_pseudospin(state: &PseudospinState, config: &SpatialConfig) -> Result<DistributedState> {
    let rho = state.matrix();
    let k = projection_map(config);
    let numerator = k * rho * k.adjoint();
    let weight = numerator.trace().re;
    let norm = (gram_matrix(config) * rho).trace().re;
    finish(numerator, weight, norm)
}

struct OverlapTerms {
    /// `l²r′² + l′²r²`
    direct: f64,
    /// `l l′ r r′ cos θ`
    interference: f64,
    /// `|⟨ψ₁|ψ₂⟩|²`
    overlap_sq: f64,
    eta: f64,
}

impl OverlapTerms {
    fn new(config: &SpatialConfig) -> Self {
        let (l, r, lp, rp) = (config.l(), config.r(), config.lprime(), config.rprime());
        let interference = l * lp * r * rp * config.theta().cos();
        OverlapTerms {
            direct: l * l * rp * rp + lp * lp * r * r,
            interference,
            overlap_sq: l * l * lp * lp + r * r * rp * rp + 2.0 * interference,
            eta: f64::from(config.statistics().eta()),
        }
    }
}

fn checked_ratio(num: f64, den: f64) -> Result<f64> {
    if den.abs() < MIN_PROBABILITY {
        return Err(Error::ZeroProbability(den));
    }
    let p = num / den;
    if !(-RANGE_TOL..=1.0 + RANGE_TOL).contains(&p) {
        return Err(Error::ProbabilityOutOfRange(p));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Closed-form probability for the initial state `|1₋⟩`, given the channel's
/// surviving-coherence factor `e`.
fn probability_from_factor(channel: ChannelKind, config: &SpatialConfig, e: f64) -> Result<f64> {
    let o = OverlapTerms::new(config);
    let (s, c, q, eta) = (o.direct, o.interference, o.overlap_sq, o.eta);
    match channel {
        ChannelKind::PhaseDamping => checked_ratio(s - 2.0 * eta * c * e, 1.0 - eta * e * q),
        ChannelKind::Depolarizing => {
            let f = 1.0 - 3.0 * e;
            checked_ratio(2.0 * (s + eta * c * f), 2.0 + eta * f * q)
        }
        ChannelKind::AmplitudeDamping => {
            let f = 1.0 - 2.0 * e;
            checked_ratio(s + 2.0 * eta * c * f, 1.0 + eta * f * q)
        }
    }
}

/// Decay rate of the factor that drives `P_LR(t)` for each channel.
fn probability_rate(channel: ChannelKind, config: &SpatialConfig, gamma0: f64) -> Result<f64> {
    Ok(match channel {
        ChannelKind::PhaseDamping => {
            let rates = channel.effective_rates(config, gamma0, gamma0)?;
            decay_pair(&rates, channel.regions()).gamma_minus / 2.0
        }
        ChannelKind::Depolarizing => {
            let rates = channel.effective_rates(config, gamma0, gamma0)?;
            decay_pair(&rates, channel.regions()).gamma_minus
        }
        ChannelKind::AmplitudeDamping => {
            if gamma0 < 0.0 {
                return Err(Error::NegativeRate(gamma0));
            }
            gamma0 * (1.0 - xi(config))
        }
    })
}

/// Closed-form sLOCC probability starting from `|1₋⟩`.
///
/// Phase damping uses `e^{-γ₋t/2}`, the coherence factor of its population
/// solution.
pub fn probability_closed_form(
    channel: ChannelKind,
    config: &SpatialConfig,
    gamma0: f64,
    t: f64,
) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidConfig(format!("time {t} must be finite and non-negative")));
    }
    let rate = probability_rate(channel, config, gamma0)?;
    probability_from_factor(channel, config, (-rate * t).exp())
}

/// Phase-damping probability with the coherence factor written as
/// `e^{-γ₋t}` instead of `e^{-γ₋t/2}`. Kept for comparison only; it does not
/// follow from the dephasing population solution.
pub fn dephasing_probability_as_printed(config: &SpatialConfig, gamma0: f64, t: f64) -> Result<f64> {
    let rate = probability_rate(ChannelKind::PhaseDamping, config, gamma0)? * 2.0;
    probability_from_factor(ChannelKind::PhaseDamping, config, (-rate * t).exp())
}

/// `t → ∞` limit of [`probability_closed_form`]; constant when the driving
/// rate vanishes.
pub fn stationary_probability(channel: ChannelKind, config: &SpatialConfig, gamma0: f64) -> Result<f64> {
    let rate = probability_rate(channel, config, gamma0)?;
    let e = if rate > 0.0 { 0.0 } else { 1.0 };
    probability_from_factor(channel, config, e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{populations_to_pseudospin, Basis, Statistics};
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn singlet_lr() -> Matrix4<C64> {
        let mut m = Matrix4::<C64>::zeros();
        let h = C64::new(0.5, 0.0);
        m[(1, 1)] = h;
        m[(2, 2)] = h;
        m[(1, 2)] = -h;
        m[(2, 1)] = -h;
        m
    }

    fn balanced(theta: f64, stat: Statistics) -> SpatialConfig {
        SpatialConfig::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, theta, stat).unwrap()
    }

    fn one_minus() -> BellPopulations {
        BellPopulations::pure(Basis::Nondissipative, BasisLabel::OneMinus).unwrap()
    }

    #[test]
    fn separated_singlet_is_passed_through() {
        let d = project(&one_minus(), &SpatialConfig::separated(Statistics::Boson)).unwrap();
        assert!((d.matrix() - singlet_lr()).norm() < 1e-15);
        assert!((d.probability() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn overlapping_fermions_succeed_half_the_time() {
        let d = project(&one_minus(), &balanced(0.0, Statistics::Fermion)).unwrap();
        assert!((d.matrix() - singlet_lr()).norm() < 1e-15);
        assert!((d.probability() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn overlapping_bosons_with_pi_phase_always_succeed() {
        let d = project(&one_minus(), &balanced(PI, Statistics::Boson)).unwrap();
        assert!((d.matrix() - singlet_lr()).norm() < 1e-15);
        assert!((d.probability() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn both_particles_in_l_cannot_be_post_selected() {
        let cfg = SpatialConfig::new(1.0, 0.0, 1.0, 0.0, 0.0, Statistics::Boson).unwrap();
        assert!(matches!(project(&one_minus(), &cfg), Err(Error::ForbiddenState(_)) | Err(Error::ZeroProbability(_))));
        let two = BellPopulations::pure(Basis::Dissipative, BasisLabel::Two).unwrap();
        assert!(matches!(project(&two, &cfg), Err(Error::ZeroProbability(_))));
    }

    #[test]
    fn general_projection_agrees_with_basis_projection() {
        for (k, stat) in [Statistics::Boson, Statistics::Fermion].into_iter().enumerate() {
            let cfg = SpatialConfig::from_probabilities(0.3 + 0.2 * k as f64, 0.65, 0.8, stat).unwrap();
            for basis in [Basis::Nondissipative, Basis::Dissipative] {
                let pops = BellPopulations::new(basis, [0.4, 0.1, 0.3, 0.2]).unwrap();
                let a = project(&pops, &cfg).unwrap();
                let b = project_pseudospin(&populations_to_pseudospin(&pops), &cfg).unwrap();
                assert!((a.matrix() - b.matrix()).norm() < 1e-13);
                assert!((a.probability() - b.probability()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn gram_diagonal_matches_bell_norms() {
        let cfg = SpatialConfig::from_probabilities(0.3, 0.6, 1.2, Statistics::Fermion).unwrap();
        let g = gram_matrix(&cfg);
        for label in BasisLabel::ALL {
            let v = label.slot_vector();
            let n = (v.adjoint() * g * v)[(0, 0)];
            assert!((n.re - bell_state_norm(&cfg, label)).abs() < 1e-14);
            assert!(n.im.abs() < 1e-14);
        }
    }

    #[test]
    fn long_time_and_fixed_point_probabilities() {
        // Dephasing, I < 1, t → ∞: |l′r|² + |lr′|².
        let cfg = SpatialConfig::from_probabilities(0.3, 0.8, 0.4, Statistics::Fermion).unwrap();
        let p = probability_closed_form(ChannelKind::PhaseDamping, &cfg, 1.0, 1e4).unwrap();
        let expected = 0.8 * 0.7 + 0.3 * 0.2;
        assert!((p - expected).abs() < 1e-12);
        assert!((stationary_probability(ChannelKind::PhaseDamping, &cfg, 1.0).unwrap() - expected).abs() < 1e-15);

        // Amplitude damping, fermions, θ = π/2, I = 1, l = r′: 1/3 at all times.
        let cfg = balanced(FRAC_PI_2, Statistics::Fermion);
        for t in [0.0, 1.0, 50.0] {
            let p = probability_closed_form(ChannelKind::AmplitudeDamping, &cfg, 1.0, t).unwrap();
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }

        // Amplitude damping, I < 1, θ = π/2, l = r′, t → ∞.
        for stat in [Statistics::Boson, Statistics::Fermion] {
            let a: f64 = 0.7;
            let cfg = SpatialConfig::l_equals_rprime(a, FRAC_PI_2, stat).unwrap();
            let b = 1.0 - a;
            let eta = f64::from(stat.eta());
            let expected = (a * a + b * b) / (1.0 + 2.0 * eta * a * b);
            let p = probability_closed_form(ChannelKind::AmplitudeDamping, &cfg, 1.0, 1e3).unwrap();
            assert!((p - expected).abs() < 1e-12, "{stat}: {p} vs {expected}");
        }
    }

    #[test]
    fn printed_dephasing_form_differs_only_in_time_scale() {
        let cfg = SpatialConfig::l_equals_rprime(0.8, 0.0, Statistics::Fermion).unwrap();
        let a = probability_closed_form(ChannelKind::PhaseDamping, &cfg, 1.0, 2.0).unwrap();
        let b = dephasing_probability_as_printed(&cfg, 1.0, 1.0).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn distributed_state_validation() {
        assert!(DistributedState::new(singlet_lr(), 0.5).is_ok());
        assert!(DistributedState::new(singlet_lr(), 1.5).is_err());
        assert!(DistributedState::new(singlet_lr() * C64::new(2.0, 0.0), 0.5).is_err());
    }
}
