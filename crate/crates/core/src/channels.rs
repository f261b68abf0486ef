//! Effective decay rates and closed-form population dynamics.
//!
//! Localized noise at region `X` couples to the particle in slot `j` with a
//! strength weighted by `|⟨X|ψ_j⟩|`, giving the rates
//! `γ_X^{(i,j)} = γ_{0X} |⟨X|ψ_i⟩| |⟨ψ_j|X⟩|`. The phase θ and the statistics
//! never enter the rates.
//!
//! The closed forms below assume basis-diagonal initial data and stay
//! basis-diagonal; anything else goes through [`crate::oracle`].

use std::fmt;
use std::str::FromStr;

use crate::states::{Basis, BellPopulations, Region, SpatialConfig};
use crate::{Error, Result};

/// Below this distance from `ξ = 1` amplitude damping switches to the
/// degenerate solution.
pub const DEGENERATE_XI_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ChannelKind {
    /// `σ_z` dephasing at both regions.
    PhaseDamping,
    /// Isotropic `σ_x, σ_y, σ_z` noise at region L only.
    Depolarizing,
    /// `σ₋` decay at both regions.
    AmplitudeDamping,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 3] = [
        ChannelKind::PhaseDamping,
        ChannelKind::Depolarizing,
        ChannelKind::AmplitudeDamping,
    ];

    /// Regions with a noise source.
    pub fn regions(self) -> &'static [Region] {
        match self {
            ChannelKind::Depolarizing => &[Region::L],
            _ => &Region::BOTH,
        }
    }

    /// Basis in which the closed forms are written.
    pub fn basis(self) -> Basis {
        match self {
            ChannelKind::AmplitudeDamping => Basis::Dissipative,
            _ => Basis::Nondissipative,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::PhaseDamping => "phase_damping",
            ChannelKind::Depolarizing => "depolarizing",
            ChannelKind::AmplitudeDamping => "amplitude_damping",
        }
    }

    /// Effective rates for this channel; depolarizing noise drops region R.
    pub fn effective_rates(
        self,
        config: &SpatialConfig,
        gamma0_l: f64,
        gamma0_r: f64,
    ) -> Result<EffectiveRates> {
        let gamma0_r = match self {
            ChannelKind::Depolarizing => 0.0,
            _ => gamma0_r,
        };
        build_effective_rates(config, gamma0_l, gamma0_r)
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "phase_damping" | "dephasing" => Ok(ChannelKind::PhaseDamping),
            "depolarizing" => Ok(ChannelKind::Depolarizing),
            "amplitude_damping" => Ok(ChannelKind::AmplitudeDamping),
            other => Err(Error::InvalidConfig(format!("unknown channel `{other}`"))),
        }
    }
}

/// `γ_X^{(i,j)}` for `X ∈ {L, R}`, `i, j ∈ {1, 2}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveRates {
    gamma0_l: f64,
    gamma0_r: f64,
    table: [[[f64; 2]; 2]; 2],
}

impl EffectiveRates {
    pub fn gamma0(&self, region: Region) -> f64 {
        match region {
            Region::L => self.gamma0_l,
            Region::R => self.gamma0_r,
        }
    }

    /// `γ_X^{(i,j)}` with 1-based slot indices.
    pub fn get(&self, region: Region, i: usize, j: usize) -> f64 {
        assert!((1..=2).contains(&i) && (1..=2).contains(&j), "slots are 1 and 2");
        let x = match region {
            Region::L => 0,
            Region::R => 1,
        };
        self.table[x][i - 1][j - 1]
    }

    /// Largest base rate, used to pick integration steps.
    pub fn max_base_rate(&self) -> f64 {
        self.gamma0_l.max(self.gamma0_r)
    }
}

pub fn build_effective_rates(
    config: &SpatialConfig,
    gamma0_l: f64,
    gamma0_r: f64,
) -> Result<EffectiveRates> {
    for g in [gamma0_l, gamma0_r] {
        if g < 0.0 || !g.is_finite() {
            return Err(Error::NegativeRate(g));
        }
    }
    let table = [(Region::L, gamma0_l), (Region::R, gamma0_r)].map(|(region, g0)| {
        let m = [config.modulus(region, 1), config.modulus(region, 2)];
        m.map(|mi| m.map(|mj| g0 * (mi * mj)))
    });
    Ok(EffectiveRates {
        gamma0_l,
        gamma0_r,
        table,
    })
}

/// Collective and relative decay rates `γ±`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayPair {
    pub gamma_plus: f64,
    pub gamma_minus: f64,
}

/// `γ± = Σ_{X ∈ regions} Σ_{i,j} (±1)^{i+j} γ_X^{(i,j)}`.
pub fn decay_pair(rates: &EffectiveRates, regions: &[Region]) -> DecayPair {
    assert!(!regions.is_empty(), "decay_pair needs at least one region");
    let mut pair = DecayPair {
        gamma_plus: 0.0,
        gamma_minus: 0.0,
    };
    for &region in regions {
        for i in 1..=2 {
            for j in 1..=2 {
                let g = rates.get(region, i, j);
                pair.gamma_plus += g;
                pair.gamma_minus += if (i + j) % 2 == 0 { g } else { -g };
            }
        }
    }
    pair
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("time {t} must be finite and non-negative")))
    }
}

fn require_basis(p0: &BellPopulations, basis: Basis) -> Result<()> {
    if p0.basis() == basis {
        Ok(())
    } else {
        Err(Error::InvalidPopulations(format!(
            "expected {basis:?} basis, got {:?}",
            p0.basis()
        )))
    }
}

/// Phase damping: each excitation sector relaxes towards equal weights.
pub fn dephasing_populations(p0: &BellPopulations, pair: DecayPair, t: f64) -> Result<BellPopulations> {
    require_basis(p0, Basis::Nondissipative)?;
    check_time(t)?;
    let [p1m, p1p, p2p, p2m] = p0.values();
    let e1 = (-pair.gamma_minus * t / 2.0).exp();
    let e2 = (-pair.gamma_plus * t / 2.0).exp();
    let mix = |e: f64, same: f64, other: f64| 0.5 * (1.0 + e) * same + 0.5 * (1.0 - e) * other;
    Ok(BellPopulations::from_raw(
        Basis::Nondissipative,
        [
            mix(e1, p1m, p1p),
            mix(e1, p1p, p1m),
            mix(e2, p2p, p2m),
            mix(e2, p2m, p2p),
        ],
    ))
}

/// Depolarizing noise at L: the singlet relaxes at `γ₋`, the triplet states at
/// `(3γ₊ + γ₋)/4`.
pub fn depolarizing_populations(p0: &BellPopulations, pair: DecayPair, t: f64) -> Result<BellPopulations> {
    require_basis(p0, Basis::Nondissipative)?;
    check_time(t)?;
    let p = p0.values();
    let singlet = (-pair.gamma_minus * t).exp();
    let triplet = (-(3.0 * pair.gamma_plus + pair.gamma_minus) * t / 4.0).exp();
    let feed = (1.0 - 4.0 * p[0]) / 12.0 * (singlet - triplet);
    let mut out = [0.0; 4];
    out[0] = p[0] * singlet + 0.25 * (1.0 - singlet);
    for k in 1..4 {
        out[k] = p[k] * triplet + 0.25 * (1.0 - triplet) + feed;
    }
    Ok(BellPopulations::from_raw(Basis::Nondissipative, out))
}

/// Amplitude damping with equal base rate `gamma0` at both regions.
///
/// Uses the general solution for `ξ < 1` and its `ξ → 1` limit otherwise.
pub fn amplitude_damping_populations(
    p0: &BellPopulations,
    config: &SpatialConfig,
    gamma0: f64,
    t: f64,
) -> Result<BellPopulations> {
    require_basis(p0, Basis::Dissipative)?;
    check_time(t)?;
    if gamma0 < 0.0 {
        return Err(Error::NegativeRate(gamma0));
    }
    let [p1m, p1p, p2, _] = p0.values();
    let overlap = xi(config);
    let gt = gamma0 * t;
    let e2 = (-2.0 * gt).exp();
    let p2_t = p2 * e2;

    let (p1m_t, p1p_t) = if (1.0 - overlap).abs() < DEGENERATE_XI_TOL {
        (p1m, p1p * e2 + 2.0 * p2 * gt * e2)
    } else {
        let ep = (-(1.0 + overlap) * gt).exp();
        let em = (-(1.0 - overlap) * gt).exp();
        (
            p1m * em + (1.0 - overlap) / (1.0 + overlap) * p2 * (em - e2),
            // e^{-(1+ξ)γt} − e^{-2γt} = e^{-2γt}·expm1((1−ξ)γt), exact near ξ = 1
            p1p * ep + (1.0 + overlap) * p2 * e2 * ((1.0 - overlap) * gt).exp_m1() / (1.0 - overlap),
        )
    };
    let p0_t = 1.0 - p1m_t - p1p_t - p2_t;
    Ok(BellPopulations::from_raw(
        Basis::Dissipative,
        [p1m_t, p1p_t, p2_t, p0_t],
    ))
}

/// Closed-form populations at dimensionless time `gamma0 · t`, with the same
/// base rate at every noisy region.
pub fn closed_form_populations(
    channel: ChannelKind,
    p0: &BellPopulations,
    config: &SpatialConfig,
    gamma0: f64,
    t: f64,
) -> Result<BellPopulations> {
    match channel {
        ChannelKind::AmplitudeDamping => amplitude_damping_populations(p0, config, gamma0, t),
        ChannelKind::PhaseDamping | ChannelKind::Depolarizing => {
            let rates = channel.effective_rates(config, gamma0, gamma0)?;
            let pair = decay_pair(&rates, channel.regions());
            if channel == ChannelKind::PhaseDamping {
                dephasing_populations(p0, pair, t)
            } else {
                depolarizing_populations(p0, pair, t)
            }
        }
    }
}

/// Spatial overlap parameter `ξ = l l′ + r r′`.
pub fn xi(config: &SpatialConfig) -> f64 {
    config.l() * config.lprime() + config.r() * config.rprime()
}

/// Long-time concurrence of the distributed state starting from `|1₋⟩`.
///
/// The phase damping and depolarizing expressions are the `l = r′` figure
/// configuration; amplitude damping keeps its entanglement only at `ξ = 1`.
pub fn stationary_concurrence(channel: ChannelKind, config: &SpatialConfig) -> f64 {
    let a = config.l() * config.l();
    let b = config.lprime() * config.lprime();
    match channel {
        ChannelKind::PhaseDamping => 2.0 * a * b / (a * a + b * b),
        ChannelKind::Depolarizing => {
            (3.0 * a * b / (2.0 * (a * a + b * b - a * b)) - 0.5).max(0.0)
        }
        ChannelKind::AmplitudeDamping => {
            if (1.0 - xi(config)).abs() < DEGENERATE_XI_TOL {
                1.0
            } else {
                0.0
            }
        }
    }
}
