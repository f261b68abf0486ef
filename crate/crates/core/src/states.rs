//! Two-qubit identical-particle state space.
//!
//! Dynamics act on a 4×4 pseudospin matrix over the slot-ordered basis
//! `{↑↑, ↑↓, ↓↑, ↓↓}`, where slot `j` is the position of the particle with
//! spatial wave function `ψ_j` in the two-particle state vector. The spatial
//! part ([`SpatialConfig`]) is carried alongside and only enters through the
//! effective decay rates and the sLOCC projection.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix4, Vector4};

use crate::linalg::{hermitian_eigenvalues, hermiticity_defect};
use crate::{Error, Result, C64};

/// Tolerance on `l² + r² = 1` and `l′² + r′² = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// A basis state whose normalization falls at or below this is forbidden.
pub const FORBIDDEN_TOL: f64 = 1e-12;

/// Tolerance on population sums and ranges.
pub const POPULATION_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Statistics {
    Boson,
    Fermion,
}

impl Statistics {
    /// Exchange sign η: +1 for bosons, −1 for fermions.
    pub fn eta(self) -> i32 {
        match self {
            Statistics::Boson => 1,
            Statistics::Fermion => -1,
        }
    }

    pub(crate) fn eta_f64(self) -> f64 {
        f64::from(self.eta())
    }
}

impl fmt::Display for Statistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Statistics::Boson => "boson",
            Statistics::Fermion => "fermion",
        })
    }
}

impl FromStr for Statistics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "boson" | "bosons" => Ok(Statistics::Boson),
            "fermion" | "fermions" => Ok(Statistics::Fermion),
            other => Err(Error::InvalidConfig(format!("unknown statistics `{other}`"))),
        }
    }
}

/// One of the two detection/noise regions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Region {
    L,
    R,
}

impl Region {
    pub const BOTH: [Region; 2] = [Region::L, Region::R];

    fn index(self) -> usize {
        match self {
            Region::L => 0,
            Region::R => 1,
        }
    }
}

/// Spatial wave functions `|ψ₁⟩ = l|L⟩ + r|R⟩`, `|ψ₂⟩ = l′|L⟩ + r′e^{iθ}|R⟩`
/// together with the particle statistics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpatialConfig {
    l: f64,
    r: f64,
    lprime: f64,
    rprime: f64,
    theta: f64,
    statistics: Statistics,
}

impl SpatialConfig {
    pub fn new(
        l: f64,
        r: f64,
        lprime: f64,
        rprime: f64,
        theta: f64,
        statistics: Statistics,
    ) -> Result<Self> {
        for (name, v) in [("l", l), ("r", r), ("l'", lprime), ("r'", rprime), ("theta", theta)] {
            if !v.is_finite() {
                return Err(Error::InvalidConfig(format!("{name} is not finite")));
            }
        }
        for (name, v) in [("l", l), ("r", r), ("l'", lprime), ("r'", rprime)] {
            if v < 0.0 {
                return Err(Error::InvalidConfig(format!("{name} = {v} is negative")));
            }
        }
        let n1 = l * l + r * r;
        let n2 = lprime * lprime + rprime * rprime;
        if (n1 - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidConfig(format!("l² + r² = {n1}, expected 1")));
        }
        if (n2 - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidConfig(format!("l'² + r'² = {n2}, expected 1")));
        }
        Ok(SpatialConfig {
            l,
            r,
            lprime,
            rprime,
            theta,
            statistics,
        })
    }

    /// Builds the configuration from the detection probabilities `l²`, `l′²`.
    pub fn from_probabilities(
        l2: f64,
        lprime2: f64,
        theta: f64,
        statistics: Statistics,
    ) -> Result<Self> {
        for (name, p) in [("l²", l2), ("l'²", lprime2)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!("{name} = {p} outside [0, 1]")));
            }
        }
        Self::new(
            l2.sqrt(),
            (1.0 - l2).sqrt(),
            lprime2.sqrt(),
            (1.0 - lprime2).sqrt(),
            theta,
            statistics,
        )
    }

    /// The `l = r′` branch used by every figure (so `r = l′` as well).
    pub fn l_equals_rprime(l2: f64, theta: f64, statistics: Statistics) -> Result<Self> {
        Self::from_probabilities(l2, 1.0 - l2, theta, statistics)
    }

    /// ψ₁ entirely in L, ψ₂ entirely in R.
    pub fn separated(statistics: Statistics) -> Self {
        SpatialConfig {
            l: 1.0,
            r: 0.0,
            lprime: 0.0,
            rprime: 1.0,
            theta: 0.0,
            statistics,
        }
    }

    pub fn l(&self) -> f64 {
        self.l
    }
    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn lprime(&self) -> f64 {
        self.lprime
    }
    pub fn rprime(&self) -> f64 {
        self.rprime
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_statistics(mut self, statistics: Statistics) -> Self {
        self.statistics = statistics;
        self
    }

    /// Amplitudes of ψ₁ over `(L, R)`.
    pub fn psi1(&self) -> [C64; 2] {
        [C64::new(self.l, 0.0), C64::new(self.r, 0.0)]
    }

    /// Amplitudes of ψ₂ over `(L, R)`.
    pub fn psi2(&self) -> [C64; 2] {
        [
            C64::new(self.lprime, 0.0),
            C64::from_polar(self.rprime, self.theta),
        ]
    }

    /// `|⟨X|ψ_j⟩|` for slot `j ∈ {1, 2}`.
    pub fn modulus(&self, region: Region, slot: usize) -> f64 {
        match (region, slot) {
            (Region::L, 1) => self.l,
            (Region::R, 1) => self.r,
            (Region::L, 2) => self.lprime,
            (Region::R, 2) => self.rprime,
            _ => panic!("slot must be 1 or 2, got {slot}"),
        }
    }

    /// `⟨ψ₁|ψ₂⟩ = l l′ + r r′ e^{iθ}`.
    pub fn overlap(&self) -> C64 {
        C64::new(self.l * self.lprime, 0.0) + C64::from_polar(self.r * self.rprime, self.theta)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Spin {
    Up,
    Down,
}

/// A single-particle state: spatial amplitudes over `(L, R)` and a pseudospin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingleParticle {
    pub spatial: [C64; 2],
    pub spin: Spin,
}

impl SingleParticle {
    pub fn new(spatial: [C64; 2], spin: Spin) -> Self {
        SingleParticle { spatial, spin }
    }

    /// A particle sharply localized in `region`.
    pub fn localized(region: Region, spin: Spin) -> Self {
        let mut spatial = [C64::new(0.0, 0.0); 2];
        spatial[region.index()] = C64::new(1.0, 0.0);
        SingleParticle { spatial, spin }
    }

    /// `⟨self|ket⟩`.
    pub fn inner(&self, ket: &SingleParticle) -> C64 {
        if self.spin != ket.spin {
            return C64::new(0.0, 0.0);
        }
        self.spatial
            .iter()
            .zip(ket.spatial.iter())
            .map(|(b, k)| b.conj() * k)
            .sum()
    }
}

/// Two-particle amplitude `⟨φ′₁,φ′₂|φ₁,φ₂⟩ = ⟨φ′₁|φ₁⟩⟨φ′₂|φ₂⟩ + η⟨φ′₁|φ₂⟩⟨φ′₂|φ₁⟩`.
pub fn symmetrized_amplitude(
    bra1: &SingleParticle,
    bra2: &SingleParticle,
    ket1: &SingleParticle,
    ket2: &SingleParticle,
    statistics: Statistics,
) -> C64 {
    bra1.inner(ket1) * bra2.inner(ket2) + bra1.inner(ket2) * bra2.inner(ket1) * statistics.eta_f64()
}

/// Channel-adapted basis states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisLabel {
    /// `(↑↓ − ↓↑)/√2`
    OneMinus,
    /// `(↑↓ + ↓↑)/√2`
    OnePlus,
    /// `(↑↑ + ↓↓)/√2`
    TwoPlus,
    /// `(↑↑ − ↓↓)/√2`
    TwoMinus,
    /// `↑↑`
    Two,
    /// `↓↓`
    Zero,
}

impl BasisLabel {
    pub const ALL: [BasisLabel; 6] = [
        BasisLabel::OneMinus,
        BasisLabel::OnePlus,
        BasisLabel::TwoPlus,
        BasisLabel::TwoMinus,
        BasisLabel::Two,
        BasisLabel::Zero,
    ];

    /// Slot-basis components `(coefficient, s₁, s₂)`.
    pub fn slot_terms(self) -> Vec<(f64, Spin, Spin)> {
        use Spin::{Down, Up};
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            BasisLabel::OneMinus => vec![(h, Up, Down), (-h, Down, Up)],
            BasisLabel::OnePlus => vec![(h, Up, Down), (h, Down, Up)],
            BasisLabel::TwoPlus => vec![(h, Up, Up), (h, Down, Down)],
            BasisLabel::TwoMinus => vec![(h, Up, Up), (-h, Down, Down)],
            BasisLabel::Two => vec![(1.0, Up, Up)],
            BasisLabel::Zero => vec![(1.0, Down, Down)],
        }
    }

    /// Column vector over the slot basis `{↑↑, ↑↓, ↓↑, ↓↓}`.
    pub fn slot_vector(self) -> Vector4<C64> {
        let mut v = Vector4::zeros();
        for (c, s1, s2) in self.slot_terms() {
            v[slot_index(s1, s2)] += C64::new(c, 0.0);
        }
        v
    }

    pub fn name(self) -> &'static str {
        match self {
            BasisLabel::OneMinus => "one_minus",
            BasisLabel::OnePlus => "one_plus",
            BasisLabel::TwoPlus => "two_plus",
            BasisLabel::TwoMinus => "two_minus",
            BasisLabel::Two => "two",
            BasisLabel::Zero => "zero",
        }
    }

    /// Whether the normalization takes the `1 − η|⟨ψ₁|ψ₂⟩|²` form.
    fn is_antisymmetric(self) -> bool {
        self == BasisLabel::OneMinus
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BasisLabel::OneMinus => "1-",
            BasisLabel::OnePlus => "1+",
            BasisLabel::TwoPlus => "2+",
            BasisLabel::TwoMinus => "2-",
            BasisLabel::Two => "2",
            BasisLabel::Zero => "0",
        })
    }
}

impl FromStr for BasisLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        BasisLabel::ALL
            .into_iter()
            .find(|l| l.name() == s || l.to_string() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown basis state `{s}`")))
    }
}

pub(crate) fn slot_index(s1: Spin, s2: Spin) -> usize {
    match (s1, s2) {
        (Spin::Up, Spin::Up) => 0,
        (Spin::Up, Spin::Down) => 1,
        (Spin::Down, Spin::Up) => 2,
        (Spin::Down, Spin::Down) => 3,
    }
}

/// Which of the two four-state bases a population vector refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Basis {
    /// `(1₋, 1₊, 2₊, 2₋)`, used by phase damping and depolarizing noise.
    Nondissipative,
    /// `(1₋, 1₊, 2, 0)`, used by amplitude damping.
    Dissipative,
}

impl Basis {
    pub fn labels(self) -> [BasisLabel; 4] {
        match self {
            Basis::Nondissipative => [
                BasisLabel::OneMinus,
                BasisLabel::OnePlus,
                BasisLabel::TwoPlus,
                BasisLabel::TwoMinus,
            ],
            Basis::Dissipative => [
                BasisLabel::OneMinus,
                BasisLabel::OnePlus,
                BasisLabel::Two,
                BasisLabel::Zero,
            ],
        }
    }

    pub fn position(self, label: BasisLabel) -> Option<usize> {
        self.labels().iter().position(|&l| l == label)
    }
}

/// Norm `N_u` of the identical-particle basis state built from `label`.
///
/// `N₁₋ = 1 − η|⟨ψ₁|ψ₂⟩|²`, every other label `1 + η|⟨ψ₁|ψ₂⟩|²`.
pub fn bell_state_norm(config: &SpatialConfig, label: BasisLabel) -> f64 {
    let s = config.statistics().eta_f64() * config.overlap().norm_sqr();
    if label.is_antisymmetric() {
        1.0 - s
    } else {
        1.0 + s
    }
}

/// Populations over one of the channel-adapted bases.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BellPopulations {
    basis: Basis,
    p: [f64; 4],
}

impl BellPopulations {
    pub fn new(basis: Basis, p: [f64; 4]) -> Result<Self> {
        for (label, &x) in basis.labels().iter().zip(p.iter()) {
            if !(-POPULATION_TOL..=1.0 + POPULATION_TOL).contains(&x) {
                return Err(Error::InvalidPopulations(format!("p[{label}] = {x} outside [0, 1]")));
            }
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > POPULATION_TOL {
            return Err(Error::InvalidPopulations(format!("populations sum to {sum}")));
        }
        Ok(BellPopulations { basis, p })
    }

    /// Skips validation; used for values produced by trace-preserving maps.
    pub(crate) fn from_raw(basis: Basis, p: [f64; 4]) -> Self {
        BellPopulations { basis, p }
    }

    /// All weight on one basis state.
    pub fn pure(basis: Basis, label: BasisLabel) -> Result<Self> {
        let i = basis.position(label).ok_or_else(|| {
            Error::InvalidPopulations(format!("|{label}> is not part of the {basis:?} basis"))
        })?;
        let mut p = [0.0; 4];
        p[i] = 1.0;
        Ok(BellPopulations { basis, p })
    }

    pub fn uniform(basis: Basis) -> Self {
        BellPopulations { basis, p: [0.25; 4] }
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn labels(&self) -> [BasisLabel; 4] {
        self.basis.labels()
    }

    pub fn values(&self) -> [f64; 4] {
        self.p
    }

    pub fn get(&self, label: BasisLabel) -> Option<f64> {
        self.basis.position(label).map(|i| self.p[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (BasisLabel, f64)> + '_ {
        self.labels().into_iter().zip(self.p)
    }
}

/// Rejects populations that put weight on a statistics-forbidden state.
pub fn selection_rule_check(config: &SpatialConfig, populations: &BellPopulations) -> Result<()> {
    for (label, p) in populations.iter() {
        if p > FORBIDDEN_TOL && bell_state_norm(config, label) <= FORBIDDEN_TOL {
            return Err(Error::ForbiddenState(label));
        }
    }
    Ok(())
}

/// Density matrix over the slot-ordered pseudospin basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PseudospinState {
    matrix: Matrix4<C64>,
}

impl PseudospinState {
    pub const HERMITIAN_TOL: f64 = 1e-12;
    pub const TRACE_TOL: f64 = 1e-12;
    pub const PSD_TOL: f64 = 1e-10;

    pub fn new(matrix: Matrix4<C64>) -> Result<Self> {
        let defect = hermiticity_defect(&matrix);
        if defect > Self::HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (defect {defect:e})")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > Self::TRACE_TOL || tr.im.abs() > Self::TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let min = hermitian_eigenvalues(&matrix)[0];
        if min < -Self::PSD_TOL {
            return Err(Error::InvalidState(format!("eigenvalue {min:e} < 0")));
        }
        Ok(PseudospinState { matrix })
    }

    pub(crate) fn from_matrix_unchecked(matrix: Matrix4<C64>) -> Self {
        PseudospinState { matrix }
    }

    /// Pure state from a (not necessarily normalized) slot-basis vector.
    pub fn from_vector(v: &Vector4<C64>) -> Result<Self> {
        let n = v.norm_squared();
        if n < 1e-300 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Ok(PseudospinState {
            matrix: v * v.adjoint() / C64::new(n, 0.0),
        })
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.matrix
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.matrix)[0]
    }

    /// `⟨u|ρ|u⟩` for every state of `basis`.
    pub fn populations(&self, basis: Basis) -> BellPopulations {
        let p = basis.labels().map(|label| {
            let v = label.slot_vector();
            (v.adjoint() * self.matrix * v)[(0, 0)].re
        });
        BellPopulations::from_raw(basis, p)
    }
}

/// `Σ_u p_u |u⟩⟨u|` over the slot basis.
pub fn populations_to_pseudospin(populations: &BellPopulations) -> PseudospinState {
    let matrix = populations
        .iter()
        .fold(Matrix4::zeros(), |acc, (label, p)| {
            let v = label.slot_vector();
            acc + v * v.adjoint() * C64::new(p, 0.0)
        });
    PseudospinState { matrix }
}
