//! Brute-force Lindblad propagation used as an independent check on the
//! closed forms in [`crate::channels`].
//!
//! The generator is assembled explicitly as a 16×16 matrix acting on
//! column-stacked density matrices, `vec(ρ)[4·col + row] = ρ[row, col]`,
//! with the identities
//!
//! ```text
//! vec(A ρ B†) = (conj(B) ⊗ A) vec(ρ)
//! vec(M ρ)    = (𝟙 ⊗ M) vec(ρ)
//! vec(ρ M)    = (Mᵀ ⊗ 𝟙) vec(ρ)
//! ```
//!
//! so every cross term reads
//! `γ_X^{(i,j)} [conj(A_j) ⊗ A_i − ½ 𝟙 ⊗ A_j†A_i − ½ (A_j†A_i)ᵀ ⊗ 𝟙]`.
//!
//! Jump operators are spin-½ operators: `σ_z/2` for dephasing, `σ_n/2`
//! (n = x, y, z) for depolarizing noise and `σ₋ = |↓⟩⟨↑|` for amplitude
//! damping. Slot 1 is the left tensor factor.

use nalgebra::{Matrix2, Matrix4, SMatrix, SVector};

use crate::channels::{ChannelKind, EffectiveRates};
use crate::linalg::hermitian_part;
use crate::states::{PseudospinState, Region};
use crate::{Error, Result, C64};

pub type Generator = SMatrix<C64, 16, 16>;
type Vec16 = SVector<C64, 16>;

/// Largest allowed `dt · max_row_sum(|L|)` for RK4 stepping.
pub const STABILITY_LIMIT: f64 = 0.5;

/// Vectorized Lindblad generator.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    matrix: Generator,
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn kron(a: &Matrix4<C64>, b: &Matrix4<C64>) -> Generator {
    let mut out = Generator::zeros();
    for i in 0..4 {
        for j in 0..4 {
            out.fixed_view_mut::<4, 4>(4 * i, 4 * j).copy_from(&(b * a[(i, j)]));
        }
    }
    out
}

fn embed(op: &Matrix2<C64>, slot: usize) -> Matrix4<C64> {
    let id = Matrix2::<C64>::identity();
    match slot {
        1 => op.kronecker(&id),
        2 => id.kronecker(op),
        _ => unreachable!("two slots"),
    }
}

/// Single-particle jump operators for a channel.
pub fn jump_operators(channel: ChannelKind) -> Vec<Matrix2<C64>> {
    let i = C64::new(0.0, 1.0);
    let sx = Matrix2::new(c(0.0), c(1.0), c(1.0), c(0.0));
    let sy = Matrix2::new(c(0.0), -i, i, c(0.0));
    let sz = Matrix2::new(c(1.0), c(0.0), c(0.0), c(-1.0));
    let half = c(0.5);
    match channel {
        ChannelKind::PhaseDamping => vec![sz * half],
        ChannelKind::Depolarizing => vec![sx * half, sy * half, sz * half],
        ChannelKind::AmplitudeDamping => vec![Matrix2::new(c(0.0), c(0.0), c(1.0), c(0.0))],
    }
}

fn vectorize(m: &Matrix4<C64>) -> Vec16 {
    Vec16::from_column_slice(m.as_slice())
}

fn unvectorize(v: &Vec16) -> Matrix4<C64> {
    Matrix4::from_column_slice(v.as_slice())
}

impl Superoperator {
    pub fn from_matrix(matrix: Generator) -> Self {
        Superoperator { matrix }
    }

    pub fn matrix(&self) -> &Generator {
        &self.matrix
    }

    /// `L(ρ)` as a 4×4 matrix.
    pub fn apply(&self, rho: &Matrix4<C64>) -> Matrix4<C64> {
        unvectorize(&(self.matrix * vectorize(rho)))
    }

    /// Max row sum of `|L|`, an upper bound on the spectral radius.
    pub fn row_sum_bound(&self) -> f64 {
        self.matrix
            .row_iter()
            .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest `|Tr L(E_ab)|` over matrix units; zero for a trace-preserving
    /// generator.
    pub fn trace_defect(&self) -> f64 {
        // Tr ρ = Σ_k vec(ρ)[5k], so the trace functional picks rows 0, 5, 10, 15.
        (0..16)
            .map(|col| (0..4).map(|k| self.matrix[(5 * k, col)]).sum::<C64>().norm())
            .fold(0.0, f64::max)
    }
}

/// Assembles the cross-term generator for `channel` from the rate table.
pub fn build_generator(channel: ChannelKind, rates: &EffectiveRates) -> Superoperator {
    let id = Matrix4::<C64>::identity();
    let mut matrix = Generator::zeros();
    for op in jump_operators(channel) {
        let slots = [embed(&op, 1), embed(&op, 2)];
        for region in Region::BOTH {
            for i in 1..=2 {
                for j in 1..=2 {
                    let g = rates.get(region, i, j);
                    if g == 0.0 {
                        continue;
                    }
                    let a_i = &slots[i - 1];
                    let a_j = &slots[j - 1];
                    let decay = a_j.adjoint() * a_i;
                    let term = kron(&a_j.conjugate(), a_i)
                        - kron(&id, &decay) * c(0.5)
                        - kron(&decay.transpose(), &id) * c(0.5);
                    matrix += term * c(g);
                }
            }
        }
    }
    Superoperator { matrix }
}

/// Default RK4 step `1e-3 / γ_max`.
pub fn default_step(rates: &EffectiveRates) -> f64 {
    let g = rates.max_base_rate();
    if g > 0.0 {
        1e-3 / g
    } else {
        1e-3
    }
}

fn rk4_step(l: &Generator, v: &Vec16, h: f64) -> Vec16 {
    let h = c(h);
    let k1 = l * v;
    let k2 = l * (v + k1 * (h * 0.5));
    let k3 = l * (v + k2 * (h * 0.5));
    let k4 = l * (v + k3 * h);
    v + (k1 + k2 * c(2.0) + k3 * c(2.0) + k4) * (h / 6.0)
}

/// Fixed-step classical RK4 from 0 to `t`; the last step is shortened to
/// land on `t`. The result is Hermitized once at the end.
pub fn integrate(
    generator: &Superoperator,
    rho0: &PseudospinState,
    t: f64,
    dt: f64,
) -> Result<PseudospinState> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidConfig(format!("time {t} must be finite and non-negative")));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidConfig(format!("step {dt} must be positive")));
    }
    let bound = generator.row_sum_bound();
    if dt * bound > STABILITY_LIMIT {
        return Err(Error::StepTooLarge { dt, bound });
    }
    if t == 0.0 {
        return Ok(*rho0);
    }
    let l = generator.matrix();
    let mut v = vectorize(rho0.matrix());
    let full = (t / dt).floor() as u64;
    for _ in 0..full {
        v = rk4_step(l, &v, dt);
    }
    let rest = t - full as f64 * dt;
    if rest > 1e-15 * t {
        v = rk4_step(l, &v, rest);
    }
    Ok(PseudospinState::from_matrix_unchecked(hermitian_part(
        &unvectorize(&v),
    )))
}

/// `exp(L t)` via scaling and squaring with Padé approximants.
pub fn propagator(generator: &Superoperator, t: f64) -> Generator {
    (generator.matrix() * c(t)).exp()
}

/// Applies `exp(L t)` to `rho0`.
pub fn expm_propagate(generator: &Superoperator, rho0: &PseudospinState, t: f64) -> PseudospinState {
    let v = propagator(generator, t) * vectorize(rho0.matrix());
    PseudospinState::from_matrix_unchecked(hermitian_part(&unvectorize(&v)))
}
