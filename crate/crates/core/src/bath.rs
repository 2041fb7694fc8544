//! Dissipative two-qubit bath with random-telegraph-noise statistics.
//!
//! The bath consists of two damped qubits with Hamiltonian
//! `H_B = Σⱼ (ωⱼ/2) σ_z^j` and jump rates `Γⱼ±`; its generator is
//!
//! ```text
//! 𝓛_B = −i[H_B, ·] + Σⱼ ( Γⱼ⁺ 𝓓_{σⱼ⁺} + Γⱼ⁻ 𝓓_{σⱼ⁻} ).
//! ```
//!
//! The system couples through `B± = λ σ₁∓ σ₂±`, and the reduced dynamics of
//! anything attached to this bath is fully determined by the n-point
//! correlation functions
//!
//! ```text
//! χₙ = Tr[ B^{k₁}_{l₁} e^{𝓛_B(t₁−t₂)} 𝓠 B^{k₂}_{l₂} ⋯ 𝓠 B^{kₙ}_{lₙ} ρ_B^eq ],
//! ```
//!
//! where `l = ±` selects left/right multiplication, `𝓠 = 1 − ρ_B^eq Tr` and
//! times are ordered `t₁ ≥ … ≥ tₙ`. This module provides the closed forms of
//! these correlators (they factor into two-point and two-point-like pieces),
//! a literal Liouville-space oracle for cross-checking them, and white-noise
//! diagnostics of the `Γ⁻ → ∞, λ → ∞` limit at fixed `μ = λ/Γ₁⁻`.

use num_complex::Complex64 as C64;
use std::fmt;

use crate::error::{Error, Result};
use crate::lindblad::{gksl_liouvillian, DensityMatrix};
use crate::operator::{
    basis_ket, kron, left_mult, right_mult, sigma_minus, sigma_plus, unvectorize, vectorize,
    Operator, SuperOperator,
};
use crate::quad::adaptive_simpson;

/// Sign label used for both the left/right index `l` and the `B^±` index `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    /// Sign of the product of two labels.
    pub fn times(self, other: Sign) -> Sign {
        if self == other {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sign::Plus => write!(f, "+"),
            Sign::Minus => write!(f, "-"),
        }
    }
}

/// Index pair `(l, k)` of one correlator insertion `B^k_l`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CorrelatorIndex {
    /// `+` for left multiplication, `−` for right multiplication.
    pub l: Sign,
    /// The `B^±` label.
    pub k: Sign,
}

impl CorrelatorIndex {
    pub fn new(l: Sign, k: Sign) -> Self {
        Self { l, k }
    }

    /// Product `l·k`, which selects the projector `ρ_B^{lk}` in the product
    /// decomposition.
    pub fn lk(&self) -> Sign {
        self.l.times(self.k)
    }
}

/// An n-point correlator request: ordered insertions and descending times.
#[derive(Clone, Debug)]
pub struct CorrelatorSpec {
    indices: Vec<CorrelatorIndex>,
    times: Vec<f64>,
}

impl CorrelatorSpec {
    pub fn new(indices: Vec<CorrelatorIndex>, times: Vec<f64>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidParameter("empty correlator spec".into()));
        }
        if indices.len() != times.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} indices vs {} times",
                indices.len(),
                times.len()
            )));
        }
        if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::InvalidParameter(
                "correlator times must be finite and non-negative".into(),
            ));
        }
        if times.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidParameter(
                "correlator times must be descending".into(),
            ));
        }
        Ok(Self { indices, times })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[CorrelatorIndex] {
        &self.indices
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }
}

/// Parameters of the two-qubit bath.
#[derive(Clone, Debug)]
pub struct BathParams {
    pub omega1: f64,
    pub omega2: f64,
    pub gamma1_plus: f64,
    pub gamma1_minus: f64,
    pub gamma2_plus: f64,
    pub gamma2_minus: f64,
    /// System-bath coupling strength λ.
    pub lambda: f64,
    /// Inverse temperature; set when constructed in detailed-balance mode.
    pub beta: Option<f64>,
}

impl BathParams {
    pub fn new(
        omega1: f64,
        omega2: f64,
        gamma1_plus: f64,
        gamma1_minus: f64,
        gamma2_plus: f64,
        gamma2_minus: f64,
        lambda: f64,
    ) -> Result<Self> {
        let p = Self {
            omega1,
            omega2,
            gamma1_plus,
            gamma1_minus,
            gamma2_plus,
            gamma2_minus,
            lambda,
            beta: None,
        };
        p.validate()?;
        Ok(p)
    }

    /// Construct with `Γⱼ⁺ = Γⱼ⁻ e^{−βωⱼ}`, which makes the bath Gibbs state
    /// the thermal state of `H_B` at inverse temperature β.
    pub fn detailed_balance(
        omega1: f64,
        omega2: f64,
        beta: f64,
        gamma1_minus: f64,
        gamma2_minus: f64,
        lambda: f64,
    ) -> Result<Self> {
        let p = Self {
            omega1,
            omega2,
            gamma1_plus: gamma1_minus * (-beta * omega1).exp(),
            gamma1_minus,
            gamma2_plus: gamma2_minus * (-beta * omega2).exp(),
            gamma2_minus,
            lambda,
            beta: Some(beta),
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        for rate in [
            self.gamma1_plus,
            self.gamma1_minus,
            self.gamma2_plus,
            self.gamma2_minus,
        ] {
            if rate < 0.0 || !rate.is_finite() {
                return Err(Error::NegativeRate(rate));
            }
        }
        if self.gamma1() <= 0.0 || self.gamma2() <= 0.0 {
            return Err(Error::InvalidParameter(
                "total rates γⱼ = Γⱼ⁺ + Γⱼ⁻ must be positive".into(),
            ));
        }
        if self.lambda != 0.0 && self.gamma1_minus == 0.0 {
            return Err(Error::InvalidParameter(
                "μ = λ/Γ₁⁻ must be finite (Γ₁⁻ > 0 required for λ ≠ 0)".into(),
            ));
        }
        if !self.lambda.is_finite() || !self.omega1.is_finite() || !self.omega2.is_finite() {
            return Err(Error::InvalidParameter("non-finite bath parameter".into()));
        }
        Ok(())
    }

    pub fn gamma1(&self) -> f64 {
        self.gamma1_plus + self.gamma1_minus
    }

    pub fn gamma2(&self) -> f64 {
        self.gamma2_plus + self.gamma2_minus
    }

    /// Effective coupling strength `μ = λ/Γ₁⁻`.
    pub fn mu(&self) -> f64 {
        if self.lambda == 0.0 {
            0.0
        } else {
            self.lambda / self.gamma1_minus
        }
    }

    /// Bath correlation time `τ_B = 1/Γ₁⁻`.
    pub fn correlation_time(&self) -> f64 {
        1.0 / self.gamma1_minus
    }

    /// Bath Hamiltonian `Σⱼ (ωⱼ/2) σ_z^j` on the 4-dimensional bath space.
    pub fn hamiltonian(&self) -> Operator {
        let h1 = embed_qubit1(&crate::operator::sigma_z()).scale_re(self.omega1 / 2.0);
        let h2 = embed_qubit2(&crate::operator::sigma_z()).scale_re(self.omega2 / 2.0);
        &h1 + &h2
    }

    /// The bath generator `𝓛_B` as a 16×16 superoperator.
    pub fn liouvillian(&self) -> SuperOperator {
        gksl_liouvillian(
            &self.hamiltonian(),
            &[
                (self.gamma1_plus, embed_qubit1(&sigma_plus())),
                (self.gamma1_minus, embed_qubit1(&sigma_minus())),
                (self.gamma2_plus, embed_qubit2(&sigma_plus())),
                (self.gamma2_minus, embed_qubit2(&sigma_minus())),
            ],
        )
        .expect("validated params yield a well-formed generator")
    }

    /// Equilibrium state `⊗ⱼ (Γⱼ⁻|g⟩⟨g| + Γⱼ⁺|e⟩⟨e|)/γⱼ`.
    pub fn gibbs(&self) -> DensityMatrix {
        let q1 = Operator::from_real_diag(&[
            self.gamma1_minus / self.gamma1(),
            self.gamma1_plus / self.gamma1(),
        ]);
        let q2 = Operator::from_real_diag(&[
            self.gamma2_minus / self.gamma2(),
            self.gamma2_plus / self.gamma2(),
        ]);
        DensityMatrix::new(kron(&q1, &q2)).expect("valid by construction")
    }

    /// Coupling operator `B^k = λ σ₁^{∓} σ₂^{±}` for `k = ±`.
    pub fn coupling_op(&self, k: Sign) -> Operator {
        let op = match k {
            Sign::Plus => kron(&sigma_minus(), &sigma_plus()),
            Sign::Minus => kron(&sigma_plus(), &sigma_minus()),
        };
        op.scale_re(self.lambda)
    }

    /// The superoperator `B^k_l` (left or right multiplication by `B^k`).
    pub fn coupling_superop(&self, idx: CorrelatorIndex) -> SuperOperator {
        let op = self.coupling_op(idx.k);
        match idx.l {
            Sign::Plus => left_mult(&op),
            Sign::Minus => right_mult(&op),
        }
    }

    /// Projector `𝓠 = 1 − ρ_B^eq Tr` materialized as a 16×16 superoperator.
    pub fn q_projector(&self) -> SuperOperator {
        let d = 4;
        let veq = vectorize(self.gibbs().op());
        let mut mat = ndarray::Array2::<C64>::eye(d * d);
        for a in 0..d * d {
            for i in 0..d {
                mat[[a, i + d * i]] -= veq[a];
            }
        }
        SuperOperator::from_matrix(d, mat).expect("square")
    }

    /// Excited-bath projector `ρ_B^+ = |g₁,e₂⟩⟨g₁,e₂|` (sign `+`) or
    /// `ρ_B^− = |e₁,g₂⟩⟨e₁,g₂|` (sign `−`).
    pub fn rho_sign(sign: Sign) -> DensityMatrix {
        // qubit1 ⊗ qubit2 ordering with |g⟩ = 0, |e⟩ = 1
        let index = match sign {
            Sign::Plus => 1,  // |g₁,e₂⟩
            Sign::Minus => 2, // |e₁,g₂⟩
        };
        DensityMatrix::pure(&basis_ket(4, index)).expect("basis state")
    }
}

/// Embed a single-qubit operator as `op ⊗ I₂` (first bath qubit).
pub fn embed_qubit1(op: &Operator) -> Operator {
    kron(op, &Operator::identity(2))
}

/// Embed a single-qubit operator as `I₂ ⊗ op` (second bath qubit).
pub fn embed_qubit2(op: &Operator) -> Operator {
    kron(&Operator::identity(2), op)
}

fn envelope(p: &BathParams, t: f64) -> f64 {
    (-(p.gamma1() + p.gamma2()) * t / 2.0).exp()
}

/// Oscillatory factor of an evolved `B^k`-shaped operator: `σ₁∓σ₂±` acquires
/// the phase `e^{±i(ω₁−ω₂)t}`.
fn phase(p: &BathParams, k: Sign, t: f64) -> C64 {
    let arg = k.value() * (p.omega1 - p.omega2) * t;
    C64::new(arg.cos(), arg.sin())
}

/// Per-qubit coefficient of a ladder operator applied to `ρ_eq + c σ_z`:
///
/// ```text
/// σ⁻(ρ_eq + cσ_z) = (Γ⁺/γ + c) σ⁻        (ρ_eq + cσ_z)σ⁻ = (Γ⁻/γ − c) σ⁻
/// σ⁺(ρ_eq + cσ_z) = (Γ⁻/γ − c) σ⁺        (ρ_eq + cσ_z)σ⁺ = (Γ⁺/γ + c) σ⁺
/// ```
fn ladder_coefficient(l: Sign, lowering: bool, gamma_plus: f64, gamma_minus: f64, c: f64) -> f64 {
    let gamma = gamma_plus + gamma_minus;
    match (l, lowering) {
        (Sign::Plus, true) => gamma_plus / gamma + c,
        (Sign::Plus, false) => gamma_minus / gamma - c,
        (Sign::Minus, true) => gamma_minus / gamma - c,
        (Sign::Minus, false) => gamma_plus / gamma + c,
    }
}

/// Closed-form two-point correlator
/// `Tr[B^{k₁}_{l₁} e^{𝓛_B t} B^{k₂}_{l₂} ρ_B^eq]`.
///
/// Vanishes exactly when `k₁ = k₂`; otherwise the value is independent of
/// `l₁` and factorizes into per-qubit equilibrium coefficients, the
/// oscillation `e^{±i(ω₁−ω₂)t}` and the envelope `e^{−(γ₁+γ₂)t/2}`.
pub fn two_point_analytic(
    p: &BathParams,
    idx1: CorrelatorIndex,
    idx2: CorrelatorIndex,
    t: f64,
) -> C64 {
    if idx1.k == idx2.k {
        return C64::new(0.0, 0.0);
    }
    // k₂ = + applies (σ₁⁻, σ₂⁺); k₂ = − applies (σ₁⁺, σ₂⁻)
    let lowering1 = idx2.k == Sign::Plus;
    let c1 = ladder_coefficient(idx2.l, lowering1, p.gamma1_plus, p.gamma1_minus, 0.0);
    let c2 = ladder_coefficient(idx2.l, !lowering1, p.gamma2_plus, p.gamma2_minus, 0.0);
    phase(p, idx2.k, t) * p.lambda * p.lambda * c1 * c2 * envelope(p, t)
}

/// Closed-form correlation-function-like quantity
/// `Tr[B^{k₁}_{l₁} e^{𝓛_B t} B^{k₂}_{l₂} e^{𝓛_B s} 𝓠 ρ_B^{init}]`.
///
/// The evolved projector `e^{𝓛_B s} ρ_B^±` stays a product of single-qubit
/// diagonal states `ρ_eq^j + cⱼ(s) σ_z^j`, so the value reduces to the same
/// ladder coefficients as [`two_point_analytic`], with the equilibrium
/// component subtracted by 𝓠.
pub fn correlationlike_analytic(
    p: &BathParams,
    idx1: CorrelatorIndex,
    idx2: CorrelatorIndex,
    init: Sign,
    t: f64,
    s: f64,
) -> C64 {
    if idx1.k == idx2.k {
        return C64::new(0.0, 0.0);
    }
    let (c1, c2) = match init {
        // ρ_B^− = |e₁,g₂⟩⟨e₁,g₂|: qubit 1 starts excited, qubit 2 ground
        Sign::Minus => (
            p.gamma1_minus / p.gamma1() * (-p.gamma1() * s).exp(),
            -p.gamma2_plus / p.gamma2() * (-p.gamma2() * s).exp(),
        ),
        // ρ_B^+ = |g₁,e₂⟩⟨g₁,e₂|
        Sign::Plus => (
            -p.gamma1_plus / p.gamma1() * (-p.gamma1() * s).exp(),
            p.gamma2_minus / p.gamma2() * (-p.gamma2() * s).exp(),
        ),
    };
    let lowering1 = idx2.k == Sign::Plus;
    let q1 = ladder_coefficient(idx2.l, lowering1, p.gamma1_plus, p.gamma1_minus, c1);
    let q2 = ladder_coefficient(idx2.l, !lowering1, p.gamma2_plus, p.gamma2_minus, c2);
    let q1_eq = ladder_coefficient(idx2.l, lowering1, p.gamma1_plus, p.gamma1_minus, 0.0);
    let q2_eq = ladder_coefficient(idx2.l, !lowering1, p.gamma2_plus, p.gamma2_minus, 0.0);
    let bracket = q1 * q2 - q1_eq * q2_eq;
    phase(p, idx2.k, t) * p.lambda * p.lambda * bracket * envelope(p, t)
}

/// Product-form n-point correlator.
///
/// Odd orders vanish identically. For `n = 2m` the chain factorizes into
/// `m − 1` correlation-like factors, each with the initial projector selected
/// by the sign `l·k` of the next insertion, and one final two-point factor.
pub fn npoint_analytic(p: &BathParams, spec: &CorrelatorSpec) -> C64 {
    let n = spec.len();
    if n % 2 == 1 {
        return C64::new(0.0, 0.0);
    }
    let idx = spec.indices();
    let times = spec.times();
    let m = n / 2;
    let mut value = C64::new(1.0, 0.0);
    for j in 0..m - 1 {
        let a = 2 * j;
        value *= correlationlike_analytic(
            p,
            idx[a],
            idx[a + 1],
            idx[a + 2].lk(),
            times[a] - times[a + 1],
            times[a + 1] - times[a + 2],
        );
    }
    value * two_point_analytic(p, idx[n - 2], idx[n - 1], times[n - 2] - times[n - 1])
}

/// Cost guard for the brute-force oracle.
pub const NPOINT_MAX: usize = 6;

/// Brute-force evaluation of the n-point correlator in the 16-dimensional
/// Liouville space of the bath: alternating superoperator insertions,
/// matrix-exponential propagation and explicit 𝓠 projections.
pub fn npoint_numeric(p: &BathParams, spec: &CorrelatorSpec) -> Result<C64> {
    let n = spec.len();
    if n > NPOINT_MAX {
        return Err(Error::CostGuardExceeded(format!(
            "n-point oracle limited to n ≤ {NPOINT_MAX}, got {n}"
        )));
    }
    let gen = p.liouvillian();
    let q = p.q_projector();
    let idx = spec.indices();
    let times = spec.times();

    let mut v = vectorize(p.gibbs().op());
    for j in (1..n).rev() {
        v = p.coupling_superop(idx[j]).apply_vec(&v);
        v = q.apply_vec(&v);
        let dt = times[j - 1] - times[j];
        v = gen.scale_re(dt).expm()?.apply_vec(&v);
    }
    v = p.coupling_superop(idx[0]).apply_vec(&v);
    Ok(unvectorize(&v.view(), 4)?.trace())
}

/// Brute-force evaluation of the correlation-like quantity with explicit 𝓠.
pub fn correlationlike_numeric(
    p: &BathParams,
    idx1: CorrelatorIndex,
    idx2: CorrelatorIndex,
    init: Sign,
    t: f64,
    s: f64,
) -> Result<C64> {
    let gen = p.liouvillian();
    let mut v = vectorize(BathParams::rho_sign(init).op());
    v = p.q_projector().apply_vec(&v);
    v = gen.scale_re(s).expm()?.apply_vec(&v);
    v = p.coupling_superop(idx2).apply_vec(&v);
    v = gen.scale_re(t).expm()?.apply_vec(&v);
    v = p.coupling_superop(idx1).apply_vec(&v);
    Ok(unvectorize(&v.view(), 4)?.trace())
}

/// White-noise diagnostics of the two-point correlator.
#[derive(Clone, Copy, Debug)]
pub struct WhiteNoiseArea {
    /// `∫₀^∞ |χ₂(t)| dt` for the `l₂k₂ = +` channel.
    pub area: f64,
    /// Bath correlation time `τ_B = 1/Γ₁⁻`.
    pub tau_bath: f64,
    /// Poisson noise rates `Γ₁⁺`, `Γ₂⁺`.
    pub noise_rate_1: f64,
    pub noise_rate_2: f64,
    /// Half-line delta mass `μ²Γ₁⁺` this channel approaches as `Γ⁻ → ∞`.
    pub limit_mass: f64,
}

/// Integrate `|χ₂|` for the `(k₁, k₂, l₂) = (−, +, +)` channel by adaptive
/// quadrature over `[0, 40/(γ₁+γ₂)]` plus the analytic exponential tail.
pub fn whitenoise_area(p: &BathParams) -> Result<WhiteNoiseArea> {
    let idx1 = CorrelatorIndex::new(Sign::Plus, Sign::Minus);
    let idx2 = CorrelatorIndex::new(Sign::Plus, Sign::Plus);
    let rate = (p.gamma1() + p.gamma2()) / 2.0;
    let horizon = 20.0 / rate;
    let body = adaptive_simpson(
        |t| two_point_analytic(p, idx1, idx2, t).norm(),
        0.0,
        horizon,
        1e-10,
    )?;
    // |χ₂(t)| = |χ₂(0)| e^{-rate·t}: the tail integrates in closed form
    let tail = two_point_analytic(p, idx1, idx2, horizon).norm() / rate;
    let mu = p.mu();
    Ok(WhiteNoiseArea {
        area: body + tail,
        tau_bath: p.correlation_time(),
        noise_rate_1: p.gamma1_plus,
        noise_rate_2: p.gamma2_plus,
        limit_mass: mu * mu * p.gamma1_plus,
    })
}

/// All four index sign pairs, in a fixed enumeration order.
pub fn all_indices() -> [CorrelatorIndex; 4] {
    [
        CorrelatorIndex::new(Sign::Plus, Sign::Plus),
        CorrelatorIndex::new(Sign::Plus, Sign::Minus),
        CorrelatorIndex::new(Sign::Minus, Sign::Plus),
        CorrelatorIndex::new(Sign::Minus, Sign::Minus),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::steady_state;
    use approx::assert_abs_diff_eq;

    fn balanced() -> BathParams {
        BathParams::detailed_balance(3.0, 2.0, 1.5, 4.0, 5.0, 1.7).unwrap()
    }

    fn decaying() -> BathParams {
        // Γ⁺ = 0: purely decaying bath
        BathParams::new(3.0, 2.0, 0.0, 6.0, 0.0, 4.5, 2.0).unwrap()
    }

    #[test]
    fn pure_decay_bath_settles_in_ground_state() {
        let ss = steady_state(&decaying().liouvillian()).unwrap();
        assert_abs_diff_eq!(ss.population(0), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn gibbs_state_is_stationary_and_matches_solver() {
        let p = balanced();
        let gen = p.liouvillian();
        let gibbs = p.gibbs();
        assert!(gen.apply(gibbs.op()).unwrap().norm_max() < 1e-12);
        let ss = steady_state(&gen).unwrap();
        assert!((ss.op() - gibbs.op()).norm_max() < 1e-10);
    }

    #[test]
    fn gibbs_examples() {
        let flat = BathParams::new(1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 0.1).unwrap();
        let mm = DensityMatrix::maximally_mixed(4);
        assert!((flat.gibbs().op() - mm.op()).norm_max() < 1e-15);

        assert_abs_diff_eq!(decaying().gibbs().population(0), 1.0, epsilon = 1e-15);

        let b = balanced();
        // P(e₁) = 1/(1 + e^{βω₁})
        let pe1 = b.gibbs().population(2) + b.gibbs().population(3);
        assert_abs_diff_eq!(pe1, 1.0 / (1.0 + (1.5f64 * 3.0).exp()), epsilon = 1e-12);
    }

    /// The five per-qubit closed-form relations under one damped qubit's own
    /// generator, as functions of `(ω, Γ⁺, Γ⁻, t)`.
    fn qubit_relation_cases(omega: f64, gp: f64, gm: f64, t: f64) -> Vec<(Operator, Operator)> {
        let gamma = gp + gm;
        let eq = Operator::from_real_diag(&[gm / gamma, gp / gamma]);
        let sz = crate::operator::sigma_z();
        vec![
            (
                sigma_plus(),
                sigma_plus().scale(C64::new(0.0, -omega * t).exp() * (-gamma * t / 2.0).exp()),
            ),
            (
                sigma_minus(),
                sigma_minus().scale(C64::new(0.0, omega * t).exp() * (-gamma * t / 2.0).exp()),
            ),
            (sz.clone(), sz.scale_re((-gamma * t).exp())),
            (
                Operator::from_real_diag(&[0.0, 1.0]),
                &eq + &sz.scale_re(gm / gamma * (-gamma * t).exp()),
            ),
            (
                Operator::from_real_diag(&[1.0, 0.0]),
                &eq - &sz.scale_re(gp / gamma * (-gamma * t).exp()),
            ),
        ]
    }

    #[test]
    fn single_qubit_propagation_relations() {
        // Each relation holds under the corresponding single-qubit factor
        // generator. (Under the full two-qubit generator they apply factor by
        // factor on product operators; an identity factor relaxes too, since
        // 𝓓_{σ±}[I] ≠ 0.)
        let p = balanced();
        for (omega, gp, gm) in [
            (p.omega1, p.gamma1_plus, p.gamma1_minus),
            (p.omega2, p.gamma2_plus, p.gamma2_minus),
        ] {
            let h = crate::operator::sigma_z().scale_re(omega / 2.0);
            let gen =
                gksl_liouvillian(&h, &[(gp, sigma_plus()), (gm, sigma_minus())]).unwrap();
            for &t in &[0.1, 0.5, 2.0] {
                let prop = gen.scale_re(t).expm().unwrap();
                for (input, expected) in qubit_relation_cases(omega, gp, gm, t) {
                    let evolved = prop.apply(&input).unwrap();
                    assert!(
                        (&evolved - &expected).norm_max() < 1e-10,
                        "relation failed at t = {t} (ω = {omega})"
                    );
                }
            }
        }
    }

    #[test]
    fn ladder_operator_decay_rates() {
        // Product operators evolve factor by factor under the full bath
        // generator: e^{𝓛_B t}(σ₁⁺σ₂⁻) = e^{−(γ₁+γ₂)t/2}e^{−i(ω₁−ω₂)t} σ₁⁺σ₂⁻.
        let p = balanced();
        let gen = p.liouvillian();
        let op = kron(&sigma_plus(), &sigma_minus());
        for &t in &[0.1, 1.0] {
            let evolved = gen.scale_re(t).expm().unwrap().apply(&op).unwrap();
            let factor = C64::new(0.0, -(p.omega1 - p.omega2) * t).exp()
                * (-(p.gamma1() + p.gamma2()) * t / 2.0).exp();
            let expected = op.scale(factor);
            assert!((&evolved - &expected).norm_max() < 1e-12);
        }
    }

    #[test]
    fn two_point_vanishes_for_equal_k() {
        let p = balanced();
        for l1 in [Sign::Plus, Sign::Minus] {
            for l2 in [Sign::Plus, Sign::Minus] {
                for k in [Sign::Plus, Sign::Minus] {
                    let v = two_point_analytic(
                        &p,
                        CorrelatorIndex::new(l1, k),
                        CorrelatorIndex::new(l2, k),
                        0.3,
                    );
                    assert_eq!(v, C64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn two_point_prefactor_at_zero_time() {
        let p = balanced();
        let v = two_point_analytic(
            &p,
            CorrelatorIndex::new(Sign::Plus, Sign::Minus),
            CorrelatorIndex::new(Sign::Plus, Sign::Plus),
            0.0,
        );
        let expect =
            p.lambda * p.lambda * p.gamma1_plus * p.gamma2_minus / (p.gamma1() * p.gamma2());
        assert_abs_diff_eq!(v.re, expect, epsilon = 1e-14);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn two_point_matches_oracle_on_grid() {
        for p in [balanced(), decaying()] {
            let tmax = 5.0 / p.gamma1();
            for k1 in [Sign::Plus, Sign::Minus] {
                for l1 in [Sign::Plus, Sign::Minus] {
                    for l2 in [Sign::Plus, Sign::Minus] {
                        let idx1 = CorrelatorIndex::new(l1, k1);
                        let idx2 = CorrelatorIndex::new(l2, k1.flip());
                        for i in 0..10 {
                            let t = tmax * i as f64 / 9.0;
                            let spec =
                                CorrelatorSpec::new(vec![idx1, idx2], vec![t, 0.0]).unwrap();
                            let numeric = npoint_numeric(&p, &spec).unwrap();
                            let analytic = two_point_analytic(&p, idx1, idx2, t);
                            assert!(
                                (numeric - analytic).norm() < 1e-10,
                                "mismatch at t={t} idx=({idx1:?},{idx2:?})"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn correlationlike_bracket_at_zero_separation() {
        // s = 0, init = −, (k₁,k₂,l₂) = (−,+,+): the bracket collapses to
        // (γ₁γ₂ − Γ₁⁺Γ₂⁻)/(γ₁γ₂).
        let p = balanced();
        let v = correlationlike_analytic(
            &p,
            CorrelatorIndex::new(Sign::Plus, Sign::Minus),
            CorrelatorIndex::new(Sign::Plus, Sign::Plus),
            Sign::Minus,
            0.0,
            0.0,
        );
        let expect = p.lambda * p.lambda
            * (p.gamma1() * p.gamma2() - p.gamma1_plus * p.gamma2_minus)
            / (p.gamma1() * p.gamma2());
        assert_abs_diff_eq!(v.re, expect, epsilon = 1e-13);
    }

    #[test]
    fn correlationlike_vanishes_at_large_separation() {
        // 𝓠 removes the equilibrium component, so s → ∞ leaves nothing.
        let p = balanced();
        let v = correlationlike_analytic(
            &p,
            CorrelatorIndex::new(Sign::Plus, Sign::Minus),
            CorrelatorIndex::new(Sign::Plus, Sign::Plus),
            Sign::Minus,
            0.2,
            60.0 / p.gamma1().min(p.gamma2()),
        );
        assert!(v.norm() < 1e-14);
    }

    #[test]
    fn correlationlike_matches_oracle_on_grid() {
        for p in [balanced(), decaying()] {
            let tmax = 4.0 / p.gamma1();
            for init in [Sign::Plus, Sign::Minus] {
                for k2 in [Sign::Plus, Sign::Minus] {
                    for l2 in [Sign::Plus, Sign::Minus] {
                        let idx1 = CorrelatorIndex::new(Sign::Plus, k2.flip());
                        let idx2 = CorrelatorIndex::new(l2, k2);
                        for i in 0..5 {
                            for j in 0..5 {
                                let t = tmax * i as f64 / 4.0;
                                let s = tmax * j as f64 / 4.0;
                                let numeric =
                                    correlationlike_numeric(&p, idx1, idx2, init, t, s).unwrap();
                                let analytic =
                                    correlationlike_analytic(&p, idx1, idx2, init, t, s);
                                assert!(
                                    (numeric - analytic).norm() < 1e-10,
                                    "mismatch at t={t}, s={s}, init={init:?}, idx2={idx2:?}"
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn odd_correlators_vanish() {
        let p = balanced();
        for n in [1usize, 3, 5] {
            let indices: Vec<CorrelatorIndex> = (0..n)
                .map(|j| {
                    CorrelatorIndex::new(
                        if j % 2 == 0 { Sign::Plus } else { Sign::Minus },
                        if j % 2 == 0 { Sign::Minus } else { Sign::Plus },
                    )
                })
                .collect();
            let times: Vec<f64> = (0..n).map(|j| 0.3 * (n - j) as f64).collect();
            let spec = CorrelatorSpec::new(indices, times).unwrap();
            assert_eq!(npoint_analytic(&p, &spec), C64::new(0.0, 0.0));
            assert!(npoint_numeric(&p, &spec).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn npoint_reduces_to_two_point() {
        let p = balanced();
        let idx1 = CorrelatorIndex::new(Sign::Minus, Sign::Minus);
        let idx2 = CorrelatorIndex::new(Sign::Plus, Sign::Plus);
        let t = 0.42;
        let spec = CorrelatorSpec::new(vec![idx1, idx2], vec![t, 0.0]).unwrap();
        let a = npoint_analytic(&p, &spec);
        let b = two_point_analytic(&p, idx1, idx2, t);
        assert!((a - b).norm() < 1e-15);
    }

    #[test]
    fn four_point_matches_oracle() {
        let p = balanced();
        let indices = vec![
            CorrelatorIndex::new(Sign::Plus, Sign::Plus),
            CorrelatorIndex::new(Sign::Plus, Sign::Minus),
            CorrelatorIndex::new(Sign::Plus, Sign::Plus),
            CorrelatorIndex::new(Sign::Plus, Sign::Minus),
        ];
        let times = vec![0.9, 0.7, 0.4, 0.1];
        let spec = CorrelatorSpec::new(indices, times).unwrap();
        let analytic = npoint_analytic(&p, &spec);
        let numeric = npoint_numeric(&p, &spec).unwrap();
        assert!(
            (analytic - numeric).norm() < 1e-9,
            "analytic {analytic} vs numeric {numeric}"
        );
    }

    #[test]
    fn oracle_cost_guard() {
        let p = balanced();
        let idx = CorrelatorIndex::new(Sign::Plus, Sign::Plus);
        let spec = CorrelatorSpec::new(vec![idx; 8], vec![0.0; 8]).unwrap();
        assert!(matches!(
            npoint_numeric(&p, &spec),
            Err(Error::CostGuardExceeded(_))
        ));
    }

    #[test]
    fn single_insertion_averages_to_zero() {
        // Tr[B^k_l ρ_B^eq] = 0
        let p = balanced();
        for idx in all_indices() {
            let spec = CorrelatorSpec::new(vec![idx], vec![0.0]).unwrap();
            assert!(npoint_numeric(&p, &spec).unwrap().norm() < 1e-14);
        }
    }

    #[test]
    fn whitenoise_area_approaches_poisson_mass() {
        let mu = 0.5;
        let mut previous_err = f64::INFINITY;
        for gamma_minus in [100.0, 1e4] {
            let lambda = mu * gamma_minus;
            let p =
                BathParams::new(3.0, 2.0, 1.0, gamma_minus, 1.0, gamma_minus, lambda).unwrap();
            let wn = whitenoise_area(&p).unwrap();
            let rel = (wn.area - wn.limit_mass).abs() / wn.limit_mass;
            assert!(rel < previous_err);
            previous_err = rel;
            if gamma_minus == 100.0 {
                assert!(rel < 0.03, "rel err {rel}");
            } else {
                assert!(rel < 5e-4, "rel err {rel}");
            }
            assert_abs_diff_eq!(wn.limit_mass, 0.25, epsilon = 1e-12);
        }
    }

    #[test]
    fn correlation_time_halves_when_gamma_doubles() {
        let a = BathParams::new(3.0, 2.0, 1.0, 10.0, 1.0, 10.0, 5.0).unwrap();
        let b = BathParams::new(3.0, 2.0, 1.0, 20.0, 1.0, 20.0, 10.0).unwrap();
        assert_abs_diff_eq!(a.correlation_time() / 2.0, b.correlation_time(), epsilon = 1e-15);
        assert_abs_diff_eq!(a.mu(), b.mu(), epsilon = 1e-15);
    }

    #[test]
    fn scaled_two_point_converges_to_delta_family_profile() {
        // χ₂(x/Γ⁻)/Γ⁻ → μ²Γ₁⁺ e^{−x} pointwise as Γ⁻ → ∞ at fixed μ.
        let mu = 0.7;
        for &x in &[0.3, 1.0, 2.5] {
            let mut errs = Vec::new();
            for gamma_minus in [1e2, 1e3, 1e4] {
                let p = BathParams::new(
                    3.0,
                    2.0,
                    1.0,
                    gamma_minus,
                    1.0,
                    gamma_minus,
                    mu * gamma_minus,
                )
                .unwrap();
                let idx1 = CorrelatorIndex::new(Sign::Plus, Sign::Minus);
                let idx2 = CorrelatorIndex::new(Sign::Plus, Sign::Plus);
                let scaled = two_point_analytic(&p, idx1, idx2, x / gamma_minus) / gamma_minus;
                let limit = mu * mu * p.gamma1_plus * (-x).exp();
                errs.push((scaled.norm() - limit).abs() / limit);
            }
            assert!(errs[0] > errs[1] && errs[1] > errs[2]);
            assert!(errs[2] < 1e-3);
        }
    }
}
