//! Poisson noise master equation.
//!
//! A system coupled to the telegraph bath experiences, in the white-noise
//! limit, bursts of multiple jumps. One burst of dimensionless strength
//! `a = λτ` acts through the nonlinear operators
//!
//! ```text
//! L_a   = −i g_a(LL†) L,            g_a(x) = sin(a√x)/√x,  g_a(0) = a
//! L_a†  = −i g_a(L†L) L†
//! M_a   = cos(a√(L†L)) − 1
//! N_a   = cos(a√(LL†)) − 1
//! ```
//!
//! and the master equation averages their dissipators over the strength
//! distribution `p(a) = μ⁻¹ e^{−a/μ}`:
//!
//! ```text
//! ∂ρ = −i[H_S, ρ] + ∫da p(a) [ Γ₂⁺(𝓓_{L_a} + 𝓓_{M_a}) + Γ₁⁺(𝓓_{L_a†} + 𝓓_{N_a}) ].
//! ```
//!
//! All averages reduce, in the shared eigenbases of `L†L` and `LL†`, to
//! scalar integrals `∫p(a)·trig(a·u)·trig(a·v) da` with closed Laplace-
//! transform forms; Gauss–Laguerre quadrature of the same dissipators is
//! kept as an independent cross-check route. `Γ₂⁺ → ∞, μ → 0` at fixed
//! `μ²Γ` recovers the weak-coupling GKSL equation with linear jumps.

use ndarray::prelude::*;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::lindblad::{dissipator, hamiltonian_liouvillian, trajectory_from_raw, Trajectory};
use crate::lindblad::{DensityMatrix, DEFAULT_ATOL, DEFAULT_RTOL};
use crate::integrate::rk45;
use crate::operator::{
    function_of_eig, hermitian_eig, unvectorize, vectorize, HermitianEig, Operator, SuperOperator,
};
use crate::quad::GaussLaguerre;

/// Parameters of the Poisson noise master equation.
#[derive(Clone, Debug)]
pub struct PoissonParams {
    pub h_s: Operator,
    /// System coupling operator `L` (generally non-Hermitian).
    pub coupling: Operator,
    /// Effective coupling strength `μ` of the burst distribution.
    pub mu: f64,
    /// Absorption noise rate `Γ₁⁺`.
    pub gamma1_plus: f64,
    /// Emission noise rate `Γ₂⁺`.
    pub gamma2_plus: f64,
}

impl PoissonParams {
    pub fn new(
        h_s: Operator,
        coupling: Operator,
        mu: f64,
        gamma1_plus: f64,
        gamma2_plus: f64,
    ) -> Result<Self> {
        if h_s.dim() != coupling.dim() {
            return Err(Error::DimensionMismatch(format!(
                "H_S dim {} vs coupling dim {}",
                h_s.dim(),
                coupling.dim()
            )));
        }
        if !h_s.is_hermitian(1e-10) {
            return Err(Error::NonHermitianHamiltonian(format!(
                "defect {:.3e}",
                h_s.hermiticity_defect()
            )));
        }
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidParameter(format!("μ must be positive, got {mu}")));
        }
        for rate in [gamma1_plus, gamma2_plus] {
            if rate < 0.0 || !rate.is_finite() {
                return Err(Error::NegativeRate(rate));
            }
        }
        Ok(Self {
            h_s,
            coupling,
            mu,
            gamma1_plus,
            gamma2_plus,
        })
    }
}

/// The four burst operators at a fixed noise strength `a`.
#[derive(Clone, Debug)]
pub struct JumpFamily {
    pub a: f64,
    pub l_a: Operator,
    pub l_a_dag: Operator,
    pub m_a: Operator,
    pub n_a: Operator,
}

/// Relative eigenvalue threshold below which `L†L`/`LL†` eigenvalues count
/// as the removable `g_a(0) = a` branch.
const EIGENVALUE_ZERO_TOL: f64 = 1e-12;

fn sinc_like(a: f64, x: f64, x_max: f64) -> f64 {
    if x <= EIGENVALUE_ZERO_TOL * x_max.max(1e-300) {
        a
    } else {
        let r = x.max(0.0).sqrt();
        (a * r).sin() / r
    }
}

fn cos_sqrt(a: f64, x: f64) -> f64 {
    (a * x.max(0.0).sqrt()).cos()
}

/// Construct the burst operators `L_a, L_a†, M_a, N_a` for strength `a ≥ 0`.
pub fn jump_family(l: &Operator, a: f64) -> Result<JumpFamily> {
    if a < 0.0 || !a.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "noise strength must be non-negative, got {a}"
        )));
    }
    let ldag = l.adjoint();
    let ldl = hermitian_eig(&(&ldag * l))?;
    let lld = hermitian_eig(&(l * &ldag))?;
    let x_max = ldl.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let y_max = lld.eigenvalues.iter().cloned().fold(0.0, f64::max);

    let minus_i = C64::new(0.0, -1.0);
    let g_lld = function_of_eig(&lld, |x| C64::new(sinc_like(a, x, y_max), 0.0));
    let g_ldl = function_of_eig(&ldl, |x| C64::new(sinc_like(a, x, x_max), 0.0));

    Ok(JumpFamily {
        a,
        l_a: (&g_lld * l).scale(minus_i),
        l_a_dag: (&g_ldl * &ldag).scale(minus_i),
        m_a: function_of_eig(&ldl, |x| C64::new(cos_sqrt(a, x) - 1.0, 0.0)),
        n_a: function_of_eig(&lld, |x| C64::new(cos_sqrt(a, x) - 1.0, 0.0)),
    })
}

// ---------------------------------------------------------------------------
// Exponential averages of trigonometric products:
// E[f] = ∫₀^∞ μ⁻¹ e^{−a/μ} f(a) da.
// ---------------------------------------------------------------------------

/// `E[cos(au)] = 1/(1 + μ²u²)`.
pub(crate) fn avg_cos(mu: f64, u: f64) -> f64 {
    1.0 / (1.0 + mu * mu * u * u)
}

/// `E[sin(au) sin(av)]`.
pub(crate) fn avg_sin_sin(mu: f64, u: f64, v: f64) -> f64 {
    0.5 * (avg_cos(mu, u - v) - avg_cos(mu, u + v))
}

/// `E[cos(au) cos(av)]`.
pub(crate) fn avg_cos_cos(mu: f64, u: f64, v: f64) -> f64 {
    0.5 * (avg_cos(mu, u - v) + avg_cos(mu, u + v))
}

/// `E[(cos(au) − 1)(cos(av) − 1)]`.
pub(crate) fn avg_cosm1_cosm1(mu: f64, u: f64, v: f64) -> f64 {
    avg_cos_cos(mu, u, v) - avg_cos(mu, u) - avg_cos(mu, v) + 1.0
}

/// `E[a sin(av)] = 2vμ²/(1 + μ²v²)²`.
pub(crate) fn avg_a_sin(mu: f64, v: f64) -> f64 {
    let d = 1.0 + mu * mu * v * v;
    2.0 * v * mu * mu / (d * d)
}

/// `E[sin²(a√x)] = 2μ²x/(1 + 4μ²x)`.
pub(crate) fn avg_sin_sq_sqrt(mu: f64, x: f64) -> f64 {
    2.0 * mu * mu * x / (1.0 + 4.0 * mu * mu * x)
}

/// `E[g_a(x) g_a(y)]` for `g_a(x) = sin(a√x)/√x`, including the removable
/// `g_a(0) = a` branches.
fn avg_g_g(mu: f64, x: f64, y: f64, scale: f64) -> f64 {
    let zero_x = x <= EIGENVALUE_ZERO_TOL * scale.max(1e-300);
    let zero_y = y <= EIGENVALUE_ZERO_TOL * scale.max(1e-300);
    match (zero_x, zero_y) {
        (true, true) => 2.0 * mu * mu, // E[a²]
        (true, false) => {
            let v = y.max(0.0).sqrt();
            avg_a_sin(mu, v) / v
        }
        (false, true) => {
            let u = x.max(0.0).sqrt();
            avg_a_sin(mu, u) / u
        }
        (false, false) => {
            let u = x.max(0.0).sqrt();
            let v = y.max(0.0).sqrt();
            avg_sin_sin(mu, u, v) / (u * v)
        }
    }
}

/// Which p(a)-averaged dissipator pair to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DissipatorKind {
    /// `∫da p(a) (𝓓_{L_a} + 𝓓_{M_a})` — weighted by `Γ₂⁺` in the generator.
    Emission,
    /// `∫da p(a) (𝓓_{L_a†} + 𝓓_{N_a})` — weighted by `Γ₁⁺`.
    Absorption,
}

/// One p(a)-averaged dissipator block, stored in the shared eigenbases of
/// `L†L` and `LL†` so it can be applied without materializing the
/// superoperator. Construction is done once per `(L, μ)`; applications reuse
/// the cached bases and coefficient tables.
#[derive(Clone, Debug)]
pub struct AveragedBlock {
    /// Factor inside the sandwich: `L` (emission) or `L†` (absorption).
    factor: Operator,
    /// Eigenbasis in which the sandwich coefficients are diagonal pairs.
    sandwich_basis: HermitianEig,
    sandwich_coeff: Array2<f64>,
    /// Eigenbasis of the Hermitian burst operator (`M_a` or `N_a`).
    diag_basis: HermitianEig,
    diag_coeff: Array2<f64>,
    /// Hermitian operator of the combined anticommutator part.
    anti: Operator,
}

impl AveragedBlock {
    pub fn new(l: &Operator, mu: f64, kind: DissipatorKind) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidParameter(format!("μ must be positive, got {mu}")));
        }
        let ldag = l.adjoint();
        let ldl = hermitian_eig(&(&ldag * l))?;
        let lld = hermitian_eig(&(l * &ldag))?;
        let scale = ldl
            .eigenvalues
            .iter()
            .chain(lld.eigenvalues.iter())
            .cloned()
            .fold(0.0, f64::max);

        // Emission sandwiches g(LL†)LρL†g(LL†) (coefficients over LL†
        // eigenvalues) and averages M_a in the L†L eigenbasis; absorption is
        // the mirror image.
        let (factor, sandwich_eig, diag_eig) = match kind {
            DissipatorKind::Emission => (l.clone(), lld, ldl),
            DissipatorKind::Absorption => (ldag, ldl, lld),
        };

        let sw = &sandwich_eig.eigenvalues;
        let n = sw.len();
        let sandwich_coeff =
            Array2::from_shape_fn((n, n), |(i, j)| avg_g_g(mu, sw[i], sw[j], scale));
        let dg = &diag_eig.eigenvalues;
        let diag_coeff = Array2::from_shape_fn((n, n), |(i, j)| {
            avg_cosm1_cosm1(
                mu,
                dg[i].max(0.0).sqrt(),
                dg[j].max(0.0).sqrt(),
            )
        });

        // ∫p(a) [ (L_a)†L_a + M_a² ] = Σ sin²- and (cos−1)²-averages, all
        // diagonal in the diag basis.
        let anti = function_of_eig(&diag_eig, |x| {
            let u = x.max(0.0).sqrt();
            C64::new(
                avg_sin_sq_sqrt(mu, x.max(0.0)) + avg_cosm1_cosm1(mu, u, u),
                0.0,
            )
        });

        Ok(Self {
            factor,
            sandwich_basis: sandwich_eig,
            sandwich_coeff,
            diag_basis: diag_eig,
            diag_coeff,
            anti,
        })
    }

    /// Apply the averaged block to a (not necessarily Hermitian) operator.
    pub fn apply(&self, rho: &Operator) -> Operator {
        let w = &self.sandwich_basis.eigenvectors;
        let v = &self.diag_basis.eigenvectors;

        // ∫p(a) L_a ρ L_a† = W [G ∘ (W† L ρ L† W)] W†
        let lrl = &(&self.factor * rho) * &self.factor.adjoint();
        let mut inner = (&w.adjoint() * &lrl).into_matrix().dot(w.matrix());
        for ((i, j), z) in inner.indexed_iter_mut() {
            *z *= self.sandwich_coeff[[i, j]];
        }
        let s1 = w.matrix().dot(&inner).dot(&w.adjoint().into_matrix());

        // ∫p(a) M_a ρ M_a = V [C ∘ (V† ρ V)] V†
        let mut inner2 = (&v.adjoint() * rho).into_matrix().dot(v.matrix());
        for ((i, j), z) in inner2.indexed_iter_mut() {
            *z *= self.diag_coeff[[i, j]];
        }
        let s2 = v.matrix().dot(&inner2).dot(&v.adjoint().into_matrix());

        // −½ {K, ρ}
        let k_rho = &self.anti * rho;
        let rho_k = rho * &self.anti;
        let anti = (&k_rho + &rho_k).scale_re(-0.5);

        let sum = s1 + s2;
        &Operator::from_matrix(sum).expect("finite") + &anti
    }

    /// Materialize the block as a dense superoperator.
    pub fn superoperator(&self) -> SuperOperator {
        SuperOperator::from_action(self.factor.dim(), |rho| self.apply(rho))
    }
}

/// `∫₀^∞ da p(a) (𝓓_{L_a} + 𝓓_{M_a})` (emission) or the `(L_a†, N_a)` pair
/// (absorption), using the closed-form scalar averages.
pub fn averaged_dissipator(l: &Operator, mu: f64, kind: DissipatorKind) -> Result<SuperOperator> {
    Ok(AveragedBlock::new(l, mu, kind)?.superoperator())
}

/// Independent Gauss–Laguerre evaluation of the same block: node-doubling
/// until the superoperator stabilizes to `rtol`.
pub fn averaged_dissipator_quadrature(
    l: &Operator,
    mu: f64,
    kind: DissipatorKind,
    rtol: f64,
) -> Result<SuperOperator> {
    let build = |nodes: usize| -> Result<SuperOperator> {
        let rule = GaussLaguerre::new(nodes)?;
        let mut total = SuperOperator::zeros(l.dim());
        for (&u, &w) in rule.nodes.iter().zip(&rule.weights) {
            let fam = jump_family(l, mu * u)?;
            let block = match kind {
                DissipatorKind::Emission => &dissipator(&fam.l_a) + &dissipator(&fam.m_a),
                DissipatorKind::Absorption => &dissipator(&fam.l_a_dag) + &dissipator(&fam.n_a),
            };
            total = &total + &block.scale_re(w);
        }
        Ok(total)
    };

    let mut n = 64;
    let mut prev = build(n)?;
    while n <= 512 {
        n *= 2;
        let next = build(n)?;
        let scale = next.norm_max().max(prev.norm_max()).max(1e-300);
        if (&next - &prev).norm_max() <= rtol * scale {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::QuadratureNotConverged(format!(
        "averaged dissipator not stabilized at {n} Gauss-Laguerre nodes (μ = {mu})"
    )))
}

/// Poisson master-equation generator with cached eigenbases; supports both
/// matrix-free application and dense materialization.
#[derive(Clone, Debug)]
pub struct PoissonGenerator {
    h_s: Operator,
    emission: AveragedBlock,
    absorption: AveragedBlock,
    gamma1_plus: f64,
    gamma2_plus: f64,
}

impl PoissonGenerator {
    pub fn new(p: &PoissonParams) -> Result<Self> {
        Ok(Self {
            h_s: p.h_s.clone(),
            emission: AveragedBlock::new(&p.coupling, p.mu, DissipatorKind::Emission)?,
            absorption: AveragedBlock::new(&p.coupling, p.mu, DissipatorKind::Absorption)?,
            gamma1_plus: p.gamma1_plus,
            gamma2_plus: p.gamma2_plus,
        })
    }

    pub fn dim(&self) -> usize {
        self.h_s.dim()
    }

    /// `𝓛ρ = −i[H_S, ρ] + Γ₂⁺·emission(ρ) + Γ₁⁺·absorption(ρ)`.
    pub fn apply(&self, rho: &Operator) -> Operator {
        let comm = &(&self.h_s * rho) - &(rho * &self.h_s);
        let mut out = comm.scale(C64::new(0.0, -1.0));
        if self.gamma2_plus != 0.0 {
            out = &out + &self.emission.apply(rho).scale_re(self.gamma2_plus);
        }
        if self.gamma1_plus != 0.0 {
            out = &out + &self.absorption.apply(rho).scale_re(self.gamma1_plus);
        }
        out
    }

    pub fn superoperator(&self) -> SuperOperator {
        let mut gen = hamiltonian_liouvillian(&self.h_s);
        if self.gamma2_plus != 0.0 {
            gen = &gen + &self.emission.superoperator().scale_re(self.gamma2_plus);
        }
        if self.gamma1_plus != 0.0 {
            gen = &gen + &self.absorption.superoperator().scale_re(self.gamma1_plus);
        }
        gen
    }

    /// Matrix-free adaptive propagation (no d²×d² matrix is ever formed);
    /// useful for full tensor-product representations.
    pub fn propagate(
        &self,
        rho0: &DensityMatrix,
        times: &[f64],
    ) -> Result<Trajectory> {
        if rho0.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "generator dim {} vs state dim {}",
                self.dim(),
                rho0.dim()
            )));
        }
        if times.is_empty() || times[0] != 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "time grid must start at 0 and ascend strictly".into(),
            ));
        }
        let d = self.dim();
        let rhs = |y: &Array1<C64>| {
            let rho = unvectorize(&y.view(), d).expect("dim preserved");
            vectorize(&self.apply(&rho))
        };
        let mut y = vectorize(rho0.op());
        let mut raw = Vec::with_capacity(times.len());
        raw.push(rho0.op().clone());
        for w in times.windows(2) {
            y = rk45(&rhs, y, w[0], w[1], DEFAULT_RTOL, DEFAULT_ATOL)?;
            raw.push(unvectorize(&y.view(), d)?);
        }
        trajectory_from_raw(times, raw)
    }
}

/// Dense generator of the Poisson noise master equation.
pub fn poisson_liouvillian(p: &PoissonParams) -> Result<SuperOperator> {
    Ok(PoissonGenerator::new(p)?.superoperator())
}

/// Weak-coupling (Gaussian) limit: `−i[H,·] + 2μ²Γ₂⁺𝓓_L + 2μ²Γ₁⁺𝓓_{L†}`.
pub fn gaussian_liouvillian(p: &PoissonParams) -> Result<SuperOperator> {
    let mut gen = hamiltonian_liouvillian(&p.h_s);
    let w = 2.0 * p.mu * p.mu;
    if p.gamma2_plus != 0.0 {
        gen = &gen + &dissipator(&p.coupling).scale_re(w * p.gamma2_plus);
    }
    if p.gamma1_plus != 0.0 {
        gen = &gen + &dissipator(&p.coupling.adjoint()).scale_re(w * p.gamma1_plus);
    }
    Ok(gen)
}

/// Hermitian-coupling special case `L = L† = X`:
///
/// ```text
/// ∂ρ = −i[H,ρ] + Γ ∫da p(a) ( sin(aX) ρ sin(aX) + cos(aX) ρ cos(aX) − ρ )
/// ```
///
/// built directly from trigonometric averages in the eigenbasis of `X`.
pub fn hermitian_coupling_liouvillian(
    h_s: &Operator,
    x: &Operator,
    mu: f64,
    gamma_sum: f64,
) -> Result<SuperOperator> {
    if !x.is_hermitian(1e-10) {
        return Err(Error::NonHermitianInput(format!(
            "coupling defect {:.3e}",
            x.hermiticity_defect()
        )));
    }
    if x.dim() != h_s.dim() {
        return Err(Error::DimensionMismatch(format!(
            "H_S dim {} vs X dim {}",
            h_s.dim(),
            x.dim()
        )));
    }
    if !(mu > 0.0) || gamma_sum < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "need μ > 0 and Γ ≥ 0, got μ = {mu}, Γ = {gamma_sum}"
        )));
    }
    let eig = hermitian_eig(x)?;
    let xi = eig.eigenvalues.clone();
    let u = eig.eigenvectors.clone();
    let n = xi.len();
    let sin_coeff = Array2::from_shape_fn((n, n), |(i, j)| avg_sin_sin(mu, xi[i], xi[j]));
    let cos_coeff = Array2::from_shape_fn((n, n), |(i, j)| avg_cos_cos(mu, xi[i], xi[j]));

    let apply = |rho: &Operator| -> Operator {
        let mut inner = (&u.adjoint() * rho).into_matrix().dot(u.matrix());
        let mut sandwiched = inner.clone();
        for ((i, j), z) in sandwiched.indexed_iter_mut() {
            *z *= sin_coeff[[i, j]] + cos_coeff[[i, j]];
        }
        inner.zip_mut_with(&sandwiched, |orig, s| *orig = *s - *orig);
        let out = u.matrix().dot(&inner).dot(&u.adjoint().into_matrix());
        Operator::from_matrix(out).expect("finite")
    };

    let noise = SuperOperator::from_action(x.dim(), apply).scale_re(gamma_sum);
    Ok(&hamiltonian_liouvillian(h_s) + &noise)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::steady_state;
    use crate::operator::test_util::*;
    use crate::operator::{basis_ket, sigma_z};
    use approx::assert_abs_diff_eq;

    /// Collective lowering operator on the symmetric ladder of `n` spins.
    fn collective_lowering(n: usize) -> Operator {
        let j = n as f64 / 2.0;
        let dim = n + 1;
        let mut mat = Array2::<C64>::zeros((dim, dim));
        for i in 1..dim {
            let m = i as f64 - j;
            mat[[i - 1, i]] = C64::new((j * (j + 1.0) - m * (m - 1.0)).sqrt(), 0.0);
        }
        Operator::from_matrix(mat).unwrap()
    }

    #[test]
    fn jump_family_single_qubit_closed_forms() {
        let a = 1.3;
        let fam = jump_family(&sigma_minus(), a).unwrap();
        let expected_l = sigma_minus().scale(C64::new(0.0, -a.sin()));
        assert!((&fam.l_a - &expected_l).norm_max() < 1e-14);
        let expected_ld = sigma_plus().scale(C64::new(0.0, -a.sin()));
        assert!((&fam.l_a_dag - &expected_ld).norm_max() < 1e-14);
        let expected_m = Operator::from_real_diag(&[0.0, a.cos() - 1.0]);
        assert!((&fam.m_a - &expected_m).norm_max() < 1e-14);
        let expected_n = Operator::from_real_diag(&[a.cos() - 1.0, 0.0]);
        assert!((&fam.n_a - &expected_n).norm_max() < 1e-14);
    }

    #[test]
    fn jump_family_vanishes_at_zero_strength() {
        let l = pseudorandom_operator(4, 17);
        let fam = jump_family(&l, 0.0).unwrap();
        for op in [&fam.l_a, &fam.l_a_dag, &fam.m_a, &fam.n_a] {
            assert!(op.norm_max() < 1e-14);
        }
    }

    #[test]
    fn jump_family_matches_power_series() {
        // L_a† = Σₙ (−ia)^{2n+1}/(2n+1)! (L†L)ⁿ L†, truncated at 50 terms.
        let l = pseudorandom_operator(3, 23);
        let ldag = l.adjoint();
        let ldl = &ldag * &l;
        for &a in &[0.5, 2.0, 5.0] {
            let fam = jump_family(&l, a).unwrap();
            let mut series = Operator::zeros(3);
            let mut power = Operator::identity(3);
            for n in 0..50 {
                let k = 2 * n + 1;
                let mut coeff = C64::new(0.0, -1.0).powu(k as u32);
                for m in 1..=k {
                    coeff *= a / m as f64;
                }
                series = &series + &(&power * &ldag).scale(coeff);
                power = &power * &ldl;
            }
            assert!(
                (&fam.l_a_dag - &series).norm_max() < 1e-10,
                "series mismatch at a = {a}"
            );

            // M_a series: Σ_{n≥1} (−ia)^{2n}/(2n)! (L†L)ⁿ
            let mut mseries = Operator::zeros(3);
            let mut mpower = Operator::identity(3);
            for n in 1..50 {
                mpower = &mpower * &ldl;
                let mut coeff = C64::new(1.0, 0.0) * (-1.0f64).powi(n as i32);
                for m in 1..=(2 * n) {
                    coeff *= a / m as f64;
                }
                mseries = &mseries + &mpower.scale(coeff);
            }
            assert!((&fam.m_a - &mseries).norm_max() < 1e-10);
        }
    }

    #[test]
    fn jump_family_adjoint_relation() {
        // The labels follow the burst matrix elements, so adjoint(L_a) equals
        // −L_a† (a global phase that cancels in every dissipator).
        let l = pseudorandom_operator(4, 29);
        let fam = jump_family(&l, 0.9).unwrap();
        assert!((&fam.l_a.adjoint() + &fam.l_a_dag).norm_max() < 1e-12);
        let d1 = dissipator(&fam.l_a.adjoint());
        let d2 = dissipator(&fam.l_a_dag);
        assert!((&d1 - &d2).norm_max() < 1e-12);
        // M_a, N_a Hermitian with spectrum in [−2, 0]
        for op in [&fam.m_a, &fam.n_a] {
            assert!(op.hermiticity_defect() < 1e-12);
            let eig = hermitian_eig(op).unwrap();
            assert!(eig.eigenvalues.iter().all(|&w| (-2.0 - 1e-12..=1e-12).contains(&w)));
        }
    }

    #[test]
    fn dicke_matrix_element() {
        // ⟨0|L_a|D_{N,1}⟩ = −i sin(a√N) for the collective lowering operator
        let n = 3;
        let l = collective_lowering(n);
        let a = 0.8;
        let fam = jump_family(&l, a).unwrap();
        let elem = fam.l_a[(0, 1)];
        let expect = C64::new(0.0, -(a * (n as f64).sqrt()).sin());
        assert!((elem - expect).norm() < 1e-13);
    }

    #[test]
    fn averaged_emission_population_transfer() {
        // single qubit: ⟨g|block(|e⟩⟨e|)|g⟩ = E[sin²a] = 2μ²/(1+4μ²)
        let mu = 0.7;
        let block = averaged_dissipator(&sigma_minus(), mu, DissipatorKind::Emission).unwrap();
        let excited = DensityMatrix::basis_state(2, 1).unwrap();
        let out = block.apply(excited.op()).unwrap();
        let expect = 2.0 * mu * mu / (1.0 + 4.0 * mu * mu);
        assert_abs_diff_eq!(out[(0, 0)].re, expect, epsilon = 1e-13);
        assert_abs_diff_eq!(out[(1, 1)].re, -expect, epsilon = 1e-13);
    }

    #[test]
    fn averaged_blocks_are_trace_annihilating() {
        let l = pseudorandom_operator(3, 37);
        for kind in [DissipatorKind::Emission, DissipatorKind::Absorption] {
            let block = averaged_dissipator(&l, 0.9, kind).unwrap();
            let rho = pseudorandom_density(3, 38);
            assert!(block.apply(&rho).unwrap().trace().norm() < 1e-12);
        }
    }

    #[test]
    fn averaged_blocks_preserve_hermiticity() {
        let l = pseudorandom_operator(3, 47);
        let block = AveragedBlock::new(&l, 1.1, DissipatorKind::Emission).unwrap();
        let rho = pseudorandom_density(3, 48).hermitize();
        let out = block.apply(&rho);
        assert!(out.hermiticity_defect() < 1e-12);
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let l = pseudorandom_operator(3, 41);
        for kind in [DissipatorKind::Emission, DissipatorKind::Absorption] {
            let closed = averaged_dissipator(&l, 0.5, kind).unwrap();
            let quad = averaged_dissipator_quadrature(&l, 0.5, kind, 1e-11).unwrap();
            let scale = closed.norm_max();
            assert!(
                (&closed - &quad).norm_max() < 1e-10 * scale.max(1.0),
                "{kind:?} mismatch"
            );
        }
    }

    #[test]
    fn absorption_equals_emission_of_adjoint() {
        let l = pseudorandom_operator(4, 53);
        let a = averaged_dissipator(&l, 0.8, DissipatorKind::Absorption).unwrap();
        let b = averaged_dissipator(&l.adjoint(), 0.8, DissipatorKind::Emission).unwrap();
        assert!((&a - &b).norm_max() < 1e-10 * a.norm_max().max(1.0));
    }

    #[test]
    fn emission_block_has_gaussian_leading_order() {
        // ‖block(μ) − 2μ²𝓓_L‖ = O(μ⁴)
        let l = pseudorandom_operator(3, 59);
        let d_l = dissipator(&l);
        let err_at = |mu: f64| {
            let block = averaged_dissipator(&l, mu, DissipatorKind::Emission).unwrap();
            (&block - &d_l.scale_re(2.0 * mu * mu)).norm_max()
        };
        let e1 = err_at(0.1);
        let e2 = err_at(0.05);
        let ratio = e1 / e2;
        assert!((ratio - 16.0).abs() < 3.0, "O(μ⁴) ratio was {ratio}");
    }

    #[test]
    fn poisson_generator_without_noise_is_hamiltonian() {
        let h = sigma_z().scale_re(0.5);
        let p = PoissonParams::new(h.clone(), sigma_minus(), 1.0, 0.0, 0.0).unwrap();
        let gen = poisson_liouvillian(&p).unwrap();
        let pure = hamiltonian_liouvillian(&h);
        assert!((&gen - &pure).norm_max() < 1e-14);
    }

    #[test]
    fn single_qubit_steady_state_is_gibbs() {
        // Γ₂⁺/Γ₁⁺ = e^{βω} ⇒ P_e/P_g = e^{−βω} exactly
        let beta = 1.5f64;
        let omega = 1.0f64;
        let gamma2 = 1.0f64;
        let gamma1 = gamma2 * (-beta * omega).exp();
        let p = PoissonParams::new(
            sigma_z().scale_re(omega / 2.0),
            sigma_minus(),
            2.0,
            gamma1,
            gamma2,
        )
        .unwrap();
        let ss = steady_state(&poisson_liouvillian(&p).unwrap()).unwrap();
        let ratio = ss.population(1) / ss.population(0);
        assert_abs_diff_eq!(ratio, (-beta * omega).exp(), epsilon = 1e-10);
    }

    #[test]
    fn generator_matrix_element_on_first_dicke_state() {
        // ⟨0|𝓛[|D_{N,1}⟩⟨D_{N,1}|]|0⟩ = Γ₂⁺ · 2μ²N/(1+4μ²N)
        let n = 4;
        let mu = 0.9;
        let gamma2 = 1.3;
        let l = collective_lowering(n);
        let dim = n + 1;
        let h = Operator::from_real_diag(
            &(0..dim).map(|i| i as f64 - n as f64 / 2.0).collect::<Vec<_>>(),
        );
        let p = PoissonParams::new(h, l, mu, 0.0, gamma2).unwrap();
        let gen = PoissonGenerator::new(&p).unwrap();
        let dicke1 = DensityMatrix::pure(&basis_ket(dim, 1)).unwrap();
        let out = gen.apply(dicke1.op());
        let nn = n as f64;
        let expect = gamma2 * 2.0 * mu * mu * nn / (1.0 + 4.0 * mu * mu * nn);
        assert_abs_diff_eq!(out[(0, 0)].re, expect, epsilon = 1e-12);
    }

    #[test]
    fn matrix_free_apply_matches_superoperator() {
        let l = pseudorandom_operator(3, 61);
        let h = pseudorandom_hermitian(3, 62);
        let p = PoissonParams::new(h, l, 0.8, 0.4, 1.1).unwrap();
        let gen = PoissonGenerator::new(&p).unwrap();
        let sup = gen.superoperator();
        let rho = pseudorandom_density(3, 63).hermitize();
        let direct = gen.apply(&rho);
        let via_sup = sup.apply(&rho).unwrap();
        assert!((&direct - &via_sup).norm_max() < 1e-12);
    }

    #[test]
    fn gaussian_limit_distance_shrinks_quadratically() {
        // fixed μ²Γ: distance(Poisson, Gaussian) ~ O(μ²)
        let mu_gamma_sq = 0.25;
        let mut dists = Vec::new();
        for &mu in &[0.2, 0.1, 0.05] {
            let gamma = mu_gamma_sq / (mu * mu);
            let p = PoissonParams::new(
                sigma_z().scale_re(0.5),
                sigma_minus(),
                mu,
                gamma,
                gamma,
            )
            .unwrap();
            let poisson = poisson_liouvillian(&p).unwrap();
            let gauss = gaussian_liouvillian(&p).unwrap();
            dists.push((&poisson - &gauss).norm_fro() / gauss.norm_fro());
        }
        assert!(dists[0] > dists[1] && dists[1] > dists[2]);
        for pair in dists.windows(2) {
            let ratio = pair[0] / pair[1];
            assert!((ratio - 4.0).abs() < 0.6, "ratio {ratio}");
        }
    }

    #[test]
    fn gaussian_amplitude_damping_rate() {
        // μ²Γ₂⁺ = 0.5 ⇒ excited population decays at rate 1
        let p = PoissonParams::new(
            Operator::zeros(2),
            sigma_minus(),
            0.5,
            0.0,
            2.0,
        )
        .unwrap();
        let gen = gaussian_liouvillian(&p).unwrap();
        let excited = DensityMatrix::basis_state(2, 1).unwrap();
        let traj =
            crate::lindblad::propagate(&gen, &excited, &[0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(traj.states[1].population(1), (-1.0f64).exp(), epsilon = 1e-8);
    }

    #[test]
    fn hermitian_coupling_dephasing_rate() {
        // X = σ_z: populations invariant, coherence decays at
        // Γ · E[1 − cos 2a] = Γ · 4μ²/(1+4μ²).
        let mu = 0.6;
        let gamma = 1.4;
        let gen =
            hermitian_coupling_liouvillian(&Operator::zeros(2), &sigma_z(), mu, gamma).unwrap();
        let plus = DensityMatrix::pure(&ndarray::array![
            C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
        ])
        .unwrap();
        let dot = gen.apply(plus.op()).unwrap();
        assert!(dot[(0, 0)].norm() < 1e-13 && dot[(1, 1)].norm() < 1e-13);
        let rate = gamma * 4.0 * mu * mu / (1.0 + 4.0 * mu * mu);
        assert_abs_diff_eq!(dot[(0, 1)].re, -rate * plus.op()[(0, 1)].re, epsilon = 1e-12);

        // cross-check the scalar integral against quadrature
        let quad = crate::quad::laguerre_adaptive(|u| 1.0 - (2.0 * mu * u).cos(), 1e-11).unwrap();
        assert_abs_diff_eq!(quad, 4.0 * mu * mu / (1.0 + 4.0 * mu * mu), epsilon = 1e-10);
    }

    #[test]
    fn hermitian_coupling_annihilates_identity() {
        let x = pseudorandom_hermitian(3, 71);
        let gen = hermitian_coupling_liouvillian(&Operator::zeros(3), &x, 0.9, 2.0).unwrap();
        let mixed = DensityMatrix::maximally_mixed(3);
        assert!(gen.apply(mixed.op()).unwrap().norm_max() < 1e-13);
    }

    #[test]
    fn hermitian_coupling_matches_poisson_generator() {
        let x = pseudorandom_hermitian(3, 73);
        let h = pseudorandom_hermitian(3, 74);
        let mu = 0.8;
        let (g1, g2) = (0.7, 1.9);
        let special = hermitian_coupling_liouvillian(&h, &x, mu, g1 + g2).unwrap();
        let p = PoissonParams::new(h, x, mu, g1, g2).unwrap();
        let general = poisson_liouvillian(&p).unwrap();
        let scale = general.norm_fro();
        assert!((&special - &general).norm_fro() < 1e-9 * scale);
    }

    #[test]
    fn hermitian_coupling_rejects_non_hermitian() {
        let x = pseudorandom_operator(3, 75);
        assert!(matches!(
            hermitian_coupling_liouvillian(&Operator::zeros(3), &x, 0.5, 1.0),
            Err(Error::NonHermitianInput(_))
        ));
    }

    #[test]
    fn scalar_averages_match_quadrature() {
        let mu = 0.9;
        for (u, v) in [(0.7, 1.9), (0.0, 2.3), (3.1, 3.1)] {
            let ss = crate::quad::laguerre_adaptive(
                |x| (mu * x * u).sin() * (mu * x * v).sin(),
                1e-12,
            )
            .unwrap();
            assert_abs_diff_eq!(ss, avg_sin_sin(mu, u, v), epsilon = 1e-10);
            let cc = crate::quad::laguerre_adaptive(
                |x| ((mu * x * u).cos() - 1.0) * ((mu * x * v).cos() - 1.0),
                1e-12,
            )
            .unwrap();
            assert_abs_diff_eq!(cc, avg_cosm1_cosm1(mu, u, v), epsilon = 1e-10);
        }
        let asin = crate::quad::laguerre_adaptive(|x| mu * x * (mu * x * 1.7).sin(), 1e-12).unwrap();
        assert_abs_diff_eq!(asin, avg_a_sin(mu, 1.7), epsilon = 1e-10);
    }
}
