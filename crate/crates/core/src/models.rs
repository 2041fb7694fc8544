//! Concrete systems: single qubit and collective N-spin (Dicke) models.
//!
//! The collective model couples `N` identical two-level systems through
//! `H_S = (ω/2) Σᵢ σ_z^i` and the collective lowering operator
//! `L = Σᵢ σ⁻_i`. Dynamics started in permutation-symmetric states stays in
//! the symmetric sector, so the ladder representation of dimension `N + 1`
//! (basis `|j, m⟩`, `j = N/2`) is the default; the full `2^N` tensor-product
//! representation is kept as an independence check.

use ndarray::prelude::*;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::lindblad::DensityMatrix;
use crate::operator::{function_of_eig, hermitian_eig, Operator};
use crate::quad::laguerre_adaptive;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    /// Tensor-product space of dimension `2^N`.
    Full,
    /// Symmetric (maximum-j) ladder of dimension `N + 1`, basis index
    /// `k = m + N/2` so that `k = 0` is the ground state.
    Symmetric,
}

/// Collective N-spin system with level splitting ω.
#[derive(Clone, Debug)]
pub struct CollectiveModel {
    pub n: usize,
    pub omega: f64,
    pub representation: Representation,
    h_s: Operator,
    lowering: Operator,
}

pub const FULL_MAX_SPINS: usize = 12;
pub const SYMMETRIC_MAX_SPINS: usize = 64;

/// Build the collective model in the requested representation.
pub fn collective_model(
    n: usize,
    omega: f64,
    representation: Representation,
) -> Result<CollectiveModel> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one spin".into()));
    }
    match representation {
        Representation::Full if n > FULL_MAX_SPINS => {
            return Err(Error::SizeGuardExceeded(format!(
                "full representation limited to N ≤ {FULL_MAX_SPINS}, got {n}"
            )));
        }
        Representation::Symmetric if n > SYMMETRIC_MAX_SPINS => {
            return Err(Error::SizeGuardExceeded(format!(
                "symmetric representation limited to N ≤ {SYMMETRIC_MAX_SPINS}, got {n}"
            )));
        }
        _ => {}
    }

    let (h_s, lowering) = match representation {
        Representation::Symmetric => {
            let dim = n + 1;
            let j = n as f64 / 2.0;
            let h = Operator::from_real_diag(
                &(0..dim).map(|k| omega * (k as f64 - j)).collect::<Vec<_>>(),
            );
            let mut low = Array2::<C64>::zeros((dim, dim));
            for k in 1..dim {
                let m = k as f64 - j;
                low[[k - 1, k]] = C64::new((j * (j + 1.0) - m * (m - 1.0)).sqrt(), 0.0);
            }
            (h, Operator::from_matrix(low)?)
        }
        Representation::Full => {
            let dim = 1usize << n;
            // H diagonal: (ω/2)(n_e − n_g) per basis index (bit set = excited)
            let h = Operator::from_real_diag(
                &(0..dim)
                    .map(|idx: usize| {
                        let excited = idx.count_ones() as f64;
                        omega / 2.0 * (2.0 * excited - n as f64)
                    })
                    .collect::<Vec<_>>(),
            );
            let mut low = Array2::<C64>::zeros((dim, dim));
            for idx in 0..dim {
                for bit in 0..n {
                    if idx & (1 << bit) != 0 {
                        low[[idx & !(1 << bit), idx]] += C64::new(1.0, 0.0);
                    }
                }
            }
            (h, Operator::from_matrix(low)?)
        }
    };

    Ok(CollectiveModel {
        n,
        omega,
        representation,
        h_s,
        lowering,
    })
}

impl CollectiveModel {
    pub fn dim(&self) -> usize {
        self.h_s.dim()
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.h_s
    }

    /// Collective lowering operator `L = Σᵢ σ⁻_i` (or `J⁻` on the ladder).
    pub fn lowering(&self) -> &Operator {
        &self.lowering
    }

    /// `J_x = Σᵢ σ_x^i = L + L†`.
    pub fn jx(&self) -> Operator {
        &self.lowering + &self.lowering.adjoint()
    }

    /// `J_z = Σᵢ σ_z^i`.
    pub fn jz(&self) -> Operator {
        self.h_s.scale_re(2.0 / self.omega)
    }

    /// Index of the all-ground basis state (0 in both representations).
    pub fn ground_index(&self) -> usize {
        0
    }

    /// Normalized Dicke state with `k` excitations.
    pub fn dicke_ket(&self, k: usize) -> Result<Array1<C64>> {
        dicke_ket(self.n, k, self.representation)
    }

    /// Projector `|0⟩⟨0|` onto the collective ground state.
    pub fn ground_projector(&self) -> Operator {
        let mut mat = Array2::zeros((self.dim(), self.dim()));
        mat[[0, 0]] = C64::new(1.0, 0.0);
        Operator::from_matrix(mat).expect("square")
    }
}

/// Normalized Dicke state `|D_{N,k}⟩` (symmetric superposition of all
/// `k`-excitation product states).
pub fn dicke_ket(n: usize, k: usize, representation: Representation) -> Result<Array1<C64>> {
    if k > n {
        return Err(Error::InvalidParameter(format!(
            "cannot place {k} excitations on {n} spins"
        )));
    }
    match representation {
        Representation::Symmetric => {
            let mut ket = Array1::zeros(n + 1);
            ket[k] = C64::new(1.0, 0.0);
            Ok(ket)
        }
        Representation::Full => {
            if n > FULL_MAX_SPINS {
                return Err(Error::SizeGuardExceeded(format!(
                    "full representation limited to N ≤ {FULL_MAX_SPINS}"
                )));
            }
            let dim = 1usize << n;
            let count = binomial(n, k);
            let amp = C64::new(1.0 / (count as f64).sqrt(), 0.0);
            let mut ket = Array1::zeros(dim);
            for idx in 0..dim {
                if (idx as usize).count_ones() as usize == k {
                    ket[idx] = amp;
                }
            }
            Ok(ket)
        }
    }
}

/// Isometry from the symmetric ladder into the full tensor-product space:
/// columns are the Dicke states `|D_{N,k}⟩`, `k = 0..N`.
pub fn dicke_basis_matrix(n: usize) -> Result<Array2<C64>> {
    let dim = 1usize << n;
    let mut u = Array2::zeros((dim, n + 1));
    for k in 0..=n {
        let ket = dicke_ket(n, k, Representation::Full)?;
        u.column_mut(k).assign(&ket);
    }
    Ok(u)
}

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// Thermal state `e^{−βH}/Tr e^{−βH}`, evaluated in the eigenbasis of `H`
/// with the spectrum shifted so the exponentials never overflow.
pub fn gibbs_state(h: &Operator, beta: f64) -> Result<DensityMatrix> {
    if !beta.is_finite() {
        return Err(Error::InvalidParameter("β must be finite".into()));
    }
    let eig = hermitian_eig(h)?;
    let shift = if beta >= 0.0 {
        eig.eigenvalues[0]
    } else {
        eig.eigenvalues[eig.eigenvalues.len() - 1]
    };
    let unnorm = function_of_eig(&eig, |w| C64::new((-beta * (w - shift)).exp(), 0.0));
    let tr = unnorm.trace();
    DensityMatrix::new(unnorm.scale(C64::new(1.0, 0.0) / tr))
}

/// Effective collective decay rate out of the first excited Dicke state.
#[derive(Clone, Copy, Debug)]
pub struct EffectiveDecayRate {
    /// `2Γ₂⁺μ²N / (1 + 4μ²N)`
    pub closed_form: f64,
    /// `Γ₂⁺ ∫da p(a) sin²(a√N)` by Gauss–Laguerre quadrature.
    pub quadrature: f64,
}

pub fn effective_decay_rate(n: usize, mu: f64, gamma2_plus: f64) -> Result<EffectiveDecayRate> {
    if n == 0 || !(mu > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need N ≥ 1 and μ > 0, got N = {n}, μ = {mu}"
        )));
    }
    let x = mu * mu * n as f64;
    let closed_form = 2.0 * gamma2_plus * x / (1.0 + 4.0 * x);
    let root_n = (n as f64).sqrt();
    let quadrature =
        gamma2_plus * laguerre_adaptive(|u| (mu * u * root_n).sin().powi(2), 1e-11)?;
    Ok(EffectiveDecayRate {
        closed_form,
        quadrature,
    })
}

/// One row of the decay-rate sweep, with rates normalized by `Γ₂⁺`.
#[derive(Clone, Copy, Debug)]
pub struct DecayRateSweepRow {
    /// Abscissa `x = μ²N`.
    pub mu_sq_n: f64,
    /// `Γ_eff/Γ₂⁺ = 2x/(1+4x)`.
    pub poisson_rate: f64,
    /// Weak-coupling line `2x`.
    pub gaussian_rate: f64,
}

/// Sweep the normalized effective decay rate over a logarithmic `μ²N` grid.
/// Evaluated through [`effective_decay_rate`] at `N = 1`, `μ = √x`, which
/// covers arbitrary positive `x`.
pub fn decay_rate_sweep(
    x_min: f64,
    x_max: f64,
    points: usize,
    gamma2_plus: f64,
) -> Result<Vec<DecayRateSweepRow>> {
    if !(x_min > 0.0) || !(x_max > x_min) || points < 2 {
        return Err(Error::InvalidParameter(format!(
            "need 0 < x_min < x_max and ≥ 2 points, got [{x_min}, {x_max}] with {points}"
        )));
    }
    if gamma2_plus <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "Γ₂⁺ must be positive, got {gamma2_plus}"
        )));
    }
    let (lo, hi) = (x_min.log10(), x_max.log10());
    (0..points)
        .map(|i| {
            let x = 10f64.powf(lo + (hi - lo) * i as f64 / (points - 1) as f64);
            let closed = 2.0 * gamma2_plus * x / (1.0 + 4.0 * x);
            Ok(DecayRateSweepRow {
                mu_sq_n: x,
                poisson_rate: closed / gamma2_plus,
                gaussian_rate: 2.0 * x,
            })
        })
        .collect()
}
