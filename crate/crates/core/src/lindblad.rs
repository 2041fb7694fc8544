//! GKSL generators, density-matrix propagation and steady states.
//!
//! The generator of a GKSL (Lindblad) master equation,
//!
//! ```text
//! 𝓛ρ = −i[H, ρ] + Σₖ γₖ (Aₖ ρ Aₖ† − ½{Aₖ†Aₖ, ρ}),
//! ```
//!
//! is materialized as a dense [`SuperOperator`] on the vectorized density
//! matrix. Propagation uses an adaptive Dormand–Prince 5(4) integrator by
//! default and falls back to matrix-exponential stepping when the generator
//! is stiff on the requested time span.

use ndarray::prelude::*;
use ndarray_linalg::{LeastSquaresSvd, SVD};
use num_complex::Complex64 as C64;
use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::integrate::rk45;
use crate::operator::{
    hermitian_eig, left_mult, right_mult, unvectorize, vectorize, Operator, SuperOperator,
};

/// Hermitian, unit-trace, positive-semidefinite operator.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    op: Operator,
}

impl DensityMatrix {
    /// Validate and wrap: Hermitian to 1e-10, unit trace to 1e-10, minimum
    /// eigenvalue ≥ −1e-8.
    pub fn new(op: Operator) -> Result<Self> {
        Self::with_tolerances(op, 1e-10, 1e-10, -1e-8)
    }

    /// Lenient constructor for integrator output (trace drift up to 1e-8 and
    /// Hermiticity defect up to 1e-9 are accepted, then normalized away).
    pub(crate) fn from_evolved(op: Operator) -> Result<Self> {
        Self::with_tolerances(op, 1e-9, 1e-8, -1e-7)
    }

    fn with_tolerances(op: Operator, herm_tol: f64, trace_tol: f64, eig_floor: f64) -> Result<Self> {
        let defect = op.hermiticity_defect();
        if defect > herm_tol {
            return Err(Error::InvalidState(format!(
                "density matrix Hermiticity defect {defect:.3e} exceeds {herm_tol:.0e}"
            )));
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > trace_tol || tr.im.abs() > trace_tol {
            return Err(Error::InvalidState(format!(
                "density matrix trace {tr} deviates from 1 beyond {trace_tol:.0e}"
            )));
        }
        let sym = op.hermitize();
        let eig = hermitian_eig(&sym)?;
        let min = eig.eigenvalues[0];
        if min < eig_floor {
            return Err(Error::InvalidState(format!(
                "density matrix minimum eigenvalue {min:.3e} below {eig_floor:.0e}"
            )));
        }
        // store the Hermitized, trace-normalized representative
        let op = sym.scale(C64::new(1.0, 0.0) / sym.trace());
        Ok(Self { op })
    }

    /// Pure state |ψ⟩⟨ψ| (the vector is normalized first).
    pub fn pure(ket: &Array1<C64>) -> Result<Self> {
        let norm = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let scaled = ket.mapv(|z| z / C64::new(norm, 0.0));
        Ok(Self {
            op: Operator::outer(&scaled, &scaled),
        })
    }

    /// Basis projector |i⟩⟨i|.
    pub fn basis_state(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::DimensionMismatch(format!(
                "basis index {index} out of range for dim {dim}"
            )));
        }
        let mut ket = Array1::zeros(dim);
        ket[index] = C64::new(1.0, 0.0);
        Self::pure(&ket)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            op: Operator::identity(dim).scale_re(1.0 / dim as f64),
        }
    }

    pub fn op(&self) -> &Operator {
        &self.op
    }

    pub fn into_operator(self) -> Operator {
        self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// Diagonal population `⟨i|ρ|i⟩`.
    pub fn population(&self, index: usize) -> f64 {
        self.op[(index, index)].re
    }
}

/// Time-ordered sequence of density matrices with optional named
/// real-valued observable series.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub observables: BTreeMap<String, Vec<f64>>,
}

impl Trajectory {
    /// Record `Re Tr[Aρ(t)]` for every stored state under `name`.
    pub fn observe(&mut self, name: &str, a: &Operator) -> Result<()> {
        let series = self
            .states
            .iter()
            .map(|rho| expectation(a, rho).map(|z| z.re))
            .collect::<Result<Vec<f64>>>()?;
        self.observables.insert(name.to_string(), series);
        Ok(())
    }

    pub fn observable(&self, name: &str) -> Option<&[f64]> {
        self.observables.get(name).map(|v| v.as_slice())
    }
}

/// Dissipator superoperator `𝓓_A: ρ ↦ AρA† − ½{A†A, ρ}`.
pub fn dissipator(a: &Operator) -> SuperOperator {
    let adag = a.adjoint();
    let adag_a = &adag * a;
    let sandwich = crate::operator::kron(&a.conjugate(), a);
    let left = left_mult(&adag_a);
    let right = right_mult(&adag_a);
    let mut out = SuperOperator::from_matrix(a.dim(), sandwich.into_matrix()).expect("square");
    out = &out - &(&left + &right).scale_re(0.5);
    out
}

/// Commutator part `ρ ↦ −i[H, ρ]` of a generator.
pub fn hamiltonian_liouvillian(h: &Operator) -> SuperOperator {
    let minus_i = C64::new(0.0, -1.0);
    (&left_mult(h) - &right_mult(h)).scale(minus_i)
}

/// Full GKSL generator `−i[H,·] + Σₖ rateₖ 𝓓_{Aₖ}`.
pub fn gksl_liouvillian(h: &Operator, jumps: &[(f64, Operator)]) -> Result<SuperOperator> {
    if !h.is_hermitian(1e-10) {
        return Err(Error::NonHermitianHamiltonian(format!(
            "defect {:.3e}",
            h.hermiticity_defect()
        )));
    }
    let mut gen = hamiltonian_liouvillian(h);
    for (rate, a) in jumps {
        if *rate < 0.0 {
            return Err(Error::NegativeRate(*rate));
        }
        if a.dim() != h.dim() {
            return Err(Error::DimensionMismatch(format!(
                "jump operator dim {} vs Hamiltonian dim {}",
                a.dim(),
                h.dim()
            )));
        }
        gen = &gen + &dissipator(a).scale_re(*rate);
    }
    Ok(gen)
}

/// Expectation value `Tr[Aρ]`.
pub fn expectation(a: &Operator, rho: &DensityMatrix) -> Result<C64> {
    if a.dim() != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "operator dim {} vs state dim {}",
            a.dim(),
            rho.dim()
        )));
    }
    Ok((a * rho.op()).trace())
}

/// How [`propagate_opts`] advances the state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PropagationMethod {
    /// Adaptive RK unless the generator is stiff on the requested span.
    Auto,
    AdaptiveRk,
    /// `expm(𝓛·Δt)` per grid interval, propagators cached per distinct Δt.
    ExpmStep,
}

pub const DEFAULT_RTOL: f64 = 1e-8;
pub const DEFAULT_ATOL: f64 = 1e-10;

/// Propagate `ρ̇ = 𝓛ρ` over an ascending time grid starting at 0.
///
/// Every output state is checked for trace drift (≤ 1e-8) and Hermiticity
/// defect (≤ 1e-9), then Hermitized and renormalized.
pub fn propagate(gen: &SuperOperator, rho0: &DensityMatrix, times: &[f64]) -> Result<Trajectory> {
    propagate_opts(gen, rho0, times, PropagationMethod::Auto, DEFAULT_RTOL, DEFAULT_ATOL)
}

pub fn propagate_opts(
    gen: &SuperOperator,
    rho0: &DensityMatrix,
    times: &[f64],
    method: PropagationMethod,
    rtol: f64,
    atol: f64,
) -> Result<Trajectory> {
    validate_grid(times)?;
    if gen.dim() != rho0.dim() {
        return Err(Error::DimensionMismatch(format!(
            "generator dim {} vs state dim {}",
            gen.dim(),
            rho0.dim()
        )));
    }

    let method = match method {
        PropagationMethod::Auto => {
            let span = *times.last().unwrap();
            // stiffness heuristic: RK45 needs O(‖𝓛‖·t) steps
            if gen.norm_one() * span > 300.0 {
                PropagationMethod::ExpmStep
            } else {
                PropagationMethod::AdaptiveRk
            }
        }
        m => m,
    };

    let raw = match method {
        PropagationMethod::AdaptiveRk => match propagate_rk(gen, rho0, times, rtol, atol) {
            Err(Error::StepSizeUnderflow { .. }) => propagate_expm(gen, rho0, times)?,
            other => other?,
        },
        PropagationMethod::ExpmStep => propagate_expm(gen, rho0, times)?,
        PropagationMethod::Auto => unreachable!(),
    };

    trajectory_from_raw(times, raw)
}

fn validate_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidParameter("empty time grid".into()));
    }
    if times[0] != 0.0 {
        return Err(Error::InvalidParameter(format!(
            "time grid must start at 0, got {}",
            times[0]
        )));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "time grid must be strictly ascending".into(),
        ));
    }
    Ok(())
}

fn propagate_rk(
    gen: &SuperOperator,
    rho0: &DensityMatrix,
    times: &[f64],
    rtol: f64,
    atol: f64,
) -> Result<Vec<Operator>> {
    let rhs = |y: &Array1<C64>| gen.apply_vec(y);
    let mut y = vectorize(rho0.op());
    let mut out = Vec::with_capacity(times.len());
    out.push(rho0.op().clone());
    for w in times.windows(2) {
        y = rk45(&rhs, y, w[0], w[1], rtol, atol)?;
        out.push(unvectorize(&y.view(), gen.dim())?);
    }
    Ok(out)
}

fn propagate_expm(gen: &SuperOperator, rho0: &DensityMatrix, times: &[f64]) -> Result<Vec<Operator>> {
    let mut cache: HashMap<u64, SuperOperator> = HashMap::new();
    let mut y = vectorize(rho0.op());
    let mut out = Vec::with_capacity(times.len());
    out.push(rho0.op().clone());
    for w in times.windows(2) {
        let dt = w[1] - w[0];
        let key = dt.to_bits();
        if !cache.contains_key(&key) {
            cache.insert(key, gen.scale_re(dt).expm()?);
        }
        y = cache[&key].apply_vec(&y);
        out.push(unvectorize(&y.view(), gen.dim())?);
    }
    Ok(out)
}

pub(crate) fn trajectory_from_raw(times: &[f64], raw: Vec<Operator>) -> Result<Trajectory> {
    let mut states = Vec::with_capacity(raw.len());
    for (op, &t) in raw.into_iter().zip(times) {
        let tr = op.trace();
        if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
            return Err(Error::ToleranceNotMet(format!(
                "trace drift {:.3e} at t = {t}",
                ((tr.re - 1.0).powi(2) + tr.im.powi(2)).sqrt()
            )));
        }
        states.push(DensityMatrix::from_evolved(op)?);
    }
    Ok(Trajectory {
        times: times.to_vec(),
        states,
        observables: BTreeMap::new(),
    })
}

/// Relative singular-value threshold below which a direction counts toward
/// the generator kernel.
const KERNEL_TOL: f64 = 1e-10;

/// Solve `𝓛ρ = 0` for the unique stationary state.
///
/// The kernel dimension is established from the singular values of the
/// generator; the state itself comes from a least-squares solve of the
/// generator rows augmented with the trace constraint, followed by
/// Hermitization and renormalization.
pub fn steady_state(gen: &SuperOperator) -> Result<DensityMatrix> {
    let d = gen.dim();
    let n = d * d;
    let (_, sv, _) = gen.matrix().svd(false, false)?;
    let smax = sv.iter().cloned().fold(0.0f64, f64::max);
    if smax == 0.0 {
        return Err(Error::DegenerateKernel { dim: n });
    }
    let kernel_dim = sv.iter().filter(|&&s| s <= KERNEL_TOL * smax).count();
    if kernel_dim != 1 {
        return Err(Error::DegenerateKernel { dim: kernel_dim });
    }

    // rows of 𝓛, then the vectorized-trace row; rhs selects trace = 1
    let mut aug = Array2::<C64>::zeros((n + 1, n));
    aug.slice_mut(s![0..n, ..]).assign(gen.matrix());
    for i in 0..d {
        aug[[n, i + d * i]] = C64::new(1.0, 0.0);
    }
    let mut b = Array1::<C64>::zeros(n + 1);
    b[n] = C64::new(1.0, 0.0);
    let sol = aug.least_squares(&b)?;

    let rho = unvectorize(&sol.solution.view(), d)?.hermitize();
    let tr = rho.trace();
    if tr.norm() < 1e-12 {
        return Err(Error::NoPhysicalState("kernel vector is traceless".into()));
    }
    let rho = rho.scale(C64::new(1.0, 0.0) / tr);

    let residual = gen
        .apply_vec(&vectorize(&rho))
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    if residual > 1e-10 * smax.max(1.0) {
        return Err(Error::ToleranceNotMet(format!(
            "steady-state residual {residual:.3e}"
        )));
    }

    let eig = hermitian_eig(&rho)?;
    if eig.eigenvalues[0] < -1e-8 {
        return Err(Error::NoPhysicalState(format!(
            "minimum eigenvalue {:.3e}",
            eig.eigenvalues[0]
        )));
    }
    DensityMatrix::new(rho)
}
