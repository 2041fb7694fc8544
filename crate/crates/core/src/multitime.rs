//! Multi-time correlation functions of a system operator.
//!
//! For descending times `t₁ ≥ … ≥ tₙ ≥ 0`,
//!
//! ```text
//! ⟨A(t₁)⋯A(tₙ)⟩ = Tr[ A e^{𝓛(t₁−t₂)} A ⋯ A e^{𝓛 tₙ} ρ(0) ],
//! ```
//!
//! with every insertion acting from the left. The exact evaluation uses the
//! composite system⊗bath generator; the regression evaluation replaces it by
//! the Poisson master-equation generator on the system alone — the source-
//! field derivatives that define these correlators are realized directly as
//! operator insertions between propagation segments, so no numerical
//! differentiation is involved.

use num_complex::Complex64 as C64;
use std::collections::HashMap;

use crate::composite::{CompositeSetup, COMPOSITE_DIM_MAX};
use crate::error::{Error, Result};
use crate::lindblad::DensityMatrix;
use crate::operator::{kron, left_mult, vectorize, Operator, SuperOperator};
use crate::poisson::{poisson_liouvillian, PoissonParams};

/// Maximum number of insertions.
pub const MULTITIME_MAX: usize = 4;

/// A multi-time correlator request: the inserted operator and descending
/// insertion times.
#[derive(Clone, Debug)]
pub struct MultiTimeSpec {
    op: Operator,
    times: Vec<f64>,
}

impl MultiTimeSpec {
    pub fn new(op: Operator, times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidParameter("no insertion times".into()));
        }
        if times.len() > MULTITIME_MAX {
            return Err(Error::CostGuardExceeded(format!(
                "multi-time correlators limited to n ≤ {MULTITIME_MAX}, got {}",
                times.len()
            )));
        }
        if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::InvalidParameter(
                "insertion times must be finite and non-negative".into(),
            ));
        }
        if times.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidParameter(
                "insertion times must be descending".into(),
            ));
        }
        Ok(Self { op, times })
    }

    pub fn op(&self) -> &Operator {
        &self.op
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }
}

/// Evaluate the insertion chain for a fixed generator: propagate to `tₙ`,
/// insert, propagate the gaps, insert, …, trace.
fn insertion_chain(
    gen: &SuperOperator,
    insertion: &SuperOperator,
    rho0: &Operator,
    times: &[f64],
) -> Result<C64> {
    let n = times.len();
    let mut cache: HashMap<u64, SuperOperator> = HashMap::new();
    let mut step = |v: &ndarray::Array1<C64>, dt: f64| -> Result<ndarray::Array1<C64>> {
        if dt == 0.0 {
            return Ok(v.clone());
        }
        let key = dt.to_bits();
        if !cache.contains_key(&key) {
            cache.insert(key, gen.scale_re(dt).expm()?);
        }
        Ok(cache[&key].apply_vec(v))
    };

    let mut v = vectorize(rho0);
    v = step(&v, times[n - 1])?;
    v = insertion.apply_vec(&v);
    for j in (0..n - 1).rev() {
        v = step(&v, times[j] - times[j + 1])?;
        v = insertion.apply_vec(&v);
    }
    let d = gen.dim();
    let mut trace = C64::new(0.0, 0.0);
    for i in 0..d {
        trace += v[i + d * i];
    }
    Ok(trace)
}

/// Exact multi-time correlator on the composite system⊗bath space.
pub fn multitime_exact(setup: &CompositeSetup, spec: &MultiTimeSpec) -> Result<C64> {
    if spec.op.dim() != setup.system_dim() {
        return Err(Error::DimensionMismatch(format!(
            "operator dim {} vs system dim {}",
            spec.op.dim(),
            setup.system_dim()
        )));
    }
    if setup.composite_dim() > COMPOSITE_DIM_MAX {
        return Err(Error::CostGuardExceeded(format!(
            "composite dimension {} exceeds {COMPOSITE_DIM_MAX}",
            setup.composite_dim()
        )));
    }
    let gen = setup.liouvillian()?;
    let insertion = left_mult(&kron(&spec.op, &Operator::identity(4)));
    insertion_chain(&gen, &insertion, setup.initial_state().op(), spec.times())
}

/// Quantum-regression evaluation with the Poisson generator.
pub fn multitime_regression(
    params: &PoissonParams,
    rho0: &DensityMatrix,
    spec: &MultiTimeSpec,
) -> Result<C64> {
    if spec.op.dim() != params.h_s.dim() || rho0.dim() != params.h_s.dim() {
        return Err(Error::DimensionMismatch(format!(
            "operator dim {}, state dim {}, system dim {}",
            spec.op.dim(),
            rho0.dim(),
            params.h_s.dim()
        )));
    }
    let gen = poisson_liouvillian(params)?;
    let insertion = left_mult(&spec.op);
    insertion_chain(&gen, &insertion, rho0.op(), spec.times())
}
