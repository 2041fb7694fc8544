//! Dense complex operator algebra.
//!
//! Operators are square complex matrices; superoperators are matrices acting
//! on column-stacked (vectorized) operators. The vectorization convention is
//! fixed once, repo-wide:
//!
//! ```text
//! vec(ρ)[i + d·j] = ρ[i, j]          (column stacking)
//! vec(AρB)        = (Bᵀ ⊗ A) vec(ρ)
//! ```
//!
//! so left multiplication by `A` is the superoperator `I ⊗ A` and right
//! multiplication by `B` is `Bᵀ ⊗ I`.

use ndarray::prelude::*;
use ndarray_linalg::{Eigh, Inverse, UPLO};
use num_complex::Complex64;
use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Dense square complex matrix with dimension metadata.
#[derive(Clone, PartialEq)]
pub struct Operator {
    mat: Array2<C64>,
}

impl Operator {
    /// Wrap a square matrix, rejecting non-square shapes and NaN/Inf entries.
    pub fn from_matrix(mat: Array2<C64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "operator must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter(
                "operator entries must be finite".into(),
            ));
        }
        Ok(Self { mat })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            mat: Array2::zeros((dim, dim)),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: Array2::eye(dim),
        }
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let d = diag.len();
        let mut mat = Array2::zeros((d, d));
        for (i, z) in diag.iter().enumerate() {
            mat[[i, i]] = *z;
        }
        Self { mat }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        Self::from_diag(&diag.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>())
    }

    /// |ket⟩⟨bra| outer product.
    pub fn outer(ket: &Array1<C64>, bra: &Array1<C64>) -> Self {
        let d = ket.len();
        let mat = Array2::from_shape_fn((d, d), |(i, j)| ket[i] * bra[j].conj());
        Self { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.mat
    }

    pub fn adjoint(&self) -> Self {
        Self {
            mat: self.mat.t().mapv(|z| z.conj()),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            mat: self.mat.t().to_owned(),
        }
    }

    pub fn conjugate(&self) -> Self {
        Self {
            mat: self.mat.mapv(|z| z.conj()),
        }
    }

    pub fn trace(&self) -> C64 {
        self.mat.diag().sum()
    }

    pub fn scale(&self, z: C64) -> Self {
        Self {
            mat: self.mat.mapv(|w| w * z),
        }
    }

    pub fn scale_re(&self, x: f64) -> Self {
        self.scale(C64::new(x, 0.0))
    }

    /// Largest entry modulus.
    pub fn norm_max(&self) -> f64 {
        self.mat.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius norm.
    pub fn norm_fro(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Induced 1-norm (maximum column sum).
    pub fn norm_one(&self) -> f64 {
        let mut best = 0.0f64;
        for j in 0..self.dim() {
            let s: f64 = self.mat.column(j).iter().map(|z| z.norm()).sum();
            best = best.max(s);
        }
        best
    }

    /// Hermiticity defect `max |M - M†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut defect = 0.0f64;
        for i in 0..d {
            for j in i..d {
                defect = defect.max((self.mat[[i, j]] - self.mat[[j, i]].conj()).norm());
            }
        }
        defect
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol * self.norm_max().max(f64::MIN_POSITIVE)
            || self.hermiticity_defect() == 0.0
    }

    /// `(M + M†)/2`.
    pub fn hermitize(&self) -> Self {
        let adj = self.adjoint();
        Self {
            mat: (&self.mat + &adj.mat).mapv(|z| z * 0.5),
        }
    }

    pub fn apply_vec(&self, v: &Array1<C64>) -> Array1<C64> {
        self.mat.dot(v)
    }

    /// Matrix exponential by Padé approximation with scaling and squaring.
    pub fn expm(&self) -> Result<Self> {
        Ok(Self {
            mat: expm_mat(&self.mat)?,
        })
    }

    pub fn kron(&self, other: &Operator) -> Operator {
        Operator {
            mat: ndarray::linalg::kron(&self.mat, &other.mat),
        }
    }
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Operator(dim={})", self.dim())?;
        if self.dim() <= 6 {
            write!(f, " {:.4}", self.mat)?;
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for Operator {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.mat[[idx.0, idx.1]]
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        Operator {
            mat: &self.mat + &rhs.mat,
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        Operator {
            mat: &self.mat - &rhs.mat,
        }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        Operator {
            mat: self.mat.dot(&rhs.mat),
        }
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;
    fn mul(self, z: C64) -> Operator {
        self.scale(z)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale(C64::new(-1.0, 0.0))
    }
}

/// Eigendecomposition of a Hermitian operator.
///
/// Eigenvalues are real and sorted ascending; eigenvectors are the columns of
/// a unitary matrix, in matching order.
#[derive(Clone, Debug)]
pub struct HermitianEig {
    pub eigenvalues: Array1<f64>,
    pub eigenvectors: Operator,
}

/// Relative Hermiticity tolerance used by [`hermitian_eig`].
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Diagonalize a Hermitian operator.
///
/// The input must be Hermitian to within `1e-10 · max|M|`; the decomposition
/// is performed on `(M + M†)/2` so roundoff-level asymmetry never leaks into
/// the spectrum.
pub fn hermitian_eig(m: &Operator) -> Result<HermitianEig> {
    let scale = m.norm_max();
    let defect = m.hermiticity_defect();
    if scale > 0.0 && defect > HERMITICITY_TOL * scale {
        return Err(Error::NonHermitianInput(format!(
            "defect {defect:.3e} exceeds {HERMITICITY_TOL:.0e} * {scale:.3e}"
        )));
    }
    let sym = m.hermitize();
    let (w, v) = sym.mat.eigh(UPLO::Lower)?;
    // LAPACK receives the row-major buffer as its column-major transpose, so
    // depending on the backend the eigenvectors of M are either the columns
    // of conj(V) or of V itself. Resolve by checking the reconstruction.
    let resid = |vv: &Array2<C64>| -> f64 {
        let mv = sym.mat.dot(vv);
        let mut r = 0.0f64;
        for j in 0..vv.ncols() {
            for i in 0..vv.nrows() {
                r = r.max((mv[[i, j]] - vv[[i, j]] * w[j]).norm());
            }
        }
        r
    };
    let conj = v.mapv(|z| z.conj());
    let mat = if resid(&conj) <= resid(&v) { conj } else { v };
    Ok(HermitianEig {
        eigenvalues: w,
        eigenvectors: Operator { mat },
    })
}

/// Evaluate a scalar function on a Hermitian operator: `V diag(f(wᵢ)) V†`.
pub fn operator_function<F>(m: &Operator, f: F) -> Result<Operator>
where
    F: Fn(f64) -> C64,
{
    let eig = hermitian_eig(m)?;
    Ok(function_of_eig(&eig, f))
}

/// Same as [`operator_function`] but reusing a precomputed decomposition.
pub fn function_of_eig<F>(eig: &HermitianEig, f: F) -> Operator
where
    F: Fn(f64) -> C64,
{
    let v = &eig.eigenvectors.mat;
    let d = v.nrows();
    // V · diag(f(w)) · V†
    let mut scaled = v.clone();
    for (j, &w) in eig.eigenvalues.iter().enumerate() {
        let fw = f(w);
        for i in 0..d {
            scaled[[i, j]] *= fw;
        }
    }
    Operator {
        mat: scaled.dot(&v.t().mapv(|z| z.conj())),
    }
}

/// Kronecker product `A ⊗ B`.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    a.kron(b)
}

/// Column-stack an operator into a Liouville-space vector.
pub fn vectorize(op: &Operator) -> Array1<C64> {
    let d = op.dim();
    let mut v = Array1::zeros(d * d);
    for j in 0..d {
        for i in 0..d {
            v[i + d * j] = op.mat[[i, j]];
        }
    }
    v
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &ArrayView1<C64>, dim: usize) -> Result<Operator> {
    if v.len() != dim * dim {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} cannot be reshaped to {dim}x{dim}",
            v.len()
        )));
    }
    let mut mat = Array2::zeros((dim, dim));
    for j in 0..dim {
        for i in 0..dim {
            mat[[i, j]] = v[i + dim * j];
        }
    }
    Ok(Operator { mat })
}

/// Dense matrix acting on vectorized operators.
#[derive(Clone, PartialEq)]
pub struct SuperOperator {
    dim: usize,
    mat: Array2<C64>,
}

impl SuperOperator {
    /// Wrap a `d²×d²` matrix acting on vectorized `d×d` operators.
    pub fn from_matrix(dim: usize, mat: Array2<C64>) -> Result<Self> {
        if mat.nrows() != dim * dim || mat.ncols() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "superoperator for dim {dim} must be {0}x{0}, got {1}x{2}",
                dim * dim,
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(Self { dim, mat })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            mat: Array2::zeros((dim * dim, dim * dim)),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            mat: Array2::eye(dim * dim),
        }
    }

    /// Hilbert-space dimension `d` (the matrix itself is `d²×d²`).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn apply(&self, op: &Operator) -> Result<Operator> {
        if op.dim() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "superoperator dim {} applied to operator dim {}",
                self.dim,
                op.dim()
            )));
        }
        let v = self.mat.dot(&vectorize(op));
        unvectorize(&v.view(), self.dim)
    }

    pub fn apply_vec(&self, v: &Array1<C64>) -> Array1<C64> {
        self.mat.dot(v)
    }

    pub fn scale(&self, z: C64) -> Self {
        Self {
            dim: self.dim,
            mat: self.mat.mapv(|w| w * z),
        }
    }

    pub fn scale_re(&self, x: f64) -> Self {
        self.scale(C64::new(x, 0.0))
    }

    pub fn norm_max(&self) -> f64 {
        self.mat.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn norm_one(&self) -> f64 {
        let mut best = 0.0f64;
        for j in 0..self.mat.ncols() {
            let s: f64 = self.mat.column(j).iter().map(|z| z.norm()).sum();
            best = best.max(s);
        }
        best
    }

    pub fn expm(&self) -> Result<Self> {
        Ok(Self {
            dim: self.dim,
            mat: expm_mat(&self.mat)?,
        })
    }

    /// Materialize a linear map on operators by applying it to every matrix
    /// unit `|i⟩⟨j|`.
    pub fn from_action<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&Operator) -> Operator,
    {
        let mut mat = Array2::zeros((dim * dim, dim * dim));
        for j in 0..dim {
            for i in 0..dim {
                let mut unit = Operator::zeros(dim);
                unit.mat[[i, j]] = ONE;
                let out = vectorize(&f(&unit));
                mat.column_mut(i + dim * j).assign(&out);
            }
        }
        Self { dim, mat }
    }

    fn wrap_like(&self, mat: Array2<C64>) -> Self {
        Self { dim: self.dim, mat }
    }
}

impl fmt::Debug for SuperOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SuperOperator(dim={})", self.dim)
    }
}

impl Add for &SuperOperator {
    type Output = SuperOperator;
    fn add(self, rhs: &SuperOperator) -> SuperOperator {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        self.wrap_like(&self.mat + &rhs.mat)
    }
}

impl Sub for &SuperOperator {
    type Output = SuperOperator;
    fn sub(self, rhs: &SuperOperator) -> SuperOperator {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        self.wrap_like(&self.mat - &rhs.mat)
    }
}

impl Mul for &SuperOperator {
    type Output = SuperOperator;
    fn mul(self, rhs: &SuperOperator) -> SuperOperator {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        self.wrap_like(self.mat.dot(&rhs.mat))
    }
}

impl Neg for &SuperOperator {
    type Output = SuperOperator;
    fn neg(self) -> SuperOperator {
        self.scale(C64::new(-1.0, 0.0))
    }
}

/// Superoperator of left multiplication: `ρ ↦ Aρ`, i.e. `I ⊗ A`.
pub fn left_mult(a: &Operator) -> SuperOperator {
    let id = Operator::identity(a.dim());
    SuperOperator {
        dim: a.dim(),
        mat: ndarray::linalg::kron(id.matrix(), a.matrix()),
    }
}

/// Superoperator of right multiplication: `ρ ↦ ρB`, i.e. `Bᵀ ⊗ I`.
pub fn right_mult(b: &Operator) -> SuperOperator {
    let id = Operator::identity(b.dim());
    SuperOperator {
        dim: b.dim(),
        mat: ndarray::linalg::kron(&b.matrix().t().to_owned(), id.matrix()),
    }
}

/// Left and right multiplication superoperators of the same operator.
pub fn left_right_superops(a: &Operator) -> (SuperOperator, SuperOperator) {
    (left_mult(a), right_mult(a))
}

// ---------------------------------------------------------------------------
// Two-level helpers. Basis convention: index 0 = |g⟩, index 1 = |e⟩, so
// σ_z = diag(−1, +1), σ⁺ = |e⟩⟨g| and σ⁻ = |g⟩⟨e|.
// ---------------------------------------------------------------------------

pub fn sigma_x() -> Operator {
    Operator::from_matrix(ndarray::array![[ZERO, ONE], [ONE, ZERO]]).unwrap()
}

pub fn sigma_y() -> Operator {
    Operator::from_matrix(ndarray::array![[ZERO, -I], [I, ZERO]]).unwrap()
}

pub fn sigma_z() -> Operator {
    Operator::from_real_diag(&[-1.0, 1.0])
}

pub fn sigma_plus() -> Operator {
    Operator::from_matrix(ndarray::array![[ZERO, ZERO], [ONE, ZERO]]).unwrap()
}

pub fn sigma_minus() -> Operator {
    Operator::from_matrix(ndarray::array![[ZERO, ONE], [ZERO, ZERO]]).unwrap()
}

/// Basis ket |i⟩ of a `dim`-dimensional space.
pub fn basis_ket(dim: usize, index: usize) -> Array1<C64> {
    let mut v = Array1::zeros(dim);
    v[index] = ONE;
    v
}

// ---------------------------------------------------------------------------
// Matrix exponential: diagonal Padé approximants with scaling and squaring,
// order chosen from the 1-norm (Higham 2005).
// ---------------------------------------------------------------------------

const THETA: [(usize, f64); 5] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
    (13, 5.371920351148152e0),
];

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn pade_coeffs(m: usize) -> Vec<f64> {
    // b_j = (2m-j)! m! / ((2m)! (m-j)! j!); m ≤ 9 keeps every factorial
    // exact in f64.
    let fact = |n: usize| -> f64 { (1..=n).map(|k| k as f64).product::<f64>().max(1.0) };
    (0..=m)
        .map(|j| fact(2 * m - j) * fact(m) / (fact(2 * m) * fact(m - j) * fact(j)))
        .collect()
}

fn expm_mat(a: &Array2<C64>) -> Result<Array2<C64>> {
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Overflow("non-finite entries in expm input".into()));
    }
    let d = a.nrows();
    let norm = {
        let mut best = 0.0f64;
        for j in 0..d {
            best = best.max(a.column(j).iter().map(|z| z.norm()).sum());
        }
        best
    };

    for &(m, theta) in &THETA[..4] {
        if norm <= theta {
            return pade_exp(a, m);
        }
    }

    let theta13 = THETA[4].1;
    let s = if norm > theta13 {
        (norm / theta13).log2().ceil() as i32
    } else {
        0
    };
    if s > 64 {
        return Err(Error::Overflow(format!(
            "1-norm {norm:.3e} requires 2^{s} squarings"
        )));
    }
    let scaled = a.mapv(|z| z / C64::new(2f64.powi(s), 0.0));
    let mut x = pade_exp(&scaled, 13)?;
    for _ in 0..s {
        x = x.dot(&x);
    }
    Ok(x)
}

fn pade_exp(a: &Array2<C64>, m: usize) -> Result<Array2<C64>> {
    let d = a.nrows();
    let b: Vec<f64> = if m == 13 {
        PADE13.to_vec()
    } else {
        pade_coeffs(m)
    };
    let eye: Array2<C64> = Array2::eye(d);
    let a2 = a.dot(a);

    let (u, v) = if m == 13 {
        let a4 = a2.dot(&a2);
        let a6 = a4.dot(&a2);
        let u_inner = a6.mapv(|z| z * b[13]) + a4.mapv(|z| z * b[11]) + a2.mapv(|z| z * b[9]);
        let u_poly = a6.dot(&u_inner)
            + a6.mapv(|z| z * b[7])
            + a4.mapv(|z| z * b[5])
            + a2.mapv(|z| z * b[3])
            + eye.mapv(|z| z * b[1]);
        let v_inner = a6.mapv(|z| z * b[12]) + a4.mapv(|z| z * b[10]) + a2.mapv(|z| z * b[8]);
        let v = a6.dot(&v_inner)
            + a6.mapv(|z| z * b[6])
            + a4.mapv(|z| z * b[4])
            + a2.mapv(|z| z * b[2])
            + eye.mapv(|z| z * b[0]);
        (a.dot(&u_poly), v)
    } else {
        // powers a^2, a^4, ... up to a^(m-1)
        let mut even_pows = vec![eye.clone(), a2.clone()];
        while even_pows.len() <= m / 2 {
            let next = even_pows.last().unwrap().dot(&a2);
            even_pows.push(next);
        }
        let mut u_poly: Array2<C64> = Array2::zeros((d, d));
        let mut v: Array2<C64> = Array2::zeros((d, d));
        for k in 0..=m / 2 {
            u_poly = u_poly + even_pows[k].mapv(|z| z * b[2 * k + 1]);
            v = v + even_pows[k].mapv(|z| z * b[2 * k]);
        }
        (a.dot(&u_poly), v)
    };

    // (V - U) X = (V + U)
    let denom = &v - &u;
    let numer = &v + &u;
    let inv = denom.inv().map_err(|e| {
        Error::Overflow(format!("Padé denominator is singular: {e}"))
    })?;
    Ok(inv.dot(&numer))
}

// ---------------------------------------------------------------------------
