//! Dense-matrix quantum counterparts of the classical information toolbox.
//!
//! The quantities mirror [`crate::classical_info`] with density matrices in
//! place of probability tables.  For sub-states `ρ` (positive semi-definite,
//! `Tr ρ ≤ 1`) and a positive reference `σ`:
//!
//! * `ψ(s|ρ‖σ) = ln Tr ρ^{1+s} σ^{−s}` and its symmetrized companion
//!   `ψ̲(s|ρ‖σ) = ln Tr ρ^{(1+s)/2} σ^{−s/2} ρ^{(1+s)/2} σ^{−s/2}`, which
//!   satisfies `ψ̲ ≤ ψ` on `s ∈ (0, 1]`; both recover the relative entropy
//!   `D(ρ‖σ) = Tr ρ(ln ρ − ln σ)` through `lim_{s→0} ψ(s)/s`.
//! * Two conditional Rényi families for classical–quantum states,
//!   `H_{1+s}(A|E|ρ‖σ) = ln|A| − ψ(s|ρ‖ρ_mix ⊗ σ)/s` and the barred
//!   version built from `ψ̲`, plus the min-entropy
//!   `H_min(A|E|ρ‖σ) = −ln ‖(I ⊗ σ^{−1/2}) ρ (I ⊗ σ^{−1/2})‖`.
//! * `φ(s|A|E|ρ) = ln Tr (Σ_a P(a)^{1/(1−s)} ρ_a^{1/(1−s)})^{1−s}` on
//!   `s ∈ [0, 1)`, with `φ′(0) = −H(A|E|ρ)` and the conjugate identity
//!   `max_σ s·H_{1+s}(A|E|ρ‖σ) = −(1+s)·φ(s/(1+s)|A|E|ρ)` attained at
//!   `σ* ∝ (Σ_a (P(a) ρ_a)^{1+s})^{1/(1+s)}`.
//! * Secrecy criteria: trace-norm distances `d₁ = ‖ρ − ρ^A ⊗ ρ^E‖₁`,
//!   `d₁′ = ‖ρ − ρ_mix^A ⊗ ρ^E‖₁`, the divergences `I = D(ρ‖ρ^A ⊗ ρ^E)`,
//!   `I′ = D(ρ‖ρ_mix^A ⊗ ρ^E)`, the quantum Pinsker bounds `d₁² ≤ 2I`,
//!   `d₁′² ≤ 2I′`, and Fannes-type converses `I ≤ η(d₁, ln d_E)`,
//!   `I′ ≤ η(d₁′, ln(|A| d_E))`.
//! * Renner's conditional L₂ distance from uniform,
//!   `d₂(A:E|ρ‖σ) = Tr ((I ⊗ σ^{−1/4})(ρ − ρ_mix^A ⊗ ρ^E)(I ⊗ σ^{−1/4}))²`,
//!   which expands exactly into
//!   `e^{−H̲₂(A|E|ρ‖σ)} − e^{ψ̲(1|ρ^E‖σ)}/|A|`; both routes are computed and
//!   compared on every call.
//! * The pinching map `Λ_σ(ρ) = Σ_i E_i ρ E_i` over the eigenprojections of
//!   `σ`, together with eigenvalue-cluster statistics `v(σ)` and the
//!   log-spread `λ(σ) = ln(a₁/a₀)`.
//!
//! # Conventions
//!
//! All entropic quantities are returned in nats; rendering in bits is a
//! presentation concern.  Fractional powers are taken through the cached
//! eigendecomposition: eigenvalues in `[−1e−10, 0)` are clamped to zero
//! (numerical PSD drift), anything lower is an error, and negative powers
//! are pseudo-inverses on the support (eigenvalues at or below `1e−12`
//! relative to the largest are excluded).  Spectra are ordered by descending
//! eigenvalue with each eigenvector's first significant component rotated to
//! the positive real axis, so repeated runs produce bit-identical results.
//! Exact operations are capped at joint dimension `|A|·d_E ≤ 256`.

use std::ops::Range;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classical_info::{
    eta, log_sum_exp, vector_alphabet, Distribution, JointSubDistribution, MASS_TOLERANCE,
};
use crate::finite_field::{FieldMatrix, FieldSpec, FieldVector};

/// Dense complex matrix used throughout the quantum layer.
pub type ComplexMatrix = DMatrix<Complex64>;

/// Maximum allowed entry-wise deviation from `M = M†`.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;
/// Eigenvalues below `−PSD_TOLERANCE` disqualify an operator as PSD;
/// anything in `[−PSD_TOLERANCE, 0)` is clamped to zero.
pub const PSD_TOLERANCE: f64 = 1e-10;
/// Tolerance on `Tr ρ = 1` for conditional states and reference states.
pub const TRACE_TOLERANCE: f64 = 1e-10;
/// Relative cutoff below which eigenvalues count as zero when inverting.
pub const SUPPORT_CUTOFF: f64 = 1e-12;
/// Relative gap that separates eigenvalue clusters.
pub const CLUSTER_TOLERANCE: f64 = 1e-9;
/// Exact operations refuse joint dimensions `|A|·d_E` beyond this cap.
pub const DIMENSION_CAP: usize = 256;

/// Errors reported by the quantum-information layer.
#[derive(Debug, Error, PartialEq)]
pub enum QuantumError {
    /// The matrix is not Hermitian within [`HERMITIAN_TOLERANCE`].
    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian {
        /// Largest entry of `|M − M†|`.
        deviation: f64,
    },
    /// The operator has an eigenvalue below `−`[`PSD_TOLERANCE`].
    #[error("operator is not positive semi-definite (minimum eigenvalue {min_eigenvalue:.3e})")]
    NotPsd {
        /// Offending eigenvalue.
        min_eigenvalue: f64,
    },
    /// A state that must be normalized is not.
    #[error("state is not normalized (trace {trace})")]
    NotNormalized {
        /// Actual trace.
        trace: f64,
    },
    /// The reference operator is singular on the support of the state.
    #[error("reference operator is singular on the support of the state")]
    SupportViolation,
    /// A parameter left the domain of the requested quantity.
    #[error("domain error: {0}")]
    DomainError(String),
    /// The operator is numerically zero where a nonzero one is required.
    #[error("operator is numerically zero")]
    ZeroOperator,
    /// The classical alphabet is not the canonical vector enumeration.
    #[error("alphabet is not the canonical vector space enumeration: {0}")]
    NonGroupAlphabet(String),
    /// The joint dimension exceeds the exact-operation cap.
    #[error("joint dimension {dim} exceeds the exact-operation cap {cap}")]
    DimensionCap {
        /// Requested joint dimension.
        dim: usize,
        /// Allowed maximum.
        cap: usize,
    },
    /// A classical–quantum state failed validation.
    #[error("invalid c-q state: {0}")]
    InvalidState(String),
    /// A Kraus family failed validation.
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    /// Two operators that must share a dimension do not.
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch {
        /// Dimension of the left operand.
        left: usize,
        /// Dimension of the right operand.
        right: usize,
    },
}

fn cplx(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * cplx(0.5)
}

fn max_abs_entry(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

fn real_trace(m: &ComplexMatrix) -> f64 {
    let t = m.trace();
    debug_assert!(
        t.im.abs() <= 1e-8 * (1.0 + t.re.abs()),
        "trace expected to be real, got {t}"
    );
    t.re
}

/// Trace norm `‖M‖₁` (sum of singular values).
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    m.clone().svd(false, false).singular_values.iter().sum()
}

/// Operator norm `‖M‖` (largest singular value).
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0_f64, |acc, &s| acc.max(s))
}

/// Largest entry of `|AB − BA|`; zero exactly when the operators commute.
pub fn commutator_max_entry(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    max_abs_entry(&(a * b - b * a))
}

#[derive(Clone, Debug)]
struct Spectrum {
    /// Eigenvalues sorted in descending order.
    values: Vec<f64>,
    /// Matching eigenvectors as columns, phases fixed so the first
    /// significant component of each column is real positive.
    vectors: ComplexMatrix,
}

type MatrixJson = Vec<Vec<[f64; 2]>>;

/// A Hermitian matrix with a lazily computed, cached eigendecomposition.
///
/// The cache makes repeated fractional powers of the same operator cheap and
/// guarantees that they share one numerical eigenbasis, so algebraic
/// identities such as `ρ^{a} ρ^{b} = ρ^{a+b}` hold to machine precision.
#[derive(Debug, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
    spectrum: OnceLock<Spectrum>,
}

impl Clone for HermitianOperator {
    fn clone(&self) -> Self {
        let spectrum = OnceLock::new();
        if let Some(s) = self.spectrum.get() {
            let _ = spectrum.set(s.clone());
        }
        Self {
            matrix: self.matrix.clone(),
            spectrum,
        }
    }
}

impl PartialEq for HermitianOperator {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl TryFrom<MatrixJson> for HermitianOperator {
    type Error = QuantumError;

    fn try_from(rows: MatrixJson) -> Result<Self, Self::Error> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(QuantumError::DomainError(
                "serialized matrix must be square and non-empty".into(),
            ));
        }
        let mut m = ComplexMatrix::zeros(n, n);
        for (r, row) in rows.iter().enumerate() {
            for (c, &[re, im]) in row.iter().enumerate() {
                m[(r, c)] = Complex64::new(re, im);
            }
        }
        Self::new(m)
    }
}

impl From<HermitianOperator> for MatrixJson {
    fn from(op: HermitianOperator) -> Self {
        (0..op.dim())
            .map(|r| {
                (0..op.dim())
                    .map(|c| {
                        let z = op.matrix[(r, c)];
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect()
    }
}

impl HermitianOperator {
    /// Wraps a square matrix, verifying `‖M − M†‖_max ≤ 1e−10` and storing
    /// the exactly Hermitian average `(M + M†)/2`.
    ///
    /// # Errors
    /// [`QuantumError::DomainError`] for non-square input,
    /// [`QuantumError::NotHermitian`] when the deviation is too large.
    pub fn new(matrix: ComplexMatrix) -> Result<Self, QuantumError> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(QuantumError::DomainError(
                "matrix must be square and non-empty".into(),
            ));
        }
        let deviation = max_abs_entry(&(&matrix - matrix.adjoint()));
        if deviation > HERMITIAN_TOLERANCE {
            return Err(QuantumError::NotHermitian { deviation });
        }
        Ok(Self {
            matrix: hermitize(&matrix),
            spectrum: OnceLock::new(),
        })
    }

    fn from_parts(matrix: ComplexMatrix) -> Self {
        Self {
            matrix,
            spectrum: OnceLock::new(),
        }
    }

    /// Real diagonal matrix.
    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = ComplexMatrix::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = cplx(v);
        }
        Self::from_parts(m)
    }

    /// Identity operator.
    pub fn identity(dim: usize) -> Self {
        Self::from_parts(ComplexMatrix::identity(dim, dim))
    }

    /// Maximally mixed state `I/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self::from_parts(ComplexMatrix::identity(dim, dim) * cplx(1.0 / dim as f64))
    }

    /// Matrix dimension.
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Underlying matrix.
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    fn spectrum(&self) -> &Spectrum {
        self.spectrum.get_or_init(|| {
            let dim = self.matrix.nrows();
            let eig = SymmetricEigen::new(self.matrix.clone());
            let mut order: Vec<usize> = (0..dim).collect();
            order.sort_by(|&i, &j| {
                eig.eigenvalues[j]
                    .partial_cmp(&eig.eigenvalues[i])
                    .expect("eigenvalues of a Hermitian matrix are finite")
            });
            let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
            let mut vectors = ComplexMatrix::zeros(dim, dim);
            for (k, &i) in order.iter().enumerate() {
                let mut col = eig.eigenvectors.column(i).clone_owned();
                if let Some(lead) = (0..dim).find(|&r| col[r].norm() > 1e-12) {
                    let phase = col[lead] / cplx(col[lead].norm());
                    col *= phase.conj();
                }
                vectors.set_column(k, &col);
            }
            Spectrum { values, vectors }
        })
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectrum().values
    }

    /// Largest eigenvalue.
    pub fn max_eigenvalue(&self) -> f64 {
        self.spectrum().values[0]
    }

    /// Smallest eigenvalue.
    pub fn min_eigenvalue(&self) -> f64 {
        *self
            .spectrum()
            .values
            .last()
            .expect("operators are non-empty")
    }

    /// Trace, guaranteed real for Hermitian input.
    pub fn trace(&self) -> f64 {
        real_trace(&self.matrix)
    }

    /// Scalar multiple.
    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_parts(&self.matrix * cplx(factor))
    }

    /// Sum of two operators of equal dimension.
    ///
    /// # Errors
    /// [`QuantumError::DimensionMismatch`] when the dimensions differ.
    pub fn plus(&self, other: &Self) -> Result<Self, QuantumError> {
        ensure_same_dim(self, other)?;
        Ok(Self::from_parts(&self.matrix + &other.matrix))
    }

    /// Difference of two operators of equal dimension.
    ///
    /// # Errors
    /// [`QuantumError::DimensionMismatch`] when the dimensions differ.
    pub fn minus(&self, other: &Self) -> Result<Self, QuantumError> {
        ensure_same_dim(self, other)?;
        Ok(Self::from_parts(&self.matrix - &other.matrix))
    }

    /// Kronecker (tensor) product `self ⊗ other`.
    pub fn tensor(&self, other: &Self) -> Self {
        Self::from_parts(self.matrix.kronecker(&other.matrix))
    }

    /// Two-sided product `self · inner · self`, Hermitian whenever both
    /// factors are.
    ///
    /// # Errors
    /// [`QuantumError::DimensionMismatch`] when the dimensions differ.
    pub fn sandwich(&self, inner: &Self) -> Result<Self, QuantumError> {
        ensure_same_dim(self, inner)?;
        Ok(Self::from_parts(hermitize(
            &(&self.matrix * &inner.matrix * &self.matrix),
        )))
    }

    /// Fractional power through the eigendecomposition.
    ///
    /// Eigenvalues in `[−1e−10, 0)` are clamped to zero.  Non-positive
    /// powers act as pseudo-inverses on the support: eigenvalues at or below
    /// [`SUPPORT_CUTOFF`] relative to the largest contribute zero, so
    /// `pow(0.0)` is the support projector.
    ///
    /// # Errors
    /// [`QuantumError::NotPsd`] when an eigenvalue lies below `−1e−10`.
    pub fn pow(&self, r: f64) -> Result<Self, QuantumError> {
        let sp = self.spectrum();
        let scale = sp.values[0].max(0.0);
        let cutoff = SUPPORT_CUTOFF * scale;
        let mut powered = Vec::with_capacity(sp.values.len());
        for &v in &sp.values {
            if v < -PSD_TOLERANCE {
                return Err(QuantumError::NotPsd { min_eigenvalue: v });
            }
            let v = v.max(0.0);
            let p = if r > 0.0 {
                if v == 0.0 {
                    0.0
                } else {
                    v.powf(r)
                }
            } else if v <= cutoff {
                0.0
            } else {
                v.powf(r)
            };
            powered.push(p);
        }
        let diag = DMatrix::from_diagonal(&DVector::from_iterator(
            powered.len(),
            powered.iter().map(|&v| cplx(v)),
        ));
        let m = &sp.vectors * diag * sp.vectors.adjoint();
        Ok(Self::from_parts(hermitize(&m)))
    }

    /// Spectral projector `{self ≥ 0}` onto the eigenspaces with
    /// eigenvalue at or above `−`[`SUPPORT_CUTOFF`], so that tiny negative
    /// eigenvalues caused by rounding still count as part of the
    /// nonnegative part.  Unlike [`Self::pow`] this accepts indefinite
    /// operators.
    pub fn nonneg_projector(&self) -> Self {
        let sp = self.spectrum();
        let dim = self.matrix.nrows();
        let diag = DMatrix::from_diagonal(&DVector::from_iterator(
            dim,
            sp.values
                .iter()
                .map(|&v| cplx(if v >= -SUPPORT_CUTOFF { 1.0 } else { 0.0 })),
        ));
        let m = &sp.vectors * diag * sp.vectors.adjoint();
        Self::from_parts(hermitize(&m))
    }

    /// Mass of `self` lying outside the support of `reference`, i.e.
    /// `Tr self − Tr[Π_ref · self]` with `Π_ref` the support projector.
    pub fn support_leak(&self, reference: &Self) -> f64 {
        let rsp = reference.spectrum();
        let cutoff = SUPPORT_CUTOFF * rsp.values[0].max(0.0);
        let rotated = rsp.vectors.adjoint() * &self.matrix * &rsp.vectors;
        let mut leak = self.trace();
        for (j, &v) in rsp.values.iter().enumerate() {
            if v > cutoff {
                leak -= rotated[(j, j)].re;
            }
        }
        leak
    }

    fn ensure_density(&self) -> Result<(), QuantumError> {
        let min = self.min_eigenvalue();
        if min < -PSD_TOLERANCE {
            return Err(QuantumError::NotPsd {
                min_eigenvalue: min,
            });
        }
        let trace = self.trace();
        if (trace - 1.0).abs() > TRACE_TOLERANCE {
            return Err(QuantumError::NotNormalized { trace });
        }
        Ok(())
    }
}

fn ensure_same_dim(a: &HermitianOperator, b: &HermitianOperator) -> Result<(), QuantumError> {
    if a.dim() != b.dim() {
        return Err(QuantumError::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(())
}

fn ensure_reference_normalized(sigma: &HermitianOperator) -> Result<(), QuantumError> {
    let trace = sigma.trace();
    if (trace - 1.0).abs() > TRACE_TOLERANCE {
        return Err(QuantumError::NotNormalized { trace });
    }
    Ok(())
}

/// Fails with [`QuantumError::SupportViolation`] when `rho` has mass outside
/// the support of `sigma` (relative tolerance `1e−10`).
fn check_support(rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<(), QuantumError> {
    let leak = rho.support_leak(sigma);
    if leak > HERMITIAN_TOLERANCE * rho.trace().abs().max(1.0) {
        return Err(QuantumError::SupportViolation);
    }
    Ok(())
}

/// Von Neumann entropy `−Tr ρ ln ρ = −Σ_{λ>0} λ ln λ` in nats.
pub fn von_neumann_entropy(rho: &HermitianOperator) -> f64 {
    rho.eigenvalues()
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| -v * v.ln())
        .sum()
}

/// Quantum relative entropy `D(ρ‖σ) = Tr ρ (ln ρ − ln σ)` in nats.
///
/// # Errors
/// [`QuantumError::SupportViolation`] when the support of `ρ` is not
/// contained in the support of `σ`; [`QuantumError::NotPsd`] when either
/// operator fails positivity; [`QuantumError::DimensionMismatch`] on shape
/// mismatch.
pub fn relative_entropy_q(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
) -> Result<f64, QuantumError> {
    ensure_same_dim(rho, sigma)?;
    for op in [rho, sigma] {
        let min = op.min_eigenvalue();
        if min < -PSD_TOLERANCE {
            return Err(QuantumError::NotPsd {
                min_eigenvalue: min,
            });
        }
    }
    check_support(rho, sigma)?;
    let own: f64 = rho
        .eigenvalues()
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v * v.ln())
        .sum();
    Ok(own - trace_log_against(rho, sigma))
}

/// `Tr[ρ ln σ]` restricted to the support of `σ`.
fn trace_log_against(rho: &HermitianOperator, sigma: &HermitianOperator) -> f64 {
    let ssp = sigma.spectrum();
    let cutoff = SUPPORT_CUTOFF * ssp.values[0].max(0.0);
    let rotated = ssp.vectors.adjoint() * rho.matrix() * &ssp.vectors;
    ssp.values
        .iter()
        .enumerate()
        .filter(|&(_, &v)| v > cutoff)
        .map(|(j, &v)| v.ln() * rotated[(j, j)].re)
        .sum()
}

/// `ψ(s|ρ‖σ) = ln Tr ρ^{1+s} σ^{−s}` in nats; `ψ(0) = ln Tr ρ`.
///
/// # Errors
/// [`QuantumError::SupportViolation`] when `s > 0` and `σ` is singular on
/// the support of `ρ`; [`QuantumError::NotPsd`] /
/// [`QuantumError::DimensionMismatch`] on malformed operands.
pub fn psi_q(
    s: f64,
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
) -> Result<f64, QuantumError> {
    ensure_same_dim(rho, sigma)?;
    if s == 0.0 {
        return Ok(rho.trace().ln());
    }
    if s > 0.0 {
        check_support(rho, sigma)?;
    }
    let rp = rho.pow(1.0 + s)?;
    let sp = sigma.pow(-s)?;
    let value = real_trace(&(rp.matrix() * sp.matrix()));
    Ok(value.max(0.0).ln())
}

/// `ψ̲(s|ρ‖σ) = ln Tr ρ^{(1+s)/2} σ^{−s/2} ρ^{(1+s)/2} σ^{−s/2}` in nats;
/// `ψ̲(0) = ln Tr ρ`.  For `s ∈ (0, 1]` the value never exceeds
/// [`psi_q`] (asserted in debug builds).
///
/// # Errors
/// Same as [`psi_q`].
pub fn psi_bar_q(
    s: f64,
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
) -> Result<f64, QuantumError> {
    ensure_same_dim(rho, sigma)?;
    if s == 0.0 {
        return Ok(rho.trace().ln());
    }
    if s > 0.0 {
        check_support(rho, sigma)?;
    }
    let x = rho.pow((1.0 + s) / 2.0)?;
    let y = sigma.pow(-s / 2.0)?;
    let z = x.matrix() * y.matrix();
    let value = real_trace(&(&z * &z)).max(0.0);
    let result = value.ln();
    #[cfg(debug_assertions)]
    {
        if s > 0.0 && s <= 1.0 {
            let plain = psi_q(s, rho, sigma)?;
            debug_assert!(
                result <= plain + 1e-9,
                "symmetrized cumulant exceeded the plain one: {result} > {plain}"
            );
        }
    }
    Ok(result)
}

/// A classical–quantum sub-state `ρ = Σ_a P(a) |a⟩⟨a| ⊗ ρ_a` with labeled
/// classical alphabet, weights `P(a) ≥ 0` of total mass at most one, and
/// normalized conditional states `ρ_a`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CqStateJson", into = "CqStateJson")]
pub struct CqState {
    alphabet_a: Vec<String>,
    weights: Vec<f64>,
    conditionals: Vec<HermitianOperator>,
}

#[derive(Serialize, Deserialize)]
struct CqStateJson {
    alphabet_a: Vec<String>,
    weights: Vec<f64>,
    conditionals: Vec<MatrixJson>,
}

impl TryFrom<CqStateJson> for CqState {
    type Error = QuantumError;

    fn try_from(json: CqStateJson) -> Result<Self, Self::Error> {
        let conditionals = json
            .conditionals
            .into_iter()
            .map(HermitianOperator::try_from)
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(json.alphabet_a, json.weights, conditionals)
    }
}

impl From<CqState> for CqStateJson {
    fn from(state: CqState) -> Self {
        Self {
            alphabet_a: state.alphabet_a,
            weights: state.weights,
            conditionals: state.conditionals.into_iter().map(MatrixJson::from).collect(),
        }
    }
}

impl CqState {
    /// Builds and validates a c-q sub-state.
    ///
    /// # Errors
    /// [`QuantumError::InvalidState`] for structural problems (label/shape
    /// mismatches, negative or super-normalized weights),
    /// [`QuantumError::NotPsd`] / [`QuantumError::NotNormalized`] when a
    /// conditional state fails its invariants, and
    /// [`QuantumError::DimensionCap`] when `|A|·d_E` exceeds
    /// [`DIMENSION_CAP`].
    pub fn new(
        alphabet_a: Vec<String>,
        weights: Vec<f64>,
        conditionals: Vec<HermitianOperator>,
    ) -> Result<Self, QuantumError> {
        if alphabet_a.is_empty() {
            return Err(QuantumError::InvalidState("alphabet must be non-empty".into()));
        }
        if alphabet_a.len() != weights.len() || alphabet_a.len() != conditionals.len() {
            return Err(QuantumError::InvalidState(format!(
                "alphabet ({}), weights ({}) and conditionals ({}) must have equal length",
                alphabet_a.len(),
                weights.len(),
                conditionals.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for label in &alphabet_a {
            if label.is_empty() || !seen.insert(label.clone()) {
                return Err(QuantumError::InvalidState(format!(
                    "labels must be unique and non-empty, offending label {label:?}"
                )));
            }
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(QuantumError::InvalidState(
                "weights must be finite and non-negative".into(),
            ));
        }
        let mass: f64 = weights.iter().sum();
        if mass > 1.0 + MASS_TOLERANCE {
            return Err(QuantumError::InvalidState(format!(
                "total mass {mass} exceeds one"
            )));
        }
        let d_e = conditionals[0].dim();
        if conditionals.iter().any(|c| c.dim() != d_e) {
            return Err(QuantumError::InvalidState(
                "all conditional states must share one dimension".into(),
            ));
        }
        let joint_dim = alphabet_a.len() * d_e;
        if joint_dim > DIMENSION_CAP {
            return Err(QuantumError::DimensionCap {
                dim: joint_dim,
                cap: DIMENSION_CAP,
            });
        }
        for c in &conditionals {
            c.ensure_density()?;
        }
        Ok(Self {
            alphabet_a,
            weights,
            conditionals,
        })
    }

    /// Diagonal embedding of a classical joint table: weights are the `A`
    /// marginal and each conditional is the normalized diagonal row (the
    /// maximally mixed state for zero-mass rows).
    ///
    /// # Errors
    /// Propagates [`CqState::new`] validation failures.
    pub fn from_classical(joint: &JointSubDistribution) -> Result<Self, QuantumError> {
        let d_e = joint.e_len();
        let mut weights = Vec::with_capacity(joint.a_len());
        let mut conditionals = Vec::with_capacity(joint.a_len());
        for a in 0..joint.a_len() {
            let w: f64 = (0..d_e).map(|e| joint.get(a, e)).sum();
            weights.push(w);
            if w > 0.0 {
                let row: Vec<f64> = (0..d_e).map(|e| joint.get(a, e) / w).collect();
                conditionals.push(HermitianOperator::diagonal(&row));
            } else {
                conditionals.push(HermitianOperator::maximally_mixed(d_e));
            }
        }
        Self::new(joint.a_labels().to_vec(), weights, conditionals)
    }

    /// Classical labels.
    pub fn alphabet(&self) -> &[String] {
        &self.alphabet_a
    }

    /// Classical weights `P(a)`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Conditional states.
    pub fn conditionals(&self) -> &[HermitianOperator] {
        &self.conditionals
    }

    /// Conditional state for the `a`-th label.
    pub fn conditional(&self, a: usize) -> &HermitianOperator {
        &self.conditionals[a]
    }

    /// Classical alphabet size `|A|`.
    pub fn d_a(&self) -> usize {
        self.alphabet_a.len()
    }

    /// Quantum side-information dimension `d_E`.
    pub fn d_e(&self) -> usize {
        self.conditionals[0].dim()
    }

    /// Total mass `Σ_a P(a)`.
    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// True when the mass is 1 within [`MASS_TOLERANCE`].
    pub fn is_normalized(&self) -> bool {
        (self.mass() - 1.0).abs() <= MASS_TOLERANCE
    }

    /// Reduced state `ρ^E = Σ_a P(a) ρ_a`.
    pub fn rho_e(&self) -> HermitianOperator {
        let d_e = self.d_e();
        let mut m = ComplexMatrix::zeros(d_e, d_e);
        for (w, c) in self.weights.iter().zip(&self.conditionals) {
            if *w > 0.0 {
                m += c.matrix() * cplx(*w);
            }
        }
        HermitianOperator::from_parts(m)
    }

    /// Block-diagonal joint operator `Σ_a P(a) |a⟩⟨a| ⊗ ρ_a` of dimension
    /// `|A|·d_E`.
    pub fn joint_operator(&self) -> HermitianOperator {
        let d_e = self.d_e();
        let dim = self.d_a() * d_e;
        let mut m = ComplexMatrix::zeros(dim, dim);
        for (a, (w, c)) in self.weights.iter().zip(&self.conditionals).enumerate() {
            if *w > 0.0 {
                m.view_mut((a * d_e, a * d_e), (d_e, d_e))
                    .copy_from(&(c.matrix() * cplx(*w)));
            }
        }
        HermitianOperator::from_parts(m)
    }
}

/// Joint von Neumann entropy `H(A,E|ρ)` of a c-q state, in nats.
pub fn joint_entropy_q(rho: &CqState) -> f64 {
    let mut total = 0.0;
    for (w, c) in rho.weights().iter().zip(rho.conditionals()) {
        if *w > 0.0 {
            for &v in c.eigenvalues() {
                if v > 0.0 {
                    let x = w * v;
                    total -= x * x.ln();
                }
            }
        }
    }
    total
}

/// Conditional von Neumann entropy `H(A|E|ρ) = H(A,E|ρ) − H(E|ρ^E)` in nats.
pub fn conditional_entropy_q(rho: &CqState) -> f64 {
    joint_entropy_q(rho) - von_neumann_entropy(&rho.rho_e())
}

fn check_block_supports(rho: &CqState, sigma: &HermitianOperator) -> Result<(), QuantumError> {
    for (w, c) in rho.weights().iter().zip(rho.conditionals()) {
        if *w > 0.0 {
            check_support(c, sigma)?;
        }
    }
    Ok(())
}

/// Shared core of the two conditional Rényi families, computed blockwise:
/// `H = −(1/s) ln Σ_a P(a)^{1+s} Tr[ρ_a^{1+s} σ^{−s}]` for the plain family
/// and with `Tr[(ρ_a^{(1+s)/2} σ^{−s/2})²]` for the barred one.  At `s = 0`
/// both reduce to `ln|A| − D(ρ‖ρ_mix ⊗ σ)`.
fn cond_renyi_core(
    s: f64,
    rho: &CqState,
    sigma: &HermitianOperator,
    bar: bool,
) -> Result<f64, QuantumError> {
    if sigma.dim() != rho.d_e() {
        return Err(QuantumError::DimensionMismatch {
            left: rho.d_e(),
            right: sigma.dim(),
        });
    }
    if s <= -1.0 {
        return Err(QuantumError::DomainError(format!(
            "Renyi order 1+s must be positive (s = {s})"
        )));
    }
    let min = sigma.min_eigenvalue();
    if min < -PSD_TOLERANCE {
        return Err(QuantumError::NotPsd {
            min_eigenvalue: min,
        });
    }
    if s >= 0.0 {
        check_block_supports(rho, sigma)?;
    }
    let na = rho.d_a() as f64;
    if s == 0.0 {
        // ln|A| − D(ρ ‖ ρ_mix ⊗ σ), assembled block by block.
        let mut divergence = rho.mass() * na.ln();
        for (w, c) in rho.weights().iter().zip(rho.conditionals()) {
            if *w > 0.0 {
                let own: f64 = c
                    .eigenvalues()
                    .iter()
                    .filter(|&&v| v > 0.0)
                    .map(|&v| v * v.ln())
                    .sum();
                divergence += w * (w.ln() + own - trace_log_against(c, sigma));
            }
        }
        return Ok(na.ln() - divergence);
    }
    let mut terms = Vec::with_capacity(rho.d_a());
    if bar {
        let half = sigma.pow(-s / 2.0)?;
        for (w, c) in rho.weights().iter().zip(rho.conditionals()) {
            if *w > 0.0 {
                let x = c.pow((1.0 + s) / 2.0)?;
                let z = x.matrix() * half.matrix();
                let tr = real_trace(&(&z * &z));
                if tr > 0.0 {
                    terms.push((1.0 + s) * w.ln() + tr.ln());
                }
            }
        }
    } else {
        let inv = sigma.pow(-s)?;
        for (w, c) in rho.weights().iter().zip(rho.conditionals()) {
            if *w > 0.0 {
                let tr = real_trace(&(c.pow(1.0 + s)?.matrix() * inv.matrix()));
                if tr > 0.0 {
                    terms.push((1.0 + s) * w.ln() + tr.ln());
                }
            }
        }
    }
    Ok(-log_sum_exp(&terms) / s)
}

/// Conditional Rényi entropy
/// `H_{1+s}(A|E|ρ‖σ) = ln|A| − ψ(s|ρ‖ρ_mix ⊗ σ)/s` in nats, with the
/// `s = 0` limit `ln|A| − D(ρ‖ρ_mix ⊗ σ)`.
///
/// # Errors
/// [`QuantumError::NotNormalized`] when `σ` is not a unit-trace state,
/// [`QuantumError::SupportViolation`] when `s ≥ 0` and `σ` is singular on
/// a conditional's support, [`QuantumError::DomainError`] for `s ≤ −1`.
pub fn cond_renyi_q(
    s: f64,
    rho: &CqState,
    sigma: &HermitianOperator,
) -> Result<f64, QuantumError> {
    ensure_reference_normalized(sigma)?;
    cond_renyi_core(s, rho, sigma, false)
}

/// Barred conditional Rényi entropy
/// `H̲_{1+s}(A|E|ρ‖σ) = ln|A| − ψ̲(s|ρ‖ρ_mix ⊗ σ)/s` in nats.
///
/// # Errors
/// Same as [`cond_renyi_q`].
pub fn cond_renyi_bar_q(
    s: f64,
    rho: &CqState,
    sigma: &HermitianOperator,
) -> Result<f64, QuantumError> {
    ensure_reference_normalized(sigma)?;
    cond_renyi_core(s, rho, sigma, true)
}

/// [`cond_renyi_q`] against the state's own reduced state `ρ^E`.
///
/// # Errors
/// Same as [`cond_renyi_q`] except that no normalization is demanded of the
/// marginal (definitional form for sub-states).
pub fn cond_renyi_self_q(s: f64, rho: &CqState) -> Result<f64, QuantumError> {
    cond_renyi_core(s, rho, &rho.rho_e(), false)
}

/// [`cond_renyi_bar_q`] against the state's own reduced state `ρ^E`.
///
/// # Errors
/// Same as [`cond_renyi_self_q`].
pub fn cond_renyi_bar_self_q(s: f64, rho: &CqState) -> Result<f64, QuantumError> {
    cond_renyi_core(s, rho, &rho.rho_e(), true)
}

/// Min-entropy
/// `H_min(A|E|ρ‖σ) = −ln ‖(I ⊗ σ^{−1/2}) ρ (I ⊗ σ^{−1/2})‖`, evaluated
/// blockwise as `−ln max_a P(a) ‖σ^{−1/2} ρ_a σ^{−1/2}‖`.  Debug builds
/// assert the ordering `H̲₂(A|E|ρ‖σ) ≥ H_min(A|E|ρ‖σ)`.
///
/// # Errors
/// As [`cond_renyi_q`], plus [`QuantumError::DomainError`] when the state
/// carries no mass.
pub fn hmin_q(rho: &CqState, sigma: &HermitianOperator) -> Result<f64, QuantumError> {
    ensure_reference_normalized(sigma)?;
    if sigma.dim() != rho.d_e() {
        return Err(QuantumError::DimensionMismatch {
            left: rho.d_e(),
            right: sigma.dim(),
        });
    }
    check_block_supports(rho, sigma)?;
    let half = sigma.pow(-0.5)?;
    let mut largest = 0.0_f64;
    for (w, c) in rho.weights().iter().zip(rho.conditionals()) {
        if *w > 0.0 {
            let block = half.sandwich(c)?;
            largest = largest.max(w * block.max_eigenvalue());
        }
    }
    if largest <= 0.0 {
        return Err(QuantumError::DomainError(
            "min-entropy of a massless state is undefined".into(),
        ));
    }
    let hmin = -largest.ln();
    #[cfg(debug_assertions)]
    {
        let h2 = cond_renyi_core(1.0, rho, sigma, true)?;
        debug_assert!(
            h2 >= hmin - 1e-9,
            "collision entropy fell below min-entropy: {h2} < {hmin}"
        );
    }
    Ok(hmin)
}

/// `φ(s|A|E|ρ) = ln Tr (Σ_a P(a)^{1/(1−s)} ρ_a^{1/(1−s)})^{1−s}` in nats on
/// `s ∈ [0, 1)`; `φ(0)` is the log-mass.
///
/// # Errors
/// [`QuantumError::DomainError`] outside `[0, 1)`.
pub fn phi_q(s: f64, rho: &CqState) -> Result<f64, QuantumError> {
    if !(0.0..1.0).contains(&s) {
        return Err(QuantumError::DomainError(format!(
            "phi is defined on [0, 1), got {s}"
        )));
    }
    if s == 0.0 {
        return Ok(rho.mass().ln());
    }
    let exponent = 1.0 / (1.0 - s);
    let d_e = rho.d_e();
    let mut m = ComplexMatrix::zeros(d_e, d_e);
    for (w, c) in rho.weights().iter().zip(rho.conditionals()) {
        if *w > 0.0 {
            m += c.pow(exponent)?.matrix() * cplx(w.powf(exponent));
        }
    }
    let inner = HermitianOperator::from_parts(m);
    let total: f64 = inner
        .eigenvalues()
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v.powf(1.0 - s))
        .sum();
    if total <= 0.0 {
        // The entries of `(w_a ρ_a)^{1/(1−s)}` underflow once the exponent
        // outgrows what f64 can hold; a silent `ln 0 = −∞` here would turn
        // into a spuriously zero upper bound downstream, so fail loudly.
        return Err(QuantumError::DomainError(format!(
            "phi underflows at s = {s}: all matrix-power eigenvalues vanished"
        )));
    }
    Ok(total.ln())
}

/// The reference state attaining `max_σ s·H_{1+s}(A|E|ρ‖σ)`, namely
/// `σ* = (Σ_a (P(a) ρ_a)^{1+s})^{1/(1+s)}` normalized to unit trace.
///
/// # Errors
/// [`QuantumError::DomainError`] for `s ≤ 0` or a massless state.
pub fn optimal_sigma_q(s: f64, rho: &CqState) -> Result<HermitianOperator, QuantumError> {
    if s <= 0.0 {
        return Err(QuantumError::DomainError(format!(
            "the maximizer is defined for s > 0, got {s}"
        )));
    }
    let d_e = rho.d_e();
    let mut m = ComplexMatrix::zeros(d_e, d_e);
    for (w, c) in rho.weights().iter().zip(rho.conditionals()) {
        if *w > 0.0 {
            m += c.pow(1.0 + s)?.matrix() * cplx(w.powf(1.0 + s));
        }
    }
    let root = HermitianOperator::from_parts(m).pow(1.0 / (1.0 + s))?;
    let trace = root.trace();
    if trace <= 0.0 {
        return Err(QuantumError::DomainError(
            "the maximizer of a massless state is undefined".into(),
        ));
    }
    Ok(root.scaled(1.0 / trace))
}

/// Eigenvalue-cluster statistics of a PSD operator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumStats {
    /// Number of eigenvalue clusters under the relative gap
    /// [`CLUSTER_TOLERANCE`].
    pub v: usize,
    /// Log-spread `ln(a₁/a₀)` over the strictly positive eigenvalues.
    pub lambda: f64,
    /// The clustering tolerance the count was computed with; exact distinct
    /// eigenvalues are not observable in floating point.
    pub tolerance: f64,
}

fn cluster_ranges(values: &[f64]) -> Vec<Range<usize>> {
    let scale = values
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let mut ranges = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i - 1] - values[i] > CLUSTER_TOLERANCE * scale {
            ranges.push(start..i);
            start = i;
        }
    }
    ranges
}

/// Counts eigenvalue clusters and the positive log-spread of `σ`.
///
/// # Errors
/// [`QuantumError::NotPsd`] for indefinite input,
/// [`QuantumError::ZeroOperator`] when all eigenvalues vanish.
pub fn spectrum_stats(sigma: &HermitianOperator) -> Result<SpectrumStats, QuantumError> {
    let min = sigma.min_eigenvalue();
    if min < -PSD_TOLERANCE {
        return Err(QuantumError::NotPsd {
            min_eigenvalue: min,
        });
    }
    let values = sigma.eigenvalues();
    let a1 = values[0];
    if a1 <= 0.0 {
        return Err(QuantumError::ZeroOperator);
    }
    let v = cluster_ranges(values).len();
    let cutoff = SUPPORT_CUTOFF * a1;
    let a0 = values
        .iter()
        .rev()
        .find(|&&x| x > cutoff)
        .copied()
        .unwrap_or(a1);
    Ok(SpectrumStats {
        v,
        lambda: (a1 / a0).ln(),
        tolerance: CLUSTER_TOLERANCE,
    })
}

/// Pinching map `Λ_σ(ρ) = Σ_i E_i ρ E_i` over the eigenprojections of `σ`
/// (eigenvalues clustered with [`CLUSTER_TOLERANCE`]).  The output commutes
/// with `σ` and has the same trace as `ρ` (both asserted in debug builds).
///
/// # Panics
/// Panics when the dimensions differ.
pub fn pinching(sigma: &HermitianOperator, rho: &HermitianOperator) -> HermitianOperator {
    assert_eq!(
        sigma.dim(),
        rho.dim(),
        "pinching requires operators of equal dimension"
    );
    let ssp = sigma.spectrum();
    let dim = sigma.dim();
    let rotated = ssp.vectors.adjoint() * rho.matrix() * &ssp.vectors;
    let mut blocked = ComplexMatrix::zeros(dim, dim);
    for range in cluster_ranges(&ssp.values) {
        for i in range.clone() {
            for j in range.clone() {
                blocked[(i, j)] = rotated[(i, j)];
            }
        }
    }
    let out = HermitianOperator::from_parts(hermitize(
        &(&ssp.vectors * blocked * ssp.vectors.adjoint()),
    ));
    debug_assert!(
        (out.trace() - rho.trace()).abs() <= 1e-12 * rho.trace().abs().max(1.0),
        "pinching must preserve the trace"
    );
    debug_assert!(
        commutator_max_entry(out.matrix(), sigma.matrix())
            <= 1e-9 * max_abs_entry(sigma.matrix()).max(1.0),
        "pinched state must commute with the pinching operator"
    );
    out
}

/// Trace-norm and divergence secrecy criteria of a c-q state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecrecyCriteriaQ {
    /// `‖ρ − ρ_mix^A ⊗ ρ^E‖₁` (universal composability).
    pub d1_prime: f64,
    /// `D(ρ ‖ ρ_mix^A ⊗ ρ^E)` in nats.
    pub i_prime: f64,
    /// `‖ρ − ρ^A ⊗ ρ^E‖₁`.
    pub d1: f64,
    /// Mutual information `D(ρ ‖ ρ^A ⊗ ρ^E)` in nats.
    pub i: f64,
}

/// `d₁′(A|E|ρ) = ‖ρ − ρ_mix^A ⊗ ρ^E‖₁`, valid for sub-states as well.
pub fn d1_prime_q(rho: &CqState) -> f64 {
    let rho_e = rho.rho_e();
    let na = rho.d_a() as f64;
    rho.weights()
        .iter()
        .zip(rho.conditionals())
        .map(|(w, c)| trace_norm(&(c.matrix() * cplx(*w) - rho_e.matrix() * cplx(1.0 / na))))
        .sum()
}

/// `d₁(A:E|ρ) = ‖ρ − ρ^A ⊗ ρ^E‖₁`, valid for sub-states as well.
pub fn d1_q(rho: &CqState) -> f64 {
    let rho_e = rho.rho_e();
    rho.weights()
        .iter()
        .zip(rho.conditionals())
        .filter(|(w, _)| **w > 0.0)
        .map(|(w, c)| w * trace_norm(&(c.matrix() - rho_e.matrix())))
        .sum()
}

/// Computes all four secrecy criteria of a normalized c-q state.  Debug
/// builds assert the quantum Pinsker bounds `d₁′² ≤ 2I′`, `d₁² ≤ 2I` and
/// the Fannes-type bounds `I′ ≤ η(d₁′, ln(|A| d_E))`, `I ≤ η(d₁, ln d_E)`.
///
/// # Errors
/// [`QuantumError::NotNormalized`] unless the mass is 1 within
/// [`MASS_TOLERANCE`].
pub fn secrecy_criteria_q(rho: &CqState) -> Result<SecrecyCriteriaQ, QuantumError> {
    let mass = rho.mass();
    if (mass - 1.0).abs() > MASS_TOLERANCE {
        return Err(QuantumError::NotNormalized { trace: mass });
    }
    let s_ae = joint_entropy_q(rho);
    let s_e = von_neumann_entropy(&rho.rho_e());
    let s_a: f64 = rho
        .weights()
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| -w * w.ln())
        .sum();
    let na = (rho.d_a() as f64).ln();
    let de = (rho.d_e() as f64).ln();
    let out = SecrecyCriteriaQ {
        d1_prime: d1_prime_q(rho),
        i_prime: na - (s_ae - s_e),
        d1: d1_q(rho),
        i: s_a + s_e - s_ae,
    };
    debug_assert!(
        out.d1_prime.powi(2) <= 2.0 * out.i_prime + 1e-9,
        "Pinsker bound violated: {} > {}",
        out.d1_prime.powi(2),
        2.0 * out.i_prime
    );
    debug_assert!(
        out.d1.powi(2) <= 2.0 * out.i + 1e-9,
        "Pinsker bound violated: {} > {}",
        out.d1.powi(2),
        2.0 * out.i
    );
    debug_assert!(
        out.i_prime <= eta(out.d1_prime, na + de) + 1e-9,
        "Fannes bound violated: {} > {}",
        out.i_prime,
        eta(out.d1_prime, na + de)
    );
    debug_assert!(
        out.i <= eta(out.d1, de) + 1e-9,
        "Fannes bound violated: {} > {}",
        out.i,
        eta(out.d1, de)
    );
    Ok(out)
}

/// Renner's conditional L₂ distance from uniform,
/// `d₂(A:E|ρ‖σ) = Tr ((I ⊗ σ^{−1/4})(ρ − ρ_mix^A ⊗ ρ^E)(I ⊗ σ^{−1/4}))²`.
///
/// The quadratic form and the entropic expansion
/// `e^{−H̲₂(A|E|ρ‖σ)} − e^{ψ̲(1|ρ^E‖σ)}/|A|` are both evaluated and must
/// agree within `1e−9` (hard assertion).
///
/// # Errors
/// [`QuantumError::NotNormalized`] for a non-unit-trace `σ`,
/// [`QuantumError::SupportViolation`] when `σ` is singular on the support
/// of `ρ^E`.
pub fn d2_q(rho: &CqState, sigma: &HermitianOperator) -> Result<f64, QuantumError> {
    ensure_reference_normalized(sigma)?;
    if sigma.dim() != rho.d_e() {
        return Err(QuantumError::DimensionMismatch {
            left: rho.d_e(),
            right: sigma.dim(),
        });
    }
    let rho_e = rho.rho_e();
    check_support(&rho_e, sigma)?;
    let quarter = sigma.pow(-0.25)?;
    let na = rho.d_a() as f64;
    let mut direct = 0.0;
    for (w, c) in rho.weights().iter().zip(rho.conditionals()) {
        let block = c.matrix() * cplx(*w) - rho_e.matrix() * cplx(1.0 / na);
        let z = quarter.matrix() * block * quarter.matrix();
        direct += real_trace(&(&z * &z));
    }
    let h2 = cond_renyi_core(1.0, rho, sigma, true)?;
    let cross = psi_bar_q(1.0, &rho_e, sigma)?;
    let expansion = (-h2).exp() - cross.exp() / na;
    assert!(
        (direct - expansion).abs() <= 1e-9 * direct.abs().max(1.0),
        "conditional L2 routes disagree: quadratic {direct} vs expansion {expansion}"
    );
    Ok(direct.max(0.0))
}

fn require_vector_alphabet_q(
    labels: &[String],
    spec: &FieldSpec,
    n: usize,
) -> Result<(), QuantumError> {
    let expected = (spec.q() as u128).pow(n as u32);
    if labels.len() as u128 != expected {
        return Err(QuantumError::NonGroupAlphabet(format!(
            "|A| = {} but F_{}^{} has {} elements",
            labels.len(),
            spec.q(),
            n,
            expected
        )));
    }
    if vector_alphabet(spec, n) != labels {
        return Err(QuantumError::NonGroupAlphabet(
            "A labels are not the canonical vector enumeration".into(),
        ));
    }
    Ok(())
}

/// Convolution with a random shift on `A = F_q^n`:
/// `ρ * P^W = Σ_w P^W(w) Σ_a P(a) |a+w⟩⟨a+w| ⊗ ρ_a`.
///
/// Cells of zero output mass receive the maximally mixed conditional.
///
/// # Errors
/// [`QuantumError::NonGroupAlphabet`] when the alphabet is not the
/// canonical vector enumeration or `W` lives on a different alphabet.
pub fn convolve_q(
    rho: &CqState,
    w: &Distribution,
    spec: &FieldSpec,
) -> Result<CqState, QuantumError> {
    let q = spec.q() as u128;
    let mut n = 0usize;
    let mut count = 1u128;
    while count < rho.d_a() as u128 {
        count *= q;
        n += 1;
    }
    require_vector_alphabet_q(rho.alphabet(), spec, n)?;
    if w.labels() != rho.alphabet() {
        return Err(QuantumError::NonGroupAlphabet(
            "shift distribution must live on the same vector alphabet".into(),
        ));
    }
    let vectors: Vec<FieldVector> = (0..rho.d_a())
        .map(|i| FieldVector::from_index(spec.clone(), n, i as u128))
        .collect();
    let d_e = rho.d_e();
    let mut weights = vec![0.0; rho.d_a()];
    let mut numerators = vec![ComplexMatrix::zeros(d_e, d_e); rho.d_a()];
    for (a, (wa, c)) in rho.weights().iter().zip(rho.conditionals()).enumerate() {
        if *wa == 0.0 {
            continue;
        }
        for (wi, &ww) in w.weights().iter().enumerate() {
            if ww == 0.0 {
                continue;
            }
            let target = vectors[a].add(&vectors[wi]).to_index() as usize;
            weights[target] += ww * wa;
            numerators[target] += c.matrix() * cplx(ww * wa);
        }
    }
    let conditionals = numerators
        .into_iter()
        .zip(&weights)
        .map(|(num, &wt)| {
            if wt > 0.0 {
                HermitianOperator::from_parts(num * cplx(1.0 / wt))
            } else {
                HermitianOperator::maximally_mixed(d_e)
            }
        })
        .collect();
    CqState::new(rho.alphabet().to_vec(), weights, conditionals)
}

/// Pushforward `Σ_{a ∈ f⁻¹(b)} P(a) · ρ_a` under an index map
/// (`map[a] = b`); the quantum side is untouched.
///
/// Mass is preserved exactly; in debug builds, for normalized inputs, the
/// data-processing direction `H(f(A)|E) ≤ H(A|E)` is asserted.
///
/// # Panics
/// Panics when `map` is not a total function into `alphabet_b`.
pub fn apply_hash_q_indices(rho: &CqState, map: &[usize], alphabet_b: Vec<String>) -> CqState {
    assert_eq!(map.len(), rho.d_a(), "map must cover the A alphabet");
    let nb = alphabet_b.len();
    assert!(
        map.iter().all(|&b| b < nb),
        "map image must lie in the output alphabet"
    );
    let d_e = rho.d_e();
    let mut weights = vec![0.0; nb];
    let mut numerators = vec![ComplexMatrix::zeros(d_e, d_e); nb];
    for (a, (wa, c)) in rho.weights().iter().zip(rho.conditionals()).enumerate() {
        if *wa > 0.0 {
            weights[map[a]] += wa;
            numerators[map[a]] += c.matrix() * cplx(*wa);
        }
    }
    let conditionals = numerators
        .into_iter()
        .zip(&weights)
        .map(|(num, &wt)| {
            if wt > 0.0 {
                HermitianOperator::from_parts(num * cplx(1.0 / wt))
            } else {
                HermitianOperator::maximally_mixed(d_e)
            }
        })
        .collect();
    let out = CqState::new(alphabet_b, weights, conditionals)
        .expect("hashing preserves c-q state invariants");
    #[cfg(debug_assertions)]
    {
        if rho.is_normalized() {
            let before = conditional_entropy_q(rho);
            let after = conditional_entropy_q(&out);
            debug_assert!(
                after <= before + 1e-9,
                "hashing increased conditional entropy: {after} > {before}"
            );
        }
    }
    out
}

/// Pushforward under a linear hash given as a matrix; the classical
/// alphabet must be the canonical vector alphabet of `F_q^n`.
///
/// # Errors
/// [`QuantumError::NonGroupAlphabet`] when the alphabet does not match the
/// canonical enumeration of `F_q^n`.
pub fn apply_hash_q(rho: &CqState, f: &FieldMatrix) -> Result<CqState, QuantumError> {
    let spec = f.spec();
    let n = f.cols();
    require_vector_alphabet_q(rho.alphabet(), spec, n)?;
    let map: Vec<usize> = (0..rho.d_a())
        .map(|i| {
            let x = FieldVector::from_index(spec.clone(), n, i as u128);
            f.mul_vec(&x).to_index() as usize
        })
        .collect();
    Ok(apply_hash_q_indices(rho, &map, vector_alphabet(spec, f.rows())))
}

/// Applies a quantum channel, given by Kraus operators, to every
/// conditional state (`ρ_a ↦ Σ_k K_k ρ_a K_k†`).  Rectangular Kraus
/// operators change the side-information dimension, which covers both
/// mixtures of unitaries and partial traces.
///
/// # Errors
/// [`QuantumError::InvalidChannel`] when the family is empty, shapes are
/// inconsistent, or `Σ_k K_k† K_k ≠ I`; [`QuantumError::DimensionMismatch`]
/// when the input dimension differs from `d_E`.
pub fn apply_channel_e_q(
    rho: &CqState,
    kraus: &[ComplexMatrix],
) -> Result<CqState, QuantumError> {
    let first = kraus
        .first()
        .ok_or_else(|| QuantumError::InvalidChannel("at least one Kraus operator required".into()))?;
    let (dout, din) = (first.nrows(), first.ncols());
    if kraus.iter().any(|k| k.nrows() != dout || k.ncols() != din) {
        return Err(QuantumError::InvalidChannel(
            "all Kraus operators must share one shape".into(),
        ));
    }
    if din != rho.d_e() {
        return Err(QuantumError::DimensionMismatch {
            left: rho.d_e(),
            right: din,
        });
    }
    let mut completeness = ComplexMatrix::zeros(din, din);
    for k in kraus {
        completeness += k.adjoint() * k;
    }
    let deviation = max_abs_entry(&(completeness - ComplexMatrix::identity(din, din)));
    if deviation > 1e-9 {
        return Err(QuantumError::InvalidChannel(format!(
            "Kraus family is not trace preserving (deviation {deviation:.3e})"
        )));
    }
    let conditionals = rho
        .conditionals()
        .iter()
        .map(|c| {
            let mut m = ComplexMatrix::zeros(dout, dout);
            for k in kraus {
                m += k * c.matrix() * k.adjoint();
            }
            HermitianOperator::from_parts(hermitize(&m))
        })
        .collect();
    CqState::new(rho.alphabet().to_vec(), rho.weights().to_vec(), conditionals)
}
