//! Secret-key generation in two steps: linear coset error correction followed
//! by privacy amplification.
//!
//! Alice holds `A ∈ F_q^n`; Bob holds a correlated observation `B` (a random
//! variable or a quantum state); Eve holds side information `E`.  Alice
//! publishes the coset `[A] ∈ F_q^n / C₁` of an error-correction code `C₁` of
//! dimension `t`; Bob decodes `Â ∈ [A]` from `B`, both parties form the
//! in-code component `A₁ = A − a([A]) ∈ C₁`, and a hash `f : C₁ → {1,…,M}`
//! compresses it into the final key.  The sacrifice `L = |C₁|/M` measures how
//! much of the reconciled material is burned for secrecy.
//!
//! The module provides, at desk scale,
//!
//! * exact decoders and exact error probabilities for both classical
//!   ([`bayes_decode`], [`error_prob_exact`]) and quantum observations
//!   ([`quantum_decoder`]),
//! * ensemble error bounds over random codes ([`error_bound_ensemble`],
//!   [`error_bound_q`]),
//! * leakage bounds for a fixed code ([`leak_bound_fixed_classical`],
//!   [`leak_bound_fixed_q`]) — these depend on `C₁` only through `L` — and
//!   the improved `I′` bounds for a randomized code
//!   ([`leak_i_randomized_classical`], [`leak_i_randomized_q`]),
//! * the asymptotic achievable region ([`achievable_region`],
//!   [`achievable_region_q`]),
//! * report assembly for whole protocol instances
//!   ([`protocol_report_classical`], [`protocol_report_q`]), and
//! * the exact pushforwards an exhaustive verifier needs
//!   ([`hashed_protocol_joint`], [`hashed_protocol_state`]).
//!
//! All `I′` evaluators go through [`bounds::eta_capped`]; see the bounds
//! module for why the cap is required for soundness in degenerate regimes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::bounds::{
    self, eta_capped, BoundError, BoundValue, ConstantsUsed, Criterion, Smoothing,
    OPEN_INTERVAL_START,
};
use crate::classical_info::{self as ci, InfoError, JointSubDistribution};
use crate::finite_field::{
    CosetMap, FieldError, FieldMatrix, FieldSpec, FieldVector,
};
use crate::hash_ensembles::{HashError, HashFamily};
use crate::quantum_info::{
    self as qi, ComplexMatrix, CqState, HermitianOperator, QuantumError,
};

/// Work ceiling (table cells, respectively `|A|·d_B²` matrix entries) for
/// exact decoders and error probabilities.
pub const EXACT_BUDGET: u128 = 1 << 22;

/// Slack allowed between an exact error probability and its ensemble bound
/// when a [`ProtocolReport`] is validated.
pub const REPORT_TOLERANCE: f64 = 1e-9;

/// Gap kept between the search interval and `s = 1` in the quantum error
/// bound, whose integrand involves the Rényi order `1 − s`.
const S_RIGHT_GAP: f64 = 1e-9;

/// Right endpoint for quantum leakage routes that evaluate the Gallager
/// function at order `1/(1−s)`.  The matrix powers behind that quantity
/// underflow in f64 once the exponent passes a few hundred — and near the
/// underflow edge they may silently *undercount* the objective, which would
/// make a claimed upper bound too small.  Capping the exponent at 20
/// (`s ≤ 0.95`) keeps every entry above `≈6·10⁻¹⁷` representable and the
/// evaluation trustworthy; since each `s` yields a valid bound on its own,
/// shrinking the interval only costs tightness, never soundness.
const PHI_Q_S_MAX: f64 = 0.95;

/// Errors from protocol construction and evaluation.
#[derive(Debug, Error)]
pub enum KeygenError {
    /// Field or code arithmetic failed.
    #[error(transparent)]
    Field(#[from] FieldError),
    /// Classical information quantity failed.
    #[error(transparent)]
    Info(#[from] InfoError),
    /// Quantum information quantity failed.
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    /// Hash-family operation failed.
    #[error(transparent)]
    Hash(#[from] HashError),
    /// Bound optimization failed.
    #[error(transparent)]
    Bound(#[from] BoundError),
    /// An exact evaluation would exceed the work ceiling.
    #[error("exact evaluation needs {work} cells, budget is {budget}")]
    BudgetExceeded {
        /// Work the request would cost.
        work: u128,
        /// The ceiling it exceeds.
        budget: u128,
    },
    /// A bound was requested outside its stated parameter range.
    #[error("parameter violation: {0}")]
    ParameterViolation(String),
    /// The protocol configuration is internally inconsistent.
    #[error("invalid protocol configuration: {0}")]
    Config(String),
}

/// Which kind of hash ensemble a leakage bound averages over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HashEnsembleKind {
    /// A universal₂ ensemble (collision probability ≤ 1/M).
    Universal2,
    /// An ε-almost dual universal₂ ensemble.
    AlmostDual,
}

impl HashEnsembleKind {
    /// Stable textual tag.
    pub fn label(self) -> &'static str {
        match self {
            HashEnsembleKind::Universal2 => "universal2",
            HashEnsembleKind::AlmostDual => "almost_dual",
        }
    }
}

impl fmt::Display for HashEnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for HashEnsembleKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "universal2" => Ok(HashEnsembleKind::Universal2),
            "almost_dual" => Ok(HashEnsembleKind::AlmostDual),
            other => Err(format!("unknown hash ensemble kind {other:?}")),
        }
    }
}

/// A concrete protocol instance: ambient space, error-correction code, and
/// privacy-amplification hash family.
///
/// The hash family acts on the code `C₁` identified with `F_q^t` through the
/// coordinates in the reduced (RREF) basis, so its input length must equal
/// the code dimension `t` and its output length `m ≤ t`.  Then `M = q^m`
/// divides `|C₁| = q^t` and the sacrifice `L = q^{t−m}` is at least 1.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProtocolConfig {
    spec: FieldSpec,
    n: usize,
    code_basis: Vec<FieldVector>,
    hash: HashFamily,
}

impl ProtocolConfig {
    /// Validates and builds a protocol configuration.
    ///
    /// # Errors
    /// [`KeygenError::Config`] when the basis is empty, dependent, of the
    /// wrong length or field, or when the hash family does not act on
    /// `F_q^t`.
    pub fn new(
        spec: FieldSpec,
        n: usize,
        code_basis: Vec<FieldVector>,
        hash: HashFamily,
    ) -> Result<Self, KeygenError> {
        if code_basis.is_empty() {
            return Err(KeygenError::Config(
                "code basis must contain at least one vector".into(),
            ));
        }
        if code_basis.len() > n {
            return Err(KeygenError::Config(format!(
                "code dimension {} exceeds ambient length {n}",
                code_basis.len()
            )));
        }
        for v in &code_basis {
            if v.spec() != &spec {
                return Err(KeygenError::Config("code basis field mismatch".into()));
            }
            if v.len() != n {
                return Err(KeygenError::Config(format!(
                    "code basis vector has length {}, expected {n}",
                    v.len()
                )));
            }
        }
        let t = code_basis.len();
        if FieldMatrix::from_rows(&code_basis).rank() != t {
            return Err(KeygenError::Config(
                "code basis must be linearly independent".into(),
            ));
        }
        if hash.spec != spec {
            return Err(KeygenError::Config("hash family field mismatch".into()));
        }
        if hash.n != t {
            return Err(KeygenError::Config(format!(
                "hash family input length {} must equal the code dimension {t}",
                hash.n
            )));
        }
        Ok(ProtocolConfig {
            spec,
            n,
            code_basis,
            hash,
        })
    }

    /// Ambient field.
    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    /// Ambient length n.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Code dimension t.
    pub fn t(&self) -> usize {
        self.code_basis.len()
    }

    /// Basis of the error-correction code C₁.
    pub fn code_basis(&self) -> &[FieldVector] {
        &self.code_basis
    }

    /// The privacy-amplification hash family on `F_q^t`.
    pub fn hash(&self) -> &HashFamily {
        &self.hash
    }

    /// Output size `M = q^m` of the hash.
    pub fn big_m(&self) -> f64 {
        (self.spec.q() as f64).powi(self.hash.m as i32)
    }

    /// Sacrifice `L = |C₁|/M = q^{t−m}`.
    pub fn l_sacrifice(&self) -> f64 {
        (self.spec.q() as f64).powi((self.t() - self.hash.m) as i32)
    }

    /// Coset bookkeeping for the code.
    pub fn coset_map(&self) -> CosetMap {
        CosetMap::new(&self.spec, self.n, &self.code_basis)
    }

    /// Per-symbol rates `(R₁, R₂)`: `R₁ = (t/n)·ln q` is the code-size rate
    /// and `R₂ = ((t−m)/n)·ln q` the sacrifice rate, so the key comes out at
    /// `R₁ − R₂ = (m/n)·ln q`.
    pub fn rates(&self) -> (f64, f64) {
        let lq = (self.spec.q() as f64).ln();
        let n = self.n as f64;
        (
            self.t() as f64 * lq / n,
            (self.t() - self.hash.m) as f64 * lq / n,
        )
    }
}

/// Everything a protocol evaluation reports.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProtocolReport {
    /// Exact decoding error probability of the configured code, when the
    /// exhaustive evaluation fits the work ceiling.
    pub p_error_exact: Option<f64>,
    /// Ensemble-average error bound over random codes of the same dimension.
    pub p_error_bound: BoundValue,
    /// Leakage bound for the `d₁′` criterion.
    pub leak_d1_bound: BoundValue,
    /// Leakage bound for the `I′` criterion.
    pub leak_i_bound: BoundValue,
    /// Per-symbol rates `(R₁, R₂)` of the configuration.
    pub rates: Option<(f64, f64)>,
}

impl ProtocolReport {
    /// Checks the report invariants: the exact error probability is a
    /// probability, it does not exceed the ensemble bound beyond
    /// [`REPORT_TOLERANCE`], and each bound carries the criterion its field
    /// name promises.
    ///
    /// # Errors
    /// [`KeygenError::Config`] describing the violated invariant.
    pub fn validate(&self) -> Result<(), KeygenError> {
        if let Some(pe) = self.p_error_exact {
            if !(0.0..=1.0).contains(&pe) {
                return Err(KeygenError::Config(format!(
                    "exact error probability {pe} is not in [0, 1]"
                )));
            }
            if pe > self.p_error_bound.value + REPORT_TOLERANCE {
                return Err(KeygenError::Config(format!(
                    "exact error probability {pe} exceeds the ensemble bound {}",
                    self.p_error_bound.value
                )));
            }
        }
        if self.p_error_bound.criterion != Criterion::ErrorProbability {
            return Err(KeygenError::Config(
                "p_error_bound must carry the P_e criterion".into(),
            ));
        }
        if self.leak_d1_bound.criterion != Criterion::D1Prime {
            return Err(KeygenError::Config(
                "leak_d1_bound must carry the d1' criterion".into(),
            ));
        }
        if self.leak_i_bound.criterion != Criterion::IPrime {
            return Err(KeygenError::Config(
                "leak_i_bound must carry the I' criterion".into(),
            ));
        }
        Ok(())
    }
}

/// Asymptotically achievable protocol rates for a given source.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AchievableRegion {
    /// Largest code rate with vanishing error: `ln|A| − H(A|B)`.
    pub r1_max: f64,
    /// Smallest sacrifice rate with vanishing leakage: `ln|A| − H(A|E)`.
    pub r2_min: f64,
    /// `max{R₁ − R₂, 0} = max{H(A|E) − H(A|B), 0}`.
    pub key_rate: f64,
}

fn region_from_entropies(ln_a: f64, h_ab: f64, h_ae: f64) -> AchievableRegion {
    AchievableRegion {
        r1_max: ln_a - h_ab,
        r2_min: ln_a - h_ae,
        key_rate: (h_ae - h_ab).max(0.0),
    }
}

/// Requires the canonical ambient alphabet: `|A| = q^n` rows, row index
/// equal to the vector index.  Returns the exponent `n`.
fn ambient_exponent(spec: &FieldSpec, a_len: usize) -> Result<usize, KeygenError> {
    let q = spec.q() as u128;
    let mut size: u128 = 1;
    let mut n = 0usize;
    while size < a_len as u128 {
        size = size.saturating_mul(q);
        n += 1;
    }
    if size != a_len as u128 {
        return Err(KeygenError::Config(format!(
            "alphabet size {a_len} is not a power of q = {}",
            spec.q()
        )));
    }
    Ok(n)
}

fn ensure_code_fits(spec: &FieldSpec, t: u32, a_len: usize) -> Result<(), KeygenError> {
    let q = spec.q() as u128;
    let code_size = q.checked_pow(t).ok_or_else(|| {
        KeygenError::ParameterViolation(format!("code size q^{t} overflows"))
    })?;
    if code_size > a_len as u128 {
        return Err(KeygenError::ParameterViolation(format!(
            "code size q^{t} = {code_size} exceeds the ambient alphabet ({a_len})"
        )));
    }
    Ok(())
}

fn ensure_normalized_joint(p: &JointSubDistribution) -> Result<(), KeygenError> {
    if !p.is_normalized() {
        return Err(KeygenError::Info(InfoError::NotNormalized { mass: p.mass() }));
    }
    Ok(())
}

fn ensure_normalized_state(rho: &CqState) -> Result<(), KeygenError> {
    if !rho.is_normalized() {
        return Err(KeygenError::Quantum(QuantumError::NotNormalized {
            trace: rho.mass(),
        }));
    }
    Ok(())
}

fn ensure_sacrifice(l: f64) -> Result<(), KeygenError> {
    if !l.is_finite() || l < 1.0 {
        return Err(KeygenError::ParameterViolation(format!(
            "sacrifice L must be a finite real ≥ 1, got {l}"
        )));
    }
    Ok(())
}

fn hash_epsilon_effective(
    kind: HashEnsembleKind,
    epsilon: f64,
) -> Result<f64, KeygenError> {
    match kind {
        HashEnsembleKind::Universal2 => Ok(1.0),
        HashEnsembleKind::AlmostDual => {
            bounds::validate_epsilon(epsilon)?;
            Ok(epsilon)
        }
    }
}

// ---------------------------------------------------------------------------
// Exact decoding, classical
// ---------------------------------------------------------------------------

/// The Bayesian decoder: given the published coset and the observation `b`,
/// returns the index of `argmax_{a′ ∈ coset} P(a′, b)`.  Ties are broken
/// toward the lexicographically smallest coset member (equivalently the
/// smallest vector index).  Note that [`error_prob_exact`] deliberately does
/// *not* use this tie rule; see there.
///
/// # Errors
/// [`KeygenError::Config`] when the `A` alphabet is not the canonical
/// `F_q^n`, and [`KeygenError::ParameterViolation`] for an out-of-range
/// coset label or observation index.
pub fn bayes_decode(
    p_ab: &JointSubDistribution,
    map: &CosetMap,
    coset_label: u128,
    b: usize,
) -> Result<usize, KeygenError> {
    let n = ambient_exponent(map.spec(), p_ab.a_len())?;
    if n != map.ambient_len() {
        return Err(KeygenError::Config(format!(
            "alphabet is F_q^{n} but the code lives in F_q^{}",
            map.ambient_len()
        )));
    }
    if coset_label >= map.coset_count() {
        return Err(KeygenError::ParameterViolation(format!(
            "coset label {coset_label} out of range (count {})",
            map.coset_count()
        )));
    }
    if b >= p_ab.e_len() {
        return Err(KeygenError::ParameterViolation(format!(
            "observation index {b} out of range ({})",
            p_ab.e_len()
        )));
    }
    let rep = map.representative(coset_label);
    let mut best_idx = usize::MAX;
    let mut best_p = f64::NEG_INFINITY;
    for c in map.codewords() {
        let idx = rep.add(&c).to_index() as usize;
        let p = p_ab.get(idx, b);
        if p > best_p || (p == best_p && idx < best_idx) {
            best_p = p;
            best_idx = idx;
        }
    }
    Ok(best_idx)
}

/// Exact error probability `P_e = Σ_{a,b} P(a,b)·Δ_{a,b}(C₁)` of the
/// Bayesian decoder, with the pessimistic tie convention: `Δ_{a,b} = 1`
/// whenever some *other* coset member `a′` has `P(a′,b) ≥ P(a,b)`, so a tie
/// counts as an error even though [`bayes_decode`] would sometimes win it.
///
/// # Errors
/// [`KeygenError::BudgetExceeded`] when `|A|·|B|` exceeds [`EXACT_BUDGET`];
/// [`KeygenError::Config`] for a non-canonical alphabet; the source must be
/// normalized.
pub fn error_prob_exact(
    p_ab: &JointSubDistribution,
    map: &CosetMap,
) -> Result<f64, KeygenError> {
    ensure_normalized_joint(p_ab)?;
    let n = ambient_exponent(map.spec(), p_ab.a_len())?;
    if n != map.ambient_len() {
        return Err(KeygenError::Config(format!(
            "alphabet is F_q^{n} but the code lives in F_q^{}",
            map.ambient_len()
        )));
    }
    let work = (p_ab.a_len() as u128) * (p_ab.e_len() as u128);
    if work > EXACT_BUDGET {
        return Err(KeygenError::BudgetExceeded {
            work,
            budget: EXACT_BUDGET,
        });
    }
    let codewords = map.codewords();
    let mut err_mass = 0.0;
    for label in 0..map.coset_count() {
        let rep = map.representative(label);
        let members: Vec<usize> = codewords
            .iter()
            .map(|c| rep.add(c).to_index() as usize)
            .collect();
        for b in 0..p_ab.e_len() {
            let mut top = f64::NEG_INFINITY;
            let mut top_count = 0usize;
            for &a in &members {
                let p = p_ab.get(a, b);
                if p > top {
                    top = p;
                    top_count = 1;
                } else if p == top {
                    top_count += 1;
                }
            }
            for &a in &members {
                let p = p_ab.get(a, b);
                if p > 0.0 && (p < top || top_count >= 2) {
                    err_mass += p;
                }
            }
        }
    }
    Ok(err_mass.min(1.0))
}

// ---------------------------------------------------------------------------
// Ensemble error bounds
// ---------------------------------------------------------------------------

/// Ensemble-average error bound for the Bayesian decoder over an ε-almost
/// universal₂ code ensemble of dimension `t`:
///
/// `E_X P_e ≤ min_{s ∈ (0,1]} ε^s (q^t/|A|)^s e^{φ(−s|A|B|P)}`.
///
/// # Errors
/// [`KeygenError::ParameterViolation`] for `ε ≤ 0` or a code larger than the
/// ambient space; the source must be normalized over a canonical alphabet.
pub fn error_bound_ensemble(
    p_ab: &JointSubDistribution,
    spec: &FieldSpec,
    t: u32,
    epsilon: f64,
) -> Result<BoundValue, KeygenError> {
    ensure_normalized_joint(p_ab)?;
    ambient_exponent(spec, p_ab.a_len())?;
    ensure_code_fits(spec, t, p_ab.a_len())?;
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(KeygenError::ParameterViolation(format!(
            "code-ensemble quality ε must be positive, got {epsilon}"
        )));
    }
    let code_size = (spec.q() as f64).powi(t as i32);
    let ratio_ln = code_size.ln() - (p_ab.a_len() as f64).ln();
    let objective = |s: f64| -> Result<f64, BoundError> {
        Ok(s * epsilon.ln() + s * ratio_ln + ci::phi(-s, p_ab)?)
    };
    let (s_star, min_ln) = bounds::minimize_over(objective, OPEN_INTERVAL_START, 1.0)?;
    Ok(BoundValue::new_error_prob(
        min_ln.exp(),
        s_star,
        ConstantsUsed {
            epsilon,
            epsilon1: None,
            m: code_size,
            v: None,
            lambda: None,
            variant: "protocol_error_classical".into(),
        },
    ))
}

/// Ensemble-average error bound for the quantum square-root decoder over an
/// ε-almost universal₂ code ensemble of dimension `t`:
///
/// `E_X P_e ≤ min_{s ∈ (0,1]} (2 + 4ε)(q^t/|A|)^s e^{s·H_{1−s}(A|B|ρ)}`.
///
/// The Rényi order `1 − s` is evaluated through the self-conditioned family
/// at negative parameter; the right endpoint is approached to within 1e−9
/// because the order-0 limit sits outside the entropy's domain.
///
/// # Errors
/// As [`error_bound_ensemble`], with ε ≥ 0 allowed (the coefficient `2+4ε`
/// takes no logarithm).
pub fn error_bound_q(
    rho_ab: &CqState,
    spec: &FieldSpec,
    t: u32,
    epsilon: f64,
) -> Result<BoundValue, KeygenError> {
    ensure_normalized_state(rho_ab)?;
    ambient_exponent(spec, rho_ab.d_a())?;
    ensure_code_fits(spec, t, rho_ab.d_a())?;
    bounds::validate_epsilon(epsilon)?;
    let code_size = (spec.q() as f64).powi(t as i32);
    let ratio_ln = code_size.ln() - (rho_ab.d_a() as f64).ln();
    let coeff_ln = (2.0 + 4.0 * epsilon).ln();
    let objective = |s: f64| -> Result<f64, BoundError> {
        let h = qi::cond_renyi_self_q(-s, rho_ab)?;
        Ok(coeff_ln + s * ratio_ln + s * h)
    };
    let (s_star, min_ln) =
        bounds::minimize_over(objective, OPEN_INTERVAL_START, 1.0 - S_RIGHT_GAP)?;
    Ok(BoundValue::new_error_prob(
        min_ln.exp(),
        s_star,
        ConstantsUsed {
            epsilon,
            epsilon1: None,
            m: code_size,
            v: None,
            lambda: None,
            variant: "protocol_error_quantum".into(),
        },
    ))
}

// ---------------------------------------------------------------------------
// Leakage bounds, fixed code
// ---------------------------------------------------------------------------

/// Leakage bound for a fixed code and a hash ensemble on `C₁`, classical
/// side information.  The code enters only through the sacrifice
/// `L = |C₁|/M`:
///
/// * `d₁′`, universal₂:  `min_{s ∈ (0,½]} 3 (|A|/L)^s e^{φ(s|A|E|P)}`;
/// * `d₁′`, ε-almost dual universal₂: the same with coefficient `2 + √ε`;
/// * `I′`, universal₂:   `min_{s ∈ (0,1]} η((|A|/L)^s e^{φ(s|A|E|P)}, 1 + ln M)`;
/// * `I′`, ε-almost dual universal₂: the same with offset `ε + ln M`.
///
/// # Errors
/// [`KeygenError::ParameterViolation`] for `L < 1`, `M < 1`, a negative ε,
/// or the `P_e` criterion; the `I′` routes require a normalized source.
pub fn leak_bound_fixed_classical(
    p_ae: &JointSubDistribution,
    l: f64,
    m: f64,
    epsilon: f64,
    kind: HashEnsembleKind,
    criterion: Criterion,
) -> Result<BoundValue, KeygenError> {
    ensure_sacrifice(l)?;
    bounds::validate_m(m)?;
    let eps_eff = hash_epsilon_effective(kind, epsilon)?;
    let ratio_ln = (p_ae.a_len() as f64).ln() - l.ln();
    match criterion {
        Criterion::D1Prime => {
            let coeff = match kind {
                HashEnsembleKind::Universal2 => 3.0,
                HashEnsembleKind::AlmostDual => 2.0 + eps_eff.sqrt(),
            };
            let objective = |s: f64| -> Result<f64, BoundError> {
                Ok(coeff.ln() + s * ratio_ln + ci::phi(s, p_ae)?)
            };
            let (s_star, min_ln) =
                bounds::minimize_over(objective, OPEN_INTERVAL_START, 0.5)?;
            Ok(BoundValue::new_d1(
                min_ln.exp(),
                s_star,
                fixed_constants(eps_eff, m, None, kind, "protocol_d1"),
                Smoothing::None,
            ))
        }
        Criterion::IPrime => {
            ensure_normalized_joint(p_ae)?;
            let offset = match kind {
                HashEnsembleKind::Universal2 => 1.0 + m.ln(),
                HashEnsembleKind::AlmostDual => eps_eff + m.ln(),
            };
            let objective = |s: f64| -> Result<f64, BoundError> {
                let x = (s * ratio_ln + ci::phi(s, p_ae)?).exp();
                Ok(eta_capped(x, offset))
            };
            let (s_star, min) =
                bounds::minimize_over(objective, OPEN_INTERVAL_START, 1.0)?;
            Ok(BoundValue::new_i(
                min,
                s_star,
                fixed_constants(eps_eff, m, None, kind, "protocol_i"),
                Smoothing::None,
            ))
        }
        Criterion::ErrorProbability => Err(KeygenError::ParameterViolation(
            "leakage bounds exist for the d1' and I' criteria only".into(),
        )),
    }
}

fn fixed_constants(
    epsilon: f64,
    m: f64,
    v: Option<u64>,
    kind: HashEnsembleKind,
    stem: &str,
) -> ConstantsUsed {
    ConstantsUsed {
        epsilon,
        epsilon1: None,
        m,
        v,
        lambda: None,
        variant: format!("{stem}_{}", kind.label()),
    }
}

/// Leakage bound for a fixed code and a hash ensemble on `C₁`, quantum side
/// information:
///
/// * `d₁′`, universal₂:
///   `min_{s ∈ (0,1]} (4 + √v′)(|A|/L)^{s/2} e^{((1+s)/2)·φ(s/(1+s)|A|E|ρ)}`
///   with `v′` the eigenvalue-cluster count of `Tr_A ρ^{1+s}` (recomputed at
///   every probed `s`);
/// * `d₁′`, ε-almost dual universal₂: coefficient `4 + √(εv′)`;
/// * `I′`, universal₂:
///   `min_s 2η(2(|A|/L)^{s/(2−s)} e^{φ(s|A|E|ρ)/(2−s)}, v/4 + ln M̃)`
///   with `v` the cluster count of `ρ^E` and `M̃ = max{M, d_E}`, the search
///   restricted to `s ∈ (0, 0.95]` so the Gallager evaluation stays within
///   f64 range (any sub-interval still yields a valid bound);
/// * `I′`, ε-almost dual universal₂: offset `vε/4 + ln M̃`.
///
/// # Errors
/// As the classical variant; the source must be normalized for all four
/// routes (the φ-based forms assume a unit-mass state).
pub fn leak_bound_fixed_q(
    rho_ae: &CqState,
    l: f64,
    m: f64,
    epsilon: f64,
    kind: HashEnsembleKind,
    criterion: Criterion,
) -> Result<BoundValue, KeygenError> {
    ensure_sacrifice(l)?;
    bounds::validate_m(m)?;
    ensure_normalized_state(rho_ae)?;
    let eps_eff = hash_epsilon_effective(kind, epsilon)?;
    let ratio_ln = (rho_ae.d_a() as f64).ln() - l.ln();
    match criterion {
        Criterion::D1Prime => {
            let objective = |s: f64| -> Result<f64, BoundError> {
                let stats = qi::spectrum_stats(&bounds::trace_a_power(rho_ae, s)?)?;
                let coeff = 4.0 + (eps_eff * stats.v as f64).sqrt();
                let phi = qi::phi_q(s / (1.0 + s), rho_ae)?;
                Ok(coeff.ln() + 0.5 * s * ratio_ln + 0.5 * (1.0 + s) * phi)
            };
            let (s_star, min_ln) =
                bounds::minimize_over(objective, OPEN_INTERVAL_START, 1.0)?;
            let v_star = qi::spectrum_stats(&bounds::trace_a_power(rho_ae, s_star)?)?.v;
            Ok(BoundValue::new_d1(
                min_ln.exp(),
                s_star,
                fixed_constants(eps_eff, m, Some(v_star as u64), kind, "protocol_d1"),
                Smoothing::None,
            ))
        }
        Criterion::IPrime => {
            let v = qi::spectrum_stats(&rho_ae.rho_e())?.v as f64;
            let m_tilde = m.max(rho_ae.d_e() as f64);
            let offset = match kind {
                HashEnsembleKind::Universal2 => v / 4.0 + m_tilde.ln(),
                HashEnsembleKind::AlmostDual => v * eps_eff / 4.0 + m_tilde.ln(),
            };
            let objective = |s: f64| -> Result<f64, BoundError> {
                let inner = s / (2.0 - s) * ratio_ln + qi::phi_q(s, rho_ae)? / (2.0 - s);
                Ok(2.0 * eta_capped(2.0 * inner.exp(), offset))
            };
            let (s_star, min) =
                bounds::minimize_over(objective, OPEN_INTERVAL_START, PHI_Q_S_MAX)?;
            Ok(BoundValue::new_i(
                min,
                s_star,
                fixed_constants(eps_eff, m, Some(v as u64), kind, "protocol_i"),
                Smoothing::None,
            ))
        }
        Criterion::ErrorProbability => Err(KeygenError::ParameterViolation(
            "leakage bounds exist for the d1' and I' criteria only".into(),
        )),
    }
}

// ---------------------------------------------------------------------------
// Leakage bounds, randomized code
// ---------------------------------------------------------------------------

/// `I′` leakage bound when the error-correction code itself is drawn from an
/// ε₁-almost universal₂ ensemble of dimension `t`, independently of the hash
/// draw.  For an ε₂-almost dual universal₂ hash ensemble onto `M` values
///
/// `E_{X,Y} I′ ≤ min_{s ∈ (0,1]} η((|A|M/q^t)^s e^{−s·H_{1+s}(A|E|P)}, ln M + ε₂/ε₁) + ln ε₁`,
///
/// requiring `ε₂ ≥ 1`; a universal₂ hash ensemble instead uses the offset
/// `ln M + 1/ε₁` (pass [`HashEnsembleKind::Universal2`]; `epsilon2` is then
/// ignored).
///
/// # Errors
/// [`KeygenError::ParameterViolation`] for `ε₁ < 1`, `ε₂ < 1`, `M < 1`,
/// `M > q^t`, or a code larger than the ambient space; the source must be
/// normalized over a canonical alphabet.
pub fn leak_i_randomized_classical(
    p_ae: &JointSubDistribution,
    spec: &FieldSpec,
    t: u32,
    m: f64,
    epsilon1: f64,
    kind: HashEnsembleKind,
    epsilon2: f64,
) -> Result<BoundValue, KeygenError> {
    ensure_normalized_joint(p_ae)?;
    ambient_exponent(spec, p_ae.a_len())?;
    ensure_code_fits(spec, t, p_ae.a_len())?;
    let code_size = (spec.q() as f64).powi(t as i32);
    let eps2_eff = randomized_epsilons(m, code_size, epsilon1, kind, epsilon2, 1.0)?;
    let offset = match kind {
        HashEnsembleKind::Universal2 => m.ln() + 1.0 / epsilon1,
        HashEnsembleKind::AlmostDual => m.ln() + eps2_eff / epsilon1,
    };
    let ratio_ln = (p_ae.a_len() as f64).ln() + m.ln() - code_size.ln();
    let objective = |s: f64| -> Result<f64, BoundError> {
        let h = ci::cond_renyi_self(s, p_ae)?;
        Ok(eta_capped((s * (ratio_ln - h)).exp(), offset))
    };
    let (s_star, min) = bounds::minimize_over(objective, OPEN_INTERVAL_START, 1.0)?;
    Ok(BoundValue::new_i(
        min + epsilon1.ln(),
        s_star,
        ConstantsUsed {
            epsilon: eps2_eff,
            epsilon1: Some(epsilon1),
            m,
            v: None,
            lambda: None,
            variant: format!("protocol_i_randomized_{}", kind.label()),
        },
        Smoothing::None,
    ))
}

/// Quantum analogue of [`leak_i_randomized_classical`].  For an ε₂-almost
/// dual universal₂ hash ensemble (`ε₂ ≥ 2`)
///
/// `E_{X,Y} I′ ≤ min_{s ∈ (0,1]} 2η(2(|A|M/q^t)^{s/(2−s)} e^{−(s/(2−s))·H_{1+s}(A|E|ρ)}, ln M̃ + vε₂/(2ε₁)) + ln ε₁`
///
/// with `v` the eigenvalue-cluster count of `ρ^E` and `M̃ = max{M, d_E}`;
/// a universal₂ hash ensemble uses the offset `ln M̃ + v/(4ε₁)`.
///
/// # Errors
/// As the classical variant, with the dual route requiring `ε₂ ≥ 2`.
pub fn leak_i_randomized_q(
    rho_ae: &CqState,
    spec: &FieldSpec,
    t: u32,
    m: f64,
    epsilon1: f64,
    kind: HashEnsembleKind,
    epsilon2: f64,
) -> Result<BoundValue, KeygenError> {
    ensure_normalized_state(rho_ae)?;
    ambient_exponent(spec, rho_ae.d_a())?;
    ensure_code_fits(spec, t, rho_ae.d_a())?;
    let code_size = (spec.q() as f64).powi(t as i32);
    let eps2_eff = randomized_epsilons(m, code_size, epsilon1, kind, epsilon2, 2.0)?;
    let v = qi::spectrum_stats(&rho_ae.rho_e())?.v as f64;
    let m_tilde = m.max(rho_ae.d_e() as f64);
    let offset = match kind {
        HashEnsembleKind::Universal2 => m_tilde.ln() + v / (4.0 * epsilon1),
        HashEnsembleKind::AlmostDual => m_tilde.ln() + v * eps2_eff / (2.0 * epsilon1),
    };
    let ratio_ln = (rho_ae.d_a() as f64).ln() + m.ln() - code_size.ln();
    let objective = |s: f64| -> Result<f64, BoundError> {
        let h = qi::cond_renyi_self_q(s, rho_ae)?;
        let x = 2.0 * (s / (2.0 - s) * (ratio_ln - h)).exp();
        Ok(2.0 * eta_capped(x, offset))
    };
    let (s_star, min) = bounds::minimize_over(objective, OPEN_INTERVAL_START, 1.0)?;
    Ok(BoundValue::new_i(
        min + epsilon1.ln(),
        s_star,
        ConstantsUsed {
            epsilon: eps2_eff,
            epsilon1: Some(epsilon1),
            m,
            v: Some(v as u64),
            lambda: None,
            variant: format!("protocol_i_randomized_{}_q", kind.label()),
        },
        Smoothing::None,
    ))
}

fn randomized_epsilons(
    m: f64,
    code_size: f64,
    epsilon1: f64,
    kind: HashEnsembleKind,
    epsilon2: f64,
    dual_floor: f64,
) -> Result<f64, KeygenError> {
    bounds::validate_m(m)?;
    if m > code_size * (1.0 + 1e-12) {
        return Err(KeygenError::ParameterViolation(format!(
            "hash output M = {m} exceeds the code size {code_size}"
        )));
    }
    if !epsilon1.is_finite() || epsilon1 < 1.0 {
        return Err(KeygenError::ParameterViolation(format!(
            "code-ensemble quality ε₁ must be ≥ 1, got {epsilon1}"
        )));
    }
    match kind {
        HashEnsembleKind::Universal2 => Ok(1.0),
        HashEnsembleKind::AlmostDual => {
            if !epsilon2.is_finite() || epsilon2 < dual_floor {
                return Err(KeygenError::ParameterViolation(format!(
                    "hash-ensemble quality ε₂ must be ≥ {dual_floor}, got {epsilon2}"
                )));
            }
            Ok(epsilon2)
        }
    }
}

// ---------------------------------------------------------------------------
// Quantum decoder
// ---------------------------------------------------------------------------

/// The square-root decoder Bob applies when his observation is quantum.
///
/// For each `a` it holds the POVM element
/// `P′_a = Q_{[a]}^{−1/2} P_a Q_{[a]}^{−1/2}` with
/// `P_a = {P(a)ρ_a − (q^t/|A|)ρ^B ≥ 0}` and `Q_{[a]} = Σ_{a′ ∈ [a]} P_{a′}`,
/// the inverse square root acting as a pseudo-inverse on the support.  Inside
/// each coset the elements sum to the support projector of `Q`; the residual
/// completion is an abort outcome that [`Self::error_prob_exact_q`] counts as
/// an error.
#[derive(Clone, Debug)]
pub struct QuantumDecoder {
    povm: Vec<HermitianOperator>,
    coset_of: Vec<u128>,
    d_b: usize,
}

impl QuantumDecoder {
    /// POVM element `P′_a`.
    pub fn povm_element(&self, a: usize) -> &HermitianOperator {
        &self.povm[a]
    }

    /// Coset label of each `a`, as used to group the POVM.
    pub fn coset_label(&self, a: usize) -> u128 {
        self.coset_of[a]
    }

    /// Exact error probability `Σ_a P(a)·Tr[ρ_a(I − P′_a)]` against the
    /// given source, the abort outcome included.
    ///
    /// # Errors
    /// [`KeygenError::Config`] when the state's shape differs from the one
    /// the decoder was built for.
    pub fn error_prob_exact_q(&self, rho_ab: &CqState) -> Result<f64, KeygenError> {
        if rho_ab.d_a() != self.povm.len() || rho_ab.d_e() != self.d_b {
            return Err(KeygenError::Config(format!(
                "decoder was built for |A| = {}, d_B = {}, got |A| = {}, d_B = {}",
                self.povm.len(),
                self.d_b,
                rho_ab.d_a(),
                rho_ab.d_e()
            )));
        }
        ensure_normalized_state(rho_ab)?;
        let mut correct = 0.0;
        for (a, (w, cond)) in rho_ab
            .weights()
            .iter()
            .zip(rho_ab.conditionals())
            .enumerate()
        {
            if *w > 0.0 {
                let overlap = (cond.matrix() * self.povm[a].matrix()).trace().re;
                correct += w * overlap;
            }
        }
        Ok((1.0 - correct).clamp(0.0, 1.0))
    }
}

/// Builds the square-root decoder for a c-q source and a code.
///
/// # Errors
/// [`KeygenError::BudgetExceeded`] when `|A|·d_B²` exceeds [`EXACT_BUDGET`];
/// [`KeygenError::Config`] for a non-canonical alphabet size; the source
/// must be normalized.
pub fn quantum_decoder(
    rho_ab: &CqState,
    map: &CosetMap,
) -> Result<QuantumDecoder, KeygenError> {
    ensure_normalized_state(rho_ab)?;
    let n = ambient_exponent(map.spec(), rho_ab.d_a())?;
    if n != map.ambient_len() {
        return Err(KeygenError::Config(format!(
            "alphabet is F_q^{n} but the code lives in F_q^{}",
            map.ambient_len()
        )));
    }
    let d_b = rho_ab.d_e();
    let work = (rho_ab.d_a() as u128) * (d_b as u128).pow(2);
    if work > EXACT_BUDGET {
        return Err(KeygenError::BudgetExceeded {
            work,
            budget: EXACT_BUDGET,
        });
    }
    let q = map.spec().q() as f64;
    let factor = q.powi(map.dimension() as i32) / rho_ab.d_a() as f64;
    let rho_b = rho_ab.rho_e().scaled(factor);
    let projectors: Vec<HermitianOperator> = rho_ab
        .weights()
        .iter()
        .zip(rho_ab.conditionals())
        .map(|(w, cond)| {
            cond.scaled(*w)
                .minus(&rho_b)
                .map(|x| x.nonneg_projector())
        })
        .collect::<Result<_, _>>()?;
    let coset_of: Vec<u128> = (0..rho_ab.d_a())
        .map(|a| {
            map.decompose(&FieldVector::from_index(
                map.spec().clone(),
                map.ambient_len(),
                a as u128,
            ))
            .label
        })
        .collect();
    let mut povm: Vec<Option<HermitianOperator>> = vec![None; rho_ab.d_a()];
    for label in 0..map.coset_count() {
        let members: Vec<usize> = (0..rho_ab.d_a())
            .filter(|&a| coset_of[a] == label)
            .collect();
        let mut total = HermitianOperator::diagonal(&vec![0.0; d_b]);
        for &a in &members {
            total = total.plus(&projectors[a])?;
        }
        let half_inv = total.pow(-0.5)?;
        for &a in &members {
            povm[a] = Some(half_inv.sandwich(&projectors[a])?);
        }
    }
    Ok(QuantumDecoder {
        povm: povm.into_iter().map(|p| p.expect("every a has a coset")).collect(),
        coset_of,
        d_b,
    })
}

// ---------------------------------------------------------------------------
// Achievable region
// ---------------------------------------------------------------------------

/// Asymptotically achievable rates for a classical source: the error
/// probability vanishes for code rates `R₁ < ln|A| − H(A|B)`, the leakage
/// vanishes for sacrifice rates `R₂ > ln|A| − H(A|E)`, and the key rate
/// `R₁ − R₂` approaches `H(A|E) − H(A|B)` (floored at zero).
///
/// # Errors
/// Both sources must be normalized and share one `A` alphabet size.
pub fn achievable_region(
    p_ab: &JointSubDistribution,
    p_ae: &JointSubDistribution,
) -> Result<AchievableRegion, KeygenError> {
    ensure_normalized_joint(p_ab)?;
    ensure_normalized_joint(p_ae)?;
    if p_ab.a_len() != p_ae.a_len() {
        return Err(KeygenError::Config(format!(
            "the two sources disagree on |A|: {} vs {}",
            p_ab.a_len(),
            p_ae.a_len()
        )));
    }
    let ln_a = (p_ab.a_len() as f64).ln();
    let h_ab = ci::cond_renyi_self(0.0, p_ab)?;
    let h_ae = ci::cond_renyi_self(0.0, p_ae)?;
    Ok(region_from_entropies(ln_a, h_ab, h_ae))
}

/// Quantum analogue of [`achievable_region`] with conditional von Neumann
/// entropies.
///
/// # Errors
/// As [`achievable_region`].
pub fn achievable_region_q(
    rho_ab: &CqState,
    rho_ae: &CqState,
) -> Result<AchievableRegion, KeygenError> {
    ensure_normalized_state(rho_ab)?;
    ensure_normalized_state(rho_ae)?;
    if rho_ab.d_a() != rho_ae.d_a() {
        return Err(KeygenError::Config(format!(
            "the two sources disagree on |A|: {} vs {}",
            rho_ab.d_a(),
            rho_ae.d_a()
        )));
    }
    let ln_a = (rho_ab.d_a() as f64).ln();
    let h_ab = qi::cond_renyi_self_q(0.0, rho_ab)?;
    let h_ae = qi::cond_renyi_self_q(0.0, rho_ae)?;
    Ok(region_from_entropies(ln_a, h_ab, h_ae))
}

// ---------------------------------------------------------------------------
// Report assembly
// ---------------------------------------------------------------------------

/// Evaluates a full classical protocol instance: exact error probability of
/// the configured code (omitted when over budget), the ensemble error bound
/// at the same dimension, and the two leakage bounds of the configured hash
/// family's kind.
///
/// # Errors
/// Propagates the component errors; the assembled report must satisfy
/// [`ProtocolReport::validate`].
pub fn protocol_report_classical(
    config: &ProtocolConfig,
    p_ab: &JointSubDistribution,
    p_ae: &JointSubDistribution,
    code_epsilon: f64,
    hash_kind: HashEnsembleKind,
    hash_epsilon: f64,
) -> Result<ProtocolReport, KeygenError> {
    let map = config.coset_map();
    let p_error_exact = match error_prob_exact(p_ab, &map) {
        Ok(v) => Some(v),
        Err(KeygenError::BudgetExceeded { .. }) => None,
        Err(e) => return Err(e),
    };
    let p_error_bound =
        error_bound_ensemble(p_ab, config.spec(), config.t() as u32, code_epsilon)?;
    let l = config.l_sacrifice();
    let m = config.big_m();
    let leak_d1_bound =
        leak_bound_fixed_classical(p_ae, l, m, hash_epsilon, hash_kind, Criterion::D1Prime)?;
    let leak_i_bound =
        leak_bound_fixed_classical(p_ae, l, m, hash_epsilon, hash_kind, Criterion::IPrime)?;
    let report = ProtocolReport {
        p_error_exact,
        p_error_bound,
        leak_d1_bound,
        leak_i_bound,
        rates: Some(config.rates()),
    };
    report.validate()?;
    Ok(report)
}

/// Quantum analogue of [`protocol_report_classical`]: the exact error
/// probability comes from the square-root decoder.
///
/// # Errors
/// As the classical variant.
pub fn protocol_report_q(
    config: &ProtocolConfig,
    rho_ab: &CqState,
    rho_ae: &CqState,
    code_epsilon: f64,
    hash_kind: HashEnsembleKind,
    hash_epsilon: f64,
) -> Result<ProtocolReport, KeygenError> {
    let map = config.coset_map();
    let p_error_exact = match quantum_decoder(rho_ab, &map) {
        Ok(decoder) => Some(decoder.error_prob_exact_q(rho_ab)?),
        Err(KeygenError::BudgetExceeded { .. }) => None,
        Err(e) => return Err(e),
    };
    let p_error_bound = error_bound_q(rho_ab, config.spec(), config.t() as u32, code_epsilon)?;
    let l = config.l_sacrifice();
    let m = config.big_m();
    let leak_d1_bound =
        leak_bound_fixed_q(rho_ae, l, m, hash_epsilon, hash_kind, Criterion::D1Prime)?;
    let leak_i_bound =
        leak_bound_fixed_q(rho_ae, l, m, hash_epsilon, hash_kind, Criterion::IPrime)?;
    let report = ProtocolReport {
        p_error_exact,
        p_error_bound,
        leak_d1_bound,
        leak_i_bound,
        rates: Some(config.rates()),
    };
    report.validate()?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// Exact pushforwards for exhaustive verification
// ---------------------------------------------------------------------------

/// The joint distribution of `(f(A₁), ([A], E))` for one concrete code and
/// one concrete hash member `f : F_q^t → F_q^m` acting on the in-code
/// coordinates.  Feeding this to the secrecy criteria yields the exact
/// `d₁′(f(A₁)|[A],E)` and `I′(f(A₁)|[A],E)` the leakage bounds average.
///
/// # Errors
/// [`KeygenError::Config`] for a non-canonical `A` alphabet or a hash matrix
/// whose shape does not match the code dimension;
/// [`KeygenError::BudgetExceeded`] over [`EXACT_BUDGET`] output cells.
pub fn hashed_protocol_joint(
    p_ae: &JointSubDistribution,
    map: &CosetMap,
    hash_matrix: &FieldMatrix,
) -> Result<JointSubDistribution, KeygenError> {
    let n = ambient_exponent(map.spec(), p_ae.a_len())?;
    if n != map.ambient_len() {
        return Err(KeygenError::Config(format!(
            "alphabet is F_q^{n} but the code lives in F_q^{}",
            map.ambient_len()
        )));
    }
    if hash_matrix.cols() != map.dimension() || hash_matrix.spec() != map.spec() {
        return Err(KeygenError::Config(format!(
            "hash matrix must map F_q^{} into the field of the code",
            map.dimension()
        )));
    }
    let q = map.spec().q() as u128;
    let m_size = q.pow(hash_matrix.rows() as u32) as usize;
    let cosets = map.coset_count() as usize;
    let cond_len = cosets * p_ae.e_len();
    let work = (m_size as u128) * (cond_len as u128);
    if work > EXACT_BUDGET {
        return Err(KeygenError::BudgetExceeded {
            work,
            budget: EXACT_BUDGET,
        });
    }
    let mut table = vec![0.0; m_size * cond_len];
    for a in 0..p_ae.a_len() {
        let x = FieldVector::from_index(map.spec().clone(), n, a as u128);
        let d = map.decompose(&x);
        let coords = map.code_coordinates(&x);
        let out = hash_matrix.mul_vec(&coords).to_index() as usize;
        let base = d.label as usize * p_ae.e_len();
        for e in 0..p_ae.e_len() {
            table[out * cond_len + base + e] += p_ae.get(a, e);
        }
    }
    let key_labels = (0..m_size).map(|k| format!("k{k}")).collect();
    let cond_labels = (0..cosets)
        .flat_map(|c| {
            p_ae.e_labels()
                .iter()
                .map(move |e| format!("c{c}|{e}"))
        })
        .collect();
    Ok(JointSubDistribution::new(key_labels, cond_labels, table)?)
}

/// Quantum counterpart of [`hashed_protocol_joint`]: the c-q state of
/// `f(A₁)` against the composite side information `([A], E)`, the classical
/// coset label embedded as a block index.
///
/// # Errors
/// As [`hashed_protocol_joint`], plus the state-construction errors (the
/// composite dimension `#cosets · d_E` must stay within the global cap).
pub fn hashed_protocol_state(
    rho_ae: &CqState,
    map: &CosetMap,
    hash_matrix: &FieldMatrix,
) -> Result<CqState, KeygenError> {
    let n = ambient_exponent(map.spec(), rho_ae.d_a())?;
    if n != map.ambient_len() {
        return Err(KeygenError::Config(format!(
            "alphabet is F_q^{n} but the code lives in F_q^{}",
            map.ambient_len()
        )));
    }
    if hash_matrix.cols() != map.dimension() || hash_matrix.spec() != map.spec() {
        return Err(KeygenError::Config(format!(
            "hash matrix must map F_q^{} into the field of the code",
            map.dimension()
        )));
    }
    let q = map.spec().q() as u128;
    let m_size = q.pow(hash_matrix.rows() as u32) as usize;
    let cosets = map.coset_count() as usize;
    let d_e = rho_ae.d_e();
    let block_dim = cosets * d_e;
    let mut weights = vec![0.0; m_size];
    let mut blocks = vec![ComplexMatrix::zeros(block_dim, block_dim); m_size];
    for a in 0..rho_ae.d_a() {
        let x = FieldVector::from_index(map.spec().clone(), n, a as u128);
        let label = map.decompose(&x).label as usize;
        let coords = map.code_coordinates(&x);
        let out = hash_matrix.mul_vec(&coords).to_index() as usize;
        let w = rho_ae.weights()[a];
        if w == 0.0 {
            continue;
        }
        weights[out] += w;
        let cond = rho_ae.conditional(a).matrix();
        let off = label * d_e;
        for r in 0..d_e {
            for c in 0..d_e {
                blocks[out][(off + r, off + c)] += cond[(r, c)] * Complex64::new(w, 0.0);
            }
        }
    }
    let conditionals = weights
        .iter()
        .zip(blocks)
        .map(|(&w, b)| {
            if w > 0.0 {
                HermitianOperator::new(b / Complex64::new(w, 0.0))
            } else {
                Ok(HermitianOperator::maximally_mixed(block_dim))
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let labels = (0..m_size).map(|k| format!("k{k}")).collect();
    Ok(CqState::new(labels, weights, conditionals)?)
}
