//! One-shot security bounds and asymptotic error exponents.
//!
//! This module turns the entropy toolboxes of [`classical_info`](crate::classical_info)
//! and [`quantum_info`](crate::quantum_info) into concrete numbers: upper
//! bounds on the expected secrecy criteria `E d₁′` and `E I′` after hashing
//! with a universal₂ or ε-almost dual universal₂ family, and the error
//! exponents these bounds yield for i.i.d. sources.
//!
//! Three routes are covered, named by the variant tags they carry in
//! [`ConstantsUsed::variant`] and on the command line:
//!
//! * **order-2 route** (`lemma8`, `lemma9`): direct collision bounds
//!   `√(εM)·e^{−H₂(A|E|P‖Q)/2}` for `d₁′` and `ln(1+εM·e^{−H₂(A|E|P)})`
//!   for `I′`, with no free parameter.
//! * **smoothed Rényi-2 route** (`lemma10`–`lemma13` classically,
//!   `lemma14*`, `lemma15*`, `lemma12q`, `lemma13q` for c-q states): the
//!   order-2 bound applied to an implicitly truncated state, producing a
//!   one-parameter family in `s` that is minimized here numerically.
//! * **min-entropy route** (`lemma14_2_min`, `lemma12q2`): the same
//!   truncation argument run through the conditional min-entropy, giving
//!   the weaker coefficient `s/(2+2s)` (resp. `s/(2+s)`) but valid for
//!   every `s > 0`.
//!
//! All optimizations use a deterministic 64-point grid pre-scan followed by
//! golden-section refinement ([`minimize_over`] / [`maximize_over`]); the
//! objectives are not guaranteed unimodal and the grid guards against local
//! optima.
//!
//! # A note on `η` in the `I′` bounds
//!
//! The smoothed `I′` bounds have the shape `c·η(x(s), y)` with
//! `η(x, y) = −x ln x + x y`.  The quantity fed into `η` upper-bounds a
//! trace distance, and replacing a trace distance by an upper bound inside
//! `η` is legitimate only while `η` is nondecreasing in its first argument,
//! i.e. for `x ≤ e^{y−1}`; the distance itself also never exceeds 2.
//! [`eta_capped`] therefore evaluates `η(min(x, 2, e^{y−1}), y)`.  This
//! coincides with the plain formula in the meaningful regime `x ≤ e^{y−1}`
//! and keeps the evaluator a true upper bound in degenerate regimes (tiny
//! conditional entropy), where the uncapped expression can fall below the
//! quantity it is supposed to dominate and even below zero.

use crate::classical_info::{self as ci, Distribution, InfoError, JointSubDistribution};
use crate::quantum_info::{self as qi, CqState, HermitianOperator, QuantumError};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Number of uniform pre-scan points for the 1-D optimizer.
pub const GRID_POINTS: usize = 64;

/// Width at which golden-section refinement stops.
pub const REFINE_TOLERANCE: f64 = 1e-6;

/// Evaluation start for half-open parameter intervals `(0, b]`.
pub const OPEN_INTERVAL_START: f64 = 1e-6;

/// Search cap for the min-entropy-route bounds whose legal range is `s > 0`.
/// The rate factor `s/(2+2s)` saturates; the marginal gain beyond this cap
/// is below 1e−3.
pub const S_CAP: f64 = 8.0;

/// Trivial ceiling for the `d₁′` criterion (`‖·‖₁` of a difference of two
/// unit-trace operators).
pub const D1_CEILING: f64 = 2.0;

/// Trivial ceiling for error-probability bounds.
pub const PE_CEILING: f64 = 1.0;

/// Slack tolerance for exponent-relation checks.
pub const RELATION_TOLERANCE: f64 = 1e-9;

/// Tolerance under which `s·H_{1+s}(A|E|ρ) = −φ(s|A|E|ρ)` is treated as an
/// identity of the state (see [`entropy_phi_gap`]).
pub const EQUALITY_TOLERANCE: f64 = 1e-8;

/// Central-difference step for [`rate_threshold_two_thirds`].
pub const THRESHOLD_STEP: f64 = 1e-4;

/// Gate margin when comparing a rate against the finite-difference
/// threshold: safely above the O(step²) truncation error, far below any
/// meaningful rate difference.
pub const THRESHOLD_MARGIN: f64 = 1e-6;

/// Probe orders used by [`entropy_phi_gap`].
pub const EQUALITY_PROBES: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.9];

/// Errors raised by bound and exponent evaluation.
#[derive(Debug, Error)]
pub enum BoundError {
    /// Propagated classical information-theory error.
    #[error("classical information error: {0}")]
    Info(#[from] InfoError),
    /// Propagated quantum information-theory error.
    #[error("quantum information error: {0}")]
    Quantum(#[from] QuantumError),
    /// Invalid parameter or kind/source mismatch.
    #[error("domain error: {0}")]
    Domain(String),
}

/// Which secrecy criterion a [`BoundValue`] dominates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Criterion {
    /// Trace-distance criterion `d₁′`.
    #[serde(rename = "d1'")]
    D1Prime,
    /// Modified mutual-information criterion `I′`.
    #[serde(rename = "I'")]
    IPrime,
    /// Decoding error probability `P_e` of the reconciliation step.
    #[serde(rename = "p_e")]
    ErrorProbability,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::D1Prime => "d1'",
            Criterion::IPrime => "I'",
            Criterion::ErrorProbability => "P_e",
        })
    }
}

/// Which smoothing produced a bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Smoothing {
    /// Approximate smoothing of the conditional Rényi entropy of order 2.
    #[serde(rename = "renyi2")]
    Renyi2,
    /// Approximate smoothing of the conditional min-entropy.
    #[serde(rename = "minentropy")]
    MinEntropy,
    /// No smoothing: the direct order-2 collision bound.
    #[serde(rename = "none")]
    None,
}

impl fmt::Display for Smoothing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Smoothing::Renyi2 => "renyi2",
            Smoothing::MinEntropy => "minentropy",
            Smoothing::None => "none",
        })
    }
}

/// The constants a bound evaluation actually used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsUsed {
    /// Family quality ε (1 for plainly universal₂ routes).  Bounds that
    /// average over a hash ensemble *and* a code ensemble record the hash
    /// quality here and the code quality in `epsilon1`.
    pub epsilon: f64,
    /// Code-ensemble quality ε₁ for randomized-reconciliation bounds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon1: Option<f64>,
    /// Output cardinality `M` of the hash.
    pub m: f64,
    /// Eigenvalue-cluster count of the reference state, when one is involved.
    pub v: Option<u64>,
    /// Log-spread `λ` of the reference state, when one is involved.
    pub lambda: Option<f64>,
    /// Variant tag, e.g. `"lemma10"`.
    pub variant: String,
}

/// An evaluated one-shot bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    /// The reported bound; for the `d₁′` criterion this is clamped at
    /// [`D1_CEILING`].
    pub value: f64,
    /// The optimized formula value before clamping.
    pub raw_value: f64,
    /// Argmin of the bound parameter (the fixed order 2, i.e. `s = 1`, for
    /// parameter-free routes).
    pub s_star: f64,
    /// Constants entering the formula.
    pub constants: ConstantsUsed,
    /// Criterion the bound dominates.
    pub criterion: Criterion,
    /// Smoothing route.
    pub smoothing: Smoothing,
    /// Whether `value` was clamped down to the trivial ceiling.
    pub clamped: bool,
}

impl BoundValue {
    pub(crate) fn new_d1(
        raw: f64,
        s_star: f64,
        constants: ConstantsUsed,
        smoothing: Smoothing,
    ) -> Self {
        debug_assert!(raw >= 0.0, "d1' bound must be nonnegative, got {raw}");
        BoundValue {
            value: raw.min(D1_CEILING),
            raw_value: raw,
            s_star,
            constants,
            criterion: Criterion::D1Prime,
            smoothing,
            clamped: raw > D1_CEILING,
        }
    }

    pub(crate) fn new_i(
        value: f64,
        s_star: f64,
        constants: ConstantsUsed,
        smoothing: Smoothing,
    ) -> Self {
        debug_assert!(value >= 0.0, "I' bound must be nonnegative, got {value}");
        BoundValue {
            value,
            raw_value: value,
            s_star,
            constants,
            criterion: Criterion::IPrime,
            smoothing,
            clamped: false,
        }
    }

    pub(crate) fn new_error_prob(raw: f64, s_star: f64, constants: ConstantsUsed) -> Self {
        debug_assert!(raw >= 0.0, "P_e bound must be nonnegative, got {raw}");
        BoundValue {
            value: raw.min(PE_CEILING),
            raw_value: raw,
            s_star,
            constants,
            criterion: Criterion::ErrorProbability,
            smoothing: Smoothing::None,
            clamped: raw > PE_CEILING,
        }
    }
}

/// `d₁′` bound variants for classical side information.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassicalD1Variant {
    /// Order-2 route, universal₂: `√M·e^{−H₂(A|E|P‖Q)/2}`.
    #[serde(rename = "lemma8")]
    Lemma8,
    /// Order-2 route, ε-almost dual universal₂: `√(εM)·e^{−H₂(A|E|P‖Q)/2}`.
    #[serde(rename = "lemma9")]
    Lemma9,
    /// Smoothed Rényi-2 route, universal₂: `3·M^s·e^{φ(s|A|E|P)}`, `s ∈ (0, ½]`.
    #[serde(rename = "lemma10")]
    Lemma10,
    /// Smoothed Rényi-2 route, ε-almost dual universal₂:
    /// `(2+√ε)·M^s·e^{φ(s|A|E|P)}`, `s ∈ (0, ½]`.
    #[serde(rename = "lemma11")]
    Lemma11,
}

impl ClassicalD1Variant {
    /// All variants, in tag order.
    pub const ALL: [Self; 4] = [Self::Lemma8, Self::Lemma9, Self::Lemma10, Self::Lemma11];

    /// Stable tag used in output records and on the command line.
    pub fn label(self) -> &'static str {
        match self {
            Self::Lemma8 => "lemma8",
            Self::Lemma9 => "lemma9",
            Self::Lemma10 => "lemma10",
            Self::Lemma11 => "lemma11",
        }
    }
}

impl fmt::Display for ClassicalD1Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ClassicalD1Variant {
    type Err = BoundError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|v| v.label() == s)
            .ok_or_else(|| BoundError::Domain(format!("unknown classical d1' variant '{s}'")))
    }
}

/// `I′` bound variants for classical side information.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassicalIVariant {
    /// Order-2 route, universal₂: `ln(1 + M·e^{−H₂(A|E|P)})`.
    #[serde(rename = "lemma8")]
    Lemma8,
    /// Order-2 route, ε-almost dual universal₂: `ln(1 + εM·e^{−H₂(A|E|P)})`.
    #[serde(rename = "lemma9")]
    Lemma9,
    /// Smoothed Rényi-2 route, universal₂:
    /// `η(M^s·e^{−s·H_{1+s}(A|E|P)}, 1 + ln M)`, `s ∈ (0, 1]`.
    #[serde(rename = "lemma12")]
    Lemma12,
    /// Smoothed Rényi-2 route, ε-almost dual universal₂:
    /// `η(M^s·e^{−s·H_{1+s}(A|E|P)}, ε + ln M)`, `s ∈ (0, 1]`.
    #[serde(rename = "lemma13")]
    Lemma13,
}

impl ClassicalIVariant {
    /// All variants, in tag order.
    pub const ALL: [Self; 4] = [Self::Lemma8, Self::Lemma9, Self::Lemma12, Self::Lemma13];

    /// Stable tag used in output records and on the command line.
    pub fn label(self) -> &'static str {
        match self {
            Self::Lemma8 => "lemma8",
            Self::Lemma9 => "lemma9",
            Self::Lemma12 => "lemma12",
            Self::Lemma13 => "lemma13",
        }
    }
}

impl fmt::Display for ClassicalIVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ClassicalIVariant {
    type Err = BoundError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|v| v.label() == s)
            .ok_or_else(|| BoundError::Domain(format!("unknown classical I' variant '{s}'")))
    }
}

/// `d₁′` bound variants for quantum side information.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuantumD1Variant {
    /// Smoothed Rényi-2 route with the cluster count `v`:
    /// `(4+√v)·M^{s/2}·e^{−(s/2)H_{1+s}(A|E|ρ‖σ)}`, `s ∈ (0, 1]`.
    #[serde(rename = "lemma14_v")]
    Lemma14V,
    /// Smoothed Rényi-2 route with the log-spread `λ`:
    /// `(4+√⌈λ⌉)·M^{s/2}·e^{−(s/2)H_{1+s}(A|E|ρ‖σ)+s/2}`, `s ∈ (0, 1]`.
    #[serde(rename = "lemma14_lambda")]
    Lemma14Lambda,
    /// ε-almost dual universal₂ version of the `v` form:
    /// `(4+√v·√ε)·M^{s/2}·e^{−(s/2)H_{1+s}(A|E|ρ‖σ)}`.
    #[serde(rename = "lemma15_v")]
    Lemma15V,
    /// ε-almost dual universal₂ version of the `λ` form.
    #[serde(rename = "lemma15_lambda")]
    Lemma15Lambda,
    /// Min-entropy route: `(4+√v)·M^{s/(2+2s)}·e^{−(s/(2+2s))H_{1+s}(A|E|ρ‖σ)}`,
    /// `s > 0` (searched up to [`S_CAP`]).
    #[serde(rename = "lemma14_2_min")]
    Lemma14_2Min,
}

impl QuantumD1Variant {
    /// All variants, in tag order.
    pub const ALL: [Self; 5] = [
        Self::Lemma14V,
        Self::Lemma14Lambda,
        Self::Lemma15V,
        Self::Lemma15Lambda,
        Self::Lemma14_2Min,
    ];

    /// Stable tag used in output records and on the command line.
    pub fn label(self) -> &'static str {
        match self {
            Self::Lemma14V => "lemma14_v",
            Self::Lemma14Lambda => "lemma14_lambda",
            Self::Lemma15V => "lemma15_v",
            Self::Lemma15Lambda => "lemma15_lambda",
            Self::Lemma14_2Min => "lemma14_2_min",
        }
    }

    fn uses_epsilon(self) -> bool {
        matches!(self, Self::Lemma15V | Self::Lemma15Lambda)
    }

    fn uses_lambda(self) -> bool {
        matches!(self, Self::Lemma14Lambda | Self::Lemma15Lambda)
    }
}

impl fmt::Display for QuantumD1Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for QuantumD1Variant {
    type Err = BoundError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|v| v.label() == s)
            .ok_or_else(|| BoundError::Domain(format!("unknown quantum d1' variant '{s}'")))
    }
}

/// `I′` bound variants for quantum side information.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuantumIVariant {
    /// Smoothed Rényi-2 route, universal₂:
    /// `2η(2M^{s/(2−s)}·e^{−(s/(2−s))H_{1+s}(A|E|ρ)}, v/4 + ln max{M, d_E})`,
    /// `s ∈ (0, 1]`.
    #[serde(rename = "lemma12q")]
    Lemma12Q,
    /// ε-almost dual universal₂ version with second argument
    /// `vε/4 + ln max{M, d_E}`.
    #[serde(rename = "lemma13q")]
    Lemma13Q,
    /// Min-entropy route:
    /// `2η(2M^{s/(2+s)}·e^{−(s/(2+s))H_{1+s}(A|E|ρ)}, v/4 + ln M)`, `s > 0`
    /// (searched up to [`S_CAP`]).
    #[serde(rename = "lemma12q2")]
    Lemma12Q2,
}

impl QuantumIVariant {
    /// All variants, in tag order.
    pub const ALL: [Self; 3] = [Self::Lemma12Q, Self::Lemma13Q, Self::Lemma12Q2];

    /// Stable tag used in output records and on the command line.
    pub fn label(self) -> &'static str {
        match self {
            Self::Lemma12Q => "lemma12q",
            Self::Lemma13Q => "lemma13q",
            Self::Lemma12Q2 => "lemma12q2",
        }
    }
}

impl fmt::Display for QuantumIVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for QuantumIVariant {
    type Err = BoundError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|v| v.label() == s)
            .ok_or_else(|| BoundError::Domain(format!("unknown quantum I' variant '{s}'")))
    }
}

/// `η(x, y)` evaluated at `min(x, 2, e^{y−1})`.
///
/// See the module documentation: the first argument of `η` stands for a
/// trace distance (never above 2), and replacing it by an upper bound is
/// sound only on the range where `η(·, y)` is nondecreasing, i.e. up to its
/// peak at `e^{y−1}`.  In the capped domain `η ≥ 0`, so every `I′` bound
/// built from this helper is nonnegative.
pub fn eta_capped(x: f64, y: f64) -> f64 {
    ci::eta(x.min(2.0).min((y - 1.0).exp()), y)
}

pub(crate) fn validate_m(m: f64) -> Result<(), BoundError> {
    if !m.is_finite() || m < 1.0 {
        return Err(BoundError::Domain(format!(
            "output cardinality M must be a finite real ≥ 1, got {m}"
        )));
    }
    Ok(())
}

pub(crate) fn validate_epsilon(epsilon: f64) -> Result<(), BoundError> {
    if !epsilon.is_finite() || epsilon < 0.0 {
        return Err(BoundError::Domain(format!(
            "family quality ε must be finite and ≥ 0, got {epsilon}"
        )));
    }
    Ok(())
}

/// Golden-section minimization on `[lo, hi]`, assuming the bracket came out
/// of a grid scan.  Returns `(argmin, min)`.
fn golden_min(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > REFINE_TOLERANCE {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let xm = 0.5 * (lo + hi);
    let fm = f(xm);
    if f1 <= f2 && f1 < fm {
        (x1, f1)
    } else if f2 < fm {
        (x2, f2)
    } else {
        (xm, fm)
    }
}

fn grid_then_golden_min(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    debug_assert!(hi > lo);
    let n = GRID_POINTS;
    let step = (hi - lo) / ((n - 1) as f64);
    let xs: Vec<f64> = (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
        .collect();
    let mut best_i = 0;
    let mut best = f64::INFINITY;
    for (i, &x) in xs.iter().enumerate() {
        let y = f(x);
        if y < best {
            best = y;
            best_i = i;
        }
    }
    let a = xs[best_i.saturating_sub(1)];
    let b = xs[(best_i + 1).min(n - 1)];
    let (xg, yg) = golden_min(f, a, b);
    if yg < best { (xg, yg) } else { (xs[best_i], best) }
}

/// Deterministic 1-D minimization: 64-point uniform grid pre-scan followed
/// by golden-section refinement of the bracketed best cell to width
/// [`REFINE_TOLERANCE`].  Returns `(argmin, min)`.
///
/// The objective is probed once at the midpoint to surface systematic
/// errors (support violations, domain errors); sporadic errors at other
/// points are treated as `+∞` and never win.
///
/// # Errors
/// Whatever the objective returns at the midpoint probe.
pub fn minimize_over<F>(f: F, lo: f64, hi: f64) -> Result<(f64, f64), BoundError>
where
    F: Fn(f64) -> Result<f64, BoundError>,
{
    if !lo.is_finite() || !hi.is_finite() || hi <= lo {
        return Err(BoundError::Domain(format!(
            "invalid optimization interval [{lo}, {hi}]"
        )));
    }
    f(0.5 * (lo + hi))?;
    let wrapped = |s: f64| f(s).unwrap_or(f64::INFINITY);
    Ok(grid_then_golden_min(&wrapped, lo, hi))
}

/// Deterministic 1-D maximization; see [`minimize_over`].
///
/// # Errors
/// Whatever the objective returns at the midpoint probe.
pub fn maximize_over<F>(f: F, lo: f64, hi: f64) -> Result<(f64, f64), BoundError>
where
    F: Fn(f64) -> Result<f64, BoundError>,
{
    if !lo.is_finite() || !hi.is_finite() || hi <= lo {
        return Err(BoundError::Domain(format!(
            "invalid optimization interval [{lo}, {hi}]"
        )));
    }
    f(0.5 * (lo + hi))?;
    let wrapped = |s: f64| f(s).map(|v| -v).unwrap_or(f64::INFINITY);
    let (x, y) = grid_then_golden_min(&wrapped, lo, hi);
    Ok((x, -y))
}

/// Upper bound on `E_X d₁′(f_X(A)|E|P)` over a hash family.
///
/// The `lemma8`/`lemma9` variants evaluate the parameter-free order-2 bound
/// `√(εM)·e^{−H₂(A|E|P‖Q)/2}` against the reference `q` (when omitted, the
/// reference maximizing `H₂` is used, which makes the bound tightest).  The
/// `lemma10`/`lemma11` variants minimize `c·M^s·e^{φ(s|A|E|P)}` over
/// `s ∈ (0, ½]` with `c = 3`, resp. `c = 2+√ε`, and take no reference.
/// `P` may be sub-normalized.  Universal₂ variants record `ε = 1`.
///
/// # Errors
/// [`BoundError::Domain`] for `M < 1`, invalid ε, or a reference passed to a
/// φ-route variant; [`InfoError::NotNormalized`] for a sub-normalized
/// explicit reference; [`InfoError::SupportViolation`] when the reference
/// vanishes on a column carrying mass.
pub fn bound_classical_d1(
    p: &JointSubDistribution,
    m: f64,
    epsilon: f64,
    q: Option<&Distribution>,
    variant: ClassicalD1Variant,
) -> Result<BoundValue, BoundError> {
    validate_m(m)?;
    let eps_eff = match variant {
        ClassicalD1Variant::Lemma8 | ClassicalD1Variant::Lemma10 => 1.0,
        ClassicalD1Variant::Lemma9 | ClassicalD1Variant::Lemma11 => {
            validate_epsilon(epsilon)?;
            epsilon
        }
    };
    let constants = |eps: f64| ConstantsUsed {
        epsilon: eps,
        epsilon1: None,
        m,
        v: None,
        lambda: None,
        variant: variant.label().to_string(),
    };
    match variant {
        ClassicalD1Variant::Lemma8 | ClassicalD1Variant::Lemma9 => {
            let reference;
            let qd = match q {
                Some(qd) => {
                    if !qd.is_normalized() {
                        return Err(InfoError::NotNormalized { mass: qd.mass() }.into());
                    }
                    qd
                }
                None => {
                    reference = ci::optimal_qe(1.0, p)?;
                    &reference
                }
            };
            let h2 = ci::cond_renyi(1.0, p, qd)?;
            let raw = (eps_eff * m).sqrt() * (-h2 / 2.0).exp();
            Ok(BoundValue::new_d1(
                raw,
                1.0,
                constants(eps_eff),
                Smoothing::None,
            ))
        }
        ClassicalD1Variant::Lemma10 | ClassicalD1Variant::Lemma11 => {
            if q.is_some() {
                return Err(BoundError::Domain(
                    "the φ-route variants take no reference distribution".into(),
                ));
            }
            let c = if variant == ClassicalD1Variant::Lemma10 {
                3.0
            } else {
                2.0 + eps_eff.sqrt()
            };
            let log_m = m.ln();
            let (s_star, log_min) = minimize_over(
                |s| Ok(c.ln() + s * log_m + ci::phi(s, p)?),
                OPEN_INTERVAL_START,
                0.5,
            )?;
            Ok(BoundValue::new_d1(
                log_min.exp(),
                s_star,
                constants(eps_eff),
                Smoothing::Renyi2,
            ))
        }
    }
}

/// Upper bound on `E_X I′(f_X(A)|E|P)` over a hash family.
///
/// The `lemma8`/`lemma9` variants evaluate `ln(1 + εM·e^{−H₂(A|E|P)})`.
/// The `lemma12`/`lemma13` variants minimize
/// `η(M^s·e^{−s·H_{1+s}(A|E|P)}, c + ln M)` over `s ∈ (0, 1]` with `c = 1`,
/// resp. `c = ε` (see [`eta_capped`]).  Universal₂ variants record `ε = 1`.
///
/// # Errors
/// [`BoundError::Domain`] for `M < 1` or invalid ε;
/// [`InfoError::NotNormalized`] when `P` is not a normalized joint
/// distribution.
pub fn bound_classical_i(
    p: &JointSubDistribution,
    m: f64,
    epsilon: f64,
    variant: ClassicalIVariant,
) -> Result<BoundValue, BoundError> {
    validate_m(m)?;
    if !p.is_normalized() {
        return Err(InfoError::NotNormalized { mass: p.mass() }.into());
    }
    let eps_eff = match variant {
        ClassicalIVariant::Lemma8 | ClassicalIVariant::Lemma12 => 1.0,
        ClassicalIVariant::Lemma9 | ClassicalIVariant::Lemma13 => {
            validate_epsilon(epsilon)?;
            epsilon
        }
    };
    let constants = ConstantsUsed {
        epsilon: eps_eff,
        epsilon1: None,
        m,
        v: None,
        lambda: None,
        variant: variant.label().to_string(),
    };
    match variant {
        ClassicalIVariant::Lemma8 | ClassicalIVariant::Lemma9 => {
            let h2 = ci::cond_renyi_self(1.0, p)?;
            let value = (eps_eff * m * (-h2).exp()).ln_1p();
            Ok(BoundValue::new_i(value, 1.0, constants, Smoothing::None))
        }
        ClassicalIVariant::Lemma12 | ClassicalIVariant::Lemma13 => {
            let c = if variant == ClassicalIVariant::Lemma12 {
                1.0
            } else {
                eps_eff
            };
            let y = c + m.ln();
            let log_m = m.ln();
            let (s_star, min) = minimize_over(
                |s| {
                    let h = ci::cond_renyi_self(s, p)?;
                    Ok(eta_capped((s * (log_m - h)).exp(), y))
                },
                OPEN_INTERVAL_START,
                1.0,
            )?;
            Ok(BoundValue::new_i(min, s_star, constants, Smoothing::Renyi2))
        }
    }
}

/// `Tr_A ρ^{1+s} = Σ_a P(a)^{1+s} ρ_a^{1+s}` for a c-q state.
pub(crate) fn trace_a_power(rho: &CqState, s: f64) -> Result<HermitianOperator, BoundError> {
    let d_e = rho.d_e();
    let mut m = qi::ComplexMatrix::zeros(d_e, d_e);
    for (w, c) in rho.weights().iter().zip(rho.conditionals()) {
        if *w > 0.0 {
            m += c.pow(1.0 + s)?.matrix() * Complex64::new(w.powf(1.0 + s), 0.0);
        }
    }
    Ok(HermitianOperator::new(m)?)
}

/// Upper bound on `E_X d₁′(f_X(A)|E|ρ)` over a hash family, for a c-q state.
///
/// With an explicit normalized reference `σ` the bound minimizes
/// `(4+√v(σ)·√ε)·M^{s/2}·e^{−(s/2)H_{1+s}(A|E|ρ‖σ)}` (the `λ` variants use
/// `⌈λ(σ)⌉` and carry an extra `e^{s/2}`); `lemma14_2_min` runs the
/// min-entropy route `(4+√v(σ))·M^{s/(2+2s)}·e^{−(s/(2+2s))H_{1+s}(A|E|ρ‖σ)}`
/// over `s > 0`.  With `σ` omitted, `ρ` must be normalized and the
/// φ-forms are used: the entropy term becomes `e^{((1+s)/2)·φ(s/(1+s)|A|E|ρ)}`
/// (min-entropy route: `e^{φ(s/(1+s)|A|E|ρ)/2}`) and the cluster statistics
/// are those of `Tr_A ρ^{1+s}/Tr ρ^{1+s}` at each `s`.  Universal₂ variants
/// record `ε = 1`.
///
/// # Errors
/// [`BoundError::Domain`] for invalid `M`/ε;
/// [`QuantumError::NotNormalized`] when σ is not unit trace, or when σ is
/// omitted and ρ is sub-normalized;
/// [`QuantumError::SupportViolation`] when σ is singular on the side
/// information's support.
pub fn bound_quantum_d1(
    rho: &CqState,
    m: f64,
    epsilon: f64,
    sigma: Option<&HermitianOperator>,
    variant: QuantumD1Variant,
) -> Result<BoundValue, BoundError> {
    validate_m(m)?;
    let eps_eff = if variant.uses_epsilon() {
        validate_epsilon(epsilon)?;
        epsilon
    } else {
        1.0
    };
    let log_m = m.ln();
    let smoothing = if variant == QuantumD1Variant::Lemma14_2Min {
        Smoothing::MinEntropy
    } else {
        Smoothing::Renyi2
    };
    let (lo, hi) = if variant == QuantumD1Variant::Lemma14_2Min {
        (OPEN_INTERVAL_START, S_CAP)
    } else {
        (OPEN_INTERVAL_START, 1.0)
    };

    let prefactor = |stats: qi::SpectrumStats| -> f64 {
        let root = if variant.uses_lambda() {
            stats.lambda.ceil().max(0.0).sqrt()
        } else {
            (stats.v as f64).sqrt()
        };
        4.0 + root * eps_eff.sqrt()
    };

    let (s_star, log_min, stats_at_star) = match sigma {
        Some(sigma) => {
            let stats = qi::spectrum_stats(sigma)?;
            let c_ln = prefactor(stats).ln();
            let extra = if variant.uses_lambda() { 0.5 } else { 0.0 };
            let objective = |s: f64| -> Result<f64, BoundError> {
                let h = qi::cond_renyi_q(s, rho, sigma)?;
                let rate = if variant == QuantumD1Variant::Lemma14_2Min {
                    s / (2.0 + 2.0 * s)
                } else {
                    s / 2.0
                };
                Ok(c_ln + rate * (log_m - h) + extra * s)
            };
            let (s_star, log_min) = minimize_over(objective, lo, hi)?;
            (s_star, log_min, stats)
        }
        None => {
            if !rho.is_normalized() {
                return Err(QuantumError::NotNormalized { trace: rho.mass() }.into());
            }
            let extra = if variant.uses_lambda() { 0.5 } else { 0.0 };
            let objective = |s: f64| -> Result<f64, BoundError> {
                let stats = qi::spectrum_stats(&trace_a_power(rho, s)?)?;
                let phi = qi::phi_q(s / (1.0 + s), rho)?;
                let (rate, phi_coeff) = if variant == QuantumD1Variant::Lemma14_2Min {
                    (s / (2.0 + 2.0 * s), 0.5)
                } else {
                    (s / 2.0, (1.0 + s) / 2.0)
                };
                Ok(prefactor(stats).ln() + rate * log_m + phi_coeff * phi + extra * s)
            };
            let (s_star, log_min) = minimize_over(objective, lo, hi)?;
            let stats = qi::spectrum_stats(&trace_a_power(rho, s_star)?)?;
            (s_star, log_min, stats)
        }
    };

    let constants = ConstantsUsed {
        epsilon: eps_eff,
        epsilon1: None,
        m,
        v: Some(stats_at_star.v as u64),
        lambda: Some(stats_at_star.lambda),
        variant: variant.label().to_string(),
    };
    Ok(BoundValue::new_d1(
        log_min.exp(),
        s_star,
        constants,
        smoothing,
    ))
}

/// Upper bound on `E_X I′(f_X(A)|E|ρ)` over a hash family, for a c-q state.
///
/// Minimizes `2η(2M^{s/(2−s)}·e^{−(s/(2−s))H_{1+s}(A|E|ρ)}, y)` over
/// `s ∈ (0, 1]` with `y = v/4 + ln max{M, d_E}` (`lemma12q`) or
/// `y = vε/4 + ln max{M, d_E}` (`lemma13q`), where `v` counts the
/// eigenvalue clusters of `ρ^E`; `lemma12q2` runs the min-entropy route
/// `2η(2M^{s/(2+s)}·e^{−(s/(2+s))H_{1+s}(A|E|ρ)}, v/4 + ln M)` over `s > 0`.
/// See [`eta_capped`].  Universal₂ variants record `ε = 1`.
///
/// # Errors
/// [`BoundError::Domain`] for invalid `M`/ε;
/// [`QuantumError::NotNormalized`] when `ρ` is not a normalized state.
pub fn bound_quantum_i(
    rho: &CqState,
    m: f64,
    epsilon: f64,
    variant: QuantumIVariant,
) -> Result<BoundValue, BoundError> {
    validate_m(m)?;
    if !rho.is_normalized() {
        return Err(QuantumError::NotNormalized { trace: rho.mass() }.into());
    }
    let eps_eff = match variant {
        QuantumIVariant::Lemma12Q | QuantumIVariant::Lemma12Q2 => 1.0,
        QuantumIVariant::Lemma13Q => {
            validate_epsilon(epsilon)?;
            epsilon
        }
    };
    let stats = qi::spectrum_stats(&rho.rho_e())?;
    let v = stats.v as f64;
    let log_m = m.ln();
    let (y, hi, smoothing) = match variant {
        QuantumIVariant::Lemma12Q => (
            v / 4.0 + m.max(rho.d_e() as f64).ln(),
            1.0,
            Smoothing::Renyi2,
        ),
        QuantumIVariant::Lemma13Q => (
            v * eps_eff / 4.0 + m.max(rho.d_e() as f64).ln(),
            1.0,
            Smoothing::Renyi2,
        ),
        QuantumIVariant::Lemma12Q2 => (v / 4.0 + log_m, S_CAP, Smoothing::MinEntropy),
    };
    let objective = |s: f64| -> Result<f64, BoundError> {
        let h = qi::cond_renyi_self_q(s, rho)?;
        let rate = if variant == QuantumIVariant::Lemma12Q2 {
            s / (2.0 + s)
        } else {
            s / (2.0 - s)
        };
        Ok(2.0 * eta_capped(2.0 * (rate * (log_m - h)).exp(), y))
    };
    let (s_star, min) = minimize_over(objective, OPEN_INTERVAL_START, hi)?;
    let constants = ConstantsUsed {
        epsilon: eps_eff,
        epsilon1: None,
        m,
        v: Some(stats.v as u64),
        lambda: Some(stats.lambda),
        variant: variant.label().to_string(),
    };
    Ok(BoundValue::new_i(min, s_star, constants, smoothing))
}

/// Formula evaluator for the rewritten `d₁′` bound taking a user-supplied
/// smooth conditional entropy: `2ε₁ + √M·e^{−h/2}`, where `h` is the
/// ε₁-smooth conditional Rényi-2 entropy ([`Smoothing::Renyi2`]) or the
/// ε₁-smooth conditional min-entropy ([`Smoothing::MinEntropy`]).  The
/// toolkit does not search for the smoothing optimizer; `h` is the caller's
/// responsibility.
///
/// # Errors
/// [`BoundError::Domain`] for `M < 1`, `ε₁ ∉ [0, 2]`, non-finite `h`, or
/// [`Smoothing::None`].
pub fn smoothed_bound_d1(
    m: f64,
    epsilon1: f64,
    smooth_entropy: f64,
    smoothing: Smoothing,
) -> Result<BoundValue, BoundError> {
    validate_m(m)?;
    validate_smoothing_inputs(epsilon1, smooth_entropy, smoothing)?;
    let raw = 2.0 * epsilon1 + m.sqrt() * (-smooth_entropy / 2.0).exp();
    let constants = ConstantsUsed {
        epsilon: epsilon1,
        epsilon1: None,
        m,
        v: None,
        lambda: None,
        variant: match smoothing {
            Smoothing::Renyi2 => "smoothed_d1_renyi2".to_string(),
            _ => "smoothed_d1_minentropy".to_string(),
        },
    };
    Ok(BoundValue::new_d1(raw, 1.0, constants, smoothing))
}

/// Formula evaluator for the rewritten `I′` bound taking a user-supplied
/// smooth conditional entropy: `η(ε₁, ln(M·d_E)) + M·e^{−h}` (see
/// [`eta_capped`]), where `h` is the ε₁-smooth conditional Rényi-2 entropy
/// against `ρ^E` ([`Smoothing::Renyi2`]) or the ε₁-smooth conditional
/// min-entropy ([`Smoothing::MinEntropy`]).
///
/// # Errors
/// As [`smoothed_bound_d1`], plus [`BoundError::Domain`] for `d_E = 0`.
pub fn smoothed_bound_i(
    m: f64,
    d_e: usize,
    epsilon1: f64,
    smooth_entropy: f64,
    smoothing: Smoothing,
) -> Result<BoundValue, BoundError> {
    validate_m(m)?;
    validate_smoothing_inputs(epsilon1, smooth_entropy, smoothing)?;
    if d_e == 0 {
        return Err(BoundError::Domain(
            "the side-information dimension must be positive".into(),
        ));
    }
    let value = eta_capped(epsilon1, (m * d_e as f64).ln()) + m * (-smooth_entropy).exp();
    let constants = ConstantsUsed {
        epsilon: epsilon1,
        epsilon1: None,
        m,
        v: None,
        lambda: None,
        variant: match smoothing {
            Smoothing::Renyi2 => "smoothed_i_renyi2".to_string(),
            _ => "smoothed_i_minentropy".to_string(),
        },
    };
    Ok(BoundValue::new_i(value, 1.0, constants, smoothing))
}

fn validate_smoothing_inputs(
    epsilon1: f64,
    smooth_entropy: f64,
    smoothing: Smoothing,
) -> Result<(), BoundError> {
    if smoothing == Smoothing::None {
        return Err(BoundError::Domain(
            "the smoothed rewrites require the renyi2 or minentropy route".into(),
        ));
    }
    if !(0.0..=2.0).contains(&epsilon1) || !epsilon1.is_finite() {
        return Err(BoundError::Domain(format!(
            "smoothing radius ε₁ must lie in [0, 2], got {epsilon1}"
        )));
    }
    if !smooth_entropy.is_finite() {
        return Err(BoundError::Domain(format!(
            "smooth entropy must be finite, got {smooth_entropy}"
        )));
    }
    Ok(())
}

/// Exponent families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExponentKind {
    /// `max_{0≤t≤½} −φ(t|A|E|P) − tR` (classical, `d₁′`).
    #[serde(rename = "e_phi")]
    EPhi,
    /// `max_{0≤s≤1} s(H_{1+s}(A|E|P) − R)` (classical, `I′`).
    #[serde(rename = "e_H")]
    EH,
    /// `max_{0≤s≤1} −((1+s)/2)·φ(s/(1+s)|A|E|ρ) − (s/2)R` (quantum, `d₁′`).
    #[serde(rename = "e_phi_q")]
    EPhiQ,
    /// `max_{0≤s≤1} (s/(2−s))(H_{1+s}(A|E|ρ) − R)` (quantum, `I′`).
    #[serde(rename = "e_H_q")]
    EHQ,
    /// `max_{0≤s≤½} (−sR − φ(s|A|E|ρ))/(2−s)` (quantum, `d₁′`,
    /// min-entropy route).
    #[serde(rename = "e_phi_q2")]
    EPhiQ2,
}

impl ExponentKind {
    /// All kinds, in tag order.
    pub const ALL: [Self; 5] = [Self::EPhi, Self::EH, Self::EPhiQ, Self::EHQ, Self::EPhiQ2];

    /// Stable tag used in output records and on the command line.
    pub fn label(self) -> &'static str {
        match self {
            Self::EPhi => "e_phi",
            Self::EH => "e_H",
            Self::EPhiQ => "e_phi_q",
            Self::EHQ => "e_H_q",
            Self::EPhiQ2 => "e_phi_q2",
        }
    }

    /// Whether the kind reads a classical joint distribution (else a c-q
    /// state).
    pub fn is_classical(self) -> bool {
        matches!(self, Self::EPhi | Self::EH)
    }
}

impl fmt::Display for ExponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ExponentKind {
    type Err = BoundError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|v| v.label() == s)
            .ok_or_else(|| BoundError::Domain(format!("unknown exponent kind '{s}'")))
    }
}

/// The source a bound or exponent is evaluated on.
#[derive(Clone, Copy, Debug)]
pub enum ExponentSource<'a> {
    /// Classical joint (sub-)distribution.
    Classical(&'a JointSubDistribution),
    /// Classical-quantum state.
    Quantum(&'a CqState),
}

/// An optimized exponent value together with its maximizer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentValue {
    /// The exponent (nats per symbol), always ≥ 0.
    pub value: f64,
    /// The maximizing parameter.
    pub s_star: f64,
}

/// Evaluates an error exponent at rate `R ≥ 0` (nats per symbol).
///
/// The maximum over the kind's legal parameter interval is taken with the
/// deterministic grid + golden-section optimizer; `s = 0` lies in every
/// interval and contributes 0 for a normalized source, so the result is
/// nonnegative.
///
/// # Errors
/// [`BoundError::Domain`] when `R < 0` or when the kind does not match the
/// source's side (classical vs quantum).
pub fn exponent(
    kind: ExponentKind,
    source: &ExponentSource<'_>,
    r: f64,
) -> Result<ExponentValue, BoundError> {
    if !r.is_finite() || r < 0.0 {
        return Err(BoundError::Domain(format!(
            "rate R must be finite and ≥ 0, got {r}"
        )));
    }
    let (s_star, value) = match (kind, source) {
        (ExponentKind::EPhi, ExponentSource::Classical(p)) => {
            maximize_over(|t| Ok(-ci::phi(t, p)? - t * r), 0.0, 0.5)?
        }
        (ExponentKind::EH, ExponentSource::Classical(p)) => {
            maximize_over(|s| Ok(s * (ci::cond_renyi_self(s, p)? - r)), 0.0, 1.0)?
        }
        (ExponentKind::EPhiQ, ExponentSource::Quantum(rho)) => maximize_over(
            |s| {
                Ok(-(1.0 + s) / 2.0 * qi::phi_q(s / (1.0 + s), rho)? - s / 2.0 * r)
            },
            0.0,
            1.0,
        )?,
        (ExponentKind::EHQ, ExponentSource::Quantum(rho)) => maximize_over(
            |s| Ok(s / (2.0 - s) * (qi::cond_renyi_self_q(s, rho)? - r)),
            0.0,
            1.0,
        )?,
        (ExponentKind::EPhiQ2, ExponentSource::Quantum(rho)) => maximize_over(
            |s| Ok((-s * r - qi::phi_q(s, rho)?) / (2.0 - s)),
            0.0,
            0.5,
        )?,
        (kind, ExponentSource::Classical(_)) => {
            return Err(BoundError::Domain(format!(
                "exponent kind '{}' requires a quantum source",
                kind.label()
            )));
        }
        (kind, ExponentSource::Quantum(_)) => {
            return Err(BoundError::Domain(format!(
                "exponent kind '{}' requires a classical source",
                kind.label()
            )));
        }
    };
    Ok(ExponentValue { value, s_star })
}

/// A rate sweep of one exponent family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentCurve {
    /// Family tag, e.g. `"e_phi_q"`.
    pub family: String,
    /// Rates (nats per symbol), nondecreasing.
    pub rate_grid: Vec<f64>,
    /// Exponent values, one per rate, each ≥ 0.
    pub values: Vec<f64>,
}

impl ExponentCurve {
    /// Validating constructor.
    ///
    /// # Errors
    /// [`BoundError::Domain`] on length mismatch, an empty or non-monotone
    /// rate grid, or non-finite/negative values.
    pub fn new(
        family: impl Into<String>,
        rate_grid: Vec<f64>,
        values: Vec<f64>,
    ) -> Result<Self, BoundError> {
        if rate_grid.is_empty() || rate_grid.len() != values.len() {
            return Err(BoundError::Domain(format!(
                "curve needs matching nonempty grids, got {} rates and {} values",
                rate_grid.len(),
                values.len()
            )));
        }
        if rate_grid.iter().any(|r| !r.is_finite())
            || rate_grid.windows(2).any(|w| w[1] < w[0])
        {
            return Err(BoundError::Domain(
                "the rate grid must be finite and nondecreasing".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(BoundError::Domain(
                "exponent values must be finite and nonnegative".into(),
            ));
        }
        Ok(ExponentCurve {
            family: family.into(),
            rate_grid,
            values,
        })
    }

    /// True when the values never increase along the grid beyond `tol`.
    pub fn is_nonincreasing(&self, tol: f64) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0] + tol)
    }

    /// True when the curve is convex along the grid: every interior point
    /// lies below the chord of its neighbours, up to `tol`.  (Each exponent
    /// is a maximum of functions affine in `R`, hence convex in `R`.)
    pub fn is_convex(&self, tol: f64) -> bool {
        (1..self.values.len().saturating_sub(1)).all(|i| {
            let (r0, r1, r2) = (
                self.rate_grid[i - 1],
                self.rate_grid[i],
                self.rate_grid[i + 1],
            );
            let span = r2 - r0;
            if span <= 0.0 {
                return true;
            }
            let chord = self.values[i - 1] + (self.values[i + 1] - self.values[i - 1]) * (r1 - r0) / span;
            self.values[i] <= chord + tol
        })
    }
}

/// Sweeps [`exponent`] over a rate grid.
///
/// # Errors
/// As [`exponent`]; additionally the grid must satisfy the
/// [`ExponentCurve::new`] invariants.
pub fn exponent_curve(
    kind: ExponentKind,
    source: &ExponentSource<'_>,
    rate_grid: &[f64],
) -> Result<ExponentCurve, BoundError> {
    let values = rate_grid
        .iter()
        .map(|&r| Ok(exponent(kind, source, r)?.value))
        .collect::<Result<Vec<f64>, BoundError>>()?;
    ExponentCurve::new(kind.label(), rate_grid.to_vec(), values)
}

/// One verified inequality between two exponents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationCheck {
    /// Stable name of the inequality.
    pub name: String,
    /// Left-hand side.
    pub lhs: f64,
    /// Right-hand side.
    pub rhs: f64,
    /// `rhs − lhs`; the check passes when this is ≥ −[`RELATION_TOLERANCE`].
    pub slack: f64,
    /// Whether the inequality holds within tolerance.
    pub holds: bool,
}

impl RelationCheck {
    fn le(name: &str, lhs: f64, rhs: f64) -> Self {
        let slack = rhs - lhs;
        RelationCheck {
            name: name.to_string(),
            lhs,
            rhs,
            slack,
            holds: slack >= -RELATION_TOLERANCE,
        }
    }
}

/// Report of [`exponent_relations`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentRelationsReport {
    /// The rate the exponents were evaluated at.
    pub rate: f64,
    /// The individual inequality checks.
    pub checks: Vec<RelationCheck>,
    /// The rate threshold `R(2/3)` above which the Rényi exponent is known
    /// to be dominated by the φ exponent in the equality case (quantum
    /// sources only).
    pub r_threshold: Option<f64>,
    /// `max_s |s·H_{1+s}(A|E|ρ) + φ(s|A|E|ρ)|` over the probe grid
    /// (quantum sources only).
    pub equality_gap: Option<f64>,
    /// Whether the gap is below [`EQUALITY_TOLERANCE`].
    pub equality_case: Option<bool>,
}

impl ExponentRelationsReport {
    /// True when every evaluated check holds.
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

/// The rate threshold `R(2/3)` for a c-q state: with `μ(s) = s·H_{1+s}(A|E|ρ)`,
/// `R(s) = μ(s)/2 + ((2−s)/2)·μ′(s)` evaluated at `s = 2/3`, computed as
/// `((2−s)²/2)·d/ds[μ(s)/(2−s)]` by a central finite difference of step
/// [`THRESHOLD_STEP`].
///
/// # Errors
/// Propagates entropy-evaluation errors.
pub fn rate_threshold_two_thirds(rho: &CqState) -> Result<f64, BoundError> {
    let g = |s: f64| -> Result<f64, BoundError> {
        Ok(s * qi::cond_renyi_self_q(s, rho)? / (2.0 - s))
    };
    let s0 = 2.0 / 3.0;
    let h = THRESHOLD_STEP;
    let derivative = (g(s0 + h)? - g(s0 - h)?) / (2.0 * h);
    Ok((2.0 - s0).powi(2) / 2.0 * derivative)
}

/// `max_s |s·H_{1+s}(A|E|ρ) + φ(s|A|E|ρ)|` over [`EQUALITY_PROBES`].
///
/// For states where the conditionals and the reduced state share an
/// eigenbasis of a particular structure (e.g. the additive models used for
/// generalized Pauli channels, or a uniform `A` independent of `E`) the gap
/// vanishes identically; a gap below [`EQUALITY_TOLERANCE`] unlocks the
/// threshold comparison between the Rényi and φ exponent families.
///
/// # Errors
/// Propagates entropy-evaluation errors.
pub fn entropy_phi_gap(rho: &CqState) -> Result<f64, BoundError> {
    let mut gap = 0.0_f64;
    for &s in &EQUALITY_PROBES {
        let h = qi::cond_renyi_self_q(s, rho)?;
        let phi = qi::phi_q(s, rho)?;
        gap = gap.max((s * h + phi).abs());
    }
    Ok(gap)
}

/// Evaluates all applicable exponent inequalities at rate `R`.
///
/// Classical sources: `e_φ ≤ e_H` and `e_H/2 ≤ e_φ`.
/// Quantum sources: `e_{H,q}/2 ≤ e_{φ,q}`, `e_{φ,q,2} ≤ e_{φ,q}`, and
/// `e_{φ,q,2} ≤ e_{H,q}`; additionally, when `R ≥ R(2/3)` and the state
/// satisfies the `s·H_{1+s} = −φ(s)` identity within
/// [`EQUALITY_TOLERANCE`], the stronger `e_{H,q} ≤ e_{φ,q}` is checked.
/// (The relation `e_{φ,q,2} ≤ e_{H,q}` can carry negative slack on states
/// far from that identity; the report states what was found.)
///
/// # Errors
/// As [`exponent`].
pub fn exponent_relations(
    source: &ExponentSource<'_>,
    r: f64,
) -> Result<ExponentRelationsReport, BoundError> {
    match source {
        ExponentSource::Classical(_) => {
            let e_h = exponent(ExponentKind::EH, source, r)?.value;
            let e_phi = exponent(ExponentKind::EPhi, source, r)?.value;
            Ok(ExponentRelationsReport {
                rate: r,
                checks: vec![
                    RelationCheck::le("phi_exponent_le_renyi_exponent", e_phi, e_h),
                    RelationCheck::le("half_renyi_exponent_le_phi_exponent", e_h / 2.0, e_phi),
                ],
                r_threshold: None,
                equality_gap: None,
                equality_case: None,
            })
        }
        ExponentSource::Quantum(rho) => {
            let e_h_q = exponent(ExponentKind::EHQ, source, r)?.value;
            let e_phi_q = exponent(ExponentKind::EPhiQ, source, r)?.value;
            let e_phi_q2 = exponent(ExponentKind::EPhiQ2, source, r)?.value;
            let threshold = rate_threshold_two_thirds(rho)?;
            let gap = entropy_phi_gap(rho)?;
            let equality = gap <= EQUALITY_TOLERANCE;
            let mut checks = vec![
                RelationCheck::le(
                    "half_renyi_exponent_le_phi_exponent_q",
                    e_h_q / 2.0,
                    e_phi_q,
                ),
                RelationCheck::le("order2_phi_exponent_le_phi_exponent_q", e_phi_q2, e_phi_q),
                RelationCheck::le("order2_phi_exponent_le_renyi_exponent_q", e_phi_q2, e_h_q),
            ];
            if equality && r >= threshold - THRESHOLD_MARGIN {
                checks.push(RelationCheck::le(
                    "renyi_exponent_le_phi_exponent_q_above_threshold",
                    e_h_q,
                    e_phi_q,
                ));
            }
            Ok(ExponentRelationsReport {
                rate: r,
                checks,
                r_threshold: Some(threshold),
                equality_gap: Some(gap),
                equality_case: Some(equality),
            })
        }
    }
}
