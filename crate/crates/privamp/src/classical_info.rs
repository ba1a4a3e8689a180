//! Classical information quantities on sub-distributions.
//!
//! The central object is a joint sub-distribution `P^{A,E}` over finite
//! labeled alphabets: a nonnegative table with total mass at most 1,
//! not necessarily normalized (smoothing arguments deliberately work
//! with truncated tables).  On top of it this module provides
//!
//! * the cumulant-like quantity `ψ(s|P‖Q) = log Σ_x P(x)^{1+s} Q(x)^{−s}`
//!   and the conditional Rényi entropy relative to a normalized
//!   reference `Q` on the side information,
//!
//!   ```text
//!   H_{1+s}(A|E|P‖Q) = −(1/s) · log Σ_{a,e} P(a,e)^{1+s} Q(e)^{−s},
//!   ```
//!
//!   with the conditional Shannon value `log|A| − D(P‖P_mix × Q)` as
//!   the analytic limit at `s = 0`;
//! * the Gallager-style exponent function
//!   `φ(s|A|E|P) = log Σ_e (Σ_a P(a,e)^{1/(1−s)})^{1−s}` on `0 ≤ s < 1`,
//!   whose slope at `s = 0` is `−H(A|E)`;
//! * secrecy criteria: the uniform-composable distance
//!   `d₁′ = ‖P − P_mix × P^E‖₁`, the modified mutual information
//!   `I′ = D(P‖P_mix × P^E)`, and their plain counterparts `d₁`, `I`,
//!   linked by Pinsker (`d₁′² ≤ 2I′`) and Fannes
//!   (`I′ ≤ η(d₁′, log|A|)`, `η(x,y) = −x log x + x y`) inequalities;
//! * the conditional L₂ distance from uniform
//!
//!   ```text
//!   d₂(A:E|P‖Q) = Σ_{a,e} (P(a,e) − P_mix(a) P^E(e))² / Q(e)
//!               = e^{−H₂(A|E|P‖Q)} − (1/|A|) e^{ψ(1|P^E‖Q)},
//!   ```
//!
//!   computed along both routes and cross-checked on every call;
//! * the transformations the security lemmas quantify: pushforward
//!   under a hash (`P^{f(A),E}`), convolution with a random shift
//!   (`P * P^W`), and stochastic post-processing of the side
//!   information, together with the optimizing reference distribution
//!   `Q*(e) ∝ (Σ_a P(a,e)^{1+s})^{1/(1+s)}` that links `H_{1+s}` to `φ`.
//!
//! All logarithms are natural; sums are accumulated with Kahan
//! compensation and spectra are folded in the log domain.

use crate::finite_field::{FieldMatrix, FieldSpec, FieldVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Mass / normalization tolerance for table validation.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Errors for classical information-theoretic operations.
#[derive(Debug, Error)]
pub enum InfoError {
    /// A reference weight vanishes where the leading measure has mass.
    #[error("support violation: reference vanishes at '{label}' which carries mass")]
    SupportViolation {
        /// Label of the offending outcome.
        label: String,
    },
    /// The operation requires a normalized distribution.
    #[error("input is not normalized (mass = {mass})")]
    NotNormalized {
        /// Actual total mass.
        mass: f64,
    },
    /// Parameter outside the domain of definition.
    #[error("domain error: {0}")]
    DomainError(String),
    /// The alphabet does not carry the required group structure.
    #[error("alphabet is not the expected vector group: {0}")]
    NonGroupAlphabet(String),
    /// The input has zero total mass.
    #[error("input has zero mass")]
    DegenerateP,
    /// Malformed table or alphabet.
    #[error("invalid table: {0}")]
    InvalidTable(String),
}

/// Kahan-compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    /// Fresh accumulator at zero.
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one term.
    pub fn add(&mut self, term: f64) {
        let y = term - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    /// Current total.
    pub fn total(&self) -> f64 {
        self.sum
    }
}

/// Kahan-compensated sum of a sequence.
pub fn kahan_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = KahanSum::new();
    for t in terms {
        acc.add(t);
    }
    acc.total()
}

/// Pairwise tree sum: the deterministic reduction order used when
/// expectation sweeps are split across workers.
pub fn pairwise_sum(terms: &[f64]) -> f64 {
    match terms.len() {
        0 => 0.0,
        1 => terms[0],
        n => {
            let (lo, hi) = terms.split_at(n / 2);
            pairwise_sum(lo) + pairwise_sum(hi)
        }
    }
}

/// `log Σ e^{t}` over the given log-domain terms, skipping `−∞`.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let mut acc = KahanSum::new();
    for &t in terms {
        if t > f64::NEG_INFINITY {
            acc.add((t - m).exp());
        }
    }
    m + acc.total().ln()
}

/// `η(x, y) = −x log x + x y`, with `0 · log 0 = 0`.
///
/// # Panics
/// Panics if `x < 0`.
///
/// ```
/// use privamp::classical_info::eta;
/// assert_eq!(eta(0.0, 3.0), 0.0);
/// assert_eq!(eta(1.0, 3.0), 3.0);
/// assert!((eta(0.5, 2f64.ln()) - 2f64.ln()).abs() < 1e-15);
/// ```
pub fn eta(x: f64, y: f64) -> f64 {
    assert!(x >= 0.0, "eta requires x >= 0, got {x}");
    if x == 0.0 {
        0.0
    } else {
        -x * x.ln() + x * y
    }
}

/// A weighted finite alphabet (sub-distribution on one variable).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionJson", into = "DistributionJson")]
pub struct Distribution {
    alphabet: Vec<String>,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct DistributionJson {
    alphabet: Vec<String>,
    weights: Vec<f64>,
}

impl From<Distribution> for DistributionJson {
    fn from(d: Distribution) -> Self {
        DistributionJson {
            alphabet: d.alphabet,
            weights: d.weights,
        }
    }
}

impl TryFrom<DistributionJson> for Distribution {
    type Error = InfoError;
    fn try_from(j: DistributionJson) -> Result<Self, InfoError> {
        Distribution::new(j.alphabet, j.weights)
    }
}

impl Distribution {
    /// Validates labels (unique) and weights (nonnegative, finite).
    ///
    /// # Errors
    /// Returns [`InfoError::InvalidTable`] on shape or sign violations.
    pub fn new(alphabet: Vec<String>, weights: Vec<f64>) -> Result<Self, InfoError> {
        if alphabet.len() != weights.len() || alphabet.is_empty() {
            return Err(InfoError::InvalidTable(
                "alphabet and weights must have equal nonzero length".into(),
            ));
        }
        check_unique(&alphabet)?;
        for (l, &w) in alphabet.iter().zip(&weights) {
            if !w.is_finite() || w < 0.0 {
                return Err(InfoError::InvalidTable(format!(
                    "weight at '{l}' must be finite and nonnegative, got {w}"
                )));
            }
        }
        Ok(Distribution { alphabet, weights })
    }

    /// Uniform distribution over the given labels.
    pub fn uniform(alphabet: Vec<String>) -> Self {
        let n = alphabet.len();
        assert!(n > 0, "empty alphabet");
        Distribution {
            alphabet,
            weights: vec![1.0 / n as f64; n],
        }
    }

    /// Labels in stored order.
    pub fn labels(&self) -> &[String] {
        &self.alphabet
    }

    /// Weights in stored order.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Number of outcomes.
    pub fn len(&self) -> usize {
        self.alphabet.len()
    }

    /// True when the alphabet is empty (never for validated inputs).
    pub fn is_empty(&self) -> bool {
        self.alphabet.is_empty()
    }

    /// Total mass.
    pub fn mass(&self) -> f64 {
        kahan_sum(self.weights.iter().copied())
    }

    /// True when the mass is 1 within [`MASS_TOLERANCE`].
    pub fn is_normalized(&self) -> bool {
        (self.mass() - 1.0).abs() <= MASS_TOLERANCE
    }

    /// Copy rescaled to unit mass.
    ///
    /// # Errors
    /// Returns [`InfoError::DegenerateP`] on zero mass.
    pub fn normalize(&self) -> Result<Self, InfoError> {
        let mass = self.mass();
        if mass <= 0.0 {
            return Err(InfoError::DegenerateP);
        }
        Ok(Distribution {
            alphabet: self.alphabet.clone(),
            weights: self.weights.iter().map(|w| w / mass).collect(),
        })
    }
}

/// A joint sub-distribution `P^{A,E}` on labeled alphabets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "JointJson", into = "JointJson")]
pub struct JointSubDistribution {
    alphabet_a: Vec<String>,
    alphabet_e: Vec<String>,
    /// Row-major `|A| × |E|`.
    table: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct JointJson {
    alphabet_a: Vec<String>,
    alphabet_e: Vec<String>,
    table: Vec<f64>,
}

impl From<JointSubDistribution> for JointJson {
    fn from(p: JointSubDistribution) -> Self {
        JointJson {
            alphabet_a: p.alphabet_a,
            alphabet_e: p.alphabet_e,
            table: p.table,
        }
    }
}

impl TryFrom<JointJson> for JointSubDistribution {
    type Error = InfoError;
    fn try_from(j: JointJson) -> Result<Self, InfoError> {
        JointSubDistribution::new(j.alphabet_a, j.alphabet_e, j.table)
    }
}

/// One `(a, e, p)` entry of a joint table, the row format used by the
/// CSV/JSON interfaces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointRow {
    /// Label on `A`.
    pub a: String,
    /// Label on `E`.
    pub e: String,
    /// Mass of the cell.
    pub p: f64,
}

impl JointSubDistribution {
    /// Validates and wraps a row-major `|A| × |E|` table.
    ///
    /// # Errors
    /// Returns [`InfoError::InvalidTable`] on negative entries, total
    /// mass above `1 + 1e−12`, duplicate labels, or shape mismatch.
    pub fn new(
        alphabet_a: Vec<String>,
        alphabet_e: Vec<String>,
        table: Vec<f64>,
    ) -> Result<Self, InfoError> {
        if alphabet_a.is_empty() || alphabet_e.is_empty() {
            return Err(InfoError::InvalidTable("empty alphabet".into()));
        }
        if table.len() != alphabet_a.len() * alphabet_e.len() {
            return Err(InfoError::InvalidTable(format!(
                "table has {} entries, expected {}",
                table.len(),
                alphabet_a.len() * alphabet_e.len()
            )));
        }
        check_unique(&alphabet_a)?;
        check_unique(&alphabet_e)?;
        for &v in &table {
            if !v.is_finite() || v < 0.0 {
                return Err(InfoError::InvalidTable(format!(
                    "entries must be finite and nonnegative, got {v}"
                )));
            }
        }
        let p = JointSubDistribution {
            alphabet_a,
            alphabet_e,
            table,
        };
        if p.mass() > 1.0 + MASS_TOLERANCE {
            return Err(InfoError::InvalidTable(format!(
                "total mass {} exceeds 1",
                p.mass()
            )));
        }
        Ok(p)
    }

    /// Builds a joint table from sparse `(a, e, p)` rows; labels appear
    /// in first-occurrence order and omitted cells are zero.
    ///
    /// # Errors
    /// Returns [`InfoError::InvalidTable`] on duplicate `(a, e)` pairs
    /// or invalid masses.
    pub fn from_rows(rows: &[JointRow]) -> Result<Self, InfoError> {
        let mut alphabet_a: Vec<String> = Vec::new();
        let mut alphabet_e: Vec<String> = Vec::new();
        for r in rows {
            if !alphabet_a.contains(&r.a) {
                alphabet_a.push(r.a.clone());
            }
            if !alphabet_e.contains(&r.e) {
                alphabet_e.push(r.e.clone());
            }
        }
        let ne = alphabet_e.len();
        let mut table = vec![0.0; alphabet_a.len() * ne];
        let mut seen = vec![false; table.len()];
        for r in rows {
            let ia = alphabet_a.iter().position(|l| l == &r.a).expect("present");
            let ie = alphabet_e.iter().position(|l| l == &r.e).expect("present");
            if seen[ia * ne + ie] {
                return Err(InfoError::InvalidTable(format!(
                    "duplicate cell ({}, {})",
                    r.a, r.e
                )));
            }
            seen[ia * ne + ie] = true;
            table[ia * ne + ie] = r.p;
        }
        Self::new(alphabet_a, alphabet_e, table)
    }

    /// Dense row listing of the table.
    pub fn to_rows(&self) -> Vec<JointRow> {
        let mut rows = Vec::with_capacity(self.table.len());
        for (ia, a) in self.alphabet_a.iter().enumerate() {
            for (ie, e) in self.alphabet_e.iter().enumerate() {
                rows.push(JointRow {
                    a: a.clone(),
                    e: e.clone(),
                    p: self.get(ia, ie),
                });
            }
        }
        rows
    }

    /// Product sub-distribution `P^A × P^E`.
    pub fn product(pa: &Distribution, pe: &Distribution) -> Result<Self, InfoError> {
        let mut table = Vec::with_capacity(pa.len() * pe.len());
        for &wa in pa.weights() {
            for &we in pe.weights() {
                table.push(wa * we);
            }
        }
        Self::new(pa.labels().to_vec(), pe.labels().to_vec(), table)
    }

    /// Labels of `A`.
    pub fn a_labels(&self) -> &[String] {
        &self.alphabet_a
    }

    /// Labels of `E`.
    pub fn e_labels(&self) -> &[String] {
        &self.alphabet_e
    }

    /// `|A|`.
    pub fn a_len(&self) -> usize {
        self.alphabet_a.len()
    }

    /// `|E|`.
    pub fn e_len(&self) -> usize {
        self.alphabet_e.len()
    }

    /// Mass of the cell `(a, e)` by index.
    pub fn get(&self, a: usize, e: usize) -> f64 {
        self.table[a * self.alphabet_e.len() + e]
    }

    /// Row-major table.
    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// Total mass `Σ P(a, e)`.
    pub fn mass(&self) -> f64 {
        kahan_sum(self.table.iter().copied())
    }

    /// True when the mass is 1 within [`MASS_TOLERANCE`].
    pub fn is_normalized(&self) -> bool {
        (self.mass() - 1.0).abs() <= MASS_TOLERANCE
    }

    /// Marginal on `A`.
    pub fn marginal_a(&self) -> Distribution {
        let weights = (0..self.a_len())
            .map(|a| kahan_sum((0..self.e_len()).map(|e| self.get(a, e))))
            .collect();
        Distribution {
            alphabet: self.alphabet_a.clone(),
            weights,
        }
    }

    /// Marginal on `E`.
    pub fn marginal_e(&self) -> Distribution {
        let weights = (0..self.e_len())
            .map(|e| kahan_sum((0..self.a_len()).map(|a| self.get(a, e))))
            .collect();
        Distribution {
            alphabet: self.alphabet_e.clone(),
            weights,
        }
    }
}

fn check_unique(labels: &[String]) -> Result<(), InfoError> {
    let mut seen = std::collections::HashSet::new();
    for l in labels {
        if !seen.insert(l) {
            return Err(InfoError::InvalidTable(format!("duplicate label '{l}'")));
        }
    }
    Ok(())
}

/// `ψ(s|P‖Q) = log Σ_x P(x)^{1+s} Q(x)^{−s}` in the log domain.
///
/// Terms with `P(x) = 0` are dropped (the `0^{1+s} = 0` convention);
/// `ψ(0)` is the log of the total mass of `P`.
///
/// # Errors
/// Returns [`InfoError::SupportViolation`] when `Q(x) = 0` while
/// `P(x) > 0`.
///
/// # Panics
/// Panics when the alphabets differ.
pub fn psi(s: f64, p: &Distribution, q: &Distribution) -> Result<f64, InfoError> {
    assert_eq!(p.labels(), q.labels(), "alphabet mismatch");
    let mut terms = Vec::with_capacity(p.len());
    for i in 0..p.len() {
        let pw = p.weights()[i];
        if pw > 0.0 {
            let qw = q.weights()[i];
            if qw <= 0.0 {
                return Err(InfoError::SupportViolation {
                    label: p.labels()[i].clone(),
                });
            }
            terms.push((1.0 + s) * pw.ln() - s * qw.ln());
        }
    }
    Ok(log_sum_exp(&terms))
}

/// Relative entropy `D(P‖Q) = Σ P log(P/Q)` between sub-distributions
/// given as flat weight slices over the same outcome list.
///
/// # Errors
/// Returns [`InfoError::SupportViolation`] when `Q` vanishes on the
/// support of `P`.
fn relative_entropy_flat(
    p: &[f64],
    q: &[f64],
    label: impl Fn(usize) -> String,
) -> Result<f64, InfoError> {
    let mut acc = KahanSum::new();
    for i in 0..p.len() {
        if p[i] > 0.0 {
            if q[i] <= 0.0 {
                return Err(InfoError::SupportViolation { label: label(i) });
            }
            acc.add(p[i] * (p[i].ln() - q[i].ln()));
        }
    }
    Ok(acc.total())
}

/// Conditional Rényi entropy of order `1 + s` relative to `Q` on `E`:
///
/// ```text
/// H_{1+s}(A|E|P‖Q) = −(1/s) log Σ_{a,e} P(a,e)^{1+s} Q(e)^{−s},
/// ```
///
/// with the conditional Shannon value
/// `log|A| − D(P‖P_mix × Q)` at `s = 0` (its analytic limit for
/// normalized `P`).
///
/// # Errors
/// Returns [`InfoError::SupportViolation`] when `Q(e) = 0` while
/// `P(·, e)` carries mass.
///
/// # Panics
/// Panics when `Q` is not indexed by the `E` alphabet of `P`.
pub fn cond_renyi(
    s: f64,
    p: &JointSubDistribution,
    q: &Distribution,
) -> Result<f64, InfoError> {
    assert_eq!(p.e_labels(), q.labels(), "E alphabet mismatch");
    if s == 0.0 {
        let na = p.a_len() as f64;
        let reference: Vec<f64> = (0..p.a_len())
            .flat_map(|_| q.weights().iter().map(|&w| w / na).collect::<Vec<f64>>())
            .collect();
        let d = relative_entropy_flat(p.table(), &reference, |i| {
            p.e_labels()[i % p.e_len()].clone()
        })?;
        return Ok(na.ln() - d);
    }
    let mut terms = Vec::with_capacity(p.table().len());
    for a in 0..p.a_len() {
        for e in 0..p.e_len() {
            let pw = p.get(a, e);
            if pw > 0.0 {
                let qw = q.weights()[e];
                if qw <= 0.0 {
                    return Err(InfoError::SupportViolation {
                        label: p.e_labels()[e].clone(),
                    });
                }
                terms.push((1.0 + s) * pw.ln() - s * qw.ln());
            }
        }
    }
    Ok(-log_sum_exp(&terms) / s)
}

/// Conditional Rényi entropy with the `E` marginal of `P` itself as
/// the reference: `H_{1+s}(A|E|P) = H_{1+s}(A|E|P‖P^E)`.
///
/// # Errors
/// Propagates [`cond_renyi`] errors (impossible support violations
/// aside, this never fails for valid tables).
pub fn cond_renyi_self(s: f64, p: &JointSubDistribution) -> Result<f64, InfoError> {
    cond_renyi(s, p, &p.marginal_e())
}

/// `φ(s|A|E|P) = log Σ_e (Σ_a P(a,e)^{1/(1−s)})^{1−s}` for
/// `−1 ≤ s < 1`.
///
/// `φ(0)` is the log of the total mass, and `φ(s)/s → −H(A|E|P)` as
/// `s → 0` for normalized `P`.  Negative orders keep the same formula
/// (the inner exponent `1/(1−s)` then lies in `[1/2, 1)`) and drive the
/// reconciliation-error bounds, where the conditioned side plays the
/// role of the decoder's observation.
///
/// # Errors
/// Returns [`InfoError::DomainError`] outside `[−1, 1)`; the `s → 1`
/// limit is available separately as [`phi_at_one`].
pub fn phi(s: f64, p: &JointSubDistribution) -> Result<f64, InfoError> {
    if !(-1.0..1.0).contains(&s) {
        return Err(InfoError::DomainError(format!(
            "phi is defined on -1 <= s < 1, got {s}"
        )));
    }
    let inv = 1.0 / (1.0 - s);
    let mut outer = Vec::with_capacity(p.e_len());
    for e in 0..p.e_len() {
        let inner: Vec<f64> = (0..p.a_len())
            .filter_map(|a| {
                let pw = p.get(a, e);
                (pw > 0.0).then(|| inv * pw.ln())
            })
            .collect();
        let li = log_sum_exp(&inner);
        if li > f64::NEG_INFINITY {
            outer.push((1.0 - s) * li);
        }
    }
    Ok(log_sum_exp(&outer))
}

/// Continuity limit of `φ` at `s = 1`: `log Σ_e max_a P(a, e)`.
pub fn phi_at_one(p: &JointSubDistribution) -> f64 {
    let total = kahan_sum((0..p.e_len()).map(|e| {
        (0..p.a_len())
            .map(|a| p.get(a, e))
            .fold(0.0f64, f64::max)
    }));
    total.ln()
}

/// The four secrecy criteria of a normalized joint distribution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecrecyCriteria {
    /// `d₁′ = ‖P − P_mix × P^E‖₁` (universal composability).
    pub d1_prime: f64,
    /// `I′ = D(P‖P_mix × P^E) = I + D(P^A‖P_mix)`.
    pub i_prime: f64,
    /// `d₁ = ‖P − P^A × P^E‖₁`.
    pub d1: f64,
    /// Mutual information `I = D(P‖P^A × P^E)`.
    pub i: f64,
}

/// `d₁′ = ‖P − P_mix × P^E‖₁`, valid for sub-distributions too.
pub fn d1_prime(p: &JointSubDistribution) -> f64 {
    let pe = p.marginal_e();
    let na = p.a_len() as f64;
    kahan_sum((0..p.a_len()).flat_map(|a| {
        let pe = pe.clone();
        (0..p.e_len()).map(move |e| (p.get(a, e) - pe.weights()[e] / na).abs())
    }))
}

/// `d₁ = ‖P − P^A × P^E‖₁`, valid for sub-distributions too.
pub fn d1(p: &JointSubDistribution) -> f64 {
    let pa = p.marginal_a();
    let pe = p.marginal_e();
    kahan_sum((0..p.a_len()).flat_map(|a| {
        let pe = pe.clone();
        let wa = pa.weights()[a];
        (0..p.e_len()).map(move |e| (p.get(a, e) - wa * pe.weights()[e]).abs())
    }))
}

/// Computes all four secrecy criteria, cross-checking the Pinsker
/// (`d₁′² ≤ 2I′`, `d₁² ≤ 2I`) and Fannes (`I′ ≤ η(d₁′, log|A|)`,
/// `I ≤ η(d₁, log|E|)`) inequalities in debug builds.
///
/// # Errors
/// Returns [`InfoError::NotNormalized`] unless `P` has unit mass (the
/// divergence criteria are calibrated for normalized inputs).
pub fn secrecy_criteria(p: &JointSubDistribution) -> Result<SecrecyCriteria, InfoError> {
    let mass = p.mass();
    if (mass - 1.0).abs() > MASS_TOLERANCE {
        return Err(InfoError::NotNormalized { mass });
    }
    let pe = p.marginal_e();
    let pa = p.marginal_a();
    let na = p.a_len() as f64;
    let mix_ref: Vec<f64> = (0..p.a_len())
        .flat_map(|_| pe.weights().iter().map(|&w| w / na).collect::<Vec<f64>>())
        .collect();
    let prod_ref: Vec<f64> = (0..p.a_len())
        .flat_map(|a| {
            let wa = pa.weights()[a];
            pe.weights().iter().map(move |&w| wa * w)
        })
        .collect();
    let i_prime = relative_entropy_flat(p.table(), &mix_ref, |i| {
        p.e_labels()[i % p.e_len()].clone()
    })?;
    let i = relative_entropy_flat(p.table(), &prod_ref, |i| {
        p.e_labels()[i % p.e_len()].clone()
    })?;
    let out = SecrecyCriteria {
        d1_prime: d1_prime(p),
        i_prime,
        d1: d1(p),
        i,
    };
    debug_assert!(
        out.d1_prime.powi(2) <= 2.0 * out.i_prime + 1e-9,
        "Pinsker violated: {} > 2 * {}",
        out.d1_prime.powi(2),
        out.i_prime
    );
    debug_assert!(
        out.d1.powi(2) <= 2.0 * out.i + 1e-9,
        "Pinsker (plain) violated"
    );
    debug_assert!(
        out.i_prime <= eta(out.d1_prime, (p.a_len() as f64).ln()) + 1e-9
            || out.d1_prime == 0.0,
        "Fannes violated: {} > eta({}, log|A|)",
        out.i_prime,
        out.d1_prime
    );
    debug_assert!(
        out.i <= eta(out.d1, (p.e_len() as f64).ln()) + 1e-9 || out.d1 == 0.0,
        "Fannes (plain) violated"
    );
    Ok(out)
}

/// Pushforward `P^{f(A),E}(b, e) = Σ_{a ∈ f⁻¹(b)} P(a, e)` under an
/// index map (`map[a] = b`).
///
/// Mass is preserved exactly; in debug builds, for normalized inputs,
/// the data-processing direction `H(f(A)|E) ≤ H(A|E)` is asserted.
///
/// # Panics
/// Panics when `map` is not a total function into `alphabet_b`.
pub fn apply_hash_indices(
    p: &JointSubDistribution,
    map: &[usize],
    alphabet_b: Vec<String>,
) -> JointSubDistribution {
    assert_eq!(map.len(), p.a_len(), "map must cover the A alphabet");
    let nb = alphabet_b.len();
    assert!(
        map.iter().all(|&b| b < nb),
        "map image must lie in the output alphabet"
    );
    let mut table = vec![0.0; nb * p.e_len()];
    let mut comps = vec![0.0; nb * p.e_len()];
    for (a, &b) in map.iter().enumerate() {
        for e in 0..p.e_len() {
            // Kahan step per output cell.
            let idx = b * p.e_len() + e;
            let y = p.get(a, e) - comps[idx];
            let t = table[idx] + y;
            comps[idx] = (t - table[idx]) - y;
            table[idx] = t;
        }
    }
    let out = JointSubDistribution {
        alphabet_a: alphabet_b,
        alphabet_e: p.e_labels().to_vec(),
        table,
    };
    #[cfg(debug_assertions)]
    {
        if p.is_normalized() {
            let before = cond_renyi_self(0.0, p).expect("self reference is supported");
            let after = cond_renyi_self(0.0, &out).expect("self reference is supported");
            debug_assert!(
                after <= before + 1e-9,
                "hashing increased conditional entropy: {after} > {before}"
            );
        }
    }
    out
}

/// Canonical labels for the vector alphabet `F_q^n` in enumeration
/// order: digit strings for `q ≤ 10`, dot-separated codes otherwise.
pub fn vector_alphabet(spec: &FieldSpec, n: usize) -> Vec<String> {
    let q = spec.q() as u128;
    let count = q.pow(n as u32);
    (0..count)
        .map(|i| {
            let v = FieldVector::from_index(spec.clone(), n, i);
            vector_label(&v)
        })
        .collect()
}

/// Label of a single vector, consistent with [`vector_alphabet`].
pub fn vector_label(v: &FieldVector) -> String {
    if v.spec().q() <= 10 {
        v.elems().iter().map(|e| e.to_string()).collect()
    } else {
        v.elems()
            .iter()
            .map(|e| e.to_string())
            .collect::<Vec<_>>()
            .join(".")
    }
}

/// Pushforward under a linear hash given as a matrix; the `A` alphabet
/// must be the canonical vector alphabet of `F_q^n`.
///
/// # Errors
/// Returns [`InfoError::NonGroupAlphabet`] when the alphabet does not
/// match the canonical enumeration of `F_q^n`.
pub fn apply_hash_matrix(
    p: &JointSubDistribution,
    f: &FieldMatrix,
) -> Result<JointSubDistribution, InfoError> {
    let spec = f.spec();
    let n = f.cols();
    require_vector_alphabet(p, spec, n)?;
    let map: Vec<usize> = (0..p.a_len())
        .map(|i| {
            let x = FieldVector::from_index(spec.clone(), n, i as u128);
            f.mul_vec(&x).to_index() as usize
        })
        .collect();
    Ok(apply_hash_indices(p, &map, vector_alphabet(spec, f.rows())))
}

fn require_vector_alphabet(
    p: &JointSubDistribution,
    spec: &FieldSpec,
    n: usize,
) -> Result<(), InfoError> {
    let expected = (spec.q() as u128).pow(n as u32);
    if p.a_len() as u128 != expected {
        return Err(InfoError::NonGroupAlphabet(format!(
            "|A| = {} but F_{}^{} has {} elements",
            p.a_len(),
            spec.q(),
            n,
            expected
        )));
    }
    let labels = vector_alphabet(spec, n);
    if labels != p.a_labels() {
        return Err(InfoError::NonGroupAlphabet(
            "A labels are not the canonical vector enumeration".into(),
        ));
    }
    Ok(())
}

/// Convolution with a random shift on `A = F_q^n`:
/// `(P * W)(a, e) = Σ_w W(w) P(a − w, e)`.
///
/// # Errors
/// Returns [`InfoError::NonGroupAlphabet`] when the `A` alphabet is
/// not the canonical vector alphabet, or when `W` is not indexed by
/// the same alphabet.
pub fn convolve(
    p: &JointSubDistribution,
    w: &Distribution,
    spec: &FieldSpec,
) -> Result<JointSubDistribution, InfoError> {
    let q = spec.q() as u128;
    let mut n = 0usize;
    let mut count = 1u128;
    while count < p.a_len() as u128 {
        count *= q;
        n += 1;
    }
    require_vector_alphabet(p, spec, n)?;
    if w.labels() != p.a_labels() {
        return Err(InfoError::NonGroupAlphabet(
            "shift distribution must live on the same vector alphabet".into(),
        ));
    }
    let vectors: Vec<FieldVector> = (0..p.a_len())
        .map(|i| FieldVector::from_index(spec.clone(), n, i as u128))
        .collect();
    let mut table = vec![0.0; p.a_len() * p.e_len()];
    for a in 0..p.a_len() {
        for (wi, &ww) in w.weights().iter().enumerate() {
            if ww == 0.0 {
                continue;
            }
            let shifted = vectors[a].sub(&vectors[wi]).to_index() as usize;
            for e in 0..p.e_len() {
                table[a * p.e_len() + e] += ww * p.get(shifted, e);
            }
        }
    }
    JointSubDistribution::new(p.a_labels().to_vec(), p.e_labels().to_vec(), table)
}

/// Post-processes the side information by a column-stochastic kernel
/// `kernel[e'][e] = W(e'|e)`.
///
/// # Errors
/// Returns [`InfoError::InvalidTable`] when the kernel shape is wrong
/// or a column does not sum to one.
pub fn apply_channel_e(
    p: &JointSubDistribution,
    kernel: &[Vec<f64>],
    alphabet_e_new: Vec<String>,
) -> Result<JointSubDistribution, InfoError> {
    validate_kernel(kernel, p.e_len(), alphabet_e_new.len())?;
    let ne = alphabet_e_new.len();
    let mut table = vec![0.0; p.a_len() * ne];
    for a in 0..p.a_len() {
        for (enew, row) in kernel.iter().enumerate() {
            table[a * ne + enew] =
                kahan_sum((0..p.e_len()).map(|e| row[e] * p.get(a, e)));
        }
    }
    JointSubDistribution::new(p.a_labels().to_vec(), alphabet_e_new, table)
}

/// Applies the same kind of kernel to a bare distribution on `E`.
///
/// # Errors
/// Returns [`InfoError::InvalidTable`] on shape or stochasticity
/// violations.
pub fn apply_channel_dist(
    q: &Distribution,
    kernel: &[Vec<f64>],
    alphabet_e_new: Vec<String>,
) -> Result<Distribution, InfoError> {
    validate_kernel(kernel, q.len(), alphabet_e_new.len())?;
    let weights = kernel
        .iter()
        .map(|row| kahan_sum((0..q.len()).map(|e| row[e] * q.weights()[e])))
        .collect();
    Distribution::new(alphabet_e_new, weights)
}

fn validate_kernel(kernel: &[Vec<f64>], ncols: usize, nrows: usize) -> Result<(), InfoError> {
    if kernel.len() != nrows || kernel.iter().any(|r| r.len() != ncols) {
        return Err(InfoError::InvalidTable(
            "kernel shape must be |E'| x |E|".into(),
        ));
    }
    for e in 0..ncols {
        let col = kahan_sum(kernel.iter().map(|r| r[e]));
        if (col - 1.0).abs() > 1e-9 || kernel.iter().any(|r| r[e] < 0.0) {
            return Err(InfoError::InvalidTable(format!(
                "kernel column {e} is not a distribution (sum {col})"
            )));
        }
    }
    Ok(())
}

/// The reference distribution maximizing `s · H_{1+s}(A|E|P‖Q)` over
/// normalized `Q`:
///
/// ```text
/// Q*(e) ∝ (Σ_a P(a,e)^{1+s})^{1/(1+s)},
/// ```
///
/// which attains `s · H_{1+s}(A|E|P‖Q*) = −(1+s) · φ(s/(1+s)|A|E|P)`.
///
/// # Errors
/// Returns [`InfoError::DomainError`] for `s ≤ 0` and
/// [`InfoError::DegenerateP`] for zero-mass input.
pub fn optimal_qe(s: f64, p: &JointSubDistribution) -> Result<Distribution, InfoError> {
    if s <= 0.0 {
        return Err(InfoError::DomainError(format!(
            "the maximizing reference requires s > 0, got {s}"
        )));
    }
    let log_w: Vec<f64> = (0..p.e_len())
        .map(|e| {
            let inner: Vec<f64> = (0..p.a_len())
                .filter_map(|a| {
                    let pw = p.get(a, e);
                    (pw > 0.0).then(|| (1.0 + s) * pw.ln())
                })
                .collect();
            log_sum_exp(&inner) / (1.0 + s)
        })
        .collect();
    let total = log_sum_exp(&log_w);
    if total == f64::NEG_INFINITY {
        return Err(InfoError::DegenerateP);
    }
    Distribution::new(
        p.e_labels().to_vec(),
        log_w.iter().map(|&lw| (lw - total).exp()).collect(),
    )
}

/// Conditional L₂ distance from uniform,
/// `d₂(A:E|P‖Q) = Σ_{a,e} (P(a,e) − P^E(e)/|A|)² / Q(e)`.
///
/// Both the direct quadratic sum and the entropy-form expansion
/// `e^{−H₂(A|E|P‖Q)} − (1/|A|) e^{ψ(1|P^E‖Q)}` are evaluated; the call
/// fails loudly if they disagree beyond 1e−10, so the two routes stay
/// honest against each other.
///
/// # Errors
/// Returns [`InfoError::SupportViolation`] when `Q(e) = 0` on a column
/// carrying mass.
///
/// # Panics
/// Panics when `Q` is not indexed by the `E` alphabet, or on internal
/// disagreement of the two routes.
pub fn d2_conditional(
    p: &JointSubDistribution,
    q: &Distribution,
) -> Result<f64, InfoError> {
    assert_eq!(p.e_labels(), q.labels(), "E alphabet mismatch");
    let pe = p.marginal_e();
    let na = p.a_len() as f64;
    let mut direct = KahanSum::new();
    for e in 0..p.e_len() {
        let qw = q.weights()[e];
        if qw <= 0.0 {
            let col_mass = (0..p.a_len()).any(|a| p.get(a, e) > 0.0);
            if col_mass || pe.weights()[e] > 0.0 {
                return Err(InfoError::SupportViolation {
                    label: p.e_labels()[e].clone(),
                });
            }
            continue;
        }
        for a in 0..p.a_len() {
            let dev = p.get(a, e) - pe.weights()[e] / na;
            direct.add(dev * dev / qw);
        }
    }
    // Expansion route: e^{-H_2(A|E|P||Q)} - (1/|A|) e^{psi(1|P^E||Q)}.
    let mut collision = KahanSum::new();
    let mut marg = KahanSum::new();
    for e in 0..p.e_len() {
        let qw = q.weights()[e];
        if qw <= 0.0 {
            continue;
        }
        for a in 0..p.a_len() {
            let pw = p.get(a, e);
            collision.add(pw * pw / qw);
        }
        marg.add(pe.weights()[e] * pe.weights()[e] / qw);
    }
    let expansion = collision.total() - marg.total() / na;
    let direct = direct.total();
    assert!(
        (direct - expansion).abs() <= 1e-10 * direct.abs().max(1.0),
        "d2 routes disagree: direct {direct} vs expansion {expansion}"
    );
    Ok(direct)
}
