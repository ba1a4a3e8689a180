//! Ensembles of linear hash functions `f: F_q^n -> F_q^m` and their
//! universality certificates.
//!
//! A family `{f_X}` indexed by a uniform random variable `X` is
//! *ε-almost universal₂* when every pair of distinct inputs collides with
//! probability at most `ε / q^m`:
//!
//! ```text
//!     Pr_X[ f_X(a₁) = f_X(a₂) ] ≤ ε / |B|,      a₁ ≠ a₂,  |B| = q^m.
//! ```
//!
//! For linear families the collision event depends only on the difference
//! `d = a₁ − a₂`, so the certificate reduces to
//! `ε = |B| · max_{d ≠ 0} Pr_X[ f_X(d) = 0 ]`.  No family can beat the
//! floor `ε ≥ (|A| − |B|) / (|A| − 1)`, which is why `ε = 1` families are
//! simply called universal₂.
//!
//! Each linear member also determines a code pair: the kernel
//! `C_X = ker f_X` (dimension at least `n − m`) and its dual
//! `C_X^⊥ = rowspace(f_X)`.  The family is *ε-almost dual universal₂*
//! when the dual code ensemble `{C_X^⊥}` is ε-almost universal₂ in the
//! code sense, i.e. `Pr_X[x ∈ C_X^⊥] ≤ q^{t−n} ε` for every `x ≠ 0`,
//! where `t` is the maximal dual dimension.  Dual universality is the
//! property that drives leaked-information bounds, and every universal₂
//! linear family over `F_q` is automatically `q`-almost dual universal₂.
//!
//! Concrete constructions provided here:
//!
//! * [`FamilyKind::Toeplitz`] — `m × n` Toeplitz matrices, `q^{n+m−1}`
//!   members, universal₂ with `ε = 1`.
//! * [`FamilyKind::ModifiedToeplitz`] — `(X, I)` with a Toeplitz block
//!   `X` of shape `m × (n−m)` and the identity on the last `m` columns;
//!   only `q^{n−1}` members, simultaneously universal₂ and dual
//!   universal₂ with `ε = 1` because every member has full rank.
//! * [`FamilyKind::FieldMultiplication`] — multiplication by a random
//!   element of `F_{q^n}` followed by truncation to the first `m`
//!   coordinates; `q^n` members.
//! * [`FamilyKind::RandomLinear`] — all `q^{nm}` matrices.
//! * [`FamilyKind::ExplicitList`] — matrices given verbatim.
//! * [`FamilyKind::PermutedCodeQuotient`] — the quotient maps
//!   `F_q^n -> F_q^n / σ(C)` for all coordinate permutations `σ ∈ S_n`
//!   of a fixed code `C`; its ε has a closed form by type counting, see
//!   [`permuted_ensemble_epsilon`].
//!
//! Certification is exhaustive whenever the work estimate
//! `family_size × q^n` stays within [`EXHAUSTIVE_BUDGET`]; otherwise a
//! seeded Monte-Carlo pass reports a point estimate together with a 99%
//! Hoeffding confidence radius.  Exhaustive results are exact rationals
//! and are reported as such.
//!
//! Finally, [`code_to_biased_delta`] converts an ensemble of codes into
//! a δ-biased ensemble of random vectors: drawing `W` uniformly from a
//! random code `C_X` gives `E_X (E_W (−1)^{x·W})² = Pr_X[x ∈ C_X^⊥]`,
//! so an `m`-dimensional ε-almost dual universal₂ ensemble is
//! `√(ε 2^{−m})`-biased.

use crate::finite_field::{
    find_irreducible, poly_mul, poly_rem, Elem, FieldMatrix, FieldSpec, FieldVector,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rustfft::{num_complex::Complex64, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Work ceiling (`family_size × q^n`) for exhaustive certification.
pub const EXHAUSTIVE_BUDGET: u128 = 1 << 26;

/// Members drawn by a Monte-Carlo certification pass.
pub const MONTE_CARLO_SAMPLES: u64 = 1024;

/// Input size above which [`toeplitz_apply`] switches to the FFT path
/// (binary fields only).
pub const TOEPLITZ_FFT_THRESHOLD: usize = 1 << 10;

/// Errors produced by family construction and certification.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum HashError {
    /// Member index is `>= family_size`.
    #[error("member index {index} is outside a family of size {size}")]
    IndexOutOfFamily {
        /// Requested index.
        index: u128,
        /// Number of members in the family.
        size: u128,
    },
    /// The requested computation exceeds the exhaustive *and* the
    /// Monte-Carlo work ceiling.
    #[error("work estimate {work} exceeds budget {budget}")]
    BudgetExceeded {
        /// Estimated number of elementary operations.
        work: u128,
        /// Permitted ceiling.
        budget: u128,
    },
    /// Operation is defined for linear families only.
    #[error("family is not linear")]
    NonlinearFamily,
    /// Bias conversion over the plain sign character requires `F_2`.
    #[error("operation requires a binary field (use the character-generalized variant for odd q)")]
    NonBinaryField,
    /// Malformed family description.
    #[error("invalid family: {0}")]
    InvalidFamily(String),
}

/// Exact non-negative rational, kept reduced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rational {
    /// Numerator.
    pub num: u128,
    /// Denominator (positive).
    pub den: u128,
}

impl Rational {
    /// Builds `num/den` reduced to lowest terms.
    ///
    /// # Panics
    /// Panics if `den == 0`.
    pub fn new(num: u128, den: u128) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd_u128(num, den);
        if g == 0 {
            return Rational { num: 0, den: 1 };
        }
        Rational {
            num: num / g,
            den: den / g,
        }
    }

    /// Real rendering of the rational.
    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd_u128(a: u128, b: u128) -> u128 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// How a certificate was computed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CertificationMethod {
    /// Every member was enumerated; the reported value is exact.
    Exhaustive,
    /// Members were sampled; the reported value is an estimate with a
    /// two-sided 99% Hoeffding radius on the probability scale.
    MonteCarlo {
        /// Number of sampled members.
        samples: u64,
        /// Seed of the sampling stream.
        seed: u64,
    },
}

/// Certificate for the universality parameters of a family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniversalityReport {
    /// `ε` such that the family is ε-almost universal₂ (collision
    /// certificates only).
    pub epsilon_universal: Option<Rational>,
    /// `ε` such that the family is ε-almost dual universal₂ (dual
    /// certificates only).
    pub epsilon_dual: Option<Rational>,
    /// Real rendering of whichever ε the certificate carries.
    pub epsilon_real: f64,
    /// 99% confidence radius on ε for Monte-Carlo certificates.
    pub confidence_radius: Option<f64>,
    /// How the certificate was obtained.
    pub method: CertificationMethod,
    /// Nonzero vector attaining the maximum (ties resolved to the first
    /// vector in enumeration order).
    pub worst_witness: FieldVector,
}

/// Construction rule of a hash family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyKind {
    /// All `m × n` Toeplitz matrices.
    Toeplitz,
    /// `(X, I)`: Toeplitz block on the first `n − m` columns, identity
    /// on the last `m` columns.
    ModifiedToeplitz,
    /// `x ↦ c · x` in `F_{q^n}` truncated to the first `m` coordinates,
    /// over all `c ∈ F_{q^n}`.
    FieldMultiplication,
    /// All `m × n` matrices.
    RandomLinear,
    /// Matrices given verbatim.
    ExplicitList {
        /// The members, in enumeration order.
        members: Vec<FieldMatrix>,
    },
    /// Quotient maps `F_q^n → F_q^n / σ(C)` over all `σ ∈ S_n`, for the
    /// code `C` spanned by `basis`.
    PermutedCodeQuotient {
        /// Basis of the fixed code `C` (independent rows).
        basis: Vec<FieldVector>,
    },
}

/// A finite, enumerable family of linear hash functions
/// `F_q^n → F_q^m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HashFamily {
    /// Construction rule.
    pub kind: FamilyKind,
    /// Base field.
    pub spec: FieldSpec,
    /// Input length.
    pub n: usize,
    /// Output length (`m ≤ n`).
    pub m: usize,
    /// Seed for randomized member draws and Monte-Carlo certification.
    pub seed: u64,
}

impl HashFamily {
    /// Validates and builds a family description.
    ///
    /// # Errors
    /// Returns [`HashError::InvalidFamily`] when `m > n`, when explicit
    /// members have the wrong shape or field, or when a quotient basis
    /// is dependent or inconsistent with `m = n − dim C`.
    pub fn new(
        kind: FamilyKind,
        spec: FieldSpec,
        n: usize,
        m: usize,
        seed: u64,
    ) -> Result<Self, HashError> {
        if m > n || n == 0 || m == 0 {
            return Err(HashError::InvalidFamily(format!(
                "output length m = {m} must satisfy 1 <= m <= n = {n} (and n > 0)"
            )));
        }
        match &kind {
            FamilyKind::ExplicitList { members } => {
                if members.is_empty() {
                    return Err(HashError::InvalidFamily(
                        "explicit list must contain at least one member".into(),
                    ));
                }
                for mat in members {
                    if mat.rows() != m || mat.cols() != n || mat.spec() != &spec {
                        return Err(HashError::InvalidFamily(
                            "explicit member has mismatched shape or field".into(),
                        ));
                    }
                }
            }
            FamilyKind::PermutedCodeQuotient { basis } => {
                if basis.is_empty() {
                    return Err(HashError::InvalidFamily(
                        "quotient code basis must be nonempty".into(),
                    ));
                }
                for b in basis {
                    if b.len() != n || b.spec() != &spec {
                        return Err(HashError::InvalidFamily(
                            "quotient basis vector has mismatched length or field".into(),
                        ));
                    }
                }
                let gen = FieldMatrix::from_rows(basis);
                let t = gen.rank();
                if t != basis.len() {
                    return Err(HashError::InvalidFamily(
                        "quotient code basis must be linearly independent".into(),
                    ));
                }
                if m != n - t {
                    return Err(HashError::InvalidFamily(format!(
                        "quotient of a dimension-{t} code in F_q^{n} hashes onto m = {} symbols",
                        n - t
                    )));
                }
            }
            _ => {}
        }
        Ok(HashFamily {
            kind,
            spec,
            n,
            m,
            seed,
        })
    }

    /// Size of the output alphabet, `|B| = q^m`.
    pub fn output_cardinality(&self) -> u128 {
        (self.spec.q() as u128).pow(self.m as u32)
    }

    /// Number of members of the family.
    ///
    /// # Panics
    /// Panics if the size overflows `u128` (unreachable at the
    /// supported `q ≤ 2^16`, `n ≤ 64` scale for all kinds except
    /// degenerate `RandomLinear` shapes, which are rejected instead).
    pub fn family_size(&self) -> u128 {
        let q = self.spec.q() as u128;
        let pow = |e: usize| -> u128 {
            q.checked_pow(e as u32)
                .expect("family size overflows u128")
        };
        match &self.kind {
            FamilyKind::Toeplitz => pow(self.n + self.m - 1),
            FamilyKind::ModifiedToeplitz => pow(self.n - 1),
            FamilyKind::FieldMultiplication => pow(self.n),
            FamilyKind::RandomLinear => pow(self.n * self.m),
            FamilyKind::ExplicitList { members } => members.len() as u128,
            FamilyKind::PermutedCodeQuotient { .. } => factorial(self.n),
        }
    }

    /// Returns the member at `index` under the canonical enumeration.
    ///
    /// The enumeration writes `index` in base `q`, least significant
    /// digit first, over the defining entries of the construction:
    /// Toeplitz diagonals ordered first row left-to-right then first
    /// column downward, matrix entries in row-major order, or
    /// multiplier coefficients lowest degree first.  Permutations are
    /// unranked in lexicographic order.
    ///
    /// # Errors
    /// Returns [`HashError::IndexOutOfFamily`] when
    /// `index >= family_size()`.
    pub fn member(&self, index: u128) -> Result<FieldMatrix, HashError> {
        let size = self.family_size();
        if index >= size {
            return Err(HashError::IndexOutOfFamily { index, size });
        }
        let q = self.spec.q() as u128;
        Ok(match &self.kind {
            FamilyKind::Toeplitz => {
                let params = digits(index, q, self.n + self.m - 1);
                toeplitz_matrix(&self.spec, self.m, self.n, &params)
            }
            FamilyKind::ModifiedToeplitz => {
                let d = self.n - self.m;
                let params = digits(index, q, self.n - 1);
                let mut rows = Vec::with_capacity(self.m);
                for i in 0..self.m {
                    let mut row = vec![0 as Elem; self.n];
                    for (j, slot) in row.iter_mut().enumerate().take(d) {
                        // Diagonal index j - i, stored as row part
                        // (0..d) then column part (d..d+m-1).
                        let l = j as isize - i as isize;
                        let p = if l >= 0 { l as usize } else { d - 1 + (-l) as usize };
                        *slot = params[p];
                    }
                    row[d + i] = 1;
                    rows.push(FieldVector::new(self.spec.clone(), row));
                }
                FieldMatrix::from_rows(&rows)
            }
            FamilyKind::FieldMultiplication => {
                let c = digits(index, q, self.n);
                multiplication_matrix(&self.spec, self.n, self.m, &c)
            }
            FamilyKind::RandomLinear => {
                let params = digits(index, q, self.n * self.m);
                FieldMatrix::new(self.spec.clone(), self.m, self.n, params)
            }
            FamilyKind::ExplicitList { members } => members[index as usize].clone(),
            FamilyKind::PermutedCodeQuotient { basis } => {
                let sigma = unrank_permutation(self.n, index);
                let permuted: Vec<FieldVector> = basis
                    .iter()
                    .map(|b| {
                        let mut elems = vec![0 as Elem; self.n];
                        for (i, &v) in b.elems().iter().enumerate() {
                            elems[sigma[i]] = v;
                        }
                        FieldVector::new(self.spec.clone(), elems)
                    })
                    .collect();
                let gen = FieldMatrix::from_rows(&permuted);
                let dual = crate::finite_field::kernel_basis(&gen);
                FieldMatrix::from_rows(&dual)
            }
        })
    }

    /// Draws a member pseudo-randomly; draw `i` of a family with seed
    /// `s` is the same matrix on every run.
    pub fn sample(&self, draw: u64) -> FieldMatrix {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(draw);
        let size = self.family_size();
        let index = rng.gen_range(0..size);
        self.member(index).expect("index drawn within family size")
    }

    /// Iterates over all members in enumeration order.
    pub fn members(&self) -> impl Iterator<Item = FieldMatrix> + '_ {
        (0..self.family_size()).map(move |i| self.member(i).expect("index within size"))
    }

    /// Certifies `ε` such that the family is ε-almost universal₂.
    ///
    /// Linear members collide on `a₁ ≠ a₂` exactly when the difference
    /// `d = a₁ − a₂` lies in the kernel, so the certificate computes
    /// `ε = q^m · max_{d ≠ 0} Pr_X[f_X(d) = 0]`, reporting the maximal
    /// collision probability scaled by the output cardinality together
    /// with the witness `d`.  Exhaustive whenever
    /// `family_size · q^n ≤ 2^26`, Monte-Carlo with
    /// [`MONTE_CARLO_SAMPLES`] member draws otherwise.
    ///
    /// # Errors
    /// Returns [`HashError::BudgetExceeded`] when even the Monte-Carlo
    /// pass would exceed the work ceiling.
    pub fn collision_epsilon(&self) -> Result<UniversalityReport, HashError> {
        self.certify(CertTarget::Collision)
    }

    /// Certifies `ε` such that the family is ε-almost dual universal₂.
    ///
    /// The dual code of a member is the row space of its matrix, so the
    /// certificate computes `max_{x ≠ 0} Pr_X[x ∈ rowspace(f_X)]` and
    /// normalizes by `q^{t−n}` with `t` the maximal member rank.
    ///
    /// # Errors
    /// Returns [`HashError::BudgetExceeded`] as for
    /// [`HashFamily::collision_epsilon`].
    pub fn dual_epsilon(&self) -> Result<UniversalityReport, HashError> {
        self.certify(CertTarget::Dual)
    }

    fn certify(&self, target: CertTarget) -> Result<UniversalityReport, HashError> {
        let q = self.spec.q() as u128;
        let vectors = q
            .checked_pow(self.n as u32)
            .ok_or(HashError::BudgetExceeded {
                work: u128::MAX,
                budget: EXHAUSTIVE_BUDGET,
            })?;
        let size = self.family_size();
        let exhaustive_work = size.saturating_mul(vectors);
        if exhaustive_work <= EXHAUSTIVE_BUDGET {
            let indices: Vec<u128> = (0..size).collect();
            let (max_count, witness, t_max) = self.tally(&indices, target)?;
            let scale = match target {
                CertTarget::Collision => self.output_cardinality(),
                CertTarget::Dual => q.pow((self.n - t_max) as u32),
            };
            let eps = Rational::new(max_count as u128 * scale, size);
            return Ok(UniversalityReport {
                epsilon_universal: matches!(target, CertTarget::Collision).then_some(eps),
                epsilon_dual: matches!(target, CertTarget::Dual).then_some(eps),
                epsilon_real: eps.to_f64(),
                confidence_radius: None,
                method: CertificationMethod::Exhaustive,
                worst_witness: witness,
            });
        }
        let mc_work = vectors.saturating_mul(MONTE_CARLO_SAMPLES as u128);
        if mc_work > EXHAUSTIVE_BUDGET {
            return Err(HashError::BudgetExceeded {
                work: mc_work.min(exhaustive_work),
                budget: EXHAUSTIVE_BUDGET,
            });
        }
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        let indices: Vec<u128> = (0..MONTE_CARLO_SAMPLES)
            .map(|_| rng.gen_range(0..size))
            .collect();
        let (max_count, witness, t_max) = self.tally(&indices, target)?;
        let samples = indices.len() as u128;
        let scale = match target {
            CertTarget::Collision => self.output_cardinality(),
            CertTarget::Dual => q.pow((self.n - t_max) as u32),
        };
        let eps = Rational::new(max_count as u128 * scale, samples);
        // Two-sided Hoeffding bound at 99% on the per-vector collision
        // probability, scaled like ε.
        let radius =
            (f64::ln(2.0 / 0.01) / (2.0 * samples as f64)).sqrt() * scale as f64;
        Ok(UniversalityReport {
            epsilon_universal: matches!(target, CertTarget::Collision).then_some(eps),
            epsilon_dual: matches!(target, CertTarget::Dual).then_some(eps),
            epsilon_real: eps.to_f64(),
            confidence_radius: Some(radius),
            method: CertificationMethod::MonteCarlo {
                samples: MONTE_CARLO_SAMPLES,
                seed: self.seed,
            },
            worst_witness: witness,
        })
    }

    /// Counts, for every nonzero vector, how many of the given members
    /// hit the target event, and returns the maximal count, the first
    /// witness attaining it and the maximal member rank.
    fn tally(
        &self,
        indices: &[u128],
        target: CertTarget,
    ) -> Result<(u64, FieldVector, usize), HashError> {
        let q = self.spec.q() as u128;
        let vectors = q.pow(self.n as u32);
        let mut counts = vec![0u64; vectors as usize];
        let mut t_max = 0usize;
        for &idx in indices {
            let mat = self.member(idx)?;
            match target {
                CertTarget::Collision => {
                    for (v, slot) in counts.iter_mut().enumerate().skip(1) {
                        let x = FieldVector::from_index(self.spec.clone(), self.n, v as u128);
                        if mat.mul_vec(&x).is_zero() {
                            *slot += 1;
                        }
                    }
                }
                CertTarget::Dual => {
                    let (rref, pivots) = mat.rref();
                    t_max = t_max.max(pivots.len());
                    let rows: Vec<FieldVector> =
                        (0..pivots.len()).map(|r| rref.row(r)).collect();
                    for (v, slot) in counts.iter_mut().enumerate().skip(1) {
                        let x = FieldVector::from_index(self.spec.clone(), self.n, v as u128);
                        if in_row_space(&rows, &pivots, &x) {
                            *slot += 1;
                        }
                    }
                }
            }
        }
        let (argmax, &max_count) = counts
            .iter()
            .enumerate()
            .skip(1)
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .expect("at least one nonzero vector");
        Ok((
            max_count,
            FieldVector::from_index(self.spec.clone(), self.n, argmax as u128),
            t_max,
        ))
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum CertTarget {
    Collision,
    Dual,
}

/// Tests membership of `x` in the span of reduced-echelon `rows` with
/// the given pivot columns, by elimination.
fn in_row_space(rows: &[FieldVector], pivots: &[usize], x: &FieldVector) -> bool {
    let mut rem = x.clone();
    for (row, &p) in rows.iter().zip(pivots) {
        let c = rem.elems()[p];
        if c != 0 {
            rem = rem.sub(&row.scale(c));
        }
    }
    rem.is_zero()
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

fn digits(mut index: u128, q: u128, len: usize) -> Vec<Elem> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push((index % q) as Elem);
        index /= q;
    }
    out
}

/// Lexicographic unranking of a permutation of `{0, …, n−1}`.
fn unrank_permutation(n: usize, mut rank: u128) -> Vec<usize> {
    let mut avail: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(n);
    for i in (0..n).rev() {
        let f = factorial(i);
        let d = (rank / f) as usize;
        rank %= f;
        out.push(avail.remove(d));
    }
    out
}

/// Builds the `m × n` Toeplitz matrix `X[i][j] = d_{j−i}` from its
/// `n + m − 1` diagonal parameters, stored as the first row
/// (`d_0 … d_{n−1}`) followed by the first column below the corner
/// (`d_{−1} … d_{−(m−1)}`).
fn toeplitz_matrix(spec: &FieldSpec, m: usize, n: usize, params: &[Elem]) -> FieldMatrix {
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let l = j as isize - i as isize;
            let p = if l >= 0 { l as usize } else { n - 1 + (-l) as usize };
            row.push(params[p]);
        }
        rows.push(FieldVector::new(spec.clone(), row));
    }
    FieldMatrix::from_rows(&rows)
}

/// Matrix of `x ↦ first m coefficients of c·x` in
/// `F_{q^n} = F_q[y]/(g)`, with vectors read as coefficient lists
/// (entry `i` is the coefficient of `y^i`) and `g` the canonical
/// irreducible polynomial of degree `n` over `F_q`.
fn multiplication_matrix(spec: &FieldSpec, n: usize, m: usize, c: &[Elem]) -> FieldMatrix {
    let g = find_irreducible(spec, n);
    let mut rows = vec![vec![0 as Elem; n]; m];
    for j in 0..n {
        // Image of the basis monomial y^j.
        let mut basis = vec![0 as Elem; j + 1];
        basis[j] = 1;
        let prod = poly_rem(spec, &poly_mul(spec, c, &basis), &g);
        for (i, row) in rows.iter_mut().enumerate() {
            row[j] = prod.get(i).copied().unwrap_or(0);
        }
    }
    let rows: Vec<FieldVector> = rows
        .into_iter()
        .map(|r| FieldVector::new(spec.clone(), r))
        .collect();
    FieldMatrix::from_rows(&rows)
}

/// Applies an `m × n` Toeplitz matrix given by its diagonal parameters
/// (layout as in the `Toeplitz` enumeration) to `x`, choosing the FFT
/// path automatically for binary fields at `n ≥ 2^10`.
pub fn toeplitz_apply(
    spec: &FieldSpec,
    m: usize,
    n: usize,
    params: &[Elem],
    x: &FieldVector,
) -> FieldVector {
    assert_eq!(params.len(), n + m - 1, "wrong number of diagonal parameters");
    assert_eq!(x.len(), n, "input length mismatch");
    if spec.q() == 2 && n >= TOEPLITZ_FFT_THRESHOLD {
        toeplitz_apply_fft(spec, m, n, params, x)
    } else {
        toeplitz_apply_naive(spec, m, n, params, x)
    }
}

/// Direct `O(nm)` Toeplitz application.
pub fn toeplitz_apply_naive(
    spec: &FieldSpec,
    m: usize,
    n: usize,
    params: &[Elem],
    x: &FieldVector,
) -> FieldVector {
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let mut acc: Elem = 0;
        for j in 0..n {
            let l = j as isize - i as isize;
            let p = if l >= 0 { l as usize } else { n - 1 + (-l) as usize };
            acc = spec.add(acc, spec.mul(params[p], x.elems()[j]));
        }
        out.push(acc);
    }
    FieldVector::new(spec.clone(), out)
}

/// FFT-based Toeplitz application over `F_2` in `O(n log n)`.
///
/// The product row `y_i = Σ_j d_{j−i} x_j` is a cross-correlation; the
/// 0/1 sequences are convolved as integers with a complex FFT and the
/// counts (all `< 2^53`) are rounded exactly before reduction mod 2.
///
/// # Panics
/// Panics when the field is not `F_2`.
pub fn toeplitz_apply_fft(
    spec: &FieldSpec,
    m: usize,
    n: usize,
    params: &[Elem],
    x: &FieldVector,
) -> FieldVector {
    assert_eq!(spec.q(), 2, "FFT path is defined over F_2 only");
    // Diagonal sequence a_l for l = -(m-1) .. n-1, reversed so that the
    // correlation becomes a plain convolution.
    let total = n + m - 1;
    let mut a_rev = vec![0.0f64; total];
    for l in -(m as isize - 1)..n as isize {
        let p = if l >= 0 { l as usize } else { n - 1 + (-l) as usize };
        // a_rev[t] = a_{n-1-t}
        a_rev[(n as isize - 1 - l) as usize] = f64::from(params[p]);
    }
    let xs: Vec<f64> = x.elems().iter().map(|&v| f64::from(v)).collect();
    let conv = convolve_f64(&a_rev, &xs);
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let c = conv[n - 1 + i].round() as i64;
        out.push((c.rem_euclid(2)) as Elem);
    }
    FieldVector::new(spec.clone(), out)
}

fn convolve_f64(a: &[f64], b: &[f64]) -> Vec<f64> {
    let out_len = a.len() + b.len() - 1;
    let size = out_len.next_power_of_two();
    let mut fa: Vec<Complex64> = a.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut fb: Vec<Complex64> = b.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fa.resize(size, Complex64::new(0.0, 0.0));
    fb.resize(size, Complex64::new(0.0, 0.0));
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(size);
    let ifft = planner.plan_fft_inverse(size);
    fft.process(&mut fa);
    fft.process(&mut fb);
    for (u, v) in fa.iter_mut().zip(&fb) {
        *u *= v;
    }
    ifft.process(&mut fa);
    fa.truncate(out_len);
    fa.iter().map(|c| c.re / size as f64).collect()
}

/// Exact universality parameter of the permuted ensemble
/// `{σ(C)}_{σ ∈ S_n}` by type counting.
///
/// For a symbol-count type `p` realized by some nonzero vector,
///
/// ```text
///     ε_p(C) = q^n · #{x ∈ C : type(x) = p} / (|C| · #{x : type(x) = p}),
/// ```
///
/// and `ε(C)` is the maximum of `ε_p(C)` over all such types: a random
/// permutation sends a vector of type `p` to a uniform element of its
/// type class, so `Pr_σ[d ∈ σ(C)]` depends on `d` only through its
/// type.
///
/// # Errors
/// Returns [`HashError::BudgetExceeded`] outside the supported range
/// `n ≤ 12`, `q ∈ {2, 3}`, and [`HashError::InvalidFamily`] for a
/// dependent basis.
pub fn permuted_ensemble_epsilon(
    spec: &FieldSpec,
    basis: &[FieldVector],
) -> Result<Rational, HashError> {
    let q = spec.q();
    let n = basis.first().map_or(0, FieldVector::len);
    if !(q == 2 || q == 3) || n > 12 || n == 0 {
        return Err(HashError::BudgetExceeded {
            work: (q as u128).saturating_pow(n as u32),
            budget: (3u128).pow(12),
        });
    }
    let gen = FieldMatrix::from_rows(basis);
    let t = basis.len();
    if gen.rank() != t {
        return Err(HashError::InvalidFamily(
            "code basis must be linearly independent".into(),
        ));
    }
    let code: std::collections::HashSet<Vec<Elem>> =
        crate::finite_field::code_members(spec, n, basis)
            .into_iter()
            .map(|v| v.elems().to_vec())
            .collect();
    // type index -> (count in C, count in F_q^n)
    let mut per_type: std::collections::HashMap<Vec<usize>, (u128, u128)> =
        std::collections::HashMap::new();
    let total = (q as u128).pow(n as u32);
    for v in 0..total {
        let x = FieldVector::from_index(spec.clone(), n, v);
        let mut ty = vec![0usize; q as usize];
        for &e in x.elems() {
            ty[e as usize] += 1;
        }
        let entry = per_type.entry(ty).or_insert((0, 0));
        entry.1 += 1;
        if code.contains(x.elems()) {
            entry.0 += 1;
        }
    }
    let code_size = (q as u128).pow(t as u32);
    let zero_type = {
        let mut ty = vec![0usize; q as usize];
        ty[0] = n;
        ty
    };
    let mut best = Rational::new(0, 1);
    for (ty, (in_code, in_space)) in &per_type {
        if *ty == zero_type {
            continue;
        }
        let eps = Rational::new(total * in_code, code_size * in_space);
        if eps.num * best.den > best.num * eps.den {
            best = eps;
        }
    }
    Ok(best)
}

/// Report of a code-ensemble-to-biased-ensemble conversion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaReport {
    /// The bias `δ = √(max_{x≠0} Pr_X[x ∈ C_X^⊥])`.
    pub delta: f64,
    /// Exact `δ²`.
    pub delta_sq: Rational,
    /// `√(ε_dual · q^{−m})` with `ε_dual` certified from the same
    /// enumeration; `δ` never exceeds it.
    pub dual_bound: f64,
    /// True when the odd-characteristic character `ω^{x·W}` was used in
    /// place of the sign character `(−1)^{x·W}`; the resulting `δ` is
    /// unchanged because a full character sum over a subgroup is an
    /// indicator either way.
    pub character_generalized: bool,
}

/// Converts an ensemble of `m`-dimensional codes `{C_X}` into a
/// δ-biased ensemble: drawing `W` uniformly from `C_X` satisfies
/// `E_X (E_W (−1)^{x·W})² ≤ δ²` for every `x ≠ 0`, with
/// `δ² = max_{x≠0} Pr_X[x ∈ C_X^⊥]` exactly (a character summed over a
/// code is `1` on the dual code and `0` elsewhere).
///
/// An `m`-dimensional ε-almost dual universal₂ ensemble therefore has
/// `δ ≤ √(ε q^{−m})`; the report carries both sides.
///
/// # Errors
/// Returns [`HashError::NonBinaryField`] for `q > 2` unless
/// `character_generalized` is set (which swaps in the character
/// `ω^{x·W}`, `ω = e^{2πi/p}`, without changing the value),
/// [`HashError::InvalidFamily`] when a sampled code does not have
/// dimension `m`, and [`HashError::BudgetExceeded`] over the work
/// ceiling.
pub fn code_to_biased_delta(
    spec: &FieldSpec,
    codes: &[Vec<FieldVector>],
    m: usize,
    character_generalized: bool,
) -> Result<DeltaReport, HashError> {
    if spec.q() != 2 && !character_generalized {
        return Err(HashError::NonBinaryField);
    }
    if spec.q() != 2 && spec.extension_degree() > 1 {
        return Err(HashError::InvalidFamily(
            "character-generalized bias is supported over prime fields".into(),
        ));
    }
    let n = codes
        .first()
        .and_then(|c| c.first())
        .map(FieldVector::len)
        .ok_or_else(|| HashError::InvalidFamily("empty code ensemble".into()))?;
    let vectors = (spec.q() as u128).pow(n as u32);
    let work = vectors.saturating_mul(codes.len() as u128);
    if work > EXHAUSTIVE_BUDGET {
        return Err(HashError::BudgetExceeded {
            work,
            budget: EXHAUSTIVE_BUDGET,
        });
    }
    for basis in codes {
        if basis.len() != m || FieldMatrix::from_rows(basis).rank() != m {
            return Err(HashError::InvalidFamily(format!(
                "every code in the ensemble must have dimension {m}"
            )));
        }
    }
    let mut max_count: u64 = 0;
    let mut counts = vec![0u64; vectors as usize];
    for basis in codes {
        for (v, slot) in counts.iter_mut().enumerate().skip(1) {
            let x = FieldVector::from_index(spec.clone(), n, v as u128);
            // x ∈ C^⊥  ⇔  x ⊥ every basis vector of C.
            if basis.iter().all(|b| b.dot(&x) == 0) {
                *slot += 1;
            }
        }
    }
    for &c in counts.iter().skip(1) {
        max_count = max_count.max(c);
    }
    let delta_sq = Rational::new(max_count as u128, codes.len() as u128);
    // ε_dual of the dual ensemble {C_X^⊥} (codes of dimension n − m):
    // Pr[x ∈ C_X^⊥] ≤ q^{(n−m)−n} ε_dual.
    let eps_dual = Rational::new(
        max_count as u128 * (spec.q() as u128).pow(m as u32),
        codes.len() as u128,
    );
    let dual_bound =
        (eps_dual.to_f64() / f64::powi(f64::from(spec.q()), m as i32)).sqrt();
    let delta = delta_sq.to_f64().sqrt();
    debug_assert!(delta <= dual_bound + 1e-12);
    Ok(DeltaReport {
        delta,
        delta_sq,
        dual_bound,
        character_generalized: character_generalized && spec.q() != 2,
    })
}

/// Kernel codes `{ker f_X}` of every member of a family, with the
/// per-member dimension recorded.
///
/// # Errors
/// Returns [`HashError::BudgetExceeded`] when the enumeration exceeds
/// the work ceiling.
pub fn kernel_ensemble(
    family: &HashFamily,
) -> Result<Vec<(Vec<FieldVector>, usize)>, HashError> {
    let size = family.family_size();
    let vectors = (family.spec.q() as u128).pow(family.n as u32);
    let work = size.saturating_mul(vectors);
    if work > EXHAUSTIVE_BUDGET {
        return Err(HashError::BudgetExceeded {
            work,
            budget: EXHAUSTIVE_BUDGET,
        });
    }
    Ok(family
        .members()
        .map(|mat| {
            let ker = crate::finite_field::kernel_basis(&mat);
            let dim = ker.len();
            (ker, dim)
        })
        .collect())
}
