//! Exact arithmetic over finite fields F_q (q = p prime, or 2^k) and the
//! linear algebra needed by hash families and coset codes.
//!
//! Elements are canonical integer codes in `[0, q)`. For prime fields the code
//! is the residue itself; for GF(2^k) the code is the polynomial bit pattern
//! (bit i = coefficient of x^i), reduced modulo an irreducible polynomial of
//! degree k. All operations are pure and all values are immutable after
//! construction, so everything here is safe to share across threads.
//!
//! Scale limits are deliberate: q = p^k ≤ 2^16 and exhaustive routines assume
//! vector lengths small enough that q^n enumeration stays desk-sized.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Canonical field-element code. Always `< q ≤ 2^16`.
pub type Elem = u32;

/// Errors from field construction and linear algebra.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum FieldError {
    /// Multiplicative inverse of zero was requested.
    #[error("cannot invert the zero element")]
    InversionOfZero,
    /// An operation requiring linearly independent inputs received a
    /// dependent set.
    #[error("input vectors are linearly dependent")]
    DependentInput,
    /// The field description is not a valid F_q.
    #[error("invalid field spec: {0}")]
    InvalidSpec(String),
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Degree of a bit-coded F_2[x] polynomial, or `None` for the zero polynomial.
fn bitpoly_degree(bits: u64) -> Option<u32> {
    if bits == 0 {
        None
    } else {
        Some(63 - bits.leading_zeros())
    }
}

/// Remainder of bit-coded F_2[x] division.
fn bitpoly_rem(mut a: u64, b: u64) -> u64 {
    let db = bitpoly_degree(b).expect("division by zero polynomial");
    while let Some(da) = bitpoly_degree(a) {
        if da < db {
            break;
        }
        a ^= b << (da - db);
    }
    a
}

/// Exhaustive irreducibility test for a bit-coded F_2[x] polynomial of
/// degree ≤ 16: trial division by every polynomial of degree 1..=deg/2.
fn bitpoly_is_irreducible(poly: u64) -> bool {
    let deg = match bitpoly_degree(poly) {
        Some(d) if d >= 1 => d,
        _ => return false,
    };
    for cand in 2u64..(1u64 << (deg / 2 + 1)) {
        if bitpoly_degree(cand).unwrap_or(0) < 1 {
            continue;
        }
        if bitpoly_rem(poly, cand) == 0 {
            return false;
        }
    }
    true
}

/// Description of a finite field F_q with q = p^k ≤ 2^16.
///
/// Prime fields accept any prime characteristic; extension fields are
/// restricted to characteristic 2 with an explicit irreducible reduction
/// polynomial of degree k (irreducibility is verified exhaustively at
/// construction, which is cheap for k ≤ 16).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "FieldSpecJson", into = "FieldSpecJson")]
pub struct FieldSpec {
    p: u64,
    k: u32,
    q: u32,
    /// Reduction polynomial coefficients, index = degree; present iff p=2, k>1.
    poly: Option<Vec<u8>>,
    /// Bit-coded form of `poly` (bit i = coefficient of x^i), including x^k.
    poly_bits: u64,
}

#[derive(Serialize, Deserialize)]
struct FieldSpecJson {
    p: u64,
    k: u32,
    #[serde(default)]
    poly: Vec<u8>,
}

impl From<FieldSpec> for FieldSpecJson {
    fn from(s: FieldSpec) -> Self {
        FieldSpecJson {
            p: s.p,
            k: s.k,
            poly: s.poly.unwrap_or_default(),
        }
    }
}

impl TryFrom<FieldSpecJson> for FieldSpec {
    type Error = FieldError;
    fn try_from(j: FieldSpecJson) -> Result<Self, FieldError> {
        let poly = if j.poly.is_empty() { None } else { Some(j.poly) };
        FieldSpec::new(j.p, j.k, poly)
    }
}

impl FieldSpec {
    /// Builds and validates a field description.
    ///
    /// `poly` must be `None` for prime fields (k = 1) and, for k > 1, the
    /// coefficient vector (index = degree) of an irreducible degree-k
    /// polynomial over F_2.
    pub fn new(p: u64, k: u32, poly: Option<Vec<u8>>) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::InvalidSpec(format!("{p} is not prime")));
        }
        if k == 0 {
            return Err(FieldError::InvalidSpec("extension degree must be ≥ 1".into()));
        }
        let mut q: u64 = 1;
        for _ in 0..k {
            q = q.saturating_mul(p);
            if q > 1 << 16 {
                return Err(FieldError::InvalidSpec(format!(
                    "q = {p}^{k} exceeds the 2^16 cap"
                )));
            }
        }
        let poly_bits = if k > 1 {
            if p != 2 {
                return Err(FieldError::InvalidSpec(
                    "extension fields are supported only in characteristic 2".into(),
                ));
            }
            let coeffs = poly.as_ref().ok_or_else(|| {
                FieldError::InvalidSpec("extension field needs a reduction polynomial".into())
            })?;
            if coeffs.iter().any(|&c| c > 1) {
                return Err(FieldError::InvalidSpec(
                    "reduction polynomial coefficients must be 0/1".into(),
                ));
            }
            let mut bits = 0u64;
            for (i, &c) in coeffs.iter().enumerate() {
                bits |= (c as u64) << i;
            }
            if bitpoly_degree(bits) != Some(k) {
                return Err(FieldError::InvalidSpec(format!(
                    "reduction polynomial must have degree exactly {k}"
                )));
            }
            if !bitpoly_is_irreducible(bits) {
                return Err(FieldError::InvalidSpec(
                    "reduction polynomial is reducible".into(),
                ));
            }
            bits
        } else {
            if poly.is_some() {
                return Err(FieldError::InvalidSpec(
                    "prime fields take no reduction polynomial".into(),
                ));
            }
            0
        };
        Ok(FieldSpec {
            p,
            k,
            q: q as u32,
            poly,
            poly_bits,
        })
    }

    /// The prime field F_p.
    pub fn prime(p: u64) -> Result<Self, FieldError> {
        Self::new(p, 1, None)
    }

    /// GF(2^k) with the lexicographically smallest irreducible reduction
    /// polynomial of degree k (deterministic across runs).
    pub fn gf2k(k: u32) -> Result<Self, FieldError> {
        if k == 1 {
            return Self::prime(2);
        }
        if k > 16 {
            return Err(FieldError::InvalidSpec("k ≤ 16 required".into()));
        }
        for low in 0u64..(1 << k) {
            let bits = (1u64 << k) | low;
            if bitpoly_is_irreducible(bits) {
                let coeffs = (0..=k).map(|i| ((bits >> i) & 1) as u8).collect();
                return Self::new(2, k, Some(coeffs));
            }
        }
        unreachable!("an irreducible polynomial exists for every degree");
    }

    /// Characteristic p.
    pub fn characteristic(&self) -> u64 {
        self.p
    }

    /// Extension degree k.
    pub fn extension_degree(&self) -> u32 {
        self.k
    }

    /// Field size q = p^k.
    pub fn q(&self) -> u32 {
        self.q
    }

    /// Reduction polynomial coefficients (index = degree), if any.
    pub fn reduction_polynomial(&self) -> Option<&[u8]> {
        self.poly.as_deref()
    }

    fn check(&self, a: Elem) {
        assert!(a < self.q, "element code {a} out of range for q={}", self.q);
    }

    /// Field addition.
    ///
    /// # Panics
    /// Panics if a code is ≥ q.
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        self.check(a);
        self.check(b);
        if self.k == 1 {
            ((a as u64 + b as u64) % self.p) as Elem
        } else {
            a ^ b
        }
    }

    /// Field negation.
    ///
    /// # Panics
    /// Panics if the code is ≥ q.
    pub fn neg(&self, a: Elem) -> Elem {
        self.check(a);
        if self.k == 1 {
            if a == 0 {
                0
            } else {
                (self.p - a as u64) as Elem
            }
        } else {
            a
        }
    }

    /// Field subtraction.
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    /// Field multiplication.
    ///
    /// # Panics
    /// Panics if a code is ≥ q.
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.check(a);
        self.check(b);
        if self.k == 1 {
            ((a as u64 * b as u64) % self.p) as Elem
        } else {
            let mut acc = 0u64;
            for i in 0..self.k {
                if (b >> i) & 1 == 1 {
                    acc ^= (a as u64) << i;
                }
            }
            let k = self.k;
            let mut d = 2 * k;
            while d > k {
                d -= 1;
                if (acc >> d) & 1 == 1 {
                    acc ^= self.poly_bits << (d - k);
                }
            }
            acc as Elem
        }
    }

    /// Exponentiation by squaring.
    pub fn pow(&self, a: Elem, mut e: u64) -> Elem {
        self.check(a);
        let mut base = a;
        let mut acc: Elem = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via a^{q−2}.
    pub fn inv(&self, a: Elem) -> Result<Elem, FieldError> {
        self.check(a);
        if a == 0 {
            return Err(FieldError::InversionOfZero);
        }
        Ok(self.pow(a, self.q as u64 - 2))
    }

    /// Iterator over all element codes `0..q`.
    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        0..self.q
    }
}

/// A vector over F_q with canonical element codes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldVector {
    spec: FieldSpec,
    elems: Vec<Elem>,
}

impl FieldVector {
    /// Wraps element codes, validating each against q.
    ///
    /// # Panics
    /// Panics if any code is ≥ q.
    pub fn new(spec: FieldSpec, elems: Vec<Elem>) -> Self {
        for &e in &elems {
            spec.check(e);
        }
        FieldVector { spec, elems }
    }

    /// The all-zero vector of the given length.
    pub fn zero(spec: FieldSpec, len: usize) -> Self {
        FieldVector {
            spec,
            elems: vec![0; len],
        }
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn elems(&self) -> &[Elem] {
        &self.elems
    }

    pub fn is_zero(&self) -> bool {
        self.elems.iter().all(|&e| e == 0)
    }

    fn assert_compatible(&self, other: &FieldVector) {
        assert_eq!(self.spec, other.spec, "field mismatch");
        assert_eq!(self.elems.len(), other.elems.len(), "length mismatch");
    }

    /// Componentwise sum.
    ///
    /// # Panics
    /// Panics on field or length mismatch.
    pub fn add(&self, other: &FieldVector) -> FieldVector {
        self.assert_compatible(other);
        let elems = self
            .elems
            .iter()
            .zip(&other.elems)
            .map(|(&a, &b)| self.spec.add(a, b))
            .collect();
        FieldVector {
            spec: self.spec.clone(),
            elems,
        }
    }

    /// Componentwise difference.
    pub fn sub(&self, other: &FieldVector) -> FieldVector {
        self.assert_compatible(other);
        let elems = self
            .elems
            .iter()
            .zip(&other.elems)
            .map(|(&a, &b)| self.spec.sub(a, b))
            .collect();
        FieldVector {
            spec: self.spec.clone(),
            elems,
        }
    }

    /// Scalar multiple.
    pub fn scale(&self, c: Elem) -> FieldVector {
        let elems = self.elems.iter().map(|&a| self.spec.mul(a, c)).collect();
        FieldVector {
            spec: self.spec.clone(),
            elems,
        }
    }

    /// Standard bilinear form Σ_i x_i y_i.
    pub fn dot(&self, other: &FieldVector) -> Elem {
        self.assert_compatible(other);
        let mut acc: Elem = 0;
        for (&a, &b) in self.elems.iter().zip(&other.elems) {
            acc = self.spec.add(acc, self.spec.mul(a, b));
        }
        acc
    }

    /// Decodes the vector with the given big-endian base-q index: the first
    /// component is the most significant digit, so numeric index order equals
    /// lexicographic vector order.
    pub fn from_index(spec: FieldSpec, len: usize, mut index: u128) -> Self {
        let q = spec.q() as u128;
        let mut elems = vec![0 as Elem; len];
        for slot in elems.iter_mut().rev() {
            *slot = (index % q) as Elem;
            index /= q;
        }
        assert_eq!(index, 0, "index out of range for q^len");
        FieldVector { spec, elems }
    }

    /// Inverse of [`FieldVector::from_index`].
    pub fn to_index(&self) -> u128 {
        let q = self.spec.q() as u128;
        let mut acc: u128 = 0;
        for &e in &self.elems {
            acc = acc * q + e as u128;
        }
        acc
    }
}

impl Serialize for FieldVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MatrixJson::from_parts(&self.spec, 1, self.elems.len(), &self.elems).serialize(s)
    }
}

impl<'de> Deserialize<'de> for FieldVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = MatrixJson::deserialize(d)?;
        let (spec, rows, cols, data) = j.into_parts().map_err(D::Error::custom)?;
        if rows != 1 {
            return Err(D::Error::custom("vector JSON must have rows = 1"));
        }
        if data.len() != cols {
            return Err(D::Error::custom("vector data length mismatch"));
        }
        Ok(FieldVector::new(spec, data))
    }
}

/// An m×n matrix over F_q, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldMatrix {
    spec: FieldSpec,
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    p: u64,
    k: u32,
    #[serde(default)]
    poly: Vec<u8>,
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

impl MatrixJson {
    fn from_parts(spec: &FieldSpec, rows: usize, cols: usize, data: &[Elem]) -> Self {
        MatrixJson {
            p: spec.characteristic(),
            k: spec.extension_degree(),
            poly: spec.reduction_polynomial().unwrap_or(&[]).to_vec(),
            rows,
            cols,
            data: data.to_vec(),
        }
    }

    fn into_parts(self) -> Result<(FieldSpec, usize, usize, Vec<Elem>), String> {
        let poly = if self.poly.is_empty() {
            None
        } else {
            Some(self.poly)
        };
        let spec = FieldSpec::new(self.p, self.k, poly).map_err(|e| e.to_string())?;
        Ok((spec, self.rows, self.cols, self.data))
    }
}

impl Serialize for FieldMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MatrixJson::from_parts(&self.spec, self.rows, self.cols, &self.data).serialize(s)
    }
}

impl<'de> Deserialize<'de> for FieldMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = MatrixJson::deserialize(d)?;
        let (spec, rows, cols, data) = j.into_parts().map_err(D::Error::custom)?;
        if data.len() != rows * cols {
            return Err(D::Error::custom("matrix data length mismatch"));
        }
        Ok(FieldMatrix::new(spec, rows, cols, data))
    }
}

impl FieldMatrix {
    /// Wraps row-major element codes.
    ///
    /// # Panics
    /// Panics if `data.len() != rows*cols` or any code is ≥ q.
    pub fn new(spec: FieldSpec, rows: usize, cols: usize, data: Vec<Elem>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length mismatch");
        for &e in &data {
            spec.check(e);
        }
        FieldMatrix {
            spec,
            rows,
            cols,
            data,
        }
    }

    /// Stacks row vectors into a matrix.
    ///
    /// # Panics
    /// Panics if the rows disagree in field or length, or if `rows` is empty.
    pub fn from_rows(rows: &[FieldVector]) -> Self {
        assert!(!rows.is_empty(), "need at least one row");
        let spec = rows[0].spec().clone();
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.spec(), &spec, "field mismatch");
            assert_eq!(r.len(), cols, "length mismatch");
            data.extend_from_slice(r.elems());
        }
        FieldMatrix {
            spec,
            rows: rows.len(),
            cols,
            data,
        }
    }

    /// The n×n identity.
    pub fn identity(spec: FieldSpec, n: usize) -> Self {
        let mut data = vec![0; n * n];
        for i in 0..n {
            data[i * n + i] = 1;
        }
        FieldMatrix {
            spec,
            rows: n,
            cols: n,
            data,
        }
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Elem] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> Elem {
        self.data[r * self.cols + c]
    }

    fn set(&mut self, r: usize, c: usize, v: Elem) {
        self.data[r * self.cols + c] = v;
    }

    /// Row i as a vector.
    pub fn row(&self, r: usize) -> FieldVector {
        FieldVector {
            spec: self.spec.clone(),
            elems: self.data[r * self.cols..(r + 1) * self.cols].to_vec(),
        }
    }

    /// Matrix–vector product M·x.
    ///
    /// # Panics
    /// Panics on field or dimension mismatch.
    pub fn mul_vec(&self, x: &FieldVector) -> FieldVector {
        assert_eq!(x.spec(), &self.spec, "field mismatch");
        assert_eq!(x.len(), self.cols, "dimension mismatch");
        let mut out = vec![0 as Elem; self.rows];
        for (r, slot) in out.iter_mut().enumerate() {
            let mut acc: Elem = 0;
            for c in 0..self.cols {
                acc = self
                    .spec
                    .add(acc, self.spec.mul(self.get(r, c), x.elems()[c]));
            }
            *slot = acc;
        }
        FieldVector {
            spec: self.spec.clone(),
            elems: out,
        }
    }

    /// Reduced row-echelon form; returns (rref, pivot column indices).
    pub fn rref(&self) -> (FieldMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row >= m.rows {
                break;
            }
            let Some(pr) = (row..m.rows).find(|&r| m.get(r, col) != 0) else {
                continue;
            };
            for c in 0..m.cols {
                let (a, b) = (m.get(row, c), m.get(pr, c));
                m.set(row, c, b);
                m.set(pr, c, a);
            }
            let inv = m
                .spec
                .inv(m.get(row, col))
                .expect("pivot is nonzero by construction");
            for c in 0..m.cols {
                let v = m.spec.mul(m.get(row, c), inv);
                m.set(row, c, v);
            }
            for r in 0..m.rows {
                if r != row && m.get(r, col) != 0 {
                    let f = m.get(r, col);
                    for c in 0..m.cols {
                        let v = m.spec.sub(m.get(r, c), m.spec.mul(f, m.get(row, c)));
                        m.set(r, c, v);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    /// Rank over F_q.
    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }
}

/// Basis of the null space {x : Mx = 0}, one vector per free column, ordered
/// by free-column index. Basis size is n − rank(M) and every returned vector
/// satisfies Mv = 0 exactly.
pub fn kernel_basis(m: &FieldMatrix) -> Vec<FieldVector> {
    let (rref, pivots) = m.rref();
    let spec = m.spec().clone();
    let n = m.cols();
    let mut basis = Vec::new();
    for free in 0..n {
        if pivots.contains(&free) {
            continue;
        }
        let mut v = vec![0 as Elem; n];
        v[free] = 1;
        for (r, &pc) in pivots.iter().enumerate() {
            // Pivot rows read x_pc = −Σ_{free c} rref[r][c]·x_c.
            v[pc] = spec.neg(rref.get(r, free));
        }
        basis.push(FieldVector::new(spec.clone(), v));
    }
    debug_assert!(basis.iter().all(|v| m.mul_vec(v).is_zero()));
    basis
}

/// Basis of the dual code C^⊥ = {y : x·y = 0 for all x ∈ C}.
///
/// Returns `DependentInput` if the given basis vectors are linearly
/// dependent. The zero code is encoded as an empty basis with an explicit
/// ambient length.
pub fn dual_code(basis: &[FieldVector]) -> Result<Vec<FieldVector>, FieldError> {
    assert!(!basis.is_empty(), "use dual_code_with_ambient for the zero code");
    let m = FieldMatrix::from_rows(basis);
    if m.rank() != basis.len() {
        return Err(FieldError::DependentInput);
    }
    Ok(kernel_basis(&m))
}

/// Dual of a possibly-zero code inside F_q^n.
pub fn dual_code_with_ambient(
    spec: &FieldSpec,
    n: usize,
    basis: &[FieldVector],
) -> Result<Vec<FieldVector>, FieldError> {
    if basis.is_empty() {
        let id = FieldMatrix::identity(spec.clone(), n);
        return Ok((0..n).map(|r| id.row(r)).collect());
    }
    dual_code(basis)
}

/// Result of splitting x into its coset label and in-code component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetDecomposition {
    /// Big-endian base-q encoding of the representative's entries at the
    /// non-pivot columns of the code's RREF basis; 0 labels the code itself.
    pub label: u128,
    /// Lexicographically smallest member of the coset.
    pub representative: FieldVector,
    /// `x − representative`, always a codeword.
    pub component: FieldVector,
}

/// A code basis preprocessed for coset operations.
#[derive(Debug, Clone)]
pub struct CosetMap {
    spec: FieldSpec,
    n: usize,
    rref_rows: Vec<FieldVector>,
    pivots: Vec<usize>,
    nonpivots: Vec<usize>,
}

impl CosetMap {
    /// Builds the map from an independent code basis.
    ///
    /// # Panics
    /// Panics if the basis vectors are linearly dependent (caller contract).
    pub fn new(spec: &FieldSpec, n: usize, basis: &[FieldVector]) -> Self {
        let (rref_rows, pivots) = if basis.is_empty() {
            (Vec::new(), Vec::new())
        } else {
            let m = FieldMatrix::from_rows(basis);
            assert_eq!(m.cols(), n, "basis length mismatch");
            let (rref, pivots) = m.rref();
            assert_eq!(pivots.len(), basis.len(), "code basis must be independent");
            ((0..pivots.len()).map(|r| rref.row(r)).collect(), pivots)
        };
        let nonpivots = (0..n).filter(|c| !pivots.contains(c)).collect();
        CosetMap {
            spec: spec.clone(),
            n,
            rref_rows,
            pivots,
            nonpivots,
        }
    }

    /// Code dimension t.
    pub fn dimension(&self) -> usize {
        self.pivots.len()
    }

    /// Field the code lives over.
    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    /// Ambient length n.
    pub fn ambient_len(&self) -> usize {
        self.n
    }

    /// Number of cosets q^{n−t}.
    pub fn coset_count(&self) -> u128 {
        (self.spec.q() as u128).pow((self.n - self.pivots.len()) as u32)
    }

    /// Splits x = representative(label) + component with component in the
    /// code. The representative is the unique coset member vanishing on all
    /// pivot columns, which is also the lexicographically smallest member.
    pub fn decompose(&self, x: &FieldVector) -> CosetDecomposition {
        assert_eq!(x.spec(), &self.spec, "field mismatch");
        assert_eq!(x.len(), self.n, "length mismatch");
        let mut rep = x.clone();
        for (r, &pc) in self.pivots.iter().enumerate() {
            let c = rep.elems()[pc];
            if c != 0 {
                rep = rep.sub(&self.rref_rows[r].scale(c));
            }
        }
        let q = self.spec.q() as u128;
        let mut label: u128 = 0;
        for &c in &self.nonpivots {
            label = label * q + rep.elems()[c] as u128;
        }
        let component = x.sub(&rep);
        CosetDecomposition {
            label,
            representative: rep,
            component,
        }
    }

    /// Coordinates of `x`'s in-code component in the RREF basis, i.e. the
    /// unique `c ∈ F_q^t` with `decompose(x).component = Σ_r c_r·basis_r`.
    /// Since each RREF row is 1 at its own pivot and 0 at the others, these
    /// are the component's entries at the pivot columns.
    pub fn code_coordinates(&self, x: &FieldVector) -> FieldVector {
        let d = self.decompose(x);
        let elems = self
            .pivots
            .iter()
            .map(|&pc| d.component.elems()[pc])
            .collect();
        FieldVector::new(self.spec.clone(), elems)
    }

    /// The canonical (lexicographically smallest) representative of a label.
    ///
    /// # Panics
    /// Panics if `label ≥ coset_count()`.
    pub fn representative(&self, mut label: u128) -> FieldVector {
        let q = self.spec.q() as u128;
        let mut elems = vec![0 as Elem; self.n];
        for &c in self.nonpivots.iter().rev() {
            elems[c] = (label % q) as Elem;
            label /= q;
        }
        assert_eq!(label, 0, "label out of range");
        FieldVector::new(self.spec.clone(), elems)
    }

    /// All codewords in deterministic order (coefficient index order on the
    /// RREF basis). Size q^t; intended for desk-scale t only.
    pub fn codewords(&self) -> Vec<FieldVector> {
        code_members(&self.spec, self.n, &self.rref_rows)
    }
}

/// Splits x into (coset label, in-code component) for the given code basis.
///
/// # Panics
/// Panics if the basis is dependent or dimensions mismatch.
pub fn coset_decompose(x: &FieldVector, code_basis: &[FieldVector]) -> CosetDecomposition {
    let map = CosetMap::new(x.spec(), x.len(), code_basis);
    map.decompose(x)
}

/// Enumerates all q^t members of the span of `basis` in deterministic order:
/// coefficient vectors run through big-endian base-q indices.
pub fn code_members(spec: &FieldSpec, n: usize, basis: &[FieldVector]) -> Vec<FieldVector> {
    let t = basis.len();
    let count = (spec.q() as u128).pow(t as u32);
    let mut out = Vec::with_capacity(count as usize);
    for idx in 0..count {
        let coeff = FieldVector::from_index(spec.clone(), t, idx);
        let mut acc = FieldVector::zero(spec.clone(), n);
        for (i, b) in basis.iter().enumerate() {
            let c = coeff.elems()[i];
            if c != 0 {
                acc = acc.add(&b.scale(c));
            }
        }
        out.push(acc);
    }
    out
}

/// Iterator over all vectors of F_q^n in lexicographic (= index) order.
pub fn all_vectors(spec: &FieldSpec, n: usize) -> impl Iterator<Item = FieldVector> {
    let spec = spec.clone();
    let count = (spec.q() as u128).pow(n as u32);
    (0..count).map(move |i| FieldVector::from_index(spec.clone(), n, i))
}

// --- Dense polynomial arithmetic over an arbitrary base field -------------
//
// Used to realize multiplication hash families: F_q^n is identified with the
// field F_{q^n} = F_q[x]/(g) for an irreducible monic g of degree n.

/// Trims trailing zero coefficients.
fn poly_trim(mut p: Vec<Elem>) -> Vec<Elem> {
    while p.last() == Some(&0) {
        p.pop();
    }
    p
}

/// Degree, or `None` for the zero polynomial. Coefficient index = degree.
pub fn poly_degree(p: &[Elem]) -> Option<usize> {
    p.iter().rposition(|&c| c != 0)
}

/// Product of two coefficient vectors over the base field.
pub fn poly_mul(spec: &FieldSpec, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0 as Elem; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] = spec.add(out[i + j], spec.mul(ai, bj));
        }
    }
    poly_trim(out)
}

/// Remainder of a modulo the monic-normalizable polynomial m.
///
/// # Panics
/// Panics if m is zero.
pub fn poly_rem(spec: &FieldSpec, a: &[Elem], m: &[Elem]) -> Vec<Elem> {
    let dm = poly_degree(m).expect("modulus must be nonzero");
    let lead_inv = spec.inv(m[dm]).expect("leading coefficient is nonzero");
    let mut r: Vec<Elem> = a.to_vec();
    while let Some(dr) = poly_degree(&r) {
        if dr < dm {
            break;
        }
        let f = spec.mul(r[dr], lead_inv);
        let shift = dr - dm;
        for (i, &mc) in m.iter().enumerate().take(dm + 1) {
            r[shift + i] = spec.sub(r[shift + i], spec.mul(f, mc));
        }
    }
    poly_trim(r)
}

/// Exhaustive irreducibility test by trial division (degree ≤ 16 intended).
pub fn poly_is_irreducible(spec: &FieldSpec, p: &[Elem]) -> bool {
    let Some(d) = poly_degree(p) else {
        return false;
    };
    if d == 0 {
        return false;
    }
    for deg in 1..=d / 2 {
        // All monic candidates of this degree.
        let count = (spec.q() as u128).pow(deg as u32);
        for idx in 0..count {
            let mut cand = FieldVector::from_index(spec.clone(), deg, idx).elems().to_vec();
            cand.reverse(); // index digits are big-endian; coefficients are little-endian
            cand.push(1);
            if poly_degree(&poly_rem(spec, p, &cand)).is_none() {
                return false;
            }
        }
    }
    true
}

/// Lexicographically smallest (by low-coefficient index) monic irreducible
/// polynomial of the given degree over the base field.
pub fn find_irreducible(spec: &FieldSpec, degree: usize) -> Vec<Elem> {
    assert!(degree >= 1, "degree must be ≥ 1");
    let count = (spec.q() as u128).pow(degree as u32);
    for idx in 0..count {
        let mut cand = FieldVector::from_index(spec.clone(), degree, idx).elems().to_vec();
        cand.reverse();
        cand.push(1);
        if poly_is_irreducible(spec, &cand) {
            return cand;
        }
    }
    unreachable!("an irreducible polynomial exists for every degree");
}
