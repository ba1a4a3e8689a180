//! Finite-length security bounds for privacy amplification with classical and
//! quantum side information.
//!
//! The crate covers the full pipeline of information-theoretic key distillation:
//!
//! * [`finite_field`] — arithmetic over GF(p) and GF(2^k), linear codes, cosets.
//! * [`hash_ensembles`] — universal₂ / almost-dual-universal₂ hash families
//!   (Toeplitz, modified Toeplitz, field multiplication, code quotients) and
//!   δ-biased ensembles, with exact collision statistics.
//! * [`classical_info`] — conditional Rényi entropies, the ψ/φ cumulant
//!   functions, and the secrecy criteria d₁′ / I′ / d₂ for joint distributions.
//! * [`quantum_info`] — the same toolbox for classical-quantum states:
//!   sandwiched ψ̄, two conditional Rényi families, min-entropy, pinching.
//! * [`bounds`] — one-shot leftover-hash bounds (smoothed Rényi-2 and
//!   min-entropy routes) and asymptotic error exponents for both criteria.
//! * [`keygen`] — secret-key generation with error correction: exact error
//!   probability, ensemble error bounds, leakage bounds for fixed and
//!   randomized codes, achievable-rate regions.
//! * [`pauli`] — generalized Pauli channels: Eve's c-q state, closed-form
//!   entropies, finite-length key-rate curves and figure data.
//! * [`verifier`] — a registry of every inequality used by the crate, checked
//!   on exhaustive or seeded random instances.
//! * [`cli`] — the `privamp` command-line front end.
//!
//! Every runnable capability has a matching file under `examples/`; start with
//! `cargo run -p privamp --example one_shot_bounds`.

pub mod bounds;
pub mod classical_info;
pub mod cli;
pub mod finite_field;
pub mod hash_ensembles;
pub mod keygen;
pub mod pauli;
pub mod quantum_info;
pub mod verifier;
