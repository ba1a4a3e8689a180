//! Oracle and property tests for the classical information layer.

use privamp::classical_info::{
    apply_channel_dist, apply_channel_e, apply_hash_indices, apply_hash_matrix, cond_renyi,
    cond_renyi_self, convolve, d1_prime, d2_conditional, eta, kahan_sum, log_sum_exp,
    optimal_qe, pairwise_sum, phi, phi_at_one, psi, secrecy_criteria, vector_alphabet,
    Distribution, InfoError, JointRow, JointSubDistribution,
};
use privamp::finite_field::{CosetMap, FieldMatrix, FieldSpec, FieldVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn dist(weights: &[f64]) -> Distribution {
    Distribution::new(labels("e", weights.len()), weights.to_vec()).unwrap()
}

fn joint(na: usize, ne: usize, table: &[f64]) -> JointSubDistribution {
    JointSubDistribution::new(labels("a", na), labels("e", ne), table.to_vec()).unwrap()
}

fn random_joint(rng: &mut ChaCha20Rng, na: usize, ne: usize) -> JointSubDistribution {
    let raw: Vec<f64> = (0..na * ne).map(|_| rng.gen_range(0.01..1.0)).collect();
    let mass: f64 = raw.iter().sum();
    joint(
        na,
        ne,
        &raw.iter().map(|v| v / mass).collect::<Vec<_>>(),
    )
}

fn random_dist(rng: &mut ChaCha20Rng, n: usize) -> Distribution {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
    let mass: f64 = raw.iter().sum();
    dist(&raw.iter().map(|v| v / mass).collect::<Vec<_>>())
}

#[test]
fn psi_pinned_values() {
    let p = dist(&[0.9, 0.1]);
    let q = dist(&[0.5, 0.5]);
    let v = psi(1.0, &p, &q).unwrap();
    assert!((v - 1.64f64.ln()).abs() < 1e-12, "got {v}");
    // psi(s|P||P) = 0 for normalized P at any s.
    for s in [-0.5, 0.0, 0.7, 2.0] {
        assert!(psi(s, &p, &p).unwrap().abs() < 1e-12);
    }
    // psi(0) is the log-mass.
    let sub = dist(&[0.3, 0.2]);
    assert!((psi(0.0, &sub, &q).unwrap() - 0.5f64.ln()).abs() < 1e-12);
}

#[test]
fn psi_requires_support() {
    let p = dist(&[0.9, 0.1]);
    let q = dist(&[1.0, 0.0]);
    assert!(matches!(
        psi(0.5, &p, &q),
        Err(InfoError::SupportViolation { .. })
    ));
}

#[test]
fn cond_renyi_uniform_is_log_a() {
    let p = joint(4, 3, &[1.0 / 12.0; 12]);
    let q = Distribution::uniform(labels("e", 3));
    for s in [-0.5, 0.0, 0.3, 1.0, 2.0] {
        let h = cond_renyi(s, &p, &q).unwrap();
        assert!((h - 4.0f64.ln()).abs() < 1e-12, "s={s}: {h}");
    }
    // Conditional collision entropy of an independent uniform A.
    assert!((cond_renyi_self(1.0, &p).unwrap() - 4.0f64.ln()).abs() < 1e-12);
}

#[test]
fn cond_renyi_shannon_limit_at_zero() {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    for _ in 0..5 {
        let p = random_joint(&mut rng, 3, 4);
        let q = random_dist(&mut rng, 4);
        let at_zero = cond_renyi(0.0, &p, &q).unwrap();
        let near_zero = cond_renyi(1e-7, &p, &q).unwrap();
        assert!((at_zero - near_zero).abs() < 1e-5);
    }
}

#[test]
fn phi_endpoint_values_and_domain() {
    let mut rng = ChaCha20Rng::seed_from_u64(13);
    let p = random_joint(&mut rng, 3, 3);
    assert!((phi(0.0, &p).unwrap() - p.mass().ln()).abs() < 1e-12);
    assert!(matches!(phi(1.0, &p), Err(InfoError::DomainError(_))));
    assert!(matches!(phi(-1.1, &p), Err(InfoError::DomainError(_))));
    assert!(matches!(phi(1.5, &p), Err(InfoError::DomainError(_))));
    // Continuity toward the s = 1 limit.
    assert!((phi(0.9999, &p).unwrap() - phi_at_one(&p)).abs() < 1e-2);
    // Negative orders evaluate the same display with 1/(1−s) ∈ [1/2, 1).
    for s in [-1.0, -0.6, -0.25] {
        let inv = 1.0 / (1.0 - s);
        let direct: f64 = (0..p.e_len())
            .map(|e| {
                (0..p.a_len())
                    .map(|a| p.get(a, e).powf(inv))
                    .sum::<f64>()
                    .powf(1.0 - s)
            })
            .sum();
        assert!((phi(s, &p).unwrap() - direct.ln()).abs() < 1e-12, "s={s}");
    }
}

#[test]
fn phi_of_product_with_uniform_a() {
    let pe = [0.2, 0.5, 0.3];
    let na = 4;
    let table: Vec<f64> = (0..na).flat_map(|_| pe.iter().map(|w| w / na as f64)).collect();
    let p = joint(na, 3, &table);
    for s in [0.1, 0.4, 0.8] {
        let v = phi(s, &p).unwrap();
        assert!((v + s * (na as f64).ln()).abs() < 1e-12, "s={s}: {v}");
    }
}

#[test]
fn phi_matches_additive_noise_closed_form() {
    // Additive-noise pair on F_2: P(a, e) = (1/2) P_X(e - a) with
    // P_X = (0.9, 0.1); then phi(s) = -s H_{1/(1-s)}(X).
    let p = joint(2, 2, &[0.45, 0.05, 0.05, 0.45]);
    let s = 0.5;
    let v = phi(s, &p).unwrap();
    let h2 = -(0.9f64.powi(2) + 0.1f64.powi(2)).ln();
    assert!((v + s * h2).abs() < 1e-12, "phi {v} vs -s*H2 {}", -s * h2);
    assert!((v + 0.099226).abs() < 1e-6);
}

#[test]
fn phi_slope_at_zero_is_minus_conditional_entropy() {
    let mut rng = ChaCha20Rng::seed_from_u64(17);
    for _ in 0..5 {
        let p = random_joint(&mut rng, 3, 4);
        let h = cond_renyi_self(0.0, &p).unwrap();
        let s = 1e-6;
        let slope = phi(s, &p).unwrap() / s;
        assert!(
            (slope + h).abs() < 1e-4,
            "slope {slope} vs -H(A|E) {}",
            -h
        );
    }
}

#[test]
fn chaining_inequality_over_auxiliary_variable() {
    let mut rng = ChaCha20Rng::seed_from_u64(19);
    let (na, nb, ne) = (2usize, 3usize, 2usize);
    for _ in 0..10 {
        let raw: Vec<f64> = (0..na * nb * ne).map(|_| rng.gen_range(0.01..1.0)).collect();
        let mass: f64 = raw.iter().sum();
        let cube: Vec<f64> = raw.iter().map(|v| v / mass).collect();
        // A against joint side information (B, E).
        let left = JointSubDistribution::new(
            labels("a", na),
            (0..nb * ne).map(|i| format!("b{}e{}", i / ne, i % ne)).collect(),
            cube.clone(),
        )
        .unwrap();
        // (A, B) against side information E.
        let right = JointSubDistribution::new(
            (0..na * nb).map(|i| format!("a{}b{}", i / nb, i % nb)).collect(),
            labels("e", ne),
            cube.clone(),
        )
        .unwrap();
        for t in [0.2, 0.5, 0.8] {
            let lhs = phi(t, &left).unwrap();
            let rhs = t * (nb as f64).ln() + phi(t, &right).unwrap();
            assert!(lhs <= rhs + 1e-10, "t={t}: {lhs} > {rhs}");
        }
        // t -> 1 limit via the max-form.
        let lhs = phi_at_one(&left);
        let rhs = (nb as f64).ln() + phi_at_one(&right);
        assert!(lhs <= rhs + 1e-10);
    }
}

#[test]
fn eta_arithmetic() {
    assert_eq!(eta(0.0, 5.0), 0.0);
    assert_eq!(eta(1.0, 5.0), 5.0);
    assert!((eta(0.5, 2f64.ln()) - 2f64.ln()).abs() < 1e-15);
}

#[test]
fn secrecy_criteria_pinned() {
    // Perfectly independent uniform pair: all criteria vanish.
    let uniform = joint(2, 2, &[0.25; 4]);
    let c = secrecy_criteria(&uniform).unwrap();
    assert!(c.d1_prime.abs() < 1e-12 && c.i_prime.abs() < 1e-12);
    assert!(c.d1.abs() < 1e-12 && c.i.abs() < 1e-12);
    // Perfectly correlated bit: d1' = 1, I' = ln 2.
    let diag = joint(2, 2, &[0.5, 0.0, 0.0, 0.5]);
    let c = secrecy_criteria(&diag).unwrap();
    assert!((c.d1_prime - 1.0).abs() < 1e-12);
    assert!((c.i_prime - 2f64.ln()).abs() < 1e-12);
    assert!((c.d1 - 1.0).abs() < 1e-12);
    assert!((c.i - 2f64.ln()).abs() < 1e-12);
}

#[test]
fn secrecy_criteria_require_normalization() {
    let sub = joint(2, 2, &[0.2, 0.1, 0.1, 0.2]);
    assert!(matches!(
        secrecy_criteria(&sub),
        Err(InfoError::NotNormalized { .. })
    ));
    // The L1 criteria remain available for sub-distributions.
    assert!(d1_prime(&sub).is_finite());
}

#[test]
fn apply_hash_identity_and_constant() {
    let mut rng = ChaCha20Rng::seed_from_u64(23);
    let p = random_joint(&mut rng, 4, 3);
    let id = apply_hash_indices(&p, &[0, 1, 2, 3], p.a_labels().to_vec());
    assert_eq!(id.table(), p.table());
    let constant = apply_hash_indices(&p, &[0, 0, 0, 0], vec!["c".into()]);
    assert_eq!(constant.a_len(), 1);
    assert!((constant.mass() - p.mass()).abs() < 1e-14);
    assert!(d1_prime(&constant).abs() < 1e-12);
}

#[test]
fn apply_hash_parity_pinned() {
    let spec = FieldSpec::prime(2).unwrap();
    let p = JointSubDistribution::new(
        vector_alphabet(&spec, 2),
        vec!["e".into()],
        vec![0.1, 0.2, 0.3, 0.4],
    )
    .unwrap();
    let parity = FieldMatrix::new(spec.clone(), 1, 2, vec![1, 1]);
    let out = apply_hash_matrix(&p, &parity).unwrap();
    assert_eq!(out.a_labels(), &["0".to_string(), "1".to_string()]);
    // 00 and 11 have parity 0; 01 and 10 have parity 1.
    assert!((out.get(0, 0) - 0.5).abs() < 1e-15);
    assert!((out.get(1, 0) - 0.5).abs() < 1e-15);
}

#[test]
fn apply_hash_matrix_requires_canonical_alphabet() {
    let spec = FieldSpec::prime(2).unwrap();
    let p = joint(4, 2, &[0.125; 8]);
    let parity = FieldMatrix::new(spec, 1, 2, vec![1, 1]);
    assert!(matches!(
        apply_hash_matrix(&p, &parity),
        Err(InfoError::NonGroupAlphabet(_))
    ));
}

#[test]
fn convolve_point_mass_and_uniform() {
    let spec = FieldSpec::prime(2).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(29);
    let raw: Vec<f64> = (0..8).map(|_| rng.gen_range(0.01..1.0)).collect();
    let mass: f64 = raw.iter().sum();
    let p = JointSubDistribution::new(
        vector_alphabet(&spec, 2),
        labels("e", 2),
        raw.iter().map(|v| v / mass).collect(),
    )
    .unwrap();
    let point = Distribution::new(p.a_labels().to_vec(), vec![1.0, 0.0, 0.0, 0.0]).unwrap();
    let same = convolve(&p, &point, &spec).unwrap();
    assert_eq!(same.table(), p.table());
    let uniform = Distribution::uniform(p.a_labels().to_vec());
    let smoothed = convolve(&p, &uniform, &spec).unwrap();
    let ma = smoothed.marginal_a();
    for &w in ma.weights() {
        assert!((w - p.mass() / 4.0).abs() < 1e-12);
    }
}

#[test]
fn convolve_with_code_uniform_matches_coset_hash() {
    let spec = FieldSpec::prime(2).unwrap();
    let n = 3;
    let basis = vec![FieldVector::new(spec.clone(), vec![1, 1, 0])];
    let coset = CosetMap::new(&spec, n, &basis);
    let mut rng = ChaCha20Rng::seed_from_u64(31);
    let raw: Vec<f64> = (0..16).map(|_| rng.gen_range(0.01..1.0)).collect();
    let mass: f64 = raw.iter().sum();
    let p = JointSubDistribution::new(
        vector_alphabet(&spec, n),
        labels("e", 2),
        raw.iter().map(|v| v / mass).collect(),
    )
    .unwrap();
    // W uniform on the code C.
    let mut w = vec![0.0; 8];
    let code_size = 2usize;
    for cw in privamp::finite_field::code_members(&spec, n, &basis) {
        w[cw.to_index() as usize] = 1.0 / code_size as f64;
    }
    let w = Distribution::new(p.a_labels().to_vec(), w).unwrap();
    let conv = convolve(&p, &w, &spec).unwrap();
    // Quotient hash by coset label.
    let map: Vec<usize> = (0..8)
        .map(|i| {
            let x = FieldVector::from_index(spec.clone(), n, i as u128);
            coset.decompose(&x).label as usize
        })
        .collect();
    let hashed = apply_hash_indices(&p, &map, labels("c", coset.coset_count() as usize));
    // (P * W_C)(a, e) = P^{f_C(A), E}(f_C(a), e) / |C|.
    for (a, &b) in map.iter().enumerate() {
        for e in 0..2 {
            let lhs = conv.get(a, e);
            let rhs = hashed.get(b, e) / code_size as f64;
            assert!((lhs - rhs).abs() < 1e-12, "a={a} e={e}");
        }
    }
}

#[test]
fn optimal_qe_attains_phi_identity() {
    let mut rng = ChaCha20Rng::seed_from_u64(37);
    for _ in 0..5 {
        let p = random_joint(&mut rng, 3, 4);
        for s in [0.5, 1.0, 2.0] {
            let qs = optimal_qe(s, &p).unwrap();
            assert!(qs.is_normalized());
            let lhs = s * cond_renyi(s, &p, &qs).unwrap();
            let rhs = -(1.0 + s) * phi(s / (1.0 + s), &p).unwrap();
            assert!((lhs - rhs).abs() < 1e-10, "s={s}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn optimal_qe_beats_random_search() {
    let mut rng = ChaCha20Rng::seed_from_u64(41);
    let p = random_joint(&mut rng, 3, 3);
    let s = 1.0;
    let qs = optimal_qe(s, &p).unwrap();
    let best = s * cond_renyi(s, &p, &qs).unwrap();
    for _ in 0..1000 {
        let q = random_dist(&mut rng, 3);
        let v = s * cond_renyi(s, &p, &q).unwrap();
        assert!(v <= best + 1e-9, "random {v} beats maximizer {best}");
    }
}

#[test]
fn optimal_qe_for_independent_conditionals_is_the_marginal() {
    let pa = [0.3, 0.7];
    let pe = [0.2, 0.5, 0.3];
    let table: Vec<f64> = pa.iter().flat_map(|&a| pe.iter().map(move |&e| a * e)).collect();
    let p = joint(2, 3, &table);
    let qs = optimal_qe(0.7, &p).unwrap();
    for (got, want) in qs.weights().iter().zip(pe) {
        assert!((got - want).abs() < 1e-12);
    }
}

#[test]
fn optimal_qe_rejects_degenerate_input() {
    let p = joint(2, 2, &[0.0; 4]);
    assert!(matches!(optimal_qe(1.0, &p), Err(InfoError::DegenerateP)));
    let good = joint(2, 2, &[0.25; 4]);
    assert!(matches!(
        optimal_qe(0.0, &good),
        Err(InfoError::DomainError(_))
    ));
}

#[test]
fn d2_of_uniform_product_is_zero() {
    let pe = [0.6, 0.4];
    let table: Vec<f64> = (0..3).flat_map(|_| pe.iter().map(|w| w / 3.0)).collect();
    let p = joint(3, 2, &table);
    let q = dist(&[0.5, 0.5]);
    assert!(d2_conditional(&p, &q).unwrap().abs() < 1e-14);
}

#[test]
fn d2_support_violation() {
    let p = joint(2, 2, &[0.25; 4]);
    let q = dist(&[1.0, 0.0]);
    assert!(matches!(
        d2_conditional(&p, &q),
        Err(InfoError::SupportViolation { .. })
    ));
}

#[test]
fn renner_l1_l2_bound() {
    let mut rng = ChaCha20Rng::seed_from_u64(43);
    for _ in 0..20 {
        let p = random_joint(&mut rng, 4, 3);
        let d2 = d2_conditional(&p, &p.marginal_e()).unwrap();
        let lhs = d1_prime(&p);
        assert!(lhs <= (4.0f64).sqrt() * d2.sqrt() + 1e-12);
    }
}

#[test]
fn accumulation_helpers_agree() {
    let mut rng = ChaCha20Rng::seed_from_u64(47);
    let terms: Vec<f64> = (0..1000).map(|_| rng.gen_range(-1.0..1.0)).collect();
    assert!((kahan_sum(terms.iter().copied()) - pairwise_sum(&terms)).abs() < 1e-12);
    assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    assert!((log_sum_exp(&[0.0, 0.0]) - 2f64.ln()).abs() < 1e-15);
}

#[test]
fn tables_round_trip_through_rows_and_json() {
    let p = joint(2, 3, &[0.1, 0.2, 0.05, 0.15, 0.3, 0.2]);
    let rows = p.to_rows();
    assert_eq!(rows.len(), 6);
    let back = JointSubDistribution::from_rows(&rows).unwrap();
    assert_eq!(back, p);
    let json = serde_json::to_string(&p).unwrap();
    let parsed: JointSubDistribution = serde_json::from_str(&json).unwrap();
    assert_eq!(parsed, p);
    let d = dist(&[0.25, 0.75]);
    let dj: Distribution =
        serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
    assert_eq!(dj, d);
}

#[test]
fn invalid_tables_are_rejected() {
    assert!(JointSubDistribution::new(labels("a", 2), labels("e", 2), vec![0.9; 4]).is_err());
    assert!(JointSubDistribution::new(labels("a", 2), labels("e", 2), vec![-0.1; 4]).is_err());
    assert!(JointSubDistribution::new(
        vec!["x".into(), "x".into()],
        labels("e", 2),
        vec![0.1; 4]
    )
    .is_err());
    let dup = [
        JointRow { a: "0".into(), e: "0".into(), p: 0.1 },
        JointRow { a: "0".into(), e: "0".into(), p: 0.2 },
    ];
    assert!(JointSubDistribution::from_rows(&dup).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// psi(s)/s is nondecreasing and dominates the relative entropy.
    #[test]
    fn psi_over_s_monotone(seed in 0u64..1000) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let p = random_dist(&mut rng, 4);
        let q = random_dist(&mut rng, 4);
        let grid = [-0.5, -0.25, 0.25, 0.5, 1.0, 2.0];
        let vals: Vec<f64> = grid
            .iter()
            .map(|&s| psi(s, &p, &q).unwrap() / s)
            .collect();
        for w in vals.windows(2) {
            prop_assert!(w[0] <= w[1] + 1e-10);
        }
        // s D(P||Q) <= psi(s) for s > 0.
        let d: f64 = p
            .weights()
            .iter()
            .zip(q.weights())
            .map(|(&pw, &qw)| pw * (pw.ln() - qw.ln()))
            .sum();
        for s in [0.25, 1.0, 2.0] {
            prop_assert!(s * d <= psi(s, &p, &q).unwrap() + 1e-10);
        }
    }

    /// H_{1+s} is nonincreasing in s.
    #[test]
    fn cond_renyi_monotone_in_s(seed in 0u64..1000) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let p = random_joint(&mut rng, 3, 3);
        let q = random_dist(&mut rng, 3);
        let grid = [-0.5, -0.25, 0.0, 0.25, 0.5, 1.0, 2.0];
        let vals: Vec<f64> = grid
            .iter()
            .map(|&s| cond_renyi(s, &p, &q).unwrap())
            .collect();
        for w in vals.windows(2) {
            prop_assert!(w[0] >= w[1] - 1e-10);
        }
    }

    /// Stochastic processing of the side information never decreases
    /// the conditional Renyi entropy.
    #[test]
    fn e_channel_monotonicity(seed in 0u64..1000, ne_new in 2usize..=4) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let p = random_joint(&mut rng, 3, 3);
        let q = random_dist(&mut rng, 3);
        // Random column-stochastic kernel |E'| x |E|, drawn column by column.
        let cols: Vec<Vec<f64>> = (0..3)
            .map(|_| {
                let col: Vec<f64> = (0..ne_new).map(|_| rng.gen_range(0.01..1.0)).collect();
                let mass: f64 = col.iter().sum();
                col.into_iter().map(|c| c / mass).collect()
            })
            .collect();
        let kernel: Vec<Vec<f64>> = (0..ne_new)
            .map(|i| cols.iter().map(|col| col[i]).collect())
            .collect();
        let new_labels = labels("f", ne_new);
        let lp = apply_channel_e(&p, &kernel, new_labels.clone()).unwrap();
        let lq = apply_channel_dist(&q, &kernel, new_labels).unwrap();
        for s in [0.0, 0.25, 0.5, 1.0] {
            let before = cond_renyi(s, &p, &q).unwrap();
            let after = cond_renyi(s, &lp, &lq).unwrap();
            prop_assert!(after >= before - 1e-10, "s={s}: {after} < {before}");
        }
    }

    /// s H_{1+s}(A|E|P) >= -phi(s|A|E|P) on (0, 1).
    #[test]
    fn renyi_dominates_minus_phi(seed in 0u64..1000) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let p = random_joint(&mut rng, 3, 3);
        for s in [0.25, 0.5, 0.75, 0.99] {
            let lhs = s * cond_renyi_self(s, &p).unwrap();
            let rhs = -phi(s, &p).unwrap();
            prop_assert!(lhs >= rhs - 1e-10, "s={s}: {lhs} < {rhs}");
        }
    }

    /// Pinsker and Fannes sandwiches on random normalized tables.
    #[test]
    fn pinsker_and_fannes(seed in 0u64..1000) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let p = random_joint(&mut rng, 4, 3);
        let c = secrecy_criteria(&p).unwrap();
        prop_assert!(c.d1_prime.powi(2) <= 2.0 * c.i_prime + 1e-10);
        prop_assert!(c.d1.powi(2) <= 2.0 * c.i + 1e-10);
        prop_assert!(c.i_prime <= eta(c.d1_prime, (4f64).ln()) + 1e-10);
        prop_assert!(c.i <= eta(c.d1, (3f64).ln()) + 1e-10);
    }

    /// Hashing cannot increase the conditional Shannon entropy.
    #[test]
    fn hashing_reduces_conditional_entropy(seed in 0u64..1000) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let p = random_joint(&mut rng, 4, 3);
        let map: Vec<usize> = (0..4).map(|_| rng.gen_range(0..2)).collect();
        let out = apply_hash_indices(&p, &map, labels("b", 2));
        prop_assert!((out.mass() - p.mass()).abs() < 1e-12);
        let before = cond_renyi_self(0.0, &p).unwrap();
        let after = cond_renyi_self(0.0, &out).unwrap();
        prop_assert!(after <= before + 1e-10);
    }

    /// The two d2 routes agree (the call itself asserts it) and the
    /// distance vanishes only for perfectly uniform-independent A.
    #[test]
    fn d2_routes_consistent(seed in 0u64..1000) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let p = random_joint(&mut rng, 3, 3);
        let q = random_dist(&mut rng, 3);
        let v = d2_conditional(&p, &q).unwrap();
        prop_assert!(v >= 0.0);
    }
}
