use proptest::prelude::*;
use qcap_core::channels::{entropy_exchange, entropy_exchange_purified, KrausChannel};
use qcap_core::code_fidelity::{
    d_operator, entanglement_fidelity, entanglement_fidelity_purified, fidelity_lower_bound_states, CodeSubspace,
};
use qcap_core::matrix::{
    eigh, frobenius_norm, haar_isometry, partial_trace, random_density, random_hermitian, tensor, trace_norm,
    von_neumann_entropy, ComplexMatrix, Keep,
};
use qcap_core::random_coding::{b_form_coefficients, exact_average_d2, upper_bound_d2};
use qcap_core::typicality::{kraus_distribution, typical_sequences, TypicalSetSpec};
use qcap_core::{DensityOperator, ProbabilityDistribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random channel `m → out` with `n` Kraus operators, when an isometry exists.
fn channel(m: usize, out: usize, n: usize, seed: u64) -> Option<KrausChannel> {
    (out * n >= m).then(|| KrausChannel::haar_random(m, out, n, &mut rng(seed)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tensor_mixed_product(da in 1usize..4, db in 1usize..4, seed: u64) {
        let mut r = rng(seed);
        let (a, c) = (random_hermitian(da, &mut r), random_hermitian(da, &mut r));
        let (b, d) = (random_hermitian(db, &mut r), random_hermitian(db, &mut r));
        let lhs = tensor(&a, &b).unwrap() * tensor(&c, &d).unwrap();
        let rhs = tensor(&(&a * &c), &(&b * &d)).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn partial_trace_of_product(da in 1usize..4, db in 1usize..4, seed: u64) {
        let mut r = rng(seed);
        let rho = random_density(da, da, &mut r);
        let sigma = random_density(db, db, &mut r);
        let joint = tensor(rho.matrix(), sigma.matrix()).unwrap();
        let a = partial_trace(&joint, da, db, Keep::A).unwrap();
        let b = partial_trace(&joint, da, db, Keep::B).unwrap();
        prop_assert!((a - rho.matrix()).norm() < 1e-12);
        prop_assert!((b - sigma.matrix()).norm() < 1e-12);
    }

    #[test]
    fn eigh_reconstructs(dim in 1usize..8, seed: u64) {
        let h = random_hermitian(dim, &mut rng(seed));
        let e = eigh(&h).unwrap();
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!((e.map(|l| l) - &h).norm() < 1e-10 * (1.0 + h.norm()));
    }

    #[test]
    fn norm_inequalities(dim in 1usize..7, seed: u64) {
        let a = qcap_core::matrix::complex_gaussian(dim, dim, &mut rng(seed));
        let f = frobenius_norm(&a);
        let t = trace_norm(&a);
        prop_assert!(f <= t + 1e-12);
        prop_assert!(t <= (dim as f64).sqrt() * f + 1e-12);
    }

    #[test]
    fn entropy_range(dim in 1usize..7, rank in 1usize..7, seed: u64) {
        let rho = random_density(dim, rank.min(dim), &mut rng(seed));
        let s = von_neumann_entropy(&rho).unwrap();
        prop_assert!(s >= -1e-12 && s <= (rank.min(dim) as f64).log2() + 1e-10);
    }

    #[test]
    fn trace_preserving_channels_preserve_trace(m in 1usize..5, out in 1usize..5, n in 1usize..4, seed: u64) {
        if let Some(ch) = channel(m, out, n, seed) {
            let rho = random_density(m, m, &mut rng(seed ^ 1));
            let image = ch.apply(&rho).unwrap();
            prop_assert!((image.trace() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn diagonalized_channel_is_equivalent(m in 1usize..5, n in 1usize..5, seed: u64) {
        if let Some(ch) = channel(m, m, n, seed) {
            let d = ch.diagonalize();
            prop_assert!(d.acts_like(&ch, 1e-10));
            prop_assert_eq!(d.len(), ch.minimal_length());
            let g = d.gram_matrix();
            for i in 0..d.len() {
                for j in 0..d.len() {
                    if i != j {
                        prop_assert!(g[(i, j)].norm() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn channel_json_round_trip(m in 1usize..4, out in 1usize..4, n in 1usize..4, seed: u64) {
        if let Some(ch) = channel(m, out, n, seed) {
            let back = KrausChannel::from_json(&ch.to_json().unwrap()).unwrap();
            prop_assert!(back.acts_like(&ch, 0.0));
        }
    }

    #[test]
    fn entropy_exchange_two_ways(m in 1usize..6, n in 1usize..4, rank in 1usize..6, seed: u64) {
        if let Some(ch) = channel(m, m, n, seed) {
            let rho = random_density(m, rank.min(m), &mut rng(seed ^ 2));
            let a = entropy_exchange(&rho, &ch).unwrap();
            let b = entropy_exchange_purified(&rho, &ch).unwrap();
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn bound_forms_agree(m in 1usize..7, out in 1usize..7, n in 1usize..5, k in 1usize..7, seed: u64) {
        if let Some(ch) = channel(m, out, n, seed) {
            let code = CodeSubspace::new(haar_isometry(m, k.min(m), &mut rng(seed ^ 3))).unwrap();
            let r = fidelity_lower_bound_states(&code, &ch).unwrap();
            prop_assert!((r.bound_kraus - r.bound_states.unwrap()).abs() <= 1e-9);
            prop_assert!(r.bound_kraus <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn d_operator_structure(m in 1usize..6, n in 1usize..4, k in 1usize..6, seed: u64) {
        if let Some(ch) = channel(m, m, n, seed) {
            let k = k.min(m);
            let code = CodeSubspace::new(haar_isometry(m, k, &mut rng(seed ^ 4))).unwrap();
            let d = d_operator(&code, &ch).unwrap();
            prop_assert!((&d - d.adjoint()).norm() < 1e-12);
            for i in 0..n {
                let t: qcap_core::C64 = (0..k).map(|l| d[(l * n + i, l * n + i)]).sum();
                prop_assert!(t.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn entanglement_fidelity_paths(m in 1usize..6, n in 1usize..4, rank in 1usize..6, seed: u64) {
        if let Some(ch) = channel(m, m, n, seed) {
            let rho = random_density(m, rank.min(m), &mut rng(seed ^ 5));
            let a = entanglement_fidelity(&rho, &ch).unwrap();
            let b = entanglement_fidelity_purified(&rho, &ch).unwrap();
            prop_assert!((a - b).abs() < 1e-9);
            prop_assert!((0.0..=1.0).contains(&a));
        }
    }

    #[test]
    fn exact_average_below_upper_bound(m in 2usize..6, out in 1usize..5, n in 1usize..5, k in 1usize..6, seed: u64) {
        if let Some(ch) = channel(m, out, n, seed) {
            let e = exact_average_d2(&ch, k.min(m)).unwrap();
            prop_assert!(e >= -1e-15);
            prop_assert!(e <= upper_bound_d2(&ch) + 1e-12);
        }
    }

    #[test]
    fn b_form_closed_form_relations(m in 2usize..20, k in 1usize..20) {
        let k = k.min(m);
        let c = b_form_coefficients(m, k).unwrap();
        let (mf, kf) = (m as f64, k as f64);
        prop_assert!((c.alpha + c.beta - (1.0 - 1.0 / (kf * kf)) / (mf * mf + mf)).abs() < 1e-15);
        prop_assert!((c.alpha * mf + c.beta * mf * mf).abs() < 1e-15);
        let id = ComplexMatrix::identity(m, m);
        prop_assert!(c.evaluate(&id, &id).norm() < 1e-12);
    }

    #[test]
    fn typical_count_never_exceeds_bound(p in 0.01f64..0.99, n in 1usize..80, eps in 0.001f64..0.5) {
        let spec = TypicalSetSpec::new(ProbabilityDistribution::new(vec![p, 1.0 - p]).unwrap(), n, eps).unwrap();
        let r = typical_sequences(&spec).unwrap();
        prop_assert!(r.count_within_bound);
        prop_assert!((0.0..=1.0).contains(&r.mass));
    }

    #[test]
    fn kraus_entropy_is_entropy_exchange(m in 1usize..5, n in 1usize..5, seed: u64) {
        if let Some(ch) = channel(m, m, n, seed) {
            let p = kraus_distribution(&ch.diagonalize()).unwrap();
            let h = qcap_core::matrix::shannon_entropy(&p);
            let se = entropy_exchange(&DensityOperator::maximally_mixed(m), &ch).unwrap();
            prop_assert!((h - se).abs() < 1e-10);
        }
    }
}

#[test]
fn reduction_monotonicity_on_random_triples() {
    let mut r = rng(99);
    use rand::Rng;
    for _ in 0..100 {
        let m = r.random_range(1..=4);
        let n = r.random_range(1..=4);
        let ch = KrausChannel::haar_random(m, m, n, &mut r).unwrap();
        let rho = random_density(m, r.random_range(1..=m), &mut r);
        let keep: Vec<usize> = (0..n).filter(|_| r.random_bool(0.6)).collect();
        if keep.is_empty() {
            continue;
        }
        let sub = ch.reduce(&keep).unwrap();
        let full = entanglement_fidelity(&rho, &ch).unwrap();
        let part = entanglement_fidelity(&rho, &sub).unwrap();
        assert!(part <= full + 1e-12);
    }
}
