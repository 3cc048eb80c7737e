use athermal::distill::{plan_distillation, solve_single_type, DistillConfig};
use athermal::monotone::{affinity_gap, binary_entropy, relative_entropy};
use athermal::random::random_density_matrix;
use athermal::simulate::{distillation_permutation, exhaust_analysis, oracle_max_m, Permutation, StringDistribution};
use athermal::strings::BitString;
use athermal::typeclass::Window;
use athermal::{gibbs_state, Hamiltonian};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn completed_permutations_are_legal(len in 1u32..10, pairs in proptest::collection::vec((0u128..1024, 0u32..64), 0..6)) {
        // pair each input with the rotation of itself, which keeps the weight
        let mut fixed = Vec::new();
        let mut seen_in = std::collections::HashSet::new();
        let mut seen_out = std::collections::HashSet::new();
        for (bits, rot) in pairs {
            let a = BitString::new(len, bits & ((1u128 << len) - 1));
            let r = rot % len;
            let mask = (1u128 << len) - 1;
            let rotated = ((a.bits << r) | (a.bits >> (len - r))) & mask;
            let b = BitString::new(len, if r == 0 { a.bits } else { rotated });
            if seen_in.insert(a.bits) && seen_out.insert(b.bits) {
                fixed.push((a, b));
            }
        }
        let perm = Permutation::complete(len, &fixed).unwrap();
        prop_assert!(perm.is_bijection());
        prop_assert!(perm.conserves_weight());
        for (a, b) in &fixed {
            prop_assert_eq!(perm.apply(*a), *b);
        }
    }

    #[test]
    fn push_forward_preserves_mass(len in 1u32..10, p in 0.0f64..1.0, seed in any::<u64>()) {
        let d = StringDistribution::iid(len, p).unwrap();
        let size = 1usize << len;
        let mut table: Vec<usize> = (0..size).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        use rand::seq::SliceRandom;
        table.shuffle(&mut rng);
        let out = d.push_forward(|i| table[i]);
        prop_assert!((out.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oracle_agrees_past_the_enumeration_limit(ell in 0u64..17, n in 0u64..8, g_frac in 0.0f64..=1.0, t_frac in 0.0f64..=1.0) {
        let g = (g_frac * ell as f64) as u64;
        let t = (t_frac * n as f64) as u64;
        prop_assert_eq!(oracle_max_m(ell, g, n, t).unwrap(), solve_single_type(ell, g, n, t).unwrap());
    }

    #[test]
    fn affinity_gap_within_binary_entropy(d in 2usize..6, p in 0.0f64..1.0, beta in 0.1f64..4.0, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = Hamiltonian::new((0..d).map(|i| i as f64 * 0.7).collect()).unwrap();
        let gamma = gibbs_state(&h, beta).unwrap();
        let rho = random_density_matrix::<f64, _>(d, d, &mut rng);
        let sigma = random_density_matrix::<f64, _>(d, 1, &mut rng);
        let gap = affinity_gap(&rho, &sigma, p, &gamma).unwrap();
        prop_assert!(gap >= -1e-9);
        prop_assert!(gap <= binary_entropy(p).unwrap() + 1e-9);
        prop_assert!(relative_entropy(&rho, &gamma.density_matrix()).unwrap() >= -1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn executed_plans_keep_exhaust_invariants(n in 2u64..8, ell in 2u64..10, width in prop_oneof![Just(0.5), Just(1.0), Just(3.0)]) {
        let cfg = DistillConfig { ell: Some(ell), window: Window::binomial(width), ..DistillConfig::default() };
        let plan = plan_distillation(n, 0.75, 1.0, &cfg).unwrap();
        let perm = distillation_permutation(&plan).unwrap();
        prop_assert!(perm.is_bijection() && perm.conserves_weight());
        let block = 1 + (n as u32 % 3);
        let report = exhaust_analysis(&plan, block).unwrap();
        prop_assert!(report.pinsker_holds);
        prop_assert!(report.subadditivity_holds);
    }
}
