use detflow::coding::{self, SimulationConfig, Simulator};
use detflow::cutset;
use detflow::entropy::EntropyEngine;
use detflow::generate::{self, GeneralParams, LinearParams};
use detflow::{rng, Limits, RelayNetwork};
use proptest::prelude::*;
use rand::Rng;

fn layered_linear(seed: u64) -> RelayNetwork {
    let mut g = rng::seeded(seed);
    let depth = g.gen_range(1..=3);
    generate::random_layered_linear(depth, 2, &LinearParams::default(), &mut g)
}

fn layered_general(seed: u64) -> RelayNetwork {
    let mut g = rng::seeded(seed);
    let depth = g.gen_range(1..=3);
    generate::random_layered_general(depth, 2, &GeneralParams::default(), &mut g)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reports_are_deterministic(seed: u64, general: bool) {
        let net = if general { layered_general(seed) } else { layered_linear(seed) };
        let cfg = SimulationConfig::new(1.0, 2, 40, seed);
        let limits = Limits::default();
        let a = coding::estimate_error_rate(&net, &cfg, &limits).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap()
            .install(|| coding::estimate_error_rate(&net, &cfg, &limits).unwrap());
        prop_assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn trials_are_symmetric(seed: u64, general: bool, w in 0u64..16, w2 in 0u64..16) {
        prop_assume!(w != w2);
        let net = if general { layered_general(seed) } else { layered_linear(seed) };
        let sim = Simulator::new(&net, SimulationConfig::new(2.0, 2, 1, seed), &Limits::default()).unwrap();
        let scheme = sim.build_scheme(seed ^ 1);
        let a = sim.run_trial(&scheme, w, w2).unwrap();
        let b = sim.run_trial(&scheme, w2, w).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn layered_networks_stay_synchronized(seed: u64) {
        let r = coding::message_sync_check(&layered_linear(seed));
        prop_assert!(r.synchronized, "{:?}", r.conflict);
    }

    #[test]
    fn layer_exponent_equals_transfer_rank(seed: u64) {
        let net = layered_linear(seed);
        let d = net.destinations()[0];
        for omega in cutset::enumerate_cuts(&net, d, &Limits::default()).unwrap() {
            prop_assert_eq!(
                coding::layer_error_exponent(&net, omega).unwrap(),
                cutset::cut_rank(&net, omega).unwrap()
            );
        }
    }

    #[test]
    fn general_layer_sum_equals_cut_entropy(seed: u64) {
        let net = layered_general(seed);
        let limits = Limits::default();
        let engine = EntropyEngine::new(&net, &limits).unwrap();
        let dist = generate::random_distribution(&net, &mut rng::seeded(seed ^ 5)).unwrap();
        for omega in cutset::enumerate_cuts(&net, net.destinations()[0], &limits).unwrap() {
            let layers = coding::general_layer_exponent(&engine, omega, &dist).unwrap();
            let whole = engine.cut_value(&dist, omega).unwrap();
            prop_assert!((layers - whole).abs() <= 1e-9, "{omega:?}: {layers} vs {whole}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn error_rate_respects_the_union_bound(seed: u64) {
        let net = layered_linear(seed);
        let limits = Limits::default();
        let c = cutset::linear_capacity(&net, &limits).unwrap().bits;
        prop_assume!(c > 0.0);
        let cfg = SimulationConfig::new(c / 2.0, 4, 300, seed);
        let r = coding::estimate_error_rate(&net, &cfg, &limits).unwrap();
        let bound = r.union_bound.unwrap();
        let se = (bound * (1.0 - bound) / r.trials as f64).sqrt();
        prop_assert!(r.error_rate <= bound + 3.0 * se, "rate {} bound {}", r.error_rate, bound);
    }
}
