use detflow::cutset;
use detflow::entropy::{EntropyEngine, ProductDistribution};
use detflow::generate::{self, GeneralParams, LinearParams};
use detflow::submodularity::{self, SubsetFamily};
use detflow::unfolding::{self, CutEngine, CutEvaluator};
use detflow::{layer_structure, rng, Limits, RelayNetwork};
use proptest::prelude::*;
use rand::Rng;

fn small_linear(seed: u64) -> RelayNetwork {
    let params = LinearParams {
        nodes: 2..=4,
        ..LinearParams::default()
    };
    generate::random_linear(&params, &mut rng::seeded(seed))
}

fn small_general(seed: u64) -> RelayNetwork {
    let params = GeneralParams {
        nodes: 2..=4,
        ..GeneralParams::default()
    };
    generate::random_general(&params, &mut rng::seeded(seed))
}

/// Largest K with K·|V| ≤ 18.
fn max_stages(net: &RelayNetwork) -> usize {
    (18 / net.node_count()).max(1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn unfolded_networks_are_layered(seed: u64, k in 1usize..6, general: bool) {
        let net = if general { small_general(seed) } else { small_linear(seed) };
        let unf = unfolding::unfold(&net, k).unwrap();
        prop_assert!(layer_structure(unf.network()).is_layered());
    }

    #[test]
    fn steady_lift_scales_exactly(seed: u64, k in 1usize..6) {
        let net = small_linear(seed);
        let limits = Limits::default();
        let unf = unfolding::unfold(&net, k).unwrap();
        let rank = CutEvaluator::new(&unf, &CutEngine::Rank, &limits).unwrap();
        let dist = generate::random_distribution(&net, &mut rng::seeded(seed ^ 1)).unwrap();
        let ent = CutEvaluator::new(&unf, &CutEngine::Entropy(dist.clone()), &limits).unwrap();
        let engine = EntropyEngine::new(&net, &limits).unwrap();
        for (di, &d) in net.destinations().iter().enumerate() {
            for omega in cutset::enumerate_cuts(&net, d, &limits).unwrap() {
                let cut = unfolding::lift_steady_cut(&unf, omega);
                let original = cutset::rank_cut_value(&net, omega).unwrap();
                prop_assert_eq!(rank.value(&cut).unwrap(), k as f64 * original);
                prop_assert_eq!(rank.direct_rank_value(&cut, di).unwrap(), k as f64 * original);
                let h = engine.cut_value(&dist, omega).unwrap();
                prop_assert!((ent.value(&cut).unwrap() - k as f64 * h).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn unfolded_cuts_respect_the_bound(seed: u64, general: bool, k_code: usize) {
        let net = if general { small_general(seed) } else { small_linear(seed) };
        let k = 1 + k_code % max_stages(&net);
        let limits = Limits::default();
        let unf = unfolding::unfold(&net, k).unwrap();
        let dist = generate::random_distribution(&net, &mut rng::seeded(seed ^ 2)).unwrap();
        for r in unfolding::loop_bound_check(&unf, &dist, &limits).unwrap() {
            prop_assert!(r.passed, "K = {k}, worst slack {}", r.worst_slack);
        }
    }

    #[test]
    fn normalized_min_cut_is_bracketed(seed: u64, k_code: usize) {
        let net = small_linear(seed);
        let k = 1 + k_code % max_stages(&net);
        let limits = Limits::default();
        let unf = unfolding::unfold(&net, k).unwrap();
        let m = unfolding::unfolded_min_cut(&unf, &CutEngine::Rank, &limits).unwrap();
        let c = cutset::linear_capacity(&net, &limits).unwrap().bits;
        let l = unfolding::cut_count(&net) as f64;
        let kf = k as f64;
        prop_assert!(m.bits <= kf * c + 1e-9);
        prop_assert!(m.bits / kf >= (kf - l + 1.0) / kf * c - 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn tilde_families_are_nested_and_count_exactly(seed: u64, n in 1usize..8, len in 1usize..9) {
        let masks = generate::random_masks(n, len, &mut rng::seeded(seed));
        let tilde = submodularity::tilde_family(&masks, 20).unwrap();
        prop_assert_eq!(tilde.len(), masks.len());
        prop_assert!(submodularity::is_nested(&tilde));
        let universe = (1u128 << n) - 1;
        prop_assert!(submodularity::counting_check(&masks, universe, 20).unwrap().passed);
    }

    #[test]
    fn loop_inequality_holds(seed: u64, general: bool, len in 1usize..6) {
        let net = if general { small_general(seed) } else { small_linear(seed) };
        let limits = Limits::default();
        let mut g = rng::seeded(seed ^ 3);
        let d = net.destinations()[g.gen_range(0..net.destinations().len())];
        let family = generate::random_family(&net, d, len, &mut g).unwrap();
        let dist = generate::random_distribution(&net, &mut g).unwrap();
        let engine = EntropyEngine::new(&net, &limits).unwrap();
        let r = submodularity::loop_inequality_check(&engine, &dist, &family, 20).unwrap();
        prop_assert!(r.passed(), "{r:?}");
        for t in family.tilde(20).unwrap() {
            prop_assert!(t.contains(d) && !t.contains(net.source()));
        }
    }

    #[test]
    fn tilde_members_carry_at_least_the_min_cut(seed: u64, len in 1usize..6) {
        let net = small_linear(seed);
        let limits = Limits::default();
        let mut g = rng::seeded(seed ^ 4);
        let d = net.destinations()[0];
        let family: SubsetFamily = generate::random_family(&net, d, len, &mut g).unwrap();
        let engine = EntropyEngine::new(&net, &limits).unwrap();
        let u = ProductDistribution::uniform(&net).unwrap();
        let c = cutset::linear_capacity(&net, &limits).unwrap().per_destination[0].cut.bits;
        for t in family.tilde(20).unwrap() {
            prop_assert!(engine.psi(&u, t, t).unwrap() >= c - 1e-9);
            let omega = t.complement(net.node_count());
            prop_assert!(omega.contains(net.source()) && !omega.contains(d));
        }
    }
}
