use detflow::cutset;
use detflow::document;
use detflow::entropy::{EntropyEngine, ProductDistribution};
use detflow::field::FieldMatrix;
use detflow::generate::{self, GeneralParams, LinearParams};
use detflow::network::{GainDescription, ModelDescription};
use detflow::{layer_structure, rng, Limits, NodeSet, RelayNetwork};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn linear(seed: u64, max_destinations: usize) -> RelayNetwork {
    let params = LinearParams {
        max_destinations,
        ..LinearParams::default()
    };
    generate::random_linear(&params, &mut rng::seeded(seed))
}

fn layered(seed: u64) -> RelayNetwork {
    let mut g = rng::seeded(seed);
    let depth = g.gen_range(1..=4);
    generate::random_layered_linear(depth, 2, &LinearParams::default(), &mut g)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn layered_edges_advance_one_level(seed: u64) {
        let net = layered(seed);
        let l = layer_structure(&net).into_result(&net).unwrap();
        for &(a, b) in net.edges() {
            prop_assert_eq!(l.level(b), l.level(a) + 1);
        }
    }

    #[test]
    fn far_layers_cover_nodes_fed_from_the_previous_layer(seed: u64, code: u64) {
        let net = layered(seed);
        let l = layer_structure(&net).into_result(&net).unwrap();
        let cuts = cutset::enumerate_cuts(&net, net.destinations()[0], &Limits::default()).unwrap();
        let omega = cuts[(code % cuts.len() as u64) as usize];
        let far = omega.complement(net.node_count());
        let union: NodeSet = l
            .transition_range()
            .map(|t| l.cut_partition(&net, omega, t).gamma)
            .fold(NodeSet::EMPTY, NodeSet::union);
        let fed: NodeSet = far
            .iter()
            .filter(|&v| net.input_neighbors(v).iter().any(|&u| l.level(u) + 1 == l.level(v)))
            .collect();
        prop_assert_eq!(union, fed);
    }

    #[test]
    fn layering_is_stable_under_relabeling(seed: u64) {
        let net = layered(seed);
        let mut d = net.to_description();
        d.nodes.shuffle(&mut rng::seeded(seed ^ 9));
        let relabeled = d.build().unwrap();
        let a = layer_structure(&net).into_result(&net).unwrap();
        let b = layer_structure(&relabeled).into_result(&relabeled).unwrap();
        for v in net.nodes() {
            let w = relabeled.node_id(net.name(v)).unwrap();
            prop_assert_eq!(a.distance(v), b.distance(w));
        }
    }

    #[test]
    fn layeredness_is_stable_under_relabeling(seed: u64) {
        let net = linear(seed, 1);
        let mut d = net.to_description();
        d.nodes.shuffle(&mut rng::seeded(seed ^ 9));
        let relabeled = d.build().unwrap();
        prop_assert_eq!(layer_structure(&net).is_layered(), layer_structure(&relabeled).is_layered());
    }

    #[test]
    fn cut_enumeration_is_complete(seed: u64) {
        let net = linear(seed, 2);
        for &d in net.destinations() {
            let cuts = cutset::enumerate_cuts(&net, d, &Limits::default()).unwrap();
            prop_assert_eq!(cuts.len(), 1usize << (net.node_count() - 2));
            let distinct: std::collections::BTreeSet<u128> = cuts.iter().map(|c| c.bits()).collect();
            prop_assert_eq!(distinct.len(), cuts.len());
            for c in cuts {
                prop_assert!(c.contains(net.source()) && !c.contains(d));
            }
        }
    }

    #[test]
    fn uniform_entropy_equals_rank(seed: u64) {
        let net = linear(seed, 2);
        let limits = Limits::default();
        let engine = EntropyEngine::new(&net, &limits).unwrap();
        let u = ProductDistribution::uniform(&net).unwrap();
        for &d in net.destinations() {
            for omega in cutset::enumerate_cuts(&net, d, &limits).unwrap() {
                let r = cutset::rank_cut_value(&net, omega).unwrap();
                let h = cutset::entropy_cut_value(&engine, omega, &u).unwrap();
                prop_assert!((r - h).abs() <= 1e-9, "{omega:?}: rank {r} entropy {h}");
            }
        }
    }

    #[test]
    fn product_distributions_stay_below_capacity(seed: u64) {
        let net = linear(seed, 2);
        let limits = Limits::default();
        let dist = generate::random_distribution(&net, &mut rng::seeded(seed ^ 7)).unwrap();
        let rate = cutset::achievable_rate(&net, &dist, &limits).unwrap();
        let cap = cutset::linear_capacity(&net, &limits).unwrap();
        prop_assert!(rate.bits <= cap.bits + 1e-9);
    }

    #[test]
    fn adding_an_edge_never_lowers_capacity(seed: u64) {
        let net = linear(seed, 2);
        let limits = Limits::default();
        let mut g = rng::seeded(seed ^ 8);
        let n = net.node_count();
        let missing: Vec<_> = (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .filter(|&(a, b)| a != b && !net.has_edge(detflow::NodeId(a), detflow::NodeId(b)))
            .collect();
        prop_assume!(!missing.is_empty());
        let &(a, b) = missing.choose(&mut g).unwrap();
        let mut d = net.to_description();
        let ModelDescription::Linear { prime, dim, edges } = &mut d.model else { unreachable!() };
        edges.push(GainDescription {
            from: d.nodes[a].clone(),
            to: d.nodes[b].clone(),
            matrix: FieldMatrix::sample_with(*prime, *dim, *dim, &mut g).to_rows(),
        });
        let bigger = d.build().unwrap();
        let before = cutset::linear_capacity(&net, &limits).unwrap().bits;
        let after = cutset::linear_capacity(&bigger, &limits).unwrap().bits;
        prop_assert!(after >= before);
    }

    #[test]
    fn multicast_is_the_minimum_over_destinations(seed: u64) {
        let net = linear(seed, 3);
        let report = cutset::linear_capacity(&net, &Limits::default()).unwrap();
        let per: Vec<f64> = net
            .destinations()
            .iter()
            .map(|&d| {
                cutset::rank_cut_values(&net, d, &Limits::default())
                    .unwrap()
                    .iter()
                    .map(|c| c.bits)
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        prop_assert_eq!(report.per_destination.len(), per.len());
        for (r, p) in report.per_destination.iter().zip(&per) {
            prop_assert_eq!(r.cut.bits, *p);
        }
        prop_assert_eq!(report.bits, per.iter().copied().fold(f64::INFINITY, f64::min));
    }

    #[test]
    fn documents_round_trip(seed: u64) {
        let mut g = rng::seeded(seed);
        let params = GeneralParams { max_alphabet: 3, max_destinations: 2, ..GeneralParams::default() };
        for net in [linear(seed, 2), generate::random_general(&params, &mut g)] {
            let text = document::serialize(&net);
            let back = document::parse(&text).unwrap();
            prop_assert_eq!(&back, &net);
            prop_assert_eq!(document::serialize(&back), text);
        }
    }
}
