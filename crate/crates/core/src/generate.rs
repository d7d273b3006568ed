//! Random instances for property tests, verification suites and benchmarks.
//!
//! Nodes are named `S`, `R1`, `R2`, … and `D` (or `D1`, `D2`, … for
//! multicast). Every generator is a pure function of its parameters and the
//! supplied generator state.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::entropy::ProductDistribution;
use crate::error::Result;
use crate::field::FieldMatrix;
use crate::network::{NetworkDescription, RelayNetwork};
use crate::nodeset::{NodeId, NodeSet};
use crate::submodularity::SubsetFamily;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearParams {
    pub nodes: std::ops::RangeInclusive<usize>,
    pub primes: Vec<u32>,
    pub max_dim: usize,
    pub edge_probability: f64,
    pub max_destinations: usize,
}

impl Default for LinearParams {
    fn default() -> Self {
        LinearParams {
            nodes: 2..=5,
            primes: vec![2, 3],
            max_dim: 2,
            edge_probability: 0.5,
            max_destinations: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralParams {
    pub nodes: std::ops::RangeInclusive<usize>,
    pub min_alphabet: u32,
    pub max_alphabet: u32,
    pub max_outputs: u32,
    pub edge_probability: f64,
    pub max_destinations: usize,
}

impl Default for GeneralParams {
    fn default() -> Self {
        GeneralParams {
            nodes: 2..=5,
            min_alphabet: 1,
            max_alphabet: 2,
            max_outputs: 3,
            edge_probability: 0.5,
            max_destinations: 1,
        }
    }
}

/// Node names for `n` nodes with `dests` destinations placed last.
fn names(n: usize, dests: usize) -> Vec<String> {
    let relays = n - 1 - dests;
    let mut v = vec!["S".to_owned()];
    v.extend((1..=relays).map(|i| format!("R{i}")));
    if dests == 1 {
        v.push("D".to_owned());
    } else {
        v.extend((1..=dests).map(|i| format!("D{i}")));
    }
    v
}

fn destinations<R: Rng + ?Sized>(n: usize, max: usize, rng: &mut R) -> usize {
    rng.gen_range(1..=max.min(n - 1).max(1))
}

/// Edges `(a, b)`, `a ≠ b`, each present with probability `p`.
fn random_edges<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.gen_bool(p) {
                e.push((a, b));
            }
        }
    }
    e
}

fn linear_network<R: Rng + ?Sized>(
    names: Vec<String>,
    dests: usize,
    prime: u32,
    dim: usize,
    edges: &[(usize, usize)],
    rng: &mut R,
) -> RelayNetwork {
    let n = names.len();
    let mut d = NetworkDescription::linear(prime, dim)
        .nodes(names.clone())
        .source("S");
    for k in n - dests..n {
        d = d.destination(&names[k]);
    }
    for &(a, b) in edges {
        let g = FieldMatrix::sample_with(prime, dim, dim, rng);
        d = d.gain(&names[a], &names[b], g.to_rows());
    }
    d.build().expect("generated linear network is valid")
}

/// Arbitrary (possibly cyclic) linear network.
pub fn random_linear<R: Rng + ?Sized>(params: &LinearParams, rng: &mut R) -> RelayNetwork {
    let n = rng.gen_range(params.nodes.clone()).max(2);
    let dests = destinations(n, params.max_destinations, rng);
    let prime = *params.primes.choose(rng).expect("at least one prime");
    let dim = rng.gen_range(1..=params.max_dim);
    let edges = random_edges(n, params.edge_probability, rng);
    linear_network(names(n, dests), dests, prime, dim, &edges, rng)
}

/// Layer sizes `1, w_1, …, w_{L-1}, 1` and consecutive-layer edges in which
/// every relay has an in-edge and an out-edge.
fn layered_edges<R: Rng + ?Sized>(
    depth: usize,
    max_width: usize,
    p: f64,
    rng: &mut R,
) -> (usize, Vec<(usize, usize)>) {
    let mut layers = vec![vec![0usize]];
    let mut next = 1;
    for _ in 1..depth {
        let w = rng.gen_range(1..=max_width);
        layers.push((next..next + w).collect());
        next += w;
    }
    layers.push(vec![next]);
    let mut edges = Vec::new();
    for pair in layers.windows(2) {
        let (from, to) = (&pair[0], &pair[1]);
        for &b in to {
            edges.push((*from.choose(rng).expect("non-empty layer"), b));
        }
        for &a in from {
            if !edges.iter().any(|&(x, _)| x == a) {
                edges.push((a, *to.choose(rng).expect("non-empty layer")));
            }
        }
        for &a in from {
            for &b in to {
                if !edges.contains(&(a, b)) && rng.gen_bool(p) {
                    edges.push((a, b));
                }
            }
        }
    }
    (next + 1, edges)
}

/// Layered linear network with `depth` hops and at most `max_width` relays
/// per layer.
pub fn random_layered_linear<R: Rng + ?Sized>(
    depth: usize,
    max_width: usize,
    params: &LinearParams,
    rng: &mut R,
) -> RelayNetwork {
    let (n, edges) = layered_edges(depth.max(1), max_width, params.edge_probability, rng);
    let prime = *params.primes.choose(rng).expect("at least one prime");
    let dim = rng.gen_range(1..=params.max_dim);
    linear_network(names(n, 1), 1, prime, dim, &edges, rng)
}

fn general_network<R: Rng + ?Sized>(
    names: Vec<String>,
    dests: usize,
    edges: &[(usize, usize)],
    params: &GeneralParams,
    rng: &mut R,
) -> RelayNetwork {
    let n = names.len();
    let alphabets: Vec<u32> = (0..n)
        .map(|_| {
            rng.gen_range(
                params.min_alphabet.max(1)..=params.max_alphabet.max(params.min_alphabet).max(1),
            )
        })
        .collect();
    let mut d = NetworkDescription::general()
        .nodes(names.clone())
        .source("S");
    for k in n - dests..n {
        d = d.destination(&names[k]);
    }
    for (i, &a) in alphabets.iter().enumerate() {
        d = d.alphabet(&names[i], a);
    }
    for b in 0..n {
        let mut inputs: Vec<usize> = edges.iter().filter(|e| e.1 == b).map(|e| e.0).collect();
        if inputs.is_empty() {
            continue;
        }
        inputs.sort_unstable();
        let rows: usize = inputs.iter().map(|&i| alphabets[i] as usize).product();
        let outputs = rng.gen_range(1..=params.max_outputs.max(1));
        let table = (0..rows).map(|_| rng.gen_range(0..outputs)).collect();
        let inputs: Vec<&str> = inputs.iter().map(|&i| names[i].as_str()).collect();
        d = d.function(&names[b], &inputs, outputs, table);
    }
    d.build().expect("generated general network is valid")
}

/// Arbitrary general-model network with random function tables.
pub fn random_general<R: Rng + ?Sized>(params: &GeneralParams, rng: &mut R) -> RelayNetwork {
    let n = rng.gen_range(params.nodes.clone()).max(2);
    let dests = destinations(n, params.max_destinations, rng);
    let edges = random_edges(n, params.edge_probability, rng);
    general_network(names(n, dests), dests, &edges, params, rng)
}

pub fn random_layered_general<R: Rng + ?Sized>(
    depth: usize,
    max_width: usize,
    params: &GeneralParams,
    rng: &mut R,
) -> RelayNetwork {
    let (n, edges) = layered_edges(depth.max(1), max_width, params.edge_probability, rng);
    general_network(names(n, 1), 1, &edges, params, rng)
}

pub fn random_distribution<R: Rng + ?Sized>(
    net: &RelayNetwork,
    rng: &mut R,
) -> Result<ProductDistribution> {
    ProductDistribution::random(net, rng)
}

/// `len` distinct far sides (each containing `destination`, none
/// containing the source) in random order; `len` is capped by the number of
/// such sets.
pub fn random_family<R: Rng + ?Sized>(
    net: &RelayNetwork,
    destination: NodeId,
    len: usize,
    rng: &mut R,
) -> Result<SubsetFamily> {
    let free: Vec<NodeId> = net
        .nodes()
        .filter(|&v| v != net.source() && v != destination)
        .collect();
    let total = 1usize << free.len().min(20);
    let len = len.clamp(1, total);
    let mut codes = rand::seq::index::sample(rng, total, len).into_vec();
    codes.shuffle(rng);
    let sets = codes
        .into_iter()
        .map(|c| {
            let mut s = NodeSet::singleton(destination);
            for (b, &v) in free.iter().enumerate() {
                if c >> b & 1 == 1 {
                    s.insert(v);
                }
            }
            s
        })
        .collect();
    SubsetFamily::new(net, destination, sets)
}

/// `len` random subsets of `{0, …, universe − 1}`, repeats allowed.
pub fn random_masks<R: Rng + ?Sized>(universe: usize, len: usize, rng: &mut R) -> Vec<u128> {
    let full = if universe >= 128 {
        u128::MAX
    } else {
        (1u128 << universe) - 1
    };
    (0..len).map(|_| rng.gen::<u128>() & full).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layers::layer_structure;
    use crate::rng;

    #[test]
    fn generated_networks_are_valid_and_reproducible() {
        let p = LinearParams {
            max_destinations: 2,
            ..LinearParams::default()
        };
        for seed in 0..50 {
            let a = random_linear(&p, &mut rng::seeded(seed));
            let b = random_linear(&p, &mut rng::seeded(seed));
            assert_eq!(a, b);
            assert!(a.node_count() <= 5);
            let g = random_general(&GeneralParams::default(), &mut rng::seeded(seed));
            assert!(g.node_count() >= 2);
        }
    }

    #[test]
    fn layered_generators_are_layered() {
        let mut g = rng::seeded(3);
        for depth in 1..=4 {
            for _ in 0..10 {
                let net = random_layered_linear(depth, 2, &LinearParams::default(), &mut g);
                let layering = layer_structure(&net).into_result(&net).unwrap();
                assert_eq!(layering.depth(net.destinations()[0]), Some(depth as i64));
                let gen = random_layered_general(depth, 2, &GeneralParams::default(), &mut g);
                assert!(layer_structure(&gen).is_layered());
            }
        }
    }

    #[test]
    fn families_are_distinct_and_valid() {
        let mut g = rng::seeded(9);
        let net = random_linear(
            &LinearParams {
                nodes: 5..=5,
                ..LinearParams::default()
            },
            &mut g,
        );
        let d = net.destinations()[0];
        for len in 1..=10 {
            let f = random_family(&net, d, len, &mut g).unwrap();
            assert_eq!(f.sets().len(), len.min(8));
        }
    }
}
