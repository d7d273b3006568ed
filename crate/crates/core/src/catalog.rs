//! Small named networks used throughout the documentation and tests.

use crate::network::{NetworkDescription, RelayNetwork};

pub fn identity_rows(q: usize) -> Vec<Vec<u32>> {
    (0..q)
        .map(|i| (0..q).map(|j| (i == j) as u32).collect())
        .collect()
}

/// `S -> D` with an identity gain.
pub fn single_edge(p: u32, q: usize) -> RelayNetwork {
    NetworkDescription::linear(p, q)
        .named("single-edge")
        .nodes(["S", "D"])
        .source("S")
        .destination("D")
        .gain("S", "D", identity_rows(q))
        .build()
        .expect("single edge network")
}

/// Diamond over F_2 with q = 2 whose cut ranks are (2, 2, 4, 2).
pub fn diamond() -> RelayNetwork {
    let e11 = vec![vec![1, 0], vec![0, 0]];
    NetworkDescription::linear(2, 2)
        .named("diamond")
        .nodes(["S", "A", "B", "D"])
        .source("S")
        .destination("D")
        .gain("S", "A", identity_rows(2))
        .gain("S", "B", e11.clone())
        .gain("A", "D", e11)
        .gain("B", "D", identity_rows(2))
        .build()
        .expect("diamond network")
}

/// Three-hop layered network `S; A1, A2; B1, B2; D` with every cross edge
/// between consecutive layers and identity gains.
pub fn three_hop(p: u32, q: usize) -> RelayNetwork {
    let i = identity_rows(q);
    NetworkDescription::linear(p, q)
        .named("three-hop")
        .nodes(["S", "A1", "A2", "B1", "B2", "D"])
        .source("S")
        .destination("D")
        .gain("S", "A1", i.clone())
        .gain("S", "A2", i.clone())
        .gain("A1", "B1", i.clone())
        .gain("A1", "B2", i.clone())
        .gain("A2", "B1", i.clone())
        .gain("A2", "B2", i.clone())
        .gain("B1", "D", i.clone())
        .gain("B2", "D", i)
        .build()
        .expect("three-hop network")
}

/// `S -> D` plus `S -> A -> D`, all 1x1 identity gains over F_2 (capacity 1 bit).
pub fn unequal_paths() -> RelayNetwork {
    NetworkDescription::linear(2, 1)
        .named("unequal-paths")
        .nodes(["S", "A", "D"])
        .source("S")
        .destination("D")
        .gain("S", "A", vec![vec![1]])
        .gain("S", "D", vec![vec![1]])
        .gain("A", "D", vec![vec![1]])
        .build()
        .expect("unequal paths network")
}

/// Single hop where the source sends two bits (symbol `2*b1 + b2`) and the
/// destination receives their OR.
pub fn or_network() -> RelayNetwork {
    NetworkDescription::general()
        .named("or")
        .nodes(["S", "D"])
        .source("S")
        .destination("D")
        .alphabet("S", 4)
        .alphabet("D", 1)
        .function("D", &["S"], 2, vec![0, 1, 1, 1])
        .build()
        .expect("or network")
}
