//! Tilde families of subset collections and the entropy inequalities built
//! on them.
//!
//! For sets `V_1, …, V_l` the tilde family is `Ṽ_k = ⋃_{|I| = k} ⋂_{i ∈ I} V_i`
//! for `k = 1..=l`. It is nested (`Ṽ_l ⊆ … ⊆ Ṽ_1`) and every element occurs
//! in as many `Ṽ_k` as `V_i`. Sets are bitmasks over at most 128 elements.

use rand::Rng;
use serde::Serialize;

use crate::entropy::{entropy_bits, EntropyEngine, ProductDistribution};
use crate::error::{Error, Result};
use crate::network::RelayNetwork;
use crate::nodeset::{NodeId, NodeSet};

/// Slack below which an inequality counts as violated.
pub const SLACK_TOLERANCE: f64 = -1e-9;

/// `Ṽ_1, …, Ṽ_l` by enumeration of every nonempty index subset.
pub fn tilde_family(sets: &[u128], max_len: usize) -> Result<Vec<u128>> {
    let l = sets.len();
    if l > max_len {
        return Err(Error::limit("family size", l as u64, max_len as u64));
    }
    let mut tilde = vec![0u128; l];
    // intersections[I] = ⋂_{i ∈ I} V_i, built from I without its lowest bit
    let mut intersections = vec![u128::MAX; 1 << l];
    for mask in 1usize..1 << l {
        let low = mask.trailing_zeros() as usize;
        let inter = intersections[mask & (mask - 1)] & sets[low];
        intersections[mask] = inter;
        tilde[mask.count_ones() as usize - 1] |= inter;
    }
    Ok(tilde)
}

/// `Ṽ_{k+1} ⊆ Ṽ_k` for every `k`.
pub fn is_nested(tilde: &[u128]) -> bool {
    tilde.windows(2).all(|w| w[1] & !w[0] == 0)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ElementCount {
    pub element: usize,
    pub in_sets: usize,
    pub in_tilde: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountingReport {
    pub elements: Vec<ElementCount>,
    pub passed: bool,
}

/// Occurrence counts of every element of `universe` in the sets and in
/// their tilde family.
pub fn counting_check(sets: &[u128], universe: u128, max_len: usize) -> Result<CountingReport> {
    let tilde = tilde_family(sets, max_len)?;
    let count = |family: &[u128], e: usize| family.iter().filter(|&&s| s >> e & 1 == 1).count();
    let elements: Vec<ElementCount> = (0..128)
        .filter(|&e| universe >> e & 1 == 1)
        .map(|e| ElementCount {
            element: e,
            in_sets: count(sets, e),
            in_tilde: count(&tilde, e),
        })
        .collect();
    let passed = elements.iter().all(|c| c.in_sets == c.in_tilde);
    Ok(CountingReport { elements, passed })
}

/// Both sides of `Σ ξ(V_i) ≥ Σ ξ(Ṽ_i)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub passed: bool,
}

impl InequalityReport {
    fn new(lhs: f64, rhs: f64) -> Self {
        let slack = lhs - rhs;
        InequalityReport {
            lhs,
            rhs,
            slack,
            passed: slack >= SLACK_TOLERANCE,
        }
    }
}

/// Checks `Σ ξ(V_i) ≥ Σ ξ(Ṽ_i)` for a set function `xi`.
pub fn k_way_submodularity_check<F>(
    xi: F,
    sets: &[u128],
    max_len: usize,
) -> Result<InequalityReport>
where
    F: Fn(u128) -> Result<f64>,
{
    let tilde = tilde_family(sets, max_len)?;
    let lhs = sets.iter().map(|&s| xi(s)).sum::<Result<f64>>()?;
    let rhs = tilde.iter().map(|&s| xi(s)).sum::<Result<f64>>()?;
    Ok(InequalityReport::new(lhs, rhs))
}

/// `Σ H(X_{V_i})` against `Σ H(X_{Ṽ_i})` for independent variables with the
/// given marginals; equal by the counting identity.
pub fn entropy_sum_identity(
    marginals: &[Vec<f64>],
    sets: &[u128],
    max_len: usize,
) -> Result<(f64, f64)> {
    let h: Vec<f64> = marginals
        .iter()
        .map(|m| entropy_bits(m.iter().copied()))
        .collect();
    let sum_over = |s: u128| -> f64 {
        (0..h.len())
            .filter(|&v| s >> v & 1 == 1)
            .map(|v| h[v])
            .sum()
    };
    let tilde = tilde_family(sets, max_len)?;
    Ok((
        sets.iter().map(|&s| sum_over(s)).sum(),
        tilde.iter().map(|&s| sum_over(s)).sum(),
    ))
}

/// A joint pmf over a few discrete variables, stored densely with the first
/// variable most significant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointPmf {
    cards: Vec<usize>,
    probs: Vec<f64>,
}

impl JointPmf {
    pub fn new(cards: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        let size: usize = cards.iter().product();
        if size != probs.len() {
            return Err(Error::Precondition(format!(
                "joint pmf has {} entries, expected {size}",
                probs.len()
            )));
        }
        if probs.iter().any(|&p| !(p >= 0.0)) || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::Precondition(
                "joint pmf must be non-negative and sum to 1".into(),
            ));
        }
        Ok(JointPmf { cards, probs })
    }

    /// Weights i.i.d. uniform(0, 1) cubed, so the variables are strongly
    /// dependent and some outcomes are nearly impossible.
    pub fn random<R: Rng + ?Sized>(cards: Vec<usize>, rng: &mut R) -> Self {
        let size: usize = cards.iter().product();
        let w: Vec<f64> = (0..size).map(|_| rng.gen::<f64>().powi(3)).collect();
        let total: f64 = w.iter().sum();
        JointPmf {
            cards,
            probs: w.into_iter().map(|x| x / total).collect(),
        }
    }

    pub fn independent(marginals: &[Vec<f64>]) -> Self {
        let cards: Vec<usize> = marginals.iter().map(Vec::len).collect();
        let mut probs = vec![1.0];
        for m in marginals {
            probs = probs
                .iter()
                .flat_map(|&p| m.iter().map(move |&q| p * q))
                .collect();
        }
        JointPmf { cards, probs }
    }

    pub fn variables(&self) -> usize {
        self.cards.len()
    }

    /// Entropy in bits of the variables in `mask`.
    pub fn entropy(&self, mask: u128) -> f64 {
        let n = self.cards.len();
        let mut marginal = crate::entropy::FixedMap::<usize, f64>::default();
        for (idx, &p) in self.probs.iter().enumerate() {
            let mut rest = idx;
            let mut key = 0usize;
            let mut digits = vec![0usize; n];
            for v in (0..n).rev() {
                digits[v] = rest % self.cards[v];
                rest /= self.cards[v];
            }
            for v in 0..n {
                if mask >> v & 1 == 1 {
                    key = key * self.cards[v] + digits[v];
                }
            }
            *marginal.entry(key).or_insert(0.0) += p;
        }
        entropy_bits(marginal.into_values())
    }
}

/// `l` pairwise distinct subsets of `V − {S}` that all contain one
/// destination.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetFamily {
    sets: Vec<NodeSet>,
    destination: NodeId,
}

impl SubsetFamily {
    pub fn new(net: &RelayNetwork, destination: NodeId, sets: Vec<NodeSet>) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::Precondition("family is empty".into()));
        }
        let all = net.all_nodes();
        for s in &sets {
            if !s.is_subset(all) {
                return Err(Error::Precondition(
                    "family member has unknown nodes".into(),
                ));
            }
            if s.contains(net.source()) {
                return Err(Error::Precondition(
                    "family member contains the source".into(),
                ));
            }
            if !s.contains(destination) {
                return Err(Error::Precondition(
                    "family member misses the destination".into(),
                ));
            }
        }
        let mut canonical = sets.clone();
        canonical.sort();
        if canonical.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Precondition(
                "family members must be pairwise distinct".into(),
            ));
        }
        Ok(SubsetFamily { sets, destination })
    }

    pub fn sets(&self) -> &[NodeSet] {
        &self.sets
    }

    pub fn destination(&self) -> NodeId {
        self.destination
    }

    pub fn masks(&self) -> Vec<u128> {
        self.sets.iter().map(|s| s.bits()).collect()
    }

    pub fn tilde(&self, max_len: usize) -> Result<Vec<NodeSet>> {
        Ok(tilde_family(&self.masks(), max_len)?
            .into_iter()
            .map(NodeSet::from_bits)
            .collect())
    }
}

/// Variable index of `Y_v` is `v`; of `X_v` it is `offset + v`.
pub const COMPOSITE_OFFSET: usize = 64;

pub fn composite(ys: NodeSet, xs: NodeSet) -> u128 {
    ys.bits() | xs.bits() << COMPOSITE_OFFSET
}

pub fn split_composite(mask: u128) -> (NodeSet, NodeSet) {
    let low = (1u128 << COMPOSITE_OFFSET) - 1;
    (
        NodeSet::from_bits(mask & low),
        NodeSet::from_bits(mask >> COMPOSITE_OFFSET),
    )
}

/// `W_i = {Y_{V_i}, X_{V_{i−1}}}` with `V_0 = V_l`.
pub fn w_sets(sets: &[NodeSet]) -> Vec<u128> {
    let l = sets.len();
    (0..l)
        .map(|i| composite(sets[i], sets[(i + l - 1) % l]))
        .collect()
}

/// Whether `W̃_r = {Y_{Ṽ_r}, X_{Ṽ_r}}` for every `r`.
pub fn w_tilde_identity(sets: &[NodeSet], max_len: usize) -> Result<bool> {
    let masks: Vec<u128> = sets.iter().map(|s| s.bits()).collect();
    let tilde = tilde_family(&masks, max_len)?;
    let w_tilde = tilde_family(&w_sets(sets), max_len)?;
    Ok(tilde
        .iter()
        .zip(&w_tilde)
        .all(|(&v, &w)| w == composite(NodeSet::from_bits(v), NodeSet::from_bits(v))))
}

/// The loop inequality and the intermediate steps of its proof.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopReport {
    /// `Σ ψ(V_i, V_{i+1})` around the cycle against `Σ ψ(Ṽ_i, Ṽ_i)`.
    pub inequality: InequalityReport,
    /// `Σ H(W_i)` against `Σ H(W̃_i)`.
    pub composite: InequalityReport,
    /// `Σ H(X_{V_i})` and `Σ H(X_{Ṽ_i})`.
    pub input_sums: (f64, f64),
    pub w_identity: bool,
    pub nested: bool,
}

impl LoopReport {
    pub fn passed(&self) -> bool {
        self.inequality.passed
            && self.composite.passed
            && (self.input_sums.0 - self.input_sums.1).abs() <= 1e-9
            && self.w_identity
            && self.nested
    }
}

pub fn loop_inequality_check(
    engine: &EntropyEngine,
    dist: &ProductDistribution,
    family: &SubsetFamily,
    max_len: usize,
) -> Result<LoopReport> {
    let sets = family.sets();
    let l = sets.len();
    let tilde = family.tilde(max_len)?;
    let lhs = (0..l)
        .map(|i| engine.psi(dist, sets[i], sets[(i + 1) % l]))
        .sum::<Result<f64>>()?;
    let rhs = tilde
        .iter()
        .map(|&t| engine.psi(dist, t, t))
        .sum::<Result<f64>>()?;
    let h = |mask: u128| -> Result<f64> {
        let (ys, xs) = split_composite(mask);
        engine.joint_entropy(dist, ys, xs)
    };
    let composite_report = k_way_submodularity_check(h, &w_sets(sets), max_len)?;
    let hx = |s: NodeSet| engine.joint_entropy(dist, NodeSet::EMPTY, s);
    let input_sums = (
        sets.iter().map(|&s| hx(s)).sum::<Result<f64>>()?,
        tilde.iter().map(|&s| hx(s)).sum::<Result<f64>>()?,
    );
    Ok(LoopReport {
        inequality: InequalityReport::new(lhs, rhs),
        composite: composite_report,
        input_sums,
        w_identity: w_tilde_identity(sets, max_len)?,
        nested: is_nested(&tilde.iter().map(|t| t.bits()).collect::<Vec<_>>()),
    })
}
