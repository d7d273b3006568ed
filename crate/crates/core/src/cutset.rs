//! Source/destination cuts and the capacities they determine.
//!
//! Linear networks are scored by the rank of the transfer matrix across the
//! cut; any network can be scored by the conditional entropy of the far side's
//! received signals under a product input distribution.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::entropy::{EntropyEngine, ProductDistribution};
use crate::error::{Error, Result};
use crate::field::FieldMatrix;
use crate::limits::Limits;
use crate::network::RelayNetwork;
use crate::nodeset::{NodeId, NodeSet};
use crate::rng;

/// Label attached to every optimised-distribution result.
pub const LOWER_BOUND_LABEL: &str = "certified achievable lower bound";

/// All cuts separating the source from `destination`, in binary-counter
/// order over the remaining nodes (lowest id is the least significant bit).
/// Cuts crossed forward by an unbounded link have infinite value and are
/// left out.
pub fn enumerate_cuts(
    net: &RelayNetwork,
    destination: NodeId,
    limits: &Limits,
) -> Result<Vec<NodeSet>> {
    if !net.destinations().contains(&destination) {
        return Err(Error::Precondition(format!(
            "`{}` is not a destination",
            net.name(destination)
        )));
    }
    if net.node_count() > limits.cut_nodes {
        return Err(Error::limit(
            "node count",
            net.node_count() as u64,
            limits.cut_nodes as u64,
        ));
    }
    let source = net.source();
    let free: Vec<NodeId> = net
        .nodes()
        .filter(|&v| v != source && v != destination)
        .collect();
    let cuts: Vec<NodeSet> = (0u64..1 << free.len())
        .map(|k| {
            let mut omega = NodeSet::singleton(source);
            for (b, &v) in free.iter().enumerate() {
                if k >> b & 1 == 1 {
                    omega.insert(v);
                }
            }
            omega
        })
        .filter(|omega| {
            net.unbounded()
                .iter()
                .all(|e| !omega.contains(e.from) || omega.contains(e.to))
        })
        .collect();
    if cuts.is_empty() {
        return Err(Error::Precondition(format!(
            "every cut separating the source from `{}` crosses an unbounded link",
            net.name(destination)
        )));
    }
    Ok(cuts)
}

/// `G_{Ω,Ω^c}` with its row (receiver) and column (transmitter) node lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferMatrix {
    pub transmitters: Vec<NodeId>,
    pub receivers: Vec<NodeId>,
    pub matrix: FieldMatrix,
}

pub fn transfer_matrix(net: &RelayNetwork, omega: NodeSet) -> Result<TransferMatrix> {
    let lin = net.linear()?;
    let q = lin.dim;
    let crossing: Vec<(NodeId, NodeId)> = net
        .edges()
        .iter()
        .copied()
        .filter(|&(a, b)| omega.contains(a) && !omega.contains(b))
        .collect();
    let transmitters: Vec<NodeId> = crossing
        .iter()
        .map(|e| e.0)
        .collect::<NodeSet>()
        .iter()
        .collect();
    let receivers: Vec<NodeId> = crossing
        .iter()
        .map(|e| e.1)
        .collect::<NodeSet>()
        .iter()
        .collect();
    let mut matrix = FieldMatrix::zeros(lin.prime, q * receivers.len(), q * transmitters.len())?;
    for (a, b) in crossing {
        let r = receivers.binary_search(&b).expect("receiver listed");
        let t = transmitters.binary_search(&a).expect("transmitter listed");
        matrix.set_block(r * q, t * q, &lin.gains[&(a, b)])?;
    }
    Ok(TransferMatrix {
        transmitters,
        receivers,
        matrix,
    })
}

pub fn cut_rank(net: &RelayNetwork, omega: NodeSet) -> Result<usize> {
    Ok(transfer_matrix(net, omega)?.matrix.rank())
}

/// `rank(G_{Ω,Ω^c}) · log2 p` in bits.
pub fn rank_cut_value(net: &RelayNetwork, omega: NodeSet) -> Result<f64> {
    let p = net.linear()?.prime;
    Ok(cut_rank(net, omega)? as f64 * (p as f64).log2())
}

pub fn entropy_cut_value(
    engine: &EntropyEngine,
    omega: NodeSet,
    dist: &ProductDistribution,
) -> Result<f64> {
    engine.cut_value(dist, omega)
}

/// One cut with its value; `rank` is present for the rank engine.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutValue {
    pub omega: NodeSet,
    pub bits: f64,
    pub rank: Option<usize>,
}

/// Minimising cut for one destination.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DestinationCut {
    pub destination: NodeId,
    pub cut: CutValue,
}

/// Multicast value: the minimum over destinations of per-destination
/// min-cuts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutReport {
    pub bits: f64,
    pub per_destination: Vec<DestinationCut>,
}

impl CutReport {
    fn from_parts(per_destination: Vec<DestinationCut>) -> Self {
        let bits = per_destination
            .iter()
            .map(|d| d.cut.bits)
            .fold(f64::INFINITY, f64::min);
        CutReport {
            bits: if bits.is_finite() { bits } else { 0.0 },
            per_destination,
        }
    }
}

/// First minimum in enumeration order.
fn first_min(values: Vec<CutValue>) -> CutValue {
    let mut best: Option<CutValue> = None;
    for v in values {
        let better = match (&best, v.rank) {
            (None, _) => true,
            (Some(b), Some(r)) => r < b.rank.expect("rank engine"),
            (Some(b), None) => v.bits < b.bits,
        };
        if better {
            best = Some(v);
        }
    }
    best.expect("at least one cut")
}

/// Every cut for `destination` with its rank value, in enumeration order.
pub fn rank_cut_values(
    net: &RelayNetwork,
    destination: NodeId,
    limits: &Limits,
) -> Result<Vec<CutValue>> {
    let p = net.linear()?.prime;
    enumerate_cuts(net, destination, limits)?
        .into_par_iter()
        .map(|omega| {
            let rank = cut_rank(net, omega)?;
            Ok(CutValue {
                omega,
                bits: rank as f64 * (p as f64).log2(),
                rank: Some(rank),
            })
        })
        .collect()
}

/// Every cut for `destination` with its entropy value, in enumeration order.
pub fn entropy_cut_values(
    engine: &EntropyEngine,
    dist: &ProductDistribution,
    destination: NodeId,
    limits: &Limits,
) -> Result<Vec<CutValue>> {
    enumerate_cuts(engine.network(), destination, limits)?
        .into_par_iter()
        .map(|omega| {
            Ok(CutValue {
                omega,
                bits: engine.cut_value(dist, omega)?,
                rank: None,
            })
        })
        .collect()
}

/// Min-cut capacity of a linear network (unicast or multicast).
pub fn linear_capacity(net: &RelayNetwork, limits: &Limits) -> Result<CutReport> {
    let per = net
        .destinations()
        .iter()
        .map(|&d| {
            Ok(DestinationCut {
                destination: d,
                cut: first_min(rank_cut_values(net, d, limits)?),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CutReport::from_parts(per))
}

/// Min over destinations and cuts of the entropy cut value under `dist`.
pub fn achievable_rate_with(
    engine: &EntropyEngine,
    dist: &ProductDistribution,
    limits: &Limits,
) -> Result<CutReport> {
    let per = engine
        .network()
        .destinations()
        .iter()
        .map(|&d| {
            Ok(DestinationCut {
                destination: d,
                cut: first_min(entropy_cut_values(engine, dist, d, limits)?),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CutReport::from_parts(per))
}

pub fn achievable_rate(
    net: &RelayNetwork,
    dist: &ProductDistribution,
    limits: &Limits,
) -> Result<CutReport> {
    let engine = EntropyEngine::new(net, limits)?;
    achievable_rate_with(&engine, dist, limits)
}

/// How to search the product distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMethod {
    Uniform,
    /// Probabilities restricted to multiples of `1/resolution`.
    Grid {
        resolution: u32,
    },
    /// Pairwise mass-shift ascent from the uniform start plus
    /// `restarts - 1` random starts.
    CoordinateAscent {
        restarts: u32,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizedRate {
    pub method: SearchMethod,
    pub distribution: ProductDistribution,
    pub rate: CutReport,
    pub label: &'static str,
}

/// Searches product distributions for a large achievable rate.
///
/// Only nodes with more than one symbol and at least one out-edge affect
/// cut values; the others keep their uniform pmf. The uniform distribution
/// is always a candidate.
pub fn optimize_distribution(
    net: &RelayNetwork,
    method: SearchMethod,
    limits: &Limits,
) -> Result<OptimizedRate> {
    let engine = EntropyEngine::new(net, limits)?;
    let uniform = ProductDistribution::uniform(net)?;
    let free: Vec<NodeId> = net
        .nodes()
        .filter(|&i| net.transmit_alphabet(i) > 1 && !net.output_neighbors(i).is_empty())
        .collect();
    let eval = |d: &ProductDistribution| achievable_rate_with(&engine, d, limits);

    let (distribution, rate) = match method {
        SearchMethod::Uniform => {
            let r = eval(&uniform)?;
            (uniform, r)
        }
        SearchMethod::Grid { resolution } => {
            if resolution == 0 {
                return Err(Error::Precondition(
                    "grid resolution must be positive".into(),
                ));
            }
            let per_node: Vec<Vec<Vec<f64>>> = free
                .iter()
                .map(|&i| compositions(resolution, net.transmit_alphabet(i) as usize))
                .collect();
            let points = per_node
                .iter()
                .try_fold(1u64, |acc, c| acc.checked_mul(c.len() as u64))
                .unwrap_or(u64::MAX);
            if points > limits.grid_points {
                return Err(Error::limit("grid points", points, limits.grid_points));
            }
            let scored: Vec<(f64, u64)> = (0..points)
                .into_par_iter()
                .map(|k| {
                    let d = grid_point(&uniform, &free, &per_node, k);
                    Ok((eval(&d)?.bits, k))
                })
                .collect::<Result<_>>()?;
            let mut best_dist = uniform.clone();
            let mut best = eval(&uniform)?;
            for (bits, k) in scored {
                if bits > best.bits + 1e-12 {
                    best_dist = grid_point(&uniform, &free, &per_node, k);
                    best = eval(&best_dist)?;
                }
            }
            (best_dist, best)
        }
        SearchMethod::CoordinateAscent { restarts, seed } => {
            let mut best: Option<(ProductDistribution, CutReport)> = None;
            for r in 0..restarts.max(1) {
                let start = if r == 0 {
                    uniform.clone()
                } else {
                    let mut g = rng::seeded(rng::derive_seed(seed, r as u64));
                    random_start(&uniform, &free, &mut g)
                };
                let (d, v) = ascend(start, &free, &eval)?;
                if best.as_ref().map_or(true, |(_, b)| v.bits > b.bits + 1e-12) {
                    best = Some((d, v));
                }
            }
            best.expect("at least one restart")
        }
    };
    Ok(OptimizedRate {
        method,
        distribution,
        rate,
        label: LOWER_BOUND_LABEL,
    })
}

/// All pmfs on `parts` symbols with probabilities in multiples of `1/n`.
fn compositions(n: u32, parts: usize) -> Vec<Vec<f64>> {
    fn rec(left: u32, parts: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(left - k, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, parts, &mut Vec::new(), &mut out);
    out.into_iter()
        .map(|c| c.into_iter().map(|k| k as f64 / n as f64).collect())
        .collect()
}

fn grid_point(
    base: &ProductDistribution,
    free: &[NodeId],
    per_node: &[Vec<Vec<f64>>],
    mut k: u64,
) -> ProductDistribution {
    let mut d = base.clone();
    for (idx, &i) in free.iter().enumerate().rev() {
        let n = per_node[idx].len() as u64;
        d.set_pmf(i, per_node[idx][(k % n) as usize].clone());
        k /= n;
    }
    d
}

fn random_start<R: Rng + ?Sized>(
    base: &ProductDistribution,
    free: &[NodeId],
    g: &mut R,
) -> ProductDistribution {
    let mut d = base.clone();
    for &i in free {
        let w = (0..d.pmf(i).len()).map(|_| g.gen::<f64>() + 1e-3).collect();
        d.set_pmf(i, w);
    }
    d
}

const MAX_SWEEPS: usize = 400;

fn ascend<F>(
    mut d: ProductDistribution,
    free: &[NodeId],
    eval: &F,
) -> Result<(ProductDistribution, CutReport)>
where
    F: Fn(&ProductDistribution) -> Result<CutReport>,
{
    let mut best = eval(&d)?;
    let mut step: f64 = 0.25;
    let mut sweeps = 0;
    while step >= 1e-6 && sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut improved = false;
        for &i in free {
            let a = d.pmf(i).len();
            for from in 0..a {
                for to in 0..a {
                    if from == to || d.pmf(i)[from] <= 0.0 {
                        continue;
                    }
                    let mut pmf = d.pmf(i).to_vec();
                    let m = step.min(pmf[from]);
                    pmf[from] -= m;
                    pmf[to] += m;
                    let mut cand = d.clone();
                    cand.set_pmf(i, pmf);
                    let v = eval(&cand)?;
                    if v.bits > best.bits + 1e-9 {
                        d = cand;
                        best = v;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    Ok((d, best))
}
