//! Time expansion of arbitrary networks into layered ones.
//!
//! `unfold(net, K)` builds copies `v[0], …, v[K]` of every node with an edge
//! `u[t] → v[t+1]` for each original edge `u → v`, so an unfolded cut spans
//! `K` channel uses. A super source `S*` feeds every `S[t]` and every
//! destination copy `d[t]` feeds a super destination `d*`, both through
//! unbounded links whose delays keep the whole network layered.
//!
//! An unfolded cut is described by its far side `V_t` at every stage. It is
//! valid when no unbounded link crosses it, i.e. `S ∉ V_t` and `d ∈ V_t` for
//! every `t`. Its value is `Σ_t ψ(V_t, V_{t+1})` with `ψ(A, B) = H(Y_B | X_A)`
//! under i.i.d. stages, or the rank of the unfolded transfer matrix.

use std::collections::HashMap;

use rand::Rng;
use serde::Serialize;

use crate::coding::{self, SimulationConfig, SimulationReport};
use crate::cutset;
use crate::entropy::{EntropyEngine, ProductDistribution};
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::network::{
    FunctionDescription, GainDescription, Model, ModelDescription, NetworkDescription,
    RelayNetwork, UnboundedDescription,
};
use crate::nodeset::{NodeId, NodeSet, MAX_NODES};
use crate::rng;
use crate::submodularity::{tilde_family, SLACK_TOLERANCE};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnfoldedNetwork {
    base: RelayNetwork,
    network: RelayNetwork,
    stages: usize,
}

/// Name of stage `t`'s copy of `name`.
pub fn stage_name(name: &str, t: usize) -> String {
    format!("{name}[{t}]")
}

pub fn super_name(name: &str) -> String {
    format!("{name}*")
}

pub fn unfold(net: &RelayNetwork, stages: usize) -> Result<UnfoldedNetwork> {
    if stages == 0 {
        return Err(Error::Precondition("stage count must be at least 1".into()));
    }
    let n = net.node_count();
    let total = (stages + 1) * n + 1 + net.destinations().len();
    if total > MAX_NODES {
        return Err(Error::limit(
            "unfolded node count",
            total as u64,
            MAX_NODES as u64,
        ));
    }
    let copies = |v: NodeId| (0..=stages).map(move |t| (t, v));
    let mut nodes: Vec<String> = (0..=stages)
        .flat_map(|t| net.nodes().map(move |v| (t, v)))
        .map(|(t, v)| stage_name(net.name(v), t))
        .collect();
    let src = super_name(net.name(net.source()));
    nodes.push(src.clone());
    let dests: Vec<String> = net
        .destinations()
        .iter()
        .map(|&d| super_name(net.name(d)))
        .collect();
    nodes.extend(dests.iter().cloned());

    let mut unbounded: Vec<UnboundedDescription> = copies(net.source())
        .map(|(t, s)| UnboundedDescription {
            from: src.clone(),
            to: stage_name(net.name(s), t),
            delay: t as u32 + 1,
        })
        .collect();
    for (k, &d) in net.destinations().iter().enumerate() {
        unbounded.extend(copies(d).map(|(t, d)| UnboundedDescription {
            from: stage_name(net.name(d), t),
            to: dests[k].clone(),
            delay: (stages + 1 - t) as u32,
        }));
    }

    let model = match net.model() {
        Model::Linear(l) => ModelDescription::Linear {
            prime: l.prime,
            dim: l.dim,
            edges: (0..stages)
                .flat_map(|t| {
                    l.gains.iter().map(move |(&(a, b), g)| GainDescription {
                        from: stage_name(net.name(a), t),
                        to: stage_name(net.name(b), t + 1),
                        matrix: g.to_rows(),
                    })
                })
                .collect(),
        },
        Model::General(g) => {
            let mut alphabets: Vec<(String, u32)> = (0..=stages)
                .flat_map(|t| {
                    net.nodes()
                        .map(move |v| (stage_name(net.name(v), t), g.alphabets[v.0]))
                })
                .collect();
            alphabets.push((src.clone(), 1));
            alphabets.extend(dests.iter().map(|d| (d.clone(), 1)));
            let mut edges = Vec::new();
            let mut functions = Vec::new();
            for t in 0..stages {
                for v in net.nodes() {
                    let Some(f) = &g.functions[v.0] else { continue };
                    let inputs: Vec<String> = f
                        .inputs
                        .iter()
                        .map(|&i| stage_name(net.name(i), t))
                        .collect();
                    let to = stage_name(net.name(v), t + 1);
                    edges.extend(inputs.iter().map(|i| (i.clone(), to.clone())));
                    functions.push((
                        to,
                        FunctionDescription {
                            inputs,
                            outputs: Some(f.outputs),
                            table: f.table.clone(),
                        },
                    ));
                }
            }
            ModelDescription::General {
                alphabets,
                edges,
                functions,
            }
        }
    };
    let description = NetworkDescription {
        name: Some(format!(
            "{}-unfolded-{stages}",
            net.title().unwrap_or("network")
        )),
        comment: None,
        nodes,
        source: src,
        destinations: dests,
        model,
        unbounded,
    };
    Ok(UnfoldedNetwork {
        base: net.clone(),
        network: description.build()?,
        stages,
    })
}

impl UnfoldedNetwork {
    pub fn base(&self) -> &RelayNetwork {
        &self.base
    }

    pub fn network(&self) -> &RelayNetwork {
        &self.network
    }

    /// Number of channel uses `K` spanned by the expansion.
    pub fn stages(&self) -> usize {
        self.stages
    }

    pub fn stage_node(&self, v: NodeId, t: usize) -> NodeId {
        NodeId(t * self.base.node_count() + v.0)
    }

    /// Original node and stage of an unfolded node; `None` for super nodes.
    pub fn origin(&self, u: NodeId) -> Option<(NodeId, usize)> {
        let n = self.base.node_count();
        (u.0 < (self.stages + 1) * n).then(|| (NodeId(u.0 % n), u.0 / n))
    }

    pub fn super_source(&self) -> NodeId {
        NodeId((self.stages + 1) * self.base.node_count())
    }

    /// Super destination for the `k`-th original destination.
    pub fn super_destination(&self, k: usize) -> NodeId {
        NodeId(self.super_source().0 + 1 + k)
    }
}

/// Far side `V_t` of an unfolded cut at each stage `t = 0..=K`, as sets of
/// original nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct UnfoldedCut {
    pub far: Vec<NodeSet>,
}

impl UnfoldedCut {
    pub fn is_steady(&self) -> bool {
        self.far.windows(2).all(|w| w[0] == w[1])
    }

    /// No unbounded link crosses from the source side to the far side.
    pub fn is_valid(&self, base: &RelayNetwork, destination: NodeId) -> bool {
        self.far
            .iter()
            .all(|v| !v.contains(base.source()) && v.contains(destination))
    }

    /// Source side of the cut as a node set of the unfolded network. Other
    /// super destinations stay on the source side.
    pub fn omega(&self, unf: &UnfoldedNetwork, destination_index: usize) -> NodeSet {
        let mut omega = NodeSet::singleton(unf.super_source());
        for (t, far) in self.far.iter().enumerate() {
            for v in unf.base.nodes().filter(|&v| !far.contains(v)) {
                omega.insert(unf.stage_node(v, t));
            }
        }
        for k in 0..unf.base.destinations().len() {
            if k != destination_index {
                omega.insert(unf.super_destination(k));
            }
        }
        omega
    }

    /// Stage-by-stage far sides of an unfolded source side.
    pub fn from_omega(unf: &UnfoldedNetwork, omega: NodeSet) -> Self {
        let far = (0..=unf.stages)
            .map(|t| {
                unf.base
                    .nodes()
                    .filter(|&v| !omega.contains(unf.stage_node(v, t)))
                    .collect()
            })
            .collect();
        UnfoldedCut { far }
    }
}

/// Far-side lift of an original cut `Ω` to every stage.
pub fn lift_steady_cut(unf: &UnfoldedNetwork, omega: NodeSet) -> UnfoldedCut {
    let far = omega.complement(unf.base.node_count());
    UnfoldedCut {
        far: vec![far; unf.stages + 1],
    }
}

/// How unfolded and original cuts are valued.
#[derive(Debug, Clone, PartialEq)]
pub enum CutEngine {
    /// Rank of the transfer matrix times `log2 p` (linear networks).
    Rank,
    /// Conditional entropy under a product distribution, i.i.d. over stages.
    Entropy(ProductDistribution),
}

/// Values unfolded cuts of one unfolded network with one engine.
pub struct CutEvaluator<'a> {
    unf: &'a UnfoldedNetwork,
    kind: EvaluatorKind<'a>,
    limits: Limits,
}

enum EvaluatorKind<'a> {
    Rank {
        log_p: f64,
    },
    Entropy {
        engine: EntropyEngine<'a>,
        dist: ProductDistribution,
        memo: std::sync::Mutex<HashMap<(NodeSet, NodeSet), f64>>,
    },
}

impl<'a> CutEvaluator<'a> {
    pub fn new(unf: &'a UnfoldedNetwork, engine: &CutEngine, limits: &Limits) -> Result<Self> {
        let kind = match engine {
            CutEngine::Rank => EvaluatorKind::Rank {
                log_p: (unf.base.linear()?.prime as f64).log2(),
            },
            CutEngine::Entropy(dist) => {
                dist.check_against(&unf.base)?;
                EvaluatorKind::Entropy {
                    engine: EntropyEngine::new(&unf.base, limits)?,
                    dist: dist.clone(),
                    memo: Default::default(),
                }
            }
        };
        Ok(CutEvaluator {
            unf,
            kind,
            limits: *limits,
        })
    }

    /// `ψ(V1, V2)` on the original network (bits); for the rank engine the
    /// rank of the gains from `V1^c` into `V2`.
    pub fn transition(&self, v1: NodeSet, v2: NodeSet) -> Result<f64> {
        match &self.kind {
            EvaluatorKind::Rank { log_p } => {
                let base = &self.unf.base;
                let lin = base.linear()?;
                let q = lin.dim;
                let tx: Vec<NodeId> = v1.complement(base.node_count()).iter().collect();
                let rx: Vec<NodeId> = v2.iter().collect();
                let mut m =
                    crate::field::FieldMatrix::zeros(lin.prime, q * rx.len(), q * tx.len())?;
                for (r, &b) in rx.iter().enumerate() {
                    for (c, &a) in tx.iter().enumerate() {
                        if let Some(g) = lin.gains.get(&(a, b)) {
                            m.set_block(r * q, c * q, g)?;
                        }
                    }
                }
                Ok(m.rank() as f64 * log_p)
            }
            EvaluatorKind::Entropy { engine, dist, memo } => {
                if let Some(&v) = memo.lock().expect("memo lock").get(&(v1, v2)) {
                    return Ok(v);
                }
                let v = engine.psi(dist, v1, v2)?;
                memo.lock().expect("memo lock").insert((v1, v2), v);
                Ok(v)
            }
        }
    }

    /// `Σ_t ψ(V_t, V_{t+1})`.
    pub fn value(&self, cut: &UnfoldedCut) -> Result<f64> {
        cut.far
            .windows(2)
            .map(|w| self.transition(w[0], w[1]))
            .sum()
    }

    /// Value computed on the unfolded network itself (rank engine only).
    pub fn direct_rank_value(&self, cut: &UnfoldedCut, destination_index: usize) -> Result<f64> {
        let log_p = (self.unf.base.linear()?.prime as f64).log2();
        let omega = cut.omega(self.unf, destination_index);
        Ok(cutset::cut_rank(&self.unf.network, omega)? as f64 * log_p)
    }

    /// Min-cut of the original network for each destination.
    pub fn original_min_cuts(&self) -> Result<Vec<f64>> {
        let report = match &self.kind {
            EvaluatorKind::Rank { .. } => cutset::linear_capacity(&self.unf.base, &self.limits)?,
            EvaluatorKind::Entropy { engine, dist, .. } => {
                cutset::achievable_rate_with(engine, dist, &self.limits)?
            }
        };
        Ok(report.per_destination.iter().map(|d| d.cut.bits).collect())
    }
}

/// Every valid unfolded cut for the `k`-th destination, by binary counter
/// over the free stage copies (stage-major, lowest id least significant).
pub fn enumerate_unfolded_cuts(
    unf: &UnfoldedNetwork,
    destination_index: usize,
    limits: &Limits,
) -> Result<Vec<UnfoldedCut>> {
    let base = &unf.base;
    let d = base.destinations()[destination_index];
    let free: Vec<NodeId> = base
        .nodes()
        .filter(|&v| v != base.source() && v != d)
        .collect();
    let bits = free.len() * (unf.stages + 1);
    if bits > limits.unfolded_free_nodes {
        return Err(Error::limit(
            "free unfolded nodes",
            bits as u64,
            limits.unfolded_free_nodes as u64,
        ));
    }
    let always = NodeSet::singleton(d);
    Ok((0u64..1 << bits)
        .map(|k| {
            let far = (0..=unf.stages)
                .map(|t| {
                    let mut v = always;
                    for (b, &x) in free.iter().enumerate() {
                        if k >> (t * free.len() + b) & 1 == 1 {
                            v.insert(x);
                        }
                    }
                    v
                })
                .collect();
            UnfoldedCut { far }
        })
        .collect())
}

/// Uniformly random valid unfolded cuts for the `k`-th destination.
pub fn sample_unfolded_cuts(
    unf: &UnfoldedNetwork,
    destination_index: usize,
    samples: usize,
    seed: u64,
) -> Vec<UnfoldedCut> {
    let base = &unf.base;
    let d = base.destinations()[destination_index];
    let free: Vec<NodeId> = base
        .nodes()
        .filter(|&v| v != base.source() && v != d)
        .collect();
    let mut g = rng::seeded(seed);
    (0..samples)
        .map(|_| UnfoldedCut {
            far: (0..=unf.stages)
                .map(|_| {
                    let mut v = NodeSet::singleton(d);
                    for &x in &free {
                        if g.gen::<bool>() {
                            v.insert(x);
                        }
                    }
                    v
                })
                .collect(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnfoldedMinCut {
    pub bits: f64,
    pub destination: NodeId,
    pub argmin: UnfoldedCut,
    pub steady: bool,
    pub cuts_evaluated: u64,
    /// Whether every valid cut was evaluated.
    pub exact: bool,
}

/// Minimum over destinations and valid unfolded cuts; ties go to the first
/// destination and the first cut in enumeration order.
pub fn unfolded_min_cut(
    unf: &UnfoldedNetwork,
    engine: &CutEngine,
    limits: &Limits,
) -> Result<UnfoldedMinCut> {
    let eval = CutEvaluator::new(unf, engine, limits)?;
    let mut best: Option<UnfoldedMinCut> = None;
    let mut total = 0;
    for (k, &d) in unf.base.destinations().iter().enumerate() {
        for cut in enumerate_unfolded_cuts(unf, k, limits)? {
            total += 1;
            let v = eval.value(&cut)?;
            if best.as_ref().map_or(true, |b| v < b.bits - 1e-12) {
                best = Some(UnfoldedMinCut {
                    bits: v,
                    destination: d,
                    steady: cut.is_steady(),
                    argmin: cut,
                    cuts_evaluated: 0,
                    exact: true,
                });
            }
        }
    }
    let mut best = best.expect("at least one cut");
    best.cuts_evaluated = total;
    Ok(best)
}

/// Upper estimate of the unfolded min-cut from every steady cut plus
/// `samples` random cuts per destination.
pub fn sampled_unfolded_min_cut(
    unf: &UnfoldedNetwork,
    engine: &CutEngine,
    samples: usize,
    seed: u64,
    limits: &Limits,
) -> Result<UnfoldedMinCut> {
    let eval = CutEvaluator::new(unf, engine, limits)?;
    let mut best: Option<UnfoldedMinCut> = None;
    let mut total = 0;
    for (k, &d) in unf.base.destinations().iter().enumerate() {
        let steady = cutset::enumerate_cuts(&unf.base, d, limits)?
            .into_iter()
            .map(|omega| lift_steady_cut(unf, omega));
        let random = sample_unfolded_cuts(unf, k, samples, rng::derive_seed(seed, k as u64));
        for cut in steady.chain(random) {
            total += 1;
            let v = eval.value(&cut)?;
            if best.as_ref().map_or(true, |b| v < b.bits - 1e-12) {
                best = Some(UnfoldedMinCut {
                    bits: v,
                    destination: d,
                    steady: cut.is_steady(),
                    argmin: cut,
                    cuts_evaluated: 0,
                    exact: false,
                });
            }
        }
    }
    let mut best = best.expect("at least one cut");
    best.cuts_evaluated = total;
    Ok(best)
}

/// `2^{|V|−2}`, the number of original cuts.
pub fn cut_count(net: &RelayNetwork) -> u64 {
    1u64 << net.node_count().saturating_sub(2)
}

/// A cycle `V_s → … → V_{s+len} = V_s` removed from an unfolded cut's stage
/// sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopCheck {
    pub start: usize,
    pub length: usize,
    /// `Σ ψ` along the cycle.
    pub value: f64,
    /// `Σ ψ(Ṽ_i, Ṽ_i)` over the tilde family of the cycle's sets.
    pub tilde_sum: f64,
    /// `length × min-cut`.
    pub floor: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutCheck {
    pub cut: UnfoldedCut,
    pub value: f64,
    pub slack: f64,
    pub passed: bool,
    pub loops: Vec<LoopCheck>,
    /// Transitions left after removing every cycle.
    pub path_length: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopBoundReport {
    pub stages: usize,
    pub cut_count: u64,
    pub destination: NodeId,
    pub original_min_cut: f64,
    /// `(K − L + 1) × min-cut`.
    pub bound: f64,
    pub vacuous: bool,
    pub cuts: Vec<CutCheck>,
    pub worst_slack: f64,
    pub passed: bool,
}

/// Splits the stage sequence into cycles (each closed at its first
/// revisit) and a remaining simple path.
fn decompose(far: &[NodeSet]) -> (Vec<(usize, Vec<NodeSet>)>, usize) {
    let mut stack: Vec<(usize, NodeSet)> = Vec::new();
    let mut loops = Vec::new();
    for (t, &v) in far.iter().enumerate() {
        if let Some(pos) = stack.iter().position(|&(_, s)| s == v) {
            let sets: Vec<NodeSet> = stack[pos..].iter().map(|&(_, s)| s).collect();
            loops.push((stack[pos].0, sets));
            stack.truncate(pos + 1);
        } else {
            stack.push((t, v));
        }
    }
    (loops, stack.len().saturating_sub(1))
}

/// Checks the `(K − L + 1)` lower bound on every valid unfolded cut for
/// every destination, together with its cycle decomposition.
pub fn loop_bound_check(
    unf: &UnfoldedNetwork,
    dist: &ProductDistribution,
    limits: &Limits,
) -> Result<Vec<LoopBoundReport>> {
    let eval = CutEvaluator::new(unf, &CutEngine::Entropy(dist.clone()), limits)?;
    let mins = eval.original_min_cuts()?;
    let l = cut_count(&unf.base);
    let k = unf.stages as f64;
    let factor = k - l as f64 + 1.0;
    unf.base
        .destinations()
        .iter()
        .enumerate()
        .map(|(di, &d)| {
            let c = mins[di];
            let bound = factor * c;
            let cuts = enumerate_unfolded_cuts(unf, di, limits)?
                .into_iter()
                .map(|cut| {
                    let value = eval.value(&cut)?;
                    let (cycles, path_length) = decompose(&cut.far);
                    let loops = cycles
                        .into_iter()
                        .map(|(start, sets)| {
                            let len = sets.len();
                            let value = (0..len)
                                .map(|i| eval.transition(sets[i], sets[(i + 1) % len]))
                                .sum::<Result<f64>>()?;
                            let masks: Vec<u128> = sets.iter().map(|s| s.bits()).collect();
                            let tilde_sum = tilde_family(&masks, limits.family_size)?
                                .into_iter()
                                .map(|t| {
                                    eval.transition(NodeSet::from_bits(t), NodeSet::from_bits(t))
                                })
                                .sum::<Result<f64>>()?;
                            let floor = len as f64 * c;
                            Ok(LoopCheck {
                                start,
                                length: len,
                                value,
                                tilde_sum,
                                floor,
                                passed: value - tilde_sum >= SLACK_TOLERANCE
                                    && tilde_sum - floor >= SLACK_TOLERANCE,
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    let slack = value - bound;
                    let passed = slack >= SLACK_TOLERANCE
                        && loops.iter().all(|l| l.passed)
                        && path_length as u64 <= l.saturating_sub(1);
                    Ok(CutCheck {
                        cut,
                        value,
                        slack,
                        passed,
                        loops,
                        path_length,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let worst_slack = cuts.iter().map(|c| c.slack).fold(f64::INFINITY, f64::min);
            Ok(LoopBoundReport {
                stages: unf.stages,
                cut_count: l,
                destination: d,
                original_min_cut: c,
                bound,
                vacuous: (unf.stages as u64) < l,
                passed: cuts.iter().all(|c| c.passed),
                cuts,
                worst_slack,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub stages: usize,
    pub unfolded_min_cut: f64,
    pub normalized: f64,
    /// `(K − L + 1) / K × min-cut`.
    pub lower: f64,
    /// The original min-cut.
    pub upper: f64,
    pub argmin_steady: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub cut_count: u64,
    pub original_min_cut: f64,
    pub rows: Vec<ConvergenceRow>,
    /// Normalised values never decrease with `K`.
    pub monotone: bool,
    /// Every normalised value lies within its bracket.
    pub bracketed: bool,
}

pub fn convergence_report(
    net: &RelayNetwork,
    stages: std::ops::RangeInclusive<usize>,
    engine: &CutEngine,
    limits: &Limits,
) -> Result<ConvergenceReport> {
    let l = cut_count(net);
    let mut rows = Vec::new();
    let mut original = None;
    for k in stages {
        let unf = unfold(net, k)?;
        let eval = CutEvaluator::new(&unf, engine, limits)?;
        let c = match original {
            Some(c) => c,
            None => {
                let c = eval
                    .original_min_cuts()?
                    .into_iter()
                    .fold(f64::INFINITY, f64::min);
                original = Some(c);
                c
            }
        };
        let min = unfolded_min_cut(&unf, engine, limits)?;
        let kf = k as f64;
        rows.push(ConvergenceRow {
            stages: k,
            unfolded_min_cut: min.bits,
            normalized: min.bits / kf,
            lower: (kf - l as f64 + 1.0) / kf * c,
            upper: c,
            argmin_steady: min.steady,
        });
    }
    let monotone = rows
        .windows(2)
        .all(|w| w[1].normalized >= w[0].normalized - 1e-9);
    let bracketed = rows
        .iter()
        .all(|r| r.normalized >= r.lower - 1e-9 && r.normalized <= r.upper + 1e-9);
    Ok(ConvergenceReport {
        cut_count: l,
        original_min_cut: original.unwrap_or(0.0),
        rows,
        monotone,
        bracketed,
    })
}

/// Simulation of the unfolded network at `rate` bits per original network
/// use, i.e. `K × rate` per use of the unfolded network.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnfoldedSimulation {
    pub stages: usize,
    pub rate_per_use: f64,
    pub report: SimulationReport,
}

pub fn simulate_unfolded(
    net: &RelayNetwork,
    stages: usize,
    config: &SimulationConfig,
    limits: &Limits,
) -> Result<UnfoldedSimulation> {
    let unf = unfold(net, stages)?;
    let mut scaled = config.clone();
    scaled.rate = config.rate * stages as f64;
    if let Some(d) = &config.distribution {
        let mut pmfs = Vec::new();
        for _ in 0..=stages {
            pmfs.extend(d.pmfs().iter().cloned());
        }
        pmfs.push(vec![1.0]);
        pmfs.extend(net.destinations().iter().map(|_| vec![1.0]));
        scaled.distribution = Some(ProductDistribution::new(pmfs)?);
    }
    Ok(UnfoldedSimulation {
        stages,
        rate_per_use: config.rate,
        report: coding::estimate_error_rate(unf.network(), &scaled, limits)?,
    })
}
