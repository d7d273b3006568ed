//! Random relay coding on layered networks.
//!
//! Every relay applies an independently drawn random map to the block it
//! received: a uniform `Tq x Tq` matrix in the linear model, a uniform
//! mapping from received blocks to admissible transmit blocks in the general
//! model. The destination decodes by distinguishability: a trial fails when
//! some other message produces exactly the destination observation of the
//! sent one.
//!
//! Codewords are i.i.d. across messages, so the sent message is fixed to `0`
//! and a trial stops at the first competing message that collides.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cutset;
use crate::entropy::{EntropyEngine, ProductDistribution, SignalTables};
use crate::error::{Error, Result};
use crate::field::FieldMatrix;
use crate::layers::{layer_structure, LayerDecomposition};
use crate::limits::Limits;
use crate::network::{Model, RelayNetwork};
use crate::nodeset::{NodeId, NodeSet};
use crate::rng::{self, derive_seed, GENERATOR_ID};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationConfig {
    /// Bits per network use.
    pub rate: f64,
    pub block_length: usize,
    pub trials: u64,
    pub seed: u64,
    /// Robust-typicality parameter for the general model; `None` admits
    /// every block.
    pub delta: Option<f64>,
    /// Input distribution for typicality and the general-model bound;
    /// uniform when absent.
    pub distribution: Option<ProductDistribution>,
}

impl SimulationConfig {
    pub fn new(rate: f64, block_length: usize, trials: u64, seed: u64) -> Self {
        SimulationConfig {
            rate,
            block_length,
            trials,
            seed,
            delta: None,
            distribution: None,
        }
    }

    /// `2^{ceil(R T)}`.
    pub fn message_count(&self) -> Result<u64> {
        if !(self.rate >= 0.0) || !self.rate.is_finite() {
            return Err(Error::Precondition(format!(
                "rate {} must be non-negative",
                self.rate
            )));
        }
        let bits = (self.rate * self.block_length as f64 - 1e-9)
            .ceil()
            .max(0.0);
        if bits > 62.0 {
            return Err(Error::limit("message bits", bits as u64, 62u64));
        }
        Ok(1u64 << bits as u32)
    }

    fn check(&self) -> Result<()> {
        if self.block_length == 0 {
            return Err(Error::Precondition(
                "block length must be at least 1".into(),
            ));
        }
        if self.trials == 0 {
            return Err(Error::Precondition("trial count must be at least 1".into()));
        }
        if let Some(d) = self.delta {
            if !(d >= 0.0) {
                return Err(Error::Precondition(format!(
                    "delta {d} must be non-negative"
                )));
            }
        }
        self.message_count().map(|_| ())
    }

    pub fn mode_label(&self, net: &RelayNetwork) -> String {
        match (net.is_linear(), self.delta) {
            (true, _) => "linear".to_string(),
            (false, None) => "general/unrestricted".to_string(),
            (false, Some(d)) => format!("general/robust-typical(delta={d})"),
        }
    }
}

/// Transmit blocks a node may emit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Admissible {
    /// Every block index below the count.
    All(u64),
    /// Only the listed block indices, ascending.
    Listed(Vec<u64>),
}

impl Admissible {
    pub fn len(&self) -> u64 {
        match self {
            Admissible::All(n) => *n,
            Admissible::Listed(v) => v.len() as u64,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, k: u64) -> u64 {
        match self {
            Admissible::All(_) => k,
            Admissible::Listed(v) => v[k as usize],
        }
    }
}

/// Sequences of length `t` over `pmf.len()` symbols whose empirical
/// frequencies satisfy `|ν(a) − p(a)| ≤ δ p(a)` for every symbol.
pub fn robust_typical_blocks(
    pmf: &[f64],
    t: usize,
    delta: f64,
    limits: &Limits,
) -> Result<Vec<u64>> {
    let a = pmf.len() as u64;
    let total = a
        .checked_pow(t as u32)
        .filter(|&n| n <= limits.support)
        .ok_or_else(|| Error::limit("block space", u64::MAX, limits.support))?;
    let mut out = Vec::new();
    let mut counts = vec![0usize; pmf.len()];
    for b in 0..total {
        counts.iter_mut().for_each(|c| *c = 0);
        let mut x = b;
        for _ in 0..t {
            counts[(x % a) as usize] += 1;
            x /= a;
        }
        let typical = pmf
            .iter()
            .zip(&counts)
            .all(|(&p, &c)| (c as f64 / t as f64 - p).abs() <= delta * p + 1e-12);
        if typical {
            out.push(b);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Encoder {
    /// `x = F y` on the column-stacked received block.
    Linear(FieldMatrix),
    /// Received block index `k` maps to admissible entry
    /// `derive_seed(seed, k) mod |admissible|`.
    General { seed: u64 },
}

/// One draw of the random scheme: relay encoders and the codebook seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelayScheme {
    pub encoders: Vec<Option<Encoder>>,
    pub codebook_seed: u64,
    pub messages: u64,
}

/// Per-node comparison of two messages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialOutcome {
    /// Received blocks differ.
    pub received_differ: Vec<bool>,
    /// Transmitted blocks differ.
    pub transmitted_differ: Vec<bool>,
    /// Some destination cannot tell the two messages apart.
    pub destination_confused: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub mode: String,
    pub rate: f64,
    pub block_length: usize,
    pub messages: u64,
    pub trials: u64,
    pub errors: u64,
    pub error_rate: f64,
    /// `min(1, M · Σ_D |Λ_D| · 2^{−T C_D})`; absent when the cut values
    /// could not be computed within limits.
    pub union_bound: Option<f64>,
    /// Half-width of the normal-approximation 95% interval.
    pub half_width: f64,
    pub seed: u64,
    pub generator: &'static str,
}

type Block = Vec<u32>;

/// A network prepared for repeated scheme draws and trials.
#[derive(Debug, Clone)]
pub struct Simulator<'a> {
    net: &'a RelayNetwork,
    config: SimulationConfig,
    layering: LayerDecomposition,
    order: Vec<NodeId>,
    sources: NodeSet,
    /// For each destination, the nodes whose received blocks it observes.
    observers: Vec<Vec<NodeId>>,
    messages: u64,
    tables: Option<SignalTables>,
    admissible: Vec<Admissible>,
    limits: Limits,
}

impl<'a> Simulator<'a> {
    pub fn new(net: &'a RelayNetwork, config: SimulationConfig, limits: &Limits) -> Result<Self> {
        config.check()?;
        let layering = layer_structure(net).into_result(net)?;
        let order = layering.processing_order();
        let source = net.source();
        let sources: NodeSet = std::iter::once(source)
            .chain(
                net.unbounded()
                    .iter()
                    .filter(|e| e.from == source)
                    .map(|e| e.to),
            )
            .collect();
        let observers = net
            .destinations()
            .iter()
            .map(|&d| {
                std::iter::once(d)
                    .chain(net.unbounded().iter().filter(|e| e.to == d).map(|e| e.from))
                    .collect::<NodeSet>()
                    .iter()
                    .collect()
            })
            .collect();
        let messages = config.message_count()?;
        let t = config.block_length;
        let (tables, admissible) = match net.model() {
            Model::Linear(_) => (None, Vec::new()),
            Model::General(_) => {
                let tables = SignalTables::compile(net, limits)?;
                let dist = match &config.distribution {
                    Some(d) => {
                        d.check_against(net)?;
                        d.clone()
                    }
                    None => ProductDistribution::uniform(net)?,
                };
                let mut admissible = Vec::with_capacity(net.node_count());
                for i in net.nodes() {
                    let a = net.transmit_alphabet(i);
                    let blocks = a
                        .checked_pow(t as u32)
                        .ok_or_else(|| Error::limit("transmit block space", u64::MAX, u64::MAX))?;
                    // received block indices must fit as well
                    tables
                        .receive_alphabet(i)
                        .checked_pow(t as u32)
                        .ok_or_else(|| Error::limit("receive block space", u64::MAX, u64::MAX))?;
                    let adm = match config.delta {
                        None => Admissible::All(blocks),
                        Some(delta) => Admissible::Listed(robust_typical_blocks(
                            dist.pmf(i),
                            t,
                            delta,
                            limits,
                        )?),
                    };
                    if adm.is_empty() {
                        return Err(Error::Precondition(format!(
                            "no robust-typical block of length {t} for node `{}`",
                            net.name(i)
                        )));
                    }
                    admissible.push(adm);
                }
                (Some(tables), admissible)
            }
        };
        Ok(Simulator {
            net,
            config,
            layering,
            order,
            sources,
            observers,
            messages,
            tables,
            admissible,
            limits: *limits,
        })
    }

    pub fn messages(&self) -> u64 {
        self.messages
    }

    pub fn layering(&self) -> &LayerDecomposition {
        &self.layering
    }

    /// Independent encoders for every non-source node with an out-edge,
    /// drawn in node order, followed by the codebook seed.
    pub fn build_scheme(&self, seed: u64) -> RelayScheme {
        let mut g = rng::seeded(seed);
        let t = self.config.block_length;
        let encoders = self
            .net
            .nodes()
            .map(|j| {
                if self.sources.contains(j) || self.net.output_neighbors(j).is_empty() {
                    return None;
                }
                Some(match self.net.model() {
                    Model::Linear(l) => {
                        let n = l.dim * t;
                        Encoder::Linear(FieldMatrix::sample_with(l.prime, n, n, &mut g))
                    }
                    Model::General(_) => Encoder::General { seed: g.gen() },
                })
            })
            .collect();
        RelayScheme {
            encoders,
            codebook_seed: g.gen(),
            messages: self.messages,
        }
    }

    fn block_len(&self) -> usize {
        match self.net.model() {
            Model::Linear(l) => l.dim * self.config.block_length,
            Model::General(_) => self.config.block_length,
        }
    }

    /// Codeword component of every source node for message `w`.
    fn codeword(&self, scheme: &RelayScheme, w: u64) -> Vec<(NodeId, Block)> {
        let mut g = rng::seeded(derive_seed(scheme.codebook_seed, w));
        self.sources
            .iter()
            .map(|s| {
                let block = match self.net.model() {
                    Model::Linear(l) => (0..self.block_len())
                        .map(|_| g.gen_range(0..l.prime))
                        .collect(),
                    Model::General(_) => {
                        let adm = &self.admissible[s.0];
                        let b = adm.get(g.gen_range(0..adm.len()));
                        self.decode_block(b, self.net.transmit_alphabet(s))
                    }
                };
                (s, block)
            })
            .collect()
    }

    /// Symbols of block index `b`, first symbol most significant.
    fn decode_block(&self, mut b: u64, alphabet: u64) -> Block {
        let t = self.config.block_length;
        let mut out = vec![0u32; t];
        for k in (0..t).rev() {
            out[k] = (b % alphabet) as u32;
            b /= alphabet;
        }
        out
    }

    fn encode_block(block: &[u32], alphabet: u64) -> u64 {
        block.iter().fold(0u64, |acc, &s| acc * alphabet + s as u64)
    }

    /// Received and transmitted blocks of every node under message `w`.
    pub fn propagate(&self, scheme: &RelayScheme, w: u64) -> (Vec<Block>, Vec<Block>) {
        let n = self.net.node_count();
        let len = self.block_len();
        let mut received: Vec<Block> = vec![vec![0; len]; n];
        let mut transmitted: Vec<Block> = vec![vec![0; len]; n];
        for (s, block) in self.codeword(scheme, w) {
            transmitted[s.0] = block;
        }
        for &j in &self.order {
            received[j.0] = self.receive(j, &transmitted);
            if self.sources.contains(j) {
                continue;
            }
            if let Some(enc) = &scheme.encoders[j.0] {
                transmitted[j.0] = match enc {
                    Encoder::Linear(f) => {
                        let p = f.prime() as u64;
                        let y = &received[j.0];
                        (0..len)
                            .map(|r| {
                                let acc: u64 =
                                    (0..len).map(|c| f.get(r, c) as u64 * y[c] as u64).sum();
                                (acc % p) as u32
                            })
                            .collect()
                    }
                    Encoder::General { seed } => {
                        let tables = self.tables.as_ref().expect("general tables");
                        let k = Self::encode_block(&received[j.0], tables.receive_alphabet(j));
                        let adm = &self.admissible[j.0];
                        let b = adm.get(derive_seed(*seed, k) % adm.len());
                        self.decode_block(b, self.net.transmit_alphabet(j))
                    }
                };
            }
        }
        (received, transmitted)
    }

    fn receive(&self, j: NodeId, transmitted: &[Block]) -> Block {
        let inputs = self.net.input_neighbors(j);
        match self.net.model() {
            Model::Linear(l) => {
                let q = l.dim;
                let p = l.prime as u64;
                let mut y = vec![0u64; self.block_len()];
                for &i in inputs {
                    let g = &l.gains[&(i, j)];
                    let x = &transmitted[i.0];
                    for t in 0..self.config.block_length {
                        for r in 0..q {
                            let acc: u64 = (0..q)
                                .map(|c| g.get(r, c) as u64 * x[t * q + c] as u64)
                                .sum();
                            y[t * q + r] += acc;
                        }
                    }
                }
                y.into_iter().map(|v| (v % p) as u32).collect()
            }
            Model::General(_) => {
                let tables = self.tables.as_ref().expect("general tables");
                let mut symbols = vec![0u32; self.net.node_count()];
                (0..self.config.block_length)
                    .map(|t| {
                        for &i in inputs {
                            symbols[i.0] = transmitted[i.0][t];
                        }
                        tables.receive(j, &symbols)
                    })
                    .collect()
            }
        }
    }

    fn observation(&self, received: &[Block], d: usize) -> Vec<u32> {
        self.observers[d]
            .iter()
            .flat_map(|v| received[v.0].iter().copied())
            .collect()
    }

    pub fn run_trial(&self, scheme: &RelayScheme, w: u64, w2: u64) -> Result<TrialOutcome> {
        if w == w2 || w >= scheme.messages || w2 >= scheme.messages {
            return Err(Error::Precondition(format!(
                "messages {w} and {w2} must be distinct and below {}",
                scheme.messages
            )));
        }
        let (ra, ta) = self.propagate(scheme, w);
        let (rb, tb) = self.propagate(scheme, w2);
        let destination_confused =
            (0..self.observers.len()).any(|d| self.observation(&ra, d) == self.observation(&rb, d));
        Ok(TrialOutcome {
            received_differ: ra.iter().zip(&rb).map(|(a, b)| a != b).collect(),
            transmitted_differ: ta.iter().zip(&tb).map(|(a, b)| a != b).collect(),
            destination_confused,
        })
    }

    /// Draws a scheme from `seed` and reports whether some competing
    /// message is indistinguishable from message `0` at a destination.
    pub fn trial_errs(&self, seed: u64) -> bool {
        let scheme = self.build_scheme(seed);
        let (r0, _) = self.propagate(&scheme, 0);
        let sent: Vec<Vec<u32>> = (0..self.observers.len())
            .map(|d| self.observation(&r0, d))
            .collect();
        (1..self.messages).any(|w| {
            let (r, _) = self.propagate(&scheme, w);
            (0..self.observers.len()).any(|d| self.observation(&r, d) == sent[d])
        })
    }

    /// Analytic union bound from the per-destination min-cuts.
    pub fn union_bound(&self) -> Option<f64> {
        let t = self.config.block_length as f64;
        let free = self.net.node_count().saturating_sub(2) as i32;
        let cuts = 2f64.powi(free);
        let per_destination: Vec<f64> = match self.net.model() {
            Model::Linear(_) => {
                let cap = cutset::linear_capacity(self.net, &self.limits).ok()?;
                cap.per_destination.iter().map(|d| d.cut.bits).collect()
            }
            Model::General(_) => {
                let dist = match &self.config.distribution {
                    Some(d) => d.clone(),
                    None => ProductDistribution::uniform(self.net).ok()?,
                };
                let rate = cutset::achievable_rate(self.net, &dist, &self.limits).ok()?;
                rate.per_destination.iter().map(|d| d.cut.bits).collect()
            }
        };
        let sum: f64 = per_destination.iter().map(|c| cuts * (-t * c).exp2()).sum();
        Some((self.messages as f64 * sum).min(1.0))
    }

    pub fn estimate(&self) -> Result<SimulationReport> {
        let work = self.messages as u128 * self.config.trials as u128;
        if work > self.limits.simulation_work as u128 {
            return Err(Error::limit(
                "messages x trials",
                work,
                self.limits.simulation_work,
            ));
        }
        let master = self.config.seed;
        let errors: u64 = (0..self.config.trials)
            .into_par_iter()
            .map(|k| self.trial_errs(derive_seed(master, k)) as u64)
            .sum();
        let n = self.config.trials as f64;
        let rate = errors as f64 / n;
        Ok(SimulationReport {
            mode: self.config.mode_label(self.net),
            rate: self.config.rate,
            block_length: self.config.block_length,
            messages: self.messages,
            trials: self.config.trials,
            errors,
            error_rate: rate,
            union_bound: self.union_bound(),
            half_width: 1.96 * (rate * (1.0 - rate) / n).sqrt(),
            seed: master,
            generator: GENERATOR_ID,
        })
    }
}

pub fn build_scheme(
    net: &RelayNetwork,
    config: &SimulationConfig,
    seed: u64,
    limits: &Limits,
) -> Result<RelayScheme> {
    Ok(Simulator::new(net, config.clone(), limits)?.build_scheme(seed))
}

pub fn estimate_error_rate(
    net: &RelayNetwork,
    config: &SimulationConfig,
    limits: &Limits,
) -> Result<SimulationReport> {
    Simulator::new(net, config.clone(), limits)?.estimate()
}

/// Per-layer block of the transfer matrix: rows are `γ_l`, columns the
/// cut-side transmitters one level below.
pub fn layer_block(
    net: &RelayNetwork,
    layering: &LayerDecomposition,
    omega: NodeSet,
    l: i64,
) -> Result<FieldMatrix> {
    let lin = net.linear()?;
    let q = lin.dim;
    let part = layering.cut_partition(net, omega, l);
    let rows: Vec<NodeId> = part.gamma.iter().collect();
    let cols: Vec<NodeId> = part.beta.iter().collect();
    let mut m = FieldMatrix::zeros(lin.prime, q * rows.len(), q * cols.len())?;
    for (r, &b) in rows.iter().enumerate() {
        for (c, &a) in cols.iter().enumerate() {
            if let Some(g) = lin.gains.get(&(a, b)) {
                m.set_block(r * q, c * q, g)?;
            }
        }
    }
    Ok(m)
}

/// `Σ_l rank(G_l(Ω))` over the layers of a layered linear network.
pub fn layer_error_exponent(net: &RelayNetwork, omega: NodeSet) -> Result<usize> {
    net.linear()?;
    let layering = layer_structure(net).into_result(net)?;
    layering
        .transition_range()
        .map(|l| Ok(layer_block(net, &layering, omega, l)?.rank()))
        .sum()
}

/// `Σ_l H(Y_{γ_l} | X_{T_l ∩ Ω^c})` over the layers of a layered network.
pub fn general_layer_exponent(
    engine: &EntropyEngine,
    omega: NodeSet,
    dist: &ProductDistribution,
) -> Result<f64> {
    let net = engine.network();
    let layering = layer_structure(net).into_result(net)?;
    let far = omega.complement(net.node_count());
    layering
        .transition_range()
        .map(|l| {
            let part = layering.cut_partition(net, omega, l);
            if part.gamma.is_empty() {
                return Ok(0.0);
            }
            engine.conditional_entropy(dist, part.gamma, part.influencing.intersection(far))
        })
        .sum()
}

/// Result of tagging every transmitted block with the sub-message it
/// carries while a stream of sub-messages flows through the network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyncReport {
    pub synchronized: bool,
    /// A node whose inputs carried different sub-messages in one block,
    /// with two of the tags seen.
    pub conflict: Option<(NodeId, u64, u64)>,
}

/// Streams sub-messages `0, 1, 2, …` from the source, one per block, with
/// every relay forwarding in block `b` what it received in block `b − 1`.
pub fn message_sync_check(net: &RelayNetwork) -> SyncReport {
    let n = net.node_count();
    let horizon = n as u64 + 2;
    // tag of the block each node transmits at the current time
    let mut tx: Vec<Option<u64>> = vec![None; n];
    for b in 0..horizon {
        let mut next: Vec<Option<u64>> = vec![None; n];
        for j in net.nodes() {
            if j == net.source() {
                next[j.0] = Some(b);
                continue;
            }
            let mut tag: Option<u64> = None;
            for &i in net.input_neighbors(j) {
                match (tag, tx[i.0]) {
                    (None, t) => tag = t,
                    (Some(a), Some(c)) if a != c => {
                        return SyncReport {
                            synchronized: false,
                            conflict: Some((j, a, c)),
                        }
                    }
                    _ => {}
                }
            }
            next[j.0] = tag;
        }
        tx = next;
    }
    SyncReport {
        synchronized: true,
        conflict: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::network::NetworkDescription;

    fn limits() -> Limits {
        Limits::default()
    }

    #[test]
    fn message_count_rounds_up() {
        assert_eq!(
            SimulationConfig::new(1.0, 4, 1, 0).message_count().unwrap(),
            16
        );
        assert_eq!(
            SimulationConfig::new(0.3, 4, 1, 0).message_count().unwrap(),
            4
        );
        assert_eq!(
            SimulationConfig::new(0.0, 4, 1, 0).message_count().unwrap(),
            1
        );
        assert!(SimulationConfig::new(-1.0, 4, 1, 0)
            .message_count()
            .is_err());
    }

    #[test]
    fn scheme_is_deterministic() {
        let net = catalog::three_hop(2, 1);
        let cfg = SimulationConfig::new(1.0, 3, 1, 5);
        let a = build_scheme(&net, &cfg, 11, &limits()).unwrap();
        let b = build_scheme(&net, &cfg, 11, &limits()).unwrap();
        let c = build_scheme(&net, &cfg, 12, &limits()).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn single_relay_encoder_is_fair_coin() {
        let net = NetworkDescription::linear(2, 1)
            .nodes(["S", "R", "D"])
            .source("S")
            .destination("D")
            .gain("S", "R", vec![vec![1]])
            .gain("R", "D", vec![vec![1]])
            .build()
            .unwrap();
        let sim = Simulator::new(&net, SimulationConfig::new(1.0, 1, 1, 0), &limits()).unwrap();
        let r = net.node_id("R").unwrap();
        let ones = (0..10_000u64)
            .filter(|&s| match &sim.build_scheme(s).encoders[r.0] {
                Some(Encoder::Linear(f)) => f.get(0, 0) == 1,
                _ => panic!("relay has a linear encoder"),
            })
            .count();
        // within 5 standard deviations of 5000
        assert!((ones as i64 - 5000).abs() < 250, "{ones}");
    }

    #[test]
    fn not_layered_is_rejected() {
        let net = catalog::unequal_paths();
        let cfg = SimulationConfig::new(1.0, 2, 1, 0);
        assert!(matches!(
            Simulator::new(&net, cfg, &limits()),
            Err(Error::NotLayered(_))
        ));
    }

    #[test]
    fn single_message_never_errs() {
        let net = catalog::single_edge(2, 2);
        let r =
            estimate_error_rate(&net, &SimulationConfig::new(0.0, 4, 200, 3), &limits()).unwrap();
        assert_eq!(r.messages, 1);
        assert_eq!(r.errors, 0);
        assert_eq!(r.error_rate, 0.0);
    }

    #[test]
    fn zero_gain_network_confuses_everything() {
        let net = NetworkDescription::linear(2, 1)
            .nodes(["S", "A", "D"])
            .source("S")
            .destination("D")
            .gain("S", "A", vec![vec![0]])
            .gain("A", "D", vec![vec![0]])
            .build()
            .unwrap();
        let sim = Simulator::new(&net, SimulationConfig::new(1.0, 3, 1, 0), &limits()).unwrap();
        let scheme = sim.build_scheme(9);
        let out = sim.run_trial(&scheme, 0, 5).unwrap();
        let a = net.node_id("A").unwrap();
        let d = net.node_id("D").unwrap();
        assert!(!out.received_differ[a.0] && !out.received_differ[d.0]);
        assert!(out.destination_confused);
        assert!(sim.run_trial(&scheme, 2, 2).is_err());
    }

    #[test]
    fn identity_hop_distinguishes_distinct_codewords() {
        let net = catalog::single_edge(2, 2);
        let sim = Simulator::new(&net, SimulationConfig::new(1.0, 4, 1, 0), &limits()).unwrap();
        let s = net.source();
        for seed in 0..50 {
            let scheme = sim.build_scheme(seed);
            let out = sim.run_trial(&scheme, 1, 6).unwrap();
            assert_eq!(out.destination_confused, !out.transmitted_differ[s.0]);
        }
    }

    #[test]
    fn equal_reception_forces_equal_transmission() {
        let net = catalog::three_hop(2, 1);
        let sim = Simulator::new(&net, SimulationConfig::new(1.0, 2, 1, 0), &limits()).unwrap();
        for seed in 0..200 {
            let scheme = sim.build_scheme(seed);
            let out = sim.run_trial(&scheme, 0, 3).unwrap();
            for v in net.nodes().filter(|&v| v != net.source()) {
                if !out.received_differ[v.0] {
                    assert!(!out.transmitted_differ[v.0]);
                }
            }
        }
    }

    #[test]
    fn trials_are_symmetric() {
        let net = catalog::three_hop(3, 1);
        let sim = Simulator::new(&net, SimulationConfig::new(1.0, 2, 1, 0), &limits()).unwrap();
        let scheme = sim.build_scheme(4);
        assert_eq!(
            sim.run_trial(&scheme, 1, 2).unwrap(),
            sim.run_trial(&scheme, 2, 1).unwrap()
        );
    }

    #[test]
    fn reports_are_reproducible() {
        let net = catalog::three_hop(2, 1);
        let cfg = SimulationConfig::new(0.5, 4, 64, 21);
        let a = estimate_error_rate(&net, &cfg, &limits()).unwrap();
        let b = estimate_error_rate(&net, &cfg, &limits()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.generator, GENERATOR_ID);
    }

    #[test]
    fn union_bound_matches_formula() {
        let net = catalog::single_edge(2, 2);
        let sim = Simulator::new(&net, SimulationConfig::new(1.0, 4, 1, 0), &limits()).unwrap();
        assert_eq!(sim.union_bound(), Some(0.0625));
    }

    #[test]
    fn general_encoder_is_total() {
        let net = NetworkDescription::general()
            .nodes(["S", "R", "D"])
            .source("S")
            .destination("D")
            .alphabet("S", 2)
            .alphabet("R", 3)
            .alphabet("D", 1)
            .function("R", &["S"], 2, vec![0, 1])
            .function("D", &["R"], 3, vec![0, 1, 2])
            .build()
            .unwrap();
        let sim = Simulator::new(&net, SimulationConfig::new(1.0, 3, 1, 0), &limits()).unwrap();
        let scheme = sim.build_scheme(1);
        for w in 0..sim.messages() {
            let (_, tx) = sim.propagate(&scheme, w);
            let r = net.node_id("R").unwrap();
            assert!(tx[r.0].iter().all(|&x| x < 3));
        }
    }

    #[test]
    fn robust_typical_sets() {
        let l = limits();
        // binary uniform, T = 4: weight-2 sequences only at delta = 0
        assert_eq!(
            robust_typical_blocks(&[0.5, 0.5], 4, 0.0, &l)
                .unwrap()
                .len(),
            6
        );
        assert_eq!(
            robust_typical_blocks(&[0.5, 0.5], 4, 0.5, &l)
                .unwrap()
                .len(),
            14
        );
        assert_eq!(
            robust_typical_blocks(&[0.5, 0.5], 4, 1.0, &l)
                .unwrap()
                .len(),
            16
        );
        // zero-probability symbols never appear
        assert_eq!(
            robust_typical_blocks(&[1.0, 0.0], 3, 10.0, &l).unwrap(),
            vec![0]
        );
    }

    #[test]
    fn typical_mode_uses_typical_codewords() {
        let net = catalog::or_network();
        let mut cfg = SimulationConfig::new(0.5, 4, 1, 0);
        cfg.delta = Some(0.0);
        let sim = Simulator::new(&net, cfg.clone(), &limits()).unwrap();
        assert_eq!(cfg.mode_label(&net), "general/robust-typical(delta=0)");
        let scheme = sim.build_scheme(2);
        for w in 0..sim.messages() {
            let (_, tx) = sim.propagate(&scheme, w);
            let mut counts = [0; 4];
            tx[net.source().0]
                .iter()
                .for_each(|&x| counts[x as usize] += 1);
            assert_eq!(counts, [1, 1, 1, 1]);
        }
    }

    #[test]
    fn three_hop_layer_exponent() {
        let net = catalog::three_hop(2, 2);
        let omega = ["S", "A1", "B1"]
            .iter()
            .map(|n| net.node_id(n).unwrap())
            .collect();
        assert_eq!(layer_error_exponent(&net, omega).unwrap(), 6);
        assert_eq!(cutset::cut_rank(&net, omega).unwrap(), 6);
        let s = NodeSet::singleton(net.source());
        assert_eq!(layer_error_exponent(&net, s).unwrap(), 2);
        let single = catalog::single_edge(3, 2);
        assert_eq!(
            layer_error_exponent(&single, NodeSet::singleton(single.source())).unwrap(),
            2
        );
    }

    #[test]
    fn or_network_layer_entropy() {
        let net = catalog::or_network();
        let engine = EntropyEngine::new(&net, &limits()).unwrap();
        let u = ProductDistribution::uniform(&net).unwrap();
        let h = general_layer_exponent(&engine, NodeSet::singleton(net.source()), &u).unwrap();
        assert!((h - 0.811278124459).abs() < 1e-9);
    }

    #[test]
    fn layered_networks_stay_synchronized() {
        assert!(message_sync_check(&catalog::three_hop(2, 1)).synchronized);
        assert!(message_sync_check(&catalog::single_edge(2, 1)).synchronized);
        let r = message_sync_check(&catalog::unequal_paths());
        assert!(!r.synchronized);
        let (node, _, _) = r.conflict.unwrap();
        assert_eq!(node, catalog::unequal_paths().node_id("D").unwrap());
    }
}
