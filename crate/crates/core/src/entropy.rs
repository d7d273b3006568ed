//! Exact entropies of received and transmitted signals under product input
//! distributions.
//!
//! Every network, linear or general, is first compiled into per-node
//! received-signal tables ([`SignalTables`]). Entropies are then computed by
//! enumerating the joint transmit assignments of the nodes that matter and
//! accumulating the induced joint pmf.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::BuildHasherDefault;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::network::{Model, RelayNetwork};
use crate::nodeset::{NodeId, NodeSet};

/// Probabilities at or below this are dropped before taking logarithms.
/// Hash map with a fixed hasher, so iteration (and summation) order is the
/// same in every process.
pub(crate) type FixedMap<K, V> = HashMap<K, V, BuildHasherDefault<DefaultHasher>>;

pub const PROB_FLOOR: f64 = 1e-15;

/// Shannon entropy in bits of an (unnormalised input is not rescaled) pmf.
pub fn entropy_bits<I: IntoIterator<Item = f64>>(probs: I) -> f64 {
    let nats: f64 = probs
        .into_iter()
        .filter(|&p| p > PROB_FLOOR)
        .map(|p| -p * p.ln())
        .sum();
    nats / std::f64::consts::LN_2
}

/// One independent pmf per node over its transmit alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductDistribution {
    pmfs: Vec<Vec<f64>>,
}

impl ProductDistribution {
    pub fn new(pmfs: Vec<Vec<f64>>) -> Result<Self> {
        for (i, pmf) in pmfs.iter().enumerate() {
            if pmf.is_empty() {
                return Err(Error::Precondition(format!("pmf of node {i} is empty")));
            }
            if pmf.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
                return Err(Error::Precondition(format!(
                    "pmf of node {i} has a negative entry"
                )));
            }
            let total: f64 = pmf.iter().sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::Precondition(format!(
                    "pmf of node {i} sums to {total}, not 1"
                )));
            }
        }
        Ok(ProductDistribution { pmfs })
    }

    pub fn uniform(net: &RelayNetwork) -> Result<Self> {
        let pmfs = net
            .nodes()
            .map(|i| {
                let a = alphabet_len(net, i)?;
                Ok(vec![1.0 / a as f64; a])
            })
            .collect::<Result<_>>()?;
        Ok(ProductDistribution { pmfs })
    }

    /// Each pmf proportional to i.i.d. uniform(0, 1) weights.
    pub fn random<R: Rng + ?Sized>(net: &RelayNetwork, rng: &mut R) -> Result<Self> {
        let pmfs = net
            .nodes()
            .map(|i| {
                let a = alphabet_len(net, i)?;
                let w: Vec<f64> = (0..a).map(|_| rng.gen::<f64>() + 1e-3).collect();
                Ok(normalise(w))
            })
            .collect::<Result<_>>()?;
        Ok(ProductDistribution { pmfs })
    }

    pub fn pmf(&self, i: NodeId) -> &[f64] {
        &self.pmfs[i.0]
    }

    pub fn pmfs(&self) -> &[Vec<f64>] {
        &self.pmfs
    }

    pub fn node_count(&self) -> usize {
        self.pmfs.len()
    }

    /// Replaces node `i`'s pmf, renormalising.
    pub fn set_pmf(&mut self, i: NodeId, pmf: Vec<f64>) {
        self.pmfs[i.0] = normalise(pmf);
    }

    pub fn check_against(&self, net: &RelayNetwork) -> Result<()> {
        if self.pmfs.len() != net.node_count() {
            return Err(Error::Precondition(format!(
                "distribution covers {} nodes, network has {}",
                self.pmfs.len(),
                net.node_count()
            )));
        }
        for i in net.nodes() {
            if self.pmfs[i.0].len() as u64 != net.transmit_alphabet(i) {
                return Err(Error::Precondition(format!(
                    "pmf of `{}` has {} entries, alphabet has {}",
                    net.name(i),
                    self.pmfs[i.0].len(),
                    net.transmit_alphabet(i)
                )));
            }
        }
        Ok(())
    }
}

pub(crate) fn normalise(mut w: Vec<f64>) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    for p in &mut w {
        *p /= total;
    }
    w
}

fn alphabet_len(net: &RelayNetwork, i: NodeId) -> Result<usize> {
    let a = net.transmit_alphabet(i);
    if a > 1 << 24 {
        return Err(Error::limit("transmit alphabet", a, 1u64 << 24));
    }
    Ok(a as usize)
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct ReceiveTable {
    inputs: Vec<NodeId>,
    outputs: u64,
    table: Vec<u32>,
}

/// Per-node received-signal lookup tables for either model.
///
/// In the linear model a symbol of `F_p^q` is the integer whose base-`p`
/// digits are its coordinates, first coordinate most significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalTables {
    transmit: Vec<u64>,
    receive: Vec<ReceiveTable>,
}

impl SignalTables {
    pub fn compile(net: &RelayNetwork, limits: &Limits) -> Result<Self> {
        let transmit: Vec<u64> = net.nodes().map(|i| net.transmit_alphabet(i)).collect();
        let mut receive = Vec::with_capacity(net.node_count());
        for j in net.nodes() {
            let inputs = net.input_neighbors(j).to_vec();
            let rows = inputs
                .iter()
                .try_fold(1u64, |acc, i| acc.checked_mul(transmit[i.0]))
                .filter(|&r| r <= limits.table_entries)
                .ok_or_else(|| {
                    Error::limit("receive table size", u64::MAX, limits.table_entries)
                })?;
            let t = match net.model() {
                Model::General(g) => match &g.functions[j.0] {
                    Some(f) => ReceiveTable {
                        inputs,
                        outputs: f.outputs as u64,
                        table: f.table.clone(),
                    },
                    None => ReceiveTable {
                        inputs,
                        outputs: 1,
                        table: vec![0],
                    },
                },
                Model::Linear(l) if inputs.is_empty() => ReceiveTable {
                    inputs,
                    outputs: 1,
                    table: vec![0],
                },
                Model::Linear(l) => {
                    let p = l.prime as u64;
                    let q = l.dim;
                    let alphabet = p.pow(q as u32);
                    // contribution[k][x] = digits of G_{i_k, j} * vec(x)
                    let contributions: Vec<Vec<Vec<u64>>> = inputs
                        .iter()
                        .map(|&i| {
                            let g = &l.gains[&(i, j)];
                            (0..alphabet)
                                .map(|x| {
                                    let v = decode_vector(x, p, q);
                                    (0..q)
                                        .map(|r| {
                                            (0..q).map(|c| g.get(r, c) as u64 * v[c]).sum::<u64>()
                                                % p
                                        })
                                        .collect()
                                })
                                .collect()
                        })
                        .collect();
                    let mut table = Vec::with_capacity(rows as usize);
                    let mut digits = vec![0u64; inputs.len()];
                    for _ in 0..rows {
                        let mut y = vec![0u64; q];
                        for (k, &x) in digits.iter().enumerate() {
                            for (acc, c) in y.iter_mut().zip(&contributions[k][x as usize]) {
                                *acc = (*acc + c) % p;
                            }
                        }
                        table.push(encode_vector(&y, p) as u32);
                        // odometer, last input least significant
                        for k in (0..digits.len()).rev() {
                            digits[k] += 1;
                            if digits[k] < alphabet {
                                break;
                            }
                            digits[k] = 0;
                        }
                    }
                    ReceiveTable {
                        inputs,
                        outputs: alphabet,
                        table,
                    }
                }
            };
            receive.push(t);
        }
        Ok(SignalTables { transmit, receive })
    }

    pub fn transmit_alphabet(&self, i: NodeId) -> u64 {
        self.transmit[i.0]
    }

    pub fn receive_alphabet(&self, j: NodeId) -> u64 {
        self.receive[j.0].outputs
    }

    pub fn inputs(&self, j: NodeId) -> &[NodeId] {
        &self.receive[j.0].inputs
    }

    /// Received symbol at `j` given every node's transmit symbol.
    pub fn receive(&self, j: NodeId, symbols: &[u32]) -> u32 {
        let t = &self.receive[j.0];
        let mut idx = 0u64;
        for i in &t.inputs {
            idx = idx * self.transmit[i.0] + symbols[i.0] as u64;
        }
        t.table[idx as usize]
    }
}

pub fn decode_vector(mut x: u64, p: u64, q: usize) -> Vec<u64> {
    let mut v = vec![0; q];
    for k in (0..q).rev() {
        v[k] = x % p;
        x /= p;
    }
    v
}

pub fn encode_vector(v: &[u64], p: u64) -> u64 {
    v.iter().fold(0, |acc, &d| acc * p + d)
}

/// Exhaustive entropy evaluator bound to one network and its tables.
#[derive(Debug, Clone)]
pub struct EntropyEngine<'a> {
    net: &'a RelayNetwork,
    tables: SignalTables,
    limits: Limits,
}

impl<'a> EntropyEngine<'a> {
    pub fn new(net: &'a RelayNetwork, limits: &Limits) -> Result<Self> {
        Ok(EntropyEngine {
            net,
            tables: SignalTables::compile(net, limits)?,
            limits: *limits,
        })
    }

    pub fn network(&self) -> &RelayNetwork {
        self.net
    }

    pub fn tables(&self) -> &SignalTables {
        &self.tables
    }

    /// Calls `visit(y_key, x_key, prob)` for every joint transmit assignment
    /// of positive probability, where the keys encode `Y_ys` and `X_xs`.
    fn enumerate<F: FnMut(u128, u128, f64)>(
        &self,
        dist: &ProductDistribution,
        ys: NodeSet,
        xs: NodeSet,
        mut visit: F,
    ) -> Result<()> {
        dist.check_against(self.net)?;
        let mut relevant = xs;
        for j in ys.iter() {
            relevant = relevant.union(self.tables.inputs(j).iter().copied().collect());
        }
        let relevant: Vec<NodeId> = relevant.iter().collect();
        // only symbols with positive probability are enumerated
        let supports: Vec<Vec<(u32, f64)>> = relevant
            .iter()
            .map(|&i| {
                dist.pmf(i)
                    .iter()
                    .enumerate()
                    .filter(|&(_, &p)| p > 0.0)
                    .map(|(x, &p)| (x as u32, p))
                    .collect()
            })
            .collect();
        let support = supports
            .iter()
            .try_fold(1u64, |acc, s| acc.checked_mul(s.len() as u64))
            .unwrap_or(u64::MAX);
        if support > self.limits.support {
            return Err(Error::limit("joint support", support, self.limits.support));
        }
        let key_space = ys
            .iter()
            .map(|j| self.tables.receive_alphabet(j) as u128)
            .chain(xs.iter().map(|i| self.tables.transmit_alphabet(i) as u128))
            .try_fold(1u128, |acc, r| acc.checked_mul(r));
        if key_space.is_none() {
            return Err(Error::limit("joint key space", u128::MAX, u128::MAX));
        }

        let mut symbols = vec![0u32; self.net.node_count()];
        let mut pos = vec![0usize; relevant.len()];
        for _ in 0..support {
            let mut prob = 1.0;
            for (k, &i) in relevant.iter().enumerate() {
                let (x, p) = supports[k][pos[k]];
                symbols[i.0] = x;
                prob *= p;
            }
            let mut y_key = 0u128;
            for j in ys.iter() {
                y_key = y_key * self.tables.receive_alphabet(j) as u128
                    + self.tables.receive(j, &symbols) as u128;
            }
            let mut x_key = 0u128;
            for i in xs.iter() {
                x_key = x_key * self.tables.transmit_alphabet(i) as u128 + symbols[i.0] as u128;
            }
            visit(y_key, x_key, prob);
            for k in (0..pos.len()).rev() {
                pos[k] += 1;
                if pos[k] < supports[k].len() {
                    break;
                }
                pos[k] = 0;
            }
        }
        Ok(())
    }

    /// `H(Y_ys, X_xs)` in bits.
    pub fn joint_entropy(
        &self,
        dist: &ProductDistribution,
        ys: NodeSet,
        xs: NodeSet,
    ) -> Result<f64> {
        let mut pmf: FixedMap<(u128, u128), f64> = FixedMap::default();
        self.enumerate(dist, ys, xs, |y, x, p| {
            *pmf.entry((y, x)).or_insert(0.0) += p
        })?;
        Ok(entropy_bits(pmf.into_values()))
    }

    /// `H(Y_ys | X_xs)` in bits, from a single pass over the joint pmf.
    pub fn conditional_entropy(
        &self,
        dist: &ProductDistribution,
        ys: NodeSet,
        xs: NodeSet,
    ) -> Result<f64> {
        let mut joint: FixedMap<(u128, u128), f64> = FixedMap::default();
        let mut given: FixedMap<u128, f64> = FixedMap::default();
        self.enumerate(dist, ys, xs, |y, x, p| {
            *joint.entry((y, x)).or_insert(0.0) += p;
            *given.entry(x).or_insert(0.0) += p;
        })?;
        let nats: f64 = joint
            .into_iter()
            .filter(|&(_, p)| p > PROB_FLOOR)
            .map(|((_, x), p)| -p * (p / given[&x]).ln())
            .sum();
        Ok((nats / std::f64::consts::LN_2).max(0.0))
    }

    /// `ψ(V1, V2) = H(Y_{V2} | X_{V1})`.
    pub fn psi(&self, dist: &ProductDistribution, v1: NodeSet, v2: NodeSet) -> Result<f64> {
        self.conditional_entropy(dist, v2, v1)
    }

    /// `H(Y_{Ω^c} | X_{Ω^c})` for the cut whose source side is `omega`.
    pub fn cut_value(&self, dist: &ProductDistribution, omega: NodeSet) -> Result<f64> {
        let far = omega.complement(self.net.node_count());
        self.psi(dist, far, far)
    }
}
