//! Relay network descriptions, validation and the validated network type.
//!
//! A [`NetworkDescription`] names nodes by string and may be inconsistent;
//! [`NetworkDescription::build`] checks every structural invariant and
//! produces an immutable [`RelayNetwork`] indexed by [`NodeId`].

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::field::{check_prime, FieldMatrix};
use crate::nodeset::{NodeId, NodeSet, MAX_NODES};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GainDescription {
    pub from: String,
    pub to: String,
    pub matrix: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionDescription {
    pub inputs: Vec<String>,
    /// Output alphabet size; defaults to `max(table) + 1`.
    pub outputs: Option<u32>,
    pub table: Vec<u32>,
}

/// An infinite-capacity marker link. The head either is the source or the
/// tail is a destination; `delay` is the number of layers the link spans.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnboundedDescription {
    pub from: String,
    pub to: String,
    pub delay: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelDescription {
    Linear {
        prime: u32,
        dim: usize,
        edges: Vec<GainDescription>,
    },
    General {
        alphabets: Vec<(String, u32)>,
        edges: Vec<(String, String)>,
        functions: Vec<(String, FunctionDescription)>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkDescription {
    pub name: Option<String>,
    pub comment: Option<String>,
    pub nodes: Vec<String>,
    pub source: String,
    pub destinations: Vec<String>,
    pub model: ModelDescription,
    pub unbounded: Vec<UnboundedDescription>,
}

impl NetworkDescription {
    pub fn linear(prime: u32, dim: usize) -> Self {
        Self::empty(ModelDescription::Linear {
            prime,
            dim,
            edges: Vec::new(),
        })
    }

    pub fn general() -> Self {
        Self::empty(ModelDescription::General {
            alphabets: Vec::new(),
            edges: Vec::new(),
            functions: Vec::new(),
        })
    }

    fn empty(model: ModelDescription) -> Self {
        NetworkDescription {
            name: None,
            comment: None,
            nodes: Vec::new(),
            source: String::new(),
            destinations: Vec::new(),
            model,
            unbounded: Vec::new(),
        }
    }

    pub fn named(mut self, name: &str) -> Self {
        self.name = Some(name.to_owned());
        self
    }

    pub fn nodes<I, S>(mut self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.nodes.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn source(mut self, name: &str) -> Self {
        self.source = name.to_owned();
        self
    }

    pub fn destination(mut self, name: &str) -> Self {
        self.destinations.push(name.to_owned());
        self
    }

    /// Adds a linear edge. Panics on a general-model description.
    pub fn gain(mut self, from: &str, to: &str, matrix: Vec<Vec<u32>>) -> Self {
        match &mut self.model {
            ModelDescription::Linear { edges, .. } => edges.push(GainDescription {
                from: from.to_owned(),
                to: to.to_owned(),
                matrix,
            }),
            ModelDescription::General { .. } => panic!("gain() on a general-model description"),
        }
        self
    }

    /// Sets a node's transmit alphabet size. Panics on a linear description.
    pub fn alphabet(mut self, name: &str, size: u32) -> Self {
        match &mut self.model {
            ModelDescription::General { alphabets, .. } => alphabets.push((name.to_owned(), size)),
            ModelDescription::Linear { .. } => panic!("alphabet() on a linear description"),
        }
        self
    }

    /// Declares node `name`'s output function and the matching in-edges.
    pub fn function(mut self, name: &str, inputs: &[&str], outputs: u32, table: Vec<u32>) -> Self {
        match &mut self.model {
            ModelDescription::General {
                edges, functions, ..
            } => {
                for &i in inputs {
                    let e = (i.to_owned(), name.to_owned());
                    if !edges.contains(&e) {
                        edges.push(e);
                    }
                }
                functions.push((
                    name.to_owned(),
                    FunctionDescription {
                        inputs: inputs.iter().map(|s| s.to_string()).collect(),
                        outputs: Some(outputs),
                        table,
                    },
                ));
            }
            ModelDescription::Linear { .. } => panic!("function() on a linear description"),
        }
        self
    }

    pub fn unbounded(mut self, from: &str, to: &str, delay: u32) -> Self {
        self.unbounded.push(UnboundedDescription {
            from: from.to_owned(),
            to: to.to_owned(),
            delay,
        });
        self
    }

    pub fn validate(&self) -> ValidationReport {
        match self.check() {
            Ok(net) => ValidationReport {
                violations: Vec::new(),
                warnings: net.warnings,
            },
            Err(report) => report,
        }
    }

    pub fn build(&self) -> Result<RelayNetwork> {
        self.check().map_err(Error::Invalid)
    }

    fn check(&self) -> std::result::Result<RelayNetwork, ValidationReport> {
        let mut v = Vec::new();
        let mut index: HashMap<&str, NodeId> = HashMap::new();
        if self.nodes.is_empty() {
            v.push("network declares no nodes".to_owned());
        }
        if self.nodes.len() > MAX_NODES {
            v.push(format!(
                "{} nodes exceed the maximum of {MAX_NODES}",
                self.nodes.len()
            ));
        }
        for (i, name) in self.nodes.iter().enumerate() {
            if name.is_empty() {
                v.push(format!("node {i} has an empty name"));
            }
            if index.insert(name.as_str(), NodeId(i)).is_some() {
                v.push(format!("duplicate node `{name}`"));
            }
        }
        let lookup = |name: &str, ctx: &str, v: &mut Vec<String>| -> Option<NodeId> {
            let id = index.get(name).copied();
            if id.is_none() {
                v.push(format!("unknown node `{name}` in {ctx}"));
            }
            id
        };

        let source = lookup(&self.source, "source", &mut v);
        if self.destinations.is_empty() {
            v.push("destination set is empty".to_owned());
        }
        let mut destinations = Vec::new();
        for d in &self.destinations {
            if let Some(id) = lookup(d, "destinations", &mut v) {
                if destinations.contains(&id) {
                    v.push(format!("duplicate destination `{d}`"));
                } else {
                    destinations.push(id);
                }
                if Some(id) == source {
                    v.push(format!("source `{d}` is also a destination"));
                }
            }
        }
        destinations.sort();

        let mut edges = Vec::new();
        let mut push_edge =
            |from: &str, to: &str, v: &mut Vec<String>| -> Option<(NodeId, NodeId)> {
                let ctx = format!("edge {from}->{to}");
                let a = lookup(from, &ctx, v);
                let b = lookup(to, &ctx, v);
                let (a, b) = (a?, b?);
                if edges.contains(&(a, b)) {
                    v.push(format!("duplicate edge {from}->{to}"));
                    return None;
                }
                edges.push((a, b));
                Some((a, b))
            };

        let model = match &self.model {
            ModelDescription::Linear {
                prime,
                dim,
                edges: gains_desc,
            } => {
                if let Err(e) = check_prime(*prime) {
                    v.push(format!("field: {e}"));
                }
                if *dim == 0 {
                    v.push("field dimension q must be at least 1".to_owned());
                }
                let mut gains = BTreeMap::new();
                for g in gains_desc {
                    let key = push_edge(&g.from, &g.to, &mut v);
                    if g.matrix.len() != *dim || g.matrix.iter().any(|r| r.len() != *dim) {
                        v.push(format!(
                            "edge {}->{}: matrix must be {dim}x{dim}",
                            g.from, g.to
                        ));
                        continue;
                    }
                    if g.matrix.iter().flatten().any(|&e| e >= *prime) {
                        v.push(format!(
                            "edge {}->{}: entry out of field range",
                            g.from, g.to
                        ));
                        continue;
                    }
                    if let (Some(key), Ok(m)) = (key, FieldMatrix::from_rows(*prime, &g.matrix)) {
                        gains.insert(key, m);
                    }
                }
                Model::Linear(LinearGains {
                    prime: *prime,
                    dim: *dim,
                    gains,
                })
            }
            ModelDescription::General {
                alphabets: alpha_desc,
                edges: edge_desc,
                functions: fn_desc,
            } => {
                for (a, b) in edge_desc {
                    push_edge(a, b, &mut v);
                }
                let mut alphabets = vec![0u32; self.nodes.len()];
                for (name, size) in alpha_desc {
                    if let Some(id) = lookup(name, "alphabets", &mut v) {
                        if alphabets[id.0] != 0 {
                            v.push(format!("alphabet of `{name}` declared twice"));
                        }
                        if *size == 0 {
                            v.push(format!("alphabet of `{name}` must be at least 1"));
                        }
                        alphabets[id.0] = *size;
                    }
                }
                for (i, &a) in alphabets.iter().enumerate() {
                    if a == 0 && !alpha_desc.iter().any(|(n, _)| *n == self.nodes[i]) {
                        v.push(format!("node `{}` has no alphabet", self.nodes[i]));
                    }
                }
                let mut functions: Vec<Option<NodeFunction>> = vec![None; self.nodes.len()];
                for (name, f) in fn_desc {
                    let Some(id) = lookup(name, "functions", &mut v) else {
                        continue;
                    };
                    if functions[id.0].is_some() {
                        v.push(format!("function of `{name}` declared twice"));
                        continue;
                    }
                    let mut inputs = Vec::new();
                    for i in &f.inputs {
                        if let Some(iid) = lookup(i, &format!("function of `{name}`"), &mut v) {
                            inputs.push(iid);
                        }
                    }
                    if inputs.len() != f.inputs.len() {
                        continue;
                    }
                    let rows = inputs
                        .iter()
                        .try_fold(1u64, |acc, i| acc.checked_mul(alphabets[i.0].max(1) as u64));
                    let Some(rows) = rows else {
                        v.push(format!("function of `{name}`: table too large"));
                        continue;
                    };
                    if f.table.len() as u64 != rows {
                        v.push(format!(
                            "function of `{name}`: table has {} rows, expected {rows}",
                            f.table.len()
                        ));
                        continue;
                    }
                    let outputs = f
                        .outputs
                        .unwrap_or_else(|| f.table.iter().copied().max().map_or(1, |m| m + 1));
                    if outputs == 0 {
                        v.push(format!(
                            "function of `{name}`: output alphabet must be at least 1"
                        ));
                        continue;
                    }
                    if f.table.iter().any(|&y| y >= outputs) {
                        v.push(format!("function of `{name}`: output out of range"));
                        continue;
                    }
                    functions[id.0] = Some(NodeFunction {
                        inputs,
                        outputs,
                        table: f.table.clone(),
                    });
                }
                Model::General(GeneralFunctions {
                    alphabets,
                    functions,
                })
            }
        };

        let mut unbounded = Vec::new();
        for u in &self.unbounded {
            let ctx = format!("unbounded link {}->{}", u.from, u.to);
            let (a, b) = (lookup(&u.from, &ctx, &mut v), lookup(&u.to, &ctx, &mut v));
            let (Some(a), Some(b)) = (a, b) else {
                continue;
            };
            if u.delay == 0 {
                v.push(format!("{ctx}: delay must be at least 1"));
            }
            if Some(a) != source && !destinations.contains(&b) {
                v.push(format!(
                    "{ctx}: must leave the source or enter a destination"
                ));
            }
            if a == b
                || unbounded
                    .iter()
                    .any(|x: &UnboundedEdge| (x.from, x.to) == (a, b))
            {
                v.push(format!("{ctx}: duplicate or self link"));
            }
            unbounded.push(UnboundedEdge {
                from: a,
                to: b,
                delay: u.delay,
            });
        }

        if !v.is_empty() {
            return Err(ValidationReport {
                violations: v,
                warnings: Vec::new(),
            });
        }
        let source = source.expect("checked above");
        edges.sort();
        unbounded.sort_by_key(|e| (e.from, e.to));
        let n = self.nodes.len();
        let mut inputs = vec![Vec::new(); n];
        let mut outputs = vec![Vec::new(); n];
        for &(a, b) in &edges {
            inputs[b.0].push(a);
            outputs[a.0].push(b);
        }

        let mut violations = Vec::new();
        if let Model::General(g) = &model {
            for j in 0..n {
                match &g.functions[j] {
                    Some(f) if f.inputs != inputs[j] => violations.push(format!(
                        "function of `{}`: inputs must list the in-neighbours {:?} in declaration order",
                        self.nodes[j],
                        inputs[j].iter().map(|i| &self.nodes[i.0]).collect::<Vec<_>>()
                    )),
                    None if !inputs[j].is_empty() => violations.push(format!(
                        "node `{}` has in-edges but no function table",
                        self.nodes[j]
                    )),
                    _ => {}
                }
            }
        }
        if !violations.is_empty() {
            return Err(ValidationReport {
                violations,
                warnings: Vec::new(),
            });
        }

        let mut net = RelayNetwork {
            name: self.name.clone(),
            comment: self.comment.clone(),
            names: self.nodes.clone(),
            source,
            destinations,
            edges,
            inputs,
            outputs,
            unbounded,
            model,
            warnings: Vec::new(),
        };
        net.warnings = net.compute_warnings();
        Ok(net)
    }
}

/// Outcome of [`NetworkDescription::validate`]. An empty `violations` list
/// means the description builds.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.violations.join("; "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnboundedEdge {
    pub from: NodeId,
    pub to: NodeId,
    pub delay: u32,
}

/// Per-edge channel matrices of the linear finite-field model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearGains {
    pub prime: u32,
    pub dim: usize,
    pub gains: BTreeMap<(NodeId, NodeId), FieldMatrix>,
}

/// Received-signal table of one node in the general model.
///
/// Row index is the mixed-radix number formed by the input symbols in
/// `inputs` order (ascending node id), first input most significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeFunction {
    pub inputs: Vec<NodeId>,
    pub outputs: u32,
    pub table: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralFunctions {
    pub alphabets: Vec<u32>,
    pub functions: Vec<Option<NodeFunction>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Model {
    Linear(LinearGains),
    General(GeneralFunctions),
}

/// A validated, immutable relay network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelayNetwork {
    name: Option<String>,
    comment: Option<String>,
    names: Vec<String>,
    source: NodeId,
    destinations: Vec<NodeId>,
    edges: Vec<(NodeId, NodeId)>,
    inputs: Vec<Vec<NodeId>>,
    outputs: Vec<Vec<NodeId>>,
    unbounded: Vec<UnboundedEdge>,
    model: Model,
    warnings: Vec<String>,
}

impl RelayNetwork {
    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.names.len()).map(NodeId)
    }

    pub fn all_nodes(&self) -> NodeSet {
        NodeSet::full(self.names.len())
    }

    pub fn name(&self, id: NodeId) -> &str {
        &self.names[id.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn node_id(&self, name: &str) -> Result<NodeId> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(NodeId)
            .ok_or_else(|| Error::UnknownNode(name.to_owned()))
    }

    pub fn set_names(&self, set: NodeSet) -> Vec<&str> {
        set.iter().map(|i| self.name(i)).collect()
    }

    pub fn title(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn comment(&self) -> Option<&str> {
        self.comment.as_deref()
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn destinations(&self) -> &[NodeId] {
        &self.destinations
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn has_edge(&self, from: NodeId, to: NodeId) -> bool {
        self.edges.binary_search(&(from, to)).is_ok()
    }

    /// `N_j`: nodes with an edge into `j`, ascending.
    pub fn input_neighbors(&self, j: NodeId) -> &[NodeId] {
        &self.inputs[j.0]
    }

    /// Input neighbours of a node given by name.
    pub fn input_neighbors_of(&self, name: &str) -> Result<NodeSet> {
        let j = self.node_id(name)?;
        Ok(self.inputs[j.0].iter().copied().collect())
    }

    pub fn output_neighbors(&self, i: NodeId) -> &[NodeId] {
        &self.outputs[i.0]
    }

    pub fn unbounded(&self) -> &[UnboundedEdge] {
        &self.unbounded
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.model, Model::Linear(_))
    }

    pub fn linear(&self) -> Result<&LinearGains> {
        match &self.model {
            Model::Linear(l) => Ok(l),
            Model::General(_) => Err(Error::Model { expected: "linear" }),
        }
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Size of node `i`'s transmit alphabet (`p^q` for the linear model).
    pub fn transmit_alphabet(&self, i: NodeId) -> u64 {
        match &self.model {
            Model::Linear(l) => (l.prime as u64).saturating_pow(l.dim as u32),
            Model::General(g) => g.alphabets[i.0] as u64,
        }
    }

    /// Nodes reachable from `start` along normal and unbounded edges.
    pub fn reachable_from(&self, start: NodeId) -> NodeSet {
        let mut seen = NodeSet::singleton(start);
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            let next = self.outputs[u.0]
                .iter()
                .copied()
                .chain(self.unbounded.iter().filter(|e| e.from == u).map(|e| e.to));
            for w in next {
                if !seen.contains(w) {
                    seen.insert(w);
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    fn compute_warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        let reach = self.reachable_from(self.source);
        for &d in &self.destinations {
            if !reach.contains(d) {
                w.push(format!(
                    "destination `{}` is unreachable from the source: capacity is zero",
                    self.name(d)
                ));
            }
        }
        let reaches_destination: HashSet<NodeId> = self
            .nodes()
            .filter(|&v| {
                self.destinations
                    .iter()
                    .any(|&d| self.reachable_from(v).contains(d))
            })
            .collect();
        for v in self.nodes() {
            if v == self.source || self.destinations.contains(&v) {
                continue;
            }
            if !reach.contains(v) {
                w.push(format!(
                    "node `{}` is unreachable from the source",
                    self.name(v)
                ));
            } else if !reaches_destination.contains(&v) {
                w.push(format!("node `{}` reaches no destination", self.name(v)));
            }
        }
        w
    }

    pub fn to_description(&self) -> NetworkDescription {
        let name = |i: &NodeId| self.names[i.0].clone();
        let model = match &self.model {
            Model::Linear(l) => ModelDescription::Linear {
                prime: l.prime,
                dim: l.dim,
                edges: l
                    .gains
                    .iter()
                    .map(|((a, b), m)| GainDescription {
                        from: name(a),
                        to: name(b),
                        matrix: m.to_rows(),
                    })
                    .collect(),
            },
            Model::General(g) => ModelDescription::General {
                alphabets: self.nodes().map(|i| (name(&i), g.alphabets[i.0])).collect(),
                edges: self.edges.iter().map(|(a, b)| (name(a), name(b))).collect(),
                functions: g
                    .functions
                    .iter()
                    .enumerate()
                    .filter_map(|(j, f)| {
                        f.as_ref().map(|f| {
                            (
                                self.names[j].clone(),
                                FunctionDescription {
                                    inputs: f.inputs.iter().map(name).collect(),
                                    outputs: Some(f.outputs),
                                    table: f.table.clone(),
                                },
                            )
                        })
                    })
                    .collect(),
            },
        };
        NetworkDescription {
            name: self.name.clone(),
            comment: self.comment.clone(),
            nodes: self.names.clone(),
            source: name(&self.source),
            destinations: self.destinations.iter().map(name).collect(),
            model,
            unbounded: self
                .unbounded
                .iter()
                .map(|e| UnboundedDescription {
                    from: name(&e.from),
                    to: name(&e.to),
                    delay: e.delay,
                })
                .collect(),
        }
    }
}
