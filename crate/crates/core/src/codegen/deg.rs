use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{KernelBody, Pattern, Program};
use crate::ir::{Graph, SymId};
use crate::opt::{scope_dep_graph, EdgeKind, Schedule};

/// Kernel dependency graph in its serialized form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Deg {
    pub program: String,
    pub kernels: Vec<DegKernel>,
    pub edges: Vec<DegEdge>,
    pub result: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct DegKernel {
    pub id: String,
    pub pattern: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub anti_deps: Vec<String>,
    pub size: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegEdge {
    pub from: String,
    pub to: String,
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DegError {
    #[error("malformed kernel graph: {0}")]
    Parse(String),
    #[error("invalid kernel graph: {0}")]
    Invalid(String),
    #[error("cyclic dependency among kernels {0}")]
    Cyclic(String),
}

const EDGE_KINDS: [&str; 3] = ["data", "anti", "order"];

fn parse_sym(s: &str) -> Option<u32> {
    let n = s.strip_prefix('x')?;
    if n.is_empty() || (n.len() > 1 && n.starts_with('0')) {
        return None;
    }
    n.parse().ok()
}

fn parse_kernel_id(s: &str) -> Option<usize> {
    let n = s.strip_prefix('k')?;
    if n.is_empty() || (n.len() > 1 && n.starts_with('0')) {
        return None;
    }
    n.parse().ok()
}

/// The kernel graph of a generated program. Edges come from the
/// top-level dependency graph: value flow, memory ordering between
/// mutations, and console or global ordering.
pub fn emit_deg(g: &Graph, sched: &Schedule, p: &Program) -> Deg {
    let kernel_of: HashMap<SymId, usize> = p
        .kernels
        .iter()
        .flat_map(|k| k.outputs.iter().map(move |o| (*o, k.id)))
        .collect();
    let dg = scope_dep_graph(g, sched, g.root.id);
    let mut edges = BTreeSet::new();
    let mut anti: HashMap<usize, BTreeSet<SymId>> = HashMap::new();
    for (a, b, kind) in &dg.edges {
        let (ka, kb) = (kernel_of[a], kernel_of[b]);
        let flows = p.kernels[kb]
            .inputs
            .iter()
            .any(|s| kernel_of.get(s) == Some(&ka));
        let label = match kind {
            EdgeKind::Data if flows => "data",
            EdgeKind::Order => "order",
            _ => "anti",
        };
        if label != "data" {
            anti.entry(kb).or_default().insert(p.kernels[ka].outputs[0]);
        }
        edges.insert((ka, kb, label));
    }
    let kernels = p
        .kernels
        .iter()
        .map(|k| DegKernel {
            id: k.name(),
            pattern: k.pattern.name().to_string(),
            inputs: k.inputs.iter().map(|s| s.to_string()).collect(),
            outputs: k.outputs.iter().map(|s| s.to_string()).collect(),
            anti_deps: anti
                .get(&k.id)
                .map(|s| s.iter().map(|x| x.to_string()).collect())
                .unwrap_or_default(),
            size: match &k.body {
                KernelBody::Loop(l) => Some(l.size.to_string()),
                KernelBody::Task(_) => None,
            },
        })
        .collect();
    Deg {
        program: p.name.clone(),
        kernels,
        edges: edges
            .into_iter()
            .map(|(a, b, kind)| DegEdge {
                from: format!("k{a}"),
                to: format!("k{b}"),
                kind: kind.to_string(),
            })
            .collect(),
        result: p.result.sym().map(|s| s.to_string()),
    }
}

impl Deg {
    /// Canonical JSON: two-space indentation, fields in declaration
    /// order, trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("kernel graph serializes");
        s.push('\n');
        s
    }

    /// Parses and validates a serialized kernel graph.
    pub fn from_json(text: &str) -> Result<Deg, DegError> {
        let deg: Deg = serde_json::from_str(text).map_err(|e| DegError::Parse(e.to_string()))?;
        deg.validate()?;
        Ok(deg)
    }

    /// Kernel ids are `k0..kN` in order, symbols are `x<N>`, every input
    /// is produced by an earlier kernel, edges name existing kernels with
    /// a known kind, and the edges are acyclic.
    pub fn validate(&self) -> Result<(), DegError> {
        let bad = |m: String| Err(DegError::Invalid(m));
        let mut producer: HashMap<&str, usize> = HashMap::new();
        for (i, k) in self.kernels.iter().enumerate() {
            if parse_kernel_id(&k.id) != Some(i) {
                return bad(format!("kernel {} at position {i}", k.id));
            }
            if Pattern::parse(&k.pattern).is_none() {
                return bad(format!("{} has unknown pattern `{}`", k.id, k.pattern));
            }
            if k.outputs.is_empty() {
                return bad(format!("{} has no outputs", k.id));
            }
            let loop_pattern = k.pattern != Pattern::SingleTask.name();
            if loop_pattern != k.size.is_some() {
                return bad(format!("{} size does not match pattern {}", k.id, k.pattern));
            }
            for s in k.inputs.iter().chain(&k.outputs).chain(&k.anti_deps) {
                if parse_sym(s).is_none() {
                    return bad(format!("{} names malformed symbol `{s}`", k.id));
                }
            }
            for o in &k.outputs {
                if producer.insert(o, i).is_some() {
                    return bad(format!("{o} is produced twice"));
                }
            }
        }
        for k in &self.kernels {
            for s in k.inputs.iter().chain(&k.anti_deps) {
                if !producer.contains_key(s.as_str()) {
                    return bad(format!("{} depends on {s}, which no kernel produces", k.id));
                }
            }
        }
        let n = self.kernels.len();
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut seen = HashSet::new();
        for e in &self.edges {
            let (Some(a), Some(b)) = (parse_kernel_id(&e.from), parse_kernel_id(&e.to)) else {
                return bad(format!("edge {} -> {} names a malformed kernel", e.from, e.to));
            };
            if a >= n || b >= n {
                return bad(format!("edge {} -> {} names a missing kernel", e.from, e.to));
            }
            if !EDGE_KINDS.contains(&e.kind.as_str()) {
                return bad(format!("edge {} -> {} has unknown kind `{}`", e.from, e.to, e.kind));
            }
            if !seen.insert((a, b, e.kind.as_str())) {
                return bad(format!("duplicate edge {} -> {}", e.from, e.to));
            }
            succ[a].push(b);
        }
        for (i, k) in self.kernels.iter().enumerate() {
            for s in &k.inputs {
                let p = producer[s.as_str()];
                if !succ[p].contains(&i) {
                    return bad(format!("{} reads {s} without an edge from k{p}", k.id));
                }
            }
        }
        self.levels().map(|_| ())
    }

    /// Topological levels: every kernel runs after all kernels of
    /// earlier levels it depends on.
    pub fn levels(&self) -> Result<Vec<Vec<usize>>, DegError> {
        let n = self.kernels.len();
        let mut indeg = vec![0usize; n];
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
        for e in &self.edges {
            let (a, b) = match (parse_kernel_id(&e.from), parse_kernel_id(&e.to)) {
                (Some(a), Some(b)) if a < n && b < n => (a, b),
                _ => return Err(DegError::Invalid(format!("edge {} -> {}", e.from, e.to))),
            };
            succ[a].push(b);
            indeg[b] += 1;
        }
        let mut level: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut out = Vec::new();
        let mut done = 0;
        while !level.is_empty() {
            done += level.len();
            let mut next = Vec::new();
            for &a in &level {
                for &b in &succ[a] {
                    indeg[b] -= 1;
                    if indeg[b] == 0 {
                        next.push(b);
                    }
                }
            }
            next.sort_unstable();
            next.dedup();
            out.push(std::mem::replace(&mut level, next));
        }
        if done != n {
            let stuck: Vec<String> = (0..n)
                .filter(|&i| indeg[i] > 0)
                .map(|i| format!("k{i}"))
                .collect();
            return Err(DegError::Cyclic(stuck.join(", ")));
        }
        Ok(out)
    }
}
