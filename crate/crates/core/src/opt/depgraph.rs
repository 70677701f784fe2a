use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap, HashSet};

use super::{Schedule, ScheduleError};
use crate::ir::{BlockId, EffectKind, EffectSummary, Graph, StatementTable, SymId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeKind {
    /// Value use, or a read of memory written earlier.
    Data,
    /// Write after read of the same allocation.
    Anti,
    /// Write after write of the same allocation.
    Output,
    /// Console, global and divergence ordering.
    Order,
}

impl EdgeKind {
    pub fn name(self) -> &'static str {
        match self {
            EdgeKind::Data => "data",
            EdgeKind::Anti => "anti",
            EdgeKind::Output => "output",
            EdgeKind::Order => "order",
        }
    }
}

/// Ordering constraints between the statements of one scope.
#[derive(Clone, Debug, Default)]
pub struct DepGraph {
    pub nodes: Vec<SymId>,
    pub edges: BTreeSet<(SymId, SymId, EdgeKind)>,
}

/// Owner statement of every nested block.
fn block_owners(g: &Graph) -> HashMap<BlockId, SymId> {
    let mut owners = HashMap::new();
    for st in g.statements() {
        for sc in st.def.scopes() {
            owners.insert(sc.block.id, st.sym);
        }
    }
    owners
}

/// Only console, global or divergence effects: ordered against every
/// other effectful statement.
fn order_only(e: &EffectSummary) -> bool {
    e.kind == EffectKind::Global
        || (e.may_read.is_empty() && e.may_write.is_empty() && !e.allocates_mutable)
        || e.may_write.iter().any(|s| s.is_console())
}

fn classify(a: &EffectSummary, b: &EffectSummary) -> Option<EdgeKind> {
    if a.is_pure() || b.is_pure() {
        return None;
    }
    let touches_console =
        a.may_write.iter().any(|s| s.is_console()) && b.may_write.iter().any(|s| s.is_console());
    if a.kind == EffectKind::Global || b.kind == EffectKind::Global || touches_console {
        return Some(EdgeKind::Order);
    }
    if !a.may_write.is_disjoint(&b.may_write) {
        return Some(EdgeKind::Output);
    }
    if !a.may_write.is_disjoint(&b.may_read) {
        return Some(EdgeKind::Data);
    }
    if !a.may_read.is_disjoint(&b.may_write) {
        return Some(EdgeKind::Anti);
    }
    let diverges = |e: &EffectSummary| {
        e.may_read.is_empty() && e.may_write.is_empty() && !e.allocates_mutable
    };
    if diverges(a) || diverges(b) {
        return Some(EdgeKind::Order);
    }
    None
}

/// The scheduled statement of `block` that contains `u`, if any.
fn representative(
    sched: &Schedule,
    owners: &HashMap<BlockId, SymId>,
    block: BlockId,
    u: SymId,
) -> Option<SymId> {
    let mut cur = u;
    loop {
        let sc = sched.scope_of(cur)?;
        if sc == block {
            return Some(cur);
        }
        cur = *owners.get(&sc)?;
    }
}

/// Dependency graph of the statements scheduled in `block`.
pub fn scope_dep_graph(g: &Graph, sched: &Schedule, block: BlockId) -> DepGraph {
    let owners = block_owners(g);
    let nodes: Vec<SymId> = sched.block(block).to_vec();
    let node_set: HashSet<SymId> = nodes.iter().copied().collect();
    let mut edges = BTreeSet::new();
    for u in sched.all_syms() {
        let Some(r) = representative(sched, &owners, block, u) else {
            continue;
        };
        let st = g.lookup(u).expect("scheduled statement");
        let mut deps: Vec<_> = st.def.operands();
        for sc in st.def.scopes() {
            deps.extend(sc.roots);
        }
        for d in deps {
            let Some(t) = d.sym().and_then(|s| g.lookup(s)).map(|t| t.sym) else {
                continue;
            };
            if t != r && node_set.contains(&t) {
                edges.insert((t, r, EdgeKind::Data));
            }
        }
    }
    let blocks = g.blocks();
    if let Some(b) = blocks.get(&block) {
        let pinned: Vec<SymId> = b
            .effects
            .iter()
            .copied()
            .filter(|s| node_set.contains(s))
            .collect();
        for (i, a) in pinned.iter().enumerate() {
            let ea = &g.lookup(*a).unwrap().eff;
            for b2 in &pinned[i + 1..] {
                let eb = &g.lookup(*b2).unwrap().eff;
                let kind = classify(ea, eb).or_else(|| {
                    (order_only(ea) && order_only(eb)).then_some(EdgeKind::Order)
                });
                if let Some(k) = kind {
                    edges.insert((*a, *b2, k));
                }
            }
        }
    }
    DepGraph { nodes, edges }
}

impl DepGraph {
    pub fn successors(&self) -> BTreeMap<SymId, Vec<SymId>> {
        let mut m: BTreeMap<SymId, Vec<SymId>> = BTreeMap::new();
        for (a, b, _) in &self.edges {
            m.entry(*a).or_default().push(*b);
        }
        m
    }

    /// Whether `to` is reachable from `from`, not walking through `avoid`.
    pub fn reaches(&self, from: SymId, to: SymId, avoid: Option<SymId>) -> bool {
        let succ = self.successors();
        let mut seen = HashSet::new();
        let mut stack = vec![from];
        while let Some(x) = stack.pop() {
            for &y in succ.get(&x).into_iter().flatten() {
                if y == to {
                    return true;
                }
                if Some(y) != avoid && seen.insert(y) {
                    stack.push(y);
                }
            }
        }
        false
    }

    /// Whether some third statement lies on a path from `a` to `b`.
    pub fn has_intermediate_path(&self, a: SymId, b: SymId) -> bool {
        let succ = self.successors();
        for &x in succ.get(&a).into_iter().flatten() {
            if x != b && self.reaches(x, b, Some(a)) {
                return true;
            }
        }
        false
    }

    /// Collapses `b` into `a`.
    pub fn merge(&self, a: SymId, b: SymId) -> DepGraph {
        let r = |x: SymId| if x == b { a } else { x };
        DepGraph {
            nodes: self.nodes.iter().copied().filter(|&x| x != b).collect(),
            edges: self
                .edges
                .iter()
                .map(|(x, y, k)| (r(*x), r(*y), *k))
                .filter(|(x, y, _)| x != y)
                .collect(),
        }
    }

    /// Topological order, breaking ties by the given priority.
    pub fn toposort(&self, priority: impl Fn(SymId) -> usize) -> Result<Vec<SymId>, ScheduleError> {
        let mut indeg: HashMap<SymId, usize> = self.nodes.iter().map(|&n| (n, 0)).collect();
        for (_, b, _) in &self.edges {
            *indeg.get_mut(b).expect("edge target is a node") += 1;
        }
        let succ = self.successors();
        let mut ready: BinaryHeap<Reverse<(usize, SymId)>> = indeg
            .iter()
            .filter(|(_, d)| **d == 0)
            .map(|(n, _)| Reverse((priority(*n), *n)))
            .collect();
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut done: HashSet<SymId> = HashSet::new();
        while let Some(Reverse((_, n))) = ready.pop() {
            out.push(n);
            done.insert(n);
            for &m in succ.get(&n).into_iter().flatten() {
                let d = indeg.get_mut(&m).unwrap();
                *d -= 1;
                if *d == 0 {
                    ready.push(Reverse((priority(m), m)));
                }
            }
        }
        if out.len() != self.nodes.len() {
            let stuck: Vec<String> = self
                .nodes
                .iter()
                .filter(|n| !done.contains(n))
                .map(|n| n.to_string())
                .collect();
            return Err(ScheduleError::CyclicDependency(stuck.join(", ")));
        }
        Ok(out)
    }
}
