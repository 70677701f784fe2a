use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use super::depgraph::scope_dep_graph;
use super::{Schedule, ScheduleError};
use crate::ir::{BlockId, Expr, Graph, ScopeKind, StatementTable, SymId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScheduleOptions {
    /// Hoist loop-invariant statements and sink statements into the
    /// branch that uses them.
    pub code_motion: bool,
    /// Drop statements that neither the result nor an effect needs.
    pub dce: bool,
}

impl Default for ScheduleOptions {
    fn default() -> Self {
        ScheduleOptions {
            code_motion: true,
            dce: true,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Policy {
    Hoisted,
    Innermost,
}

/// Static facts about the blocks of a graph.
struct Blocks {
    owner: HashMap<BlockId, (usize, ScopeKind)>,
    binder: HashMap<SymId, BlockId>,
    pinned: HashMap<SymId, BlockId>,
}

impl Blocks {
    fn of(g: &Graph) -> Self {
        let mut owner = HashMap::new();
        let mut binder = HashMap::new();
        let mut pinned = HashMap::new();
        for e in &g.root.effects {
            pinned.insert(*e, g.root.id);
        }
        for (pos, st) in g.statements().iter().enumerate() {
            for sc in st.def.scopes() {
                owner.insert(sc.block.id, (pos, sc.kind));
                for b in &sc.block.bound {
                    binder.insert(*b, sc.block.id);
                }
                for e in &sc.block.effects {
                    pinned.insert(*e, sc.block.id);
                }
            }
        }
        Blocks {
            owner,
            binder,
            pinned,
        }
    }
}

fn stmt_pos(g: &Graph, e: &Expr) -> Option<usize> {
    e.sym().and_then(|s| g.position(s))
}

/// Statements reachable from the result and the root effects. Without
/// DCE, everything staged in a live scope is kept too.
fn liveness(g: &Graph, dce: bool) -> Vec<bool> {
    let mut live = vec![false; g.len()];
    let mut stack = Vec::new();
    let mark = |e: &Expr, live: &mut Vec<bool>, stack: &mut Vec<usize>| {
        if let Some(p) = stmt_pos(g, e) {
            if !live[p] {
                live[p] = true;
                stack.push(p);
            }
        }
    };
    mark(&g.root.result, &mut live, &mut stack);
    for e in &g.root.effects {
        if let Some(p) = g.position(*e) {
            if !live[p] {
                live[p] = true;
                stack.push(p);
            }
        }
    }
    loop {
        while let Some(p) = stack.pop() {
            let st = g.stmt_at(p);
            for op in st.def.operands() {
                mark(op, &mut live, &mut stack);
            }
            for sc in st.def.scopes() {
                for r in sc.roots {
                    mark(r, &mut live, &mut stack);
                }
                for e in &sc.block.effects {
                    if let Some(q) = g.position(*e) {
                        if !live[q] {
                            live[q] = true;
                            stack.push(q);
                        }
                    }
                }
            }
        }
        if dce {
            break;
        }
        let mut scopes: HashSet<BlockId> = HashSet::from([g.root.id]);
        for (p, st) in g.statements().iter().enumerate() {
            if live[p] {
                scopes.extend(st.def.scopes().iter().map(|sc| sc.block.id));
            }
        }
        for (p, st) in g.statements().iter().enumerate() {
            if !live[p] && scopes.contains(&st.origin) {
                live[p] = true;
                stack.push(p);
            }
        }
        if stack.is_empty() {
            break;
        }
    }
    live
}

/// Blocks each statement depends on through its operands and nested
/// contents.
fn anchors(g: &Graph, info: &Blocks) -> Vec<BTreeSet<BlockId>> {
    let mut out: Vec<BTreeSet<BlockId>> = Vec::with_capacity(g.len());
    for st in g.statements() {
        if let Some(b) = info.pinned.get(&st.sym) {
            out.push(BTreeSet::from([*b]));
            continue;
        }
        let mut set = BTreeSet::new();
        let add = |e: &Expr, set: &mut BTreeSet<BlockId>| {
            let Some(s) = e.sym() else { return };
            if let Some(b) = info.binder.get(&s) {
                set.insert(*b);
            } else if let Some(p) = g.position(s) {
                set.extend(out[p].iter().copied());
            }
        };
        for op in st.def.operands() {
            add(op, &mut set);
        }
        let scopes = st.def.scopes();
        for sc in &scopes {
            for r in &sc.roots {
                add(r, &mut set);
            }
            for e in &sc.block.effects {
                add(&Expr::Sym(*e, crate::ir::SemType::Unit), &mut set);
            }
        }
        for sc in &scopes {
            set.remove(&sc.block.id);
        }
        out.push(set);
    }
    out
}

struct Tree {
    parent: HashMap<BlockId, BlockId>,
    depth: HashMap<BlockId, usize>,
}

impl Tree {
    fn lca(&self, mut a: BlockId, mut b: BlockId) -> BlockId {
        while self.depth[&a] > self.depth[&b] {
            a = self.parent[&a];
        }
        while self.depth[&b] > self.depth[&a] {
            b = self.parent[&b];
        }
        while a != b {
            a = self.parent[&a];
            b = self.parent[&b];
        }
        a
    }

    fn is_ancestor_or_self(&self, anc: BlockId, mut b: BlockId) -> bool {
        if !self.depth.contains_key(&anc) || !self.depth.contains_key(&b) {
            return false;
        }
        while self.depth[&b] > self.depth[&anc] {
            b = self.parent[&b];
        }
        b == anc
    }
}

fn place(g: &Graph, live: &[bool], policy: Policy) -> BTreeMap<BlockId, Vec<SymId>> {
    let info = Blocks::of(g);
    let anchors = anchors(g, &info);
    let mut tree = Tree {
        parent: HashMap::new(),
        depth: HashMap::from([(g.root.id, 0)]),
    };
    let mut uses: Vec<Vec<BlockId>> = vec![Vec::new(); g.len()];
    let add_use = |e: &Expr, b: BlockId, uses: &mut Vec<Vec<BlockId>>| {
        if let Some(p) = stmt_pos(g, e) {
            uses[p].push(b);
        }
    };
    add_use(&g.root.result, g.root.id, &mut uses);

    let mut placed: Vec<Option<BlockId>> = vec![None; g.len()];
    for pos in (0..g.len()).rev() {
        if !live[pos] {
            continue;
        }
        let st = g.stmt_at(pos);
        let target = if let Some(b) = info.pinned.get(&st.sym) {
            *b
        } else {
            let floor = anchors[pos]
                .iter()
                .filter(|b| tree.depth.contains_key(b))
                .max_by_key(|b| tree.depth[b])
                .copied()
                .unwrap_or(g.root.id);
            let origin_ok = tree.is_ancestor_or_self(floor, st.origin);
            let lca = uses[pos]
                .iter()
                .copied()
                .filter(|b| tree.depth.contains_key(b))
                .reduce(|a, b| tree.lca(a, b));
            match lca {
                None if origin_ok => st.origin,
                None => floor,
                Some(lca) => match policy {
                    Policy::Hoisted => {
                        let mut p = lca;
                        while p != floor && p != g.root.id {
                            let (_, kind) = info.owner[&p];
                            if !kind.is_repeated() {
                                break;
                            }
                            p = tree.parent[&p];
                        }
                        p
                    }
                    Policy::Innermost => {
                        if origin_ok && tree.is_ancestor_or_self(st.origin, lca) {
                            st.origin
                        } else {
                            lca
                        }
                    }
                },
            }
        };
        placed[pos] = Some(target);
        for sc in st.def.scopes() {
            tree.parent.insert(sc.block.id, target);
            tree.depth.insert(sc.block.id, tree.depth[&target] + 1);
            for r in sc.roots {
                add_use(r, sc.block.id, &mut uses);
            }
        }
        for op in st.def.operands() {
            add_use(op, target, &mut uses);
        }
    }

    let mut blocks: BTreeMap<BlockId, Vec<SymId>> = BTreeMap::new();
    blocks.entry(g.root.id).or_default();
    for (pos, b) in placed.iter().enumerate() {
        if let Some(b) = b {
            blocks.entry(*b).or_default().push(g.stmt_at(pos).sym);
        }
    }
    blocks
}

/// Orders every block of a placement by its dependency graph.
pub(crate) fn order_blocks(
    g: &Graph,
    blocks: BTreeMap<BlockId, Vec<SymId>>,
) -> Result<Schedule, ScheduleError> {
    let unordered = Schedule::new(g.root.id, blocks);
    let mut ordered = BTreeMap::new();
    for (b, _) in unordered.blocks.iter() {
        let dg = scope_dep_graph(g, &unordered, *b);
        let order = dg.toposort(|s| g.position(s).unwrap_or(usize::MAX))?;
        ordered.insert(*b, order);
    }
    Ok(Schedule::new(g.root.id, ordered))
}

pub fn build_schedule(g: &Graph, opts: ScheduleOptions) -> Result<Schedule, ScheduleError> {
    let live = liveness(g, opts.dce);
    let policy = if opts.code_motion {
        Policy::Hoisted
    } else {
        Policy::Innermost
    };
    order_blocks(g, place(g, &live, policy))
}

/// Statements needed for the result, each kept where it was staged.
pub fn build_schedule_for_result(g: &Graph) -> Result<Schedule, ScheduleError> {
    build_schedule(
        g,
        ScheduleOptions {
            code_motion: false,
            dce: true,
        },
    )
}

/// Re-places the statements of `sched`, hoisting loop invariants.
pub fn code_motion(g: &Graph, sched: &Schedule) -> Result<Schedule, ScheduleError> {
    let mut live = vec![false; g.len()];
    for s in sched.all_syms() {
        if let Some(p) = g.position(s) {
            live[p] = true;
        }
    }
    order_blocks(g, place(g, &live, Policy::Hoisted))
}
