//! Parallel-loop construction and vertical/horizontal loop fusion with
//! array contraction.

mod builders;

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::error::CompileError;
use crate::ir::{
    BinOp, BlockId, Expr, Graph, LoopDef, LoopElem, NodeDef, SemType, StageError, Statement,
    StatementTable, SymId,
};
use crate::opt::{build_schedule, scope_dep_graph, Mirror, Schedule, ScheduleOptions, Transformer};

pub use builders::{Combiner, ElemSpec};

/// A consumer reads a producer's output in a way that needs the whole
/// vector, so the two loops were left apart.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("contraction blocked: {consumer} reads {producer} {detail}")]
pub struct ContractionBlocked {
    pub producer: String,
    pub consumer: String,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FusionStats {
    /// Loop pairs merged.
    pub fused: usize,
    /// Element reads replaced by the producing value.
    pub contracted: usize,
    /// Fused loops whose elements carry more than one guard.
    pub multi_predicate: usize,
    /// Pairs left unfused in the final graph.
    pub blocked: Vec<ContractionBlocked>,
}

struct Candidate {
    scope: BlockId,
    l1: SymId,
    l2: SymId,
    contracted: HashMap<SymId, Expr>,
}

fn pure_loop(g: &Graph, s: SymId) -> Option<&LoopDef> {
    let st = g.lookup(s)?;
    if !st.eff.is_pure() {
        return None;
    }
    st.def.as_loop()
}

fn scopes_preorder(g: &Graph, sched: &Schedule) -> Vec<BlockId> {
    let mut out = Vec::new();
    let mut stack = vec![g.root.id];
    while let Some(b) = stack.pop() {
        out.push(b);
        let mut nested = Vec::new();
        for s in sched.block(b) {
            for sc in g.lookup(*s).unwrap().def.scopes() {
                nested.push(sc.block.id);
            }
        }
        stack.extend(nested.into_iter().rev());
    }
    out
}

/// `s` and every scheduled statement nested inside it.
fn enclosed(g: &Graph, sched: &Schedule, s: SymId, out: &mut Vec<SymId>) {
    out.push(s);
    for sc in g.lookup(s).unwrap().def.scopes() {
        for t in sched.block(sc.block.id) {
            enclosed(g, sched, *t, out);
        }
    }
}

/// Element reads of `l1` outputs inside `l2`, each mapped to the value
/// that produced the element. Fails when `l2` needs a whole output.
fn contraction_plan(
    g: &Graph,
    sched: &Schedule,
    l1: &LoopDef,
    l2_sym: SymId,
    l2: &LoopDef,
) -> Result<HashMap<SymId, Expr>, String> {
    let outs: HashMap<SymId, &LoopElem> = l1.elems.iter().map(|e| (e.out(), e)).collect();
    let hit = |e: &Expr| e.sym().filter(|s| outs.contains_key(s));
    let mut plan = HashMap::new();
    let mut inner = Vec::new();
    enclosed(g, sched, l2_sym, &mut inner);
    for u in inner {
        let st = g.lookup(u).unwrap();
        let mut exprs: Vec<&Expr> = st.def.operands();
        for sc in st.def.scopes() {
            exprs.extend(sc.roots);
        }
        if u != l2_sym {
            if let NodeDef::VectorApply(v, i) = &st.def {
                if let Some(o) = hit(v) {
                    match outs[&o] {
                        LoopElem::Collect {
                            value, cond: None, ..
                        } if i.sym() == Some(l2.index) => {
                            plan.insert(u, value.clone());
                            continue;
                        }
                        LoopElem::Collect { cond: Some(_), .. } => {
                            return Err(format!("{o} through a filtered collect"));
                        }
                        LoopElem::Collect { .. } => {
                            return Err(format!("{o} at an index other than its own"));
                        }
                        e => return Err(format!("{o} produced by a {}", e.kind_name())),
                    }
                }
            }
        }
        if let Some(o) = exprs.into_iter().find_map(hit) {
            return Err(format!("{o} as a whole in {}", st.def.name()));
        }
    }
    Ok(plan)
}

fn find_candidate(
    g: &Graph,
    sched: &Schedule,
) -> (Option<Candidate>, Vec<ContractionBlocked>) {
    let mut blocked = Vec::new();
    for scope in scopes_preorder(g, sched) {
        let loops: Vec<SymId> = sched
            .block(scope)
            .iter()
            .copied()
            .filter(|s| pure_loop(g, *s).is_some())
            .collect();
        if loops.len() < 2 {
            continue;
        }
        let dg = scope_dep_graph(g, sched, scope);
        for (i, &a) in loops.iter().enumerate() {
            for &b in &loops[i + 1..] {
                let (l1, l2) = (pure_loop(g, a).unwrap(), pure_loop(g, b).unwrap());
                if l1.size != l2.size || dg.has_intermediate_path(a, b) {
                    continue;
                }
                match contraction_plan(g, sched, l1, b, l2) {
                    Ok(contracted) => {
                        return (
                            Some(Candidate {
                                scope,
                                l1: a,
                                l2: b,
                                contracted,
                            }),
                            blocked,
                        )
                    }
                    Err(detail) => blocked.push(ContractionBlocked {
                        producer: a.to_string(),
                        consumer: b.to_string(),
                        detail,
                    }),
                }
            }
        }
    }
    (None, blocked)
}

/// Binary operator of a reduce block of the form `lhs op rhs`.
fn reduce_signature(m: &Mirror, e: &LoopElem) -> Option<BinOp> {
    let LoopElem::Reduce {
        lhs, rhs, reduce, ..
    } = e
    else {
        return None;
    };
    if !reduce.effects.is_empty() {
        return None;
    }
    match m.ctx.def_of(&reduce.result)? {
        NodeDef::Binary(op, a, b) if a.sym() == Some(*lhs) && b.sym() == Some(*rhs) => Some(*op),
        _ => None,
    }
}

fn same_elem(m: &Mirror, a: &LoopElem, b: &LoopElem) -> bool {
    if a.kind_name() != b.kind_name() || a.value() != b.value() || a.cond() != b.cond() {
        return false;
    }
    match (a, b) {
        (LoopElem::Collect { .. }, LoopElem::Collect { .. }) => true,
        (LoopElem::Reduce { zero: za, .. }, LoopElem::Reduce { zero: zb, .. }) => {
            za == zb && reduce_signature(m, a).is_some() && reduce_signature(m, a) == reduce_signature(m, b)
        }
        _ => false,
    }
}

struct Fuse {
    scope: BlockId,
    l1: SymId,
    l2: SymId,
    order: Vec<SymId>,
    contracted: HashMap<SymId, Expr>,
    multi_predicate: bool,
}

impl Fuse {
    fn emit_fused(&mut self, m: &mut Mirror, l1: &LoopDef, l2: &LoopDef) -> Result<(), StageError> {
        let size = m.subst(&l1.size);
        let index = m.ctx.fresh_bound(SemType::Int);
        m.bind(l1.index, Expr::Sym(index, SemType::Int));
        m.bind(l2.index, Expr::Sym(index, SemType::Int));
        let depth = m.ctx.depth();
        m.ctx.push_scope(vec![index]);
        let emitted = (|| {
            for b in [&l1.body, &l2.body] {
                for s in self.block_order(m, b.id) {
                    m.emit(self, s)?;
                }
            }
            Ok(m.subst(&l1.body.result))
        })();
        let body = match emitted {
            Ok(r) => m.ctx.pop_scope(r),
            Err(e) => {
                m.ctx.unwind_to(depth);
                return Err(e);
            }
        };
        let old: Vec<&LoopElem> = l1.elems.iter().chain(&l2.elems).collect();
        let mut def = m.loop_def(self, size, index, body, &old, |m, e| Ok(m.subst(e)))?;

        let mut kept: Vec<LoopElem> = Vec::new();
        let mut target = Vec::with_capacity(old.len());
        for e in def.elems.drain(..) {
            match kept.iter().position(|k| same_elem(m, k, &e)) {
                Some(k) => target.push(k),
                None => {
                    target.push(kept.len());
                    kept.push(e);
                }
            }
        }
        let guards: HashSet<Option<&Expr>> = kept.iter().map(LoopElem::cond).collect();
        self.multi_predicate = guards.len() > 1;
        def.elems = kept;
        let outs: Vec<(SymId, SemType)> = def.elems.iter().map(|e| (e.out(), e.ty())).collect();
        m.ctx.stage(NodeDef::ParallelLoop(def))?;
        for (e, k) in old.iter().zip(target) {
            let (out, ty) = outs[k].clone();
            m.bind(e.out(), Expr::Sym(out, ty));
        }
        Ok(())
    }
}

impl Transformer for Fuse {
    fn transform_stmt(&mut self, m: &mut Mirror, st: &Statement) -> Result<bool, StageError> {
        if let Some(v) = self.contracted.get(&st.sym) {
            let e = m.subst(v);
            m.bind(st.sym, e);
            return Ok(true);
        }
        if st.sym == self.l1 {
            let src = m.src;
            let l1 = src.lookup(self.l1).unwrap().def.as_loop().unwrap();
            let l2 = src.lookup(self.l2).unwrap().def.as_loop().unwrap();
            self.emit_fused(m, l1, l2)?;
            return Ok(true);
        }
        Ok(st.sym == self.l2)
    }

    fn block_order(&mut self, m: &Mirror, block: BlockId) -> Vec<SymId> {
        if block == self.scope {
            self.order.clone()
        } else {
            m.sched.block(block).to_vec()
        }
    }
}

/// Drops pure loop elements nobody reads.
struct Prune {
    used: HashSet<SymId>,
}

impl Transformer for Prune {
    fn transform_stmt(&mut self, m: &mut Mirror, st: &Statement) -> Result<bool, StageError> {
        let NodeDef::ParallelLoop(l) = &st.def else {
            return Ok(false);
        };
        if !st.eff.is_pure() {
            return Ok(false);
        }
        let used = &self.used;
        let keep: HashSet<SymId> = l
            .elems
            .iter()
            .filter(|e| matches!(e, LoopElem::Foreach { .. }) || used.contains(&e.out()))
            .map(LoopElem::out)
            .collect();
        m.mirror_loop(self, l, |e| keep.contains(&e.out()))?;
        Ok(true)
    }
}

fn used_syms(g: &Graph, sched: &Schedule) -> HashSet<SymId> {
    let mut used: HashSet<SymId> = g.root.result.sym().into_iter().collect();
    for s in sched.all_syms() {
        let st = g.lookup(s).unwrap();
        used.extend(st.def.operands().into_iter().filter_map(Expr::sym));
        for sc in st.def.scopes() {
            used.extend(sc.roots.into_iter().filter_map(Expr::sym));
        }
    }
    used
}

const SCHEDULE: ScheduleOptions = ScheduleOptions {
    code_motion: true,
    dce: true,
};

/// Fuses pure loops of equal size in the same scope until no pair is
/// left, contracting element-wise producer/consumer reads.
pub fn fuse_loops(g: Graph, cse: bool) -> Result<(Graph, FusionStats), CompileError> {
    let mut g = g;
    let mut stats = FusionStats::default();
    loop {
        let sched = build_schedule(&g, SCHEDULE)?;
        let (cand, blocked) = find_candidate(&g, &sched);
        let Some(c) = cand else {
            for b in &blocked {
                log::info!("{b}");
            }
            stats.blocked = blocked;
            return Ok((g, stats));
        };
        let dg = scope_dep_graph(&g, &sched, c.scope).merge(c.l1, c.l2);
        let order = dg.toposort(|s| g.position(s).unwrap_or(usize::MAX))?;
        log::debug!("fusing {} into {}", c.l2, c.l1);
        stats.contracted += c.contracted.len();
        let mut fuse = Fuse {
            scope: c.scope,
            l1: c.l1,
            l2: c.l2,
            order,
            contracted: c.contracted,
            multi_predicate: false,
        };
        let fused = Mirror::new(&g, &sched, cse).run(&mut fuse)?;
        stats.fused += 1;
        if fuse.multi_predicate {
            stats.multi_predicate += 1;
        }
        let sched = build_schedule(&fused, SCHEDULE)?;
        let mut prune = Prune {
            used: used_syms(&fused, &sched),
        };
        g = Mirror::new(&fused, &sched, cse).run(&mut prune)?;
    }
}
