use std::collections::HashMap;

use super::Schedule;
use crate::ir::{
    Block, BlockId, Expr, Graph, GraphContext, LoopDef, LoopElem, NodeDef, SemType, StageError,
    Statement, StatementTable, SymId,
};

/// Hook into mirroring. `transform_stmt` returns `false` to let the
/// statement be copied unchanged.
pub trait Transformer {
    fn transform_stmt(&mut self, m: &mut Mirror, st: &Statement) -> Result<bool, StageError>;

    fn block_order(&mut self, m: &Mirror, block: BlockId) -> Vec<SymId> {
        m.sched.block(block).to_vec()
    }
}

struct Identity;

impl Transformer for Identity {
    fn transform_stmt(&mut self, _: &mut Mirror, _: &Statement) -> Result<bool, StageError> {
        Ok(false)
    }
}

/// Copies a scheduled graph into a fresh context, statement by statement.
pub struct Mirror<'g> {
    pub src: &'g Graph,
    pub sched: &'g Schedule,
    pub ctx: GraphContext,
    subst: HashMap<SymId, Expr>,
}

impl<'g> Mirror<'g> {
    pub fn new(src: &'g Graph, sched: &'g Schedule, cse: bool) -> Self {
        let mut ctx = GraphContext::new();
        ctx.set_cse(cse);
        Mirror {
            src,
            sched,
            ctx,
            subst: HashMap::new(),
        }
    }

    pub fn subst(&self, e: &Expr) -> Expr {
        match e.sym().and_then(|s| self.subst.get(&s)) {
            Some(x) => x.clone(),
            None => e.clone(),
        }
    }

    pub fn bind(&mut self, old: SymId, new: Expr) {
        self.subst.insert(old, new);
    }

    /// Mirrors the root block and freezes the result.
    pub fn run(mut self, t: &mut dyn Transformer) -> Result<Graph, StageError> {
        let root = self.src.root.id;
        for sym in t.block_order(&self, root) {
            self.emit(t, sym)?;
        }
        let result = self.subst(&self.src.root.result);
        Ok(self.ctx.finish(result))
    }

    pub fn emit(&mut self, t: &mut dyn Transformer, sym: SymId) -> Result<(), StageError> {
        let st = self
            .src
            .lookup(sym)
            .expect("scheduled symbol is defined")
            .clone();
        if !t.transform_stmt(self, &st)? {
            self.copy_stmt(t, &st)?;
        }
        Ok(())
    }

    /// Emits the scheduled contents of `b` into a new scope binding
    /// `bound`.
    pub fn mirror_block(
        &mut self,
        t: &mut dyn Transformer,
        b: &Block,
        bound: Vec<SymId>,
    ) -> Result<Block, StageError> {
        let depth = self.ctx.depth();
        self.ctx.push_scope(bound);
        let r = (|| {
            for sym in t.block_order(self, b.id) {
                self.emit(t, sym)?;
            }
            Ok(self.subst(&b.result))
        })();
        match r {
            Ok(res) => Ok(self.ctx.pop_scope(res)),
            Err(e) => {
                self.ctx.unwind_to(depth);
                Err(e)
            }
        }
    }

    fn fresh_bound_for(&mut self, old: SymId, ty: SemType) -> SymId {
        let s = self.ctx.fresh_bound(ty.clone());
        self.bind(old, Expr::Sym(s, ty));
        s
    }

    pub fn copy_stmt(&mut self, t: &mut dyn Transformer, st: &Statement) -> Result<(), StageError> {
        match &st.def {
            NodeDef::ParallelLoop(l) => {
                self.mirror_loop(t, l, |_| true)?;
            }
            NodeDef::IfThenElse {
                cond,
                then_b,
                else_b,
            } => {
                let cond = self.subst(cond);
                let then_b = self.mirror_block(t, then_b, Vec::new())?;
                let else_b = self.mirror_block(t, else_b, Vec::new())?;
                let e = self.ctx.stage(NodeDef::IfThenElse {
                    cond,
                    then_b,
                    else_b,
                })?;
                self.bind(st.sym, e);
            }
            NodeDef::While { cond, body } => {
                let cond = self.mirror_block(t, cond, Vec::new())?;
                let body = self.mirror_block(t, body, Vec::new())?;
                let e = self.ctx.stage(NodeDef::While { cond, body })?;
                self.bind(st.sym, e);
            }
            def => {
                let def = def.map_operands(|e| self.subst(e));
                let e = self.ctx.stage(def)?;
                self.bind(st.sym, e);
            }
        }
        Ok(())
    }

    /// Copies a loop keeping only the elements accepted by `keep`. Returns
    /// `false` when no element is left and nothing was emitted.
    pub fn mirror_loop(
        &mut self,
        t: &mut dyn Transformer,
        l: &LoopDef,
        keep: impl Fn(&LoopElem) -> bool,
    ) -> Result<bool, StageError> {
        let elems: Vec<&LoopElem> = l.elems.iter().filter(|e| keep(e)).collect();
        if elems.is_empty() {
            return Ok(false);
        }
        let size = self.subst(&l.size);
        let index = self.fresh_bound_for(l.index, SemType::Int);
        let body = self.mirror_block(t, &l.body, vec![index])?;
        let def = self.loop_def(t, size, index, body, &elems, |m, e| Ok(m.subst(e)))?;
        let outs: Vec<SymId> = def.outs().collect();
        let tys: Vec<SemType> = def.elems.iter().map(LoopElem::ty).collect();
        self.ctx.stage(NodeDef::ParallelLoop(def))?;
        for ((old, new), ty) in elems.iter().map(|e| e.out()).zip(outs).zip(tys) {
            self.bind(old, Expr::Sym(new, ty));
        }
        Ok(true)
    }

    /// Rebuilds loop elements over an already mirrored body. `value`
    /// maps element values and conditions into the new body.
    pub fn loop_def(
        &mut self,
        t: &mut dyn Transformer,
        size: Expr,
        index: SymId,
        body: Block,
        elems: &[&LoopElem],
        value: impl Fn(&Mirror, &Expr) -> Result<Expr, StageError>,
    ) -> Result<LoopDef, StageError> {
        let mut out = Vec::with_capacity(elems.len());
        for e in elems {
            out.push(match e {
                LoopElem::Collect { value: v, cond, .. } => LoopElem::Collect {
                    out: self.ctx.fresh_sym(),
                    value: value(self, v)?,
                    cond: cond.as_ref().map(|c| value(self, c)).transpose()?,
                },
                LoopElem::Reduce {
                    value: v,
                    cond,
                    zero,
                    lhs,
                    rhs,
                    reduce,
                    ..
                } => {
                    let ty = v.ty();
                    let nl = self.fresh_bound_for(*lhs, ty.clone());
                    let nr = self.fresh_bound_for(*rhs, ty);
                    let reduce = self.mirror_block(t, reduce, vec![nl, nr])?;
                    LoopElem::Reduce {
                        out: self.ctx.fresh_sym(),
                        value: value(self, v)?,
                        cond: cond.as_ref().map(|c| value(self, c)).transpose()?,
                        zero: self.subst(zero),
                        lhs: nl,
                        rhs: nr,
                        reduce,
                    }
                }
                LoopElem::Foreach { .. } => LoopElem::Foreach {
                    out: self.ctx.fresh_sym(),
                },
            });
        }
        Ok(LoopDef {
            size,
            index,
            body,
            elems: out,
            origin: None,
        })
    }
}

/// Copies the scheduled part of `g` into a fresh graph.
pub fn mirror(g: &Graph, sched: &Schedule, cse: bool) -> Result<Graph, StageError> {
    Mirror::new(g, sched, cse).run(&mut Identity)
}
