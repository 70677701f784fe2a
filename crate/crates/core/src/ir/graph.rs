use std::collections::HashMap;

use super::effects::{AliasInfo, EffectKind, EffectSummary, SymSet};
use super::error::StageError;
use super::node::{Block, LoopElem, NodeDef};
use super::types::{BlockId, Expr, SemType, SymId};

/// One definition bound to a symbol. Parallel loops define one symbol per
/// element; `sym` is the first of them.
#[derive(Clone, Debug)]
pub struct Statement {
    pub sym: SymId,
    pub def: NodeDef,
    pub eff: EffectSummary,
    pub alias: AliasInfo,
    pub ty: SemType,
    /// Scope that was active when the statement was created.
    pub origin: BlockId,
}

impl Statement {
    pub fn defined_syms(&self) -> Vec<SymId> {
        match &self.def {
            NodeDef::ParallelLoop(l) => l.outs().collect(),
            _ => vec![self.sym],
        }
    }

    pub fn is_effectful(&self) -> bool {
        !self.eff.is_pure()
    }
}

/// Where a symbol is defined.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymDef {
    Stmt(usize),
    Bound,
}

#[derive(Debug)]
struct Frame {
    id: BlockId,
    effects: Vec<SymId>,
    bound: Vec<SymId>,
}

/// Read access shared by the builder and frozen graphs.
pub trait StatementTable {
    fn statements(&self) -> &[Statement];
    fn sym_index(&self) -> &HashMap<SymId, usize>;

    fn lookup(&self, sym: SymId) -> Option<&Statement> {
        self.sym_index().get(&sym).map(|&i| &self.statements()[i])
    }

    fn position(&self, sym: SymId) -> Option<usize> {
        self.sym_index().get(&sym).copied()
    }

    /// The definition behind an expression, for pattern matching on
    /// producers.
    fn def_of(&self, e: &Expr) -> Option<&NodeDef> {
        e.sym().and_then(|s| self.lookup(s)).map(|st| &st.def)
    }

    fn is_mutable_alloc(&self, sym: SymId) -> bool {
        self.lookup(sym)
            .map(|s| s.eff.allocates_mutable && s.sym == sym)
            .unwrap_or(false)
    }

    /// Mutable allocations an expression may point to.
    fn mutable_roots(&self, e: &Expr) -> SymSet {
        let mut out = SymSet::new();
        if let Some(s) = e.sym() {
            if e.ty().is_reference() {
                roots_of(self, s, &mut out, 0);
            }
        }
        out
    }
}

fn roots_of<T: StatementTable + ?Sized>(t: &T, s: SymId, out: &mut SymSet, depth: usize) {
    if depth > 64 {
        return;
    }
    if t.is_mutable_alloc(s) {
        out.insert(s);
        return;
    }
    let Some(st) = t.lookup(s) else { return };
    for a in st.alias.aliases.iter().chain(&st.alias.contains) {
        roots_of(t, *a, out, depth + 1);
    }
    for y in st.alias.extracts_from.iter().chain(&st.alias.copies_from) {
        contents_of(t, *y, out, depth + 1);
    }
}

fn contents_of<T: StatementTable + ?Sized>(t: &T, s: SymId, out: &mut SymSet, depth: usize) {
    if depth > 64 || t.is_mutable_alloc(s) {
        return;
    }
    let Some(st) = t.lookup(s) else { return };
    for c in &st.alias.contains {
        roots_of(t, *c, out, depth + 1);
    }
    for y in st
        .alias
        .aliases
        .iter()
        .chain(&st.alias.extracts_from)
        .chain(&st.alias.copies_from)
    {
        contents_of(t, *y, out, depth + 1);
    }
}

fn alias_info_for(def: &NodeDef, ty: &SemType) -> AliasInfo {
    let mut info = AliasInfo::default();
    if !ty.is_reference() {
        return info;
    }
    let refs = |e: &Expr| e.sym().filter(|_| e.ty().is_reference());
    match def {
        NodeDef::Alias(x) => info.aliases.extend(refs(x)),
        NodeDef::VarAlloc(x) => info.contains.extend(refs(x)),
        NodeDef::VarRead(v) => info.extracts_from.extend(refs(v)),
        NodeDef::Record { fields, .. } => {
            info.contains.extend(fields.iter().filter_map(|(_, e)| refs(e)))
        }
        NodeDef::FieldAccess { rec, .. } => info.extracts_from.extend(refs(rec)),
        NodeDef::IfThenElse { then_b, else_b, .. } => {
            info.aliases.extend(refs(&then_b.result));
            info.aliases.extend(refs(&else_b.result));
        }
        _ => {}
    }
    info
}

/// Statement table under construction. Confined to one thread.
#[derive(Debug)]
pub struct GraphContext {
    stmts: Vec<Statement>,
    index: HashMap<SymId, usize>,
    bound: HashMap<SymId, SemType>,
    cse: HashMap<NodeDef, SymId>,
    scopes: Vec<Frame>,
    next_sym: u32,
    next_block: u32,
    next_stream: u64,
    cse_enabled: bool,
}

impl Default for GraphContext {
    fn default() -> Self {
        Self::new()
    }
}

impl StatementTable for GraphContext {
    fn statements(&self) -> &[Statement] {
        &self.stmts
    }
    fn sym_index(&self) -> &HashMap<SymId, usize> {
        &self.index
    }
}

impl GraphContext {
    /// A context with an open root scope.
    pub fn new() -> Self {
        let mut ctx = GraphContext {
            stmts: Vec::new(),
            index: HashMap::new(),
            bound: HashMap::new(),
            cse: HashMap::new(),
            scopes: Vec::new(),
            next_sym: 1,
            next_block: 0,
            next_stream: 0,
            cse_enabled: true,
        };
        ctx.push_scope(Vec::new());
        ctx
    }

    pub fn set_cse(&mut self, enabled: bool) {
        self.cse_enabled = enabled;
    }

    pub fn fresh_sym(&mut self) -> SymId {
        let s = SymId(self.next_sym);
        self.next_sym += 1;
        s
    }

    /// A symbol bound by a scope (loop index, reduce operand) rather than
    /// by a statement.
    pub fn fresh_bound(&mut self, ty: SemType) -> SymId {
        let s = self.fresh_sym();
        self.bound.insert(s, ty);
        s
    }

    pub fn fresh_stream(&mut self) -> u64 {
        let s = self.next_stream;
        self.next_stream += 1;
        s
    }

    pub fn bound_type(&self, s: SymId) -> Option<&SemType> {
        self.bound.get(&s)
    }

    pub fn sym_def(&self, s: SymId) -> Option<SymDef> {
        if let Some(&i) = self.index.get(&s) {
            Some(SymDef::Stmt(i))
        } else if self.bound.contains_key(&s) {
            Some(SymDef::Bound)
        } else {
            None
        }
    }

    pub fn current_scope(&self) -> BlockId {
        self.scopes.last().expect("scope stack is never empty").id
    }

    pub fn depth(&self) -> usize {
        self.scopes.len()
    }

    /// Drops scopes opened after `depth`, used when staging fails midway.
    pub fn unwind_to(&mut self, depth: usize) {
        self.scopes.truncate(depth.max(1));
    }

    pub fn push_scope(&mut self, bound: Vec<SymId>) -> BlockId {
        let id = BlockId(self.next_block);
        self.next_block += 1;
        self.scopes.push(Frame {
            id,
            effects: Vec::new(),
            bound,
        });
        id
    }

    pub fn pop_scope(&mut self, result: Expr) -> Block {
        assert!(self.scopes.len() > 1, "cannot pop the root scope");
        let f = self.scopes.pop().unwrap();
        Block {
            id: f.id,
            result,
            effects: f.effects,
            bound: f.bound,
        }
    }

    /// Runs `body` in a fresh scope and returns the reified block.
    pub fn reify(
        &mut self,
        bound: Vec<SymId>,
        body: impl FnOnce(&mut GraphContext) -> Result<Expr, StageError>,
    ) -> Result<Block, StageError> {
        let depth = self.scopes.len();
        self.push_scope(bound);
        match body(self) {
            Ok(e) => Ok(self.pop_scope(e)),
            Err(err) => {
                self.scopes.truncate(depth);
                Err(err)
            }
        }
    }

    /// Closes the root scope and freezes the table.
    pub fn finish(mut self, result: Expr) -> Graph {
        assert_eq!(self.scopes.len(), 1, "unbalanced scopes at finish");
        let f = self.scopes.pop().unwrap();
        let root = Block {
            id: f.id,
            result,
            effects: f.effects,
            bound: f.bound,
        };
        Graph {
            stmts: self.stmts,
            index: self.index,
            bound: self.bound,
            root,
        }
    }

    /// Implicit reads: every mutable allocation reachable from an operand.
    fn implicit_reads(&self, def: &NodeDef) -> SymSet {
        let mut reads = SymSet::new();
        // A column wrapper only bundles references; its consumers read the
        // columns themselves.
        if let NodeDef::Record { soa: true, .. } = def {
            return reads;
        }
        for op in def.operands() {
            reads.extend(self.mutable_roots(op));
        }
        reads
    }

    fn append(
        &mut self,
        def: NodeDef,
        ty: SemType,
        eff: EffectSummary,
    ) -> Result<Expr, StageError> {
        let alias = alias_info_for(&def, &ty);
        let syms = match &def {
            NodeDef::ParallelLoop(l) => l.outs().collect::<Vec<_>>(),
            _ => vec![self.fresh_sym()],
        };
        let sym = syms[0];
        let stmt = Statement {
            sym,
            def,
            eff,
            alias,
            ty: ty.clone(),
            origin: self.current_scope(),
        };
        self.check_no_sharing(&stmt)?;
        let effectful = stmt.is_effectful();
        let pos = self.stmts.len();
        for s in &syms {
            self.index.insert(*s, pos);
        }
        self.stmts.push(stmt);
        if effectful {
            self.scopes.last_mut().unwrap().effects.push(sym);
        }
        Ok(Expr::Sym(sym, ty))
    }

    /// Binds a pure definition: folds constants, reuses an equal existing
    /// definition, or appends a new statement. Definitions that read
    /// mutable state are reflected as reads instead.
    pub fn to_atom(&mut self, def: NodeDef) -> Result<Expr, StageError> {
        let ty = def.result_type()?;
        if let Some(lit) = def.fold() {
            return Ok(Expr::Const(lit));
        }
        let reads = self.implicit_reads(&def);
        if !reads.is_empty() {
            return self.append(def, ty, EffectSummary::read(reads));
        }
        if self.cse_enabled {
            if let Some(&s) = self.cse.get(&def) {
                return Ok(Expr::Sym(s, ty));
            }
        }
        let key = self.cse_enabled.then(|| def.clone());
        let e = self.append(def, ty, EffectSummary::pure())?;
        if let (Some(k), Some(s)) = (key, e.sym()) {
            self.cse.insert(k, s);
        }
        Ok(e)
    }

    pub fn reflect_pure(&mut self, def: NodeDef) -> Result<Expr, StageError> {
        self.to_atom(def)
    }

    /// Reflects a definition with the given summary plus implicit reads.
    /// Never shares the result with another statement.
    pub fn reflect_effect(
        &mut self,
        def: NodeDef,
        summary: EffectSummary,
    ) -> Result<Expr, StageError> {
        let ty = def.result_type()?;
        let reads = self.implicit_reads(&def);
        let eff = if reads.is_empty() {
            summary
        } else {
            summary.and_then(&EffectSummary::read(reads))
        };
        if eff.is_pure() {
            return self.to_atom(def);
        }
        self.append(def, ty, eff)
    }

    pub fn reflect_simple(&mut self, def: NodeDef) -> Result<Expr, StageError> {
        self.reflect_effect(def, EffectSummary::simple())
    }

    pub fn reflect_mutable(&mut self, def: NodeDef) -> Result<Expr, StageError> {
        self.reflect_effect(def, EffectSummary::alloc())
    }

    pub fn reflect_write(&mut self, target: &Expr, def: NodeDef) -> Result<Expr, StageError> {
        let t = target.sym().filter(|s| self.is_mutable_alloc(*s));
        let Some(t) = t else {
            return Err(StageError::WriteToImmutable {
                target: target.to_string(),
                detail: format!("{} does not refer to a mutable allocation", target),
            });
        };
        self.reflect_effect(def, EffectSummary::write([t]))
    }

    /// Summary of a reified block as seen from outside it: allocations
    /// made inside the block are private to it.
    pub fn summarize_block(&self, b: &Block) -> EffectSummary {
        let mut s = EffectSummary::pure();
        let mut local = SymSet::new();
        for e in &b.effects {
            let st = self.lookup(*e).expect("effect refers to a statement");
            s = s.and_then(&st.eff);
            if st.eff.allocates_mutable {
                local.insert(st.sym);
            }
        }
        let result_local = b.result.sym().map(|r| local.contains(&r)).unwrap_or(false);
        s.forget(&local, result_local)
    }

    /// Stages any definition with the effect treatment its kind calls for.
    pub fn stage(&mut self, def: NodeDef) -> Result<Expr, StageError> {
        match &def {
            NodeDef::Print(_) => self.reflect_simple(def),
            NodeDef::VarAlloc(_) | NodeDef::VectorNew { .. } => self.reflect_mutable(def),
            NodeDef::VarRead(v) => {
                let v = v.clone();
                let target = v.sym().filter(|s| self.is_mutable_alloc(*s));
                match target {
                    Some(t) => self.reflect_effect(def, EffectSummary::read([t])),
                    None => Err(StageError::mismatch("VarRead", format!("{v} is not a variable"))),
                }
            }
            NodeDef::VarWrite(v, x) | NodeDef::VectorUpdate(v, _, x) => {
                let (v, x) = (v.clone(), x.clone());
                let rhs_roots = self.mutable_roots(&x);
                if !rhs_roots.is_empty() {
                    return Err(StageError::IllegalSharing {
                        stmt: format!("{def}"),
                        detail: format!(
                            "storing {x} would make {} reachable from {v}",
                            fmt_syms(&rhs_roots)
                        ),
                    });
                }
                self.reflect_write(&v, def)
            }
            NodeDef::IfThenElse { then_b, else_b, .. } => {
                let s = self
                    .summarize_block(then_b)
                    .or_else(&self.summarize_block(else_b));
                self.reflect_effect(def, s)
            }
            NodeDef::While { cond, body } => {
                let s = self
                    .summarize_block(cond)
                    .and_then(&self.summarize_block(body))
                    .widen();
                // A loop may diverge, so it is never dead code.
                let s = if s.is_pure() {
                    EffectSummary {
                        kind: EffectKind::Simple,
                        ..s
                    }
                } else {
                    s
                };
                self.reflect_effect(def, s)
            }
            NodeDef::ParallelLoop(l) => {
                let mut s = self.summarize_block(&l.body).widen();
                for e in &l.elems {
                    if let LoopElem::Reduce { reduce, .. } = e {
                        s = s.and_then(&self.summarize_block(reduce).widen());
                    }
                }
                self.reflect_effect(def, s)
            }
            NodeDef::VectorLength(v) => match self.known_length(v) {
                Some(len) => Ok(len),
                None => self.to_atom(def),
            },
            NodeDef::Alias(x) => {
                if x.sym().map(|s| self.is_mutable_alloc(s)).unwrap_or(false) {
                    self.reflect_mutable(def)
                } else {
                    self.to_atom(def)
                }
            }
            _ => self.to_atom(def),
        }
    }

    /// Length of a vector whose producer fixes it, without reading the
    /// vector itself.
    pub fn known_length(&self, v: &Expr) -> Option<Expr> {
        let s = v.sym()?;
        match &self.lookup(s)?.def {
            NodeDef::ParallelLoop(l) => match l.elem_for(s)? {
                LoopElem::Collect { cond: None, .. } => Some(l.size.clone()),
                _ => None,
            },
            NodeDef::VectorRand { len, .. } | NodeDef::VectorNew { len, .. } => Some(len.clone()),
            _ => None,
        }
    }

    /// Rejects statements that would make one mutable allocation reachable
    /// from another.
    pub fn check_no_sharing(&self, stmt: &Statement) -> Result<(), StageError> {
        if !stmt.eff.allocates_mutable {
            return Ok(());
        }
        let mut reach = SymSet::new();
        for a in stmt.alias.aliases.iter().chain(&stmt.alias.contains) {
            roots_of(self, *a, &mut reach, 0);
        }
        for y in stmt.alias.extracts_from.iter().chain(&stmt.alias.copies_from) {
            contents_of(self, *y, &mut reach, 0);
        }
        reach.remove(&stmt.sym);
        if reach.is_empty() {
            Ok(())
        } else {
            Err(StageError::IllegalSharing {
                stmt: format!("{} = {}", stmt.sym, stmt.def),
                detail: format!(
                    "mutable {} would also reach mutable {}",
                    stmt.sym,
                    fmt_syms(&reach)
                ),
            })
        }
    }
}

fn fmt_syms(s: &SymSet) -> String {
    s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

/// A frozen, immutable statement graph with its root block.
#[derive(Clone, Debug)]
pub struct Graph {
    stmts: Vec<Statement>,
    index: HashMap<SymId, usize>,
    bound: HashMap<SymId, SemType>,
    pub root: Block,
}

impl StatementTable for Graph {
    fn statements(&self) -> &[Statement] {
        &self.stmts
    }
    fn sym_index(&self) -> &HashMap<SymId, usize> {
        &self.index
    }
}

impl Graph {
    pub fn stmt_at(&self, pos: usize) -> &Statement {
        &self.stmts[pos]
    }

    pub fn len(&self) -> usize {
        self.stmts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stmts.is_empty()
    }

    pub fn is_bound(&self, s: SymId) -> bool {
        self.bound.contains_key(&s)
    }

    pub fn bound_type(&self, s: SymId) -> Option<&SemType> {
        self.bound.get(&s)
    }

    /// All blocks of the graph keyed by id, including the root.
    pub fn blocks(&self) -> HashMap<crate::ir::BlockId, &Block> {
        let mut out = HashMap::new();
        out.insert(self.root.id, &self.root);
        for st in &self.stmts {
            for sc in st.def.scopes() {
                out.insert(sc.block.id, sc.block);
            }
        }
        out
    }
}
