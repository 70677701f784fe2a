//! Code generation: schedule-driven emission of MiniC, a small first-order
//! imperative target in which every top-level statement is a kernel, and
//! the kernel dependency graph consumed by the parallel runtime.

mod deg;
mod emit;
mod print;

use std::collections::{BTreeSet, HashSet};

use thiserror::Error;

use crate::ir::{
    BinOp, EffectKind, Expr, Graph, Lit, LoopElem, NodeDef, SemType, StatementTable, SymId, UnOp,
};
use crate::opt::Schedule;

pub use deg::{emit_deg, Deg, DegEdge, DegError, DegKernel};
pub use emit::{CodeGen, Emitter, EmitterRegistry};

/// No emitter in the registry chain accepted a node.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("don't know how to generate code for: {node}")]
pub struct GenerationFailed {
    pub node: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pattern {
    LoopCollect,
    LoopReduce,
    LoopForeach,
    SingleTask,
}

impl Pattern {
    pub const ALL: [Pattern; 4] = [
        Pattern::LoopCollect,
        Pattern::LoopReduce,
        Pattern::LoopForeach,
        Pattern::SingleTask,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pattern::LoopCollect => "loop-collect",
            Pattern::LoopReduce => "loop-reduce",
            Pattern::LoopForeach => "loop-foreach",
            Pattern::SingleTask => "single-task",
        }
    }

    pub fn parse(s: &str) -> Option<Pattern> {
        Pattern::ALL.into_iter().find(|p| p.name() == s)
    }
}

/// A generated program: kernels in schedule order and the result.
#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    pub name: String,
    pub kernels: Vec<Kernel>,
    pub result: Expr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    pub id: usize,
    pub pattern: Pattern,
    /// Outputs of earlier kernels read by this one.
    pub inputs: Vec<SymId>,
    pub outputs: Vec<SymId>,
    /// A loop kernel whose iterations must run in order because they
    /// print, update a variable or have a global effect.
    pub serial: bool,
    pub body: KernelBody,
}

impl Kernel {
    pub fn name(&self) -> String {
        format!("k{}", self.id)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum KernelBody {
    Task(Vec<Stmt>),
    Loop(LoopCode),
}

/// A parallel loop: the body runs once per index of `0..size`, then each
/// element slot consumes the body's values.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopCode {
    pub size: Expr,
    pub index: SymId,
    pub body: Vec<Stmt>,
    pub elems: Vec<ElemCode>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ElemCode {
    Collect {
        out: SymId,
        elem: SemType,
        value: Expr,
        cond: Option<Expr>,
    },
    Reduce {
        out: SymId,
        ty: SemType,
        value: Expr,
        cond: Option<Expr>,
        zero: Expr,
        lhs: SymId,
        rhs: SymId,
        combine: Body,
    },
    Foreach {
        out: SymId,
    },
}

impl ElemCode {
    pub fn out(&self) -> SymId {
        match self {
            ElemCode::Collect { out, .. }
            | ElemCode::Reduce { out, .. }
            | ElemCode::Foreach { out } => *out,
        }
    }
}

/// Statements of a nested scope and the value it yields.
#[derive(Clone, Debug, PartialEq)]
pub struct Body {
    pub stmts: Vec<Stmt>,
    pub result: Expr,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Stmt {
    Val {
        sym: SymId,
        ty: SemType,
        rhs: Rhs,
    },
    Var {
        sym: SymId,
        ty: SemType,
        init: Expr,
    },
    Assign {
        var: SymId,
        value: Expr,
    },
    Write {
        vec: Expr,
        index: Expr,
        value: Expr,
    },
    Print(Expr),
    If {
        sym: SymId,
        ty: SemType,
        cond: Expr,
        then_b: Body,
        else_b: Body,
    },
    While {
        cond: Body,
        body: Body,
    },
    Loop(LoopCode),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Rhs {
    Copy(Expr),
    Binary(BinOp, Expr, Expr),
    Unary(UnOp, Expr),
    Length(Expr),
    Index(Expr, Expr),
    NewArray { len: Expr, elem: SemType },
    Rand { len: Expr, stream: u64 },
    Literal { elems: Vec<Lit>, elem: SemType },
    Call(String, Vec<Expr>),
    Record { tag: String, fields: Vec<(String, Expr)> },
    Field(Expr, String),
    Input(u32),
}

fn collect_syms(e: &Expr, out: &mut BTreeSet<SymId>) {
    if let Some(s) = e.sym() {
        out.insert(s);
    }
}

/// Every symbol a scheduled statement reads, including from nested scopes.
fn used_inside(g: &Graph, sched: &Schedule, sym: SymId, out: &mut BTreeSet<SymId>) {
    let st = g.lookup(sym).expect("scheduled symbol is defined");
    for op in st.def.operands() {
        collect_syms(op, out);
    }
    for sc in st.def.scopes() {
        for r in sc.roots {
            collect_syms(r, out);
        }
        for s in sched.block(sc.block.id) {
            used_inside(g, sched, *s, out);
        }
    }
}

fn pattern_of(def: &NodeDef) -> Pattern {
    match def {
        NodeDef::ParallelLoop(l) => {
            if l.elems.iter().any(|e| matches!(e, LoopElem::Foreach { .. })) {
                Pattern::LoopForeach
            } else if l.elems.iter().any(|e| matches!(e, LoopElem::Reduce { .. })) {
                Pattern::LoopReduce
            } else {
                Pattern::LoopCollect
            }
        }
        _ => Pattern::SingleTask,
    }
}

/// Emits one kernel per top-level scheduled statement.
pub fn generate(
    name: &str,
    g: &Graph,
    sched: &Schedule,
    registry: &EmitterRegistry,
) -> Result<Program, GenerationFailed> {
    let mut cg = CodeGen::new(g, sched, registry);
    let root_defs: HashSet<SymId> = sched
        .block(g.root.id)
        .iter()
        .flat_map(|s| g.lookup(*s).unwrap().defined_syms())
        .collect();
    let mut kernels = Vec::new();
    for (id, sym) in sched.block(g.root.id).iter().enumerate() {
        let st = g.lookup(*sym).unwrap();
        let outputs = st.defined_syms();
        let mut used = BTreeSet::new();
        used_inside(g, sched, *sym, &mut used);
        let inputs = used
            .into_iter()
            .filter(|s| root_defs.contains(s) && !outputs.contains(s))
            .collect();
        let body = match &st.def {
            NodeDef::ParallelLoop(l) => KernelBody::Loop(cg.emit_loop(l)?),
            _ => KernelBody::Task(cg.emit_node(st)?),
        };
        let serial = matches!(body, KernelBody::Loop(_))
            && (st.eff.kind == EffectKind::Global
                || st.eff.may_write.iter().any(|w| {
                    w.is_console()
                        || matches!(g.lookup(*w).map(|a| &a.def), Some(NodeDef::VarAlloc(_)))
                }));
        kernels.push(Kernel {
            id,
            pattern: pattern_of(&st.def),
            inputs,
            outputs,
            serial,
            body,
        });
    }
    Ok(Program {
        name: name.to_string(),
        kernels,
        result: g.root.result.clone(),
    })
}
