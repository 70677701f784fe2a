use std::collections::HashMap;
use std::rc::Rc;

use super::{Body, ElemCode, GenerationFailed, LoopCode, Rhs, Stmt};
use crate::ir::{Block, Graph, LoopDef, LoopElem, NodeDef, SemType, Statement, StatementTable};
use crate::opt::Schedule;

/// Emits MiniC for one statement, or declines with `None` so the next
/// emitter in the chain is tried.
pub type Emitter =
    Rc<dyn Fn(&mut CodeGen, &Statement) -> Result<Option<Vec<Stmt>>, GenerationFailed>>;

/// Emitters keyed by node kind. Later registrations are tried first.
#[derive(Clone, Default)]
pub struct EmitterRegistry {
    emitters: HashMap<&'static str, Vec<Emitter>>,
}

fn val(st: &Statement, rhs: Rhs) -> Vec<Stmt> {
    vec![Stmt::Val {
        sym: st.sym,
        ty: st.ty.clone(),
        rhs,
    }]
}

fn simple(f: fn(&Statement) -> Option<Vec<Stmt>>) -> Emitter {
    Rc::new(move |_, st| Ok(f(st)))
}

impl EmitterRegistry {
    pub fn register(&mut self, family: &'static str, e: Emitter) {
        self.emitters.entry(family).or_default().push(e);
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Emitters for the core nodes: arithmetic, control flow, variables,
    /// vectors and printing.
    pub fn base() -> Self {
        let mut r = Self::default();
        for family in ["Plus", "Minus", "Times", "Divide", "Lt", "Eq", "And", "Or"] {
            r.register(
                family,
                simple(|st| match &st.def {
                    NodeDef::Binary(op, a, b) => {
                        Some(val(st, Rhs::Binary(*op, a.clone(), b.clone())))
                    }
                    _ => None,
                }),
            );
        }
        for family in ["Not", "MathAbs", "MathSqrt", "ToDouble", "ToInt"] {
            r.register(
                family,
                simple(|st| match &st.def {
                    NodeDef::Unary(op, a) => Some(val(st, Rhs::Unary(*op, a.clone()))),
                    _ => None,
                }),
            );
        }
        r.register(
            "VarAlloc",
            simple(|st| match (&st.def, &st.ty) {
                (NodeDef::VarAlloc(init), SemType::Var(t)) => Some(vec![Stmt::Var {
                    sym: st.sym,
                    ty: (**t).clone(),
                    init: init.clone(),
                }]),
                _ => None,
            }),
        );
        r.register(
            "VarRead",
            simple(|st| match &st.def {
                NodeDef::VarRead(v) => Some(val(st, Rhs::Copy(v.clone()))),
                _ => None,
            }),
        );
        r.register(
            "VarWrite",
            simple(|st| match &st.def {
                NodeDef::VarWrite(v, x) => Some(vec![Stmt::Assign {
                    var: v.sym()?,
                    value: x.clone(),
                }]),
                _ => None,
            }),
        );
        r.register(
            "Print",
            simple(|st| match &st.def {
                NodeDef::Print(x) => Some(vec![Stmt::Print(x.clone())]),
                _ => None,
            }),
        );
        r.register(
            "Input",
            simple(|st| match &st.def {
                NodeDef::Input(i, _) => Some(val(st, Rhs::Input(*i))),
                _ => None,
            }),
        );
        r.register(
            "VectorNew",
            simple(|st| match &st.def {
                NodeDef::VectorNew { len, elem } => Some(val(
                    st,
                    Rhs::NewArray {
                        len: len.clone(),
                        elem: elem.clone(),
                    },
                )),
                _ => None,
            }),
        );
        r.register(
            "VectorRand",
            simple(|st| match &st.def {
                NodeDef::VectorRand { len, stream } => Some(val(
                    st,
                    Rhs::Rand {
                        len: len.clone(),
                        stream: *stream,
                    },
                )),
                _ => None,
            }),
        );
        r.register(
            "VectorLiteral",
            simple(|st| match &st.def {
                NodeDef::VectorLiteral { elems, elem } => Some(val(
                    st,
                    Rhs::Literal {
                        elems: elems.clone(),
                        elem: elem.clone(),
                    },
                )),
                _ => None,
            }),
        );
        r.register(
            "VectorLength",
            simple(|st| match &st.def {
                NodeDef::VectorLength(v) => Some(val(st, Rhs::Length(v.clone()))),
                _ => None,
            }),
        );
        r.register(
            "VectorApply",
            simple(|st| match &st.def {
                NodeDef::VectorApply(v, i) => Some(val(st, Rhs::Index(v.clone(), i.clone()))),
                _ => None,
            }),
        );
        r.register(
            "VectorUpdate",
            simple(|st| match &st.def {
                NodeDef::VectorUpdate(v, i, x) => Some(vec![Stmt::Write {
                    vec: v.clone(),
                    index: i.clone(),
                    value: x.clone(),
                }]),
                _ => None,
            }),
        );
        r.register(
            "Alias",
            simple(|st| match &st.def {
                NodeDef::Alias(x) => Some(val(st, Rhs::Copy(x.clone()))),
                _ => None,
            }),
        );
        r.register(
            "IfThenElse",
            Rc::new(|cg, st| {
                let NodeDef::IfThenElse {
                    cond,
                    then_b,
                    else_b,
                } = &st.def
                else {
                    return Ok(None);
                };
                Ok(Some(vec![Stmt::If {
                    sym: st.sym,
                    ty: st.ty.clone(),
                    cond: cond.clone(),
                    then_b: cg.emit_block(then_b)?,
                    else_b: cg.emit_block(else_b)?,
                }]))
            }),
        );
        r.register(
            "While",
            Rc::new(|cg, st| {
                let NodeDef::While { cond, body } = &st.def else {
                    return Ok(None);
                };
                Ok(Some(vec![Stmt::While {
                    cond: cg.emit_block(cond)?,
                    body: cg.emit_block(body)?,
                }]))
            }),
        );
        r.register(
            "ParallelLoop",
            Rc::new(|cg, st| match &st.def {
                NodeDef::ParallelLoop(l) => Ok(Some(vec![Stmt::Loop(cg.emit_loop(l)?)])),
                _ => Ok(None),
            }),
        );
        r
    }

    /// Record construction and field access, for programs that keep
    /// records at run time.
    pub fn add_records(&mut self) {
        self.register(
            "Record",
            simple(|st| match &st.def {
                NodeDef::Record { tag, fields, .. } => Some(val(
                    st,
                    Rhs::Record {
                        tag: tag.clone(),
                        fields: fields.clone(),
                    },
                )),
                _ => None,
            }),
        );
        self.register(
            "FieldAccess",
            simple(|st| match &st.def {
                NodeDef::FieldAccess { rec, field } => {
                    Some(val(st, Rhs::Field(rec.clone(), field.clone())))
                }
                _ => None,
            }),
        );
    }

    /// Calls into the runtime library for the vector nodes that survive
    /// to code generation.
    pub fn add_vector_nodes(&mut self) {
        self.register(
            "VectorNorm",
            simple(|st| match &st.def {
                NodeDef::VectorNorm(v) => Some(val(st, Rhs::Call("norm".into(), vec![v.clone()]))),
                _ => None,
            }),
        );
        self.register(
            "UnitVector",
            simple(|st| match &st.def {
                NodeDef::UnitVector(v) => Some(val(st, Rhs::Call("unit".into(), vec![v.clone()]))),
                _ => None,
            }),
        );
    }

    fn chain(&self, family: &str) -> Vec<Emitter> {
        self.emitters
            .get(family)
            .map(|v| v.iter().rev().cloned().collect())
            .unwrap_or_default()
    }
}

/// Emission state over one scheduled graph.
pub struct CodeGen<'a> {
    pub g: &'a Graph,
    pub sched: &'a Schedule,
    registry: &'a EmitterRegistry,
}

impl<'a> CodeGen<'a> {
    pub fn new(g: &'a Graph, sched: &'a Schedule, registry: &'a EmitterRegistry) -> Self {
        CodeGen { g, sched, registry }
    }

    pub fn emit_node(&mut self, st: &Statement) -> Result<Vec<Stmt>, GenerationFailed> {
        for e in self.registry.chain(st.def.name()) {
            if let Some(code) = e(self, st)? {
                return Ok(code);
            }
        }
        Err(GenerationFailed {
            node: format!("{} = {}", st.sym, st.def),
        })
    }

    /// The scheduled statements of `b` followed by its result.
    pub fn emit_block(&mut self, b: &Block) -> Result<Body, GenerationFailed> {
        let mut stmts = Vec::new();
        for sym in self.sched.block(b.id) {
            let st = self.g.lookup(*sym).expect("scheduled symbol is defined");
            stmts.extend(self.emit_node(st)?);
        }
        Ok(Body {
            stmts,
            result: b.result.clone(),
        })
    }

    pub fn emit_loop(&mut self, l: &LoopDef) -> Result<LoopCode, GenerationFailed> {
        let body = self.emit_block(&l.body)?.stmts;
        let mut elems = Vec::new();
        for e in &l.elems {
            elems.push(match e {
                LoopElem::Collect { out, value, cond } => ElemCode::Collect {
                    out: *out,
                    elem: value.ty(),
                    value: value.clone(),
                    cond: cond.clone(),
                },
                LoopElem::Reduce {
                    out,
                    value,
                    cond,
                    zero,
                    lhs,
                    rhs,
                    reduce,
                } => ElemCode::Reduce {
                    out: *out,
                    ty: value.ty(),
                    value: value.clone(),
                    cond: cond.clone(),
                    zero: zero.clone(),
                    lhs: *lhs,
                    rhs: *rhs,
                    combine: self.emit_block(reduce)?,
                },
                LoopElem::Foreach { out } => ElemCode::Foreach { out: *out },
            });
        }
        Ok(LoopCode {
            size: l.size.clone(),
            index: l.index,
            body,
            elems,
        })
    }
}
