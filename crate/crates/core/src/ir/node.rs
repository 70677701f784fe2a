use std::fmt;
use std::hash::{Hash, Hasher};

use super::error::StageError;
use super::types::{BlockId, Expr, Lit, RecordType, SemType, SymId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Plus,
    Minus,
    Times,
    Divide,
    Lt,
    Eq,
    And,
    Or,
}

impl BinOp {
    pub fn name(self) -> &'static str {
        match self {
            BinOp::Plus => "Plus",
            BinOp::Minus => "Minus",
            BinOp::Times => "Times",
            BinOp::Divide => "Divide",
            BinOp::Lt => "Lt",
            BinOp::Eq => "Eq",
            BinOp::And => "And",
            BinOp::Or => "Or",
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Plus => "+",
            BinOp::Minus => "-",
            BinOp::Times => "*",
            BinOp::Divide => "/",
            BinOp::Lt => "<",
            BinOp::Eq => "==",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    pub fn is_commutative(self) -> bool {
        matches!(self, BinOp::Plus | BinOp::Times | BinOp::Eq | BinOp::And | BinOp::Or)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnOp {
    Not,
    Abs,
    Sqrt,
    ToDouble,
    ToInt,
}

impl UnOp {
    pub fn name(self) -> &'static str {
        match self {
            UnOp::Not => "Not",
            UnOp::Abs => "MathAbs",
            UnOp::Sqrt => "MathSqrt",
            UnOp::ToDouble => "ToDouble",
            UnOp::ToInt => "ToInt",
        }
    }
}

/// A reified scope: its result, the effectful statements reflected inside
/// it in program order, and the symbols it binds.
#[derive(Clone, Debug)]
pub struct Block {
    pub id: BlockId,
    pub result: Expr,
    pub effects: Vec<SymId>,
    pub bound: Vec<SymId>,
}

impl PartialEq for Block {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl Eq for Block {}

impl Hash for Block {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.id.hash(state);
    }
}

/// How a nested scope relates to its owner, which decides whether
/// statements may be hoisted out of it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScopeKind {
    Branch,
    WhileCond,
    WhileBody,
    LoopBody,
    Reduce,
}

impl ScopeKind {
    /// Scopes that may run any number of times.
    pub fn is_repeated(self) -> bool {
        !matches!(self, ScopeKind::Branch)
    }
}

/// A nested scope of a compound node together with the expressions that
/// keep its contents alive.
#[derive(Clone, Debug)]
pub struct ScopeRef<'a> {
    pub block: &'a Block,
    pub kind: ScopeKind,
    pub roots: Vec<&'a Expr>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LoopElem {
    Collect {
        out: SymId,
        value: Expr,
        cond: Option<Expr>,
    },
    Reduce {
        out: SymId,
        value: Expr,
        cond: Option<Expr>,
        zero: Expr,
        lhs: SymId,
        rhs: SymId,
        reduce: Block,
    },
    Foreach {
        out: SymId,
    },
}

impl LoopElem {
    pub fn out(&self) -> SymId {
        match self {
            LoopElem::Collect { out, .. }
            | LoopElem::Reduce { out, .. }
            | LoopElem::Foreach { out } => *out,
        }
    }

    pub fn value(&self) -> Option<&Expr> {
        match self {
            LoopElem::Collect { value, .. } | LoopElem::Reduce { value, .. } => Some(value),
            LoopElem::Foreach { .. } => None,
        }
    }

    pub fn cond(&self) -> Option<&Expr> {
        match self {
            LoopElem::Collect { cond, .. } | LoopElem::Reduce { cond, .. } => cond.as_ref(),
            LoopElem::Foreach { .. } => None,
        }
    }

    pub fn ty(&self) -> SemType {
        match self {
            LoopElem::Collect { value, .. } => SemType::vector(value.ty()),
            LoopElem::Reduce { value, .. } => value.ty(),
            LoopElem::Foreach { .. } => SemType::Unit,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            LoopElem::Collect { .. } => "collect",
            LoopElem::Reduce { .. } => "reduce",
            LoopElem::Foreach { .. } => "foreach",
        }
    }
}

/// A parallel loop over `0..size`. The body block binds `index`; every
/// element reads its value and condition from the body scope.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LoopDef {
    pub size: Expr,
    pub index: SymId,
    pub body: Block,
    pub elems: Vec<LoopElem>,
    /// The domain operation this loop was lowered from, kept so that
    /// smart constructors can recognize their producers.
    pub origin: Option<Box<NodeDef>>,
}

impl LoopDef {
    pub fn outs(&self) -> impl Iterator<Item = SymId> + '_ {
        self.elems.iter().map(LoopElem::out)
    }

    pub fn elem_for(&self, out: SymId) -> Option<&LoopElem> {
        self.elems.iter().find(|e| e.out() == out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NodeDef {
    Binary(BinOp, Expr, Expr),
    Unary(UnOp, Expr),
    IfThenElse {
        cond: Expr,
        then_b: Block,
        else_b: Block,
    },
    While {
        cond: Block,
        body: Block,
    },
    VarAlloc(Expr),
    VarRead(Expr),
    VarWrite(Expr, Expr),
    Print(Expr),
    /// Positional program input.
    Input(u32, SemType),
    VectorNew {
        len: Expr,
        elem: SemType,
    },
    VectorRand {
        len: Expr,
        stream: u64,
    },
    VectorLiteral {
        elems: Vec<Lit>,
        elem: SemType,
    },
    VectorLength(Expr),
    VectorApply(Expr, Expr),
    VectorUpdate(Expr, Expr, Expr),
    ParallelLoop(LoopDef),
    Record {
        tag: String,
        fields: Vec<(String, Expr)>,
        soa: bool,
    },
    FieldAccess {
        rec: Expr,
        field: String,
    },
    /// A second name for an existing object.
    Alias(Expr),
    ZeroVector(Expr),
    ScalarTimesVector(Expr, Expr),
    VectorMinus(Expr, Expr),
    VectorNorm(Expr),
    UnitVector(Expr),
}

impl NodeDef {
    pub fn name(&self) -> &'static str {
        match self {
            NodeDef::Binary(op, ..) => op.name(),
            NodeDef::Unary(op, _) => op.name(),
            NodeDef::IfThenElse { .. } => "IfThenElse",
            NodeDef::While { .. } => "While",
            NodeDef::VarAlloc(_) => "VarAlloc",
            NodeDef::VarRead(_) => "VarRead",
            NodeDef::VarWrite(..) => "VarWrite",
            NodeDef::Print(_) => "Print",
            NodeDef::Input(..) => "Input",
            NodeDef::VectorNew { .. } => "VectorNew",
            NodeDef::VectorRand { .. } => "VectorRand",
            NodeDef::VectorLiteral { .. } => "VectorLiteral",
            NodeDef::VectorLength(_) => "VectorLength",
            NodeDef::VectorApply(..) => "VectorApply",
            NodeDef::VectorUpdate(..) => "VectorUpdate",
            NodeDef::ParallelLoop(_) => "ParallelLoop",
            NodeDef::Record { .. } => "Record",
            NodeDef::FieldAccess { .. } => "FieldAccess",
            NodeDef::Alias(_) => "Alias",
            NodeDef::ZeroVector(_) => "ZeroVector",
            NodeDef::ScalarTimesVector(..) => "ScalarTimesVector",
            NodeDef::VectorMinus(..) => "VectorMinus",
            NodeDef::VectorNorm(_) => "VectorNorm",
            NodeDef::UnitVector(_) => "UnitVector",
        }
    }

    pub fn is_compound(&self) -> bool {
        matches!(
            self,
            NodeDef::IfThenElse { .. } | NodeDef::While { .. } | NodeDef::ParallelLoop(_)
        )
    }

    pub fn as_loop(&self) -> Option<&LoopDef> {
        match self {
            NodeDef::ParallelLoop(l) => Some(l),
            _ => None,
        }
    }

    /// Operands evaluated in the scope that owns this node.
    pub fn operands(&self) -> Vec<&Expr> {
        match self {
            NodeDef::Binary(_, a, b)
            | NodeDef::VarWrite(a, b)
            | NodeDef::VectorApply(a, b)
            | NodeDef::ScalarTimesVector(a, b)
            | NodeDef::VectorMinus(a, b) => vec![a, b],
            NodeDef::Unary(_, a)
            | NodeDef::VarAlloc(a)
            | NodeDef::VarRead(a)
            | NodeDef::Print(a)
            | NodeDef::VectorLength(a)
            | NodeDef::Alias(a)
            | NodeDef::ZeroVector(a)
            | NodeDef::VectorNorm(a)
            | NodeDef::UnitVector(a) => vec![a],
            NodeDef::IfThenElse { cond, .. } => vec![cond],
            NodeDef::While { .. } | NodeDef::Input(..) | NodeDef::VectorLiteral { .. } => vec![],
            NodeDef::VectorNew { len, .. } | NodeDef::VectorRand { len, .. } => vec![len],
            NodeDef::VectorUpdate(v, i, x) => vec![v, i, x],
            NodeDef::ParallelLoop(l) => {
                let mut ops = vec![&l.size];
                for e in &l.elems {
                    if let LoopElem::Reduce { zero, .. } = e {
                        ops.push(zero);
                    }
                }
                ops
            }
            NodeDef::Record { fields, .. } => fields.iter().map(|(_, e)| e).collect(),
            NodeDef::FieldAccess { rec, .. } => vec![rec],
        }
    }

    /// Nested scopes, in the order they are emitted.
    pub fn scopes(&self) -> Vec<ScopeRef<'_>> {
        fn block_roots(b: &Block) -> Vec<&Expr> {
            vec![&b.result]
        }
        match self {
            NodeDef::IfThenElse { then_b, else_b, .. } => vec![
                ScopeRef {
                    block: then_b,
                    kind: ScopeKind::Branch,
                    roots: block_roots(then_b),
                },
                ScopeRef {
                    block: else_b,
                    kind: ScopeKind::Branch,
                    roots: block_roots(else_b),
                },
            ],
            NodeDef::While { cond, body } => vec![
                ScopeRef {
                    block: cond,
                    kind: ScopeKind::WhileCond,
                    roots: block_roots(cond),
                },
                ScopeRef {
                    block: body,
                    kind: ScopeKind::WhileBody,
                    roots: block_roots(body),
                },
            ],
            NodeDef::ParallelLoop(l) => {
                let mut roots = block_roots(&l.body);
                for e in &l.elems {
                    roots.extend(e.value());
                    roots.extend(e.cond());
                }
                let mut out = vec![ScopeRef {
                    block: &l.body,
                    kind: ScopeKind::LoopBody,
                    roots,
                }];
                for e in &l.elems {
                    if let LoopElem::Reduce { reduce, .. } = e {
                        out.push(ScopeRef {
                            block: reduce,
                            kind: ScopeKind::Reduce,
                            roots: block_roots(reduce),
                        });
                    }
                }
                out
            }
            _ => vec![],
        }
    }

    /// Rebuilds a non-compound node with every operand passed through `f`.
    /// Compound nodes are returned unchanged; transformers handle them
    /// separately because their scopes need re-reification.
    pub fn map_operands(&self, mut f: impl FnMut(&Expr) -> Expr) -> NodeDef {
        match self {
            NodeDef::Binary(op, a, b) => NodeDef::Binary(*op, f(a), f(b)),
            NodeDef::Unary(op, a) => NodeDef::Unary(*op, f(a)),
            NodeDef::VarAlloc(a) => NodeDef::VarAlloc(f(a)),
            NodeDef::VarRead(a) => NodeDef::VarRead(f(a)),
            NodeDef::VarWrite(a, b) => NodeDef::VarWrite(f(a), f(b)),
            NodeDef::Print(a) => NodeDef::Print(f(a)),
            NodeDef::VectorNew { len, elem } => NodeDef::VectorNew {
                len: f(len),
                elem: elem.clone(),
            },
            NodeDef::VectorRand { len, stream } => NodeDef::VectorRand {
                len: f(len),
                stream: *stream,
            },
            NodeDef::VectorLength(a) => NodeDef::VectorLength(f(a)),
            NodeDef::VectorApply(a, b) => NodeDef::VectorApply(f(a), f(b)),
            NodeDef::VectorUpdate(a, b, c) => NodeDef::VectorUpdate(f(a), f(b), f(c)),
            NodeDef::Record { tag, fields, soa } => NodeDef::Record {
                tag: tag.clone(),
                fields: fields.iter().map(|(n, e)| (n.clone(), f(e))).collect(),
                soa: *soa,
            },
            NodeDef::FieldAccess { rec, field } => NodeDef::FieldAccess {
                rec: f(rec),
                field: field.clone(),
            },
            NodeDef::Alias(a) => NodeDef::Alias(f(a)),
            NodeDef::ZeroVector(a) => NodeDef::ZeroVector(f(a)),
            NodeDef::ScalarTimesVector(a, b) => NodeDef::ScalarTimesVector(f(a), f(b)),
            NodeDef::VectorMinus(a, b) => NodeDef::VectorMinus(f(a), f(b)),
            NodeDef::VectorNorm(a) => NodeDef::VectorNorm(f(a)),
            NodeDef::UnitVector(a) => NodeDef::UnitVector(f(a)),
            NodeDef::Input(..)
            | NodeDef::VectorLiteral { .. }
            | NodeDef::IfThenElse { .. }
            | NodeDef::While { .. }
            | NodeDef::ParallelLoop(_) => self.clone(),
        }
    }

    /// Applies the typing rule of this node kind.
    pub fn result_type(&self) -> Result<SemType, StageError> {
        let name = self.name();
        let bad = |detail: String| Err(StageError::mismatch(name, detail));
        match self {
            NodeDef::Binary(op, a, b) => {
                let (ta, tb) = (a.ty(), b.ty());
                if ta != tb {
                    return bad(format!("operands have types {ta} and {tb}"));
                }
                match op {
                    BinOp::Plus | BinOp::Minus | BinOp::Times | BinOp::Divide => {
                        if ta.is_numeric() {
                            Ok(ta)
                        } else {
                            bad(format!("expected Int or Double, found {ta}"))
                        }
                    }
                    BinOp::Lt => {
                        if ta.is_numeric() {
                            Ok(SemType::Bool)
                        } else {
                            bad(format!("expected Int or Double, found {ta}"))
                        }
                    }
                    BinOp::Eq => {
                        if matches!(ta, SemType::Int | SemType::Double | SemType::Bool | SemType::Str) {
                            Ok(SemType::Bool)
                        } else {
                            bad(format!("cannot compare values of type {ta}"))
                        }
                    }
                    BinOp::And | BinOp::Or => {
                        if ta == SemType::Bool {
                            Ok(SemType::Bool)
                        } else {
                            bad(format!("expected Bool, found {ta}"))
                        }
                    }
                }
            }
            NodeDef::Unary(op, a) => {
                let t = a.ty();
                match (op, &t) {
                    (UnOp::Not, SemType::Bool) => Ok(SemType::Bool),
                    (UnOp::Abs, SemType::Int | SemType::Double) => Ok(t),
                    (UnOp::Sqrt, SemType::Double) => Ok(SemType::Double),
                    (UnOp::ToDouble, SemType::Int) => Ok(SemType::Double),
                    (UnOp::ToInt, SemType::Double) => Ok(SemType::Int),
                    _ => bad(format!("operand of type {t}")),
                }
            }
            NodeDef::IfThenElse { cond, then_b, else_b } => {
                if cond.ty() != SemType::Bool {
                    return bad(format!("condition has type {}", cond.ty()));
                }
                let (tt, te) = (then_b.result.ty(), else_b.result.ty());
                if tt != te {
                    return Err(StageError::BranchTypeMismatch {
                        then_ty: tt.to_string(),
                        else_ty: te.to_string(),
                    });
                }
                Ok(tt)
            }
            NodeDef::While { cond, .. } => {
                if cond.result.ty() != SemType::Bool {
                    return bad(format!("condition has type {}", cond.result.ty()));
                }
                Ok(SemType::Unit)
            }
            NodeDef::VarAlloc(init) => Ok(SemType::Var(Box::new(init.ty()))),
            NodeDef::VarRead(v) => match v.ty() {
                SemType::Var(inner) => Ok(*inner),
                t => bad(format!("expected a variable, found {t}")),
            },
            NodeDef::VarWrite(v, x) => match v.ty() {
                SemType::Var(inner) if *inner == x.ty() => Ok(SemType::Unit),
                SemType::Var(inner) => bad(format!("assigning {} to Var[{inner}]", x.ty())),
                t => bad(format!("expected a variable, found {t}")),
            },
            NodeDef::Print(_) => Ok(SemType::Unit),
            NodeDef::Input(_, t) => Ok(t.clone()),
            NodeDef::VectorNew { len, elem } => {
                expect_int(name, len)?;
                expect_scalar_elem(name, elem)?;
                Ok(SemType::vector(elem.clone()))
            }
            NodeDef::VectorRand { len, .. } => {
                expect_int(name, len)?;
                Ok(SemType::vector(SemType::Double))
            }
            NodeDef::VectorLiteral { elems, elem } => {
                expect_scalar_elem(name, elem)?;
                if let Some(l) = elems.iter().find(|l| l.ty() != *elem) {
                    return bad(format!("literal {l} in a Vector[{elem}]"));
                }
                Ok(SemType::vector(elem.clone()))
            }
            NodeDef::VectorLength(v) => {
                expect_vector(name, v)?;
                Ok(SemType::Int)
            }
            NodeDef::VectorApply(v, i) => {
                let e = expect_vector(name, v)?;
                expect_int(name, i)?;
                Ok(e)
            }
            NodeDef::VectorUpdate(v, i, x) => {
                let e = expect_vector(name, v)?;
                expect_int(name, i)?;
                if x.ty() != e {
                    return bad(format!("storing {} into Vector[{e}]", x.ty()));
                }
                Ok(SemType::Unit)
            }
            NodeDef::ParallelLoop(l) => {
                expect_int(name, &l.size)?;
                if l.elems.is_empty() {
                    return bad("loop without elements".into());
                }
                for e in &l.elems {
                    if let Some(c) = e.cond() {
                        if c.ty() != SemType::Bool {
                            return bad(format!("element condition has type {}", c.ty()));
                        }
                    }
                    if let LoopElem::Collect { value, .. } = e {
                        expect_scalar_elem(name, &value.ty())?;
                    }
                    if let LoopElem::Reduce { value, zero, reduce, .. } = e {
                        let t = value.ty();
                        if zero.ty() != t || reduce.result.ty() != t {
                            return bad(format!(
                                "reduce over {t} with zero {} and combiner {}",
                                zero.ty(),
                                reduce.result.ty()
                            ));
                        }
                    }
                }
                Ok(l.elems[0].ty())
            }
            NodeDef::Record { tag, fields, soa } => {
                if fields.is_empty() {
                    return bad("record without fields".into());
                }
                for (i, (n, _)) in fields.iter().enumerate() {
                    if fields[..i].iter().any(|(m, _)| m == n) {
                        return bad(format!("duplicate field `{n}`"));
                    }
                }
                if *soa {
                    let mut elem_fields = Vec::new();
                    for (n, e) in fields {
                        match e.ty() {
                            SemType::Vector(t) => elem_fields.push((n.clone(), *t)),
                            t => return bad(format!("field `{n}` of a column record has type {t}")),
                        }
                    }
                    Ok(SemType::vector(SemType::Record(RecordType {
                        tag: tag.clone(),
                        fields: elem_fields,
                    })))
                } else {
                    Ok(SemType::Record(RecordType {
                        tag: tag.clone(),
                        fields: fields.iter().map(|(n, e)| (n.clone(), e.ty())).collect(),
                    }))
                }
            }
            NodeDef::FieldAccess { rec, field } => match rec.ty() {
                SemType::Record(r) => r.field(field).cloned().ok_or_else(|| StageError::UnknownField {
                    field: field.clone(),
                    ty: rec.ty().to_string(),
                }),
                SemType::Vector(inner) => match *inner {
                    SemType::Record(r) => r
                        .field(field)
                        .map(|t| SemType::vector(t.clone()))
                        .ok_or_else(|| StageError::UnknownField {
                            field: field.clone(),
                            ty: rec.ty().to_string(),
                        }),
                    t => bad(format!("field access on Vector[{t}]")),
                },
                t => bad(format!("field access on {t}")),
            },
            NodeDef::Alias(x) => Ok(x.ty()),
            NodeDef::ZeroVector(n) => {
                expect_int(name, n)?;
                Ok(SemType::vector(SemType::Double))
            }
            NodeDef::ScalarTimesVector(s, v) => {
                let e = expect_vector(name, v)?;
                if s.ty() != e || !e.is_numeric() {
                    return bad(format!("scaling Vector[{e}] by {}", s.ty()));
                }
                Ok(v.ty())
            }
            NodeDef::VectorMinus(a, b) => {
                let e = expect_vector(name, a)?;
                if b.ty() != a.ty() || !e.is_numeric() {
                    return bad(format!("{} minus {}", a.ty(), b.ty()));
                }
                Ok(a.ty())
            }
            NodeDef::VectorNorm(v) | NodeDef::UnitVector(v) => {
                let e = expect_vector(name, v)?;
                if e != SemType::Double {
                    return bad(format!("norm of Vector[{e}]"));
                }
                Ok(if matches!(self, NodeDef::VectorNorm(_)) {
                    SemType::Double
                } else {
                    v.ty()
                })
            }
        }
    }

    /// Evaluates a pure node whose operands are all constants. Integer
    /// division by zero is left for the runtime to trap.
    pub fn fold(&self) -> Option<Lit> {
        match self {
            NodeDef::Binary(op, Expr::Const(a), Expr::Const(b)) => fold_binary(*op, a, b),
            NodeDef::Unary(op, Expr::Const(a)) => fold_unary(*op, a),
            _ => None,
        }
    }
}

fn expect_int(op: &str, e: &Expr) -> Result<(), StageError> {
    if e.ty() == SemType::Int {
        Ok(())
    } else {
        Err(StageError::mismatch(op, format!("expected Int, found {}", e.ty())))
    }
}

fn expect_vector(op: &str, e: &Expr) -> Result<SemType, StageError> {
    match e.ty() {
        SemType::Vector(t) => Ok(*t),
        t => Err(StageError::mismatch(op, format!("expected a vector, found {t}"))),
    }
}

fn expect_scalar_elem(op: &str, t: &SemType) -> Result<(), StageError> {
    if matches!(t, SemType::Int | SemType::Double | SemType::Bool) {
        Ok(())
    } else {
        Err(StageError::mismatch(
            op,
            format!("vector elements must be Int, Double or Bool, found {t}"),
        ))
    }
}

pub fn fold_binary(op: BinOp, a: &Lit, b: &Lit) -> Option<Lit> {
    use BinOp::*;
    Some(match (op, a, b) {
        (Plus, Lit::Int(x), Lit::Int(y)) => Lit::Int(x.wrapping_add(*y)),
        (Minus, Lit::Int(x), Lit::Int(y)) => Lit::Int(x.wrapping_sub(*y)),
        (Times, Lit::Int(x), Lit::Int(y)) => Lit::Int(x.wrapping_mul(*y)),
        (Divide, Lit::Int(_), Lit::Int(0)) => return None,
        (Divide, Lit::Int(x), Lit::Int(y)) => Lit::Int(x.wrapping_div(*y)),
        (Lt, Lit::Int(x), Lit::Int(y)) => Lit::Bool(x < y),
        (Plus, Lit::Double(x), Lit::Double(y)) => Lit::Double(x + y),
        (Minus, Lit::Double(x), Lit::Double(y)) => Lit::Double(x - y),
        (Times, Lit::Double(x), Lit::Double(y)) => Lit::Double(x * y),
        (Divide, Lit::Double(x), Lit::Double(y)) => Lit::Double(x / y),
        (Lt, Lit::Double(x), Lit::Double(y)) => Lit::Bool(x < y),
        (Eq, Lit::Int(x), Lit::Int(y)) => Lit::Bool(x == y),
        (Eq, Lit::Double(x), Lit::Double(y)) => Lit::Bool(x == y),
        (Eq, Lit::Bool(x), Lit::Bool(y)) => Lit::Bool(x == y),
        (Eq, Lit::Str(x), Lit::Str(y)) => Lit::Bool(x == y),
        (And, Lit::Bool(x), Lit::Bool(y)) => Lit::Bool(*x && *y),
        (Or, Lit::Bool(x), Lit::Bool(y)) => Lit::Bool(*x || *y),
        _ => return None,
    })
}

pub fn fold_unary(op: UnOp, a: &Lit) -> Option<Lit> {
    Some(match (op, a) {
        (UnOp::Not, Lit::Bool(x)) => Lit::Bool(!x),
        (UnOp::Abs, Lit::Int(x)) => Lit::Int(x.wrapping_abs()),
        (UnOp::Abs, Lit::Double(x)) => Lit::Double(x.abs()),
        (UnOp::Sqrt, Lit::Double(x)) => Lit::Double(x.sqrt()),
        (UnOp::ToDouble, Lit::Int(x)) => Lit::Double(*x as f64),
        (UnOp::ToInt, Lit::Double(x)) => Lit::Int(*x as i64),
        _ => return None,
    })
}

fn join<T: fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

impl fmt::Display for LoopElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cond = |c: &Option<Expr>| c.as_ref().map(|c| format!(" if {c}")).unwrap_or_default();
        match self {
            LoopElem::Collect { out, value, cond: c } => {
                write!(f, "collect {out} = {value}{}", cond(c))
            }
            LoopElem::Reduce {
                out,
                value,
                cond: c,
                zero,
                lhs,
                rhs,
                reduce,
            } => write!(
                f,
                "reduce {out} = {value}{} zero {zero} by ({lhs}, {rhs}) => {}",
                cond(c),
                reduce.result
            ),
            LoopElem::Foreach { out } => write!(f, "foreach {out}"),
        }
    }
}

impl fmt::Display for NodeDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = self.name();
        match self {
            NodeDef::IfThenElse { cond, .. } => write!(f, "{name}({cond})"),
            NodeDef::While { .. } => write!(f, "{name}"),
            NodeDef::Input(i, t) => write!(f, "{name}({i}, {t})"),
            NodeDef::VectorNew { len, elem } => write!(f, "{name}({len}, {elem})"),
            NodeDef::VectorRand { len, stream } => write!(f, "{name}({len}, stream {stream})"),
            NodeDef::VectorLiteral { elems, .. } => write!(f, "{name}([{}])", join(elems)),
            NodeDef::ParallelLoop(l) => write!(
                f,
                "{name}(size {}, index {}, [{}])",
                l.size,
                l.index,
                join(&l.elems)
            ),
            NodeDef::Record { tag, fields, soa } => write!(
                f,
                "{name}{}({tag}, {{{}}})",
                if *soa { "SoA" } else { "" },
                join(fields.iter().map(|(n, e)| format!("{n}: {e}")))
            ),
            NodeDef::FieldAccess { rec, field } => write!(f, "{name}({rec}, {field})"),
            _ => write!(f, "{name}({})", join(self.operands())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(n: u32, t: SemType) -> Expr {
        Expr::Sym(SymId(n), t)
    }

    #[test]
    fn integer_arithmetic_wraps() {
        assert_eq!(
            fold_binary(BinOp::Plus, &Lit::Int(i64::MAX), &Lit::Int(1)),
            Some(Lit::Int(i64::MIN))
        );
        assert_eq!(
            fold_binary(BinOp::Times, &Lit::Int(i64::MAX), &Lit::Int(2)),
            Some(Lit::Int(-2))
        );
    }

    #[test]
    fn integer_division_by_zero_is_not_folded() {
        assert_eq!(fold_binary(BinOp::Divide, &Lit::Int(5), &Lit::Int(0)), None);
        assert_eq!(
            fold_binary(BinOp::Divide, &Lit::Double(1.0), &Lit::Double(0.0)),
            Some(Lit::Double(f64::INFINITY))
        );
    }

    #[test]
    fn typing_rejects_mixed_operands() {
        let d = NodeDef::Binary(BinOp::Plus, sym(1, SemType::Int), sym(2, SemType::Double));
        assert!(matches!(d.result_type(), Err(StageError::TypeMismatch { .. })));
        let ok = NodeDef::Binary(BinOp::Lt, Expr::double(1.0), sym(2, SemType::Double));
        assert_eq!(ok.result_type().unwrap(), SemType::Bool);
    }

    #[test]
    fn field_access_on_column_record_yields_vector() {
        let rec = sym(
            4,
            SemType::vector(SemType::Record(RecordType {
                tag: "Complex".into(),
                fields: vec![("re".into(), SemType::Double), ("im".into(), SemType::Double)],
            })),
        );
        let d = NodeDef::FieldAccess {
            rec: rec.clone(),
            field: "im".into(),
        };
        assert_eq!(d.result_type().unwrap(), SemType::vector(SemType::Double));
        let missing = NodeDef::FieldAccess {
            rec,
            field: "z".into(),
        };
        assert!(matches!(missing.result_type(), Err(StageError::UnknownField { .. })));
    }

    #[test]
    fn vectors_of_unit_are_rejected() {
        let d = NodeDef::VectorNew {
            len: Expr::int(3),
            elem: SemType::Unit,
        };
        assert!(d.result_type().is_err());
    }
}
