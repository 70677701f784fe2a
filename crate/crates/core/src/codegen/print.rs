use std::fmt::{self, Write};

use super::{Body, ElemCode, Kernel, KernelBody, LoopCode, Program, Rhs, Stmt};
use crate::ir::{Expr, SemType, SymId, UnOp};

pub(crate) fn minic_type(t: &SemType) -> String {
    match t {
        SemType::Int => "Int".into(),
        SemType::Double => "Double".into(),
        SemType::Bool => "Boolean".into(),
        SemType::Str => "String".into(),
        SemType::Unit => "Unit".into(),
        SemType::Vector(e) => format!("Array[{}]", minic_type(e)),
        SemType::Var(e) => minic_type(e),
        SemType::Record(r) => r.tag.clone(),
    }
}

fn syms(s: &[SymId]) -> String {
    s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn args(s: &[Expr]) -> String {
    s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

impl fmt::Display for Rhs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rhs::Copy(e) => write!(f, "{e}"),
            Rhs::Binary(op, a, b) => write!(f, "{a} {} {b}", op.symbol()),
            Rhs::Unary(UnOp::Not, a) => write!(f, "!{a}"),
            Rhs::Unary(UnOp::Abs, a) => write!(f, "abs({a})"),
            Rhs::Unary(UnOp::Sqrt, a) => write!(f, "sqrt({a})"),
            Rhs::Unary(UnOp::ToDouble, a) => write!(f, "{a}.toDouble"),
            Rhs::Unary(UnOp::ToInt, a) => write!(f, "{a}.toInt"),
            Rhs::Length(v) => write!(f, "{v}.length"),
            Rhs::Index(v, i) => write!(f, "{v}({i})"),
            Rhs::NewArray { len, elem } => write!(f, "new Array[{}]({len})", minic_type(elem)),
            Rhs::Rand { len, stream } => write!(f, "rand({len}, {stream})"),
            Rhs::Literal { elems, .. } => write!(
                f,
                "Array({})",
                elems.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(", ")
            ),
            Rhs::Call(name, xs) => write!(f, "{name}({})", args(xs)),
            Rhs::Record { tag, fields } => write!(
                f,
                "{tag}({})",
                fields
                    .iter()
                    .map(|(n, e)| format!("{n} = {e}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
            Rhs::Field(r, name) => write!(f, "{r}.{name}"),
            Rhs::Input(i) => write!(f, "input({i})"),
        }
    }
}

struct Printer {
    out: String,
    depth: usize,
}

impl Printer {
    fn line(&mut self, s: impl AsRef<str>) {
        for _ in 0..self.depth {
            self.out.push_str("  ");
        }
        self.out.push_str(s.as_ref());
        self.out.push('\n');
    }

    fn nested(&mut self, f: impl FnOnce(&mut Printer)) {
        self.depth += 1;
        f(self);
        self.depth -= 1;
    }

    fn stmts(&mut self, ss: &[Stmt]) {
        for s in ss {
            self.stmt(s);
        }
    }

    /// Statements of a body, then its result unless it is unit.
    fn body(&mut self, b: &Body) {
        self.stmts(&b.stmts);
        if b.result.ty() != SemType::Unit {
            self.line(b.result.to_string());
        }
    }

    fn stmt(&mut self, s: &Stmt) {
        match s {
            Stmt::Val { sym, ty, rhs } => self.line(format!("val {sym}: {} = {rhs}", minic_type(ty))),
            Stmt::Var { sym, ty, init } => self.line(format!("var {sym}: {} = {init}", minic_type(ty))),
            Stmt::Assign { var, value } => self.line(format!("{var} = {value}")),
            Stmt::Write { vec, index, value } => self.line(format!("{vec}({index}) = {value}")),
            Stmt::Print(x) => self.line(format!("print({x})")),
            Stmt::If {
                sym,
                ty,
                cond,
                then_b,
                else_b,
            } => {
                if *ty == SemType::Unit {
                    self.line(format!("if ({cond}) {{"));
                } else {
                    self.line(format!("val {sym}: {} = if ({cond}) {{", minic_type(ty)));
                }
                self.nested(|p| p.body(then_b));
                if else_b.stmts.is_empty() && else_b.result.ty() == SemType::Unit {
                    self.line("}");
                } else {
                    self.line("} else {");
                    self.nested(|p| p.body(else_b));
                    self.line("}");
                }
            }
            Stmt::While { cond, body } => {
                self.line("while ({");
                self.nested(|p| p.body(cond));
                self.line("}) {");
                self.nested(|p| p.body(body));
                self.line("}");
            }
            Stmt::Loop(l) => self.parallel(l),
        }
    }

    fn parallel(&mut self, l: &LoopCode) {
        self.line(format!("for {} in 0 until {} {{", l.index, l.size));
        self.nested(|p| p.stmts(&l.body));
        self.line("}");
        for e in &l.elems {
            match e {
                ElemCode::Collect {
                    out,
                    elem,
                    value,
                    cond,
                } => {
                    let guard = cond.as_ref().map(|c| format!(" if {c}")).unwrap_or_default();
                    self.line(format!(
                        "collect {out}: Array[{}] = {value}{guard}",
                        minic_type(elem)
                    ));
                }
                ElemCode::Reduce {
                    out,
                    ty,
                    value,
                    cond,
                    zero,
                    lhs,
                    rhs,
                    combine,
                } => {
                    let guard = cond.as_ref().map(|c| format!(" if {c}")).unwrap_or_default();
                    self.line(format!(
                        "reduce {out}: {} = {value}{guard} zero {zero} combine ({lhs}, {rhs}) {{",
                        minic_type(ty)
                    ));
                    self.nested(|p| p.body(combine));
                    self.line("}");
                }
                ElemCode::Foreach { out } => self.line(format!("foreach {out}")),
            }
        }
    }

    fn kernel(&mut self, k: &Kernel) {
        let serial = if k.serial { " serial" } else { "" };
        self.line(format!(
            "kernel {} {}{serial} in({}) out({}) {{",
            k.name(),
            k.pattern.name(),
            syms(&k.inputs),
            syms(&k.outputs)
        ));
        self.nested(|p| match &k.body {
            KernelBody::Task(ss) => p.stmts(ss),
            KernelBody::Loop(l) => p.parallel(l),
        });
        self.line("}");
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut p = Printer {
            out: String::new(),
            depth: 0,
        };
        p.line(format!("program {}", self.name));
        for k in &self.kernels {
            p.line("");
            p.kernel(k);
        }
        p.line("");
        p.line(format!("result {}", self.result));
        f.write_str(&p.out)
    }
}

impl Program {
    /// The MiniC source text.
    pub fn to_minic(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "{self}");
        s
    }
}
