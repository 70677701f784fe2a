use std::collections::HashMap;
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Arc;

use rayon::prelude::*;

use super::rng::Lcg;
use super::value::{ElemKind, RecordValue, VecBuf, Value};
use super::{RunConfig, RuntimeError};
use crate::codegen::{Body, ElemCode, LoopCode, Rhs, Stmt};
use crate::ir::{BinOp, Expr, SemType, SymId, UnOp};

/// Values of symbols, indexed by id. Unset symbols read as unit.
#[derive(Clone, Default)]
pub(crate) struct Env {
    slots: Vec<Value>,
}

impl Env {
    pub(crate) fn get(&self, s: SymId) -> &Value {
        self.slots.get(s.0 as usize).unwrap_or(&Value::Unit)
    }

    pub(crate) fn set(&mut self, s: SymId, v: Value) {
        let i = s.0 as usize;
        if i >= self.slots.len() {
            self.slots.resize(i + 1, Value::Unit);
        }
        self.slots[i] = v;
    }

    pub(crate) fn get_expr(&self, e: &Expr) -> Value {
        match e {
            Expr::Const(l) => Value::from_lit(l),
            Expr::Sym(s, _) => self.get(*s).clone(),
        }
    }
}

/// Index ranges of the chunks a loop of `n` iterations is split into.
pub fn chunk_ranges(n: usize, chunks: usize) -> Vec<std::ops::Range<usize>> {
    let c = chunks.max(1).min(n);
    (0..c).map(|k| k * n / c..(k + 1) * n / c).collect()
}

/// Debug-mode record of vector writes inside one top-level loop: which
/// iteration wrote each (allocation, index) pair.
#[derive(Default)]
struct WriteLog {
    iter: usize,
    writes: HashMap<(usize, usize), usize>,
    conflict: Option<(usize, usize, usize)>,
}

impl WriteLog {
    fn record(&mut self, key: (usize, usize), iter: usize) {
        match self.writes.get(&key) {
            Some(&prev) if prev != iter => {
                if self.conflict.is_none() {
                    self.conflict = Some((key.1, prev.min(iter), prev.max(iter)));
                }
            }
            Some(_) => {}
            None => {
                self.writes.insert(key, iter);
            }
        }
    }
}

#[derive(Default)]
struct ChunkOut {
    gathered: Vec<Vec<Value>>,
    accs: Vec<Option<Value>>,
    output: String,
    log: Option<WriteLog>,
}

pub(crate) struct Eval<'a> {
    pub(crate) cfg: &'a RunConfig,
    pub(crate) chunks: usize,
    /// Run top-level loop chunks on the current thread pool.
    pub(crate) parallel: bool,
    pub(crate) output: String,
    log: Option<WriteLog>,
}

/// Where a trap happened, rendered only when an error is built.
#[derive(Clone, Copy)]
pub(crate) enum Site<'s> {
    Sym(SymId),
    Write(&'s Expr, &'s Expr, &'s Expr),
    Text(&'static str),
}

impl std::fmt::Display for Site<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Site::Sym(s) => write!(f, "{s}"),
            Site::Write(v, i, x) => write!(f, "{v}({i}) = {x}"),
            Site::Text(t) => f.write_str(t),
        }
    }
}

fn type_error(at: Site, what: impl Into<String>) -> RuntimeError {
    RuntimeError::Type {
        at: at.to_string(),
        detail: what.into(),
    }
}

fn length(at: Site, v: &Value) -> Result<usize, RuntimeError> {
    match v {
        Value::Int(n) if *n >= 0 => Ok(*n as usize),
        Value::Int(n) => Err(RuntimeError::NegativeLength {
            at: at.to_string(),
            len: *n,
        }),
        other => Err(type_error(at, format!("length {other} is not an Int"))),
    }
}

fn elem_kind(at: Site, t: &SemType) -> Result<ElemKind, RuntimeError> {
    ElemKind::of(t).ok_or_else(|| type_error(at, format!("unsupported vector element type {t:?}")))
}

pub(crate) fn binary(at: Site, op: BinOp, a: &Value, b: &Value) -> Result<Value, RuntimeError> {
    use BinOp::*;
    use Value::*;
    Ok(match (op, a, b) {
        (Plus, Int(x), Int(y)) => Int(x.wrapping_add(*y)),
        (Minus, Int(x), Int(y)) => Int(x.wrapping_sub(*y)),
        (Times, Int(x), Int(y)) => Int(x.wrapping_mul(*y)),
        (Divide, Int(_), Int(0)) => {
            return Err(RuntimeError::DivByZero { at: at.to_string() })
        }
        (Divide, Int(x), Int(y)) => Int(x.wrapping_div(*y)),
        (Lt, Int(x), Int(y)) => Bool(x < y),
        (Plus, Double(x), Double(y)) => Double(x + y),
        (Minus, Double(x), Double(y)) => Double(x - y),
        (Times, Double(x), Double(y)) => Double(x * y),
        (Divide, Double(x), Double(y)) => Double(x / y),
        (Lt, Double(x), Double(y)) => Bool(x < y),
        (Eq, Int(x), Int(y)) => Bool(x == y),
        (Eq, Double(x), Double(y)) => Bool(x == y),
        (Eq, Bool(x), Bool(y)) => Bool(x == y),
        (Eq, Str(x), Str(y)) => Bool(x == y),
        (And, Bool(x), Bool(y)) => Bool(*x && *y),
        (Or, Bool(x), Bool(y)) => Bool(*x || *y),
        _ => return Err(type_error(at, format!("{a} {} {b}", op.symbol()))),
    })
}

pub(crate) fn unary(at: Site, op: UnOp, a: &Value) -> Result<Value, RuntimeError> {
    Ok(match (op, a) {
        (UnOp::Not, Value::Bool(x)) => Value::Bool(!x),
        (UnOp::Abs, Value::Int(x)) => Value::Int(x.wrapping_abs()),
        (UnOp::Abs, Value::Double(x)) => Value::Double(x.abs()),
        (UnOp::Sqrt, Value::Double(x)) => Value::Double(x.sqrt()),
        (UnOp::ToDouble, Value::Int(x)) => Value::Double(*x as f64),
        (UnOp::ToInt, Value::Double(x)) => Value::Int(*x as i64),
        _ => return Err(type_error(at, format!("{op:?} of {a}"))),
    })
}

fn norm(v: &VecBuf) -> f64 {
    let mut s = 0.0;
    for i in 0..v.len() {
        let x = match v.get(i) {
            Value::Double(x) => x,
            Value::Int(x) => x as f64,
            _ => 0.0,
        };
        s += x * x;
    }
    s.sqrt()
}

fn builtin(at: Site, name: &str, args: &[Value]) -> Result<Value, RuntimeError> {
    match (name, args) {
        ("norm", [Value::Vector(v)]) => Ok(Value::Double(norm(v))),
        ("unit", [Value::Vector(v)]) => {
            let n = norm(v);
            let xs: Vec<f64> = (0..v.len()).map(|i| v.get_f64(i) / n).collect();
            Ok(Value::Vector(VecBuf::doubles(&xs)))
        }
        _ => Err(type_error(at, format!("no runtime function {name}/{}", args.len()))),
    }
}

impl<'a> Eval<'a> {
    pub(crate) fn new(cfg: &'a RunConfig, chunks: usize, parallel: bool) -> Self {
        Eval {
            cfg,
            chunks,
            parallel,
            output: String::new(),
            log: None,
        }
    }

    fn child(&self, track: bool) -> Eval<'a> {
        Eval {
            cfg: self.cfg,
            chunks: self.chunks,
            parallel: false,
            output: String::new(),
            log: track.then(WriteLog::default),
        }
    }

    fn expr(&self, env: &Env, e: &Expr) -> Value {
        match e {
            Expr::Const(l) => Value::from_lit(l),
            Expr::Sym(s, _) => env.get(*s).clone(),
        }
    }

    fn vector<'e>(&self, env: &'e Env, e: &Expr, at: Site) -> Result<&'e VecBuf, RuntimeError> {
        match e {
            Expr::Sym(s, _) => env
                .get(*s)
                .as_vector()
                .ok_or_else(|| type_error(at, format!("{e} is not a vector"))),
            Expr::Const(_) => Err(type_error(at, format!("{e} is not a vector"))),
        }
    }

    fn index(&self, env: &Env, e: &Expr, len: usize, at: Site) -> Result<usize, RuntimeError> {
        match self.expr(env, e) {
            Value::Int(i) if i >= 0 && (i as usize) < len => Ok(i as usize),
            Value::Int(i) => Err(RuntimeError::IndexOutOfBounds {
                at: at.to_string(),
                index: i,
                len,
            }),
            other => Err(type_error(at, format!("index {other} is not an Int"))),
        }
    }

    fn rhs(&mut self, env: &mut Env, sym: SymId, rhs: &Rhs) -> Result<Value, RuntimeError> {
        let at = Site::Sym(sym);
        Ok(match rhs {
            Rhs::Copy(e) => self.expr(env, e),
            Rhs::Binary(op, a, b) => binary(at, *op, &self.expr(env, a), &self.expr(env, b))?,
            Rhs::Unary(op, a) => unary(at, *op, &self.expr(env, a))?,
            Rhs::Length(v) => Value::Int(self.vector(env, v, at)?.len() as i64),
            Rhs::Index(v, i) => {
                let buf = self.vector(env, v, at)?;
                buf.get(self.index(env, i, buf.len(), at)?)
            }
            Rhs::NewArray { len, elem } => {
                let n = length(at, &self.expr(env, len))?;
                Value::Vector(VecBuf::zeroed(elem_kind(at, elem)?, n))
            }
            Rhs::Rand { len, stream } => {
                let n = length(at, &self.expr(env, len))?;
                let mut g = Lcg::for_stream(self.cfg.seed, *stream);
                let xs: Vec<f64> = (0..n).map(|_| g.next_f64()).collect();
                Value::Vector(VecBuf::doubles(&xs))
            }
            Rhs::Literal { elems, elem } => {
                let xs: Vec<Value> = elems.iter().map(Value::from_lit).collect();
                Value::Vector(VecBuf::from_values(elem_kind(at, elem)?, &xs))
            }
            Rhs::Call(name, args) => {
                let xs: Vec<Value> = args.iter().map(|a| self.expr(env, a)).collect();
                builtin(at, name, &xs)?
            }
            Rhs::Record { tag, fields } => Value::Record(Arc::new(RecordValue {
                tag: tag.clone(),
                fields: fields
                    .iter()
                    .map(|(n, e)| (n.clone(), self.expr(env, e)))
                    .collect(),
            })),
            Rhs::Field(r, name) => match self.expr(env, r) {
                Value::Record(rec) => rec
                    .fields
                    .iter()
                    .find(|(n, _)| n == name)
                    .map(|(_, v)| v.clone())
                    .ok_or_else(|| type_error(at, format!("no field {name} in {}", rec.tag)))?,
                other => return Err(type_error(at, format!("{other} is not a record"))),
            },
            Rhs::Input(i) => self
                .cfg
                .inputs
                .get(*i as usize)
                .cloned()
                .ok_or(RuntimeError::MissingInput(*i))?,
        })
    }

    pub(crate) fn stmts(&mut self, env: &mut Env, ss: &[Stmt]) -> Result<(), RuntimeError> {
        for s in ss {
            self.stmt(env, s)?;
        }
        Ok(())
    }

    fn body(&mut self, env: &mut Env, b: &Body) -> Result<Value, RuntimeError> {
        self.stmts(env, &b.stmts)?;
        Ok(self.expr(env, &b.result))
    }

    fn stmt(&mut self, env: &mut Env, s: &Stmt) -> Result<(), RuntimeError> {
        match s {
            Stmt::Val { sym, rhs, .. } => {
                let v = self.rhs(env, *sym, rhs)?;
                env.set(*sym, v);
            }
            Stmt::Var { sym, init, .. } => {
                let v = self.expr(env, init);
                env.set(*sym, v);
            }
            Stmt::Assign { var, value } => {
                let v = self.expr(env, value);
                env.set(*var, v);
            }
            Stmt::Write { vec, index, value } => {
                let at = Site::Write(vec, index, value);
                let buf = self.vector(env, vec, at)?;
                let i = self.index(env, index, buf.len(), at)?;
                let v = self.expr(env, value);
                if ElemKind::of(&value_type(&v)) != Some(buf.kind()) {
                    return Err(type_error(at, format!("cannot store {v} into {:?} vector", buf.kind())));
                }
                if let Some(log) = &mut self.log {
                    let it = log.iter;
                    log.record((buf.alloc_id(), i), it);
                }
                buf.set(i, &v);
            }
            Stmt::Print(x) => {
                let v = self.expr(env, x);
                self.output.push_str(&v.to_string());
                self.output.push('\n');
            }
            Stmt::If {
                sym,
                cond,
                then_b,
                else_b,
                ..
            } => {
                let v = match self.expr(env, cond) {
                    Value::Bool(true) => self.body(env, then_b)?,
                    Value::Bool(false) => self.body(env, else_b)?,
                    other => return Err(type_error(Site::Sym(*sym), format!("condition {other}"))),
                };
                env.set(*sym, v);
            }
            Stmt::While { cond, body } => loop {
                match self.body(env, cond)? {
                    Value::Bool(true) => {
                        self.body(env, body)?;
                    }
                    Value::Bool(false) => break,
                    other => return Err(type_error(Site::Text("while"), format!("condition {other}"))),
                }
            },
            Stmt::Loop(l) => self.run_loop(env, l, false)?,
        }
        Ok(())
    }

    fn combine(
        &mut self,
        env: &mut Env,
        e: &ElemCode,
        a: Value,
        b: Value,
    ) -> Result<Value, RuntimeError> {
        let ElemCode::Reduce {
            lhs, rhs, combine, ..
        } = e
        else {
            unreachable!("combine on a non-reduce element")
        };
        env.set(*lhs, a);
        env.set(*rhs, b);
        self.body(env, combine)
    }

    fn run_chunk(
        &mut self,
        env: &mut Env,
        l: &LoopCode,
        range: std::ops::Range<usize>,
        prealloc: &[Option<VecBuf>],
        visits: Option<&[AtomicU32]>,
        track: bool,
    ) -> Result<ChunkOut, RuntimeError> {
        let mut gathered = vec![Vec::new(); l.elems.len()];
        let mut accs: Vec<Option<Value>> = vec![None; l.elems.len()];
        for i in range {
            env.set(l.index, Value::Int(i as i64));
            if track {
                if let Some(log) = &mut self.log {
                    log.iter = i;
                }
            }
            if let Some(v) = visits {
                v[i].fetch_add(1, Ordering::Relaxed);
            }
            self.stmts(env, &l.body)?;
            for (k, e) in l.elems.iter().enumerate() {
                match e {
                    ElemCode::Collect { value, cond, .. } => {
                        if self.guard(env, cond)? {
                            let v = self.expr(env, value);
                            match &prealloc[k] {
                                Some(buf) => buf.set(i, &v),
                                None => gathered[k].push(v),
                            }
                        }
                    }
                    ElemCode::Reduce { value, cond, .. } => {
                        if self.guard(env, cond)? {
                            let v = self.expr(env, value);
                            accs[k] = Some(match accs[k].take() {
                                None => v,
                                Some(a) => self.combine(env, e, a, v)?,
                            });
                        }
                    }
                    ElemCode::Foreach { .. } => {}
                }
            }
        }
        Ok(ChunkOut {
            gathered,
            accs,
            output: std::mem::take(&mut self.output),
            log: if track { self.log.take() } else { None },
        })
    }

    fn guard(&self, env: &Env, cond: &Option<Expr>) -> Result<bool, RuntimeError> {
        match cond {
            None => Ok(true),
            Some(c) => match self.expr(env, c) {
                Value::Bool(b) => Ok(b),
                other => Err(type_error(Site::Text("loop element"), format!("condition {other}"))),
            },
        }
    }

    /// Runs a parallel loop: chunks of contiguous indexes, each executed
    /// in order, with reduce partials combined in ascending chunk order.
    /// `top` marks a kernel-level loop, the unit the debug contracts
    /// check.
    pub(crate) fn run_loop(&mut self, env: &mut Env, l: &LoopCode, top: bool) -> Result<(), RuntimeError> {
        let at = Site::Sym(l.index);
        let n = length(at, &self.expr(env, &l.size))?;
        let mut prealloc = Vec::with_capacity(l.elems.len());
        for e in &l.elems {
            prealloc.push(match e {
                ElemCode::Collect {
                    elem, cond: None, ..
                } => Some(VecBuf::zeroed(elem_kind(Site::Sym(e.out()), elem)?, n)),
                _ => None,
            });
        }
        let debug = top && self.cfg.debug_contracts;
        let visits: Option<Vec<AtomicU32>> = debug.then(|| (0..n).map(|_| AtomicU32::new(0)).collect());
        let ranges = chunk_ranges(n, self.chunks);
        let parts: Vec<ChunkOut> = if self.parallel && top {
            let results: Vec<Result<ChunkOut, RuntimeError>> = ranges
                .into_par_iter()
                .map(|r| {
                    let mut cx = self.child(debug);
                    let mut local = env.clone();
                    cx.run_chunk(&mut local, l, r, &prealloc, visits.as_deref(), debug)
                })
                .collect();
            results.into_iter().collect::<Result<_, _>>()?
        } else {
            let base = std::mem::take(&mut self.output);
            let mut parts = Vec::with_capacity(ranges.len());
            for r in ranges {
                if debug {
                    self.log = Some(WriteLog::default());
                }
                parts.push(self.run_chunk(env, l, r, &prealloc, visits.as_deref(), debug)?);
            }
            self.output = base;
            parts
        };
        if let Some(v) = &visits {
            for (i, c) in v.iter().enumerate() {
                let c = c.load(Ordering::Relaxed);
                if c != 1 {
                    return Err(RuntimeError::VisitCount { at: at.to_string(), index: i, count: c });
                }
            }
        }
        if debug {
            let mut all = WriteLog::default();
            for p in &parts {
                if let Some(log) = &p.log {
                    if let Some((index, a, b)) = log.conflict {
                        return Err(RuntimeError::ContractViolation { at: at.to_string(), index, first: a, second: b });
                    }
                    for (k, it) in &log.writes {
                        all.record(*k, *it);
                    }
                }
            }
            if let Some((index, a, b)) = all.conflict {
                return Err(RuntimeError::ContractViolation { at: at.to_string(), index, first: a, second: b });
            }
        }
        for p in &parts {
            self.output.push_str(&p.output);
        }
        for (k, e) in l.elems.iter().enumerate() {
            let v = match e {
                ElemCode::Collect { elem, .. } => match prealloc[k].take() {
                    Some(buf) => Value::Vector(buf),
                    None => {
                        let xs: Vec<Value> = parts.iter().flat_map(|p| p.gathered[k].iter().cloned()).collect();
                        Value::Vector(VecBuf::from_values(elem_kind(at, elem)?, &xs))
                    }
                },
                ElemCode::Reduce { zero, .. } => {
                    let mut total = self.expr(env, zero);
                    for p in &parts {
                        if let Some(a) = &p.accs[k] {
                            total = self.combine(env, e, total, a.clone())?;
                        }
                    }
                    total
                }
                ElemCode::Foreach { .. } => Value::Unit,
            };
            env.set(e.out(), v);
        }
        Ok(())
    }
}

fn value_type(v: &Value) -> SemType {
    match v {
        Value::Int(_) => SemType::Int,
        Value::Double(_) => SemType::Double,
        Value::Bool(_) => SemType::Bool,
        _ => SemType::Unit,
    }
}
