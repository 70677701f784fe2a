use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::ir::{fmt_double, Lit, SemType};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ElemKind {
    Int,
    Double,
    Bool,
}

impl ElemKind {
    pub fn of(t: &SemType) -> Option<ElemKind> {
        match t {
            SemType::Int => Some(ElemKind::Int),
            SemType::Double => Some(ElemKind::Double),
            SemType::Bool => Some(ElemKind::Bool),
            _ => None,
        }
    }
}

/// A fixed-length vector of scalars. Clones share storage; element
/// stores are atomic so disjoint indexes may be written from several
/// threads.
#[derive(Clone)]
pub struct VecBuf {
    kind: ElemKind,
    data: Arc<[AtomicU64]>,
}

impl VecBuf {
    pub fn zeroed(kind: ElemKind, len: usize) -> Self {
        let zero = match kind {
            ElemKind::Double => 0f64.to_bits(),
            _ => 0,
        };
        VecBuf {
            kind,
            data: (0..len).map(|_| AtomicU64::new(zero)).collect(),
        }
    }

    pub fn from_bits(kind: ElemKind, bits: impl IntoIterator<Item = u64>) -> Self {
        VecBuf {
            kind,
            data: bits.into_iter().map(AtomicU64::new).collect(),
        }
    }

    pub fn from_values(kind: ElemKind, xs: &[Value]) -> Self {
        Self::from_bits(kind, xs.iter().map(scalar_bits))
    }

    pub fn doubles(xs: &[f64]) -> Self {
        Self::from_bits(ElemKind::Double, xs.iter().map(|x| x.to_bits()))
    }

    pub fn ints(xs: &[i64]) -> Self {
        Self::from_bits(ElemKind::Int, xs.iter().map(|x| *x as u64))
    }

    pub fn kind(&self) -> ElemKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Identity of the underlying allocation.
    pub fn alloc_id(&self) -> usize {
        self.data.as_ptr() as usize
    }

    pub fn get(&self, i: usize) -> Value {
        let b = self.data[i].load(Ordering::Relaxed);
        match self.kind {
            ElemKind::Int => Value::Int(b as i64),
            ElemKind::Double => Value::Double(f64::from_bits(b)),
            ElemKind::Bool => Value::Bool(b != 0),
        }
    }

    pub fn set(&self, i: usize, v: &Value) {
        self.data[i].store(scalar_bits(v), Ordering::Relaxed);
    }

    pub fn get_f64(&self, i: usize) -> f64 {
        f64::from_bits(self.data[i].load(Ordering::Relaxed))
    }

    pub fn to_values(&self) -> Vec<Value> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }
}

fn scalar_bits(v: &Value) -> u64 {
    match v {
        Value::Int(x) => *x as u64,
        Value::Double(x) => x.to_bits(),
        Value::Bool(b) => *b as u64,
        other => panic!("vector element must be a scalar, found {other}"),
    }
}

impl fmt::Debug for VecBuf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{:?}", self.kind, self.to_values())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecordValue {
    pub tag: String,
    pub fields: Vec<(String, Value)>,
}

/// A run-time value. Equality compares vector contents, and doubles by
/// bit pattern.
#[derive(Clone, Debug)]
pub enum Value {
    Int(i64),
    Double(f64),
    Bool(bool),
    Str(Arc<str>),
    Unit,
    Vector(VecBuf),
    Record(Arc<RecordValue>),
}

impl Value {
    pub fn from_lit(l: &Lit) -> Value {
        match l {
            Lit::Int(x) => Value::Int(*x),
            Lit::Double(x) => Value::Double(*x),
            Lit::Bool(x) => Value::Bool(*x),
            Lit::Str(s) => Value::Str(Arc::from(s.as_str())),
            Lit::Unit => Value::Unit,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_double(&self) -> Option<f64> {
        match self {
            Value::Double(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_vector(&self) -> Option<&VecBuf> {
        match self {
            Value::Vector(v) => Some(v),
            _ => None,
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Double(a), Value::Double(b)) => a.to_bits() == b.to_bits(),
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Str(a), Value::Str(b)) => a == b,
            (Value::Unit, Value::Unit) => true,
            (Value::Vector(a), Value::Vector(b)) => {
                a.kind == b.kind && a.len() == b.len() && a.to_values() == b.to_values()
            }
            (Value::Record(a), Value::Record(b)) => a == b,
            _ => false,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(x) => write!(f, "{x}"),
            Value::Double(x) => write!(f, "{}", fmt_double(*x)),
            Value::Bool(x) => write!(f, "{x}"),
            Value::Str(s) => write!(f, "{s}"),
            Value::Unit => write!(f, "()"),
            Value::Vector(v) => {
                write!(f, "[")?;
                for i in 0..v.len() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", v.get(i))?;
                }
                write!(f, "]")
            }
            Value::Record(r) => {
                write!(f, "{}(", r.tag)?;
                for (i, (n, v)) in r.fields.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{n} = {v}")?;
                }
                write!(f, ")")
            }
        }
    }
}
