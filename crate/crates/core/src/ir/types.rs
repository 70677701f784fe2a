use std::fmt;
use std::hash::{Hash, Hasher};

/// Dense symbol number assigned in staging order.
///
/// `SymId(0)` is reserved for the console: printing is modelled as a write
/// to it, which serializes every print against every other print.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymId(pub u32);

impl SymId {
    pub const CONSOLE: SymId = SymId(0);

    pub fn is_console(self) -> bool {
        self == Self::CONSOLE
    }
}

impl fmt::Display for SymId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_console() {
            write!(f, "console")
        } else {
            write!(f, "x{}", self.0)
        }
    }
}

/// Identity of a reified scope. Blocks compare by this id only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockId(pub u32);

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RecordType {
    pub tag: String,
    pub fields: Vec<(String, SemType)>,
}

impl RecordType {
    pub fn field(&self, name: &str) -> Option<&SemType> {
        self.fields.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }
}

/// Runtime reification of the static type of a staged value.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SemType {
    Int,
    Double,
    Bool,
    Str,
    Unit,
    Vector(Box<SemType>),
    Record(RecordType),
    Var(Box<SemType>),
}

impl SemType {
    pub fn vector(elem: SemType) -> SemType {
        SemType::Vector(Box::new(elem))
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, SemType::Int | SemType::Double)
    }

    pub fn is_scalar(&self) -> bool {
        matches!(
            self,
            SemType::Int | SemType::Double | SemType::Bool | SemType::Str | SemType::Unit
        )
    }

    /// Types whose values are references and can therefore alias.
    pub fn is_reference(&self) -> bool {
        !self.is_scalar()
    }

    pub fn elem(&self) -> Option<&SemType> {
        match self {
            SemType::Vector(e) => Some(e),
            _ => None,
        }
    }

    pub fn contains_record(&self) -> bool {
        match self {
            SemType::Record(_) => true,
            SemType::Vector(e) | SemType::Var(e) => e.contains_record(),
            _ => false,
        }
    }
}

impl fmt::Display for SemType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemType::Int => write!(f, "Int"),
            SemType::Double => write!(f, "Double"),
            SemType::Bool => write!(f, "Bool"),
            SemType::Str => write!(f, "String"),
            SemType::Unit => write!(f, "Unit"),
            SemType::Vector(e) => write!(f, "Vector[{e}]"),
            SemType::Var(e) => write!(f, "Var[{e}]"),
            SemType::Record(r) => {
                write!(f, "{}{{", r.tag)?;
                for (i, (n, t)) in r.fields.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{n}: {t}")?;
                }
                write!(f, "}}")
            }
        }
    }
}

/// Host literal carried by a constant. Doubles hash and compare by bit
/// pattern so that CSE keys are total.
#[derive(Clone, Debug)]
pub enum Lit {
    Int(i64),
    Double(f64),
    Bool(bool),
    Str(String),
    Unit,
}

impl Lit {
    pub fn ty(&self) -> SemType {
        match self {
            Lit::Int(_) => SemType::Int,
            Lit::Double(_) => SemType::Double,
            Lit::Bool(_) => SemType::Bool,
            Lit::Str(_) => SemType::Str,
            Lit::Unit => SemType::Unit,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Lit::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_double(&self) -> Option<f64> {
        match self {
            Lit::Double(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Lit::Bool(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Lit::Int(0))
    }

    pub fn is_one(&self) -> bool {
        match self {
            Lit::Int(v) => *v == 1,
            Lit::Double(v) => *v == 1.0,
            _ => false,
        }
    }
}

impl PartialEq for Lit {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Lit::Int(a), Lit::Int(b)) => a == b,
            (Lit::Double(a), Lit::Double(b)) => a.to_bits() == b.to_bits(),
            (Lit::Bool(a), Lit::Bool(b)) => a == b,
            (Lit::Str(a), Lit::Str(b)) => a == b,
            (Lit::Unit, Lit::Unit) => true,
            _ => false,
        }
    }
}

impl Eq for Lit {}

impl Hash for Lit {
    fn hash<H: Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        match self {
            Lit::Int(v) => v.hash(state),
            Lit::Double(v) => v.to_bits().hash(state),
            Lit::Bool(v) => v.hash(state),
            Lit::Str(v) => v.hash(state),
            Lit::Unit => {}
        }
    }
}

/// Formats a double so that it reads back to the same bits.
pub fn fmt_double(v: f64) -> String {
    format!("{v:?}")
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lit::Int(v) => write!(f, "{v}"),
            Lit::Double(v) => write!(f, "{}", fmt_double(*v)),
            Lit::Bool(v) => write!(f, "{v}"),
            Lit::Str(s) => write!(f, "{s:?}"),
            Lit::Unit => write!(f, "()"),
        }
    }
}

impl From<i64> for Lit {
    fn from(v: i64) -> Self {
        Lit::Int(v)
    }
}

impl From<f64> for Lit {
    fn from(v: f64) -> Self {
        Lit::Double(v)
    }
}

impl From<bool> for Lit {
    fn from(v: bool) -> Self {
        Lit::Bool(v)
    }
}

impl From<&str> for Lit {
    fn from(v: &str) -> Self {
        Lit::Str(v.to_string())
    }
}

/// Atomic staged value: a constant or a numbered symbol.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(Lit),
    Sym(SymId, SemType),
}

impl Expr {
    pub fn ty(&self) -> SemType {
        match self {
            Expr::Const(l) => l.ty(),
            Expr::Sym(_, t) => t.clone(),
        }
    }

    pub fn sym(&self) -> Option<SymId> {
        match self {
            Expr::Sym(s, _) => Some(*s),
            Expr::Const(_) => None,
        }
    }

    pub fn as_const(&self) -> Option<&Lit> {
        match self {
            Expr::Const(l) => Some(l),
            Expr::Sym(..) => None,
        }
    }

    pub fn unit() -> Expr {
        Expr::Const(Lit::Unit)
    }

    pub fn int(v: i64) -> Expr {
        Expr::Const(Lit::Int(v))
    }

    pub fn double(v: f64) -> Expr {
        Expr::Const(Lit::Double(v))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(l) => write!(f, "{l}"),
            Expr::Sym(s, _) => write!(f, "{s}"),
        }
    }
}
