use super::{Staged, Stager};
use crate::ir::{fold_binary, BinOp, Expr, Lit, NodeDef, SemType, StageError, UnOp};

impl Stager {
    pub fn add(&mut self, a: &Staged, b: &Staged) -> Result<Staged, StageError> {
        self.numeric(BinOp::Plus, a, b)
    }

    pub fn sub(&mut self, a: &Staged, b: &Staged) -> Result<Staged, StageError> {
        self.numeric(BinOp::Minus, a, b)
    }

    pub fn mul(&mut self, a: &Staged, b: &Staged) -> Result<Staged, StageError> {
        self.numeric(BinOp::Times, a, b)
    }

    pub fn div(&mut self, a: &Staged, b: &Staged) -> Result<Staged, StageError> {
        self.numeric(BinOp::Divide, a, b)
    }

    /// Exact negation for both Int (wrapping) and Double (sign flip).
    pub fn neg(&mut self, a: &Staged) -> Result<Staged, StageError> {
        let minus_one = match a.ty() {
            SemType::Double => self.lift(-1.0),
            _ => self.lift(-1i64),
        };
        self.mul(&minus_one, a)
    }

    pub fn square(&mut self, a: &Staged) -> Result<Staged, StageError> {
        self.mul(a, a)
    }

    fn reassociates(&self, ty: &SemType) -> bool {
        *ty == SemType::Int || self.options().fast_math
    }

    /// Arithmetic smart constructor: folds constants, moves a lone constant
    /// to the left of commutative operators, re-associates constant
    /// clusters, then consults hooks before creating the node.
    fn numeric(&mut self, op: BinOp, a: &Staged, b: &Staged) -> Result<Staged, StageError> {
        let def = NodeDef::Binary(op, a.expr().clone(), b.expr().clone());
        let ty = def.result_type()?;
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            if let Some(l) = fold_binary(op, x, y) {
                return Ok(self.lift(l));
            }
        }
        if let Some(r) = self.identity(op, a, b, &ty) {
            return Ok(r);
        }
        if op.is_commutative() && a.as_const().is_none() && b.as_const().is_some() {
            return self.numeric(op, b, a);
        }
        if matches!(op, BinOp::Plus | BinOp::Times) && self.reassociates(&ty) {
            if let Some(c1) = a.as_const() {
                if let Some(NodeDef::Binary(inner, Expr::Const(c2), d)) = self.def_of(b) {
                    if *inner == op {
                        let d = Staged::new(d.clone());
                        if let Some(c) = fold_binary(op, c1, c2) {
                            let c = self.lift(c);
                            return self.numeric(op, &c, &d);
                        }
                    }
                }
            }
        }
        self.build(def)
    }

    /// Algebraic identities that hold exactly for the operand type.
    fn identity(&self, op: BinOp, a: &Staged, b: &Staged, ty: &SemType) -> Option<Staged> {
        let is = |x: &Staged, f: fn(&Lit) -> bool| x.as_const().map(f).unwrap_or(false);
        let int = *ty == SemType::Int;
        match op {
            BinOp::Plus if int && is(a, Lit::is_zero) => Some(b.clone()),
            BinOp::Plus | BinOp::Minus if int && is(b, Lit::is_zero) => Some(a.clone()),
            BinOp::Times if is(a, Lit::is_one) => Some(b.clone()),
            BinOp::Times | BinOp::Divide if is(b, Lit::is_one) => Some(a.clone()),
            BinOp::Times if int && (is(a, Lit::is_zero) || is(b, Lit::is_zero)) => {
                Some(self.lift(0i64))
            }
            _ => None,
        }
    }

    fn binary(&mut self, op: BinOp, a: &Staged, b: &Staged) -> Result<Staged, StageError> {
        self.build(NodeDef::Binary(op, a.expr().clone(), b.expr().clone()))
    }

    fn unary(&mut self, op: UnOp, a: &Staged) -> Result<Staged, StageError> {
        self.build(NodeDef::Unary(op, a.expr().clone()))
    }

    pub fn lt(&mut self, a: &Staged, b: &Staged) -> Result<Staged, StageError> {
        self.binary(BinOp::Lt, a, b)
    }

    pub fn gt(&mut self, a: &Staged, b: &Staged) -> Result<Staged, StageError> {
        self.binary(BinOp::Lt, b, a)
    }

    pub fn le(&mut self, a: &Staged, b: &Staged) -> Result<Staged, StageError> {
        let gt = self.gt(a, b)?;
        self.not(&gt)
    }

    pub fn eq(&mut self, a: &Staged, b: &Staged) -> Result<Staged, StageError> {
        self.binary(BinOp::Eq, a, b)
    }

    pub fn and(&mut self, a: &Staged, b: &Staged) -> Result<Staged, StageError> {
        self.binary(BinOp::And, a, b)
    }

    pub fn or(&mut self, a: &Staged, b: &Staged) -> Result<Staged, StageError> {
        self.binary(BinOp::Or, a, b)
    }

    pub fn not(&mut self, a: &Staged) -> Result<Staged, StageError> {
        self.unary(UnOp::Not, a)
    }

    pub fn abs(&mut self, a: &Staged) -> Result<Staged, StageError> {
        self.unary(UnOp::Abs, a)
    }

    pub fn sqrt(&mut self, a: &Staged) -> Result<Staged, StageError> {
        self.unary(UnOp::Sqrt, a)
    }

    pub fn to_double(&mut self, a: &Staged) -> Result<Staged, StageError> {
        self.unary(UnOp::ToDouble, a)
    }

    /// Truncates toward zero; out-of-range values saturate.
    pub fn to_int(&mut self, a: &Staged) -> Result<Staged, StageError> {
        self.unary(UnOp::ToInt, a)
    }
}
