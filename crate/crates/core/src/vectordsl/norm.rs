use std::rc::Rc;

use super::NormTier;
use crate::ir::{BinOp, Expr, Lit, NodeDef, StageError};
use crate::staging::{RewriteRegistry, Staged, Stager};

impl Stager {
    /// Euclidean norm, provided according to the configured tier.
    pub fn norm(&mut self, v: &Staged) -> Result<Staged, StageError> {
        match self.options().norm_tier {
            NormTier::Library => self.norm_library(v),
            NormTier::Match | NormTier::Node => self.build(NodeDef::VectorNorm(v.expr().clone())),
        }
    }

    pub fn norm_library(&mut self, v: &Staged) -> Result<Staged, StageError> {
        let sq = self.map(v, |s, x| s.square(x))?;
        let total = self.sum(&sq)?;
        self.sqrt(&total)
    }

    pub fn dist(&mut self, a: &Staged, b: &Staged) -> Result<Staged, StageError> {
        let d = self.vminus(a, b)?;
        self.norm(&d)
    }

    pub fn zero_vector(&mut self, n: &Staged) -> Result<Staged, StageError> {
        self.build(NodeDef::ZeroVector(n.expr().clone()))
    }

    /// `k * v`, element-wise.
    pub fn scale(&mut self, k: &Staged, v: &Staged) -> Result<Staged, StageError> {
        self.build(NodeDef::ScalarTimesVector(k.expr().clone(), v.expr().clone()))
    }

    pub fn vminus(&mut self, a: &Staged, b: &Staged) -> Result<Staged, StageError> {
        self.build(NodeDef::VectorMinus(a.expr().clone(), b.expr().clone()))
    }

    /// The domain operation a vector was lowered from, if any.
    pub fn producer(&self, v: &Staged) -> Option<NodeDef> {
        match self.def_of(v)? {
            NodeDef::ParallelLoop(l) => l.origin.as_deref().cloned(),
            d @ (NodeDef::UnitVector(_) | NodeDef::VectorNorm(_)) => Some(d.clone()),
            _ => None,
        }
    }
}

/// Installs the producer-matching rewrites for the chosen tier. The node
/// tier includes the matching tier's rules.
pub fn register_hooks(reg: &mut RewriteRegistry, tier: NormTier) {
    if tier == NormTier::Library {
        return;
    }
    reg.register(
        "VectorNorm",
        Rc::new(|s, def| {
            let NodeDef::VectorNorm(v) = def else {
                return Ok(None);
            };
            match s.producer(&Staged::new(v.clone())) {
                Some(NodeDef::ZeroVector(_)) => Ok(Some(s.lift(0.0))),
                Some(NodeDef::ScalarTimesVector(k, u)) => {
                    let k = Staged::new(k);
                    let a = s.abs(&k)?;
                    let n = s.norm(&Staged::new(u))?;
                    s.mul(&a, &n).map(Some)
                }
                _ => Ok(None),
            }
        }),
    );
    if tier != NormTier::Node {
        return;
    }
    reg.register(
        "VectorNorm",
        Rc::new(|s, def| {
            let NodeDef::VectorNorm(v) = def else {
                return Ok(None);
            };
            match s.producer(&Staged::new(v.clone())) {
                Some(NodeDef::UnitVector(_)) => Ok(Some(s.lift(1.0))),
                _ => Ok(None),
            }
        }),
    );
    reg.register(
        "ScalarTimesVector",
        Rc::new(|s, def| {
            let NodeDef::ScalarTimesVector(k, v2) = def else {
                return Ok(None);
            };
            let Some(NodeDef::Binary(BinOp::Divide, Expr::Const(Lit::Double(one)), n)) =
                s.def_of(&Staged::new(k.clone()))
            else {
                return Ok(None);
            };
            if *one != 1.0 {
                return Ok(None);
            }
            match s.def_of(&Staged::new(n.clone())) {
                Some(NodeDef::VectorNorm(v1)) if v1.sym().is_some() && v1.sym() == v2.sym() => {
                    let v = v2.clone();
                    s.build(NodeDef::UnitVector(v)).map(Some)
                }
                _ => Ok(None),
            }
        }),
    );
}
