//! The demo vector DSL: bulk operations on the parallel-loop layer,
//! library statistics, and norm/distance at three extension tiers.

mod norm;
mod ops;

use std::fmt;
use std::str::FromStr;

use crate::ir::{NodeDef, StageError};
use crate::staging::{Staged, Stager};

pub use norm::register_hooks;

/// How `norm` is provided.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum NormTier {
    /// Plain composition of map, sum and sqrt.
    #[default]
    Library,
    /// A smart constructor that inspects the producer of its argument.
    Match,
    /// Dedicated IR nodes with rewrites and their own emitters.
    Node,
}

impl NormTier {
    pub const ALL: [NormTier; 3] = [NormTier::Library, NormTier::Match, NormTier::Node];

    pub fn name(self) -> &'static str {
        match self {
            NormTier::Library => "library",
            NormTier::Match => "match",
            NormTier::Node => "node",
        }
    }
}

impl fmt::Display for NormTier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NormTier {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NormTier::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown norm tier `{s}` (expected library, match or node)"))
    }
}

/// Default lowering of the domain nodes: vector-valued ones become loops
/// that remember the operation they came from.
pub fn lower_domain(s: &mut Stager, def: NodeDef) -> Result<Staged, StageError> {
    let origin = Some(def.clone());
    match def {
        NodeDef::ZeroVector(n) => {
            let n = Staged::new(n);
            let mut out = s.mk_loop(&n, origin, |s, _| {
                Ok(vec![crate::fusion::ElemSpec::collect(s.lift(0.0))])
            })?;
            Ok(out.remove(0))
        }
        NodeDef::ScalarTimesVector(k, v) => {
            let (k, v) = (Staged::new(k), Staged::new(v));
            let n = s.length(&v)?;
            let mut out = s.mk_loop(&n, origin, |s, i| {
                let x = s.apply(&v, i)?;
                Ok(vec![crate::fusion::ElemSpec::collect(s.mul(&k, &x)?)])
            })?;
            Ok(out.remove(0))
        }
        NodeDef::VectorMinus(a, b) => {
            let (a, b) = (Staged::new(a), Staged::new(b));
            let n = s.length(&a)?;
            let mut out = s.mk_loop(&n, origin, |s, i| {
                let x = s.apply(&a, i)?;
                let y = s.apply(&b, i)?;
                Ok(vec![crate::fusion::ElemSpec::collect(s.sub(&x, &y)?)])
            })?;
            Ok(out.remove(0))
        }
        NodeDef::VectorNorm(v) if s.options().norm_tier != NormTier::Node => {
            s.norm_library(&Staged::new(v))
        }
        other => s.ctx_mut().stage(other).map(Staged::new),
    }
}

#[cfg(test)]
mod tests;
