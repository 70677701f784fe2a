//! The staged-programming surface: typed handles, smart constructors with
//! rewrite hooks, staged control flow and generator-stage combinators.

mod arith;
mod control;
mod nondet;
mod rewrite;

use crate::ir::{
    Block, Expr, Graph, GraphContext, Lit, NodeDef, SemType, StageError, StatementTable, SymId,
};
use crate::vectordsl::NormTier;

pub use rewrite::{Hook, RewriteRegistry};

/// A staged value: an IR expression standing for something computed when
/// the generated program runs.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Staged(Expr);

impl Staged {
    pub fn new(e: Expr) -> Self {
        Staged(e)
    }

    pub fn expr(&self) -> &Expr {
        &self.0
    }

    pub fn into_expr(self) -> Expr {
        self.0
    }

    pub fn ty(&self) -> SemType {
        self.0.ty()
    }

    pub fn sym(&self) -> Option<SymId> {
        self.0.sym()
    }

    pub fn as_const(&self) -> Option<&Lit> {
        self.0.as_const()
    }
}

impl From<Expr> for Staged {
    fn from(e: Expr) -> Self {
        Staged(e)
    }
}

#[derive(Clone, Debug)]
pub struct StageOptions {
    pub cse: bool,
    /// Allows re-association of Double arithmetic.
    pub fast_math: bool,
    pub norm_tier: NormTier,
    /// Number of specialized paths `bam` may create before warning.
    pub bam_budget: usize,
}

impl Default for StageOptions {
    fn default() -> Self {
        StageOptions {
            cse: true,
            fast_math: false,
            norm_tier: NormTier::Library,
            bam_budget: 64,
        }
    }
}

/// Owns the graph under construction and the rewrite registry.
pub struct Stager {
    ctx: GraphContext,
    registry: RewriteRegistry,
    opts: StageOptions,
    bam_paths: usize,
    bam_warned: bool,
}

impl Stager {
    pub fn new(opts: StageOptions) -> Self {
        let mut ctx = GraphContext::new();
        ctx.set_cse(opts.cse);
        let mut s = Stager {
            ctx,
            registry: RewriteRegistry::default(),
            opts,
            bam_paths: 1,
            bam_warned: false,
        };
        crate::records::register_hooks(&mut s.registry);
        crate::vectordsl::register_hooks(&mut s.registry, s.opts.norm_tier);
        s
    }

    /// Stages a whole program and freezes the resulting graph.
    pub fn stage_program(
        opts: StageOptions,
        program: impl FnOnce(&mut Stager) -> Result<Staged, StageError>,
    ) -> Result<Graph, StageError> {
        let mut s = Stager::new(opts);
        let result = program(&mut s)?;
        Ok(s.ctx.finish(result.into_expr()))
    }

    pub fn options(&self) -> &StageOptions {
        &self.opts
    }

    pub fn ctx(&self) -> &GraphContext {
        &self.ctx
    }

    pub fn ctx_mut(&mut self) -> &mut GraphContext {
        &mut self.ctx
    }

    pub fn registry_mut(&mut self) -> &mut RewriteRegistry {
        &mut self.registry
    }

    /// Definition behind a staged value, for producer matching.
    pub fn def_of(&self, x: &Staged) -> Option<&NodeDef> {
        self.ctx.def_of(x.expr())
    }

    /// Creates a node: registered hooks first, newest to oldest, then the
    /// default lowering.
    pub fn build(&mut self, def: NodeDef) -> Result<Staged, StageError> {
        for hook in self.registry.hooks_for(def.name()) {
            if let Some(r) = hook(self, &def)? {
                return Ok(r);
            }
        }
        self.lower(def)
    }

    /// The end of the hook chain.
    pub fn lower(&mut self, def: NodeDef) -> Result<Staged, StageError> {
        match def {
            NodeDef::ZeroVector(_)
            | NodeDef::ScalarTimesVector(..)
            | NodeDef::VectorMinus(..)
            | NodeDef::VectorNorm(_) => crate::vectordsl::lower_domain(self, def),
            other => self.ctx.stage(other).map(Staged),
        }
    }

    pub fn lift(&self, v: impl Into<Lit>) -> Staged {
        Staged(Expr::Const(v.into()))
    }

    pub fn unit(&self) -> Staged {
        Staged(Expr::unit())
    }

    /// A positional program input.
    pub fn input(&mut self, index: u32, ty: SemType) -> Result<Staged, StageError> {
        self.build(NodeDef::Input(index, ty))
    }

    /// Runs `body` in a fresh scope binding `bound`.
    pub fn reify(
        &mut self,
        bound: Vec<SymId>,
        body: impl FnOnce(&mut Stager) -> Result<Staged, StageError>,
    ) -> Result<Block, StageError> {
        let depth = self.ctx.depth();
        self.ctx.push_scope(bound);
        match body(self) {
            Ok(r) => Ok(self.ctx.pop_scope(r.into_expr())),
            Err(e) => {
                self.ctx.unwind_to(depth);
                Err(e)
            }
        }
    }

    pub fn print(&mut self, x: &Staged) -> Result<Staged, StageError> {
        self.build(NodeDef::Print(x.expr().clone()))
    }

    pub fn print_str(&mut self, s: &str) -> Result<Staged, StageError> {
        let l = self.lift(s);
        self.print(&l)
    }

    /// Names an existing object a second time. Aliasing a mutable
    /// allocation this way is rejected by the no-sharing check.
    pub fn alias(&mut self, x: &Staged) -> Result<Staged, StageError> {
        self.build(NodeDef::Alias(x.expr().clone()))
    }
}

#[cfg(test)]
mod tests;
