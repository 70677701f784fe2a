use super::{Staged, Stager};
use crate::ir::{Block, NodeDef, StageError};

impl Stager {
    /// Staged conditional. A constant condition stages only the taken arm,
    /// in the current scope.
    pub fn if_then_else(
        &mut self,
        cond: &Staged,
        then_f: impl FnOnce(&mut Stager) -> Result<Staged, StageError>,
        else_f: impl FnOnce(&mut Stager) -> Result<Staged, StageError>,
    ) -> Result<Staged, StageError> {
        if let Some(c) = cond.as_const().and_then(|l| l.as_bool()) {
            return if c { then_f(self) } else { else_f(self) };
        }
        let then_b = self.reify(Vec::new(), then_f)?;
        let else_b = self.reify(Vec::new(), else_f)?;
        self.if_blocks(cond, then_b, else_b)
    }

    /// Builds a conditional from already reified arms. Pure conditionals go
    /// through the hook chain; effectful ones are reflected directly.
    pub fn if_blocks(
        &mut self,
        cond: &Staged,
        then_b: Block,
        else_b: Block,
    ) -> Result<Staged, StageError> {
        let def = NodeDef::IfThenElse {
            cond: cond.expr().clone(),
            then_b,
            else_b,
        };
        if let NodeDef::IfThenElse { then_b, else_b, .. } = &def {
            crate::records::check_arm_shapes(&then_b.result.ty(), &else_b.result.ty())?;
        }
        def.result_type()?;
        let NodeDef::IfThenElse { then_b, else_b, .. } = &def else {
            unreachable!()
        };
        let summary = self
            .ctx()
            .summarize_block(then_b)
            .or_else(&self.ctx().summarize_block(else_b));
        if !summary.is_pure() {
            return self.ctx_mut().stage(def).map(Staged::new);
        }
        let trivial = then_b.effects.is_empty() && else_b.effects.is_empty();
        if trivial && then_b.result == else_b.result {
            return Ok(Staged::new(then_b.result.clone()));
        }
        self.build(def)
    }

    /// Staged `while`. The body's value is discarded.
    pub fn while_loop(
        &mut self,
        cond_f: impl FnOnce(&mut Stager) -> Result<Staged, StageError>,
        body_f: impl FnOnce(&mut Stager) -> Result<(), StageError>,
    ) -> Result<Staged, StageError> {
        let cond = self.reify(Vec::new(), cond_f)?;
        let body = self.reify(Vec::new(), |s| {
            body_f(s)?;
            Ok(s.unit())
        })?;
        self.build(NodeDef::While { cond, body })
    }

    pub fn var_new(&mut self, init: &Staged) -> Result<Staged, StageError> {
        self.build(NodeDef::VarAlloc(init.expr().clone()))
    }

    pub fn var_read(&mut self, v: &Staged) -> Result<Staged, StageError> {
        self.build(NodeDef::VarRead(v.expr().clone()))
    }

    pub fn var_write(&mut self, v: &Staged, x: &Staged) -> Result<Staged, StageError> {
        self.build(NodeDef::VarWrite(v.expr().clone(), x.expr().clone()))
    }

    /// `v += x` for numeric variables.
    pub fn var_add(&mut self, v: &Staged, x: &Staged) -> Result<Staged, StageError> {
        let cur = self.var_read(v)?;
        let next = self.add(&cur, x)?;
        self.var_write(v, &next)
    }

    /// Sequential traversal unfolded at staging time into a counter
    /// variable and a `while` loop. `f` runs exactly once, on the symbolic
    /// element.
    pub fn foreach(
        &mut self,
        v: &Staged,
        f: impl FnOnce(&mut Stager, Staged) -> Result<(), StageError>,
    ) -> Result<Staged, StageError> {
        let len = self.length(v)?;
        let zero = self.lift(0i64);
        let i = self.var_new(&zero)?;
        let vv = v.clone();
        self.while_loop(
            |s| {
                let iv = s.var_read(&i)?;
                s.lt(&iv, &len)
            },
            |s| {
                let iv = s.var_read(&i)?;
                let x = s.apply(&vv, &iv)?;
                f(s, x)?;
                let one = s.lift(1i64);
                let next = s.add(&iv, &one)?;
                s.var_write(&i, &next)?;
                Ok(())
            },
        )
    }

    /// Counts matching elements with a sequential traversal: one counter
    /// variable, one `while`, one conditional.
    pub fn count_sequential(
        &mut self,
        v: &Staged,
        pred: impl FnOnce(&mut Stager, &Staged) -> Result<Staged, StageError>,
    ) -> Result<Staged, StageError> {
        let zero = self.lift(0i64);
        let c = self.var_new(&zero)?;
        let cc = c.clone();
        self.foreach(v, |s, x| {
            let p = pred(s, &x)?;
            s.if_then_else(
                &p,
                |s| {
                    let one = s.lift(1i64);
                    s.var_add(&cc, &one)
                },
                |s| Ok(s.unit()),
            )?;
            Ok(())
        })?;
        self.var_read(&c)
    }
}
