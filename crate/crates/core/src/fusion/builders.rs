use crate::ir::{LoopDef, LoopElem, NodeDef, SemType, StageError, SymId};
use crate::staging::{Staged, Stager};

/// Combiner of a reduce element, staged once with symbolic operands.
pub type Combiner = Box<dyn FnOnce(&mut Stager, &Staged, &Staged) -> Result<Staged, StageError>>;

/// One element of a loop under construction, produced inside the body.
pub enum ElemSpec {
    Collect {
        value: Staged,
        cond: Option<Staged>,
    },
    Reduce {
        value: Staged,
        cond: Option<Staged>,
        zero: Staged,
        combine: Combiner,
    },
    Foreach,
}

impl ElemSpec {
    pub fn collect(value: Staged) -> Self {
        ElemSpec::Collect { value, cond: None }
    }

    pub fn collect_if(value: Staged, cond: Staged) -> Self {
        ElemSpec::Collect {
            value,
            cond: Some(cond),
        }
    }

    pub fn reduce(
        value: Staged,
        cond: Option<Staged>,
        zero: Staged,
        combine: impl FnOnce(&mut Stager, &Staged, &Staged) -> Result<Staged, StageError> + 'static,
    ) -> Self {
        ElemSpec::Reduce {
            value,
            cond,
            zero,
            combine: Box::new(combine),
        }
    }

    /// A reduce with `+`.
    pub fn sum(value: Staged, cond: Option<Staged>, zero: Staged) -> Self {
        Self::reduce(value, cond, zero, |s, l, r| s.add(l, r))
    }
}

/// How an output requested by the caller is produced.
enum OutPlan {
    Elem(usize),
    Columns {
        tag: String,
        fields: Vec<(String, usize)>,
    },
}

struct PendingReduce {
    zero: Staged,
    combine: Combiner,
}

enum PendingElem {
    Collect {
        value: Staged,
        cond: Option<Staged>,
    },
    Reduce {
        value: Staged,
        cond: Option<Staged>,
        pending: PendingReduce,
    },
    Foreach,
}

impl Stager {
    /// Builds one parallel loop over `0..size`. `body` runs once in the
    /// loop scope with the symbolic index and returns the elements; the
    /// result has one handle per element, in order.
    ///
    /// Record-valued collects become one collect per field in the same
    /// loop, returned as a column record. A collect that copies a vector
    /// of the same length unchanged returns that vector.
    pub fn mk_loop(
        &mut self,
        size: &Staged,
        origin: Option<NodeDef>,
        body: impl FnOnce(&mut Stager, &Staged) -> Result<Vec<ElemSpec>, StageError>,
    ) -> Result<Vec<Staged>, StageError> {
        if size.ty() != SemType::Int {
            return Err(StageError::mismatch(
                "ParallelLoop",
                format!("loop size has type {}", size.ty()),
            ));
        }
        let index = self.ctx_mut().fresh_bound(SemType::Int);
        let idx = Staged::new(crate::ir::Expr::Sym(index, SemType::Int));
        let mut pending = Vec::new();
        let mut plans = Vec::new();
        let block = self.reify(vec![index], |s| {
            for spec in body(s, &idx)? {
                let plan = s.plan_elem(spec, &mut pending)?;
                plans.push(plan);
            }
            Ok(s.unit())
        })?;

        let body_effect_free = block.effects.is_empty();
        let mut keep = vec![true; pending.len()];
        let mut replaced: Vec<Option<Staged>> = vec![None; pending.len()];
        for (k, p) in pending.iter().enumerate() {
            if let PendingElem::Collect { value, cond: None } = p {
                if body_effect_free {
                    if let Some(src) = self.copied_source(value, index, size) {
                        keep[k] = false;
                        replaced[k] = Some(src);
                    }
                }
            }
        }

        let mut elems = Vec::new();
        let mut out_of = vec![None; pending.len()];
        for (k, p) in pending.into_iter().enumerate() {
            if !keep[k] {
                continue;
            }
            let elem = match p {
                PendingElem::Collect { value, cond } => {
                    let out = self.ctx_mut().fresh_sym();
                    LoopElem::Collect {
                        out,
                        value: value.into_expr(),
                        cond: cond.map(Staged::into_expr),
                    }
                }
                PendingElem::Reduce {
                    value,
                    cond,
                    pending,
                } => {
                    let ty = value.ty();
                    let lhs = self.ctx_mut().fresh_bound(ty.clone());
                    let rhs = self.ctx_mut().fresh_bound(ty.clone());
                    let (l, r) = (
                        Staged::new(crate::ir::Expr::Sym(lhs, ty.clone())),
                        Staged::new(crate::ir::Expr::Sym(rhs, ty)),
                    );
                    let combine = pending.combine;
                    let reduce = self.reify(vec![lhs, rhs], move |s| combine(s, &l, &r))?;
                    let out = self.ctx_mut().fresh_sym();
                    LoopElem::Reduce {
                        out,
                        value: value.into_expr(),
                        cond: cond.map(Staged::into_expr),
                        zero: pending.zero.into_expr(),
                        lhs,
                        rhs,
                        reduce,
                    }
                }
                PendingElem::Foreach => LoopElem::Foreach {
                    out: self.ctx_mut().fresh_sym(),
                },
            };
            out_of[k] = Some((elem.out(), elem.ty()));
            elems.push(elem);
        }

        if !elems.is_empty() {
            let def = NodeDef::ParallelLoop(LoopDef {
                size: size.expr().clone(),
                index,
                body: block,
                elems,
                origin: origin.map(Box::new),
            });
            self.build(def)?;
        }

        let handle = |k: usize, replaced: &[Option<Staged>]| -> Staged {
            if let Some(src) = &replaced[k] {
                return src.clone();
            }
            let (out, ty) = out_of[k].clone().expect("kept element has an output");
            Staged::new(crate::ir::Expr::Sym(out, ty))
        };
        let mut result = Vec::new();
        for plan in plans {
            result.push(match plan {
                OutPlan::Elem(k) => handle(k, &replaced),
                OutPlan::Columns { tag, fields } => {
                    let cols = fields
                        .into_iter()
                        .map(|(n, k)| (n, handle(k, &replaced)))
                        .collect();
                    self.mk_columns(&tag, cols)?
                }
            });
        }
        Ok(result)
    }

    fn plan_elem(
        &mut self,
        spec: ElemSpec,
        pending: &mut Vec<PendingElem>,
    ) -> Result<OutPlan, StageError> {
        let mut push = |p: PendingElem| {
            pending.push(p);
            pending.len() - 1
        };
        Ok(match spec {
            ElemSpec::Collect { value, cond } => match value.ty() {
                SemType::Record(rt) => {
                    let mut fields = Vec::new();
                    for (name, fty) in &rt.fields {
                        if fty.contains_record() {
                            return Err(StageError::mismatch(
                                "ParallelLoop",
                                format!("nested record field `{name}` in a vector element"),
                            ));
                        }
                        let v = self.field(&value, name)?;
                        fields.push((
                            name.clone(),
                            push(PendingElem::Collect {
                                value: v,
                                cond: cond.clone(),
                            }),
                        ));
                    }
                    OutPlan::Columns {
                        tag: rt.tag.clone(),
                        fields,
                    }
                }
                _ => OutPlan::Elem(push(PendingElem::Collect { value, cond })),
            },
            ElemSpec::Reduce {
                value,
                cond,
                zero,
                combine,
            } => OutPlan::Elem(push(PendingElem::Reduce {
                value,
                cond,
                pending: PendingReduce { zero, combine },
            })),
            ElemSpec::Foreach => OutPlan::Elem(push(PendingElem::Foreach)),
        })
    }

    /// The vector `src` when `value` is `src(index)` and `src` has exactly
    /// `size` elements.
    fn copied_source(&self, value: &Staged, index: SymId, size: &Staged) -> Option<Staged> {
        let NodeDef::VectorApply(src, i) = self.def_of(value)? else {
            return None;
        };
        if i.sym() != Some(index) {
            return None;
        }
        let same_len = match self.ctx().known_length(src) {
            Some(len) => len == *size.expr(),
            None => matches!(
                self.def_of(size),
                Some(NodeDef::VectorLength(v)) if v == src
            ),
        };
        same_len.then(|| Staged::new(src.clone()))
    }

    /// Vector built by evaluating `f` at every index.
    pub fn mk_collect(
        &mut self,
        size: &Staged,
        f: impl FnOnce(&mut Stager, &Staged) -> Result<Staged, StageError>,
    ) -> Result<Staged, StageError> {
        let mut out = self.mk_loop(size, None, |s, i| Ok(vec![ElemSpec::collect(f(s, i)?)]))?;
        Ok(out.remove(0))
    }

    /// Reduction of `f` over every index, starting from `zero`.
    pub fn mk_reduce(
        &mut self,
        size: &Staged,
        zero: &Staged,
        f: impl FnOnce(&mut Stager, &Staged) -> Result<Staged, StageError>,
        combine: impl FnOnce(&mut Stager, &Staged, &Staged) -> Result<Staged, StageError> + 'static,
    ) -> Result<Staged, StageError> {
        let zero = zero.clone();
        let mut out = self.mk_loop(size, None, move |s, i| {
            Ok(vec![ElemSpec::reduce(f(s, i)?, None, zero, combine)])
        })?;
        Ok(out.remove(0))
    }

    /// Runs `f` once per index for its effects.
    pub fn mk_foreach(
        &mut self,
        size: &Staged,
        f: impl FnOnce(&mut Stager, &Staged) -> Result<(), StageError>,
    ) -> Result<Staged, StageError> {
        let mut out = self.mk_loop(size, None, |s, i| {
            f(s, i)?;
            Ok(vec![ElemSpec::Foreach])
        })?;
        Ok(out.remove(0))
    }
}
