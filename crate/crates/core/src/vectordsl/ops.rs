use crate::fusion::ElemSpec;
use crate::ir::{Lit, NodeDef, SemType, StageError};
use crate::staging::{Staged, Stager};

fn elem_type(op: &str, v: &Staged) -> Result<SemType, StageError> {
    match v.ty() {
        SemType::Vector(e) => Ok(*e),
        t => Err(StageError::TypeMismatch {
            op: op.into(),
            detail: format!("expected a vector, found {t}"),
        }),
    }
}

fn zero_of(s: &Stager, op: &str, t: &SemType) -> Result<Staged, StageError> {
    match t {
        SemType::Int => Ok(s.lift(0i64)),
        SemType::Double => Ok(s.lift(0.0)),
        t => Err(StageError::TypeMismatch {
            op: op.into(),
            detail: format!("cannot sum values of type {t}"),
        }),
    }
}

impl Stager {
    pub fn length(&mut self, v: &Staged) -> Result<Staged, StageError> {
        self.build(NodeDef::VectorLength(v.expr().clone()))
    }

    pub fn apply(&mut self, v: &Staged, i: &Staged) -> Result<Staged, StageError> {
        self.build(NodeDef::VectorApply(v.expr().clone(), i.expr().clone()))
    }

    pub fn update(&mut self, v: &Staged, i: &Staged, x: &Staged) -> Result<Staged, StageError> {
        self.build(NodeDef::VectorUpdate(
            v.expr().clone(),
            i.expr().clone(),
            x.expr().clone(),
        ))
    }

    /// A mutable vector filled with the element type's zero.
    pub fn vector_new(&mut self, len: &Staged, elem: SemType) -> Result<Staged, StageError> {
        self.build(NodeDef::VectorNew {
            len: len.expr().clone(),
            elem,
        })
    }

    /// Uniform doubles in `[0, 1)`. Every call draws from its own stream.
    pub fn rand(&mut self, len: &Staged) -> Result<Staged, StageError> {
        let stream = self.ctx_mut().fresh_stream();
        self.build(NodeDef::VectorRand {
            len: len.expr().clone(),
            stream,
        })
    }

    pub fn literal(&mut self, elems: Vec<Lit>, elem: SemType) -> Result<Staged, StageError> {
        self.build(NodeDef::VectorLiteral { elems, elem })
    }

    pub fn int_vector(&mut self, xs: &[i64]) -> Result<Staged, StageError> {
        self.literal(xs.iter().map(|&x| Lit::Int(x)).collect(), SemType::Int)
    }

    pub fn double_vector(&mut self, xs: &[f64]) -> Result<Staged, StageError> {
        self.literal(xs.iter().map(|&x| Lit::Double(x)).collect(), SemType::Double)
    }

    pub fn map(
        &mut self,
        v: &Staged,
        f: impl FnOnce(&mut Stager, &Staged) -> Result<Staged, StageError>,
    ) -> Result<Staged, StageError> {
        elem_type("map", v)?;
        let n = self.length(v)?;
        self.mk_collect(&n, |s, i| {
            let x = s.apply(v, i)?;
            f(s, &x)
        })
    }

    /// Element-wise combination over the length of `a`.
    pub fn zip_with(
        &mut self,
        a: &Staged,
        b: &Staged,
        f: impl FnOnce(&mut Stager, &Staged, &Staged) -> Result<Staged, StageError>,
    ) -> Result<Staged, StageError> {
        elem_type("zipWith", a)?;
        elem_type("zipWith", b)?;
        let n = self.length(a)?;
        self.mk_collect(&n, |s, i| {
            let x = s.apply(a, i)?;
            let y = s.apply(b, i)?;
            f(s, &x, &y)
        })
    }

    /// Elements satisfying `p`, in order.
    pub fn filter(
        &mut self,
        v: &Staged,
        p: impl FnOnce(&mut Stager, &Staged) -> Result<Staged, StageError>,
    ) -> Result<Staged, StageError> {
        elem_type("filter", v)?;
        let n = self.length(v)?;
        let mut out = self.mk_loop(&n, None, |s, i| {
            let x = s.apply(v, i)?;
            let c = p(s, &x)?;
            Ok(vec![ElemSpec::collect_if(x, c)])
        })?;
        Ok(out.remove(0))
    }

    /// Number of elements satisfying `p`, as one filtered reduction.
    pub fn filter_count(
        &mut self,
        v: &Staged,
        p: impl FnOnce(&mut Stager, &Staged) -> Result<Staged, StageError>,
    ) -> Result<Staged, StageError> {
        elem_type("count", v)?;
        let n = self.length(v)?;
        let zero = self.lift(0i64);
        let mut out = self.mk_loop(&n, None, |s, i| {
            let x = s.apply(v, i)?;
            let c = p(s, &x)?;
            let one = s.lift(1i64);
            Ok(vec![ElemSpec::sum(one, Some(c), zero)])
        })?;
        Ok(out.remove(0))
    }

    /// Indexes of the elements satisfying `p`.
    pub fn find(
        &mut self,
        v: &Staged,
        p: impl FnOnce(&mut Stager, &Staged) -> Result<Staged, StageError>,
    ) -> Result<Staged, StageError> {
        elem_type("find", v)?;
        let n = self.length(v)?;
        let mut out = self.mk_loop(&n, None, |s, i| {
            let x = s.apply(v, i)?;
            let c = p(s, &x)?;
            Ok(vec![ElemSpec::collect_if(i.clone(), c)])
        })?;
        Ok(out.remove(0))
    }

    pub fn sum(&mut self, v: &Staged) -> Result<Staged, StageError> {
        let t = elem_type("sum", v)?;
        let zero = zero_of(self, "sum", &t)?;
        let n = self.length(v)?;
        self.mk_reduce(&n, &zero, |s, i| s.apply(v, i), |s, l, r| s.add(l, r))
    }

    /// `sum(n) { i => f(i) }` over doubles.
    pub fn sum_index(
        &mut self,
        n: &Staged,
        f: impl FnOnce(&mut Stager, &Staged) -> Result<Staged, StageError>,
    ) -> Result<Staged, StageError> {
        let zero = self.lift(0.0);
        self.mk_reduce(n, &zero, f, |s, l, r| s.add(l, r))
    }

    pub fn avg(&mut self, v: &Staged) -> Result<Staged, StageError> {
        let total = self.sum(v)?;
        let n = self.length(v)?;
        let n = match total.ty() {
            SemType::Double => self.to_double(&n)?,
            _ => n,
        };
        self.div(&total, &n)
    }

    pub fn mean(&mut self, x: &Staged) -> Result<Staged, StageError> {
        let n = self.length(x)?;
        let total = self.sum_index(&n, |s, i| s.apply(x, i))?;
        let nd = self.to_double(&n)?;
        self.div(&total, &nd)
    }

    pub fn variance(&mut self, x: &Staged) -> Result<Staged, StageError> {
        let n = self.length(x)?;
        let sq = self.sum_index(&n, |s, i| {
            let xi = s.apply(x, i)?;
            s.square(&xi)
        })?;
        let nd = self.to_double(&n)?;
        let ex2 = self.div(&sq, &nd)?;
        let m = self.mean(x)?;
        let m2 = self.square(&m)?;
        self.sub(&ex2, &m2)
    }

    /// Writes `value` at every index listed in `idxs`. Indexes must be
    /// pairwise distinct for the parallel loop to be well defined.
    pub fn bulk_update(
        &mut self,
        v: &Staged,
        idxs: &Staged,
        value: &Staged,
    ) -> Result<Staged, StageError> {
        elem_type("bulkUpdate", idxs)?;
        let n = self.length(idxs)?;
        self.mk_foreach(&n, |s, i| {
            let j = s.apply(idxs, i)?;
            s.update(v, &j, value)?;
            Ok(())
        })
    }
}
