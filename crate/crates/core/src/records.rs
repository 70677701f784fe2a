//! Dynamic records with partial evaluation: field access on a known
//! constructor, per-field splitting of conditionals, vectors of records
//! stored as records of vectors, and the strict check that rejects
//! records surviving to code generation.

use std::rc::Rc;

use thiserror::Error;

use crate::ir::{dump_statement, Graph, NodeDef, SemType, StageError, StatementTable};
use crate::opt::Schedule;
use crate::staging::{RewriteRegistry, Staged, Stager};

/// A record value survived optimization while strict mode was on.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("record residualized: {stmt} (scope {scope})")]
pub struct RecordResidualized {
    pub stmt: String,
    pub scope: String,
}

impl Stager {
    pub fn mk_record(&mut self, tag: &str, fields: Vec<(String, Staged)>) -> Result<Staged, StageError> {
        self.build(NodeDef::Record {
            tag: tag.to_string(),
            fields: fields.into_iter().map(|(n, v)| (n, v.into_expr())).collect(),
            soa: false,
        })
    }

    /// A vector of records represented by one vector per field.
    pub fn mk_columns(&mut self, tag: &str, cols: Vec<(String, Staged)>) -> Result<Staged, StageError> {
        self.build(NodeDef::Record {
            tag: tag.to_string(),
            fields: cols.into_iter().map(|(n, v)| (n, v.into_expr())).collect(),
            soa: true,
        })
    }

    pub fn field(&mut self, rec: &Staged, name: &str) -> Result<Staged, StageError> {
        let def = NodeDef::FieldAccess {
            rec: rec.expr().clone(),
            field: name.to_string(),
        };
        def.result_type()?;
        self.build(def)
    }
}

/// Rejects a conditional whose arms are records of different shapes.
pub(crate) fn check_arm_shapes(then_ty: &SemType, else_ty: &SemType) -> Result<(), StageError> {
    let rec = |t: &SemType| match t {
        SemType::Record(r) => Some(r.clone()),
        SemType::Vector(e) => match e.as_ref() {
            SemType::Record(r) => Some(r.clone()),
            _ => None,
        },
        _ => None,
    };
    if let (Some(a), Some(b)) = (rec(then_ty), rec(else_ty)) {
        let names = |r: &crate::ir::RecordType| {
            let mut n: Vec<String> = r.fields.iter().map(|(f, _)| f.clone()).collect();
            n.sort();
            n
        };
        if a.tag != b.tag || names(&a) != names(&b) {
            return Err(StageError::RecordShapeMismatch {
                left: then_ty.to_string(),
                right: else_ty.to_string(),
            });
        }
    }
    Ok(())
}

fn record_parts(s: &Stager, e: &Staged) -> Option<(String, Vec<(String, Staged)>, bool)> {
    match s.def_of(e)? {
        NodeDef::Record { tag, fields, soa } => Some((
            tag.clone(),
            fields
                .iter()
                .map(|(n, x)| (n.clone(), Staged::new(x.clone())))
                .collect(),
            *soa,
        )),
        _ => None,
    }
}

fn columns(s: &Stager, e: &Staged) -> Option<(String, Vec<(String, Staged)>)> {
    match record_parts(s, e)? {
        (tag, fields, true) => Some((tag, fields)),
        _ => None,
    }
}

pub fn register_hooks(reg: &mut RewriteRegistry) {
    reg.register(
        "FieldAccess",
        Rc::new(|s, def| {
            let NodeDef::FieldAccess { rec, field } = def else {
                return Ok(None);
            };
            let rec = Staged::new(rec.clone());
            Ok(record_parts(s, &rec).and_then(|(_, fields, _)| {
                fields.into_iter().find(|(n, _)| n == field).map(|(_, v)| v)
            }))
        }),
    );

    reg.register(
        "IfThenElse",
        Rc::new(|s, def| {
            let NodeDef::IfThenElse { cond, then_b, else_b } = def else {
                return Ok(None);
            };
            if !then_b.effects.is_empty() || !else_b.effects.is_empty() {
                return Ok(None);
            }
            let a = record_parts(s, &Staged::new(then_b.result.clone()));
            let b = record_parts(s, &Staged::new(else_b.result.clone()));
            let (Some((tag_a, fa, soa_a)), Some((tag_b, fb, soa_b))) = (a, b) else {
                return Ok(None);
            };
            let shape = |t: &str, f: &[(String, Staged)]| {
                format!(
                    "{t}{{{}}}",
                    f.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>().join(", ")
                )
            };
            let mismatch = tag_a != tag_b
                || soa_a != soa_b
                || fa.len() != fb.len()
                || fa.iter().any(|(n, _)| !fb.iter().any(|(m, _)| m == n));
            if mismatch {
                return Err(StageError::RecordShapeMismatch {
                    left: shape(&tag_a, &fa),
                    right: shape(&tag_b, &fb),
                });
            }
            let cond = Staged::new(cond.clone());
            let mut fields = Vec::new();
            for (n, va) in fa {
                let vb = fb.iter().find(|(m, _)| *m == n).unwrap().1.clone();
                let tb = s.reify(Vec::new(), |_| Ok(va))?;
                let eb = s.reify(Vec::new(), |_| Ok(vb))?;
                fields.push((n, s.if_blocks(&cond, tb, eb)?));
            }
            let r = if soa_a {
                s.mk_columns(&tag_a, fields)?
            } else {
                s.mk_record(&tag_a, fields)?
            };
            Ok(Some(r))
        }),
    );

    reg.register(
        "VectorApply",
        Rc::new(|s, def| {
            let NodeDef::VectorApply(v, i) = def else {
                return Ok(None);
            };
            let Some((tag, cols)) = columns(s, &Staged::new(v.clone())) else {
                return Ok(None);
            };
            let i = Staged::new(i.clone());
            let mut fields = Vec::new();
            for (n, c) in cols {
                fields.push((n, s.apply(&c, &i)?));
            }
            s.mk_record(&tag, fields).map(Some)
        }),
    );

    reg.register(
        "VectorLength",
        Rc::new(|s, def| {
            let NodeDef::VectorLength(v) = def else {
                return Ok(None);
            };
            match columns(s, &Staged::new(v.clone())) {
                Some((_, cols)) => s.length(&cols[0].1).map(Some),
                None => Ok(None),
            }
        }),
    );

    reg.register(
        "VectorUpdate",
        Rc::new(|s, def| {
            let NodeDef::VectorUpdate(v, i, x) = def else {
                return Ok(None);
            };
            let Some((_, cols)) = columns(s, &Staged::new(v.clone())) else {
                return Ok(None);
            };
            let (i, x) = (Staged::new(i.clone()), Staged::new(x.clone()));
            for (n, c) in cols {
                let fx = s.field(&x, &n)?;
                s.update(&c, &i, &fx)?;
            }
            Ok(Some(s.unit()))
        }),
    );

    reg.register(
        "VectorNew",
        Rc::new(|s, def| {
            let NodeDef::VectorNew { len, elem: SemType::Record(rt) } = def else {
                return Ok(None);
            };
            let len = Staged::new(len.clone());
            let mut cols = Vec::new();
            for (n, t) in &rt.fields {
                cols.push((n.clone(), s.vector_new(&len, t.clone())?));
            }
            s.mk_columns(&rt.tag, cols).map(Some)
        }),
    );
}

/// Fails on the first scheduled statement that would need a record value
/// at run time.
pub fn strict_record_check(g: &Graph, sched: &Schedule) -> Result<(), RecordResidualized> {
    for sym in sched.all_syms() {
        let st = g.lookup(sym).expect("scheduled symbol is defined");
        let residual = matches!(st.def, NodeDef::Record { .. } | NodeDef::FieldAccess { .. })
            || st.ty.contains_record();
        if residual {
            return Err(RecordResidualized {
                stmt: dump_statement(st),
                scope: sched.scope_of(sym).map(|b| b.to_string()).unwrap_or_default(),
            });
        }
    }
    if g.root.result.ty().contains_record() {
        return Err(RecordResidualized {
            stmt: format!("program result {}", g.root.result),
            scope: g.root.id.to_string(),
        });
    }
    Ok(())
}

/// Record and field-access statements in a schedule.
pub fn record_node_count(g: &Graph, sched: &Schedule) -> usize {
    sched
        .all_syms()
        .filter(|s| {
            matches!(
                g.lookup(*s).map(|st| &st.def),
                Some(NodeDef::Record { .. } | NodeDef::FieldAccess { .. })
            )
        })
        .count()
}
