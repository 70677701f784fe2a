use std::collections::{HashMap, HashSet};
use std::fmt::Write;

use super::depgraph::scope_dep_graph;
use super::{Schedule, ScheduleError};
use crate::ir::{dump_statement, Block, Expr, Graph, StatementTable, SymId};

/// The schedule as nested text: each compound statement is followed by
/// its scopes, indented, ending with the scope result.
pub fn dump_schedule(g: &Graph, sched: &Schedule) -> String {
    let mut out = String::new();
    dump_block(g, sched, &g.root, 0, &mut out);
    let _ = writeln!(out, "-> {}", g.root.result);
    out
}

fn dump_block(g: &Graph, sched: &Schedule, b: &Block, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    for sym in sched.block(b.id) {
        let st = g.lookup(*sym).expect("scheduled symbol is defined");
        let _ = writeln!(out, "{pad}{}", dump_statement(st));
        for sc in st.def.scopes() {
            let bound = sc
                .block
                .bound
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(", ");
            let label = format!("{:?}", sc.kind).to_lowercase();
            let _ = writeln!(out, "{pad}  {label} {} [{bound}]:", sc.block.id);
            dump_block(g, sched, sc.block, depth + 2, out);
            let roots = sc
                .roots
                .iter()
                .map(|r| r.to_string())
                .collect::<Vec<_>>()
                .join(", ");
            let _ = writeln!(out, "{pad}    -> {roots}");
        }
    }
}

/// Checks that every operand is defined before use in an enclosing
/// scope, that every effect of a scheduled scope is emitted in it, and
/// that dependency edges point forward.
pub fn validate_schedule(g: &Graph, sched: &Schedule) -> Result<(), ScheduleError> {
    let mut visible = HashSet::new();
    check_block(g, sched, &g.root, &mut visible)?;
    need(&visible, &g.root.result, "root result")?;
    for (b, _) in g.blocks() {
        let order = sched.block(b);
        if order.is_empty() {
            continue;
        }
        let at: HashMap<SymId, usize> = order.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        for (x, y, k) in scope_dep_graph(g, sched, b).edges {
            if at[&x] >= at[&y] {
                return Err(ScheduleError::Invalid(format!(
                    "{} edge {x} -> {y} runs backwards in {b}",
                    k.name()
                )));
            }
        }
    }
    Ok(())
}

fn need(visible: &HashSet<SymId>, e: &Expr, what: &str) -> Result<(), ScheduleError> {
    match e.sym() {
        Some(s) if !visible.contains(&s) => Err(ScheduleError::Invalid(format!(
            "{s} used by {what} is not in scope"
        ))),
        _ => Ok(()),
    }
}

fn check_block(
    g: &Graph,
    sched: &Schedule,
    b: &Block,
    visible: &mut HashSet<SymId>,
) -> Result<(), ScheduleError> {
    visible.extend(b.bound.iter().copied());
    let order = sched.block(b.id);
    for e in &b.effects {
        if !order.contains(e) {
            return Err(ScheduleError::Invalid(format!(
                "effect {e} of {} is not emitted there",
                b.id
            )));
        }
    }
    for sym in order {
        let st = g.lookup(*sym).expect("scheduled symbol is defined");
        for op in st.def.operands() {
            need(visible, op, &sym.to_string())?;
        }
        for sc in st.def.scopes() {
            let mut inner = visible.clone();
            check_block(g, sched, sc.block, &mut inner)?;
            for r in sc.roots {
                need(&inner, r, &format!("{} of {sym}", sc.block.id))?;
            }
        }
        visible.extend(st.defined_syms());
    }
    Ok(())
}
