use std::fmt::Write;

use super::graph::{Graph, Statement, StatementTable};
use super::node::Block;

/// One dump line: `x3 = Plus(x1, x2) [Pure]`.
pub fn dump_statement(st: &Statement) -> String {
    let lhs = st
        .defined_syms()
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(", ");
    format!("{lhs} = {} [{}]", st.def, st.eff)
}

fn block_line(label: &str, b: &Block) -> String {
    let effects = b
        .effects
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(", ");
    let bound = b
        .bound
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(", ");
    format!("{label} {} binds [{bound}] effects [{effects}] -> {}", b.id, b.result)
}

/// The statement table in construction order, each compound node followed
/// by an indented summary of its scopes.
pub fn dump_table(g: &Graph) -> String {
    let mut out = String::new();
    for st in g.statements() {
        let _ = writeln!(out, "{}", dump_statement(st));
        for sc in st.def.scopes() {
            let label = format!("{:?}", sc.kind).to_lowercase();
            let _ = writeln!(out, "  {}", block_line(&label, sc.block));
        }
    }
    let _ = writeln!(out, "{}", block_line("root", &g.root));
    out
}
