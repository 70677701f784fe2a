//! Graph IR: atoms, definitions, the statement table with hash-consing,
//! and effect and alias bookkeeping.

mod dump;
mod effects;
mod error;
mod graph;
mod node;
mod types;

pub use dump::{dump_statement, dump_table};
pub use effects::{AliasInfo, EffectKind, EffectSummary, SymSet};
pub use error::StageError;
pub use graph::{Graph, GraphContext, Statement, StatementTable, SymDef};
pub use node::{
    fold_binary, fold_unary, BinOp, Block, LoopDef, LoopElem, NodeDef, ScopeKind, ScopeRef, UnOp,
};
pub use types::{fmt_double, BlockId, Expr, Lit, RecordType, SemType, SymId};
