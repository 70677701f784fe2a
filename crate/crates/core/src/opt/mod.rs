//! Dependency-driven scheduling: dead code elimination, code motion and
//! effect serialization, plus graph-to-graph mirroring along a schedule.

mod depgraph;
mod dump;
mod mirror;
mod schedule;

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::ir::{BlockId, SymId};

pub use depgraph::{scope_dep_graph, DepGraph, EdgeKind};
pub use dump::{dump_schedule, validate_schedule};
pub use mirror::{mirror, Mirror, Transformer};
pub use schedule::{build_schedule, build_schedule_for_result, code_motion, ScheduleOptions};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("cyclic dependency among {0}")]
    CyclicDependency(String),
    #[error("invalid schedule: {0}")]
    Invalid(String),
}

/// Per-block emission order. Statements are named by their first defined
/// symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub root: BlockId,
    blocks: BTreeMap<BlockId, Vec<SymId>>,
    scope_of: HashMap<SymId, BlockId>,
}

impl Schedule {
    pub(crate) fn new(root: BlockId, blocks: BTreeMap<BlockId, Vec<SymId>>) -> Self {
        let mut scope_of = HashMap::new();
        for (b, syms) in &blocks {
            for s in syms {
                scope_of.insert(*s, *b);
            }
        }
        Schedule {
            root,
            blocks,
            scope_of,
        }
    }

    /// Statements emitted directly in `block`, in order.
    pub fn block(&self, block: BlockId) -> &[SymId] {
        self.blocks.get(&block).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn scope_of(&self, sym: SymId) -> Option<BlockId> {
        self.scope_of.get(&sym).copied()
    }

    pub fn contains(&self, sym: SymId) -> bool {
        self.scope_of.contains_key(&sym)
    }

    /// Every scheduled statement, grouped by block id.
    pub fn all_syms(&self) -> impl Iterator<Item = SymId> + '_ {
        self.blocks.values().flatten().copied()
    }

    pub fn len(&self) -> usize {
        self.scope_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scope_of.is_empty()
    }
}
