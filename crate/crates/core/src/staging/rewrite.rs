use std::rc::Rc;

use super::{Staged, Stager};
use crate::ir::{NodeDef, StageError};

/// A smart-constructor override. Returning `Ok(None)` falls through to the
/// next older hook and finally to the default lowering.
pub type Hook = Rc<dyn Fn(&mut Stager, &NodeDef) -> Result<Option<Staged>, StageError>>;

/// Rewrite hooks keyed by node family, consulted newest-first.
#[derive(Default, Clone)]
pub struct RewriteRegistry {
    hooks: Vec<(&'static str, Hook)>,
}

impl RewriteRegistry {
    pub fn register(&mut self, family: &'static str, hook: Hook) {
        self.hooks.push((family, hook));
    }

    pub fn hooks_for(&self, family: &str) -> Vec<Hook> {
        self.hooks
            .iter()
            .rev()
            .filter(|(f, _)| *f == family)
            .map(|(_, h)| h.clone())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.hooks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hooks.is_empty()
    }
}
