use std::collections::BTreeSet;
use std::fmt;

use super::types::SymId;

pub type SymSet = BTreeSet<SymId>;

/// Severity of a statement's effect. `Global` statements are ordered
/// against every other effectful statement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EffectKind {
    Pure,
    Simple,
    Global,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EffectSummary {
    pub kind: EffectKind,
    pub may_read: SymSet,
    pub must_read: SymSet,
    pub may_write: SymSet,
    pub must_write: SymSet,
    pub allocates_mutable: bool,
}

impl Default for EffectSummary {
    fn default() -> Self {
        Self::pure()
    }
}

impl EffectSummary {
    pub fn pure() -> Self {
        EffectSummary {
            kind: EffectKind::Pure,
            may_read: SymSet::new(),
            must_read: SymSet::new(),
            may_write: SymSet::new(),
            must_write: SymSet::new(),
            allocates_mutable: false,
        }
    }

    /// A console effect: serialized with every other console effect.
    pub fn simple() -> Self {
        Self::write([SymId::CONSOLE])
    }

    pub fn global() -> Self {
        EffectSummary {
            kind: EffectKind::Global,
            ..Self::pure()
        }
    }

    pub fn alloc() -> Self {
        EffectSummary {
            kind: EffectKind::Simple,
            allocates_mutable: true,
            ..Self::pure()
        }
    }

    pub fn read(syms: impl IntoIterator<Item = SymId>) -> Self {
        let set: SymSet = syms.into_iter().collect();
        let mut s = EffectSummary {
            may_read: set.clone(),
            must_read: set,
            ..Self::pure()
        };
        s.normalize();
        s
    }

    pub fn write(syms: impl IntoIterator<Item = SymId>) -> Self {
        let set: SymSet = syms.into_iter().collect();
        let mut s = EffectSummary {
            may_write: set.clone(),
            must_write: set,
            ..Self::pure()
        };
        s.normalize();
        s
    }

    pub fn is_pure(&self) -> bool {
        self.kind == EffectKind::Pure
    }

    /// Raises `kind` to `Simple` when the summary carries any effect.
    fn normalize(&mut self) {
        let effectful = self.allocates_mutable
            || !self.may_read.is_empty()
            || !self.may_write.is_empty();
        if effectful && self.kind == EffectKind::Pure {
            self.kind = EffectKind::Simple;
        }
    }

    /// Summary of two alternatives, exactly one of which runs.
    pub fn or_else(&self, other: &EffectSummary) -> EffectSummary {
        let mut s = EffectSummary {
            kind: self.kind.max(other.kind),
            may_read: &self.may_read | &other.may_read,
            must_read: &self.must_read & &other.must_read,
            may_write: &self.may_write | &other.may_write,
            must_write: &self.must_write & &other.must_write,
            allocates_mutable: self.allocates_mutable || other.allocates_mutable,
        };
        s.normalize();
        s
    }

    /// Summary of running `self` and then `other`.
    pub fn and_then(&self, other: &EffectSummary) -> EffectSummary {
        let mut s = EffectSummary {
            kind: self.kind.max(other.kind),
            may_read: &self.may_read | &other.may_read,
            must_read: &self.must_read | &other.must_read,
            may_write: &self.may_write | &other.may_write,
            must_write: &self.must_write | &other.must_write,
            allocates_mutable: self.allocates_mutable || other.allocates_mutable,
        };
        s.normalize();
        s
    }

    /// Drops must-information, for code that may run zero times.
    pub fn widen(&self) -> EffectSummary {
        EffectSummary {
            must_read: SymSet::new(),
            must_write: SymSet::new(),
            ..self.clone()
        }
    }

    /// Removes every reference to allocations that do not outlive a scope.
    pub fn forget(&self, local: &SymSet, result_is_local_alloc: bool) -> EffectSummary {
        let mut s = EffectSummary {
            kind: if self.kind == EffectKind::Global {
                EffectKind::Global
            } else {
                EffectKind::Pure
            },
            may_read: &self.may_read - local,
            must_read: &self.must_read - local,
            may_write: &self.may_write - local,
            must_write: &self.must_write - local,
            allocates_mutable: result_is_local_alloc,
        };
        s.normalize();
        s
    }

    /// Whether two effectful statements must keep their relative order.
    pub fn conflicts_with(&self, later: &EffectSummary) -> bool {
        if self.is_pure() || later.is_pure() {
            return false;
        }
        if self.kind == EffectKind::Global || later.kind == EffectKind::Global {
            return true;
        }
        !self.may_write.is_disjoint(&later.may_read)
            || !self.may_read.is_disjoint(&later.may_write)
            || !self.may_write.is_disjoint(&later.may_write)
    }
}

fn fmt_set(f: &mut fmt::Formatter<'_>, label: &str, set: &SymSet) -> fmt::Result {
    if set.is_empty() {
        return Ok(());
    }
    let names: Vec<String> = set.iter().map(|s| s.to_string()).collect();
    write!(f, " {label}={}", names.join(","))
}

impl fmt::Display for EffectSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.kind)?;
        fmt_set(f, "reads", &self.may_read)?;
        fmt_set(f, "writes", &self.may_write)?;
        if self.allocates_mutable {
            write!(f, " alloc")?;
        }
        Ok(())
    }
}

/// Which other objects a statement's result may point to.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct AliasInfo {
    pub aliases: SymSet,
    pub contains: SymSet,
    pub extracts_from: SymSet,
    pub copies_from: SymSet,
}

impl AliasInfo {
    pub fn is_empty(&self) -> bool {
        self.aliases.is_empty()
            && self.contains.is_empty()
            && self.extracts_from.is_empty()
            && self.copies_from.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(n: u32) -> SymId {
        SymId(n)
    }

    #[test]
    fn write_on_one_branch_is_only_a_may_write() {
        let w = EffectSummary::write([s(7)]);
        let r = w.or_else(&EffectSummary::pure());
        assert_eq!(r.may_write, [s(7)].into());
        assert!(r.must_write.is_empty());
        assert_eq!(r.kind, EffectKind::Simple);
    }

    #[test]
    fn sequencing_a_read_and_a_write() {
        let r = EffectSummary::read([s(1)]).and_then(&EffectSummary::write([s(2)]));
        assert_eq!(r.may_read, [s(1)].into());
        assert_eq!(r.must_read, [s(1)].into());
        assert_eq!(r.must_write, [s(2)].into());
        assert_eq!(r.kind, EffectKind::Simple);
    }

    #[test]
    fn prints_conflict_with_each_other() {
        assert!(EffectSummary::simple().conflicts_with(&EffectSummary::simple()));
        assert!(!EffectSummary::write([s(1)]).conflicts_with(&EffectSummary::write([s(2)])));
        assert!(EffectSummary::write([s(1)]).conflicts_with(&EffectSummary::read([s(1)])));
    }

    /// Brute-force oracle: the legal orderings of three statements are the
    /// permutations that keep every conflicting pair in program order.
    fn legal_orders(stmts: &[EffectSummary]) -> Vec<Vec<usize>> {
        let perms: [[usize; 3]; 6] = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        perms
            .iter()
            .filter(|p| {
                (0..3).all(|a| {
                    (a + 1..3).all(|b| {
                        let pa = p.iter().position(|&x| x == a).unwrap();
                        let pb = p.iter().position(|&x| x == b).unwrap();
                        !stmts[a].conflicts_with(&stmts[b]) || pa < pb
                    })
                })
            })
            .map(|p| p.to_vec())
            .collect()
    }

    fn small_summary() -> impl Strategy<Value = EffectSummary> {
        (0u8..4, 0u8..4, any::<bool>()).prop_map(|(r, w, global)| {
            let pick = |mask: u8| (0..2).filter(move |i| mask & (1 << i) != 0).map(|i| s(i + 1));
            let mut e = EffectSummary::read(pick(r)).and_then(&EffectSummary::write(pick(w)));
            if global {
                e = e.and_then(&EffectSummary::global());
            }
            e
        })
    }

    fn summary() -> impl Strategy<Value = EffectSummary> {
        (
            0u8..3,
            proptest::collection::btree_set(1u32..5, 0..3),
            proptest::collection::btree_set(1u32..5, 0..3),
            any::<bool>(),
        )
            .prop_map(|(k, r, w, alloc)| {
                let mut e = EffectSummary::read(r.into_iter().map(SymId))
                    .and_then(&EffectSummary::write(w.into_iter().map(SymId)));
                if alloc {
                    e = e.and_then(&EffectSummary::alloc());
                }
                if k == 2 {
                    e = e.and_then(&EffectSummary::global());
                }
                e
            })
    }

    proptest! {
        #[test]
        fn combined_statement_constrains_like_its_parts(
            a in small_summary(), b in small_summary(), c in small_summary()
        ) {
            // The oracle enumerates orderings of the three separate statements;
            // the third may run first exactly when the combined summary of the
            // first two does not conflict with it.
            let orders = legal_orders(&[a.clone(), b.clone(), c.clone()]);
            let third_may_run_first = orders.iter().any(|o| o[0] == 2);
            prop_assert_eq!(third_may_run_first, !a.and_then(&b).conflicts_with(&c));
        }

        #[test]
        fn and_then_is_associative(a in summary(), b in summary(), c in summary()) {
            prop_assert_eq!(a.and_then(&b).and_then(&c), a.and_then(&b.and_then(&c)));
        }

        #[test]
        fn or_else_is_associative(a in summary(), b in summary(), c in summary()) {
            prop_assert_eq!(a.or_else(&b).or_else(&c), a.or_else(&b.or_else(&c)));
        }

        #[test]
        fn pure_is_identity_for_and_then(a in summary()) {
            prop_assert_eq!(a.and_then(&EffectSummary::pure()), a.clone());
            prop_assert_eq!(EffectSummary::pure().and_then(&a), a);
        }

        #[test]
        fn pure_is_identity_for_or_else_on_kind_and_may_sets(a in summary()) {
            let r = a.or_else(&EffectSummary::pure());
            prop_assert_eq!(r.kind, a.kind);
            prop_assert_eq!(&r.may_read, &a.may_read);
            prop_assert_eq!(&r.may_write, &a.may_write);
            prop_assert!(r.must_read.is_empty() && r.must_write.is_empty());
        }

        #[test]
        fn must_sets_stay_within_may_sets(a in summary(), b in summary()) {
            for e in [a.or_else(&b), a.and_then(&b), a.widen()] {
                prop_assert!(e.must_read.is_subset(&e.may_read));
                prop_assert!(e.must_write.is_subset(&e.may_write));
            }
        }
    }
}
