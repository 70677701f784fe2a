use super::{Staged, Stager};
use crate::ir::StageError;

impl Stager {
    /// Dynamic choice: runs the continuation once per element of `v`
    /// inside a staged traversal.
    pub fn amb(
        &mut self,
        v: &Staged,
        k: impl FnOnce(&mut Stager, Staged) -> Result<(), StageError>,
    ) -> Result<(), StageError> {
        self.foreach(v, k)?;
        Ok(())
    }

    /// Static choice: invokes the continuation once per element at staging
    /// time, emitting one specialized copy of the rest of the program for
    /// each.
    pub fn bam(
        &mut self,
        xs: &[Staged],
        mut k: impl FnMut(&mut Stager, Staged) -> Result<(), StageError>,
    ) -> Result<(), StageError> {
        let outer = self.bam_paths;
        self.bam_paths = outer.saturating_mul(xs.len().max(1));
        if self.bam_paths > self.opts.bam_budget && !self.bam_warned {
            self.bam_warned = true;
            log::warn!(
                "static choice specializes {} code paths, above the budget of {}",
                self.bam_paths,
                self.opts.bam_budget
            );
        }
        let res = xs.iter().try_for_each(|x| k(self, x.clone()));
        self.bam_paths = outer;
        res
    }

    /// Number of specialized paths currently open through nested `bam`.
    pub fn specialized_paths(&self) -> usize {
        self.bam_paths
    }

    /// Continues only when `c` holds.
    pub fn require(
        &mut self,
        c: &Staged,
        k: impl FnOnce(&mut Stager) -> Result<(), StageError>,
    ) -> Result<(), StageError> {
        self.if_then_else(
            c,
            |s| {
                k(s)?;
                Ok(s.unit())
            },
            |s| Ok(s.unit()),
        )?;
        Ok(())
    }

    /// Duplicates the continuation under a dynamic test so each copy sees
    /// a static truth value.
    pub fn split(
        &mut self,
        c: &Staged,
        mut k: impl FnMut(&mut Stager, bool) -> Result<Staged, StageError>,
    ) -> Result<Staged, StageError> {
        if let Some(b) = c.as_const().and_then(|l| l.as_bool()) {
            return k(self, b);
        }
        let then_b = self.reify(Vec::new(), |s| k(s, true))?;
        let else_b = self.reify(Vec::new(), |s| k(s, false))?;
        self.if_blocks(c, then_b, else_b)
    }
}
