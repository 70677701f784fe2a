//! The compilation pipeline from a staged program to MiniC and a kernel
//! graph, with per-phase statistics.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::codegen::{emit_deg, generate, Deg, EmitterRegistry, Program};
use crate::fusion::{fuse_loops, FusionStats};
use crate::ir::{Graph, LoopElem, NodeDef, StageError, StatementTable};
use crate::opt::{build_schedule, dump_schedule, mirror, Schedule, ScheduleOptions};
use crate::records::{record_node_count, strict_record_check};
use crate::staging::{StageOptions, Staged, Stager};
use crate::vectordsl::NormTier;
use crate::CompileError;

/// Pass toggles and staging options.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DriverOptions {
    pub fusion: bool,
    pub cse: bool,
    pub dce: bool,
    pub code_motion: bool,
    pub strict_records: bool,
    pub fast_math: bool,
    pub norm_tier: NormTier,
}

impl Default for DriverOptions {
    fn default() -> Self {
        DriverOptions {
            fusion: true,
            cse: true,
            dce: true,
            code_motion: true,
            strict_records: false,
            fast_math: false,
            norm_tier: NormTier::Library,
        }
    }
}

impl DriverOptions {
    fn stage_options(&self) -> StageOptions {
        StageOptions {
            cse: self.cse,
            fast_math: self.fast_math,
            norm_tier: self.norm_tier,
            ..StageOptions::default()
        }
    }

    fn schedule_options(&self) -> ScheduleOptions {
        ScheduleOptions {
            code_motion: self.code_motion,
            dce: self.dce,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    Staged,
    Motioned,
    Fused,
    Scheduled,
}

impl Phase {
    pub const ALL: [Phase; 4] = [Phase::Staged, Phase::Motioned, Phase::Fused, Phase::Scheduled];

    pub fn name(self) -> &'static str {
        match self {
            Phase::Staged => "staged",
            Phase::Motioned => "motioned",
            Phase::Fused => "fused",
            Phase::Scheduled => "scheduled",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Phase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Phase::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown phase `{s}` (expected staged, motioned, fused or scheduled)"))
    }
}

/// Shape counts of one scheduled graph.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PhaseStats {
    pub parallel_loop_count: usize,
    /// Vectors materialized by loops or `VectorNew`, other than the
    /// program result. Random and literal vectors are inputs, not
    /// intermediates.
    pub vector_alloc_count: usize,
    pub record_node_count: usize,
    pub statement_count: usize,
}

impl PhaseStats {
    pub fn of(g: &Graph, sched: &Schedule) -> Self {
        let result = g.root.result.sym();
        let mut stats = PhaseStats {
            record_node_count: record_node_count(g, sched),
            statement_count: sched.len(),
            ..Self::default()
        };
        for sym in sched.all_syms() {
            let st = g.lookup(sym).expect("scheduled symbol is defined");
            match &st.def {
                NodeDef::ParallelLoop(l) => {
                    stats.parallel_loop_count += 1;
                    stats.vector_alloc_count += l
                        .elems
                        .iter()
                        .filter(|e| matches!(e, LoopElem::Collect { out, .. } if Some(*out) != result))
                        .count();
                }
                NodeDef::VectorNew { .. } if Some(sym) != result => stats.vector_alloc_count += 1,
                _ => {}
            }
        }
        stats
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StatsReport {
    pub program: String,
    pub staged: PhaseStats,
    pub motioned: PhaseStats,
    pub fused: PhaseStats,
    #[serde(rename = "final")]
    pub final_: PhaseStats,
}

impl StatsReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("stats serialize");
        s.push('\n');
        s
    }
}

/// A graph with the schedule it was measured and dumped under.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub graph: Graph,
    pub schedule: Schedule,
}

impl Snapshot {
    fn new(graph: Graph, opts: ScheduleOptions) -> Result<Self, CompileError> {
        let schedule = build_schedule(&graph, opts)?;
        Ok(Snapshot { graph, schedule })
    }

    pub fn stats(&self) -> PhaseStats {
        PhaseStats::of(&self.graph, &self.schedule)
    }

    pub fn dump(&self) -> String {
        dump_schedule(&self.graph, &self.schedule)
    }
}

/// Everything the pipeline produced for one program.
#[derive(Clone, Debug)]
pub struct Compiled {
    pub name: String,
    pub staged: Snapshot,
    pub motioned: Snapshot,
    pub fused: Snapshot,
    pub scheduled: Snapshot,
    pub fusion: FusionStats,
    pub program: Program,
    pub deg: Deg,
}

impl Compiled {
    pub fn snapshot(&self, phase: Phase) -> &Snapshot {
        match phase {
            Phase::Staged => &self.staged,
            Phase::Motioned => &self.motioned,
            Phase::Fused => &self.fused,
            Phase::Scheduled => &self.scheduled,
        }
    }

    pub fn stats(&self) -> StatsReport {
        StatsReport {
            program: self.name.clone(),
            staged: self.staged.stats(),
            motioned: self.motioned.stats(),
            fused: self.fused.stats(),
            final_: self.scheduled.stats(),
        }
    }

    pub fn minic(&self) -> String {
        self.program.to_minic()
    }
}

/// The emitters used for a given record policy.
pub fn registry(opts: &DriverOptions) -> EmitterRegistry {
    let mut r = EmitterRegistry::base();
    r.add_vector_nodes();
    if !opts.strict_records {
        r.add_records();
    }
    r
}

/// Stages `build`, then schedules, moves code, fuses loops, checks
/// records and generates code.
pub fn compile(
    name: &str,
    opts: &DriverOptions,
    build: impl FnOnce(&mut Stager) -> Result<Staged, StageError>,
) -> Result<Compiled, CompileError> {
    let sopts = opts.schedule_options();
    let staged = Snapshot::new(Stager::stage_program(opts.stage_options(), build)?, ScheduleOptions {
        code_motion: false,
        ..sopts
    })?;
    let motion = build_schedule(&staged.graph, sopts)?;
    let motioned = Snapshot::new(mirror(&staged.graph, &motion, opts.cse)?, sopts)?;
    let (fused_graph, fusion) = if opts.fusion {
        fuse_loops(motioned.graph.clone(), opts.cse)?
    } else {
        (motioned.graph.clone(), FusionStats::default())
    };
    let fused = Snapshot::new(fused_graph, sopts)?;
    let scheduled = Snapshot::new(mirror(&fused.graph, &fused.schedule, opts.cse)?, sopts)?;
    if opts.strict_records {
        strict_record_check(&scheduled.graph, &scheduled.schedule)?;
    }
    let program = generate(name, &scheduled.graph, &scheduled.schedule, &registry(opts))?;
    let deg = emit_deg(&scheduled.graph, &scheduled.schedule, &program);
    log::debug!(
        "{name}: {} kernels, {} loop pairs fused",
        program.kernels.len(),
        fusion.fused
    );
    Ok(Compiled {
        name: name.to_string(),
        staged,
        motioned,
        fused,
        scheduled,
        fusion,
        program,
        deg,
    })
}

/// Compiles a registered demo. Demos marked strict always get the record
/// check.
pub fn compile_demo(demo: &crate::demos::Demo, opts: &DriverOptions) -> Result<Compiled, CompileError> {
    let mut opts = opts.clone();
    opts.strict_records |= demo.strict;
    compile(demo.name, &opts, demo.build)
}
