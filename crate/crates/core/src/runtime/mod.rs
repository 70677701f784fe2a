//! Program execution: a sequential reference interpreter over MiniC and
//! a parallel executor that runs kernel-graph waves on a worker pool.

mod eval;
mod rng;
mod value;

use std::collections::BTreeSet;

use rayon::prelude::*;
use thiserror::Error;

use crate::codegen::{Deg, DegError, KernelBody, Program, Stmt};
use crate::ir::SymId;

pub use eval::chunk_ranges;
pub use rng::Lcg;
pub use value::{ElemKind, RecordValue, Value, VecBuf};

use eval::{Env, Eval};

/// Chunk count used when a caller does not pick one.
pub const DEFAULT_CHUNKS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuntimeError {
    #[error("integer division by zero at {at}")]
    DivByZero { at: String },
    #[error("index {index} out of bounds for length {len} at {at}")]
    IndexOutOfBounds { at: String, index: i64, len: usize },
    #[error("negative vector length {len} at {at}")]
    NegativeLength { at: String, len: i64 },
    #[error("contract violation in loop {at}: iterations {first} and {second} both write index {index}")]
    ContractViolation {
        at: String,
        index: usize,
        first: usize,
        second: usize,
    },
    #[error("loop {at} visited index {index} {count} times")]
    VisitCount { at: String, index: usize, count: u32 },
    #[error("program input {0} was not supplied")]
    MissingInput(u32),
    #[error("ill-typed operation at {at}: {detail}")]
    Type { at: String, detail: String },
    #[error(transparent)]
    Deg(#[from] DegError),
    #[error("kernel graph does not describe this program: {0}")]
    Mismatch(String),
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

/// Inputs that determine a run besides the program and chunk count.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub inputs: Vec<Value>,
    /// Check the exactly-once and disjoint-write contracts of every
    /// kernel-level loop.
    pub debug_contracts: bool,
}

impl RunConfig {
    pub fn seeded(seed: u64) -> Self {
        RunConfig {
            seed,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub output: String,
    pub result: Value,
}

/// Runs the kernels one after another on the calling thread.
pub fn interpret(p: &Program, chunks: usize, cfg: &RunConfig) -> Result<RunResult, RuntimeError> {
    let mut env = Env::default();
    let mut ev = Eval::new(cfg, chunks, false);
    for k in &p.kernels {
        match &k.body {
            KernelBody::Task(ss) => ev.stmts(&mut env, ss)?,
            KernelBody::Loop(l) => ev.run_loop(&mut env, l, true)?,
        }
    }
    Ok(RunResult {
        output: ev.output,
        result: env.get_expr(&p.result),
    })
}

/// Kernel launches grouped into waves. Every kernel of a wave depends
/// only on kernels of earlier waves, so a wave's kernels may overlap and
/// the end of a wave is a join point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExecPlan {
    pub waves: Vec<Vec<usize>>,
    pub workers: usize,
    pub chunks: usize,
}

impl ExecPlan {
    pub fn with_chunks(mut self, chunks: usize) -> Self {
        self.chunks = chunks.max(1);
        self
    }

    pub fn kernel_count(&self) -> usize {
        self.waves.iter().map(Vec::len).sum()
    }
}

/// Topological list schedule of a kernel graph for `workers` threads.
pub fn schedule_deg(deg: &Deg, workers: usize) -> Result<ExecPlan, DegError> {
    let workers = workers.max(1);
    Ok(ExecPlan {
        waves: deg.levels()?,
        workers,
        chunks: (workers * 4).max(1),
    })
}

fn assigned_vars(ss: &[Stmt], out: &mut BTreeSet<SymId>) {
    for s in ss {
        match s {
            Stmt::Assign { var, .. } => {
                out.insert(*var);
            }
            Stmt::If { then_b, else_b, .. } => {
                assigned_vars(&then_b.stmts, out);
                assigned_vars(&else_b.stmts, out);
            }
            Stmt::While { cond, body } => {
                assigned_vars(&cond.stmts, out);
                assigned_vars(&body.stmts, out);
            }
            Stmt::Loop(l) => assigned_vars(&l.body, out),
            _ => {}
        }
    }
}

fn check_matches(deg: &Deg, p: &Program) -> Result<(), RuntimeError> {
    if deg.kernels.len() != p.kernels.len() {
        return Err(RuntimeError::Mismatch(format!(
            "{} kernels in the graph, {} in the program",
            deg.kernels.len(),
            p.kernels.len()
        )));
    }
    for (d, k) in deg.kernels.iter().zip(&p.kernels) {
        let outs: Vec<String> = k.outputs.iter().map(|s| s.to_string()).collect();
        if d.id != k.name() || d.outputs != outs || d.pattern != k.pattern.name() {
            return Err(RuntimeError::Mismatch(format!("kernel {} differs", d.id)));
        }
    }
    Ok(())
}

/// Runs a program wave by wave on a pool of `plan.workers` threads.
/// Kernels of one wave run concurrently; the chunks of a non-serial loop
/// kernel run concurrently too. Results are independent of the worker
/// count.
pub fn execute_deg(
    deg: &Deg,
    p: &Program,
    plan: &ExecPlan,
    cfg: &RunConfig,
) -> Result<RunResult, RuntimeError> {
    check_matches(deg, p)?;
    if plan.kernel_count() != p.kernels.len() {
        return Err(RuntimeError::Mismatch("plan does not cover every kernel".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.workers.max(1))
        .build()
        .map_err(|e| RuntimeError::Pool(e.to_string()))?;
    let written: Vec<BTreeSet<SymId>> = p
        .kernels
        .iter()
        .map(|k| {
            let mut s: BTreeSet<SymId> = k.outputs.iter().copied().collect();
            match &k.body {
                KernelBody::Task(ss) => assigned_vars(ss, &mut s),
                KernelBody::Loop(l) => assigned_vars(&l.body, &mut s),
            }
            s
        })
        .collect();
    pool.install(|| {
        let mut env = Env::default();
        let mut output = String::new();
        for wave in &plan.waves {
            let done: Vec<Result<(Env, String), RuntimeError>> = wave
                .par_iter()
                .map(|&id| {
                    let k = &p.kernels[id];
                    let mut local = env.clone();
                    let mut ev = Eval::new(cfg, plan.chunks, !k.serial);
                    match &k.body {
                        KernelBody::Task(ss) => ev.stmts(&mut local, ss)?,
                        KernelBody::Loop(l) => ev.run_loop(&mut local, l, true)?,
                    }
                    Ok((local, ev.output))
                })
                .collect();
            for (&id, r) in wave.iter().zip(done) {
                let (local, text) = r?;
                for s in &written[id] {
                    env.set(*s, local.get(*s).clone());
                }
                output.push_str(&text);
            }
        }
        Ok(RunResult {
            result: env.get_expr(&p.result),
            output,
        })
    })
}
