#![allow(dead_code)]

use stagekit::driver::{compile, Compiled, DriverOptions};
use stagekit::ir::StageError;
use stagekit::runtime::{execute_deg, interpret, schedule_deg, RunConfig, RunResult};
use stagekit::staging::{Staged, Stager};

pub fn build(
    opts: &DriverOptions,
    f: impl FnOnce(&mut Stager) -> Result<Staged, StageError>,
) -> Compiled {
    compile("test", opts, f).expect("program compiles")
}

/// Every optimization switched off.
pub fn unoptimized() -> DriverOptions {
    DriverOptions {
        fusion: false,
        cse: false,
        dce: false,
        code_motion: false,
        ..DriverOptions::default()
    }
}

pub fn run_interp(c: &Compiled, chunks: usize, cfg: &RunConfig) -> RunResult {
    interpret(&c.program, chunks, cfg).expect("interpreter run")
}

pub fn run_exec(c: &Compiled, workers: usize, chunks: usize, cfg: &RunConfig) -> RunResult {
    let plan = schedule_deg(&c.deg, workers).expect("schedule").with_chunks(chunks);
    execute_deg(&c.deg, &c.program, &plan, cfg).expect("executor run")
}
