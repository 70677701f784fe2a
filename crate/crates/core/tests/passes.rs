//! Scheduling, dead-code elimination, record splitting and emitter
//! coverage on small programs.

mod common;

use common::{build, run_interp, unoptimized};
use stagekit::codegen::{generate, EmitterRegistry};
use stagekit::demos;
use stagekit::driver::{compile, compile_demo, DriverOptions, Phase};
use stagekit::ir::SemType;
use stagekit::opt::validate_schedule;
use stagekit::runtime::{RunConfig, Value, VecBuf};
use stagekit::CompileError;

#[test]
fn every_phase_schedule_validates() {
    for opts in [DriverOptions::default(), unoptimized()] {
        for d in demos::programs() {
            let c = compile_demo(d, &opts).unwrap();
            for p in Phase::ALL {
                let snap = c.snapshot(p);
                validate_schedule(&snap.graph, &snap.schedule)
                    .unwrap_or_else(|e| panic!("{} {p}: {e}", d.name));
            }
        }
    }
}

fn unused_loop(s: &mut stagekit::staging::Stager) -> Result<stagekit::staging::Staged, stagekit::ir::StageError> {
    let n = s.lift(10i64);
    let v = s.rand(&n)?;
    let _unused = s.map(&v, |s, x| s.sqrt(x))?;
    s.sum(&v)
}

#[test]
fn dce_drops_unused_loops() {
    let on = build(&DriverOptions::default(), unused_loop);
    assert_eq!(on.stats().staged.parallel_loop_count, 1);
    let off = build(
        &DriverOptions {
            dce: false,
            fusion: false,
            ..DriverOptions::default()
        },
        unused_loop,
    );
    assert_eq!(off.stats().final_.parallel_loop_count, 2);
    let cfg = RunConfig::seeded(8);
    assert_eq!(run_interp(&on, 4, &cfg).result, run_interp(&off, 4, &cfg).result);
}

#[test]
fn cse_shares_repeated_scalar_work() {
    let prog = |s: &mut stagekit::staging::Stager| {
        let v = s.input(0, SemType::vector(SemType::Int))?;
        s.map(&v, |s, x| {
            let a = s.mul(x, x)?;
            let b = s.mul(x, x)?;
            s.add(&a, &b)
        })
    };
    let shared = build(&DriverOptions::default(), prog);
    let separate = build(&unoptimized(), prog);
    let count = |c: &stagekit::driver::Compiled| c.minic().matches(" * ").count();
    assert_eq!(count(&shared), 1);
    assert_eq!(count(&separate), 2);
    let cfg = RunConfig {
        inputs: vec![Value::Vector(VecBuf::ints(&[1, 2, 3]))],
        ..RunConfig::default()
    };
    let want = Value::Vector(VecBuf::ints(&[2, 8, 18]));
    assert_eq!(run_interp(&shared, 2, &cfg).result, want);
    assert_eq!(run_interp(&separate, 2, &cfg).result, want);
}

#[test]
fn shifted_reads_block_contraction() {
    let c = build(&DriverOptions::default(), |s| {
        let v = s.input(0, SemType::vector(SemType::Int))?;
        let doubled = s.map(&v, |s, x| {
            let two = s.lift(2i64);
            s.mul(&two, x)
        })?;
        let n = s.length(&v)?;
        s.mk_collect(&n, |s, i| {
            let one = s.lift(1i64);
            let last = s.sub(&n, &one)?;
            let j = s.sub(&last, i)?;
            s.apply(&doubled, &j)
        })
    });
    assert_eq!(c.fusion.contracted, 0);
    assert_eq!(c.stats().final_.parallel_loop_count, 2);
    let cfg = RunConfig {
        inputs: vec![Value::Vector(VecBuf::ints(&[1, 2, 3, 4]))],
        ..RunConfig::default()
    };
    assert_eq!(run_interp(&c, 3, &cfg).result, Value::Vector(VecBuf::ints(&[8, 6, 4, 2])));
}

#[test]
fn loops_of_different_sizes_stay_apart() {
    let c = build(&DriverOptions::default(), |s| {
        let (n, m) = (s.lift(4i64), s.lift(5i64));
        let a = s.rand(&n)?;
        let b = s.rand(&m)?;
        let x = s.sum(&a)?;
        let y = s.sum(&b)?;
        s.add(&x, &y)
    });
    assert_eq!(c.fusion.fused, 0);
    assert_eq!(c.stats().final_.parallel_loop_count, 2);
}

#[test]
fn conditional_records_split_into_fields() {
    let d = demos::find("complex_cond").unwrap();
    let c = compile_demo(d, &DriverOptions::default()).unwrap();
    assert!(c.stats().staged.record_node_count > 0 || c.stats().final_.record_node_count == 0);
    assert_eq!(c.stats().final_.record_node_count, 0);
    assert!(!c.minic().contains("Complex("));
}

#[test]
fn strict_check_names_the_residual_record() {
    let d = demos::find("record_residualized").unwrap();
    let err = compile_demo(d, &DriverOptions::default()).unwrap_err();
    assert!(matches!(err, CompileError::Record(_)));
    assert!(err.to_string().contains("Record(Complex"), "{err}");
}

#[test]
fn records_returned_from_programs_fail_the_strict_check() {
    let strict = DriverOptions {
        strict_records: true,
        ..DriverOptions::default()
    };
    let err = compile("r", &strict, |s| {
        let (a, b) = (s.lift(1.0), s.lift(2.0));
        s.mk_record("P", vec![("a".into(), a), ("b".into(), b)])
    })
    .unwrap_err();
    assert!(matches!(err, CompileError::Record(_)), "{err}");
}

#[test]
fn missing_emitters_fail_generation() {
    let d = demos::find("record_residualized").unwrap();
    let mut lenient = *d;
    lenient.strict = false;
    let c = compile_demo(&lenient, &DriverOptions::default()).unwrap();
    let mut reg = EmitterRegistry::base();
    reg.add_vector_nodes();
    let err = generate("r", &c.scheduled.graph, &c.scheduled.schedule, &reg).unwrap_err();
    assert!(err.to_string().contains("Record"), "{err}");
}

#[test]
fn code_motion_hoists_the_invariant_sum() {
    let d = demos::find("scale_by_sum").unwrap();
    let moved = compile_demo(d, &DriverOptions::default()).unwrap();
    assert_eq!(moved.program.kernels.iter().filter(|k| k.pattern.name() != "single-task").count(), 2);
    let still = compile_demo(
        d,
        &DriverOptions {
            code_motion: false,
            ..DriverOptions::default()
        },
    )
    .unwrap();
    assert_eq!(still.program.kernels.iter().filter(|k| k.pattern.name() != "single-task").count(), 1);
    let cfg = RunConfig::seeded(3);
    assert_eq!(run_interp(&moved, 8, &cfg), run_interp(&still, 8, &cfg));
}
