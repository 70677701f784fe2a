//! Effectful loops keep their print order: fusion leaves them apart and
//! the executor runs them serially.

mod common;

use common::{build, run_exec, run_interp};
use stagekit::driver::DriverOptions;
use stagekit::runtime::RunConfig;

fn two_printing_loops(s: &mut stagekit::staging::Stager) -> Result<stagekit::staging::Staged, stagekit::ir::StageError> {
    let n = s.lift(6i64);
    s.mk_foreach(&n, |s, i| {
        s.print(i)?;
        Ok(())
    })?;
    s.mk_foreach(&n, |s, i| {
        let k = s.lift(100i64);
        let x = s.add(&k, i)?;
        s.print(&x)?;
        Ok(())
    })?;
    Ok(s.unit())
}

fn expected() -> String {
    (0..6).chain(100..106).map(|x| format!("{x}\n")).collect()
}

#[test]
fn fusion_refuses_to_merge_printing_loops() {
    let c = build(&DriverOptions::default(), two_printing_loops);
    assert_eq!(c.fusion.fused, 0);
    assert_eq!(c.stats().final_.parallel_loop_count, 2);
    assert!(c.program.kernels.iter().all(|k| k.serial));
}

#[test]
fn printing_loops_print_in_index_order() {
    let c = build(&DriverOptions::default(), two_printing_loops);
    let cfg = RunConfig::default();
    assert_eq!(run_interp(&c, 4, &cfg).output, expected());
    for workers in [1, 4] {
        assert_eq!(run_exec(&c, workers, 4, &cfg).output, expected());
    }
}

#[test]
fn pure_loop_does_not_fuse_across_a_print() {
    let c = build(&DriverOptions::default(), |s| {
        let n = s.lift(8i64);
        let v = s.rand(&n)?;
        let a = s.sum(&v)?;
        s.mk_foreach(&n, |s, i| {
            s.print(i)?;
            Ok(())
        })?;
        s.print(&a)?;
        Ok(s.unit())
    });
    assert_eq!(c.stats().final_.parallel_loop_count, 2);
    let out = run_interp(&c, 3, &RunConfig::seeded(1)).output;
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(&lines[..8], ["0", "1", "2", "3", "4", "5", "6", "7"]);
    assert_eq!(lines.len(), 9);
}

#[test]
fn pure_loops_of_equal_size_fuse() {
    let c = build(&DriverOptions::default(), |s| {
        let n = s.lift(8i64);
        let v = s.rand(&n)?;
        let a = s.sum(&v)?;
        let sq = s.map(&v, |s, x| s.square(x))?;
        let b = s.sum(&sq)?;
        s.add(&a, &b)
    });
    assert_eq!(c.stats().final_.parallel_loop_count, 1);
    assert!(c.fusion.fused >= 1);
}
