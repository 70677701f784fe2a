//! Results checked against values computed independently on the host.

mod common;

use common::{build, run_exec, run_interp};
use stagekit::driver::DriverOptions;
use stagekit::ir::SemType;
use stagekit::runtime::{chunk_ranges, Lcg, RunConfig, RuntimeError, Value, VecBuf};

fn host_rand(seed: u64, stream: u64, n: usize) -> Vec<f64> {
    let mut g = Lcg::for_stream(seed, stream);
    (0..n).map(|_| g.next_f64()).collect()
}

#[test]
fn axpy_matches_host_loop() {
    let demo = stagekit::demos::find("axpy").unwrap();
    let c = stagekit::driver::compile_demo(demo, &DriverOptions::default()).unwrap();
    for seed in [1, 7, 12345] {
        let x = host_rand(seed, 0, 100);
        let y = host_rand(seed, 1, 100);
        let want: Vec<f64> = x.iter().zip(&y).map(|(x, y)| 2.5 * x + y).collect();
        let got = run_exec(&c, 2, 64, &RunConfig::seeded(seed)).result;
        let got = got.as_vector().expect("vector result");
        assert_eq!(got.len(), 100);
        for (i, w) in want.iter().enumerate() {
            assert_eq!(got.get_f64(i).to_bits(), w.to_bits(), "element {i}");
        }
    }
}

fn int_sum_program(opts: &DriverOptions) -> stagekit::driver::Compiled {
    build(opts, |s| {
        let v = s.input(0, SemType::vector(SemType::Int))?;
        s.sum(&v)
    })
}

#[test]
fn int_sum_of_first_million_naturals() {
    let c = int_sum_program(&DriverOptions::default());
    let xs: Vec<i64> = (1..=1_000_000).collect();
    let cfg = RunConfig {
        inputs: vec![Value::Vector(VecBuf::ints(&xs))],
        ..RunConfig::default()
    };
    for workers in [1, 2, 8] {
        let r = run_exec(&c, workers, workers * 4, &cfg);
        assert_eq!(r.result, Value::Int(500_000_500_000), "workers {workers}");
    }
}

#[test]
fn double_reduce_is_bit_identical_across_workers() {
    let c = build(&DriverOptions::default(), |s| {
        let n = s.lift(100_000i64);
        let v = s.rand(&n)?;
        let sq = s.map(&v, |s, x| s.square(x))?;
        s.sum(&sq)
    });
    let cfg = RunConfig::seeded(3);
    let one = run_exec(&c, 1, 64, &cfg).result;
    let eight = run_exec(&c, 8, 64, &cfg).result;
    assert_eq!(one.as_double().unwrap().to_bits(), eight.as_double().unwrap().to_bits());
    assert_eq!(one, run_interp(&c, 64, &cfg).result);
}

#[test]
fn chunked_double_sum_matches_host_chunking() {
    let c = build(&DriverOptions::default(), |s| {
        let n = s.lift(1000i64);
        let v = s.rand(&n)?;
        s.sum(&v)
    });
    let xs = host_rand(9, 0, 1000);
    for chunks in [1, 3, 64] {
        let mut total = 0.0;
        for r in chunk_ranges(xs.len(), chunks) {
            let mut acc: Option<f64> = None;
            for x in &xs[r] {
                acc = Some(acc.map_or(*x, |a| a + x));
            }
            if let Some(a) = acc {
                total += a;
            }
        }
        let got = run_interp(&c, chunks, &RunConfig::seeded(9)).result;
        assert_eq!(got.as_double().unwrap().to_bits(), total.to_bits(), "chunks {chunks}");
    }
}

#[test]
fn chunk_ranges_partition_the_index_space() {
    for n in [0, 1, 5, 64, 1000] {
        for chunks in [0, 1, 3, 64, 2000] {
            let rs = chunk_ranges(n, chunks);
            let mut next = 0;
            for r in &rs {
                assert_eq!(r.start, next);
                assert!(r.end > r.start);
                next = r.end;
            }
            assert_eq!(next, n);
            assert!(rs.len() <= chunks.max(1));
        }
    }
}

#[test]
fn filter_keeps_order() {
    let c = build(&DriverOptions::default(), |s| {
        let v = s.input(0, SemType::vector(SemType::Int))?;
        s.filter(&v, |s, x| {
            let k = s.lift(17i64);
            s.lt(x, &k)
        })
    });
    let xs: Vec<i64> = (0..50).rev().collect();
    let want: Vec<i64> = xs.iter().copied().filter(|&x| x < 17).collect();
    let cfg = RunConfig {
        inputs: vec![Value::Vector(VecBuf::ints(&xs))],
        ..RunConfig::default()
    };
    let got = run_exec(&c, 3, 7, &cfg).result;
    assert_eq!(got, Value::Vector(VecBuf::ints(&want)));
}

#[test]
fn reading_at_the_length_traps() {
    let c = build(&DriverOptions::default(), |s| {
        let v = s.input(0, SemType::vector(SemType::Int))?;
        let n = s.length(&v)?;
        s.apply(&v, &n)
    });
    let cfg = RunConfig {
        inputs: vec![Value::Vector(VecBuf::ints(&[1, 2, 3]))],
        ..RunConfig::default()
    };
    let err = stagekit::runtime::interpret(&c.program, 4, &cfg).unwrap_err();
    assert!(
        matches!(err, RuntimeError::IndexOutOfBounds { index: 3, len: 3, .. }),
        "{err}"
    );
}

#[test]
fn duplicate_parallel_writes_violate_the_contract() {
    let c = build(&DriverOptions::default(), |s| {
        let n = s.lift(4i64);
        let v = s.vector_new(&n, SemType::Int)?;
        let idx = s.int_vector(&[0, 1, 1, 3])?;
        let x = s.lift(9i64);
        s.bulk_update(&v, &idx, &x)?;
        Ok(v)
    });
    let cfg = RunConfig {
        debug_contracts: true,
        ..RunConfig::default()
    };
    for chunks in [1, 4] {
        let err = stagekit::runtime::interpret(&c.program, chunks, &cfg).unwrap_err();
        assert!(
            matches!(err, RuntimeError::ContractViolation { index: 1, first: 1, second: 2, .. }),
            "{err}"
        );
    }
    let ok = run_interp(&c, 4, &RunConfig::default()).result;
    assert_eq!(ok, Value::Vector(VecBuf::ints(&[9, 9, 0, 9])));
}

#[test]
fn int_division_by_zero_traps() {
    let c = build(&DriverOptions::default(), |s| {
        let a = s.input(0, SemType::Int)?;
        let b = s.input(1, SemType::Int)?;
        s.div(&a, &b)
    });
    let cfg = RunConfig {
        inputs: vec![Value::Int(7), Value::Int(0)],
        ..RunConfig::default()
    };
    let err = stagekit::runtime::interpret(&c.program, 1, &cfg).unwrap_err();
    assert!(matches!(err, RuntimeError::DivByZero { .. }), "{err}");
}

#[test]
fn missing_input_is_reported() {
    let c = build(&DriverOptions::default(), |s| s.input(0, SemType::Int));
    let err = stagekit::runtime::interpret(&c.program, 1, &RunConfig::default()).unwrap_err();
    assert_eq!(err, RuntimeError::MissingInput(0));
}
