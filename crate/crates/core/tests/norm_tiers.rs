//! The three norm tiers: constant folding at the higher tiers and
//! numerical agreement on random data.

mod common;

use common::{build, run_interp};
use stagekit::driver::DriverOptions;
use stagekit::ir::SemType;
use stagekit::runtime::{Lcg, RunConfig, Value, VecBuf};
use stagekit::vectordsl::NormTier;

fn tier(t: NormTier) -> DriverOptions {
    DriverOptions {
        norm_tier: t,
        ..DriverOptions::default()
    }
}

#[test]
fn zero_and_unit_norms_fold_at_the_node_tier() {
    let c = build(&tier(NormTier::Node), |s| {
        let n = s.lift(16i64);
        let v = s.rand(&n)?;
        let z = s.zero_vector(&n)?;
        let nz = s.norm(&z)?;
        s.print(&nz)?;
        let nv = s.norm(&v)?;
        let one = s.lift(1.0);
        let k = s.div(&one, &nv)?;
        let u = s.scale(&k, &v)?;
        let nu = s.norm(&u)?;
        s.print(&nu)?;
        Ok(s.unit())
    });
    let text = c.minic();
    assert!(text.contains("print(0.0)"), "{text}");
    assert!(text.contains("print(1.0)"), "{text}");
    assert!(!text.contains("norm("), "{text}");
}

#[test]
fn zero_norm_folds_at_the_match_tier() {
    let c = build(&tier(NormTier::Match), |s| {
        let n = s.input(0, SemType::Int)?;
        let z = s.zero_vector(&n)?;
        s.norm(&z)
    });
    assert_eq!(c.program.result.as_const().and_then(|l| l.as_double()), Some(0.0));
}

fn host_norm(xs: &[f64], k: f64) -> f64 {
    xs.iter().map(|x| (k * x) * (k * x)).sum::<f64>().sqrt()
}

#[test]
fn tiers_agree_on_random_vectors() {
    let programs: Vec<_> = NormTier::ALL
        .iter()
        .map(|&t| {
            build(&tier(t), |s| {
                let v = s.input(0, SemType::vector(SemType::Double))?;
                let k = s.input(1, SemType::Double)?;
                let w = s.scale(&k, &v)?;
                s.norm(&w)
            })
        })
        .collect();
    let mut g = Lcg::for_stream(11, 0);
    for _ in 0..100 {
        let xs: Vec<f64> = (0..1000).map(|_| g.next_f64() * 2.0 - 1.0).collect();
        let k = g.next_f64() * 4.0 - 2.0;
        let cfg = RunConfig {
            inputs: vec![Value::Vector(VecBuf::doubles(&xs)), Value::Double(k)],
            ..RunConfig::default()
        };
        let want = host_norm(&xs, k);
        for (t, c) in NormTier::ALL.iter().zip(&programs) {
            let got = run_interp(c, 64, &cfg).result.as_double().unwrap();
            assert!((got - want).abs() <= 1e-9 * want, "{t}: {got} vs {want}");
        }
    }
}
