use super::*;
use crate::ir::{BinOp, NodeDef};

fn stager() -> Stager {
    Stager::new(StageOptions::default())
}

fn int_in(s: &mut Stager, k: u32) -> Staged {
    s.input(k, SemType::Int).unwrap()
}

fn dbl_in(s: &mut Stager, k: u32) -> Staged {
    s.input(k, SemType::Double).unwrap()
}

#[test]
fn constant_operands_fold() {
    let mut s = stager();
    let (a, b) = (s.lift(6i64), s.lift(7i64));
    assert_eq!(s.mul(&a, &b).unwrap().as_const(), Some(&Lit::Int(42)));
    let (x, y) = (s.lift(1.0), s.lift(4.0));
    assert_eq!(s.div(&x, &y).unwrap().as_const(), Some(&Lit::Double(0.25)));
    assert!(s.ctx().statements().is_empty());
}

#[test]
fn int_identities_return_the_operand() {
    let mut s = stager();
    let x = int_in(&mut s, 0);
    let (zero, one) = (s.lift(0i64), s.lift(1i64));
    assert_eq!(s.add(&zero, &x).unwrap(), x);
    assert_eq!(s.sub(&x, &zero).unwrap(), x);
    assert_eq!(s.mul(&one, &x).unwrap(), x);
    assert_eq!(s.mul(&x, &zero).unwrap().as_const(), Some(&Lit::Int(0)));
}

#[test]
fn double_plus_zero_is_kept() {
    let mut s = stager();
    let x = dbl_in(&mut s, 0);
    let zero = s.lift(0.0);
    let r = s.add(&x, &zero).unwrap();
    assert_ne!(r, x);
    let zero_times = s.mul(&x, &zero).unwrap();
    assert!(zero_times.sym().is_some());
}

#[test]
fn constant_moves_left_of_commutative_ops() {
    let mut s = stager();
    let x = int_in(&mut s, 0);
    let three = s.lift(3i64);
    let r = s.add(&x, &three).unwrap();
    match s.def_of(&r).unwrap() {
        NodeDef::Binary(BinOp::Plus, Expr::Const(Lit::Int(3)), e) => assert_eq!(e, x.expr()),
        d => panic!("unexpected {d:?}"),
    }
}

#[test]
fn int_constant_clusters_reassociate() {
    let mut s = stager();
    let x = int_in(&mut s, 0);
    let (two, three) = (s.lift(2i64), s.lift(3i64));
    let inner = s.add(&two, &x).unwrap();
    let outer = s.add(&three, &inner).unwrap();
    let five = s.lift(5i64);
    assert_eq!(outer, s.add(&five, &x).unwrap());
}

#[test]
fn double_clusters_reassociate_only_with_fast_math() {
    let build = |fast_math: bool| {
        let mut s = Stager::new(StageOptions {
            fast_math,
            ..StageOptions::default()
        });
        let x = dbl_in(&mut s, 0);
        let (a, b) = (s.lift(0.1), s.lift(0.2));
        let inner = s.add(&a, &x).unwrap();
        let outer = s.add(&b, &inner).unwrap();
        s.def_of(&outer).cloned().unwrap()
    };
    assert!(matches!(
        build(false),
        NodeDef::Binary(BinOp::Plus, Expr::Const(Lit::Double(c)), Expr::Sym(..)) if c == 0.2
    ));
    assert!(matches!(
        build(true),
        NodeDef::Binary(BinOp::Plus, Expr::Const(Lit::Double(c)), Expr::Sym(..)) if c == 0.2 + 0.1
    ));
}

#[test]
fn cse_toggle_controls_sharing() {
    for cse in [true, false] {
        let mut s = Stager::new(StageOptions {
            cse,
            ..StageOptions::default()
        });
        let x = int_in(&mut s, 0);
        let y = int_in(&mut s, 1);
        let a = s.mul(&x, &y).unwrap();
        let b = s.mul(&x, &y).unwrap();
        assert_eq!(a == b, cse);
    }
}

#[test]
fn constant_condition_stages_one_arm() {
    let mut s = stager();
    let t = s.lift(true);
    let r = s
        .if_then_else(&t, |s| Ok(s.lift(1i64)), |_| panic!("else arm staged"))
        .unwrap();
    assert_eq!(r.as_const(), Some(&Lit::Int(1)));
}

#[test]
fn identical_pure_arms_collapse() {
    let mut s = stager();
    let c = s.input(0, SemType::Bool).unwrap();
    let x = int_in(&mut s, 1);
    let (xa, xb) = (x.clone(), x.clone());
    let r = s.if_then_else(&c, |_| Ok(xa), |_| Ok(xb)).unwrap();
    assert_eq!(r, x);
}

#[test]
fn arm_types_must_agree() {
    let mut s = stager();
    let c = s.input(0, SemType::Bool).unwrap();
    let err = s
        .if_then_else(&c, |s| Ok(s.lift(1i64)), |s| Ok(s.lift(1.0)))
        .unwrap_err();
    assert!(matches!(err, StageError::BranchTypeMismatch { .. }), "{err:?}");
}

#[test]
fn failed_reification_restores_scope_depth() {
    let mut s = stager();
    let depth = s.ctx().depth();
    let c = s.input(0, SemType::Bool).unwrap();
    let r = s.if_then_else(
        &c,
        |s| {
            let a = s.lift(1i64);
            let b = s.lift(true);
            s.add(&a, &b)
        },
        |s| Ok(s.lift(0i64)),
    );
    assert!(r.is_err());
    assert_eq!(s.ctx().depth(), depth);
}

#[test]
fn effectful_conditional_is_reflected() {
    let mut s = stager();
    let c = s.input(0, SemType::Bool).unwrap();
    s.if_then_else(
        &c,
        |s| {
            s.print_str("yes")?;
            Ok(s.unit())
        },
        |s| Ok(s.unit()),
    )
    .unwrap();
    let g = s.ctx.finish(Expr::unit());
    assert_eq!(g.root.effects.len(), 1);
}

#[test]
fn foreach_runs_its_body_once_at_staging_time() {
    let mut s = stager();
    let v = s.int_vector(&[1, 2, 3]).unwrap();
    let mut calls = 0;
    s.foreach(&v, |s, x| {
        calls += 1;
        s.print(&x)?;
        Ok(())
    })
    .unwrap();
    assert_eq!(calls, 1);
}

#[test]
fn bam_runs_its_continuation_per_choice() {
    let mut s = stager();
    let xs = [s.lift(1i64), s.lift(2i64), s.lift(3i64)];
    let mut seen = Vec::new();
    s.bam(&xs, |s, x| {
        assert_eq!(s.specialized_paths(), 3);
        seen.push(x.as_const().and_then(Lit::as_int).unwrap());
        Ok(())
    })
    .unwrap();
    assert_eq!(seen, [1, 2, 3]);
    assert_eq!(s.specialized_paths(), 1);
}

#[test]
fn nested_bam_multiplies_paths() {
    let mut s = stager();
    let xs = [s.lift(1i64), s.lift(2i64)];
    let ys = xs.clone();
    let mut inner = 0;
    s.bam(&xs, |s, _| {
        s.bam(&ys, |s, _| {
            inner += 1;
            assert_eq!(s.specialized_paths(), 4);
            Ok(())
        })
    })
    .unwrap();
    assert_eq!(inner, 4);
}

#[test]
fn hooks_run_newest_first() {
    use std::rc::Rc;
    let mut s = stager();
    s.registry_mut()
        .register("Print", Rc::new(|s, _| Ok(Some(s.lift(1i64)))));
    s.registry_mut()
        .register("Print", Rc::new(|s, _| Ok(Some(s.lift(2i64)))));
    let x = s.lift(0i64);
    assert_eq!(s.print(&x).unwrap().as_const(), Some(&Lit::Int(2)));
}

#[test]
fn declining_hooks_fall_through_to_lowering() {
    use std::rc::Rc;
    let mut s = stager();
    s.registry_mut().register("Print", Rc::new(|_, _| Ok(None)));
    let x = s.lift(0i64);
    assert!(s.print(&x).unwrap().sym().is_some());
}

#[test]
fn aliasing_a_mutable_vector_is_rejected() {
    let mut s = stager();
    let n = s.lift(2i64);
    let m = s.vector_new(&n, SemType::Int).unwrap();
    let err = s.alias(&m).unwrap_err();
    assert!(matches!(err, StageError::IllegalSharing { .. }), "{err:?}");
}

#[test]
fn gt_is_lt_with_swapped_operands() {
    let mut s = stager();
    let x = int_in(&mut s, 0);
    let y = int_in(&mut s, 1);
    let a = s.gt(&x, &y).unwrap();
    let b = s.lt(&y, &x).unwrap();
    assert_eq!(a, b);
}
