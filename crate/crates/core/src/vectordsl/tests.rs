use super::*;
use crate::ir::{Lit, LoopElem, SemType, UnOp};
use crate::staging::StageOptions;

fn stager(tier: NormTier) -> Stager {
    Stager::new(StageOptions {
        norm_tier: tier,
        ..StageOptions::default()
    })
}

fn loop_elems(s: &Stager, v: &Staged) -> Vec<LoopElem> {
    match s.def_of(v) {
        Some(NodeDef::ParallelLoop(l)) => l.elems.clone(),
        d => panic!("not a loop: {d:?}"),
    }
}

fn dvec(s: &mut Stager, k: u32) -> Staged {
    s.input(k, SemType::vector(SemType::Double)).unwrap()
}

#[test]
fn tier_names_round_trip() {
    for t in NormTier::ALL {
        assert_eq!(t.name().parse::<NormTier>(), Ok(t));
    }
    assert!("fast".parse::<NormTier>().is_err());
}

#[test]
fn map_is_an_unconditional_collect() {
    let mut s = stager(NormTier::Library);
    let v = dvec(&mut s, 0);
    let m = s.map(&v, |s, x| s.sqrt(x)).unwrap();
    assert_eq!(m.ty(), SemType::vector(SemType::Double));
    let elems = loop_elems(&s, &m);
    assert!(matches!(elems.as_slice(), [LoopElem::Collect { cond: None, .. }]));
}

#[test]
fn filter_is_a_conditional_collect() {
    let mut s = stager(NormTier::Library);
    let v = s.int_vector(&[1, 2, 3]).unwrap();
    let f = s
        .filter(&v, |s, x| {
            let two = s.lift(2i64);
            s.gt(x, &two)
        })
        .unwrap();
    assert!(matches!(
        loop_elems(&s, &f).as_slice(),
        [LoopElem::Collect { cond: Some(_), .. }]
    ));
}

#[test]
fn sum_is_a_reduce_with_a_typed_zero() {
    let mut s = stager(NormTier::Library);
    let v = s.int_vector(&[1, 2, 3]).unwrap();
    let t = s.sum(&v).unwrap();
    assert_eq!(t.ty(), SemType::Int);
    match loop_elems(&s, &t).as_slice() {
        [LoopElem::Reduce { zero, .. }] => assert_eq!(zero.as_const(), Some(&Lit::Int(0))),
        e => panic!("{e:?}"),
    }
}

#[test]
fn sum_rejects_non_numeric_elements() {
    let mut s = stager(NormTier::Library);
    let v = s.literal(vec![Lit::Bool(true)], SemType::Bool).unwrap();
    assert!(matches!(s.sum(&v), Err(StageError::TypeMismatch { .. })));
}

#[test]
fn map_rejects_scalars() {
    let mut s = stager(NormTier::Library);
    let x = s.lift(1.0);
    assert!(s.map(&x, |_, y| Ok(y.clone())).is_err());
}

#[test]
fn bulk_update_is_a_foreach() {
    let mut s = stager(NormTier::Library);
    let n = s.lift(4i64);
    let v = s.vector_new(&n, SemType::Double).unwrap();
    let idx = s.int_vector(&[0, 2]).unwrap();
    let x = s.lift(1.0);
    let r = s.bulk_update(&v, &idx, &x).unwrap();
    assert!(matches!(loop_elems(&s, &r).as_slice(), [LoopElem::Foreach { .. }]));
}

#[test]
fn random_vectors_get_distinct_streams() {
    let mut s = stager(NormTier::Library);
    let n = s.lift(4i64);
    let a = s.rand(&n).unwrap();
    let b = s.rand(&n).unwrap();
    assert_ne!(a, b);
}

#[test]
fn library_norm_is_sqrt_of_a_sum() {
    let mut s = stager(NormTier::Library);
    let v = dvec(&mut s, 0);
    let n = s.norm(&v).unwrap();
    assert!(matches!(s.def_of(&n), Some(NodeDef::Unary(UnOp::Sqrt, _))));
}

#[test]
fn zero_vector_norm_folds_above_the_library_tier() {
    for tier in [NormTier::Match, NormTier::Node] {
        let mut s = stager(tier);
        let n = s.lift(16i64);
        let z = s.zero_vector(&n).unwrap();
        assert_eq!(s.norm(&z).unwrap().as_const(), Some(&Lit::Double(0.0)), "{tier}");
    }
}

#[test]
fn library_tier_does_not_fold_zero_norm() {
    let mut s = stager(NormTier::Library);
    let n = s.lift(16i64);
    let z = s.zero_vector(&n).unwrap();
    assert!(s.norm(&z).unwrap().sym().is_some());
}

#[test]
fn producers_are_remembered() {
    let mut s = stager(NormTier::Match);
    let v = dvec(&mut s, 0);
    let k = s.lift(2.0);
    let w = s.scale(&k, &v).unwrap();
    assert!(matches!(s.producer(&w), Some(NodeDef::ScalarTimesVector(..))));
    assert_eq!(s.producer(&v), None);
}

#[test]
fn scaled_norm_factors_out_the_scalar() {
    let mut s = stager(NormTier::Match);
    let v = dvec(&mut s, 0);
    let k = s.input(1, SemType::Double).unwrap();
    let w = s.scale(&k, &v).unwrap();
    let n = s.norm(&w).unwrap();
    let Some(NodeDef::Binary(crate::ir::BinOp::Times, a, b)) = s.def_of(&n).cloned() else {
        panic!("expected a product");
    };
    let abs_k = [&a, &b]
        .into_iter()
        .any(|e| matches!(s.def_of(&Staged::new(e.clone())), Some(NodeDef::Unary(UnOp::Abs, _))));
    assert!(abs_k);
}

#[test]
fn unit_vector_norm_is_one_at_the_node_tier() {
    let mut s = stager(NormTier::Node);
    let v = dvec(&mut s, 0);
    let nv = s.norm(&v).unwrap();
    let one = s.lift(1.0);
    let k = s.div(&one, &nv).unwrap();
    let u = s.scale(&k, &v).unwrap();
    assert!(matches!(s.def_of(&u), Some(NodeDef::UnitVector(_))));
    assert_eq!(s.norm(&u).unwrap().as_const(), Some(&Lit::Double(1.0)));
}

#[test]
fn unit_vector_needs_the_same_vector() {
    let mut s = stager(NormTier::Node);
    let v = dvec(&mut s, 0);
    let w = dvec(&mut s, 1);
    let nv = s.norm(&v).unwrap();
    let one = s.lift(1.0);
    let k = s.div(&one, &nv).unwrap();
    let u = s.scale(&k, &w).unwrap();
    assert!(!matches!(s.def_of(&u), Some(NodeDef::UnitVector(_))));
}
