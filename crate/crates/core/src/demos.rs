//! Compiled-in demo programs, plus programs that must be rejected.

use crate::ir::{SemType, StageError};
use crate::staging::{Staged, Stager};

pub type DemoFn = fn(&mut Stager) -> Result<Staged, StageError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DemoKind {
    /// Compiles and runs.
    Program,
    /// Must fail to compile with the named diagnostic.
    Rejected(&'static str),
}

#[derive(Clone, Copy)]
pub struct Demo {
    pub name: &'static str,
    pub summary: &'static str,
    pub kind: DemoKind,
    /// Always compiled with the strict record check.
    pub strict: bool,
    pub build: DemoFn,
}

impl std::fmt::Debug for Demo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Demo").field("name", &self.name).finish()
    }
}

const fn program(name: &'static str, summary: &'static str, build: DemoFn) -> Demo {
    Demo {
        name,
        summary,
        kind: DemoKind::Program,
        strict: false,
        build,
    }
}

pub const DEMOS: &[Demo] = &[
    program("hello_avg", "average of 100 random numbers", hello_avg),
    program("scale_by_sum", "map whose body sums another vector", scale_by_sum),
    program("count_gt7", "sequential count of elements above 7", count_gt7),
    program("pythagorean_amb", "triple search with dynamic choice", pythagorean_amb),
    program("bam_specialize", "static choice exposing hoistable work", bam_specialize),
    program("complex_arith", "complex arithmetic on records", complex_arith),
    program("complex_cond", "conditional over complex records", complex_cond),
    program("complex_conj_soa", "conjugates over a column-stored vector", complex_conj_soa),
    program("axpy", "a*x+y over random vectors", axpy),
    program("mean_variance", "mean and variance of one data set", mean_variance),
    program("norm_dist_tiers", "norm and distance rewrites", norm_dist_tiers),
    program("bulk_update", "parallel writes at distinct indexes", bulk_update),
    Demo {
        name: "illegal_sharing",
        summary: "aliases a mutable vector",
        kind: DemoKind::Rejected("IllegalSharing"),
        strict: false,
        build: illegal_sharing,
    },
    Demo {
        name: "write_to_immutable",
        summary: "updates a random vector in place",
        kind: DemoKind::Rejected("WriteToImmutable"),
        strict: false,
        build: write_to_immutable,
    },
    Demo {
        name: "record_residualized",
        summary: "prints a whole record under the strict check",
        kind: DemoKind::Rejected("RecordResidualized"),
        strict: true,
        build: record_residualized,
    },
];

pub fn find(name: &str) -> Option<&'static Demo> {
    DEMOS.iter().find(|d| d.name == name)
}

/// The demos expected to compile and run.
pub fn programs() -> impl Iterator<Item = &'static Demo> {
    DEMOS.iter().filter(|d| d.kind == DemoKind::Program)
}

type R = Result<Staged, StageError>;

fn int(s: &Stager, x: i64) -> Staged {
    s.lift(x)
}

fn hello_avg(s: &mut Stager) -> R {
    let n = int(s, 100);
    let v = s.rand(&n)?;
    s.print_str("today's lucky number is: ")?;
    let a = s.avg(&v)?;
    s.print(&a)?;
    Ok(s.unit())
}

fn scale_by_sum(s: &mut Stager) -> R {
    let (n1, n2) = (int(s, 8), int(s, 5));
    let v1 = s.rand(&n1)?;
    let v2 = s.rand(&n2)?;
    s.map(&v1, |s, x| {
        let len = s.length(&v2)?;
        let total = s.sum_index(&len, |s, i| s.apply(&v2, i))?;
        s.div(x, &total)
    })
}

fn count_gt7(s: &mut Stager) -> R {
    let xs = s.int_vector(&[3, 9, 12, 7, 8, 1, 15, 4])?;
    let c = s.count_sequential(&xs, |s, x| {
        let seven = s.lift(7i64);
        s.gt(x, &seven)
    })?;
    s.print(&c)?;
    Ok(s.unit())
}

fn pythagorean_amb(s: &mut Stager) -> R {
    let u = s.int_vector(&[3, 5, 6, 8, 9])?;
    let v = s.int_vector(&[4, 12, 8, 15, 40])?;
    let w = s.int_vector(&[5, 13, 10, 17, 41])?;
    s.amb(&u, |s, a| {
        s.amb(&v, |s, b| {
            s.amb(&w, |s, c| {
                let aa = s.mul(&a, &a)?;
                let bb = s.mul(&b, &b)?;
                let cc = s.mul(&c, &c)?;
                let lhs = s.add(&aa, &bb)?;
                let ok = s.eq(&lhs, &cc)?;
                s.require(&ok, |s| {
                    s.print_str("found:")?;
                    s.print(&a)?;
                    s.print(&b)?;
                    s.print(&c)?;
                    Ok(())
                })
            })
        })
    })?;
    Ok(s.unit())
}

fn bam_specialize(s: &mut Stager) -> R {
    let u = s.int_vector(&[1, 2, 3, 4])?;
    let v = s.int_vector(&[2, 4, 6, 8, 10, 14])?;
    let w = s.int_vector(&[1, 2, 3])?;
    let choices = [int(s, 2), int(s, 3)];
    s.amb(&u, |s, a| {
        s.bam(&choices, |s, b| {
            s.amb(&v, |s, c| {
                let scaled = s.map(&w, |s, j| s.mul(j, &b))?;
                let fb = s.sum(&scaled)?;
                let lhs = s.add(&a, &c)?;
                let ok = s.eq(&lhs, &fb)?;
                s.require(&ok, |s| {
                    s.print_str("found:")?;
                    s.print(&a)?;
                    s.print(&b)?;
                    s.print(&c)?;
                    Ok(())
                })
            })
        })
    })?;
    Ok(s.unit())
}

fn complex(s: &mut Stager, re: Staged, im: Staged) -> R {
    s.mk_record("Complex", vec![("re".into(), re), ("im".into(), im)])
}

fn c_add(s: &mut Stager, a: &Staged, b: &Staged) -> R {
    let (ar, br) = (s.field(a, "re")?, s.field(b, "re")?);
    let (ai, bi) = (s.field(a, "im")?, s.field(b, "im")?);
    let re = s.add(&ar, &br)?;
    let im = s.add(&ai, &bi)?;
    complex(s, re, im)
}

fn c_mul(s: &mut Stager, a: &Staged, b: &Staged) -> R {
    let (ar, br) = (s.field(a, "re")?, s.field(b, "re")?);
    let (ai, bi) = (s.field(a, "im")?, s.field(b, "im")?);
    let rr = s.mul(&ar, &br)?;
    let ii = s.mul(&ai, &bi)?;
    let ri = s.mul(&ar, &bi)?;
    let ir = s.mul(&ai, &br)?;
    let re = s.sub(&rr, &ii)?;
    let im = s.add(&ri, &ir)?;
    complex(s, re, im)
}

fn print_complex(s: &mut Stager, c: &Staged) -> Result<(), StageError> {
    let re = s.field(c, "re")?;
    let im = s.field(c, "im")?;
    s.print(&re)?;
    s.print(&im)?;
    Ok(())
}

/// Two complex numbers drawn from one random vector of length 4.
fn two_complex(s: &mut Stager) -> Result<(Staged, Staged, Staged), StageError> {
    let n = int(s, 4);
    let x = s.rand(&n)?;
    let mut parts = Vec::new();
    for k in 0..4 {
        let i = int(s, k);
        parts.push(s.apply(&x, &i)?);
    }
    let c1 = complex(s, parts[0].clone(), parts[1].clone())?;
    let c2 = complex(s, parts[2].clone(), parts[3].clone())?;
    Ok((x, c1, c2))
}

fn complex_arith(s: &mut Stager) -> R {
    let (_, c1, c2) = two_complex(s)?;
    let (five, zero) = (s.lift(5.0), s.lift(0.0));
    let k = complex(s, five, zero)?;
    let scaled = c_mul(s, &k, &c2)?;
    let r = c_add(s, &c1, &scaled)?;
    print_complex(s, &r)?;
    Ok(s.unit())
}

fn complex_cond(s: &mut Stager) -> R {
    let (x, c1, c2) = two_complex(s)?;
    let first = int(s, 0);
    let x0 = s.apply(&x, &first)?;
    let half = s.lift(0.5);
    let test = s.lt(&x0, &half)?;
    let c3 = s.if_then_else(&test, |_| Ok(c1), |_| Ok(c2))?;
    print_complex(s, &c3)?;
    Ok(s.unit())
}

fn complex_conj_soa(s: &mut Stager) -> R {
    let n = int(s, 8);
    let re = s.rand(&n)?;
    let im = s.rand(&n)?;
    let cv = s.mk_columns("Complex", vec![("re".into(), re), ("im".into(), im)])?;
    let conj = s.map(&cv, |s, z| {
        let re = s.field(z, "re")?;
        let im = s.field(z, "im")?;
        let neg = s.neg(&im)?;
        complex(s, re, neg)
    })?;
    let ims = s.field(&conj, "im")?;
    s.print(&ims)?;
    Ok(conj)
}

fn axpy(s: &mut Stager) -> R {
    let n = int(s, 100);
    let a = s.lift(2.5);
    let x = s.rand(&n)?;
    let y = s.rand(&n)?;
    let ax = s.map(&x, |s, xi| s.mul(&a, xi))?;
    s.zip_with(&ax, &y, |s, p, q| s.add(p, q))
}

fn mean_variance(s: &mut Stager) -> R {
    let n = int(s, 1000);
    let data = s.rand(&n)?;
    let m = s.mean(&data)?;
    let v = s.variance(&data)?;
    s.print(&m)?;
    s.print(&v)?;
    Ok(s.unit())
}

fn norm_dist_tiers(s: &mut Stager) -> R {
    let n = int(s, 16);
    let v = s.rand(&n)?;
    let w = s.rand(&n)?;
    let z = s.zero_vector(&n)?;
    let nz = s.norm(&z)?;
    s.print(&nz)?;
    let nv = s.norm(&v)?;
    let one = s.lift(1.0);
    let k = s.div(&one, &nv)?;
    let u = s.scale(&k, &v)?;
    let nu = s.norm(&u)?;
    s.print(&nu)?;
    let d = s.dist(&v, &w)?;
    s.print(&d)?;
    Ok(s.unit())
}

fn bulk_update(s: &mut Stager) -> R {
    let n = int(s, 10);
    let v = s.vector_new(&n, SemType::Double)?;
    let idxs = s.int_vector(&[0, 2, 4, 6, 8])?;
    let x = s.lift(1.5);
    s.bulk_update(&v, &idxs, &x)?;
    let total = s.sum(&v)?;
    s.print(&total)?;
    Ok(v)
}

fn illegal_sharing(s: &mut Stager) -> R {
    let n = int(s, 4);
    let m1 = s.vector_new(&n, SemType::Int)?;
    let m2 = s.alias(&m1)?;
    let i = int(s, 0);
    let one = int(s, 1);
    s.update(&m2, &i, &one)?;
    Ok(s.unit())
}

fn write_to_immutable(s: &mut Stager) -> R {
    let n = int(s, 4);
    let v = s.rand(&n)?;
    let i = int(s, 0);
    let x = s.lift(1.0);
    s.update(&v, &i, &x)?;
    Ok(s.unit())
}

fn record_residualized(s: &mut Stager) -> R {
    let (_, c1, _) = two_complex(s)?;
    s.print(&c1)?;
    Ok(s.unit())
}
