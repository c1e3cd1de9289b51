use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestError, TestRunner};

use symword::eval::{evaluate, Atom, Distribution, DistributionKind};
use symword::transport::{kr_exact, Ground};
use symword::{Letter, Permutation, Rational, Sign, Var, Word};

pub const SEED: u64 = 0x5EED_2024;

pub type Outcome = Result<(), String>;

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        rng_seed: RngSeed::Fixed(SEED),
        failure_persistence: None,
        ..Config::default()
    })
}

fn finish<T: std::fmt::Debug>(r: Result<(), TestError<T>>) -> Outcome {
    r.map_err(|e| e.to_string())
}

pub fn perm(n: usize) -> impl Strategy<Value = Permutation> {
    Just((0..n as u32).collect::<Vec<u32>>())
        .prop_shuffle()
        .prop_map(|v| Permutation::from_images(v).unwrap())
}

fn perms(count: usize) -> impl Strategy<Value = Vec<Permutation>> {
    (1usize..=8).prop_flat_map(move |n| proptest::collection::vec(perm(n), count))
}

fn letter(n: usize, r: usize) -> impl Strategy<Value = Letter> {
    prop_oneof![
        perm(n).prop_map(Letter::Const),
        (1..=r, any::<bool>())
            .prop_map(|(i, pos)| Letter::Var(Var::new(i, if pos { Sign::Pos } else { Sign::Neg }))),
        Just(Letter::Const(Permutation::identity(n))),
    ]
}

/// A word with its degree, rank and an assignment of all variables.
pub fn word_with_assignment() -> impl Strategy<Value = (Word, Vec<Permutation>)> {
    (2usize..=5, 1usize..=2).prop_flat_map(|(n, r)| {
        (
            proptest::collection::vec(letter(n, r), 1..10)
                .prop_map(move |ls| Word::new(n, r, ls).unwrap()),
            proptest::collection::vec(perm(n), r),
        )
    })
}

fn sparse_measure(n: usize) -> impl Strategy<Value = Distribution> {
    proptest::collection::vec((perm(n), 1u64..=5), 1..=4).prop_map(move |atoms| {
        Distribution::from_masses(
            n,
            1,
            DistributionKind::Exact,
            atoms.into_iter().map(|(p, m)| (Atom::single(p), m)),
        )
        .unwrap()
    })
}

fn measure_triple() -> impl Strategy<Value = (Distribution, Distribution, Distribution)> {
    (2usize..=4).prop_flat_map(|n| (sparse_measure(n), sparse_measure(n), sparse_measure(n)))
}

pub fn group_axioms(cases: u32) -> Outcome {
    finish(runner(cases).run(&perms(3), |v| {
        let (a, b, c) = (&v[0], &v[1], &v[2]);
        let n = a.degree();
        let id = Permutation::identity(n);
        let ab_c = a.compose(b).unwrap().compose(c).unwrap();
        let a_bc = a.compose(&b.compose(c).unwrap()).unwrap();
        prop_assert_eq!(ab_c, a_bc);
        prop_assert_eq!(a.compose(&id).unwrap(), a.clone());
        prop_assert_eq!(id.compose(a).unwrap(), a.clone());
        prop_assert!(a.compose(&a.inverse()).unwrap().is_identity());
        prop_assert!(a.inverse().compose(a).unwrap().is_identity());
        // left-to-right: (a·b)(i) = b(a(i))
        let ab = a.compose(b).unwrap();
        for i in 0..n {
            prop_assert_eq!(ab.apply(i), b.apply(a.apply(i)));
        }
        let conj = a.conjugate(b).unwrap();
        prop_assert_eq!(conj.cycle_type(), a.cycle_type());
        prop_assert_eq!(conj, b.inverse().compose(a).unwrap().compose(b).unwrap());
        Ok(())
    }))
}

pub fn hamming_bi_invariance(cases: u32) -> Outcome {
    finish(runner(cases).run(&perms(4), |v| {
        let (p, q, g, r) = (&v[0], &v[1], &v[2], &v[3]);
        let d = p.hamming(q).unwrap();
        prop_assert_eq!(
            g.compose(p)
                .unwrap()
                .hamming(&g.compose(q).unwrap())
                .unwrap(),
            d
        );
        prop_assert_eq!(
            p.compose(g)
                .unwrap()
                .hamming(&q.compose(g).unwrap())
                .unwrap(),
            d
        );
        prop_assert_eq!(q.hamming(p).unwrap(), d);
        prop_assert_eq!(d == Rational::from_integer(0), p == q);
        prop_assert!(p.hamming(r).unwrap() <= d + q.hamming(r).unwrap());
        prop_assert_eq!(
            p.hamming(q).unwrap(),
            p.inverse()
                .compose(q)
                .unwrap()
                .hamming(&Permutation::identity(p.degree()))
                .unwrap()
        );
        Ok(())
    }))
}

pub fn kr_metric_axioms(cases: u32) -> Outcome {
    finish(runner(cases).run(&measure_triple(), |(a, b, c)| {
        let kr = |x: &Distribution, y: &Distribution| kr_exact(x, y, Ground::Hamming).unwrap().0;
        let (ab, ba) = (kr(&a, &b), kr(&b, &a));
        prop_assert_eq!(ab, ba);
        prop_assert_eq!(kr(&a, &a), Rational::from_integer(0));
        prop_assert_eq!(ab == Rational::from_integer(0), a == b);
        prop_assert!(kr(&a, &c) <= ab + kr(&b, &c));
        // TV dominates KR: every unit of moved mass costs at most 1
        prop_assert!(ab <= a.tv_distance(&b).unwrap());
        Ok(())
    }))
}

pub fn symmetrization_contracts(cases: u32) -> Outcome {
    let strat = (2usize..=4).prop_flat_map(|n| (sparse_measure(n), sparse_measure(n)));
    finish(runner(cases).run(&strat, |(mu, nu)| {
        let nu = nu.symmetrize().unwrap();
        prop_assert!(nu.is_conjugation_invariant());
        let smu = mu.symmetrize().unwrap();
        prop_assert!(smu.is_conjugation_invariant());
        prop_assert_eq!(smu.symmetrize().unwrap(), smu.clone());
        let before = kr_exact(&mu, &nu, Ground::Hamming).unwrap().0;
        let after = kr_exact(&smu, &nu, Ground::Hamming).unwrap().0;
        prop_assert!(after <= before);
        Ok(())
    }))
}

pub fn reduce_idempotent(cases: u32) -> Outcome {
    finish(runner(cases).run(&word_with_assignment(), |(w, _)| {
        let r = w.reduce();
        prop_assert!(r.is_reduced());
        prop_assert_eq!(r.reduce(), r.clone());
        let reparsed = Word::parse(&r.to_string(), r.degree(), r.rank())
            .unwrap()
            .reduce();
        prop_assert_eq!(reparsed, r);
        Ok(())
    }))
}

pub fn evaluation_preserved(cases: u32) -> Outcome {
    finish(
        runner(cases).run(&(word_with_assignment(), 1usize..=4), |((w, s), k)| {
            let value = evaluate(&w, &s).unwrap();
            prop_assert_eq!(evaluate(&w.reduce(), &s).unwrap(), value.clone());
            prop_assert_eq!(
                evaluate(&w.power(k).unwrap(), &s).unwrap(),
                value.pow(k as i64)
            );
            prop_assert_eq!(evaluate(&w.inverse(), &s).unwrap(), value.inverse());
            if let Ok((core, conj)) = w.reduce().cyclically_reduce() {
                let rebuilt = conj.concat(&core).unwrap().concat(&conj.inverse()).unwrap();
                prop_assert_eq!(evaluate(&rebuilt, &s).unwrap(), value);
            }
            Ok(())
        }),
    )
}

pub type Property = (&'static str, fn(u32) -> Outcome, u32);

/// Every property with its case count.
pub fn all() -> Vec<Property> {
    vec![
        ("group axioms", group_axioms as fn(u32) -> Outcome, 2000),
        ("hamming bi-invariance", hamming_bi_invariance, 2000),
        ("kr metric axioms", kr_metric_axioms, 1500),
        ("symmetrization contracts kr", symmetrization_contracts, 500),
        ("reduce idempotence", reduce_idempotent, 2000),
        ("evaluation under reduce/power", evaluation_preserved, 2000),
    ]
}
