use symword::anneal::{brute_force_min, objective, solve, AnnealConfig};
use symword::rng::stream_rng;
use symword::{Letter, Permutation, Var, Word};

/// Random single-variable word from a few shapes, with random constants.
fn instance(seed: u64) -> (Word, Permutation) {
    let mut rng = stream_rng(seed, 77);
    let n = 3 + (seed % 4) as usize;
    let mut c = || Letter::Const(Permutation::random(n, &mut rng));
    let (x, xi) = (Letter::Var(Var::pos(1)), Letter::Var(Var::neg(1)));
    let letters = match seed % 3 {
        0 => vec![x.clone(), x.clone(), c(), xi],
        1 => vec![x.clone(), c(), x.clone(), c(), x],
        _ => vec![x.clone(), x.clone(), x, c()],
    };
    let word = Word::new(n, 1, letters).unwrap();
    (word, Permutation::random(n, &mut stream_rng(seed, 78)))
}

#[test]
fn identity_word_is_solved_exactly() {
    let target = Permutation::random(20, &mut stream_rng(5, 0));
    let res = solve(
        &Word::parse("x1", 20, 1).unwrap(),
        &target,
        &AnnealConfig::default(),
    )
    .unwrap();
    assert_eq!(res.best_raw_distance, 0);
    assert_eq!(res.best_assignment[0], target);
}

#[test]
fn default_budget_matches_brute_force_on_small_instances() {
    let mut matched = 0;
    for seed in 0..100 {
        let (word, target) = instance(seed);
        let cfg = AnnealConfig {
            seed,
            ..AnnealConfig::default()
        };
        let res = solve(&word, &target, &cfg).unwrap();
        let best = brute_force_min(&word, &target).unwrap();
        assert!(res.best_raw_distance >= best);
        matched += usize::from(res.best_raw_distance == best);
    }
    assert!(matched >= 95, "{matched}/100");
}

#[test]
fn early_uphill_acceptance_is_calibrated() {
    let mut rng = stream_rng(9, 0);
    let sigma = Permutation::random(50, &mut rng);
    let target = Permutation::random(50, &mut rng);
    let word = Word::new(
        50,
        1,
        vec![
            Letter::Var(Var::pos(1)),
            Letter::Var(Var::pos(1)),
            Letter::Const(sigma),
            Letter::Var(Var::neg(1)),
        ],
    )
    .unwrap();
    let cfg = AnnealConfig {
        steps: 100_000,
        restarts: 4,
        seed: 3,
        ..AnnealConfig::default()
    };
    let res = solve(&word, &target, &cfg).unwrap();
    for r in &res.restarts {
        assert!((0.5..=0.95).contains(&r.early_uphill_acceptance), "{r:?}");
        assert!(r.best <= r.initial);
    }
}

#[test]
fn seeded_runs_are_reproducible() {
    let (word, target) = instance(41);
    let cfg = AnnealConfig {
        steps: 20_000,
        restarts: 3,
        seed: 12,
        ..AnnealConfig::default()
    };
    let a = solve(&word, &target, &cfg).unwrap();
    let b = solve(&word, &target, &cfg).unwrap();
    assert_eq!(a.best_assignment, b.best_assignment);
    assert_eq!(
        serde_json::to_string(&a.restarts).unwrap(),
        serde_json::to_string(&b.restarts).unwrap()
    );
}

#[test]
fn objective_is_invariant_under_relabeling() {
    for seed in 0..50 {
        let mut rng = stream_rng(seed, 3);
        let n = 8;
        let (c, target, x, g) = (
            Permutation::random(n, &mut rng),
            Permutation::random(n, &mut rng),
            Permutation::random(n, &mut rng),
            Permutation::random(n, &mut rng),
        );
        let word = |c: Permutation| {
            Word::new(
                n,
                1,
                vec![
                    Letter::Var(Var::pos(1)),
                    Letter::Const(c),
                    Letter::Var(Var::pos(1)),
                ],
            )
            .unwrap()
        };
        let before = objective(&word(c.clone()), std::slice::from_ref(&x), &target).unwrap();
        let conj = |p: &Permutation| p.conjugate(&g).unwrap();
        let after = objective(&word(conj(&c)), &[conj(&x)], &conj(&target)).unwrap();
        assert_eq!(before, after);
    }
}
