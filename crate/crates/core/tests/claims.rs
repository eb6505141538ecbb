use collatz_lab::claims::{CaseInput, Stat};
use collatz_lab::*;

fn n(v: u64) -> Nat {
    Nat::from(v)
}

fn range(lo: u64, hi: u64) -> ScanRange {
    ScanRange::new(lo, hi).unwrap()
}

fn single(input: &CaseInput) -> u64 {
    match input {
        CaseInput::Single(v) => v.to_u64().unwrap(),
        CaseInput::Pair(..) => panic!("expected a single input, got {input}"),
    }
}

fn is_generator(b: u64) -> bool {
    classify_generator(&n(b), 64, BackwardPolicy::GreedyMin)
        .unwrap()
        .is_generator()
}

fn stat(report: &ClaimReport, key: &str) -> u64 {
    match report.statistics.get(key) {
        Some(Stat::Count(c)) => *c,
        other => panic!("{}: statistic {key} is {other:?}", report.id),
    }
}

/// Re-derives every listed counterexample from the primitive operations.
fn audit(report: &ClaimReport) {
    for ce in &report.counterexamples {
        let ok = match report.id.as_str() {
            "C-P6" => {
                let b = single(&ce.input);
                b.is_multiple_of(2) && is_generator(b)
            }
            "C-P10" => {
                let CaseInput::Pair(a, b) = &ce.input else {
                    panic!("pair expected")
                };
                a != b
                    && is_generator(a.to_u64().unwrap())
                    && is_generator(b.to_u64().unwrap())
                    && process_overlap(a, b, report.budget.window)
                        .unwrap()
                        .is_some()
            }
            "C-ODDPRIME" => {
                let b = single(&ce.input);
                let t = trajectory(&n(b), report.budget.window).unwrap();
                is_generator(b)
                    && t.converged()
                    && !t.elements.iter().any(|e| e.is_odd() && is_prime(e))
            }
            "C-OMEGA" => {
                let b = single(&ce.input);
                is_generator(b) && omega(&n(b)).unwrap() > 2
            }
            "C-INDTAU" => {
                let b = single(&ce.input);
                let r = order_index(&n(b), report.budget.max_steps).unwrap();
                let (tau, ind) = (r.tau().unwrap(), r.ind().unwrap());
                is_generator(b) && is_prime(&n(b)) != (ind == tau + 1)
            }
            "C-SPEED1" | "C-SPEED2" => {
                let t = trajectory(&n(single(&ce.input)), report.budget.window).unwrap();
                t.elements.iter().all(Nat::is_one)
            }
            other => panic!("unexpected counterexample for {other}: {ce:?}"),
        };
        assert!(
            ok,
            "{} counterexample does not re-verify: {ce:?}",
            report.id
        );
    }
}

#[test]
fn registry_shape() {
    let claims = list_claims();
    assert_eq!(claims.len(), 20);
    let mut ids: Vec<&str> = claims.iter().map(|c| c.id).collect();
    ids.sort_unstable();
    ids.dedup();
    assert_eq!(ids.len(), 20);
    assert_eq!(
        find_claim("C-T8").unwrap().kind,
        claims::PredicateKind::PerPrime
    );
    assert!(find_claim("C-XYZ").is_none());
    assert!(matches!(
        run_claim("C-XYZ", range(2, 10), Budget::default()),
        Err(Error::UnknownClaim(_))
    ));
    assert!(matches!(
        ScanRange::new(10, 2),
        Err(Error::EmptyRange { .. })
    ));
}

#[test]
fn documented_examples() {
    let b = Budget::default();
    assert_eq!(
        run_claim("C-P7", range(2, 10_000), b).unwrap().verdict,
        Verdict::AllVerified
    );

    let r = run_claim("C-ODDPRIME", range(21, 21), b).unwrap();
    assert_eq!(r.verdict, Verdict::CounterexamplesFound);
    assert_eq!(r.counterexamples[0].input, CaseInput::Single(n(21)));
    assert!(r.counterexamples[0]
        .detail
        .contains("64, 32, 16, 8, 4, 2, 1"));

    let r = run_claim("C-OMEGA", range(27, 27), b).unwrap();
    assert_eq!(r.verdict, Verdict::CounterexamplesFound);
    assert_eq!(r.counterexamples[0].input, CaseInput::Single(n(27)));
    assert!(r.counterexamples[0].detail.contains("Omega = 3"));

    assert_eq!(
        run_claim("C-T8", range(5, 100_000), b).unwrap().verdict,
        Verdict::AllVerified
    );

    let all = run_all(range(3, 3), b).unwrap();
    let indtau = all.iter().find(|r| r.id == "C-INDTAU").unwrap();
    assert!(indtau
        .notes
        .iter()
        .any(|s| s.contains("b = 3 is prime with tau = 3, Ind = 4 = tau + 1")));
    assert_eq!(
        run_all(
            range(2, 100),
            Budget {
                max_steps: 1000,
                depth: 16,
                window: 200
            }
        )
        .unwrap()
        .len(),
        20
    );
}

#[test]
fn pair_counterexample_three_nine() {
    let r = run_claim("C-P10", range(3, 9), Budget::default()).unwrap();
    assert_eq!(r.verdict, Verdict::CounterexamplesFound);
    let ce = r
        .counterexamples
        .iter()
        .find(|c| c.input == CaseInput::Pair(n(3), n(9)))
        .expect("(3, 9) listed");
    assert!(ce.detail.contains("common value 10"));
    // Generators 3, 6, 9 give three pairs, all overlapping at 10 or earlier.
    assert_eq!(r.checked, 3);
    assert_eq!(stat(&r, "counterexamples_total"), 3);
    audit(&r);
}

#[test]
fn counterexamples_reverify_and_verdicts_are_consistent() {
    for r in run_all(range(2, 3000), Budget::default()).unwrap() {
        audit(&r);
        assert_eq!(
            !r.counterexamples.is_empty(),
            r.verdict == Verdict::CounterexamplesFound,
            "{}",
            r.id
        );
        assert_eq!(
            stat(&r, "counterexamples_total") > 0,
            !r.counterexamples.is_empty()
        );
    }
}

#[test]
fn density_is_never_decided() {
    for (lo, hi) in [(2, 2), (3, 3), (2, 500), (1000, 1300)] {
        let r = run_claim("C-DENSITY", range(lo, hi), Budget::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert!(r.counterexamples.is_empty());
    }
    let r = run_claim("C-DENSITY", range(3, 3), Budget::default()).unwrap();
    assert!(r.statistics.contains_key("prime_ratio_depth_064"));
}

#[test]
fn structural_identities_hold_for_small_bases() {
    for depth in [1usize, 2, 7, 30] {
        let budget = Budget {
            depth,
            ..Budget::default()
        };
        for id in ["C-P11", "C-T12"] {
            let r = run_claim(id, range(1, 1000), budget).unwrap();
            assert_eq!(r.verdict, Verdict::AllVerified, "{id} depth {depth}");
        }
    }
    // Independently of the harness.
    for b in 1..=1000u64 {
        let c = translated_chain(&n(b), 30, BackwardPolicy::EvenDoubling).unwrap();
        assert_eq!(c[0], n(2 * b - 1));
        for w in c.windows(2) {
            assert_eq!(w[1], w[0].double().succ());
        }
    }
    let ones = translated_chain(&n(1), 30, BackwardPolicy::EvenDoubling).unwrap();
    for (i, e) in ones.iter().enumerate() {
        assert_eq!(*e, n((1u64 << (i + 1)) - 1));
    }
}

#[test]
fn sophie_germain_pairs_of_three() {
    let pairs = sophie_germain_pairs(&n(3), 5).unwrap();
    let flat: Vec<(u64, u64, bool)> = pairs
        .iter()
        .map(|p| {
            (
                p.lower.to_u64().unwrap(),
                p.upper.to_u64().unwrap(),
                p.sophie_germain,
            )
        })
        .collect();
    assert_eq!(flat, vec![(5, 11, true), (11, 23, true), (23, 47, true)]);
}

fn strip_elapsed(mut reports: Vec<ClaimReport>) -> String {
    for r in &mut reports {
        r.elapsed = 0.0;
    }
    format!("{reports:?}")
}

#[test]
fn reports_do_not_depend_on_worker_count() {
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| run_all(range(2, 4000), Budget::default()).unwrap())
    };
    let one = strip_elapsed(run(1));
    assert_eq!(one, strip_elapsed(run(4)));
    assert_eq!(one, strip_elapsed(run(1)));
}

#[test]
fn memo_backed_runner_matches_direct() {
    let memo = std::sync::Arc::new(MemoTable::default());
    let with = Runner::new(Budget::default()).with_memo(memo.clone());
    let without = Runner::new(Budget::default());
    for id in ["C-T8", "C-P9", "C-TAUFIN", "C-INDTAU"] {
        for _ in 0..2 {
            let a = strip_elapsed(vec![with.run_claim(id, range(2, 20_000)).unwrap()]);
            let b = strip_elapsed(vec![without.run_claim(id, range(2, 20_000)).unwrap()]);
            assert_eq!(a, b, "{id}");
        }
    }
    assert!(!memo.is_empty());
}

#[test]
fn enlarging_the_range_keeps_counterexamples() {
    let b = Budget::default();
    for id in [
        "C-P6",
        "C-ODDPRIME",
        "C-OMEGA",
        "C-INDTAU",
        "C-SPEED1",
        "C-SPEED2",
    ] {
        let small = run_claim(id, range(2, 600), b).unwrap();
        let large = run_claim(id, range(2, 2400), b).unwrap();
        for ce in &small.counterexamples {
            assert!(large.counterexamples.contains(ce), "{id} dropped {ce:?}");
        }
        assert!(stat(&large, "counterexamples_total") >= stat(&small, "counterexamples_total"));
    }
}

#[test]
fn listing_is_capped_but_totals_are_not() {
    let mut runner = Runner::new(Budget::default());
    runner.max_listed = 5;
    let r = runner.run_claim("C-OMEGA", range(2, 3000)).unwrap();
    assert_eq!(r.counterexamples.len(), 5);
    assert!(stat(&r, "counterexamples_total") > 5);
    assert!(r.notes.iter().any(|s| s.contains("the first 5 are listed")));
}

#[test]
fn tight_budgets_surface_as_inconclusive() {
    let budget = Budget {
        max_steps: 10,
        ..Budget::default()
    };
    let r = run_claim("C-TAUFIN", range(2, 100), budget).unwrap();
    assert_eq!(r.verdict, Verdict::Inconclusive);
    assert!(stat(&r, "inconclusive") > 0);
    assert_eq!(r.checked, 99);
    assert!(run_claim(
        "C-TAUFIN",
        range(2, 100),
        Budget {
            max_steps: 0,
            ..budget
        }
    )
    .is_err());
}
