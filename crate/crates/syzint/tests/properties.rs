mod common;

use common::*;
use proptest::prelude::*;
use syzint::driver::{solve, Action, SolveOptions, Solver, Strategy as Plan};
use syzint::expr::LinExpr;

fn q_strategy() -> impl Strategy<Value = [LinExpr; 3]> {
    let e = || expr_strategy(vec![(0, vec![0, 1, 2]), (1, vec![0, 1, 2])], 3, 2);
    (e(), e(), e()).prop_map(|(a, b, c)| [a, b, c])
}

fn any_expr() -> impl Strategy<Value = LinExpr> {
    expr_strategy(
        vec![
            (0, vec![0, 1, 2]),
            (1, vec![0, 1, 2]),
            (2, vec![0, 1]),
            (3, vec![2]),
        ],
        4,
        3,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn potentials_of_a_curl_current_come_back(q in q_strategy()) {
        if let Err(e) = divint_roundtrip(&q) {
            prop_assert!(false, "{}", e);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn total_derivatives_commute(e in any_expr(), u in 0usize..3, v in 0usize..3) {
        let reg = random_registry();
        prop_assert!(commutes(&reg, &e, u, v));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_solutions_satisfy_their_system(sys in random_system_strategy()) {
        for strategy in ["syzygy", "conventional"] {
            let opts = SolveOptions {
                strategy: Some(strategy.parse().unwrap()),
                max_steps: Some(60),
                ..SolveOptions::default()
            };
            let (report, _) = solve(&sys, &opts).unwrap();
            prop_assert!(report.oracle.residuals_vanish, "{}", sys.to_json());
            prop_assert!(report.oracle.histories_consistent);
            if let Err(e) = report_checks_out(&sys, &report) {
                prop_assert!(false, "{}: {}", e, sys.to_json());
            }
        }
    }
}

#[test]
fn example_solutions_satisfy_their_system() {
    for (name, src) in EXAMPLES.iter().filter(|(n, _)| *n != "c4") {
        for strategy in ["syzygy", "conventional"] {
            let report = solve_file(src, Some(strategy));
            assert!(report.oracle.residuals_vanish, "{name} {strategy}");
            report_checks_out(&file(src), &report)
                .unwrap_or_else(|e| panic!("{name} {strategy}: {e}"));
        }
    }
}

/// Every reduction on the large system keeps histories exact, and every
/// syzygy harvested along the way expands to zero.
#[test]
fn reductions_keep_histories_exact() {
    let f = file(C4);
    let opts = SolveOptions::default();
    let mut solver = Solver::from_file(&f, &opts).unwrap();
    solver.strategy = Plan(vec![Action::ReducePair]);
    let mut harvested = 0;
    for _ in 0..60 {
        if solver.step().unwrap().is_none() {
            break;
        }
        assert!(solver.sys.histories_consistent());
        for s in &solver.sys.syzygies {
            assert!(solver.sys.evaluate(s).is_zero());
        }
        harvested = harvested.max(solver.sys.syzygies.len());
    }
    assert!(harvested > 30, "only {harvested} syzygies");
}
