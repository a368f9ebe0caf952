//! Acceptance gate. Runs without the libtest harness so that the
//! per-criterion lines are always printed; exits non-zero on any failure.

use std::process::ExitCode;

use semilab::acceptance::{budget, run_all, run_one, tol, Outcome, CRITERIA};

const SEED: u64 = 0x5eed;

/// Tolerances the battery is accepted under.
const PINNED: [(&str, f64, f64); 12] = [
    ("appendix residual", tol::APPENDIX_RESIDUAL, 1e-10),
    ("sharpness ratio", tol::SHARPNESS, 1e-8),
    ("eigenvalues", tol::EIGEN, 1e-10),
    ("curvature minimum", tol::CURVATURE_MIN, 1e-8),
    ("identities", tol::IDENTITY, 1e-12),
    ("seconds per certificate", tol::CERTIFY_SECONDS, 10.0),
    ("solver ratio", tol::SOLVER_RATIO, 0.2),
    ("solver error", tol::SOLVER_ERROR, 1e-6),
    ("defect", tol::DEFECT, 1e-4),
    ("harnack closed form", tol::HARNACK_CLOSED, 1e-12),
    ("thresholds", tol::THRESHOLD, 1e-15),
    ("scaling", tol::SCALING, 1e-8),
];

fn strip(v: Vec<Outcome>) -> Vec<(u8, bool, String)> {
    v.into_iter().map(|o| (o.id, o.pass, o.detail)).collect()
}

fn main() -> ExitCode {
    let mut ok = true;
    for (name, actual, pinned) in PINNED {
        if actual != pinned {
            println!("[FAIL] tolerance {name}: {actual:e} != {pinned:e}");
            ok = false;
        }
    }
    assert_eq!(budget(1), Some(1.0));
    assert_eq!(budget(2), Some(1.0));

    let outcomes = run_all(SEED);
    ok &= outcomes.len() == CRITERIA.len();
    let mut failed = Vec::new();
    for o in &outcomes {
        let within_budget = budget(o.id).is_none_or(|b| o.seconds < b);
        println!("{o}{}", if within_budget { "" } else { "  (over time budget)" });
        if !o.pass || !within_budget {
            failed.push(o.id);
        }
    }
    println!("acceptance: {}/{} criteria passed", outcomes.len() - failed.len(), outcomes.len());
    ok &= failed.is_empty();

    let ids = [1, 2, 3, 4, 10];
    let again = |_| strip(ids.iter().filter_map(|&i| run_one(i, SEED)).collect());
    let deterministic = again(0) == again(1);
    println!("[{}] repeated runs agree on criteria {ids:?}", if deterministic { "PASS" } else { "FAIL" });
    ok &= deterministic;

    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
