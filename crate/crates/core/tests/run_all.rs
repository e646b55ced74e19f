//! The default verification sweep: every suite over the default sequence
//! set must come back green (skips allowed, failures not).

use xhermite::report::CheckStatus;
use xhermite::verify::{run_all, VerifyConfig};
use xhermite::wronskian::LevelSequence;

#[test]
fn default_sweep_is_green() {
    let sigmas: Vec<LevelSequence> = [vec![1u32, 2], vec![2, 3], vec![3, 4], vec![1, 2, 3, 4]]
        .into_iter()
        .map(|l| LevelSequence::new(l).unwrap())
        .collect();
    let reports = run_all(&sigmas, &VerifyConfig::default());
    let mut failed = Vec::new();
    for r in &reports {
        if r.status == CheckStatus::Fail {
            failed.push(format!(
                "{} sigma={:?} worst={:.3e}",
                r.check, r.sigma, r.worst_residual
            ));
        }
    }
    assert!(failed.is_empty(), "failing checks: {failed:#?}");
    // Closed forms exist only for {1,2} and {2,3}; those runs must not skip.
    let closed: Vec<_> = reports
        .iter()
        .filter(|r| r.check == "closed-form-propagator")
        .collect();
    assert_eq!(closed.len(), 4);
    assert_eq!(closed[0].status, CheckStatus::Pass);
    assert_eq!(closed[1].status, CheckStatus::Pass);
    assert_eq!(closed[2].status, CheckStatus::Skipped);
    assert_eq!(closed[3].status, CheckStatus::Skipped);
}
