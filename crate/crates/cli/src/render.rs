//! Text rendering helpers for CLI output.

use xhermite::connection::QTable;
use xhermite::report::{CheckStatus, VerificationReport};

/// Table rendering with one polynomial per line, scale folded into a
/// π-denominator in the style of the published tables.
pub fn qtable_text(table: &QTable) -> String {
    let mut out = format!("sigma = {}\n", table.sigma());
    for (k, poly) in table.polys().iter().enumerate() {
        out.push_str(&format!("Q_{k} = {poly}\n"));
    }
    out
}

pub fn status_str(r: &VerificationReport) -> &'static str {
    match r.status {
        CheckStatus::Pass => "pass",
        CheckStatus::Fail => "FAIL",
        CheckStatus::Skipped => "skipped",
    }
}
