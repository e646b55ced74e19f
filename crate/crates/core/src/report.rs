//! Structured pass/fail records shared by every verification suite.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

/// One sub-case of a check: a single m-value, grid point, seeded point, …
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseRecord {
    pub label: String,
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// Outcome of one verification check over one level sequence.
///
/// `status` is `pass` iff `worst_residual ≤ tolerance`; exact polynomial
/// checks report residual 0 and put any offending polynomial in the case
/// detail. `skipped` records a refusal (e.g. a potential check on a
/// non-Krein-Adler sequence) without failing the run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub sigma: Vec<u32>,
    pub status: CheckStatus,
    pub worst_residual: f64,
    pub tolerance: f64,
    pub cases: Vec<CaseRecord>,
}

impl VerificationReport {
    /// Builds a report from accumulated cases, deciding pass/fail from the
    /// worst residual.
    pub fn from_cases(
        check: impl Into<String>,
        sigma: &[u32],
        tolerance: f64,
        cases: Vec<CaseRecord>,
    ) -> Self {
        let worst = cases.iter().map(|c| c.residual).fold(0.0f64, f64::max);
        let status = if worst <= tolerance {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        VerificationReport {
            check: check.into(),
            sigma: sigma.to_vec(),
            status,
            worst_residual: worst,
            tolerance,
            cases,
        }
    }

    pub fn skipped(check: impl Into<String>, sigma: &[u32], reason: impl Into<String>) -> Self {
        VerificationReport {
            check: check.into(),
            sigma: sigma.to_vec(),
            status: CheckStatus::Skipped,
            worst_residual: 0.0,
            tolerance: 0.0,
            cases: vec![CaseRecord {
                label: "skipped".into(),
                residual: 0.0,
                detail: Some(reason.into()),
            }],
        }
    }

    pub fn passed(&self) -> bool {
        self.status != CheckStatus::Fail
    }
}

/// Case helper for exact polynomial identities: residual 0 when the
/// difference vanishes, 1 (with the offending polynomial) otherwise.
pub fn exact_case(label: impl Into<String>, difference_is_zero: bool, offending: impl FnOnce() -> String) -> CaseRecord {
    if difference_is_zero {
        CaseRecord {
            label: label.into(),
            residual: 0.0,
            detail: None,
        }
    } else {
        CaseRecord {
            label: label.into(),
            residual: 1.0,
            detail: Some(offending()),
        }
    }
}
