//! Machine-readable verification reports.
//!
//! A report records the tool version, a digest of the run inputs, and one
//! record per check. Serialization sorts keys, so a report is byte-stable
//! for fixed inputs, version, and seed.

use serde_json::{json, Map, Value};

/// Outcome of a single check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    /// The checked identity held at the stated tolerance.
    Pass,
    /// The checked identity failed.
    Fail,
    /// The check did not run on this input.
    Skip,
}

impl Status {
    /// Canonical tag string.
    pub fn tag(&self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        }
    }
}

/// One verified identity: its id, the statement it certifies, the outcome,
/// measured values, and the tolerance used.
#[derive(Clone, Debug)]
pub struct Check {
    /// Stable dotted identifier, e.g. `flip.norm.d2.p1`.
    pub id: String,
    /// The mathematical statement being checked, or `"plumbing"`.
    pub paper_ref: String,
    /// Outcome.
    pub status: Status,
    /// Named measured values.
    pub measured: Map<String, Value>,
    /// Tolerance the comparison used; 0 for exact checks.
    pub tolerance: f64,
}

impl Check {
    /// A check whose outcome is already decided by `pass`.
    pub fn from_outcome(
        id: impl Into<String>,
        statement: impl Into<String>,
        pass: bool,
        measured: Map<String, Value>,
        tolerance: f64,
    ) -> Self {
        Check {
            id: id.into(),
            paper_ref: statement.into(),
            status: if pass { Status::Pass } else { Status::Fail },
            measured,
            tolerance,
        }
    }

    fn to_json(&self) -> Value {
        json!({
            "id": self.id,
            "paper_ref": self.paper_ref,
            "status": self.status.tag(),
            "measured": Value::Object(self.measured.clone()),
            "tolerance": self.tolerance,
        })
    }
}

/// A full verification run.
#[derive(Clone, Debug)]
pub struct Report {
    /// Tool version.
    pub version: String,
    /// Suite selector the run used.
    pub suite: String,
    /// Corpus seed.
    pub seed: u64,
    /// FNV-1a digest of the canonical input description.
    pub input_digest: String,
    /// All check records, in execution order.
    pub checks: Vec<Check>,
}

impl Report {
    /// Report for a run over the named suite.
    pub fn new(suite: &str, seed: u64, checks: Vec<Check>) -> Self {
        let canonical = format!("suite={suite};seed={seed}");
        Report {
            version: env!("CARGO_PKG_VERSION").to_string(),
            suite: suite.to_string(),
            seed,
            input_digest: format!("{:016x}", fnv1a64(canonical.as_bytes())),
            checks,
        }
    }

    /// Number of checks with the given status.
    pub fn count(&self, status: Status) -> usize {
        self.checks.iter().filter(|c| c.status == status).count()
    }

    /// True when no check failed.
    pub fn all_pass(&self) -> bool {
        self.count(Status::Fail) == 0
    }

    /// The report as a JSON value with sorted keys.
    pub fn to_json(&self) -> Value {
        let checks: Vec<Value> = self.checks.iter().map(Check::to_json).collect();
        json!({
            "version": self.version,
            "suite": self.suite,
            "seed": self.seed,
            "input_digest": self.input_digest,
            "checks": checks,
            "summary": {
                "pass": self.count(Status::Pass),
                "fail": self.count(Status::Fail),
                "skip": self.count(Status::Skip),
            },
        })
    }

    /// One-line human summary.
    pub fn summary_line(&self) -> String {
        format!(
            "verify {}: {} PASS, {} FAIL, {} SKIP",
            self.suite,
            self.count(Status::Pass),
            self.count(Status::Fail),
            self.count(Status::Skip)
        )
    }
}

/// FNV-1a hash of a byte string.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for b in bytes {
        hash ^= *b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}
