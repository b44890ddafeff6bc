use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::{Experiment, ExperimentConfig};

/// Version of the JSON result layout.
pub const SCHEMA: u32 = 1;

pub type Row = IndexMap<String, Value>;

/// Build a row from `(key, value)` pairs, keeping their order.
pub fn row<I, K, V>(pairs: I) -> Row
where
    I: IntoIterator<Item = (K, V)>,
    K: Into<String>,
    V: Into<Value>,
{
    pairs.into_iter().map(|(k, v)| (k.into(), v.into())).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictKind {
    /// Per-sample invariant; any violation is a failure.
    Exact,
    /// Random gate, subject to the repetition protocol.
    Statistical,
    /// Informational; never fails.
    Report,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub kind: VerdictKind,
    pub statistic: f64,
    /// Acceptance region for `statistic`, e.g. `"<= -2"` or `"in [0.55, 0.8]"`.
    pub threshold: String,
    pub passed: bool,
    pub samples: usize,
    pub seed: u64,
    pub attempts: u32,
    pub detail: String,
}

impl Verdict {
    fn new(kind: VerdictKind, name: &str, statistic: f64, threshold: String, passed: bool) -> Self {
        Verdict {
            name: name.to_string(),
            kind,
            statistic,
            threshold,
            passed,
            samples: 0,
            seed: 0,
            attempts: 1,
            detail: String::new(),
        }
    }

    /// Exact check: passes iff `violations == 0`.
    pub fn exact(name: &str, violations: u64) -> Self {
        Verdict::new(
            VerdictKind::Exact,
            name,
            violations as f64,
            "== 0".into(),
            violations == 0,
        )
    }

    pub fn at_most(name: &str, statistic: f64, bound: f64) -> Self {
        Verdict::new(
            VerdictKind::Statistical,
            name,
            statistic,
            format!("<= {bound}"),
            statistic <= bound,
        )
    }

    pub fn at_least(name: &str, statistic: f64, bound: f64) -> Self {
        Verdict::new(
            VerdictKind::Statistical,
            name,
            statistic,
            format!(">= {bound}"),
            statistic >= bound,
        )
    }

    pub fn below(name: &str, statistic: f64, bound: f64) -> Self {
        Verdict::new(
            VerdictKind::Statistical,
            name,
            statistic,
            format!("< {bound}"),
            statistic < bound,
        )
    }

    pub fn within(name: &str, statistic: f64, lo: f64, hi: f64) -> Self {
        let ok = statistic >= lo && statistic <= hi;
        Verdict::new(
            VerdictKind::Statistical,
            name,
            statistic,
            format!("in [{lo}, {hi}]"),
            ok,
        )
    }

    /// Statistical check with a boolean outcome (monotonicity and the like).
    pub fn holds(name: &str, ok: bool) -> Self {
        Verdict::new(VerdictKind::Statistical, name, ok as u8 as f64, "== 1".into(), ok)
    }

    pub fn report(name: &str, statistic: f64) -> Self {
        Verdict::new(VerdictKind::Report, name, statistic, String::new(), true)
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    /// Turn an exact check into a hard failure regardless of its kind.
    pub fn as_exact(mut self) -> Self {
        self.kind = VerdictKind::Exact;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub seed: u64,
    /// Seed of the repeat run, present only if one was needed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub retry_seed: Option<u64>,
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub schema: u32,
    pub experiment: Experiment,
    pub config: ExperimentConfig,
    pub rows: Vec<Row>,
    pub verdicts: Vec<Verdict>,
    pub metadata: Metadata,
}

/// Outcome of a single seeded run, before the repetition protocol.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub rows: Vec<Row>,
    pub verdicts: Vec<Verdict>,
}

impl Outcome {
    pub fn push_row(&mut self, r: Row) {
        self.rows.push(r);
    }

    pub fn push(&mut self, v: Verdict) {
        self.verdicts.push(v);
    }

    pub fn extend(&mut self, other: Outcome) {
        self.rows.extend(other.rows);
        self.verdicts.extend(other.verdicts);
    }
}

impl ExperimentResult {
    pub fn exact_failures(&self) -> usize {
        self.failures(VerdictKind::Exact)
    }

    pub fn statistical_failures(&self) -> usize {
        self.failures(VerdictKind::Statistical)
    }

    fn failures(&self, kind: VerdictKind) -> usize {
        self.verdicts.iter().filter(|v| v.kind == kind && !v.passed).count()
    }

    /// 0 if everything passed, 2 on an exact violation, 1 on a statistical
    /// failure.
    pub fn exit_code(&self) -> i32 {
        if self.exact_failures() > 0 {
            2
        } else if self.statistical_failures() > 0 {
            1
        } else {
            0
        }
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }
}
