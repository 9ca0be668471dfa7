//! Pipelines that run the other modules against each claim and emit a
//! bundle of certificates.
//!
//! A bundle serializes to canonical JSON: object keys sorted, no floating
//! point, rationals as `"num/den"` strings, matrices as row-major arrays.

mod config;
mod json;
mod pipelines;
mod verify;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub use config::{HSpec, RunConfig, KEYS};
pub use pipelines::{run_dihedral, run_quaternionic, run_sl2z, PAPER_INDEX};
pub use verify::{reverify, Recheck};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Verified,
    /// Refuted by a finite computation at the recorded level only.
    RefutedAtThisLevel,
    NotFound,
    /// Recorded, not computed.
    Assumption,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub claim: String,
    /// Controls check that a degenerate input behaves as expected.
    pub control: bool,
    pub depends_on: Vec<String>,
    pub inputs: Value,
    pub method: String,
    pub witness: Value,
    pub verdict: Verdict,
    pub tool_version: String,
    pub config_hash: String,
}

/// Where a pipeline stopped early, and why.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Halt {
    pub stage: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bundle {
    pub pipeline: String,
    pub tool_version: String,
    pub config: BTreeMap<String, String>,
    pub config_hash: String,
    pub certificates: Vec<Certificate>,
    pub halted: Option<Halt>,
}

impl Bundle {
    /// Canonical text form: sorted keys, two-space indent, trailing newline.
    pub fn to_canonical_json(&self) -> String {
        let value = canonicalize(serde_json::to_value(self).expect("bundle serializes"));
        let mut s = serde_json::to_string_pretty(&value).expect("value serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("bundle: {e}")))
    }

    pub fn certificate(&self, claim: &str) -> Option<&Certificate> {
        self.certificates.iter().find(|c| c.claim == claim)
    }

    /// 0 when every claim verified or every control behaved, 1 when a claim
    /// was refuted at its level or the pipeline halted.
    pub fn exit_code(&self) -> i32 {
        let refuted = self.certificates.iter().any(|c| c.verdict == Verdict::RefutedAtThisLevel);
        if refuted || self.halted.is_some() {
            1
        } else {
            0
        }
    }

    /// One `claim: verdict` line per certificate.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.certificates {
            let v = serde_json::to_value(c.verdict).expect("verdict serializes");
            let tag = if c.control { " (control)" } else { "" };
            s.push_str(&format!("{}{}: {}\n", c.claim, tag, v.as_str().unwrap_or("?")));
        }
        if let Some(h) = &self.halted {
            s.push_str(&format!("halted at {}: {}\n", h.stage, h.reason));
        }
        s
    }
}

/// Rebuilds every object with sorted keys, whatever map type serde_json
/// was compiled with.
fn canonicalize(v: Value) -> Value {
    match v {
        Value::Object(m) => {
            let sorted: BTreeMap<String, Value> = m.into_iter().map(|(k, v)| (k, canonicalize(v))).collect();
            Value::Object(sorted.into_iter().collect())
        }
        Value::Array(xs) => Value::Array(xs.into_iter().map(canonicalize).collect()),
        other => other,
    }
}

/// Accumulates certificates in stage order.
struct Builder {
    bundle: Bundle,
}

impl Builder {
    fn new(pipeline: &str, cfg: &RunConfig) -> Self {
        Builder {
            bundle: Bundle {
                pipeline: pipeline.into(),
                tool_version: TOOL_VERSION.into(),
                config: cfg.pairs(),
                config_hash: cfg.hash(),
                certificates: Vec::new(),
                halted: None,
            },
        }
    }

    fn verdict_of(&self, claim: &str) -> Option<Verdict> {
        self.bundle.certificate(claim).map(|c| c.verdict)
    }

    /// Appends a certificate. A dependency that is missing or neither
    /// verified nor an assumption is a pipeline bug.
    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        claim: &str,
        control: bool,
        depends_on: &[&str],
        inputs: Value,
        method: &str,
        witness: Value,
        verdict: Verdict,
    ) {
        for d in depends_on {
            let v = self.verdict_of(d);
            assert!(matches!(v, Some(Verdict::Verified | Verdict::Assumption)), "{claim} cites {d}, which is {v:?}");
        }
        let hash = self.bundle.config_hash.clone();
        self.bundle.certificates.push(Certificate {
            claim: claim.into(),
            control,
            depends_on: depends_on.iter().map(|s| s.to_string()).collect(),
            inputs,
            method: method.into(),
            witness,
            verdict,
            tool_version: TOOL_VERSION.into(),
            config_hash: hash,
        });
    }

    fn halt(&mut self, stage: &str, reason: impl Into<String>) {
        self.bundle.halted = Some(Halt { stage: stage.into(), reason: reason.into() });
    }

    fn finish(self) -> Bundle {
        self.bundle
    }
}
