use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{Direction, Keys, Payload, ProtocolId};
use crate::bits::BitString;
use crate::canonical;
use crate::statevector::QuantumState;

/// One transmission between the parties.
#[derive(Debug, Clone, PartialEq)]
pub struct PassRecord {
    /// 1-based pass number.
    pub index: usize,
    pub step: String,
    pub direction: Direction,
    /// Registers physically travelling on this pass.
    pub in_flight: Vec<String>,
    /// Global state as handed to the channel.
    pub snapshot: QuantumState,
    /// Whether the channel returned something other than what was sent.
    pub tampered: bool,
}

/// A zero-check of a tag register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub label: String,
    pub party: String,
    pub register: String,
    pub zero_probability: f64,
    pub accepted: bool,
    /// Measured register value when checks are sampled.
    pub sampled: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "status")]
pub enum RunStatus {
    Completed,
    /// A check rejected; the run stopped at this checkpoint.
    Aborted { check: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub status: RunStatus,
    /// Quantum payload: fidelity of the receiver's message register with the
    /// sent message. Classical payload: probability of reading the sent bits.
    pub fidelity: Option<f64>,
    pub recovered: Option<BitString>,
    pub recovered_probability: Option<f64>,
    pub final_state: QuantumState,
}

/// Ordered record of a protocol run.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolTranscript {
    pub protocol: ProtocolId,
    pub payload: Payload,
    pub keys: Keys,
    pub passes: Vec<PassRecord>,
    pub checks: Vec<CheckRecord>,
    /// Registers an honest party had to leave entangled instead of
    /// discarding (only possible in non-strict runs).
    pub signals: Vec<String>,
    pub outcome: Outcome,
    pub weakness: Option<String>,
}

/// How state snapshots are written out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SnapshotMode {
    #[default]
    Full,
    /// SHA-256 of the canonical snapshot JSON instead of amplitudes.
    Digest,
}

pub fn snapshot_json(state: &QuantumState, mode: SnapshotMode) -> Value {
    let full = serde_json::to_value(state).expect("states serialize");
    match mode {
        SnapshotMode::Full => full,
        SnapshotMode::Digest => json!({ "digest": canonical::digest(&full) }),
    }
}

impl ProtocolTranscript {
    pub fn is_completed(&self) -> bool {
        self.outcome.status == RunStatus::Completed
    }

    pub fn check(&self, label: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.label == label)
    }

    pub fn to_json(&self, mode: SnapshotMode) -> Value {
        let passes: Vec<Value> = self
            .passes
            .iter()
            .map(|p| {
                json!({
                    "index": p.index,
                    "step": p.step,
                    "direction": p.direction,
                    "in_flight": p.in_flight,
                    "snapshot": snapshot_json(&p.snapshot, mode),
                    "tampered": p.tampered,
                })
            })
            .collect();
        json!({
            "protocol_id": self.protocol,
            "payload": self.payload,
            "keys": self.keys,
            "passes": passes,
            "checks": self.checks,
            "signals": self.signals,
            "weakness": self.weakness,
            "outcome": {
                "status": self.outcome.status,
                "fidelity": self.outcome.fidelity,
                "recovered": self.outcome.recovered,
                "recovered_probability": self.outcome.recovered_probability,
                "final_state": snapshot_json(&self.outcome.final_state, mode),
            },
        })
    }
}
