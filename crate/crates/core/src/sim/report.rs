use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::group::Backend;
use crate::sharing::Verdict;

use super::config::Protocol;

/// Outcome of one simulation run. Contains no wall-clock data, so equal
/// seeds give byte-identical JSON.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimReport {
    pub seed: u64,
    pub backend: Backend,
    pub nodes: u32,
    /// SHA-256 chain over every delivered event.
    pub trace_hash: String,
    pub final_tick: u64,
    pub messages: MessageCounts,
    pub domains: Vec<DomainReport>,
    /// Domains in which each node ended up holding a secret share.
    pub holdings: BTreeMap<u32, Vec<String>>,
    pub exfiltrated: Vec<ExfiltratedShare>,
    pub success: bool,
}

impl SimReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn domain(&self, id: &str) -> Option<&DomainReport> {
        self.domains.iter().find(|d| d.id == id)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageCounts {
    pub sent: u64,
    pub delivered: u64,
    /// Suppressed by a crashed or silent sender, or addressed to a crashed node.
    pub dropped: u64,
    pub by_kind: BTreeMap<String, u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainReport {
    pub id: String,
    pub protocol: Protocol,
    pub members: Vec<u32>,
    pub threshold: usize,
    /// Tick at which the last member passed each milestone.
    pub phase_ticks: BTreeMap<String, u64>,
    pub success: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frost: Option<FrostReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vss: Option<VssReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub avss: Option<AvssReport>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrostReport {
    pub group_pk: Option<String>,
    /// Every member that finished key generation derived the same key.
    pub key_agreement: bool,
    /// Nodes that aborted key generation, with the peers they blamed.
    pub dkg_aborts: BTreeMap<u32, Vec<u32>>,
    pub coalition: Vec<u32>,
    pub message: String,
    pub signature: Option<String>,
    pub verified: bool,
    /// All finalized nodes hold the same signature bytes.
    pub agreement: bool,
    pub finalized: Vec<u32>,
    /// Ticks from the first node starting to gossip to the last one finalizing.
    pub termination_round: Option<u64>,
    /// Nodes that gossiped forged partials or a mismatched context.
    pub flagged: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub accuser: u32,
    pub dealer: u32,
    pub verdict: Verdict,
    /// Members that adjudicated this complaint; all reach the same verdict.
    pub observers: Vec<u32>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VssReport {
    pub dealer: u32,
    pub commitments: Option<String>,
    /// Members holding a share that verifies against the commitments.
    pub verified_members: Vec<u32>,
    pub verdicts: Vec<VerdictRecord>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AvssReport {
    pub dealer: u32,
    pub deals_received: Vec<u32>,
    pub completed: Vec<u32>,
    /// Completed without a valid deal, from peer points alone.
    pub rebuilt: Vec<u32>,
    pub faulty_senders: Vec<u32>,
    pub shares_verified: bool,
    pub secret: String,
    pub recovered_secret: Option<String>,
    pub secret_matches: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExfiltratedShare {
    pub domain: String,
    pub node: u32,
    pub share: String,
}

/// One delivered or fired event, for replay logs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub tick: u64,
    pub seq: u64,
    pub domain: String,
    pub kind: String,
    pub from: u32,
    pub to: u32,
    pub digest: String,
}
