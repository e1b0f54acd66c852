//! Scenario configuration, read from TOML.
//!
//! ```toml
//! seed = 7
//! nodes = 6
//! backend = "ed25519"
//!
//! [delay]
//! kind = "uniform"
//! lo = 1
//! hi = 3
//!
//! [[domains]]
//! id = "A"
//! members = [1, 2, 3, 4]
//! threshold = 3
//! protocol = "frost"
//! message = "hello"
//!
//! [[adversary]]
//! node = 2
//! behavior = { kind = "crash", at = 5 }
//! ```

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dkg::max_participants;
use crate::group::{Backend, Ed25519, Group, ParticipantId, Toy};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{path}: {reason}")]
    Invalid { path: String, reason: String },
}

fn invalid(path: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { path: path.into(), reason: reason.into() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// Key generation, binding two-round signing, transcript gossip.
    Frost,
    /// Single dealer Pedersen sharing with complaints.
    PedersenVss,
    /// Single dealer bivariate sharing with point exchange.
    Avss,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub id: String,
    /// Global node ids, 1-based.
    pub members: Vec<u32>,
    pub threshold: usize,
    #[serde(default = "default_protocol")]
    pub protocol: Protocol,
    #[serde(default = "default_message")]
    pub message: String,
    /// Global ids of the signers; defaults to the first `threshold` members.
    #[serde(default)]
    pub coalition: Option<Vec<u32>>,
    /// Partials a transcript needs before it counts as complete.
    #[serde(default)]
    pub contributions_required: Option<usize>,
    /// Dealer for the single-dealer protocols; defaults to the first member.
    #[serde(default)]
    pub dealer: Option<u32>,
    /// Dealt secret for the single-dealer protocols; random when absent.
    #[serde(default)]
    pub secret: Option<u64>,
}

fn default_protocol() -> Protocol {
    Protocol::Frost
}

fn default_message() -> String {
    "threshold".to_string()
}

impl DomainConfig {
    pub fn sorted_members(&self) -> Vec<u32> {
        let mut m = self.members.clone();
        m.sort_unstable();
        m
    }

    /// Participant id inside this domain: position in the sorted member list, plus one.
    pub fn local_id(&self, node: u32) -> Option<ParticipantId> {
        let pos = self.sorted_members().iter().position(|&m| m == node)?;
        ParticipantId::new(pos as u32 + 1)
    }

    pub fn global_id(&self, local: ParticipantId) -> u32 {
        self.sorted_members()[local.get() as usize - 1]
    }

    pub fn coalition_nodes(&self) -> Vec<u32> {
        match &self.coalition {
            Some(c) => {
                let mut c = c.clone();
                c.sort_unstable();
                c
            }
            None => self.sorted_members().into_iter().take(self.threshold).collect(),
        }
    }

    pub fn required(&self) -> usize {
        self.contributions_required.unwrap_or(self.coalition_nodes().len())
    }

    pub fn dealer_node(&self) -> u32 {
        self.dealer.unwrap_or_else(|| self.sorted_members()[0])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DelayModel {
    Fixed { ticks: u64 },
    Uniform { lo: u64, hi: u64 },
}

impl Default for DelayModel {
    fn default() -> Self {
        DelayModel::Fixed { ticks: 1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Behavior {
    /// Stops at the given tick.
    Crash { at: u64 },
    /// Stops after sending this many messages.
    CrashAfterSends { count: u64 },
    /// Sends perturbed secret shares to every other member.
    CorruptShares,
    /// Tells different peers different things: bogus complaints in
    /// Pedersen sharing, mismatched gossip context in signing.
    Equivocate,
    /// Never sends.
    Silent,
    /// Gossips a perturbed partial.
    ForgePartial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversaryConfig {
    pub node: u32,
    pub behavior: Behavior,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GossipConfig {
    #[serde(default = "default_c")]
    pub c: u32,
    #[serde(default = "default_broadcast")]
    pub broadcast_prob_num: u64,
}

fn default_c() -> u32 {
    4
}

fn default_broadcast() -> u64 {
    2
}

impl Default for GossipConfig {
    fn default() -> Self {
        GossipConfig { c: default_c(), broadcast_prob_num: default_broadcast() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub seed: u64,
    pub nodes: u32,
    #[serde(default = "default_backend")]
    pub backend: Backend,
    pub domains: Vec<DomainConfig>,
    #[serde(default)]
    pub delay: DelayModel,
    #[serde(default)]
    pub adversary: Vec<AdversaryConfig>,
    #[serde(default)]
    pub gossip: GossipConfig,
    #[serde(default = "default_max_ticks")]
    pub max_ticks: u64,
    /// Domains whose secret shares are copied into the report, as if leaked.
    #[serde(default)]
    pub exfiltrate: Vec<String>,
}

fn default_backend() -> Backend {
    Backend::Ed25519
}

fn default_max_ticks() -> u64 {
    10_000
}

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn behavior_of(&self, node: u32) -> Option<Behavior> {
        self.adversary.iter().find(|a| a.node == node).map(|a| a.behavior)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.nodes == 0 {
            return Err(invalid("nodes", "must be at least 1"));
        }
        if self.domains.is_empty() {
            return Err(invalid("domains", "at least one domain is required"));
        }
        if self.max_ticks == 0 {
            return Err(invalid("max_ticks", "must be at least 1"));
        }
        match self.delay {
            DelayModel::Fixed { ticks: 0 } => {
                return Err(invalid("delay.ticks", "must be at least 1"));
            }
            DelayModel::Uniform { lo, hi } if lo == 0 || hi < lo => {
                return Err(invalid("delay", "need 1 <= lo <= hi"));
            }
            _ => {}
        }
        if self.gossip.c < 4 {
            return Err(invalid("gossip.c", "must be at least 4"));
        }
        if self.gossip.broadcast_prob_num == 0 {
            return Err(invalid("gossip.broadcast_prob_num", "must be positive"));
        }
        let cap = match self.backend {
            Backend::Toy => max_participants::<<Toy as Group>::Scalar>(),
            Backend::Ed25519 => max_participants::<<Ed25519 as Group>::Scalar>(),
        };
        let mut seen_ids = BTreeSet::new();
        for (k, d) in self.domains.iter().enumerate() {
            let p = |field: &str| format!("domains[{k}].{field}");
            if d.id.is_empty() {
                return Err(invalid(p("id"), "must not be empty"));
            }
            if !seen_ids.insert(d.id.clone()) {
                return Err(invalid(p("id"), format!("duplicate domain id {:?}", d.id)));
            }
            let members: BTreeSet<u32> = d.members.iter().copied().collect();
            if members.len() != d.members.len() {
                return Err(invalid(p("members"), "duplicate member"));
            }
            if members.is_empty() {
                return Err(invalid(p("members"), "must not be empty"));
            }
            if let Some(&m) = members.iter().find(|&&m| m == 0 || m > self.nodes) {
                return Err(invalid(p("members"), format!("node {m} outside 1..={}", self.nodes)));
            }
            if cap.is_some_and(|c| members.len() as u64 > c) {
                return Err(invalid(p("members"), "too many members for the toy group"));
            }
            if d.threshold < 1 || d.threshold > members.len() {
                return Err(invalid(p("threshold"), format!("need 1 <= t <= {}", members.len())));
            }
            if d.protocol == Protocol::PedersenVss && d.threshold >= members.len() {
                return Err(invalid(p("threshold"), "Pedersen sharing needs t < members"));
            }
            if let Some(c) = &d.coalition {
                if let Some(&m) = c.iter().find(|m| !members.contains(m)) {
                    return Err(invalid(p("coalition"), format!("node {m} is not a member")));
                }
                let set: BTreeSet<_> = c.iter().collect();
                if set.len() != c.len() {
                    return Err(invalid(p("coalition"), "duplicate signer"));
                }
                if c.len() < d.threshold {
                    return Err(invalid(p("coalition"), format!("need at least {} signers", d.threshold)));
                }
            }
            if let Some(r) = d.contributions_required {
                if r < 1 || r > d.coalition_nodes().len() {
                    return Err(invalid(p("contributions_required"), "must be between 1 and the coalition size"));
                }
            }
            if let Some(dealer) = d.dealer {
                if !members.contains(&dealer) {
                    return Err(invalid(p("dealer"), format!("node {dealer} is not a member")));
                }
            }
        }
        let mut adversaries = BTreeSet::new();
        for (k, a) in self.adversary.iter().enumerate() {
            if a.node == 0 || a.node > self.nodes {
                return Err(invalid(format!("adversary[{k}].node"), format!("node {} outside 1..={}", a.node, self.nodes)));
            }
            if !adversaries.insert(a.node) {
                return Err(invalid(format!("adversary[{k}].node"), "node listed twice"));
            }
        }
        for (k, name) in self.exfiltrate.iter().enumerate() {
            if !seen_ids.contains(name) {
                return Err(invalid(format!("exfiltrate[{k}]"), format!("unknown domain {name:?}")));
            }
        }
        Ok(())
    }
}

/// Bundled scenarios, by name.
pub const BUNDLED: &[(&str, &str)] = &[
    ("three-domains", include_str!("../../scenarios/three-domains.toml")),
    ("corrupt-dealer", include_str!("../../scenarios/corrupt-dealer.toml")),
    ("avss-dealer-crash", include_str!("../../scenarios/avss-dealer-crash.toml")),
];

pub fn bundled_scenario(name: &str) -> Option<SimConfig> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| SimConfig::from_toml(text).expect("bundled scenarios are valid"))
}
