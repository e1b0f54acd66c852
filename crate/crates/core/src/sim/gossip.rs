//! Transcript gossip for leaderless signature aggregation.
//!
//! Every node keeps a transcript of verified partial signatures for one
//! signing session and each round pushes it to `min(n − 1, ⌈c·log2 n⌉)`
//! random peers. Incoming contributions are checked individually before
//! being merged. A node whose transcript is complete broadcasts it with
//! probability 2/n per round; observing a broadcast ends the protocol.
//! When several complete transcripts are broadcast in the same tick, nodes
//! adopt the one with the smallest (context hash, content hash).

use std::collections::{BTreeMap, BTreeSet};

use sha2::{Digest, Sha256};

use crate::dkg::KeyShare;
use crate::group::{Group, ParticipantId, PrimeField};
use crate::rng::SeededRng;
use crate::sign::{aggregate_with_context, SessionContext, Signature, Signer, SigningPackage};

use super::queue::EventQueue;

/// Verified partials for one signing session.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transcript<G: Group> {
    pub domain: String,
    pub context_hash: [u8; 32],
    pub contributions: BTreeMap<ParticipantId, G::Scalar>,
}

impl<G: Group> Transcript<G> {
    pub fn new(domain: impl Into<String>, context_hash: [u8; 32]) -> Self {
        Transcript { domain: domain.into(), context_hash, contributions: BTreeMap::new() }
    }

    pub fn len(&self) -> usize {
        self.contributions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contributions.is_empty()
    }

    pub fn content_hash(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(self.context_hash);
        for (id, z) in &self.contributions {
            h.update(id.to_be_bytes());
            h.update(z.to_bytes());
        }
        h.finalize().into()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.context_hash.to_vec();
        for (id, z) in &self.contributions {
            out.extend_from_slice(&id.to_be_bytes());
            out.extend(z.to_bytes());
        }
        out
    }

    /// Id-keyed union; entries already present are kept.
    pub fn merge(&mut self, other: &Transcript<G>) {
        for (id, z) in &other.contributions {
            self.contributions.entry(*id).or_insert(*z);
        }
    }

    fn adoption_key(&self) -> ([u8; 32], [u8; 32]) {
        (self.context_hash, self.content_hash())
    }
}

/// ⌈c·log2 n⌉ capped at n − 1.
pub fn fanout(n: usize, c: u32) -> usize {
    if n <= 1 {
        return 0;
    }
    let want = (c as f64 * (n as f64).log2()).ceil() as usize;
    want.min(n - 1)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReceiveOutcome {
    pub merged: Vec<ParticipantId>,
    /// Contributors whose partial failed the check.
    pub rejected: Vec<ParticipantId>,
    pub context_mismatch: bool,
}

/// Gossip-side state of one node in one session.
#[derive(Clone, Debug)]
pub struct GossipNode<G: Group> {
    id: ParticipantId,
    members: Vec<ParticipantId>,
    ctx: SessionContext<G>,
    pk_shares: BTreeMap<ParticipantId, G::Element>,
    required: usize,
    c: u32,
    broadcast_num: u64,
    transcript: Transcript<G>,
    flagged: BTreeSet<ParticipantId>,
    candidates: Vec<Transcript<G>>,
    finalized: Option<Signature<G>>,
}

impl<G: Group> GossipNode<G> {
    pub fn new(
        id: ParticipantId,
        domain: &str,
        members: Vec<ParticipantId>,
        ctx: SessionContext<G>,
        pk_shares: BTreeMap<ParticipantId, G::Element>,
        required: usize,
        c: u32,
    ) -> Self {
        let transcript = Transcript::new(domain, ctx.context_hash);
        GossipNode {
            id,
            members,
            ctx,
            pk_shares,
            required,
            c,
            broadcast_num: 2,
            transcript,
            flagged: BTreeSet::new(),
            candidates: Vec::new(),
            finalized: None,
        }
    }

    /// Numerator of the per-round broadcast probability num/n (default 2).
    pub fn set_broadcast_numerator(&mut self, num: u64) {
        self.broadcast_num = num;
    }

    pub fn id(&self) -> ParticipantId {
        self.id
    }

    pub fn transcript(&self) -> &Transcript<G> {
        &self.transcript
    }

    pub fn flagged(&self) -> &BTreeSet<ParticipantId> {
        &self.flagged
    }

    pub fn finalized(&self) -> Option<&Signature<G>> {
        self.finalized.as_ref()
    }

    pub fn is_complete(&self) -> bool {
        self.transcript.len() >= self.required
    }

    /// Adds this node's own partial after checking it like any other.
    pub fn contribute(&mut self, z: G::Scalar) -> bool {
        let ok = self
            .pk_shares
            .get(&self.id)
            .is_some_and(|pk| self.ctx.verify_partial(self.id, &z, pk));
        if ok {
            self.transcript.contributions.insert(self.id, z);
        }
        ok
    }

    /// Inserts a contribution without checking it. Only the simulator's
    /// forging adversary uses this.
    pub(crate) fn insert_unchecked(&mut self, id: ParticipantId, z: G::Scalar) {
        self.transcript.contributions.insert(id, z);
    }

    /// Peers to push the current transcript to this round.
    pub fn gossip_round(&self, rng: &mut SeededRng) -> Vec<(ParticipantId, Transcript<G>)> {
        if self.finalized.is_some() || self.transcript.is_empty() {
            return Vec::new();
        }
        let mut peers: Vec<ParticipantId> = self.members.iter().copied().filter(|&m| m != self.id).collect();
        let k = fanout(self.members.len(), self.c);
        // partial Fisher-Yates: first k slots are a uniform k-subset
        for i in 0..k {
            let j = i + rng.below((peers.len() - i) as u64) as usize;
            peers.swap(i, j);
        }
        peers.truncate(k);
        peers.sort();
        peers.into_iter().map(|p| (p, self.transcript.clone())).collect()
    }

    /// Verifies each unseen contribution and merges the valid ones.
    pub fn gossip_receive(&mut self, from: ParticipantId, incoming: &Transcript<G>) -> ReceiveOutcome {
        let mut out = ReceiveOutcome::default();
        if incoming.context_hash != self.transcript.context_hash {
            out.context_mismatch = true;
            self.flagged.insert(from);
            return out;
        }
        for (id, z) in &incoming.contributions {
            if let Some(held) = self.transcript.contributions.get(id) {
                if held != z {
                    out.rejected.push(*id);
                }
                continue;
            }
            let valid = self.pk_shares.get(id).is_some_and(|pk| self.ctx.verify_partial(*id, z, pk));
            if valid {
                self.transcript.contributions.insert(*id, *z);
                out.merged.push(*id);
            } else {
                out.rejected.push(*id);
            }
        }
        if !out.rejected.is_empty() {
            self.flagged.insert(from);
        }
        out
    }

    /// With probability num/n, broadcast a complete transcript and finalize.
    pub fn gossip_maybe_terminate(&mut self, rng: &mut SeededRng) -> Option<Transcript<G>> {
        if self.finalized.is_some() || !self.is_complete() {
            return None;
        }
        if !rng.chance(self.broadcast_num, self.members.len() as u64) {
            return None;
        }
        let t = self.transcript.clone();
        self.candidates.push(t.clone());
        self.settle();
        Some(t)
    }

    /// Records a broadcast transcript; call [`settle`](Self::settle) once
    /// all broadcasts for the current tick are in.
    pub fn observe_broadcast(&mut self, t: Transcript<G>) -> bool {
        if self.finalized.is_some() || t.context_hash != self.transcript.context_hash || t.len() < self.required {
            return false;
        }
        let all_valid = t.contributions.iter().all(|(id, z)| {
            self.pk_shares.get(id).is_some_and(|pk| self.ctx.verify_partial(*id, z, pk))
        });
        if all_valid {
            self.candidates.push(t);
        }
        all_valid
    }

    /// Adopts the smallest candidate transcript and aggregates it.
    pub fn settle(&mut self) -> Option<&Signature<G>> {
        if self.finalized.is_none() {
            if let Some(best) = self.candidates.iter().min_by_key(|t| t.adoption_key()).cloned() {
                if let Ok(sig) = aggregate_with_context(&self.ctx, &best.contributions, &self.pk_shares) {
                    self.transcript = best;
                    self.finalized = Some(sig);
                }
            }
            self.candidates.clear();
        }
        self.finalized.as_ref()
    }
}

/// Knobs for a standalone gossip session.
#[derive(Clone, Debug)]
pub struct GossipParams {
    pub c: u32,
    pub broadcast_num: u64,
    pub max_rounds: u64,
}

impl Default for GossipParams {
    fn default() -> Self {
        GossipParams { c: 4, broadcast_num: 2, max_rounds: 1000 }
    }
}

#[derive(Clone, Debug)]
pub struct GossipOutcome<G: Group> {
    /// Round in which the last node finalized; `None` if some never did.
    pub rounds: Option<u64>,
    pub signatures: BTreeMap<ParticipantId, Signature<G>>,
    pub messages: u64,
    pub broadcasts: u64,
}

enum GossipEvent<G: Group> {
    Tick(ParticipantId),
    Push { from: ParticipantId, to: ParticipantId, transcript: Transcript<G> },
    Broadcast { to: ParticipantId, transcript: Transcript<G> },
    Settle(ParticipantId),
}

/// Fault-free gossip session over already generated keys: the coalition
/// signs `message`, then all key holders gossip until everyone finalizes.
/// One round per tick, one tick per hop.
pub fn run_gossip_session<G: Group>(
    keys: &[KeyShare<G>],
    coalition: &[ParticipantId],
    message: &[u8],
    params: &GossipParams,
    seed: u64,
) -> Result<GossipOutcome<G>, crate::sign::SignError> {
    let root = SeededRng::from_u64(seed);
    let mut signers: BTreeMap<ParticipantId, Signer<G>> =
        keys.iter().map(|k| (k.id, Signer::new(k.clone()))).collect();
    let mut sign_rng = root.fork("nonces");
    let mut commitments = BTreeMap::new();
    for id in coalition {
        let s = signers.get_mut(id).ok_or(crate::sign::SignError::NotInCoalition(*id))?;
        commitments.insert(*id, s.round1(1, &mut sign_rng).pairs[0]);
    }
    let package = SigningPackage::new(message.to_vec(), commitments)?;
    let group_pk = keys[0].group_pk;
    let ctx = SessionContext::new(&package, &group_pk)?;
    let pk_shares = keys[0].verification_shares();
    let members: Vec<ParticipantId> = keys.iter().map(|k| k.id).collect();

    let mut nodes: BTreeMap<ParticipantId, GossipNode<G>> = BTreeMap::new();
    let mut rngs: BTreeMap<ParticipantId, SeededRng> = BTreeMap::new();
    for id in &members {
        let mut node = GossipNode::new(*id, "session", members.clone(), ctx.clone(), pk_shares.clone(), coalition.len(), params.c);
        node.set_broadcast_numerator(params.broadcast_num);
        if coalition.contains(id) {
            let z = signers.get_mut(id).expect("member").partial_with_context(&package, &ctx)?;
            node.contribute(z);
        }
        nodes.insert(*id, node);
        rngs.insert(*id, root.fork(&format!("gossip/{id}")));
    }

    let mut q: EventQueue<GossipEvent<G>> = EventQueue::default();
    for id in &members {
        q.push(1, GossipEvent::Tick(*id));
    }
    let mut outcome = GossipOutcome { rounds: None, signatures: BTreeMap::new(), messages: 0, broadcasts: 0 };
    while let Some((tick, _, ev)) = q.pop() {
        if tick > params.max_rounds {
            break;
        }
        match ev {
            GossipEvent::Tick(id) => {
                let node = nodes.get_mut(&id).expect("member");
                if node.finalized().is_some() {
                    continue;
                }
                let rng = rngs.get_mut(&id).expect("member");
                for (to, transcript) in node.gossip_round(rng) {
                    outcome.messages += 1;
                    q.push(tick + 1, GossipEvent::Push { from: id, to, transcript });
                }
                if let Some(t) = node.gossip_maybe_terminate(rng) {
                    outcome.broadcasts += 1;
                    outcome.signatures.insert(id, *node.finalized().expect("just settled"));
                    outcome.rounds = Some(tick);
                    for &to in members.iter().filter(|&&m| m != id) {
                        outcome.messages += 1;
                        q.push(tick + 1, GossipEvent::Broadcast { to, transcript: t.clone() });
                    }
                } else {
                    q.push(tick + 1, GossipEvent::Tick(id));
                }
            }
            GossipEvent::Push { from, to, transcript } => {
                nodes.get_mut(&to).expect("member").gossip_receive(from, &transcript);
            }
            GossipEvent::Broadcast { to, transcript } => {
                if nodes.get_mut(&to).expect("member").observe_broadcast(transcript) {
                    q.push(tick, GossipEvent::Settle(to));
                }
            }
            GossipEvent::Settle(id) => {
                let node = nodes.get_mut(&id).expect("member");
                let already = outcome.signatures.contains_key(&id);
                if let Some(sig) = node.settle() {
                    if !already {
                        outcome.signatures.insert(id, *sig);
                        outcome.rounds = Some(tick);
                    }
                }
            }
        }
    }
    if outcome.signatures.len() != members.len() {
        outcome.rounds = None;
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dkg::run_dkg;
    use crate::group::{Ed25519, Toy};
    use crate::sign::verify;
    use num_traits::One;

    fn id(v: u32) -> ParticipantId {
        ParticipantId::new(v).unwrap()
    }

    #[test]
    fn fanout_rule() {
        assert_eq!(fanout(8, 4), 7);
        assert_eq!(fanout(2, 4), 1);
        assert_eq!(fanout(64, 4), 24);
        assert_eq!(fanout(16, 4), 15);
        assert_eq!(fanout(1, 4), 0);
    }

    struct Fixture {
        nodes: Vec<GossipNode<Toy>>,
        partials: BTreeMap<ParticipantId, <Toy as Group>::Scalar>,
    }

    fn fixture(n: usize, t: usize, coalition: &[u32]) -> Fixture {
        let keys = run_dkg::<Toy>(n, t, b"g", &SeededRng::from_u64(3)).unwrap().keys;
        let mut signers: BTreeMap<_, _> = keys.iter().map(|k| (k.id, Signer::new(k.clone()))).collect();
        let mut rng = SeededRng::from_u64(4);
        let commitments = coalition
            .iter()
            .map(|&i| (id(i), signers.get_mut(&id(i)).unwrap().round1(1, &mut rng).pairs[0]))
            .collect();
        let pkg = SigningPackage::new(b"m".to_vec(), commitments).unwrap();
        let ctx = SessionContext::new(&pkg, &keys[0].group_pk).unwrap();
        let partials = coalition
            .iter()
            .map(|&i| (id(i), signers.get_mut(&id(i)).unwrap().partial_with_context(&pkg, &ctx).unwrap()))
            .collect();
        let members: Vec<_> = keys.iter().map(|k| k.id).collect();
        let nodes = members
            .iter()
            .map(|&m| GossipNode::new(m, "d", members.clone(), ctx.clone(), keys[0].verification_shares(), coalition.len(), 4))
            .collect();
        Fixture { nodes, partials }
    }

    #[test]
    fn disjoint_transcripts_merge_and_merge_is_idempotent() {
        let mut f = fixture(5, 3, &[1, 2, 3]);
        let z = f.partials.clone();
        assert!(f.nodes[0].contribute(z[&id(1)]));
        assert!(f.nodes[1].contribute(z[&id(2)]));
        let t1 = f.nodes[1].transcript().clone();
        let out = f.nodes[0].gossip_receive(id(2), &t1);
        assert_eq!(out.merged, vec![id(2)]);
        let before = f.nodes[0].transcript().clone();
        let again = f.nodes[0].gossip_receive(id(2), &t1);
        assert!(again.merged.is_empty() && again.rejected.is_empty());
        assert_eq!(f.nodes[0].transcript(), &before);
    }

    #[test]
    fn forged_entry_dropped_valid_entries_kept() {
        let mut f = fixture(5, 3, &[1, 2, 3]);
        let mut incoming = Transcript::<Toy>::new("d", f.nodes[0].transcript().context_hash);
        incoming.contributions.insert(id(2), f.partials[&id(2)]);
        incoming.contributions.insert(id(3), f.partials[&id(3)] + <Toy as Group>::Scalar::one());
        let out = f.nodes[0].gossip_receive(id(4), &incoming);
        assert_eq!(out.merged, vec![id(2)]);
        assert_eq!(out.rejected, vec![id(3)]);
        assert!(f.nodes[0].flagged().contains(&id(4)));
        assert!(!f.nodes[0].transcript().contributions.contains_key(&id(3)));
    }

    #[test]
    fn context_mismatch_drops_everything() {
        let mut f = fixture(4, 2, &[1, 2]);
        let mut incoming = Transcript::<Toy>::new("d", [7u8; 32]);
        incoming.contributions.insert(id(2), f.partials[&id(2)]);
        let out = f.nodes[0].gossip_receive(id(2), &incoming);
        assert!(out.context_mismatch);
        assert!(f.nodes[0].transcript().is_empty());
    }

    #[test]
    fn two_peer_domain_always_targets_the_peer() {
        let mut f = fixture(2, 2, &[1, 2]);
        f.nodes[0].contribute(f.partials[&id(1)]);
        let mut rng = SeededRng::from_u64(1);
        for _ in 0..5 {
            let targets: Vec<_> = f.nodes[0].gossip_round(&mut rng).into_iter().map(|(p, _)| p).collect();
            assert_eq!(targets, vec![id(2)]);
        }
    }

    #[test]
    fn forced_broadcast_converges() {
        let mut f = fixture(4, 2, &[1, 2]);
        f.nodes[0].contribute(f.partials[&id(1)]);
        f.nodes[0].contribute(f.partials[&id(2)]);
        // partial 2 is not node 1's own, so it only lands via gossip
        let own = Transcript { domain: "d".into(), context_hash: f.nodes[0].transcript().context_hash, contributions: f.partials.clone() };
        f.nodes[0].gossip_receive(id(2), &own);
        f.nodes[0].set_broadcast_numerator(4);
        let t = f.nodes[0].gossip_maybe_terminate(&mut SeededRng::from_u64(0)).expect("probability 1");
        let sig = *f.nodes[0].finalized().unwrap();
        for node in f.nodes.iter_mut().skip(1) {
            assert!(node.observe_broadcast(t.clone()));
            assert_eq!(node.settle(), Some(&sig));
        }
    }

    #[test]
    fn simultaneous_broadcasts_resolve_identically() {
        let f = fixture(4, 2, &[1, 2]);
        let ctx = f.nodes[0].transcript().context_hash;
        let full = Transcript::<Toy> { domain: "d".into(), context_hash: ctx, contributions: f.partials.clone() };
        let mut other = full.clone();
        other.domain = "d2".into();
        for mut node in f.nodes.clone() {
            node.observe_broadcast(full.clone());
            node.observe_broadcast(other.clone());
            let a = *node.settle().unwrap();
            let mut node2 = f.nodes[0].clone();
            node2.observe_broadcast(other.clone());
            node2.observe_broadcast(full.clone());
            assert_eq!(node2.settle().unwrap().to_bytes(), a.to_bytes());
        }
    }

    #[test]
    fn session_runs_to_agreement() {
        let keys = run_dkg::<Ed25519>(8, 3, b"g", &SeededRng::from_u64(5)).unwrap().keys;
        let coalition = [id(2), id(5), id(7)];
        let out = run_gossip_session(&keys, &coalition, b"hello", &GossipParams::default(), 9).unwrap();
        let rounds = out.rounds.expect("terminated");
        assert!(rounds <= 12);
        let sigs: BTreeSet<_> = out.signatures.values().map(|s| s.to_bytes()).collect();
        assert_eq!(sigs.len(), 1);
        let sig = out.signatures.values().next().unwrap();
        assert!(verify(&keys[0].group_pk, b"hello", sig));
    }

    #[test]
    fn session_is_seed_deterministic() {
        let keys = run_dkg::<Toy>(6, 3, b"g", &SeededRng::from_u64(5)).unwrap().keys;
        let coalition = [id(1), id(2), id(3)];
        let a = run_gossip_session(&keys, &coalition, b"x", &GossipParams::default(), 3).unwrap();
        let b = run_gossip_session(&keys, &coalition, b"x", &GossipParams::default(), 3).unwrap();
        assert_eq!(a.rounds, b.rounds);
        assert_eq!(a.messages, b.messages);
    }
}
