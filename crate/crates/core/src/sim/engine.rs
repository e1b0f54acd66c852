use std::collections::{BTreeMap, BTreeSet};

use sha2::{Digest, Sha256};

use crate::avss::{avss_deal, avss_recover_secret, avss_verify_share, AvssDeal, AvssNode, AvssPoint, CommitmentMatrix};
use crate::dkg::{default_crs, KeyShare, Participant, PhaseName, Round1Broadcast};
use crate::group::{Group, ParticipantId, PrimeField};
use crate::poly::Polynomial;
use crate::rng::SeededRng;
use crate::sharing::{adjudicate_complaint, pedersen_split, pedersen_verify, CommitmentVector, Complaint, SharePacket, Verdict};
use crate::sign::{verify, NonceCommitment, NonceCommitmentList, SessionContext, Signer, SigningPackage};

use super::config::{Behavior, DelayModel, DomainConfig, Protocol, SimConfig};
use super::gossip::{GossipNode, Transcript};
use super::queue::EventQueue;
use super::report::{
    AvssReport, DomainReport, ExfiltratedShare, FrostReport, MessageCounts, SimReport, TraceEvent, VerdictRecord,
    VssReport,
};

type Id = ParticipantId;

enum Payload<G: Group> {
    Round1(Round1Broadcast<G>),
    Round2Share(G::Scalar),
    NonceList(NonceCommitmentList<G>),
    TranscriptGossip(Transcript<G>),
    Broadcast(Transcript<G>),
    VssDeal(SharePacket<G::Scalar>, CommitmentVector<G>),
    Complaint(Complaint<G>),
    AvssDeal(AvssDeal<G>),
    AvssPoint(AvssPoint<G::Scalar>, CommitmentMatrix<G>),
}

impl<G: Group> Payload<G> {
    fn kind(&self) -> &'static str {
        match self {
            Payload::Round1(_) => "round1",
            Payload::Round2Share(_) => "round2_share",
            Payload::NonceList(_) => "nonce_list",
            Payload::TranscriptGossip(_) => "transcript_gossip",
            Payload::Broadcast(_) => "broadcast",
            Payload::VssDeal(..) => "vss_deal",
            Payload::Complaint(_) => "complaint",
            Payload::AvssDeal(_) => "avss_deal",
            Payload::AvssPoint(..) => "avss_point",
        }
    }

    fn to_bytes(&self) -> Vec<u8> {
        match self {
            Payload::Round1(b) => b.to_bytes(),
            Payload::Round2Share(s) => s.to_bytes(),
            Payload::NonceList(l) => {
                let mut out = l.owner.to_be_bytes().to_vec();
                for p in &l.pairs {
                    out.extend(G::encode(&p.hiding));
                    out.extend(G::encode(&p.binding));
                }
                out
            }
            Payload::TranscriptGossip(t) | Payload::Broadcast(t) => t.to_bytes(),
            Payload::VssDeal(p, c) => [p.to_bytes(), c.to_bytes()].concat(),
            Payload::Complaint(c) => c.share().to_bytes(),
            Payload::AvssDeal(d) => {
                let mut out = d.recipient.to_be_bytes().to_vec();
                out.extend(d.commitment.digest());
                for poly in [&d.row, &d.row_blinding, &d.column, &d.column_blinding] {
                    for c in poly.coefficients() {
                        out.extend(c.to_bytes());
                    }
                }
                out
            }
            Payload::AvssPoint(p, c) => [p.to_bytes(), c.digest().to_vec()].concat(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Timer {
    Start,
    GossipTick,
    Settle,
}

impl Timer {
    fn kind(self) -> &'static str {
        match self {
            Timer::Start => "start",
            Timer::GossipTick => "gossip_tick",
            Timer::Settle => "settle",
        }
    }
}

enum Event<G: Group> {
    Deliver { domain: usize, from: Id, to: Id, payload: Payload<G> },
    Fire { domain: usize, node: Id, timer: Timer },
}

struct FrostNode<G: Group> {
    rng: SeededRng,
    dkg: Participant<G>,
    round1: BTreeMap<Id, Round1Broadcast<G>>,
    round2_sent: bool,
    early_shares: Vec<(Id, G::Scalar)>,
    key: Option<KeyShare<G>>,
    blamed: Option<Vec<Id>>,
    signer: Option<Signer<G>>,
    nonces: BTreeMap<Id, NonceCommitment<G>>,
    gossip: Option<GossipNode<G>>,
    early_gossip: Vec<(Id, Payload<G>)>,
    rounds: u64,
    finalized_at: Option<u64>,
}

struct FrostDomain<G: Group> {
    nodes: BTreeMap<Id, FrostNode<G>>,
    coalition: Vec<Id>,
    gossip_started: Option<u64>,
    round_limit: u64,
}

struct VssDomain<G: Group> {
    dealer: Id,
    secret: G::Scalar,
    rng: SeededRng,
    commitments: Option<CommitmentVector<G>>,
    held: BTreeMap<Id, SharePacket<G::Scalar>>,
    /// accuser → (verdict, observers)
    verdicts: BTreeMap<Id, (Verdict, BTreeSet<Id>)>,
}

struct AvssDomain<G: Group> {
    dealer: Id,
    secret: G::Scalar,
    rng: SeededRng,
    nodes: BTreeMap<Id, AvssNode<G>>,
    deals_received: BTreeSet<Id>,
    points_sent: BTreeSet<Id>,
}

enum DomainState<G: Group> {
    Frost(FrostDomain<G>),
    Vss(VssDomain<G>),
    Avss(AvssDomain<G>),
}

struct Domain<G: Group> {
    cfg: DomainConfig,
    /// sorted global ids; local id k is members[k − 1]
    members: Vec<u32>,
    state: DomainState<G>,
    phase_ticks: BTreeMap<String, u64>,
}

impl<G: Group> Domain<G> {
    fn n(&self) -> usize {
        self.members.len()
    }

    fn global(&self, id: Id) -> u32 {
        self.members[id.get() as usize - 1]
    }

    fn local_ids(&self) -> Vec<Id> {
        ParticipantId::range(self.members.len() as u32).collect()
    }

    fn mark(&mut self, phase: &str, tick: u64) {
        let e = self.phase_ticks.entry(phase.to_string()).or_insert(tick);
        *e = (*e).max(tick);
    }
}

pub(super) struct Engine<'a, G: Group> {
    cfg: &'a SimConfig,
    net: SeededRng,
    queue: EventQueue<Event<G>>,
    domains: Vec<Domain<G>>,
    sends: BTreeMap<u32, u64>,
    counts: MessageCounts,
    chain: [u8; 32],
    trace: Vec<TraceEvent>,
    now: u64,
}

fn bump<F: PrimeField>(s: F) -> F {
    s + F::one()
}

impl<'a, G: Group> Engine<'a, G> {
    pub(super) fn new(cfg: &'a SimConfig) -> Self {
        let root = SeededRng::from_u64(cfg.seed);
        let mut domains = Vec::new();
        for d in &cfg.domains {
            let members = d.sorted_members();
            let n = members.len();
            let node_rng = |local: Id| root.fork(&format!("domain/{}/node/{}", d.id, members[local.get() as usize - 1]));
            let ids: Vec<Id> = ParticipantId::range(n as u32).collect();
            let state = match d.protocol {
                Protocol::Frost => {
                    let crs = default_crs(&d.id, 0);
                    let nodes = ids
                        .iter()
                        .map(|&id| {
                            let dkg = Participant::new(id, n, d.threshold, crs.clone()).expect("validated parameters");
                            let node = FrostNode {
                                rng: node_rng(id),
                                dkg,
                                round1: BTreeMap::new(),
                                round2_sent: false,
                                early_shares: Vec::new(),
                                key: None,
                                blamed: None,
                                signer: None,
                                nonces: BTreeMap::new(),
                                gossip: None,
                                early_gossip: Vec::new(),
                                rounds: 0,
                                finalized_at: None,
                            };
                            (id, node)
                        })
                        .collect();
                    let coalition = d.coalition_nodes().iter().map(|&g| d.local_id(g).expect("member")).collect();
                    let log_n = (n.max(2) as f64).log2().ceil() as u64;
                    DomainState::Frost(FrostDomain {
                        nodes,
                        coalition,
                        gossip_started: None,
                        round_limit: (8 * cfg.gossip.c as u64 * log_n).max(64),
                    })
                }
                Protocol::PedersenVss | Protocol::Avss => {
                    let dealer = d.local_id(d.dealer_node()).expect("member");
                    let mut rng = node_rng(dealer);
                    let secret = match d.secret {
                        Some(v) => G::Scalar::from_u64(v),
                        None => G::Scalar::random(&mut rng),
                    };
                    if d.protocol == Protocol::PedersenVss {
                        DomainState::Vss(VssDomain {
                            dealer,
                            secret,
                            rng,
                            commitments: None,
                            held: BTreeMap::new(),
                            verdicts: BTreeMap::new(),
                        })
                    } else {
                        DomainState::Avss(AvssDomain {
                            dealer,
                            secret,
                            rng,
                            nodes: ids.iter().map(|&id| (id, AvssNode::new(id, d.threshold))).collect(),
                            deals_received: BTreeSet::new(),
                            points_sent: BTreeSet::new(),
                        })
                    }
                }
            };
            domains.push(Domain { cfg: d.clone(), members, state, phase_ticks: BTreeMap::new() });
        }
        let mut queue = EventQueue::default();
        for (k, d) in domains.iter().enumerate() {
            let starters = match &d.state {
                DomainState::Frost(_) => d.local_ids(),
                DomainState::Vss(v) => vec![v.dealer],
                DomainState::Avss(a) => vec![a.dealer],
            };
            for node in starters {
                queue.push(0, Event::Fire { domain: k, node, timer: Timer::Start });
            }
        }
        Engine {
            cfg,
            net: root.fork("net"),
            queue,
            domains,
            sends: BTreeMap::new(),
            counts: MessageCounts::default(),
            chain: [0u8; 32],
            trace: Vec::new(),
            now: 0,
        }
    }

    fn behavior(&self, node: u32) -> Option<Behavior> {
        self.cfg.behavior_of(node)
    }

    fn is_adversary(&self, node: u32) -> bool {
        self.behavior(node).is_some()
    }

    fn is_down(&self, node: u32) -> bool {
        match self.behavior(node) {
            Some(Behavior::Crash { at }) => self.now >= at,
            Some(Behavior::CrashAfterSends { count }) => self.sends.get(&node).copied().unwrap_or(0) >= count,
            _ => false,
        }
    }

    fn has(&self, node: u32, b: Behavior) -> bool {
        self.behavior(node) == Some(b)
    }

    fn delay(&mut self) -> u64 {
        match self.cfg.delay {
            DelayModel::Fixed { ticks } => ticks,
            DelayModel::Uniform { lo, hi } => lo + self.net.below(hi - lo + 1),
        }
    }

    fn send(&mut self, domain: usize, from: Id, to: Id, payload: Payload<G>) {
        let sender = self.domains[domain].global(from);
        if self.is_down(sender) || self.has(sender, Behavior::Silent) {
            self.counts.dropped += 1;
            return;
        }
        *self.sends.entry(sender).or_insert(0) += 1;
        self.counts.sent += 1;
        *self.counts.by_kind.entry(payload.kind().to_string()).or_insert(0) += 1;
        let at = self.now + self.delay();
        self.queue.push(at, Event::Deliver { domain, from, to, payload });
    }

    fn send_all(&mut self, domain: usize, from: Id, make: impl Fn(Id) -> Payload<G>) {
        for to in self.domains[domain].local_ids() {
            if to != from {
                self.send(domain, from, to, make(to));
            }
        }
    }

    fn record(&mut self, seq: u64, domain: usize, kind: &str, from: u32, to: u32, body: &[u8]) {
        let digest: [u8; 32] = Sha256::digest(body).into();
        let mut h = Sha256::new();
        h.update(self.chain);
        h.update(self.now.to_be_bytes());
        h.update(seq.to_be_bytes());
        h.update((domain as u64).to_be_bytes());
        h.update(kind.as_bytes());
        h.update(from.to_be_bytes());
        h.update(to.to_be_bytes());
        h.update(digest);
        self.chain = h.finalize().into();
        self.trace.push(TraceEvent {
            tick: self.now,
            seq,
            domain: self.domains[domain].cfg.id.clone(),
            kind: kind.to_string(),
            from,
            to,
            digest: hex::encode(digest),
        });
    }

    pub(super) fn run(mut self) -> (SimReport, Vec<TraceEvent>) {
        while let Some((tick, seq, ev)) = self.queue.pop() {
            if tick > self.cfg.max_ticks {
                break;
            }
            self.now = tick;
            match ev {
                Event::Deliver { domain, from, to, payload } => {
                    let (gf, gt) = (self.domains[domain].global(from), self.domains[domain].global(to));
                    if self.is_down(gt) {
                        self.counts.dropped += 1;
                        continue;
                    }
                    self.counts.delivered += 1;
                    self.record(seq, domain, payload.kind(), gf, gt, &payload.to_bytes());
                    self.deliver(domain, from, to, payload);
                }
                Event::Fire { domain, node, timer } => {
                    let g = self.domains[domain].global(node);
                    if self.is_down(g) {
                        continue;
                    }
                    self.record(seq, domain, timer.kind(), g, g, &[]);
                    self.fire(domain, node, timer);
                }
            }
        }
        self.report()
    }

    fn deliver(&mut self, d: usize, from: Id, to: Id, payload: Payload<G>) {
        match payload {
            Payload::Round1(b) => self.frost_round1(d, to, from, b),
            Payload::Round2Share(s) => self.frost_share(d, to, from, s),
            Payload::NonceList(l) => self.frost_nonces(d, to, from, l),
            p @ (Payload::TranscriptGossip(_) | Payload::Broadcast(_)) => self.frost_gossip(d, to, from, p),
            Payload::VssDeal(p, c) => self.vss_deal(d, to, from, p, c),
            Payload::Complaint(c) => self.vss_complaint(d, to, from, c),
            Payload::AvssDeal(deal) => self.avss_deal_in(d, to, from, deal),
            Payload::AvssPoint(p, c) => self.avss_point(d, to, from, p, c),
        }
    }

    fn fire(&mut self, d: usize, node: Id, timer: Timer) {
        match (timer, self.protocol(d)) {
            (Timer::Start, Protocol::Frost) => self.frost_start(d, node),
            (Timer::Start, Protocol::PedersenVss) => self.vss_start(d),
            (Timer::Start, Protocol::Avss) => self.avss_start(d),
            (Timer::GossipTick, _) => self.frost_tick(d, node),
            (Timer::Settle, _) => self.frost_settle(d, node),
        }
    }

    fn protocol(&self, d: usize) -> Protocol {
        self.domains[d].cfg.protocol
    }

    fn frost(&mut self, d: usize) -> &mut FrostDomain<G> {
        match &mut self.domains[d].state {
            DomainState::Frost(f) => f,
            _ => unreachable!("frost event in a non-frost domain"),
        }
    }

    fn frost_node(&mut self, d: usize, id: Id) -> &mut FrostNode<G> {
        self.frost(d).nodes.get_mut(&id).expect("member")
    }

    fn frost_start(&mut self, d: usize, me: Id) {
        let node = self.frost_node(d, me);
        let b = node.dkg.round1(&mut node.rng).expect("fresh participant");
        node.round1.insert(me, b.clone());
        self.send_all(d, me, |_| Payload::Round1(b.clone()));
        self.frost_after_round1(d, me);
    }

    fn frost_round1(&mut self, d: usize, me: Id, from: Id, b: Round1Broadcast<G>) {
        self.frost_node(d, me).round1.entry(from).or_insert(b);
        self.frost_after_round1(d, me);
    }

    fn frost_abort(&mut self, d: usize, me: Id, blamed: Vec<Id>) {
        let node = self.frost_node(d, me);
        if node.blamed.is_none() {
            node.blamed = Some(blamed);
        }
    }

    fn frost_after_round1(&mut self, d: usize, me: Id) {
        let n = self.domains[d].n();
        let corrupt = self.has(self.domains[d].global(me), Behavior::CorruptShares);
        let node = self.frost_node(d, me);
        if node.round2_sent || node.blamed.is_some() || node.round1.len() < n {
            return;
        }
        if node.dkg.phase().name() != PhaseName::Round1Done {
            return;
        }
        if let Err(e) = node.dkg.receive_broadcasts(node.round1.clone()) {
            let blamed = e.faulty().to_vec();
            return self.frost_abort(d, me, blamed);
        }
        let outgoing = node.dkg.round2_send().expect("phase checked");
        node.round2_sent = true;
        let early = std::mem::take(&mut node.early_shares);
        for (from, s) in early {
            let _ = node.dkg.receive_share(from, s);
        }
        for (to, s) in outgoing {
            let s = if corrupt { bump(s) } else { s };
            self.send(d, me, to, Payload::Round2Share(s));
        }
        self.frost_after_round2(d, me);
    }

    fn frost_share(&mut self, d: usize, me: Id, from: Id, s: G::Scalar) {
        let node = self.frost_node(d, me);
        if !node.round2_sent {
            node.early_shares.push((from, s));
            return;
        }
        if node.blamed.is_none() && node.key.is_none() {
            let _ = node.dkg.receive_share(from, s);
        }
        self.frost_after_round2(d, me);
    }

    fn frost_after_round2(&mut self, d: usize, me: Id) {
        let n = self.domains[d].n();
        let now = self.now;
        let in_coalition = self.frost(d).coalition.contains(&me);
        let node = self.frost_node(d, me);
        if node.key.is_some() || node.blamed.is_some() || node.dkg.held_share_count() < n {
            return;
        }
        let key = match node.dkg.round2_finalize() {
            Ok(k) => k,
            Err(e) => {
                let blamed = e.faulty().to_vec();
                return self.frost_abort(d, me, blamed);
            }
        };
        node.key = Some(key.clone());
        let mut signer = Signer::new(key);
        let list = in_coalition.then(|| signer.round1(1, &mut node.rng));
        node.signer = Some(signer);
        if let Some(list) = list {
            node.nonces.insert(me, list.pairs[0]);
            self.send_all(d, me, |_| Payload::NonceList(list.clone()));
        }
        self.domains[d].mark("dkg", now);
        self.frost_try_ready(d, me);
    }

    fn frost_nonces(&mut self, d: usize, me: Id, from: Id, list: NonceCommitmentList<G>) {
        let is_signer = self.frost(d).coalition.contains(&from);
        if list.owner != from || !is_signer || list.pairs.is_empty() {
            return;
        }
        self.frost_node(d, me).nonces.entry(from).or_insert(list.pairs[0]);
        self.frost_try_ready(d, me);
    }

    fn frost_try_ready(&mut self, d: usize, me: Id) {
        let now = self.now;
        let dom = &self.domains[d];
        let cfg = &dom.cfg;
        let (c, bnum) = (self.cfg.gossip.c, self.cfg.gossip.broadcast_prob_num);
        let forge = self.has(dom.global(me), Behavior::ForgePartial);
        let members = dom.local_ids();
        let (domain_id, message, required) = (cfg.id.clone(), cfg.message.clone().into_bytes(), cfg.required());
        let f = self.frost(d);
        let coalition = f.coalition.clone();
        let node = f.nodes.get_mut(&me).expect("member");
        let Some(key) = node.key.clone() else { return };
        if node.gossip.is_some() || node.nonces.len() < coalition.len() {
            return;
        }
        let Ok(package) = SigningPackage::new(message, node.nonces.clone()) else { return };
        let Ok(ctx) = SessionContext::new(&package, &key.group_pk) else { return };
        let mut g = GossipNode::new(me, &domain_id, members, ctx.clone(), key.verification_shares(), required, c);
        g.set_broadcast_numerator(bnum);
        if coalition.contains(&me) {
            let signer = node.signer.as_mut().expect("key holders sign");
            if let Ok(z) = signer.partial_with_context(&package, &ctx) {
                if forge {
                    g.insert_unchecked(me, bump(z));
                } else {
                    g.contribute(z);
                }
            }
        }
        node.gossip = Some(g);
        let early = std::mem::take(&mut node.early_gossip);
        f.gossip_started.get_or_insert(now);
        self.domains[d].mark("nonces", now);
        self.queue.push(now + 1, Event::Fire { domain: d, node: me, timer: Timer::GossipTick });
        for (from, p) in early {
            self.frost_gossip(d, me, from, p);
        }
    }

    fn frost_gossip(&mut self, d: usize, me: Id, from: Id, p: Payload<G>) {
        let now = self.now;
        let node = self.frost_node(d, me);
        let Some(g) = node.gossip.as_mut() else {
            node.early_gossip.push((from, p));
            return;
        };
        match p {
            Payload::TranscriptGossip(t) => {
                g.gossip_receive(from, &t);
            }
            Payload::Broadcast(t) => {
                if g.observe_broadcast(t) {
                    self.queue.push(now, Event::Fire { domain: d, node: me, timer: Timer::Settle });
                }
            }
            _ => unreachable!("only gossip payloads are routed here"),
        }
    }

    fn frost_tick(&mut self, d: usize, me: Id) {
        let now = self.now;
        let equivocate = self.has(self.domains[d].global(me), Behavior::Equivocate);
        let limit = self.frost(d).round_limit;
        let node = self.frost_node(d, me);
        let Some(g) = node.gossip.as_mut() else { return };
        if g.finalized().is_some() || node.finalized_at.is_some() || node.rounds >= limit {
            return;
        }
        node.rounds += 1;
        let pushes = g.gossip_round(&mut node.rng);
        let broadcast = g.gossip_maybe_terminate(&mut node.rng);
        let done = g.finalized().is_some();
        if done {
            node.finalized_at = Some(now);
        }
        for (k, (to, mut t)) in pushes.into_iter().enumerate() {
            if equivocate && k % 2 == 1 {
                t.context_hash[0] ^= 1;
            }
            self.send(d, me, to, Payload::TranscriptGossip(t));
        }
        if let Some(t) = broadcast {
            self.send_all(d, me, |_| Payload::Broadcast(t.clone()));
        }
        if done {
            self.domains[d].mark("finalize", now);
        } else {
            self.queue.push(now + 1, Event::Fire { domain: d, node: me, timer: Timer::GossipTick });
        }
    }

    fn frost_settle(&mut self, d: usize, me: Id) {
        let now = self.now;
        let node = self.frost_node(d, me);
        let Some(g) = node.gossip.as_mut() else { return };
        if node.finalized_at.is_none() && g.settle().is_some() {
            node.finalized_at = Some(now);
            self.domains[d].mark("finalize", now);
        }
    }

    fn vss(&mut self, d: usize) -> &mut VssDomain<G> {
        match &mut self.domains[d].state {
            DomainState::Vss(v) => v,
            _ => unreachable!("sharing event in another domain"),
        }
    }

    fn vss_start(&mut self, d: usize) {
        let (t, n) = (self.domains[d].cfg.threshold, self.domains[d].n());
        let corrupt = {
            let dealer = self.vss(d).dealer;
            self.has(self.domains[d].global(dealer), Behavior::CorruptShares)
        };
        let v = self.vss(d);
        let (c, shares) = pedersen_split::<G, _>(v.secret, t, n, &mut v.rng).expect("validated parameters");
        let dealer = v.dealer;
        v.commitments = Some(c.clone());
        if let Some(own) = shares.iter().find(|p| p.id == dealer) {
            v.held.insert(dealer, *own);
        }
        for p in shares {
            if p.id == dealer {
                continue;
            }
            let p = if corrupt { SharePacket { value: bump(p.value), ..p } } else { p };
            self.send(d, dealer, p.id, Payload::VssDeal(p, c.clone()));
        }
    }

    fn vss_deal(&mut self, d: usize, me: Id, from: Id, p: SharePacket<G::Scalar>, c: CommitmentVector<G>) {
        let now = self.now;
        let lying = self.has(self.domains[d].global(me), Behavior::Equivocate);
        let v = self.vss(d);
        if from != v.dealer || p.id != me {
            return;
        }
        let ok = pedersen_verify(&p, &c) == Ok(true);
        if ok {
            v.held.insert(me, p);
        }
        if ok && !lying {
            self.domains[d].mark("deal", now);
            return;
        }
        let Ok(complaint) = Complaint::new(me, p, c) else { return };
        self.vss_adjudicate(d, me, &complaint);
        self.send_all(d, me, |_| Payload::Complaint(complaint.clone()));
    }

    fn vss_complaint(&mut self, d: usize, me: Id, from: Id, c: Complaint<G>) {
        if c.accuser() == from {
            self.vss_adjudicate(d, me, &c);
        }
    }

    fn vss_adjudicate(&mut self, d: usize, observer: Id, c: &Complaint<G>) {
        let now = self.now;
        let verdict = adjudicate_complaint(c);
        let v = self.vss(d);
        v.verdicts.entry(c.accuser()).or_insert_with(|| (verdict, BTreeSet::new())).1.insert(observer);
        self.domains[d].mark("complaints", now);
    }

    fn avss(&mut self, d: usize) -> &mut AvssDomain<G> {
        match &mut self.domains[d].state {
            DomainState::Avss(a) => a,
            _ => unreachable!("avss event in another domain"),
        }
    }

    fn avss_start(&mut self, d: usize) {
        let (t, n) = (self.domains[d].cfg.threshold, self.domains[d].n());
        let dealer = self.avss(d).dealer;
        let corrupt = self.has(self.domains[d].global(dealer), Behavior::CorruptShares);
        let a = self.avss(d);
        let (_, deals) = avss_deal::<G, _>(a.secret, t, n, &mut a.rng).expect("validated parameters");
        let mut own = None;
        for mut deal in deals {
            if deal.recipient == dealer {
                own = Some(deal);
                continue;
            }
            if corrupt {
                let mut coeffs = deal.row.coefficients().to_vec();
                coeffs[0] = bump(coeffs[0]);
                deal.row = Polynomial::from_coefficients(coeffs);
            }
            self.send(d, dealer, deal.recipient, Payload::AvssDeal(deal));
        }
        if let Some(deal) = own {
            self.avss_deal_in(d, dealer, dealer, deal);
        }
    }

    fn avss_deal_in(&mut self, d: usize, me: Id, from: Id, deal: AvssDeal<G>) {
        let now = self.now;
        let a = self.avss(d);
        if from != a.dealer {
            return;
        }
        if a.nodes.get_mut(&me).expect("member").receive_deal(deal) {
            a.deals_received.insert(me);
            self.domains[d].mark("deal", now);
        }
        self.avss_send_points(d, me);
    }

    fn avss_point(&mut self, d: usize, me: Id, from: Id, p: AvssPoint<G::Scalar>, c: CommitmentMatrix<G>) {
        if p.from != from {
            return;
        }
        self.avss(d).nodes.get_mut(&me).expect("member").receive_point(p, &c);
        self.avss_send_points(d, me);
    }

    fn avss_send_points(&mut self, d: usize, me: Id) {
        let now = self.now;
        let n = self.domains[d].n();
        let corrupt = self.has(self.domains[d].global(me), Behavior::CorruptShares);
        let a = self.avss(d);
        let node = &a.nodes[&me];
        if !node.is_complete() || a.points_sent.contains(&me) {
            return;
        }
        a.points_sent.insert(me);
        let c = node.commitment().cloned().expect("complete nodes hold a matrix");
        let points = node.outgoing_points(n);
        self.domains[d].mark("complete", now);
        for mut p in points {
            if corrupt {
                p.row_value = bump(p.row_value);
            }
            self.send(d, me, p.to, Payload::AvssPoint(p, c.clone()));
        }
    }

    fn report(mut self) -> (SimReport, Vec<TraceEvent>) {
        let mut holdings: BTreeMap<u32, Vec<String>> = BTreeMap::new();
        let mut exfiltrated = Vec::new();
        let mut reports = Vec::new();
        let domains = std::mem::take(&mut self.domains);
        for dom in &domains {
            let leak = self.cfg.exfiltrate.contains(&dom.cfg.id);
            let honest: Vec<Id> = dom.local_ids().into_iter().filter(|&id| !self.is_adversary(dom.global(id))).collect();
            let mut shares: Vec<(u32, String)> = Vec::new();
            let mut report = DomainReport {
                id: dom.cfg.id.clone(),
                protocol: dom.cfg.protocol,
                members: dom.members.clone(),
                threshold: dom.cfg.threshold,
                phase_ticks: dom.phase_ticks.clone(),
                success: false,
                frost: None,
                vss: None,
                avss: None,
            };
            match &dom.state {
                DomainState::Frost(f) => {
                    let (r, ok) = self.frost_report(dom, f, &honest);
                    for (id, node) in &f.nodes {
                        if let Some(k) = &node.key {
                            shares.push((dom.global(*id), k.sk_share.to_hex()));
                        }
                    }
                    report.frost = Some(r);
                    report.success = ok;
                }
                DomainState::Vss(v) => {
                    let verified: Vec<u32> = v.held.keys().map(|&id| dom.global(id)).collect();
                    let verdicts: Vec<VerdictRecord> = v
                        .verdicts
                        .iter()
                        .map(|(acc, (verdict, obs))| VerdictRecord {
                            accuser: dom.global(*acc),
                            dealer: dom.global(v.dealer),
                            verdict: *verdict,
                            observers: obs.iter().map(|&o| dom.global(o)).collect(),
                        })
                        .collect();
                    report.success = verdicts.iter().all(|r| r.verdict != Verdict::DealerFaulty)
                        && honest.iter().all(|id| v.held.contains_key(id));
                    for (id, p) in &v.held {
                        shares.push((dom.global(*id), p.to_hex()));
                    }
                    report.vss = Some(VssReport {
                        dealer: dom.global(v.dealer),
                        commitments: v.commitments.as_ref().map(|c| hex::encode(c.to_bytes())),
                        verified_members: verified,
                        verdicts,
                    });
                }
                DomainState::Avss(a) => {
                    let (r, ok) = avss_report(dom, a, &honest);
                    for (id, node) in &a.nodes {
                        if let crate::avss::NodeStatus::Complete(s) = node.status() {
                            shares.push((dom.global(*id), s.share().0.to_hex()));
                        }
                    }
                    report.avss = Some(r);
                    report.success = ok;
                }
            }
            for (node, share) in shares {
                holdings.entry(node).or_default().push(dom.cfg.id.clone());
                if leak {
                    exfiltrated.push(ExfiltratedShare { domain: dom.cfg.id.clone(), node, share });
                }
            }
            reports.push(report);
        }
        let report = SimReport {
            seed: self.cfg.seed,
            backend: self.cfg.backend,
            nodes: self.cfg.nodes,
            trace_hash: hex::encode(self.chain),
            final_tick: self.now,
            messages: self.counts.clone(),
            success: reports.iter().all(|r| r.success),
            domains: reports,
            holdings,
            exfiltrated,
        };
        (report, self.trace)
    }

    fn frost_report(&self, dom: &Domain<G>, f: &FrostDomain<G>, honest: &[Id]) -> (FrostReport, bool) {
        let keys: Vec<&KeyShare<G>> = f.nodes.values().filter_map(|n| n.key.as_ref()).collect();
        let group_pk = keys.first().map(|k| k.group_pk);
        let key_agreement = keys.iter().all(|k| Some(k.group_pk) == group_pk);
        let dkg_aborts = f
            .nodes
            .iter()
            .filter_map(|(id, n)| {
                n.blamed.as_ref().map(|b| (dom.global(*id), b.iter().map(|&x| dom.global(x)).collect()))
            })
            .collect();
        let sigs: BTreeMap<Id, Vec<u8>> = f
            .nodes
            .iter()
            .filter_map(|(id, n)| n.gossip.as_ref()?.finalized().map(|s| (*id, s.to_bytes())))
            .collect();
        let distinct: BTreeSet<&Vec<u8>> = sigs.values().collect();
        let agreement = distinct.len() <= 1;
        let signature = sigs.values().next().cloned();
        let verified = match (&signature, group_pk) {
            (Some(bytes), Some(pk)) => crate::sign::Signature::<G>::from_bytes(bytes)
                .map(|s| verify(&pk, dom.cfg.message.as_bytes(), &s))
                .unwrap_or(false),
            _ => false,
        };
        let all_honest_final = honest.iter().all(|id| sigs.contains_key(id));
        let last = f.nodes.values().filter_map(|n| n.finalized_at).max();
        let termination_round = match (all_honest_final, f.gossip_started, last) {
            (true, Some(start), Some(end)) => Some(end - start),
            _ => None,
        };
        let mut flagged = BTreeSet::new();
        for n in f.nodes.values() {
            if let Some(g) = &n.gossip {
                flagged.extend(g.flagged().iter().map(|&x| dom.global(x)));
            }
        }
        let ok = key_agreement
            && honest.iter().all(|id| f.nodes[id].key.is_some())
            && agreement
            && verified
            && all_honest_final;
        let r = FrostReport {
            group_pk: group_pk.map(|pk| G::to_hex(&pk)),
            key_agreement,
            dkg_aborts,
            coalition: f.coalition.iter().map(|&x| dom.global(x)).collect(),
            message: dom.cfg.message.clone(),
            signature: signature.map(hex::encode),
            verified,
            agreement,
            finalized: sigs.keys().map(|&x| dom.global(x)).collect(),
            termination_round,
            flagged: flagged.into_iter().collect(),
        };
        (r, ok)
    }
}

fn avss_report<G: Group>(dom: &Domain<G>, a: &AvssDomain<G>, honest: &[Id]) -> (AvssReport, bool) {
    let t = dom.cfg.threshold;
    let mut completed = Vec::new();
    let mut shares = Vec::new();
    let mut shares_verified = true;
    let mut faulty = BTreeSet::new();
    for (id, node) in &a.nodes {
        faulty.extend(node.faulty_senders().iter().map(|&x| dom.global(x)));
        if let crate::avss::NodeStatus::Complete(s) = node.status() {
            completed.push(*id);
            let (sigma, sigma_p) = s.share();
            let c = node.commitment().expect("complete nodes hold a matrix");
            shares_verified &= avss_verify_share(c, *id, sigma, sigma_p);
            if honest.contains(id) {
                shares.push((*id, sigma));
            }
        }
    }
    let recovered = (shares.len() >= t).then(|| avss_recover_secret(&shares[..t], t).ok()).flatten();
    let secret_matches = recovered == Some(a.secret);
    let ok = honest.iter().all(|id| completed.contains(id)) && shares_verified && secret_matches;
    let r = AvssReport {
        dealer: dom.global(a.dealer),
        deals_received: a.deals_received.iter().map(|&x| dom.global(x)).collect(),
        rebuilt: completed.iter().filter(|id| !a.nodes[id].received_deal()).map(|&x| dom.global(x)).collect(),
        completed: completed.iter().map(|&x| dom.global(x)).collect(),
        faulty_senders: faulty.into_iter().collect(),
        shares_verified,
        secret: a.secret.to_hex(),
        recovered_secret: recovered.map(|s| s.to_hex()),
        secret_matches,
    };
    (r, ok)
}
