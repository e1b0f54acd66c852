//! Two-round leaderless distributed key generation.
//!
//! Every participant deals a degree t−1 Feldman sharing of a random secret
//! s_j and proves knowledge of s_j with a Schnorr proof bound to its id and
//! a run-scoped `crs`. After verifying all proofs (round 1) and all received
//! shares (round 2), participant j holds sk_j = Σ_i f_i(j), its public share
//! pk_j = sk_j·G, and the group key pk = Σ_i c_i0. Any failure aborts the
//! run and names the offending participants; there is no complaint round.
//!
//! Signing coalitions need t members, matching the degree t−1 polynomials.

use std::collections::BTreeMap;

use num_traits::Zero;
use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::group::{hash_to_scalar, tags, Group, ParticipantId, PrimeField};
use crate::poly::Polynomial;
use crate::sharing::CommitmentVector;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DkgError {
    #[error("invalid parameters: need 1 <= t <= n < q (t = {t}, n = {n})")]
    InvalidParameters { t: usize, n: usize },
    #[error("operation not allowed in phase {0:?}")]
    OutOfPhase(PhaseName),
    #[error("proof of knowledge failed for {0:?}")]
    InvalidProof(Vec<ParticipantId>),
    #[error("commitment has wrong length from {0:?}")]
    MalformedCommitment(Vec<ParticipantId>),
    #[error("share failed verification from {0:?}")]
    InvalidShare(Vec<ParticipantId>),
    #[error("missing messages from {0:?}")]
    Missing(Vec<ParticipantId>),
}

impl DkgError {
    /// Participants blamed by this abort, if any.
    pub fn faulty(&self) -> &[ParticipantId] {
        match self {
            DkgError::InvalidProof(v)
            | DkgError::MalformedCommitment(v)
            | DkgError::InvalidShare(v)
            | DkgError::Missing(v) => v,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseName {
    Init,
    Round1Done,
    Round2Done,
    Aborted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Phase {
    Init,
    Round1Done,
    Round2Done,
    Aborted(DkgError),
}

impl Phase {
    pub fn name(&self) -> PhaseName {
        match self {
            Phase::Init => PhaseName::Init,
            Phase::Round1Done => PhaseName::Round1Done,
            Phase::Round2Done => PhaseName::Round2Done,
            Phase::Aborted(_) => PhaseName::Aborted,
        }
    }
}

/// Schnorr proof of knowledge of the dealt secret: (R = k·G, μ = k + s·c).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProofOfKnowledge<G: Group> {
    pub commitment: G::Element,
    pub response: G::Scalar,
}

/// c = H(id, crs, s·G, R).
pub fn pok_challenge<G: Group>(
    id: ParticipantId,
    crs: &[u8],
    public: &G::Element,
    commitment: &G::Element,
) -> G::Scalar {
    hash_to_scalar(
        tags::POK,
        &[&id.to_be_bytes(), crs, &G::encode(public), &G::encode(commitment)],
    )
}

impl<G: Group> ProofOfKnowledge<G> {
    pub fn prove<R: RngCore + ?Sized>(id: ParticipantId, crs: &[u8], secret: &G::Scalar, rng: &mut R) -> Self {
        let k = G::Scalar::random(rng);
        let commitment = G::mul_base(&k);
        let c = pok_challenge::<G>(id, crs, &G::mul_base(secret), &commitment);
        ProofOfKnowledge { commitment, response: k + *secret * c }
    }

    /// μ·G = R + c·public.
    pub fn verify(&self, id: ParticipantId, crs: &[u8], public: &G::Element) -> bool {
        let c = pok_challenge::<G>(id, crs, public, &self.commitment);
        G::mul_base(&self.response) == self.commitment + G::mul(public, &c)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Round1Broadcast<G: Group> {
    pub sender: ParticipantId,
    pub commitment: CommitmentVector<G>,
    pub proof: ProofOfKnowledge<G>,
}

impl<G: Group> Round1Broadcast<G> {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.sender.to_be_bytes().to_vec();
        out.extend(G::encode(&self.proof.commitment));
        out.extend(self.proof.response.to_bytes());
        out.extend(self.commitment.to_bytes());
        out
    }

    pub fn digest(&self) -> [u8; 32] {
        Sha256::digest(self.to_bytes()).into()
    }
}

/// Checks every round-1 broadcast: one per id in 1..=n, commitment of
/// length t, valid proof of knowledge. Returns the ids at fault.
pub fn dkg_verify_round1<G: Group>(
    broadcasts: &BTreeMap<ParticipantId, Round1Broadcast<G>>,
    n: usize,
    t: usize,
    crs: &[u8],
) -> Result<(), DkgError> {
    let missing: Vec<_> = ParticipantId::range(n as u32)
        .filter(|id| !broadcasts.contains_key(id))
        .collect();
    if !missing.is_empty() {
        return Err(DkgError::Missing(missing));
    }
    let malformed: Vec<_> = broadcasts
        .values()
        .filter(|b| b.commitment.len() != t)
        .map(|b| b.sender)
        .collect();
    if !malformed.is_empty() {
        return Err(DkgError::MalformedCommitment(malformed));
    }
    let bad: Vec<_> = broadcasts
        .values()
        .filter(|b| !b.proof.verify(b.sender, crs, &b.commitment.entries()[0]))
        .map(|b| b.sender)
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(DkgError::InvalidProof(bad))
    }
}

/// Result of a completed key generation for one participant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyShare<G: Group> {
    pub id: ParticipantId,
    pub n: usize,
    pub t: usize,
    pub sk_share: G::Scalar,
    pub pk_share: G::Element,
    pub group_pk: G::Element,
    /// Σ_i c_i: commits to the joint polynomial, so anyone can derive pk_ℓ.
    pub group_commitment: CommitmentVector<G>,
}

impl<G: Group> KeyShare<G> {
    /// pk_ℓ = Σ_k ℓ^k · (Σ_i c_ik).
    pub fn peer_pk_share(&self, id: ParticipantId) -> G::Element {
        self.group_commitment.evaluate(id)
    }

    pub fn verification_shares(&self) -> BTreeMap<ParticipantId, G::Element> {
        ParticipantId::range(self.n as u32).map(|id| (id, self.peer_pk_share(id))).collect()
    }
}

/// Key-generation state machine for one participant.
#[derive(Debug)]
pub struct Participant<G: Group> {
    id: ParticipantId,
    n: usize,
    t: usize,
    crs: Vec<u8>,
    phase: Phase,
    polynomial: Option<Polynomial<G::Scalar>>,
    broadcasts: BTreeMap<ParticipantId, Round1Broadcast<G>>,
    received_shares: BTreeMap<ParticipantId, G::Scalar>,
    output: Option<KeyShare<G>>,
}

/// Default crs: hash of a domain id and epoch.
pub fn default_crs(domain: &str, epoch: u64) -> Vec<u8> {
    Sha256::new()
        .chain_update(b"dkg-crs")
        .chain_update((domain.len() as u64).to_be_bytes())
        .chain_update(domain.as_bytes())
        .chain_update(epoch.to_be_bytes())
        .finalize()
        .to_vec()
}

/// Largest n whose ids stay distinct and nonzero mod q; `None` when unbounded in practice.
pub fn max_participants<F: PrimeField>() -> Option<u64> {
    (F::MODULUS.len() <= 19).then(|| F::MODULUS.parse::<u64>().expect("decimal modulus") - 1)
}

impl<G: Group> Participant<G> {
    pub fn new(id: ParticipantId, n: usize, t: usize, crs: Vec<u8>) -> Result<Self, DkgError> {
        let too_many = max_participants::<G::Scalar>().is_some_and(|m| n as u64 > m);
        if t < 1 || t > n || id.get() as usize > n || too_many {
            return Err(DkgError::InvalidParameters { t, n });
        }
        Ok(Participant {
            id,
            n,
            t,
            crs,
            phase: Phase::Init,
            polynomial: None,
            broadcasts: BTreeMap::new(),
            received_shares: BTreeMap::new(),
            output: None,
        })
    }

    pub fn id(&self) -> ParticipantId {
        self.id
    }

    pub fn phase(&self) -> &Phase {
        &self.phase
    }

    pub fn output(&self) -> Option<&KeyShare<G>> {
        self.output.as_ref()
    }

    /// Number of peer shares still held; zero once finalized.
    pub fn held_share_count(&self) -> usize {
        self.received_shares.len()
    }

    fn expect_phase(&self, want: PhaseName) -> Result<(), DkgError> {
        if self.phase.name() == want {
            Ok(())
        } else {
            Err(DkgError::OutOfPhase(self.phase.name()))
        }
    }

    fn abort(&mut self, err: DkgError) -> DkgError {
        self.phase = Phase::Aborted(err.clone());
        self.received_shares.clear();
        err
    }

    /// Samples f_j of degree t−1, commits to its coefficients and proves
    /// knowledge of s_j = f_j(0).
    pub fn round1<R: RngCore + ?Sized>(&mut self, rng: &mut R) -> Result<Round1Broadcast<G>, DkgError> {
        self.expect_phase(PhaseName::Init)?;
        let coefficients: Vec<G::Scalar> = (0..self.t).map(|_| G::Scalar::random(rng)).collect();
        let poly = Polynomial::from_coefficients(coefficients);
        let proof = ProofOfKnowledge::prove(self.id, &self.crs, &poly.constant(), rng);
        let commitment = crate::sharing::feldman_commit::<G>(&poly);
        self.polynomial = Some(poly);
        self.phase = Phase::Round1Done;
        Ok(Round1Broadcast { sender: self.id, commitment, proof })
    }

    /// Verifies and stores all n broadcasts (own included). Aborts on failure.
    pub fn receive_broadcasts(
        &mut self,
        broadcasts: BTreeMap<ParticipantId, Round1Broadcast<G>>,
    ) -> Result<(), DkgError> {
        self.expect_phase(PhaseName::Round1Done)?;
        if let Err(e) = dkg_verify_round1(&broadcasts, self.n, self.t, &self.crs) {
            return Err(self.abort(e));
        }
        // proofs are no longer needed; only commitments are kept
        self.broadcasts = broadcasts;
        Ok(())
    }

    /// f_j(ℓ) for every peer ℓ; the self-share is retained internally.
    pub fn round2_send(&mut self) -> Result<Vec<(ParticipantId, G::Scalar)>, DkgError> {
        self.expect_phase(PhaseName::Round1Done)?;
        let poly = self.polynomial.as_ref().expect("round 1 sampled the polynomial");
        let own = poly.eval_at(self.id);
        self.received_shares.insert(self.id, own);
        Ok(ParticipantId::range(self.n as u32)
            .filter(|&l| l != self.id)
            .map(|l| (l, poly.eval_at(l)))
            .collect())
    }

    /// Stores a share received from `sender` (verification happens at finalize).
    pub fn receive_share(&mut self, sender: ParticipantId, share: G::Scalar) -> Result<(), DkgError> {
        self.expect_phase(PhaseName::Round1Done)?;
        if sender != self.id {
            self.received_shares.insert(sender, share);
        }
        Ok(())
    }

    /// Verifies μ_ℓ·G = Σ_i j^i · c_ℓi for all senders, then derives
    /// sk_j, pk_j and the group key. Received shares are wiped either way.
    pub fn round2_finalize(&mut self) -> Result<KeyShare<G>, DkgError> {
        self.expect_phase(PhaseName::Round1Done)?;
        if self.broadcasts.len() != self.n {
            let missing = ParticipantId::range(self.n as u32)
                .filter(|id| !self.broadcasts.contains_key(id))
                .collect();
            return Err(self.abort(DkgError::Missing(missing)));
        }
        if !self.received_shares.contains_key(&self.id) {
            return Err(DkgError::OutOfPhase(self.phase.name()));
        }
        let missing: Vec<_> = ParticipantId::range(self.n as u32)
            .filter(|id| !self.received_shares.contains_key(id))
            .collect();
        if !missing.is_empty() {
            return Err(self.abort(DkgError::Missing(missing)));
        }
        let bad: Vec<_> = self
            .received_shares
            .iter()
            .filter(|(sender, share)| {
                let c = &self.broadcasts[sender].commitment;
                G::mul_base(share) != c.evaluate(self.id)
            })
            .map(|(sender, _)| *sender)
            .collect();
        if !bad.is_empty() {
            return Err(self.abort(DkgError::InvalidShare(bad)));
        }

        let sk_share: G::Scalar = self.received_shares.values().copied().sum();
        for v in self.received_shares.values_mut() {
            *v = G::Scalar::zero();
        }
        self.received_shares.clear();
        self.polynomial = None;

        let mut joint = vec![G::identity(); self.t];
        for b in self.broadcasts.values() {
            for (acc, e) in joint.iter_mut().zip(b.commitment.entries()) {
                *acc = *acc + *e;
            }
        }
        let key = KeyShare {
            id: self.id,
            n: self.n,
            t: self.t,
            sk_share,
            pk_share: G::mul_base(&sk_share),
            group_pk: joint[0],
            group_commitment: CommitmentVector::new(joint),
        };
        self.output = Some(key.clone());
        self.phase = Phase::Round2Done;
        Ok(key)
    }
}

/// One line of the JSON-lines transcript log.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub node: u32,
    pub round: u8,
    /// (sender, recipient, SHA-256 of the payload) for each message seen.
    pub messages: Vec<(u32, u32, String)>,
}

/// Outcome of an in-process run with every participant honest.
#[derive(Clone, Debug)]
pub struct DkgRun<G: Group> {
    pub keys: Vec<KeyShare<G>>,
    pub transcript: Vec<TranscriptRecord>,
}

fn share_digest<F: PrimeField>(from: ParticipantId, to: ParticipantId, s: &F) -> String {
    let mut h = Sha256::new();
    h.update(from.to_be_bytes());
    h.update(to.to_be_bytes());
    h.update(s.to_bytes());
    hex::encode(h.finalize())
}

/// Runs both rounds for participants 1..=n in one process. Each participant
/// draws from its own fork of `rng`.
pub fn run_dkg<G: Group>(
    n: usize,
    t: usize,
    crs: &[u8],
    rng: &crate::rng::SeededRng,
) -> Result<DkgRun<G>, DkgError> {
    let mut parts: Vec<Participant<G>> = ParticipantId::range(n as u32)
        .map(|id| Participant::new(id, n, t, crs.to_vec()))
        .collect::<Result<_, _>>()?;
    let mut broadcasts = BTreeMap::new();
    for p in parts.iter_mut() {
        let mut r = rng.fork(&format!("dkg/{}", p.id()));
        broadcasts.insert(p.id(), p.round1(&mut r)?);
    }
    let mut transcript = Vec::new();
    let r1_msgs: Vec<_> = broadcasts
        .values()
        .map(|b| (b.sender.get(), 0u32, hex::encode(b.digest())))
        .collect();
    for p in parts.iter_mut() {
        p.receive_broadcasts(broadcasts.clone())?;
        transcript.push(TranscriptRecord { node: p.id().get(), round: 1, messages: r1_msgs.clone() });
    }
    let mut inbox: BTreeMap<ParticipantId, Vec<(u32, u32, String)>> = BTreeMap::new();
    let mut outgoing = Vec::new();
    for p in parts.iter_mut() {
        for (to, s) in p.round2_send()? {
            inbox.entry(to).or_default().push((p.id().get(), to.get(), share_digest(p.id(), to, &s)));
            outgoing.push((p.id(), to, s));
        }
    }
    for (from, to, s) in outgoing {
        parts[to.get() as usize - 1].receive_share(from, s)?;
    }
    let mut keys = Vec::with_capacity(n);
    for p in parts.iter_mut() {
        keys.push(p.round2_finalize()?);
        transcript.push(TranscriptRecord {
            node: p.id().get(),
            round: 2,
            messages: inbox.remove(&p.id()).unwrap_or_default(),
        });
    }
    Ok(DkgRun { keys, transcript })
}
