//! Two-round threshold Schnorr signing with per-signer binding values.
//!
//! Round 1: each signer publishes single-use nonce commitments
//! (A, B) = (a·G, b·G). Round 2: given the package (message plus one pair
//! per coalition member), every signer derives
//!
//! ```text
//! β_ℓ = H1(ℓ ‖ m ‖ n)          R = Σ_ℓ (A_ℓ + β_ℓ·B_ℓ)
//! c   = H2(R ‖ pk ‖ m)         z_j = a_j + b_j·β_j + λ_j·sk_j·c
//! ```
//!
//! Any member can aggregate: each partial must satisfy
//! z_ℓ·G = R_ℓ + (c·λ_ℓ)·pk_ℓ, and σ = (R, Σ z_ℓ) verifies under
//! z·G = R + H2(R ‖ pk ‖ m)·pk.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use rand::RngCore;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dkg::KeyShare;
use crate::group::{hash_to_scalar, tags, Group, ParticipantId, PrimeField};
use crate::poly::{lagrange_coefficient, PolyError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignError {
    #[error("coalition of {got} is smaller than the threshold {needed}")]
    CoalitionTooSmall { needed: usize, got: usize },
    #[error("participant {0} is not in the signing coalition")]
    NotInCoalition(ParticipantId),
    #[error("nonce pair was already used or never issued by this signer")]
    NonceReuse,
    #[error("invalid nonce commitment from {0}")]
    InvalidCommitment(ParticipantId),
    #[error("partial signature failed verification from {0:?}")]
    InvalidPartial(Vec<ParticipantId>),
    #[error("missing partial signatures from {0:?}")]
    MissingPartial(Vec<ParticipantId>),
    #[error("malformed signature encoding")]
    MalformedSignature,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NonceCommitment<G: Group> {
    /// A = a·G
    pub hiding: G::Element,
    /// B = b·G
    pub binding: G::Element,
}

impl<G: Group> NonceCommitment<G> {
    fn key(&self) -> Vec<u8> {
        let mut k = G::encode(&self.hiding);
        k.extend(G::encode(&self.binding));
        k
    }
}

/// Public output of signing round 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonceCommitmentList<G: Group> {
    pub owner: ParticipantId,
    pub pairs: Vec<NonceCommitment<G>>,
}

/// Message plus the coalition's nonce commitments (the vector n).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigningPackage<G: Group> {
    message: Vec<u8>,
    commitments: BTreeMap<ParticipantId, NonceCommitment<G>>,
}

impl<G: Group> SigningPackage<G> {
    /// Rejects identity commitments (nonces are drawn from Z_q^*).
    pub fn new(
        message: impl Into<Vec<u8>>,
        commitments: BTreeMap<ParticipantId, NonceCommitment<G>>,
    ) -> Result<Self, SignError> {
        for (id, c) in &commitments {
            if c.hiding == G::identity() || c.binding == G::identity() {
                return Err(SignError::InvalidCommitment(*id));
            }
        }
        Ok(SigningPackage { message: message.into(), commitments })
    }

    pub fn message(&self) -> &[u8] {
        &self.message
    }

    pub fn coalition(&self) -> Vec<ParticipantId> {
        self.commitments.keys().copied().collect()
    }

    pub fn commitments(&self) -> &BTreeMap<ParticipantId, NonceCommitment<G>> {
        &self.commitments
    }

    /// id (4-byte BE) ‖ A ‖ B for each member in ascending id order.
    pub fn encode_commitments(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for (id, c) in &self.commitments {
            out.extend_from_slice(&id.to_be_bytes());
            out.extend(G::encode(&c.hiding));
            out.extend(G::encode(&c.binding));
        }
        out
    }

    /// Identifies the session: SHA-256 of message and commitments.
    pub fn context_hash(&self) -> [u8; 32] {
        Sha256::new()
            .chain_update((self.message.len() as u64).to_be_bytes())
            .chain_update(&self.message)
            .chain_update(self.encode_commitments())
            .finalize()
            .into()
    }

    pub fn binding_factor(&self, id: ParticipantId) -> G::Scalar {
        binding_factor_with(id, &self.message, &self.encode_commitments())
    }
}

fn binding_factor_with<F: PrimeField>(id: ParticipantId, message: &[u8], encoded: &[u8]) -> F {
    hash_to_scalar(tags::BINDING, &[&id.to_be_bytes(), message, encoded])
}

/// c = H2(R ‖ pk ‖ m).
pub fn challenge<G: Group>(r: &G::Element, pk: &G::Element, message: &[u8]) -> G::Scalar {
    hash_to_scalar(tags::CHALLENGE, &[&G::encode(r), &G::encode(pk), message])
}

/// Everything derivable from a package and the group key, computed once.
#[derive(Clone, Debug)]
pub struct SessionContext<G: Group> {
    pub binding: BTreeMap<ParticipantId, G::Scalar>,
    /// R_ℓ = A_ℓ + β_ℓ·B_ℓ
    pub commitment_shares: BTreeMap<ParticipantId, G::Element>,
    pub lambda: BTreeMap<ParticipantId, G::Scalar>,
    pub group_commitment: G::Element,
    pub challenge: G::Scalar,
    pub context_hash: [u8; 32],
}

impl<G: Group> SessionContext<G> {
    pub fn new(package: &SigningPackage<G>, group_pk: &G::Element) -> Result<Self, SignError> {
        let coalition = package.coalition();
        let encoded = package.encode_commitments();
        let mut binding = BTreeMap::new();
        let mut commitment_shares = BTreeMap::new();
        let mut lambda = BTreeMap::new();
        for (&id, c) in &package.commitments {
            let beta: G::Scalar = binding_factor_with(id, &package.message, &encoded);
            binding.insert(id, beta);
            commitment_shares.insert(id, c.hiding + G::mul(&c.binding, &beta));
            lambda.insert(id, lagrange_coefficient(id, &coalition, G::Scalar::zero())?);
        }
        let group_commitment = G::sum(commitment_shares.values().copied());
        let challenge = challenge::<G>(&group_commitment, group_pk, &package.message);
        Ok(SessionContext {
            binding,
            commitment_shares,
            lambda,
            group_commitment,
            challenge,
            context_hash: package.context_hash(),
        })
    }

    /// z_ℓ·G = R_ℓ + (c·λ_ℓ)·pk_ℓ.
    pub fn verify_partial(&self, id: ParticipantId, z: &G::Scalar, pk_share: &G::Element) -> bool {
        let (Some(r), Some(l)) = (self.commitment_shares.get(&id), self.lambda.get(&id)) else {
            return false;
        };
        G::mul_base(z) == *r + G::mul(pk_share, &(self.challenge * *l))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Signature<G: Group> {
    pub r: G::Element,
    pub z: G::Scalar,
}

impl<G: Group> Signature<G> {
    /// Encoded R ‖ canonical z.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = G::encode(&self.r);
        out.extend(self.z.to_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, SignError> {
        if bytes.len() != G::ELEMENT_LEN + G::Scalar::ENCODED_LEN {
            return Err(SignError::MalformedSignature);
        }
        let r = G::decode(&bytes[..G::ELEMENT_LEN]).ok_or(SignError::MalformedSignature)?;
        let z = G::Scalar::from_canonical_bytes(&bytes[G::ELEMENT_LEN..]).ok_or(SignError::MalformedSignature)?;
        Ok(Signature { r, z })
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.to_bytes())
    }

    pub fn from_hex(s: &str) -> Result<Self, SignError> {
        let b = hex::decode(s.trim()).map_err(|_| SignError::MalformedSignature)?;
        Self::from_bytes(&b)
    }
}

/// z·G = R + H2(R ‖ pk ‖ m)·pk.
pub fn verify<G: Group>(pk: &G::Element, message: &[u8], sig: &Signature<G>) -> bool {
    let c = challenge::<G>(&sig.r, pk, message);
    G::mul_base(&sig.z) == sig.r + G::mul(pk, &c)
}

/// Plain Schnorr with an explicit nonce r.
pub fn single_party_sign_with_nonce<G: Group>(sk: &G::Scalar, nonce: &G::Scalar, message: &[u8]) -> Signature<G> {
    let r = G::mul_base(nonce);
    let pk = G::mul_base(sk);
    let c = challenge::<G>(&r, &pk, message);
    Signature { r, z: *nonce + *sk * c }
}

pub fn single_party_sign<G: Group, R: RngCore + ?Sized>(sk: &G::Scalar, message: &[u8], rng: &mut R) -> Signature<G> {
    let nonce = G::Scalar::random_nonzero(rng);
    single_party_sign_with_nonce(sk, &nonce, message)
}

struct SecretNonces<F> {
    hiding: F,
    binding: F,
}

/// A key holder's signing state: its key share and unused nonces.
///
/// Nonces leave the store when used and their commitments are remembered,
/// so a pair can never contribute to two partials.
pub struct Signer<G: Group> {
    key: KeyShare<G>,
    nonces: BTreeMap<Vec<u8>, SecretNonces<G::Scalar>>,
    consumed: BTreeSet<Vec<u8>>,
}

impl<G: Group> Signer<G> {
    pub fn new(key: KeyShare<G>) -> Self {
        Signer { key, nonces: BTreeMap::new(), consumed: BTreeSet::new() }
    }

    pub fn id(&self) -> ParticipantId {
        self.key.id
    }

    pub fn key(&self) -> &KeyShare<G> {
        &self.key
    }

    pub fn unused_nonces(&self) -> usize {
        self.nonces.len()
    }

    /// Samples `count` fresh nonce pairs from Z_q^* and publishes their commitments.
    pub fn round1<R: RngCore + ?Sized>(&mut self, count: usize, rng: &mut R) -> NonceCommitmentList<G> {
        let mut pairs = Vec::with_capacity(count);
        while pairs.len() < count {
            let a = G::Scalar::random_nonzero(rng);
            let b = G::Scalar::random_nonzero(rng);
            let c = NonceCommitment::<G> { hiding: G::mul_base(&a), binding: G::mul_base(&b) };
            let key = c.key();
            if self.consumed.contains(&key) || self.nonces.contains_key(&key) {
                continue;
            }
            self.nonces.insert(key, SecretNonces { hiding: a, binding: b });
            pairs.push(c);
        }
        NonceCommitmentList { owner: self.key.id, pairs }
    }

    /// z_j = a_j + b_j·β_j + λ_j·sk_j·c. Consumes the nonce pair named in the package.
    pub fn round2_partial(&mut self, package: &SigningPackage<G>) -> Result<G::Scalar, SignError> {
        let ctx = SessionContext::new(package, &self.key.group_pk)?;
        self.partial_with_context(package, &ctx)
    }

    pub fn partial_with_context(
        &mut self,
        package: &SigningPackage<G>,
        ctx: &SessionContext<G>,
    ) -> Result<G::Scalar, SignError> {
        let me = self.key.id;
        if package.commitments.len() < self.key.t {
            return Err(SignError::CoalitionTooSmall { needed: self.key.t, got: package.commitments.len() });
        }
        let mine = package.commitments.get(&me).ok_or(SignError::NotInCoalition(me))?;
        let key = mine.key();
        let nonces = self.nonces.remove(&key).ok_or(SignError::NonceReuse)?;
        self.consumed.insert(key);
        Ok(nonces.hiding + nonces.binding * ctx.binding[&me] + ctx.lambda[&me] * self.key.sk_share * ctx.challenge)
    }
}

/// Decodes a partial received on the wire; a bad encoding blames the sender.
pub fn decode_partial<F: PrimeField>(sender: ParticipantId, bytes: &[u8]) -> Result<F, SignError> {
    F::from_canonical_bytes(bytes).ok_or(SignError::InvalidPartial(vec![sender]))
}

/// Verifies every partial against its signer's public share and sums them.
pub fn aggregate<G: Group>(
    package: &SigningPackage<G>,
    partials: &BTreeMap<ParticipantId, G::Scalar>,
    pk_shares: &BTreeMap<ParticipantId, G::Element>,
    group_pk: &G::Element,
) -> Result<Signature<G>, SignError> {
    let ctx = SessionContext::new(package, group_pk)?;
    aggregate_with_context(&ctx, partials, pk_shares)
}

pub fn aggregate_with_context<G: Group>(
    ctx: &SessionContext<G>,
    partials: &BTreeMap<ParticipantId, G::Scalar>,
    pk_shares: &BTreeMap<ParticipantId, G::Element>,
) -> Result<Signature<G>, SignError> {
    let missing: Vec<_> = ctx.lambda.keys().filter(|id| !partials.contains_key(id)).copied().collect();
    if !missing.is_empty() {
        return Err(SignError::MissingPartial(missing));
    }
    let bad: Vec<_> = ctx
        .lambda
        .keys()
        .filter(|id| match pk_shares.get(id) {
            Some(pk) => !ctx.verify_partial(**id, &partials[*id], pk),
            None => true,
        })
        .copied()
        .collect();
    if !bad.is_empty() {
        return Err(SignError::InvalidPartial(bad));
    }
    Ok(Signature {
        r: ctx.group_commitment,
        z: ctx.lambda.keys().map(|id| partials[id]).sum(),
    })
}

/// Runs both signing rounds for `coalition` in one process.
pub fn sign_with_coalition<G: Group, R: RngCore + ?Sized>(
    signers: &mut BTreeMap<ParticipantId, Signer<G>>,
    coalition: &[ParticipantId],
    message: &[u8],
    rng: &mut R,
) -> Result<Signature<G>, SignError> {
    let mut commitments = BTreeMap::new();
    for id in coalition {
        let s = signers.get_mut(id).ok_or(SignError::NotInCoalition(*id))?;
        commitments.insert(*id, s.round1(1, rng).pairs[0]);
    }
    let any = signers.get(&coalition[0]).ok_or(SignError::NotInCoalition(coalition[0]))?;
    let group_pk = any.key.group_pk;
    let pk_shares: BTreeMap<_, _> = coalition.iter().map(|&id| (id, any.key.peer_pk_share(id))).collect();
    let package = SigningPackage::new(message.to_vec(), commitments)?;
    let ctx = SessionContext::new(&package, &group_pk)?;
    let mut partials = BTreeMap::new();
    for id in coalition {
        let s = signers.get_mut(id).expect("checked above");
        partials.insert(*id, s.partial_with_context(&package, &ctx)?);
    }
    aggregate_with_context(&ctx, &partials, &pk_shares)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dkg::run_dkg;
    use crate::group::{Ed25519, Toy, ToyScalar};
    use crate::rng::SeededRng;
    use num_traits::One;

    fn id(v: u32) -> ParticipantId {
        ParticipantId::new(v).unwrap()
    }

    fn signers<G: Group>(n: usize, t: usize, seed: u64) -> BTreeMap<ParticipantId, Signer<G>> {
        run_dkg::<G>(n, t, b"crs", &SeededRng::from_u64(seed))
            .unwrap()
            .keys
            .into_iter()
            .map(|k| (k.id, Signer::new(k)))
            .collect()
    }

    fn session<G: Group>(
        signers: &mut BTreeMap<ParticipantId, Signer<G>>,
        coalition: &[u32],
        msg: &[u8],
        rng: &mut SeededRng,
    ) -> SigningPackage<G> {
        let commitments = coalition
            .iter()
            .map(|&i| (id(i), signers.get_mut(&id(i)).unwrap().round1(1, rng).pairs[0]))
            .collect();
        SigningPackage::new(msg.to_vec(), commitments).unwrap()
    }

    #[test]
    fn round1_pairs_are_valid_and_unique() {
        let mut ss = signers::<Toy>(3, 2, 1);
        let mut rng = SeededRng::from_u64(2);
        let s = ss.get_mut(&id(1)).unwrap();
        let a = s.round1(1, &mut rng);
        assert_eq!(a.pairs.len(), 1);
        assert!(a.pairs[0].hiding != Toy::identity() && a.pairs[0].binding != Toy::identity());
        let b = s.round1(4, &mut rng);
        let mut all: Vec<_> = a.pairs.iter().chain(&b.pairs).map(|p| p.key()).collect();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 5);
    }

    #[test]
    fn all_members_derive_the_same_context() {
        let mut ss = signers::<Ed25519>(4, 3, 3);
        let mut rng = SeededRng::from_u64(4);
        let pkg = session(&mut ss, &[1, 2, 3, 4], b"msg", &mut rng);
        let pk = ss[&id(1)].key().group_pk;
        let a = SessionContext::new(&pkg, &pk).unwrap();
        let b = SessionContext::new(&pkg.clone(), &ss[&id(4)].key().group_pk).unwrap();
        assert_eq!(a.group_commitment, b.group_commitment);
        assert_eq!(a.challenge, b.challenge);
    }

    #[test]
    fn t_and_t_plus_one_coalitions_verify() {
        let mut ss = signers::<Toy>(5, 3, 5);
        let pk = ss[&id(1)].key().group_pk;
        let mut rng = SeededRng::from_u64(6);
        for coalition in [vec![1, 2, 3], vec![2, 4, 5], vec![1, 2, 3, 5]] {
            let ids: Vec<_> = coalition.iter().map(|&i| id(i)).collect();
            let sig = sign_with_coalition(&mut ss, &ids, b"hello", &mut rng).unwrap();
            assert!(verify(&pk, b"hello", &sig));
        }
    }

    #[test]
    fn nonce_reuse_is_refused() {
        let mut ss = signers::<Ed25519>(3, 2, 7);
        let mut rng = SeededRng::from_u64(8);
        let pkg = session(&mut ss, &[1, 2], b"m", &mut rng);
        let s = ss.get_mut(&id(1)).unwrap();
        s.round2_partial(&pkg).unwrap();
        assert_eq!(s.round2_partial(&pkg), Err(SignError::NonceReuse));
        assert_eq!(s.unused_nonces(), 0);
    }

    #[test]
    fn outsider_and_small_coalition_refused() {
        let mut ss = signers::<Ed25519>(4, 3, 9);
        let mut rng = SeededRng::from_u64(10);
        let pkg = session(&mut ss, &[1, 2, 3], b"m", &mut rng);
        assert_eq!(ss.get_mut(&id(4)).unwrap().round2_partial(&pkg), Err(SignError::NotInCoalition(id(4))));
        let small = session(&mut ss, &[1, 2], b"m", &mut rng);
        assert_eq!(
            ss.get_mut(&id(1)).unwrap().round2_partial(&small),
            Err(SignError::CoalitionTooSmall { needed: 3, got: 2 })
        );
    }

    #[test]
    fn corrupted_partial_is_named_and_order_is_irrelevant() {
        let mut ss = signers::<Ed25519>(4, 3, 11);
        let mut rng = SeededRng::from_u64(12);
        let pkg = session(&mut ss, &[1, 2, 4], b"m", &mut rng);
        let key = ss[&id(1)].key().clone();
        let mut partials = BTreeMap::new();
        for i in [4, 1, 2] {
            partials.insert(id(i), ss.get_mut(&id(i)).unwrap().round2_partial(&pkg).unwrap());
        }
        let shares = key.verification_shares();
        let sig = aggregate(&pkg, &partials, &shares, &key.group_pk).unwrap();
        // BTreeMap insertion order differs from coalition order; same bytes either way
        let reversed: BTreeMap<_, _> = partials.iter().rev().map(|(k, v)| (*k, *v)).collect();
        assert_eq!(aggregate(&pkg, &reversed, &shares, &key.group_pk).unwrap().to_bytes(), sig.to_bytes());
        assert!(verify(&key.group_pk, b"m", &sig));

        let mut bad = partials.clone();
        *bad.get_mut(&id(2)).unwrap() += <Ed25519 as Group>::Scalar::one();
        assert_eq!(aggregate(&pkg, &bad, &shares, &key.group_pk), Err(SignError::InvalidPartial(vec![id(2)])));
        bad.remove(&id(2));
        assert_eq!(aggregate(&pkg, &bad, &shares, &key.group_pk), Err(SignError::MissingPartial(vec![id(2)])));
    }

    #[test]
    fn bit_flips_break_verification() {
        let mut ss = signers::<Ed25519>(3, 2, 13);
        let pk = ss[&id(1)].key().group_pk;
        let mut rng = SeededRng::from_u64(14);
        let sig = sign_with_coalition(&mut ss, &[id(1), id(3)], b"payload", &mut rng).unwrap();
        let bytes = sig.to_bytes();
        assert_eq!(bytes.len(), 64);
        for i in 0..bytes.len() {
            let mut b = bytes.clone();
            b[i] ^= 0x01;
            if let Ok(s) = Signature::<Ed25519>::from_bytes(&b) {
                assert!(!verify(&pk, b"payload", &s));
            }
        }
        assert!(!verify(&pk, b"paylaod", &sig));
    }

    #[test]
    fn two_coalitions_both_verify() {
        let mut ss = signers::<Toy>(3, 2, 15);
        let pk = ss[&id(1)].key().group_pk;
        let mut rng = SeededRng::from_u64(16);
        let a = sign_with_coalition(&mut ss, &[id(1), id(2)], b"m", &mut rng).unwrap();
        let b = sign_with_coalition(&mut ss, &[id(2), id(3)], b"m", &mut rng).unwrap();
        assert!(verify(&pk, b"m", &a) && verify(&pk, b"m", &b));
    }

    #[test]
    fn single_party_round_trip_and_zero_key() {
        let mut rng = SeededRng::from_u64(17);
        let sk = <Ed25519 as Group>::Scalar::random(&mut rng);
        let sig = single_party_sign::<Ed25519, _>(&sk, b"x", &mut rng);
        assert!(verify(&Ed25519::mul_base(&sk), b"x", &sig));
        let zero = <Ed25519 as Group>::Scalar::zero();
        let sig0 = single_party_sign::<Ed25519, _>(&zero, b"x", &mut rng);
        assert_eq!(Ed25519::mul_base(&zero), Ed25519::identity());
        assert!(verify(&Ed25519::identity(), b"x", &sig0));
    }

    #[test]
    fn toy_single_party_against_modexp_oracle() {
        let modpow = |b: u64, e: u64| (0..e).fold(1u64, |acc, _| acc * b % 23);
        for sk in 0..11u64 {
            for r in 1..11u64 {
                let sig = single_party_sign_with_nonce::<Toy>(&ToyScalar::new(sk), &ToyScalar::new(r), b"m");
                let pk = Toy::mul_base(&ToyScalar::new(sk));
                let c = challenge::<Toy>(&sig.r, &pk, b"m").value() as u64;
                let lhs = modpow(2, sig.z.value() as u64);
                let rhs = sig.r.residue() as u64 * modpow(modpow(2, sk), c) % 23;
                assert_eq!(lhs, rhs);
                assert!(verify(&pk, b"m", &sig));
            }
        }
    }
}
