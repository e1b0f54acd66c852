//! Shamir secret sharing and its verifiable variants.
//!
//! A (t+1, n) sharing uses a degree-t polynomial: any t+1 shares recover
//! the secret. Feldman commitments are `coeff_k·G`; Pedersen commitments
//! are `f_k·G + g_k·H` with an independent blinding polynomial g.

use rand::RngCore;
use thiserror::Error;

use crate::group::{Group, ParticipantId, PrimeField};
use crate::poly::{interpolate_at, powers, PolyError, Polynomial};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SharingError {
    #[error("invalid parameters: need 1 <= t < n < q (t = {t}, n = {n})")]
    InvalidParameters { t: usize, n: usize },
    #[error("need at least {needed} shares to recover, got {got}")]
    InsufficientShares { needed: usize, got: usize },
    #[error("share {0} carries no blinding value")]
    MissingBlinding(ParticipantId),
    #[error("complaint accuser {accuser} does not match share id {share}")]
    AccuserMismatch { accuser: ParticipantId, share: ParticipantId },
    #[error("blinding polynomial must match the secret polynomial's length")]
    BlindingShape,
    #[error("malformed encoding: {0}")]
    Malformed(&'static str),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Indexed share `(id, f(id)[, g(id)])`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SharePacket<F> {
    pub id: ParticipantId,
    pub value: F,
    pub blinding: Option<F>,
}

impl<F: PrimeField> SharePacket<F> {
    pub fn new(id: ParticipantId, value: F) -> Self {
        SharePacket { id, value, blinding: None }
    }

    pub fn with_blinding(id: ParticipantId, value: F, blinding: F) -> Self {
        SharePacket { id, value, blinding: Some(blinding) }
    }

    /// 4-byte big-endian id ‖ value ‖ blinding (when present).
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 + 2 * F::ENCODED_LEN);
        out.extend_from_slice(&self.id.to_be_bytes());
        out.extend(self.value.to_bytes());
        if let Some(b) = self.blinding {
            out.extend(b.to_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, SharingError> {
        let len = F::ENCODED_LEN;
        if bytes.len() != 4 + len && bytes.len() != 4 + 2 * len {
            return Err(SharingError::Malformed("share length"));
        }
        let raw_id = u32::from_be_bytes(bytes[..4].try_into().expect("4 bytes"));
        let id = ParticipantId::new(raw_id).ok_or(SharingError::Malformed("share id 0"))?;
        let scalar = |b: &[u8]| F::from_canonical_bytes(b).ok_or(SharingError::Malformed("share scalar"));
        let value = scalar(&bytes[4..4 + len])?;
        let blinding = match bytes.len() - 4 - len {
            0 => None,
            _ => Some(scalar(&bytes[4 + len..])?),
        };
        Ok(SharePacket { id, value, blinding })
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.to_bytes())
    }

    pub fn from_hex(s: &str) -> Result<Self, SharingError> {
        let bytes = hex::decode(s.trim()).map_err(|_| SharingError::Malformed("hex"))?;
        Self::from_bytes(&bytes)
    }
}

/// Public commitments plus the per-recipient shares of one dealing.
pub type Dealing<G> = (CommitmentVector<G>, Vec<SharePacket<<G as Group>::Scalar>>);

/// Commitments to the coefficients of a sharing polynomial, constant term first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommitmentVector<G: Group> {
    entries: Vec<G::Element>,
}

impl<G: Group> CommitmentVector<G> {
    pub fn new(entries: Vec<G::Element>) -> Self {
        CommitmentVector { entries }
    }

    pub fn entries(&self) -> &[G::Element] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Σ_k id^k · entries[k]: the committed value at `id`.
    pub fn evaluate(&self, id: ParticipantId) -> G::Element {
        let xs = powers::<G::Scalar>(id.to_scalar(), self.entries.len());
        G::linear_combination(xs.iter().zip(&self.entries))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.entries.iter().flat_map(G::encode).collect()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, SharingError> {
        if bytes.is_empty() || bytes.len() % G::ELEMENT_LEN != 0 {
            return Err(SharingError::Malformed("commitment length"));
        }
        bytes
            .chunks(G::ELEMENT_LEN)
            .map(|c| G::decode(c).ok_or(SharingError::Malformed("commitment element")))
            .collect::<Result<Vec<_>, _>>()
            .map(CommitmentVector::new)
    }
}

fn check_parameters<F: PrimeField>(t: usize, n: usize) -> Result<(), SharingError> {
    let bad = SharingError::InvalidParameters { t, n };
    if t < 1 || t >= n {
        return Err(bad);
    }
    // every id 1..=n must be a distinct nonzero residue
    if F::MODULUS.len() <= 19 {
        let q: u64 = F::MODULUS.parse().expect("decimal modulus");
        if n as u64 >= q {
            return Err(bad);
        }
    }
    Ok(())
}

/// Shares of an explicit polynomial at ids 1..=n.
pub fn shares_of<F: PrimeField>(poly: &Polynomial<F>, n: usize) -> Vec<SharePacket<F>> {
    ParticipantId::range(n as u32)
        .map(|id| SharePacket::new(id, poly.eval_at(id)))
        .collect()
}

pub fn shamir_split<F: PrimeField, R: RngCore + ?Sized>(
    secret: F,
    t: usize,
    n: usize,
    rng: &mut R,
) -> Result<Vec<SharePacket<F>>, SharingError> {
    check_parameters::<F>(t, n)?;
    let poly = Polynomial::random(secret, t, rng)?;
    Ok(shares_of(&poly, n))
}

/// Recovers f(0) from a degree-`t` sharing; fewer than t+1 shares is an error.
pub fn shamir_combine<F: PrimeField>(shares: &[SharePacket<F>], t: usize) -> Result<F, SharingError> {
    if shares.len() < t + 1 {
        return Err(SharingError::InsufficientShares { needed: t + 1, got: shares.len() });
    }
    let points: Vec<_> = shares.iter().map(|s| (s.id, s.value)).collect();
    Ok(interpolate_at(&points, F::zero())?)
}

pub fn feldman_commit<G: Group>(poly: &Polynomial<G::Scalar>) -> CommitmentVector<G> {
    CommitmentVector::new(poly.coefficients().iter().map(G::mul_base).collect())
}

pub fn feldman_split<G: Group, R: RngCore + ?Sized>(
    secret: G::Scalar,
    t: usize,
    n: usize,
    rng: &mut R,
) -> Result<Dealing<G>, SharingError> {
    check_parameters::<G::Scalar>(t, n)?;
    let poly = Polynomial::random(secret, t, rng)?;
    Ok((feldman_commit::<G>(&poly), shares_of(&poly, n)))
}

/// value·G = Σ_k id^k · entries[k].
pub fn feldman_verify<G: Group>(share: &SharePacket<G::Scalar>, commitments: &CommitmentVector<G>) -> bool {
    G::mul_base(&share.value) == commitments.evaluate(share.id)
}

pub fn pedersen_commit<G: Group>(
    poly: &Polynomial<G::Scalar>,
    blinding: &Polynomial<G::Scalar>,
) -> Result<CommitmentVector<G>, SharingError> {
    if poly.coefficients().len() != blinding.coefficients().len() {
        return Err(SharingError::BlindingShape);
    }
    Ok(CommitmentVector::new(
        poly.coefficients()
            .iter()
            .zip(blinding.coefficients())
            .map(|(f, g)| G::pedersen(f, g))
            .collect(),
    ))
}

/// Pedersen dealing from explicit polynomials.
pub fn pedersen_deal<G: Group>(
    poly: &Polynomial<G::Scalar>,
    blinding: &Polynomial<G::Scalar>,
    n: usize,
) -> Result<Dealing<G>, SharingError> {
    let commitments = pedersen_commit::<G>(poly, blinding)?;
    let shares = ParticipantId::range(n as u32)
        .map(|id| SharePacket::with_blinding(id, poly.eval_at(id), blinding.eval_at(id)))
        .collect();
    Ok((commitments, shares))
}

/// Random secret polynomial plus a blinding polynomial with random constant b.
pub fn pedersen_split<G: Group, R: RngCore + ?Sized>(
    secret: G::Scalar,
    t: usize,
    n: usize,
    rng: &mut R,
) -> Result<Dealing<G>, SharingError> {
    check_parameters::<G::Scalar>(t, n)?;
    let poly = Polynomial::random(secret, t, rng)?;
    let b = G::Scalar::random(rng);
    let blinding = Polynomial::random(b, t, rng)?;
    pedersen_deal(&poly, &blinding, n)
}

/// value·G + blinding·H = Σ_k id^k · entries[k].
pub fn pedersen_verify<G: Group>(
    share: &SharePacket<G::Scalar>,
    commitments: &CommitmentVector<G>,
) -> Result<bool, SharingError> {
    let blinding = share.blinding.ok_or(SharingError::MissingBlinding(share.id))?;
    Ok(G::pedersen(&share.value, &blinding) == commitments.evaluate(share.id))
}

/// A recipient's claim that the share it was dealt does not match the
/// dealer's public commitments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Complaint<G: Group> {
    accuser: ParticipantId,
    share: SharePacket<G::Scalar>,
    commitments: CommitmentVector<G>,
}

impl<G: Group> Complaint<G> {
    pub fn new(
        accuser: ParticipantId,
        share: SharePacket<G::Scalar>,
        commitments: CommitmentVector<G>,
    ) -> Result<Self, SharingError> {
        if accuser != share.id {
            return Err(SharingError::AccuserMismatch { accuser, share: share.id });
        }
        if share.blinding.is_none() {
            return Err(SharingError::MissingBlinding(share.id));
        }
        Ok(Complaint { accuser, share, commitments })
    }

    pub fn accuser(&self) -> ParticipantId {
        self.accuser
    }

    pub fn share(&self) -> &SharePacket<G::Scalar> {
        &self.share
    }

    pub fn commitments(&self) -> &CommitmentVector<G> {
        &self.commitments
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Verdict {
    /// The published share really is inconsistent; remove the dealer.
    DealerFaulty,
    /// The share checks out; remove the accuser.
    AccuserFaulty,
}

/// Pure function of the complaint, so every observer reaches the same verdict.
pub fn adjudicate_complaint<G: Group>(complaint: &Complaint<G>) -> Verdict {
    match pedersen_verify(&complaint.share, &complaint.commitments) {
        Ok(true) => Verdict::AccuserFaulty,
        _ => Verdict::DealerFaulty,
    }
}
