//! Prime-order group and scalar field abstraction.
//!
//! Protocol code is written once against [`Group`] and runs on either
//! backend: [`Ed25519`] (the ristretto prime-order group over Curve25519)
//! or [`Toy`] (the order-11 subgroup of Z_23^*, small enough that every
//! discrete log can be brute forced in tests).
//!
//! Group elements are written additively throughout, even for the toy
//! backend where the underlying operation is multiplication mod 23.

mod ristretto;
mod toy;

pub use ristretto::{Ed25519, Ed25519Point, Ed25519Scalar};
pub use toy::{Toy, ToyElement, ToyScalar};

use std::fmt::{self, Debug, Display};
use std::hash::Hash;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_traits::{One, Zero};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha512};

/// Element of Z_q, always held in canonical reduced form.
pub trait PrimeField:
    Copy
    + Eq
    + Hash
    + Debug
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + Sum
{
    /// Length of the canonical encoding.
    const ENCODED_LEN: usize;

    /// Decimal string of the field modulus q.
    const MODULUS: &'static str;

    fn from_u64(v: u64) -> Self;

    /// Multiplicative inverse; `None` for zero.
    fn invert(&self) -> Option<Self>;

    /// Reduce a 64-byte little-endian integer mod q.
    fn from_wide_bytes(bytes: &[u8; 64]) -> Self;

    fn to_bytes(&self) -> Vec<u8>;

    /// Rejects wrong lengths and non-canonical (unreduced) encodings.
    fn from_canonical_bytes(bytes: &[u8]) -> Option<Self>;

    fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        let mut wide = [0u8; 64];
        rng.fill_bytes(&mut wide);
        Self::from_wide_bytes(&wide)
    }

    fn random_nonzero<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        loop {
            let s = Self::random(rng);
            if !s.is_zero() {
                return s;
            }
        }
    }

    fn pow_u64(&self, mut exp: u64) -> Self {
        let mut base = *self;
        let mut acc = Self::one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc *= base;
            }
            base *= base;
            exp >>= 1;
        }
        acc
    }

    fn to_hex(&self) -> String {
        hex::encode(self.to_bytes())
    }

    fn from_hex(s: &str) -> Option<Self> {
        hex::decode(s.trim()).ok().and_then(|b| Self::from_canonical_bytes(&b))
    }
}

/// A cyclic group of prime order q with fixed generators G and H.
///
/// Implementors are zero-sized markers; all operations are associated
/// functions so protocol state never has to carry a backend handle.
pub trait Group: Copy + Clone + Debug + Default + PartialEq + Eq + Send + Sync + 'static {
    type Scalar: PrimeField;
    type Element: Copy
        + Eq
        + Debug
        + Send
        + Sync
        + 'static
        + Add<Output = Self::Element>
        + Sub<Output = Self::Element>
        + Neg<Output = Self::Element>;

    /// Backend identifier used on the command line and in files.
    const NAME: &'static str;
    const ELEMENT_LEN: usize;

    fn identity() -> Self::Element;
    fn generator() -> Self::Element;
    /// Second generator with no known discrete log relative to G.
    fn second_generator() -> Self::Element;

    fn mul(point: &Self::Element, scalar: &Self::Scalar) -> Self::Element;

    fn mul_base(scalar: &Self::Scalar) -> Self::Element {
        Self::mul(&Self::generator(), scalar)
    }

    fn encode(point: &Self::Element) -> Vec<u8>;
    fn decode(bytes: &[u8]) -> Option<Self::Element>;

    /// s·G + r·H.
    fn pedersen(s: &Self::Scalar, r: &Self::Scalar) -> Self::Element {
        Self::mul_base(s) + Self::mul(&Self::second_generator(), r)
    }

    fn sum<I: IntoIterator<Item = Self::Element>>(points: I) -> Self::Element {
        points.into_iter().fold(Self::identity(), |acc, p| acc + p)
    }

    /// Σ s_i·P_i.
    fn linear_combination<'a, I>(terms: I) -> Self::Element
    where
        I: IntoIterator<Item = (&'a Self::Scalar, &'a Self::Element)>,
    {
        terms
            .into_iter()
            .fold(Self::identity(), |acc, (s, p)| acc + Self::mul(p, s))
    }

    fn to_hex(point: &Self::Element) -> String {
        hex::encode(Self::encode(point))
    }

    fn from_hex(s: &str) -> Option<Self::Element> {
        hex::decode(s.trim()).ok().and_then(|b| Self::decode(&b))
    }
}

/// Runtime backend selector, as spelled on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Toy,
    Ed25519,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Toy => Toy::NAME,
            Backend::Ed25519 => Ed25519::NAME,
        }
    }
}

impl Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "toy" => Ok(Backend::Toy),
            "ed25519" => Ok(Backend::Ed25519),
            other => Err(format!("unknown backend `{other}` (expected toy or ed25519)")),
        }
    }
}

/// Participant index. Always ≥ 1; zero is the evaluation point of the secret.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct ParticipantId(u32);

impl ParticipantId {
    pub fn new(id: u32) -> Option<Self> {
        (id != 0).then_some(ParticipantId(id))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn to_scalar<F: PrimeField>(self) -> F {
        F::from_u64(u64::from(self.0))
    }

    pub fn to_be_bytes(self) -> [u8; 4] {
        self.0.to_be_bytes()
    }

    /// Ids `1..=n`.
    pub fn range(n: u32) -> impl Iterator<Item = ParticipantId> {
        (1..=n).map(ParticipantId)
    }
}

impl TryFrom<u32> for ParticipantId {
    type Error = String;

    fn try_from(v: u32) -> Result<Self, Self::Error> {
        ParticipantId::new(v).ok_or_else(|| "participant id 0 is reserved".to_string())
    }
}

impl From<ParticipantId> for u32 {
    fn from(id: ParticipantId) -> u32 {
        id.0
    }
}

impl Display for ParticipantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Domain tags for the three protocol hash functions.
pub mod tags {
    /// Proof-of-knowledge challenge in key generation.
    pub const POK: &str = "H";
    /// Per-signer binding value.
    pub const BINDING: &str = "H1";
    /// Signature challenge.
    pub const CHALLENGE: &str = "H2";
}

/// SHA-512 over a domain tag and length-prefixed parts, reduced mod q.
///
/// Layout: `len(tag) || tag || (len(part) || part)*`, every length an
/// 8-byte big-endian integer.
pub fn hash_to_scalar<F: PrimeField>(domain_tag: &str, parts: &[&[u8]]) -> F {
    let mut h = Sha512::new();
    h.update((domain_tag.len() as u64).to_be_bytes());
    h.update(domain_tag.as_bytes());
    for part in parts {
        h.update((part.len() as u64).to_be_bytes());
        h.update(part);
    }
    let digest: [u8; 64] = h.finalize().into();
    F::from_wide_bytes(&digest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    fn field_axioms<F: PrimeField>(seed: u64) {
        let mut rng = SeededRng::from_u64(seed);
        for _ in 0..200 {
            let (a, b, c) = (F::random(&mut rng), F::random(&mut rng), F::random(&mut rng));
            assert_eq!((a + b) + c, a + (b + c));
            assert_eq!((a * b) * c, a * (b * c));
            assert_eq!(a * (b + c), a * b + a * c);
            assert_eq!(a + (-a), F::zero());
            assert_eq!(a - b, a + (-b));
            if !a.is_zero() {
                assert_eq!(a * a.invert().unwrap(), F::one());
            }
        }
        assert!(F::zero().invert().is_none());
    }

    #[test]
    fn field_axioms_hold_on_both_backends() {
        field_axioms::<ToyScalar>(1);
        field_axioms::<Ed25519Scalar>(2);
    }

    fn encoding_round_trip<G: Group>(seed: u64) {
        let mut rng = SeededRng::from_u64(seed);
        for _ in 0..50 {
            let s = G::Scalar::random(&mut rng);
            let bytes = s.to_bytes();
            assert_eq!(bytes.len(), G::Scalar::ENCODED_LEN);
            assert_eq!(G::Scalar::from_canonical_bytes(&bytes), Some(s));
            let p = G::mul_base(&s);
            let enc = G::encode(&p);
            assert_eq!(enc.len(), G::ELEMENT_LEN);
            assert_eq!(G::decode(&enc), Some(p));
        }
    }

    #[test]
    fn encodings_round_trip() {
        encoding_round_trip::<Toy>(3);
        encoding_round_trip::<Ed25519>(4);
    }

    fn order_annihilates<G: Group>() {
        // q·P = identity, checked as (q-1)·P + P since q ≡ 0 in the field.
        let minus_one = -G::Scalar::one();
        for p in [G::generator(), G::second_generator()] {
            assert_eq!(G::mul(&p, &minus_one) + p, G::identity());
            assert_ne!(p, G::identity());
        }
    }

    #[test]
    fn generators_have_full_order() {
        order_annihilates::<Toy>();
        order_annihilates::<Ed25519>();
    }

    #[test]
    fn hash_is_deterministic_and_in_range() {
        let a: ToyScalar = hash_to_scalar("H1", &[b"abc", b"d"]);
        let b: ToyScalar = hash_to_scalar("H1", &[b"abc", b"d"]);
        assert_eq!(a, b);
        // length prefixes make the split point matter
        let x: Ed25519Scalar = hash_to_scalar("H1", &[b"abc", b"d"]);
        let y: Ed25519Scalar = hash_to_scalar("H1", &[b"ab", b"cd"]);
        assert_ne!(x, y);
    }

    #[test]
    fn domain_tags_separate() {
        let mut rng = SeededRng::from_u64(5);
        for _ in 0..100 {
            let mut buf = [0u8; 40];
            rng.fill_bytes(&mut buf);
            let h1: Ed25519Scalar = hash_to_scalar(tags::BINDING, &[&buf]);
            let h2: Ed25519Scalar = hash_to_scalar(tags::CHALLENGE, &[&buf]);
            let h: Ed25519Scalar = hash_to_scalar(tags::POK, &[&buf]);
            assert_ne!(h1, h2);
            assert_ne!(h, h1);
        }
    }

    #[test]
    fn hash_output_is_canonical() {
        let mut rng = SeededRng::from_u64(6);
        for _ in 0..1000 {
            let mut buf = [0u8; 16];
            rng.fill_bytes(&mut buf);
            let s: Ed25519Scalar = hash_to_scalar(tags::CHALLENGE, &[&buf]);
            assert_eq!(Ed25519Scalar::from_canonical_bytes(&s.to_bytes()), Some(s));
            let t: ToyScalar = hash_to_scalar(tags::CHALLENGE, &[&buf]);
            assert!(t.value() < 11);
        }
    }

    #[test]
    fn participant_ids_reject_zero() {
        assert!(ParticipantId::new(0).is_none());
        assert_eq!(ParticipantId::new(3).unwrap().get(), 3);
        assert!(serde_json::from_str::<ParticipantId>("0").is_err());
    }

    #[test]
    fn backend_parses() {
        assert_eq!("toy".parse::<Backend>().unwrap(), Backend::Toy);
        assert_eq!("ed25519".parse::<Backend>().unwrap(), Backend::Ed25519);
        assert!("p256".parse::<Backend>().is_err());
    }
}
