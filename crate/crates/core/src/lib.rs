//! Threshold cryptography over pluggable prime-order groups.
//!
//! * [`sharing`]: Shamir, Feldman and Pedersen secret sharing with share
//!   verification and dealer-complaint adjudication.
//! * [`avss`]: asynchronous verifiable secret sharing with bivariate
//!   polynomials and peer point exchange.
//! * [`dkg`]: two-round leaderless distributed key generation.
//! * [`sign`]: two-round threshold Schnorr signing with binding values.
//! * [`sim`]: seeded discrete-event network simulator hosting the protocols
//!   across overlapping trust domains, including transcript gossip.
//! * [`bench`]: in-process timing of the key generation and signing rounds.
//!
//! Everything is generic over [`group::Group`]. Two backends ship: the
//! Curve25519 prime-order group ([`Ed25519`]) and an order-11 subgroup of
//! Z_23^* ([`Toy`]) used for exhaustive oracle testing.

pub mod avss;
pub mod bench;
pub mod dkg;
pub mod group;
pub mod poly;
pub mod rng;
pub mod sharing;
pub mod sign;
pub mod sim;

pub use group::{Backend, Ed25519, Group, ParticipantId, PrimeField, Toy};
pub use rng::SeededRng;

pub type ToyScalar = <Toy as Group>::Scalar;
pub type ToyElement = <Toy as Group>::Element;
pub type Ed25519Scalar = <Ed25519 as Group>::Scalar;
pub type Ed25519Point = <Ed25519 as Group>::Element;

pub type ToyPolynomial = poly::Polynomial<ToyScalar>;
pub type Ed25519Polynomial = poly::Polynomial<Ed25519Scalar>;

pub type ToySignature = sign::Signature<Toy>;
pub type Ed25519Signature = sign::Signature<Ed25519>;
