//! Prime-order group over Curve25519 via ristretto encoding.
//!
//! q = 2^252 + 27742317777372353535851937790883648493, the Ed25519 subgroup
//! order. H is derived by hashing the encoding of G to the group.

use std::hash::{Hash, Hasher};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::OnceLock;

use curve25519_dalek::constants::{RISTRETTO_BASEPOINT_POINT, RISTRETTO_BASEPOINT_TABLE};
use curve25519_dalek::ristretto::{CompressedRistretto, RistrettoPoint};
use curve25519_dalek::scalar::Scalar;
use curve25519_dalek::traits::Identity;
use num_traits::{One, Zero};
use sha2::Sha512;

use super::{Group, PrimeField};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Ed25519Scalar(pub Scalar);

impl Hash for Ed25519Scalar {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.as_bytes().hash(state)
    }
}

impl Add for Ed25519Scalar {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Ed25519Scalar(self.0 + rhs.0)
    }
}

impl Sub for Ed25519Scalar {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Ed25519Scalar(self.0 - rhs.0)
    }
}

impl Mul for Ed25519Scalar {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Ed25519Scalar(self.0 * rhs.0)
    }
}

impl Neg for Ed25519Scalar {
    type Output = Self;
    fn neg(self) -> Self {
        Ed25519Scalar(-self.0)
    }
}

impl AddAssign for Ed25519Scalar {
    fn add_assign(&mut self, rhs: Self) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Ed25519Scalar {
    fn sub_assign(&mut self, rhs: Self) {
        self.0 -= rhs.0;
    }
}

impl MulAssign for Ed25519Scalar {
    fn mul_assign(&mut self, rhs: Self) {
        self.0 *= rhs.0;
    }
}

impl Sum for Ed25519Scalar {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        Ed25519Scalar(iter.map(|s| s.0).sum())
    }
}

impl Zero for Ed25519Scalar {
    fn zero() -> Self {
        Ed25519Scalar(Scalar::ZERO)
    }
    fn is_zero(&self) -> bool {
        self.0 == Scalar::ZERO
    }
}

impl One for Ed25519Scalar {
    fn one() -> Self {
        Ed25519Scalar(Scalar::ONE)
    }
}

impl PrimeField for Ed25519Scalar {
    const ENCODED_LEN: usize = 32;
    const MODULUS: &'static str =
        "7237005577332262213973186563042994240857116359379907606001950938285454250989";

    fn from_u64(v: u64) -> Self {
        Ed25519Scalar(Scalar::from(v))
    }

    fn invert(&self) -> Option<Self> {
        (!self.is_zero()).then(|| Ed25519Scalar(self.0.invert()))
    }

    fn from_wide_bytes(bytes: &[u8; 64]) -> Self {
        Ed25519Scalar(Scalar::from_bytes_mod_order_wide(bytes))
    }

    fn to_bytes(&self) -> Vec<u8> {
        self.0.to_bytes().to_vec()
    }

    fn from_canonical_bytes(bytes: &[u8]) -> Option<Self> {
        let arr: [u8; 32] = bytes.try_into().ok()?;
        Option::from(Scalar::from_canonical_bytes(arr)).map(Ed25519Scalar)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ed25519Point(pub RistrettoPoint);

impl Add for Ed25519Point {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Ed25519Point(self.0 + rhs.0)
    }
}

impl Sub for Ed25519Point {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Ed25519Point(self.0 - rhs.0)
    }
}

impl Neg for Ed25519Point {
    type Output = Self;
    fn neg(self) -> Self {
        Ed25519Point(-self.0)
    }
}

/// Backend marker for the Curve25519 prime-order group.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Ed25519;

fn second_generator() -> RistrettoPoint {
    static H: OnceLock<RistrettoPoint> = OnceLock::new();
    *H.get_or_init(|| {
        RistrettoPoint::hash_from_bytes::<Sha512>(RISTRETTO_BASEPOINT_POINT.compress().as_bytes())
    })
}

impl Group for Ed25519 {
    type Scalar = Ed25519Scalar;
    type Element = Ed25519Point;

    const NAME: &'static str = "ed25519";
    const ELEMENT_LEN: usize = 32;

    fn identity() -> Ed25519Point {
        Ed25519Point(RistrettoPoint::identity())
    }

    fn generator() -> Ed25519Point {
        Ed25519Point(RISTRETTO_BASEPOINT_POINT)
    }

    fn second_generator() -> Ed25519Point {
        Ed25519Point(second_generator())
    }

    fn mul(point: &Ed25519Point, scalar: &Ed25519Scalar) -> Ed25519Point {
        Ed25519Point(point.0 * scalar.0)
    }

    fn mul_base(scalar: &Ed25519Scalar) -> Ed25519Point {
        Ed25519Point(RISTRETTO_BASEPOINT_TABLE * &scalar.0)
    }

    fn encode(point: &Ed25519Point) -> Vec<u8> {
        point.0.compress().to_bytes().to_vec()
    }

    fn decode(bytes: &[u8]) -> Option<Ed25519Point> {
        CompressedRistretto::from_slice(bytes).ok()?.decompress().map(Ed25519Point)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h_differs_from_g_and_is_stable() {
        assert_ne!(Ed25519::second_generator(), Ed25519::generator());
        assert_eq!(Ed25519::second_generator(), Ed25519::second_generator());
    }

    #[test]
    fn non_canonical_scalar_rejected() {
        assert!(Ed25519Scalar::from_canonical_bytes(&[0xff; 32]).is_none());
        assert!(Ed25519Scalar::from_canonical_bytes(&[0u8; 31]).is_none());
    }

    #[test]
    fn mul_base_agrees_with_generic_mul() {
        let s = Ed25519Scalar::from_u64(123_456_789);
        assert_eq!(Ed25519::mul_base(&s), Ed25519::mul(&Ed25519::generator(), &s));
    }

    #[test]
    fn garbage_point_rejected() {
        assert!(Ed25519::decode(&[0xff; 32]).is_none());
        assert!(Ed25519::decode(&[1, 2, 3]).is_none());
    }
}
