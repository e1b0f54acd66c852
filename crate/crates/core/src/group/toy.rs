//! Order-11 Schnorr group: the quadratic residues of Z_23^*, g = 2, h = 3.

use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_traits::{One, Zero};

use super::{Group, PrimeField};

const P: u16 = 23;
const Q: u8 = 11;

/// Residue mod 11.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ToyScalar(u8);

impl ToyScalar {
    pub const fn new(v: u64) -> Self {
        ToyScalar((v % Q as u64) as u8)
    }

    pub fn value(self) -> u8 {
        self.0
    }
}

impl Add for ToyScalar {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        ToyScalar((self.0 + rhs.0) % Q)
    }
}

impl Sub for ToyScalar {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        ToyScalar((self.0 + Q - rhs.0) % Q)
    }
}

impl Mul for ToyScalar {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        ToyScalar(((self.0 as u16 * rhs.0 as u16) % Q as u16) as u8)
    }
}

impl Neg for ToyScalar {
    type Output = Self;
    fn neg(self) -> Self {
        ToyScalar((Q - self.0) % Q)
    }
}

impl AddAssign for ToyScalar {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl SubAssign for ToyScalar {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl MulAssign for ToyScalar {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl Sum for ToyScalar {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(ToyScalar(0), |a, b| a + b)
    }
}

impl Zero for ToyScalar {
    fn zero() -> Self {
        ToyScalar(0)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
}

impl One for ToyScalar {
    fn one() -> Self {
        ToyScalar(1)
    }
}

impl PrimeField for ToyScalar {
    const ENCODED_LEN: usize = 1;
    const MODULUS: &'static str = "11";

    fn from_u64(v: u64) -> Self {
        ToyScalar::new(v)
    }

    fn invert(&self) -> Option<Self> {
        // Fermat: a^(q-2)
        (!self.is_zero()).then(|| self.pow_u64(Q as u64 - 2))
    }

    fn from_wide_bytes(bytes: &[u8; 64]) -> Self {
        let r = bytes
            .iter()
            .rev()
            .fold(0u16, |acc, &b| (acc * 256 + b as u16) % Q as u16);
        ToyScalar(r as u8)
    }

    fn to_bytes(&self) -> Vec<u8> {
        vec![self.0]
    }

    fn from_canonical_bytes(bytes: &[u8]) -> Option<Self> {
        match bytes {
            [b] if *b < Q => Some(ToyScalar(*b)),
            _ => None,
        }
    }
}

/// Element of the order-11 subgroup of Z_23^*, stored as its residue.
/// `+` is multiplication mod 23.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ToyElement(u8);

impl ToyElement {
    /// Accepts exactly the 11 quadratic residues mod 23.
    pub fn new(residue: u8) -> Option<Self> {
        let r = residue as u16;
        if r == 0 || r >= P {
            return None;
        }
        (modpow(r, Q as u16) == 1).then_some(ToyElement(residue))
    }

    pub fn residue(self) -> u8 {
        self.0
    }
}

fn modpow(mut base: u16, mut exp: u16) -> u16 {
    let mut acc = 1u16;
    base %= P;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % P;
        }
        base = base * base % P;
        exp >>= 1;
    }
    acc
}

impl Add for ToyElement {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        ToyElement(((self.0 as u16 * rhs.0 as u16) % P) as u8)
    }
}

impl Neg for ToyElement {
    type Output = Self;
    fn neg(self) -> Self {
        // x^(q-1) is the inverse inside the order-q subgroup
        ToyElement(modpow(self.0 as u16, Q as u16 - 1) as u8)
    }
}

impl Sub for ToyElement {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

/// Backend marker for the order-11 group.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Toy;

impl Group for Toy {
    type Scalar = ToyScalar;
    type Element = ToyElement;

    const NAME: &'static str = "toy";
    const ELEMENT_LEN: usize = 1;

    fn identity() -> ToyElement {
        ToyElement(1)
    }

    fn generator() -> ToyElement {
        ToyElement(2)
    }

    fn second_generator() -> ToyElement {
        ToyElement(3)
    }

    fn mul(point: &ToyElement, scalar: &ToyScalar) -> ToyElement {
        ToyElement(modpow(point.0 as u16, scalar.0 as u16) as u8)
    }

    fn encode(point: &ToyElement) -> Vec<u8> {
        vec![point.0]
    }

    fn decode(bytes: &[u8]) -> Option<ToyElement> {
        match bytes {
            [b] => ToyElement::new(*b),
            _ => None,
        }
    }
}
