//! Brute-force oracle for the toy group: plain u64 modular arithmetic in
//! the order-11 subgroup of Z_23^* generated by 2, with second generator 3.
#![allow(dead_code)]

use threshold_toolkit::{ToyElement, ToyScalar};

pub const P: u64 = 23;
pub const Q: u64 = 11;
pub const G: u64 = 2;
pub const H: u64 = 3;

pub fn modpow(base: u64, exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    for _ in 0..exp {
        acc = acc * base % m;
    }
    acc
}

pub fn g_pow(e: u64) -> u64 {
    modpow(G, e % Q, P)
}

pub fn h_pow(e: u64) -> u64 {
    modpow(H, e % Q, P)
}

/// g^a · h^b mod p.
pub fn pedersen(a: u64, b: u64) -> u64 {
    g_pow(a) * h_pow(b) % P
}

pub fn inv_q(a: u64) -> u64 {
    assert!(a % Q != 0);
    modpow(a % Q, Q - 2, Q)
}

/// Π bases[k]^(x^k) mod p.
pub fn committed_eval(bases: &[u64], x: u64) -> u64 {
    bases
        .iter()
        .enumerate()
        .fold(1, |acc, (k, &c)| acc * modpow(c, modpow(x, k as u64, Q), P) % P)
}

/// Σ coeffs[k]·x^k mod q.
pub fn poly_eval(coeffs: &[u64], x: u64) -> u64 {
    coeffs.iter().rev().fold(0, |acc, &c| (acc * x + c) % Q)
}

/// λ_i = Π_{j≠i} j / (j − i) mod q, evaluated at zero.
pub fn lagrange_at_zero(i: u64, coalition: &[u64]) -> u64 {
    coalition.iter().filter(|&&j| j != i).fold(1, |acc, &j| {
        acc * j % Q * inv_q((j + Q - i % Q) % Q) % Q
    })
}

pub fn sc(s: ToyScalar) -> u64 {
    s.value() as u64
}

pub fn el(e: ToyElement) -> u64 {
    e.residue() as u64
}

pub fn toy(v: u64) -> ToyScalar {
    ToyScalar::new(v)
}
