//! Univariate polynomials over Z_q and Lagrange interpolation.

use std::collections::BTreeSet;

use rand::RngCore;
use thiserror::Error;

use crate::group::{ParticipantId, PrimeField};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("threshold degree must be at least 1")]
    ZeroDegree,
    #[error("duplicate participant id {0}")]
    DuplicateId(ParticipantId),
    #[error("participant {0} is not part of the coalition")]
    NotInCoalition(ParticipantId),
    #[error("no interpolation points supplied")]
    NoPoints,
    #[error("participant ids collide modulo the group order")]
    IdsCollideModQ,
}

/// `coefficients[k]` multiplies x^k. Trailing zeros are allowed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial<F> {
    coefficients: Vec<F>,
}

impl<F: PrimeField> Polynomial<F> {
    /// Panics on an empty coefficient list.
    pub fn from_coefficients(coefficients: Vec<F>) -> Self {
        assert!(!coefficients.is_empty(), "polynomial needs a constant term");
        Polynomial { coefficients }
    }

    /// Constant term `secret`, then `degree` uniform coefficients.
    pub fn random<R: RngCore + ?Sized>(secret: F, degree: usize, rng: &mut R) -> Result<Self, PolyError> {
        if degree == 0 {
            return Err(PolyError::ZeroDegree);
        }
        let mut coefficients = Vec::with_capacity(degree + 1);
        coefficients.push(secret);
        coefficients.extend((0..degree).map(|_| F::random(rng)));
        Ok(Polynomial { coefficients })
    }

    pub fn coefficients(&self) -> &[F] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn constant(&self) -> F {
        self.coefficients[0]
    }

    /// Horner evaluation.
    pub fn eval(&self, x: F) -> F {
        self.coefficients
            .iter()
            .rev()
            .fold(F::zero(), |acc, &c| acc * x + c)
    }

    pub fn eval_at(&self, id: ParticipantId) -> F {
        self.eval(id.to_scalar())
    }
}

/// 1, x, x², …, x^(len-1).
pub fn powers<F: PrimeField>(x: F, len: usize) -> Vec<F> {
    let mut out = Vec::with_capacity(len);
    let mut acc = F::one();
    for _ in 0..len {
        out.push(acc);
        acc *= x;
    }
    out
}

fn check_distinct<F: PrimeField>(ids: &[ParticipantId]) -> Result<(), PolyError> {
    let mut seen = BTreeSet::new();
    for &id in ids {
        if !seen.insert(id) {
            return Err(PolyError::DuplicateId(id));
        }
    }
    let mut residues = std::collections::HashSet::new();
    for &id in ids {
        let r: F = id.to_scalar();
        if r.is_zero() || !residues.insert(r) {
            return Err(PolyError::IdsCollideModQ);
        }
    }
    Ok(())
}

/// λ_index(x) = Π_{ℓ ≠ index} (x − ℓ)/(index − ℓ) over the coalition.
pub fn lagrange_coefficient<F: PrimeField>(
    index: ParticipantId,
    coalition: &[ParticipantId],
    x: F,
) -> Result<F, PolyError> {
    check_distinct::<F>(coalition)?;
    if !coalition.contains(&index) {
        return Err(PolyError::NotInCoalition(index));
    }
    Ok(lagrange_unchecked(index, coalition, x))
}

fn lagrange_unchecked<F: PrimeField>(index: ParticipantId, coalition: &[ParticipantId], x: F) -> F {
    let xi: F = index.to_scalar();
    let mut num = F::one();
    let mut den = F::one();
    for &other in coalition.iter().filter(|&&o| o != index) {
        let xo: F = other.to_scalar();
        num *= x - xo;
        den *= xi - xo;
    }
    num * den.invert().expect("distinct ids give a nonzero denominator")
}

/// Value at `x` of the unique degree-(len−1) polynomial through `points`.
pub fn interpolate_at<F: PrimeField>(points: &[(ParticipantId, F)], x: F) -> Result<F, PolyError> {
    if points.is_empty() {
        return Err(PolyError::NoPoints);
    }
    let ids: Vec<ParticipantId> = points.iter().map(|(id, _)| *id).collect();
    check_distinct::<F>(&ids)?;
    Ok(points
        .iter()
        .map(|&(id, y)| lagrange_unchecked(id, &ids, x) * y)
        .sum())
}

/// Coefficients of the interpolating polynomial (degree len−1).
///
/// O(k²) construction from the Lagrange basis; used where a node needs the
/// whole polynomial back, not just one value.
pub fn interpolate_polynomial<F: PrimeField>(
    points: &[(ParticipantId, F)],
) -> Result<Polynomial<F>, PolyError> {
    if points.is_empty() {
        return Err(PolyError::NoPoints);
    }
    let ids: Vec<ParticipantId> = points.iter().map(|(id, _)| *id).collect();
    check_distinct::<F>(&ids)?;
    let k = points.len();
    let mut result = vec![F::zero(); k];
    for &(id, y) in points {
        let xi: F = id.to_scalar();
        // basis numerator Π (x − x_o), built up coefficient-wise
        let mut basis = vec![F::one()];
        let mut den = F::one();
        for &other in ids.iter().filter(|&&o| o != id) {
            let xo: F = other.to_scalar();
            let mut next = vec![F::zero(); basis.len() + 1];
            for (d, &c) in basis.iter().enumerate() {
                next[d + 1] += c;
                next[d] -= c * xo;
            }
            basis = next;
            den *= xi - xo;
        }
        let scale = y * den.invert().expect("distinct ids");
        for (d, c) in basis.into_iter().enumerate() {
            result[d] += c * scale;
        }
    }
    Ok(Polynomial::from_coefficients(result))
}
