//! Asynchronous verifiable secret sharing over bivariate polynomials.
//!
//! The dealer samples f(x, y) with f(0, 0) = secret and a companion f′,
//! both t×t (degree t−1 in each variable), and commits to every coefficient
//! pair as `f_jl·G + f′_jl·H`. Node i receives its row polynomials
//! a_i(y) = f(i, y), a′_i(y) and column polynomials b_i(x) = f(x, i), b′_i(x).
//!
//! Nodes then exchange the points where their polynomials overlap: i sends
//! j the values a_i(j) = f(i, j) = b_j(i) and b_i(j) = f(j, i) = a_j(i). Any
//! node holding t commitment-consistent points interpolates its own row and
//! column, so nodes the dealer never reached still obtain their share.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use rand::RngCore;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::group::{Group, ParticipantId, PrimeField};
use crate::poly::{interpolate_at, interpolate_polynomial, powers, PolyError, Polynomial};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AvssError {
    #[error("invalid parameters: need 1 <= t <= n (t = {t}, n = {n})")]
    InvalidParameters { t: usize, n: usize },
    #[error("coefficient matrix must be square and non-empty")]
    NotSquare,
    #[error("need at least {needed} shares to recover, got {got}")]
    InsufficientShares { needed: usize, got: usize },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// `coeffs[j][l]` multiplies x^l·y^j; `coeffs[0][0]` is the constant term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BivariatePolynomial<F> {
    coeffs: Vec<Vec<F>>,
}

impl<F: PrimeField> BivariatePolynomial<F> {
    pub fn from_rows(coeffs: Vec<Vec<F>>) -> Result<Self, AvssError> {
        let side = coeffs.len();
        if side == 0 || coeffs.iter().any(|r| r.len() != side) {
            return Err(AvssError::NotSquare);
        }
        Ok(BivariatePolynomial { coeffs })
    }

    /// Uniform t×t matrix with `constant` at [0][0].
    pub fn random<R: RngCore + ?Sized>(constant: F, t: usize, rng: &mut R) -> Result<Self, AvssError> {
        if t == 0 {
            return Err(AvssError::NotSquare);
        }
        let coeffs = (0..t)
            .map(|j| {
                (0..t)
                    .map(|l| if j == 0 && l == 0 { constant } else { F::random(rng) })
                    .collect()
            })
            .collect();
        Ok(BivariatePolynomial { coeffs })
    }

    pub fn side(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coefficients(&self) -> &[Vec<F>] {
        &self.coeffs
    }

    pub fn eval(&self, x: F, y: F) -> F {
        let xs = powers(x, self.side());
        let ys = powers(y, self.side());
        self.coeffs
            .iter()
            .zip(&ys)
            .map(|(row, &yj)| yj * row.iter().zip(&xs).map(|(&c, &xl)| c * xl).sum::<F>())
            .sum()
    }

    /// f(x0, y) as a polynomial in y.
    pub fn at_x(&self, x0: F) -> Polynomial<F> {
        let xs = powers(x0, self.side());
        Polynomial::from_coefficients(
            self.coeffs
                .iter()
                .map(|row| row.iter().zip(&xs).map(|(&c, &xl)| c * xl).sum())
                .collect(),
        )
    }

    /// f(x, y0) as a polynomial in x.
    pub fn at_y(&self, y0: F) -> Polynomial<F> {
        let ys = powers(y0, self.side());
        Polynomial::from_coefficients(
            (0..self.side())
                .map(|l| self.coeffs.iter().zip(&ys).map(|(row, &yj)| row[l] * yj).sum())
                .collect(),
        )
    }
}

/// `entries[j][l] = f_jl·G + f′_jl·H`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommitmentMatrix<G: Group> {
    entries: Vec<Vec<G::Element>>,
}

impl<G: Group> CommitmentMatrix<G> {
    pub fn commit(
        f: &BivariatePolynomial<G::Scalar>,
        f_prime: &BivariatePolynomial<G::Scalar>,
    ) -> Result<Self, AvssError> {
        if f.side() != f_prime.side() {
            return Err(AvssError::NotSquare);
        }
        let entries = f
            .coeffs
            .iter()
            .zip(&f_prime.coeffs)
            .map(|(r, rp)| r.iter().zip(rp).map(|(a, b)| G::pedersen(a, b)).collect())
            .collect();
        Ok(CommitmentMatrix { entries })
    }

    pub fn entries(&self) -> &[Vec<G::Element>] {
        &self.entries
    }

    pub fn side(&self) -> usize {
        self.entries.len()
    }

    /// Σ_{j,l} x^l y^j C[j][l], the commitment to (f(x, y), f′(x, y)).
    pub fn commitment_at(&self, x: G::Scalar, y: G::Scalar) -> G::Element {
        let xs = powers(x, self.side());
        let ys = powers(y, self.side());
        let mut acc = G::identity();
        for (row, &yj) in self.entries.iter().zip(&ys) {
            for (e, &xl) in row.iter().zip(&xs) {
                acc = acc + G::mul(e, &(xl * yj));
            }
        }
        acc
    }

    /// Commitment to the k-th coefficient of the row polynomial f(x0, y).
    fn row_coefficient(&self, x0: G::Scalar, k: usize) -> G::Element {
        let xs = powers(x0, self.side());
        G::linear_combination(xs.iter().zip(&self.entries[k]))
    }

    /// Commitment to the l-th coefficient of the column polynomial f(x, y0).
    fn column_coefficient(&self, y0: G::Scalar, l: usize) -> G::Element {
        let ys = powers(y0, self.side());
        G::linear_combination(ys.iter().zip(self.entries.iter().map(|r| &r[l])))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.entries.iter().flatten().flat_map(G::encode).collect()
    }

    pub fn digest(&self) -> [u8; 32] {
        Sha256::digest(self.to_bytes()).into()
    }
}

/// Everything the dealer sends to one node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AvssDeal<G: Group> {
    pub recipient: ParticipantId,
    pub commitment: CommitmentMatrix<G>,
    /// a_i(y) = f(i, y)
    pub row: Polynomial<G::Scalar>,
    /// a′_i(y) = f′(i, y)
    pub row_blinding: Polynomial<G::Scalar>,
    /// b_i(x) = f(x, i)
    pub column: Polynomial<G::Scalar>,
    /// b′_i(x) = f′(x, i)
    pub column_blinding: Polynomial<G::Scalar>,
}

impl<G: Group> AvssDeal<G> {
    /// Coefficient-wise check of all four polynomials against the matrix.
    pub fn verify(&self) -> bool {
        let c = &self.commitment;
        let side = c.side();
        let i: G::Scalar = self.recipient.to_scalar();
        let shaped = [&self.row, &self.row_blinding, &self.column, &self.column_blinding]
            .iter()
            .all(|p| p.coefficients().len() == side);
        if !shaped {
            return false;
        }
        (0..side).all(|k| {
            let row_ok = G::pedersen(&self.row.coefficients()[k], &self.row_blinding.coefficients()[k])
                == c.row_coefficient(i, k);
            let col_ok = G::pedersen(&self.column.coefficients()[k], &self.column_blinding.coefficients()[k])
                == c.column_coefficient(i, k);
            row_ok && col_ok
        })
    }

    /// This node's share (σ, σ′) = (f(i, 0), f′(i, 0)).
    pub fn share(&self) -> (G::Scalar, G::Scalar) {
        (self.row.constant(), self.row_blinding.constant())
    }

    /// The overlap point this node sends to `to`.
    pub fn point_for(&self, to: ParticipantId) -> AvssPoint<G::Scalar> {
        let x: G::Scalar = to.to_scalar();
        AvssPoint {
            from: self.recipient,
            to,
            row_value: self.row.eval(x),
            row_blinding: self.row_blinding.eval(x),
            column_value: self.column.eval(x),
            column_blinding: self.column_blinding.eval(x),
        }
    }
}

/// Overlap values sent from `from` (= i) to `to` (= j): f(i, j) and f(j, i)
/// with their companions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AvssPoint<F> {
    pub from: ParticipantId,
    pub to: ParticipantId,
    /// a_i(j) = f(i, j)
    pub row_value: F,
    pub row_blinding: F,
    /// b_i(j) = f(j, i)
    pub column_value: F,
    pub column_blinding: F,
}

impl<F: PrimeField> AvssPoint<F> {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&self.from.to_be_bytes());
        out.extend_from_slice(&self.to.to_be_bytes());
        for s in [self.row_value, self.row_blinding, self.column_value, self.column_blinding] {
            out.extend(s.to_bytes());
        }
        out
    }
}

/// Checks both overlap values of a point against the matrix.
pub fn verify_point<G: Group>(c: &CommitmentMatrix<G>, p: &AvssPoint<G::Scalar>) -> bool {
    let i: G::Scalar = p.from.to_scalar();
    let j: G::Scalar = p.to.to_scalar();
    G::pedersen(&p.row_value, &p.row_blinding) == c.commitment_at(i, j)
        && G::pedersen(&p.column_value, &p.column_blinding) == c.commitment_at(j, i)
}

fn check_parameters<F: PrimeField>(t: usize, n: usize) -> Result<(), AvssError> {
    let bad = AvssError::InvalidParameters { t, n };
    if t < 1 || t > n {
        return Err(bad);
    }
    if F::MODULUS.len() <= 19 && n as u64 >= F::MODULUS.parse::<u64>().expect("decimal modulus") {
        return Err(bad);
    }
    Ok(())
}

/// Deals from explicit polynomials.
pub fn avss_deal_with<G: Group>(
    f: &BivariatePolynomial<G::Scalar>,
    f_prime: &BivariatePolynomial<G::Scalar>,
    n: usize,
) -> Result<(CommitmentMatrix<G>, Vec<AvssDeal<G>>), AvssError> {
    check_parameters::<G::Scalar>(f.side(), n)?;
    let commitment = CommitmentMatrix::commit(f, f_prime)?;
    let deals = ParticipantId::range(n as u32)
        .map(|id| {
            let i: G::Scalar = id.to_scalar();
            AvssDeal {
                recipient: id,
                commitment: commitment.clone(),
                row: f.at_x(i),
                row_blinding: f_prime.at_x(i),
                column: f.at_y(i),
                column_blinding: f_prime.at_y(i),
            }
        })
        .collect();
    Ok((commitment, deals))
}

pub fn avss_deal<G: Group, R: RngCore + ?Sized>(
    secret: G::Scalar,
    t: usize,
    n: usize,
    rng: &mut R,
) -> Result<(CommitmentMatrix<G>, Vec<AvssDeal<G>>), AvssError> {
    check_parameters::<G::Scalar>(t, n)?;
    let f = BivariatePolynomial::random(secret, t, rng)?;
    let f_prime = BivariatePolynomial::random(G::Scalar::random(rng), t, rng)?;
    avss_deal_with(&f, &f_prime, n)
}

/// σ·G + σ′·H = Σ_l m^l · C[0][l], i.e. the commitment to f(m, 0).
pub fn avss_verify_share<G: Group>(
    c: &CommitmentMatrix<G>,
    m: ParticipantId,
    sigma: G::Scalar,
    sigma_prime: G::Scalar,
) -> bool {
    G::pedersen(&sigma, &sigma_prime) == c.commitment_at(m.to_scalar(), G::Scalar::zero())
}

/// Interpolates f(0, 0) from shares σ_i = f(i, 0); needs at least t of them.
pub fn avss_recover_secret<F: PrimeField>(shares: &[(ParticipantId, F)], t: usize) -> Result<F, AvssError> {
    if shares.len() < t {
        return Err(AvssError::InsufficientShares { needed: t, got: shares.len() });
    }
    Ok(interpolate_at(shares, F::zero())?)
}

/// Row and column polynomials a node holds once complete.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReconstructedShare<F> {
    pub row: Polynomial<F>,
    pub row_blinding: Polynomial<F>,
    pub column: Polynomial<F>,
    pub column_blinding: Polynomial<F>,
}

impl<F: PrimeField> ReconstructedShare<F> {
    pub fn share(&self) -> (F, F) {
        (self.row.constant(), self.row_blinding.constant())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeStatus<F> {
    /// Fewer than t valid points so far; more may still arrive.
    Pending { valid_points: usize },
    Complete(ReconstructedShare<F>),
}

/// Per-node side of the point exchange.
#[derive(Clone, Debug)]
pub struct AvssNode<G: Group> {
    id: ParticipantId,
    t: usize,
    commitment: Option<CommitmentMatrix<G>>,
    /// votes for a commitment matrix, by digest, from peers' points
    candidates: BTreeMap<[u8; 32], (CommitmentMatrix<G>, BTreeSet<ParticipantId>)>,
    unchecked: Vec<AvssPoint<G::Scalar>>,
    points: BTreeMap<ParticipantId, AvssPoint<G::Scalar>>,
    faulty: BTreeSet<ParticipantId>,
    dealt: Option<AvssDeal<G>>,
    complete: Option<ReconstructedShare<G::Scalar>>,
}

impl<G: Group> AvssNode<G> {
    pub fn new(id: ParticipantId, t: usize) -> Self {
        AvssNode {
            id,
            t,
            commitment: None,
            candidates: BTreeMap::new(),
            unchecked: Vec::new(),
            points: BTreeMap::new(),
            faulty: BTreeSet::new(),
            dealt: None,
            complete: None,
        }
    }

    pub fn id(&self) -> ParticipantId {
        self.id
    }

    pub fn commitment(&self) -> Option<&CommitmentMatrix<G>> {
        self.commitment.as_ref()
    }

    /// Accepts a deal addressed to this node. Returns false (and ignores the
    /// deal) if it does not match its own commitment matrix.
    pub fn receive_deal(&mut self, deal: AvssDeal<G>) -> bool {
        if deal.recipient != self.id || deal.commitment.side() != self.t || !deal.verify() {
            return false;
        }
        if let Some(c) = &self.commitment {
            if *c != deal.commitment {
                return false;
            }
        }
        self.adopt(deal.commitment.clone());
        self.complete = Some(ReconstructedShare {
            row: deal.row.clone(),
            row_blinding: deal.row_blinding.clone(),
            column: deal.column.clone(),
            column_blinding: deal.column_blinding.clone(),
        });
        self.dealt = Some(deal);
        true
    }

    fn adopt(&mut self, c: CommitmentMatrix<G>) {
        if self.commitment.is_none() {
            self.commitment = Some(c);
            for p in std::mem::take(&mut self.unchecked) {
                self.check_point(p);
            }
        }
    }

    fn check_point(&mut self, p: AvssPoint<G::Scalar>) {
        let c = self.commitment.as_ref().expect("commitment adopted");
        if verify_point(c, &p) {
            self.points.entry(p.from).or_insert(p);
        } else {
            self.faulty.insert(p.from);
        }
    }

    /// Handles a point together with the matrix its sender vouches for.
    /// Without a deal, a node adopts a matrix once t distinct senders agree.
    pub fn receive_point(&mut self, point: AvssPoint<G::Scalar>, vouched: &CommitmentMatrix<G>) {
        if point.to != self.id || point.from == self.id {
            return;
        }
        if self.commitment.is_none() {
            let digest = vouched.digest();
            let entry = self
                .candidates
                .entry(digest)
                .or_insert_with(|| (vouched.clone(), BTreeSet::new()));
            entry.1.insert(point.from);
            self.unchecked.push(point);
            if entry.1.len() >= self.t {
                let c = entry.0.clone();
                self.adopt(c);
            }
        } else {
            self.check_point(point);
        }
        self.try_complete();
    }

    fn try_complete(&mut self) {
        if self.complete.is_some() || self.points.len() < self.t {
            return;
        }
        let pts: Vec<_> = self.points.values().take(self.t).collect();
        let interp = |sel: fn(&AvssPoint<G::Scalar>) -> G::Scalar| {
            let xs: Vec<_> = pts.iter().map(|p| (p.from, sel(p))).collect();
            interpolate_polynomial(&xs).expect("distinct senders")
        };
        // a_j(i) = f(j, i) arrives as the sender's column value and vice versa
        self.complete = Some(ReconstructedShare {
            row: interp(|p| p.column_value),
            row_blinding: interp(|p| p.column_blinding),
            column: interp(|p| p.row_value),
            column_blinding: interp(|p| p.row_blinding),
        });
    }

    /// Points to send to peers, available once this node holds its polynomials.
    pub fn outgoing_points(&self, n: usize) -> Vec<AvssPoint<G::Scalar>> {
        let Some(share) = &self.complete else { return Vec::new() };
        ParticipantId::range(n as u32)
            .filter(|&to| to != self.id)
            .map(|to| {
                let x: G::Scalar = to.to_scalar();
                AvssPoint {
                    from: self.id,
                    to,
                    row_value: share.row.eval(x),
                    row_blinding: share.row_blinding.eval(x),
                    column_value: share.column.eval(x),
                    column_blinding: share.column_blinding.eval(x),
                }
            })
            .collect()
    }

    pub fn status(&self) -> NodeStatus<G::Scalar> {
        match &self.complete {
            Some(s) => NodeStatus::Complete(s.clone()),
            None => NodeStatus::Pending { valid_points: self.points.len() },
        }
    }

    pub fn is_complete(&self) -> bool {
        self.complete.is_some()
    }

    /// Senders whose points failed the commitment check.
    pub fn faulty_senders(&self) -> &BTreeSet<ParticipantId> {
        &self.faulty
    }

    pub fn received_deal(&self) -> bool {
        self.dealt.is_some()
    }
}

/// Synchronous exchange driver: nodes with a deal (or, later, a completed
/// reconstruction) send overlap points to every peer until no node makes
/// progress. `deals[i]` is what node i+1 received from the dealer.
pub fn avss_exchange_and_interpolate<G: Group>(
    deals: Vec<Option<AvssDeal<G>>>,
    t: usize,
) -> Vec<AvssNode<G>> {
    let n = deals.len();
    let mut nodes: Vec<AvssNode<G>> = ParticipantId::range(n as u32).map(|id| AvssNode::new(id, t)).collect();
    for (node, deal) in nodes.iter_mut().zip(deals) {
        if let Some(d) = deal {
            node.receive_deal(d);
        }
    }
    let mut sent = vec![false; n];
    loop {
        let mut progressed = false;
        for k in 0..n {
            if sent[k] || !nodes[k].is_complete() {
                continue;
            }
            sent[k] = true;
            progressed = true;
            let c = nodes[k].commitment().cloned().expect("complete nodes hold a matrix");
            for p in nodes[k].outgoing_points(n) {
                nodes[p.to.get() as usize - 1].receive_point(p, &c);
            }
        }
        if !progressed {
            return nodes;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{Ed25519, Ed25519Scalar, Toy, ToyScalar};
    use crate::rng::SeededRng;

    fn id(v: u32) -> ParticipantId {
        ParticipantId::new(v).unwrap()
    }

    fn toy(v: u64) -> ToyScalar {
        ToyScalar::new(v)
    }

    fn forced_toy() -> BivariatePolynomial<ToyScalar> {
        // f(x, y) = 5 + 2x + 3y + 4xy
        BivariatePolynomial::from_rows(vec![vec![toy(5), toy(2)], vec![toy(3), toy(4)]]).unwrap()
    }

    #[test]
    fn degenerate_threshold_one() {
        let mut rng = SeededRng::from_u64(1);
        let secret = Ed25519Scalar::from_u64(42);
        let (c, deals) = avss_deal::<Ed25519, _>(secret, 1, 3, &mut rng).unwrap();
        assert_eq!(c.side(), 1);
        for d in &deals {
            assert_eq!(d.row.coefficients(), &[secret]);
            assert!(d.verify());
        }
    }

    #[test]
    fn rows_and_columns_cross_agree() {
        let mut rng = SeededRng::from_u64(2);
        let (_, deals) = avss_deal::<Ed25519, _>(Ed25519Scalar::from_u64(9), 3, 6, &mut rng).unwrap();
        for di in &deals {
            for dj in &deals {
                let i: Ed25519Scalar = di.recipient.to_scalar();
                let j: Ed25519Scalar = dj.recipient.to_scalar();
                assert_eq!(di.row.eval(j), dj.column.eval(i));
            }
        }
    }

    #[test]
    fn forced_row_polynomial() {
        let f = forced_toy();
        assert_eq!(f.at_x(toy(2)).coefficients(), &[toy(9), toy(0)]);
        assert_eq!(f.eval(toy(1), toy(0)), toy(7));
        assert_eq!(f.eval(toy(2), toy(0)), toy(9));
    }

    #[test]
    fn honest_shares_verify_and_tamper_rejects() {
        let mut rng = SeededRng::from_u64(3);
        let (c, deals) = avss_deal::<Ed25519, _>(Ed25519Scalar::from_u64(5), 3, 5, &mut rng).unwrap();
        for d in &deals {
            let (s, sp) = d.share();
            assert!(avss_verify_share(&c, d.recipient, s, sp));
            assert!(!avss_verify_share(&c, d.recipient, s + Ed25519Scalar::from_u64(1), sp));
        }
    }

    #[test]
    fn accepting_pairs_form_a_coset() {
        let f = forced_toy();
        let fp = BivariatePolynomial::from_rows(vec![vec![toy(1), toy(6)], vec![toy(8), toy(2)]]).unwrap();
        let (c, _) = avss_deal_with::<Toy>(&f, &fp, 4).unwrap();
        for m in 1..=4u32 {
            let accepted: Vec<_> = (0..11)
                .flat_map(|s| (0..11).map(move |sp| (toy(s), toy(sp))))
                .filter(|&(s, sp)| avss_verify_share(&c, id(m), s, sp))
                .collect();
            assert_eq!(accepted.len(), 11);
            let honest = (f.eval(toy(m as u64), toy(0)), fp.eval(toy(m as u64), toy(0)));
            assert!(accepted.contains(&honest));
        }
    }

    #[test]
    fn recover_forced_secret() {
        let shares = [(id(1), toy(7)), (id(2), toy(9))];
        assert_eq!(avss_recover_secret(&shares, 2).unwrap(), toy(5));
        assert!(avss_recover_secret(&shares[..1], 2).is_err());
        assert!(avss_recover_secret(&[(id(1), toy(7)), (id(1), toy(7))], 2).is_err());
        assert_eq!(avss_recover_secret(&[(id(3), toy(4))], 1).unwrap(), toy(4));
    }

    #[test]
    fn threshold_above_n_rejected() {
        let mut rng = SeededRng::from_u64(4);
        assert!(matches!(
            avss_deal::<Ed25519, _>(Ed25519Scalar::from_u64(1), 4, 3, &mut rng),
            Err(AvssError::InvalidParameters { .. })
        ));
    }

    #[test]
    fn exchange_reproduces_deals() {
        let mut rng = SeededRng::from_u64(5);
        let (_, deals) = avss_deal::<Ed25519, _>(Ed25519Scalar::from_u64(5), 3, 5, &mut rng).unwrap();
        // drop the deal to node 5: it must rebuild from peers
        let mut given: Vec<_> = deals.iter().cloned().map(Some).collect();
        given[4] = None;
        let nodes = avss_exchange_and_interpolate(given, 3);
        for (node, deal) in nodes.iter().zip(&deals) {
            match node.status() {
                NodeStatus::Complete(s) => {
                    assert_eq!(s.row, deal.row);
                    assert_eq!(s.column, deal.column);
                    assert_eq!(s.row_blinding, deal.row_blinding);
                }
                NodeStatus::Pending { .. } => panic!("node {} incomplete", node.id()),
            }
        }
        assert!(!nodes[4].received_deal());
    }

    #[test]
    fn corrupt_sender_is_flagged() {
        let mut rng = SeededRng::from_u64(6);
        let (c, deals) = avss_deal::<Toy, _>(toy(5), 2, 4, &mut rng).unwrap();
        let mut node = AvssNode::<Toy>::new(id(4), 2);
        for d in &deals[..3] {
            let mut p = d.point_for(id(4));
            if d.recipient == id(1) {
                p.row_value += toy(1);
            }
            node.receive_point(p, &c);
        }
        assert!(node.is_complete());
        assert_eq!(node.faulty_senders().iter().copied().collect::<Vec<_>>(), vec![id(1)]);
        match node.status() {
            NodeStatus::Complete(s) => assert_eq!(s.row, deals[3].row),
            _ => unreachable!(),
        }
    }

    #[test]
    fn too_few_points_is_pending() {
        let mut rng = SeededRng::from_u64(7);
        let (c, deals) = avss_deal::<Toy, _>(toy(5), 3, 5, &mut rng).unwrap();
        let mut node = AvssNode::<Toy>::new(id(5), 3);
        node.receive_point(deals[0].point_for(id(5)), &c);
        node.receive_point(deals[1].point_for(id(5)), &c);
        // two vouchers are not enough to adopt the matrix, so nothing is checked yet
        assert_eq!(node.status(), NodeStatus::Pending { valid_points: 0 });
        node.receive_point(deals[2].point_for(id(5)), &c);
        assert!(node.is_complete());
    }

    #[test]
    fn point_check_is_sound_on_toy() {
        let f = forced_toy();
        let fp = BivariatePolynomial::from_rows(vec![vec![toy(3), toy(1)], vec![toy(0), toy(7)]]).unwrap();
        let (c, deals) = avss_deal_with::<Toy>(&f, &fp, 3).unwrap();
        let honest = deals[0].point_for(id(2));
        assert!(verify_point(&c, &honest));
        for v in 0..11 {
            let mut p = honest;
            p.row_value = toy(v);
            assert_eq!(verify_point(&c, &p), toy(v) == honest.row_value);
        }
    }
}
