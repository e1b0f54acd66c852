mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;

use common::*;
use threshold_toolkit::dkg::run_dkg;
use threshold_toolkit::poly::{interpolate_at, Polynomial};
use threshold_toolkit::sharing::{
    feldman_commit, feldman_verify, pedersen_split, pedersen_verify, shamir_combine, shamir_split, CommitmentVector,
    SharePacket,
};
use threshold_toolkit::sign::{sign_with_coalition, verify, Signature, Signer};
use threshold_toolkit::sim::gossip::Transcript;
use threshold_toolkit::{Ed25519, Ed25519Scalar, Group, ParticipantId, PrimeField, SeededRng, Toy};

fn id(v: u32) -> ParticipantId {
    ParticipantId::new(v).unwrap()
}

fn ed(seed: u64) -> Ed25519Scalar {
    Ed25519Scalar::random(&mut SeededRng::from_u64(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn any_t_plus_one_shares_recover(seed: u64, t in 1usize..5, extra in 1usize..5, pick: u64) {
        let n = t + extra;
        let secret = ed(seed);
        let mut rng = SeededRng::from_u64(seed ^ 1);
        let shares = shamir_split(secret, t, n, &mut rng).unwrap();
        let mut order: Vec<usize> = (0..n).collect();
        let mut prng = SeededRng::from_u64(pick);
        for i in (1..n).rev() {
            order.swap(i, prng.below(i as u64 + 1) as usize);
        }
        let chosen: Vec<_> = order[..t + 1].iter().map(|&k| shares[k]).collect();
        prop_assert_eq!(shamir_combine(&chosen, t).unwrap(), secret);
        prop_assert!(shamir_combine(&chosen[..t], t).is_err());
    }

    #[test]
    fn share_packets_round_trip(i in 1u32..u32::MAX, v: u64, b: Option<u64>) {
        let p = match b {
            Some(b) => SharePacket::with_blinding(id(i), ed(v), ed(b)),
            None => SharePacket::new(id(i), ed(v)),
        };
        let bytes = p.to_bytes();
        prop_assert_eq!(&bytes[..4], &i.to_be_bytes());
        prop_assert_eq!(SharePacket::from_bytes(&bytes).unwrap(), p);
        prop_assert_eq!(SharePacket::from_hex(&p.to_hex()).unwrap(), p);
    }

    #[test]
    fn commitments_round_trip(seed: u64, deg in 1usize..6) {
        let poly = Polynomial::random(ed(seed), deg, &mut SeededRng::from_u64(seed)).unwrap();
        let c = feldman_commit::<Ed25519>(&poly);
        prop_assert_eq!(CommitmentVector::<Ed25519>::from_bytes(&c.to_bytes()).unwrap(), c);
    }

    #[test]
    fn feldman_and_pedersen_shares_cross_check(seed: u64, t in 1usize..4, extra in 1usize..4) {
        let n = t + extra;
        let mut rng = SeededRng::from_u64(seed);
        let poly = Polynomial::random(ed(seed), t, &mut rng).unwrap();
        let c = feldman_commit::<Ed25519>(&poly);
        for i in 1..=n as u32 {
            let good = SharePacket::new(id(i), poly.eval_at(id(i)));
            prop_assert!(feldman_verify(&good, &c));
            let bad = SharePacket::new(id(i), good.value + Ed25519Scalar::from_u64(1));
            prop_assert!(!feldman_verify(&bad, &c));
        }
        let (pc, shares) = pedersen_split::<Ed25519, _>(ed(seed ^ 7), t, n, &mut rng).unwrap();
        prop_assert!(shares.iter().all(|s| pedersen_verify(s, &pc).unwrap()));
    }

    #[test]
    fn toy_dkg_coalitions_agree(seed: u64, t in 1usize..5, extra in 0usize..5, a: u64, b: u64) {
        let n = t + extra;
        let keys = run_dkg::<Toy>(n, t, b"prop", &SeededRng::from_u64(seed)).unwrap().keys;
        let subset = |s: u64| {
            let mut ids: Vec<usize> = (0..n).collect();
            let mut r = SeededRng::from_u64(s);
            for i in (1..n).rev() {
                ids.swap(i, r.below(i as u64 + 1) as usize);
            }
            ids[..t].iter().map(|&k| (keys[k].id, keys[k].sk_share)).collect::<Vec<_>>()
        };
        let s1 = interpolate_at(&subset(a), toy(0)).unwrap();
        let s2 = interpolate_at(&subset(b), toy(0)).unwrap();
        prop_assert_eq!(s1, s2);
        prop_assert_eq!(Toy::mul_base(&s1), keys[0].group_pk);
        // the oracle agrees on the group key
        prop_assert_eq!(el(keys[0].group_pk), g_pow(sc(s1)));
    }

    #[test]
    fn signatures_round_trip_and_verify(seed: u64, msg in proptest::collection::vec(any::<u8>(), 0..64)) {
        let keys = run_dkg::<Ed25519>(4, 2, b"prop", &SeededRng::from_u64(seed)).unwrap().keys;
        let mut signers: BTreeMap<_, _> = keys.iter().map(|k| (k.id, Signer::new(k.clone()))).collect();
        let sig = sign_with_coalition(&mut signers, &[id(2), id(4)], &msg, &mut SeededRng::from_u64(seed)).unwrap();
        let bytes = sig.to_bytes();
        prop_assert_eq!(bytes.len(), 64);
        let back = Signature::<Ed25519>::from_bytes(&bytes).unwrap();
        prop_assert!(verify(&keys[0].group_pk, &msg, &back));
        let mut other = msg.clone();
        other.push(0);
        prop_assert!(!verify(&keys[0].group_pk, &other, &back));
    }

    #[test]
    fn transcript_merge_is_a_union(a in proptest::collection::btree_map(1u32..20, 0u64..11, 0..8),
                                   b in proptest::collection::btree_map(1u32..20, 0u64..11, 0..8)) {
        let mk = |m: &BTreeMap<u32, u64>| Transcript::<Toy> {
            domain: "d".into(),
            context_hash: [0; 32],
            contributions: m.iter().map(|(&k, &v)| (id(k), toy(v))).collect(),
        };
        let (ta, tb) = (mk(&a), mk(&b));
        let mut ab = ta.clone();
        ab.merge(&tb);
        let keys: std::collections::BTreeSet<_> = a.keys().chain(b.keys()).collect();
        prop_assert_eq!(ab.len(), keys.len());
        let mut again = ab.clone();
        again.merge(&tb);
        prop_assert_eq!(&again, &ab);
        prop_assert_eq!(again.content_hash(), ab.content_hash());
    }
}

#[test]
fn toy_feldman_soundness_is_exhaustive() {
    // every wrong share value is rejected for every degree-1 polynomial and id
    for c0 in 0..Q {
        for c1 in 0..Q {
            let poly = Polynomial::from_coefficients(vec![toy(c0), toy(c1)]);
            let c = feldman_commit::<Toy>(&poly);
            for i in 1..=10u32 {
                let right = poly_eval(&[c0, c1], i as u64);
                for v in 0..Q {
                    let ok = feldman_verify(&SharePacket::new(id(i), toy(v)), &c);
                    assert_eq!(ok, v == right, "c=({c0},{c1}) i={i} v={v}");
                }
            }
        }
    }
}

#[test]
fn pedersen_commitments_hide_the_secret() {
    // for a fixed commitment, every secret has exactly one blinding that opens it
    for commit in [pedersen(3, 7), pedersen(0, 1), pedersen(10, 10)] {
        for s in 0..Q {
            let openings = (0..Q).filter(|&r| pedersen(s, r) == commit).count();
            assert_eq!(openings, 1);
        }
    }
}

#[test]
fn signing_coalitions_are_interchangeable() {
    let keys = run_dkg::<Toy>(5, 3, b"coalitions", &SeededRng::from_u64(2)).unwrap().keys;
    let mut signers: BTreeMap<_, _> = keys.iter().map(|k| (k.id, Signer::new(k.clone()))).collect();
    let mut rng = SeededRng::from_u64(3);
    for coalition in [[1, 2, 3], [3, 4, 5], [1, 3, 5], [2, 4, 5]] {
        let ids: Vec<_> = coalition.iter().map(|&c| id(c)).collect();
        let sig = sign_with_coalition(&mut signers, &ids, b"same key", &mut rng).unwrap();
        assert!(verify(&keys[0].group_pk, b"same key", &sig), "{coalition:?}");
    }
}
