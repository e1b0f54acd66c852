//! In-process timing of key generation and signing.
//!
//! Round 1 covers every node producing its broadcast and verifying all n
//! broadcasts. Round 2 covers every node sending its n − 1 shares and
//! finalizing. Signing is a 3-of-n session (or t-of-n if t > 3) including
//! partial verification and aggregation. No network delay is modelled.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::dkg::{default_crs, max_participants, DkgError, KeyShare, Participant};
use crate::group::{Backend, Ed25519, Group, ParticipantId};
use crate::rng::SeededRng;
use crate::sign::{sign_with_coalition, verify, SignError, Signer};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("need at least one repetition")]
    NoRepetitions,
    #[error("invalid parameters t={t}, n={n} for this backend")]
    InvalidParameters { t: usize, n: usize },
    #[error("key generation failed: {0}")]
    Dkg(#[from] DkgError),
    #[error("signing failed: {0}")]
    Sign(#[from] SignError),
    #[error("benchmark signature did not verify")]
    BadSignature,
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub backend: Backend,
    pub t: usize,
    pub ns: Vec<usize>,
    pub repetitions: usize,
    pub seed: u64,
}

impl BenchConfig {
    /// Table rows from 4 to 255 nodes, t = 3.
    pub fn table_rows(backend: Backend) -> Self {
        BenchConfig { backend, t: 3, ns: vec![4, 8, 16, 32, 64, 128, 255], repetitions: 5, seed: 1 }
    }
}

/// Medians in milliseconds; dispersion is the relative standard deviation.
#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub backend: Backend,
    pub t: usize,
    pub n: usize,
    pub repetitions: usize,
    pub round1_ms: f64,
    pub round2_ms: f64,
    pub sign_ms: f64,
    pub round1_dispersion: f64,
    pub round2_dispersion: f64,
    pub sign_dispersion: f64,
}

pub fn median(samples: &[f64]) -> f64 {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.is_empty() {
        0.0
    } else if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

/// Sample standard deviation over the mean; 0 for fewer than two samples.
pub fn relative_std_dev(samples: &[f64]) -> f64 {
    if samples.len() < 2 {
        return 0.0;
    }
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    if mean == 0.0 {
        return 0.0;
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (samples.len() - 1) as f64;
    var.sqrt() / mean
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

struct Sample {
    round1: Duration,
    round2: Duration,
    sign: Duration,
}

fn one_run<G: Group>(t: usize, n: usize, rng: &SeededRng) -> Result<Sample, BenchError> {
    let crs = default_crs("bench", 0);
    let mut parts: Vec<Participant<G>> = ParticipantId::range(n as u32)
        .map(|id| Participant::new(id, n, t, crs.clone()))
        .collect::<Result<_, _>>()?;
    let mut rngs: Vec<SeededRng> = parts.iter().map(|p| rng.fork(&format!("dkg/{}", p.id()))).collect();

    let start = Instant::now();
    let mut broadcasts = BTreeMap::new();
    for (p, r) in parts.iter_mut().zip(rngs.iter_mut()) {
        broadcasts.insert(p.id(), p.round1(r)?);
    }
    for p in parts.iter_mut() {
        p.receive_broadcasts(broadcasts.clone())?;
    }
    let round1 = start.elapsed();

    let start = Instant::now();
    let mut outgoing = Vec::with_capacity(n * n);
    for p in parts.iter_mut() {
        let from = p.id();
        outgoing.extend(p.round2_send()?.into_iter().map(|(to, s)| (from, to, s)));
    }
    for (from, to, s) in outgoing {
        parts[to.get() as usize - 1].receive_share(from, s)?;
    }
    let keys: Vec<KeyShare<G>> = parts.iter_mut().map(|p| p.round2_finalize()).collect::<Result<_, _>>()?;
    let round2 = start.elapsed();

    let signers_needed = t.max(3).min(n);
    let coalition: Vec<ParticipantId> = ParticipantId::range(signers_needed as u32).collect();
    let mut signers: BTreeMap<_, _> =
        keys.iter().take(signers_needed).map(|k| (k.id, Signer::new(k.clone()))).collect();
    let mut sign_rng = rng.fork("sign");
    let start = Instant::now();
    let sig = sign_with_coalition(&mut signers, &coalition, b"benchmark", &mut sign_rng)?;
    let sign = start.elapsed();
    if !verify(&keys[0].group_pk, b"benchmark", &sig) {
        return Err(BenchError::BadSignature);
    }
    Ok(Sample { round1, round2, sign })
}

fn bench_row<G: Group>(backend: Backend, t: usize, n: usize, reps: usize, seed: u64) -> Result<BenchRow, BenchError> {
    let too_many = max_participants::<G::Scalar>().is_some_and(|m| n as u64 > m);
    if t < 1 || t > n || too_many {
        return Err(BenchError::InvalidParameters { t, n });
    }
    let root = SeededRng::from_u64(seed).fork(&format!("bench/{t}/{n}"));
    one_run::<G>(t, n, &root.fork("warmup"))?;
    let mut r1 = Vec::with_capacity(reps);
    let mut r2 = Vec::with_capacity(reps);
    let mut sg = Vec::with_capacity(reps);
    for k in 0..reps {
        let s = one_run::<G>(t, n, &root.fork(&format!("rep/{k}")))?;
        r1.push(ms(s.round1));
        r2.push(ms(s.round2));
        sg.push(ms(s.sign));
    }
    Ok(BenchRow {
        backend,
        t,
        n,
        repetitions: reps,
        round1_ms: median(&r1),
        round2_ms: median(&r2),
        sign_ms: median(&sg),
        round1_dispersion: relative_std_dev(&r1),
        round2_dispersion: relative_std_dev(&r2),
        sign_dispersion: relative_std_dev(&sg),
    })
}

/// One warm-up run then `repetitions` timed runs per n.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>, BenchError> {
    if cfg.repetitions == 0 {
        return Err(BenchError::NoRepetitions);
    }
    cfg.ns
        .iter()
        .map(|&n| match cfg.backend {
            Backend::Toy => bench_row::<crate::group::Toy>(cfg.backend, cfg.t, n, cfg.repetitions, cfg.seed),
            Backend::Ed25519 => bench_row::<Ed25519>(cfg.backend, cfg.t, n, cfg.repetitions, cfg.seed),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_and_dispersion() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(relative_std_dev(&[5.0]), 0.0);
        assert_eq!(relative_std_dev(&[2.0, 2.0, 2.0]), 0.0);
        // mean 2, sample variance 1
        assert!((relative_std_dev(&[1.0, 2.0, 3.0]) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn toy_rows_are_produced() {
        let cfg = BenchConfig { backend: Backend::Toy, t: 2, ns: vec![4, 8], repetitions: 2, seed: 3 };
        let rows = run_bench(&cfg).unwrap();
        assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![4, 8]);
        assert!(rows.iter().all(|r| r.repetitions == 2 && r.round2_ms >= 0.0));
    }

    #[test]
    fn rejects_bad_parameters() {
        let cfg = BenchConfig { backend: Backend::Toy, t: 2, ns: vec![16], repetitions: 1, seed: 3 };
        assert!(matches!(run_bench(&cfg), Err(BenchError::InvalidParameters { .. })));
        let cfg = BenchConfig { backend: Backend::Toy, t: 2, ns: vec![4], repetitions: 0, seed: 3 };
        assert!(matches!(run_bench(&cfg), Err(BenchError::NoRepetitions)));
    }
}
