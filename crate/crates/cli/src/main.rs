//! `threshold`: key generation, signing, verification, benchmarks and
//! simulations from the command line.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use threshold_toolkit::avss::{avss_deal, avss_recover_secret, avss_verify_share};
use threshold_toolkit::bench::{run_bench, BenchConfig};
use threshold_toolkit::dkg::{default_crs, run_dkg, KeyShare};
use threshold_toolkit::sharing::{CommitmentVector, SharePacket};
use threshold_toolkit::sign::{sign_with_coalition, verify, Signature, Signer};
use threshold_toolkit::sim::{bundled_scenario, run_simulation_traced, ConfigError, SimConfig, SimReport};
use threshold_toolkit::{Backend, Ed25519, Group, ParticipantId, PrimeField, SeededRng, Toy};

#[derive(Parser)]
#[command(name = "threshold", version, about = "Threshold key generation, signing and simulation")]
struct Cli {
    /// Group backend (defaults to ed25519, or to the backend recorded in a key directory).
    #[arg(long, global = true)]
    backend: Option<Backend>,
    /// Seed for all randomness.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run distributed key generation and write one share file per node.
    Dkg(DkgArgs),
    /// Sign a message with a coalition of share holders.
    Sign(SignArgs),
    /// Verify a signature against a group key.
    Verify(VerifyArgs),
    /// Time key generation rounds and signing across group sizes.
    Bench(BenchArgs),
    /// Run a simulator scenario.
    Simulate(SimulateArgs),
    /// Deal one AVSS secret and show the commitments and a verified share.
    AvssDemo(AvssArgs),
}

#[derive(Args)]
struct DkgArgs {
    #[arg(long)]
    t: usize,
    #[arg(long)]
    n: usize,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SignArgs {
    /// Directory written by `dkg`.
    #[arg(long)]
    keys: PathBuf,
    /// Comma separated signer ids.
    #[arg(long, value_delimiter = ',')]
    coalition: Vec<u32>,
    #[arg(long)]
    message: String,
    /// Signature file; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Directory written by `dkg`.
    #[arg(long, conflicts_with = "pk")]
    keys: Option<PathBuf>,
    /// Group public key in hex.
    #[arg(long)]
    pk: Option<String>,
    #[arg(long)]
    message: String,
    /// File holding the signature in hex.
    #[arg(long)]
    signature: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 3)]
    t: usize,
    /// Comma separated group sizes.
    #[arg(long, value_delimiter = ',', default_value = "4,8,16,32,64,128,255")]
    n: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    repetitions: usize,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario file, or the name of a bundled scenario.
    #[arg(long)]
    scenario: String,
    /// Report output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Expected trace hash: a report JSON or a file holding the hex digest.
    #[arg(long)]
    replay: Option<PathBuf>,
    /// Write the delivered-event log as JSON lines.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct AvssArgs {
    #[arg(long, default_value_t = 3)]
    t: usize,
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 5)]
    secret: u64,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("protocol abort: {0}")]
    Abort(String),
    #[error("verification failed: {0}")]
    Verify(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Abort(_) => 2,
            CliError::Verify(_) => 3,
            CliError::Config(_) => 4,
        }
    }
}

fn config(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| config(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| config(format!("{}: {e}", path.display())))
}

/// `group.json` in a key directory.
#[derive(Serialize, Deserialize)]
struct GroupFile {
    backend: Backend,
    t: usize,
    n: usize,
    seed: u64,
    group_pk: String,
    /// Joint coefficient commitments, constant term first.
    commitments: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let seed = cli.seed.unwrap_or(0);
    match cli.command {
        Command::Dkg(a) => match cli.backend.unwrap_or(Backend::Ed25519) {
            Backend::Toy => cmd_dkg::<Toy>(&a, seed),
            Backend::Ed25519 => cmd_dkg::<Ed25519>(&a, seed),
        },
        Command::Sign(a) => {
            let group = load_group(&a.keys, cli.backend)?;
            match group.backend {
                Backend::Toy => cmd_sign::<Toy>(&a, &group, seed),
                Backend::Ed25519 => cmd_sign::<Ed25519>(&a, &group, seed),
            }
        }
        Command::Verify(a) => cmd_verify(&a, cli.backend),
        Command::Bench(a) => cmd_bench(&a, cli.backend.unwrap_or(Backend::Ed25519), cli.seed.unwrap_or(1)),
        Command::Simulate(a) => cmd_simulate(&a, cli.backend, cli.seed),
        Command::AvssDemo(a) => match cli.backend.unwrap_or(Backend::Ed25519) {
            Backend::Toy => cmd_avss::<Toy>(&a, seed),
            Backend::Ed25519 => cmd_avss::<Ed25519>(&a, seed),
        },
    }
}

fn cmd_dkg<G: Group>(a: &DkgArgs, seed: u64) -> Result<(), CliError> {
    let crs = default_crs("cli", seed);
    let run = run_dkg::<G>(a.n, a.t, &crs, &SeededRng::from_u64(seed)).map_err(|e| match e.faulty() {
        [] => config(e),
        ids => CliError::Abort(format!("{e}; faulty: {ids:?}")),
    })?;
    fs::create_dir_all(&a.out).map_err(|e| config(format!("{}: {e}", a.out.display())))?;
    let first = &run.keys[0];
    for k in &run.keys {
        let packet = SharePacket::new(k.id, k.sk_share);
        write(&a.out.join(format!("share_{}.hex", k.id)), &format!("{}\n", packet.to_hex()))?;
    }
    let group = GroupFile {
        backend: backend_of::<G>(),
        t: a.t,
        n: a.n,
        seed,
        group_pk: G::to_hex(&first.group_pk),
        commitments: first.group_commitment.entries().iter().map(G::to_hex).collect(),
    };
    write(&a.out.join("group.json"), &serde_json::to_string_pretty(&group).expect("serializable"))?;
    write(&a.out.join("group_pk.hex"), &format!("{}\n", group.group_pk))?;
    let lines: Vec<String> =
        run.transcript.iter().map(|r| serde_json::to_string(r).expect("serializable")).collect();
    write(&a.out.join("transcript.jsonl"), &(lines.join("\n") + "\n"))?;
    let messages: usize = run.transcript.iter().map(|r| r.messages.len()).sum();
    println!("backend:   {}", G::NAME);
    println!("t, n:      {}, {}", a.t, a.n);
    println!("group_pk:  {}", group.group_pk);
    println!("records:   {} transcript records, {} messages", run.transcript.len(), messages);
    println!("wrote:     {}", a.out.display());
    Ok(())
}

fn backend_of<G: Group>() -> Backend {
    G::NAME.parse().expect("backend names parse")
}

fn load_group(dir: &Path, requested: Option<Backend>) -> Result<GroupFile, CliError> {
    let g: GroupFile = serde_json::from_str(&read(&dir.join("group.json"))?).map_err(config)?;
    if let Some(b) = requested {
        if b != g.backend {
            return Err(config(format!("keys were generated with {}, not {b}", g.backend)));
        }
    }
    Ok(g)
}

fn cmd_sign<G: Group>(a: &SignArgs, group: &GroupFile, seed: u64) -> Result<(), CliError> {
    let mut coalition = a.coalition.clone();
    coalition.sort_unstable();
    coalition.dedup();
    if coalition.len() < group.t {
        return Err(config(format!(
            "coalition {:?} has {} signers but this key needs {}",
            coalition,
            coalition.len(),
            group.t
        )));
    }
    let group_pk = G::from_hex(&group.group_pk).ok_or_else(|| config("group.json: bad group_pk"))?;
    let entries = group
        .commitments
        .iter()
        .map(|h| G::from_hex(h).ok_or_else(|| config("group.json: bad commitment")))
        .collect::<Result<Vec<_>, _>>()?;
    let commitment = CommitmentVector::<G>::new(entries);
    let mut signers = BTreeMap::new();
    let mut ids = Vec::new();
    for &raw in &coalition {
        let id = ParticipantId::new(raw)
            .filter(|id| id.get() as usize <= group.n)
            .ok_or_else(|| config(format!("signer {raw} outside 1..={}", group.n)))?;
        let text = read(&a.keys.join(format!("share_{id}.hex")))?;
        let packet = SharePacket::<G::Scalar>::from_hex(text.trim()).map_err(config)?;
        if packet.id != id {
            return Err(config(format!("share_{id}.hex holds the share of {}", packet.id)));
        }
        let key = KeyShare {
            id,
            n: group.n,
            t: group.t,
            sk_share: packet.value,
            pk_share: commitment.evaluate(id),
            group_pk,
            group_commitment: commitment.clone(),
        };
        if G::mul_base(&key.sk_share) != key.pk_share {
            return Err(CliError::Verify(format!("share_{id}.hex does not match the group commitments")));
        }
        signers.insert(id, Signer::new(key));
        ids.push(id);
    }
    let mut rng = SeededRng::from_u64(seed).fork("sign");
    let sig = sign_with_coalition(&mut signers, &ids, a.message.as_bytes(), &mut rng)
        .map_err(|e| CliError::Abort(e.to_string()))?;
    if !verify(&group_pk, a.message.as_bytes(), &sig) {
        return Err(CliError::Verify("aggregated signature rejected".into()));
    }
    match &a.out {
        Some(p) => {
            write(p, &format!("{}\n", sig.to_hex()))?;
            println!("signature written to {}", p.display());
        }
        None => println!("{}", sig.to_hex()),
    }
    Ok(())
}

fn cmd_verify(a: &VerifyArgs, backend: Option<Backend>) -> Result<(), CliError> {
    let (backend, pk) = match (&a.keys, &a.pk) {
        (Some(dir), _) => {
            let g = load_group(dir, backend)?;
            (g.backend, g.group_pk)
        }
        (None, Some(pk)) => (backend.unwrap_or(Backend::Ed25519), pk.clone()),
        (None, None) => return Err(config("need --keys or --pk")),
    };
    let sig = read(&a.signature)?;
    let ok = match backend {
        Backend::Toy => verify_hex::<Toy>(&pk, &a.message, sig.trim())?,
        Backend::Ed25519 => verify_hex::<Ed25519>(&pk, &a.message, sig.trim())?,
    };
    if ok {
        println!("signature valid");
        Ok(())
    } else {
        Err(CliError::Verify("signature rejected".into()))
    }
}

fn verify_hex<G: Group>(pk: &str, message: &str, sig: &str) -> Result<bool, CliError> {
    let pk = G::from_hex(pk.trim()).ok_or_else(|| config("malformed public key"))?;
    match Signature::<G>::from_hex(sig) {
        Ok(s) => Ok(verify(&pk, message.as_bytes(), &s)),
        Err(e) => Err(CliError::Verify(e.to_string())),
    }
}

#[derive(Serialize)]
struct CsvRow {
    t: usize,
    n: usize,
    round1_ms: f64,
    round2_ms: f64,
    sign_ms: f64,
}

fn cmd_bench(a: &BenchArgs, backend: Backend, seed: u64) -> Result<(), CliError> {
    let cfg = BenchConfig { backend, t: a.t, ns: a.n.clone(), repetitions: a.repetitions, seed };
    let rows = run_bench(&cfg).map_err(config)?;
    println!(
        "{:>4} {:>5} {:>12} {:>12} {:>10}  dispersion (r1/r2/sign)  [{backend}, median of {}]",
        "t", "n", "round1_ms", "round2_ms", "sign_ms", a.repetitions
    );
    for r in &rows {
        println!(
            "{:>4} {:>5} {:>12.3} {:>12.3} {:>10.3}  {:.3}/{:.3}/{:.3}",
            r.t, r.n, r.round1_ms, r.round2_ms, r.sign_ms, r.round1_dispersion, r.round2_dispersion, r.sign_dispersion
        );
    }
    if let Some(path) = &a.csv {
        let mut w = csv::Writer::from_path(path).map_err(|e| config(format!("{}: {e}", path.display())))?;
        for r in &rows {
            w.serialize(CsvRow { t: r.t, n: r.n, round1_ms: r.round1_ms, round2_ms: r.round2_ms, sign_ms: r.sign_ms })
                .map_err(config)?;
        }
        w.flush().map_err(config)?;
    }
    Ok(())
}

fn load_scenario(spec: &str) -> Result<SimConfig, CliError> {
    let path = Path::new(spec);
    if path.exists() {
        return SimConfig::from_toml(&read(path)?).map_err(|e| match e {
            ConfigError::Invalid { path: field, reason } => config(format!("{spec}: {field}: {reason}")),
            other => config(format!("{spec}: {other}")),
        });
    }
    bundled_scenario(spec).ok_or_else(|| config(format!("{spec}: no such file or bundled scenario")))
}

fn expected_trace_hash(path: &Path) -> Result<String, CliError> {
    let text = read(path)?;
    if let Ok(report) = serde_json::from_str::<SimReport>(&text) {
        return Ok(report.trace_hash);
    }
    let hex = text.trim();
    if hex.len() == 64 && hex.chars().all(|c| c.is_ascii_hexdigit()) {
        Ok(hex.to_ascii_lowercase())
    } else {
        Err(config(format!("{}: neither a report nor a trace hash", path.display())))
    }
}

fn cmd_simulate(a: &SimulateArgs, backend: Option<Backend>, seed: Option<u64>) -> Result<(), CliError> {
    let mut cfg = load_scenario(&a.scenario)?;
    if let Some(b) = backend {
        cfg.backend = b;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let (report, trace) = run_simulation_traced(&cfg).map_err(config)?;
    let json = report.to_json();
    match &a.out {
        Some(p) => write(p, &(json + "\n"))?,
        None => println!("{json}"),
    }
    if let Some(p) = &a.trace {
        let mut f = fs::File::create(p).map_err(|e| config(format!("{}: {e}", p.display())))?;
        for ev in &trace {
            writeln!(f, "{}", serde_json::to_string(ev).expect("serializable")).map_err(config)?;
        }
    }
    for d in &report.domains {
        eprintln!("domain {:<16} {:?} success={}", d.id, d.protocol, d.success);
    }
    eprintln!("trace hash {}", report.trace_hash);
    if let Some(p) = &a.replay {
        let want = expected_trace_hash(p)?;
        if want != report.trace_hash {
            return Err(CliError::Verify(format!("trace hash {} differs from archived {want}", report.trace_hash)));
        }
        eprintln!("replay matches archived trace");
    }
    if report.success {
        Ok(())
    } else {
        let failed: Vec<_> = report.domains.iter().filter(|d| !d.success).map(|d| d.id.as_str()).collect();
        Err(CliError::Abort(format!("domains without a usable outcome: {}", failed.join(", "))))
    }
}

fn cmd_avss<G: Group>(a: &AvssArgs, seed: u64) -> Result<(), CliError> {
    let secret = G::Scalar::from_u64(a.secret);
    let mut rng = SeededRng::from_u64(seed).fork("avss-demo");
    let (c, deals) = avss_deal::<G, _>(secret, a.t, a.n, &mut rng).map_err(config)?;
    println!("Secret={}", a.secret);
    println!("Commitment matrix ({}x{}):", c.side(), c.side());
    for row in c.entries() {
        let cells: Vec<String> = row.iter().map(G::to_hex).collect();
        println!("  [{}]", cells.join(", "));
    }
    let first = &deals[0];
    let (sigma, sigma_p) = first.share();
    println!("Share of node {}: ({}, {})", first.recipient, sigma.to_hex(), sigma_p.to_hex());
    let ok = avss_verify_share(&c, first.recipient, sigma, sigma_p);
    println!("Verified share: {ok}");
    let shares: Vec<_> = deals.iter().take(a.t).map(|d| (d.recipient, d.share().0)).collect();
    let recovered = avss_recover_secret(&shares, a.t).map_err(config)?;
    println!("Recovered secret from nodes 1..={}: {}", a.t, recovered.to_hex());
    if !ok || recovered != secret {
        return Err(CliError::Verify("dealt share or recovery mismatch".into()));
    }
    Ok(())
}
