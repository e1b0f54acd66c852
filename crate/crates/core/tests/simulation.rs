use threshold_toolkit::dkg::run_dkg;
use threshold_toolkit::sim::gossip::{run_gossip_session, GossipParams};
use threshold_toolkit::sim::{bundled_scenario, run_simulation, SimConfig, SimReport};
use threshold_toolkit::{Ed25519, ParticipantId, SeededRng};

#[test]
fn median_termination_for_sixteen_nodes() {
    let keys = run_dkg::<Ed25519>(16, 4, b"median", &SeededRng::from_u64(16)).unwrap().keys;
    let coalition: Vec<_> = [2, 7, 11, 16].iter().map(|&i| ParticipantId::new(i).unwrap()).collect();
    let mut rounds: Vec<u64> = (0..100)
        .map(|seed| run_gossip_session(&keys, &coalition, b"median", &GossipParams::default(), seed).unwrap().rounds.unwrap())
        .collect();
    rounds.sort_unstable();
    assert!(rounds[50] <= 16, "median {}", rounds[50]);
}

#[test]
fn reports_survive_json() {
    let r = run_simulation(&bundled_scenario("three-domains").unwrap()).unwrap();
    let back: SimReport = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(back, r);
}

#[test]
fn scenario_files_on_disk_match_the_bundled_copies() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios");
    for name in ["three-domains", "corrupt-dealer", "avss-dealer-crash"] {
        let text = std::fs::read_to_string(format!("{dir}/{name}.toml")).unwrap();
        assert_eq!(SimConfig::from_toml(&text).unwrap(), bundled_scenario(name).unwrap());
    }
}

#[test]
fn toy_backend_runs_the_three_domain_layout() {
    let mut cfg = bundled_scenario("three-domains").unwrap();
    cfg.backend = threshold_toolkit::Backend::Toy;
    let r = run_simulation(&cfg).unwrap();
    assert!(r.success);
}
