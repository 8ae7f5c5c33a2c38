use hm_core::agents::{AgentKind, AgentSpec};
use hm_core::error::HmError;
use hm_core::game::EpisodeConfig;
use hm_core::harness::{episode_path, load_results, run_suite, BackendConfig, RunConfig, Seeds, SummaryTable};
use hm_core::reasoner::RemoteConfig;
use hm_core::substrate::SubstrateId;
use std::path::Path;

fn small(dir: &Path) -> RunConfig {
    let sub = SubstrateId::RwsRepeated;
    let mut c = RunConfig::new(sub, vec![6, 7], AgentSpec::new(AgentKind::HypotheticalMinds, sub), dir);
    c.seeds = Seeds::Count(2);
    c.max_steps = 200;
    c.workers = 2;
    c
}

#[test]
fn resume_skips_completed_episodes() {
    let dir = tempfile::tempdir().unwrap();
    let config = small(dir.path());
    let first = run_suite(&config).unwrap();
    assert_eq!(first.executed, 4);
    assert_eq!(first.results.len(), 4);
    assert!(first.results.iter().all(|r| r.failure.is_none()));

    let again = run_suite(&config).unwrap();
    assert_eq!(again.executed, 0);
    assert_eq!(again.table, first.table);

    let ep = EpisodeConfig { max_steps: 200, ..EpisodeConfig::new(SubstrateId::RwsRepeated, 7, 1) };
    let path = episode_path(dir.path(), &ep);
    let before = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    let partial = run_suite(&config).unwrap();
    assert_eq!(partial.executed, 1);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), before);

    // a truncated file is not a completed episode
    std::fs::write(&path, before.lines().next().unwrap()).unwrap();
    assert_eq!(run_suite(&config).unwrap().executed, 1);

    let summary: SummaryTable = serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary, first.table);
    assert_eq!(load_results(dir.path()).unwrap().len(), 4);
}

#[test]
fn longer_runs_are_not_mistaken_for_shorter_ones() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small(dir.path());
    config.scenarios = vec![6];
    config.seeds = Seeds::List(vec![3]);
    assert_eq!(run_suite(&config).unwrap().executed, 1);
    config.max_steps = 250;
    assert_eq!(run_suite(&config).unwrap().executed, 1);
}

#[test]
fn summary_rows_per_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_suite(&small(dir.path())).unwrap();
    let rows = &out.table.rows;
    assert_eq!(rows.iter().map(|r| r.scenario).collect::<Vec<_>>(), vec![6, 7]);
    for r in rows {
        assert_eq!((r.episodes, r.failed), (2, 0));
        assert_eq!(r.agent, "hypothetical_minds/modular");
    }
    assert!(out.table.to_string().contains("hypothetical_minds/modular"));
}

#[test]
fn replay_without_cassettes_marks_episodes_failed() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small(dir.path());
    config.backend = BackendConfig::Replay;
    let out = run_suite(&config).unwrap();
    assert_eq!(out.executed, 4);
    assert!(out.results.iter().all(|r| r.failure.as_deref().is_some_and(|f| f.contains("cassette"))));
    assert!(out.table.rows.iter().all(|r| r.failed == 2 && r.episodes == 0));
    // failed episodes are retried on the next run
    assert_eq!(run_suite(&config).unwrap().executed, 4);
}

#[test]
fn missing_credential_stops_the_suite_before_any_episode() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small(dir.path());
    config.backend = BackendConfig::Remote(RemoteConfig { api_key_env: "HM_TEST_UNSET_CREDENTIAL".into(), ..RemoteConfig::default() });
    let err = run_suite(&config).err().expect("must fail");
    assert!(err.to_string().contains("HM_TEST_UNSET_CREDENTIAL"), "{err}");
    assert!(load_results(dir.path()).unwrap().is_empty());
}

#[test]
fn unreachable_remote_fails_episodes_without_leaking_the_credential() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small(dir.path());
    config.scenarios = vec![6];
    config.seeds = Seeds::Count(1);
    std::env::set_var("HM_TEST_LOCAL_CREDENTIAL", "secret-value-123");
    config.backend = BackendConfig::Remote(RemoteConfig {
        endpoint: "http://127.0.0.1:9/v1/chat/completions".into(),
        api_key_env: "HM_TEST_LOCAL_CREDENTIAL".into(),
        max_retries: 1,
        initial_backoff_ms: 1,
        max_backoff_ms: 1,
        timeout_secs: 2,
        ..RemoteConfig::default()
    });
    let out = run_suite(&config).unwrap();
    assert!(out.results[0].failure.is_some());
    for entry in std::fs::read_dir(dir.path()).unwrap() {
        let text = std::fs::read_to_string(entry.unwrap().path()).unwrap();
        assert!(!text.contains("secret-value-123"));
    }
}

#[test]
fn unknown_scenario_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small(dir.path());
    config.scenarios = vec![6, 42];
    assert!(matches!(run_suite(&config), Err(HmError::UnknownScenario { id: 42, .. })));
}
