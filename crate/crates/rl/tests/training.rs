use synergy_env::{ThrowEnv, ThrowResiduals, THROW_ACTION_DIM, THROW_OBS_DIM};
use synergy_rl::{train, Agent, CurvePoint, DdpgAgent, DdpgConfig, RlError, SacAgent, SacConfig, TrainConfig};
use synergy_world::WorldConfig;

fn env() -> ThrowEnv {
    ThrowEnv::new(WorldConfig::default(), ThrowResiduals::default()).unwrap()
}

fn small() -> SacConfig {
    SacConfig {
        hidden_sizes: vec![32, 32],
        ..SacConfig::default()
    }
}

fn cfg(total_steps: u64, warmup_steps: u64) -> TrainConfig {
    TrainConfig {
        total_steps,
        warmup_steps,
        batch_size: 32,
        eval_interval: 100,
        eval_episodes: 5,
        ..TrainConfig::default()
    }
}

#[test]
fn warmup_performs_no_updates() {
    let mut agent = SacAgent::new(THROW_OBS_DIM, THROW_ACTION_DIM, small(), 0).unwrap();
    let before = agent.actor().params().to_vec();
    let report = train(&mut env(), &mut agent, &cfg(300, 300), 4, &mut |_| {}).unwrap();
    assert_eq!(report.updates, 0);
    assert_eq!(agent.update_count(), 0);
    assert_eq!(agent.actor().params(), before.as_slice());
    assert_eq!(report.env_steps, 300);
    assert_eq!(report.episodes, 300);
    assert!(report.curve.iter().all(|p| p.critic_loss.is_none()));
}

#[test]
fn one_update_per_step_after_warmup() {
    let mut agent = DdpgAgent::new(
        THROW_OBS_DIM,
        THROW_ACTION_DIM,
        DdpgConfig {
            hidden_sizes: vec![32, 32],
            ..DdpgConfig::default()
        },
        0,
    )
    .unwrap();
    let mut seen = Vec::new();
    let report = train(&mut env(), &mut agent, &cfg(250, 100), 1, &mut |p| seen.push(p.env_step)).unwrap();
    assert_eq!(report.updates, 150);
    assert_eq!(seen, vec![100, 200, 250]);
    assert_eq!(report.curve.len(), 3);
    assert!(report.curve[0].critic_loss.is_none());
    assert!(report.curve[1].critic_loss.is_some());
}

fn curve_text(seed: u64) -> String {
    let mut agent = SacAgent::new(THROW_OBS_DIM, THROW_ACTION_DIM, small(), seed).unwrap();
    let report = train(&mut env(), &mut agent, &cfg(300, 100), seed, &mut |_| {}).unwrap();
    report
        .curve
        .iter()
        .map(|p: &CurvePoint| serde_json::to_string(p).unwrap())
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn same_seed_gives_identical_curve() {
    let a = curve_text(5);
    assert_eq!(a, curve_text(5));
    assert_ne!(a, curve_text(6));
}

#[test]
fn mismatched_agent_is_rejected() {
    let mut agent = SacAgent::new(THROW_OBS_DIM + 1, THROW_ACTION_DIM, small(), 0).unwrap();
    let err = train(&mut env(), &mut agent, &cfg(10, 5), 0, &mut |_| {}).unwrap_err();
    assert!(matches!(err, RlError::Dimension { .. }));
}
