use super::*;
use crate::twin::{Bounds, CellConfig, FaultEvent, FaultField, Point, SubbandMask, UeSpec};

fn cell_at(id: u32, x: f64, y: f64) -> CellConfig {
    CellConfig {
        cell_id: id,
        position: Point::new(x, y),
        tx_power_dbm: 43.0,
        antenna_gain_dbi: 0.0,
        n_prb: 50,
        subband_mask: SubbandMask::full(4),
        active: true,
        idle_power_w: 100.0,
        per_prb_tx_power_w: 2.0,
    }
}

fn ue_at(x: f64, y: f64, load: f64) -> UeSpec {
    UeSpec { position: Some(Point::new(x, y)), mean_offered_load_bps: load, noise_figure_db: 9.0 }
}

fn three_cell_setup() -> TwinSetup {
    let bounds = Bounds { min: Point::new(0.0, 0.0), max: Point::new(1000.0, 1000.0) };
    let cells = vec![cell_at(1, 350.0, 500.0), cell_at(2, 500.0, 500.0), cell_at(3, 650.0, 500.0)];
    let ues = (0..9).map(|i| ue_at(300.0 + 50.0 * f64::from(i), 450.0 + 10.0 * f64::from(i), 3e6)).collect();
    TwinSetup::new(bounds, cells, ues)
}

fn run(agent: AgentKind, ttis: u64, seed: u64) -> (Vec<RunRecord>, Episode) {
    let config = LoopConfig::new(ttis, agent);
    run_episode(three_cell_setup(), config, SafetyEnvelope::default(), ObjectiveWeights::default(), seed).unwrap()
}

#[test]
fn static_agent_never_changes_configs() {
    let (records, episode) = run(AgentKind::Static, 4000, 3);
    assert_eq!(records.len(), 20);
    assert!(records.iter().all(|r| r.verdict == Verdict::Approved && !r.applied && r.shadow.is_none()));
    assert_eq!(episode.twin().cells(), three_cell_setup().cells.as_slice());
}

#[test]
fn records_are_ordered_and_consistent() {
    let (records, _) = run(AgentKind::Combined, 6000, 4);
    assert_eq!(records.len(), 30);
    for (i, r) in records.iter().enumerate() {
        assert_eq!(r.interval, i as u64 + 1);
        assert_eq!(r.tti, (i as u64 + 1) * 200);
        assert_eq!(r.report.window.end_tti, r.tti);
        assert_eq!(r.reward, compute_reward(&r.report, &ObjectiveWeights::default()));
        if r.applied {
            assert!(!r.verdict.is_rejected());
            assert!(r.shadow.as_ref().unwrap().passed());
        }
    }
}

#[test]
fn configs_change_only_through_applied_actions() {
    let config = LoopConfig::new(6000, AgentKind::Random);
    let mut ep =
        Episode::new(three_cell_setup(), config, SafetyEnvelope::default(), ObjectiveWeights::default(), 8).unwrap();
    while !ep.is_done() {
        let before = ep.twin().cells().to_vec();
        let r = ep.step_interval().unwrap();
        if !r.applied && r.rollback.is_none() {
            assert_eq!(ep.twin().cells(), &before[..]);
        }
    }
}

#[test]
fn same_inputs_same_records() {
    let a = serde_json::to_string(&run(AgentKind::Combined, 4000, 11).0).unwrap();
    let b = serde_json::to_string(&run(AgentKind::Combined, 4000, 11).0).unwrap();
    let c = serde_json::to_string(&run(AgentKind::Combined, 4000, 12).0).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn serialized_episode_resumes_identically() {
    let config = LoopConfig::new(4000, AgentKind::Combined);
    let mut ep =
        Episode::new(three_cell_setup(), config, SafetyEnvelope::default(), ObjectiveWeights::default(), 6).unwrap();
    for _ in 0..7 {
        ep.step_interval().unwrap();
    }
    let mut resumed: Episode = serde_json::from_str(&serde_json::to_string(&ep).unwrap()).unwrap();
    for _ in 0..5 {
        assert_eq!(ep.step_interval().unwrap(), resumed.step_interval().unwrap());
    }
}

#[test]
fn partial_last_interval_is_recorded() {
    let (records, episode) = run(AgentKind::Static, 1100, 1);
    assert_eq!(records.len(), 6);
    assert_eq!(records.last().unwrap().report.window.len(), 100);
    assert_eq!(episode.twin().tti(), 1100);
}

#[test]
fn invalid_loop_config_is_rejected() {
    let mut config = LoopConfig::new(100, AgentKind::Static);
    config.decision_interval = 200;
    let err = Episode::new(three_cell_setup(), config, SafetyEnvelope::default(), ObjectiveWeights::default(), 1);
    assert!(matches!(err, Err(ControlError::InvalidConfig(_))));
}

#[test]
fn power_fault_triggers_rollback_to_checkpoint() {
    let bounds = Bounds { min: Point::new(0.0, 0.0), max: Point::new(2000.0, 2000.0) };
    let cells = vec![cell_at(1, 1000.0, 1000.0)];
    let ues = (0..6).map(|i| {
        let a = f64::from(i) * std::f64::consts::PI / 3.0;
        ue_at(1000.0 + 900.0 * a.cos(), 1000.0 + 900.0 * a.sin(), 1.2e6)
    });
    let mut setup = TwinSetup::new(bounds, cells, ues.collect());
    setup.shadowing_sigma_db = 0.0;
    setup.faults.push(FaultEvent { tti: 4000, cell_id: 1, field: FaultField::TxPower, value: 40.0 });
    let weights = ObjectiveWeights { w_fair: 0.0, w_energy: 0.0, ..ObjectiveWeights::default() };
    let config = LoopConfig::new(8000, AgentKind::Static);
    let (records, episode) = run_episode(setup, config, SafetyEnvelope::default(), weights, 7).unwrap();
    let first = records.iter().find(|r| r.rollback.is_some()).expect("rollback");
    assert!(first.interval > 20 && first.interval <= 26, "rollback at {}", first.interval);
    assert_eq!(episode.twin().cell(1).unwrap().tx_power_dbm.to_bits(), 43.0f64.to_bits());
}
