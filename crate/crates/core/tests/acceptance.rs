//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use ranloop_core::agents::{policy_log_density, policy_log_gradient, ActorCriticParams, CellAction, FEATURE_DIM};
use ranloop_core::control::{Episode, RunRecord};
use ranloop_core::harq::{block_error_rate, harq_transmit, HarqConfig, HarqOutcome};
use ranloop_core::io::{load_scenario, ExportWriter};
use ranloop_core::observer::{jain_index, AnomalyTracker, Window};
use ranloop_core::radio::{
    db_to_linear, rsrp_dbm, rsrq_db, spectral_efficiency, subband_noise_dbm, Cqi,
};
use ranloop_core::rng::RngStream;
use ranloop_core::scheduler::{pf_allocate, PfCandidate};
use ranloop_core::supervisor::{resolve_action, shadow_evaluate, validate_action, SafetyEnvelope};
use ranloop_core::{ActionSet, AgentKind, Scenario, SubbandMask, TwinState};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn scenario(name: &str) -> Scenario {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "scenarios", name].iter().collect();
    load_scenario(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn episode(s: &Scenario, seed: u64) -> Episode {
    Episode::new(s.twin_setup(), s.loop_config(), s.safety, s.objective, seed).expect("episode builds")
}

fn export_bytes(s: &Scenario, seed: u64) -> Vec<u8> {
    let mut ep = episode(s, seed);
    let mut w = ExportWriter::new(Vec::new());
    ep.run_with(|r| w.write_record(r).expect("in-memory write")).expect("episode runs");
    w.into_inner()
}

fn determinism_and_replay() -> Outcome {
    let s = scenario("hex7.toml");
    let dir = tempfile::tempdir().expect("temp dir");
    let path = dir.path().join("hex7.jsonl");
    let started = Instant::now();
    let mut ep = episode(&s, 1);
    let file = std::io::BufWriter::new(std::fs::File::create(&path).expect("export file"));
    let mut w = ExportWriter::new(file);
    ep.run_with(|r| w.write_record(r).expect("export write")).expect("episode runs");
    w.flush().expect("flush");
    let elapsed = started.elapsed();
    let recorded = std::fs::read(&path).expect("read export");
    let replayed = export_bytes(&s, 1);
    let identical = recorded == replayed;
    let fast = elapsed < Duration::from_secs(60);
    outcome(
        identical && fast && !recorded.is_empty(),
        format!(
            "{} cells, {} UEs, {} TTIs; replay {}; run took {:.1?} (limit 60 s)",
            s.cells.len(),
            s.ues.count,
            s.control.total_ttis,
            if identical { "byte-identical" } else { "DIFFERS" },
            elapsed
        ),
    )
}

fn physics_oracles() -> Outcome {
    let rsrp = rsrp_dbm(43.0, 50, 0.0, 128.1, 0.0);
    let rsrq = rsrq_db(-90.0, 600.0 * db_to_linear(-90.0), 50).expect("rsrq");
    let noise = subband_noise_dbm(50.0 / 4.0, 9.0);
    let se = spectral_efficiency(0.0);
    let ok = (rsrp - -112.88).abs() <= 0.005
        && (rsrq - -10.79).abs() <= 0.01
        && (noise - -101.48).abs() <= 0.01
        && (se - 0.75).abs() <= 1e-6;
    outcome(ok, format!("RSRP {rsrp:.3} dBm, RSRQ {rsrq:.3} dB, sub-band noise {noise:.3} dBm, SE(0 dB) {se:.9}"))
}

/// Exhaustive argmax of the summed PF metric over every assignment of
/// sub-bands to candidates (or to nobody). Ties keep the first assignment
/// in enumeration order, which orders candidates by id.
fn exhaustive_pf(cands: &[PfCandidate], n_sb: usize) -> Vec<Option<u32>> {
    let mut sorted: Vec<&PfCandidate> = cands.iter().collect();
    sorted.sort_by_key(|c| c.ue_id);
    let choices = sorted.len() + 1;
    let total = choices.pow(n_sb as u32);
    let mut best: Option<(f64, Vec<Option<u32>>)> = None;
    for code in 0..total {
        let mut c = code;
        let mut value = 0.0;
        let mut alloc = Vec::with_capacity(n_sb);
        let mut feasible = true;
        for sb in 0..n_sb {
            let pick = c % choices;
            c /= choices;
            if pick == 0 {
                if sorted.iter().any(|u| u.metric(sb).is_some()) {
                    // Leaving a schedulable sub-band idle is never optimal.
                    feasible = false;
                    break;
                }
                alloc.push(None);
            } else {
                let u = sorted[pick - 1];
                match u.metric(sb) {
                    Some(m) => value += m,
                    None => {
                        feasible = false;
                        break;
                    }
                }
                alloc.push(Some(u.ue_id));
            }
        }
        if feasible && best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, alloc));
        }
    }
    best.map(|(_, a)| a).unwrap_or_else(|| vec![None; n_sb])
}

fn scheduler_oracle() -> Outcome {
    let mut rng = RngStream::new(31, 7);
    let mut matches = 0;
    for _ in 0..50 {
        let n_ue = 1 + rng.index(4);
        let n_sb = 1 + rng.index(8);
        let cands: Vec<PfCandidate> = (0..n_ue)
            .map(|i| PfCandidate {
                ue_id: (i as u32) * 3 + rng.index(3) as u32,
                avg_throughput_bps: rng.uniform_range(1e3, 5e6),
                subband_rates_bps: (0..n_sb)
                    .map(|_| (rng.uniform() > 0.15).then(|| rng.uniform_range(1e4, 2e7)))
                    .collect(),
            })
            .collect();
        if pf_allocate(&cands, n_sb) == exhaustive_pf(&cands, n_sb) {
            matches += 1;
        }
    }
    outcome(matches == 50, format!("{matches}/50 instances match exhaustive search"))
}

fn harq_statistics() -> Outcome {
    let cfg = HarqConfig::default();
    let cqi = Cqi::new(7).expect("valid cqi");
    let sinr = cqi.threshold_db();
    let trials = 100_000u32;
    let k_max = usize::from(cfg.max_transmissions);
    let mut counts = vec![0u32; k_max + 1];
    let mut rng = RngStream::new(2718, 5);
    for _ in 0..trials {
        match harq_transmit(sinr, cqi, &cfg, &mut rng) {
            HarqOutcome::Ack { transmissions } => counts[usize::from(transmissions) - 1] += 1,
            HarqOutcome::Drop => counts[k_max] += 1,
        }
    }
    let bler: Vec<f64> =
        (0..k_max).map(|j| block_error_rate(sinr + cfg.combining_gain_db * j as f64, cqi)).collect();
    let mut expected = Vec::with_capacity(k_max + 1);
    let mut reach = 1.0;
    for p in &bler {
        expected.push(reach * (1.0 - p));
        reach *= p;
    }
    expected.push(reach);
    let n = f64::from(trials);
    let mut worst: f64 = 0.0;
    let ok = counts.iter().zip(&expected).all(|(&c, &p)| {
        let sigma = (n * p * (1.0 - p)).sqrt();
        let dev = (f64::from(c) - n * p).abs();
        let z = if sigma > 0.0 { dev / sigma } else { dev };
        worst = worst.max(z);
        dev <= 3.0 * sigma.max(1.0 / 3.0)
    });
    outcome(ok, format!("counts {counts:?} over {trials} trials at CQI 7 threshold; worst |z| = {worst:.2}"))
}

fn gradient_check() -> Outcome {
    let mut rng = RngStream::new(99, 3);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let mut p = ActorCriticParams::new(FEATURE_DIM);
        p.theta = (0..FEATURE_DIM).map(|_| rng.uniform_range(-2.0, 2.0)).collect();
        p.sigma = rng.uniform_range(0.3, 2.0);
        let phi: Vec<f64> = (0..FEATURE_DIM).map(|_| rng.uniform_range(-1.0, 2.0)).collect();
        let a = rng.uniform_range(-5.0, 5.0);
        let g = policy_log_gradient(&p, &phi, a).expect("gradient");
        let fd: Vec<f64> = (0..FEATURE_DIM)
            .map(|i| {
                let mut up = p.clone();
                up.theta[i] += h;
                let mut down = p.clone();
                down.theta[i] -= h;
                let f = |q: &ActorCriticParams| policy_log_density(q, &phi, a).expect("density");
                (f(&up) - f(&down)) / (2.0 * h)
            })
            .collect();
        let diff = g.iter().zip(&fd).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let scale = g.iter().map(|x| x * x).sum::<f64>().sqrt().max(fd.iter().map(|x| x * x).sum::<f64>().sqrt());
        worst = worst.max(if scale > 0.0 { diff / scale } else { diff });
    }
    outcome(worst <= 1e-5, format!("worst relative error {worst:.2e} over 100 draws (limit 1e-5)"))
}

fn random_action(rng: &mut RngStream, ids: &[u32]) -> ActionSet {
    let n = rng.index(5);
    let entries = (0..n)
        .map(|_| {
            // Mostly known cells, sometimes unknown or repeated ones.
            let cell_id = if rng.uniform() < 0.9 { ids[rng.index(ids.len())] } else { 100 + rng.index(3) as u32 };
            let mut a = CellAction::new(cell_id);
            if rng.uniform() < 0.7 {
                a.power_delta_db = Some(match rng.index(20) {
                    0 => f64::NAN,
                    1 => f64::INFINITY,
                    _ => rng.uniform_range(-60.0, 60.0),
                });
            }
            if rng.uniform() < 0.4 {
                a.subband_mask = Some(SubbandMask::from_bits(rng.index(256) as u8));
            }
            if rng.uniform() < 0.3 {
                a.sleep = Some(rng.uniform() < 0.6);
            }
            a
        })
        .collect();
    ActionSet { entries }
}

fn safety_fuzz() -> Outcome {
    let s = scenario("interference3.toml");
    let mut twin = TwinState::new(s.twin_setup(), 5).expect("twin");
    let ids: Vec<u32> = twin.cells().iter().map(|c| c.cell_id).collect();
    let mut rng = RngStream::new(4242, 11);
    let mut violations = 0;
    let mut applied = 0;
    let mut tried = 0;
    let mut env = s.safety;
    for i in 0..10_000u32 {
        // Three blocks with a fixed floor of 1, 2 and 3 active cells, each
        // starting from the scenario's initial configuration.
        if i % 3334 == 0 {
            env.min_active_cells = 1 + i / 3334;
            twin = TwinState::new(s.twin_setup(), 5).expect("twin");
        }
        let proposed = random_action(&mut rng, &ids);
        let verdict = validate_action(&env, twin.cells(), &proposed, twin.n_subbands());
        tried += 1;
        let Some(action) = verdict.final_action(&proposed) else { continue };
        let updates = resolve_action(&env, twin.cells(), action);
        if twin.apply_config(&updates).is_err() {
            violations += 1;
            continue;
        }
        applied += 1;
        let active = twin.cells().iter().filter(|c| c.active).count() as u32;
        let powers_ok =
            twin.cells().iter().all(|c| c.tx_power_dbm >= env.power_min_dbm && c.tx_power_dbm <= env.power_max_dbm);
        if !powers_ok || active < env.min_active_cells {
            violations += 1;
        }
    }
    outcome(violations == 0, format!("{tried} action sets, {applied} actuated, {violations} violations"))
}

fn rollback_on_fault() -> Outcome {
    let s = scenario("fault.toml");
    let fault = s.faults.first().expect("fault scenario has a fault").tti;
    let interval = s.control.decision_interval;
    let fault_interval = fault / interval + 1;
    let n = u64::from(s.safety.degradation_windows);
    let mut ep = episode(&s, 1);
    let mut rolled: Option<(RunRecord, bool)> = None;
    while !ep.is_done() {
        let r = ep.step_interval().expect("step");
        if r.rollback.is_some() && r.interval >= fault_interval {
            let cp = ep.supervisor().latest_checkpoint().expect("checkpoint");
            // Serialized floats round-trip exactly, so equal text means
            // equal bits.
            let identical = serde_json::to_string(cp.configs()).ok() == serde_json::to_string(ep.twin().cells()).ok();
            rolled = Some((r, identical));
            break;
        }
    }
    match rolled {
        Some((r, identical)) => {
            let within = r.interval - fault_interval < n + 1;
            outcome(
                within && identical,
                format!(
                    "fault at interval {fault_interval}, rollback at interval {} (limit {}), configs {}",
                    r.interval,
                    fault_interval + n,
                    if identical { "bit-identical to checkpoint" } else { "DIFFER from checkpoint" }
                ),
            )
        }
        None => outcome(false, format!("no rollback after fault at interval {fault_interval}")),
    }
}

fn shadow_isolation() -> Outcome {
    let s = scenario("interference3.toml");
    let mut twin = TwinState::new(s.twin_setup(), 9).expect("twin");
    twin.advance(300);
    let ids: Vec<u32> = twin.cells().iter().map(|c| c.cell_id).collect();
    let env = SafetyEnvelope { shadow_horizon_ttis: 50, ..s.safety };
    let before = twin.digest();
    let mut rng = RngStream::new(77, 13);
    let mut evaluated = 0;
    for _ in 0..1000 {
        let proposed = random_action(&mut rng, &ids);
        let verdict = validate_action(&env, twin.cells(), &proposed, twin.n_subbands());
        let action = verdict.final_action(&proposed).cloned().unwrap_or_else(ActionSet::noop);
        if shadow_evaluate(&twin, &action, &env, &s.objective, Some(0.5)).is_ok() {
            evaluated += 1;
        }
    }
    let same = twin.digest() == before;
    outcome(same && evaluated == 1000, format!("{evaluated} shadow evaluations; live hash {}", if same { "unchanged" } else { "CHANGED" }))
}

fn final_quarter(s: &Scenario, agent: AgentKind, seed: u64) -> f64 {
    let mut s = s.clone();
    s.control.agent = agent;
    let mut ep = episode(&s, seed);
    let mut rewards = Vec::new();
    ep.run_with(|r| rewards.push(r.reward.total)).expect("episode runs");
    let tail = rewards.len().div_ceil(4);
    rewards[rewards.len() - tail..].iter().sum::<f64>() / tail as f64
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn learning_benchmark() -> Outcome {
    let s = scenario("interference3.toml");
    let seeds: Vec<u64> = (1..=5).collect();
    let pairs: Vec<(f64, f64)> = std::thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| {
                let s = &s;
                scope.spawn(move || (final_quarter(s, AgentKind::Static, seed), final_quarter(s, AgentKind::Combined, seed)))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("benchmark thread")).collect()
    });
    let gains: Vec<f64> = pairs.iter().map(|(st, co)| (co - st) / st.abs()).collect();
    let median_gain = median(gains.clone());
    let static_median = median(pairs.iter().map(|p| p.0).collect());
    let combined_median = median(pairs.iter().map(|p| p.1).collect());
    outcome(
        median_gain >= 0.10,
        format!(
            "final-quarter reward median static {static_median:.4}, combined {combined_median:.4}; per-seed gains {}; median gain {:+.1}% (need +10%)",
            gains.iter().map(|g| format!("{:+.0}%", g * 100.0)).collect::<Vec<_>>().join(" "),
            median_gain * 100.0
        ),
    )
}

fn fairness_and_anomaly() -> Outcome {
    let mut rng = RngStream::new(10, 17);
    let mut jain_bad = 0;
    for _ in 0..10_000 {
        let n = 1 + rng.index(64);
        let xs: Vec<f64> = (0..n)
            .map(|_| match rng.index(4) {
                0 => 0.0,
                1 => rng.uniform() * 1e-6,
                _ => rng.uniform_range(0.0, 1e8),
            })
            .collect();
        match jain_index(&xs) {
            Ok(j) => {
                if !(j >= 1.0 / n as f64 - 1e-12 && j <= 1.0 + 1e-12) {
                    jain_bad += 1;
                }
            }
            Err(_) => {
                if xs.iter().any(|&x| x > 0.0) {
                    jain_bad += 1;
                }
            }
        }
    }

    let w = Window { start_tti: 0, end_tti: 1 };
    let mut warmup_flags = 0;
    let mut missed = 0;
    let mut false_flags = 0;
    for trial in 0..200u64 {
        let mut t = AnomalyTracker::new("x");
        let mut noise = RngStream::new(trial, 19);
        let warm = t.warmup as usize;
        // Wild values during warm-up must never flag.
        for i in 0..warm {
            let x = if i % 3 == 0 { 1e6 * noise.uniform() } else { 50.0 + noise.uniform() };
            if t.observe(x, w).flagged {
                warmup_flags += 1;
            }
        }
        for _ in 0..200 {
            let x = 50.0 + (noise.uniform() - 0.5);
            if t.observe(x, w).flagged {
                false_flags += 1;
            }
        }
        let step = t.mean() + 5.0 * t.sigma();
        if !t.observe(step, w).flagged {
            missed += 1;
        }
    }
    let ok = jain_bad == 0 && warmup_flags == 0 && missed == 0;
    outcome(
        ok,
        format!(
            "Jain out of [1/n, 1] in {jain_bad}/10000 inputs; 5σ steps missed {missed}/200; warm-up flags {warmup_flags}; post-warm-up noise flags {false_flags}"
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("determinism and replay", determinism_and_replay),
        ("physics oracles", physics_oracles),
        ("scheduler oracle", scheduler_oracle),
        ("HARQ statistics", harq_statistics),
        ("gradient check", gradient_check),
        ("safety fuzz", safety_fuzz),
        ("rollback", rollback_on_fault),
        ("shadow isolation", shadow_isolation),
        ("learning benchmark", learning_benchmark),
        ("fairness and anomaly properties", fairness_and_anomaly),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "acceptance {:>2} {:<32} {}  {} [{:.1?}]",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            started.elapsed()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
