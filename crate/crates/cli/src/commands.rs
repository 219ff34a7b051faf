use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use ranloop_core::control::{ControlError, Episode, RunRecord};
use ranloop_core::io::{load_checkpoint, load_scenario, round_significant, save_checkpoint, ExportWriter, IoError};
use ranloop_core::{AgentKind, Scenario};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Scenario(IoError),
    #[error(transparent)]
    Io(IoError),
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
    #[error("run failed: {0}")]
    Run(#[from] ControlError),
    #[error("replay mismatch: {0}")]
    Mismatch(String),
    #[error("{0}")]
    Usage(String),
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        if e.is_io() {
            CliError::Io(e)
        } else {
            CliError::Scenario(e)
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Scenario(_) | CliError::Run(_) | CliError::Usage(_) => 1,
            CliError::Mismatch(_) => 2,
            CliError::Io(_) | CliError::File { .. } => 3,
        }
    }
}

fn file_error(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::File { path: path.display().to_string(), source }
}

pub struct EpisodeSpec {
    pub scenario: PathBuf,
    pub seed: u64,
    pub agent: Option<AgentKind>,
    pub ttis: Option<u64>,
}

fn load(spec: &EpisodeSpec) -> Result<Scenario, CliError> {
    let mut scenario = load_scenario(&spec.scenario)?;
    if let Some(agent) = spec.agent {
        scenario.control.agent = agent;
    }
    if let Some(ttis) = spec.ttis {
        scenario.control.total_ttis = ttis;
    }
    scenario.validate()?;
    Ok(scenario)
}

fn new_episode(scenario: &Scenario, seed: u64) -> Result<Episode, CliError> {
    Ok(Episode::new(scenario.twin_setup(), scenario.loop_config(), scenario.safety, scenario.objective, seed)?)
}

/// Runs `episode` to completion, streaming records into `out`. With a
/// checkpoint path the episode state is saved whenever the supervisor takes
/// a checkpoint and once more at the end.
fn drive<W: Write>(
    episode: &mut Episode,
    mut writer: ExportWriter<W>,
    label: &Path,
    checkpoint: Option<&Path>,
) -> Result<(W, Vec<f64>), CliError> {
    let mut rewards = Vec::new();
    while !episode.is_done() {
        let record: RunRecord = episode.step_interval()?;
        rewards.push(record.reward.total);
        writer.write_record(&record).map_err(file_error(label))?;
        if let (Some(path), Some(_)) = (checkpoint, record.checkpoint_id) {
            writer.flush().map_err(file_error(label))?;
            save_checkpoint(episode, path)?;
        }
    }
    writer.flush().map_err(file_error(label))?;
    if let Some(path) = checkpoint {
        save_checkpoint(episode, path)?;
    }
    Ok((writer.into_inner(), rewards))
}

fn drive_to_file(episode: &mut Episode, path: &Path, append: bool, checkpoint: Option<&Path>) -> Result<Vec<f64>, CliError> {
    let file = OpenOptions::new()
        .write(true)
        .create(true)
        .append(append)
        .truncate(!append)
        .open(path)
        .map_err(file_error(path))?;
    let (_, rewards) = drive(episode, ExportWriter::new(BufWriter::new(file)), path, checkpoint)?;
    Ok(rewards)
}

/// Runs an episode. When resuming, records are appended to `export` so an
/// interrupted run and its continuation form one export.
pub fn run(spec: &EpisodeSpec, export: &Path, checkpoint: Option<&Path>, resume: Option<&Path>) -> Result<(), CliError> {
    let scenario = load(spec)?;
    let mut episode = match resume {
        Some(path) => {
            let mut episode: Episode = load_checkpoint(path)?;
            if let Some(ttis) = spec.ttis {
                episode.set_total_ttis(ttis)?;
            }
            log::info!("resuming at tti {} from {}", episode.twin().tti(), path.display());
            episode
        }
        None => new_episode(&scenario, spec.seed)?,
    };
    let started = std::time::Instant::now();
    let rewards = drive_to_file(&mut episode, export, resume.is_some(), checkpoint)?;
    log::info!("{} intervals in {:.2?}", rewards.len(), started.elapsed());
    Ok(())
}

pub fn validate(path: &Path) -> Result<(), CliError> {
    let scenario = load_scenario(path)?;
    println!("{}: ok ({} cells, {} UEs, {} TTIs)", scenario.name, scenario.cells.len(), scenario.ues.count, scenario.control.total_ttis);
    Ok(())
}

pub fn replay(spec: &EpisodeSpec, export: &Path) -> Result<(), CliError> {
    let scenario = load(spec)?;
    let recorded = std::fs::read(export).map_err(file_error(export))?;
    let mut episode = new_episode(&scenario, spec.seed)?;
    let (fresh, _) = drive(&mut episode, ExportWriter::new(Vec::new()), Path::new("<memory>"), None)?;
    if fresh == recorded {
        println!("replay identical ({} bytes)", fresh.len());
        return Ok(());
    }
    let mut a = recorded.split(|&b| b == b'\n');
    let mut b = fresh.split(|&b| b == b'\n');
    let mut line = 1usize;
    loop {
        match (a.next(), b.next()) {
            (Some(x), Some(y)) if x == y => line += 1,
            (None, None) => break,
            _ => break,
        }
    }
    Err(CliError::Mismatch(format!("first divergence at line {line} of {}", export.display())))
}

pub struct SweepPlan {
    pub scenario: PathBuf,
    pub seeds: u64,
    pub workers: usize,
    pub out: PathBuf,
    pub agents: Vec<AgentKind>,
    pub seed_base: u64,
    pub ttis: Option<u64>,
}

#[derive(Serialize)]
struct AgentSummary {
    seeds: Vec<u64>,
    final_quarter_reward: Vec<f64>,
    mean: f64,
    median: f64,
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

pub fn sweep(plan: &SweepPlan) -> Result<(), CliError> {
    if plan.seeds == 0 || plan.workers == 0 {
        return Err(CliError::Usage("--seeds and --workers must be at least 1".into()));
    }
    let mut scenario = load_scenario(&plan.scenario)?;
    if let Some(ttis) = plan.ttis {
        scenario.control.total_ttis = ttis;
        scenario.validate()?;
    }
    let mut agents = plan.agents.clone();
    if agents.is_empty() {
        agents.push(AgentKind::Static);
        if scenario.control.agent != AgentKind::Static {
            agents.push(scenario.control.agent);
        }
    }
    std::fs::create_dir_all(&plan.out).map_err(file_error(&plan.out))?;
    let jobs: Vec<(AgentKind, u64)> =
        agents.iter().flat_map(|&a| (0..plan.seeds).map(move |k| (a, plan.seed_base + k))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.workers)
        .build()
        .map_err(|e| CliError::Usage(format!("worker pool: {e}")))?;
    let results: Vec<Result<(AgentKind, u64, f64), CliError>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(agent, seed)| {
                let mut s = scenario.clone();
                s.control.agent = agent;
                let mut episode = new_episode(&s, seed)?;
                let path = plan.out.join(format!("{agent}-seed{seed}.jsonl"));
                let rewards = drive_to_file(&mut episode, &path, false, None)?;
                let tail = rewards.len().div_ceil(4);
                let fq = rewards[rewards.len() - tail..].iter().sum::<f64>() / tail.max(1) as f64;
                log::info!("{agent} seed {seed}: final-quarter reward {fq:.4}");
                Ok((agent, seed, fq))
            })
            .collect()
    });
    let mut summary: BTreeMap<String, AgentSummary> = BTreeMap::new();
    for r in results {
        let (agent, seed, fq) = r?;
        let e = summary.entry(agent.to_string()).or_insert_with(|| AgentSummary {
            seeds: Vec::new(),
            final_quarter_reward: Vec::new(),
            mean: 0.0,
            median: 0.0,
        });
        e.seeds.push(seed);
        e.final_quarter_reward.push(round_significant(fq));
    }
    for s in summary.values_mut() {
        s.mean = round_significant(s.final_quarter_reward.iter().sum::<f64>() / s.final_quarter_reward.len() as f64);
        s.median = round_significant(median(&s.final_quarter_reward));
    }
    let path = plan.out.join("summary.json");
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    std::fs::write(&path, text + "\n").map_err(file_error(&path))?;
    for (agent, s) in &summary {
        println!("{agent}: mean {:.4} median {:.4} over {} seeds", s.mean, s.median, s.seeds.len());
    }
    Ok(())
}
