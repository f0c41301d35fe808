//! Episode and suite runners.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use rand::RngExt;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::planners::{AgentKind, AgentPolicy};
use crate::rng::{derive_seed, seeded};
use crate::sim::trace::{FinalObject, Trace, TraceEnd, TraceHeader, TraceStep, TRACE_FORMAT};
use crate::sim::World;
use crate::suite::Suite;
use crate::world::{ObjectKind, Scene, TaskSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Terminal {
    Budget,
    Complete,
}

impl Terminal {
    pub fn name(self) -> &'static str {
        match self {
            Terminal::Budget => "budget",
            Terminal::Complete => "complete",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub task_id: String,
    pub house_id: String,
    pub agent: String,
    pub seed: u64,
    pub transported: u32,
    pub required: u32,
    pub transport_rate: f64,
    pub steps: u32,
    pub terminal: Terminal,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_file: Option<String>,
}

/// Runs one episode to budget exhaustion or completion.
///
/// `scene` must be populated. An agent action the world rejects (unknown
/// object id, non-finite rotation target) is reported as a contract error.
pub fn run_episode(
    scene: Scene,
    task: &TaskSpec,
    task_id: &str,
    agent: &mut dyn AgentPolicy,
    cfg: &Config,
    seed: u64,
    record: bool,
) -> Result<(EpisodeResult, Option<Trace>)> {
    let house_id = scene.id.clone();
    let mut world = World::new(scene, task.clone(), cfg, seed)?;
    let perception = agent.perception();
    let mut obs = world.observe_with(perception);
    agent.reset(task, cfg, seed, &obs);
    let start = world.agent().clone();
    let mut steps = Vec::new();
    while !world.is_done() {
        let action = agent.act(&obs);
        let status = world.step(action).map_err(|e| Error::Contract {
            agent: agent.name().to_string(),
            message: format!("{} rejected: {e}", action.name()),
        })?;
        if record {
            let a = world.agent();
            steps.push(TraceStep {
                step: steps.len(),
                action,
                status,
                pose: a.pose,
                heading: a.heading,
                steps_charged: a.steps_charged,
                transported: world.transported(),
                waypoints: world.last_waypoints().to_vec(),
            });
        }
        obs = world.observe_with(perception);
    }
    let required = world.target_total() as u32;
    let transported = world.transported();
    let terminal = if world.is_complete() {
        Terminal::Complete
    } else {
        Terminal::Budget
    };
    let result = EpisodeResult {
        task_id: task_id.to_string(),
        house_id: house_id.clone(),
        agent: agent.name().to_string(),
        seed,
        transported,
        required,
        transport_rate: if required == 0 { 0.0 } else { transported as f64 / required as f64 },
        steps: world.steps_charged(),
        terminal,
        trace_file: None,
    };
    let trace = record.then(|| {
        let delivered = world.transported_ids();
        Trace {
            header: TraceHeader {
                format: TRACE_FORMAT.into(),
                scene_id: house_id,
                task_id: task_id.to_string(),
                agent: agent.name().to_string(),
                seed,
                budget: task.budget,
                required,
                start: start.pose,
                start_heading: start.heading,
            },
            steps,
            end: Some(TraceEnd {
                transported,
                steps_charged: world.steps_charged(),
                terminal: terminal.name().into(),
                targets: world
                    .scene()
                    .objects
                    .iter()
                    .filter(|o| o.kind == ObjectKind::Target)
                    .map(|o| FinalObject {
                        id: o.id,
                        pose: o.pose,
                        transported: delivered.contains(&o.id),
                    })
                    .collect(),
            }),
        }
    });
    Ok((result, trace))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub seed: u64,
    pub parallelism: usize,
    /// Replaces every task's budget when set.
    pub budget: Option<u32>,
    /// Directory for trace files; no traces are written when unset.
    pub trace_dir: Option<PathBuf>,
    pub config: Config,
    /// Run only the first `limit` tasks.
    pub limit: Option<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            seed: 0,
            parallelism: 1,
            budget: None,
            trace_dir: None,
            config: Config::default(),
            limit: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HouseSummary {
    pub house_id: String,
    pub tasks: usize,
    pub mean_transport_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeError {
    pub task_id: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub agent: String,
    pub seed: u64,
    pub episodes: Vec<EpisodeResult>,
    pub houses: Vec<HouseSummary>,
    pub mean_transport_rate: f64,
    /// 95% percentile bootstrap interval of the overall mean.
    pub ci95: [f64; 2],
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<EpisodeError>,
}

const BOOTSTRAP_RESAMPLES: usize = 2000;

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Percentile bootstrap of the mean.
pub fn bootstrap_ci(xs: &[f64], seed: u64, resamples: usize) -> [f64; 2] {
    if xs.is_empty() {
        return [0.0, 0.0];
    }
    let mut rng = seeded(seed);
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| {
            let s: f64 = (0..xs.len()).map(|_| xs[rng.random_range(0..xs.len())]).sum();
            s / xs.len() as f64
        })
        .collect();
    means.sort_by(f64::total_cmp);
    let at = |q: f64| means[((q * (resamples - 1) as f64).round() as usize).min(resamples - 1)];
    [at(0.025), at(0.975)]
}

impl SuiteReport {
    pub fn from_results(agent: &str, seed: u64, episodes: Vec<EpisodeResult>, errors: Vec<EpisodeError>) -> Self {
        let mut houses: Vec<HouseSummary> = Vec::new();
        for e in &episodes {
            if houses.last().is_none_or(|h| h.house_id != e.house_id) {
                houses.push(HouseSummary {
                    house_id: e.house_id.clone(),
                    tasks: 0,
                    mean_transport_rate: 0.0,
                });
            }
        }
        houses.sort_by(|a, b| a.house_id.cmp(&b.house_id));
        houses.dedup_by(|a, b| a.house_id == b.house_id);
        for h in &mut houses {
            let rates: Vec<f64> = episodes
                .iter()
                .filter(|e| e.house_id == h.house_id)
                .map(|e| e.transport_rate)
                .collect();
            h.tasks = rates.len();
            h.mean_transport_rate = mean(&rates);
        }
        let rates: Vec<f64> = episodes.iter().map(|e| e.transport_rate).collect();
        SuiteReport {
            agent: agent.to_string(),
            seed,
            mean_transport_rate: mean(&rates),
            ci95: bootstrap_ci(&rates, derive_seed(seed, "bootstrap"), BOOTSTRAP_RESAMPLES),
            houses,
            episodes,
            errors,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<18} {:<10} {:>11} {:>6} {:>8}\n",
            "task", "house", "transported", "rate", "steps"
        );
        for e in &self.episodes {
            out.push_str(&format!(
                "{:<18} {:<10} {:>7}/{:<3} {:>6.3} {:>8}\n",
                e.task_id, e.house_id, e.transported, e.required, e.transport_rate, e.steps
            ));
        }
        out.push('\n');
        for h in &self.houses {
            out.push_str(&format!(
                "house {:<10} tasks {:>4}  mean {:.3}\n",
                h.house_id, h.tasks, h.mean_transport_rate
            ));
        }
        out.push_str(&format!(
            "overall ({}) mean {:.3}  95% CI [{:.3}, {:.3}]  episodes {}\n",
            self.agent,
            self.mean_transport_rate,
            self.ci95[0],
            self.ci95[1],
            self.episodes.len()
        ));
        for e in &self.errors {
            out.push_str(&format!("error {}: {}\n", e.task_id, e.message));
        }
        out
    }

    /// Per-house mean transport rate as CSV.
    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("house_id,tasks,mean_transport_rate\n");
        for h in &self.houses {
            out.push_str(&format!("{},{},{:.6}\n", h.house_id, h.tasks, h.mean_transport_rate));
        }
        out
    }
}

pub fn trace_file_name(task_id: &str, agent: &str) -> String {
    format!("{task_id}.{agent}.tctrace")
}

type Outcome = Result<(EpisodeResult, Option<Trace>)>;

/// Runs `agent` on every task of `suite` over a pool of worker threads.
/// Results are independent of `parallelism`.
pub fn run_suite(suite: &Suite, agent: AgentKind, opts: &RunOptions) -> Result<SuiteReport> {
    opts.config.validate()?;
    let n = opts.limit.unwrap_or(suite.tasks.len()).min(suite.tasks.len());
    let workers = opts.parallelism.clamp(1, n.max(1));
    let record = opts.trace_dir.is_some();
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<(usize, Outcome)>();
    let mut outcomes: Vec<Option<Outcome>> = (0..n).map(|_| None).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let next = &next;
            scope.spawn(move || {
                let mut policy = agent.build();
                loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= n {
                        break;
                    }
                    let record_ = &suite.tasks[i];
                    let outcome = suite.scene_for(record_).and_then(|scene| {
                        let mut spec = record_.spec.clone();
                        if let Some(b) = opts.budget {
                            spec.budget = b;
                        }
                        let seed = derive_seed(opts.seed, &record_.task_id);
                        run_episode(scene, &spec, &record_.task_id, policy.as_mut(), &opts.config, seed, record)
                    });
                    if tx.send((i, outcome)).is_err() {
                        break;
                    }
                }
            });
        }
        drop(tx);
        for (i, outcome) in rx {
            outcomes[i] = Some(outcome);
        }
    });
    let mut episodes = Vec::with_capacity(n);
    let mut errors = Vec::new();
    for (i, outcome) in outcomes.into_iter().enumerate() {
        let task_id = &suite.tasks[i].task_id;
        match outcome.expect("every task produces an outcome") {
            Ok((mut result, trace)) => {
                if let (Some(dir), Some(trace)) = (&opts.trace_dir, trace) {
                    let name = trace_file_name(task_id, agent.name());
                    write_trace(dir, &name, &trace)?;
                    result.trace_file = Some(name);
                }
                episodes.push(result);
            }
            Err(e) => errors.push(EpisodeError {
                task_id: task_id.clone(),
                message: e.to_string(),
            }),
        }
    }
    Ok(SuiteReport::from_results(agent.name(), opts.seed, episodes, errors))
}

fn write_trace(dir: &Path, name: &str, trace: &Trace) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    trace.write(&dir.join(name))
}
