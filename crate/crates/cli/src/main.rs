//! `transport`: generate task suites, benchmark agents, validate suites and
//! render episode traces.
//!
//! Configuration precedence, lowest first: built-in defaults, the TOML file
//! given by `--config`, `--set key=value` overrides, then dedicated flags
//! such as `run --budget`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use transport_core::harness::{run_suite, RunOptions};
use transport_core::planners::AgentKind;
use transport_core::render::{render_trajectory, RenderStyle};
use transport_core::scene_io::read_scene;
use transport_core::sim::trace::Trace;
use transport_core::suite::{Split, Suite, SuiteParams};
use transport_core::Config;

#[derive(Debug, Parser)]
#[command(name = "transport", version, about = "Household object-transport benchmark")]
struct Cli {
    /// Master seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// TOML file with simulation and planner hyperparameters.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Override one config key, e.g. `--set p_drop=0.0`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Structured,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate houses and tasks into a suite directory.
    Gen {
        #[arg(long)]
        houses: Option<usize>,
        #[arg(long)]
        tasks_per_house: Option<usize>,
        #[arg(long, default_value = "test")]
        split: Split,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an agent over every task of a suite.
    Run {
        #[arg(long)]
        suite: PathBuf,
        #[arg(long)]
        agent: AgentKind,
        #[arg(long, default_value_t = 1)]
        parallelism: usize,
        /// Directory to write one trace per episode.
        #[arg(long, value_name = "DIR")]
        traces: Option<PathBuf>,
        /// Interaction budget for every task.
        #[arg(long)]
        budget: Option<u32>,
        /// Only run the first N tasks.
        #[arg(long)]
        limit: Option<usize>,
        /// Write per-house means as CSV.
        #[arg(long, value_name = "FILE")]
        histogram: Option<PathBuf>,
    },
    /// Render traces over a scene as a PPM image.
    Replay {
        /// A house scene file, or a suite directory to show the task's objects.
        #[arg(long)]
        scene: PathBuf,
        #[arg(long = "trace", required = true)]
        traces: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Pixels per grid cell.
        #[arg(long, default_value_t = 8)]
        scale: usize,
    },
    /// Check a suite file and its houses.
    Validate {
        #[arg(long)]
        suite: PathBuf,
    },
}

fn load_config(cli: &Cli) -> Result<(Config, bool)> {
    let mut table = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            text.parse::<toml::Table>()
                .with_context(|| format!("parsing {}", path.display()))?
        }
        None => toml::Table::new(),
    };
    for kv in &cli.set {
        let (key, value) = kv
            .split_once('=')
            .with_context(|| format!("--set expects KEY=VALUE, got `{kv}`"))?;
        let parsed: toml::Table = format!("v = {value}")
            .parse()
            .or_else(|_| format!("v = {:?}", value).parse())
            .with_context(|| format!("bad value in `{kv}`"))?;
        table.insert(key.trim().to_string(), parsed["v"].clone());
    }
    let budget_set = table.contains_key("budget");
    let cfg = Config::from_toml_str(&toml::to_string(&table)?).context("invalid configuration")?;
    Ok((cfg, budget_set))
}

fn gen(cli: &Cli, cfg: &Config, houses: Option<usize>, per_house: Option<usize>, split: Split, out: &Path) -> Result<()> {
    let mut p = SuiteParams::new(split, cli.seed);
    if let Some(h) = houses {
        p.houses = h;
    }
    if let Some(t) = per_house {
        p.tasks_per_house = t;
    }
    p.task.budget = cfg.budget;
    p.task.goal_radius = cfg.goal_radius;
    let suite = Suite::build(&p)?;
    suite.write(out).with_context(|| format!("writing suite to {}", out.display()))?;
    match cli.format {
        Format::Table => println!(
            "wrote {} houses, {} tasks ({} split, seed {}) to {}",
            suite.houses.len(),
            suite.tasks.len(),
            split,
            cli.seed,
            out.display()
        ),
        Format::Structured => println!(
            "{}",
            serde_json::json!({
                "out": out.display().to_string(),
                "split": split.name(),
                "seed": cli.seed,
                "houses": suite.houses.len(),
                "tasks": suite.tasks.len(),
            })
        ),
    }
    Ok(())
}

fn replay(cfg: &Config, scene: &Path, traces: &[PathBuf], out: &Path, scale: usize) -> Result<()> {
    let traces: Vec<Trace> = traces
        .iter()
        .map(|p| Trace::read(p).with_context(|| format!("reading trace {}", p.display())))
        .collect::<Result<_>>()?;
    let is_suite = scene.is_dir() || scene.extension().is_some_and(|e| e == "jsonl");
    let scene = if is_suite {
        let suite = Suite::read(scene)?;
        let task_id = &traces[0].header.task_id;
        let record = suite
            .task(task_id)
            .with_context(|| format!("task {task_id} is not in the suite"))?;
        suite.scene_for(record)?
    } else {
        read_scene(scene)?
    };
    let style = RenderStyle {
        scale,
        goal_radius: cfg.goal_radius,
        ..Default::default()
    };
    let img = render_trajectory(&scene, &traces, &style)?;
    img.write(out).with_context(|| format!("writing {}", out.display()))?;
    println!("{} ({}x{})", out.display(), img.width, img.height);
    Ok(())
}

fn execute(cli: &Cli) -> Result<ExitCode> {
    let (cfg, budget_set) = load_config(cli)?;
    match &cli.command {
        Command::Gen {
            houses,
            tasks_per_house,
            split,
            out,
        } => gen(cli, &cfg, *houses, *tasks_per_house, *split, out)?,
        Command::Run {
            suite,
            agent,
            parallelism,
            traces,
            budget,
            limit,
            histogram,
        } => {
            let suite = Suite::read(suite).with_context(|| format!("loading suite {}", suite.display()))?;
            let opts = RunOptions {
                seed: cli.seed,
                parallelism: *parallelism,
                budget: budget.or(budget_set.then_some(cfg.budget)),
                trace_dir: traces.clone(),
                config: cfg.clone(),
                limit: *limit,
            };
            let report = run_suite(&suite, *agent, &opts)?;
            match cli.format {
                Format::Table => print!("{}", report.to_table()),
                Format::Structured => print!("{}", report.to_json()),
            }
            if let Some(path) = histogram {
                std::fs::write(path, report.histogram_csv())?;
            }
            if !report.errors.is_empty() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Replay {
            scene,
            traces,
            out,
            scale,
        } => replay(&cfg, scene, traces, out, *scale)?,
        Command::Validate { suite } => {
            let s = Suite::read(suite).with_context(|| format!("loading suite {}", suite.display()))?;
            s.validate(cfg.goal_radius)?;
            match cli.format {
                Format::Table => println!("ok: {} houses, {} tasks", s.houses.len(), s.tasks.len()),
                Format::Structured => println!(
                    "{}",
                    serde_json::json!({"ok": true, "houses": s.houses.len(), "tasks": s.tasks.len()})
                ),
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
