use std::path::PathBuf;

use transport_core::harness::{run_episode, run_suite, RunOptions};
use transport_core::planners::AgentKind;
use transport_core::render::{render_trajectory, RenderStyle};
use transport_core::sim::trace::Trace;
use transport_core::suite::{Split, Suite, SuiteParams, SUITE_FILE};
use transport_core::{Config, Error};

fn tmp(label: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("transport-pipeline-{}-{label}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn small_suite(seed: u64) -> Suite {
    let mut p = SuiteParams::new(Split::Test, seed);
    p.houses = 2;
    p.tasks_per_house = 3;
    Suite::build(&p).unwrap()
}

#[test]
fn suite_survives_a_disk_roundtrip() {
    let suite = small_suite(5);
    let dir = tmp("roundtrip");
    suite.write(&dir).unwrap();
    let back = Suite::read(&dir).unwrap();
    assert_eq!(back, suite);
    back.validate(Config::default().goal_radius).unwrap();
    // the jsonl file itself is also accepted
    assert_eq!(Suite::read(&dir.join(SUITE_FILE)).unwrap(), suite);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn suite_generation_is_seed_deterministic() {
    assert_eq!(small_suite(9).jsonl(), small_suite(9).jsonl());
    assert_ne!(small_suite(9).jsonl(), small_suite(10).jsonl());
}

#[test]
fn truncated_suite_is_rejected() {
    let dir = tmp("truncated");
    small_suite(6).write(&dir).unwrap();
    let path = dir.join(SUITE_FILE);
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::write(&path, &text[..text.len() / 2]).unwrap();
    assert!(Suite::read(&dir).is_err());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn episodes_respect_budget_and_counts() {
    let suite = small_suite(7);
    let cfg = Config::default();
    for kind in AgentKind::ALL {
        let mut agent = kind.build();
        for rec in &suite.tasks {
            let mut spec = rec.spec.clone();
            spec.budget = 300;
            let scene = suite.scene_for(rec).unwrap();
            let (r, trace) = run_episode(scene, &spec, &rec.task_id, agent.as_mut(), &cfg, 11, true).unwrap();
            assert!(r.steps <= 300, "{kind}: {} steps", r.steps);
            assert!(r.transported <= r.required);
            assert_eq!(r.required, spec.total_required());
            assert!((r.transport_rate - r.transported as f64 / r.required as f64).abs() < 1e-12);
            let trace = trace.unwrap();
            let last = trace.steps.last().map(|s| s.steps_charged).unwrap_or(0);
            assert_eq!(last, r.steps);
            assert!(trace.steps.windows(2).all(|w| w[0].steps_charged <= w[1].steps_charged));
        }
    }
}

#[test]
fn traces_roundtrip_and_render() {
    let suite = small_suite(8);
    let dir = tmp("traces");
    let opts = RunOptions {
        seed: 2,
        budget: Some(200),
        trace_dir: Some(dir.clone()),
        limit: Some(2),
        ..Default::default()
    };
    let report = run_suite(&suite, AgentKind::Frontier, &opts).unwrap();
    assert_eq!(report.episodes.len(), 2);
    for ep in &report.episodes {
        let path = dir.join(ep.trace_file.as_ref().unwrap());
        let trace = Trace::read(&path).unwrap();
        assert_eq!(Trace::from_jsonl(&trace.to_jsonl()).unwrap(), trace);
        assert_eq!(trace.to_jsonl(), std::fs::read_to_string(&path).unwrap());
        let rec = suite.task(&ep.task_id).unwrap();
        let scene = suite.scene_for(rec).unwrap();
        let img = render_trajectory(&scene, &[trace.clone()], &RenderStyle::default()).unwrap();
        assert_eq!(img.width, scene.grid.width as usize * 8);
        let other = suite.tasks.iter().find(|t| t.house_id != rec.house_id).unwrap();
        let wrong = suite.scene_for(other).unwrap();
        assert!(matches!(
            render_trajectory(&wrong, &[trace], &RenderStyle::default()),
            Err(Error::SceneMismatch { .. })
        ));
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn report_aggregates_per_house() {
    let suite = small_suite(4);
    let opts = RunOptions {
        budget: Some(150),
        ..Default::default()
    };
    let r = run_suite(&suite, AgentKind::Random, &opts).unwrap();
    assert_eq!(r.houses.len(), 2);
    assert_eq!(r.houses.iter().map(|h| h.tasks).sum::<usize>(), 6);
    let mean = r.episodes.iter().map(|e| e.transport_rate).sum::<f64>() / 6.0;
    assert!((mean - r.mean_transport_rate).abs() < 1e-12);
    assert!(r.ci95[0] <= r.mean_transport_rate && r.mean_transport_rate <= r.ci95[1]);
    assert_eq!(r.histogram_csv().lines().count(), 3);
    let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(json["agent"], "random");
}
