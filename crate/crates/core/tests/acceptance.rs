//! Acceptance gate. Each test writes one `PASS`/`FAIL` line with the
//! measured values and wall time to stderr, then asserts.
//!
//! Run with `cargo test -p transport-core --test acceptance`.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::seq::IndexedRandom;
use rand::RngExt;

use transport_core::harness::{run_suite, RunOptions};
use transport_core::mapping::{AgentMaps, MapFrame};
use transport_core::nav::astar::{astar, BoolGrid, Passable};
use transport_core::planners::{high_level_step, AgentKind, PlannerState, RuleParams, SubGoalKind};
use transport_core::rng::{derive_seed, seeded};
use transport_core::suite::{Split, Suite, SuiteParams};
use transport_core::taskgen::{generate_house, populate_task, HouseParams, TaskParams, TARGET_CATEGORIES};
use transport_core::world::flood_fill;
use transport_core::{Action, ActionStatus, Cell, Config, Error, ObjectKind, World};

fn report(name: &str, ok: bool, detail: String, elapsed: Duration, limit: Duration) {
    let in_time = elapsed < limit;
    let verdict = if ok && in_time { "PASS" } else { "FAIL" };
    // written to the raw handle so the line shows up without --nocapture
    let line = format!("{verdict} {name}: {detail} [{:.2}s, limit {}s]\n", elapsed.as_secs_f64(), limit.as_secs());
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(ok, "{name} failed: {detail}");
    assert!(in_time, "{name} exceeded its time limit: {:.2}s", elapsed.as_secs_f64());
}

// ---------------------------------------------------------------------------
// A* against uniform-cost search

fn random_grid(rng: &mut transport_core::rng::SimRng, n: usize, density: f64) -> BoolGrid {
    let mut g = BoolGrid::new(n, n);
    for y in 0..n {
        for x in 0..n {
            g.set(x, y, rng.random_bool(density));
        }
    }
    g
}

/// Path cost `straight + diagonal * sqrt(2)` kept as integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Cost(i64, i64);

impl Ord for Cost {
    /// Exact comparison of a1 + b1*sqrt(2) against a2 + b2*sqrt(2).
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        let (da, db) = (self.0 - o.0, o.1 - self.1); // compare da with db*sqrt(2)
        match (da.signum(), db.signum()) {
            (0, 0) => Equal,
            (x, y) if x >= 0 && y <= 0 => Greater,
            (x, y) if x <= 0 && y >= 0 => Less,
            (1, 1) => (da * da).cmp(&(2 * db * db)),
            _ => (2 * db * db).cmp(&(da * da)),
        }
    }
}

impl PartialOrd for Cost {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

/// Plain Dijkstra over the same move model: 8 neighbors, unit straight and
/// sqrt(2) diagonal cost, diagonals only when both orthogonal cells are open.
fn ucs_all(g: &BoolGrid, start: (usize, usize)) -> Vec<Option<Cost>> {
    let (w, h) = (g.width as i64, g.height as i64);
    let open = |x: i64, y: i64| x >= 0 && y >= 0 && x < w && y < h && !g.is_blocked(x as usize, y as usize);
    let mut dist: Vec<Option<Cost>> = vec![None; g.width * g.height];
    let s = start.1 * g.width + start.0;
    dist[s] = Some(Cost(0, 0));
    let mut heap = BinaryHeap::from([std::cmp::Reverse((Cost(0, 0), s))]);
    while let Some(std::cmp::Reverse((d, i))) = heap.pop() {
        if dist[i].is_some_and(|best| d > best) {
            continue;
        }
        let (x, y) = ((i % g.width) as i64, (i / g.width) as i64);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if (dx, dy) == (0, 0) || !open(x + dx, y + dy) {
                    continue;
                }
                let diag = dx != 0 && dy != 0;
                if diag && !(open(x + dx, y) && open(x, y + dy)) {
                    continue;
                }
                let nd = if diag { Cost(d.0, d.1 + 1) } else { Cost(d.0 + 1, d.1) };
                let j = ((y + dy) * w + x + dx) as usize;
                if dist[j].is_none_or(|best| nd < best) {
                    dist[j] = Some(nd);
                    heap.push(std::cmp::Reverse((nd, j)));
                }
            }
        }
    }
    dist
}

fn path_is_legal(g: &BoolGrid, cells: &[(usize, usize)]) -> bool {
    cells.iter().all(|&(x, y)| !g.is_blocked(x, y))
        && cells.windows(2).all(|w| {
            let (a, b) = (w[0], w[1]);
            let (dx, dy) = (a.0.abs_diff(b.0), a.1.abs_diff(b.1));
            let step = dx <= 1 && dy <= 1 && dx + dy > 0;
            let corner_ok = dx + dy < 2 || (!g.is_blocked(b.0, a.1) && !g.is_blocked(a.0, b.1));
            step && corner_ok
        })
}

#[test]
fn astar_matches_uniform_cost_search() {
    const GRIDS: usize = 500;
    const STARTS: usize = 8;
    const GOALS: usize = 16;
    let t0 = Instant::now();
    let mut rng = seeded(0xA57A);
    for _ in 0..10_000 {
        let (a, b) = (Cost(rng.random_range(0..60), rng.random_range(0..60)), Cost(rng.random_range(0..60), rng.random_range(0..60)));
        let f = |c: Cost| c.0 as f64 + c.1 as f64 * std::f64::consts::SQRT_2;
        assert_eq!(a.cmp(&b), f(a).total_cmp(&f(b)), "{a:?} vs {b:?}");
    }
    let (mut solvable, mut unsolvable, mut mismatches) = (0usize, 0usize, Vec::new());
    for gi in 0..GRIDS {
        let g = random_grid(&mut rng, 32, 0.30);
        let open: Vec<(usize, usize)> = (0..32 * 32)
            .filter(|&i| !g.blocked[i])
            .map(|i| (i % 32, i / 32))
            .collect();
        for _ in 0..STARTS {
            let start = *open.choose(&mut rng).unwrap();
            let dist = ucs_all(&g, start);
            for _ in 0..GOALS {
                let goal = *open.choose(&mut rng).unwrap();
                let oracle = dist[goal.1 * 32 + goal.0];
                match astar(&g, start, goal) {
                    Some(p) => {
                        solvable += 1;
                        let legal = p.cells.first() == Some(&start) && p.cells.last() == Some(&goal) && path_is_legal(&g, &p.cells);
                        let got = Cost(p.straight as i64, p.diagonal as i64);
                        if !legal || oracle != Some(got) {
                            mismatches.push((gi, start, goal, Some(got), oracle));
                        }
                    }
                    None => {
                        unsolvable += 1;
                        if oracle.is_some() {
                            mismatches.push((gi, start, goal, None, oracle));
                        }
                    }
                }
            }
        }
    }
    report(
        "astar_equals_ucs",
        mismatches.is_empty(),
        format!(
            "{GRIDS} grids 32x32 @30%, {solvable} solvable + {unsolvable} unsolvable pairs, {} mismatches{}",
            mismatches.len(),
            mismatches.first().map(|m| format!(" (first {m:?})")).unwrap_or_default()
        ),
        t0.elapsed(),
        Duration::from_secs(10),
    );
}

// ---------------------------------------------------------------------------
// Map soundness after a scripted sweep

#[test]
fn sweep_map_agrees_with_ground_truth() {
    const HOUSES: usize = 20;
    let t0 = Instant::now();
    let cfg = Config::default();
    let mut p = SuiteParams::new(Split::Test, 4242);
    p.houses = HOUSES;
    p.tasks_per_house = 1;
    let suite = Suite::build(&p).unwrap();
    let (mut rv_cells, mut rv_agree, mut free_seen, mut false_occ, mut seen_total, mut seen_agree) =
        (0usize, 0usize, 0usize, 0usize, 0usize, 0usize);
    let (mut reachable_total, mut reachable_seen) = (0usize, 0usize);
    for rec in &suite.tasks {
        let scene = suite.scene_for(rec).unwrap();
        let truth = scene.ground_truth_occupancy();
        let grid = scene.grid.clone();
        let occ = |c: Cell| !grid.in_bounds(c) || truth[grid.index(c)];
        let spawn = scene.spawn.unwrap().pose.cell();
        let reachable = flood_fill(spawn, |c| !occ(c));
        let mut world = World::new(scene, rec.spec.clone(), &cfg, 1).unwrap();
        let mut maps = AgentMaps::new(MapFrame::new(cfg.map_size, spawn), cfg.occupancy_threshold, None);
        for c in reachable.iter().filter(|c| (c.x + c.y) % 2 == 0) {
            for heading in [0.0, 90.0, 180.0, 270.0] {
                world.place_agent(c.center(), heading).unwrap();
                maps.integrate(&world.observe());
            }
        }
        let m = &maps.occupancy;
        for c in grid.all_cells() {
            if !m.is_explored(c) {
                continue;
            }
            let agree = m.is_blocked(c) == occ(c);
            seen_total += 1;
            seen_agree += agree as usize;
            if !occ(c) {
                free_seen += 1;
                false_occ += m.is_blocked(c) as usize;
            }
            if reachable.contains(&c) {
                rv_cells += 1;
                rv_agree += agree as usize;
            }
        }
        reachable_total += reachable.len();
        reachable_seen += reachable.iter().filter(|c| m.is_explored(**c)).count();
    }
    let agreement = rv_agree as f64 / rv_cells as f64;
    report(
        "map_soundness",
        agreement >= 0.99 && false_occ == 0,
        format!(
            "{HOUSES} houses, reachable-visible agreement {agreement:.4} over {rv_cells} cells, \
             {false_occ} false-occupied of {free_seen} free visible, all-visible agreement {:.4}, \
             reachable coverage {:.3}",
            seen_agree as f64 / seen_total as f64,
            reachable_seen as f64 / reachable_total as f64
        ),
        t0.elapsed(),
        Duration::from_secs(30),
    );
}

// ---------------------------------------------------------------------------
// Generator statistics

#[test]
fn generator_statistics() {
    const MIN_ROOMS: usize = 10_000;
    let t0 = Instant::now();
    let hp = HouseParams::default();
    let tp = TaskParams::default();
    let (mut rooms, mut with_container, mut tasks, mut houses) = (0usize, 0usize, 0usize, 0usize);
    let mut problems: Vec<String> = Vec::new();
    let mut category_totals: BTreeMap<String, u32> = BTreeMap::new();
    let allowed: BTreeSet<&str> = TARGET_CATEGORIES.into_iter().collect();
    let mut h = 0u64;
    while rooms < MIN_ROOMS {
        let house = generate_house(&format!("h{h}"), derive_seed(77, &format!("house/{h}")), &hp).unwrap();
        houses += 1;
        let n_rooms = house.grid.rooms.len();
        if !(6..=8).contains(&n_rooms) {
            problems.push(format!("house {h} has {n_rooms} rooms"));
        }
        // every room reachable from the first through non-wall cells
        let grid = &house.grid;
        let walkable = |c: Cell| grid.in_bounds(c) && grid.terrain(c) != transport_core::Terrain::OccupiedHeavy;
        let first = grid.rooms[0].rect.cells().find(|c| walkable(*c)).unwrap();
        let reach = flood_fill(first, walkable);
        for r in &grid.rooms {
            if !r.rect.cells().any(|c| reach.contains(&c)) {
                problems.push(format!("house {h} room {} is disconnected", r.id));
            }
        }
        for t in 0..15u64 {
            let task = populate_task(&house, derive_seed(h, &format!("task/{t}")), &tp).unwrap();
            tasks += 1;
            let total = task.spec.total_required();
            let targets: Vec<_> = task.scene.objects.iter().filter(|o| o.kind == ObjectKind::Target).collect();
            if !(6..=8).contains(&total) || targets.len() as u32 != total {
                problems.push(format!("task {h}/{t}: {total} required, {} placed", targets.len()));
            }
            for (cat, n) in &task.spec.required {
                if !allowed.contains(cat.as_str()) {
                    problems.push(format!("task {h}/{t}: unknown category {cat}"));
                }
                *category_totals.entry(cat.clone()).or_default() += n;
            }
            for room in &task.scene.grid.rooms {
                rooms += 1;
                let has = task
                    .scene
                    .objects
                    .iter()
                    .any(|o| o.kind == ObjectKind::Container && room.contains(o.pose.cell()));
                with_container += has as usize;
            }
        }
        h += 1;
    }
    let freq = with_container as f64 / rooms as f64;
    let ok = (freq - 0.25).abs() <= 0.01 && problems.is_empty() && category_totals.len() == 5;
    report(
        "generator_statistics",
        ok,
        format!(
            "{rooms} rooms in {houses} houses / {tasks} tasks, container frequency {freq:.4}, \
             categories used {:?}, {} violations{}",
            category_totals,
            problems.len(),
            problems.first().map(|p| format!(" (first: {p})")).unwrap_or_default()
        ),
        t0.elapsed(),
        Duration::from_secs(60),
    );
}

// ---------------------------------------------------------------------------
// Solvability witness

#[test]
fn oracle_solves_every_sampled_task() {
    let t0 = Instant::now();
    let mut p = SuiteParams::new(Split::Test, 9001);
    p.houses = 5;
    p.tasks_per_house = 10;
    let suite = Suite::build(&p).unwrap();
    let opts = RunOptions {
        seed: 3,
        budget: Some(3000),
        ..Default::default()
    };
    let r = run_suite(&suite, AgentKind::Oracle, &opts).unwrap();
    let failed: Vec<String> = r
        .episodes
        .iter()
        .filter(|e| e.transport_rate < 1.0)
        .map(|e| format!("{} {}/{}", e.task_id, e.transported, e.required))
        .collect();
    let ok = r.errors.is_empty() && r.episodes.len() == 50 && failed.is_empty();
    report(
        "oracle_solvability",
        ok,
        format!(
            "{} tasks, budget 3000, mean rate {:.3}, max steps {}, {} below 1.0 {:?}, {} errors",
            r.episodes.len(),
            r.mean_transport_rate,
            r.episodes.iter().map(|e| e.steps).max().unwrap_or(0),
            failed.len(),
            failed,
            r.errors.len()
        ),
        t0.elapsed(),
        Duration::from_secs(120),
    );
}

// ---------------------------------------------------------------------------
// Ordinal baseline comparison

#[test]
fn baselines_keep_their_ordering() {
    let t0 = Instant::now();
    let suite = Suite::build(&SuiteParams::new(Split::Test, 2024)).unwrap();
    assert_eq!(suite.tasks.len(), 100);
    let opts = RunOptions {
        seed: 1,
        budget: Some(1000),
        ..Default::default()
    };
    let run = |k: AgentKind| {
        let r = run_suite(&suite, k, &opts).unwrap();
        assert!(r.errors.is_empty(), "{k} errors: {:?}", r.errors);
        r
    };
    let frontier = run(AgentKind::Frontier);
    let greedy = run(AgentKind::GreedySemantic);
    let random = run(AgentKind::Random);
    let wins = frontier
        .episodes
        .iter()
        .zip(&random.episodes)
        .filter(|(f, r)| {
            assert_eq!(f.task_id, r.task_id);
            f.transport_rate > r.transport_rate
        })
        .count();
    let (f, g, r) = (frontier.mean_transport_rate, greedy.mean_transport_rate, random.mean_transport_rate);
    let win_frac = wins as f64 / frontier.episodes.len() as f64;
    let ok = f >= g - 0.05 && f > r + 0.2 && win_frac >= 0.80 && f >= 0.40;
    report(
        "baseline_ordering",
        ok,
        format!(
            "frontier {f:.3} {:?}, greedy-semantic {g:.3}, random {r:.3}; frontier beats random on {wins}/100",
            frontier.ci95
        ),
        t0.elapsed(),
        Duration::from_secs(600),
    );
}

// ---------------------------------------------------------------------------
// High-level rule conformance

const BUDGET: u32 = 1000;

/// A consistent planner state: `arms` targets in arm slots, `boxed` targets
/// in a held container.
fn state(steps: u32, found: bool, held: bool, available: bool, known: usize, arms: usize, boxed: usize) -> PlannerState {
    PlannerState {
        steps_charged: steps,
        budget: BUDGET,
        container_found: found,
        container_held: held,
        container_available: available,
        targets_known: known,
        targets_in_arms: arms,
        carrying: arms + boxed,
        free_slots: 2 - arms - held as usize,
        container_space: if held { 3 - boxed } else { 0 },
        remaining_required: 8,
    }
}

/// The four transition rules written out directly, strongest first.
fn reference_rules(s: &PlannerState) -> SubGoalKind {
    let used = |f: f64| s.steps_charged as f64 >= f * s.budget as f64;
    if s.carrying > 0 && used(0.9) {
        return SubGoalKind::Place;
    }
    if !s.container_found && s.targets_in_arms >= 2 {
        return SubGoalKind::Place;
    }
    if s.container_found && !s.container_held && s.container_available {
        return SubGoalKind::PickUpContainer;
    }
    if s.targets_known > 0 && (s.container_held || used(0.2)) {
        return SubGoalKind::PickUpObject;
    }
    SubGoalKind::Exploration
}

#[test]
fn high_level_rules_follow_the_table() {
    use SubGoalKind::*;
    let t0 = Instant::now();
    let p = RuleParams::default();
    #[rustfmt::skip]
    let table: Vec<(&str, PlannerState, SubGoalKind)> = vec![
        ("nothing known at start", state(0, false, false, false, 0, 0, 0), Exploration),
        ("targets known before the object gate", state(150, false, false, false, 3, 0, 0), Exploration),
        ("container found at once", state(10, true, false, true, 0, 0, 0), PickUpContainer),
        ("container found with targets known", state(10, true, false, true, 2, 0, 0), PickUpContainer),
        ("container found with one target in hand", state(120, true, false, true, 1, 1, 0), PickUpContainer),
        ("container found after the object gate", state(500, true, false, true, 3, 0, 0), PickUpContainer),
        ("container held, target known", state(10, true, true, false, 1, 0, 0), PickUpObject),
        ("container held, partly full", state(150, true, true, false, 2, 1, 1), PickUpObject),
        ("container held, nothing known", state(150, true, true, false, 0, 0, 1), Exploration),
        ("object gate one step early", state(199, false, false, false, 1, 0, 0), Exploration),
        ("object gate reached", state(200, false, false, false, 1, 0, 0), PickUpObject),
        ("object gate passed, one in hand", state(400, false, false, false, 2, 1, 0), PickUpObject),
        ("object gate passed, nothing known", state(400, false, false, false, 0, 0, 0), Exploration),
        ("place gate one step early", state(899, true, true, false, 3, 1, 1), PickUpObject),
        ("place gate reached with container load", state(900, true, true, false, 3, 1, 1), Place),
        ("place gate reached with one in hand", state(900, false, false, false, 2, 1, 0), Place),
        ("place gate reached, empty handed", state(950, false, false, false, 2, 0, 0), PickUpObject),
        ("place gate overrides container pickup", state(950, true, false, true, 0, 1, 0), Place),
        ("two in hand, no container", state(50, false, false, false, 0, 2, 0), Place),
        ("two in hand, no container, targets known", state(300, false, false, false, 4, 2, 0), Place),
        ("one in hand, no container", state(300, false, false, false, 4, 1, 0), PickUpObject),
    ];
    let mut failures: Vec<String> = Vec::new();
    for (name, s, want) in &table {
        let got = high_level_step(s, &p);
        if got != *want {
            failures.push(format!("{name}: got {got:?}, want {want:?}"));
        }
        if reference_rules(s) != *want {
            failures.push(format!("{name}: reference disagrees with table"));
        }
    }
    // Exhaustive comparison against the reference on every consistent state
    // where the extra capacity and completion guards stay silent.
    let mut checked = 0usize;
    let mut fired: BTreeMap<&str, usize> = BTreeMap::new();
    let flags = [(false, false, false), (true, false, true), (true, false, false), (true, true, false)];
    for steps in [0, 1, 199, 200, 201, 500, 899, 900, 901, 999, 1000] {
        for (found, held, available) in flags {
            for known in 0..=3 {
                for arms in 0..=(2 - held as usize) {
                    for boxed in 0..=if held { 3 } else { 0 } {
                        for remaining in 1..=8 {
                            let s = PlannerState {
                                remaining_required: remaining,
                                ..state(steps, found, held, available, known, arms, boxed)
                            };
                            let want = reference_rules(&s);
                            if s.carrying >= s.remaining_required || (s.capacity_left() == 0 && want != Place) {
                                continue;
                            }
                            checked += 1;
                            let got = high_level_step(&s, &p);
                            if got != want {
                                failures.push(format!("{s:?}: got {got:?}, want {want:?}"));
                            }
                            let rule = match want {
                                Place if s.carrying > 0 && steps >= 900 => "place_gate",
                                Place => "two_in_hand",
                                PickUpContainer => "container_found",
                                PickUpObject if held => "container_held",
                                PickUpObject => "object_gate",
                                Exploration => "explore",
                            };
                            *fired.entry(rule).or_default() += 1;
                        }
                    }
                }
            }
        }
    }
    let covered = ["place_gate", "two_in_hand", "container_found", "container_held", "object_gate"]
        .iter()
        .all(|r| fired.get(r).copied().unwrap_or(0) > 0);
    report(
        "high_level_rules",
        failures.is_empty() && covered,
        format!(
            "{} table rows, {checked} enumerated states, rule hits {fired:?}, {} mismatches{}",
            table.len(),
            failures.len(),
            failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default()
        ),
        t0.elapsed(),
        Duration::from_secs(1),
    );
}

// ---------------------------------------------------------------------------
// Protocol invariants under fuzzing

#[test]
fn random_action_sequences_keep_invariants() {
    const SEQUENCES: usize = 10_000;
    const LENGTH: usize = 25;
    let t0 = Instant::now();
    let mut p = SuiteParams::new(Split::Train, 555);
    p.houses = 8;
    p.tasks_per_house = 5;
    p.task.budget = 80;
    let suite = Suite::build(&p).unwrap();
    let scenes: Vec<_> = suite.tasks.iter().map(|r| (suite.scene_for(r).unwrap(), r.spec.clone())).collect();
    let mut rng = seeded(0xF022);
    let mut statuses: BTreeMap<ActionStatus, usize> = BTreeMap::new();
    let mut violations: Vec<String> = Vec::new();
    let (mut actions, mut rejected, mut loaded) = (0usize, 0usize, 0usize);
    for seq in 0..SEQUENCES {
        let (scene, spec) = &scenes[seq % scenes.len()];
        let mut cfg = Config::default();
        cfg.p_drop = [0.0, 0.5, 1.0][seq % 3];
        cfg.p_still_in = [0.0, 0.5, 1.0][(seq / 3) % 3];
        let mut world = World::new(scene.clone(), spec.clone(), &cfg, seq as u64).unwrap();
        let ids: Vec<u32> = scene.objects.iter().map(|o| o.id).collect();
        let targets: BTreeSet<u32> = scene
            .objects
            .iter()
            .filter(|o| o.kind == ObjectKind::Target)
            .map(|o| o.id)
            .collect();
        let graspable: Vec<u32> = scene.objects.iter().filter(|o| o.is_graspable()).map(|o| o.id).collect();
        let (w, h) = scene.grid.bounds_m();
        if seq % 2 == 1 {
            // start beside a random object, facing it, so grasps and
            // container moves happen often
            let containers: Vec<u32> = scene.objects.iter().filter(|o| o.kind == ObjectKind::Container).map(|o| o.id).collect();
            let id = *containers.choose(&mut rng).or(graspable.choose(&mut rng)).unwrap();
            let obj = scene.object(id).unwrap();
            let c = obj.pose.cell();
            let spots: Vec<Cell> = (-2..=2)
                .flat_map(|dx| (-2..=2).map(move |dy| c.offset(dx, dy)))
                .filter(|n| *n != c && !world.is_blocked(*n))
                .collect();
            if let Some(spot) = spots.choose(&mut rng) {
                let at = spot.center();
                world.place_agent(at, at.bearing_to(obj.pose)).unwrap();
            }
        }
        let mut charged = world.steps_charged();
        for _ in 0..LENGTH {
            if world.is_done() {
                if !matches!(world.step(Action::Drop), Err(Error::EpisodeFinished)) {
                    violations.push(format!("seq {seq}: step after the end was accepted"));
                }
                break;
            }
            let roll = rng.random_range(0..100);
            let action = match roll {
                0..=29 => Action::MoveForward,
                30..=39 => Action::RotateLeft,
                40..=49 => Action::RotateRight,
                50..=57 => Action::RotateTo {
                    x: rng.random_range(0.0..w),
                    y: rng.random_range(0.0..h),
                },
                58..=79 => Action::GoToGrasp {
                    object: *graspable.choose(&mut rng).unwrap(),
                },
                80..=81 => Action::GoToGrasp {
                    object: *ids.choose(&mut rng).unwrap(),
                },
                82 => Action::GoToGrasp { object: 999_999 },
                83..=91 => Action::PutInContainer,
                _ => Action::Drop,
            };
            actions += 1;
            match world.step(action) {
                Ok(s) => {
                    *statuses.entry(s).or_default() += 1;
                    if !s.is_emitted() {
                        violations.push(format!("seq {seq}: {action:?} produced non-terminal status {s:?}"));
                    }
                }
                Err(Error::UnknownObject(_)) => {
                    rejected += 1;
                    if world.steps_charged() != charged {
                        violations.push(format!("seq {seq}: rejected action was charged"));
                    }
                }
                Err(e) => violations.push(format!("seq {seq}: {action:?} errored: {e}")),
            }
            let now = world.steps_charged();
            if now < charged || now > world.budget() {
                violations.push(format!("seq {seq}: steps {charged} -> {now} (budget {})", world.budget()));
            }
            charged = now;
            if let Err(e) = world.check_invariants() {
                violations.push(format!("seq {seq}: {e}"));
            }
            let held: Vec<u32> = world.agent().held().collect();
            if held.len() > 2 {
                violations.push(format!("seq {seq}: {} arm slots in use", held.len()));
            }
            for o in &world.scene().objects {
                if o.kind != ObjectKind::Container {
                    continue;
                }
                let n = world.contents(o.id).len();
                loaded += (n > 0) as usize;
                if n > cfg.container_capacity {
                    violations.push(format!("seq {seq}: container {} over capacity", o.id));
                }
            }
            let now_targets: BTreeSet<u32> = world
                .scene()
                .objects
                .iter()
                .filter(|o| o.kind == ObjectKind::Target)
                .map(|o| o.id)
                .collect();
            if now_targets != targets || world.transported() as usize > targets.len() {
                violations.push(format!("seq {seq}: target set changed"));
            }
        }
        if violations.len() > 20 {
            break;
        }
    }
    report(
        "protocol_invariants",
        violations.is_empty(),
        format!(
            "{SEQUENCES} sequences, {actions} actions, {rejected} rejected unknown ids, {loaded} steps with a loaded container, statuses {statuses:?}, {} violations{}",
            violations.len(),
            violations.first().map(|v| format!(" (first: {v})")).unwrap_or_default()
        ),
        t0.elapsed(),
        Duration::from_secs(120),
    );
}

// ---------------------------------------------------------------------------
// Determinism across runs and parallelism

fn scratch_dir(label: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("transport-acceptance-{}-{label}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

#[test]
fn runs_are_byte_identical_across_parallelism() {
    let t0 = Instant::now();
    let mut p = SuiteParams::new(Split::Test, 31337);
    p.houses = 3;
    p.tasks_per_house = 4;
    let suite = Suite::build(&p).unwrap();
    let mut differences: Vec<String> = Vec::new();
    let mut files = 0usize;
    for agent in AgentKind::ALL {
        let mut outputs = Vec::new();
        for (run, parallelism) in [(0, 1), (1, 1), (2, 8), (3, 8)] {
            let dir = scratch_dir(&format!("{agent}-{run}"));
            let opts = RunOptions {
                seed: 17,
                parallelism,
                budget: Some(400),
                trace_dir: Some(dir.clone()),
                ..Default::default()
            };
            let report = run_suite(&suite, agent, &opts).unwrap();
            let traces = dir_bytes(&dir);
            let _ = std::fs::remove_dir_all(&dir);
            outputs.push((parallelism, report.to_json(), report.to_table(), traces));
        }
        let (_, json0, table0, traces0) = &outputs[0];
        files += traces0.len();
        if traces0.len() != suite.tasks.len() {
            differences.push(format!("{agent}: {} traces for {} tasks", traces0.len(), suite.tasks.len()));
        }
        for (i, (par, json, table, traces)) in outputs.iter().enumerate().skip(1) {
            if json != json0 || table != table0 {
                differences.push(format!("{agent} run {i} (p{par}): summary differs"));
            }
            if traces != traces0 {
                differences.push(format!("{agent} run {i} (p{par}): traces differ"));
            }
        }
    }
    report(
        "determinism",
        differences.is_empty(),
        format!(
            "{} agents x 4 runs (p1, p1, p8, p8) over {} tasks, {files} trace files per run set, {} differences {:?}",
            AgentKind::ALL.len(),
            suite.tasks.len(),
            differences.len(),
            differences
        ),
        t0.elapsed(),
        Duration::from_secs(300),
    );
}
