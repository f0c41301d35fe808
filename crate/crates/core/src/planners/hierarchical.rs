use std::collections::{BTreeMap, BTreeSet};

use rand::seq::IndexedRandom;
use serde::{Deserialize, Serialize};

use super::exploration::{explore_frontier, path_cost};
use super::high_level::{high_level_step, PlannerState, RuleParams, SubGoal, SubGoalKind};
use super::AgentPolicy;
use crate::config::Config;
use crate::geometry::{heading_delta, segment_cells, Cell, CellRect, Point, CELL_SIZE};
use crate::mapping::{AgentMaps, MapFrame, OccupancyMap};
use crate::nav::{NavCommand, NavGoal, NavParams, Navigator};
use crate::rng::{derive_seed, seeded, SimRng};
use crate::sim::{Action, ActionStatus, Observation, Perception};
use crate::world::{in_deposit_zone, ObjectId, ObjectKind, TaskSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exploration {
    /// Uniform frontier waypoints; pickups chosen by straight-line distance.
    Frontier,
    /// Semantic targets chosen by path cost; frontier sampling otherwise.
    GreedySemantic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentParams {
    pub rules: RuleParams,
    /// Failed grasps of one object before it is ignored.
    pub max_grasp_failures: u32,
}

impl Default for AgentParams {
    fn default() -> Self {
        AgentParams {
            rules: RuleParams::default(),
            max_grasp_failures: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Known {
    kind: ObjectKind,
    pose: Point,
    contained_in: Option<ObjectId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NavKey {
    Waypoint(Cell),
    Object(ObjectId),
    Zone,
    Goal,
}

/// Deposit-zone test on the agent's own map: only known-free cells count,
/// and anything not known free blocks the line to the furniture, so the
/// answer never claims a cell the true zone lacks.
pub(crate) fn zone_contains(map: &OccupancyMap, fp: &CellRect, radius: f64, c: Cell) -> bool {
    map.is_known_free(c) && in_deposit_zone(fp, radius, c, |w| !map.is_known_free(w))
}

/// Decisions re-run at most this many times per step before giving up and
/// turning in place.
const MAX_REDECIDE: usize = 8;

/// The hierarchical agent: rule-based sub-goals, A* navigation on its own
/// maps, and an object memory built from detections.
pub struct HierarchicalAgent {
    name: String,
    exploration: Exploration,
    perception: Perception,
    params: AgentParams,
    cfg: Config,
    task: Option<TaskSpec>,
    rng: SimRng,
    maps: Option<AgentMaps>,
    memory: BTreeMap<ObjectId, Known>,
    container_found: bool,
    delivered: BTreeSet<ObjectId>,
    failures: BTreeMap<ObjectId, u32>,
    blacklist: BTreeSet<ObjectId>,
    goal: Option<CellRect>,
    nav: Option<(NavKey, Navigator)>,
    waypoint: Option<Cell>,
    bad_waypoints: BTreeSet<Cell>,
    past_waypoints: Vec<Cell>,
    committed: Option<ObjectId>,
    approach: BTreeSet<ObjectId>,
    last_action: Option<Action>,
    subgoal: Option<SubGoal>,
}

impl HierarchicalAgent {
    pub fn new(exploration: Exploration) -> Self {
        let name = match exploration {
            Exploration::Frontier => "frontier",
            Exploration::GreedySemantic => "greedy-semantic",
        };
        Self::with_params(name, exploration, Perception::Egocentric, AgentParams::default())
    }

    /// Hierarchical planner on ground truth: omniscient perception, no
    /// budget gate before picking objects, and patient grasp retries.
    pub fn oracle() -> Self {
        let params = AgentParams {
            rules: RuleParams {
                object_gate: 0.0,
                ..RuleParams::default()
            },
            max_grasp_failures: 20,
        };
        Self::with_params("oracle", Exploration::GreedySemantic, Perception::Omniscient, params)
    }

    pub fn with_params(name: &str, exploration: Exploration, perception: Perception, params: AgentParams) -> Self {
        HierarchicalAgent {
            name: name.into(),
            exploration,
            perception,
            params,
            cfg: Config::default(),
            task: None,
            rng: seeded(0),
            maps: None,
            memory: BTreeMap::new(),
            container_found: false,
            delivered: BTreeSet::new(),
            failures: BTreeMap::new(),
            blacklist: BTreeSet::new(),
            goal: None,
            nav: None,
            waypoint: None,
            bad_waypoints: BTreeSet::new(),
            past_waypoints: Vec::new(),
            committed: None,
            approach: BTreeSet::new(),
            last_action: None,
            subgoal: None,
        }
    }

    fn maps(&self) -> &AgentMaps {
        self.maps.as_ref().expect("reset before act")
    }

    fn in_agent_zone(&self, c: Cell) -> bool {
        let Some(fp) = self.goal else {
            return false;
        };
        zone_contains(&self.maps().occupancy, &fp, self.cfg.goal_radius, c)
    }

    /// Known-free cells from which a drop certainly counts.
    fn agent_zone(&self) -> BTreeSet<Cell> {
        let Some(fp) = self.goal else {
            return BTreeSet::new();
        };
        let r = (self.cfg.goal_radius / CELL_SIZE).ceil() as i32 + 1;
        CellRect::new(fp.x0 - r, fp.y0 - r, fp.w + 2 * r, fp.h + 2 * r)
            .cells()
            .filter(|c| self.in_agent_zone(*c))
            .collect()
    }

    fn update_memory(&mut self, obs: &Observation) {
        let detected: BTreeSet<ObjectId> = obs.detections.iter().map(|d| d.id).collect();
        let visible: BTreeSet<Cell> = obs.visible_cells.iter().map(|(c, _)| *c).collect();
        self.memory
            .retain(|id, k| detected.contains(id) || !visible.contains(&k.pose.cell()));
        let goal_name = self.task.as_ref().map(|t| t.goal_category.name());
        for d in &obs.detections {
            match d.kind {
                ObjectKind::Target | ObjectKind::Container => {
                    if d.kind == ObjectKind::Container {
                        self.container_found = true;
                    }
                    self.memory.insert(
                        d.id,
                        Known {
                            kind: d.kind,
                            pose: d.pose,
                            contained_in: d.contained_in,
                        },
                    );
                }
                ObjectKind::Furniture if Some(d.category.as_str()) == goal_name => {
                    self.goal = d.footprint;
                }
                _ => {}
            }
        }
        for h in obs.held.iter().flatten() {
            self.memory.remove(&h.id);
            for c in &h.contents {
                self.memory.remove(c);
            }
        }
        // targets resting in the zone count as delivered
        let ids: Vec<(ObjectId, Cell, bool)> = self
            .memory
            .iter()
            .filter(|(_, k)| k.kind == ObjectKind::Target)
            .map(|(id, k)| (*id, k.pose.cell(), k.contained_in.is_none()))
            .collect();
        for (id, cell, loose) in ids {
            if loose && self.in_agent_zone(cell) {
                self.delivered.insert(id);
            } else {
                self.delivered.remove(&id);
            }
        }
    }

    fn note_last_status(&mut self, obs: &Observation) {
        let (Some(Action::GoToGrasp { object }), Some(status)) = (self.last_action, obs.last_status) else {
            return;
        };
        if status == ActionStatus::Success {
            self.failures.remove(&object);
            self.approach.remove(&object);
            if self.committed == Some(object) {
                self.committed = None;
            }
            return;
        }
        let n = self.failures.entry(object).or_insert(0);
        *n += 1;
        self.approach.insert(object);
        if *n >= self.params.max_grasp_failures {
            self.blacklist.insert(object);
            if self.committed == Some(object) {
                self.committed = None;
            }
        }
    }

    fn planner_state(&self, obs: &Observation) -> PlannerState {
        let task = self.task.as_ref().expect("reset before act");
        let mut s = PlannerState {
            steps_charged: obs.steps_charged,
            budget: task.budget,
            container_found: self.container_found,
            remaining_required: (task.total_required() as usize).saturating_sub(self.delivered.len()),
            ..Default::default()
        };
        for slot in &obs.held {
            match slot {
                None => s.free_slots += 1,
                Some(h) if h.kind == ObjectKind::Container => {
                    s.container_held = true;
                    s.carrying += h.contents.len();
                    s.container_space += self.cfg.container_capacity.saturating_sub(h.contents.len());
                }
                Some(_) => {
                    s.targets_in_arms += 1;
                    s.carrying += 1;
                }
            }
        }
        s.container_available = !self.candidates(ObjectKind::Container).is_empty();
        s.targets_known = self.candidates(ObjectKind::Target).len();
        s
    }

    fn candidates(&self, kind: ObjectKind) -> Vec<ObjectId> {
        self.memory
            .iter()
            .filter(|(id, k)| {
                k.kind == kind && !self.blacklist.contains(id) && !self.delivered.contains(id)
            })
            .map(|(id, _)| *id)
            .collect()
    }

    fn choose(&self, kind: ObjectKind, pose: Point) -> Option<ObjectId> {
        if let Some(id) = self.committed {
            if self.memory.get(&id).is_some_and(|k| k.kind == kind) && self.candidates(kind).contains(&id) {
                return Some(id);
            }
        }
        let cands = self.candidates(kind);
        let map = &self.maps().occupancy;
        let score = |id: &ObjectId| -> f64 {
            let p = self.memory[id].pose;
            match self.exploration {
                Exploration::Frontier => pose.distance(p),
                Exploration::GreedySemantic => {
                    path_cost(map, pose.cell(), p.cell()).map_or(f64::INFINITY, |c| c * CELL_SIZE)
                }
            }
        };
        let scored: Vec<(f64, ObjectId)> = cands.iter().map(|id| (score(id), *id)).collect();
        let best = scored
            .iter()
            .filter(|(s, _)| s.is_finite())
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        best.or_else(|| scored.first()).map(|(_, id)| *id)
    }

    fn navigate(&mut self, key: NavKey, goal: NavGoal, obs: &Observation) -> NavCommand {
        if self.nav.as_ref().is_none_or(|(k, n)| *k != key || *n.goal() != goal) {
            let params = NavParams::from(&self.cfg);
            self.nav = Some((key, Navigator::new(goal, params)));
        }
        let last_ok = obs.last_status.is_none_or(|s| s == ActionStatus::Success);
        let maps = self.maps.as_ref().expect("reset before act");
        let (_, nav) = self.nav.as_mut().expect("set above");
        let cmd = nav.next(obs.pose, obs.heading, &maps.occupancy, last_ok);
        if !matches!(cmd, NavCommand::Act(_)) {
            self.nav = None;
        }
        cmd
    }

    fn facing(&self, obs: &Observation, p: Point) -> bool {
        heading_delta(obs.heading, obs.pose.bearing_to(p)).abs() <= self.cfg.fov_deg / 2.0 - 1.0
    }

    /// Something unconfirmed between here and `to` may hide it.
    fn occluded(&self, from: Point, to: Point) -> bool {
        let map = &self.maps().occupancy;
        let cells = segment_cells(from, to);
        cells.len() > 2 && cells[1..cells.len() - 1].iter().any(|c| !map.is_known_free(*c))
    }

    fn sight_clear(&self, from: Point, to: Point) -> bool {
        let map = &self.maps().occupancy;
        let cells = segment_cells(from, to);
        cells[..cells.len() - 1].iter().all(|c| !map.is_blocked(*c))
    }

    fn decide(&mut self, obs: &Observation) -> Option<Action> {
        // a target in one arm and room in a held container: put it in first
        let container = obs
            .held
            .iter()
            .flatten()
            .find(|h| h.kind == ObjectKind::Container && h.contents.len() < self.cfg.container_capacity);
        let loose_target = obs.held.iter().flatten().any(|h| h.kind == ObjectKind::Target);
        if container.is_some() && loose_target {
            return Some(Action::PutInContainer);
        }
        let state = self.planner_state(obs);
        let kind = high_level_step(&state, &self.params.rules);
        match kind {
            SubGoalKind::Place => self.place(obs),
            SubGoalKind::PickUpContainer | SubGoalKind::PickUpObject => {
                let okind = if kind == SubGoalKind::PickUpContainer {
                    ObjectKind::Container
                } else {
                    ObjectKind::Target
                };
                let Some(id) = self.choose(okind, obs.pose) else {
                    return self.explore(obs);
                };
                self.committed = Some(id);
                self.subgoal = Some(SubGoal {
                    kind,
                    object: Some(id),
                    cell: self.memory.get(&id).map(|k| k.pose.cell()),
                });
                self.pick(obs, id)
            }
            SubGoalKind::Exploration => self.explore(obs),
        }
    }

    fn pick(&mut self, obs: &Observation, id: ObjectId) -> Option<Action> {
        let target = self.memory[&id].pose;
        let dist = obs.pose.distance(target);
        let in_view = obs.detection(id).is_some_and(|d| d.in_view);
        let reach = self.cfg.reach_radius;
        let approach = self.approach.contains(&id);
        if in_view && (!approach || dist <= reach) {
            return Some(Action::GoToGrasp { object: id });
        }
        let hidden = self.occluded(obs.pose, target);
        let near = dist <= reach || (!approach && dist <= self.cfg.view_range * 0.8 && self.sight_clear(obs.pose, target));
        if near && !hidden {
            if !self.facing(obs, target) {
                return Some(Action::RotateTo { x: target.x, y: target.y });
            }
            if dist <= reach {
                // right here, facing it, and still unseen: it is gone
                self.memory.remove(&id);
                self.committed = None;
                return None;
            }
        }
        let tolerance = if hidden {
            CELL_SIZE * 1.5
        } else if approach {
            reach * 0.8
        } else {
            reach
        };
        match self.navigate(NavKey::Object(id), NavGoal::Point { target, tolerance }, obs) {
            NavCommand::Act(a) => Some(a),
            NavCommand::Arrived => {
                if !self.facing(obs, target) {
                    Some(Action::RotateTo { x: target.x, y: target.y })
                } else {
                    self.memory.remove(&id);
                    self.committed = None;
                    None
                }
            }
            NavCommand::NoPath | NavCommand::Stuck => {
                let n = self.failures.entry(id).or_insert(0);
                *n += 1;
                if *n >= self.params.max_grasp_failures {
                    self.blacklist.insert(id);
                }
                self.committed = None;
                None
            }
        }
    }

    fn place(&mut self, obs: &Observation) -> Option<Action> {
        let Some(fp) = self.goal else {
            return self.explore(obs);
        };
        if self.in_agent_zone(obs.pose.cell()) {
            self.subgoal = Some(SubGoal {
                kind: SubGoalKind::Place,
                object: None,
                cell: Some(obs.pose.cell()),
            });
            return Some(Action::Drop);
        }
        let zone = self.agent_zone();
        let cmd = if zone.is_empty() {
            let target = fp.closest_point(obs.pose);
            self.subgoal = Some(SubGoal {
                kind: SubGoalKind::Place,
                object: None,
                cell: Some(target.cell()),
            });
            self.navigate(
                NavKey::Goal,
                NavGoal::Point {
                    target,
                    tolerance: self.cfg.goal_radius * 0.9,
                },
                obs,
            )
        } else {
            self.subgoal = Some(SubGoal {
                kind: SubGoalKind::Place,
                object: None,
                cell: zone.iter().next().copied(),
            });
            self.navigate(NavKey::Zone, NavGoal::Cells(zone), obs)
        };
        match cmd {
            NavCommand::Act(a) => Some(a),
            NavCommand::Arrived => {
                if self.in_agent_zone(obs.pose.cell()) {
                    Some(Action::Drop)
                } else {
                    Some(Action::RotateLeft)
                }
            }
            NavCommand::NoPath | NavCommand::Stuck => self.explore(obs),
        }
    }

    fn waypoint_valid(&self, c: Cell) -> bool {
        let map = &self.maps().occupancy;
        if !map.is_explored(c) {
            return !map.is_blocked(c);
        }
        map.is_known_free(c) && c.neighbors4().iter().any(|n| map.contains(*n) && !map.is_explored(*n))
    }

    fn explore(&mut self, obs: &Observation) -> Option<Action> {
        for _ in 0..4 {
            let wp = match self.waypoint.filter(|w| self.waypoint_valid(*w)) {
                Some(w) => w,
                None => {
                    let maps = self.maps.as_ref().expect("reset before act");
                    let w = match explore_frontier(&maps.occupancy, &mut self.rng, &self.bad_waypoints) {
                        Some(w) => {
                            self.past_waypoints.push(w);
                            w
                        }
                        // nothing left to explore: revisit an old waypoint
                        None => *self.past_waypoints.choose(&mut self.rng)?,
                    };
                    self.waypoint = Some(w);
                    w
                }
            };
            self.subgoal = Some(SubGoal {
                kind: SubGoalKind::Exploration,
                object: None,
                cell: Some(wp),
            });
            match self.navigate(NavKey::Waypoint(wp), NavGoal::Cells(BTreeSet::from([wp])), obs) {
                NavCommand::Act(a) => return Some(a),
                NavCommand::Arrived => {
                    self.waypoint = None;
                }
                NavCommand::NoPath | NavCommand::Stuck => {
                    self.bad_waypoints.insert(wp);
                    self.waypoint = None;
                }
            }
        }
        None
    }
}

impl AgentPolicy for HierarchicalAgent {
    fn name(&self) -> &str {
        &self.name
    }

    fn perception(&self) -> Perception {
        self.perception
    }

    fn reset(&mut self, task: &TaskSpec, cfg: &Config, seed: u64, obs: &Observation) {
        let fresh = Self::with_params(&self.name, self.exploration, self.perception, self.params.clone());
        *self = fresh;
        self.cfg = cfg.clone();
        self.task = Some(task.clone());
        self.rng = seeded(derive_seed(seed, "agent"));
        let frame = MapFrame::new(cfg.map_size, obs.pose.cell());
        self.maps = Some(AgentMaps::new(
            frame,
            cfg.occupancy_threshold,
            Some(task.goal_category.name().to_string()),
        ));
    }

    fn act(&mut self, obs: &Observation) -> Action {
        let maps = self.maps.as_mut().expect("reset before act");
        maps.integrate(obs);
        if obs.last_status == Some(ActionStatus::Collision) {
            maps.note_collision(obs.pose, obs.heading, self.cfg.step_length);
        }
        self.update_memory(obs);
        self.note_last_status(obs);
        let mut action = None;
        for _ in 0..MAX_REDECIDE {
            action = self.decide(obs);
            if action.is_some() {
                break;
            }
        }
        let action = action.unwrap_or(Action::RotateLeft);
        self.last_action = Some(action);
        action
    }

    fn maps(&self) -> Option<&AgentMaps> {
        self.maps.as_ref()
    }

    fn subgoal(&self) -> Option<&SubGoal> {
        self.subgoal.as_ref()
    }
}
