//! Physics-lite execution of the challenge actions.
//!
//! A [`World`] owns one episode: the populated scene, the agent body, the
//! interaction budget and the episode RNG. Every action charges at least one
//! step and returns exactly one [`ActionStatus`]; failures are statuses, not
//! errors. Errors are reserved for contract violations such as unknown object
//! ids or acting after the episode ended.

mod observation;
pub mod trace;

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use rand::RngExt;
use serde::{Deserialize, Serialize};

pub use observation::{visible_cells, Detection, HeldItem, Observation};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::geometry::{heading_delta, normalize_heading, segment_cells, Cell, Point};
use crate::mapping::{MapFrame, OccupancyMap};
use crate::nav::{NavCommand, NavGoal, NavParams, Navigator};
use crate::rng::{seeded, SimRng};
use crate::world::{AgentState, GoalZone, ObjectId, ObjectInstance, ObjectKind, Scene, TaskSpec, Terrain};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionStatus {
    Ongoing,
    Success,
    FailedToMove,
    FailedToTurn,
    CannotReach,
    FailedToReach,
    FailedToGrasp,
    NotHolding,
    /// Reserved: no camera articulation is simulated.
    ClampedCameraRotation,
    /// Reserved: no arm articulation is simulated.
    FailedToBend,
    Collision,
    /// Reserved: the body never tips.
    Tipping,
    NotIn,
    StillIn,
}

impl ActionStatus {
    pub const ALL: [ActionStatus; 14] = [
        ActionStatus::Ongoing,
        ActionStatus::Success,
        ActionStatus::FailedToMove,
        ActionStatus::FailedToTurn,
        ActionStatus::CannotReach,
        ActionStatus::FailedToReach,
        ActionStatus::FailedToGrasp,
        ActionStatus::NotHolding,
        ActionStatus::ClampedCameraRotation,
        ActionStatus::FailedToBend,
        ActionStatus::Collision,
        ActionStatus::Tipping,
        ActionStatus::NotIn,
        ActionStatus::StillIn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ActionStatus::Ongoing => "ongoing",
            ActionStatus::Success => "success",
            ActionStatus::FailedToMove => "failed_to_move",
            ActionStatus::FailedToTurn => "failed_to_turn",
            ActionStatus::CannotReach => "cannot_reach",
            ActionStatus::FailedToReach => "failed_to_reach",
            ActionStatus::FailedToGrasp => "failed_to_grasp",
            ActionStatus::NotHolding => "not_holding",
            ActionStatus::ClampedCameraRotation => "clamped_camera_rotation",
            ActionStatus::FailedToBend => "failed_to_bend",
            ActionStatus::Collision => "collision",
            ActionStatus::Tipping => "tipping",
            ActionStatus::NotIn => "not_in",
            ActionStatus::StillIn => "still_in",
        }
    }

    /// Statuses this engine can actually return.
    pub fn is_emitted(self) -> bool {
        !matches!(
            self,
            ActionStatus::Ongoing | ActionStatus::ClampedCameraRotation | ActionStatus::FailedToBend | ActionStatus::Tipping
        )
    }
}

impl fmt::Display for ActionStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The action space: three navigation primitives, the Rotate To navigation
/// call, and the three interactions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    MoveForward,
    RotateLeft,
    RotateRight,
    RotateTo { x: f64, y: f64 },
    GoToGrasp { object: ObjectId },
    PutInContainer,
    Drop,
}

impl Action {
    pub fn name(&self) -> &'static str {
        match self {
            Action::MoveForward => "move_forward",
            Action::RotateLeft => "rotate_left",
            Action::RotateRight => "rotate_right",
            Action::RotateTo { .. } => "rotate_to",
            Action::GoToGrasp { .. } => "go_to_grasp",
            Action::PutInContainer => "put_in_container",
            Action::Drop => "drop",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perception {
    /// Ray-cast field of view from the agent pose.
    Egocentric,
    /// Every cell and object, with `in_view` marking the egocentric subset.
    /// Used by oracle planners only.
    Omniscient,
}

/// Full ground-truth snapshot, for tests and oracles.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneState {
    pub scene: Scene,
    pub agent: AgentState,
    pub zone: GoalZone,
    pub transported: Vec<ObjectId>,
}

/// Upper bound on primitives one go_to_grasp may execute.
const MAX_GRASP_PRIMITIVES: usize = 200;

pub struct World {
    scene: Scene,
    task: TaskSpec,
    cfg: Config,
    agent: AgentState,
    rng: SimRng,
    /// Static per-cell non-traversability (terrain or heavy resting object).
    blocked: Vec<bool>,
    zone: GoalZone,
    /// Everything the body has seen so far; go_to_grasp plans on this.
    memory: OccupancyMap,
    last_status: Option<ActionStatus>,
    waypoints: Vec<Point>,
    target_total: usize,
}

impl World {
    /// Starts an episode. The scene must be populated with a goal furniture
    /// and a spawn; the task's budget bounds the episode.
    pub fn new(scene: Scene, task: TaskSpec, cfg: &Config, seed: u64) -> Result<Self> {
        cfg.validate()?;
        scene.validate(cfg.goal_radius)?;
        let spawn = scene
            .spawn
            .ok_or_else(|| Error::InvalidScene("scene has no agent spawn".into()))?;
        let zone = scene
            .goal_zone(cfg.goal_radius)
            .ok_or_else(|| Error::InvalidScene("scene has no goal furniture".into()))?;
        if scene.grid.width.max(scene.grid.height) > cfg.map_size as i32 / 2 {
            return Err(Error::Config(format!(
                "house of {}x{} cells does not fit a map of {} cells",
                scene.grid.width, scene.grid.height, cfg.map_size
            )));
        }
        let blocked = scene.ground_truth_occupancy();
        let frame = MapFrame::new(cfg.map_size, spawn.pose.cell());
        let target_total = scene.objects.iter().filter(|o| o.kind == ObjectKind::Target).count();
        let mut world = World {
            agent: AgentState::new(spawn.pose, normalize_heading(spawn.heading)),
            memory: OccupancyMap::new(frame, cfg.occupancy_threshold),
            scene,
            task,
            cfg: cfg.clone(),
            rng: seeded(seed),
            blocked,
            zone,
            last_status: None,
            waypoints: Vec::new(),
            target_total,
        };
        world.sense();
        Ok(world)
    }

    pub fn config(&self) -> &Config {
        &self.cfg
    }

    pub fn task(&self) -> &TaskSpec {
        &self.task
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn agent(&self) -> &AgentState {
        &self.agent
    }

    pub fn zone(&self) -> &GoalZone {
        &self.zone
    }

    pub fn budget(&self) -> u32 {
        self.task.budget
    }

    pub fn steps_charged(&self) -> u32 {
        self.agent.steps_charged
    }

    pub fn last_status(&self) -> Option<ActionStatus> {
        self.last_status
    }

    /// Intermediate poses visited by the last composite action.
    pub fn last_waypoints(&self) -> &[Point] {
        &self.waypoints
    }

    pub fn memory(&self) -> &OccupancyMap {
        &self.memory
    }

    pub fn object(&self, id: ObjectId) -> Option<&ObjectInstance> {
        self.scene.object(id)
    }

    fn obj_mut(&mut self, id: ObjectId) -> &mut ObjectInstance {
        let i = self
            .scene
            .objects
            .binary_search_by_key(&id, |o| o.id)
            .expect("object id checked by caller");
        &mut self.scene.objects[i]
    }

    pub fn is_blocked(&self, c: Cell) -> bool {
        !self.scene.grid.in_bounds(c) || self.blocked[self.scene.grid.index(c)]
    }

    pub fn target_total(&self) -> usize {
        self.target_total
    }

    pub fn transported_ids(&self) -> Vec<ObjectId> {
        self.scene
            .objects
            .iter()
            .filter(|o| self.is_transported(o))
            .map(|o| o.id)
            .collect()
    }

    fn is_transported(&self, o: &ObjectInstance) -> bool {
        o.kind == ObjectKind::Target && o.resting && o.contained_in.is_none() && self.zone.contains(o.pose.cell())
    }

    pub fn transported(&self) -> u32 {
        self.scene.objects.iter().filter(|o| self.is_transported(o)).count() as u32
    }

    pub fn is_complete(&self) -> bool {
        self.target_total > 0 && self.transported() as usize == self.target_total
    }

    pub fn is_done(&self) -> bool {
        self.agent.steps_charged >= self.task.budget || self.is_complete()
    }

    pub fn contents(&self, container: ObjectId) -> Vec<ObjectId> {
        self.scene
            .objects
            .iter()
            .filter(|o| o.contained_in == Some(container))
            .map(|o| o.id)
            .collect()
    }

    /// Objects travelling with the agent: arm slots plus held containers' contents.
    pub fn carried(&self) -> BTreeSet<ObjectId> {
        let mut out = BTreeSet::new();
        for id in self.agent.held() {
            out.insert(id);
            out.extend(self.contents(id));
        }
        out
    }

    pub fn scene_state(&self) -> SceneState {
        SceneState {
            scene: self.scene.clone(),
            agent: self.agent.clone(),
            zone: self.zone.clone(),
            transported: self.transported_ids(),
        }
    }

    /// Moves the body without charging steps or touching held items' state.
    /// Scripted oracles use this to sweep a house; agents cannot reach it.
    pub fn place_agent(&mut self, pose: Point, heading: f64) -> Result<()> {
        let c = self.scene.footprint_cell(pose)?;
        if self.is_blocked(c) {
            return Err(Error::InvalidScene(format!("cannot place agent on blocked cell ({}, {})", c.x, c.y)));
        }
        self.agent.pose = pose;
        self.agent.heading = normalize_heading(heading);
        self.sync_carried();
        Ok(())
    }

    // ---- perception ------------------------------------------------------

    fn visible_set(&self) -> Vec<Cell> {
        visible_cells(
            &self.scene.grid,
            self.agent.pose,
            self.agent.heading,
            self.cfg.fov_deg,
            self.cfg.view_range,
        )
    }

    fn sense_cells(&mut self, cells: &[Cell]) {
        for &c in cells {
            let occ = self.is_blocked(c);
            self.memory.record(c, occ);
        }
    }

    fn sense(&mut self) {
        let cells = self.visible_set();
        self.sense_cells(&cells);
    }

    fn held_items(&self) -> [Option<HeldItem>; 2] {
        self.agent.arm_slots.map(|slot| {
            slot.map(|id| {
                let o = self.object(id).expect("held object exists");
                HeldItem {
                    id,
                    kind: o.kind,
                    category: o.category.clone(),
                    contents: self.contents(id),
                }
            })
        })
    }

    fn build_observation(&self, cells: Vec<Cell>, in_view: &[bool], all: bool) -> Observation {
        let grid = &self.scene.grid;
        let carried = self.carried();
        let detections = self
            .scene
            .objects
            .iter()
            .filter(|o| !carried.contains(&o.id))
            .filter_map(|o| {
                let seen = o
                    .footprint_cells()
                    .iter()
                    .any(|c| grid.in_bounds(*c) && in_view[grid.index(*c)]);
                (all || seen).then(|| Detection {
                    id: o.id,
                    category: o.category.clone(),
                    kind: o.kind,
                    pose: o.pose,
                    footprint: o.footprint,
                    contained_in: o.contained_in,
                    in_view: seen,
                })
            })
            .collect();
        Observation {
            visible_cells: cells.into_iter().map(|c| (c, self.is_blocked(c))).collect(),
            detections,
            pose: self.agent.pose,
            heading: self.agent.heading,
            last_status: self.last_status,
            steps_charged: self.agent.steps_charged,
            held: self.held_items(),
        }
    }

    fn view_mask(&self, cells: &[Cell]) -> Vec<bool> {
        let grid = &self.scene.grid;
        let mut mask = vec![false; (grid.width * grid.height) as usize];
        for c in cells {
            mask[grid.index(*c)] = true;
        }
        mask
    }

    /// Egocentric observation. Does not charge a step.
    pub fn observe(&mut self) -> Observation {
        let cells = self.visible_set();
        self.sense_cells(&cells);
        let mask = self.view_mask(&cells);
        self.build_observation(cells, &mask, false)
    }

    /// Ground-truth observation of every cell and uncarried object.
    pub fn observe_omniscient(&mut self) -> Observation {
        let visible = self.visible_set();
        self.sense_cells(&visible);
        let mask = self.view_mask(&visible);
        let all: Vec<Cell> = self.scene.grid.all_cells().collect();
        self.build_observation(all, &mask, true)
    }

    pub fn observe_with(&mut self, mode: Perception) -> Observation {
        match mode {
            Perception::Egocentric => self.observe(),
            Perception::Omniscient => self.observe_omniscient(),
        }
    }

    // ---- actions ---------------------------------------------------------

    /// Executes one action and returns its status.
    pub fn step(&mut self, action: Action) -> Result<ActionStatus> {
        if self.is_done() {
            return Err(Error::EpisodeFinished);
        }
        self.waypoints.clear();
        let status = match action {
            Action::MoveForward => self.move_forward(),
            Action::RotateLeft => self.rotate_by(self.cfg.turn_deg),
            Action::RotateRight => self.rotate_by(-self.cfg.turn_deg),
            Action::RotateTo { x, y } => self.rotate_to(Point::new(x, y))?,
            Action::GoToGrasp { object } => self.go_to_grasp(object)?,
            Action::PutInContainer => self.put_in_container(),
            Action::Drop => self.drop_held(),
        };
        debug_assert!(status != ActionStatus::Ongoing);
        self.last_status = Some(status);
        self.agent.collided_last_action = status == ActionStatus::Collision;
        Ok(status)
    }

    fn remaining(&self) -> u32 {
        self.task.budget.saturating_sub(self.agent.steps_charged)
    }

    fn charge(&mut self, n: u32) {
        self.agent.steps_charged += n;
    }

    fn sync_carried(&mut self) {
        let pose = self.agent.pose;
        for id in self.carried() {
            self.obj_mut(id).pose = pose;
        }
    }

    fn move_forward(&mut self) -> ActionStatus {
        self.charge(1);
        let from = self.agent.pose;
        let to = from.advance(self.agent.heading, self.cfg.step_length);
        let hit = segment_cells(from, to).into_iter().skip(1).find(|c| self.is_blocked(*c));
        match hit {
            None => {
                self.agent.pose = to;
                self.sync_carried();
                ActionStatus::Success
            }
            Some(cell) => {
                if self.is_heavy_obstacle(cell) {
                    self.shake_loose();
                }
                ActionStatus::Collision
            }
        }
    }

    /// Walls, furniture and heavy objects; light obstacles stop the body
    /// without jarring held items loose.
    fn is_heavy_obstacle(&self, c: Cell) -> bool {
        if !self.scene.grid.in_bounds(c) {
            return true;
        }
        match self.scene.grid.terrain(c) {
            Terrain::OccupiedHeavy | Terrain::Furniture => true,
            Terrain::OccupiedLight => false,
            Terrain::Free => true, // blocked free terrain means a heavy object sits there
        }
    }

    fn rotate_by(&mut self, delta: f64) -> ActionStatus {
        self.charge(1);
        self.agent.heading = normalize_heading(self.agent.heading + delta);
        ActionStatus::Success
    }

    fn rotate_to(&mut self, target: Point) -> Result<ActionStatus> {
        if !(target.x.is_finite() && target.y.is_finite()) {
            return Err(Error::PoseOutOfBounds { x: target.x, y: target.y });
        }
        if target.distance(self.agent.pose) < 1e-9 {
            self.charge(1);
            return Ok(ActionStatus::Success);
        }
        let bearing = self.agent.pose.bearing_to(target);
        let delta = heading_delta(self.agent.heading, bearing);
        let quanta = (delta.abs() / self.cfg.turn_deg - 1e-9).ceil().max(1.0) as u32;
        let remaining = self.remaining();
        if quanta > remaining {
            self.charge(remaining);
            let partial = delta.signum() * remaining as f64 * self.cfg.turn_deg;
            self.agent.heading = normalize_heading(self.agent.heading + partial);
            return Ok(ActionStatus::FailedToTurn);
        }
        self.charge(quanta);
        self.agent.heading = bearing;
        Ok(ActionStatus::Success)
    }

    fn go_to_grasp(&mut self, id: ObjectId) -> Result<ActionStatus> {
        let obj = self.object(id).ok_or(Error::UnknownObject(id))?;
        let in_held_container = obj.contained_in.is_some_and(|c| self.agent.is_holding(c));
        if !obj.is_graspable() || self.agent.is_holding(id) || in_held_container || self.agent.free_slot().is_none() {
            self.charge(1);
            return Ok(ActionStatus::FailedToGrasp);
        }
        let target = obj.pose;
        let visible = {
            let cells = self.visible_set();
            obj.footprint_cells().iter().any(|c| cells.contains(c))
        };
        if !visible {
            self.charge(1);
            return Ok(ActionStatus::FailedToReach);
        }
        let reach = self.cfg.reach_radius;
        let mut nav = Navigator::new(
            NavGoal::Point {
                target,
                tolerance: reach,
            },
            NavParams::from(&self.cfg),
        );
        let mut last_ok = true;
        for _ in 0..MAX_GRASP_PRIMITIVES {
            if self.remaining() == 0 {
                return Ok(ActionStatus::FailedToMove);
            }
            let cmd = nav.next(self.agent.pose, self.agent.heading, &self.memory, last_ok);
            let status = match cmd {
                NavCommand::Arrived => {
                    self.charge(1);
                    let slot = self.agent.free_slot().expect("checked above");
                    self.agent.arm_slots[slot] = Some(id);
                    let pose = self.agent.pose;
                    let o = self.obj_mut(id);
                    o.contained_in = None;
                    o.resting = false;
                    o.pose = pose;
                    self.sync_carried();
                    return Ok(ActionStatus::Success);
                }
                NavCommand::NoPath => return Ok(ActionStatus::FailedToMove),
                NavCommand::Stuck => return Ok(ActionStatus::CannotReach),
                NavCommand::Act(Action::MoveForward) => {
                    let s = self.move_forward();
                    if s == ActionStatus::Collision {
                        return Ok(ActionStatus::Collision);
                    }
                    self.waypoints.push(self.agent.pose);
                    s
                }
                NavCommand::Act(Action::RotateLeft) => self.rotate_by(self.cfg.turn_deg),
                NavCommand::Act(Action::RotateRight) => self.rotate_by(-self.cfg.turn_deg),
                NavCommand::Act(Action::RotateTo { x, y }) => {
                    let s = self.rotate_to(Point::new(x, y))?;
                    if s == ActionStatus::FailedToTurn {
                        return Ok(ActionStatus::FailedToMove);
                    }
                    s
                }
                NavCommand::Act(other) => unreachable!("navigator emitted {other:?}"),
            };
            last_ok = status == ActionStatus::Success;
            self.sense();
        }
        Ok(ActionStatus::CannotReach)
    }

    fn put_in_container(&mut self) -> ActionStatus {
        self.charge(1);
        let kinds: Vec<(usize, ObjectId, ObjectKind)> = self
            .agent
            .arm_slots
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.map(|id| (i, id, self.object(id).expect("held").kind)))
            .collect();
        let container = kinds.iter().find(|(_, _, k)| *k == ObjectKind::Container);
        let target = kinds.iter().find(|(_, _, k)| *k == ObjectKind::Target);
        let (Some(&(_, cid, _)), Some(&(slot, tid, _))) = (container, target) else {
            return ActionStatus::NotHolding;
        };
        if self.contents(cid).len() >= self.cfg.container_capacity {
            return ActionStatus::NotIn;
        }
        self.agent.arm_slots[slot] = None;
        let pose = self.agent.pose;
        let t = self.obj_mut(tid);
        t.contained_in = Some(cid);
        t.resting = false;
        t.pose = pose;
        ActionStatus::Success
    }

    fn drop_held(&mut self) -> ActionStatus {
        self.charge(1);
        let held: Vec<ObjectId> = self.agent.held().collect();
        if held.is_empty() {
            return ActionStatus::NotHolding;
        }
        let pose = self.agent.pose;
        let mut still_in = false;
        for id in held {
            self.agent.arm_slots.iter_mut().filter(|s| **s == Some(id)).for_each(|s| *s = None);
            let o = self.obj_mut(id);
            o.resting = true;
            o.pose = pose;
            for content in self.contents(id) {
                if self.cfg.p_still_in > 0.0 && self.rng.random_bool(self.cfg.p_still_in) {
                    still_in = true;
                    continue;
                }
                let o = self.obj_mut(content);
                o.contained_in = None;
                o.resting = true;
                o.pose = pose;
            }
        }
        if still_in {
            ActionStatus::StillIn
        } else {
            ActionStatus::Success
        }
    }

    /// Heavy collision: each held item falls with probability `p_drop`; a
    /// fallen container spills everything it holds.
    fn shake_loose(&mut self) {
        let mut fallen = Vec::new();
        for slot in 0..2 {
            if let Some(id) = self.agent.arm_slots[slot] {
                if self.rng.random_bool(self.cfg.p_drop) {
                    self.agent.arm_slots[slot] = None;
                    fallen.push(id);
                    fallen.extend(self.contents(id));
                }
            }
        }
        if fallen.is_empty() {
            return;
        }
        let spots = self.landing_cells(fallen.len());
        for (id, cell) in fallen.into_iter().zip(spots) {
            let o = self.obj_mut(id);
            o.contained_in = None;
            o.resting = true;
            o.pose = cell.center();
        }
    }

    /// `k` traversable cells nearest the agent in breadth-first order,
    /// preferring cells no other light object rests on.
    fn landing_cells(&self, k: usize) -> Vec<Cell> {
        let start = self.agent.pose.cell();
        let occupied: BTreeSet<Cell> = self
            .scene
            .objects
            .iter()
            .filter(|o| o.resting && o.is_graspable())
            .map(|o| o.pose.cell())
            .collect();
        let mut order = Vec::new();
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(c) = queue.pop_front() {
            order.push(c);
            if order.len() >= k + occupied.len() + 8 {
                break;
            }
            for n in c.neighbors8() {
                if !self.is_blocked(n) && seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
        let mut picks: Vec<Cell> = order.iter().copied().filter(|c| !occupied.contains(c)).take(k).collect();
        while picks.len() < k {
            picks.push(order[picks.len() % order.len()]);
        }
        picks
    }

    /// Checks capacity, containment and conservation. Returns a description
    /// of the first violation.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let held: Vec<ObjectId> = self.agent.held().collect();
        if held.len() > 2 || (held.len() == 2 && held[0] == held[1]) {
            return Err(format!("arm slots invalid: {:?}", self.agent.arm_slots));
        }
        let targets = self.scene.objects.iter().filter(|o| o.kind == ObjectKind::Target).count();
        if targets != self.target_total {
            return Err(format!("target count changed: {targets} != {}", self.target_total));
        }
        for o in &self.scene.objects {
            let in_slot = held.contains(&o.id);
            if in_slot && !o.is_graspable() {
                return Err(format!("object {} is not graspable but held", o.id));
            }
            let states = [o.resting, in_slot, o.contained_in.is_some()];
            if states.iter().filter(|s| **s).count() != 1 {
                return Err(format!("object {} is in {} states at once", o.id, states.iter().filter(|s| **s).count()));
            }
            if let Some(cid) = o.contained_in {
                let c = self.object(cid).ok_or_else(|| format!("object {} in missing container {cid}", o.id))?;
                if c.kind != ObjectKind::Container || c.contained_in.is_some() {
                    return Err(format!("object {} contained by non-container {cid}", o.id));
                }
                if c.pose != o.pose {
                    return Err(format!("object {} drifted from container {cid}", o.id));
                }
                if o.kind != ObjectKind::Target {
                    return Err(format!("non-target {} inside a container", o.id));
                }
            }
            if o.kind == ObjectKind::Container && self.contents(o.id).len() > self.cfg.container_capacity {
                return Err(format!("container {} over capacity", o.id));
            }
            if o.resting && o.is_graspable() && self.is_blocked(o.pose.cell()) {
                return Err(format!("object {} rests on a blocked cell", o.id));
            }
        }
        if self.agent.steps_charged > self.task.budget {
            return Err("steps exceed budget".into());
        }
        Ok(())
    }
}
