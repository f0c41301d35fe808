use rand::seq::IndexedRandom;
use rand::RngExt;

use super::hierarchical::zone_contains;
use super::AgentPolicy;
use crate::config::Config;
use crate::geometry::CellRect;
use crate::mapping::{AgentMaps, MapFrame};
use crate::rng::{derive_seed, seeded, SimRng};
use crate::sim::{Action, ActionStatus, Observation};
use crate::world::{ObjectKind, TaskSpec};

/// One step of the random baseline. Drops when `in_zone` and holding
/// something; otherwise, with a free slot and a visible graspable object,
/// tries to grasp one with probability 0.5; otherwise a uniform motion
/// primitive.
pub fn random_agent_step(obs: &Observation, in_zone: bool, rng: &mut SimRng) -> Action {
    let holding = obs.held.iter().any(Option::is_some);
    if in_zone && holding {
        return Action::Drop;
    }
    let free = obs.held.iter().any(Option::is_none);
    let visible: Vec<_> = obs
        .detections
        .iter()
        .filter(|d| d.in_view && matches!(d.kind, ObjectKind::Target | ObjectKind::Container))
        .collect();
    if free && !visible.is_empty() && rng.random_bool(0.5) {
        let d = visible.choose(rng).expect("nonempty");
        return Action::GoToGrasp { object: d.id };
    }
    *[Action::MoveForward, Action::RotateLeft, Action::RotateRight]
        .choose(rng)
        .expect("nonempty")
}

/// Lower-bound baseline: random motion with opportunistic grasps and drops.
pub struct RandomAgent {
    rng: SimRng,
    maps: Option<AgentMaps>,
    goal: Option<CellRect>,
    goal_category: String,
    radius: f64,
    step: f64,
}

impl RandomAgent {
    pub fn new() -> Self {
        RandomAgent {
            rng: seeded(0),
            maps: None,
            goal: None,
            goal_category: String::new(),
            radius: 1.0,
            step: 0.5,
        }
    }
}

impl Default for RandomAgent {
    fn default() -> Self {
        Self::new()
    }
}

impl AgentPolicy for RandomAgent {
    fn name(&self) -> &str {
        "random"
    }

    fn reset(&mut self, task: &TaskSpec, cfg: &Config, seed: u64, obs: &Observation) {
        self.rng = seeded(derive_seed(seed, "agent"));
        self.goal_category = task.goal_category.name().to_string();
        self.maps = Some(AgentMaps::new(
            MapFrame::new(cfg.map_size, obs.pose.cell()),
            cfg.occupancy_threshold,
            Some(self.goal_category.clone()),
        ));
        self.goal = None;
        self.radius = cfg.goal_radius;
        self.step = cfg.step_length;
    }

    fn act(&mut self, obs: &Observation) -> Action {
        let maps = self.maps.as_mut().expect("reset before act");
        maps.integrate(obs);
        if obs.last_status == Some(ActionStatus::Collision) {
            maps.note_collision(obs.pose, obs.heading, self.step);
        }
        for d in &obs.detections {
            if d.kind == ObjectKind::Furniture && d.category == self.goal_category {
                self.goal = d.footprint;
            }
        }
        let in_zone = self
            .goal
            .is_some_and(|fp| zone_contains(&maps.occupancy, &fp, self.radius, obs.pose.cell()));
        random_agent_step(obs, in_zone, &mut self.rng)
    }

    fn maps(&self) -> Option<&AgentMaps> {
        self.maps.as_ref()
    }
}
