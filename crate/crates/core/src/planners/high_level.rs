//! Rule-based sub-goal selection.

use serde::{Deserialize, Serialize};

use crate::geometry::Cell;
use crate::world::ObjectId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubGoalKind {
    Exploration,
    PickUpContainer,
    PickUpObject,
    Place,
}

/// A resolved sub-goal: the kind plus what it is aimed at.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubGoal {
    pub kind: SubGoalKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object: Option<ObjectId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell: Option<Cell>,
}

/// What the high-level planner looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PlannerState {
    pub steps_charged: u32,
    pub budget: u32,
    /// A container has been detected at some point in the episode.
    pub container_found: bool,
    pub container_held: bool,
    /// A container is known, not held, and still worth trying.
    pub container_available: bool,
    /// Known targets not yet carried or delivered.
    pub targets_known: usize,
    /// Targets in arm slots.
    pub targets_in_arms: usize,
    /// Targets travelling with the agent (arms plus held container).
    pub carrying: usize,
    pub free_slots: usize,
    /// Free space in the held container, zero if none is held.
    pub container_space: usize,
    /// Required targets not yet delivered.
    pub remaining_required: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RuleParams {
    /// Budget fraction after which targets are picked up without a container.
    pub object_gate: f64,
    /// Budget fraction after which anything carried is placed.
    pub place_gate: f64,
}

impl Default for RuleParams {
    fn default() -> Self {
        RuleParams {
            object_gate: 0.2,
            place_gate: 0.9,
        }
    }
}

impl PlannerState {
    pub fn capacity_left(&self) -> usize {
        self.free_slots + self.container_space
    }

    fn used(&self, fraction: f64) -> bool {
        self.steps_charged as f64 >= fraction * self.budget as f64
    }
}

/// Picks the sub-goal kind. Rules are checked in order:
///
/// 1. carrying something and past the place gate: Place
/// 2. no container ever found and two targets in arms: Place
/// 3. carrying something and no capacity left: Place
/// 4. carrying everything still required: Place
/// 5. no container held, one available, and a free slot: PickUpContainer
/// 6. a target is known, there is room, and a container is held or the
///    object gate has passed: PickUpObject
/// 7. otherwise Exploration
pub fn high_level_step(s: &PlannerState, p: &RuleParams) -> SubGoalKind {
    let carrying = s.carrying > 0;
    if carrying && s.used(p.place_gate) {
        return SubGoalKind::Place;
    }
    if !s.container_found && s.targets_in_arms >= 2 {
        return SubGoalKind::Place;
    }
    if carrying && s.capacity_left() == 0 {
        return SubGoalKind::Place;
    }
    if carrying && s.carrying >= s.remaining_required {
        return SubGoalKind::Place;
    }
    if !s.container_held && s.container_available && s.free_slots > 0 {
        return SubGoalKind::PickUpContainer;
    }
    if s.targets_known > 0 && s.capacity_left() > 0 && (s.container_held || s.used(p.object_gate)) {
        return SubGoalKind::PickUpObject;
    }
    SubGoalKind::Exploration
}
