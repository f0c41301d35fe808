use crate::error::Result;
use crate::mapping::AgentMaps;
use crate::nav::{NavCommand, NavGoal, NavParams, Navigator};
use crate::sim::{ActionStatus, World};

/// Drives `world` to `goal` with primitives, integrating every observation
/// into `maps` and replanning as the navigator decides.
///
/// Returns `success` on arrival, `failed_to_move` when no path exists after
/// the allowed replans or the budget runs out, and `cannot_reach` when the
/// navigator stops making progress.
pub fn follow_path(world: &mut World, maps: &mut AgentMaps, goal: NavGoal, params: NavParams) -> Result<ActionStatus> {
    let mut nav = Navigator::new(goal, params);
    let mut last_ok = true;
    loop {
        let obs = world.observe();
        maps.integrate(&obs);
        if !last_ok && obs.last_status == Some(ActionStatus::Collision) {
            maps.note_collision(obs.pose, obs.heading, params.step_length);
        }
        match nav.next(obs.pose, obs.heading, &maps.occupancy, last_ok) {
            NavCommand::Arrived => return Ok(ActionStatus::Success),
            NavCommand::NoPath => return Ok(ActionStatus::FailedToMove),
            NavCommand::Stuck => return Ok(ActionStatus::CannotReach),
            NavCommand::Act(action) => {
                if world.is_done() {
                    return Ok(ActionStatus::FailedToMove);
                }
                last_ok = world.step(action)? == ActionStatus::Success;
            }
        }
    }
}
