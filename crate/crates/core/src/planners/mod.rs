//! Agents: the hierarchical planner (rule-based sub-goals over A*
//! navigation) with two exploration strategies, an omniscient oracle, and a
//! random lower-bound baseline.

mod exploration;
mod follow;
mod hierarchical;
mod high_level;
mod random;

use std::fmt;
use std::str::FromStr;

pub use exploration::{explore_frontier, explore_greedy_semantic, path_cost};
pub use follow::follow_path;
pub use hierarchical::{AgentParams, Exploration, HierarchicalAgent};
pub use high_level::{high_level_step, PlannerState, RuleParams, SubGoal, SubGoalKind};
pub use random::{random_agent_step, RandomAgent};

use crate::config::Config;
use crate::error::Error;
use crate::mapping::AgentMaps;
use crate::sim::{Action, Observation, Perception};
use crate::world::TaskSpec;

/// Anything that maps observations to actions for one episode at a time.
pub trait AgentPolicy: Send {
    fn name(&self) -> &str;

    /// What the harness should feed to [`AgentPolicy::act`].
    fn perception(&self) -> Perception {
        Perception::Egocentric
    }

    /// Starts a new episode. `obs` is the observation at the spawn.
    fn reset(&mut self, task: &TaskSpec, cfg: &Config, seed: u64, obs: &Observation);

    fn act(&mut self, obs: &Observation) -> Action;

    fn maps(&self) -> Option<&AgentMaps> {
        None
    }

    /// Current sub-goal, for agents that have one.
    fn subgoal(&self) -> Option<&SubGoal> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AgentKind {
    Frontier,
    GreedySemantic,
    Random,
    Oracle,
}

impl AgentKind {
    pub const ALL: [AgentKind; 4] = [AgentKind::Frontier, AgentKind::GreedySemantic, AgentKind::Random, AgentKind::Oracle];

    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Frontier => "frontier",
            AgentKind::GreedySemantic => "greedy-semantic",
            AgentKind::Random => "random",
            AgentKind::Oracle => "oracle",
        }
    }

    pub fn build(self) -> Box<dyn AgentPolicy> {
        match self {
            AgentKind::Frontier => Box::new(HierarchicalAgent::new(Exploration::Frontier)),
            AgentKind::GreedySemantic => Box::new(HierarchicalAgent::new(Exploration::GreedySemantic)),
            AgentKind::Random => Box::new(RandomAgent::new()),
            AgentKind::Oracle => Box::new(HierarchicalAgent::oracle()),
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AgentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        AgentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown agent `{s}` (expected frontier, greedy-semantic, random or oracle)")))
    }
}
