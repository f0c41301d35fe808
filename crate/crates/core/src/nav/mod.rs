//! Low-level planning: A* search and the controller that turns grid paths
//! into rotate/move primitives.

pub mod astar;
mod follow;

pub use astar::{astar, octile, BoolGrid, GridPath, Passable};
pub use follow::{astar_on_map, NavCommand, NavGoal, NavParams, Navigator};
