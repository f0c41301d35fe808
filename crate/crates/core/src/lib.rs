//! Long-horizon object transport in procedurally generated houses.
//!
//! The crate covers the whole pipeline: house and task generation
//! ([`taskgen`], [`suite`]), a grid simulator with a physics-lite action layer
//! ([`sim`]), egocentric mapping ([`mapping`]), A* navigation ([`nav`]),
//! hierarchical and baseline agents ([`planners`]), the benchmark harness
//! ([`harness`]) and trace rendering ([`render`]).

pub mod config;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod mapping;
pub mod nav;
pub mod planners;
pub mod render;
pub mod pnm;
pub mod rng;
pub mod scene_io;
pub mod sim;
pub mod suite;
pub mod taskgen;
pub mod world;

pub use config::Config;
pub use error::{Error, Result};
pub use geometry::{Cell, CellRect, Point, CELL_SIZE};
pub use sim::{Action, ActionStatus, Observation, World};
pub use world::{GoalCategory, ObjectId, ObjectInstance, ObjectKind, Scene, TaskSpec, Terrain};
