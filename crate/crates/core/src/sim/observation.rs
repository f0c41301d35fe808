use serde::{Deserialize, Serialize};

use crate::geometry::{heading_delta, segment_cells, Cell, CellRect, Point, CELL_SIZE};
use crate::sim::ActionStatus;
use crate::world::{ObjectId, ObjectKind, SceneGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub id: ObjectId,
    pub category: String,
    pub kind: ObjectKind,
    pub pose: Point,
    pub footprint: Option<CellRect>,
    pub contained_in: Option<ObjectId>,
    /// False only for omniscient observations reporting objects outside the
    /// agent's actual view.
    pub in_view: bool,
}

/// What the agent is carrying in one arm slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeldItem {
    pub id: ObjectId,
    pub kind: ObjectKind,
    pub category: String,
    pub contents: Vec<ObjectId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    /// Visible cells with their occupied flag, in row-major order.
    pub visible_cells: Vec<(Cell, bool)>,
    pub detections: Vec<Detection>,
    pub pose: Point,
    pub heading: f64,
    pub last_status: Option<ActionStatus>,
    pub steps_charged: u32,
    pub held: [Option<HeldItem>; 2],
}

impl Observation {
    pub fn detection(&self, id: ObjectId) -> Option<&Detection> {
        self.detections.iter().find(|d| d.id == id)
    }

    pub fn held_ids(&self) -> impl Iterator<Item = ObjectId> + '_ {
        self.held.iter().flatten().map(|h| h.id)
    }
}

/// Cells seen from `pose`: the agent's own cell, plus every in-bounds cell
/// whose center lies within `range` meters and `fov_deg / 2` of `heading`
/// and whose sight line crosses no opaque cell before reaching it.
pub fn visible_cells(grid: &SceneGrid, pose: Point, heading: f64, fov_deg: f64, range: f64) -> Vec<Cell> {
    let own = pose.cell();
    let r = (range / CELL_SIZE).ceil() as i32 + 1;
    let half = fov_deg / 2.0;
    let mut out = Vec::new();
    for y in (own.y - r)..=(own.y + r) {
        for x in (own.x - r)..=(own.x + r) {
            let c = Cell::new(x, y);
            if !grid.in_bounds(c) {
                continue;
            }
            if c == own {
                out.push(c);
                continue;
            }
            let center = c.center();
            if pose.distance(center) > range + 1e-9 {
                continue;
            }
            if heading_delta(heading, pose.bearing_to(center)).abs() > half + 1e-9 {
                continue;
            }
            let ray = segment_cells(pose, center);
            let clear = ray[..ray.len() - 1]
                .iter()
                .all(|s| !grid.terrain_or_wall(*s).is_opaque());
            if clear {
                out.push(c);
            }
        }
    }
    out
}
