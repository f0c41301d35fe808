//! Ground-truth house representation: terrain grid, rooms, objects, goal zone
//! and the agent's physical state.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Cell, CellRect, Point, CELL_SIZE};

pub type ObjectId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Terrain {
    Free,
    OccupiedHeavy,
    OccupiedLight,
    Furniture,
}

impl Terrain {
    pub(crate) fn code(self) -> char {
        match self {
            Terrain::Free => 'F',
            Terrain::OccupiedHeavy => 'H',
            Terrain::OccupiedLight => 'L',
            Terrain::Furniture => 'U',
        }
    }

    pub(crate) fn from_code(c: char) -> Option<Self> {
        Some(match c {
            'F' => Terrain::Free,
            'H' => Terrain::OccupiedHeavy,
            'L' => Terrain::OccupiedLight,
            'U' => Terrain::Furniture,
            _ => return None,
        })
    }

    /// Walls block sight; everything else is low enough to see over.
    pub fn is_opaque(self) -> bool {
        matches!(self, Terrain::OccupiedHeavy)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoomRegion {
    pub id: u32,
    /// Bounding rectangle of the room interior; every cell of it belongs to the room.
    pub rect: CellRect,
}

impl RoomRegion {
    pub fn contains(&self, c: Cell) -> bool {
        self.rect.contains(c)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SceneGrid {
    pub width: i32,
    pub height: i32,
    cells: Vec<Terrain>,
    pub rooms: Vec<RoomRegion>,
    pub doorways: Vec<Cell>,
}

impl SceneGrid {
    pub fn new(width: i32, height: i32, fill: Terrain) -> Self {
        assert!(width > 0 && height > 0, "grid must be nonempty");
        SceneGrid {
            width,
            height,
            cells: vec![fill; (width * height) as usize],
            rooms: Vec::new(),
            doorways: Vec::new(),
        }
    }

    pub fn cell_size(&self) -> f64 {
        CELL_SIZE
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.x >= 0 && c.y >= 0 && c.x < self.width && c.y < self.height
    }

    pub fn index(&self, c: Cell) -> usize {
        debug_assert!(self.in_bounds(c));
        (c.y * self.width + c.x) as usize
    }

    pub fn cell_at(&self, index: usize) -> Cell {
        Cell::new(index as i32 % self.width, index as i32 / self.width)
    }

    pub fn terrain(&self, c: Cell) -> Terrain {
        self.cells[self.index(c)]
    }

    /// Terrain, treating out-of-bounds cells as wall.
    pub fn terrain_or_wall(&self, c: Cell) -> Terrain {
        if self.in_bounds(c) {
            self.terrain(c)
        } else {
            Terrain::OccupiedHeavy
        }
    }

    pub fn set(&mut self, c: Cell, t: Terrain) {
        let i = self.index(c);
        self.cells[i] = t;
    }

    pub fn fill_rect(&mut self, r: CellRect, t: Terrain) {
        for c in r.cells() {
            if self.in_bounds(c) {
                self.set(c, t);
            }
        }
    }

    pub fn all_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.height).flat_map(move |y| (0..self.width).map(move |x| Cell::new(x, y)))
    }

    pub fn room_of(&self, c: Cell) -> Option<&RoomRegion> {
        self.rooms.iter().find(|r| r.contains(c))
    }

    pub fn bounds_m(&self) -> (f64, f64) {
        (self.width as f64 * CELL_SIZE, self.height as f64 * CELL_SIZE)
    }

    /// Cell containing `pose`, half-open on both axes.
    pub fn footprint_cell(&self, pose: Point) -> Result<Cell> {
        let (w, h) = self.bounds_m();
        if !(pose.x >= 0.0 && pose.y >= 0.0 && pose.x < w && pose.y < h) {
            return Err(Error::PoseOutOfBounds { x: pose.x, y: pose.y });
        }
        Ok(pose.cell())
    }

    pub(crate) fn terrain_slice(&self) -> &[Terrain] {
        &self.cells
    }

    /// Checks the structural invariants: disjoint in-bounds rooms and
    /// connectivity of every room through free and doorway cells.
    pub fn validate_structure(&self) -> Result<()> {
        let mut owner: BTreeMap<Cell, u32> = BTreeMap::new();
        for room in &self.rooms {
            for c in room.rect.cells() {
                if !self.in_bounds(c) {
                    return Err(Error::InvalidScene(format!("room {} leaves the grid", room.id)));
                }
                if let Some(other) = owner.insert(c, room.id) {
                    return Err(Error::InvalidScene(format!(
                        "rooms {other} and {} overlap at ({}, {})",
                        room.id, c.x, c.y
                    )));
                }
            }
        }
        for d in &self.doorways {
            if !self.in_bounds(*d) {
                return Err(Error::InvalidScene(format!("doorway ({}, {}) out of bounds", d.x, d.y)));
            }
        }
        let Some(first) = self.rooms.first() else {
            return Ok(());
        };
        let doorways: BTreeSet<Cell> = self.doorways.iter().copied().collect();
        let open = |c: Cell| self.in_bounds(c) && (self.terrain(c) == Terrain::Free || doorways.contains(&c));
        let Some(seed) = first.rect.cells().find(|c| open(*c)) else {
            return Err(Error::InvalidScene(format!("room {} has no free cell", first.id)));
        };
        let reached = flood_fill(seed, open);
        for room in &self.rooms {
            if !room.rect.cells().any(|c| reached.contains(&c)) {
                return Err(Error::InvalidScene(format!("room {} is disconnected", room.id)));
            }
        }
        Ok(())
    }
}

/// 4-connected flood fill from `seed` over cells accepted by `open`.
pub fn flood_fill(seed: Cell, open: impl Fn(Cell) -> bool) -> BTreeSet<Cell> {
    let mut seen = BTreeSet::new();
    if !open(seed) {
        return seen;
    }
    let mut queue = VecDeque::from([seed]);
    seen.insert(seed);
    while let Some(c) = queue.pop_front() {
        for n in c.neighbors4() {
            if !seen.contains(&n) && open(n) {
                seen.insert(n);
                queue.push_back(n);
            }
        }
    }
    seen
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectKind {
    Target,
    Container,
    Furniture,
    Clutter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MassClass {
    Light,
    Heavy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectInstance {
    pub id: ObjectId,
    pub category: String,
    pub kind: ObjectKind,
    pub pose: Point,
    pub mass_class: MassClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contained_in: Option<ObjectId>,
    pub resting: bool,
    /// Cells covered by furniture; other objects occupy only their pose cell.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub footprint: Option<CellRect>,
}

impl ObjectInstance {
    pub fn footprint_cells(&self) -> Vec<Cell> {
        match self.footprint {
            Some(r) => r.cells().collect(),
            None => vec![self.pose.cell()],
        }
    }

    /// Resting objects that stop the agent: furniture and heavy clutter.
    pub fn blocks_traversal(&self) -> bool {
        self.resting && (self.kind == ObjectKind::Furniture || self.mass_class == MassClass::Heavy)
    }

    pub fn is_graspable(&self) -> bool {
        matches!(self.kind, ObjectKind::Target | ObjectKind::Container) && self.mass_class == MassClass::Light
    }

    pub fn check_invariants(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidScene(format!("object {}: {m}", self.id)));
        if self.contained_in.is_some() && self.kind != ObjectKind::Target {
            return bad("only targets can be contained");
        }
        if self.kind == ObjectKind::Furniture && self.mass_class != MassClass::Heavy {
            return bad("furniture must be heavy");
        }
        if matches!(self.kind, ObjectKind::Target | ObjectKind::Container) && self.mass_class != MassClass::Light {
            return bad("targets and containers must be light");
        }
        if self.kind == ObjectKind::Furniture && self.footprint.is_none() {
            return bad("furniture needs a footprint");
        }
        Ok(())
    }
}

/// Furniture categories that can serve as the goal position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoalCategory {
    Sofa,
    Bench,
    Table,
    CoffeeTable,
    Bed,
}

impl GoalCategory {
    pub const ALL: [GoalCategory; 5] = [
        GoalCategory::Sofa,
        GoalCategory::Bench,
        GoalCategory::Table,
        GoalCategory::CoffeeTable,
        GoalCategory::Bed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GoalCategory::Sofa => "sofa",
            GoalCategory::Bench => "bench",
            GoalCategory::Table => "table",
            GoalCategory::CoffeeTable => "coffee_table",
            GoalCategory::Bed => "bed",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|g| g.name() == s)
    }
}

impl fmt::Display for GoalCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoalZone {
    pub furniture_id: ObjectId,
    pub furniture_category: GoalCategory,
    pub footprint: CellRect,
    pub zone_cells: BTreeSet<Cell>,
}

impl GoalZone {
    pub fn contains(&self, c: Cell) -> bool {
        self.zone_cells.contains(&c)
    }
}

/// Whether `c` lies in the deposit zone of a furniture footprint: its center is
/// within `radius` of the footprint and the straight line to the footprint
/// crosses no wall. `wall` answers for any cell, in or out of bounds.
pub fn in_deposit_zone(footprint: &CellRect, radius: f64, c: Cell, wall: impl Fn(Cell) -> bool) -> bool {
    let center = c.center();
    if footprint.distance_to(center) > radius {
        return false;
    }
    if footprint.contains(c) {
        return true;
    }
    let target = footprint.closest_point(center);
    // nudge the end point inside the footprint so the final cell is furniture
    let inner = Point::new(
        target.x + (target.x - center.x).signum() * 1e-6,
        target.y + (target.y - center.y).signum() * 1e-6,
    );
    crate::geometry::segment_cells(center, inner)
        .into_iter()
        .filter(|s| !footprint.contains(*s))
        .all(|s| !wall(s))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub pose: Point,
    pub heading: f64,
    pub arm_slots: [Option<ObjectId>; 2],
    pub steps_charged: u32,
    pub collided_last_action: bool,
}

impl AgentState {
    pub fn new(pose: Point, heading: f64) -> Self {
        AgentState {
            pose,
            heading,
            arm_slots: [None, None],
            steps_charged: 0,
            collided_last_action: false,
        }
    }

    pub fn held(&self) -> impl Iterator<Item = ObjectId> + '_ {
        self.arm_slots.iter().flatten().copied()
    }

    pub fn free_slot(&self) -> Option<usize> {
        self.arm_slots.iter().position(Option::is_none)
    }

    pub fn is_holding(&self, id: ObjectId) -> bool {
        self.arm_slots.contains(&Some(id))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    /// Target category -> number of instances to transport.
    pub required: BTreeMap<String, u32>,
    pub goal_category: GoalCategory,
    pub budget: u32,
    pub seed: u64,
}

impl TaskSpec {
    pub fn total_required(&self) -> u32 {
        self.required.values().sum()
    }

    /// Renders the task in the `vase:2, bowl:2, jug:1; bed` style.
    pub fn describe(&self) -> String {
        let parts: Vec<String> = self.required.iter().map(|(k, v)| format!("{k}:{v}")).collect();
        format!("{}; {}", parts.join(", "), self.goal_category)
    }

    pub fn check_invariants(&self) -> Result<()> {
        let total = self.total_required();
        if !(6..=8).contains(&total) {
            return Err(Error::InvalidScene(format!("task requires {total} targets, expected 6-8")));
        }
        if self.required.values().any(|&n| n == 0) {
            return Err(Error::InvalidScene("task has a zero count".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spawn {
    pub pose: Point,
    pub heading: f64,
}

/// A house, optionally populated with a task: grid, objects, goal furniture
/// and agent spawn.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub id: String,
    pub grid: SceneGrid,
    /// Sorted by id.
    pub objects: Vec<ObjectInstance>,
    pub goal_furniture: Option<ObjectId>,
    pub spawn: Option<Spawn>,
}

impl Scene {
    pub fn new(id: impl Into<String>, grid: SceneGrid) -> Self {
        Scene {
            id: id.into(),
            grid,
            objects: Vec::new(),
            goal_furniture: None,
            spawn: None,
        }
    }

    pub fn object(&self, id: ObjectId) -> Option<&ObjectInstance> {
        self.objects
            .binary_search_by_key(&id, |o| o.id)
            .ok()
            .map(|i| &self.objects[i])
    }

    pub fn next_object_id(&self) -> ObjectId {
        self.objects.last().map_or(0, |o| o.id + 1)
    }

    pub fn add_object(&mut self, obj: ObjectInstance) {
        let pos = self.objects.partition_point(|o| o.id < obj.id);
        self.objects.insert(pos, obj);
    }

    pub fn footprint_cell(&self, pose: Point) -> Result<Cell> {
        self.grid.footprint_cell(pose)
    }

    /// Per-cell blocking mask from resting furniture and heavy objects.
    pub fn blocking_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; (self.grid.width * self.grid.height) as usize];
        for o in self.objects.iter().filter(|o| o.blocks_traversal()) {
            for c in o.footprint_cells() {
                if self.grid.in_bounds(c) {
                    mask[self.grid.index(c)] = true;
                }
            }
        }
        mask
    }

    pub fn is_traversable(&self, c: Cell) -> Result<bool> {
        if !self.grid.in_bounds(c) {
            return Err(Error::CellOutOfBounds(c));
        }
        if self.grid.terrain(c) != Terrain::Free {
            return Ok(false);
        }
        Ok(!self
            .objects
            .iter()
            .any(|o| o.blocks_traversal() && o.footprint_cells().contains(&c)))
    }

    /// Row-major mask, `true` where the cell is not traversable.
    pub fn ground_truth_occupancy(&self) -> Vec<bool> {
        let blocked = self.blocking_mask();
        self.grid
            .terrain_slice()
            .iter()
            .zip(blocked)
            .map(|(t, b)| *t != Terrain::Free || b)
            .collect()
    }

    pub fn goal_zone(&self, radius: f64) -> Option<GoalZone> {
        let furniture = self.object(self.goal_furniture?)?;
        let footprint = furniture.footprint?;
        let category = GoalCategory::from_name(&furniture.category)?;
        let r_cells = (radius / CELL_SIZE).ceil() as i32 + 1;
        let search = CellRect::new(
            footprint.x0 - r_cells,
            footprint.y0 - r_cells,
            footprint.w + 2 * r_cells,
            footprint.h + 2 * r_cells,
        );
        let wall = |c: Cell| self.grid.terrain_or_wall(c).is_opaque();
        let zone_cells = search
            .cells()
            .filter(|c| self.grid.in_bounds(*c))
            .filter(|c| in_deposit_zone(&footprint, radius, *c, wall))
            .collect();
        Some(GoalZone {
            furniture_id: furniture.id,
            furniture_category: category,
            footprint,
            zone_cells,
        })
    }

    /// Checks every world-model invariant that can be checked statically.
    pub fn validate(&self, goal_radius: f64) -> Result<()> {
        self.grid.validate_structure()?;
        if self.objects.windows(2).any(|w| w[0].id >= w[1].id) {
            return Err(Error::InvalidScene("object ids must be unique and sorted".into()));
        }
        for o in &self.objects {
            o.check_invariants()?;
            for c in o.footprint_cells() {
                if !self.grid.in_bounds(c) {
                    return Err(Error::InvalidScene(format!("object {} out of bounds", o.id)));
                }
            }
            if let Some(cid) = o.contained_in {
                let Some(container) = self.object(cid) else {
                    return Err(Error::InvalidScene(format!("object {} in unknown container {cid}", o.id)));
                };
                if container.kind != ObjectKind::Container {
                    return Err(Error::InvalidScene(format!("object {} contained in non-container", o.id)));
                }
                if container.pose != o.pose {
                    return Err(Error::InvalidScene(format!("object {} pose differs from container", o.id)));
                }
            }
        }
        if let Some(gid) = self.goal_furniture {
            let Some(goal) = self.object(gid) else {
                return Err(Error::InvalidScene(format!("goal furniture {gid} missing")));
            };
            if goal.kind != ObjectKind::Furniture || GoalCategory::from_name(&goal.category).is_none() {
                return Err(Error::InvalidScene(format!("object {gid} cannot be a goal")));
            }
            let same = self
                .objects
                .iter()
                .filter(|o| o.kind == ObjectKind::Furniture && o.category == goal.category)
                .count();
            if same != 1 {
                return Err(Error::InvalidScene(format!(
                    "goal category {} appears {same} times",
                    goal.category
                )));
            }
            let zone = self.goal_zone(goal_radius).expect("goal furniture present");
            let occupancy = self.ground_truth_occupancy();
            if !zone.zone_cells.iter().any(|c| !occupancy[self.grid.index(*c)]) {
                return Err(Error::InvalidScene("goal zone has no free cell".into()));
            }
        }
        if let Some(spawn) = self.spawn {
            let c = self.footprint_cell(spawn.pose)?;
            if !self.is_traversable(c)? {
                return Err(Error::InvalidScene("agent spawns on a blocked cell".into()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;

    /// A walled rectangle with a free interior, registered as a single room.
    pub fn walled_room(width: i32, height: i32) -> SceneGrid {
        let mut g = SceneGrid::new(width, height, Terrain::OccupiedHeavy);
        let interior = CellRect::new(1, 1, width - 2, height - 2);
        g.fill_rect(interior, Terrain::Free);
        g.rooms.push(RoomRegion { id: 0, rect: interior });
        g
    }

    pub fn furniture(id: ObjectId, category: &str, rect: CellRect) -> ObjectInstance {
        ObjectInstance {
            id,
            category: category.into(),
            kind: ObjectKind::Furniture,
            pose: rect.center(),
            mass_class: MassClass::Heavy,
            contained_in: None,
            resting: true,
            footprint: Some(rect),
        }
    }

    pub fn light(id: ObjectId, category: &str, kind: ObjectKind, cell: Cell) -> ObjectInstance {
        ObjectInstance {
            id,
            category: category.into(),
            kind,
            pose: cell.center(),
            mass_class: MassClass::Light,
            contained_in: None,
            resting: true,
            footprint: None,
        }
    }

    /// Places furniture and stamps its footprint into the terrain.
    pub fn place_furniture(scene: &mut Scene, obj: ObjectInstance) {
        scene.grid.fill_rect(obj.footprint.unwrap(), Terrain::Furniture);
        scene.add_object(obj);
    }
}
