//! Procedural houses and transport tasks.
//!
//! Houses are binary-space partitions of a walled rectangle into 6-8 rooms,
//! connected by 3-cell doorways along a random spanning tree of the room
//! adjacency graph (plus occasional extra doors), then furnished while
//! keeping every room at least half free and all free space connected.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::RngExt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Cell, CellRect};
use crate::rng::{derive_seed, seeded, SimRng};
use crate::world::{
    GoalCategory, MassClass, ObjectInstance, ObjectKind, RoomRegion, Scene, SceneGrid, Spawn, TaskSpec, Terrain,
};

pub const TARGET_CATEGORIES: [&str; 5] = ["vase", "bowl", "jug", "cup", "toy"];
pub const CONTAINER_CATEGORY: &str = "basket";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HouseParams {
    pub width: i32,
    pub height: i32,
    pub min_rooms: usize,
    pub max_rooms: usize,
    pub min_room_side: i32,
    pub door_width: i32,
    /// Chance of a doorway on each adjacency not used by the spanning tree.
    pub extra_door_prob: f64,
    pub goal_furniture: (usize, usize),
    pub furniture_per_room: (usize, usize),
    pub light_obstacles_per_room: (usize, usize),
    pub heavy_clutter_per_room: (usize, usize),
    pub light_clutter_per_room: (usize, usize),
    pub max_retries: usize,
}

impl Default for HouseParams {
    fn default() -> Self {
        HouseParams {
            width: 40,
            height: 40,
            min_rooms: 6,
            max_rooms: 8,
            min_room_side: 7,
            door_width: 3,
            extra_door_prob: 0.25,
            goal_furniture: (2, 5),
            furniture_per_room: (1, 3),
            light_obstacles_per_room: (0, 2),
            heavy_clutter_per_room: (0, 1),
            light_clutter_per_room: (0, 2),
            max_retries: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskParams {
    pub min_targets: u32,
    pub max_targets: u32,
    pub categories: Vec<String>,
    pub container_prob: f64,
    pub budget: u32,
    pub goal_radius: f64,
    pub max_retries: usize,
}

impl Default for TaskParams {
    fn default() -> Self {
        TaskParams {
            min_targets: 6,
            max_targets: 8,
            categories: TARGET_CATEGORIES.iter().map(|s| s.to_string()).collect(),
            container_prob: 0.25,
            budget: 1000,
            goal_radius: 1.0,
            max_retries: 100,
        }
    }
}

/// A house populated with one task.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedTask {
    pub scene: Scene,
    pub spec: TaskSpec,
}

fn goal_size(cat: GoalCategory) -> (i32, i32) {
    match cat {
        GoalCategory::Sofa => (4, 2),
        GoalCategory::Bench => (3, 1),
        GoalCategory::Table => (3, 2),
        GoalCategory::CoffeeTable => (2, 2),
        GoalCategory::Bed => (4, 3),
    }
}

const OTHER_FURNITURE: [(&str, i32, i32); 4] = [("cabinet", 2, 1), ("shelf", 3, 1), ("chair", 1, 1), ("dresser", 2, 1)];
const HEAVY_CLUTTER: [&str; 2] = ["crate", "box"];
const LIGHT_CLUTTER: [&str; 3] = ["book", "shoe", "pillow"];

/// Generates a furnished house. Retries up to `max_retries` layouts.
pub fn generate_house(id: &str, seed: u64, p: &HouseParams) -> Result<Scene> {
    if p.min_rooms == 0 || p.min_rooms > p.max_rooms || p.width < 3 || p.height < 3 {
        return Err(Error::Generation(format!("bad house params: {p:?}")));
    }
    for attempt in 0..p.max_retries.max(1) {
        let mut rng = seeded(derive_seed(seed, &format!("house/{attempt}")));
        if let Some(scene) = try_house(id, &mut rng, p) {
            return Ok(scene);
        }
    }
    Err(Error::Generation(format!(
        "no valid house for seed {seed} after {} attempts",
        p.max_retries
    )))
}

fn try_house(id: &str, rng: &mut SimRng, p: &HouseParams) -> Option<Scene> {
    let n_rooms = rng.random_range(p.min_rooms..=p.max_rooms);
    let mut rects = split_rooms(rng, CellRect::new(1, 1, p.width - 2, p.height - 2), n_rooms, p.min_room_side)?;
    rects.sort_by_key(|r| (r.y0, r.x0));
    let mut grid = SceneGrid::new(p.width, p.height, Terrain::OccupiedHeavy);
    for (i, r) in rects.iter().enumerate() {
        grid.fill_rect(*r, Terrain::Free);
        grid.rooms.push(RoomRegion { id: i as u32, rect: *r });
    }
    carve_doors(rng, &mut grid, &rects, p)?;
    let mut b = Builder::new(Scene::new(id, grid));

    let mut cats = GoalCategory::ALL.to_vec();
    cats.shuffle(rng);
    let k = rng.random_range(p.goal_furniture.0..=p.goal_furniture.1.min(cats.len()));
    for cat in &cats[..k] {
        let (w, h) = goal_size(*cat);
        let placed = (0..100).any(|_| {
            let room = rng.random_range(0..rects.len());
            b.try_furniture(rng, rects[room], cat.name(), w, h)
        });
        if !placed {
            return None;
        }
    }
    for room in rects.iter() {
        for _ in 0..rng.random_range(p.furniture_per_room.0..=p.furniture_per_room.1) {
            let &(cat, w, h) = OTHER_FURNITURE.choose(rng).expect("nonempty");
            (0..20).any(|_| b.try_furniture(rng, *room, cat, w, h));
        }
        for _ in 0..rng.random_range(p.light_obstacles_per_room.0..=p.light_obstacles_per_room.1) {
            (0..20).any(|_| b.try_obstacle(rng, *room, None));
        }
        for _ in 0..rng.random_range(p.heavy_clutter_per_room.0..=p.heavy_clutter_per_room.1) {
            let cat = *HEAVY_CLUTTER.choose(rng).expect("nonempty");
            (0..20).any(|_| b.try_obstacle(rng, *room, Some(cat)));
        }
        for _ in 0..rng.random_range(p.light_clutter_per_room.0..=p.light_clutter_per_room.1) {
            let cat = *LIGHT_CLUTTER.choose(rng).expect("nonempty");
            if let Some(c) = b.random_open_cell(rng, *room) {
                b.add(cat, ObjectKind::Clutter, MassClass::Light, c, None);
            }
        }
    }
    let scene = b.scene;
    scene.validate(1.0).ok()?;
    Some(scene)
}

/// Splits `area` into `n` rooms separated by one-cell walls, always cutting
/// the largest splittable leaf.
fn split_rooms(rng: &mut SimRng, area: CellRect, n: usize, min: i32) -> Option<Vec<CellRect>> {
    let mut leaves = vec![area];
    while leaves.len() < n {
        let can_w = |r: &CellRect| r.w > 2 * min;
        let can_h = |r: &CellRect| r.h > 2 * min;
        let (i, _) = leaves
            .iter()
            .enumerate()
            .filter(|(_, r)| can_w(r) || can_h(r))
            .max_by_key(|(i, r)| (r.area(), std::cmp::Reverse(*i)))?;
        let r = leaves.swap_remove(i);
        let vertical = match (can_w(&r), can_h(&r)) {
            (true, true) if r.w == r.h => rng.random_bool(0.5),
            (true, true) => r.w > r.h,
            (w, _) => w,
        };
        let side = if vertical { r.w } else { r.h };
        let k = rng.random_range(min..=side - min - 1);
        let (a, b) = if vertical {
            (CellRect::new(r.x0, r.y0, k, r.h), CellRect::new(r.x0 + k + 1, r.y0, r.w - k - 1, r.h))
        } else {
            (CellRect::new(r.x0, r.y0, r.w, k), CellRect::new(r.x0, r.y0 + k + 1, r.w, r.h - k - 1))
        };
        leaves.push(a);
        leaves.push(b);
    }
    Some(leaves)
}

/// A shared wall between two rooms: the wall line and the span along it.
struct Adjacency {
    a: usize,
    b: usize,
    vertical: bool,
    line: i32,
    lo: i32,
    hi: i32,
}

fn adjacencies(rects: &[CellRect], door: i32) -> Vec<Adjacency> {
    let mut out = Vec::new();
    for a in 0..rects.len() {
        for b in 0..rects.len() {
            let (ra, rb) = (rects[a], rects[b]);
            if ra.x1() + 1 == rb.x0 {
                let (lo, hi) = (ra.y0.max(rb.y0), ra.y1().min(rb.y1()));
                if hi - lo >= door + 2 {
                    out.push(Adjacency { a, b, vertical: true, line: ra.x1(), lo, hi });
                }
            }
            if ra.y1() + 1 == rb.y0 {
                let (lo, hi) = (ra.x0.max(rb.x0), ra.x1().min(rb.x1()));
                if hi - lo >= door + 2 {
                    out.push(Adjacency { a, b, vertical: false, line: ra.y1(), lo, hi });
                }
            }
        }
    }
    out
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut r = i;
    while parent[r] != r {
        r = parent[r];
    }
    parent[i] = r;
    r
}

fn carve_doors(rng: &mut SimRng, grid: &mut SceneGrid, rects: &[CellRect], p: &HouseParams) -> Option<()> {
    let mut edges = adjacencies(rects, p.door_width);
    edges.shuffle(rng);
    let mut parent: Vec<usize> = (0..rects.len()).collect();
    let mut joined = 1;
    for e in &edges {
        let (ra, rb) = (find(&mut parent, e.a), find(&mut parent, e.b));
        let tree = ra != rb;
        if tree {
            parent[ra] = rb;
            joined += 1;
        } else if !rng.random_bool(p.extra_door_prob) {
            continue;
        }
        let start = rng.random_range(e.lo + 1..=e.hi - 1 - p.door_width);
        for t in start..start + p.door_width {
            let c = if e.vertical { Cell::new(e.line, t) } else { Cell::new(t, e.line) };
            grid.set(c, Terrain::Free);
            grid.doorways.push(c);
        }
    }
    (joined == rects.len()).then_some(())
}

/// Incremental furnishing with connectivity and free-space checks.
struct Builder {
    scene: Scene,
    /// Cells blocked by heavy clutter objects (terrain stays Free under them).
    clutter: Vec<bool>,
    occupied_by_object: BTreeSet<Cell>,
    doorways: Vec<Cell>,
}

impl Builder {
    fn new(scene: Scene) -> Self {
        let n = (scene.grid.width * scene.grid.height) as usize;
        let doorways = scene.grid.doorways.clone();
        Builder {
            scene,
            clutter: vec![false; n],
            occupied_by_object: BTreeSet::new(),
            doorways,
        }
    }

    fn open(&self, c: Cell) -> bool {
        let g = &self.scene.grid;
        g.in_bounds(c) && g.terrain(c) == Terrain::Free && !self.clutter[g.index(c)]
    }

    fn near_door(&self, c: Cell, margin: i32) -> bool {
        self.doorways.iter().any(|d| d.chebyshev(c) <= margin)
    }

    /// All open cells form one 4-connected component and every room keeps
    /// at least half its cells open.
    fn layout_ok(&self) -> bool {
        let g = &self.scene.grid;
        for room in &g.rooms {
            let open = room.rect.cells().filter(|c| self.open(*c)).count() as i32;
            if 2 * open < room.rect.area() {
                return false;
            }
        }
        let n = (g.width * g.height) as usize;
        let total = (0..n).filter(|&i| self.open(g.cell_at(i))).count();
        let Some(start) = (0..n).find(|&i| self.open(g.cell_at(i))) else {
            return false;
        };
        let mut seen = vec![false; n];
        let mut stack = vec![g.cell_at(start)];
        seen[start] = true;
        let mut count = 0;
        while let Some(c) = stack.pop() {
            count += 1;
            for nb in c.neighbors4() {
                if self.open(nb) && !seen[g.index(nb)] {
                    seen[g.index(nb)] = true;
                    stack.push(nb);
                }
            }
        }
        count == total
    }

    fn add(&mut self, cat: &str, kind: ObjectKind, mass: MassClass, c: Cell, footprint: Option<CellRect>) {
        let pose = footprint.map_or(c.center(), |r| r.center());
        let id = self.scene.next_object_id();
        self.scene.add_object(ObjectInstance {
            id,
            category: cat.into(),
            kind,
            pose,
            mass_class: mass,
            contained_in: None,
            resting: true,
            footprint,
        });
        match footprint {
            Some(r) => self.occupied_by_object.extend(r.cells()),
            None => {
                self.occupied_by_object.insert(c);
            }
        }
    }

    fn try_furniture(&mut self, rng: &mut SimRng, room: CellRect, cat: &str, w: i32, h: i32) -> bool {
        let (w, h) = if rng.random_bool(0.5) { (w, h) } else { (h, w) };
        if w > room.w || h > room.h {
            return false;
        }
        let x0 = rng.random_range(room.x0..=room.x1() - w);
        let y0 = rng.random_range(room.y0..=room.y1() - h);
        let rect = CellRect::new(x0, y0, w, h);
        if rect.cells().any(|c| !self.open(c) || self.near_door(c, 2) || self.occupied_by_object.contains(&c)) {
            return false;
        }
        let before: Vec<Terrain> = rect.cells().map(|c| self.scene.grid.terrain(c)).collect();
        self.scene.grid.fill_rect(rect, Terrain::Furniture);
        if !self.layout_ok() {
            for (c, t) in rect.cells().collect::<Vec<_>>().into_iter().zip(before) {
                self.scene.grid.set(c, t);
            }
            return false;
        }
        self.add(cat, ObjectKind::Furniture, MassClass::Heavy, rect.cells().next().unwrap(), Some(rect));
        true
    }

    /// A light terrain obstacle (`None`) or a heavy clutter object.
    fn try_obstacle(&mut self, rng: &mut SimRng, room: CellRect, heavy: Option<&str>) -> bool {
        let Some(c) = self.random_open_cell(rng, room) else {
            return false;
        };
        if self.near_door(c, 1) {
            return false;
        }
        let idx = self.scene.grid.index(c);
        match heavy {
            None => self.scene.grid.set(c, Terrain::OccupiedLight),
            Some(_) => self.clutter[idx] = true,
        }
        if !self.layout_ok() {
            match heavy {
                None => self.scene.grid.set(c, Terrain::Free),
                Some(_) => self.clutter[idx] = false,
            }
            return false;
        }
        if let Some(cat) = heavy {
            self.add(cat, ObjectKind::Clutter, MassClass::Heavy, c, None);
        }
        true
    }

    fn random_open_cell(&self, rng: &mut SimRng, room: CellRect) -> Option<Cell> {
        let cells: Vec<Cell> = room
            .cells()
            .filter(|c| self.open(*c) && !self.occupied_by_object.contains(c))
            .collect();
        cells.choose(rng).copied()
    }
}

/// Places targets, containers, the goal designation and the agent spawn.
pub fn populate_task(house: &Scene, seed: u64, p: &TaskParams) -> Result<GeneratedTask> {
    if p.categories.is_empty() || p.min_targets == 0 || p.min_targets > p.max_targets {
        return Err(Error::Generation(format!("bad task params: {p:?}")));
    }
    let goals: Vec<u32> = house
        .objects
        .iter()
        .filter(|o| o.kind == ObjectKind::Furniture && GoalCategory::from_name(&o.category).is_some())
        .map(|o| o.id)
        .collect();
    if goals.is_empty() {
        return Err(Error::Generation(format!("house {} has no goal furniture", house.id)));
    }
    for attempt in 0..p.max_retries.max(1) {
        let mut rng = seeded(derive_seed(seed, &format!("task/{attempt}")));
        if let Some(t) = try_populate(house, &goals, &mut rng, seed, p) {
            return Ok(t);
        }
    }
    Err(Error::Generation(format!(
        "no reachable placement in house {} for seed {seed}",
        house.id
    )))
}

fn try_populate(house: &Scene, goals: &[u32], rng: &mut SimRng, seed: u64, p: &TaskParams) -> Option<GeneratedTask> {
    let mut scene = house.clone();
    let goal = *goals.choose(rng).expect("nonempty");
    scene.goal_furniture = Some(goal);
    let zone = scene.goal_zone(p.goal_radius)?;
    let grid = &house.grid;
    let occupancy = house.ground_truth_occupancy();
    let open = |c: Cell| grid.in_bounds(c) && !occupancy[grid.index(c)];
    let mut taken: BTreeSet<Cell> = house
        .objects
        .iter()
        .filter(|o| o.footprint.is_none())
        .map(|o| o.pose.cell())
        .collect();

    // draw counts per category
    let n = rng.random_range(p.min_targets..=p.max_targets);
    let mut required: BTreeMap<String, u32> = BTreeMap::new();
    for _ in 0..n {
        let cat = p.categories.choose(rng).expect("nonempty");
        *required.entry(cat.clone()).or_default() += 1;
    }

    let candidates: Vec<Vec<Cell>> = grid
        .rooms
        .iter()
        .map(|r| {
            r.rect
                .cells()
                .filter(|c| open(*c) && !zone.contains(*c))
                .filter(|c| c.neighbors4().iter().any(|nb| !open(*nb)))
                .collect()
        })
        .collect();
    let mut room_order: Vec<usize> = (0..grid.rooms.len()).filter(|&i| !candidates[i].is_empty()).collect();
    if room_order.is_empty() {
        return None;
    }
    room_order.shuffle(rng);

    let mut placements: Vec<(String, ObjectKind, Cell)> = Vec::new();
    let mut slot = 0;
    for (cat, count) in &required {
        for _ in 0..*count {
            let cell = (0..room_order.len()).find_map(|_| {
                let room = room_order[slot % room_order.len()];
                slot += 1;
                let free: Vec<Cell> = candidates[room].iter().copied().filter(|c| !taken.contains(c)).collect();
                free.choose(rng).copied()
            })?;
            taken.insert(cell);
            placements.push((cat.clone(), ObjectKind::Target, cell));
        }
    }
    for room in &grid.rooms {
        if !rng.random_bool(p.container_prob) {
            continue;
        }
        let free: Vec<Cell> = room
            .rect
            .cells()
            .filter(|c| open(*c) && !zone.contains(*c) && !taken.contains(c))
            .collect();
        let cell = *free.choose(rng)?;
        taken.insert(cell);
        placements.push((CONTAINER_CATEGORY.to_string(), ObjectKind::Container, cell));
    }
    let spawn_cells: Vec<Cell> = grid
        .rooms
        .iter()
        .flat_map(|r| r.rect.cells())
        .filter(|c| open(*c) && !taken.contains(c))
        .collect();
    let spawn = *spawn_cells.choose(rng)?;
    let heading = rng.random_range(0..24) as f64 * 15.0;

    let reach = crate::world::flood_fill(spawn, open);
    if placements.iter().any(|(_, _, c)| !reach.contains(c)) {
        return None;
    }
    if !zone.zone_cells.iter().any(|c| reach.contains(c)) {
        return None;
    }
    for (cat, kind, cell) in placements {
        let id = scene.next_object_id();
        scene.add_object(ObjectInstance {
            id,
            category: cat,
            kind,
            pose: cell.center(),
            mass_class: MassClass::Light,
            contained_in: None,
            resting: true,
            footprint: None,
        });
    }
    scene.spawn = Some(Spawn {
        pose: spawn.center(),
        heading,
    });
    let spec = TaskSpec {
        required,
        goal_category: zone.furniture_category,
        budget: p.budget,
        seed,
    };
    scene.validate(p.goal_radius).ok()?;
    spec.check_invariants().ok()?;
    Some(GeneratedTask { scene, spec })
}
