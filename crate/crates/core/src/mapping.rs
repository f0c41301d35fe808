//! Agent-side maps built from observations.
//!
//! Both maps are `N x N` grids in a frame centered on the agent's start cell.
//! All public accessors take world cells and translate internally; world
//! cells that fall outside the map are ignored.

use std::collections::BTreeSet;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::geometry::{segment_cells, Cell, Point, CELL_SIZE};
use crate::nav::astar::Passable;
use crate::pnm;
use crate::sim::Observation;
use crate::world::ObjectKind;

/// Translation between world cells and map indices; `origin` sits at `(N/2, N/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MapFrame {
    pub n: usize,
    pub origin: Cell,
}

impl MapFrame {
    pub fn new(n: usize, origin: Cell) -> Self {
        MapFrame { n, origin }
    }

    pub fn to_map(&self, c: Cell) -> Option<(usize, usize)> {
        let half = (self.n / 2) as i32;
        let (mx, my) = (c.x - self.origin.x + half, c.y - self.origin.y + half);
        if mx < 0 || my < 0 || mx >= self.n as i32 || my >= self.n as i32 {
            None
        } else {
            Some((mx as usize, my as usize))
        }
    }

    pub fn to_world(&self, (mx, my): (usize, usize)) -> Cell {
        let half = (self.n / 2) as i32;
        Cell::new(mx as i32 - half + self.origin.x, my as i32 - half + self.origin.y)
    }

    fn index(&self, c: Cell) -> Option<usize> {
        self.to_map(c).map(|(x, y)| y * self.n + x)
    }
}

/// Two channels: probability occupied, probability explored.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyMap {
    pub frame: MapFrame,
    occupied: Vec<f32>,
    explored: Vec<f32>,
    /// Occupied-probability at or above which a cell is treated as blocked.
    pub threshold: f32,
}

impl OccupancyMap {
    pub fn new(frame: MapFrame, threshold: f64) -> Self {
        let len = frame.n * frame.n;
        OccupancyMap {
            frame,
            occupied: vec![0.0; len],
            explored: vec![0.0; len],
            threshold: threshold as f32,
        }
    }

    pub fn n(&self) -> usize {
        self.frame.n
    }

    pub fn contains(&self, c: Cell) -> bool {
        self.frame.to_map(c).is_some()
    }

    pub fn occupied(&self, c: Cell) -> f32 {
        self.frame.index(c).map_or(0.0, |i| self.occupied[i])
    }

    pub fn explored(&self, c: Cell) -> f32 {
        self.frame.index(c).map_or(0.0, |i| self.explored[i])
    }

    pub fn is_explored(&self, c: Cell) -> bool {
        self.explored(c) > 0.0
    }

    /// Blocked for planning: known occupied. Unexplored cells are optimistic.
    pub fn is_blocked(&self, c: Cell) -> bool {
        self.occupied(c) >= self.threshold
    }

    /// Known free: explored and below threshold.
    pub fn is_known_free(&self, c: Cell) -> bool {
        self.is_explored(c) && !self.is_blocked(c)
    }

    /// Records a sensed cell. Returns `false` when the cell is outside the map.
    pub fn record(&mut self, c: Cell, occupied: bool) -> bool {
        match self.frame.index(c) {
            Some(i) => {
                self.explored[i] = 1.0;
                self.occupied[i] = if occupied { 1.0 } else { 0.0 };
                true
            }
            None => false,
        }
    }

    /// Marks an unexplored cell as blocked without claiming it was seen.
    /// A later sighting overwrites the mark.
    pub fn mark_bump(&mut self, c: Cell) -> bool {
        match self.frame.index(c) {
            Some(i) if self.explored[i] == 0.0 => {
                self.occupied[i] = 1.0;
                true
            }
            _ => false,
        }
    }

    pub fn explored_count(&self) -> usize {
        self.explored.iter().filter(|v| **v > 0.0).count()
    }

    pub fn occupied_channel(&self) -> &[f32] {
        &self.occupied
    }

    pub fn explored_channel(&self) -> &[f32] {
        &self.explored
    }

    pub fn world_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        let n = self.frame.n;
        (0..n * n).map(move |i| self.frame.to_world((i % n, i / n)))
    }
}

impl Passable for OccupancyMap {
    fn width(&self) -> usize {
        self.frame.n
    }
    fn height(&self) -> usize {
        self.frame.n
    }
    fn is_blocked(&self, x: usize, y: usize) -> bool {
        self.occupied[y * self.frame.n + x] >= self.threshold
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum SemanticChannel {
    Target = 0,
    Container = 1,
    Goal = 2,
}

impl SemanticChannel {
    pub const ALL: [SemanticChannel; 3] = [SemanticChannel::Target, SemanticChannel::Container, SemanticChannel::Goal];

    pub fn name(self) -> &'static str {
        match self {
            SemanticChannel::Target => "target",
            SemanticChannel::Container => "container",
            SemanticChannel::Goal => "goal",
        }
    }
}

/// Three binary channels flagging targets, containers and the goal position.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticMap {
    pub frame: MapFrame,
    channels: [Vec<u8>; 3],
}

impl SemanticMap {
    pub fn new(frame: MapFrame) -> Self {
        let len = frame.n * frame.n;
        SemanticMap {
            frame,
            channels: [vec![0; len], vec![0; len], vec![0; len]],
        }
    }

    pub fn get(&self, ch: SemanticChannel, c: Cell) -> bool {
        self.frame.index(c).is_some_and(|i| self.channels[ch as usize][i] != 0)
    }

    pub fn set(&mut self, ch: SemanticChannel, c: Cell, on: bool) {
        if let Some(i) = self.frame.index(c) {
            self.channels[ch as usize][i] = on as u8;
        }
    }

    pub fn channel(&self, ch: SemanticChannel) -> &[u8] {
        &self.channels[ch as usize]
    }

    /// Flagged world cells of one channel, in map row-major order.
    pub fn flagged(&self, ch: SemanticChannel) -> Vec<Cell> {
        let n = self.frame.n;
        self.channels[ch as usize]
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0)
            .map(|(i, _)| self.frame.to_world((i % n, i / n)))
            .collect()
    }
}

/// The agent's occupancy and semantic maps plus the goal category to watch for.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentMaps {
    pub occupancy: OccupancyMap,
    pub semantic: SemanticMap,
    pub goal_category: Option<String>,
}

impl AgentMaps {
    pub fn new(frame: MapFrame, threshold: f64, goal_category: Option<String>) -> Self {
        AgentMaps {
            occupancy: OccupancyMap::new(frame, threshold),
            semantic: SemanticMap::new(frame),
            goal_category,
        }
    }

    /// Folds one observation into both maps.
    ///
    /// Visible cells become explored with a binary occupied value, and their
    /// target/container flags are cleared before detections re-stamp them, so
    /// objects that moved away disappear from the semantic map.
    pub fn integrate(&mut self, obs: &Observation) {
        for &(cell, occupied) in &obs.visible_cells {
            if self.occupancy.record(cell, occupied) {
                self.semantic.set(SemanticChannel::Target, cell, false);
                self.semantic.set(SemanticChannel::Container, cell, false);
            }
        }
        for d in &obs.detections {
            match d.kind {
                ObjectKind::Target => self.semantic.set(SemanticChannel::Target, d.pose.cell(), true),
                ObjectKind::Container => self.semantic.set(SemanticChannel::Container, d.pose.cell(), true),
                ObjectKind::Furniture if self.goal_category.as_deref() == Some(d.category.as_str()) => {
                    let cells = match d.footprint {
                        Some(r) => r.cells().collect(),
                        None => vec![d.pose.cell()],
                    };
                    for c in cells {
                        self.semantic.set(SemanticChannel::Goal, c, true);
                    }
                }
                _ => {}
            }
        }
    }

    /// After a collision, blocks the first swept cell not known to be free.
    /// The obstacle was not in view, so only that cell is suspect.
    pub fn note_collision(&mut self, pose: Point, heading: f64, step: f64) {
        let end = pose.advance(heading, step);
        if let Some(c) = segment_cells(pose, end)
            .into_iter()
            .skip(1)
            .find(|c| !self.occupancy.is_known_free(*c))
        {
            self.occupancy.mark_bump(c);
        }
    }

    /// Clears an object flag, e.g. after the agent picked it up or delivered it.
    pub fn forget(&mut self, kind: ObjectKind, cell: Cell) {
        match kind {
            ObjectKind::Target => self.semantic.set(SemanticChannel::Target, cell, false),
            ObjectKind::Container => self.semantic.set(SemanticChannel::Container, cell, false),
            _ => {}
        }
    }

    /// Writes one 8-bit PGM per channel plus a JSON sidecar describing them.
    pub fn dump(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let n = self.occupancy.n();
        let to_bytes_f = |v: &[f32]| v.iter().map(|x| (x.clamp(0.0, 1.0) * 255.0).round() as u8).collect::<Vec<_>>();
        let to_bytes_u = |v: &[u8]| v.iter().map(|x| x * 255).collect::<Vec<_>>();
        let mut files = Vec::new();
        let mut write = |name: &str, data: Vec<u8>| -> Result<()> {
            let file = format!("{stem}.{name}.pgm");
            pnm::write_pgm(&dir.join(&file), n, n, &pnm::flip_rows(&data, n))?;
            files.push((name.to_string(), file));
            Ok(())
        };
        write("occupied", to_bytes_f(self.occupancy.occupied_channel()))?;
        write("explored", to_bytes_f(self.occupancy.explored_channel()))?;
        for ch in SemanticChannel::ALL {
            write(ch.name(), to_bytes_u(self.semantic.channel(ch)))?;
        }
        #[derive(Serialize)]
        struct Sidecar<'a> {
            format: &'a str,
            n: usize,
            origin: [i32; 2],
            cell_size: f64,
            row_order: &'a str,
            channels: Vec<(String, String)>,
        }
        let sidecar = Sidecar {
            format: "tcmap/1",
            n,
            origin: [self.occupancy.frame.origin.x, self.occupancy.frame.origin.y],
            cell_size: CELL_SIZE,
            row_order: "top row is the largest map y",
            channels: files,
        };
        let mut text = serde_json::to_string_pretty(&sidecar)?;
        text.push('\n');
        std::fs::write(dir.join(format!("{stem}.json")), text)?;
        Ok(())
    }
}

/// Explored free cells with at least one unexplored 4-neighbor inside the map.
pub fn frontier_cells(map: &OccupancyMap) -> Vec<Cell> {
    let n = map.n();
    let explored = map.explored_channel();
    let mut out = Vec::new();
    for y in 0..n {
        for x in 0..n {
            let i = y * n + x;
            if explored[i] <= 0.0 || map.occupied_channel()[i] >= map.threshold {
                continue;
            }
            let unexplored_neighbor = [(1i32, 0i32), (-1, 0), (0, 1), (0, -1)].iter().any(|&(dx, dy)| {
                let (nx, ny) = (x as i32 + dx, y as i32 + dy);
                nx >= 0 && ny >= 0 && nx < n as i32 && ny < n as i32 && explored[ny as usize * n + nx as usize] <= 0.0
            });
            if unexplored_neighbor {
                out.push(map.frame.to_world((x, y)));
            }
        }
    }
    out
}

/// Set form of [`frontier_cells`].
pub fn frontier_set(map: &OccupancyMap) -> BTreeSet<Cell> {
    frontier_cells(map).into_iter().collect()
}
