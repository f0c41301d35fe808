use std::collections::BTreeSet;

use crate::config::Config;
use crate::geometry::{heading_delta, segment_cells, Cell, Point, CELL_SIZE};
use crate::mapping::OccupancyMap;
use crate::nav::astar::{astar, octile};
use crate::sim::Action;

/// A* between two world cells over an agent map.
pub fn astar_on_map(map: &OccupancyMap, start: Cell, goal: Cell) -> Option<Vec<Cell>> {
    let s = map.frame.to_map(start)?;
    let g = map.frame.to_map(goal)?;
    let path = astar(map, s, g)?;
    Some(path.cells.into_iter().map(|c| map.frame.to_world(c)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub enum NavGoal {
    /// Arrive within `tolerance` meters of `target`.
    Point { target: Point, tolerance: f64 },
    /// Arrive on any of these cells.
    Cells(BTreeSet<Cell>),
}

impl NavGoal {
    pub fn reached(&self, pose: Point) -> bool {
        match self {
            NavGoal::Point { target, tolerance } => pose.distance(*target) <= *tolerance + 1e-9,
            NavGoal::Cells(cells) => cells.contains(&pose.cell()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NavParams {
    pub replan_interval: usize,
    pub max_replans: usize,
    pub step_length: f64,
    pub turn_deg: f64,
}

impl From<&Config> for NavParams {
    fn from(c: &Config) -> Self {
        NavParams {
            replan_interval: c.replan_interval,
            max_replans: c.max_replans,
            step_length: c.step_length,
            turn_deg: c.turn_deg,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NavCommand {
    Act(Action),
    Arrived,
    /// No path on the current map after the allowed number of replans.
    NoPath,
    /// A path exists but no primitive makes progress along it.
    Stuck,
}

/// Path cells considered when estimating the cost-to-go of a pose.
const WINDOW: usize = 12;

/// Follows an A* path with rotate/move primitives, replanning every
/// `replan_interval` primitives, after any failed primitive, and whenever a
/// remaining path cell becomes known-occupied.
///
/// Each primitive is chosen by scoring candidate headings (the current one,
/// bearings to the next few path cells, and every multiple of the turn
/// quantum): a candidate must sweep only cells not known occupied, and its
/// score is the steps it costs plus the remaining path distance from its end
/// point, measured in forward steps.
#[derive(Debug, Clone)]
pub struct Navigator {
    goal: NavGoal,
    params: NavParams,
    path: Vec<Cell>,
    remaining: Vec<f64>,
    progress: usize,
    since_replan: usize,
    failed_replans: usize,
    stalls: usize,
    replans: usize,
}

impl Navigator {
    pub fn new(goal: NavGoal, params: NavParams) -> Self {
        Navigator {
            goal,
            params,
            path: Vec::new(),
            remaining: Vec::new(),
            progress: 0,
            since_replan: 0,
            failed_replans: 0,
            stalls: 0,
            replans: 0,
        }
    }

    pub fn goal(&self) -> &NavGoal {
        &self.goal
    }

    pub fn path(&self) -> &[Cell] {
        &self.path
    }

    /// Successful plans computed so far.
    pub fn replans(&self) -> usize {
        self.replans
    }

    pub fn force_replan(&mut self) {
        self.path.clear();
    }

    fn goal_cell(&self, map: &OccupancyMap, from: Cell) -> Option<Cell> {
        match &self.goal {
            NavGoal::Point { target, .. } => Some(target.cell()),
            NavGoal::Cells(cells) => cells
                .iter()
                .copied()
                .filter(|c| map.contains(*c) && !map.is_blocked(*c))
                .min_by(|a, b| {
                    let da = octile_cells(from, *a);
                    let db = octile_cells(from, *b);
                    da.total_cmp(&db).then(a.cmp(b))
                }),
        }
    }

    fn replan(&mut self, map: &OccupancyMap, pose: Point) -> bool {
        let start = pose.cell();
        let Some(goal) = self.goal_cell(map, start) else {
            return false;
        };
        let Some(path) = astar_on_map(map, start, goal) else {
            return false;
        };
        let mut remaining = vec![0.0; path.len()];
        for i in (0..path.len().saturating_sub(1)).rev() {
            let step = if path[i].x != path[i + 1].x && path[i].y != path[i + 1].y {
                std::f64::consts::SQRT_2
            } else {
                1.0
            };
            remaining[i] = remaining[i + 1] + step * CELL_SIZE;
        }
        self.path = path;
        self.remaining = remaining;
        self.progress = 0;
        self.since_replan = 0;
        self.replans += 1;
        true
    }

    fn path_blocked(&self, map: &OccupancyMap) -> bool {
        self.path[self.progress.min(self.path.len())..]
            .iter()
            .skip(1)
            .any(|c| map.is_blocked(*c))
    }

    /// Estimated meters to the goal from `p` via the path, and the path index
    /// used. Only path cells with a clear line from `p` on `map` count, so
    /// the estimate never cuts through a known wall.
    fn estimate(&self, map: &OccupancyMap, p: Point, start: usize) -> (f64, usize) {
        let end = (start + WINDOW).min(self.path.len());
        let mut best = (f64::INFINITY, start);
        for j in start..end {
            let c = self.path[j].center();
            let d = self.remaining[j] + p.distance(c);
            if d < best.0 && Self::sight_clear(map, p, c) {
                best = (d, j);
            }
        }
        if let NavGoal::Point { target, .. } = &self.goal {
            // the target point itself may sit off the final cell center
            let last = self.path.len() - 1;
            if end == self.path.len() {
                let d = p.distance(*target);
                if d < best.0 && Self::sight_clear(map, p, *target) {
                    best = (d, last);
                }
            }
        }
        best
    }

    fn sight_clear(map: &OccupancyMap, from: Point, to: Point) -> bool {
        segment_cells(from, to).into_iter().all(|c| !map.is_blocked(c))
    }

    fn sweep_clear(map: &OccupancyMap, from: Point, to: Point) -> bool {
        segment_cells(from, to)
            .into_iter()
            .skip(1)
            .all(|c| map.contains(c) && !map.is_blocked(c))
    }

    fn turn_cost(&self, heading: f64, candidate: f64) -> u32 {
        let d = heading_delta(heading, candidate).abs();
        if d < 1e-9 {
            0
        } else {
            ((d / self.params.turn_deg) - 1e-9).ceil().max(1.0) as u32
        }
    }

    /// Two-move lookahead for when no single move makes progress, e.g. the
    /// goal cell lies closer than one step. Returns the first move.
    fn escape(&self, map: &OccupancyMap, pose: Point, heading: f64, start: usize, current: f64) -> Option<(f64, u32, f64, f64)> {
        let step = self.params.step_length;
        let quanta = (360.0 / self.params.turn_deg).round() as usize;
        let headings = |base: f64| (0..quanta).map(move |i| base + i as f64 * self.params.turn_deg);
        let mut best: Option<(f64, u32, f64, f64)> = None;
        for h1 in headings(heading) {
            let mid = pose.advance(h1, step);
            if !Self::sweep_clear(map, pose, mid) {
                continue;
            }
            let t1 = self.turn_cost(heading, h1);
            for h2 in headings(h1) {
                let end = mid.advance(h2, step);
                if !Self::sweep_clear(map, mid, end) {
                    continue;
                }
                let est = if self.goal.reached(end) { 0.0 } else { self.estimate(map, end, start).0 };
                if est >= current - 0.05 * step {
                    continue;
                }
                let score = (t1 + self.turn_cost(h1, h2)) as f64 + 2.0 + est / step;
                if best.is_none_or(|b| score < b.0 - 1e-9) {
                    best = Some((score, t1, h1, est));
                }
            }
        }
        best
    }

    /// Next primitive toward the goal given the current pose and map.
    /// `last_ok` is false after a primitive that did not succeed.
    pub fn next(&mut self, pose: Point, heading: f64, map: &OccupancyMap, last_ok: bool) -> NavCommand {
        if self.goal.reached(pose) {
            return NavCommand::Arrived;
        }
        let need_replan = self.path.is_empty()
            || self.since_replan >= self.params.replan_interval
            || !last_ok
            || self.path_blocked(map);
        if need_replan {
            if self.replan(map, pose) {
                self.failed_replans = 0;
            } else {
                self.path.clear();
                self.failed_replans += 1;
                if self.failed_replans >= self.params.max_replans {
                    return NavCommand::NoPath;
                }
                // look around for more of the map before trying again
                self.since_replan += 1;
                return NavCommand::Act(Action::RotateLeft);
            }
        }
        // candidates are scored from the old progress: the cell seen from
        // here may be out of sight a step away
        let start = self.progress;
        let (current, j) = self.estimate(map, pose, start);
        self.progress = j;
        let step = self.params.step_length;
        let mut candidates: Vec<f64> = vec![heading];
        for k in (start + 1)..(j + 5).min(self.path.len()) {
            let c = self.path[k].center();
            if c.distance(pose) > 1e-9 {
                candidates.push(pose.bearing_to(c));
            }
        }
        if let NavGoal::Point { target, .. } = &self.goal {
            if target.distance(pose) > 1e-9 {
                candidates.push(pose.bearing_to(*target));
            }
        }
        let quanta = (360.0 / self.params.turn_deg).round() as usize;
        candidates.extend((0..quanta).map(|i| heading + i as f64 * self.params.turn_deg));

        let mut best: Option<(f64, u32, f64, f64)> = None; // (score, turn, heading, est)
        for h in candidates {
            let end = pose.advance(h, step);
            if !Self::sweep_clear(map, pose, end) {
                continue;
            }
            let turn = self.turn_cost(heading, h);
            let est = if self.goal.reached(end) { 0.0 } else { self.estimate(map, end, start).0 };
            if est >= current - 0.05 * step {
                continue;
            }
            let score = turn as f64 + 1.0 + est / step;
            let better = match best {
                None => true,
                Some((s, t, _, _)) => score < s - 1e-9 || ((score - s).abs() <= 1e-9 && turn < t),
            };
            if better {
                best = Some((score, turn, h, est));
            }
        }
        let Some((_, turn, h, _)) = best.or_else(|| self.escape(map, pose, heading, start, current)) else {
            self.stalls += 1;
            if self.stalls > self.params.max_replans {
                return NavCommand::Stuck;
            }
            self.path.clear();
            self.since_replan += 1;
            return NavCommand::Act(Action::RotateLeft);
        };
        self.since_replan += 1;
        if turn == 0 {
            self.stalls = 0;
            NavCommand::Act(Action::MoveForward)
        } else {
            let aim = pose.advance(h, 1.0);
            NavCommand::Act(Action::RotateTo { x: aim.x, y: aim.y })
        }
    }
}

fn octile_cells(a: Cell, b: Cell) -> f64 {
    let dx = (a.x - b.x).unsigned_abs() as usize;
    let dy = (a.y - b.y).unsigned_abs() as usize;
    octile((0, 0), (dx, dy))
}
