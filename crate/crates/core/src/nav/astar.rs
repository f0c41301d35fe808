//! 8-connected A* over a rectangular cell grid.
//!
//! Straight moves cost 1, diagonal moves cost sqrt(2). Diagonal moves may not
//! cut a corner: both orthogonal neighbors must be passable. The octile
//! heuristic is admissible and consistent under these costs, so returned paths
//! are optimal. Open-list ties are broken lexicographically on (f, h, cell index).

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::SQRT_2;

/// Minimal view of a grid for planning. Coordinates are local `(x, y)` indices.
pub trait Passable {
    fn width(&self) -> usize;
    fn height(&self) -> usize;
    fn is_blocked(&self, x: usize, y: usize) -> bool;
}

/// Row-major boolean obstacle grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoolGrid {
    pub width: usize,
    pub height: usize,
    pub blocked: Vec<bool>,
}

impl BoolGrid {
    pub fn new(width: usize, height: usize) -> Self {
        BoolGrid {
            width,
            height,
            blocked: vec![false; width * height],
        }
    }

    pub fn set(&mut self, x: usize, y: usize, blocked: bool) {
        self.blocked[y * self.width + x] = blocked;
    }
}

impl Passable for BoolGrid {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
    fn is_blocked(&self, x: usize, y: usize) -> bool {
        self.blocked[y * self.width + x]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPath {
    /// Cells from start to goal inclusive.
    pub cells: Vec<(usize, usize)>,
    pub straight: u32,
    pub diagonal: u32,
}

impl GridPath {
    pub fn cost(&self) -> f64 {
        self.straight as f64 + self.diagonal as f64 * SQRT_2
    }

    /// Number of moves.
    pub fn len(&self) -> usize {
        self.cells.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn octile(a: (usize, usize), b: (usize, usize)) -> f64 {
    let dx = a.0.abs_diff(b.0) as f64;
    let dy = a.1.abs_diff(b.1) as f64;
    dx.max(dy) + (SQRT_2 - 1.0) * dx.min(dy)
}

pub const MOVES: [(i32, i32); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];

/// Successors of `(x, y)` under the 8-connected, no-corner-cutting rule.
pub fn successors<G: Passable + ?Sized>(grid: &G, x: usize, y: usize) -> impl Iterator<Item = (usize, usize, bool)> + '_ {
    let (w, h) = (grid.width() as i32, grid.height() as i32);
    MOVES.iter().filter_map(move |&(dx, dy)| {
        let (nx, ny) = (x as i32 + dx, y as i32 + dy);
        if nx < 0 || ny < 0 || nx >= w || ny >= h {
            return None;
        }
        if grid.is_blocked(nx as usize, ny as usize) {
            return None;
        }
        let diagonal = dx != 0 && dy != 0;
        if diagonal && (grid.is_blocked(nx as usize, y) || grid.is_blocked(x, ny as usize)) {
            return None;
        }
        Some((nx as usize, ny as usize, diagonal))
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OpenKey {
    f: f64,
    h: f64,
    index: usize,
}

impl Eq for OpenKey {}

impl Ord for OpenKey {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: BinaryHeap is a max-heap
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.h.total_cmp(&self.h))
            .then_with(|| other.index.cmp(&self.index))
    }
}

impl PartialOrd for OpenKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest path from `start` to `goal`. The start cell is expanded even if
/// it is marked blocked; a blocked or out-of-range goal yields `None`.
pub fn astar<G: Passable + ?Sized>(grid: &G, start: (usize, usize), goal: (usize, usize)) -> Option<GridPath> {
    let (w, h) = (grid.width(), grid.height());
    if start.0 >= w || start.1 >= h || goal.0 >= w || goal.1 >= h {
        return None;
    }
    if start == goal {
        return Some(GridPath {
            cells: vec![start],
            straight: 0,
            diagonal: 0,
        });
    }
    if grid.is_blocked(goal.0, goal.1) {
        return None;
    }
    let idx = |x: usize, y: usize| y * w + x;
    let mut g = vec![f64::INFINITY; w * h];
    let mut parent = vec![usize::MAX; w * h];
    let mut closed = vec![false; w * h];
    let mut open = BinaryHeap::new();
    let s = idx(start.0, start.1);
    g[s] = 0.0;
    let h0 = octile(start, goal);
    open.push(OpenKey { f: h0, h: h0, index: s });
    let goal_index = idx(goal.0, goal.1);
    while let Some(OpenKey { index, .. }) = open.pop() {
        if closed[index] {
            continue;
        }
        closed[index] = true;
        if index == goal_index {
            break;
        }
        let (x, y) = (index % w, index / w);
        for (nx, ny, diagonal) in successors(grid, x, y) {
            let n = idx(nx, ny);
            if closed[n] {
                continue;
            }
            let cand = g[index] + if diagonal { SQRT_2 } else { 1.0 };
            if cand < g[n] {
                g[n] = cand;
                parent[n] = index;
                let hn = octile((nx, ny), goal);
                open.push(OpenKey { f: cand + hn, h: hn, index: n });
            }
        }
    }
    if !closed[goal_index] {
        return None;
    }
    let mut cells = vec![goal];
    let mut cur = goal_index;
    let (mut straight, mut diagonal) = (0, 0);
    while cur != s {
        let p = parent[cur];
        let (cx, cy, px, py) = (cur % w, cur / w, p % w, p / w);
        if cx != px && cy != py {
            diagonal += 1;
        } else {
            straight += 1;
        }
        cells.push((px, py));
        cur = p;
    }
    cells.reverse();
    Some(GridPath {
        cells,
        straight,
        diagonal,
    })
}
