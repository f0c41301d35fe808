//! Continuous poses, grid cells and the conversions between them.
//!
//! Cells are half-open squares `[k * CELL_SIZE, (k + 1) * CELL_SIZE)` on each
//! axis. Headings are degrees, counter-clockwise from the +x axis.

use serde::{Deserialize, Serialize};

/// Edge length of one grid cell in meters.
pub const CELL_SIZE: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub x: i32,
    pub y: i32,
}

impl Cell {
    pub const fn new(x: i32, y: i32) -> Self {
        Cell { x, y }
    }

    /// Center of the cell in meters.
    pub fn center(self) -> Point {
        Point::new(
            (self.x as f64 + 0.5) * CELL_SIZE,
            (self.y as f64 + 0.5) * CELL_SIZE,
        )
    }

    pub fn offset(self, dx: i32, dy: i32) -> Cell {
        Cell::new(self.x + dx, self.y + dy)
    }

    pub fn neighbors4(self) -> [Cell; 4] {
        [
            self.offset(1, 0),
            self.offset(-1, 0),
            self.offset(0, 1),
            self.offset(0, -1),
        ]
    }

    pub fn neighbors8(self) -> [Cell; 8] {
        [
            self.offset(1, 0),
            self.offset(-1, 0),
            self.offset(0, 1),
            self.offset(0, -1),
            self.offset(1, 1),
            self.offset(1, -1),
            self.offset(-1, 1),
            self.offset(-1, -1),
        ]
    }

    pub fn chebyshev(self, other: Cell) -> i32 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Bearing from `self` toward `other` in degrees, normalized to `[0, 360)`.
    pub fn bearing_to(self, other: Point) -> f64 {
        normalize_heading((other.y - self.y).atan2(other.x - self.x).to_degrees())
    }

    /// The point `distance` meters away along `heading`.
    pub fn advance(self, heading: f64, distance: f64) -> Point {
        let rad = heading.to_radians();
        Point::new(self.x + distance * rad.cos(), self.y + distance * rad.sin())
    }

    /// Grid cell containing this point (no bounds check).
    pub fn cell(self) -> Cell {
        Cell::new(
            (self.x / CELL_SIZE).floor() as i32,
            (self.y / CELL_SIZE).floor() as i32,
        )
    }
}

/// Axis-aligned block of cells, `x0..x0+w` by `y0..y0+h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellRect {
    pub x0: i32,
    pub y0: i32,
    pub w: i32,
    pub h: i32,
}

impl CellRect {
    pub const fn new(x0: i32, y0: i32, w: i32, h: i32) -> Self {
        CellRect { x0, y0, w, h }
    }

    pub fn x1(&self) -> i32 {
        self.x0 + self.w
    }

    pub fn y1(&self) -> i32 {
        self.y0 + self.h
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.x >= self.x0 && c.x < self.x1() && c.y >= self.y0 && c.y < self.y1()
    }

    pub fn area(&self) -> i32 {
        self.w * self.h
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (self.y0..self.y1()).flat_map(move |y| (self.x0..self.x1()).map(move |x| Cell::new(x, y)))
    }

    /// Geometric center in meters.
    pub fn center(&self) -> Point {
        Point::new(
            (self.x0 as f64 + self.w as f64 / 2.0) * CELL_SIZE,
            (self.y0 as f64 + self.h as f64 / 2.0) * CELL_SIZE,
        )
    }

    /// Euclidean distance in meters from `p` to the closed rectangle covered by the cells.
    pub fn distance_to(&self, p: Point) -> f64 {
        let (lx, hx) = (self.x0 as f64 * CELL_SIZE, self.x1() as f64 * CELL_SIZE);
        let (ly, hy) = (self.y0 as f64 * CELL_SIZE, self.y1() as f64 * CELL_SIZE);
        let dx = (lx - p.x).max(0.0).max(p.x - hx);
        let dy = (ly - p.y).max(0.0).max(p.y - hy);
        dx.hypot(dy)
    }

    /// Closest point of the rectangle to `p`.
    pub fn closest_point(&self, p: Point) -> Point {
        let (lx, hx) = (self.x0 as f64 * CELL_SIZE, self.x1() as f64 * CELL_SIZE);
        let (ly, hy) = (self.y0 as f64 * CELL_SIZE, self.y1() as f64 * CELL_SIZE);
        Point::new(p.x.clamp(lx, hx), p.y.clamp(ly, hy))
    }
}

pub fn normalize_heading(deg: f64) -> f64 {
    let h = deg.rem_euclid(360.0);
    // rem_euclid can return 360.0 for tiny negative inputs
    if h >= 360.0 {
        0.0
    } else {
        h
    }
}

/// Signed smallest rotation taking `from` to `to`, in `(-180, 180]`.
pub fn heading_delta(from: f64, to: f64) -> f64 {
    let d = (to - from).rem_euclid(360.0);
    if d > 180.0 {
        d - 360.0
    } else {
        d
    }
}

/// Every cell touched by the segment `a -> b`, in traversal order.
///
/// When the segment crosses exactly through a cell corner both side cells
/// are included, so a sweep can never slip diagonally between two blocked
/// cells.
pub fn segment_cells(a: Point, b: Point) -> Vec<Cell> {
    let mut out = Vec::new();
    let mut cell = a.cell();
    let end = b.cell();
    out.push(cell);
    if cell == end {
        return out;
    }
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let step_x = if dx > 0.0 { 1 } else { -1 };
    let step_y = if dy > 0.0 { 1 } else { -1 };
    let boundary = |c: i32, step: i32| (c + if step > 0 { 1 } else { 0 }) as f64 * CELL_SIZE;
    let t_delta_x = if dx != 0.0 { CELL_SIZE / dx.abs() } else { f64::INFINITY };
    let t_delta_y = if dy != 0.0 { CELL_SIZE / dy.abs() } else { f64::INFINITY };
    let mut t_max_x = if dx != 0.0 {
        (boundary(cell.x, step_x) - a.x) / dx
    } else {
        f64::INFINITY
    };
    let mut t_max_y = if dy != 0.0 {
        (boundary(cell.y, step_y) - a.y) / dy
    } else {
        f64::INFINITY
    };
    let limit = 2 * ((end.x - cell.x).abs() + (end.y - cell.y).abs()) + 4;
    for _ in 0..limit {
        if cell == end {
            break;
        }
        let diff = t_max_x - t_max_y;
        if diff.abs() < 1e-12 {
            out.push(cell.offset(step_x, 0));
            out.push(cell.offset(0, step_y));
            cell = cell.offset(step_x, step_y);
            t_max_x += t_delta_x;
            t_max_y += t_delta_y;
        } else if diff < 0.0 {
            cell = cell.offset(step_x, 0);
            t_max_x += t_delta_x;
        } else {
            cell = cell.offset(0, step_y);
            t_max_y += t_delta_y;
        }
        out.push(cell);
    }
    if cell != end {
        out.push(end);
    }
    out.dedup();
    out
}
