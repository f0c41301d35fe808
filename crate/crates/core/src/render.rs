//! Top-down trajectory plots written as binary PPM.

use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{Point, CELL_SIZE};
use crate::pnm;
use crate::sim::trace::Trace;
use crate::world::{ObjectKind, Scene, Terrain};

type Rgb = [u8; 3];

const FREE: Rgb = [235, 235, 230];
const HEAVY: Rgb = [40, 40, 45];
const LIGHT: Rgb = [150, 150, 150];
const FURNITURE: Rgb = [140, 100, 60];
const ZONE: Rgb = [190, 235, 190];
const GOAL: Rgb = [40, 140, 60];
const TARGET_START: Rgb = [240, 150, 30];
const CONTAINER_START: Rgb = [150, 60, 190];
const TARGET_END: Rgb = [20, 170, 170];
const DELIVERED: Rgb = [0, 110, 0];
const GRASP: Rgb = [0, 0, 0];
const DROP: Rgb = [255, 255, 255];

/// One color per trace, cycled when there are more traces than colors.
pub const PATH_COLORS: [Rgb; 6] = [
    [30, 80, 220],
    [220, 40, 40],
    [230, 170, 0],
    [0, 160, 160],
    [200, 0, 200],
    [90, 90, 90],
];

#[derive(Debug, Clone, PartialEq)]
pub struct RenderStyle {
    /// Pixels per grid cell.
    pub scale: usize,
    /// Radius used to shade the goal zone.
    pub goal_radius: f64,
    pub path_colors: Vec<Rgb>,
}

impl Default for RenderStyle {
    fn default() -> Self {
        RenderStyle {
            scale: 8,
            goal_radius: 1.0,
            path_colors: PATH_COLORS.to_vec(),
        }
    }
}

/// An RGB raster; row 0 is the top of the picture.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub rgb: Vec<u8>,
}

impl Image {
    fn new(width: usize, height: usize) -> Self {
        Image {
            width,
            height,
            rgb: vec![0; width * height * 3],
        }
    }

    pub fn pixel(&self, x: usize, y: usize) -> Rgb {
        let i = (y * self.width + x) * 3;
        [self.rgb[i], self.rgb[i + 1], self.rgb[i + 2]]
    }

    fn put(&mut self, x: i64, y: i64, c: Rgb) {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            return;
        }
        let i = (y as usize * self.width + x as usize) * 3;
        self.rgb[i..i + 3].copy_from_slice(&c);
    }

    fn fill(&mut self, x0: i64, y0: i64, w: i64, h: i64, c: Rgb) {
        for y in y0..y0 + h {
            for x in x0..x0 + w {
                self.put(x, y, c);
            }
        }
    }

    fn line(&mut self, a: (i64, i64), b: (i64, i64), c: Rgb) {
        let (mut x, mut y) = a;
        let dx = (b.0 - a.0).abs();
        let dy = -(b.1 - a.1).abs();
        let sx = if a.0 < b.0 { 1 } else { -1 };
        let sy = if a.1 < b.1 { 1 } else { -1 };
        let mut err = dx + dy;
        loop {
            self.put(x, y, c);
            if (x, y) == b {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x += sx;
            }
            if e2 <= dx {
                err += dx;
                y += sy;
            }
        }
    }

    /// Square marker of half-width `r` centered on a pixel.
    fn square(&mut self, p: (i64, i64), r: i64, c: Rgb) {
        self.fill(p.0 - r, p.1 - r, 2 * r + 1, 2 * r + 1, c);
    }

    fn cross(&mut self, p: (i64, i64), r: i64, c: Rgb) {
        self.line((p.0 - r, p.1 - r), (p.0 + r, p.1 + r), c);
        self.line((p.0 - r, p.1 + r), (p.0 + r, p.1 - r), c);
    }

    fn ring(&mut self, p: (i64, i64), r: i64, c: Rgb) {
        let (x0, y0, x1, y1) = (p.0 - r, p.1 - r, p.0 + r, p.1 + r);
        self.line((x0, y0), (x1, y0), c);
        self.line((x1, y0), (x1, y1), c);
        self.line((x1, y1), (x0, y1), c);
        self.line((x0, y1), (x0, y0), c);
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        pnm::ppm_bytes(self.width, self.height, &self.rgb)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_ppm())?;
        Ok(())
    }
}

struct Canvas {
    img: Image,
    scale: f64,
}

impl Canvas {
    fn px(&self, p: Point) -> (i64, i64) {
        let x = (p.x / CELL_SIZE * self.scale).floor() as i64;
        let y = self.img.height as i64 - 1 - (p.y / CELL_SIZE * self.scale).floor() as i64;
        (x, y)
    }
}

/// Draws the scene and every trace on top of it.
///
/// Layers, bottom to top: terrain, goal zone, goal furniture, object start
/// positions, agent paths, grasp (cross) and drop (ring) markers, final
/// target positions from each trace's end record. A trace with no steps adds
/// nothing to the picture.
pub fn render_trajectory(scene: &Scene, traces: &[Trace], style: &RenderStyle) -> Result<Image> {
    if style.scale == 0 {
        return Err(Error::Config("render scale must be positive".into()));
    }
    if style.path_colors.is_empty() {
        return Err(Error::Config("at least one path color is required".into()));
    }
    for t in traces {
        if t.header.scene_id != scene.id {
            return Err(Error::SceneMismatch {
                scene: scene.id.clone(),
                trace: t.header.scene_id.clone(),
            });
        }
    }
    let s = style.scale;
    let grid = &scene.grid;
    let (w, h) = (grid.width as usize, grid.height as usize);
    let mut cv = Canvas {
        img: Image::new(w * s, h * s),
        scale: s as f64,
    };
    let zone = scene.goal_zone(style.goal_radius);
    let si = s as i64;
    for c in grid.all_cells() {
        let mut color = match grid.terrain(c) {
            Terrain::Free => FREE,
            Terrain::OccupiedHeavy => HEAVY,
            Terrain::OccupiedLight => LIGHT,
            Terrain::Furniture => FURNITURE,
        };
        if let Some(z) = &zone {
            if z.footprint.contains(c) {
                color = GOAL;
            } else if z.contains(c) && color == FREE {
                color = ZONE;
            }
        }
        let top = (h as i64 - 1 - c.y as i64) * si;
        cv.img.fill(c.x as i64 * si, top, si, si, color);
    }
    let r = (si / 4).max(1);
    for o in &scene.objects {
        let color = match o.kind {
            ObjectKind::Target => TARGET_START,
            ObjectKind::Container => CONTAINER_START,
            _ => continue,
        };
        let p = cv.px(o.pose);
        cv.img.square(p, r, color);
    }
    for (i, t) in traces.iter().enumerate() {
        if t.steps.is_empty() {
            continue;
        }
        let color = style.path_colors[i % style.path_colors.len()];
        let pts: Vec<(i64, i64)> = t.positions().into_iter().map(|p| cv.px(p)).collect();
        for seg in pts.windows(2) {
            cv.img.line(seg[0], seg[1], color);
        }
        for e in t.events("go_to_grasp") {
            let p = cv.px(e.pose);
            cv.img.cross(p, r + 1, GRASP);
        }
        for e in t.events("drop") {
            let p = cv.px(e.pose);
            cv.img.ring(p, r + 1, DROP);
        }
        if let Some(end) = &t.end {
            for o in &end.targets {
                let p = cv.px(o.pose);
                cv.img.square(p, r, if o.transported { DELIVERED } else { TARGET_END });
            }
        }
    }
    Ok(cv.img)
}
