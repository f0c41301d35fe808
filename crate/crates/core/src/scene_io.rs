//! `tcscene/1` documents: a JSON object with run-length-encoded terrain rows.
//!
//! Row `y` of `terrain` lists runs like `"1H38F1H"` (count followed by a
//! terrain code: `F` free, `H` heavy/wall, `L` light obstacle, `U` furniture).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Cell, CELL_SIZE};
use crate::world::{ObjectId, ObjectInstance, RoomRegion, Scene, SceneGrid, Spawn, Terrain};

pub const SCENE_FORMAT: &str = "tcscene/1";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneDoc {
    format: String,
    id: String,
    width: i32,
    height: i32,
    cell_size: f64,
    terrain: Vec<String>,
    rooms: Vec<RoomRegion>,
    doorways: Vec<[i32; 2]>,
    objects: Vec<ObjectInstance>,
    goal_furniture: Option<ObjectId>,
    spawn: Option<Spawn>,
}

pub fn encode_row(row: &[Terrain]) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < row.len() {
        let t = row[i];
        let run = row[i..].iter().take_while(|x| **x == t).count();
        out.push_str(&run.to_string());
        out.push(t.code());
        i += run;
    }
    out
}

pub fn decode_row(s: &str, width: usize) -> std::result::Result<Vec<Terrain>, String> {
    let mut out = Vec::with_capacity(width);
    let mut count = String::new();
    for ch in s.chars() {
        if ch.is_ascii_digit() {
            count.push(ch);
            continue;
        }
        let t = Terrain::from_code(ch).ok_or_else(|| format!("unknown terrain code `{ch}`"))?;
        let n: usize = count.parse().map_err(|_| format!("missing run length before `{ch}`"))?;
        if n == 0 {
            return Err("zero-length run".into());
        }
        out.extend(std::iter::repeat_n(t, n));
        count.clear();
    }
    if !count.is_empty() {
        return Err("trailing run length without a code".into());
    }
    if out.len() != width {
        return Err(format!("row decodes to {} cells, expected {width}", out.len()));
    }
    Ok(out)
}

pub fn scene_to_string(scene: &Scene) -> String {
    let g = &scene.grid;
    let terrain = (0..g.height)
        .map(|y| {
            let row: Vec<Terrain> = (0..g.width).map(|x| g.terrain(Cell::new(x, y))).collect();
            encode_row(&row)
        })
        .collect();
    let doc = SceneDoc {
        format: SCENE_FORMAT.into(),
        id: scene.id.clone(),
        width: g.width,
        height: g.height,
        cell_size: CELL_SIZE,
        terrain,
        rooms: g.rooms.clone(),
        doorways: g.doorways.iter().map(|c| [c.x, c.y]).collect(),
        objects: scene.objects.clone(),
        goal_furniture: scene.goal_furniture,
        spawn: scene.spawn,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("scene serializes");
    s.push('\n');
    s
}

pub fn scene_from_str(text: &str) -> Result<Scene> {
    let doc: SceneDoc = serde_json::from_str(text)?;
    if doc.format != SCENE_FORMAT {
        return Err(Error::InvalidScene(format!(
            "unsupported format tag `{}`, expected `{SCENE_FORMAT}`",
            doc.format
        )));
    }
    if doc.cell_size != CELL_SIZE {
        return Err(Error::InvalidScene(format!("cell size {} unsupported", doc.cell_size)));
    }
    if doc.width <= 0 || doc.height <= 0 || doc.terrain.len() != doc.height as usize {
        return Err(Error::InvalidScene("grid dimensions disagree with terrain rows".into()));
    }
    let mut grid = SceneGrid::new(doc.width, doc.height, Terrain::Free);
    for (y, row) in doc.terrain.iter().enumerate() {
        let cells = decode_row(row, doc.width as usize)
            .map_err(|e| Error::InvalidScene(format!("terrain row {y}: {e}")))?;
        for (x, t) in cells.into_iter().enumerate() {
            grid.set(Cell::new(x as i32, y as i32), t);
        }
    }
    grid.rooms = doc.rooms;
    grid.doorways = doc.doorways.into_iter().map(|[x, y]| Cell::new(x, y)).collect();
    let mut objects = doc.objects;
    objects.sort_by_key(|o| o.id);
    Ok(Scene {
        id: doc.id,
        grid,
        objects,
        goal_furniture: doc.goal_furniture,
        spawn: doc.spawn,
    })
}

pub fn write_scene(path: &Path, scene: &Scene) -> Result<()> {
    std::fs::write(path, scene_to_string(scene))?;
    Ok(())
}

pub fn read_scene(path: &Path) -> Result<Scene> {
    let text = std::fs::read_to_string(path)?;
    scene_from_str(&text).map_err(|e| Error::format(path, e.to_string()))
}
