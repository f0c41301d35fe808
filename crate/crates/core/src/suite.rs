//! Task suites on disk.
//!
//! A suite directory holds `suite.jsonl` (a header line, then one task per
//! line) and one `houses/<house_id>.tcscene` per house. Task records carry the
//! objects placed into the house, the goal designation and the spawn, so a
//! task is rebuilt by loading its house and applying the record.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::scene_io::{read_scene, write_scene};
use crate::taskgen::{generate_house, populate_task, HouseParams, TaskParams};
use crate::world::{ObjectId, ObjectInstance, Scene, Spawn, TaskSpec};

pub const SUITE_FORMAT: &str = "tcsuite/1";
pub const SUITE_FILE: &str = "suite.jsonl";
pub const HOUSE_DIR: &str = "houses";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }

    /// (houses, tasks per house) of the standard benchmark.
    pub fn default_counts(self) -> (usize, usize) {
        match self {
            Split::Train => (10, 100),
            Split::Test => (5, 20),
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Split {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            _ => Err(Error::Config(format!("unknown split `{s}` (expected train or test)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteParams {
    pub houses: usize,
    pub tasks_per_house: usize,
    pub split: Split,
    pub master_seed: u64,
    pub house: HouseParams,
    pub task: TaskParams,
}

impl SuiteParams {
    pub fn new(split: Split, master_seed: u64) -> Self {
        let (houses, tasks_per_house) = split.default_counts();
        SuiteParams {
            houses,
            tasks_per_house,
            split,
            master_seed,
            house: HouseParams::default(),
            task: TaskParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteHeader {
    pub format: String,
    pub split: Split,
    pub master_seed: u64,
    pub houses: usize,
    pub tasks_per_house: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskRecord {
    pub task_id: String,
    pub house_id: String,
    /// Relative to the suite directory.
    pub house_file: String,
    pub spec: TaskSpec,
    pub goal_furniture: ObjectId,
    pub spawn: Spawn,
    /// Targets and containers added to the house.
    pub objects: Vec<ObjectInstance>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum SuiteLine {
    Header(SuiteHeader),
    Task(TaskRecord),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Suite {
    pub header: SuiteHeader,
    pub houses: BTreeMap<String, Scene>,
    pub tasks: Vec<TaskRecord>,
}

pub fn house_id(split: Split, i: usize) -> String {
    format!("{split}-h{i:02}")
}

pub fn task_id(house: &str, j: usize) -> String {
    format!("{house}-t{j:03}")
}

impl Suite {
    /// Generates a suite. Everything derives from `master_seed`; house seeds
    /// include the split label so train and test never share a layout seed.
    pub fn build(p: &SuiteParams) -> Result<Suite> {
        if p.houses == 0 || p.tasks_per_house == 0 {
            return Err(Error::Config("suite needs at least one house and one task".into()));
        }
        let mut houses = BTreeMap::new();
        let mut tasks = Vec::with_capacity(p.houses * p.tasks_per_house);
        for i in 0..p.houses {
            let hid = house_id(p.split, i);
            let house = generate_house(&hid, derive_seed(p.master_seed, &hid), &p.house)?;
            let base = house.next_object_id();
            for j in 0..p.tasks_per_house {
                let tid = task_id(&hid, j);
                let t = populate_task(&house, derive_seed(p.master_seed, &tid), &p.task)?;
                tasks.push(TaskRecord {
                    task_id: tid,
                    house_id: hid.clone(),
                    house_file: format!("{HOUSE_DIR}/{hid}.tcscene"),
                    spec: t.spec,
                    goal_furniture: t.scene.goal_furniture.expect("populated"),
                    spawn: t.scene.spawn.expect("populated"),
                    objects: t.scene.objects.into_iter().filter(|o| o.id >= base).collect(),
                });
            }
            houses.insert(hid, house);
        }
        Ok(Suite {
            header: SuiteHeader {
                format: SUITE_FORMAT.into(),
                split: p.split,
                master_seed: p.master_seed,
                houses: p.houses,
                tasks_per_house: p.tasks_per_house,
            },
            houses,
            tasks,
        })
    }

    pub fn task(&self, task_id: &str) -> Option<&TaskRecord> {
        self.tasks.iter().find(|t| t.task_id == task_id)
    }

    /// The populated scene of one task.
    pub fn scene_for(&self, record: &TaskRecord) -> Result<Scene> {
        let house = self
            .houses
            .get(&record.house_id)
            .ok_or_else(|| Error::InvalidScene(format!("task {} refers to unknown house {}", record.task_id, record.house_id)))?;
        record.instantiate(house)
    }

    pub fn jsonl(&self) -> String {
        let mut out = serde_json::to_string(&SuiteLine::Header(self.header.clone())).expect("serializes");
        out.push('\n');
        for t in &self.tasks {
            out.push_str(&serde_json::to_string(&SuiteLine::Task(t.clone())).expect("serializes"));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir.join(HOUSE_DIR))?;
        for (id, house) in &self.houses {
            write_scene(&dir.join(HOUSE_DIR).join(format!("{id}.tcscene")), house)?;
        }
        std::fs::write(dir.join(SUITE_FILE), self.jsonl())?;
        Ok(())
    }

    /// Loads a suite directory, or a `suite.jsonl` path directly.
    pub fn read(path: &Path) -> Result<Suite> {
        let (dir, file) = suite_paths(path);
        let text = std::fs::read_to_string(&file)?;
        let mut header = None;
        let mut tasks = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let parsed: SuiteLine =
                serde_json::from_str(line).map_err(|e| Error::format(&file, format!("line {}: {e}", n + 1)))?;
            match parsed {
                SuiteLine::Header(h) if n == 0 => {
                    if h.format != SUITE_FORMAT {
                        return Err(Error::format(&file, format!("line 1: unsupported format `{}`", h.format)));
                    }
                    header = Some(h);
                }
                SuiteLine::Header(_) => return Err(Error::format(&file, format!("line {}: unexpected header", n + 1))),
                SuiteLine::Task(t) => tasks.push(t),
            }
        }
        let header = header.ok_or_else(|| Error::format(&file, "line 1: missing suite header"))?;
        let mut houses = BTreeMap::new();
        for t in &tasks {
            if !houses.contains_key(&t.house_id) {
                let scene = read_scene(&dir.join(&t.house_file))?;
                if scene.id != t.house_id {
                    return Err(Error::format(
                        &dir.join(&t.house_file),
                        format!("scene id `{}` does not match house `{}`", scene.id, t.house_id),
                    ));
                }
                houses.insert(t.house_id.clone(), scene);
            }
        }
        Ok(Suite { header, houses, tasks })
    }

    /// Checks every record against its house; reports the first offending one.
    pub fn validate(&self, goal_radius: f64) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for t in &self.tasks {
            if !seen.insert(&t.task_id) {
                return Err(Error::InvalidScene(format!("task {}: duplicate task id", t.task_id)));
            }
            let wrap = |e: Error| Error::InvalidScene(format!("task {}: {e}", t.task_id));
            let scene = self.scene_for(t).map_err(wrap)?;
            scene.validate(goal_radius).map_err(wrap)?;
            t.spec.check_invariants().map_err(wrap)?;
            let mut counts: BTreeMap<String, u32> = BTreeMap::new();
            for o in t.objects.iter().filter(|o| o.kind == crate::world::ObjectKind::Target) {
                *counts.entry(o.category.clone()).or_default() += 1;
            }
            if counts != t.spec.required {
                return Err(Error::InvalidScene(format!(
                    "task {}: placed targets do not match the required counts",
                    t.task_id
                )));
            }
            let zone = scene.goal_zone(goal_radius).ok_or_else(|| {
                Error::InvalidScene(format!("task {}: goal furniture is not a goal category", t.task_id))
            })?;
            if zone.furniture_category != t.spec.goal_category {
                return Err(Error::InvalidScene(format!(
                    "task {}: goal furniture category differs from the task",
                    t.task_id
                )));
            }
        }
        Ok(())
    }
}

impl TaskRecord {
    pub fn instantiate(&self, house: &Scene) -> Result<Scene> {
        if house.id != self.house_id {
            return Err(Error::SceneMismatch {
                scene: house.id.clone(),
                trace: self.house_id.clone(),
            });
        }
        let mut scene = house.clone();
        for o in &self.objects {
            if scene.object(o.id).is_some() {
                return Err(Error::InvalidScene(format!("object id {} already used by the house", o.id)));
            }
            scene.add_object(o.clone());
        }
        scene.goal_furniture = Some(self.goal_furniture);
        scene.spawn = Some(self.spawn);
        Ok(scene)
    }
}

fn suite_paths(path: &Path) -> (PathBuf, PathBuf) {
    if path.is_dir() {
        (path.to_path_buf(), path.join(SUITE_FILE))
    } else {
        (path.parent().map(Path::to_path_buf).unwrap_or_default(), path.to_path_buf())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(split: Split, seed: u64) -> SuiteParams {
        SuiteParams {
            houses: 2,
            tasks_per_house: 3,
            ..SuiteParams::new(split, seed)
        }
    }

    #[test]
    fn roundtrip_through_directory() {
        let suite = Suite::build(&small(Split::Test, 4)).unwrap();
        let dir = std::env::temp_dir().join(format!("tc-suite-{}", std::process::id()));
        suite.write(&dir).unwrap();
        let back = Suite::read(&dir).unwrap();
        assert_eq!(back, suite);
        back.validate(1.0).unwrap();
        assert_eq!(suite.tasks[4].task_id, "test-h01-t001");
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn same_seed_same_suite() {
        let a = Suite::build(&small(Split::Train, 9)).unwrap();
        let b = Suite::build(&small(Split::Train, 9)).unwrap();
        assert_eq!(a.jsonl(), b.jsonl());
    }

    #[test]
    fn default_counts() {
        assert_eq!(Split::Train.default_counts(), (10, 100));
        assert_eq!(Split::Test.default_counts(), (5, 20));
    }

    #[test]
    fn validate_names_bad_record() {
        let mut suite = Suite::build(&small(Split::Test, 4)).unwrap();
        suite.tasks[2].spec.required.insert("vase".into(), 40);
        let err = suite.validate(1.0).unwrap_err().to_string();
        assert!(err.contains("test-h00-t002"), "{err}");
    }
}
