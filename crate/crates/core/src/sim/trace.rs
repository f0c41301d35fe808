//! `tctrace/1` episode traces: JSON lines of a header, one record per
//! executed action, and an end record with final object poses.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::sim::{Action, ActionStatus};
use crate::world::ObjectId;

pub const TRACE_FORMAT: &str = "tctrace/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub format: String,
    pub scene_id: String,
    pub task_id: String,
    pub agent: String,
    pub seed: u64,
    pub budget: u32,
    pub required: u32,
    pub start: Point,
    pub start_heading: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub step: usize,
    #[serde(flatten)]
    pub action: Action,
    pub status: ActionStatus,
    pub pose: Point,
    pub heading: f64,
    pub steps_charged: u32,
    pub transported: u32,
    /// Intermediate poses of composite actions, in order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub waypoints: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalObject {
    pub id: ObjectId,
    pub pose: Point,
    pub transported: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEnd {
    pub transported: u32,
    pub steps_charged: u32,
    pub terminal: String,
    pub targets: Vec<FinalObject>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum TraceLine {
    Header(TraceHeader),
    Step(TraceStep),
    End(TraceEnd),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub header: TraceHeader,
    pub steps: Vec<TraceStep>,
    pub end: Option<TraceEnd>,
}

impl Trace {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut push = |line: TraceLine| {
            out.push_str(&serde_json::to_string(&line).expect("trace serializes"));
            out.push('\n');
        };
        push(TraceLine::Header(self.header.clone()));
        for s in &self.steps {
            push(TraceLine::Step(s.clone()));
        }
        if let Some(end) = &self.end {
            push(TraceLine::End(end.clone()));
        }
        out
    }

    pub fn from_jsonl(text: &str) -> std::result::Result<Self, String> {
        let mut header = None;
        let mut steps = Vec::new();
        let mut end = None;
        for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let parsed: TraceLine = serde_json::from_str(line).map_err(|e| format!("line {}: {e}", n + 1))?;
            match parsed {
                TraceLine::Header(h) if header.is_none() && n == 0 => {
                    if h.format != TRACE_FORMAT {
                        return Err(format!("unsupported trace format `{}`", h.format));
                    }
                    header = Some(h)
                }
                TraceLine::Header(_) => return Err(format!("line {}: unexpected header", n + 1)),
                TraceLine::Step(s) if end.is_none() => steps.push(s),
                TraceLine::End(e) if end.is_none() => end = Some(e),
                _ => return Err(format!("line {}: record after end", n + 1)),
            }
        }
        Ok(Trace {
            header: header.ok_or("missing header")?,
            steps,
            end,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_jsonl())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_jsonl(&text).map_err(|e| Error::format(path, e))
    }

    /// Every recorded agent position, starting at the spawn.
    pub fn positions(&self) -> Vec<Point> {
        let mut out = vec![self.header.start];
        for s in &self.steps {
            out.extend(s.waypoints.iter().copied());
            out.push(s.pose);
        }
        out.dedup();
        out
    }

    /// Steps whose status was `success` for the given action name.
    pub fn events<'a>(&'a self, action: &'a str) -> impl Iterator<Item = &'a TraceStep> + 'a {
        self.steps
            .iter()
            .filter(move |s| s.action.name() == action && s.status == ActionStatus::Success)
    }
}
