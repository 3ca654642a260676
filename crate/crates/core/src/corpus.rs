//! Participants, tasks, detections and frame-level annotations.
//!
//! A corpus is described by a `manifest.json` next to per-task
//! `detections.jsonl` and `annotations.csv` files. Frames are pre-extracted
//! images named by zero-padded index (`000042.png`) inside each task's
//! `frames_dir`. Paths in the manifest are relative to the manifest's
//! directory.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_RESOLUTION: (u32, u32) = (720, 405);
pub const DEFAULT_FPS: f64 = 30.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Side {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "left" | "l" => Ok(Side::Left),
            "right" | "r" => Ok(Side::Right),
            other => Err(format!("unknown side {other:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Dataset {
    #[serde(rename = "home")]
    Home,
    #[serde(rename = "homelab")]
    HomeLab,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Unimanual,
    Bimanual,
    Negative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HandCategory {
    MoreAffected,
    LessAffected,
}

impl HandCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            HandCategory::MoreAffected => "more_affected",
            HandCategory::LessAffected => "less_affected",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Manipulator,
    Stabilizer,
    None,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Manipulator => "manipulator",
            Role::Stabilizer => "stabilizer",
            Role::None => "none",
        }
    }
}

impl FromStr for Role {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "manipulator" | "manipulation" => Ok(Role::Manipulator),
            "stabilizer" | "stabilization" => Ok(Role::Stabilizer),
            "none" | "" => Ok(Role::None),
            other => Err(format!("unknown role {other:?}")),
        }
    }
}

/// Contact state reported by an external hand-object detector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactState {
    NoContact,
    SelfContact,
    OtherPerson,
    PortableObject,
    NonPortableObject,
}

impl ContactState {
    pub fn as_str(self) -> &'static str {
        match self {
            ContactState::NoContact => "no_contact",
            ContactState::SelfContact => "self_contact",
            ContactState::OtherPerson => "other_person",
            ContactState::PortableObject => "portable_object",
            ContactState::NonPortableObject => "non_portable_object",
        }
    }
}

impl FromStr for ContactState {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().replace(['-', ' '], "_").as_str() {
            "no_contact" | "none" | "n" => Ok(ContactState::NoContact),
            "self_contact" | "self" | "s" => Ok(ContactState::SelfContact),
            "other_person" | "other_person_contact" | "o" => Ok(ContactState::OtherPerson),
            "portable_object" | "portable" | "p" => Ok(ContactState::PortableObject),
            "non_portable_object" | "non_portable" | "f" => Ok(ContactState::NonPortableObject),
            other => Err(format!("unknown contact state {other:?}")),
        }
    }
}

/// Classification task a pipeline run targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Interaction,
    Role,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Interaction => "interaction",
            Mode::Role => "role",
        }
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "interaction" => Ok(Mode::Interaction),
            "role" => Ok(Mode::Role),
            other => Err(format!("unknown mode {other:?}")),
        }
    }
}

/// Axis-aligned pixel rectangle. Serialized as `[x, y, w, h]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[u32; 4]", into = "[u32; 4]")]
pub struct BBox {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl From<[u32; 4]> for BBox {
    fn from(v: [u32; 4]) -> Self {
        BBox::new(v[0], v[1], v[2], v[3])
    }
}

impl From<BBox> for [u32; 4] {
    fn from(b: BBox) -> Self {
        [b.x, b.y, b.w, b.h]
    }
}

impl BBox {
    pub const fn new(x: u32, y: u32, w: u32, h: u32) -> Self {
        BBox { x, y, w, h }
    }

    pub fn area(&self) -> usize {
        self.w as usize * self.h as usize
    }

    pub fn right(&self) -> u32 {
        self.x + self.w
    }

    pub fn bottom(&self) -> u32 {
        self.y + self.h
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x && x < self.right() && y >= self.y && y < self.bottom()
    }

    /// Clamps a real-valued box `[x, y, w, h]` to a `width`×`height` frame,
    /// rounding corners to the nearest pixel.
    pub fn clamped(x: f64, y: f64, w: f64, h: f64, width: u32, height: u32) -> Self {
        let clamp = |v: f64, hi: u32| v.round().clamp(0.0, hi as f64) as u32;
        let x0 = clamp(x, width);
        let y0 = clamp(y, height);
        let x1 = clamp(x + w, width);
        let y1 = clamp(y + h, height);
        BBox::new(x0, y0, x1.saturating_sub(x0), y1.saturating_sub(y0))
    }

    /// Grows the box by `fraction` of its width/height on every side,
    /// clipped to the frame.
    pub fn dilated(&self, fraction: f64, width: u32, height: u32) -> BBox {
        let dx = self.w as f64 * fraction;
        let dy = self.h as f64 * fraction;
        BBox::clamped(
            self.x as f64 - dx,
            self.y as f64 - dy,
            self.w as f64 + 2.0 * dx,
            self.h as f64 + 2.0 * dy,
            width,
            height,
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Participant {
    pub id: String,
    pub affected_side: Side,
    #[serde(default)]
    pub datasets: BTreeSet<Dataset>,
}

impl Participant {
    pub fn hand_category(&self, side: Side) -> HandCategory {
        hand_category(self, side)
    }
}

/// Maps a hand side to its category for a participant.
pub fn hand_category(participant: &Participant, side: Side) -> HandCategory {
    if side == participant.affected_side {
        HandCategory::MoreAffected
    } else {
        HandCategory::LessAffected
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Task {
    pub id: String,
    pub participant_id: String,
    pub dataset: Dataset,
    pub kind: TaskKind,
    pub frames_dir: PathBuf,
    pub frame_count: usize,
    pub fps: f64,
    pub resolution: (u32, u32),
    pub detections: PathBuf,
    pub annotations: PathBuf,
    pub masks: Option<PathBuf>,
}

impl Task {
    /// Path of the pre-extracted frame with the given index (`.png`
    /// preferred, `.jpg` accepted).
    pub fn frame_path(&self, index: usize) -> PathBuf {
        let png = self.frames_dir.join(format!("{index:06}.png"));
        if png.exists() {
            return png;
        }
        let jpg = self.frames_dir.join(format!("{index:06}.jpg"));
        if jpg.exists() {
            jpg
        } else {
            png
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub frame_index: usize,
    pub hand_side: Side,
    pub bbox: BBox,
    pub confidence: f64,
    pub contact_state: Option<ContactState>,
    pub object_bbox: Option<BBox>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameLabel {
    pub frame_index: usize,
    pub hand_side: Side,
    pub interaction: bool,
    pub role: Role,
}

impl FrameLabel {
    pub fn new(frame_index: usize, hand_side: Side, interaction: bool, role: Role) -> Self {
        FrameLabel {
            frame_index,
            hand_side,
            interaction,
            role,
        }
    }

    /// Ground truth for the given classification mode: interaction, or
    /// manipulator (positive) versus stabilizer.
    pub fn target(&self, mode: Mode) -> bool {
        match mode {
            Mode::Interaction => self.interaction,
            Mode::Role => self.role == Role::Manipulator,
        }
    }
}

/// One hand in one frame, with every detection of that side in that frame.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HandInstance {
    pub task_id: String,
    pub frame_index: usize,
    pub hand_side: Side,
    pub hand_category: HandCategory,
    pub label: FrameLabel,
    pub candidates: Vec<Detection>,
}

impl HandInstance {
    /// The highest-confidence candidate; ties keep file order.
    pub fn primary(&self) -> Option<&Detection> {
        self.candidates
            .iter()
            .reduce(|best, d| if d.confidence > best.confidence { d } else { best })
    }

    pub fn bbox(&self) -> Option<BBox> {
        self.primary().map(|d| d.bbox)
    }

    pub fn has_detection(&self) -> bool {
        !self.candidates.is_empty()
    }
}

/// Detections and annotations of a single task.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TaskData {
    pub detections: Vec<Detection>,
    pub labels: Vec<FrameLabel>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LabelSummary {
    pub frames: usize,
    pub interaction: usize,
    pub no_interaction: usize,
    pub manipulator: usize,
    pub stabilizer: usize,
}

pub fn summarize_labels(labels: &[FrameLabel]) -> LabelSummary {
    let mut s = LabelSummary {
        frames: labels.len(),
        ..Default::default()
    };
    for l in labels {
        if l.interaction {
            s.interaction += 1;
        } else {
            s.no_interaction += 1;
        }
        match l.role {
            Role::Manipulator => s.manipulator += 1,
            Role::Stabilizer => s.stabilizer += 1,
            Role::None => {}
        }
    }
    s
}

// ---------------------------------------------------------------------------
// Manifest

/// The manifest exactly as written on disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub participants: Vec<ParticipantEntry>,
    pub tasks: Vec<TaskEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticipantEntry {
    pub id: String,
    pub affected_side: Side,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskEntry {
    pub id: String,
    pub participant_id: String,
    pub dataset: Dataset,
    pub kind: TaskKind,
    pub frames_dir: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_count: Option<usize>,
    #[serde(default = "default_fps")]
    pub fps: f64,
    #[serde(default = "default_resolution")]
    pub resolution: [u32; 2],
    pub detections: String,
    pub annotations: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masks: Option<String>,
}

fn default_fps() -> f64 {
    DEFAULT_FPS
}

fn default_resolution() -> [u32; 2] {
    [DEFAULT_RESOLUTION.0, DEFAULT_RESOLUTION.1]
}

impl Manifest {
    pub fn parse(text: &str, location: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::parse(format!("{location}:{}:{}", e.line(), e.column()), e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Manifest::parse(&text, &path.display().to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }
}

#[derive(Clone, Debug)]
pub struct Corpus {
    pub root: PathBuf,
    pub participants: Vec<Participant>,
    pub tasks: Vec<Task>,
    data: BTreeMap<String, TaskData>,
}

/// Reads a manifest, resolves every referenced path and checks structural
/// integrity. Detections and annotations are not read; see [`Corpus::open`].
pub fn load_manifest(path: &Path) -> Result<Corpus> {
    let manifest = Manifest::read(path)?;
    let root = path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    Corpus::from_manifest(manifest, &root, &path.display().to_string())
}

impl Corpus {
    /// Loads a manifest together with every task's detections and
    /// annotations.
    pub fn open(path: &Path) -> Result<Corpus> {
        let mut corpus = load_manifest(path)?;
        corpus.load_all_data()?;
        Ok(corpus)
    }

    pub fn from_manifest(manifest: Manifest, root: &Path, location: &str) -> Result<Corpus> {
        if manifest.participants.is_empty() {
            return Err(Error::parse(location, "no participants"));
        }
        let mut participants: Vec<Participant> = Vec::new();
        let mut seen = HashSet::new();
        for (i, p) in manifest.participants.iter().enumerate() {
            if !seen.insert(p.id.clone()) {
                return Err(Error::parse(
                    format!("{location}: participants[{i}]"),
                    format!("duplicate participant id {:?}", p.id),
                ));
            }
            participants.push(Participant {
                id: p.id.clone(),
                affected_side: p.affected_side,
                datasets: BTreeSet::new(),
            });
        }

        let mut tasks = Vec::with_capacity(manifest.tasks.len());
        let mut task_ids = HashSet::new();
        for (i, t) in manifest.tasks.iter().enumerate() {
            let loc = format!("{location}: tasks[{i}] ({})", t.id);
            if !task_ids.insert(t.id.clone()) {
                return Err(Error::parse(loc, format!("duplicate task id {:?}", t.id)));
            }
            let Some(p) = participants.iter_mut().find(|p| p.id == t.participant_id) else {
                return Err(Error::parse(loc, format!("unknown participant {:?}", t.participant_id)));
            };
            p.datasets.insert(t.dataset);

            let frames_dir = root.join(&t.frames_dir);
            if !frames_dir.is_dir() {
                return Err(Error::parse(
                    loc,
                    format!("task {}: frames_dir {} does not exist", t.id, frames_dir.display()),
                ));
            }
            let detections = root.join(&t.detections);
            let annotations = root.join(&t.annotations);
            for (what, p) in [("detections", &detections), ("annotations", &annotations)] {
                if !p.is_file() {
                    return Err(Error::parse(
                        loc.clone(),
                        format!("task {}: {what} file {} does not exist", t.id, p.display()),
                    ));
                }
            }
            let masks = match &t.masks {
                Some(m) => {
                    let dir = root.join(m);
                    if !dir.is_dir() {
                        return Err(Error::parse(
                            loc,
                            format!("task {}: masks dir {} does not exist", t.id, dir.display()),
                        ));
                    }
                    Some(dir)
                }
                None => None,
            };
            let frame_count = match t.frame_count {
                Some(n) => n,
                None => count_frames(&frames_dir)?,
            };
            if frame_count == 0 {
                return Err(Error::parse(loc, format!("task {}: no frames", t.id)));
            }
            if t.fps.is_nan() || t.fps <= 0.0 {
                return Err(Error::parse(loc, "fps must be positive"));
            }
            if t.resolution[0] == 0 || t.resolution[1] == 0 {
                return Err(Error::parse(loc, "resolution must be nonzero"));
            }
            tasks.push(Task {
                id: t.id.clone(),
                participant_id: t.participant_id.clone(),
                dataset: t.dataset,
                kind: t.kind,
                frames_dir,
                frame_count,
                fps: t.fps,
                resolution: (t.resolution[0], t.resolution[1]),
                detections,
                annotations,
                masks,
            });
        }

        Ok(Corpus {
            root: root.to_path_buf(),
            participants,
            tasks,
            data: BTreeMap::new(),
        })
    }

    pub fn load_all_data(&mut self) -> Result<()> {
        for task in &self.tasks {
            let (w, h) = task.resolution;
            let detections = load_detections(&task.detections, w, h)?;
            let labels = load_annotations(&task.annotations)?;
            self.data.insert(task.id.clone(), TaskData { detections, labels });
        }
        Ok(())
    }

    /// Installs task data directly (used by tests and the synthetic corpus).
    pub fn set_task_data(&mut self, task_id: &str, data: TaskData) {
        self.data.insert(task_id.to_string(), data);
    }

    pub fn participant(&self, id: &str) -> Option<&Participant> {
        self.participants.iter().find(|p| p.id == id)
    }

    pub fn task(&self, id: &str) -> Option<&Task> {
        self.tasks.iter().find(|t| t.id == id)
    }

    pub fn task_data(&self, id: &str) -> Option<&TaskData> {
        self.data.get(id)
    }

    pub fn tasks_of<'a>(&'a self, participant: &'a str) -> impl Iterator<Item = &'a Task> + 'a {
        self.tasks.iter().filter(move |t| t.participant_id == participant)
    }

    /// Instances of `task` for the given mode; empty if data is not loaded.
    pub fn instances(&self, task: &Task, mode: Mode) -> Vec<HandInstance> {
        let (Some(data), Some(p)) = (self.task_data(&task.id), self.participant(&task.participant_id)) else {
            return Vec::new();
        };
        build_instances(task, p, data, mode)
    }

    /// Cross-file checks that need task context. An empty list means the
    /// corpus is valid.
    pub fn validate(&self) -> Vec<String> {
        let mut issues = Vec::new();
        for task in &self.tasks {
            let Some(data) = self.task_data(&task.id) else {
                issues.push(format!("task {}: data not loaded", task.id));
                continue;
            };
            for l in &data.labels {
                if l.frame_index >= task.frame_count {
                    issues.push(format!(
                        "task {}: label for frame {} beyond frame_count {}",
                        task.id, l.frame_index, task.frame_count
                    ));
                }
                if l.role != Role::None && task.kind != TaskKind::Bimanual {
                    issues.push(format!(
                        "task {}: role label at frame {} ({}) in a {:?} task",
                        task.id, l.frame_index, l.hand_side, task.kind
                    ));
                }
                if l.interaction && task.kind == TaskKind::Negative {
                    issues.push(format!(
                        "task {}: interaction label at frame {} in a negative task",
                        task.id, l.frame_index
                    ));
                }
            }
            for d in &data.detections {
                if d.frame_index >= task.frame_count {
                    issues.push(format!(
                        "task {}: detection at frame {} beyond frame_count {}",
                        task.id, d.frame_index, task.frame_count
                    ));
                }
            }
        }
        issues
    }
}

fn count_frames(dir: &Path) -> Result<usize> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut n = 0;
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name();
        let name = name.to_string_lossy();
        if let Some((stem, ext)) = name.rsplit_once('.') {
            if matches!(ext, "png" | "jpg" | "jpeg") && stem.chars().all(|c| c.is_ascii_digit()) {
                n += 1;
            }
        }
    }
    Ok(n)
}

// ---------------------------------------------------------------------------
// Detections

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DetectionRecord {
    frame: usize,
    side: Side,
    bbox: [f64; 4],
    conf: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    contact: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    obj_bbox: Option<[f64; 4]>,
}

/// Parses detections JSON-lines text. Boxes are clamped to the frame;
/// detections left with zero area are dropped.
pub fn parse_detections(text: &str, location: &str, width: u32, height: u32) -> Result<Vec<Detection>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let loc = format!("{location}:{}", i + 1);
        let rec: DetectionRecord = serde_json::from_str(line).map_err(|e| Error::parse(loc.clone(), e.to_string()))?;
        let [x, y, w, h] = rec.bbox;
        if !(w >= 0.0 && h >= 0.0) || rec.bbox.iter().any(|v| !v.is_finite()) {
            return Err(Error::parse(loc, "negative or non-finite box dimensions"));
        }
        if !(0.0..=1.0).contains(&rec.conf) {
            return Err(Error::parse(loc, format!("confidence {} outside [0,1]", rec.conf)));
        }
        let contact = rec
            .contact
            .as_deref()
            .map(ContactState::from_str)
            .transpose()
            .map_err(|e| Error::parse(loc.clone(), e))?;
        let object_bbox = match rec.obj_bbox {
            Some([ox, oy, ow, oh]) => {
                if !(ow >= 0.0 && oh >= 0.0) {
                    return Err(Error::parse(loc, "negative object box dimensions"));
                }
                Some(BBox::clamped(ox, oy, ow, oh, width, height))
            }
            None => None,
        };
        let bbox = BBox::clamped(x, y, w, h, width, height);
        if bbox.area() == 0 {
            log::warn!("{loc}: detection box empty after clamping; dropped");
            continue;
        }
        out.push(Detection {
            frame_index: rec.frame,
            hand_side: rec.side,
            bbox,
            confidence: rec.conf,
            contact_state: contact,
            object_bbox,
        });
    }
    out.sort_by_key(|d| (d.frame_index, d.hand_side));
    Ok(out)
}

pub fn load_detections(path: &Path, width: u32, height: u32) -> Result<Vec<Detection>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_detections(&text, &path.display().to_string(), width, height)
}

/// Canonical JSON-lines serialization of detections.
pub fn detections_to_jsonl(detections: &[Detection]) -> String {
    let mut out = String::new();
    for d in detections {
        let rec = DetectionRecord {
            frame: d.frame_index,
            side: d.hand_side,
            bbox: [d.bbox.x, d.bbox.y, d.bbox.w, d.bbox.h].map(f64::from),
            conf: d.confidence,
            contact: d.contact_state.map(|c| c.as_str().to_string()),
            obj_bbox: d.object_bbox.map(|b| [b.x, b.y, b.w, b.h].map(f64::from)),
        };
        out.push_str(&serde_json::to_string(&rec).expect("detection serializes"));
        out.push('\n');
    }
    out
}

pub fn write_detections(path: &Path, detections: &[Detection]) -> Result<()> {
    fs::write(path, detections_to_jsonl(detections)).map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// Annotations

/// One annotation row; `task` is only present in multi-task files such as
/// those compared for rater agreement.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelRow {
    pub task: Option<String>,
    pub label: FrameLabel,
}

fn parse_flag(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" => Some(true),
        "0" | "false" | "no" => Some(false),
        _ => None,
    }
}

/// Parses annotation CSV from any reader. Enforces the role/interaction
/// invariant and rejects duplicate keys.
pub fn read_label_rows<R: std::io::Read>(reader: R, location: &str) -> Result<Vec<LabelRow>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::parse(location, e.to_string()))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (Some(fi), Some(si), Some(ii)) = (col("frame"), col("side"), col("interaction")) else {
        return Err(Error::parse(
            location,
            "header must contain frame,side,interaction,role",
        ));
    };
    let ri = col("role");
    let ti = col("task");

    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2;
        let loc = format!("{location}:{line}");
        let record = record.map_err(|e| Error::parse(loc.clone(), e.to_string()))?;
        let field = |idx: usize| record.get(idx).unwrap_or("");
        let frame: usize = field(fi)
            .parse()
            .map_err(|_| Error::parse(loc.clone(), format!("bad frame index {:?}", field(fi))))?;
        let side: Side = field(si).parse().map_err(|e| Error::parse(loc.clone(), e))?;
        let interaction = parse_flag(field(ii))
            .ok_or_else(|| Error::parse(loc.clone(), format!("bad interaction flag {:?}", field(ii))))?;
        let role: Role = match ri {
            Some(r) => field(r).parse().map_err(|e| Error::parse(loc.clone(), e))?,
            None => Role::None,
        };
        if role != Role::None && !interaction {
            return Err(Error::parse(loc, "role without interaction"));
        }
        let task = ti.map(|t| field(t).to_string());
        if !seen.insert((task.clone(), frame, side)) {
            return Err(Error::parse(
                loc,
                format!("duplicate label for frame {frame} side {side}"),
            ));
        }
        rows.push(LabelRow {
            task,
            label: FrameLabel::new(frame, side, interaction, role),
        });
    }
    Ok(rows)
}

pub fn parse_annotations(text: &str, location: &str) -> Result<Vec<FrameLabel>> {
    let mut labels: Vec<FrameLabel> = read_label_rows(text.as_bytes(), location)?
        .into_iter()
        .map(|r| r.label)
        .collect();
    labels.sort_by_key(|l| (l.frame_index, l.hand_side));
    Ok(labels)
}

pub fn load_annotations(path: &Path) -> Result<Vec<FrameLabel>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_annotations(&text, &path.display().to_string())
}

pub fn load_label_rows(path: &Path) -> Result<Vec<LabelRow>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_label_rows(BufReader::new(file), &path.display().to_string())
}

pub fn annotations_to_csv(labels: &[FrameLabel]) -> String {
    let mut out = String::from("frame,side,interaction,role\n");
    for l in labels {
        out.push_str(&format!(
            "{},{},{},{}\n",
            l.frame_index,
            l.hand_side,
            u8::from(l.interaction),
            l.role.as_str()
        ));
    }
    out
}

pub fn write_annotations(path: &Path, labels: &[FrameLabel]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(annotations_to_csv(labels).as_bytes())
        .map_err(|e| Error::io(path, e))
}

/// Counts lines of a JSON-lines file (used for quick sanity reporting).
pub fn count_lines(path: &Path) -> Result<usize> {
    let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(BufReader::new(f).lines().count())
}

// ---------------------------------------------------------------------------
// Instances

/// Builds the hand instances of one task.
///
/// Interaction mode yields one instance per labelled (frame, side). Role mode
/// keeps only interacting frames of bimanual tasks. Every detection of the
/// same side in the same frame is attached as a candidate.
pub fn build_instances(task: &Task, participant: &Participant, data: &TaskData, mode: Mode) -> Vec<HandInstance> {
    if mode == Mode::Role && task.kind != TaskKind::Bimanual {
        return Vec::new();
    }
    let mut by_key: BTreeMap<(usize, Side), Vec<Detection>> = BTreeMap::new();
    for d in &data.detections {
        by_key.entry((d.frame_index, d.hand_side)).or_default().push(d.clone());
    }
    let mut out: Vec<HandInstance> = data
        .labels
        .iter()
        .filter(|l| mode == Mode::Interaction || l.interaction)
        .map(|l| HandInstance {
            task_id: task.id.clone(),
            frame_index: l.frame_index,
            hand_side: l.hand_side,
            hand_category: hand_category(participant, l.hand_side),
            label: *l,
            candidates: by_key.get(&(l.frame_index, l.hand_side)).cloned().unwrap_or_default(),
        })
        .collect();
    out.sort_by_key(|i| (i.frame_index, i.hand_side));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn participant(side: Side) -> Participant {
        Participant {
            id: "P01".into(),
            affected_side: side,
            datasets: BTreeSet::new(),
        }
    }

    fn task(kind: TaskKind) -> Task {
        Task {
            id: "T1".into(),
            participant_id: "P01".into(),
            dataset: Dataset::Home,
            kind,
            frames_dir: PathBuf::from("."),
            frame_count: 100,
            fps: 30.0,
            resolution: DEFAULT_RESOLUTION,
            detections: PathBuf::new(),
            annotations: PathBuf::new(),
            masks: None,
        }
    }

    #[test]
    fn hand_category_definition() {
        let p = participant(Side::Left);
        assert_eq!(hand_category(&p, Side::Left), HandCategory::MoreAffected);
        assert_eq!(hand_category(&p, Side::Right), HandCategory::LessAffected);
        let q = participant(Side::Right);
        for s in Side::BOTH {
            assert_ne!(hand_category(&q, s), hand_category(&p, s));
        }
    }

    #[test]
    fn single_detection_line() {
        let d = parse_detections(
            r#"{"frame":0,"side":"right","bbox":[10,10,50,60],"conf":0.9}"#,
            "d",
            720,
            405,
        )
        .unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].bbox, BBox::new(10, 10, 50, 60));
        assert_eq!(d[0].hand_side, Side::Right);
        assert_eq!(d[0].contact_state, None);
    }

    #[test]
    fn overflowing_box_is_clamped() {
        let d = parse_detections(
            r#"{"frame":3,"side":"left","bbox":[700,390,50,60],"conf":0.5,"contact":"portable_object"}"#,
            "d",
            720,
            405,
        )
        .unwrap();
        assert_eq!(d[0].bbox, BBox::new(700, 390, 20, 15));
        assert_eq!(d[0].contact_state, Some(ContactState::PortableObject));
        let neg = parse_detections(
            r#"{"frame":3,"side":"left","bbox":[-10,-5,30,30],"conf":0.5}"#,
            "d",
            720,
            405,
        )
        .unwrap();
        assert_eq!(neg[0].bbox, BBox::new(0, 0, 20, 25));
    }

    #[test]
    fn detection_errors_carry_line_numbers() {
        let text = "{\"frame\":0,\"side\":\"right\",\"bbox\":[1,1,5,5],\"conf\":0.9}\n{oops}\n";
        let err = parse_detections(text, "det.jsonl", 720, 405).unwrap_err();
        assert!(err.to_string().starts_with("det.jsonl:2"), "{err}");
        let err = parse_detections(
            r#"{"frame":0,"side":"right","bbox":[1,1,-5,5],"conf":0.9}"#,
            "det.jsonl",
            720,
            405,
        )
        .unwrap_err();
        assert!(err.to_string().contains("negative"));
        let err = parse_detections(
            r#"{"frame":0,"side":"right","bbox":[1,1,5,5],"conf":0.9,"contact":"hugging"}"#,
            "det.jsonl",
            720,
            405,
        )
        .unwrap_err();
        assert!(err.to_string().contains("unknown contact state"));
    }

    #[test]
    fn same_side_duplicates_retained_and_sorted() {
        let text = r#"{"frame":2,"side":"right","bbox":[0,0,5,5],"conf":0.4}
{"frame":1,"side":"right","bbox":[10,10,50,60],"conf":0.9}
{"frame":1,"side":"right","bbox":[300,10,50,60],"conf":0.7}
{"frame":1,"side":"left","bbox":[100,10,50,60],"conf":0.8}"#;
        let d = parse_detections(text, "d", 720, 405).unwrap();
        assert_eq!(d.len(), 4);
        let keys: Vec<_> = d.iter().map(|d| (d.frame_index, d.hand_side)).collect();
        assert_eq!(
            keys,
            vec![(1, Side::Left), (1, Side::Right), (1, Side::Right), (2, Side::Right)]
        );
    }

    #[test]
    fn annotation_rows() {
        let ok = parse_annotations("frame,side,interaction,role\n5,left,1,stabilizer\n", "a").unwrap();
        assert_eq!(ok, vec![FrameLabel::new(5, Side::Left, true, Role::Stabilizer)]);

        let err = parse_annotations("frame,side,interaction,role\n5,left,0,manipulator\n", "a").unwrap_err();
        assert!(err.to_string().contains("role without interaction"));

        let err = parse_annotations("frame,side,interaction,role\n5,left,1,none\n5,left,0,none\n", "a").unwrap_err();
        assert!(err.to_string().contains("duplicate"));
        assert!(err.to_string().starts_with("a:3"));
    }

    #[test]
    fn role_counts_reported_for_large_bimanual_task() {
        // 64,291 role-labelled frames at the 20/80 manipulation split.
        let n = 64_291usize;
        let manip = n / 5;
        let mut csv = String::from("frame,side,interaction,role\n");
        for i in 0..n {
            let role = if i < manip { "manipulator" } else { "stabilizer" };
            csv.push_str(&format!("{i},right,1,{role}\n"));
        }
        let labels = parse_annotations(&csv, "a").unwrap();
        let s = summarize_labels(&labels);
        assert_eq!(s.frames, n);
        assert_eq!(s.manipulator, 12_858);
        assert_eq!(s.stabilizer, n - 12_858);
        assert_eq!(s.interaction, n);
    }

    fn det(frame: usize, side: Side, conf: f64, x: u32) -> Detection {
        Detection {
            frame_index: frame,
            hand_side: side,
            bbox: BBox::new(x, 10, 40, 40),
            confidence: conf,
            contact_state: None,
            object_bbox: None,
        }
    }

    #[test]
    fn instances_by_mode() {
        let p = participant(Side::Right);
        let data = TaskData {
            detections: vec![
                det(0, Side::Left, 0.9, 10),
                det(1, Side::Right, 0.6, 100),
                det(1, Side::Right, 0.8, 300),
            ],
            labels: vec![
                FrameLabel::new(0, Side::Left, true, Role::None),
                FrameLabel::new(1, Side::Right, true, Role::None),
                FrameLabel::new(2, Side::Left, false, Role::None),
            ],
        };
        let uni = task(TaskKind::Unimanual);
        assert!(build_instances(&uni, &p, &data, Mode::Role).is_empty());
        let inst = build_instances(&uni, &p, &data, Mode::Interaction);
        assert_eq!(inst.len(), 3);
        assert_eq!(inst[0].hand_category, HandCategory::LessAffected);
        assert_eq!(inst[1].candidates.len(), 2);
        assert_eq!(inst[1].bbox().unwrap().x, 300);
        assert!(!inst[2].has_detection());

        let bi = task(TaskKind::Bimanual);
        let roles = build_instances(&bi, &p, &data, Mode::Role);
        assert_eq!(roles.len(), 2);
        assert!(roles.iter().all(|i| i.label.interaction));
    }

    #[test]
    fn dilation_clips_to_frame() {
        let b = BBox::new(10, 10, 40, 20);
        assert_eq!(b.dilated(0.5, 720, 405), BBox::new(0, 0, 70, 40));
        let c = BBox::new(100, 100, 40, 20);
        assert_eq!(c.dilated(0.5, 720, 405), BBox::new(80, 90, 80, 40));
    }
}
