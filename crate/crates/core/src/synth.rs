//! Synthetic corpus with a planted, learnable signal.
//!
//! Hands are skin-coloured ellipses over a static blue-grey texture. A hand
//! that interacts holds a green object overlapping its box; a manipulating
//! hand moves and changes size, a stabilizing one stays still. Idle hands
//! drift slowly. Detections follow the drawn hands, with occasional missing
//! boxes, duplicate boxes and contact-state noise.

use std::fs;
use std::path::{Path, PathBuf};

use image::{GrayImage, Luma, Rgb, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{
    annotations_to_csv, detections_to_jsonl, BBox, ContactState, Dataset, Detection, FrameLabel, Manifest, Mode,
    ParticipantEntry, Role, Side, TaskEntry, TaskKind,
};
use crate::error::{Error, Result};
use crate::fusion::{window_len, windows_to_jsonl, WindowRecord};
use crate::masks::mask_file_name;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub participants: usize,
    pub frames_per_task: usize,
    pub width: u32,
    pub height: u32,
    pub seed: u64,
    /// Probability that a hand has no detection in a frame.
    pub missing_rate: f64,
    /// Probability that a detection carries a second, weaker box.
    pub duplicate_rate: f64,
    /// Probability that a reported contact state is wrong.
    pub contact_noise: f64,
    /// Write mask files for the first participant's tasks.
    pub masks_for_first: bool,
    pub windows: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            participants: 3,
            frames_per_task: 40,
            width: 720,
            height: 405,
            seed: 7,
            missing_rate: 0.02,
            duplicate_rate: 0.03,
            contact_noise: 0.05,
            masks_for_first: true,
            windows: true,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.participants < 2 {
            return Err(Error::invalid("synthetic corpus needs at least two participants"));
        }
        if self.frames_per_task < 2 {
            return Err(Error::invalid("synthetic tasks need at least two frames"));
        }
        if self.width < 64 || self.height < 36 {
            return Err(Error::invalid("synthetic frames must be at least 64x36"));
        }
        for (name, p) in [
            ("missing_rate", self.missing_rate),
            ("duplicate_rate", self.duplicate_rate),
            ("contact_noise", self.contact_noise),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("{name} must lie in [0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSummary {
    pub manifest: PathBuf,
    pub windows: Option<PathBuf>,
    pub rater_a: PathBuf,
    pub rater_b: PathBuf,
    pub participants: usize,
    pub tasks: usize,
    pub frames: usize,
}

/// Task plan of one participant: four Home tasks and one HomeLab task.
const PLAN: [(&str, Dataset, TaskKind); 5] = [
    ("H1", Dataset::Home, TaskKind::Bimanual),
    ("H2", Dataset::Home, TaskKind::Bimanual),
    ("H3", Dataset::Home, TaskKind::Unimanual),
    ("H4", Dataset::Home, TaskKind::Negative),
    ("L1", Dataset::HomeLab, TaskKind::Bimanual),
];

#[derive(Clone, Copy, Debug, PartialEq)]
struct HandState {
    interacting: bool,
    role: Role,
}

fn schedule(kind: TaskKind, variant: usize, n: usize, frame: usize, side: Side, active: Side) -> HandState {
    let idle = HandState {
        interacting: false,
        role: Role::None,
    };
    let t = frame as f64 / n as f64;
    match kind {
        TaskKind::Negative => idle,
        TaskKind::Unimanual => {
            if side == active && (0.25..0.75).contains(&t) {
                HandState {
                    interacting: true,
                    role: Role::None,
                }
            } else {
                idle
            }
        }
        TaskKind::Bimanual => {
            let spans: &[(f64, f64)] = if variant.is_multiple_of(2) {
                &[(0.2, 0.8)]
            } else {
                &[(0.1, 0.5), (0.6, 0.9)]
            };
            let Some(&(a, b)) = spans.iter().find(|(a, b)| (*a..*b).contains(&t)) else {
                return idle;
            };
            // The manipulating hand swaps halfway through each span.
            let first_half = t < (a + b) / 2.0;
            let manip = if first_half { Side::Left } else { Side::Right };
            HandState {
                interacting: true,
                role: if side == manip {
                    Role::Manipulator
                } else {
                    Role::Stabilizer
                },
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Ellipse {
    cx: f64,
    cy: f64,
    rx: f64,
    ry: f64,
}

impl Ellipse {
    fn contains(&self, x: f64, y: f64) -> bool {
        let dx = (x - self.cx) / self.rx;
        let dy = (y - self.cy) / self.ry;
        dx * dx + dy * dy <= 1.0
    }

    fn bbox(&self, margin: f64, w: u32, h: u32) -> BBox {
        BBox::clamped(
            self.cx - self.rx - margin,
            self.cy - self.ry - margin,
            2.0 * (self.rx + margin),
            2.0 * (self.ry + margin),
            w,
            h,
        )
    }
}

fn hand_shape(cfg: &SynthConfig, side: Side, frame: usize, state: HandState) -> Ellipse {
    let s = cfg.width as f64 / 720.0;
    let base_x = match side {
        Side::Left => 0.3,
        Side::Right => 0.7,
    } * cfg.width as f64;
    let base_y = 0.6 * cfg.height as f64;
    let t = frame as f64;
    let (dx, dy, scale) = match (state.interacting, state.role) {
        (true, Role::Manipulator) => (
            9.0 * s * (t * std::f64::consts::TAU / 8.0).sin(),
            5.0 * s * (t * std::f64::consts::TAU / 6.0).cos(),
            1.0 + 0.18 * (t * std::f64::consts::TAU / 6.0).sin(),
        ),
        (true, _) => (0.0, 0.0, 1.0),
        (false, _) => (2.0 * s * (t / 5.0).sin(), 0.0, 1.0),
    };
    Ellipse {
        cx: base_x + dx,
        cy: base_y + dy,
        rx: 0.06 * cfg.width as f64 * scale,
        ry: 0.1 * cfg.height as f64 * scale,
    }
}

fn background(w: u32, h: u32, seed: u64) -> RgbImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phase: f64 = rng.random_range(0.0..6.0);
    RgbImage::from_fn(w, h, |x, y| {
        let (xf, yf) = (x as f64, y as f64);
        let tex = 40.0 * (xf * 0.21 + phase).sin() * (yf * 0.17).cos() + 20.0 * ((xf + 2.0 * yf) * 0.05).sin();
        let noise = ((x.wrapping_mul(73_856_093) ^ y.wrapping_mul(19_349_663)) % 23) as f64 - 11.0;
        let v = (100.0 + tex + noise).clamp(20.0, 200.0);
        Rgb([(v * 0.55) as u8, (v * 0.7) as u8, v as u8])
    })
}

const SKIN: [f64; 3] = [214.0, 164.0, 128.0];
const OBJECT: Rgb<u8> = Rgb([40, 170, 60]);

/// Draws one frame.
fn render(cfg: &SynthConfig, bg: &RgbImage, hands: &[(Side, Ellipse, HandState)]) -> RgbImage {
    let mut img = bg.clone();
    let (w, h) = (cfg.width, cfg.height);
    for &(side, e, state) in hands {
        let x0 = (e.cx - e.rx).floor().max(0.0) as u32;
        let x1 = ((e.cx + e.rx).ceil() as u32).min(w - 1);
        let y0 = (e.cy - e.ry).floor().max(0.0) as u32;
        let y1 = ((e.cy + e.ry).ceil() as u32).min(h - 1);
        for y in y0..=y1 {
            for x in x0..=x1 {
                if e.contains(x as f64, y as f64) {
                    // Mild shading keeps the hand textured but inside the skin band.
                    let shade = 0.9 + 0.1 * ((x as f64 - e.cx) / e.rx);
                    let c = SKIN.map(|v| (v * shade).clamp(0.0, 255.0) as u8);
                    img.put_pixel(x, y, Rgb(c));
                }
            }
        }
        if state.interacting {
            // Object held at the inner edge of the hand, half inside the box.
            let ow = e.rx * 0.9;
            let oh = e.ry * 0.8;
            let ox = match side {
                Side::Left => e.cx + e.rx * 0.55,
                Side::Right => e.cx - e.rx * 0.55 - ow,
            };
            let oy = e.cy - oh * 0.8;
            let xa = ox.max(0.0) as u32;
            let xb = ((ox + ow) as u32).min(w - 1);
            let ya = oy.max(0.0) as u32;
            let yb = ((oy + oh) as u32).min(h - 1);
            for y in ya..=yb {
                for x in xa..=xb {
                    img.put_pixel(x, y, OBJECT);
                }
            }
        }
    }
    img
}

/// Visible hand pixels: the ellipse minus whatever the object covers.
fn mask_image(cfg: &SynthConfig, e: &Ellipse, frame: &RgbImage) -> GrayImage {
    GrayImage::from_fn(cfg.width, cfg.height, |x, y| {
        let hand = e.contains(x as f64, y as f64) && *frame.get_pixel(x, y) != OBJECT;
        Luma([if hand { 255 } else { 0 }])
    })
}

fn io<T>(path: &Path, r: std::io::Result<T>) -> Result<T> {
    r.map_err(|e| Error::io(path, e))
}

fn save_png(path: &Path, img: &impl SaveAs) -> Result<()> {
    img.save_as(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}

trait SaveAs {
    fn save_as(&self, path: &Path) -> image::ImageResult<()>;
}

impl SaveAs for RgbImage {
    fn save_as(&self, path: &Path) -> image::ImageResult<()> {
        self.save(path)
    }
}

impl SaveAs for GrayImage {
    fn save_as(&self, path: &Path) -> image::ImageResult<()> {
        self.save(path)
    }
}

fn windows_for(task: &str, labels: &[FrameLabel], n: usize) -> Vec<WindowRecord> {
    let mut out = Vec::new();
    for mode in [Mode::Interaction, Mode::Role] {
        let len = window_len(mode);
        for side in Side::BOTH {
            let mut start = 0;
            while start < n {
                let end = (start + len).min(n);
                let span: Vec<&FrameLabel> = labels
                    .iter()
                    .filter(|l| l.hand_side == side && (start..end).contains(&l.frame_index))
                    .collect();
                let relevant: Vec<&&FrameLabel> = match mode {
                    Mode::Interaction => span.iter().collect(),
                    Mode::Role => span.iter().filter(|l| l.interaction).collect(),
                };
                let pos = relevant.iter().filter(|l| l.target(mode)).count();
                out.push(WindowRecord {
                    task: task.to_string(),
                    side,
                    start,
                    len,
                    mode,
                    decision: !relevant.is_empty() && 2 * pos >= relevant.len(),
                });
                start += len / 2;
            }
        }
    }
    out
}

fn rater_csv(rows: &[(String, FrameLabel)]) -> String {
    let mut s = String::from("task,frame,side,interaction,role\n");
    for (task, l) in rows {
        s.push_str(&format!(
            "{task},{},{},{},{}\n",
            l.frame_index,
            l.hand_side,
            u8::from(l.interaction),
            l.role.as_str()
        ));
    }
    s
}

/// Writes a synthetic corpus under `root` (created if needed) and returns
/// where its pieces went. The same config always produces the same bytes.
pub fn generate(root: &Path, cfg: &SynthConfig) -> Result<SynthSummary> {
    cfg.validate()?;
    io(root, fs::create_dir_all(root))?;
    let n = cfg.frames_per_task;
    let mut participants = Vec::new();
    let mut tasks = Vec::new();
    let mut windows = Vec::new();
    let mut rater_a = Vec::new();
    let mut rater_b = Vec::new();
    let mut rater_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xA5A5);

    for p in 0..cfg.participants {
        let pid = format!("P{:02}", p + 1);
        let affected = if p % 2 == 0 { Side::Left } else { Side::Right };
        let less_affected = if affected == Side::Left {
            Side::Right
        } else {
            Side::Left
        };
        participants.push(ParticipantEntry {
            id: pid.clone(),
            affected_side: affected,
        });
        for (ti, (suffix, dataset, kind)) in PLAN.iter().enumerate() {
            let tid = format!("{pid}_{suffix}");
            let dir = root.join(&tid);
            let frames_dir = dir.join("frames");
            io(&frames_dir, fs::create_dir_all(&frames_dir))?;
            let masks_dir = (cfg.masks_for_first && p == 0).then(|| dir.join("masks"));
            if let Some(m) = &masks_dir {
                io(m, fs::create_dir_all(m))?;
            }
            let task_seed = cfg
                .seed
                .wrapping_mul(1_000_003)
                .wrapping_add((p * PLAN.len() + ti) as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(task_seed);
            let bg = background(cfg.width, cfg.height, task_seed);

            let mut labels = Vec::new();
            let mut detections = Vec::new();
            for f in 0..n {
                let hands: Vec<(Side, Ellipse, HandState)> = Side::BOTH
                    .into_iter()
                    .map(|side| {
                        let st = schedule(*kind, ti, n, f, side, less_affected);
                        (side, hand_shape(cfg, side, f, st), st)
                    })
                    .collect();
                let img = render(cfg, &bg, &hands);
                save_png(&frames_dir.join(format!("{f:06}.png")), &img)?;
                for &(side, e, st) in &hands {
                    labels.push(FrameLabel::new(f, side, st.interacting, st.role));
                    if let Some(m) = &masks_dir {
                        save_png(&m.join(mask_file_name(f, side)), &mask_image(cfg, &e, &img))?;
                    }
                    if rng.random::<f64>() < cfg.missing_rate {
                        continue;
                    }
                    let truth = if st.interacting {
                        ContactState::PortableObject
                    } else {
                        ContactState::NoContact
                    };
                    let contact = if rng.random::<f64>() < cfg.contact_noise {
                        if st.interacting {
                            ContactState::SelfContact
                        } else {
                            ContactState::PortableObject
                        }
                    } else {
                        truth
                    };
                    let bbox = e.bbox(4.0 * cfg.width as f64 / 720.0, cfg.width, cfg.height);
                    let confidence = 0.8 + 0.15 * rng.random::<f64>();
                    detections.push(Detection {
                        frame_index: f,
                        hand_side: side,
                        bbox,
                        confidence,
                        contact_state: Some(contact),
                        object_bbox: None,
                    });
                    if rng.random::<f64>() < cfg.duplicate_rate {
                        let shifted = BBox::clamped(
                            bbox.x as f64 + 3.0,
                            bbox.y as f64 + 2.0,
                            bbox.w as f64,
                            bbox.h as f64,
                            cfg.width,
                            cfg.height,
                        );
                        detections.push(Detection {
                            frame_index: f,
                            hand_side: side,
                            bbox: shifted,
                            confidence: confidence * 0.5,
                            contact_state: Some(truth),
                            object_bbox: None,
                        });
                    }
                }
            }
            io(
                &dir,
                fs::write(dir.join("detections.jsonl"), detections_to_jsonl(&detections)),
            )?;
            io(
                &dir,
                fs::write(dir.join("annotations.csv"), annotations_to_csv(&labels)),
            )?;
            if cfg.windows {
                windows.extend(windows_for(&tid, &labels, n));
            }
            for l in &labels {
                rater_a.push((tid.clone(), *l));
                let mut b = *l;
                if rater_rng.random::<f64>() < 0.05 && *kind != TaskKind::Negative {
                    b.interaction = !b.interaction;
                    b.role = Role::None;
                }
                rater_b.push((tid.clone(), b));
            }
            tasks.push(TaskEntry {
                id: tid.clone(),
                participant_id: pid.clone(),
                dataset: *dataset,
                kind: *kind,
                frames_dir: format!("{tid}/frames"),
                frame_count: Some(n),
                fps: 30.0,
                resolution: [cfg.width, cfg.height],
                detections: format!("{tid}/detections.jsonl"),
                annotations: format!("{tid}/annotations.csv"),
                masks: masks_dir.as_ref().map(|_| format!("{tid}/masks")),
            });
        }
    }

    let manifest_path = root.join("manifest.json");
    let manifest = Manifest { participants, tasks };
    manifest.write(&manifest_path)?;
    let windows_path = if cfg.windows {
        let p = root.join("windows.jsonl");
        io(&p, fs::write(&p, windows_to_jsonl(&windows)))?;
        Some(p)
    } else {
        None
    };
    let rater_a_path = root.join("rater_a.csv");
    let rater_b_path = root.join("rater_b.csv");
    io(&rater_a_path, fs::write(&rater_a_path, rater_csv(&rater_a)))?;
    io(&rater_b_path, fs::write(&rater_b_path, rater_csv(&rater_b)))?;
    Ok(SynthSummary {
        manifest: manifest_path,
        windows: windows_path,
        rater_a: rater_a_path,
        rater_b: rater_b_path,
        participants: cfg.participants,
        tasks: manifest.tasks.len(),
        frames: manifest.tasks.len() * n,
    })
}
