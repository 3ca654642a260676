//! Per-task feature extraction over pre-extracted frames.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use image::RgbImage;
use serde::{Deserialize, Serialize};

use super::{
    assemble, dense_flow, hand_size_change, hog_descriptor, Components, FeatureConfig, FlowBins, FlowField, HsvBins,
    Layout, Plane, RegionSet,
};
use crate::corpus::{BBox, Corpus, Detection, HandInstance, Mode, Side, Task};
use crate::error::{Error, Result};
use crate::masks::MaskProvenance;
use crate::par::Execution;

pub type InstanceKey = (String, usize, Side);

pub fn load_frame(path: &Path) -> Result<RgbImage> {
    Ok(image::open(path)
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })?
        .to_rgb8())
}

fn load_task_frame(task: &Task, index: usize) -> Result<RgbImage> {
    let img = load_frame(&task.frame_path(index))?;
    if img.dimensions() != task.resolution {
        return Err(Error::invalid(format!(
            "task {}: frame {index} is {}x{}, expected {}x{}",
            task.id,
            img.width(),
            img.height(),
            task.resolution.0,
            task.resolution.1
        )));
    }
    Ok(img)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskTally {
    pub file: usize,
    pub heuristic: usize,
    pub empty: usize,
}

impl MaskTally {
    fn add(&mut self, prov: MaskProvenance, empty: bool) {
        match prov {
            MaskProvenance::File => self.file += 1,
            MaskProvenance::Heuristic => self.heuristic += 1,
        }
        self.empty += usize::from(empty);
    }

    pub fn merge(&mut self, other: &MaskTally) {
        self.file += other.file;
        self.heuristic += other.heuristic;
        self.empty += other.empty;
    }
}

/// Feature vectors of every instance (with a detection) in a set of tasks,
/// for one mode.
#[derive(Clone, Debug)]
pub struct FeatureTable {
    pub layout: Arc<Layout>,
    pub rows: BTreeMap<InstanceKey, Vec<f64>>,
    pub masks: MaskTally,
}

impl FeatureTable {
    pub fn get(&self, task: &str, frame: usize, side: Side) -> Option<&[f64]> {
        self.rows.get(&(task.to_string(), frame, side)).map(Vec::as_slice)
    }
}

struct FrameOutput {
    frame: usize,
    areas: Vec<(Side, usize)>,
    vectors: Vec<(Side, Vec<f64>, usize)>,
    masks: MaskTally,
}

fn primary(dets: &[&Detection]) -> Option<BBox> {
    dets.iter()
        .copied()
        .reduce(|best, d| if d.confidence > best.confidence { d } else { best })
        .map(|d| d.bbox)
}

/// Extracts the features of every detected instance of `task` for `mode`.
/// Instances without a detection are skipped; they are decided negative
/// downstream.
pub fn extract_task(
    corpus: &Corpus,
    task: &Task,
    config: &FeatureConfig,
    mode: Mode,
    exec: Execution,
) -> Result<FeatureTable> {
    let layout = Arc::new(config.layout(mode));
    let instances: Vec<HandInstance> = corpus.instances(task, mode);
    let data = corpus
        .task_data(&task.id)
        .ok_or_else(|| Error::invalid(format!("task {}: data not loaded", task.id)))?;

    let mut dets_by_frame: BTreeMap<usize, Vec<&Detection>> = BTreeMap::new();
    for d in &data.detections {
        dets_by_frame.entry(d.frame_index).or_default().push(d);
    }
    let mut wanted: BTreeMap<usize, Vec<Side>> = BTreeMap::new();
    for inst in instances.iter().filter(|i| i.has_detection()) {
        wanted.entry(inst.frame_index).or_default().push(inst.hand_side);
    }

    if wanted.is_empty() {
        return Ok(FeatureTable {
            layout,
            rows: BTreeMap::new(),
            masks: MaskTally::default(),
        });
    }

    // Frames that need masks: every detected frame in role mode (the size
    // change looks ahead), otherwise only the frames being described.
    let frames: Vec<usize> = match mode {
        Mode::Role => dets_by_frame.keys().copied().collect(),
        Mode::Interaction => wanted.keys().copied().collect(),
    };
    let (w, h) = task.resolution;

    let outputs: Vec<Result<FrameOutput>> = exec.map(&frames, |&t| {
        let frame = load_task_frame(task, t)?;
        let mut out = FrameOutput {
            frame: t,
            areas: Vec::new(),
            vectors: Vec::new(),
            masks: MaskTally::default(),
        };
        let dets = dets_by_frame.get(&t).map(Vec::as_slice).unwrap_or(&[]);
        let sides = wanted.get(&t).map(Vec::as_slice).unwrap_or(&[]);

        let mut described = None;
        for side in Side::BOTH {
            let same: Vec<&Detection> = dets.iter().copied().filter(|d| d.hand_side == side).collect();
            let Some(bbox) = primary(&same) else { continue };
            let (mask, prov) = config.masks.provide(task.masks.as_deref(), t, side, &frame, bbox)?;
            out.masks.add(prov, mask.is_empty());
            out.areas.push((side, mask.area));
            if !sides.contains(&side) {
                continue;
            }
            let (hsv, flow_bins) = match &described {
                Some(v) => v,
                None => {
                    let flow = if t == 0 {
                        FlowField::zeros(w as usize, h as usize)
                    } else {
                        let prev = Plane::from_rgb(&load_task_frame(task, t - 1)?);
                        dense_flow(&prev, &Plane::from_rgb(&frame), &config.flow, exec)
                    };
                    described.insert((
                        HsvBins::new(&frame, config.hsv_bins),
                        FlowBins::new(&flow, config.mag_bins, config.mag_max, config.dir_bins),
                    ))
                }
            };
            let regions = RegionSet::new(w, h, &mask, config.background_dilation);
            let (fm, fd) = flow_bins.region_histograms(&regions);
            let components = Components {
                hsv: Some(hsv.region_histograms(&regions)),
                flow_magnitude: Some(fm),
                flow_direction: Some(fd),
                hog: Some(hog_descriptor(&frame, bbox, &config.hog)?),
                size_change: None,
            };
            let base = assemble(&Arc::new(config.layout(Mode::Interaction)), &components)?;
            out.vectors.push((side, base.values, bbox.area()));
        }
        Ok(out)
    });

    let mut areas: BTreeMap<(usize, Side), usize> = BTreeMap::new();
    let mut base: Vec<(usize, Side, Vec<f64>, usize)> = Vec::new();
    let mut masks = MaskTally::default();
    for o in outputs {
        let o = o?;
        masks.merge(&o.masks);
        for (side, a) in o.areas {
            areas.insert((o.frame, side), a);
        }
        for (side, v, bbox_area) in o.vectors {
            base.push((o.frame, side, v, bbox_area));
        }
    }

    let mut rows = BTreeMap::new();
    for (t, side, mut values, bbox_area) in base {
        if mode == Mode::Role {
            let span = config.size_change_frames.max(1);
            let last = (t + span).min(task.frame_count);
            let mut seq = Vec::with_capacity(span);
            for f in t..last {
                // A frame without a detection keeps the previous area.
                let a = areas
                    .get(&(f, side))
                    .copied()
                    .or_else(|| seq.last().copied())
                    .unwrap_or(0);
                seq.push(a);
            }
            values.extend(hand_size_change(&seq, bbox_area, span));
        }
        debug_assert_eq!(values.len(), layout.len());
        rows.insert((task.id.clone(), t, side), values);
    }
    Ok(FeatureTable { layout, rows, masks })
}

/// Extracts every task in `tasks` (in order) and merges the tables.
pub fn extract_tasks(
    corpus: &Corpus,
    tasks: &[&Task],
    config: &FeatureConfig,
    mode: Mode,
    exec: Execution,
) -> Result<FeatureTable> {
    let mut table = FeatureTable {
        layout: Arc::new(config.layout(mode)),
        rows: BTreeMap::new(),
        masks: MaskTally::default(),
    };
    for task in tasks {
        log::info!("extracting {} ({} frames)", task.id, task.frame_count);
        let t = extract_task(corpus, task, config, mode, exec)?;
        table.masks.merge(&t.masks);
        table.rows.extend(t.rows);
    }
    Ok(table)
}
