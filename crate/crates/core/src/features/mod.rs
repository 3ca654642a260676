//! Colour, motion and shape descriptors of a hand instance.
//!
//! An interaction vector concatenates, in order:
//!
//! | segment         | content                                                     |
//! |-----------------|-------------------------------------------------------------|
//! | `hsv_diff`      | H, S, V histogram differences for the three region pairs    |
//! | `flow_mag_diff` | flow-magnitude histogram differences for the region pairs   |
//! | `flow_dir_diff` | flow-direction histogram differences for the region pairs   |
//! | `hog`           | HOG of the box                                              |
//!
//! Role vectors append `size_change`, the relative change of hand-mask area
//! over the following frames. Region pairs are always ordered
//! `hand − non_hand`, `hand − background`, `non_hand − background`.

pub mod cache;
pub mod extract;
pub mod flow;
pub mod hist;
pub mod hog;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::Mode;
use crate::error::{Error, Result};
use crate::masks::MaskConfig;

pub use flow::{dense_flow, FarnebackParams, FlowField, Plane};
pub use hist::{flow_region_histograms, hsv_region_histograms, FlowBins, HsvBins, Region, RegionHistograms, RegionSet};
pub use hog::{hog_descriptor, HogParams};

/// Number of region pairs whose histogram differences are kept.
pub const REGION_PAIRS: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub hsv_bins: usize,
    pub mag_bins: usize,
    /// Upper edge of the magnitude histogram in px/frame.
    pub mag_max: f64,
    pub dir_bins: usize,
    /// Fraction of box size added per side before taking the background.
    pub background_dilation: f64,
    pub flow: FarnebackParams,
    pub hog: HogParams,
    /// Frames spanned by the size-change descriptor (including the current one).
    pub size_change_frames: usize,
    pub masks: MaskConfig,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            hsv_bins: 16,
            mag_bins: 16,
            mag_max: 16.0,
            dir_bins: 18,
            background_dilation: 0.5,
            flow: FarnebackParams::default(),
            hog: HogParams::default(),
            size_change_frames: 10,
            masks: MaskConfig::default(),
        }
    }
}

impl FeatureConfig {
    pub fn layout(&self, mode: Mode) -> Layout {
        let mut segs = vec![
            ("hsv_diff", 3 * REGION_PAIRS * self.hsv_bins),
            ("flow_mag_diff", REGION_PAIRS * self.mag_bins),
            ("flow_dir_diff", REGION_PAIRS * self.dir_bins),
            ("hog", self.hog.descriptor_len()),
        ];
        if mode == Mode::Role {
            segs.push(("size_change", self.size_change_frames.saturating_sub(1)));
        }
        Layout::new(mode, &segs)
    }

    /// Stable fingerprint of every parameter that affects feature values.
    pub fn hash(&self) -> String {
        short_hash(&serde_json::to_string(self).expect("config serializes"))
    }
}

/// First 16 hex digits of the SHA-256 of `text`.
pub fn short_hash(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub name: String,
    pub offset: usize,
    pub len: usize,
}

/// Named segment table of a feature vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub mode: Mode,
    pub segments: Vec<Segment>,
}

impl Layout {
    pub fn new(mode: Mode, segments: &[(&str, usize)]) -> Self {
        let mut offset = 0;
        let segments = segments
            .iter()
            .map(|&(name, len)| {
                let s = Segment {
                    name: name.to_string(),
                    offset,
                    len,
                };
                offset += len;
                s
            })
            .collect();
        Layout { mode, segments }
    }

    pub fn len(&self) -> usize {
        self.segments.last().map_or(0, |s| s.offset + s.len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn segment(&self, name: &str) -> Option<&Segment> {
        self.segments.iter().find(|s| s.name == name)
    }

    pub fn hash(&self) -> String {
        let desc: Vec<String> = self.segments.iter().map(|s| format!("{}:{}", s.name, s.len)).collect();
        short_hash(&format!("{};{}", self.mode.as_str(), desc.join(";")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub layout: Arc<Layout>,
}

impl FeatureVector {
    pub fn mode(&self) -> Mode {
        self.layout.mode
    }

    pub fn segment(&self, name: &str) -> Option<&[f64]> {
        self.layout
            .segment(name)
            .map(|s| &self.values[s.offset..s.offset + s.len])
    }
}

/// Raw descriptors of one instance prior to assembly.
#[derive(Clone, Debug, Default)]
pub struct Components {
    pub hsv: Option<[RegionHistograms; 3]>,
    pub flow_magnitude: Option<RegionHistograms>,
    pub flow_direction: Option<RegionHistograms>,
    pub hog: Option<Vec<f64>>,
    pub size_change: Option<Vec<f64>>,
}

/// Concatenates the components required by `layout` into a vector.
pub fn assemble(layout: &Arc<Layout>, c: &Components) -> Result<FeatureVector> {
    let missing = |name: &str| Error::invalid(format!("missing feature component {name}"));
    let mut values = Vec::with_capacity(layout.len());
    for seg in &layout.segments {
        let start = values.len();
        match seg.name.as_str() {
            "hsv_diff" => {
                for ch in c.hsv.as_ref().ok_or_else(|| missing("hsv"))? {
                    values.extend(ch.differences());
                }
            }
            "flow_mag_diff" => values.extend(
                c.flow_magnitude
                    .as_ref()
                    .ok_or_else(|| missing("flow magnitude"))?
                    .differences(),
            ),
            "flow_dir_diff" => values.extend(
                c.flow_direction
                    .as_ref()
                    .ok_or_else(|| missing("flow direction"))?
                    .differences(),
            ),
            "hog" => values.extend_from_slice(c.hog.as_ref().ok_or_else(|| missing("hog"))?),
            "size_change" => values.extend_from_slice(c.size_change.as_ref().ok_or_else(|| missing("size change"))?),
            other => return Err(Error::invalid(format!("unknown segment {other}"))),
        }
        if values.len() - start != seg.len {
            return Err(Error::invalid(format!(
                "segment {} has {} values, layout expects {}",
                seg.name,
                values.len() - start,
                seg.len
            )));
        }
    }
    if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("non-finite feature at index {bad}")));
    }
    Ok(FeatureVector {
        values,
        layout: layout.clone(),
    })
}

/// Relative change of hand area between consecutive frames.
///
/// `areas` holds the mask areas of the current and following frames; a
/// sequence shorter than `frames` is padded by repeating its last area.
/// Returns `frames − 1` values `(a[i+1] − a[i]) / bbox_area`.
pub fn hand_size_change(areas: &[usize], bbox_area: usize, frames: usize) -> Vec<f64> {
    let n = frames.saturating_sub(1);
    if areas.is_empty() || bbox_area == 0 {
        return vec![0.0; n];
    }
    let at = |i: usize| areas[i.min(areas.len() - 1)] as f64;
    (0..n).map(|i| (at(i + 1) - at(i)) / bbox_area as f64).collect()
}
