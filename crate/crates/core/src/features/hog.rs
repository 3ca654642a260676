//! Histogram of oriented gradients over a hand box.
//!
//! The crop is converted to grayscale and resized to a square window, then
//! described Dalal-Triggs style: centred `[-1, 0, 1]` gradients, unsigned
//! orientation histograms per cell with linear interpolation between
//! neighbouring bin centres, and overlapping blocks normalized with L2-Hys.
//!
//! Orientations are those of the edge, i.e. perpendicular to the gradient,
//! so a vertical step edge lands in the bin containing 90°.

use image::imageops::{self, FilterType};
use image::{GrayImage, RgbImage};
use serde::{Deserialize, Serialize};

use crate::corpus::BBox;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HogParams {
    pub window: u32,
    pub cell: usize,
    /// Block side in cells; blocks move one cell at a time.
    pub block: usize,
    pub bins: usize,
    pub clip: f64,
}

impl Default for HogParams {
    fn default() -> Self {
        HogParams {
            window: 64,
            cell: 8,
            block: 2,
            bins: 9,
            clip: 0.2,
        }
    }
}

impl HogParams {
    pub fn descriptor_len(&self) -> usize {
        let cells = self.window as usize / self.cell;
        let blocks = cells + 1 - self.block;
        blocks * blocks * self.block * self.block * self.bins
    }
}

/// HOG of the `bbox` crop of `frame`.
pub fn hog_descriptor(frame: &RgbImage, bbox: BBox, params: &HogParams) -> Result<Vec<f64>> {
    if bbox.w == 0 || bbox.h == 0 {
        return Err(Error::invalid(format!("degenerate box {bbox:?} for HOG")));
    }
    let crop = imageops::crop_imm(frame, bbox.x, bbox.y, bbox.w, bbox.h).to_image();
    let gray = imageops::grayscale(&crop);
    let window = imageops::resize(&gray, params.window, params.window, FilterType::Triangle);
    Ok(hog_window(&window, params))
}

/// HOG of an already-sized grayscale window.
pub fn hog_window(img: &GrayImage, params: &HogParams) -> Vec<f64> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let px = |x: usize, y: usize| img.get_pixel(x as u32, y as u32).0[0] as f64;
    let cells_x = w / params.cell;
    let cells_y = h / params.cell;
    let nb = params.bins;
    let bin_width = 180.0 / nb as f64;
    let mut cells = vec![0.0f64; cells_x * cells_y * nb];

    for y in 0..cells_y * params.cell {
        for x in 0..cells_x * params.cell {
            // Border pixels have no centred gradient.
            if x == 0 || y == 0 || x + 1 >= w || y + 1 >= h {
                continue;
            }
            let gx = px(x + 1, y) - px(x - 1, y);
            let gy = px(x, y + 1) - px(x, y - 1);
            let mag = (gx * gx + gy * gy).sqrt();
            if mag == 0.0 {
                continue;
            }
            let edge = (gy.atan2(gx).to_degrees() + 90.0).rem_euclid(180.0);
            let pos = edge / bin_width - 0.5;
            let lo = pos.floor();
            let frac = pos - lo;
            let b0 = (lo as isize).rem_euclid(nb as isize) as usize;
            let b1 = (b0 + 1) % nb;
            let cell = (y / params.cell) * cells_x + x / params.cell;
            cells[cell * nb + b0] += (1.0 - frac) * mag;
            cells[cell * nb + b1] += frac * mag;
        }
    }

    let blocks_x = cells_x + 1 - params.block;
    let blocks_y = cells_y + 1 - params.block;
    let block_len = params.block * params.block * nb;
    let mut out = Vec::with_capacity(blocks_x * blocks_y * block_len);
    const EPS: f64 = 1e-6;
    for by in 0..blocks_y {
        for bx in 0..blocks_x {
            let mut v = Vec::with_capacity(block_len);
            for cy in by..by + params.block {
                for cx in bx..bx + params.block {
                    let c = cy * cells_x + cx;
                    v.extend_from_slice(&cells[c * nb..(c + 1) * nb]);
                }
            }
            let norm = (v.iter().map(|a| a * a).sum::<f64>() + EPS * EPS).sqrt();
            v.iter_mut().for_each(|a| *a = (*a / norm).min(params.clip));
            let norm = (v.iter().map(|a| a * a).sum::<f64>() + EPS * EPS).sqrt();
            v.iter_mut().for_each(|a| *a /= norm);
            out.extend(v);
        }
    }
    out
}
