//! Hand / non-hand partition inside a bounding box.
//!
//! Masks come either from precomputed grayscale PNGs (one per frame and
//! side, `{frame:06}_{side}.png`, nonzero = hand) or from an HSV skin-colour
//! heuristic followed by a largest-component filter.

use std::path::{Path, PathBuf};

use image::{GrayImage, RgbImage};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::color::rgb_to_hsv;
use crate::corpus::{BBox, Side};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HandMask {
    pub bbox: BBox,
    /// Row-major `h × w` grid in box-local coordinates.
    pub bitmap: Vec<bool>,
    pub area: usize,
}

impl HandMask {
    pub fn new(bbox: BBox, bitmap: Vec<bool>) -> Self {
        debug_assert_eq!(bitmap.len(), bbox.area());
        let area = bitmap.iter().filter(|&&b| b).count();
        HandMask { bbox, bitmap, area }
    }

    pub fn empty(bbox: BBox) -> Self {
        HandMask::new(bbox, vec![false; bbox.area()])
    }

    pub fn full(bbox: BBox) -> Self {
        HandMask::new(bbox, vec![true; bbox.area()])
    }

    /// True when no pixel is marked as hand.
    pub fn is_empty(&self) -> bool {
        self.area == 0
    }

    /// Membership for a frame coordinate inside the box.
    #[inline]
    pub fn contains_frame(&self, x: u32, y: u32) -> bool {
        let lx = (x - self.bbox.x) as usize;
        let ly = (y - self.bbox.y) as usize;
        self.bitmap[ly * self.bbox.w as usize + lx]
    }

    /// Flips `round(fraction · w · h)` distinct pixels chosen by `seed`.
    pub fn perturb(&mut self, fraction: f64, seed: u64) {
        let n = self.bitmap.len();
        let k = ((fraction.clamp(0.0, 1.0) * n as f64).round() as usize).min(n);
        if k == 0 {
            return;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in sample(&mut rng, n, k) {
            self.bitmap[i] = !self.bitmap[i];
        }
        self.area = self.bitmap.iter().filter(|&&b| b).count();
    }
}

/// Conventional file name of a precomputed mask.
pub fn mask_file_name(frame_index: usize, side: Side) -> String {
    format!("{frame_index:06}_{side}.png")
}

pub fn mask_path(dir: &Path, frame_index: usize, side: Side) -> PathBuf {
    dir.join(mask_file_name(frame_index, side))
}

/// Crops a frame-aligned grayscale mask to `bbox`; nonzero pixels are hand.
pub fn mask_from_gray(img: &GrayImage, bbox: BBox) -> HandMask {
    let mut bitmap = Vec::with_capacity(bbox.area());
    for y in bbox.y..bbox.bottom() {
        for x in bbox.x..bbox.right() {
            bitmap.push(img.get_pixel(x, y).0[0] > 0);
        }
    }
    HandMask::new(bbox, bitmap)
}

/// Reads a precomputed mask file aligned to a `frame_dims` frame.
pub fn ingest_mask(path: &Path, bbox: BBox, frame_dims: (u32, u32)) -> Result<HandMask> {
    let img = image::open(path)
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })?
        .to_luma8();
    if img.dimensions() != frame_dims {
        return Err(Error::invalid(format!(
            "{}: mask is {}x{}, frame is {}x{}",
            path.display(),
            img.width(),
            img.height(),
            frame_dims.0,
            frame_dims.1
        )));
    }
    let mask = mask_from_gray(&img, bbox);
    if mask.is_empty() {
        log::debug!("{}: empty mask", path.display());
    }
    Ok(mask)
}

/// HSV band accepted as skin by the heuristic. Hue in degrees, saturation
/// and value in `[0, 1]`; all bounds inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkinBand {
    pub hue: (f64, f64),
    pub saturation: (f64, f64),
    pub value: (f64, f64),
}

impl Default for SkinBand {
    fn default() -> Self {
        SkinBand {
            hue: (0.0, 50.0),
            saturation: (0.15, 0.9),
            value: (0.2, 1.0),
        }
    }
}

impl SkinBand {
    pub fn contains(&self, r: u8, g: u8, b: u8) -> bool {
        let (h, s, v) = rgb_to_hsv(r, g, b);
        let within = |x: f64, (lo, hi): (f64, f64)| x >= lo && x <= hi;
        within(h, self.hue) && within(s, self.saturation) && within(v, self.value)
    }
}

/// Skin-band segmentation inside `bbox`, keeping the largest 4-connected
/// component. Pixels outside the box are never read.
pub fn heuristic_mask(frame: &RgbImage, bbox: BBox, band: &SkinBand) -> HandMask {
    let w = bbox.w as usize;
    let h = bbox.h as usize;
    let mut raw = vec![false; w * h];
    for ly in 0..h {
        for lx in 0..w {
            let p = frame.get_pixel(bbox.x + lx as u32, bbox.y + ly as u32).0;
            raw[ly * w + lx] = band.contains(p[0], p[1], p[2]);
        }
    }
    HandMask::new(bbox, largest_component(&raw, w, h))
}

/// Keeps only the largest 4-connected `true` component. Ties go to the
/// component whose first pixel comes first in raster order.
pub fn largest_component(bitmap: &[bool], w: usize, h: usize) -> Vec<bool> {
    let mut labels = vec![0u32; bitmap.len()];
    let mut best = (0u32, 0usize);
    let mut next = 0u32;
    let mut stack = Vec::new();
    for start in 0..bitmap.len() {
        if !bitmap[start] || labels[start] != 0 {
            continue;
        }
        next += 1;
        labels[start] = next;
        stack.push(start);
        let mut size = 0usize;
        while let Some(i) = stack.pop() {
            size += 1;
            let (x, y) = (i % w, i / w);
            let mut visit = |j: usize| {
                if bitmap[j] && labels[j] == 0 {
                    labels[j] = next;
                    stack.push(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        if size > best.1 {
            best = (next, size);
        }
    }
    labels.iter().map(|&l| l != 0 && l == best.0).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskProvenance {
    File,
    Heuristic,
}

/// How masks are obtained during feature extraction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaskConfig {
    /// Use mask files when the task provides them.
    pub prefer_files: bool,
    pub skin: SkinBand,
    /// Fraction of mask pixels flipped after provision (robustness probes).
    #[serde(default)]
    pub flip_fraction: f64,
    #[serde(default)]
    pub flip_seed: u64,
}

impl Default for MaskConfig {
    fn default() -> Self {
        MaskConfig {
            prefer_files: true,
            skin: SkinBand::default(),
            flip_fraction: 0.0,
            flip_seed: 0,
        }
    }
}

impl MaskConfig {
    /// Mask for one hand in one frame: the task's mask file if present and
    /// preferred, otherwise the skin heuristic.
    pub fn provide(
        &self,
        mask_dir: Option<&Path>,
        frame_index: usize,
        side: Side,
        frame: &RgbImage,
        bbox: BBox,
    ) -> Result<(HandMask, MaskProvenance)> {
        let file = mask_dir
            .filter(|_| self.prefer_files)
            .map(|d| mask_path(d, frame_index, side))
            .filter(|p| p.is_file());
        let (mut mask, prov) = match file {
            Some(p) => (ingest_mask(&p, bbox, frame.dimensions())?, MaskProvenance::File),
            None => (heuristic_mask(frame, bbox, &self.skin), MaskProvenance::Heuristic),
        };
        if self.flip_fraction > 0.0 {
            let seed = self
                .flip_seed
                .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                .wrapping_add((frame_index as u64) << 1 | (side == Side::Right) as u64);
            mask.perturb(self.flip_fraction, seed);
        }
        Ok((mask, prov))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::{Luma, Rgb};

    const SKIN: Rgb<u8> = Rgb([224, 172, 138]);
    const BLUE: Rgb<u8> = Rgb([40, 60, 200]);

    #[test]
    fn full_half_and_empty_file_masks() {
        let bbox = BBox::new(10, 20, 50, 60);
        let full = GrayImage::from_pixel(720, 405, Luma([255]));
        assert_eq!(mask_from_gray(&full, bbox).area, 3000);

        let empty = GrayImage::new(720, 405);
        let m = mask_from_gray(&empty, bbox);
        assert_eq!(m.area, 0);
        assert!(m.is_empty());

        let bbox = BBox::new(100, 100, 40, 40);
        let half = GrayImage::from_fn(720, 405, |x, _| Luma([if x < 120 { 255 } else { 0 }]));
        assert_eq!(mask_from_gray(&half, bbox).area, 800);
    }

    #[test]
    fn ingest_checks_dimensions() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join(mask_file_name(3, Side::Left));
        GrayImage::from_pixel(64, 48, Luma([255])).save(&p).unwrap();
        let m = ingest_mask(&p, BBox::new(0, 0, 10, 10), (64, 48)).unwrap();
        assert_eq!(m.area, 100);
        assert!(ingest_mask(&p, BBox::new(0, 0, 10, 10), (720, 405)).is_err());
        assert!(
            ingest_mask(&dir.path().join("nope.png"), BBox::new(0, 0, 1, 1), (64, 48))
                .unwrap_err()
                .is_io()
        );
    }

    #[test]
    fn skin_defaults() {
        let band = SkinBand::default();
        assert!(band.contains(SKIN.0[0], SKIN.0[1], SKIN.0[2]));
        assert!(!band.contains(BLUE.0[0], BLUE.0[1], BLUE.0[2]));
    }

    #[test]
    fn uniform_boxes() {
        let bbox = BBox::new(5, 5, 30, 20);
        let skin = RgbImage::from_pixel(64, 48, SKIN);
        assert_eq!(heuristic_mask(&skin, bbox, &SkinBand::default()).area, 600);
        let blue = RgbImage::from_pixel(64, 48, BLUE);
        assert_eq!(heuristic_mask(&blue, bbox, &SkinBand::default()).area, 0);
    }

    /// Brute-force flood fill used as an independent component oracle.
    fn oracle_component_sizes(bitmap: &[bool], w: usize, h: usize) -> Vec<usize> {
        let mut seen = vec![false; bitmap.len()];
        let mut sizes = Vec::new();
        for s in 0..bitmap.len() {
            if !bitmap[s] || seen[s] {
                continue;
            }
            let mut frontier = vec![s];
            seen[s] = true;
            let mut count = 0;
            while !frontier.is_empty() {
                let mut next = Vec::new();
                for i in frontier {
                    count += 1;
                    for j in 0..bitmap.len() {
                        let (xi, yi) = ((i % w) as i64, (i / w) as i64);
                        let (xj, yj) = ((j % w) as i64, (j / w) as i64);
                        if bitmap[j] && !seen[j] && (xi - xj).abs() + (yi - yj).abs() == 1 {
                            seen[j] = true;
                            next.push(j);
                        }
                    }
                }
                frontier = next;
            }
            sizes.push(count);
        }
        let _ = h;
        sizes
    }

    #[test]
    fn blob_with_noise_speck() {
        // 25×20 skin blob (500 px) plus a 5-pixel speck, on blue.
        let mut img = RgbImage::from_pixel(80, 60, BLUE);
        for y in 10..30 {
            for x in 10..35 {
                img.put_pixel(x, y, SKIN);
            }
        }
        for x in 50..55 {
            img.put_pixel(x, 45, SKIN);
        }
        let bbox = BBox::new(0, 0, 80, 60);
        let band = SkinBand::default();
        let raw: Vec<bool> = (0..60)
            .flat_map(|y| (0..80).map(move |x| (x, y)))
            .map(|(x, y)| {
                let p = img.get_pixel(x, y).0;
                band.contains(p[0], p[1], p[2])
            })
            .collect();
        let sizes = oracle_component_sizes(&raw, 80, 60);
        let expected = *sizes.iter().max().unwrap();
        assert_eq!(expected, 500);
        assert_eq!(heuristic_mask(&img, bbox, &band).area, expected);
    }

    #[test]
    fn heuristic_ignores_pixels_outside_box() {
        let mut a = RgbImage::from_pixel(64, 48, BLUE);
        let bbox = BBox::new(10, 10, 20, 20);
        for y in 12..25 {
            for x in 12..25 {
                a.put_pixel(x, y, SKIN);
            }
        }
        let mut b = a.clone();
        for y in 0..48 {
            for x in 40..64 {
                b.put_pixel(x, y, SKIN);
            }
        }
        let band = SkinBand::default();
        assert_eq!(heuristic_mask(&a, bbox, &band), heuristic_mask(&b, bbox, &band));
    }

    #[test]
    fn perturbation_flips_exact_count() {
        let mut m = HandMask::full(BBox::new(0, 0, 20, 20));
        m.perturb(0.05, 7);
        assert_eq!(m.area, 400 - 20);
        let mut again = HandMask::full(BBox::new(0, 0, 20, 20));
        again.perturb(0.05, 7);
        assert_eq!(m, again);
    }

    #[test]
    fn provider_prefers_files() {
        let dir = tempfile::tempdir().unwrap();
        let frame = RgbImage::from_pixel(64, 48, BLUE);
        let bbox = BBox::new(0, 0, 10, 10);
        GrayImage::from_pixel(64, 48, Luma([255]))
            .save(mask_path(dir.path(), 2, Side::Right))
            .unwrap();
        let cfg = MaskConfig::default();
        let (m, p) = cfg.provide(Some(dir.path()), 2, Side::Right, &frame, bbox).unwrap();
        assert_eq!((m.area, p), (100, MaskProvenance::File));
        let (m, p) = cfg.provide(Some(dir.path()), 3, Side::Right, &frame, bbox).unwrap();
        assert_eq!((m.area, p), (0, MaskProvenance::Heuristic));
        let cfg = MaskConfig {
            prefer_files: false,
            ..MaskConfig::default()
        };
        let (_, p) = cfg.provide(Some(dir.path()), 2, Side::Right, &frame, bbox).unwrap();
        assert_eq!(p, MaskProvenance::Heuristic);
    }
}
