//! Region partition and per-region colour / motion histograms.

use image::RgbImage;

use super::flow::FlowField;
use crate::color::rgb_to_hsv;
use crate::corpus::BBox;
use crate::masks::HandMask;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    /// Mask pixels inside the box.
    Hand,
    /// Non-mask pixels inside the box.
    NonHand,
    /// Frame pixels outside the dilated box.
    Background,
}

/// Hand, surrounding and background regions of one hand in one frame.
#[derive(Clone, Debug)]
pub struct RegionSet<'a> {
    pub width: u32,
    pub height: u32,
    pub mask: &'a HandMask,
    /// Dilated box; everything outside it is background.
    pub exclusion: BBox,
}

impl<'a> RegionSet<'a> {
    /// `dilation` is the fraction of the box size added on every side
    /// before taking the complement as background.
    pub fn new(width: u32, height: u32, mask: &'a HandMask, dilation: f64) -> Self {
        RegionSet {
            width,
            height,
            mask,
            exclusion: mask.bbox.dilated(dilation, width, height),
        }
    }

    pub fn bbox(&self) -> BBox {
        self.mask.bbox
    }

    /// Calls `f` with the row-major frame index of every pixel in `region`.
    pub fn for_each(&self, region: Region, mut f: impl FnMut(usize)) {
        let w = self.width as usize;
        match region {
            Region::Hand | Region::NonHand => {
                let want = region == Region::Hand;
                let b = self.bbox();
                let bw = b.w as usize;
                for ly in 0..b.h as usize {
                    let row = (b.y as usize + ly) * w + b.x as usize;
                    for lx in 0..bw {
                        if self.mask.bitmap[ly * bw + lx] == want {
                            f(row + lx);
                        }
                    }
                }
            }
            Region::Background => {
                let ex = self.exclusion;
                for y in 0..self.height {
                    let row = y as usize * w;
                    if y < ex.y || y >= ex.bottom() {
                        (0..w).for_each(|x| f(row + x));
                    } else {
                        (0..ex.x as usize).for_each(|x| f(row + x));
                        (ex.right() as usize..w).for_each(|x| f(row + x));
                    }
                }
            }
        }
    }

    pub fn count(&self, region: Region) -> usize {
        match region {
            Region::Hand => self.mask.area,
            Region::NonHand => self.bbox().area() - self.mask.area,
            Region::Background => self.width as usize * self.height as usize - self.exclusion.area(),
        }
    }
}

/// L1-normalized histograms of the three regions.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionHistograms {
    pub hand: Vec<f64>,
    pub non_hand: Vec<f64>,
    pub background: Vec<f64>,
    /// Per region (hand, non-hand, background): true when the region had no
    /// mass and the histogram was replaced by the uniform one.
    pub empty: [bool; 3],
}

impl RegionHistograms {
    /// `hand − non_hand`, `hand − background`, `non_hand − background`,
    /// concatenated.
    pub fn differences(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(3 * self.hand.len());
        for (a, b) in [
            (&self.hand, &self.non_hand),
            (&self.hand, &self.background),
            (&self.non_hand, &self.background),
        ] {
            out.extend(a.iter().zip(b).map(|(x, y)| x - y));
        }
        out
    }
}

fn normalize(mut h: Vec<f64>) -> (Vec<f64>, bool) {
    let total: f64 = h.iter().sum();
    if total > 0.0 {
        h.iter_mut().for_each(|v| *v /= total);
        (h, false)
    } else {
        let n = h.len();
        (vec![1.0 / n as f64; n], true)
    }
}

/// Builds per-region histograms from a per-pixel `(bin, weight)` lookup.
pub fn region_histograms(
    regions: &RegionSet<'_>,
    bins: usize,
    lookup: impl Fn(usize) -> (usize, f64),
) -> RegionHistograms {
    let mut hists = [vec![0.0; bins], vec![0.0; bins], vec![0.0; bins]];
    for (slot, region) in [Region::Hand, Region::NonHand, Region::Background]
        .into_iter()
        .enumerate()
    {
        let h = &mut hists[slot];
        regions.for_each(region, |i| {
            let (b, w) = lookup(i);
            h[b] += w;
        });
    }
    let [hand, non_hand, background] = hists;
    let (hand, e0) = normalize(hand);
    let (non_hand, e1) = normalize(non_hand);
    let (background, e2) = normalize(background);
    RegionHistograms {
        hand,
        non_hand,
        background,
        empty: [e0, e1, e2],
    }
}

/// Per-pixel HSV bin indices of a frame.
#[derive(Clone, Debug)]
pub struct HsvBins {
    pub bins: usize,
    pub channels: [Vec<u8>; 3],
}

impl HsvBins {
    pub fn new(frame: &RgbImage, bins: usize) -> Self {
        assert!(bins > 0 && bins <= 256);
        let n = frame.width() as usize * frame.height() as usize;
        let mut channels = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
        let top = bins - 1;
        for p in frame.pixels() {
            let (h, s, v) = rgb_to_hsv(p.0[0], p.0[1], p.0[2]);
            channels[0].push(((h / 360.0 * bins as f64) as usize).min(top) as u8);
            channels[1].push(((s * bins as f64) as usize).min(top) as u8);
            channels[2].push(((v * bins as f64) as usize).min(top) as u8);
        }
        HsvBins { bins, channels }
    }

    /// Hue, saturation and value histograms of the three regions.
    pub fn region_histograms(&self, regions: &RegionSet<'_>) -> [RegionHistograms; 3] {
        [0, 1, 2].map(|c| {
            let ch = &self.channels[c];
            region_histograms(regions, self.bins, |i| (ch[i] as usize, 1.0))
        })
    }
}

pub fn hsv_region_histograms(frame: &RgbImage, regions: &RegionSet<'_>, bins: usize) -> [RegionHistograms; 3] {
    HsvBins::new(frame, bins).region_histograms(regions)
}

/// Binning of a flow field: magnitude bins over `[0, mag_max)` (larger
/// values land in the last bin) and direction bins over `[0°, 360°)`
/// weighted by magnitude.
#[derive(Clone, Debug)]
pub struct FlowBins {
    pub mag_bins: usize,
    pub dir_bins: usize,
    pub magnitude_bin: Vec<u8>,
    pub direction_bin: Vec<u8>,
    pub magnitude: Vec<f32>,
}

impl FlowBins {
    pub fn new(flow: &FlowField, mag_bins: usize, mag_max: f64, dir_bins: usize) -> Self {
        let n = flow.data.len();
        let mut out = FlowBins {
            mag_bins,
            dir_bins,
            magnitude_bin: Vec::with_capacity(n),
            direction_bin: Vec::with_capacity(n),
            magnitude: Vec::with_capacity(n),
        };
        let width = mag_max / mag_bins as f64;
        for d in &flow.data {
            let (dx, dy) = (d[0] as f64, d[1] as f64);
            let mag = (dx * dx + dy * dy).sqrt();
            let mb = ((mag / width) as usize).min(mag_bins - 1);
            let angle = dy.atan2(dx).to_degrees().rem_euclid(360.0);
            let db = ((angle / 360.0 * dir_bins as f64) as usize).min(dir_bins - 1);
            out.magnitude_bin.push(mb as u8);
            out.direction_bin.push(db as u8);
            out.magnitude.push(mag as f32);
        }
        out
    }

    /// Magnitude and direction histograms of the three regions. A region
    /// with zero total motion gets a uniform direction histogram.
    pub fn region_histograms(&self, regions: &RegionSet<'_>) -> (RegionHistograms, RegionHistograms) {
        let mag = region_histograms(regions, self.mag_bins, |i| (self.magnitude_bin[i] as usize, 1.0));
        let mut dir = region_histograms(regions, self.dir_bins, |i| {
            (self.direction_bin[i] as usize, self.magnitude[i] as f64)
        });
        // Zero motion is not an empty region.
        dir.empty = mag.empty;
        (mag, dir)
    }
}

pub fn flow_region_histograms(
    flow: &FlowField,
    regions: &RegionSet<'_>,
    mag_bins: usize,
    mag_max: f64,
    dir_bins: usize,
) -> (RegionHistograms, RegionHistograms) {
    FlowBins::new(flow, mag_bins, mag_max, dir_bins).region_histograms(regions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Rgb;
    use proptest::prelude::*;

    fn sum(h: &[f64]) -> f64 {
        h.iter().sum()
    }

    #[test]
    fn uniform_frame_identical_regions() {
        let frame = RgbImage::from_pixel(120, 80, Rgb([90, 140, 60]));
        let mask = HandMask::new(BBox::new(40, 20, 20, 20), (0..400).map(|i| i % 3 == 0).collect());
        let regions = RegionSet::new(120, 80, &mask, 0.5);
        for h in hsv_region_histograms(&frame, &regions, 16) {
            assert_eq!(h.hand, h.non_hand);
            assert_eq!(h.hand, h.background);
            assert!(h.differences().iter().all(|&d| d == 0.0));
        }
    }

    #[test]
    fn hue_bins_follow_22_5_degree_width() {
        // hand region hue 0°, everything else hue 120°.
        let mut frame = RgbImage::from_pixel(100, 100, Rgb([0, 255, 0]));
        let bbox = BBox::new(40, 40, 10, 10);
        for y in 40..50 {
            for x in 40..50 {
                frame.put_pixel(x, y, Rgb([255, 0, 0]));
            }
        }
        let mask = HandMask::full(bbox);
        let regions = RegionSet::new(100, 100, &mask, 0.5);
        let [hue, _, _] = hsv_region_histograms(&frame, &regions, 16);
        assert_eq!(hue.hand[0], 1.0);
        assert_eq!(hue.background[(120.0f64 / 22.5).floor() as usize], 1.0);
        assert_eq!(hue.background[5], 1.0);
        // empty non-hand region → uniform and flagged
        assert_eq!(hue.empty, [false, true, false]);
        assert!((sum(&hue.non_hand) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_flow_convention() {
        let flow = FlowField::zeros(60, 40);
        let mask = HandMask::new(BBox::new(10, 10, 10, 10), (0..100).map(|i| i < 60).collect());
        let regions = RegionSet::new(60, 40, &mask, 0.5);
        let (mag, dir) = flow_region_histograms(&flow, &regions, 16, 16.0, 18);
        assert_eq!(mag.empty, [false; 3]);
        assert_eq!(mag.hand[0], 1.0);
        assert_eq!(mag.background[0], 1.0);
        assert!(dir.hand.iter().all(|&v| v == 1.0 / 18.0));
        assert!(dir.background.iter().all(|&v| v == 1.0 / 18.0));
        assert!(mag
            .differences()
            .iter()
            .chain(dir.differences().iter())
            .all(|&d| d == 0.0));
    }

    #[test]
    fn uniform_flow_bins() {
        let mut flow = FlowField::zeros(60, 40);
        flow.data.iter_mut().for_each(|d| *d = [3.0, 0.0]);
        let mask = HandMask::full(BBox::new(10, 10, 10, 10));
        let regions = RegionSet::new(60, 40, &mask, 0.5);
        let (mag, dir) = flow_region_histograms(&flow, &regions, 16, 16.0, 18);
        assert_eq!(mag.hand[3], 1.0);
        assert_eq!(dir.hand[0], 1.0);
        // overflow lands in the last bin, 90° (downward in image space) in bin 4
        flow.data.iter_mut().for_each(|d| *d = [0.0, 40.0]);
        let (mag, dir) = flow_region_histograms(&flow, &regions, 16, 16.0, 18);
        assert_eq!(mag.background[15], 1.0);
        assert_eq!(dir.background[4], 1.0);
    }

    #[test]
    fn differences_are_antisymmetric() {
        let h = RegionHistograms {
            hand: vec![0.5, 0.5],
            non_hand: vec![0.2, 0.8],
            background: vec![1.0, 0.0],
            empty: [false; 3],
        };
        let swapped = RegionHistograms {
            hand: h.non_hand.clone(),
            non_hand: h.hand.clone(),
            ..h.clone()
        };
        let a = h.differences();
        let b = swapped.differences();
        for i in 0..2 {
            assert_eq!(a[i], -b[i]);
        }
    }

    proptest! {
        #[test]
        fn regions_partition_box_and_exclude_background(
            x in 0u32..50, y in 0u32..30, w in 1u32..30, h in 1u32..20, seed in any::<u64>(), dil in 0.0f64..1.0
        ) {
            let (fw, fh) = (80u32, 50u32);
            let bbox = BBox::clamped(x as f64, y as f64, w as f64, h as f64, fw, fh);
            prop_assume!(bbox.area() > 0);
            let bitmap = (0..bbox.area()).map(|i| (seed >> (i % 64)) & 1 == 1).collect();
            let mask = HandMask::new(bbox, bitmap);
            let regions = RegionSet::new(fw, fh, &mask, dil);
            let mut owner = vec![0u8; (fw * fh) as usize];
            for (tag, r) in [(1u8, Region::Hand), (2, Region::NonHand), (4, Region::Background)] {
                let mut n = 0;
                regions.for_each(r, |i| { owner[i] |= tag; n += 1; });
                prop_assert_eq!(n, regions.count(r));
            }
            for yy in 0..fh {
                for xx in 0..fw {
                    let o = owner[(yy * fw + xx) as usize];
                    prop_assert!(o == 0 || o.is_power_of_two());
                    prop_assert_eq!(bbox.contains(xx, yy), o == 1 || o == 2);
                }
            }
        }

        #[test]
        fn histograms_sum_to_one(seed in any::<u64>()) {
            let frame = RgbImage::from_fn(40, 30, |x, y| {
                let v = seed.wrapping_mul(x as u64 * 31 + y as u64 * 17 + 1);
                Rgb([(v >> 8) as u8, (v >> 16) as u8, (v >> 24) as u8])
            });
            let mask = HandMask::new(BBox::new(10, 8, 12, 10), (0..120).map(|i| (seed >> (i % 60)) & 1 == 0).collect());
            let regions = RegionSet::new(40, 30, &mask, 0.5);
            for h in hsv_region_histograms(&frame, &regions, 16) {
                for part in [&h.hand, &h.non_hand, &h.background] {
                    prop_assert!((sum(part) - 1.0).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn translation_preserves_hsv_histograms(dx in 0u32..20, dy in 0u32..20, seed in any::<u64>()) {
            let base = RgbImage::from_fn(40, 30, |x, y| {
                let v = seed.wrapping_mul(x as u64 * 131 + y as u64 * 7 + 3);
                Rgb([(v >> 8) as u8, (v >> 16) as u8, (v >> 24) as u8])
            });
            // Embed the scene in a larger canvas at two offsets; the
            // canvas padding colour is shared so the background matches.
            let embed = |ox: u32, oy: u32| {
                let mut c = RgbImage::from_pixel(80, 70, Rgb([10, 200, 30]));
                for y in 0..30 { for x in 0..40 { c.put_pixel(x + ox, y + oy, *base.get_pixel(x, y)); } }
                c
            };
            let bitmap: Vec<bool> = (0..100).map(|i| (seed >> (i % 50)) & 1 == 1).collect();
            let m0 = HandMask::new(BBox::new(20, 20, 10, 10), bitmap.clone());
            let m1 = HandMask::new(BBox::new(20 + dx, 20 + dy, 10, 10), bitmap);
            let h0 = hsv_region_histograms(&embed(0, 0), &RegionSet::new(80, 70, &m0, 0.5), 16);
            let h1 = hsv_region_histograms(&embed(dx, dy), &RegionSet::new(80, 70, &m1, 0.5), 16);
            for c in 0..3 {
                prop_assert_eq!(&h0[c].hand, &h1[c].hand);
                prop_assert_eq!(&h0[c].non_hand, &h1[c].non_hand);
                prop_assert_eq!(&h0[c].background, &h1[c].background);
            }
        }
    }
}
