//! Dense optical flow by polynomial expansion (Farnebäck).
//!
//! Each pixel neighbourhood is approximated by a quadratic
//! `f(x) ≈ xᵀA x + bᵀx + c` fitted by Gaussian-weighted least squares. For a
//! pure translation `f₂(x) = f₁(x − d)` the coefficients satisfy
//! `b₂ = b₁ − 2A d`, which gives a per-pixel linear system for `d`. The
//! systems are averaged over a box window, solved, and refined iteratively
//! on a coarse-to-fine pyramid.

use image::RgbImage;
use serde::{Deserialize, Serialize};

use crate::par::Execution;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FarnebackParams {
    /// Pyramid layers including the full-resolution one.
    pub levels: usize,
    pub pyr_scale: f64,
    pub winsize: usize,
    pub iterations: usize,
    pub poly_n: usize,
    pub poly_sigma: f64,
}

impl Default for FarnebackParams {
    fn default() -> Self {
        FarnebackParams {
            levels: 3,
            pyr_scale: 0.5,
            winsize: 15,
            iterations: 3,
            poly_n: 5,
            poly_sigma: 1.1,
        }
    }
}

/// Single-channel `f32` image.
#[derive(Clone, Debug, PartialEq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f32>,
}

impl Plane {
    pub fn new(width: usize, height: usize) -> Self {
        Plane {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    /// Luma in `[0, 255]`.
    pub fn from_rgb(img: &RgbImage) -> Self {
        let (w, h) = img.dimensions();
        let data = img
            .pixels()
            .map(|p| 0.299 * p.0[0] as f32 + 0.587 * p.0[1] as f32 + 0.114 * p.0[2] as f32)
            .collect();
        Plane {
            width: w as usize,
            height: h as usize,
            data,
        }
    }

    #[inline]
    fn at_clamped(&self, x: isize, y: isize) -> f32 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.data[y * self.width + x]
    }

    fn sample(&self, x: f32, y: f32) -> f32 {
        let x = x.clamp(0.0, (self.width - 1) as f32);
        let y = y.clamp(0.0, (self.height - 1) as f32);
        let x0 = x.floor() as usize;
        let y0 = y.floor() as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let fx = x - x0 as f32;
        let fy = y - y0 as f32;
        let p = |xx: usize, yy: usize| self.data[yy * self.width + xx];
        (p(x0, y0) * (1.0 - fx) + p(x1, y0) * fx) * (1.0 - fy) + (p(x0, y1) * (1.0 - fx) + p(x1, y1) * fx) * fy
    }

    fn gaussian_blur(&self, sigma: f64) -> Plane {
        if sigma <= 0.0 {
            return self.clone();
        }
        let radius = (3.0 * sigma).ceil() as isize;
        let mut kernel: Vec<f32> = (-radius..=radius)
            .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp() as f32)
            .collect();
        let sum: f32 = kernel.iter().sum();
        kernel.iter_mut().for_each(|k| *k /= sum);
        let mut tmp = Plane::new(self.width, self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                let mut acc = 0.0;
                for (k, &kv) in kernel.iter().enumerate() {
                    acc += kv * self.at_clamped(x as isize + k as isize - radius, y as isize);
                }
                tmp.data[y * self.width + x] = acc;
            }
        }
        let mut out = Plane::new(self.width, self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                let mut acc = 0.0;
                for (k, &kv) in kernel.iter().enumerate() {
                    acc += kv * tmp.at_clamped(x as isize, y as isize + k as isize - radius);
                }
                out.data[y * self.width + x] = acc;
            }
        }
        out
    }

    fn resized(&self, width: usize, height: usize) -> Plane {
        let sx = self.width as f32 / width as f32;
        let sy = self.height as f32 / height as f32;
        let mut out = Plane::new(width, height);
        for y in 0..height {
            for x in 0..width {
                out.data[y * width + x] = self.sample((x as f32 + 0.5) * sx - 0.5, (y as f32 + 0.5) * sy - 0.5);
            }
        }
        out
    }
}

/// Per-pixel displacement in pixels/frame.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowField {
    pub width: usize,
    pub height: usize,
    pub data: Vec<[f32; 2]>,
}

impl FlowField {
    pub fn zeros(width: usize, height: usize) -> Self {
        FlowField {
            width,
            height,
            data: vec![[0.0; 2]; width * height],
        }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> [f32; 2] {
        self.data[y * self.width + x]
    }

    pub fn max_magnitude(&self) -> f32 {
        self.data
            .iter()
            .map(|d| (d[0] * d[0] + d[1] * d[1]).sqrt())
            .fold(0.0, f32::max)
    }

    /// Bilinear upsampling to a finer level, scaling vectors by the size
    /// ratio.
    fn upsampled(&self, width: usize, height: usize) -> FlowField {
        let sx = self.width as f32 / width as f32;
        let sy = self.height as f32 / height as f32;
        let mut planes = [Plane::new(self.width, self.height), Plane::new(self.width, self.height)];
        for (i, d) in self.data.iter().enumerate() {
            planes[0].data[i] = d[0];
            planes[1].data[i] = d[1];
        }
        let mut out = FlowField::zeros(width, height);
        for y in 0..height {
            for x in 0..width {
                let fx = (x as f32 + 0.5) * sx - 0.5;
                let fy = (y as f32 + 0.5) * sy - 0.5;
                out.data[y * width + x] = [planes[0].sample(fx, fy) / sx, planes[1].sample(fx, fy) / sy];
            }
        }
        out
    }
}

/// Quadratic coefficients per pixel: `[b_x, b_y, A_xx, A_yy, A_xy]` with
/// `A` the symmetric matrix (so `A_xy` is half the cross-term coefficient).
type Poly = [f32; 5];

/// Weighted least-squares projection onto `{1, x, y, x², y², xy}`, realised
/// as separable moments followed by the inverse Gram matrix.
struct PolyBasis {
    radius: isize,
    /// Gaussian weights `g`, `x·g`, `x²·g` over `[-radius, radius]`.
    g: Vec<f32>,
    xg: Vec<f32>,
    xxg: Vec<f32>,
    /// Rows of `G⁻¹` for the five coefficients kept (`b_x`, `b_y`, `a_xx`,
    /// `a_yy`, `a_xy`), over the moment vector `[m00, m10, m01, m20, m02, m11]`.
    inv: [[f64; 6]; 5],
}

impl PolyBasis {
    fn new(poly_n: usize, sigma: f64) -> Self {
        let radius = (poly_n / 2) as isize;
        let offsets: Vec<f64> = (-radius..=radius).map(|i| i as f64).collect();
        let w: Vec<f64> = offsets.iter().map(|x| (-x * x / (2.0 * sigma * sigma)).exp()).collect();
        // Gram matrix of the basis under weights g(x)g(y).
        let basis = |x: f64, y: f64| [1.0, x, y, x * x, y * y, x * y];
        let mut gram = [[0.0f64; 6]; 6];
        for (i, &y) in offsets.iter().enumerate() {
            for (j, &x) in offsets.iter().enumerate() {
                let b = basis(x, y);
                let wt = w[i] * w[j];
                for r in 0..6 {
                    for c in 0..6 {
                        gram[r][c] += wt * b[r] * b[c];
                    }
                }
            }
        }
        let full = invert6(gram);
        let mut inv = [[0.0; 6]; 5];
        for (k, row) in inv.iter_mut().enumerate() {
            *row = full[k + 1];
        }
        PolyBasis {
            radius,
            g: w.iter().map(|&v| v as f32).collect(),
            xg: offsets.iter().zip(&w).map(|(x, v)| (x * v) as f32).collect(),
            xxg: offsets.iter().zip(&w).map(|(x, v)| (x * x * v) as f32).collect(),
            inv,
        }
    }

    fn expand(&self, img: &Plane, exec: Execution) -> Vec<Poly> {
        let (w, h) = (img.width, img.height);
        let r = self.radius;
        // Horizontal pass: moments of order 0, 1, 2 in x.
        let mut rows = vec![[0.0f32; 3]; w * h];
        exec.for_each_chunk(&mut rows, w, |y, out| {
            for (x, o) in out.iter_mut().enumerate() {
                let mut acc = [0.0f32; 3];
                for k in 0..self.g.len() {
                    let v = img.at_clamped(x as isize + k as isize - r, y as isize);
                    acc[0] += self.g[k] * v;
                    acc[1] += self.xg[k] * v;
                    acc[2] += self.xxg[k] * v;
                }
                *o = acc;
            }
        });
        let mut out = vec![[0.0f32; 5]; w * h];
        exec.for_each_chunk(&mut out, w, |y, line| {
            for (x, o) in line.iter_mut().enumerate() {
                // [m00, m10, m01, m20, m02, m11]
                let mut m = [0.0f64; 6];
                for k in 0..self.g.len() {
                    let yy = (y as isize + k as isize - r).clamp(0, h as isize - 1) as usize;
                    let s = rows[yy * w + x];
                    let (g, yg, yyg) = (self.g[k] as f64, self.xg[k] as f64, self.xxg[k] as f64);
                    m[0] += g * s[0] as f64;
                    m[1] += g * s[1] as f64;
                    m[2] += yg * s[0] as f64;
                    m[3] += g * s[2] as f64;
                    m[4] += yyg * s[0] as f64;
                    m[5] += yg * s[1] as f64;
                }
                let coef = |row: &[f64; 6]| row.iter().zip(&m).map(|(a, b)| a * b).sum::<f64>();
                let bx = coef(&self.inv[0]);
                let by = coef(&self.inv[1]);
                let axx = coef(&self.inv[2]);
                let ayy = coef(&self.inv[3]);
                let axy = coef(&self.inv[4]);
                *o = [bx as f32, by as f32, axx as f32, ayy as f32, (axy * 0.5) as f32];
            }
        });
        out
    }
}

/// Gauss-Jordan inverse of a symmetric positive-definite 6×6 matrix.
fn invert6(m: [[f64; 6]; 6]) -> [[f64; 6]; 6] {
    let mut a = m;
    let mut inv = [[0.0; 6]; 6];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..6 {
        let pivot = (col..6)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col];
        for k in 0..6 {
            a[col][k] /= p;
            inv[col][k] /= p;
        }
        for r in 0..6 {
            if r != col {
                let f = a[r][col];
                if f != 0.0 {
                    for k in 0..6 {
                        a[r][k] -= f * a[col][k];
                        inv[r][k] -= f * inv[col][k];
                    }
                }
            }
        }
    }
    inv
}

fn sample_poly(p: &[Poly], w: usize, h: usize, x: f32, y: f32) -> Option<Poly> {
    if !(x >= 0.0 && y >= 0.0) {
        return None;
    }
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    if x0 + 1 >= w || y0 + 1 >= h {
        return None;
    }
    let fx = x - x0 as f32;
    let fy = y - y0 as f32;
    let w00 = (1.0 - fx) * (1.0 - fy);
    let w10 = fx * (1.0 - fy);
    let w01 = (1.0 - fx) * fy;
    let w11 = fx * fy;
    let (a, b, c, d) = (
        &p[y0 * w + x0],
        &p[y0 * w + x0 + 1],
        &p[(y0 + 1) * w + x0],
        &p[(y0 + 1) * w + x0 + 1],
    );
    let mut out = [0.0; 5];
    for k in 0..5 {
        out[k] = a[k] * w00 + b[k] * w10 + c[k] * w01 + d[k] * w11;
    }
    Some(out)
}

/// Per-pixel normal equations `[G11, G12, G22, h1, h2]` for the current flow.
fn update_matrices(r0: &[Poly], r1: &[Poly], flow: &FlowField, exec: Execution) -> Vec<[f32; 5]> {
    let (w, h) = (flow.width, flow.height);
    let mut m = vec![[0.0f32; 5]; w * h];
    exec.for_each_chunk(&mut m, w, |y, line| {
        for (x, out) in line.iter_mut().enumerate() {
            let i = y * w + x;
            let [dx, dy] = flow.data[i];
            let Some(q) = sample_poly(r1, w, h, x as f32 + dx, y as f32 + dy) else {
                *out = [0.0; 5];
                continue;
            };
            let p = &r0[i];
            let a11 = 0.5 * (p[2] + q[2]);
            let a22 = 0.5 * (p[3] + q[3]);
            let a12 = 0.5 * (p[4] + q[4]);
            // Δb = -(b₂ - b₁)/2 + A d
            let b1 = -0.5 * (q[0] - p[0]) + a11 * dx + a12 * dy;
            let b2 = -0.5 * (q[1] - p[1]) + a12 * dx + a22 * dy;
            *out = [
                a11 * a11 + a12 * a12,
                a12 * (a11 + a22),
                a12 * a12 + a22 * a22,
                a11 * b1 + a12 * b2,
                a12 * b1 + a22 * b2,
            ];
        }
    });
    m
}

/// Normalized box mean over a `win × win` window, truncated at borders.
fn box_mean(m: &[[f32; 5]], w: usize, h: usize, win: usize, exec: Execution) -> Vec<[f32; 5]> {
    let r = win / 2;
    let mut tmp = vec![[0.0f32; 5]; w * h];
    exec.for_each_chunk(&mut tmp, w, |y, line| {
        let row = &m[y * w..(y + 1) * w];
        let mut prefix = vec![[0.0f64; 5]; w + 1];
        for x in 0..w {
            for k in 0..5 {
                prefix[x + 1][k] = prefix[x][k] + row[x][k] as f64;
            }
        }
        for (x, o) in line.iter_mut().enumerate() {
            let lo = x.saturating_sub(r);
            let hi = (x + r + 1).min(w);
            for k in 0..5 {
                o[k] = (prefix[hi][k] - prefix[lo][k]) as f32;
            }
        }
    });
    let mut out = vec![[0.0f32; 5]; w * h];
    exec.for_each_chunk(&mut out, w, |y, line| {
        let lo = y.saturating_sub(r);
        let hi = (y + r + 1).min(h);
        for (x, o) in line.iter_mut().enumerate() {
            let cx = ((x + r + 1).min(w) - x.saturating_sub(r)) as f64;
            let mut acc = [0.0f64; 5];
            for yy in lo..hi {
                let v = &tmp[yy * w + x];
                for k in 0..5 {
                    acc[k] += v[k] as f64;
                }
            }
            let n = cx * (hi - lo) as f64;
            for k in 0..5 {
                o[k] = (acc[k] / n) as f32;
            }
        }
    });
    out
}

fn solve_flow(m: &[[f32; 5]], flow: &mut FlowField) {
    for (d, g) in flow.data.iter_mut().zip(m) {
        let [g11, g12, g22, h1, h2] = *g;
        let det = g11 * g22 - g12 * g12 + 1e-3;
        *d = [(g22 * h1 - g12 * h2) / det, (g11 * h2 - g12 * h1) / det];
    }
}

/// Dense flow from `prev` to `next` (same dimensions): `next(x) ≈ prev(x − d(x))`.
pub fn dense_flow(prev: &Plane, next: &Plane, params: &FarnebackParams, exec: Execution) -> FlowField {
    assert_eq!(
        (prev.width, prev.height),
        (next.width, next.height),
        "frame size mismatch"
    );
    let basis = PolyBasis::new(params.poly_n, params.poly_sigma);
    let min_side = 2 * params.poly_n + 1;

    let mut sizes = Vec::new();
    let mut scale = 1.0f64;
    for level in 0..params.levels.max(1) {
        let w = (prev.width as f64 * scale).round() as usize;
        let h = (prev.height as f64 * scale).round() as usize;
        if level > 0 && (w < min_side || h < min_side) {
            break;
        }
        sizes.push((scale, w, h));
        scale *= params.pyr_scale;
    }

    let mut flow: Option<FlowField> = None;
    for &(scale, w, h) in sizes.iter().rev() {
        let (p0, p1) = if scale == 1.0 {
            (prev.clone(), next.clone())
        } else {
            let sigma = (1.0 / scale - 1.0) * 0.5;
            (
                prev.gaussian_blur(sigma).resized(w, h),
                next.gaussian_blur(sigma).resized(w, h),
            )
        };
        let r0 = basis.expand(&p0, exec);
        let r1 = basis.expand(&p1, exec);
        let mut f = match flow.take() {
            Some(coarse) => coarse.upsampled(w, h),
            None => FlowField::zeros(w, h),
        };
        for _ in 0..params.iterations {
            let m = update_matrices(&r0, &r1, &f, exec);
            let m = box_mean(&m, w, h, params.winsize, exec);
            solve_flow(&m, &mut f);
        }
        flow = Some(f);
    }
    flow.expect("at least one pyramid level")
}
