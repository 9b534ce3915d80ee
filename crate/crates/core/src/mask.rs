//! Binary masks and the built-in moment-based shape similarity.
//!
//! Masks are read from plain PGM (`P2`) files or from text grids of `0`/`1`
//! rows. The shape descriptor is the vector of the seven Hu invariants,
//! computed from exact integer raw moments taken relative to the
//! foreground bounding box, so translating a mask leaves its descriptor
//! bit-identical.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Minimum height and width accepted for a mask.
pub const MIN_MASK_SIZE: usize = 8;

/// Floor used by the log scaling of Hu invariants. Components far below it
/// collapse toward zero instead of exploding under `ln`.
pub const LOG_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    class_id: String,
    height: usize,
    width: usize,
    grid: Vec<bool>,
    source: String,
}

impl Mask {
    /// Builds a mask from a row-major raster, checking size and that both
    /// foreground and background are present.
    pub fn new(
        class_id: impl Into<String>,
        height: usize,
        width: usize,
        grid: Vec<bool>,
        source: impl Into<String>,
    ) -> Result<Self> {
        let class_id = class_id.into();
        if grid.len() != height * width {
            return Err(Error::MalformedMask {
                path: source.into(),
                reason: format!(
                    "raster has {} cells, expected {}x{}",
                    grid.len(),
                    height,
                    width
                ),
            });
        }
        if height < MIN_MASK_SIZE || width < MIN_MASK_SIZE {
            return Err(Error::MaskTooSmall {
                class_id,
                height,
                width,
                min: MIN_MASK_SIZE,
            });
        }
        if !grid.iter().any(|&p| p) {
            return Err(Error::EmptyForeground { class_id });
        }
        if grid.iter().all(|&p| p) {
            return Err(Error::EmptyBackground { class_id });
        }
        Ok(Mask {
            class_id,
            height,
            width,
            grid,
            source: source.into(),
        })
    }

    /// Rasterizes `inside(row, col)` over an `height x width` grid.
    pub fn from_fn(
        class_id: impl Into<String>,
        height: usize,
        width: usize,
        inside: impl Fn(usize, usize) -> bool,
    ) -> Result<Self> {
        let grid = (0..height)
            .flat_map(|r| (0..width).map(move |c| (r, c)))
            .map(|(r, c)| inside(r, c))
            .collect();
        Mask::new(class_id, height, width, grid, "generated")
    }

    pub fn class_id(&self) -> &str {
        &self.class_id
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.grid[row * self.width + col]
    }

    pub fn foreground_count(&self) -> usize {
        self.grid.iter().filter(|&&p| p).count()
    }

    pub fn with_class_id(mut self, class_id: impl Into<String>) -> Self {
        self.class_id = class_id.into();
        self
    }

    /// Inclusive bounding box of the foreground as `(min_row, min_col, max_row, max_col)`.
    pub fn bounding_box(&self) -> (usize, usize, usize, usize) {
        let mut b = (usize::MAX, usize::MAX, 0, 0);
        for r in 0..self.height {
            for c in 0..self.width {
                if self.get(r, c) {
                    b.0 = b.0.min(r);
                    b.1 = b.1.min(c);
                    b.2 = b.2.max(r);
                    b.3 = b.3.max(c);
                }
            }
        }
        b
    }

    /// Shifts the foreground by `(dr, dc)`. Returns `None` if any foreground
    /// pixel would leave the raster.
    pub fn translated(&self, dr: isize, dc: isize) -> Option<Mask> {
        let (r0, c0, r1, c1) = self.bounding_box();
        let fits = |lo: usize, hi: usize, d: isize, len: usize| {
            lo as isize + d >= 0 && (hi as isize + d) < len as isize
        };
        if !fits(r0, r1, dr, self.height) || !fits(c0, c1, dc, self.width) {
            return None;
        }
        let mut grid = vec![false; self.grid.len()];
        for r in r0..=r1 {
            for c in c0..=c1 {
                if self.get(r, c) {
                    let nr = (r as isize + dr) as usize;
                    let nc = (c as isize + dc) as usize;
                    grid[nr * self.width + nc] = true;
                }
            }
        }
        Some(Mask {
            grid,
            ..self.clone()
        })
    }

    /// Nearest-neighbour resampling of the whole raster by `factor`.
    pub fn resampled(&self, factor: f64) -> Result<Mask> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::Config(format!("invalid scale factor {factor}")));
        }
        let height = (self.height as f64 * factor).round() as usize;
        let width = (self.width as f64 * factor).round() as usize;
        let mut grid = Vec::with_capacity(height * width);
        for r in 0..height {
            let sr = (((r as f64 + 0.5) / factor).floor() as usize).min(self.height - 1);
            for c in 0..width {
                let sc = (((c as f64 + 0.5) / factor).floor() as usize).min(self.width - 1);
                grid.push(self.get(sr, sc));
            }
        }
        Mask::new(self.class_id.clone(), height, width, grid, self.source.clone())
    }

    /// Plain-text `0`/`1` grid, one row per line.
    pub fn to_text_grid(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * self.height);
        for r in 0..self.height {
            for c in 0..self.width {
                out.push(if self.get(r, c) { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }

    /// Plain PGM (`P2`) with maxval 255.
    pub fn to_pgm(&self) -> String {
        let mut out = format!("P2\n{} {}\n255\n", self.width, self.height);
        for r in 0..self.height {
            let row: Vec<&str> = (0..self.width)
                .map(|c| if self.get(r, c) { "255" } else { "0" })
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Parses mask text in either supported format.
pub fn parse_mask(text: &str, class_id: &str, source: &str) -> Result<Mask> {
    let malformed = |reason: String| Error::MalformedMask {
        path: source.to_string(),
        reason,
    };
    let trimmed = text.trim_start();
    if trimmed.starts_with("P2") {
        let tokens: Vec<&str> = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(str::split_whitespace)
            .collect();
        if tokens.len() < 4 {
            return Err(malformed("truncated PGM header".into()));
        }
        let num = |t: &str, what: &str| {
            t.parse::<u32>()
                .map_err(|_| malformed(format!("bad {what} {t:?}")))
        };
        let width = num(tokens[1], "width")? as usize;
        let height = num(tokens[2], "height")? as usize;
        let maxval = num(tokens[3], "maxval")?;
        if maxval == 0 {
            return Err(malformed("maxval must be positive".into()));
        }
        let pixels = &tokens[4..];
        if pixels.len() != width * height {
            return Err(malformed(format!(
                "expected {} pixel values, found {}",
                width * height,
                pixels.len()
            )));
        }
        let half = f64::from(maxval) / 2.0;
        let grid = pixels
            .iter()
            .map(|t| {
                let v = num(t, "pixel")?;
                if v > maxval {
                    return Err(malformed(format!("pixel {v} exceeds maxval {maxval}")));
                }
                Ok(f64::from(v) > half)
            })
            .collect::<Result<Vec<bool>>>()?;
        return Mask::new(class_id, height, width, grid, source);
    }

    let mut width = None;
    let mut grid = Vec::new();
    let mut height = 0;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row: Vec<bool> = line
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(malformed(format!(
                    "line {}: unexpected character {other:?}",
                    lineno + 1
                ))),
            })
            .collect::<Result<_>>()?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(malformed(format!(
                    "line {}: row has {} cells, expected {w}",
                    lineno + 1,
                    row.len()
                )))
            }
            _ => {}
        }
        grid.extend(row);
        height += 1;
    }
    let width = width.ok_or_else(|| malformed("no grid rows".into()))?;
    Mask::new(class_id, height, width, grid, source)
}

pub fn load_mask(path: impl AsRef<Path>, class_id: &str) -> Result<Mask> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_mask(&text, class_id, &path.display().to_string())
}

/// Loads every `.pgm`/`.txt` file in `dir`, using the file stem as class id.
/// Results are sorted by class id.
pub fn load_mask_dir(dir: impl AsRef<Path>) -> Result<Vec<Mask>> {
    let dir = dir.as_ref();
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        if path.is_file() && matches!(ext, "pgm" | "txt") {
            paths.push(path);
        }
    }
    paths.sort();
    let mut masks = paths
        .iter()
        .map(|p| {
            let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
            load_mask(p, stem)
        })
        .collect::<Result<Vec<_>>>()?;
    masks.sort_by(|a, b| a.class_id.cmp(&b.class_id));
    for pair in masks.windows(2) {
        if pair[0].class_id == pair[1].class_id {
            return Err(Error::DuplicateClass(pair[0].class_id.clone()));
        }
    }
    Ok(masks)
}

/// Log-scaled Hu moment invariants of a mask.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeDescriptor {
    pub moments: [f64; 7],
}

impl ShapeDescriptor {
    pub fn distance(&self, other: &ShapeDescriptor) -> f64 {
        self.moments
            .iter()
            .zip(other.moments.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// The seven raw Hu invariants, before log scaling.
pub fn hu_invariants(mask: &Mask) -> [f64; 7] {
    let (r0, c0, r1, c1) = mask.bounding_box();
    // Exact integer raw moments relative to the bounding-box corner.
    let (mut m00, mut m10, mut m01) = (0i128, 0i128, 0i128);
    let (mut m20, mut m11, mut m02) = (0i128, 0i128, 0i128);
    let (mut m30, mut m21, mut m12, mut m03) = (0i128, 0i128, 0i128, 0i128);
    for r in r0..=r1 {
        let y = (r - r0) as i128;
        for c in c0..=c1 {
            if mask.get(r, c) {
                let x = (c - c0) as i128;
                m00 += 1;
                m10 += x;
                m01 += y;
                m20 += x * x;
                m11 += x * y;
                m02 += y * y;
                m30 += x * x * x;
                m21 += x * x * y;
                m12 += x * y * y;
                m03 += y * y * y;
            }
        }
    }
    let n = m00;
    let nf = n as f64;
    // Central moments from exact integer numerators; second order carries
    // the unit-square pixel correction n/12.
    let mu20 = (n * m20 - m10 * m10) as f64 / nf + nf / 12.0;
    let mu02 = (n * m02 - m01 * m01) as f64 / nf + nf / 12.0;
    let mu11 = (n * m11 - m10 * m01) as f64 / nf;
    let n2 = nf * nf;
    let mu30 = (n * n * m30 - 3 * n * m10 * m20 + 2 * m10 * m10 * m10) as f64 / n2;
    let mu03 = (n * n * m03 - 3 * n * m01 * m02 + 2 * m01 * m01 * m01) as f64 / n2;
    let mu21 =
        (n * n * m21 - 2 * n * m10 * m11 - n * m01 * m20 + 2 * m10 * m10 * m01) as f64 / n2;
    let mu12 =
        (n * n * m12 - 2 * n * m01 * m11 - n * m10 * m02 + 2 * m01 * m01 * m10) as f64 / n2;

    let s2 = nf * nf;
    let s3 = nf.powf(2.5);
    let (e20, e02, e11) = (mu20 / s2, mu02 / s2, mu11 / s2);
    let (e30, e03, e21, e12) = (mu30 / s3, mu03 / s3, mu21 / s3, mu12 / s3);

    let a = e30 + e12;
    let b = e21 + e03;
    let p = e30 - 3.0 * e12;
    let q = 3.0 * e21 - e03;
    [
        e20 + e02,
        (e20 - e02).powi(2) + 4.0 * e11 * e11,
        p * p + q * q,
        a * a + b * b,
        p * a * (a * a - 3.0 * b * b) + q * b * (3.0 * a * a - b * b),
        (e20 - e02) * (a * a - b * b) + 4.0 * e11 * a * b,
        q * a * (a * a - 3.0 * b * b) - p * b * (3.0 * a * a - b * b),
    ]
}

pub fn descriptor(mask: &Mask) -> ShapeDescriptor {
    let hu = hu_invariants(mask);
    ShapeDescriptor {
        moments: hu.map(|h| h.signum() * (h.abs() / LOG_FLOOR).ln_1p()),
    }
}

/// `exp(-d)` of the descriptor distance: symmetric, in `(0, 1]`, and exactly
/// one for identical descriptors.
pub fn descriptor_similarity(a: &ShapeDescriptor, b: &ShapeDescriptor) -> f64 {
    (-a.distance(b)).exp()
}

pub fn builtin_similarity(a: &Mask, b: &Mask) -> f64 {
    descriptor_similarity(&descriptor(a), &descriptor(b))
}

/// Rasterizers for simple analytic shapes, sampled at pixel centres.
pub mod shapes {
    use super::Mask;
    use crate::error::Result;

    pub fn disc(class_id: &str, size: usize, cy: f64, cx: f64, radius: f64) -> Result<Mask> {
        ellipse(class_id, size, size, cy, cx, radius, radius, 0.0)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn ellipse(
        class_id: &str,
        height: usize,
        width: usize,
        cy: f64,
        cx: f64,
        ry: f64,
        rx: f64,
        angle: f64,
    ) -> Result<Mask> {
        let (s, c) = angle.sin_cos();
        Mask::from_fn(class_id, height, width, |r, col| {
            let y = r as f64 + 0.5 - cy;
            let x = col as f64 + 0.5 - cx;
            let u = x * c + y * s;
            let v = -x * s + y * c;
            (u / rx).powi(2) + (v / ry).powi(2) <= 1.0
        })
    }

    pub fn annulus(class_id: &str, size: usize, inner: f64, outer: f64) -> Result<Mask> {
        let centre = size as f64 / 2.0;
        Mask::from_fn(class_id, size, size, |r, c| {
            let d = ((r as f64 + 0.5 - centre).powi(2) + (c as f64 + 0.5 - centre).powi(2)).sqrt();
            d >= inner && d <= outer
        })
    }

    /// Axis-aligned rectangle covering rows `top..top+h` and columns `left..left+w`.
    pub fn rect(
        class_id: &str,
        height: usize,
        width: usize,
        top: usize,
        left: usize,
        h: usize,
        w: usize,
    ) -> Result<Mask> {
        Mask::from_fn(class_id, height, width, |r, c| {
            (top..top + h).contains(&r) && (left..left + w).contains(&c)
        })
    }

    /// Even-odd fill of a polygon given as `(y, x)` vertices.
    pub fn polygon(class_id: &str, height: usize, width: usize, vertices: &[(f64, f64)]) -> Result<Mask> {
        Mask::from_fn(class_id, height, width, |r, c| {
            let (py, px) = (r as f64 + 0.5, c as f64 + 0.5);
            let mut inside = false;
            let mut j = vertices.len() - 1;
            for i in 0..vertices.len() {
                let (yi, xi) = vertices[i];
                let (yj, xj) = vertices[j];
                if (yi > py) != (yj > py) && px < (xj - xi) * (py - yi) / (yj - yi) + xi {
                    inside = !inside;
                }
                j = i;
            }
            inside
        })
    }

    /// Regular star with `points` tips.
    pub fn star(class_id: &str, size: usize, points: usize, outer: f64, inner: f64) -> Result<Mask> {
        let centre = size as f64 / 2.0;
        let vertices: Vec<(f64, f64)> = (0..points * 2)
            .map(|i| {
                let radius = if i % 2 == 0 { outer } else { inner };
                let theta = std::f64::consts::PI * i as f64 / points as f64;
                (centre - radius * theta.cos(), centre + radius * theta.sin())
            })
            .collect();
        polygon(class_id, size, size, &vertices)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_grid_disc() {
        let disc = shapes::disc("ball", 64, 32.0, 32.0, 20.0).unwrap();
        let parsed = parse_mask(&disc.to_text_grid(), "ball", "mem").unwrap();
        assert_eq!(parsed.height(), 64);
        assert_eq!(parsed.width(), 64);
        assert!(parsed.get(32, 32));
        assert!(!parsed.get(0, 0));
        assert_eq!(parsed.foreground_count(), disc.foreground_count());
    }

    #[test]
    fn pgm_threshold_is_half_maxval() {
        let mut text = String::from("P2\n# comment\n8 8\n200\n");
        for r in 0..8 {
            let row: Vec<String> = (0..8)
                .map(|c| match (r, c) {
                    (0, 0) => "101".to_string(),
                    (0, 1) => "100".to_string(),
                    _ => "0".to_string(),
                })
                .collect();
            text.push_str(&row.join(" "));
            text.push('\n');
        }
        let m = parse_mask(&text, "x", "mem").unwrap();
        assert!(m.get(0, 0));
        assert!(!m.get(0, 1));
        assert_eq!(m.foreground_count(), 1);
    }

    #[test]
    fn all_zero_is_empty_foreground() {
        let text = "00000000\n".repeat(8);
        assert!(matches!(
            parse_mask(&text, "x", "mem"),
            Err(Error::EmptyForeground { .. })
        ));
    }

    #[test]
    fn four_by_four_is_too_small() {
        let text = "0110\n0110\n0000\n0000\n";
        assert!(matches!(
            parse_mask(text, "x", "mem"),
            Err(Error::MaskTooSmall { height: 4, width: 4, .. })
        ));
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(
            parse_mask("0101\n012\n", "x", "mem"),
            Err(Error::MalformedMask { .. })
        ));
        assert!(matches!(
            parse_mask("P2\n8 8\n255\n0 0 0\n", "x", "mem"),
            Err(Error::MalformedMask { .. })
        ));
        assert!(matches!(
            parse_mask("", "x", "mem"),
            Err(Error::MalformedMask { .. })
        ));
    }

    #[test]
    fn translation_gives_identical_descriptor() {
        let disc = shapes::disc("ball", 64, 26.0, 26.0, 14.0).unwrap();
        let shifted = disc.translated(10, 10).unwrap();
        assert_ne!(disc, shifted);
        assert_eq!(descriptor(&disc), descriptor(&shifted));
        assert_eq!(builtin_similarity(&disc, &shifted), 1.0);
        assert!(disc.translated(40, 0).is_none());
    }

    #[test]
    fn self_similarity_is_one() {
        let star = shapes::star("star", 64, 5, 28.0, 12.0).unwrap();
        assert_eq!(builtin_similarity(&star, &star), 1.0);
    }
}
