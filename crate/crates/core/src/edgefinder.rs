//! Cutting-edge localization on raw insert photographs.
//!
//! The pipeline: Canny edge detection, a circular Hough transform that
//! finds the fixing screw (a sanity check on insert placement), a
//! standard Hough transform for near-vertical lines, and a crop anchored
//! at the leftmost vertical line — the cutting edge — spanning a
//! configurable width fraction at full image height.

use std::f64::consts::PI;

use thiserror::Error;

use crate::imageio::GrayImage;

#[derive(Debug, Error)]
pub enum EdgeError {
    #[error("canny thresholds must satisfy 0 < low < high, got low={low}, high={high}")]
    BadThresholds { low: f64, high: f64 },
    #[error("circle radius range must satisfy 1 <= r_min <= r_max, got [{r_min}, {r_max}]")]
    BadRadiusRange { r_min: u32, r_max: u32 },
    #[error("bad crop configuration: {0}")]
    BadConfig(String),
    #[error("no near-vertical line found: cannot localize the cutting edge")]
    NoVerticalLine,
}

/// Per-pixel edge mask with the same dimensions as the image it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMap {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl EdgeMap {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    fn idx(&self, x: u32, y: u32) -> usize {
        assert!(x < self.width && y < self.height, "({x}, {y}) out of bounds");
        y as usize * self.width as usize + x as usize
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[self.idx(x, y)]
    }

    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        let i = self.idx(x, y);
        self.bits[i] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Coordinates of set pixels in row-major order.
    pub fn set_pixels(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| ((i as u32) % w, (i as u32) / w))
    }

    /// True when every set pixel of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &EdgeMap) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.bits.iter().zip(&other.bits).all(|(a, b)| !a || *b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub cx: u32,
    pub cy: u32,
    pub r: u32,
    pub votes: u32,
}

/// A line in normal form: `x cos(theta) + y sin(theta) = rho`, with
/// `theta` in `[0, pi)` and `rho` signed, in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub rho: f64,
    pub theta: f64,
    pub votes: u32,
}

pub const DEFAULT_SIGMA: f64 = 1.4;
/// Auto-threshold fractions of the maximum gradient magnitude.
const AUTO_LOW_FRAC: f64 = 0.1;
const AUTO_HIGH_FRAC: f64 = 0.3;
/// A circle candidate needs at least this fraction of its circumference.
const CIRCLE_VOTE_FRAC: f64 = 0.5;

/// Smoothed gradient magnitude plus quantized direction, the shared
/// front half of Canny.
struct GradientField {
    width: u32,
    height: u32,
    mag: Vec<f64>,
    sector: Vec<u8>,
    max_mag: f64,
}

fn gaussian_blur(img: &GrayImage, sigma: f64) -> Vec<f64> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let taps: Vec<f64> = {
        let raw: Vec<f64> = (-2i32..=2)
            .map(|i| (-f64::from(i * i) / (2.0 * sigma * sigma)).exp())
            .collect();
        let sum: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / sum).collect()
    };
    let clamp = |v: i64, hi: usize| v.clamp(0, hi as i64 - 1) as usize;
    let mut horizontal = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, tap) in taps.iter().enumerate() {
                let sx = clamp(x as i64 + k as i64 - 2, w);
                acc += tap * f64::from(img.get(sx as u32, y as u32));
            }
            horizontal[y * w + x] = acc;
        }
    }
    let mut blurred = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, tap) in taps.iter().enumerate() {
                let sy = clamp(y as i64 + k as i64 - 2, h);
                acc += tap * horizontal[sy * w + x];
            }
            blurred[y * w + x] = acc;
        }
    }
    blurred
}

fn gradient_field(img: &GrayImage, sigma: f64) -> GradientField {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let blurred = gaussian_blur(img, sigma);
    let at = |x: i64, y: i64| -> f64 {
        let cx = x.clamp(0, w as i64 - 1) as usize;
        let cy = y.clamp(0, h as i64 - 1) as usize;
        blurred[cy * w + cx]
    };
    let mut mag = vec![0.0f64; w * h];
    let mut sector = vec![0u8; w * h];
    let mut max_mag = 0.0f64;
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            let gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
            let m = gx.hypot(gy);
            let i = y as usize * w + x as usize;
            mag[i] = m;
            max_mag = max_mag.max(m);
            let mut deg = gy.atan2(gx).to_degrees() % 180.0;
            if deg < 0.0 {
                deg += 180.0;
            }
            sector[i] = if !(22.5..157.5).contains(&deg) {
                0 // horizontal gradient: compare left/right
            } else if deg < 67.5 {
                1 // down-right diagonal
            } else if deg < 112.5 {
                2 // vertical gradient: compare up/down
            } else {
                3 // down-left diagonal
            };
        }
    }
    GradientField {
        width: w as u32,
        height: h as u32,
        mag,
        sector,
        max_mag,
    }
}

/// Non-maximum suppression followed by double-threshold hysteresis.
fn trace_edges(field: &GradientField, low: f64, high: f64) -> EdgeMap {
    let (w, h) = (field.width as usize, field.height as usize);
    let mag_at = |x: i64, y: i64| -> f64 {
        if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
            0.0
        } else {
            field.mag[y as usize * w + x as usize]
        }
    };
    // Thin ridges: survive only above both directional neighbors, with a
    // deterministic `>=` on the "previous" side so an exactly-tied pair
    // keeps exactly one pixel.
    let mut thinned = vec![0.0f64; w * h];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let i = y as usize * w + x as usize;
            let m = field.mag[i];
            if m <= 0.0 {
                continue;
            }
            let (prev, next) = match field.sector[i] {
                0 => ((x - 1, y), (x + 1, y)),
                1 => ((x - 1, y - 1), (x + 1, y + 1)),
                2 => ((x, y - 1), (x, y + 1)),
                _ => ((x + 1, y - 1), (x - 1, y + 1)),
            };
            if m >= mag_at(prev.0, prev.1) && m > mag_at(next.0, next.1) {
                thinned[i] = m;
            }
        }
    }
    let mut bits = vec![false; w * h];
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if thinned[y * w + x] >= high && !bits[y * w + x] {
                bits[y * w + x] = true;
                stack.push((x, y));
                while let Some((sx, sy)) = stack.pop() {
                    for dy in -1i64..=1 {
                        for dx in -1i64..=1 {
                            let (nx, ny) = (sx as i64 + dx, sy as i64 + dy);
                            if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                                continue;
                            }
                            let ni = ny as usize * w + nx as usize;
                            if !bits[ni] && thinned[ni] >= low {
                                bits[ni] = true;
                                stack.push((nx as usize, ny as usize));
                            }
                        }
                    }
                }
            }
        }
    }
    EdgeMap {
        width: field.width,
        height: field.height,
        bits,
    }
}

/// Canny with the default 5-tap Gaussian (sigma 1.4). `low` and `high`
/// are absolute gradient-magnitude thresholds.
pub fn canny(img: &GrayImage, low: f64, high: f64) -> Result<EdgeMap, EdgeError> {
    canny_with_sigma(img, DEFAULT_SIGMA, low, high)
}

pub fn canny_with_sigma(
    img: &GrayImage,
    sigma: f64,
    low: f64,
    high: f64,
) -> Result<EdgeMap, EdgeError> {
    if !(low > 0.0 && low < high && high.is_finite()) {
        return Err(EdgeError::BadThresholds { low, high });
    }
    Ok(trace_edges(&gradient_field(img, sigma), low, high))
}

/// Canny with thresholds derived from the image itself: low and high at
/// 10% and 30% of the maximum gradient magnitude. A perfectly flat image
/// yields an empty map.
pub fn canny_auto(img: &GrayImage, sigma: f64) -> EdgeMap {
    let field = gradient_field(img, sigma);
    if field.max_mag <= 0.0 {
        return EdgeMap::new(field.width, field.height);
    }
    trace_edges(
        &field,
        AUTO_LOW_FRAC * field.max_mag,
        AUTO_HIGH_FRAC * field.max_mag,
    )
}

/// Distinct integer offsets of a radius-`r` circle sampled at 1 degree.
fn circle_offsets(r: u32) -> Vec<(i64, i64)> {
    let mut offsets: Vec<(i64, i64)> = (0..360)
        .map(|deg| {
            let a = f64::from(deg).to_radians();
            (
                (f64::from(r) * a.cos()).round() as i64,
                (f64::from(r) * a.sin()).round() as i64,
            )
        })
        .collect();
    offsets.sort_unstable();
    offsets.dedup();
    offsets
}

/// Circular Hough transform over integer radii in `[r_min, r_max]`.
/// Candidates need at least half the circumference in votes; survivors
/// are non-maximum suppressed so no two returned centers lie within
/// `r_min` pixels, and come back sorted by votes descending.
pub fn hough_circles(edges: &EdgeMap, r_min: u32, r_max: u32) -> Result<Vec<Circle>, EdgeError> {
    if r_min < 1 || r_min > r_max {
        return Err(EdgeError::BadRadiusRange { r_min, r_max });
    }
    let (w, h) = (edges.width as i64, edges.height as i64);
    let pts: Vec<(i64, i64)> = edges
        .set_pixels()
        .map(|(x, y)| (i64::from(x), i64::from(y)))
        .collect();
    let mut candidates: Vec<Circle> = Vec::new();
    let mut acc = vec![0u32; (w * h) as usize];
    for r in r_min..=r_max {
        acc.fill(0);
        for &(x, y) in &pts {
            for &(dx, dy) in &circle_offsets(r) {
                let (cx, cy) = (x - dx, y - dy);
                if cx >= 0 && cy >= 0 && cx < w && cy < h {
                    acc[(cy * w + cx) as usize] += 1;
                }
            }
        }
        let threshold = ((CIRCLE_VOTE_FRAC * 2.0 * PI * f64::from(r)).round() as u32).max(1);
        for cy in 0..h {
            for cx in 0..w {
                let votes = acc[(cy * w + cx) as usize];
                if votes >= threshold {
                    candidates.push(Circle {
                        cx: cx as u32,
                        cy: cy as u32,
                        r,
                        votes,
                    });
                }
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.votes
            .cmp(&a.votes)
            .then(a.r.cmp(&b.r))
            .then(a.cy.cmp(&b.cy))
            .then(a.cx.cmp(&b.cx))
    });
    let min_dist2 = i64::from(r_min) * i64::from(r_min);
    let mut kept: Vec<Circle> = Vec::new();
    for c in candidates {
        let far_enough = kept.iter().all(|k| {
            let dx = i64::from(c.cx) - i64::from(k.cx);
            let dy = i64::from(c.cy) - i64::from(k.cy);
            dx * dx + dy * dy >= min_dist2
        });
        if far_enough {
            kept.push(c);
        }
    }
    Ok(kept)
}

/// Standard Hough transform with 1-pixel rho bins and 1-degree theta
/// bins. Returns accumulator peaks (strict local maxima, with ties going
/// to the first cell in scan order) holding at least `vote_threshold`
/// votes, sorted by votes descending.
pub fn hough_lines(edges: &EdgeMap, vote_threshold: u32) -> Vec<Line> {
    let threshold = vote_threshold.max(1);
    let (w, h) = (f64::from(edges.width), f64::from(edges.height));
    let d = w.hypot(h).ceil() as i64;
    let n_rho = (2 * d + 1) as usize;
    let trig: Vec<(f64, f64)> = (0..180)
        .map(|deg| {
            let a = f64::from(deg).to_radians();
            (a.cos(), a.sin())
        })
        .collect();
    let mut acc = vec![0u32; 180 * n_rho];
    for (x, y) in edges.set_pixels() {
        for (deg, &(cos, sin)) in trig.iter().enumerate() {
            let rho = (f64::from(x) * cos + f64::from(y) * sin).round() as i64 + d;
            acc[deg * n_rho + rho as usize] += 1;
        }
    }
    let at = |t: i64, r: i64| -> u32 {
        if t < 0 || r < 0 || t >= 180 || r >= n_rho as i64 {
            0
        } else {
            acc[t as usize * n_rho + r as usize]
        }
    };
    let mut peaks: Vec<Line> = Vec::new();
    for t in 0..180i64 {
        for r in 0..n_rho as i64 {
            let v = at(t, r);
            if v < threshold {
                continue;
            }
            let mut is_peak = true;
            'nbrs: for dt in -1i64..=1 {
                for dr in -1i64..=1 {
                    if dt == 0 && dr == 0 {
                        continue;
                    }
                    let nv = at(t + dt, r + dr);
                    if nv > v || (nv == v && (t + dt, r + dr) < (t, r)) {
                        is_peak = false;
                        break 'nbrs;
                    }
                }
            }
            if is_peak {
                peaks.push(Line {
                    rho: (r - d) as f64,
                    theta: (t as f64).to_radians(),
                    votes: v,
                });
            }
        }
    }
    peaks.sort_by(|a, b| {
        b.votes
            .cmp(&a.votes)
            .then(a.theta.partial_cmp(&b.theta).expect("finite"))
            .then(a.rho.partial_cmp(&b.rho).expect("finite"))
    });
    peaks
}

/// Knobs for [`crop_cutting_edge`]. Threshold `None` means derive from
/// the image (see [`canny_auto`]).
#[derive(Debug, Clone)]
pub struct CropConfig {
    pub sigma: f64,
    pub low: Option<f64>,
    pub high: Option<f64>,
    pub r_min: u32,
    pub r_max: u32,
    /// Lines within this many degrees of vertical qualify.
    pub vertical_tol_deg: f64,
    /// Lines left of this column are ignored (border artifacts).
    pub left_margin: u32,
    /// Crop width as a fraction of image width.
    pub width_frac: f64,
    /// Line accumulator threshold as a fraction of image height.
    pub line_vote_frac: f64,
}

impl Default for CropConfig {
    fn default() -> Self {
        Self {
            sigma: DEFAULT_SIGMA,
            low: None,
            high: None,
            r_min: 40,
            r_max: 80,
            vertical_tol_deg: 5.0,
            left_margin: 10,
            width_frac: 0.35,
            line_vote_frac: 0.25,
        }
    }
}

/// What [`crop_cutting_edge`] found: the crop itself plus the geometry
/// that anchored it, for logging and sidecar reports.
#[derive(Debug, Clone)]
pub struct CropOutcome {
    pub crop: GrayImage,
    /// Source column where the crop starts (the cutting edge).
    pub column: u32,
    pub line: Line,
    /// The fixing screw, when the circle detector found one.
    pub circle: Option<Circle>,
}

/// Localizes the cutting edge as the leftmost near-vertical Hough line
/// at or right of the left margin, and returns the full-height crop
/// starting there. A missing screw circle only logs a warning; a missing
/// vertical line is fatal.
pub fn crop_cutting_edge(img: &GrayImage, config: &CropConfig) -> Result<CropOutcome, EdgeError> {
    if !(config.width_frac > 0.0 && config.width_frac <= 1.0) {
        return Err(EdgeError::BadConfig(format!(
            "width_frac must be in (0, 1], got {}",
            config.width_frac
        )));
    }
    if !(config.vertical_tol_deg > 0.0 && config.vertical_tol_deg < 90.0) {
        return Err(EdgeError::BadConfig(format!(
            "vertical_tol_deg must be in (0, 90), got {}",
            config.vertical_tol_deg
        )));
    }
    let field = gradient_field(img, config.sigma);
    let low = config.low.unwrap_or(AUTO_LOW_FRAC * field.max_mag);
    let high = config.high.unwrap_or(AUTO_HIGH_FRAC * field.max_mag);
    let edges = if field.max_mag <= 0.0 && (config.low.is_none() || config.high.is_none()) {
        EdgeMap::new(img.width(), img.height())
    } else {
        if !(low > 0.0 && low < high && high.is_finite()) {
            return Err(EdgeError::BadThresholds { low, high });
        }
        trace_edges(&field, low, high)
    };

    let circle = hough_circles(&edges, config.r_min, config.r_max)?
        .first()
        .copied();
    if circle.is_none() {
        log::warn!("no screw circle with radius in [{}, {}] found; continuing without the placement check", config.r_min, config.r_max);
    }

    let line_threshold = ((config.line_vote_frac * f64::from(img.height())).round() as u32).max(1);
    let tol_rad = config.vertical_tol_deg.to_radians();
    let line = hough_lines(&edges, line_threshold)
        .into_iter()
        .filter(|l| l.theta.min(PI - l.theta) <= tol_rad)
        .filter(|l| l.rho >= f64::from(config.left_margin))
        .min_by(|a, b| a.rho.partial_cmp(&b.rho).expect("finite rho"))
        .ok_or(EdgeError::NoVerticalLine)?;

    // Column where the chosen line crosses mid-height.
    let mid = f64::from(img.height()) / 2.0;
    let column_f = (line.rho - mid * line.theta.sin()) / line.theta.cos();
    let column = (column_f.round() as i64).clamp(0, i64::from(img.width()) - 1) as u32;
    let want = ((config.width_frac * f64::from(img.width())).round() as u32).max(1);
    let crop_w = want.min(img.width() - column);
    let crop = img.crop(column, 0, crop_w, img.height());
    Ok(CropOutcome {
        crop,
        column,
        line,
        circle,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imageio::GrayImage;
    use crate::synth::{insert_mock, MOCK_SCREW_OFFSET, MOCK_SCREW_RADIUS, MOCK_SIZE};

    fn step_image(width: u32, height: u32, step_col: u32) -> GrayImage {
        GrayImage::from_fn(width, height, |x, _| if x >= step_col { 255 } else { 0 })
    }

    /// Rasterizes a circle outline at fine angular steps, a superset of
    /// the voting pattern, so recovery tests don't share code with the
    /// accumulator.
    fn draw_circle(map: &mut EdgeMap, cx: i64, cy: i64, r: f64) {
        let steps = (r * 16.0) as u32;
        for k in 0..steps {
            let a = 2.0 * PI * f64::from(k) / f64::from(steps);
            let x = cx + (r * a.cos()).round() as i64;
            let y = cy + (r * a.sin()).round() as i64;
            if x >= 0 && y >= 0 && x < i64::from(map.width()) && y < i64::from(map.height()) {
                map.set(x as u32, y as u32, true);
            }
        }
    }

    #[test]
    fn constant_image_has_no_edges() {
        let img = GrayImage::filled(64, 64, 128);
        assert_eq!(canny(&img, 10.0, 30.0).unwrap().count(), 0);
        assert_eq!(canny_auto(&img, DEFAULT_SIGMA).count(), 0);
    }

    #[test]
    fn bad_thresholds_are_rejected() {
        let img = GrayImage::filled(8, 8, 0);
        assert!(matches!(
            canny(&img, 30.0, 10.0),
            Err(EdgeError::BadThresholds { .. })
        ));
        assert!(matches!(
            canny(&img, 0.0, 10.0),
            Err(EdgeError::BadThresholds { .. })
        ));
    }

    #[test]
    fn step_image_yields_one_vertical_chain_within_a_pixel() {
        let img = step_image(64, 64, 32);
        let edges = canny_auto(&img, DEFAULT_SIGMA);
        for y in 0..64 {
            let cols: Vec<u32> = (0..64).filter(|&x| edges.get(x, y)).collect();
            assert_eq!(cols.len(), 1, "row {y} has {cols:?}");
            assert!(
                (i64::from(cols[0]) - 32).abs() <= 1,
                "row {y} edge at {}",
                cols[0]
            );
        }
    }

    #[test]
    fn raising_high_threshold_never_adds_edges() {
        let img = crate::synth::noise_image(48, 48, 5);
        let low = 8.0;
        let mut previous = canny(&img, low, 9.0).unwrap();
        for high in [20.0, 60.0, 150.0, 400.0] {
            let next = canny(&img, low, high).unwrap();
            assert!(next.is_subset_of(&previous), "high={high} grew the map");
            previous = next;
        }
    }

    #[test]
    fn canny_commutes_with_translation_away_from_borders() {
        let a = canny_auto(&insert_mock(90), DEFAULT_SIGMA);
        let b = canny_auto(&insert_mock(100), DEFAULT_SIGMA);
        for y in 0..MOCK_SIZE {
            for x in 15..MOCK_SIZE - 10 {
                assert_eq!(
                    b.get(x, y),
                    a.get(x - 10, y),
                    "mismatch at ({x}, {y}) after 10 px shift"
                );
            }
        }
    }

    #[test]
    fn empty_map_finds_no_circles_or_lines() {
        let empty = EdgeMap::new(128, 128);
        assert!(hough_circles(&empty, 40, 80).unwrap().is_empty());
        assert!(hough_lines(&empty, 1).is_empty());
    }

    #[test]
    fn inverted_radius_range_is_rejected() {
        let empty = EdgeMap::new(16, 16);
        assert!(matches!(
            hough_circles(&empty, 90, 80),
            Err(EdgeError::BadRadiusRange { .. })
        ));
        assert!(matches!(
            hough_circles(&empty, 0, 80),
            Err(EdgeError::BadRadiusRange { .. })
        ));
    }

    #[test]
    fn single_circle_r60_recovered_within_two_pixels() {
        let mut map = EdgeMap::new(256, 256);
        draw_circle(&mut map, 120, 130, 60.0);
        let found = hough_circles(&map, 40, 80).unwrap();
        let top = found.first().expect("circle detected");
        assert!((i64::from(top.cx) - 120).abs() <= 2, "cx {}", top.cx);
        assert!((i64::from(top.cy) - 130).abs() <= 2, "cy {}", top.cy);
        assert!((i64::from(top.r) - 60).abs() <= 2, "r {}", top.r);
    }

    #[test]
    fn radius_extremes_recover_within_two_pixels() {
        for (r, cx, cy) in [(40u32, 100i64, 90i64), (80, 140, 110)] {
            let mut map = EdgeMap::new(256, 224);
            draw_circle(&mut map, cx, cy, f64::from(r));
            let found = hough_circles(&map, 40, 80).unwrap();
            let top = found.first().expect("circle detected");
            assert!((i64::from(top.cx) - cx).abs() <= 2);
            assert!((i64::from(top.cy) - cy).abs() <= 2);
            assert!((i64::from(top.r) - i64::from(r)).abs() <= 2);
        }
    }

    #[test]
    fn two_disjoint_circles_are_both_returned() {
        let mut map = EdgeMap::new(300, 200);
        draw_circle(&mut map, 70, 100, 45.0);
        draw_circle(&mut map, 210, 100, 75.0);
        let found = hough_circles(&map, 40, 80).unwrap();
        assert!(found.len() >= 2, "found {} circles", found.len());
        let near = |c: &Circle, cx: i64, cy: i64, r: i64| {
            (i64::from(c.cx) - cx).abs() <= 2
                && (i64::from(c.cy) - cy).abs() <= 2
                && (i64::from(c.r) - r).abs() <= 2
        };
        assert!(found.iter().any(|c| near(c, 70, 100, 45)));
        assert!(found.iter().any(|c| near(c, 210, 100, 75)));
    }

    #[test]
    fn vertical_segment_at_column_30() {
        let mut map = EdgeMap::new(64, 64);
        for y in 10..50 {
            map.set(30, y, true);
        }
        let lines = hough_lines(&map, 20);
        let top = lines.first().expect("line detected");
        assert!(top.theta.min(PI - top.theta) <= 1f64.to_radians());
        assert!((top.rho - 30.0).abs() <= 1.0, "rho {}", top.rho);
        assert_eq!(top.votes, 40);
    }

    #[test]
    fn diagonal_segment_parameterizes_at_three_quarter_pi() {
        let mut map = EdgeMap::new(64, 64);
        for i in 10..50 {
            map.set(i, i, true);
        }
        let top = *hough_lines(&map, 20).first().expect("line detected");
        let dist_34 = (top.theta - 3.0 * PI / 4.0).abs();
        let dist_14 = (top.theta - PI / 4.0).abs();
        assert!(
            dist_34.min(dist_14) <= 1f64.to_radians(),
            "theta {} off both diagonals",
            top.theta
        );
    }

    #[test]
    fn mock_crop_starts_at_the_cutting_edge() {
        let outcome = crop_cutting_edge(&insert_mock(90), &CropConfig::default()).unwrap();
        assert!(
            (i64::from(outcome.column) - 90).abs() <= 2,
            "column {}",
            outcome.column
        );
        assert_eq!(outcome.crop.height(), MOCK_SIZE);
        assert_eq!(outcome.crop.width(), 90); // 0.35 * 256 rounded
        let screw = outcome.circle.expect("screw circle detected");
        assert!((i64::from(screw.cx) - i64::from(90 + MOCK_SCREW_OFFSET)).abs() <= 3);
        assert!((i64::from(screw.cy) - i64::from(MOCK_SIZE / 2)).abs() <= 3);
        assert!((i64::from(screw.r) - i64::from(MOCK_SCREW_RADIUS)).abs() <= 3);
    }

    #[test]
    fn blank_image_cannot_be_cropped() {
        let img = GrayImage::filled(256, 256, 77);
        assert!(matches!(
            crop_cutting_edge(&img, &CropConfig::default()),
            Err(EdgeError::NoVerticalLine)
        ));
    }

    #[test]
    fn shifting_the_mock_shifts_the_crop() {
        let config = CropConfig::default();
        let at_90 = crop_cutting_edge(&insert_mock(90), &config).unwrap();
        let at_100 = crop_cutting_edge(&insert_mock(100), &config).unwrap();
        assert_eq!(at_100.column, at_90.column + 10);
    }

    #[test]
    fn crop_always_stays_inside_the_image() {
        let config = CropConfig {
            width_frac: 0.9,
            ..CropConfig::default()
        };
        let outcome = crop_cutting_edge(&insert_mock(90), &config).unwrap();
        assert!(outcome.column + outcome.crop.width() <= MOCK_SIZE);
        assert_eq!(outcome.crop.height(), MOCK_SIZE);
    }

    #[test]
    fn edge_map_set_pixels_round_trips() {
        let mut map = EdgeMap::new(5, 4);
        map.set(1, 2, true);
        map.set(4, 0, true);
        let pts: Vec<(u32, u32)> = map.set_pixels().collect();
        assert_eq!(pts, vec![(4, 0), (1, 2)]);
        assert_eq!(map.count(), 2);
        map.set(4, 0, false);
        assert_eq!(map.count(), 1);
    }
}
