//! LBP-family texture descriptors over grayscale images.
//!
//! The pixel-level primitive is the local binary pattern: each interior
//! pixel is compared against `P` neighbors sampled on a circle of radius
//! `R`, and the resulting sign bits form a `P`-bit code. Image-level
//! descriptors are normalized histograms of those codes under a selectable
//! [`CodeMapping`] (raw, rotation-invariant, or riu2). Three variants
//! enrich the plain histogram: ALBP fits a per-direction least-squares
//! weight before thresholding, CLBP concatenates sign and magnitude
//! halves, and LBPV accumulates local variance instead of unit counts.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::imageio::{GrayImage, WearLabel};

#[derive(Debug, Error)]
pub enum TextureError {
    #[error(
        "image {width}x{height} has no interior pixels for radius {radius}: \
         both sides must exceed {min}"
    )]
    ImageTooSmall {
        width: u32,
        height: u32,
        min: u32,
        radius: f64,
    },
    #[error("neighborhood out of range: P={points}, R={radius} (need 4 <= P <= 24 and R > 0)")]
    BadSpec { points: u32, radius: f64 },
    #[error("mapping built for P={mapping_points} used with a P={spec_points} neighborhood")]
    MappingMismatch {
        mapping_points: u32,
        spec_points: u32,
    },
    #[error("unknown descriptor name {0:?}")]
    UnknownDescriptor(String),
    #[error("unknown mapping name {0:?} (expected raw, ri, or riu2)")]
    UnknownMapping(String),
    #[error("descriptor name {0:?} contains a tab, which the interchange format reserves")]
    TabInName(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path} line {line}: {detail}")]
    Parse {
        path: PathBuf,
        line: usize,
        detail: String,
    },
}

/// Circular neighborhood: `P` sample points on a radius-`R` circle.
///
/// Neighbor `p` lies at angle `2*pi*p/P` from the +x axis, advancing
/// counter-clockwise; since image y grows downward the sample point is
/// `(cx + R*cos, cy - R*sin)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborhoodSpec {
    points: u32,
    radius: f64,
}

impl NeighborhoodSpec {
    /// 8 neighbors at radius 1 — the classic 3x3 neighborhood.
    pub const P8R1: NeighborhoodSpec = NeighborhoodSpec {
        points: 8,
        radius: 1.0,
    };
    /// 16 neighbors at radius 2.
    pub const P16R2: NeighborhoodSpec = NeighborhoodSpec {
        points: 16,
        radius: 2.0,
    };

    /// Validates `4 <= points <= 24` and `radius > 0`. Values other than
    /// the two presets are accepted but carry no calibrated defaults.
    pub fn new(points: u32, radius: f64) -> Result<Self, TextureError> {
        if !(4..=24).contains(&points) || !radius.is_finite() || radius <= 0.0 {
            return Err(TextureError::BadSpec { points, radius });
        }
        Ok(Self { points, radius })
    }

    pub fn points(&self) -> u32 {
        self.points
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Border margin: centers must sit at least this many pixels from
    /// every image edge so all neighbors stay in bounds.
    pub fn margin(&self) -> u32 {
        self.radius.ceil() as u32
    }

    /// (dx, dy) offset of neighbor `p` from the center.
    fn offset(&self, p: u32) -> (f64, f64) {
        let theta = 2.0 * PI * p as f64 / self.points as f64;
        (self.radius * theta.cos(), -self.radius * theta.sin())
    }

    fn offsets(&self) -> Vec<(f64, f64)> {
        (0..self.points).map(|p| self.offset(p)).collect()
    }
}

/// How raw P-bit codes are grouped into histogram bins.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MappingKind {
    /// Identity: one bin per code, `2^P` bins.
    Raw,
    /// One bin per rotation class (minimum over circular shifts), dense.
    RotationInvariant,
    /// Uniform codes (at most 2 circular transitions) map to their
    /// popcount, all others share one bin: `P + 2` bins.
    Riu2,
}

impl MappingKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MappingKind::Raw => "raw",
            MappingKind::RotationInvariant => "ri",
            MappingKind::Riu2 => "riu2",
        }
    }
}

impl fmt::Display for MappingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MappingKind {
    type Err = TextureError;

    fn from_str(s: &str) -> Result<Self, TextureError> {
        match s.to_ascii_lowercase().as_str() {
            "raw" => Ok(MappingKind::Raw),
            "ri" | "rotation-invariant" => Ok(MappingKind::RotationInvariant),
            "riu2" => Ok(MappingKind::Riu2),
            other => Err(TextureError::UnknownMapping(other.to_string())),
        }
    }
}

/// Total lookup table from P-bit codes to dense bin indices.
#[derive(Debug, Clone)]
pub struct CodeMapping {
    kind: MappingKind,
    points: u32,
    table: Vec<u32>,
    bin_count: usize,
}

impl CodeMapping {
    /// Builds the full `2^P`-entry table for the given mapping kind.
    pub fn build(kind: MappingKind, points: u32) -> Result<CodeMapping, TextureError> {
        if !(4..=24).contains(&points) {
            return Err(TextureError::BadSpec {
                points,
                radius: f64::NAN,
            });
        }
        let n = 1usize << points;
        let (table, bin_count) = match kind {
            MappingKind::Raw => ((0..n as u32).collect(), n),
            MappingKind::Riu2 => {
                let table = (0..n as u32)
                    .map(|code| {
                        if uniformity(code, points) <= 2 {
                            code.count_ones()
                        } else {
                            points + 1
                        }
                    })
                    .collect();
                (table, points as usize + 2)
            }
            MappingKind::RotationInvariant => {
                // Dense-index the rotation classes by their (sorted)
                // minimal representatives.
                let reps: Vec<u32> = (0..n as u32).map(|c| rotate_min(c, points)).collect();
                let mut sorted: Vec<u32> = reps.clone();
                sorted.sort_unstable();
                sorted.dedup();
                let rank: HashMap<u32, u32> = sorted
                    .iter()
                    .enumerate()
                    .map(|(i, &r)| (r, i as u32))
                    .collect();
                let bin_count = sorted.len();
                (reps.into_iter().map(|r| rank[&r]).collect(), bin_count)
            }
        };
        Ok(CodeMapping {
            kind,
            points,
            table,
            bin_count,
        })
    }

    pub fn kind(&self) -> MappingKind {
        self.kind
    }

    pub fn points(&self) -> u32 {
        self.points
    }

    pub fn bin_count(&self) -> usize {
        self.bin_count
    }

    /// Bin index of a code. Panics if the code exceeds P bits.
    #[inline]
    pub fn map(&self, code: u32) -> usize {
        self.table[code as usize] as usize
    }
}

/// Minimum over all circular right shifts of `code` as a P-bit word — the
/// canonical rotation-invariant representative.
pub fn rotate_min(code: u32, points: u32) -> u32 {
    let mask = (1u64 << points) - 1;
    let code = code as u64 & mask;
    let mut best = code;
    for i in 1..points {
        let rotated = ((code >> i) | (code << (points - i))) & mask;
        best = best.min(rotated);
    }
    best as u32
}

/// Number of 0/1 transitions around the circular P-bit pattern. Codes with
/// uniformity <= 2 are the "uniform" patterns.
pub fn uniformity(code: u32, points: u32) -> u32 {
    let mut transitions = 0;
    for i in 0..points {
        let a = (code >> i) & 1;
        let b = (code >> ((i + 1) % points)) & 1;
        transitions += a ^ b;
    }
    transitions
}

/// Intensity at neighbor `p` of center `(cx, cy)`, bilinearly interpolated.
///
/// Each sample coordinate within 1e-6 of the integer lattice snaps to it
/// (independently per axis), so axis-aligned neighbors of integer-radius
/// specs read exact pixel values. The center must be interior:
/// at least `spec.margin()` pixels from every border.
pub fn sample_neighbor(
    img: &GrayImage,
    cx: u32,
    cy: u32,
    p: u32,
    spec: NeighborhoodSpec,
) -> f64 {
    let (dx, dy) = spec.offset(p);
    sample_at(img, cx as f64 + dx, cy as f64 + dy)
}

const SNAP_EPS: f64 = 1e-6;

#[inline]
fn sample_at(img: &GrayImage, mut sx: f64, mut sy: f64) -> f64 {
    if (sx - sx.round()).abs() <= SNAP_EPS {
        sx = sx.round();
    }
    if (sy - sy.round()).abs() <= SNAP_EPS {
        sy = sy.round();
    }
    debug_assert!(
        sx >= 0.0 && sy >= 0.0 && sx <= (img.width() - 1) as f64 && sy <= (img.height() - 1) as f64,
        "sample ({sx}, {sy}) outside a {}x{} image",
        img.width(),
        img.height()
    );
    let x0 = sx.floor();
    let y0 = sy.floor();
    let fx = sx - x0;
    let fy = sy - y0;
    let xi = x0 as u32;
    let yi = y0 as u32;
    // When a fraction is exactly 0 the +1 corner has zero weight; clamping
    // keeps the reads in bounds without affecting the value.
    let xj = (xi + 1).min(img.width() - 1);
    let yj = (yi + 1).min(img.height() - 1);
    let v00 = img.get(xi, yi) as f64;
    let v10 = img.get(xj, yi) as f64;
    let v01 = img.get(xi, yj) as f64;
    let v11 = img.get(xj, yj) as f64;
    let top = v00 + (v10 - v00) * fx;
    let bottom = v01 + (v11 - v01) * fx;
    top + (bottom - top) * fy
}

/// Interior coordinate ranges (inclusive starts, exclusive ends) where all
/// neighbors stay in bounds, or an error when no interior pixel exists.
fn interior(
    img: &GrayImage,
    spec: NeighborhoodSpec,
) -> Result<(std::ops::Range<u32>, std::ops::Range<u32>), TextureError> {
    let m = spec.margin();
    if img.width() <= 2 * m || img.height() <= 2 * m {
        return Err(TextureError::ImageTooSmall {
            width: img.width(),
            height: img.height(),
            min: 2 * m,
            radius: spec.radius(),
        });
    }
    Ok((m..img.width() - m, m..img.height() - m))
}

/// Local binary pattern code at one interior pixel: bit `p` is set when
/// neighbor `p` is at least as bright as the center.
pub fn lbp_code(img: &GrayImage, cx: u32, cy: u32, spec: NeighborhoodSpec) -> u32 {
    let gc = img.get(cx, cy) as f64;
    let mut code = 0u32;
    for p in 0..spec.points() {
        let (dx, dy) = spec.offset(p);
        if sample_at(img, cx as f64 + dx, cy as f64 + dy) >= gc {
            code |= 1 << p;
        }
    }
    code
}

/// A named non-negative feature vector; every constituent histogram sums
/// to 1 except the documented all-zero degenerate case of LBPV.
#[derive(Debug, Clone, PartialEq)]
pub struct Descriptor {
    name: String,
    values: Vec<f64>,
}

impl Descriptor {
    /// Panics on negative or non-finite values — descriptors are
    /// constructed by this module and violations are programming errors.
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        let name = name.into();
        assert!(
            values.iter().all(|v| v.is_finite() && *v >= 0.0),
            "descriptor {name:?} has a negative or non-finite value"
        );
        Self { name, values }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Concatenation: values of `a` followed by values of `b`, named "a+b".
pub fn concat(a: &Descriptor, b: &Descriptor) -> Descriptor {
    let mut values = Vec::with_capacity(a.len() + b.len());
    values.extend_from_slice(a.values());
    values.extend_from_slice(b.values());
    Descriptor {
        name: format!("{}+{}", a.name(), b.name()),
        values,
    }
}

fn check_mapping(spec: NeighborhoodSpec, mapping: &CodeMapping) -> Result<(), TextureError> {
    if mapping.points() != spec.points() {
        return Err(TextureError::MappingMismatch {
            mapping_points: mapping.points(),
            spec_points: spec.points(),
        });
    }
    Ok(())
}

/// Shared histogram skeleton: count mapped codes over every interior
/// pixel, then divide by the interior pixel count.
fn histogram_over_interior(
    img: &GrayImage,
    spec: NeighborhoodSpec,
    mapping: &CodeMapping,
    mut code_at: impl FnMut(&[(f64, f64)], u32, u32) -> u32,
) -> Result<Vec<f64>, TextureError> {
    let (xs, ys) = interior(img, spec)?;
    let offsets = spec.offsets();
    let mut counts = vec![0.0f64; mapping.bin_count()];
    let mut n = 0usize;
    for cy in ys {
        for cx in xs.clone() {
            counts[mapping.map(code_at(&offsets, cx, cy))] += 1.0;
            n += 1;
        }
    }
    let scale = 1.0 / n as f64;
    for c in &mut counts {
        *c *= scale;
    }
    Ok(counts)
}

#[inline]
fn lbp_code_with(img: &GrayImage, offsets: &[(f64, f64)], cx: u32, cy: u32) -> u32 {
    let gc = img.get(cx, cy) as f64;
    let mut code = 0u32;
    for (p, &(dx, dy)) in offsets.iter().enumerate() {
        if sample_at(img, cx as f64 + dx, cy as f64 + dy) >= gc {
            code |= 1 << p;
        }
    }
    code
}

/// Normalized histogram of mapped LBP codes over all interior pixels.
/// Named `LBP<P>NH`.
pub fn lbp_histogram(
    img: &GrayImage,
    spec: NeighborhoodSpec,
    mapping: &CodeMapping,
) -> Result<Descriptor, TextureError> {
    check_mapping(spec, mapping)?;
    let values = histogram_over_interior(img, spec, mapping, |offsets, cx, cy| {
        lbp_code_with(img, offsets, cx, cy)
    })?;
    Ok(Descriptor::new(format!("LBP{}NH", spec.points()), values))
}

/// Per-direction least-squares weights for ALBP.
#[derive(Debug, Clone, PartialEq)]
pub struct AlbpWeights {
    /// One weight per neighbor direction; always finite.
    pub w: Vec<f64>,
}

/// Fits, for each direction `p`, the scalar `w_p` minimizing the summed
/// squared difference `|g_c - w * g_p|^2` over all interior pixels; in
/// closed form `w_p = sum(g_c * g_p) / sum(g_p^2)`. A direction whose
/// neighbor values are all zero is degenerate and gets `w_p = 1`, which
/// reduces ALBP to plain LBP there.
pub fn albp_weights(img: &GrayImage, spec: NeighborhoodSpec) -> Result<AlbpWeights, TextureError> {
    let (xs, ys) = interior(img, spec)?;
    let offsets = spec.offsets();
    let mut cross = vec![0.0f64; spec.points() as usize];
    let mut square = vec![0.0f64; spec.points() as usize];
    for cy in ys {
        for cx in xs.clone() {
            let gc = img.get(cx, cy) as f64;
            for (p, &(dx, dy)) in offsets.iter().enumerate() {
                let gp = sample_at(img, cx as f64 + dx, cy as f64 + dy);
                cross[p] += gc * gp;
                square[p] += gp * gp;
            }
        }
    }
    let w = cross
        .iter()
        .zip(&square)
        .map(|(&c, &s)| if s > 0.0 { c / s } else { 1.0 })
        .collect();
    Ok(AlbpWeights { w })
}

/// Adaptive LBP histogram: codes threshold each neighbor against the
/// weighted center, `s(g_p - w_p * g_c)`, with image-global weights from
/// [`albp_weights`]. Note the deliberate asymmetry in the descriptor's
/// definition: the weight is fitted as center ~ w * neighbor, but applied
/// to the center when coding. Named `ALBP<P>`.
pub fn albp_histogram(
    img: &GrayImage,
    spec: NeighborhoodSpec,
    mapping: &CodeMapping,
) -> Result<Descriptor, TextureError> {
    check_mapping(spec, mapping)?;
    let weights = albp_weights(img, spec)?.w;
    let values = histogram_over_interior(img, spec, mapping, |offsets, cx, cy| {
        let gc = img.get(cx, cy) as f64;
        let mut code = 0u32;
        for (p, &(dx, dy)) in offsets.iter().enumerate() {
            let gp = sample_at(img, cx as f64 + dx, cy as f64 + dy);
            if gp - weights[p] * gc >= 0.0 {
                code |= 1 << p;
            }
        }
        code
    })?;
    Ok(Descriptor::new(format!("ALBP{}", spec.points()), values))
}

/// Completed LBP: the sign histogram (identical to [`lbp_histogram`])
/// concatenated with a magnitude histogram. Magnitude bits set when
/// `|g_p - g_c|` is at least the global mean of all such magnitudes over
/// every interior pixel and direction; each half is normalized to sum 1
/// independently. Named `CLBP<P>`, length `2 * bin_count`.
pub fn clbp_descriptor(
    img: &GrayImage,
    spec: NeighborhoodSpec,
    mapping: &CodeMapping,
) -> Result<Descriptor, TextureError> {
    check_mapping(spec, mapping)?;
    let (xs, ys) = interior(img, spec)?;
    let offsets = spec.offsets();

    // First pass: the global magnitude threshold.
    let mut magnitude_sum = 0.0f64;
    let mut n = 0usize;
    for cy in ys.clone() {
        for cx in xs.clone() {
            let gc = img.get(cx, cy) as f64;
            for &(dx, dy) in &offsets {
                magnitude_sum += (sample_at(img, cx as f64 + dx, cy as f64 + dy) - gc).abs();
            }
            n += 1;
        }
    }
    let a = magnitude_sum / (n as f64 * spec.points() as f64);

    // Second pass: accumulate sign and magnitude codes together.
    let mut s_counts = vec![0.0f64; mapping.bin_count()];
    let mut m_counts = vec![0.0f64; mapping.bin_count()];
    for cy in ys {
        for cx in xs.clone() {
            let gc = img.get(cx, cy) as f64;
            let mut s_code = 0u32;
            let mut m_code = 0u32;
            for (p, &(dx, dy)) in offsets.iter().enumerate() {
                let d = sample_at(img, cx as f64 + dx, cy as f64 + dy) - gc;
                if d >= 0.0 {
                    s_code |= 1 << p;
                }
                if d.abs() >= a {
                    m_code |= 1 << p;
                }
            }
            s_counts[mapping.map(s_code)] += 1.0;
            m_counts[mapping.map(m_code)] += 1.0;
        }
    }
    let scale = 1.0 / n as f64;
    let values: Vec<f64> = s_counts
        .iter()
        .chain(&m_counts)
        .map(|c| c * scale)
        .collect();
    Ok(Descriptor::new(format!("CLBP{}", spec.points()), values))
}

/// LBP variance descriptor: every interior pixel contributes its local
/// neighbor variance `VAR = mean((g_p - mean(g_p))^2)` to the riu2 bin of
/// its LBP code; the result is divided by the total accumulated variance
/// so descriptors are comparable across images. A flat image (total
/// variance 0) yields the all-zero vector. Named `LBPV<P>`.
pub fn lbpv_histogram(img: &GrayImage, spec: NeighborhoodSpec) -> Result<Descriptor, TextureError> {
    let mapping = CodeMapping::build(MappingKind::Riu2, spec.points())?;
    let (xs, ys) = interior(img, spec)?;
    let offsets = spec.offsets();
    let mut acc = vec![0.0f64; mapping.bin_count()];
    let mut total = 0.0f64;
    let inv_p = 1.0 / spec.points() as f64;
    let mut samples = vec![0.0f64; spec.points() as usize];
    for cy in ys {
        for cx in xs.clone() {
            let gc = img.get(cx, cy) as f64;
            let mut code = 0u32;
            let mut mean = 0.0f64;
            for (p, &(dx, dy)) in offsets.iter().enumerate() {
                let gp = sample_at(img, cx as f64 + dx, cy as f64 + dy);
                samples[p] = gp;
                mean += gp;
                if gp >= gc {
                    code |= 1 << p;
                }
            }
            mean *= inv_p;
            let var = samples.iter().map(|gp| (gp - mean) * (gp - mean)).sum::<f64>() * inv_p;
            acc[mapping.map(code)] += var;
            total += var;
        }
    }
    if total > 0.0 {
        for v in &mut acc {
            *v /= total;
        }
    }
    Ok(Descriptor::new(format!("LBPV{}", spec.points()), acc))
}

/// The descriptor menu exposed to configuration: each name fixes the code
/// family and neighborhood preset(s); the histogram mapping for LBP, ALBP
/// and CLBP is chosen separately (riu2 by default). LBPV always uses riu2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DescriptorKind {
    Lbp8,
    Lbp16,
    Lbp8Lbp16,
    Albp8,
    Albp16,
    Clbp8,
    Clbp16,
    Lbpv8,
    Lbpv16,
}

impl DescriptorKind {
    pub const ALL: [DescriptorKind; 9] = [
        DescriptorKind::Lbp8,
        DescriptorKind::Lbp16,
        DescriptorKind::Lbp8Lbp16,
        DescriptorKind::Albp8,
        DescriptorKind::Albp16,
        DescriptorKind::Clbp8,
        DescriptorKind::Clbp16,
        DescriptorKind::Lbpv8,
        DescriptorKind::Lbpv16,
    ];

    pub fn canonical_name(&self) -> &'static str {
        match self {
            DescriptorKind::Lbp8 => "LBP8NH",
            DescriptorKind::Lbp16 => "LBP16NH",
            DescriptorKind::Lbp8Lbp16 => "LBP8NH+LBP16NH",
            DescriptorKind::Albp8 => "ALBP8",
            DescriptorKind::Albp16 => "ALBP16",
            DescriptorKind::Clbp8 => "CLBP8",
            DescriptorKind::Clbp16 => "CLBP16",
            DescriptorKind::Lbpv8 => "LBPV8",
            DescriptorKind::Lbpv16 => "LBPV16",
        }
    }

    /// The neighborhood presets this descriptor samples.
    pub fn specs(&self) -> Vec<NeighborhoodSpec> {
        match self {
            DescriptorKind::Lbp8
            | DescriptorKind::Albp8
            | DescriptorKind::Clbp8
            | DescriptorKind::Lbpv8 => vec![NeighborhoodSpec::P8R1],
            DescriptorKind::Lbp16
            | DescriptorKind::Albp16
            | DescriptorKind::Clbp16
            | DescriptorKind::Lbpv16 => vec![NeighborhoodSpec::P16R2],
            DescriptorKind::Lbp8Lbp16 => {
                vec![NeighborhoodSpec::P8R1, NeighborhoodSpec::P16R2]
            }
        }
    }

    /// Smallest patch side the descriptor can digest: one interior pixel
    /// plus the margin of the widest preset on each side.
    pub fn min_patch_side(&self) -> u32 {
        self.specs()
            .iter()
            .map(|s| 2 * s.margin() + 1)
            .max()
            .expect("at least one spec")
    }

    /// Feature vector length under the given mapping.
    pub fn len(&self, mapping: MappingKind) -> usize {
        let bins = |spec: NeighborhoodSpec, kind: MappingKind| {
            CodeMapping::build(kind, spec.points())
                .expect("preset points are valid")
                .bin_count()
        };
        match self {
            DescriptorKind::Lbp8 | DescriptorKind::Albp8 => bins(NeighborhoodSpec::P8R1, mapping),
            DescriptorKind::Lbp16 | DescriptorKind::Albp16 => {
                bins(NeighborhoodSpec::P16R2, mapping)
            }
            DescriptorKind::Lbp8Lbp16 => {
                bins(NeighborhoodSpec::P8R1, mapping) + bins(NeighborhoodSpec::P16R2, mapping)
            }
            DescriptorKind::Clbp8 => 2 * bins(NeighborhoodSpec::P8R1, mapping),
            DescriptorKind::Clbp16 => 2 * bins(NeighborhoodSpec::P16R2, mapping),
            DescriptorKind::Lbpv8 => bins(NeighborhoodSpec::P8R1, MappingKind::Riu2),
            DescriptorKind::Lbpv16 => bins(NeighborhoodSpec::P16R2, MappingKind::Riu2),
        }
    }

    /// Computes the descriptor for one image.
    pub fn compute(
        &self,
        img: &GrayImage,
        mapping: MappingKind,
    ) -> Result<Descriptor, TextureError> {
        let build = |spec: NeighborhoodSpec| CodeMapping::build(mapping, spec.points());
        let d = match self {
            DescriptorKind::Lbp8 => {
                lbp_histogram(img, NeighborhoodSpec::P8R1, &build(NeighborhoodSpec::P8R1)?)?
            }
            DescriptorKind::Lbp16 => {
                lbp_histogram(img, NeighborhoodSpec::P16R2, &build(NeighborhoodSpec::P16R2)?)?
            }
            DescriptorKind::Lbp8Lbp16 => {
                let a = lbp_histogram(img, NeighborhoodSpec::P8R1, &build(NeighborhoodSpec::P8R1)?)?;
                let b =
                    lbp_histogram(img, NeighborhoodSpec::P16R2, &build(NeighborhoodSpec::P16R2)?)?;
                concat(&a, &b)
            }
            DescriptorKind::Albp8 => {
                albp_histogram(img, NeighborhoodSpec::P8R1, &build(NeighborhoodSpec::P8R1)?)?
            }
            DescriptorKind::Albp16 => {
                albp_histogram(img, NeighborhoodSpec::P16R2, &build(NeighborhoodSpec::P16R2)?)?
            }
            DescriptorKind::Clbp8 => {
                clbp_descriptor(img, NeighborhoodSpec::P8R1, &build(NeighborhoodSpec::P8R1)?)?
            }
            DescriptorKind::Clbp16 => {
                clbp_descriptor(img, NeighborhoodSpec::P16R2, &build(NeighborhoodSpec::P16R2)?)?
            }
            DescriptorKind::Lbpv8 => lbpv_histogram(img, NeighborhoodSpec::P8R1)?,
            DescriptorKind::Lbpv16 => lbpv_histogram(img, NeighborhoodSpec::P16R2)?,
        };
        Ok(d)
    }
}

impl fmt::Display for DescriptorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.canonical_name())
    }
}

impl FromStr for DescriptorKind {
    type Err = TextureError;

    fn from_str(s: &str) -> Result<Self, TextureError> {
        let token = s.to_ascii_uppercase();
        DescriptorKind::ALL
            .iter()
            .find(|k| k.canonical_name() == token)
            .copied()
            .ok_or_else(|| TextureError::UnknownDescriptor(s.to_string()))
    }
}

/// One line of the featurize -> train interchange format.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorRecord {
    pub name: String,
    pub label: WearLabel,
    pub values: Vec<f64>,
}

/// Writes descriptors as `name<TAB>label<TAB>v0,v1,...` with one record
/// per line. Values are printed at 17 significant digits, which
/// round-trips every f64 exactly.
pub fn write_descriptors(
    records: &[DescriptorRecord],
    path: impl AsRef<Path>,
) -> Result<(), TextureError> {
    let path = path.as_ref();
    let mut out = String::new();
    for r in records {
        if r.name.contains('\t') {
            return Err(TextureError::TabInName(r.name.clone()));
        }
        out.push_str(&r.name);
        out.push('\t');
        out.push_str(r.label.as_str());
        out.push('\t');
        for (i, v) in r.values.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!("{v:.16e}"));
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|source| TextureError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses the interchange format written by [`write_descriptors`].
pub fn read_descriptors(path: impl AsRef<Path>) -> Result<Vec<DescriptorRecord>, TextureError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| TextureError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let parse_err = |line: usize, detail: String| TextureError::Parse {
        path: path.to_path_buf(),
        line,
        detail,
    };
    let mut records = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.is_empty() {
            continue;
        }
        let mut fields = line.splitn(3, '\t');
        let name = fields
            .next()
            .ok_or_else(|| parse_err(lineno, "missing name field".into()))?;
        let label = match fields.next() {
            Some("worn") => WearLabel::Worn,
            Some("serviceable") => WearLabel::Serviceable,
            Some(other) => return Err(parse_err(lineno, format!("unknown label {other:?}"))),
            None => return Err(parse_err(lineno, "missing label field".into())),
        };
        let values_text = fields
            .next()
            .ok_or_else(|| parse_err(lineno, "missing values field".into()))?;
        let mut values = Vec::new();
        for tok in values_text.split(',') {
            let v: f64 = tok
                .trim()
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad value {tok:?}")))?;
            if !v.is_finite() || v < 0.0 {
                return Err(parse_err(lineno, format!("negative or non-finite value {tok}")));
            }
            values.push(v);
        }
        if values.is_empty() {
            return Err(parse_err(lineno, "empty value list".into()));
        }
        records.push(DescriptorRecord {
            name: name.to_string(),
            label,
            values,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(w: u32, h: u32, seed: u64) -> GrayImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        GrayImage::from_fn(w, h, |_, _| rng.random())
    }

    #[test]
    fn rotate_min_worked_examples() {
        assert_eq!(rotate_min(0b1100_1011, 8), 0b0010_1111);
        assert_eq!(rotate_min(0b1001_0111, 8), 0b0010_1111);
    }

    #[test]
    fn rotate_min_fixed_points() {
        for p in [8u32, 16] {
            assert_eq!(rotate_min(0, p), 0);
            let all = (1u64 << p) as u32 - 1;
            assert_eq!(rotate_min(all, p), all);
        }
    }

    #[test]
    fn rotate_min_exhaustive_p8_against_shift_oracle() {
        // Oracle: materialize every rotation and take the smallest.
        let ror = |code: u32, i: u32| ((code >> i) | (code << ((8 - i) % 32))) & 0xff;
        for code in 0u32..256 {
            let oracle = (0..8).map(|i| if i == 0 { code } else { ror(code, i) }).min();
            assert_eq!(rotate_min(code, 8), oracle.unwrap(), "code {code:#010b}");
        }
    }

    #[test]
    fn rotate_min_invariant_under_rotation_p8() {
        for code in 0u32..256 {
            for i in 1..8 {
                let rotated = ((code >> i) | (code << (8 - i))) & 0xff;
                assert_eq!(rotate_min(code, 8), rotate_min(rotated, 8));
            }
        }
    }

    #[test]
    fn uniformity_examples() {
        assert_eq!(uniformity(0, 8), 0);
        assert_eq!(uniformity(0xff, 8), 0);
        assert_eq!(uniformity(0b0000_1111, 8), 2);
        assert_eq!(uniformity(0b0101_0101, 8), 8);
    }

    #[test]
    fn mapping_bin_counts() {
        assert_eq!(CodeMapping::build(MappingKind::Riu2, 8).unwrap().bin_count(), 10);
        assert_eq!(CodeMapping::build(MappingKind::Riu2, 16).unwrap().bin_count(), 18);
        assert_eq!(CodeMapping::build(MappingKind::Raw, 8).unwrap().bin_count(), 256);
        assert_eq!(
            CodeMapping::build(MappingKind::RotationInvariant, 8).unwrap().bin_count(),
            36
        );
    }

    #[test]
    fn raw_mapping_is_identity() {
        let m = CodeMapping::build(MappingKind::Raw, 8).unwrap();
        for code in 0..256u32 {
            assert_eq!(m.map(code), code as usize);
        }
    }

    #[test]
    fn riu2_maps_uniform_codes_to_popcount() {
        let m = CodeMapping::build(MappingKind::Riu2, 8).unwrap();
        assert_eq!(m.map(0), 0);
        assert_eq!(m.map(0b0000_1111), 4);
        assert_eq!(m.map(0xff), 8);
        assert_eq!(m.map(0b0101_0101), 9); // non-uniform bin
    }

    #[test]
    fn mapping_bins_are_dense() {
        for kind in [MappingKind::Raw, MappingKind::RotationInvariant, MappingKind::Riu2] {
            let m = CodeMapping::build(kind, 8).unwrap();
            let mut hit = vec![false; m.bin_count()];
            for code in 0..256u32 {
                hit[m.map(code)] = true;
            }
            assert!(hit.iter().all(|&h| h), "{kind:?} leaves an empty bin");
        }
    }

    #[test]
    fn sample_constant_image_is_exact() {
        let img = GrayImage::filled(9, 9, 5);
        for spec in [NeighborhoodSpec::P8R1, NeighborhoodSpec::P16R2] {
            for p in 0..spec.points() {
                assert_eq!(sample_neighbor(&img, 4, 4, p, spec), 5.0);
            }
        }
    }

    #[test]
    fn sample_p0_is_right_neighbor() {
        let img = GrayImage::from_fn(5, 5, |x, y| (10 * x + y) as u8);
        let v = sample_neighbor(&img, 2, 2, 0, NeighborhoodSpec::P8R1);
        assert_eq!(v, img.get(3, 2) as f64);
    }

    #[test]
    fn sample_axis_neighbors_snap_for_p8r1() {
        let img = random_image(7, 7, 1);
        // p = 0, 2, 4, 6 are the four axis-aligned unit offsets.
        let expected = [
            img.get(4, 3) as f64,
            img.get(3, 2) as f64,
            img.get(2, 3) as f64,
            img.get(3, 4) as f64,
        ];
        for (i, p) in [0u32, 2, 4, 6].iter().enumerate() {
            assert_eq!(
                sample_neighbor(&img, 3, 3, *p, NeighborhoodSpec::P8R1),
                expected[i]
            );
        }
    }

    #[test]
    fn sample_is_exact_on_linear_ramp() {
        // Bilinear interpolation reproduces any plane exactly; evaluate
        // the plane analytically at the sample point as the oracle.
        let img = GrayImage::from_fn(9, 9, |x, y| (2 * x + 3 * y) as u8);
        let spec = NeighborhoodSpec::P16R2;
        for p in 0..16 {
            let theta = 2.0 * PI * p as f64 / 16.0;
            let (mut sx, mut sy) = (4.0 + 2.0 * theta.cos(), 4.0 - 2.0 * theta.sin());
            if (sx - sx.round()).abs() <= 1e-6 {
                sx = sx.round();
            }
            if (sy - sy.round()).abs() <= 1e-6 {
                sy = sy.round();
            }
            let expected = 2.0 * sx + 3.0 * sy;
            assert_abs_diff_eq!(
                sample_neighbor(&img, 4, 4, p, spec),
                expected,
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn lbp_code_constant_image_is_all_ones() {
        let img = GrayImage::filled(5, 5, 42);
        assert_eq!(lbp_code(&img, 2, 2, NeighborhoodSpec::P8R1), 255);
    }

    #[test]
    fn lbp_code_bright_center_is_zero() {
        let img = GrayImage::from_fn(3, 3, |x, y| if (x, y) == (1, 1) { 200 } else { 10 });
        assert_eq!(lbp_code(&img, 1, 1, NeighborhoodSpec::P8R1), 0);
    }

    #[test]
    fn lbp_code_matches_naive_oracle() {
        // Oracle: loop over p summing bit values explicitly.
        for seed in 0..100 {
            let img = random_image(5, 5, seed);
            for cy in 1..4u32 {
                for cx in 1..4u32 {
                    let gc = img.get(cx, cy) as f64;
                    let mut expected = 0u32;
                    for p in 0..8 {
                        let gp = sample_neighbor(&img, cx, cy, p, NeighborhoodSpec::P8R1);
                        if gp - gc >= 0.0 {
                            expected += 1 << p;
                        }
                    }
                    assert_eq!(lbp_code(&img, cx, cy, NeighborhoodSpec::P8R1), expected);
                }
            }
        }
    }

    #[test]
    fn lbp_histogram_constant_image_masses_one_bin() {
        let img = GrayImage::filled(8, 8, 77);
        for (spec, code) in [
            (NeighborhoodSpec::P8R1, 255u32),
            (NeighborhoodSpec::P16R2, 65535),
        ] {
            let mapping = CodeMapping::build(MappingKind::Riu2, spec.points()).unwrap();
            let d = lbp_histogram(&img, spec, &mapping).unwrap();
            let bin = mapping.map(code);
            for (i, v) in d.values().iter().enumerate() {
                assert_eq!(*v, if i == bin { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn lbp_histogram_raw_matches_counting_oracle() {
        let img = random_image(7, 7, 9);
        let mapping = CodeMapping::build(MappingKind::Raw, 8).unwrap();
        let d = lbp_histogram(&img, NeighborhoodSpec::P8R1, &mapping).unwrap();
        let mut counts = vec![0u32; 256];
        for cy in 1..6 {
            for cx in 1..6 {
                counts[lbp_code(&img, cx, cy, NeighborhoodSpec::P8R1) as usize] += 1;
            }
        }
        for (v, c) in d.values().iter().zip(&counts) {
            assert_abs_diff_eq!(*v, *c as f64 / 25.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn too_small_image_is_rejected() {
        let img = GrayImage::filled(4, 9, 0);
        let mapping = CodeMapping::build(MappingKind::Riu2, 16).unwrap();
        assert!(matches!(
            lbp_histogram(&img, NeighborhoodSpec::P16R2, &mapping),
            Err(TextureError::ImageTooSmall { .. })
        ));
    }

    #[test]
    fn albp_weights_constant_image_all_ones() {
        let img = GrayImage::filled(6, 6, 33);
        let w = albp_weights(&img, NeighborhoodSpec::P8R1).unwrap().w;
        for wp in w {
            assert_eq!(wp, 1.0);
        }
    }

    #[test]
    fn albp_weights_black_image_degenerate_to_one() {
        let img = GrayImage::filled(6, 6, 0);
        let w = albp_weights(&img, NeighborhoodSpec::P8R1).unwrap().w;
        assert!(w.iter().all(|&wp| wp == 1.0));
    }

    #[test]
    fn albp_weight_is_half_when_neighbor_doubles_center() {
        // Columns of powers of two: the right neighbor (p = 0) is exactly
        // twice the center everywhere, so the fitted weight is 1/2; the
        // left neighbor (p = 4) is half the center, giving weight 2.
        let img = GrayImage::from_fn(8, 6, |x, _| 1u8 << x);
        let w = albp_weights(&img, NeighborhoodSpec::P8R1).unwrap().w;
        assert_abs_diff_eq!(w[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(w[4], 2.0, epsilon = 1e-15);
    }

    #[test]
    fn albp_weights_match_golden_section_oracle() {
        // Oracle: 1-D golden-section minimization of the actual objective
        // sum((g_c - w * g_p)^2), independent of the closed form.
        let img = random_image(9, 9, 21);
        let spec = NeighborhoodSpec::P8R1;
        let w = albp_weights(&img, spec).unwrap().w;
        for p in 0..8u32 {
            let objective = |wt: f64| {
                let mut sum = 0.0;
                for cy in 1..8 {
                    for cx in 1..8 {
                        let gc = img.get(cx, cy) as f64;
                        let gp = sample_neighbor(&img, cx, cy, p, spec);
                        sum += (gc - wt * gp) * (gc - wt * gp);
                    }
                }
                sum
            };
            let golden = golden_section_min(objective, 0.0, 100.0, 1e-6);
            // Golden section alone stalls once objective differences drop
            // below f64 noise; one parabolic-vertex step (exact for a
            // quadratic objective) recovers the remaining digits.
            let h = 1e-3;
            let (fm, fl, fr) = (objective(golden), objective(golden - h), objective(golden + h));
            let refined = golden - h / 2.0 * (fr - fl) / (fr - 2.0 * fm + fl);
            assert_abs_diff_eq!(w[p as usize], refined, epsilon = 1e-9);
        }
    }

    fn golden_section_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
        let phi = (5.0f64.sqrt() - 1.0) / 2.0;
        let mut c = b - phi * (b - a);
        let mut d = a + phi * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        while (b - a).abs() > tol {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - phi * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + phi * (b - a);
                fd = f(d);
            }
        }
        (a + b) / 2.0
    }

    #[test]
    fn albp_weights_are_local_minima() {
        let img = random_image(9, 9, 7);
        let spec = NeighborhoodSpec::P8R1;
        let w = albp_weights(&img, spec).unwrap().w;
        for p in 0..8u32 {
            let objective = |wt: f64| {
                let mut sum = 0.0;
                for cy in 1..8 {
                    for cx in 1..8 {
                        let gc = img.get(cx, cy) as f64;
                        let gp = sample_neighbor(&img, cx, cy, p, spec);
                        sum += (gc - wt * gp) * (gc - wt * gp);
                    }
                }
                sum
            };
            let at = objective(w[p as usize]);
            assert!(at <= objective(w[p as usize] + 1e-4));
            assert!(at <= objective(w[p as usize] - 1e-4));
        }
    }

    #[test]
    fn albp_equals_lbp_on_constant_image() {
        let img = GrayImage::filled(7, 7, 120);
        let mapping = CodeMapping::build(MappingKind::Riu2, 8).unwrap();
        let a = albp_histogram(&img, NeighborhoodSpec::P8R1, &mapping).unwrap();
        let l = lbp_histogram(&img, NeighborhoodSpec::P8R1, &mapping).unwrap();
        assert_eq!(a.values(), l.values());
    }

    #[test]
    fn clbp_sign_half_equals_lbp_histogram() {
        for seed in [3u64, 14, 15] {
            let img = random_image(8, 8, seed);
            let mapping = CodeMapping::build(MappingKind::Riu2, 8).unwrap();
            let c = clbp_descriptor(&img, NeighborhoodSpec::P8R1, &mapping).unwrap();
            let l = lbp_histogram(&img, NeighborhoodSpec::P8R1, &mapping).unwrap();
            assert_eq!(&c.values()[..mapping.bin_count()], l.values());
        }
    }

    #[test]
    fn clbp_constant_image_magnitude_half() {
        // All magnitudes are 0, the threshold is 0, and t(0, 0) = 1, so
        // the magnitude code is all-ones everywhere.
        let img = GrayImage::filled(7, 7, 9);
        let mapping = CodeMapping::build(MappingKind::Riu2, 8).unwrap();
        let c = clbp_descriptor(&img, NeighborhoodSpec::P8R1, &mapping).unwrap();
        let m_half = &c.values()[mapping.bin_count()..];
        let bin = mapping.map(255);
        for (i, v) in m_half.iter().enumerate() {
            assert_eq!(*v, if i == bin { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn clbp_length_is_twice_bin_count() {
        let img = random_image(8, 8, 2);
        for kind in [MappingKind::Raw, MappingKind::Riu2] {
            let mapping = CodeMapping::build(kind, 8).unwrap();
            let c = clbp_descriptor(&img, NeighborhoodSpec::P8R1, &mapping).unwrap();
            assert_eq!(c.len(), 2 * mapping.bin_count());
        }
    }

    #[test]
    fn lbpv_constant_image_is_all_zero() {
        let img = GrayImage::filled(6, 6, 200);
        let d = lbpv_histogram(&img, NeighborhoodSpec::P8R1).unwrap();
        assert!(d.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn lbpv_single_interior_pixel_masses_its_bin() {
        let img = GrayImage::from_fn(3, 3, |x, y| (40 * x + 13 * y) as u8);
        let d = lbpv_histogram(&img, NeighborhoodSpec::P8R1).unwrap();
        let mapping = CodeMapping::build(MappingKind::Riu2, 8).unwrap();
        let bin = mapping.map(lbp_code(&img, 1, 1, NeighborhoodSpec::P8R1));
        for (i, v) in d.values().iter().enumerate() {
            assert_eq!(*v, if i == bin { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn concat_names_and_lengths() {
        let a = Descriptor::new("LBP8NH", vec![0.5, 0.5]);
        let b = Descriptor::new("LBP16NH", vec![0.25, 0.25, 0.5]);
        let c = concat(&a, &b);
        assert_eq!(c.name(), "LBP8NH+LBP16NH");
        assert_eq!(c.len(), 5);
        assert_eq!(&c.values()[..2], a.values());
        assert_eq!(&c.values()[2..], b.values());
    }

    #[test]
    fn concat_with_empty_is_identity() {
        let a = Descriptor::new("X", vec![0.1, 0.9]);
        let empty = Descriptor::new("E", vec![]);
        assert_eq!(concat(&a, &empty).values(), a.values());
    }

    #[test]
    fn codes_invariant_under_brightness_shift() {
        // Adding a constant preserves every (g_p - g_c) sign as long as no
        // pixel saturates, so codes and histograms are unchanged.
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let base = GrayImage::from_fn(8, 8, |_, _| rng.random_range(0..=200u8));
        let shifted = GrayImage::from_fn(8, 8, |x, y| base.get(x, y) + 40);
        let mapping = CodeMapping::build(MappingKind::Riu2, 8).unwrap();
        for cy in 1..7 {
            for cx in 1..7 {
                assert_eq!(
                    lbp_code(&base, cx, cy, NeighborhoodSpec::P8R1),
                    lbp_code(&shifted, cx, cy, NeighborhoodSpec::P8R1)
                );
            }
        }
        assert_eq!(
            lbp_histogram(&base, NeighborhoodSpec::P8R1, &mapping).unwrap().values(),
            lbp_histogram(&shifted, NeighborhoodSpec::P8R1, &mapping).unwrap().values()
        );
    }

    #[test]
    fn descriptor_kind_parsing_and_lengths() {
        for kind in DescriptorKind::ALL {
            assert_eq!(
                kind.canonical_name().parse::<DescriptorKind>().unwrap(),
                kind
            );
            assert_eq!(
                kind.canonical_name().to_lowercase().parse::<DescriptorKind>().unwrap(),
                kind
            );
        }
        assert!("LBP9NH".parse::<DescriptorKind>().is_err());
        assert_eq!(DescriptorKind::Lbp8.len(MappingKind::Riu2), 10);
        assert_eq!(DescriptorKind::Lbp16.len(MappingKind::Riu2), 18);
        assert_eq!(DescriptorKind::Lbp8Lbp16.len(MappingKind::Riu2), 28);
        assert_eq!(DescriptorKind::Clbp16.len(MappingKind::Riu2), 36);
        assert_eq!(DescriptorKind::Lbpv8.len(MappingKind::Raw), 10); // LBPV pins riu2
    }

    #[test]
    fn descriptor_kind_compute_dimensions_and_names() {
        let img = random_image(9, 9, 50);
        for kind in DescriptorKind::ALL {
            let d = kind.compute(&img, MappingKind::Riu2).unwrap();
            assert_eq!(d.len(), kind.len(MappingKind::Riu2), "{kind}");
            assert_eq!(d.name(), kind.canonical_name());
        }
    }

    #[test]
    fn min_patch_side_follows_margin() {
        assert_eq!(DescriptorKind::Lbp8.min_patch_side(), 3);
        assert_eq!(DescriptorKind::Lbp16.min_patch_side(), 5);
        assert_eq!(DescriptorKind::Lbp8Lbp16.min_patch_side(), 5);
    }

    #[test]
    fn interchange_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("features.tsv");
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let records: Vec<DescriptorRecord> = (0..20)
            .map(|i| DescriptorRecord {
                name: format!("patch-{i}"),
                label: if i % 2 == 0 { WearLabel::Worn } else { WearLabel::Serviceable },
                values: (0..10).map(|_| rng.random::<f64>()).collect(),
            })
            .collect();
        write_descriptors(&records, &path).unwrap();
        let back = read_descriptors(&path).unwrap();
        assert_eq!(back, records); // bit-exact f64 equality
    }

    #[test]
    fn interchange_rejects_tab_in_name() {
        let dir = tempfile::tempdir().unwrap();
        let r = DescriptorRecord {
            name: "a\tb".into(),
            label: WearLabel::Worn,
            values: vec![1.0],
        };
        assert!(matches!(
            write_descriptors(&[r], dir.path().join("x.tsv")),
            Err(TextureError::TabInName(_))
        ));
    }

    #[test]
    fn interchange_rejects_bad_label() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.tsv");
        std::fs::write(&path, "p\tbroken\t1.0\n").unwrap();
        assert!(matches!(
            read_descriptors(&path),
            Err(TextureError::Parse { line: 1, .. })
        ));
    }

    proptest! {
        #[test]
        fn prop_lbp_histogram_sums_to_one(seed in any::<u64>(), w in 5u32..12, h in 5u32..12) {
            let img = random_image(w, h, seed);
            let mapping = CodeMapping::build(MappingKind::Riu2, 8).unwrap();
            let d = lbp_histogram(&img, NeighborhoodSpec::P8R1, &mapping).unwrap();
            let sum: f64 = d.values().iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
        }

        #[test]
        fn prop_rotate_min_idempotent(code in 0u32..65536, wide in proptest::bool::ANY) {
            let p = if wide { 16 } else { 8 };
            let c = code & ((1 << p) - 1);
            prop_assert_eq!(rotate_min(rotate_min(c, p), p), rotate_min(c, p));
        }

        #[test]
        fn prop_extraction_is_deterministic(seed in any::<u64>()) {
            let img = random_image(8, 8, seed);
            let a = DescriptorKind::Clbp8.compute(&img, MappingKind::Riu2).unwrap();
            let b = DescriptorKind::Clbp8.compute(&img, MappingKind::Riu2).unwrap();
            prop_assert_eq!(a, b); // bit-identical
        }
    }
}
