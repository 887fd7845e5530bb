//! Wear-patch layouts: named sets of fractional rectangles cropped out of
//! a cutting-edge image.
//!
//! Five layouts are built in. HGD tiles the image with an 8x2 grid; FED
//! splits it into a vertical edge strip, top and bottom bands, and the
//! remaining interior (mutually disjoint); TBD uses doubled, overlapping
//! edge and band strips; HED is FED with the edge strip halved; SED slices
//! a wider edge strip into nine stacked subregions plus full-width top and
//! bottom bands. All fractions are configurable because the layouts are a
//! geometric convention, not measurements.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::imageio::GrayImage;

#[derive(Debug, Error)]
pub enum PatchError {
    #[error("unknown layout {0:?} (expected HGD, FED, TBD, HED, or SED)")]
    UnknownLayout(String),
    #[error("layout parameter {param} = {value} out of range (need 0 < {param} < 0.5)")]
    ParamOutOfRange { param: &'static str, value: f64 },
    #[error(
        "patch {index} of a {width}x{height} source is {patch_width}x{patch_height}, \
         smaller than the required {min_side} pixels per side"
    )]
    PatchTooSmall {
        index: usize,
        width: u32,
        height: u32,
        patch_width: u32,
        patch_height: u32,
        min_side: u32,
    },
}

/// An axis-aligned rectangle in fractions of the image dimensions,
/// half-open in spirit: `[x0, x1) x [y0, y1)` after pixel conversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracRect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl FracRect {
    fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        debug_assert!(
            (0.0..=1.0).contains(&x0) && (0.0..=1.0).contains(&y0) && x0 < x1 && y0 < y1,
            "degenerate rect [{x0},{x1}) x [{y0},{y1})"
        );
        Self { x0, y0, x1, y1 }
    }

    /// Positive-area intersection test in fraction space.
    fn overlaps(&self, other: &FracRect) -> bool {
        self.x0.max(other.x0) < self.x1.min(other.x1)
            && self.y0.max(other.y0) < self.y1.min(other.y1)
    }
}

/// A patch rectangle in pixels, half-open: `[x0, x1) x [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelRect {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl PixelRect {
    pub fn width(&self) -> u32 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> u32 {
        self.y1 - self.y0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LayoutName {
    Hgd,
    Fed,
    Tbd,
    Hed,
    Sed,
}

impl LayoutName {
    pub const ALL: [LayoutName; 5] = [
        LayoutName::Hgd,
        LayoutName::Fed,
        LayoutName::Tbd,
        LayoutName::Hed,
        LayoutName::Sed,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            LayoutName::Hgd => "HGD",
            LayoutName::Fed => "FED",
            LayoutName::Tbd => "TBD",
            LayoutName::Hed => "HED",
            LayoutName::Sed => "SED",
        }
    }

    /// Number of patches the layout produces.
    pub fn patch_count(&self) -> usize {
        match self {
            LayoutName::Hgd => 16,
            LayoutName::Fed => 4,
            LayoutName::Tbd => 6,
            LayoutName::Hed => 5,
            LayoutName::Sed => 11,
        }
    }
}

impl fmt::Display for LayoutName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LayoutName {
    type Err = PatchError;

    fn from_str(s: &str) -> Result<Self, PatchError> {
        match s.to_ascii_uppercase().as_str() {
            "HGD" => Ok(LayoutName::Hgd),
            "FED" => Ok(LayoutName::Fed),
            "TBD" => Ok(LayoutName::Tbd),
            "HED" => Ok(LayoutName::Hed),
            "SED" => Ok(LayoutName::Sed),
            other => Err(PatchError::UnknownLayout(other.to_string())),
        }
    }
}

/// Named fractions shared by the layout geometries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayoutParams {
    /// Width of the vertical cutting-edge strip (FED, TBD, HED).
    pub edge_width: f64,
    /// Height of each horizontal band (FED, TBD, HED, SED).
    pub band_height: f64,
    /// Width of SED's vertical region, split into nine subregions.
    pub sed_edge_width: f64,
}

impl Default for LayoutParams {
    fn default() -> Self {
        Self {
            edge_width: 0.20,
            band_height: 0.15,
            sed_edge_width: 0.25,
        }
    }
}

impl LayoutParams {
    fn validate(&self) -> Result<(), PatchError> {
        for (param, value) in [
            ("edge_width", self.edge_width),
            ("band_height", self.band_height),
            ("sed_edge_width", self.sed_edge_width),
        ] {
            if !(value > 0.0 && value < 0.5) {
                return Err(PatchError::ParamOutOfRange { param, value });
            }
        }
        Ok(())
    }
}

/// A named, ordered list of fractional patch rectangles.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchLayout {
    name: LayoutName,
    rects: Vec<FracRect>,
    params: LayoutParams,
}

impl PatchLayout {
    pub fn name(&self) -> LayoutName {
        self.name
    }

    pub fn rects(&self) -> &[FracRect] {
        &self.rects
    }

    pub fn params(&self) -> LayoutParams {
        self.params
    }

    pub fn patch_count(&self) -> usize {
        self.rects.len()
    }
}

/// Builds one of the five layouts. Rect order is stable:
///
/// - HGD: row-major over the 8x2 grid (two columns per row, top to bottom).
/// - FED: vertical edge, top band, bottom band, interior.
/// - TBD: two vertical bands left to right, two top bands downward, then
///   the two bottom bands upward-from-outside (inner band before the
///   outermost one is index 4, the outermost index 5).
/// - HED: top half of the edge strip, bottom half, then as FED.
/// - SED: nine edge subregions top to bottom, then top band, bottom band.
pub fn layout_for(name: LayoutName, params: LayoutParams) -> Result<PatchLayout, PatchError> {
    params.validate()?;
    let e = params.edge_width;
    let h = params.band_height;
    let es = params.sed_edge_width;
    // Boundary fractions are bound once and reused so that rects meant to
    // abut share bit-identical coordinates; pixel rounding keys on that.
    let h2 = 2.0 * h;
    let e2 = 2.0 * e;
    let bot = 1.0 - h;
    let bot2 = 1.0 - h2;
    let rects = match name {
        LayoutName::Hgd => {
            let mut rects = Vec::with_capacity(16);
            for row in 0..8u32 {
                for col in 0..2u32 {
                    rects.push(FracRect::new(
                        col as f64 / 2.0,
                        row as f64 / 8.0,
                        (col + 1) as f64 / 2.0,
                        (row + 1) as f64 / 8.0,
                    ));
                }
            }
            rects
        }
        LayoutName::Fed => vec![
            FracRect::new(0.0, 0.0, e, 1.0),
            FracRect::new(e, 0.0, 1.0, h),
            FracRect::new(e, bot, 1.0, 1.0),
            FracRect::new(e, h, 1.0, bot),
        ],
        LayoutName::Tbd => vec![
            FracRect::new(0.0, 0.0, e, 1.0),
            FracRect::new(e, 0.0, e2, 1.0),
            FracRect::new(0.0, 0.0, 1.0, h),
            FracRect::new(0.0, h, 1.0, h2),
            FracRect::new(0.0, bot2, 1.0, bot),
            FracRect::new(0.0, bot, 1.0, 1.0),
        ],
        LayoutName::Hed => vec![
            FracRect::new(0.0, 0.0, e, 0.5),
            FracRect::new(0.0, 0.5, e, 1.0),
            FracRect::new(e, 0.0, 1.0, h),
            FracRect::new(e, bot, 1.0, 1.0),
            FracRect::new(e, h, 1.0, bot),
        ],
        LayoutName::Sed => {
            let mut rects: Vec<FracRect> = (0..9u32)
                .map(|k| {
                    FracRect::new(0.0, k as f64 / 9.0, es, (k + 1) as f64 / 9.0)
                })
                .collect();
            rects.push(FracRect::new(0.0, 0.0, 1.0, h));
            rects.push(FracRect::new(0.0, bot, 1.0, 1.0));
            rects
        }
    };
    debug_assert_eq!(rects.len(), name.patch_count());
    Ok(PatchLayout {
        name,
        rects,
        params,
    })
}

/// Converts the layout's fractions to pixel rectangles for a WxH image.
///
/// Left/top edges round down. Right/bottom edges round up, except when the
/// same fraction also serves as some rect's left/top edge on that axis: it
/// then rounds down too, so rects that abut in fractions abut in pixels —
/// the right edge of one is exactly the left edge of the next, with no
/// shared or dropped rows and columns.
pub fn pixel_rects(layout: &PatchLayout, width: u32, height: u32) -> Vec<PixelRect> {
    let x_starts: Vec<u64> = layout.rects.iter().map(|r| r.x0.to_bits()).collect();
    let y_starts: Vec<u64> = layout.rects.iter().map(|r| r.y0.to_bits()).collect();
    let edge = |f: f64, dim: u32, starts: &[u64]| -> u32 {
        let v = f * dim as f64;
        if starts.contains(&f.to_bits()) {
            v.floor() as u32
        } else {
            (v.ceil() as u32).min(dim)
        }
    };
    layout
        .rects
        .iter()
        .map(|r| PixelRect {
            x0: (r.x0 * width as f64).floor() as u32,
            y0: (r.y0 * height as f64).floor() as u32,
            x1: edge(r.x1, width, &x_starts),
            y1: edge(r.y1, height, &y_starts),
        })
        .collect()
}

/// Crops one sub-image per layout rect, in rect order. Every patch must be
/// at least `min_side` pixels in both dimensions — pass the requirement of
/// the descriptor that will consume the patches (e.g.
/// `DescriptorKind::min_patch_side()`).
pub fn extract_patches(
    img: &GrayImage,
    layout: &PatchLayout,
    min_side: u32,
) -> Result<Vec<GrayImage>, PatchError> {
    let rects = pixel_rects(layout, img.width(), img.height());
    let mut patches = Vec::with_capacity(rects.len());
    for (index, r) in rects.iter().enumerate() {
        if r.width() < min_side || r.height() < min_side {
            return Err(PatchError::PatchTooSmall {
                index,
                width: img.width(),
                height: img.height(),
                patch_width: r.width(),
                patch_height: r.height(),
                min_side,
            });
        }
        patches.push(img.crop(r.x0, r.y0, r.width(), r.height()));
    }
    Ok(patches)
}

/// All unordered index pairs of rects with positive-area intersection.
pub fn overlap_report(layout: &PatchLayout) -> Vec<(usize, usize)> {
    let rects = layout.rects();
    let mut pairs = Vec::new();
    for i in 0..rects.len() {
        for j in i + 1..rects.len() {
            if rects[i].overlaps(&rects[j]) {
                pairs.push((i, j));
            }
        }
    }
    pairs
}
