//! Synthetic image generators used by tests, benches and the examples.
//!
//! Two families matter: texture stand-ins (uniform noise reads as "worn",
//! smooth gradients as "serviceable" — their local binary pattern
//! statistics are far apart, so a classifier trained on them must reach
//! perfect separation if the pipeline is wired correctly), and a mock
//! milling insert with a known cutting-edge column for exercising the
//! crop pipeline against ground truth.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::imageio::{
    save_image, save_manifest, DatasetManifest, GrayImage, ImageIoError, ImageRole,
    ManifestEntry, ManifestError, WearLabel,
};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error(transparent)]
    Image(#[from] ImageIoError),
    #[error(transparent)]
    Manifest(#[from] ManifestError),
}

/// Uniform pixel noise; seeded, so the same arguments always produce the
/// same image.
pub fn noise_image(width: u32, height: u32, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GrayImage::from_fn(width, height, |_, _| rng.random::<u8>())
}

/// Smooth linear ramp `a + b*x + c*y`, clamped to [0, 255].
pub fn gradient_image(width: u32, height: u32, a: f64, b: f64, c: f64) -> GrayImage {
    GrayImage::from_fn(width, height, |x, y| {
        (a + b * f64::from(x) + c * f64::from(y)).clamp(0.0, 255.0) as u8
    })
}

/// Geometry of the synthetic insert produced by [`insert_mock`].
pub const MOCK_SIZE: u32 = 256;
pub const MOCK_BACKGROUND: u8 = 20;
pub const MOCK_INSERT_VALUE: u8 = 200;
pub const MOCK_SCREW_VALUE: u8 = 80;
pub const MOCK_SCREW_RADIUS: u32 = 60;
/// Screw center sits this many columns right of the cutting edge.
pub const MOCK_SCREW_OFFSET: u32 = 83;

/// A 256×256 mock of a photographed insert: dark background, a bright
/// insert occupying every column at and right of `boundary_col` (so the
/// cutting edge is the vertical step at that column), and a darker screw
/// disk of radius 60 inside the insert. Panics if the geometry does not
/// fit in the frame.
pub fn insert_mock(boundary_col: u32) -> GrayImage {
    let cx = boundary_col + MOCK_SCREW_OFFSET;
    let cy = MOCK_SIZE / 2;
    assert!(
        boundary_col < MOCK_SIZE
            && cx + MOCK_SCREW_RADIUS < MOCK_SIZE
            && cx - MOCK_SCREW_RADIUS > boundary_col,
        "screw disk must fit inside the insert region"
    );
    let r2 = i64::from(MOCK_SCREW_RADIUS) * i64::from(MOCK_SCREW_RADIUS);
    GrayImage::from_fn(MOCK_SIZE, MOCK_SIZE, |x, y| {
        let dx = i64::from(x) - i64::from(cx);
        let dy = i64::from(y) - i64::from(cy);
        if dx * dx + dy * dy <= r2 {
            MOCK_SCREW_VALUE
        } else if x >= boundary_col {
            MOCK_INSERT_VALUE
        } else {
            MOCK_BACKGROUND
        }
    })
}

/// Sizes used by [`separable_corpus`].
pub const CORPUS_PATCH_SIDE: u32 = 64;
pub const CORPUS_EDGE_WIDTH: u32 = 128;
pub const CORPUS_EDGE_HEIGHT: u32 = 512;

/// Writes a small labeled dataset under `dir` and returns the manifest
/// path. Worn samples are noise, serviceable ones are gradients; patch
/// rows are 64×64 training crops and edge rows are 128×512 full edges.
pub fn separable_corpus(
    dir: &Path,
    patches_per_class: usize,
    edges_per_class: usize,
    seed: u64,
) -> Result<PathBuf, SynthError> {
    fs::create_dir_all(dir).map_err(|source| {
        SynthError::Image(ImageIoError::Write {
            path: dir.to_path_buf(),
            source,
        })
    })?;
    let mut entries = Vec::new();
    let mut write = |name: String,
                     img: &GrayImage,
                     role: ImageRole,
                     label: WearLabel|
     -> Result<(), ImageIoError> {
        save_image(img, dir.join(&name))?;
        entries.push(ManifestEntry {
            path: name,
            role,
            label,
            group: None,
        });
        Ok(())
    };
    for i in 0..patches_per_class {
        let worn = noise_image(CORPUS_PATCH_SIDE, CORPUS_PATCH_SIDE, seed ^ (i as u64));
        write(
            format!("patch_worn_{i:03}.pgm"),
            &worn,
            ImageRole::Patch,
            WearLabel::Worn,
        )?;
        let ramp = gradient_image(
            CORPUS_PATCH_SIDE,
            CORPUS_PATCH_SIDE,
            40.0 + (i % 10) as f64 * 12.0,
            0.3 + (i % 5) as f64 * 0.2,
            0.2 + (i % 3) as f64 * 0.3,
        );
        write(
            format!("patch_serviceable_{i:03}.pgm"),
            &ramp,
            ImageRole::Patch,
            WearLabel::Serviceable,
        )?;
    }
    for i in 0..edges_per_class {
        let worn = noise_image(
            CORPUS_EDGE_WIDTH,
            CORPUS_EDGE_HEIGHT,
            seed ^ 0xE06E ^ (i as u64),
        );
        write(
            format!("edge_worn_{i:03}.pgm"),
            &worn,
            ImageRole::Edge,
            WearLabel::Worn,
        )?;
        let ramp = gradient_image(
            CORPUS_EDGE_WIDTH,
            CORPUS_EDGE_HEIGHT,
            60.0 + (i % 7) as f64 * 9.0,
            0.4 + (i % 4) as f64 * 0.15,
            0.1 + (i % 3) as f64 * 0.1,
        );
        write(
            format!("edge_serviceable_{i:03}.pgm"),
            &ramp,
            ImageRole::Edge,
            WearLabel::Serviceable,
        )?;
    }
    let manifest_path = dir.join("manifest.csv");
    let manifest = DatasetManifest::from_entries(entries, dir.to_path_buf());
    save_manifest(&manifest, &manifest_path)?;
    Ok(manifest_path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imageio::load_manifest;

    #[test]
    fn noise_is_seed_deterministic() {
        let a = noise_image(32, 32, 7);
        let b = noise_image(32, 32, 7);
        let c = noise_image(32, 32, 8);
        assert_eq!(a.pixels(), b.pixels());
        assert_ne!(a.pixels(), c.pixels());
    }

    #[test]
    fn gradient_is_monotone_along_axes() {
        let img = gradient_image(64, 64, 10.0, 1.0, 0.5);
        assert!(img.get(63, 0) > img.get(0, 0));
        assert!(img.get(0, 63) > img.get(0, 0));
        assert_eq!(img.get(0, 0), 10);
    }

    #[test]
    fn mock_has_step_at_boundary_and_screw_inside() {
        let img = insert_mock(90);
        assert_eq!(img.get(89, 10), MOCK_BACKGROUND);
        assert_eq!(img.get(90, 10), MOCK_INSERT_VALUE);
        assert_eq!(img.get(90 + MOCK_SCREW_OFFSET, 128), MOCK_SCREW_VALUE);
        // The screw never bleeds over the cutting edge.
        for y in 0..MOCK_SIZE {
            assert_ne!(img.get(90, y), MOCK_SCREW_VALUE);
        }
    }

    #[test]
    fn corpus_round_trips_through_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = separable_corpus(dir.path(), 3, 2, 42).unwrap();
        let loaded = load_manifest(&manifest).unwrap();
        assert_eq!(loaded.entries().len(), 3 * 2 + 2 * 2);
        let (worn, serviceable) = loaded.class_counts();
        assert_eq!((worn, serviceable), (5, 5));
        for entry in loaded.entries() {
            let img = crate::imageio::load_image(loaded.resolve(entry)).unwrap();
            match entry.role {
                ImageRole::Patch => assert_eq!(img.width(), CORPUS_PATCH_SIDE),
                ImageRole::Edge => assert_eq!(img.width(), CORPUS_EDGE_WIDTH),
            }
        }
    }
}
