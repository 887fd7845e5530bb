//! Grayscale image container, lossless PGM/PNG loading and dataset manifests.
//!
//! Binary PGM (P5, maxval 255) is the canonical interchange format: it is
//! bit-exact and trivially diffable. PNG is accepted read-only and must
//! already be 8-bit grayscale; color inputs are rejected rather than
//! converted so that data errors surface loudly.

use std::fmt;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from image loading and saving.
#[derive(Debug, Error)]
pub enum ImageIoError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: unsupported format ({detail}); expected binary PGM (P5) or 8-bit grayscale PNG")]
    UnsupportedFormat { path: PathBuf, detail: String },
    #[error("{path}: malformed header: {detail}")]
    MalformedHeader { path: PathBuf, detail: String },
    #[error("{path}: PGM maxval is {maxval}, only 255 is supported")]
    BadMaxval { path: PathBuf, maxval: u32 },
    #[error("{path}: truncated pixel data: expected {expected} bytes, found {found}")]
    Truncated {
        path: PathBuf,
        expected: usize,
        found: usize,
    },
    #[error("{path}: {found} trailing bytes after pixel data")]
    TrailingData { path: PathBuf, found: usize },
    #[error("invalid image dimensions {width}x{height}")]
    BadDimensions { width: u32, height: u32 },
    #[error("pixel buffer holds {got} bytes but {width}x{height} needs {need}")]
    BadPixelCount {
        width: u32,
        height: u32,
        need: usize,
        got: usize,
    },
    #[error("{path}: PNG decode failed: {source}")]
    PngDecode {
        path: PathBuf,
        source: png::DecodingError,
    },
}

/// Errors from dataset manifest parsing.
#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        source: Box<csv::Error>,
    },
    #[error("{path}: missing column {column:?} (header must be `path,role,label,group`)")]
    MissingColumn { path: PathBuf, column: String },
    #[error("{path} row {row}: unknown label {token:?} (expected `worn` or `serviceable`)")]
    UnknownLabel {
        path: PathBuf,
        row: usize,
        token: String,
    },
    #[error("{path} row {row}: unknown role {token:?} (expected `edge` or `patch`)")]
    UnknownRole {
        path: PathBuf,
        row: usize,
        token: String,
    },
    #[error("{path} row {row}: duplicate image path {image:?}")]
    DuplicatePath {
        path: PathBuf,
        row: usize,
        image: String,
    },
    #[error("{path} row {row}: empty image path")]
    EmptyPath { path: PathBuf, row: usize },
}

/// A 2-D grid of 8-bit intensities, stored row-major.
///
/// Immutable after construction; cheap to clone and safe to share across
/// threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl GrayImage {
    /// Wraps a row-major pixel buffer. Dimensions must be nonzero and the
    /// buffer must hold exactly `width * height` bytes.
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, ImageIoError> {
        if width == 0 || height == 0 {
            return Err(ImageIoError::BadDimensions { width, height });
        }
        let need = width as usize * height as usize;
        if pixels.len() != need {
            return Err(ImageIoError::BadPixelCount {
                width,
                height,
                need,
                got: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// An image with every pixel set to `value`.
    pub fn filled(width: u32, height: u32, value: u8) -> Self {
        Self::new(width, height, vec![value; width as usize * height as usize])
            .expect("nonzero dimensions")
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> u8) -> Self {
        let mut pixels = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels).expect("nonzero dimensions")
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    /// Intensity at (x, y). Panics when out of bounds.
    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        assert!(x < self.width && y < self.height, "pixel ({x}, {y}) out of bounds");
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    /// Copies the half-open window `[x0, x0+w) x [y0, y0+h)` into a new image.
    /// Panics when the window exceeds the image bounds or is empty.
    pub fn crop(&self, x0: u32, y0: u32, w: u32, h: u32) -> GrayImage {
        assert!(w > 0 && h > 0, "empty crop");
        assert!(
            x0 + w <= self.width && y0 + h <= self.height,
            "crop [{x0},{}) x [{y0},{}) exceeds {}x{}",
            x0 + w,
            y0 + h,
            self.width,
            self.height
        );
        let mut pixels = Vec::with_capacity(w as usize * h as usize);
        for y in y0..y0 + h {
            let start = y as usize * self.width as usize + x0 as usize;
            pixels.extend_from_slice(&self.pixels[start..start + w as usize]);
        }
        GrayImage::new(w, h, pixels).expect("nonzero crop")
    }
}

/// Expert label of an image region: worn is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WearLabel {
    Worn,
    Serviceable,
}

impl WearLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            WearLabel::Worn => "worn",
            WearLabel::Serviceable => "serviceable",
        }
    }

    /// Signed class value used by the SVM: worn = +1, serviceable = -1.
    pub fn sign(&self) -> i8 {
        match self {
            WearLabel::Worn => 1,
            WearLabel::Serviceable => -1,
        }
    }
}

impl fmt::Display for WearLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Whether a manifest row points at a whole cutting-edge image or at a
/// pre-cropped wear patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageRole {
    Edge,
    Patch,
}

impl ImageRole {
    pub fn as_str(&self) -> &'static str {
        match self {
            ImageRole::Edge => "edge",
            ImageRole::Patch => "patch",
        }
    }
}

/// One manifest row binding an image file to its expert label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    /// Image path as written in the manifest, resolved against the manifest
    /// directory by [`DatasetManifest::resolve`].
    pub path: String,
    pub role: ImageRole,
    pub label: WearLabel,
    /// Optional id of the source head image, for leakage-free grouping.
    pub group: Option<String>,
}

/// Parsed dataset manifest: image paths, roles and expert labels.
#[derive(Debug, Clone, Default)]
pub struct DatasetManifest {
    entries: Vec<ManifestEntry>,
    base: PathBuf,
}

impl DatasetManifest {
    /// Builds a manifest from rows already in memory. `base` is the directory
    /// entry paths are resolved against.
    pub fn from_entries(entries: Vec<ManifestEntry>, base: PathBuf) -> Self {
        Self { entries, base }
    }

    pub fn entries(&self) -> &[ManifestEntry] {
        &self.entries
    }

    pub fn base(&self) -> &Path {
        &self.base
    }

    /// Absolute-ish path for an entry: relative paths are taken relative to
    /// the manifest's directory.
    pub fn resolve(&self, entry: &ManifestEntry) -> PathBuf {
        let p = Path::new(&entry.path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    /// (worn, serviceable) counts over all entries.
    pub fn class_counts(&self) -> (usize, usize) {
        let worn = self
            .entries
            .iter()
            .filter(|e| e.label == WearLabel::Worn)
            .count();
        (worn, self.entries.len() - worn)
    }

    /// Entries with the given role.
    pub fn with_role(&self, role: ImageRole) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(move |e| e.role == role)
    }
}

/// Loads an image, dispatching on the file's magic bytes.
///
/// Accepted inputs are binary PGM (`P5`, maxval 255) and 8-bit grayscale
/// PNG. Anything else — including the ASCII `P2` PGM variant and color or
/// 16-bit PNGs — is an [`ImageIoError::UnsupportedFormat`].
pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage, ImageIoError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| ImageIoError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    if bytes.starts_with(b"P5") {
        parse_pgm(&bytes, path)
    } else if bytes.starts_with(&[0x89, b'P', b'N', b'G']) {
        parse_png(&bytes, path)
    } else {
        let magic = bytes
            .iter()
            .take(2)
            .map(|b| {
                if b.is_ascii_graphic() {
                    (*b as char).to_string()
                } else {
                    format!("\\x{b:02x}")
                }
            })
            .collect::<String>();
        Err(ImageIoError::UnsupportedFormat {
            path: path.to_path_buf(),
            detail: format!("magic {magic:?}"),
        })
    }
}

/// Writes the canonical binary PGM form: `P5\n<width> <height>\n255\n`
/// followed by the raw row-major bytes. No comments are ever written, so
/// `load_image(save_image(x))` is byte-exact.
pub fn save_image(img: &GrayImage, path: impl AsRef<Path>) -> Result<(), ImageIoError> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(img)).map_err(|source| ImageIoError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// The canonical PGM byte encoding of an image.
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

fn parse_pgm(bytes: &[u8], path: &Path) -> Result<GrayImage, ImageIoError> {
    let err_header = |detail: &str| ImageIoError::MalformedHeader {
        path: path.to_path_buf(),
        detail: detail.to_string(),
    };
    let mut pos = 2; // past "P5"
    let mut fields = [0u32; 3]; // width, height, maxval
    for field in fields.iter_mut() {
        pos = skip_pgm_separators(bytes, pos).ok_or_else(|| err_header("unexpected end of header"))?;
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if pos == start {
            return Err(err_header("expected a decimal field"));
        }
        let text = std::str::from_utf8(&bytes[start..pos]).expect("ascii digits");
        *field = text
            .parse::<u32>()
            .map_err(|_| err_header(&format!("field {text:?} out of range")))?;
    }
    // Exactly one whitespace byte separates the maxval from the raster.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(err_header("missing whitespace before pixel data"));
    }
    pos += 1;
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(ImageIoError::BadMaxval {
            path: path.to_path_buf(),
            maxval,
        });
    }
    if width == 0 || height == 0 {
        return Err(ImageIoError::BadDimensions { width, height });
    }
    let need = width as usize * height as usize;
    let found = bytes.len() - pos;
    if found < need {
        return Err(ImageIoError::Truncated {
            path: path.to_path_buf(),
            expected: need,
            found,
        });
    }
    if found > need {
        return Err(ImageIoError::TrailingData {
            path: path.to_path_buf(),
            found: found - need,
        });
    }
    GrayImage::new(width, height, bytes[pos..].to_vec())
}

/// Advances past whitespace and `#` comment lines between header fields.
fn skip_pgm_separators(bytes: &[u8], mut pos: usize) -> Option<usize> {
    let mut advanced = false;
    loop {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
            advanced = true;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
        } else {
            break;
        }
    }
    // At least one separator byte is required between fields.
    if advanced && pos < bytes.len() {
        Some(pos)
    } else {
        None
    }
}

fn parse_png(bytes: &[u8], path: &Path) -> Result<GrayImage, ImageIoError> {
    let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    let mut reader = decoder.read_info().map_err(|source| ImageIoError::PngDecode {
        path: path.to_path_buf(),
        source,
    })?;
    let info = reader.info();
    if info.color_type != png::ColorType::Grayscale || info.bit_depth != png::BitDepth::Eight {
        return Err(ImageIoError::UnsupportedFormat {
            path: path.to_path_buf(),
            detail: format!(
                "PNG color type {:?} / bit depth {:?}; only 8-bit grayscale is accepted",
                info.color_type, info.bit_depth
            ),
        });
    }
    let mut buf = vec![0u8; reader.output_buffer_size().expect("size fits usize")];
    let frame = reader
        .next_frame(&mut buf)
        .map_err(|source| ImageIoError::PngDecode {
            path: path.to_path_buf(),
            source,
        })?;
    buf.truncate(frame.buffer_size());
    GrayImage::new(frame.width, frame.height, buf)
}

/// Parses a dataset manifest CSV with header `path,role,label,group`.
///
/// Role tokens `edge`/`edge-image` and `patch`/`patch-image` are accepted;
/// labels must be `worn` or `serviceable`; image paths must be unique. The
/// `group` field may be empty.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest, ManifestError> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|source| ManifestError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let manifest = parse_manifest(file, path)?;
    Ok(manifest)
}

fn parse_manifest(reader: impl Read, path: &Path) -> Result<DatasetManifest, ManifestError> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = csv_reader
        .headers()
        .map_err(|source| ManifestError::Csv {
            path: path.to_path_buf(),
            source: Box::new(source),
        })?
        .clone();
    let mut columns = [0usize; 4];
    for (slot, name) in columns.iter_mut().zip(["path", "role", "label", "group"]) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| ManifestError::MissingColumn {
                path: path.to_path_buf(),
                column: name.to_string(),
            })?;
    }
    let [col_path, col_role, col_label, col_group] = columns;

    let mut entries = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (idx, record) in csv_reader.records().enumerate() {
        let row = idx + 2; // 1-based, after the header line
        let record = record.map_err(|source| ManifestError::Csv {
            path: path.to_path_buf(),
            source: Box::new(source),
        })?;
        let field = |col: usize| record.get(col).unwrap_or("");
        let image = field(col_path).to_string();
        if image.is_empty() {
            return Err(ManifestError::EmptyPath {
                path: path.to_path_buf(),
                row,
            });
        }
        if !seen.insert(image.clone()) {
            return Err(ManifestError::DuplicatePath {
                path: path.to_path_buf(),
                row,
                image,
            });
        }
        let role = match field(col_role) {
            "edge" | "edge-image" => ImageRole::Edge,
            "patch" | "patch-image" => ImageRole::Patch,
            other => {
                return Err(ManifestError::UnknownRole {
                    path: path.to_path_buf(),
                    row,
                    token: other.to_string(),
                })
            }
        };
        let label = match field(col_label) {
            "worn" => WearLabel::Worn,
            "serviceable" => WearLabel::Serviceable,
            other => {
                return Err(ManifestError::UnknownLabel {
                    path: path.to_path_buf(),
                    row,
                    token: other.to_string(),
                })
            }
        };
        let group = match field(col_group) {
            "" => None,
            g => Some(g.to_string()),
        };
        entries.push(ManifestEntry {
            path: image,
            role,
            label,
            group,
        });
    }
    let base = path.parent().unwrap_or_else(|| Path::new(".")).to_path_buf();
    Ok(DatasetManifest::from_entries(entries, base))
}

/// Writes a manifest back out in the canonical CSV form.
pub fn save_manifest(
    manifest: &DatasetManifest,
    path: impl AsRef<Path>,
) -> Result<(), ManifestError> {
    let path = path.as_ref();
    let mut out = String::from("path,role,label,group\n");
    for e in manifest.entries() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            e.path,
            e.role.as_str(),
            e.label.as_str(),
            e.group.as_deref().unwrap_or("")
        ));
    }
    fs::write(path, out).map_err(|source| ManifestError::Read {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().expect("tempdir")
    }

    #[test]
    fn pgm_round_trip_hand_written() {
        let dir = tmp();
        let path = dir.path().join("t.pgm");
        fs::write(&path, b"P5\n2 2\n255\n\x00\xff\x80\x40").unwrap();
        let img = load_image(&path).unwrap();
        assert_eq!((img.width(), img.height()), (2, 2));
        assert_eq!(img.pixels(), &[0, 255, 128, 64]);
    }

    #[test]
    fn smallest_image_encoding() {
        let img = GrayImage::new(1, 1, vec![7]).unwrap();
        assert_eq!(encode_pgm(&img), b"P5\n1 1\n255\n\x07");
    }

    #[test]
    fn header_writes_width_first() {
        let img = GrayImage::filled(3, 2, 9);
        let bytes = encode_pgm(&img);
        assert!(bytes.starts_with(b"P5\n3 2\n255\n"));
    }

    #[test]
    fn ascii_pgm_is_rejected() {
        let dir = tmp();
        let path = dir.path().join("t.pgm");
        fs::write(&path, b"P2\n1 1\n255\n7\n").unwrap();
        assert!(matches!(
            load_image(&path),
            Err(ImageIoError::UnsupportedFormat { .. })
        ));
    }

    #[test]
    fn maxval_other_than_255_is_rejected() {
        let dir = tmp();
        let path = dir.path().join("t.pgm");
        fs::write(&path, b"P5\n1 1\n65535\n\x00\x00").unwrap();
        assert!(matches!(
            load_image(&path),
            Err(ImageIoError::BadMaxval { maxval: 65535, .. })
        ));
    }

    #[test]
    fn truncated_raster_is_rejected() {
        let dir = tmp();
        let path = dir.path().join("t.pgm");
        fs::write(&path, b"P5\n2 2\n255\n\x01\x02").unwrap();
        assert!(matches!(
            load_image(&path),
            Err(ImageIoError::Truncated {
                expected: 4,
                found: 2,
                ..
            })
        ));
    }

    #[test]
    fn comments_accepted_on_read() {
        let dir = tmp();
        let path = dir.path().join("t.pgm");
        fs::write(&path, b"P5\n# a comment\n2 1 # trailing\n255\n\x05\x06").unwrap();
        let img = load_image(&path).unwrap();
        assert_eq!(img.pixels(), &[5, 6]);
    }

    #[test]
    fn missing_file_is_an_error() {
        let dir = tmp();
        assert!(matches!(
            load_image(dir.path().join("absent.pgm")),
            Err(ImageIoError::Read { .. })
        ));
    }

    #[test]
    fn round_trip_random_images() {
        let dir = tmp();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for i in 0..100 {
            let img = GrayImage::from_fn(8, 8, |_, _| rng.random());
            let path = dir.path().join(format!("r{i}.pgm"));
            save_image(&img, &path).unwrap();
            assert_eq!(load_image(&path).unwrap(), img);
        }
    }

    #[test]
    fn save_then_load_byte_compare() {
        // For any file in the canonical comment-free form, load followed by
        // save reproduces the file byte for byte.
        let dir = tmp();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for i in 0..50 {
            let w = rng.random_range(1..9u32);
            let h = rng.random_range(1..9u32);
            let img = GrayImage::from_fn(w, h, |_, _| rng.random());
            let original = encode_pgm(&img);
            let path = dir.path().join(format!("c{i}.pgm"));
            fs::write(&path, &original).unwrap();
            let loaded = load_image(&path).unwrap();
            assert_eq!(encode_pgm(&loaded), original);
        }
    }

    #[test]
    fn manifest_basic_row() {
        let dir = tmp();
        let path = dir.path().join("m.csv");
        fs::write(&path, "path,role,label,group\na.pgm,patch,worn,1\n").unwrap();
        let m = load_manifest(&path).unwrap();
        assert_eq!(m.entries().len(), 1);
        assert_eq!(m.entries()[0].label, WearLabel::Worn);
        assert_eq!(m.entries()[0].role, ImageRole::Patch);
        assert_eq!(m.entries()[0].group.as_deref(), Some("1"));
    }

    #[test]
    fn manifest_unknown_label() {
        let dir = tmp();
        let path = dir.path().join("m.csv");
        fs::write(&path, "path,role,label,group\na.pgm,patch,broken,1\n").unwrap();
        assert!(matches!(
            load_manifest(&path),
            Err(ManifestError::UnknownLabel { token, .. }) if token == "broken"
        ));
    }

    #[test]
    fn manifest_duplicate_path() {
        let dir = tmp();
        let path = dir.path().join("m.csv");
        fs::write(
            &path,
            "path,role,label,group\na.pgm,patch,worn,\na.pgm,patch,serviceable,\n",
        )
        .unwrap();
        assert!(matches!(
            load_manifest(&path),
            Err(ManifestError::DuplicatePath { .. })
        ));
    }

    #[test]
    fn manifest_missing_column() {
        let dir = tmp();
        let path = dir.path().join("m.csv");
        fs::write(&path, "path,role,label\na.pgm,patch,worn\n").unwrap();
        assert!(matches!(
            load_manifest(&path),
            Err(ManifestError::MissingColumn { column, .. }) if column == "group"
        ));
    }

    #[test]
    fn manifest_full_dataset_class_counts() {
        // 577 edge images: 301 serviceable and 276 worn.
        let dir = tmp();
        let path = dir.path().join("m.csv");
        let mut text = String::from("path,role,label,group\n");
        for i in 0..301 {
            text.push_str(&format!("s{i}.pgm,edge,serviceable,{}\n", i / 3));
        }
        for i in 0..276 {
            text.push_str(&format!("w{i}.pgm,edge,worn,{}\n", i / 3));
        }
        fs::write(&path, text).unwrap();
        let m = load_manifest(&path).unwrap();
        assert_eq!(m.entries().len(), 577);
        assert_eq!(m.class_counts(), (276, 301));
    }

    #[test]
    fn manifest_counts_stable_under_permutation() {
        let dir = tmp();
        let mut rows: Vec<String> = (0..20)
            .map(|i| {
                let label = if i % 3 == 0 { "worn" } else { "serviceable" };
                format!("im{i}.pgm,edge,{label},")
            })
            .collect();
        let path_a = dir.path().join("a.csv");
        fs::write(&path_a, format!("path,role,label,group\n{}\n", rows.join("\n"))).unwrap();
        let counts_a = load_manifest(&path_a).unwrap().class_counts();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        use rand::seq::SliceRandom;
        rows.shuffle(&mut rng);
        let path_b = dir.path().join("b.csv");
        fs::write(&path_b, format!("path,role,label,group\n{}\n", rows.join("\n"))).unwrap();
        assert_eq!(load_manifest(&path_b).unwrap().class_counts(), counts_a);
    }

    #[test]
    fn png_grayscale_round_trip_and_color_rejection() {
        let dir = tmp();
        let gray_path = dir.path().join("g.png");
        let rgb_path = dir.path().join("c.png");
        write_png(&gray_path, 3, 2, png::ColorType::Grayscale, &[1, 2, 3, 4, 5, 6]);
        write_png(
            &rgb_path,
            1,
            1,
            png::ColorType::Rgb,
            &[10, 20, 30],
        );
        let img = load_image(&gray_path).unwrap();
        assert_eq!((img.width(), img.height()), (3, 2));
        assert_eq!(img.pixels(), &[1, 2, 3, 4, 5, 6]);
        assert!(matches!(
            load_image(&rgb_path),
            Err(ImageIoError::UnsupportedFormat { .. })
        ));
    }

    fn write_png(path: &Path, w: u32, h: u32, color: png::ColorType, data: &[u8]) {
        let file = fs::File::create(path).unwrap();
        let mut enc = png::Encoder::new(file, w, h);
        enc.set_color(color);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header().unwrap();
        writer.write_image_data(data).unwrap();
    }

    proptest! {
        #[test]
        fn prop_round_trip_bit_exact(
            w in 1u32..12,
            h in 1u32..12,
            seed in any::<u64>(),
        ) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let img = GrayImage::from_fn(w, h, |_, _| rng.random());
            let dir = tmp();
            let path = dir.path().join("p.pgm");
            save_image(&img, &path).unwrap();
            prop_assert_eq!(load_image(&path).unwrap(), img);
        }
    }
}
